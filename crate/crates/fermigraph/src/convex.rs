//! Euclidean projections and a simplex-constrained least-squares solver.

/// Projection onto the probability simplex {x ≥ 0, Σx = 1} by sorting.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    project_scaled_simplex(v, 1.0)
}

/// Projection onto {x ≥ 0, Σx = z}.
pub fn project_scaled_simplex(v: &[f64], z: f64) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &x) in u.iter().enumerate() {
        cumsum += x;
        let t = (cumsum - z) / (k + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Projection onto the l1 ball of radius `r`.
pub fn project_l1_ball(v: &[f64], r: f64) -> Vec<f64> {
    if v.iter().map(|x| x.abs()).sum::<f64>() <= r {
        return v.to_vec();
    }
    let mags = project_scaled_simplex(&v.iter().map(|x| x.abs()).collect::<Vec<_>>(), r);
    v.iter().zip(mags).map(|(x, m)| m.copysign(*x)).collect()
}

/// Projection onto {Σx = 0} ∩ {‖x‖₁ ≤ r} by Dykstra's alternating scheme.
pub fn project_gauge_ball(v: &[f64], r: f64) -> Vec<f64> {
    let centre = |x: &[f64]| {
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        x.iter().map(|a| a - mean).collect::<Vec<_>>()
    };
    let mut x = centre(v);
    if x.iter().map(|a| a.abs()).sum::<f64>() <= r {
        return x;
    }
    let n = v.len();
    let (mut p, mut q) = (vec![0.0; n], vec![0.0; n]);
    x = v.to_vec();
    for _ in 0..2000 {
        let y_in: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + b).collect();
        let y = project_l1_ball(&y_in, r);
        p = y_in.iter().zip(&y).map(|(a, b)| a - b).collect();
        let z_in: Vec<f64> = y.iter().zip(&q).map(|(a, b)| a + b).collect();
        let z = centre(&z_in);
        q = z_in.iter().zip(&z).map(|(a, b)| a - b).collect();
        let change: f64 = z.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = z;
        if change < 1e-15 * (1.0 + r) {
            break;
        }
    }
    x
}

/// Projection onto the hypersimplex {0 ≤ x ≤ 1, Σx = n} by bisection on the shift.
pub fn project_hypersimplex(v: &[f64], n: usize) -> Vec<f64> {
    let target = n as f64;
    let at = |tau: f64| v.iter().map(|&x| (x - tau).clamp(0.0, 1.0)).collect::<Vec<_>>();
    let total = |tau: f64| at(tau).iter().sum::<f64>();
    let lo0 = v.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0;
    let hi0 = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (mut lo, mut hi) = (lo0, hi0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * (1.0 + hi.abs()) {
            break;
        }
    }
    at(0.5 * (lo + hi))
}

/// Convex weights λ minimising ‖Σ_k λ_k p_k − target‖² (accelerated projected gradient).
pub fn simplex_least_squares(points: &[Vec<f64>], target: &[f64], max_iter: usize) -> Vec<f64> {
    let k = points.len();
    assert!(k > 0);
    // Gram matrix and linear term of the quadratic in λ
    let gram: Vec<Vec<f64>> = points
        .iter()
        .map(|a| points.iter().map(|b| a.iter().zip(b).map(|(x, y)| x * y).sum()).collect())
        .collect();
    let lin: Vec<f64> = points.iter().map(|a| a.iter().zip(target).map(|(x, y)| x * y).sum()).collect();
    let lip = gram.iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max).max(1e-300);
    let grad = |l: &[f64]| -> Vec<f64> {
        (0..k).map(|i| gram[i].iter().zip(l).map(|(g, x)| g * x).sum::<f64>() - lin[i]).collect()
    };
    let mut x = vec![1.0 / k as f64; k];
    let mut y = x.clone();
    let mut t = 1.0f64;
    for _ in 0..max_iter {
        let g = grad(&y);
        let step: Vec<f64> = y.iter().zip(&g).map(|(a, b)| a - b / lip).collect();
        let next = project_simplex(&step);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let moved: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        y = next.iter().zip(&x).map(|(a, b)| a + (t - 1.0) / t_next * (a - b)).collect();
        x = next;
        t = t_next;
        if moved < 1e-16 {
            break;
        }
    }
    x
}
