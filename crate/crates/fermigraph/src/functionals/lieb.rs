//! F(ρ) = sup_v E(v) − v·ρ by damped Newton ascent with a supergradient fallback.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{closest_ensemble_density, linear_response, System};
use crate::convex::project_gauge_ball;
use crate::error::{Error, Result};
use crate::linalg::{solve, Matrix};
use crate::scalar::{czero, dot, norm1, norm2, norm_inf};
use crate::spectra::{check_hypersimplex, density_of, GroundManifold, DENSITY_TOL};

#[derive(Clone, Debug)]
pub struct LiebOptions {
    pub max_iter: usize,
    /// Stop once an accepted step moves v by less than this (2-norm).
    pub step_tol: f64,
    /// Stop once ‖ρ_gs(v) − ρ‖_∞ falls below this.
    pub grad_tol: f64,
    pub degeneracy_tol: f64,
    pub hull_samples: usize,
    /// Densities with a component within this distance of 0 or 1 are refused.
    pub boundary_tol: f64,
    pub seed: u64,
    pub initial_v: Option<Vec<f64>>,
}

impl Default for LiebOptions {
    fn default() -> Self {
        Self {
            max_iter: 10_000,
            step_tol: 1e-9,
            grad_tol: 1e-12,
            degeneracy_tol: 1e-8,
            hull_samples: 128,
            boundary_tol: 1e-12,
            seed: 0,
            initial_v: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LiebStatus {
    Converged,
    Stalled,
    OutsideDomain,
}

#[derive(Clone, Debug, Serialize)]
pub struct LiebEvaluation {
    pub value: f64,
    /// Maximiser in the gauge Σv = 0.
    pub maximizer_v: Vec<f64>,
    pub iterations: usize,
    /// Upper bound on sup G − G(v*) over the search ball.
    pub certificate_gap: f64,
    /// ‖ρ_gs(v*) − ρ‖₂ for the selected ground density.
    pub density_residual: f64,
    /// 1-norm bound R_ρ on maximising potentials normalised to E(v) = 0.
    pub radius: f64,
    pub status: LiebStatus,
}

/// R_ρ = (min ρ)^{-1}·((p+q+2)/(q−p))·‖H_0‖, maximised over all ways of splitting the
/// density mass A + B = N between vertices with v ≥ 0 and v < 0. For each split the
/// pair is p = 1 − δB/A, q = 1 + δ with δ half of its largest feasible value
/// min(1/max ρ − 1, A/B).
pub fn search_radius(rho: &[f64], n: usize, h0_norm: f64) -> f64 {
    let nn = n as f64;
    let rmin = rho.iter().cloned().fold(f64::INFINITY, f64::min);
    let rmax = rho.iter().cloned().fold(0.0, f64::max);
    let (lo, hi) = (rmin, nn - rmin);
    let factor = |a: f64| {
        let b = nn - a;
        let delta = 0.5 * (1.0 / rmax - 1.0).min(a / b);
        let (p, q) = (1.0 - delta * b / a, 1.0 + delta);
        (p + q + 2.0) / (q - p)
    };
    let steps = 2048;
    let worst = (0..=steps)
        .map(|k| factor(lo + (hi - lo) * k as f64 / steps as f64))
        .fold(1.0f64, f64::max);
    worst * h0_norm / rmin
}

struct Probe {
    v: Vec<f64>,
    value: f64,
    grad: Vec<f64>,
    chi: Option<Matrix<f64>>,
}

fn probe(sys: &System, rho: &[f64], v: Vec<f64>, opts: &LiebOptions, rng: &mut ChaCha8Rng) -> Result<Probe> {
    let spec = sys.spectrum(&v)?;
    let gm = GroundManifold::from_spectrum(&spec, opts.degeneracy_tol);
    let energy = spec.values[0];
    let (sel, chi) = if gm.degeneracy == 1 {
        let chi = (gm.gap > 1e-6 * energy.abs().max(1.0)).then(|| linear_response(&spec));
        (density_of(&spec.state(0)).values().to_vec(), chi)
    } else {
        (closest_ensemble_density(&gm, rho, opts.hull_samples, rng), None)
    };
    let grad: Vec<f64> = sel.iter().zip(rho).map(|(a, b)| a - b).collect();
    Ok(Probe { value: energy - dot(&v, rho), v, grad, chi })
}

pub fn lieb_f(rho: &[f64], sys: &System, opts: &LiebOptions) -> Result<LiebEvaluation> {
    let (m, n) = (sys.m(), sys.n());
    if rho.len() != m {
        return Err(Error::DimensionMismatch(format!("density of length {} for M = {m}", rho.len())));
    }
    if check_hypersimplex(rho, n, m, DENSITY_TOL).is_err() {
        return Ok(LiebEvaluation {
            value: f64::INFINITY,
            maximizer_v: vec![0.0; m],
            iterations: 0,
            certificate_gap: 0.0,
            density_residual: f64::INFINITY,
            radius: f64::INFINITY,
            status: LiebStatus::OutsideDomain,
        });
    }
    if let Some(i) = rho.iter().position(|&x| x <= opts.boundary_tol || x >= 1.0 - opts.boundary_tol) {
        return Err(Error::BoundaryDensity(format!(
            "rho_{} = {} lies on the boundary of the density domain; a maximising potential is only \
             guaranteed for strictly interior densities",
            i + 1,
            rho[i]
        )));
    }
    let radius = search_radius(rho, n, sys.h0_norm());
    // the bound holds in the gauge E(v) = 0; moving to Σv = 0 at most doubles the 1-norm
    let ball = 2.0 * radius;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let start = project_gauge_ball(opts.initial_v.as_deref().unwrap_or(&vec![0.0; m]), ball);
    let mut cur = probe(sys, rho, start, opts, &mut rng)?;
    let mut lm = 1e-10;
    let mut status = LiebStatus::Stalled;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        if norm_inf(&cur.grad) < opts.grad_tol {
            status = LiebStatus::Converged;
            break;
        }
        iterations += 1;
        let mut next = None;
        if let Some(chi) = &cur.chi {
            let scale = (0..m).map(|i| -chi[(i, i)]).sum::<f64>().max(1e-12);
            let mut first = true;
            for _ in 0..12 {
                let a = Matrix::from_fn(m, m, |i, j| {
                    -chi[(i, j)] + 1.0 / m as f64 + if i == j { lm * scale } else { 0.0 }
                });
                if let Some(d) = solve(a, cur.grad.clone(), 1e-14) {
                    // predicted gain of the quadratic model; below rounding the maximum is reached
                    if first && 0.5 * dot(&cur.grad, &d) <= 4.0 * f64::EPSILON * cur.value.abs().max(1.0) {
                        status = LiebStatus::Converged;
                        break;
                    }
                    let trial: Vec<f64> = cur.v.iter().zip(&d).map(|(a, b)| a + b).collect();
                    let cand = probe(sys, rho, project_gauge_ball(&trial, ball), opts, &mut rng)?;
                    if cand.value > cur.value {
                        lm = (lm * 0.1).max(1e-12);
                        next = Some(cand);
                        break;
                    }
                }
                lm *= 10.0;
                first = false;
            }
        }
        if status == LiebStatus::Converged {
            break;
        }
        if next.is_none() {
            // the maximiser sits on a degenerate manifold where G has a kink; finish on the smoothed dual
            let sm = smoothed_ascent(sys, rho, &cur.v, ball, opts.max_iter - iterations)?;
            iterations += sm.iterations;
            let exact = sys.ground_energy(&sm.v)? - dot(&sm.v, rho);
            if exact >= cur.value {
                cur.value = exact;
                cur.v = sm.v;
            }
            let gap = sm.gap;
            let converged = sm.converged && gap <= SMOOTH_GAP_TOL * cur.value.abs().max(1.0);
            return Ok(LiebEvaluation {
                value: cur.value,
                density_residual: norm2(&sm.grad),
                maximizer_v: cur.v,
                iterations,
                certificate_gap: gap,
                radius,
                status: if converged { LiebStatus::Converged } else { LiebStatus::Stalled },
            });
        }
        let Some(nx) = next else { break };
        let moved = norm2(&nx.v.iter().zip(&cur.v).map(|(a, b)| a - b).collect::<Vec<_>>());
        cur = nx;
        if moved < opts.step_tol && cur.chi.is_none() {
            break;
        }
        if moved < opts.step_tol * 1e-3 {
            break;
        }
    }
    if norm_inf(&cur.grad) < opts.grad_tol {
        status = LiebStatus::Converged;
    }
    let gap = norm_inf(&cur.grad) * (ball + norm1(&cur.v));
    Ok(LiebEvaluation {
        value: cur.value,
        density_residual: norm2(&cur.grad),
        maximizer_v: cur.v,
        iterations,
        certificate_gap: gap,
        radius,
        status,
    })
}

/// Relative certificate gap accepted from the smoothed phase.
const SMOOTH_GAP_TOL: f64 = 1e-9;

struct Thermal {
    value: f64,
    grad: Vec<f64>,
    hess: Matrix<f64>,
}

/// G_β(v) = −β⁻¹ ln Tr e^{−βH(v)} − v·ρ with its gradient and (negative semidefinite) Hessian.
fn thermal(sys: &System, rho: &[f64], v: &[f64], beta: f64) -> Result<Thermal> {
    let spec = sys.spectrum(v)?;
    let basis = spec.basis();
    let (m, l) = (basis.m(), basis.len());
    let e0 = spec.values[0];
    let boltz: Vec<f64> = spec.values.iter().map(|&e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = boltz.iter().sum();
    let p: Vec<f64> = boltz.iter().map(|b| b / z).collect();
    let active: Vec<usize> = (0..l).filter(|&k| p[k] > 0.0).collect();
    // a[k][l][i] = ⟨k| n_i |l⟩ for active k
    let mut a = vec![vec![vec![czero::<f64>(); m]; l]; active.len()];
    for (r, idx) in basis.states().iter().enumerate() {
        for (ka, &k) in active.iter().enumerate() {
            let ck = spec.vectors[(r, k)].conj();
            for (q, row) in a[ka].iter_mut().enumerate() {
                let zz = ck * spec.vectors[(r, q)];
                for i in idx.vertices() {
                    row[i] += zz;
                }
            }
        }
    }
    let mut dens = vec![0.0; m];
    for (ka, &k) in active.iter().enumerate() {
        for i in 0..m {
            dens[i] += p[k] * a[ka][k][i].re;
        }
    }
    let mut hess = Matrix::from_fn(m, m, |i, j| beta * dens[i] * dens[j]);
    let is_active = |q: usize| p[q] > 0.0;
    for (ka, &k) in active.iter().enumerate() {
        for q in 0..l {
            let (lo, hi) = if spec.values[k] <= spec.values[q] { (k, q) } else { (q, k) };
            let de = spec.values[hi] - spec.values[lo];
            let d = if beta * de < 1e-12 { -beta * p[lo] } else { p[lo] * (-beta * de).exp_m1() / de };
            // pairs with an inactive partner are visited once; count them for both orders
            let w = if is_active(q) { d } else { 2.0 * d };
            let row = &a[ka][q];
            for i in 0..m {
                for j in 0..m {
                    hess[(i, j)] += w * (row[i] * row[j].conj()).re;
                }
            }
        }
    }
    Ok(Thermal {
        value: e0 - z.ln() / beta - dot(v, rho),
        grad: dens.iter().zip(rho).map(|(x, y)| x - y).collect(),
        hess,
    })
}

struct Smoothed {
    v: Vec<f64>,
    grad: Vec<f64>,
    gap: f64,
    iterations: usize,
    converged: bool,
}

/// Newton ascent on G_β with β increased tenfold per stage. Since
/// E(v) − ln(dim)/β ≤ E_β(v) ≤ E(v), the final stage brackets F within ln(dim)/β.
fn smoothed_ascent(sys: &System, rho: &[f64], v0: &[f64], ball: f64, budget: usize) -> Result<Smoothed> {
    let m = rho.len();
    let ln_dim = (sys.basis.len() as f64).ln().max(f64::EPSILON);
    let mut beta = 1.0 / sys.h0_norm().max(1e-3);
    let mut v = v0.to_vec();
    let mut cur = thermal(sys, rho, &v, beta)?;
    let mut iterations = 0;
    let mut decrement: f64;
    loop {
        decrement = f64::INFINITY;
        for _ in 0..100 {
            if iterations >= budget {
                break;
            }
            iterations += 1;
            let scale = (0..m).map(|i| -cur.hess[(i, i)]).sum::<f64>().max(1e-12);
            let a = Matrix::from_fn(m, m, |i, j| {
                -cur.hess[(i, j)] + 1.0 / m as f64 + if i == j { 1e-14 * scale } else { 0.0 }
            });
            let Some(d) = solve(a, cur.grad.clone(), 1e-15) else { break };
            decrement = 0.5 * dot(&cur.grad, &d);
            if decrement <= 4.0 * f64::EPSILON * cur.value.abs().max(1.0) {
                break;
            }
            let mut t = 1.0;
            let mut accepted = false;
            while t > 1e-12 {
                let mut trial: Vec<f64> = v.iter().zip(&d).map(|(x, y)| x + t * y).collect();
                let mean = trial.iter().sum::<f64>() / m as f64;
                trial.iter_mut().for_each(|x| *x -= mean);
                let cand = thermal(sys, rho, &trial, beta)?;
                if cand.value > cur.value {
                    v = trial;
                    cur = cand;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted || norm1(&v) > 10.0 * ball {
                break;
            }
        }
        if norm1(&v) > 10.0 * ball || iterations >= budget {
            break;
        }
        if ln_dim / beta <= 0.1 * SMOOTH_GAP_TOL * cur.value.abs().max(1.0) {
            break;
        }
        beta *= 10.0;
        cur = thermal(sys, rho, &v, beta)?;
    }
    let decrement = decrement.max(0.0);
    let converged = norm1(&v) <= 10.0 * ball && iterations < budget && decrement.is_finite();
    Ok(Smoothed {
        grad: cur.grad,
        gap: ln_dim / beta + if decrement.is_finite() { decrement } else { f64::INFINITY },
        v,
        iterations,
        converged,
    })
}
