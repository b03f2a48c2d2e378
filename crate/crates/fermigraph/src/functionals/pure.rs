//! F̃(ρ) = inf { ⟨Ψ, H_0 Ψ⟩ : Ψ ↦ ρ } by multi-start augmented-Lagrangian minimisation
//! on the unit sphere.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::System;
use crate::error::{Error, Result};
use crate::fock::WaveFunction;
use crate::repr::state_from_density;
use crate::scalar::{czero, C};
use crate::spectra::{check_hypersimplex, DENSITY_TOL};

#[derive(Clone, Debug)]
pub struct PureOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Penalty weights μ, used in order; the last one is kept for further multiplier updates.
    pub mu_schedule: Vec<f64>,
    pub residual_tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
}

impl Default for PureOptions {
    fn default() -> Self {
        Self {
            restarts: 32,
            seed: 0,
            mu_schedule: vec![1e1, 1e2, 1e3, 1e4],
            residual_tol: 1e-7,
            max_outer: 60,
            max_inner: 3000,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PureEvaluation {
    pub value: f64,
    #[serde(skip)]
    pub minimizer_psi: WaveFunction<f64>,
    /// ‖ρ[Ψ] − ρ‖₂ at the returned state.
    pub constraint_residual: f64,
    pub restarts_used: usize,
    pub converged: bool,
    /// Final value of every restart whose residual met the tolerance, in restart order.
    pub restart_values: Vec<Option<f64>>,
}

/// Row-compressed copy of H_0 restricted to the admissible basis states.
struct Sparse {
    rows: Vec<Vec<(usize, C<f64>)>>,
    occ: Vec<Vec<usize>>,
}

impl Sparse {
    fn apply(&self, x: &[C<f64>], out: &mut [C<f64>]) {
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.iter().fold(czero(), |acc, (j, a)| acc + a * x[*j]);
        }
    }
}

struct Restart {
    value: f64,
    residual: f64,
    coeffs: Vec<C<f64>>,
}

pub fn pure_f(rho: &[f64], sys: &System, opts: &PureOptions) -> Result<PureEvaluation> {
    let (m, n) = (sys.m(), sys.n());
    check_hypersimplex(rho, n, m, DENSITY_TOL)?;
    if opts.restarts == 0 || opts.mu_schedule.is_empty() {
        return Err(Error::InvalidInput("pure_f needs at least one restart and one penalty weight".into()));
    }
    let basis = sys.basis.clone();
    // states forced to vanish by empty or full vertices
    let edge = 1e-14;
    let admissible: Vec<usize> = (0..basis.len())
        .filter(|&k| {
            let s = basis.state(k);
            (0..m).all(|i| !(rho[i] <= edge && s.contains(i)) && !(rho[i] >= 1.0 - edge && !s.contains(i)))
        })
        .collect();
    let pos: Vec<Option<usize>> = {
        let mut p = vec![None; basis.len()];
        admissible.iter().enumerate().for_each(|(a, &k)| p[k] = Some(a));
        p
    };
    let h = sys.free_operator().matrix();
    let sparse = Sparse {
        rows: admissible
            .iter()
            .map(|&r| {
                admissible
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| h[(r, c)] != czero())
                    .map(|(a, &c)| (a, h[(r, c)]))
                    .collect()
            })
            .collect(),
        occ: admissible.iter().map(|&k| basis.state(k).vertices().collect()).collect(),
    };
    let start = state_from_density(rho, &basis)?;
    let base: Vec<C<f64>> = admissible.iter().map(|&k| start.coeffs()[k]).collect();

    let runs: Vec<Restart> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(r as u64));
            let init = perturbed(&base, r, &mut rng);
            augmented_lagrangian(&sparse, rho, init, opts)
        })
        .collect();

    let ok = |x: &Restart| x.residual <= opts.residual_tol;
    let restart_values = runs.iter().map(|x| ok(x).then_some(x.value)).collect();
    let best = runs
        .iter()
        .enumerate()
        .filter(|(_, x)| ok(x))
        .min_by(|a, b| a.1.value.partial_cmp(&b.1.value).unwrap().then(a.0.cmp(&b.0)))
        .or_else(|| {
            runs.iter()
                .enumerate()
                .min_by(|a, b| a.1.residual.partial_cmp(&b.1.residual).unwrap().then(a.0.cmp(&b.0)))
        })
        .map(|(_, x)| x)
        .unwrap();
    let mut full = vec![czero(); basis.len()];
    for (k, p) in pos.iter().enumerate() {
        if let Some(a) = p {
            full[k] = best.coeffs[*a];
        }
    }
    Ok(PureEvaluation {
        value: best.value,
        minimizer_psi: WaveFunction::new(basis, full)?,
        constraint_residual: best.residual,
        restarts_used: opts.restarts,
        converged: ok(best),
        restart_values,
    })
}

fn perturbed(base: &[C<f64>], r: usize, rng: &mut ChaCha8Rng) -> Vec<C<f64>> {
    if r == 0 {
        return base.to_vec();
    }
    let amp: f64 = rng.random_range(0.05..1.0);
    let scale = amp / (base.len() as f64).sqrt();
    let out: Vec<C<f64>> = base
        .iter()
        .map(|b| {
            let phase = C::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
            let noise = C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale;
            b * phase + noise
        })
        .collect();
    normalise(out)
}

fn normalise(x: Vec<C<f64>>) -> Vec<C<f64>> {
    let n = crate::scalar::cnorm(&x);
    x.into_iter().map(|z| z / n).collect()
}

/// Objective pieces at a normalised state.
struct Eval {
    f: f64,
    energy: f64,
    d: Vec<f64>,
    /// Riemannian gradient in C^L (tangent to the sphere).
    grad: Vec<C<f64>>,
}

fn evaluate(op: &Sparse, rho: &[f64], psi: &[C<f64>], lambda: &[f64], mu: f64, hpsi: &mut [C<f64>]) -> Eval {
    op.apply(psi, hpsi);
    let energy: f64 = psi.iter().zip(hpsi.iter()).map(|(a, b)| (a.conj() * b).re).sum();
    let mut d: Vec<f64> = rho.iter().map(|r| -r).collect();
    for (c, occ) in psi.iter().zip(&op.occ) {
        let w = c.norm_sqr();
        occ.iter().for_each(|&i| d[i] += w);
    }
    let f = energy + d.iter().zip(lambda).map(|(a, b)| a * b).sum::<f64>() + mu * d.iter().map(|x| x * x).sum::<f64>();
    let shift: Vec<f64> = lambda.iter().zip(&d).map(|(l, x)| l + 2.0 * mu * x).collect();
    let mut grad: Vec<C<f64>> = hpsi
        .iter()
        .zip(psi)
        .zip(&op.occ)
        .map(|((h, c), occ)| (h + c * occ.iter().map(|&i| shift[i]).sum::<f64>()) * 2.0)
        .collect();
    let radial: f64 = grad.iter().zip(psi).map(|(g, c)| (c.conj() * g).re).sum();
    grad.iter_mut().zip(psi).for_each(|(g, c)| *g -= c * radial);
    Eval { f, energy, d, grad }
}

fn real_dot(a: &[C<f64>], b: &[C<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

/// Limited-memory BFGS on the sphere with vector transport by projection and
/// retraction by normalisation.
fn lbfgs(op: &Sparse, rho: &[f64], mut psi: Vec<C<f64>>, lambda: &[f64], mu: f64, max_iter: usize) -> (Vec<C<f64>>, Eval) {
    const MEMORY: usize = 8;
    let l = psi.len();
    let mut hpsi = vec![czero(); l];
    let mut cur = evaluate(op, rho, &psi, lambda, mu, &mut hpsi);
    let mut hist: Vec<(Vec<C<f64>>, Vec<C<f64>>, f64)> = Vec::new();
    for _ in 0..max_iter {
        let gnorm = real_dot(&cur.grad, &cur.grad).sqrt();
        if gnorm < 1e-11 {
            break;
        }
        // two-loop recursion
        let mut q = cur.grad.clone();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho_k) in hist.iter().rev() {
            let a = rho_k * real_dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= yi * a);
            alphas.push(a);
        }
        if let Some((s, y, _)) = hist.last() {
            let gamma = real_dot(s, y) / real_dot(y, y);
            q.iter_mut().for_each(|x| *x *= gamma);
        } else {
            q.iter_mut().for_each(|x| *x /= gnorm.max(1.0));
        }
        for ((s, y, rho_k), a) in hist.iter().zip(alphas.iter().rev()) {
            let b = rho_k * real_dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += si * (a - b));
        }
        let mut dir: Vec<C<f64>> = q.into_iter().map(|x| -x).collect();
        let mut slope = real_dot(&dir, &cur.grad);
        if slope >= 0.0 {
            hist.clear();
            dir = cur.grad.iter().map(|g| -g / gnorm.max(1.0)).collect();
            slope = real_dot(&dir, &cur.grad);
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial = normalise(psi.iter().zip(&dir).map(|(p, d)| p + d * t).collect());
            let e = evaluate(op, rho, &trial, lambda, mu, &mut hpsi);
            if e.f <= cur.f + 1e-4 * t * slope {
                accepted = Some((trial, e));
                break;
            }
            t *= 0.5;
        }
        let Some((next, e)) = accepted else { break };
        let s: Vec<C<f64>> = next.iter().zip(&psi).map(|(a, b)| a - b).collect();
        let y: Vec<C<f64>> = e.grad.iter().zip(&cur.grad).map(|(a, b)| a - b).collect();
        let sy = real_dot(&s, &y);
        let progress = cur.f - e.f;
        psi = next;
        cur = e;
        if sy > 1e-300 {
            if hist.len() == MEMORY {
                hist.remove(0);
            }
            hist.push((s, y, 1.0 / sy));
        }
        if progress <= 1e-16 * cur.f.abs().max(1.0) && gnorm < 1e-8 {
            break;
        }
    }
    (psi, cur)
}

fn augmented_lagrangian(op: &Sparse, rho: &[f64], init: Vec<C<f64>>, opts: &PureOptions) -> Restart {
    let m = rho.len();
    let mut lambda = vec![0.0; m];
    let mut stage = 0;
    let mut psi = init;
    let mut last_res = f64::INFINITY;
    let mut best: Option<Restart> = None;
    for _ in 0..opts.max_outer {
        let mu = opts.mu_schedule[stage];
        let (next, e) = lbfgs(op, rho, psi, &lambda, mu, opts.max_inner);
        psi = next;
        let res = e.d.iter().map(|x| x * x).sum::<f64>().sqrt();
        let better = best.as_ref().map_or(true, |b| {
            let ok_new = res <= opts.residual_tol;
            let ok_old = b.residual <= opts.residual_tol;
            (ok_new && !ok_old) || (ok_new == ok_old && if ok_new { e.energy < b.value } else { res < b.residual })
        });
        if better {
            best = Some(Restart { value: e.energy, residual: res, coeffs: psi.clone() });
        }
        if res <= opts.residual_tol * 1e-3 {
            break;
        }
        for (l, x) in lambda.iter_mut().zip(&e.d) {
            *l += 2.0 * mu * x;
        }
        if res > 0.25 * last_res && stage + 1 < opts.mu_schedule.len() {
            stage += 1;
        }
        last_res = res;
    }
    best.unwrap()
}
