//! E(v) = min_ρ F(ρ) + v·ρ by projected descent over the hypersimplex.

use serde::Serialize;

use super::{lieb_f, pure_f, triangle_f_analytic, LiebOptions, PureOptions, System};
use crate::convex::project_hypersimplex;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::spectra::Density;

/// A functional of the density together with the H_0 it belongs to.
pub trait DensityFunctional: Sync {
    fn system(&self) -> &System;

    fn value(&self, rho: &[f64]) -> Result<f64>;

    /// Analytic gradient where available; the minimiser falls back to differences.
    fn gradient(&self, _rho: &[f64]) -> Result<Option<Vec<f64>>> {
        Ok(None)
    }
}

/// F̃ of two particles on the triangle, in closed form.
pub struct TriangleFunctional {
    sys: System,
}

impl TriangleFunctional {
    pub fn new() -> Self {
        Self { sys: System::kinetic(&Graph::triangle(), 2).expect("triangle system") }
    }
}

impl Default for TriangleFunctional {
    fn default() -> Self {
        Self::new()
    }
}

impl DensityFunctional for TriangleFunctional {
    fn system(&self) -> &System {
        &self.sys
    }

    fn value(&self, rho: &[f64]) -> Result<f64> {
        Ok(triangle_f_analytic(rho)?.value)
    }

    fn gradient(&self, rho: &[f64]) -> Result<Option<Vec<f64>>> {
        Ok(triangle_f_analytic(rho)?.gradient.map(|g| g.to_vec()))
    }
}

pub struct LiebFunctional<'a> {
    pub system: &'a System,
    pub options: LiebOptions,
}

impl DensityFunctional for LiebFunctional<'_> {
    fn system(&self) -> &System {
        self.system
    }

    fn value(&self, rho: &[f64]) -> Result<f64> {
        Ok(lieb_f(rho, self.system, &self.options)?.value)
    }

    /// −v* is a subgradient of F at ρ.
    fn gradient(&self, rho: &[f64]) -> Result<Option<Vec<f64>>> {
        let e = lieb_f(rho, self.system, &self.options)?;
        Ok(e.value.is_finite().then(|| e.maximizer_v.iter().map(|x| -x).collect()))
    }
}

pub struct PureFunctional<'a> {
    pub system: &'a System,
    pub options: PureOptions,
}

impl DensityFunctional for PureFunctional<'_> {
    fn system(&self) -> &System {
        self.system
    }

    fn value(&self, rho: &[f64]) -> Result<f64> {
        Ok(pure_f(rho, self.system, &self.options)?.value)
    }
}

#[derive(Clone, Debug)]
pub struct MinimizeOptions {
    pub max_iter: usize,
    pub step_tol: f64,
    /// Step for central differences when no gradient is available.
    pub fd_step: f64,
    pub initial_rho: Option<Vec<f64>>,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self { max_iter: 5000, step_tol: 1e-12, fd_step: 1e-6, initial_rho: None }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyMinimization {
    pub energy: f64,
    pub rho: Density<f64>,
    /// F at the minimising density.
    pub functional_value: f64,
    /// Lowest eigenvalue of H_0 + V for comparison.
    pub ground_energy: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn objective(f: &dyn DensityFunctional, v: &[f64], rho: &[f64]) -> Result<f64> {
    Ok(f.value(rho)? + v.iter().zip(rho).map(|(a, b)| a * b).sum::<f64>())
}

fn gradient(f: &dyn DensityFunctional, v: &[f64], rho: &[f64], n: usize, h: f64) -> Result<Vec<f64>> {
    let g = match f.gradient(rho)? {
        Some(g) => g,
        None => {
            // differences along e_i − e_j stay on Σρ = N; stay inside the box by one-sided steps
            let m = rho.len();
            let f0 = f.value(rho)?;
            let mut g = vec![0.0; m];
            for i in 0..m {
                let mut p = rho.to_vec();
                let up = rho[i] + h <= 1.0;
                p[i] += if up { h } else { -h };
                let p = project_hypersimplex(&p, n);
                let d: f64 = p[i] - rho[i];
                if d.abs() > 0.0 {
                    g[i] = (f.value(&p)? - f0) / d;
                }
            }
            g
        }
    };
    Ok(g.iter().zip(v).map(|(a, b)| a + b).collect())
}

pub fn minimize_energy_via_functional(
    v: &[f64],
    f: &dyn DensityFunctional,
    opts: &MinimizeOptions,
) -> Result<EnergyMinimization> {
    let sys = f.system();
    let (m, n) = (sys.m(), sys.n());
    if v.len() != m {
        return Err(Error::DimensionMismatch(format!("potential of length {} for M = {m}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("potential must be finite".into()));
    }
    let mut rho = match &opts.initial_rho {
        Some(r) => Density::new(r.clone(), n)?.values().to_vec(),
        None => vec![n as f64 / m as f64; m],
    };
    let mut val = objective(f, v, &rho)?;
    let mut step = 1.0f64;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let g = gradient(f, v, &rho, n, opts.fd_step)?;
        let mut accepted = false;
        step = (step * 4.0).min(1e3);
        let mut moved = 0.0;
        while step > 1e-16 {
            let trial = project_hypersimplex(&rho.iter().zip(&g).map(|(r, gi)| r - step * gi).collect::<Vec<_>>(), n);
            let d: Vec<f64> = trial.iter().zip(&rho).map(|(a, b)| a - b).collect();
            let dd: f64 = d.iter().map(|x| x * x).sum();
            if dd == 0.0 {
                break;
            }
            let tv = objective(f, v, &trial)?;
            let decrease: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
            if tv <= val + 1e-4 * decrease.min(0.0) && tv <= val {
                moved = dd.sqrt();
                rho = trial;
                val = tv;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted || moved < opts.step_tol {
            converged = true;
            break;
        }
    }
    let ground_energy = sys.ground_energy(v)?;
    Ok(EnergyMinimization {
        energy: val,
        functional_value: f.value(&rho)?,
        rho: Density::new(rho, n)?,
        ground_energy,
        iterations,
        converged,
    })
}
