//! Eigen-decomposition, ground manifolds and one-particle densities.

use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{DensityViolation, Error, Result};
use crate::fock::{FockBasis, WaveFunction};
use crate::linalg::{hermitian_eigen, Matrix};
use crate::operators::ManyBodyOperator;
use crate::scalar::{Real, C};

/// Relative width of the window that collects a degenerate ground level.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Slack on the hypersimplex constraints.
pub const DENSITY_TOL: f64 = 1e-10;

/// Full ascending spectrum with orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct Spectrum<T: Real> {
    pub values: Vec<T>,
    pub vectors: Matrix<C<T>>,
    pub residual: T,
    basis: Arc<FockBasis>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Level {
    pub eigenvalue: f64,
    pub degeneracy: usize,
}

impl<T: Real> Spectrum<T> {
    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn state(&self, k: usize) -> WaveFunction<T> {
        WaveFunction::new(self.basis.clone(), self.vectors.column(k)).expect("eigenvector length")
    }

    /// Groups eigenvalues lying within `tol·max(1, |λ|)` of the lowest member of a group.
    pub fn levels(&self, tol: T) -> Vec<Level> {
        let mut out: Vec<(T, usize)> = Vec::new();
        for &x in &self.values {
            match out.last_mut() {
                Some((first, count)) if x - *first <= tol * first.abs().max(T::one()) => *count += 1,
                _ => out.push((x, 1)),
            }
        }
        out.into_iter().map(|(e, d)| Level { eigenvalue: e.as_f64(), degeneracy: d }).collect()
    }

    /// JSON list of `{eigenvalue, degeneracy}`.
    pub fn to_json(&self, tol: T) -> String {
        serde_json::to_string_pretty(&self.levels(tol)).expect("levels serialise")
    }
}

/// Residual bound ‖Hx − λx‖ ≤ 1e−9·‖H‖ is enforced; failures carry the residual.
pub fn eigendecompose<T: Real>(op: &ManyBodyOperator<T>) -> Result<Spectrum<T>> {
    let e = hermitian_eigen(op.matrix()).map_err(|f| Error::NoConvergence {
        sweeps: f.sweeps,
        residual: f.residual.as_f64(),
    })?;
    let bound = T::tol(1e-9) * op.frobenius_norm().max(T::min_positive_value());
    if e.residual > bound {
        return Err(Error::NoConvergence { sweeps: e.sweeps, residual: e.residual.as_f64() });
    }
    Ok(Spectrum { values: e.values, vectors: e.vectors, residual: e.residual, basis: op.basis().clone() })
}

/// Ground energy with an orthonormal basis of the ground space.
#[derive(Clone, Debug)]
pub struct GroundManifold<T: Real> {
    pub energy: T,
    pub degeneracy: usize,
    /// Phase-fixed eigenvectors in ascending eigenvalue order.
    pub states: Vec<WaveFunction<T>>,
    /// Distance to the first excluded level; infinite if every level was collected.
    pub gap: T,
    /// Set when the gap is below ten times the degeneracy window.
    pub ambiguous: bool,
}

impl<T: Real> GroundManifold<T> {
    pub fn from_spectrum(spec: &Spectrum<T>, degeneracy_tol: T) -> Self {
        let e0 = spec.values[0];
        let window = degeneracy_tol * e0.abs().max(T::one());
        let g = spec.values.iter().take_while(|&&x| x - e0 <= window).count();
        let gap = spec.values.get(g).map_or(T::infinity(), |&x| x - e0);
        GroundManifold {
            energy: e0,
            degeneracy: g,
            states: (0..g).map(|k| spec.state(k).phase_fixed()).collect(),
            gap,
            ambiguous: gap < window * T::lit(10.0),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.degeneracy > 1
    }

    /// Projector Σ_k |Ψ_k⟩⟨Ψ_k| onto the ground space.
    pub fn projector(&self) -> Matrix<C<T>> {
        let l = self.states[0].coeffs().len();
        let mut p = Matrix::zeros(l, l);
        for s in &self.states {
            let c = s.coeffs();
            for i in 0..l {
                for j in 0..l {
                    p[(i, j)] += c[i] * c[j].conj();
                }
            }
        }
        p
    }
}

pub fn ground_manifold<T: Real>(op: &ManyBodyOperator<T>, degeneracy_tol: T) -> Result<GroundManifold<T>> {
    Ok(GroundManifold::from_spectrum(&eigendecompose(op)?, degeneracy_tol))
}

/// One-particle density ρ in the (M, N)-hypersimplex.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Real + Serialize")]
pub struct Density<T: Real> {
    rho: Vec<T>,
    n: usize,
}

impl<T: Real> Density<T> {
    /// Validates 0 ≤ ρ_i ≤ 1 and Σρ_i = N up to [`DENSITY_TOL`].
    pub fn new(rho: Vec<T>, n: usize) -> Result<Self> {
        check_hypersimplex(&rho, n, rho.len(), T::tol(DENSITY_TOL))?;
        Ok(Self { rho, n })
    }

    pub(crate) fn unchecked(rho: Vec<T>, n: usize) -> Self {
        Self { rho, n }
    }

    /// ρ̄ = (N/M)·1.
    pub fn uniform(m: usize, n: usize) -> Self {
        Self { rho: vec![T::from_usize(n).unwrap() / T::from_usize(m).unwrap(); m], n }
    }

    pub fn values(&self) -> &[T] {
        &self.rho
    }

    pub fn m(&self) -> usize {
        self.rho.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn distance(&self, other: &Self) -> T {
        self.rho.iter().zip(&other.rho).map(|(a, b)| (*a - *b) * (*a - *b)).sum::<T>().sqrt()
    }

    /// True if every component is at least `tol` away from 0 and 1.
    pub fn is_interior(&self, tol: T) -> bool {
        self.rho.iter().all(|&x| x > tol && x < T::one() - tol)
    }

    /// CSV with header `vertex,density`, 1-based vertices.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["vertex", "density"])?;
        for (i, x) in self.rho.iter().enumerate() {
            w.write_record([(i + 1).to_string(), format!("{:e}", x.as_f64())])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Checks membership of the (m, n)-hypersimplex with slack `tol`.
pub fn check_hypersimplex<T: Real>(rho: &[T], n: usize, m: usize, tol: T) -> Result<()> {
    let fail = |v| Err(Error::InvalidDensity(v));
    if rho.len() != m {
        return fail(DensityViolation::WrongLength { len: rho.len(), expected: m });
    }
    for (i, &x) in rho.iter().enumerate() {
        if !x.is_finite() {
            return fail(DensityViolation::NotFinite { vertex: i + 1 });
        }
        if x < -tol {
            return fail(DensityViolation::BelowZero { vertex: i + 1, value: x.as_f64() });
        }
        if x > T::one() + tol {
            return fail(DensityViolation::AboveOne { vertex: i + 1, value: x.as_f64() });
        }
    }
    let sum: T = rho.iter().copied().sum();
    let expected = T::from_usize(n).unwrap();
    if (sum - expected).abs() > tol * T::from_usize(m.max(1)).unwrap() {
        return fail(DensityViolation::WrongSum { sum: sum.as_f64(), expected: n as f64 });
    }
    Ok(())
}

/// ρ_i = Σ_{I∋i} |Ψ_I|².
pub fn density_of<T: Real>(psi: &WaveFunction<T>) -> Density<T> {
    let basis = psi.basis();
    let mut rho = vec![T::zero(); basis.m()];
    for (idx, c) in basis.states().iter().zip(psi.coeffs()) {
        let w = c.norm_sqr();
        for i in idx.vertices() {
            rho[i] += w;
        }
    }
    Density::unchecked(rho, basis.n())
}

/// Mixed state Σ_n λ_n |Ψ_n⟩⟨Ψ_n| with convex weights.
#[derive(Clone, Debug)]
pub struct EnsembleState<T: Real> {
    weights: Vec<T>,
    states: Vec<WaveFunction<T>>,
}

impl<T: Real> EnsembleState<T> {
    pub fn new(weights: Vec<T>, states: Vec<WaveFunction<T>>) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(Error::DimensionMismatch(format!("{} weights for {} states", weights.len(), states.len())));
        }
        let tol = T::tol(DENSITY_TOL);
        if let Some(w) = weights.iter().find(|w| !(**w >= -tol)) {
            return Err(Error::NotConvex(format!("negative weight {w}")));
        }
        let sum: T = weights.iter().copied().sum();
        if (sum - T::one()).abs() > tol {
            return Err(Error::NotConvex(format!("weights sum to {sum}")));
        }
        let b = states[0].basis();
        if states.iter().any(|s| !Arc::ptr_eq(s.basis(), b) && s.basis().states() != b.states()) {
            return Err(Error::DimensionMismatch("ensemble states live in different bases".into()));
        }
        Ok(Self { weights, states })
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn states(&self) -> &[WaveFunction<T>] {
        &self.states
    }
}

pub fn density_of_ensemble<T: Real>(ens: &EnsembleState<T>) -> Density<T> {
    let m = ens.states[0].basis().m();
    let mut rho = vec![T::zero(); m];
    for (w, s) in ens.weights.iter().zip(&ens.states) {
        for (r, x) in rho.iter_mut().zip(density_of(s).values()) {
            *r += *w * *x;
        }
    }
    Density::unchecked(rho, ens.states[0].basis().n())
}
