//! N-representability, Odlyzko counting and unique-v-representability certificates.

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::convex::simplex_least_squares;
use crate::error::{Error, Result};
use crate::fock::{binomial, FockBasis, MultiIndex, WaveFunction};
use crate::linalg::{kernel, rank, Matrix, Pivot};
use crate::operators::{ManyBodyOperator, Potential};
use crate::scalar::{cdot, cnorm, Real, C};
use crate::spectra::{check_hypersimplex, density_of, eigendecompose, DEGENERACY_TOL, DENSITY_TOL};

/// Smallest g such that any (0,1)-matrix with M columns, row sums N and more than g
/// distinct rows has rank M.
pub fn odlyzko_number(m: usize, n: usize) -> Result<usize> {
    if n == 0 || n >= m {
        return Err(Error::InvalidDimension(format!("need 1 <= N < M, got M = {m}, N = {n}")));
    }
    // Two columns, one particle: a single row is the only deficient configuration.
    if (m, n) == (2, 1) {
        return Ok(1);
    }
    let g = if m > 2 * n {
        binomial(m - 1, n)
    } else if m == 2 * n {
        2 * binomial(m - 2, n - 1)
    } else {
        binomial(m - 1, n - 1)
    };
    usize::try_from(g).map_err(|_| Error::InvalidDimension(format!("g({m},{n}) overflows")))
}

/// Default support threshold 1e−10·√L.
pub fn default_zero_tol(basis_len: usize) -> f64 {
    1e-10 * (basis_len as f64).sqrt()
}

/// Multi-indices with |Ψ_I| > `zero_tol`, in basis order.
pub fn support<T: Real>(psi: &WaveFunction<T>, zero_tol: T) -> Vec<MultiIndex> {
    psi.basis()
        .states()
        .iter()
        .zip(psi.coeffs())
        .filter(|(_, c)| c.norm() > zero_tol)
        .map(|(s, _)| *s)
        .collect()
}

/// Rows E_I for the support of a state.
#[derive(Clone, Debug, PartialEq)]
pub struct UpsilonMatrix {
    m: usize,
    rows: Vec<MultiIndex>,
}

impl UpsilonMatrix {
    pub fn new(m: usize, rows: Vec<MultiIndex>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptySupport);
        }
        let mut sorted = rows.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != rows.len() {
            return Err(Error::InvalidInput("Upsilon rows must be distinct".into()));
        }
        Ok(Self { m, rows })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn rows(&self) -> &[MultiIndex] {
        &self.rows
    }

    pub fn to_dense<E: Pivot>(&self) -> Matrix<E> {
        Matrix::from_fn(self.rows.len(), self.m, |r, c| {
            if self.rows[r].contains(c) {
                E::one()
            } else {
                E::zero()
            }
        })
    }

    /// Exact rank over the rationals.
    pub fn rank(&self) -> usize {
        rank(&self.to_dense::<BigRational>())
    }

    /// Orthonormal basis of ker Υ computed exactly, then orthonormalised.
    pub fn kernel(&self) -> Vec<Vec<f64>> {
        exact_kernel_orthonormal(&self.to_dense::<BigRational>())
    }
}

fn exact_kernel_orthonormal(a: &Matrix<BigRational>) -> Vec<Vec<f64>> {
    let raw: Vec<Vec<f64>> = kernel(a)
        .into_iter()
        .map(|v| v.iter().map(|x| x.to_f64().unwrap_or(0.0)).collect())
        .collect();
    gram_schmidt(raw)
}

fn gram_schmidt(vectors: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for mut v in vectors {
        for _ in 0..2 {
            for q in &out {
                let d: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(a, b)| *a -= d * b);
            }
        }
        let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm > 1e-12 {
            out.push(v.into_iter().map(|x| x / nrm).collect());
        }
    }
    out
}

pub fn upsilon<T: Real>(psi: &WaveFunction<T>, zero_tol: T) -> Result<UpsilonMatrix> {
    UpsilonMatrix::new(psi.basis().m(), support(psi, zero_tol))
}

/// ∩_n ker Υ[Ψ_n] as an orthonormal basis (possibly empty).
pub fn nonuv_subspace<T: Real>(states: &[WaveFunction<T>], zero_tol: T) -> Result<Vec<Vec<f64>>> {
    let first = states.first().ok_or_else(|| Error::InvalidInput("empty state list".into()))?;
    let m = first.basis().m();
    let mut rows: Vec<MultiIndex> = states.iter().flat_map(|s| support(s, zero_tol)).collect();
    rows.sort();
    rows.dedup();
    Ok(UpsilonMatrix::new(m, rows)?.kernel())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UvStatus {
    CertifiedUvByCount,
    CertifiedUvByRank,
    NonUvWithWitness,
    Undetermined,
}

impl UvStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::CertifiedUvByCount => "certified_uv_by_count",
            Self::CertifiedUvByRank => "certified_uv_by_rank",
            Self::NonUvWithWitness => "non_uv_with_witness",
            Self::Undetermined => "undetermined",
        }
    }
}

/// Direction u and the interval of t for which Ψ stays a ground state of H + t·Σu_i n_i.
/// An unbounded side reports the largest scanned magnitude together with its flag.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    /// Scaled to max |u_i| = 1 with the first nonzero entry positive.
    pub direction: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
    pub lower_unbounded: bool,
    pub upper_unbounded: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct UvVerdict {
    pub status: UvStatus,
    pub support_size: usize,
    pub odlyzko_number: usize,
    pub rank: usize,
    pub kernel_basis: Vec<Vec<f64>>,
    /// max over the kernel basis of ‖Σ u_i n_i Ψ‖.
    pub kernel_residual: f64,
    pub ground_state: bool,
    pub witness: Option<Witness>,
}

/// Magnitudes of t probed on each side of zero.
#[derive(Clone, Debug, PartialEq)]
pub enum TScan {
    LogSpaced { min: f64, max: f64, count: usize },
    Magnitudes(Vec<f64>),
}

impl Default for TScan {
    fn default() -> Self {
        TScan::LogSpaced { min: 1e-3, max: 1e3, count: 64 }
    }
}

impl TScan {
    pub fn magnitudes(&self) -> Vec<f64> {
        match self {
            TScan::LogSpaced { min, max, count } => {
                let (a, b) = (min.ln(), max.ln());
                let k = (*count).max(2);
                (0..k).map(|i| (a + (b - a) * i as f64 / (k - 1) as f64).exp()).collect()
            }
            TScan::Magnitudes(v) => {
                let mut v: Vec<f64> = v.iter().map(|x| x.abs()).filter(|x| *x > 0.0).collect();
                v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                v.dedup();
                v
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct CertifyOptions {
    pub zero_tol: Option<f64>,
    pub degeneracy_tol: f64,
    pub t_scan: TScan,
    /// Bisection steps used to sharpen each interval endpoint; 0 keeps grid resolution.
    pub refine_steps: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self { zero_tol: None, degeneracy_tol: DEGENERACY_TOL, t_scan: TScan::default(), refine_steps: 40 }
    }
}

/// Certificate with default options and the given t-scan.
pub fn certify<T: Real>(
    psi: &WaveFunction<T>,
    op_without_potential: &ManyBodyOperator<T>,
    v: &Potential<T>,
    t_scan: TScan,
) -> Result<UvVerdict> {
    certify_with(psi, op_without_potential, v, &CertifyOptions { t_scan, ..Default::default() })
}

pub fn certify_with<T: Real>(
    psi: &WaveFunction<T>,
    op_without_potential: &ManyBodyOperator<T>,
    v: &Potential<T>,
    opts: &CertifyOptions,
) -> Result<UvVerdict> {
    let basis = op_without_potential.basis();
    if psi.coeffs().len() != basis.len() {
        return Err(Error::DimensionMismatch("state and operator bases differ".into()));
    }
    let (m, n) = (basis.m(), basis.n());
    let h = op_without_potential.with_potential(v.values())?;
    let nrm = psi.norm();
    if nrm == T::zero() {
        return Err(Error::EmptySupport);
    }
    let hpsi = h.apply(psi.coeffs());
    let energy = cdot(psi.coeffs(), &hpsi).re / (nrm * nrm);
    let resid = cnorm(&hpsi.iter().zip(psi.coeffs()).map(|(a, b)| *a - *b * energy).collect::<Vec<_>>()) / nrm;
    if resid > T::tol(1e-8) * h.frobenius_norm().max(T::one()) {
        return Err(Error::NotEigenstate(resid.as_f64()));
    }

    let zero_tol = T::lit(opts.zero_tol.unwrap_or_else(|| default_zero_tol(basis.len()))) * nrm;
    let ups = upsilon(psi, zero_tol)?;
    let g = odlyzko_number(m, n)?;
    let rank = ups.rank();
    let kernel_basis = if rank < m { ups.kernel() } else { Vec::new() };
    let kernel_residual = kernel_basis
        .iter()
        .map(|u| number_weighted_norm(psi, u) / nrm.as_f64())
        .fold(0.0, f64::max);
    let ground_state = is_ground(&h, psi, T::lit(opts.degeneracy_tol))?;
    let mut verdict = UvVerdict {
        status: UvStatus::Undetermined,
        support_size: ups.rows().len(),
        odlyzko_number: g,
        rank,
        kernel_basis,
        kernel_residual,
        ground_state,
        witness: None,
    };
    if verdict.support_size > g {
        verdict.status = UvStatus::CertifiedUvByCount;
    } else if rank == m {
        verdict.status = UvStatus::CertifiedUvByRank;
    } else if ground_state {
        for u in &verdict.kernel_basis {
            let dir = witness_direction(u);
            let w = persistence(op_without_potential, v, psi, &dir, opts)?;
            if let Some(w) = w {
                verdict.witness = Some(w);
                verdict.status = UvStatus::NonUvWithWitness;
                break;
            }
        }
    }
    Ok(verdict)
}

fn number_weighted_norm<T: Real>(psi: &WaveFunction<T>, u: &[f64]) -> f64 {
    psi.basis()
        .states()
        .iter()
        .zip(psi.coeffs())
        .map(|(idx, c)| {
            let s: f64 = idx.vertices().map(|i| u[i]).sum();
            s * s * c.norm_sqr().as_f64()
        })
        .sum::<f64>()
        .sqrt()
}

fn witness_direction(u: &[f64]) -> Vec<f64> {
    let max = u.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let first = u.iter().find(|x| x.abs() > 1e-12 * max).copied().unwrap_or(1.0);
    let s = first.signum() / max;
    u.iter().map(|x| x * s).collect()
}

/// Ψ is a ground state of `h` if its energy is within the degeneracy window of λ_min.
fn is_ground<T: Real>(h: &ManyBodyOperator<T>, psi: &WaveFunction<T>, tol: T) -> Result<bool> {
    let spec = eigendecompose(h)?;
    let e0 = spec.values[0];
    let nrm2 = psi.norm() * psi.norm();
    let e = h.expectation(psi) / nrm2;
    Ok(e - e0 <= tol * e0.abs().max(T::one()))
}

fn persistence<T: Real>(
    h0: &ManyBodyOperator<T>,
    v: &Potential<T>,
    psi: &WaveFunction<T>,
    dir: &[f64],
    opts: &CertifyOptions,
) -> Result<Option<Witness>> {
    let dir_t: Vec<T> = dir.iter().map(|&x| T::lit(x)).collect();
    let tol = T::lit(opts.degeneracy_tol);
    let ground_at = |t: f64| -> Result<bool> {
        let h = h0.with_potential(v.plus_scaled(T::lit(t), &dir_t).values())?;
        is_ground(&h, psi, tol)
    };
    let mags = opts.t_scan.magnitudes();
    let side = |sign: f64| -> Result<(f64, bool, bool)> {
        let flags: Vec<bool> = mags.par_iter().map(|&t| ground_at(sign * t)).collect::<Result<_>>()?;
        let held = flags.iter().take_while(|&&b| b).count();
        if held == mags.len() {
            return Ok((*mags.last().unwrap_or(&0.0), true, held > 0));
        }
        let (mut lo, mut hi) = (if held == 0 { 0.0 } else { mags[held - 1] }, mags[held]);
        for _ in 0..opts.refine_steps {
            let mid = 0.5 * (lo + hi);
            if ground_at(sign * mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((lo, false, held > 0))
    };
    let (upper, upper_unbounded, up_hit) = side(1.0)?;
    let (lower, lower_unbounded, down_hit) = side(-1.0)?;
    if !(up_hit || down_hit) {
        return Ok(None);
    }
    Ok(Some(Witness { direction: dir.to_vec(), lower: -lower, upper, lower_unbounded, upper_unbounded }))
}

/// Convex decomposition ρ = Σ λ_I E_I into extreme densities, greedy with a
/// least-squares fallback. Weights of repeated multi-indices are merged.
pub fn decompose_density<T: Real>(rho: &[T], n: usize) -> Result<Vec<(MultiIndex, T)>> {
    let m = rho.len();
    if n == 0 || n >= m {
        return Err(Error::InvalidDimension(format!("need 1 <= N < M, got M = {m}, N = {n}")));
    }
    check_hypersimplex(rho, n, m, T::tol(DENSITY_TOL))?;
    let clamped: Vec<T> = rho.iter().map(|x| x.max(T::zero()).min(T::one())).collect();
    let total: T = clamped.iter().copied().sum();
    let nn = T::from_usize(n).unwrap();
    let mut r: Vec<T> = clamped.iter().map(|&x| (x * nn / total).min(T::one())).collect();
    let mut mass = T::one();
    let mut terms: Vec<(MultiIndex, T)> = Vec::new();
    let stop = T::tol(1e-12);
    for _ in 0..4 * m + 8 {
        if r.iter().map(|x| *x * *x).sum::<T>().sqrt() < stop || mass <= stop {
            break;
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| r[b].partial_cmp(&r[a]).unwrap().then(a.cmp(&b)));
        let chosen = &order[..n];
        let mut lambda = mass;
        for &i in chosen {
            lambda = lambda.min(r[i]);
        }
        for &j in &order[n..] {
            lambda = lambda.min(mass - r[j]);
        }
        if lambda <= T::zero() {
            break;
        }
        for &i in chosen {
            r[i] = (r[i] - lambda).max(T::zero());
        }
        mass -= lambda;
        let idx = MultiIndex::from_vertices(chosen);
        match terms.iter_mut().find(|(s, _)| *s == idx) {
            Some((_, w)) => *w += lambda,
            None => terms.push((idx, lambda)),
        }
    }
    let remainder = r.iter().map(|x| *x * *x).sum::<T>().sqrt();
    if remainder >= stop && mass > stop {
        terms = exhaustive_decomposition(rho, n)?;
    } else if mass > T::zero() && !terms.is_empty() {
        // spread rounding leftovers so the weights sum to one
        let total: T = terms.iter().map(|(_, w)| *w).sum();
        terms.iter_mut().for_each(|(_, w)| *w = *w / total);
    }
    Ok(terms)
}

fn exhaustive_decomposition<T: Real>(rho: &[T], n: usize) -> Result<Vec<(MultiIndex, T)>> {
    let m = rho.len();
    let basis = crate::fock::build_basis(m, n)?;
    let points: Vec<Vec<f64>> = basis
        .states()
        .iter()
        .map(|s| (0..m).map(|i| if s.contains(i) { 1.0 } else { 0.0 }).collect())
        .collect();
    let target: Vec<f64> = rho.iter().map(|x| x.as_f64()).collect();
    let w = simplex_least_squares(&points, &target, 200_000);
    Ok(basis
        .states()
        .iter()
        .zip(w)
        .filter(|(_, w)| *w > 0.0)
        .map(|(s, w)| (*s, T::lit(w)))
        .collect())
}

/// Ψ = Σ_I √λ_I e_I with density ρ, verified by recomputing the density.
pub fn state_from_density<T: Real>(rho: &[T], basis: &Arc<FockBasis>) -> Result<WaveFunction<T>> {
    if rho.len() != basis.m() {
        return Err(Error::DimensionMismatch(format!("density of length {} for M = {}", rho.len(), basis.m())));
    }
    let terms = decompose_density(rho, basis.n())?;
    let mut coeffs = vec![C::new(T::zero(), T::zero()); basis.len()];
    for (idx, w) in terms {
        let k = basis.index_of(idx).expect("multi-index in basis");
        coeffs[k] = C::new(w.sqrt(), T::zero());
    }
    let psi = WaveFunction::new(basis.clone(), coeffs)?;
    let back = density_of(&psi);
    let err = back.values().iter().zip(rho).fold(T::zero(), |a, (x, y)| a.max((*x - *y).abs()));
    if err > T::tol(1e-9) {
        return Err(Error::DecompositionFailed(err.as_f64()));
    }
    Ok(psi)
}
