//! Antisymmetric N-particle basis over M vertices and fermionic ladder actions.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{complex_determinant, Matrix};
use crate::scalar::{cdot, cnorm, czero, Real, C};

/// Bitmask width limit.
pub const MAX_VERTICES: usize = 63;
/// Refuse bases larger than this; dense operators would not fit in memory anyway.
pub const MAX_BASIS_LEN: usize = 1 << 22;

/// Occupied vertex set e_I, bit `i` set iff 0-based vertex `i` is occupied.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct MultiIndex(u64);

impl MultiIndex {
    pub const fn from_bits(bits: u64) -> Self {
        Self(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    /// From 0-based vertices. Panics on a vertex ≥ 63.
    pub fn from_vertices(vertices: &[usize]) -> Self {
        Self(vertices.iter().fold(0, |acc, &v| {
            assert!(v < MAX_VERTICES, "vertex {v} exceeds bitmask width");
            acc | 1 << v
        }))
    }

    /// From 1-based labels as used in files and on the command line.
    pub fn from_labels(labels: &[usize], m: usize) -> Result<Self> {
        for &l in labels {
            if l == 0 || l > m {
                return Err(Error::VertexOutOfRange { vertex: l, m });
            }
        }
        Ok(Self::from_vertices(&labels.iter().map(|l| l - 1).collect::<Vec<_>>()))
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 >> i & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Occupied 0-based vertices, ascending.
    pub fn vertices(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(i)
        })
    }

    pub fn labels(self) -> Vec<usize> {
        self.vertices().map(|i| i + 1).collect()
    }

    /// Number of occupied vertices strictly below `i`.
    pub fn occupied_below(self, i: usize) -> u32 {
        (self.0 & ((1u64 << i) - 1)).count_ones()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.labels().iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", labels.join(","))
    }
}

fn parity(count: u32) -> i8 {
    if count % 2 == 0 {
        1
    } else {
        -1
    }
}

/// a_i e_I: `None` if `i ∉ I`, else the sign (−1)^{#occupied below i} and I \ {i}.
pub fn annihilate(i: usize, idx: MultiIndex) -> Option<(i8, MultiIndex)> {
    idx.contains(i)
        .then(|| (parity(idx.occupied_below(i)), MultiIndex(idx.0 & !(1 << i))))
}

/// a†_i e_I: `None` if `i ∈ I`, else the reordering sign and I ∪ {i}.
pub fn create(i: usize, idx: MultiIndex) -> Option<(i8, MultiIndex)> {
    assert!(i < MAX_VERTICES, "vertex {i} exceeds bitmask width");
    (!idx.contains(i)).then(|| (parity(idx.occupied_below(i)), MultiIndex(idx.0 | 1 << i)))
}

/// All C(M, N) multi-indices in lexicographic order of their sorted label tuples.
#[derive(Debug, Clone)]
pub struct FockBasis {
    m: usize,
    n: usize,
    states: Vec<MultiIndex>,
    rank: HashMap<MultiIndex, usize>,
}

pub fn binomial(m: usize, n: usize) -> u128 {
    if n > m {
        return 0;
    }
    let k = n.min(m - n) as u128;
    (0..k).fold(1u128, |acc, i| acc * (m as u128 - i) / (i + 1))
}

pub fn build_basis(m: usize, n: usize) -> Result<FockBasis> {
    if n == 0 || n >= m {
        return Err(Error::InvalidDimension(format!("need 1 <= N < M, got M = {m}, N = {n}")));
    }
    if m > MAX_VERTICES {
        return Err(Error::InvalidDimension(format!("M = {m} exceeds {MAX_VERTICES}")));
    }
    let len = binomial(m, n);
    if len > MAX_BASIS_LEN as u128 {
        return Err(Error::InvalidDimension(format!("basis of size {len} is too large")));
    }
    let mut states = Vec::with_capacity(len as usize);
    let mut tuple: Vec<usize> = (0..n).collect();
    loop {
        states.push(MultiIndex::from_vertices(&tuple));
        // advance to the next combination in lexicographic order
        let Some(k) = (0..n).rev().find(|&k| tuple[k] < m - n + k) else { break };
        tuple[k] += 1;
        for j in k + 1..n {
            tuple[j] = tuple[j - 1] + 1;
        }
    }
    let rank = states.iter().enumerate().map(|(k, &s)| (s, k)).collect();
    Ok(FockBasis { m, n, states, rank })
}

impl FockBasis {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[MultiIndex] {
        &self.states
    }

    pub fn state(&self, k: usize) -> MultiIndex {
        self.states[k]
    }

    pub fn index_of(&self, idx: MultiIndex) -> Option<usize> {
        self.rank.get(&idx).copied()
    }
}

/// Coefficients Ψ_I in the basis order of `basis`.
#[derive(Debug, Clone)]
pub struct WaveFunction<T: Real> {
    basis: Arc<FockBasis>,
    coeffs: Vec<C<T>>,
}

#[derive(Serialize, Deserialize)]
struct WaveFunctionFile {
    m: usize,
    n: usize,
    coefficients: Vec<[f64; 2]>,
}

impl<T: Real> WaveFunction<T> {
    pub fn new(basis: Arc<FockBasis>, coeffs: Vec<C<T>>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for a basis of size {}",
                coeffs.len(),
                basis.len()
            )));
        }
        Ok(Self { basis, coeffs })
    }

    pub fn from_real(basis: Arc<FockBasis>, coeffs: &[T]) -> Result<Self> {
        Self::new(basis, coeffs.iter().map(|&x| C::new(x, T::zero())).collect())
    }

    /// The basis state e_I at basis position `k`.
    pub fn basis_state(basis: Arc<FockBasis>, k: usize) -> Self {
        let mut coeffs = vec![czero(); basis.len()];
        coeffs[k] = C::new(T::one(), T::zero());
        Self { basis, coeffs }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[C<T>] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C<T>> {
        self.coeffs
    }

    pub fn norm(&self) -> T {
        cnorm(&self.coeffs)
    }

    pub fn normalized(mut self) -> Result<Self> {
        let nrm = self.norm();
        if nrm == T::zero() || !nrm.is_finite() {
            return Err(Error::InvalidInput("cannot normalise a zero or non-finite state".into()));
        }
        for c in &mut self.coeffs {
            *c = *c / nrm;
        }
        Ok(self)
    }

    /// ⟨self, other⟩.
    pub fn inner(&self, other: &Self) -> C<T> {
        cdot(&self.coeffs, &other.coeffs)
    }

    /// Global phase chosen so the largest-magnitude coefficient (first one on ties) is
    /// real and positive.
    pub fn phase_fixed(mut self) -> Self {
        let max = self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.norm()));
        if max == T::zero() {
            return self;
        }
        let cut = max * (T::one() - T::tol(1e-12));
        let lead = self.coeffs.iter().find(|c| c.norm() >= cut).copied().unwrap();
        let phase = lead.conj() / lead.norm();
        for c in &mut self.coeffs {
            *c = *c * phase;
        }
        self
    }

    pub fn to_json(&self) -> String {
        let f = WaveFunctionFile {
            m: self.basis.m(),
            n: self.basis.n(),
            coefficients: self.coeffs.iter().map(|c| [c.re.as_f64(), c.im.as_f64()]).collect(),
        };
        serde_json::to_string(&f).expect("wave function serialises")
    }

    /// Reads the `{"m", "n", "coefficients": [[re, im], ...]}` form.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let f: WaveFunctionFile = serde_json::from_str(s)?;
        let basis = Arc::new(build_basis(f.m, f.n)?);
        let coeffs = f.coefficients.iter().map(|[re, im]| C::new(T::lit(*re), T::lit(*im))).collect();
        Self::new(basis, coeffs)
    }
}

/// φ_0 ∧ … ∧ φ_{N−1}: Ψ_I is the determinant of the orbital values on the rows I.
pub fn slater_determinant<T: Real>(orbitals: &[Vec<C<T>>], basis: &Arc<FockBasis>) -> Result<WaveFunction<T>> {
    let (m, n) = (basis.m(), basis.n());
    if orbitals.len() != n || orbitals.iter().any(|o| o.len() != m) {
        return Err(Error::DimensionMismatch(format!("need {n} orbitals of length {m}")));
    }
    let mut defect = T::zero();
    for (a, oa) in orbitals.iter().enumerate() {
        for (b, ob) in orbitals.iter().enumerate() {
            let target = if a == b { T::one() } else { T::zero() };
            defect = defect.max((cdot(oa, ob) - C::new(target, T::zero())).norm());
        }
    }
    if defect > T::tol(1e-8) {
        return Err(Error::NotOrthonormal(defect.as_f64()));
    }
    let coeffs = basis
        .states()
        .iter()
        .map(|idx| {
            let rows: Vec<usize> = idx.vertices().collect();
            complex_determinant(Matrix::from_fn(n, n, |r, k| orbitals[k][rows[r]]))
        })
        .collect();
    WaveFunction::new(basis.clone(), coeffs)?.normalized()
}
