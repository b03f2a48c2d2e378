//! One-body and density-density Hamiltonians and their many-body matrices.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{annihilate, create, FockBasis, WaveFunction};
use crate::graph::{graph_laplacian, Graph};
use crate::linalg::Matrix;
use crate::scalar::{czero, Real, C};

/// Hermitian M×M hopping matrix h.
#[derive(Clone, Debug)]
pub struct OneBodyHamiltonian<T: Real> {
    h: Matrix<C<T>>,
}

impl<T: Real> OneBodyHamiltonian<T> {
    pub fn new(h: Matrix<C<T>>) -> Result<Self> {
        if !h.is_square() || h.rows() == 0 {
            return Err(Error::DimensionMismatch(format!("one-body matrix is {}x{}", h.rows(), h.cols())));
        }
        let defect = h.max_hermitian_defect();
        if defect > T::tol(1e-12) {
            return Err(Error::NotHermitian(defect.as_f64()));
        }
        Ok(Self { h })
    }

    pub fn from_real(h: &Matrix<T>) -> Result<Self> {
        Self::new(h.to_complex())
    }

    /// h = −Δ for the graph Laplacian Δ.
    pub fn negative_laplacian(g: &Graph) -> Self {
        let lap = graph_laplacian::<T>(g);
        Self { h: lap.map(|&x| C::new(-x, T::zero())) }
    }

    pub fn m(&self) -> usize {
        self.h.rows()
    }

    pub fn matrix(&self) -> &Matrix<C<T>> {
        &self.h
    }
}

/// Density-density interaction ½ Σ w_ij n_i n_j with symmetric w; the diagonal is dropped.
#[derive(Clone, Debug)]
pub struct TwoBodyInteraction<T: Real> {
    w: Matrix<T>,
}

impl<T: Real> TwoBodyInteraction<T> {
    pub fn new(mut w: Matrix<T>) -> Result<Self> {
        if !w.is_square() {
            return Err(Error::DimensionMismatch(format!("interaction matrix is {}x{}", w.rows(), w.cols())));
        }
        if w.max_asymmetry() != T::zero() {
            return Err(Error::InvalidInput("interaction matrix must be exactly symmetric".into()));
        }
        if w.as_slice().iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("interaction matrix has non-finite entries".into()));
        }
        for i in 0..w.rows() {
            w[(i, i)] = T::zero();
        }
        Ok(Self { w })
    }

    pub fn zero(m: usize) -> Self {
        Self { w: Matrix::zeros(m, m) }
    }

    pub fn m(&self) -> usize {
        self.w.rows()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.w
    }

    pub fn is_zero(&self) -> bool {
        self.w.as_slice().iter().all(|x| *x == T::zero())
    }
}

/// External potential v_i, finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential<T: Real>(Vec<T>);

impl<T: Real> Potential<T> {
    pub fn new(v: Vec<T>) -> Result<Self> {
        if let Some(i) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("v_{} is not finite", i + 1)));
        }
        Ok(Self(v))
    }

    pub fn zeros(m: usize) -> Self {
        Self(vec![T::zero(); m])
    }

    pub fn values(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Representative with Σ v_i = 0.
    pub fn gauge_fixed(&self) -> Self {
        let mean = self.0.iter().copied().sum::<T>() / T::from_usize(self.0.len().max(1)).unwrap();
        Self(self.0.iter().map(|&x| x - mean).collect())
    }

    pub fn shifted(&self, c: T) -> Self {
        Self(self.0.iter().map(|&x| x + c).collect())
    }

    /// v + t·u.
    pub fn plus_scaled(&self, t: T, u: &[T]) -> Self {
        Self(self.0.iter().zip(u).map(|(&a, &b)| a + t * b).collect())
    }
}

/// Hermitian L×L matrix in the basis e_I.
#[derive(Clone, Debug)]
pub struct ManyBodyOperator<T: Real> {
    basis: Arc<FockBasis>,
    matrix: Matrix<C<T>>,
}

impl<T: Real> ManyBodyOperator<T> {
    pub fn new(basis: Arc<FockBasis>, matrix: Matrix<C<T>>) -> Result<Self> {
        if matrix.rows() != basis.len() || !matrix.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for a basis of size {}",
                matrix.rows(),
                matrix.cols(),
                basis.len()
            )));
        }
        let defect = matrix.max_hermitian_defect();
        if defect > T::tol(1e-12) * matrix.frobenius_norm().max(T::one()) {
            return Err(Error::NotHermitian(defect.as_f64()));
        }
        Ok(Self { basis, matrix })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn matrix(&self) -> &Matrix<C<T>> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn frobenius_norm(&self) -> T {
        self.matrix.frobenius_norm()
    }

    pub fn apply(&self, psi: &[C<T>]) -> Vec<C<T>> {
        self.matrix.mul_vec(psi)
    }

    /// ⟨Ψ, H Ψ⟩ (real part; the imaginary part vanishes for Hermitian H).
    pub fn expectation(&self, psi: &WaveFunction<T>) -> T {
        crate::scalar::cdot(psi.coeffs(), &self.apply(psi.coeffs())).re
    }

    /// H + Σ_i v_i n_i.
    pub fn with_potential(&self, v: &[T]) -> Result<Self> {
        if v.len() != self.basis.m() {
            return Err(Error::DimensionMismatch(format!("potential of length {} for M = {}", v.len(), self.basis.m())));
        }
        let mut matrix = self.matrix.clone();
        for (k, idx) in self.basis.states().iter().enumerate() {
            let shift: T = idx.vertices().map(|i| v[i]).sum();
            matrix[(k, k)].re += shift;
        }
        Ok(Self { basis: self.basis.clone(), matrix })
    }

    /// Row-major dump: one CSV record per matrix row with alternating real and imaginary parts.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let header: Vec<String> = self
            .basis
            .states()
            .iter()
            .map(|s| s.labels().iter().map(ToString::to_string).collect::<Vec<_>>().join("-"))
            .flat_map(|s| [format!("re:{s}"), format!("im:{s}")])
            .collect();
        w.write_record(&header)?;
        for i in 0..self.dim() {
            let rec: Vec<String> = self
                .matrix
                .row(i)
                .iter()
                .flat_map(|z| [format!("{:e}", z.re.as_f64()), format!("{:e}", z.im.as_f64())])
                .collect();
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// H = Σ_ij h_ij a†_i a_j + Σ_i v_i n_i + W in the basis `basis`.
pub fn assemble<T: Real>(
    h: &OneBodyHamiltonian<T>,
    w: &TwoBodyInteraction<T>,
    v: &Potential<T>,
    basis: &Arc<FockBasis>,
) -> Result<ManyBodyOperator<T>> {
    let m = basis.m();
    if h.m() != m || w.m() != m || v.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "M = {m} but h is {}x{0}, w is {}x{1}, v has {} entries",
            h.m(),
            w.m(),
            v.len()
        )));
    }
    let hm = h.matrix();
    let wm = w.matrix();
    let vv = v.values();
    let columns: Vec<Vec<(usize, C<T>)>> = basis
        .states()
        .par_iter()
        .map(|&col| {
            let mut entries = Vec::new();
            let occupied: Vec<usize> = col.vertices().collect();
            let mut diag = czero::<T>();
            for (a, &i) in occupied.iter().enumerate() {
                diag += hm[(i, i)] + C::new(vv[i], T::zero());
                for &j in &occupied[a + 1..] {
                    diag.re += wm[(i, j)];
                }
            }
            entries.push((basis.index_of(col).unwrap(), diag));
            for &j in &occupied {
                let (s1, rest) = annihilate(j, col).unwrap();
                for i in (0..m).filter(|&i| i != j) {
                    let hij = hm[(i, j)];
                    if hij == czero() {
                        continue;
                    }
                    if let Some((s2, row)) = create(i, rest) {
                        let sign = T::from_i8(s1 * s2).unwrap();
                        entries.push((basis.index_of(row).unwrap(), hij * sign));
                    }
                }
            }
            entries
        })
        .collect();
    let mut matrix = Matrix::zeros(basis.len(), basis.len());
    for (c, entries) in columns.into_iter().enumerate() {
        for (r, z) in entries {
            matrix[(r, c)] += z;
        }
    }
    Ok(ManyBodyOperator { basis: basis.clone(), matrix })
}

/// n_i = a†_i a_i for 0-based vertex `i`.
pub fn number_operator_matrix<T: Real>(i: usize, basis: &Arc<FockBasis>) -> Result<ManyBodyOperator<T>> {
    if i >= basis.m() {
        return Err(Error::VertexOutOfRange { vertex: i + 1, m: basis.m() });
    }
    let l = basis.len();
    let matrix = Matrix::from_fn(l, l, |r, c| {
        if r == c && basis.state(r).contains(i) {
            C::new(T::one(), T::zero())
        } else {
            czero()
        }
    });
    Ok(ManyBodyOperator { basis: basis.clone(), matrix })
}

/// The potential-free part H_0 = h + W of a many-body Hamiltonian.
#[derive(Clone, Debug)]
pub struct InternalHamiltonian<T: Real> {
    pub h: OneBodyHamiltonian<T>,
    pub w: TwoBodyInteraction<T>,
}

impl<T: Real> InternalHamiltonian<T> {
    pub fn new(h: OneBodyHamiltonian<T>, w: TwoBodyInteraction<T>) -> Result<Self> {
        if h.m() != w.m() {
            return Err(Error::DimensionMismatch(format!("h is {}x{0}, w is {}x{1}", h.m(), w.m())));
        }
        Ok(Self { h, w })
    }

    /// −Δ of `g` without interaction.
    pub fn kinetic(g: &Graph) -> Self {
        Self { h: OneBodyHamiltonian::negative_laplacian(g), w: TwoBodyInteraction::zero(g.vertex_count()) }
    }

    pub fn m(&self) -> usize {
        self.h.m()
    }

    pub fn assemble(&self, v: &Potential<T>, basis: &Arc<FockBasis>) -> Result<ManyBodyOperator<T>> {
        assemble(&self.h, &self.w, v, basis)
    }

    pub fn assemble_free(&self, basis: &Arc<FockBasis>) -> Result<ManyBodyOperator<T>> {
        self.assemble(&Potential::zeros(self.m()), basis)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::build_basis;
    use crate::graph::{graph_of_matrix, GRAPH_ZERO_TOL};

    fn real_matrix(rows: &[&[f64]]) -> Matrix<C<f64>> {
        Matrix::from_rows(&rows.iter().map(|r| r.iter().map(|&x| C::new(x, 0.0)).collect()).collect::<Vec<_>>())
            .unwrap()
    }

    fn assert_close(a: &Matrix<C<f64>>, b: &Matrix<C<f64>>, tol: f64) {
        assert_eq!(a.rows(), b.rows());
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((x - y).norm() <= tol, "{a:?}\n!=\n{b:?}");
        }
    }

    #[test]
    fn triangle_two_particle_matrix() {
        let basis = Arc::new(build_basis(3, 2).unwrap());
        let h0 = InternalHamiltonian::<f64>::kinetic(&Graph::triangle());
        let op = h0.assemble_free(&basis).unwrap();
        let expected = real_matrix(&[&[4.0, -1.0, 1.0], &[-1.0, 4.0, -1.0], &[1.0, -1.0, 4.0]]);
        assert_close(op.matrix(), &expected, 0.0);
        assert_eq!(graph_of_matrix(op.matrix(), GRAPH_ZERO_TOL).unwrap(), Graph::triangle());
    }

    fn square_reference(s: f64, t: f64) -> Matrix<C<f64>> {
        let mut rows: Vec<Vec<f64>> = vec![
            vec![2.0 * t, -1.0, 0.0, 0.0, 1.0, 0.0],
            vec![-1.0, 0.0, -1.0, -1.0, 0.0, 1.0],
            vec![0.0, -1.0, 2.0 * s, 0.0, -1.0, 0.0],
            vec![0.0, -1.0, 0.0, -2.0 * s, -1.0, 0.0],
            vec![1.0, 0.0, -1.0, -1.0, 0.0, -1.0],
            vec![0.0, 1.0, 0.0, 0.0, -1.0, -2.0 * t],
        ];
        for (i, r) in rows.iter_mut().enumerate() {
            r[i] += 4.0;
        }
        Matrix::from_rows(&rows.iter().map(|r| r.iter().map(|&x| C::new(x, 0.0)).collect()).collect::<Vec<_>>())
            .unwrap()
    }

    #[test]
    fn square_two_particle_matrix() {
        let basis = Arc::new(build_basis(4, 2).unwrap());
        let h0 = InternalHamiltonian::<f64>::kinetic(&Graph::square());
        for (s, t) in [(0.0, 0.0), (1.0, 0.0), (0.5, -1.5), (2.0, 0.25)] {
            let v = Potential::new(vec![s + t, -s + t, -s - t, s - t]).unwrap();
            let op = h0.assemble(&v, &basis).unwrap();
            assert_close(op.matrix(), &square_reference(s, t), 1e-15);
        }
        let free = h0.assemble_free(&basis).unwrap();
        let fermionic = Graph::new(6, &[(1, 2), (2, 3), (3, 5), (5, 1), (2, 4), (4, 5), (5, 6), (6, 2)]).unwrap();
        assert_eq!(graph_of_matrix(free.matrix(), GRAPH_ZERO_TOL).unwrap(), fermionic);
    }

    #[test]
    fn diagonal_one_body_gives_diagonal_many_body() {
        let basis = Arc::new(build_basis(4, 2).unwrap());
        let d = [0.5, -1.0, 2.0, 3.0];
        let h = OneBodyHamiltonian::from_real(&Matrix::from_fn(4, 4, |i, j| if i == j { d[i] } else { 0.0 })).unwrap();
        let op = assemble(&h, &TwoBodyInteraction::zero(4), &Potential::zeros(4), &basis).unwrap();
        for r in 0..6 {
            for c in 0..6 {
                let expected = if r == c { basis.state(r).vertices().map(|i| d[i]).sum() } else { 0.0 };
                assert_eq!(op.matrix()[(r, c)], C::new(expected, 0.0));
            }
        }
    }

    #[test]
    fn interaction_enters_the_diagonal() {
        let basis = Arc::new(build_basis(3, 2).unwrap());
        let w = TwoBodyInteraction::new(Matrix::from_rows(&[
            vec![9.0, 1.0, 2.0],
            vec![1.0, 9.0, 3.0],
            vec![2.0, 3.0, 9.0],
        ]).unwrap())
        .unwrap();
        let h = OneBodyHamiltonian::negative_laplacian(&Graph::triangle());
        let op = assemble(&h, &w, &Potential::zeros(3), &basis).unwrap();
        assert_eq!(op.matrix()[(0, 0)].re, 4.0 + 1.0);
        assert_eq!(op.matrix()[(1, 1)].re, 4.0 + 2.0);
        assert_eq!(op.matrix()[(2, 2)].re, 4.0 + 3.0);
        assert!(TwoBodyInteraction::new(Matrix::from_rows(&[vec![0.0, 1.0], vec![1.5, 0.0]]).unwrap()).is_err());
    }

    #[test]
    fn constant_shift_is_exact_for_dyadic_values() {
        let basis = Arc::new(build_basis(5, 3).unwrap());
        let h0 = InternalHamiltonian::<f64>::kinetic(&Graph::cycle(5));
        let v = Potential::new(vec![0.25, -1.5, 2.0, 0.125, -0.75]).unwrap();
        let c = 0.375;
        let a = h0.assemble(&v.shifted(c), &basis).unwrap();
        let b = h0.assemble(&v, &basis).unwrap();
        for r in 0..basis.len() {
            for k in 0..basis.len() {
                let shift = if r == k { 3.0 * c } else { 0.0 };
                assert_eq!(a.matrix()[(r, k)], b.matrix()[(r, k)] + C::new(shift, 0.0));
            }
        }
    }

    #[test]
    fn dimension_mismatch() {
        let basis = Arc::new(build_basis(4, 2).unwrap());
        let h0 = InternalHamiltonian::<f64>::kinetic(&Graph::triangle());
        assert!(matches!(h0.assemble_free(&basis), Err(Error::DimensionMismatch(_))));
        assert!(h0.assemble(&Potential::zeros(4), &basis).is_err());
    }

    #[test]
    fn number_operators() {
        let basis = Arc::new(build_basis(3, 2).unwrap());
        let n2 = number_operator_matrix::<f64>(1, &basis).unwrap();
        let diag: Vec<f64> = (0..3).map(|k| n2.matrix()[(k, k)].re).collect();
        assert_eq!(diag, vec![1.0, 0.0, 1.0]);
        let n1 = number_operator_matrix::<f64>(0, &basis).unwrap();
        assert_eq!((0..3).map(|k| n1.matrix()[(k, k)].re).collect::<Vec<_>>(), vec![1.0, 1.0, 0.0]);
        let total: f64 = (0..3).map(|i| number_operator_matrix::<f64>(i, &basis).unwrap().matrix()[(2, 2)].re).sum();
        assert_eq!(total, 2.0);
        assert!(number_operator_matrix::<f64>(3, &basis).is_err());
    }

    #[test]
    fn csv_dump_shape() {
        let basis = Arc::new(build_basis(3, 2).unwrap());
        let op = InternalHamiltonian::<f64>::kinetic(&Graph::triangle()).assemble_free(&basis).unwrap();
        let mut out = Vec::new();
        op.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "re:1-2,im:1-2,re:1-3,im:1-3,re:2-3,im:2-3");
        assert!(lines[1].starts_with("4e0,0e0,-1e0,0e0"));
    }
}
