//! Cyclic Jacobi eigensolvers for real symmetric and complex Hermitian matrices.

use super::Matrix;
use crate::scalar::{czero, Real, C};

pub const MAX_SWEEPS: usize = 64;

/// Ascending eigenvalues with eigenvectors stored as the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct Eigen<T: Real> {
    pub values: Vec<T>,
    pub vectors: Matrix<C<T>>,
    pub sweeps: usize,
    /// max_k ‖A x_k − λ_k x_k‖ against the input matrix.
    pub residual: T,
}

#[derive(Clone, Debug)]
pub struct EigenFailure<T: Real> {
    pub sweeps: usize,
    pub residual: T,
}

/// Eigen-decomposition of a Hermitian matrix. Only the lower triangle is trusted; the
/// input is symmetrised before rotating. Real inputs take the cheaper real path.
pub fn hermitian_eigen<T: Real>(a: &Matrix<C<T>>) -> Result<Eigen<T>, EigenFailure<T>> {
    assert!(a.is_square(), "eigen-decomposition needs a square matrix");
    if a.is_real() {
        let r = real_jacobi(&a.real_part());
        return finish(a, r.0, r.1.to_complex(), r.2);
    }
    let n = a.rows();
    let half = T::lit(0.5);
    let mut w = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            C::new(a[(i, i)].re, T::zero())
        } else {
            (a[(i, j)] + a[(j, i)].conj()) * half
        }
    });
    let mut v = Matrix::<C<T>>::identity(n);
    let scale = w.frobenius_norm();
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        if off_diagonal(&w, |z| z.norm_sqr()).sqrt() <= T::epsilon() * scale {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = w[(p, q)];
                let r = apq.norm();
                if r == T::zero() {
                    continue;
                }
                let (c, s) = rotation(w[(p, p)].re, w[(q, q)].re, r);
                // U = diag(1, e^{-iφ}) · [[c, s], [-s, c]] with a_pq = r e^{iφ}.
                let ph = (apq / r).conj();
                let u = [C::new(c, T::zero()), C::new(s, T::zero()), ph * (-s), ph * c];
                rotate_columns(&mut w, p, q, &u);
                rotate_rows(&mut w, p, q, &u);
                rotate_columns(&mut v, p, q, &u);
                w[(p, q)] = czero();
                w[(q, p)] = czero();
                w[(p, p)].im = T::zero();
                w[(q, q)].im = T::zero();
            }
        }
    }
    let values = (0..n).map(|i| w[(i, i)].re).collect();
    finish(a, values, v, sweeps)
}

/// Eigen-decomposition of a real symmetric matrix; vectors are returned real.
pub fn symmetric_eigen<T: Real>(a: &Matrix<T>) -> (Vec<T>, Matrix<T>) {
    let (values, vectors, _) = real_jacobi(a);
    let order = ascending(&values);
    let n = a.rows();
    (
        order.iter().map(|&k| values[k]).collect(),
        Matrix::from_fn(n, n, |i, j| vectors[(i, order[j])]),
    )
}

fn real_jacobi<T: Real>(a: &Matrix<T>) -> (Vec<T>, Matrix<T>, usize) {
    assert!(a.is_square(), "eigen-decomposition needs a square matrix");
    let n = a.rows();
    let half = T::lit(0.5);
    let mut w = Matrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)]) * half);
    let mut v = Matrix::<T>::identity(n);
    let scale = w.as_slice().iter().map(|x| *x * *x).sum::<T>().sqrt();
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        if off_diagonal(&w, |x| *x * *x).sqrt() <= T::epsilon() * scale {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = w[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let (c, s) = rotation(w[(p, p)], w[(q, q)], apq);
                for k in 0..n {
                    let (x, y) = (w[(k, p)], w[(k, q)]);
                    w[(k, p)] = c * x - s * y;
                    w[(k, q)] = s * x + c * y;
                }
                for k in 0..n {
                    let (x, y) = (w[(p, k)], w[(q, k)]);
                    w[(p, k)] = c * x - s * y;
                    w[(q, k)] = s * x + c * y;
                }
                for k in 0..n {
                    let (x, y) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * x - s * y;
                    v[(k, q)] = s * x + c * y;
                }
                w[(p, q)] = T::zero();
                w[(q, p)] = T::zero();
            }
        }
    }
    ((0..n).map(|i| w[(i, i)]).collect(), v, sweeps)
}

/// (c, s) of the rotation [[c, s], [-s, c]] annihilating r in [[alpha, r], [r, beta]].
fn rotation<T: Real>(alpha: T, beta: T, r: T) -> (T, T) {
    let zeta = (beta - alpha) / (r + r);
    let t = if zeta.abs() > T::lit(1e150) {
        T::one() / (zeta + zeta)
    } else {
        let mag = T::one() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
        if zeta < T::zero() {
            -mag
        } else {
            mag
        }
    };
    let c = T::one() / (T::one() + t * t).sqrt();
    (c, t * c)
}

fn off_diagonal<E, T: Real>(w: &Matrix<E>, sq: impl Fn(&E) -> T) -> T {
    let n = w.rows();
    let mut acc = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += sq(&w[(i, j)]);
            }
        }
    }
    acc
}

fn rotate_columns<T: Real>(m: &mut Matrix<C<T>>, p: usize, q: usize, u: &[C<T>; 4]) {
    for k in 0..m.rows() {
        let (x, y) = (m[(k, p)], m[(k, q)]);
        m[(k, p)] = x * u[0] + y * u[2];
        m[(k, q)] = x * u[1] + y * u[3];
    }
}

fn rotate_rows<T: Real>(m: &mut Matrix<C<T>>, p: usize, q: usize, u: &[C<T>; 4]) {
    for k in 0..m.cols() {
        let (x, y) = (m[(p, k)], m[(q, k)]);
        m[(p, k)] = u[0].conj() * x + u[2].conj() * y;
        m[(q, k)] = u[1].conj() * x + u[3].conj() * y;
    }
}

fn ascending<T: Real>(values: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap_or(std::cmp::Ordering::Equal));
    order
}

fn finish<T: Real>(
    a: &Matrix<C<T>>,
    values: Vec<T>,
    vectors: Matrix<C<T>>,
    sweeps: usize,
) -> Result<Eigen<T>, EigenFailure<T>> {
    let n = a.rows();
    let order = ascending(&values);
    let vectors = Matrix::from_fn(n, n, |i, j| vectors[(i, order[j])]);
    let values: Vec<T> = order.iter().map(|&k| values[k]).collect();
    let mut residual = T::zero();
    for (k, &lambda) in values.iter().enumerate() {
        let x = vectors.column(k);
        let ax = a.mul_vec(&x);
        let r = ax
            .iter()
            .zip(&x)
            .map(|(y, x)| (*y - *x * lambda).norm_sqr())
            .sum::<T>()
            .sqrt();
        residual = residual.max(r);
    }
    let bound = T::tol(1e-9) * a.frobenius_norm().max(T::min_positive_value());
    if sweeps >= MAX_SWEEPS && residual > bound {
        return Err(EigenFailure { sweeps, residual });
    }
    Ok(Eigen { values, vectors, sweeps, residual })
}
