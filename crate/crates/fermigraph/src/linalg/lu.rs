//! Gaussian elimination with partial pivoting.

use super::Matrix;
use crate::scalar::{cone, czero, Real, C};

/// Determinant of a small complex square matrix.
pub fn complex_determinant<T: Real>(mut a: Matrix<C<T>>) -> C<T> {
    assert!(a.is_square());
    let n = a.rows();
    let mut det = cone();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[(i, k)].norm().partial_cmp(&a[(j, k)].norm()).unwrap())
            .unwrap();
        if a[(p, k)].norm() == T::zero() {
            return czero();
        }
        if p != k {
            swap_rows(&mut a, p, k);
            det = -det;
        }
        let pivot = a[(k, k)];
        det = det * pivot;
        for i in k + 1..n {
            let f = a[(i, k)] / pivot;
            for j in k..n {
                let delta = f * a[(k, j)];
                a[(i, j)] -= delta;
            }
        }
    }
    det
}

/// Solves `a x = b`; `None` when a pivot vanishes below `rel_tol · max|a|`.
pub fn solve<T: Real>(mut a: Matrix<T>, mut b: Vec<T>, rel_tol: T) -> Option<Vec<T>> {
    assert!(a.is_square() && a.rows() == b.len());
    let n = a.rows();
    let scale = a.as_slice().iter().fold(T::zero(), |m, x| m.max(x.abs()));
    let floor = rel_tol * scale;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[(i, k)].abs().partial_cmp(&a[(j, k)].abs()).unwrap())
            .unwrap();
        if a[(p, k)].abs() <= floor {
            return None;
        }
        if p != k {
            swap_rows(&mut a, p, k);
            b.swap(p, k);
        }
        let pivot = a[(k, k)];
        for i in k + 1..n {
            let f = a[(i, k)] / pivot;
            if f == T::zero() {
                continue;
            }
            for j in k..n {
                let delta = f * a[(k, j)];
                a[(i, j)] -= delta;
            }
            let delta = f * b[k];
            b[i] -= delta;
        }
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut acc = b[i];
        for j in i + 1..n {
            acc -= a[(i, j)] * x[j];
        }
        x[i] = acc / a[(i, i)];
    }
    Some(x)
}

fn swap_rows<E: Clone>(a: &mut Matrix<E>, p: usize, k: usize) {
    for j in 0..a.cols() {
        let tmp = a[(p, j)].clone();
        a[(p, j)] = a[(k, j)].clone();
        a[(k, j)] = tmp;
    }
}
