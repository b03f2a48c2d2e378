//! Reduced row echelon form over any field with a pivot test.

use std::ops::{Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::Matrix;

/// Field element usable as a pivot. Floating types treat magnitudes at or below
/// [`Pivot::threshold`] as zero; exact rationals use a zero threshold.
pub trait Pivot:
    Clone + Zero + One + Neg<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    fn magnitude(&self) -> f64;
    fn threshold() -> f64;
    fn from_i64(x: i64) -> Self;
}

impl Pivot for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn threshold() -> f64 {
        1e-10
    }
    fn from_i64(x: i64) -> Self {
        x as f64
    }
}

impl Pivot for f32 {
    fn magnitude(&self) -> f64 {
        self.abs() as f64
    }
    fn threshold() -> f64 {
        1e-5
    }
    fn from_i64(x: i64) -> Self {
        x as f32
    }
}

impl Pivot for BigRational {
    fn magnitude(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }
    fn threshold() -> f64 {
        0.0
    }
    fn from_i64(x: i64) -> Self {
        BigRational::from_integer(BigInt::from(x))
    }
}

#[derive(Clone, Debug)]
pub struct Rref<E> {
    pub matrix: Matrix<E>,
    /// Pivot column of each nonzero row, increasing.
    pub pivots: Vec<usize>,
}

pub fn rref<E: Pivot>(a: &Matrix<E>) -> Rref<E> {
    let mut m = a.clone();
    let (rows, cols) = (m.rows(), m.cols());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (best, mag) = (r..rows)
            .map(|i| (i, m[(i, c)].magnitude()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if mag <= E::threshold() {
            for i in r..rows {
                m[(i, c)] = E::zero();
            }
            continue;
        }
        if best != r {
            for j in 0..cols {
                let tmp = m[(best, j)].clone();
                m[(best, j)] = m[(r, j)].clone();
                m[(r, j)] = tmp;
            }
        }
        let p = m[(r, c)].clone();
        for j in c..cols {
            m[(r, j)] = m[(r, j)].clone() / p.clone();
        }
        for i in 0..rows {
            if i == r || m[(i, c)].is_zero() {
                continue;
            }
            let f = m[(i, c)].clone();
            for j in c..cols {
                m[(i, j)] = m[(i, j)].clone() - f.clone() * m[(r, j)].clone();
            }
        }
        pivots.push(c);
        r += 1;
    }
    Rref { matrix: m, pivots }
}

pub fn rank<E: Pivot>(a: &Matrix<E>) -> usize {
    rref(a).pivots.len()
}

/// Basis of the right null space: one vector per free column, with a unit entry there.
pub fn kernel<E: Pivot>(a: &Matrix<E>) -> Vec<Vec<E>> {
    let Rref { matrix, pivots } = rref(a);
    let cols = matrix.cols();
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut x = vec![E::zero(); cols];
        x[free] = E::one();
        for (r, &pc) in pivots.iter().enumerate() {
            x[pc] = -matrix[(r, free)].clone();
        }
        basis.push(x);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(rows: &[[i64; 3]]) -> Matrix<BigRational> {
        Matrix::from_rows(&rows.iter().map(|r| r.iter().map(|&x| BigRational::from_i64(x)).collect()).collect::<Vec<_>>())
            .unwrap()
    }

    #[test]
    fn two_by_three_zero_one_matrix() {
        let a = exact(&[[1, 1, 0], [0, 1, 1]]);
        assert_eq!(rank(&a), 2);
        let k = kernel(&a);
        assert_eq!(k.len(), 1);
        let as_int: Vec<i64> = k[0].iter().map(|x| x.to_integer().to_i64().unwrap()).collect();
        assert_eq!(as_int, vec![1, -1, 1]);
    }

    #[test]
    fn float_and_exact_agree() {
        let rows = [[1, 1, 0], [1, 0, 1], [0, 1, 1]];
        let f = Matrix::from_rows(&rows.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect::<Vec<_>>())
            .unwrap();
        assert_eq!(rank(&f), 3);
        assert_eq!(rank(&exact(&rows)), 3);
        assert!(kernel(&f).is_empty());
    }
}
