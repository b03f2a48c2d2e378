//! Closed-form pure-state functional of two fermions on the triangle with h = −Δ.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectra::{check_hypersimplex, DENSITY_TOL};

/// Incircle radius of the density triangle P_{3,2}.
pub const INCIRCLE_RADIUS: f64 = 0.408_248_290_463_863_f64;

const REGION_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TriangleRegion {
    C,
    S1,
    S2,
    S3,
    #[serde(rename = "boundary_exceptional")]
    BoundaryExceptional,
}

impl TriangleRegion {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::C => "C",
            Self::S1 => "S1",
            Self::S2 => "S2",
            Self::S3 => "S3",
            Self::BoundaryExceptional => "boundary_exceptional",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TriangleEvaluation {
    pub value: f64,
    pub region: TriangleRegion,
    pub alpha: [f64; 3],
    /// ∂F̃/∂ρ_i; `None` on the boundary where some α vanishes.
    pub gradient: Option<[f64; 3]>,
}

fn alphas(r: &[f64]) -> [f64; 3] {
    let h = |x: f64| (1.0 - x).max(0.0);
    [(h(r[0]) * h(r[2])).sqrt(), (h(r[0]) * h(r[1])).sqrt(), (h(r[1]) * h(r[2])).sqrt()]
}

/// Sign patterns of the spike branches S1, S2, S3.
const SIGNS: [[f64; 3]; 3] = [[1.0, -1.0, -1.0], [-1.0, -1.0, 1.0], [-1.0, 1.0, -1.0]];

pub fn triangle_f_analytic(rho: &[f64]) -> Result<TriangleEvaluation> {
    if rho.len() != 3 {
        return Err(Error::DimensionMismatch(format!("triangle functional needs 3 densities, got {}", rho.len())));
    }
    check_hypersimplex(rho, 2, 3, DENSITY_TOL)?;
    let alpha = alphas(rho);
    let dist = rho.iter().map(|x| (x - 2.0 / 3.0).powi(2)).sum::<f64>().sqrt();
    let exceptional = rho.iter().filter(|&&x| (x - 1.0).abs() <= REGION_TOL).count() == 1
        && rho.iter().filter(|&&x| (x - 0.5).abs() <= REGION_TOL).count() == 2;
    if exceptional {
        return Ok(TriangleEvaluation { value: 3.0, region: TriangleRegion::BoundaryExceptional, alpha, gradient: None });
    }
    if dist <= INCIRCLE_RADIUS + REGION_TOL {
        return Ok(TriangleEvaluation { value: 3.0, region: TriangleRegion::C, alpha, gradient: Some([0.0; 3]) });
    }
    let branch = |k: usize| 4.0 + 2.0 * (0..3).map(|j| SIGNS[k][j] * alpha[j]).sum::<f64>();
    let k = (0..3).min_by(|&a, &b| branch(a).partial_cmp(&branch(b)).unwrap()).unwrap();
    let region = [TriangleRegion::S1, TriangleRegion::S2, TriangleRegion::S3][k];
    let gradient = alpha.iter().all(|&a| a > 0.0).then(|| {
        // α_1 = √((1−ρ1)(1−ρ3)), α_2 = √((1−ρ1)(1−ρ2)), α_3 = √((1−ρ2)(1−ρ3))
        let s = SIGNS[k];
        let d = |a: f64, other: f64| -other / (2.0 * a);
        [
            2.0 * (s[0] * d(alpha[0], 1.0 - rho[2]) + s[1] * d(alpha[1], 1.0 - rho[1])),
            2.0 * (s[1] * d(alpha[1], 1.0 - rho[0]) + s[2] * d(alpha[2], 1.0 - rho[2])),
            2.0 * (s[0] * d(alpha[0], 1.0 - rho[0]) + s[2] * d(alpha[2], 1.0 - rho[1])),
        ]
    });
    Ok(TriangleEvaluation { value: branch(k), region, alpha, gradient })
}
