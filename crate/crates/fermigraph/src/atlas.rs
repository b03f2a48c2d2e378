//! Sweeps over potential space: ground energies, degeneracies, uv certificates and
//! ground densities per grid cell, plus projections of the densities for plotting.

use std::io::Write;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::FockBasis;
use crate::functionals::{combine, random_unit_vector};
use crate::operators::{InternalHamiltonian, Potential};
use crate::repr::{certify_with, CertifyOptions, UvStatus};
use crate::scalar::C;
use crate::spectra::{density_of, Density, GroundManifold, DEGENERACY_TOL};

const GAUGE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub name: String,
    /// Direction in the gauge plane Σu = 0.
    pub direction: Vec<f64>,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl GridAxis {
    /// lo + (hi − lo)·k/(steps − 1); a single step sits at lo.
    pub fn value(&self, k: usize) -> f64 {
        if self.steps <= 1 {
            self.lo
        } else {
            self.lo + (self.hi - self.lo) * k as f64 / (self.steps - 1) as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialGridSpec {
    pub base: Vec<f64>,
    pub axes: Vec<GridAxis>,
}

impl PotentialGridSpec {
    pub fn validate(&self) -> Result<()> {
        let m = self.base.len();
        if m == 0 {
            return Err(Error::InvalidInput("empty base potential".into()));
        }
        if self.axes.is_empty() {
            return Err(Error::InvalidInput("grid needs at least one axis".into()));
        }
        for a in &self.axes {
            if a.direction.len() != m {
                return Err(Error::DimensionMismatch(format!(
                    "axis {} has direction of length {} for M = {m}",
                    a.name,
                    a.direction.len()
                )));
            }
            let scale = a.direction.iter().fold(1.0f64, |s, x| s.max(x.abs()));
            if a.direction.iter().sum::<f64>().abs() > GAUGE_TOL * scale * m as f64 {
                return Err(Error::InvalidInput(format!("axis {} is not in the plane sum(v) = 0", a.name)));
            }
            if a.steps == 0 || !a.lo.is_finite() || !a.hi.is_finite() || a.direction.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput(format!("axis {} has an empty or non-finite range", a.name)));
            }
        }
        if self.base.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("base potential must be finite".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.steps).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Axis coordinates of cell `index`; the last axis runs fastest.
    pub fn coords(&self, mut index: usize) -> Vec<f64> {
        let mut ks = vec![0; self.axes.len()];
        for (k, a) in ks.iter_mut().zip(&self.axes).rev() {
            *k = index % a.steps;
            index /= a.steps;
        }
        ks.iter().zip(&self.axes).map(|(&k, a)| a.value(k)).collect()
    }

    pub fn potential(&self, coords: &[f64]) -> Vec<f64> {
        let mut v = self.base.clone();
        for (c, a) in coords.iter().zip(&self.axes) {
            v.iter_mut().zip(&a.direction).for_each(|(x, d)| *x += c * d);
        }
        v
    }

    /// The (s, t) plane of the square: v = s(1,−1,−1,1) + t(1,1,−1,−1), both over [−r, r].
    pub fn square_st(range: f64, steps: usize) -> Self {
        let axis = |name: &str, d: [f64; 4]| GridAxis { name: name.into(), direction: d.to_vec(), lo: -range, hi: range, steps };
        Self { base: vec![0.0; 4], axes: vec![axis("s", [1.0, -1.0, -1.0, 1.0]), axis("t", [1.0, 1.0, -1.0, -1.0])] }
    }

    /// Ray t·u on the triangle with u the gauge-fixed form of −e_k (1-based k).
    pub fn triangle_ray(vertex: usize, t_max: f64, steps: usize) -> Self {
        let mut d = vec![1.0 / 3.0; 3];
        d[vertex - 1] = -2.0 / 3.0;
        Self {
            base: vec![0.0; 3],
            axes: vec![GridAxis { name: "t".into(), direction: d, lo: t_max / steps as f64, hi: t_max, steps }],
        }
    }
}

#[derive(Clone, Debug)]
pub struct AtlasOptions {
    pub degeneracy_tol: f64,
    /// Skip uv certification (status reported as undetermined).
    pub classify: bool,
    pub certify: CertifyOptions,
}

impl Default for AtlasOptions {
    fn default() -> Self {
        Self { degeneracy_tol: DEGENERACY_TOL, classify: true, certify: CertifyOptions::default() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AtlasCell {
    pub index: usize,
    pub coords: Vec<f64>,
    pub v: Vec<f64>,
    pub ground_energy: f64,
    pub degeneracy: usize,
    pub gap: f64,
    pub ambiguous: bool,
    pub uv_status: UvStatus,
    /// Direction of the persistence witness when one was found.
    pub witness_direction: Option<Vec<f64>>,
    /// Density of the first phase-fixed ground eigenvector.
    pub density: Vec<f64>,
}

pub fn sweep(
    spec: &PotentialGridSpec,
    h0: &InternalHamiltonian<f64>,
    basis: &Arc<FockBasis>,
    opts: &AtlasOptions,
) -> Result<Vec<AtlasCell>> {
    spec.validate()?;
    if spec.base.len() != basis.m() || h0.m() != basis.m() {
        return Err(Error::DimensionMismatch(format!("grid over M = {} for a basis with M = {}", spec.base.len(), basis.m())));
    }
    let free = h0.assemble_free(basis)?;
    (0..spec.len())
        .into_par_iter()
        .map(|index| {
            let coords = spec.coords(index);
            let v = spec.potential(&coords);
            let gm = crate::spectra::ground_manifold(&free.with_potential(&v)?, opts.degeneracy_tol)?;
            let (uv_status, witness_direction) = if opts.classify {
                let verdict = certify_with(&gm.states[0], &free, &Potential::new(v.clone())?, &opts.certify)?;
                (verdict.status, verdict.witness.map(|w| w.direction))
            } else {
                (UvStatus::Undetermined, None)
            };
            Ok(AtlasCell {
                index,
                coords,
                ground_energy: gm.energy,
                degeneracy: gm.degeneracy,
                gap: gm.gap,
                ambiguous: gm.ambiguous,
                uv_status,
                witness_direction,
                density: density_of(&gm.states[0]).values().to_vec(),
                v,
            })
        })
        .collect()
}

pub fn write_atlas_csv<W: Write>(spec: &PotentialGridSpec, cells: &[AtlasCell], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let m = spec.base.len();
    let mut header: Vec<String> = spec.axes.iter().map(|a| a.name.clone()).collect();
    header.extend(["E", "degeneracy", "gap", "uv_status"].map(String::from));
    header.extend((1..=m).map(|i| format!("rho_{i}")));
    w.write_record(&header)?;
    for c in cells {
        let mut rec: Vec<String> = c.coords.iter().map(|x| x.to_string()).collect();
        rec.push(c.ground_energy.to_string());
        rec.push(c.degeneracy.to_string());
        rec.push(c.gap.to_string());
        rec.push(c.uv_status.as_str().to_string());
        rec.extend(c.density.iter().map(|x| x.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a> {
    grid: &'a PotentialGridSpec,
    cells: usize,
    degeneracy_tol: f64,
    classify: bool,
    zero_tol: Option<f64>,
    t_scan: Vec<f64>,
    refine_steps: usize,
    #[serde(flatten)]
    extra: serde_json::Value,
}

/// JSON description of a sweep; `extra` (an object) is merged at the top level.
pub fn manifest_json(spec: &PotentialGridSpec, opts: &AtlasOptions, extra: serde_json::Value) -> Result<String> {
    let t_scan = opts.certify.t_scan.magnitudes();
    Ok(serde_json::to_string_pretty(&Manifest {
        grid: spec,
        cells: spec.len(),
        degeneracy_tol: opts.degeneracy_tol,
        classify: opts.classify,
        zero_tol: opts.certify.zero_tol,
        t_scan,
        refine_steps: opts.certify.refine_steps,
        extra,
    })?)
}

/// Linear map ρ ↦ P(ρ − origin) with orthonormal rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    rows: Vec<Vec<f64>>,
    origin: Vec<f64>,
}

impl Projector {
    pub fn new(rows: Vec<Vec<f64>>, origin: Vec<f64>) -> Result<Self> {
        let m = origin.len();
        if rows.is_empty() || rows.iter().any(|r| r.len() != m) {
            return Err(Error::DimensionMismatch(format!("projector rows must have length {m}")));
        }
        for (i, a) in rows.iter().enumerate() {
            for (j, b) in rows.iter().enumerate() {
                let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if (d - want).abs() > 1e-10 {
                    return Err(Error::NotOrthonormal((d - want).abs()));
                }
            }
        }
        Ok(Self { rows, origin })
    }

    pub fn identity(m: usize) -> Self {
        let rows = (0..m).map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        Self { rows, origin: vec![0.0; m] }
    }

    /// In-plane coordinates of P_{3,2} centred on ρ̄ = (2/3)(1,1,1).
    pub fn barycentric_triangle() -> Self {
        let a = 1.0 / 2f64.sqrt();
        let b = 1.0 / 6f64.sqrt();
        Self { rows: vec![vec![a, -a, 0.0], vec![b, b, -2.0 * b]], origin: vec![2.0 / 3.0; 3] }
    }

    /// Middle plane of the octahedron P_{4,2}, spanned by the directions of the two
    /// square families: (−1,1,1,−1)/2 and (−1,−1,1,1)/2.
    pub fn octahedron_middle_plane() -> Self {
        Self {
            rows: vec![vec![-0.5, 0.5, 0.5, -0.5], vec![-0.5, -0.5, 0.5, 0.5]],
            origin: vec![0.5; 4],
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn apply(&self, rho: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().zip(rho).zip(&self.origin).map(|((a, x), o)| a * (x - o)).sum())
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ImagePoint {
    pub index: usize,
    pub point: Vec<f64>,
    pub degeneracy: usize,
    pub uv_status: UvStatus,
}

pub fn density_image(cells: &[AtlasCell], projector: &Projector) -> Result<Vec<ImagePoint>> {
    cells
        .iter()
        .map(|c| {
            if c.density.len() != projector.origin.len() {
                return Err(Error::DimensionMismatch("projector and density lengths differ".into()));
            }
            Ok(ImagePoint {
                index: c.index,
                point: projector.apply(&c.density),
                degeneracy: c.degeneracy,
                uv_status: c.uv_status,
            })
        })
        .collect()
}

/// Points of the ground-manifold density set: pure densities of `samples` random
/// unit vectors, then mixtures λρ_k + (1 − λ)ρ_l of the basis-state densities for
/// λ on an 11-point grid.
pub fn degenerate_manifold_density_hull(gm: &GroundManifold<f64>, samples: usize, seed: u64) -> Vec<Density<f64>> {
    let g = gm.degeneracy;
    let pure: Vec<Density<f64>> = gm.states.iter().map(density_of).collect();
    if g == 1 {
        return pure;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<Vec<C<f64>>> = (0..samples).map(|_| random_unit_vector(g, &mut rng)).collect();
    let mut out: Vec<Density<f64>> = coeffs.par_iter().map(|c| density_of(&combine(&gm.states, c))).collect();
    let n = gm.states[0].basis().n();
    for k in 0..g {
        for l in k + 1..g {
            for s in 0..=10 {
                let lam = s as f64 / 10.0;
                let rho = pure[k].values().iter().zip(pure[l].values()).map(|(a, b)| lam * a + (1.0 - lam) * b).collect();
                out.push(Density::unchecked(rho, n));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::build_basis;
    use crate::graph::Graph;
    use crate::spectra::ground_manifold;

    fn basis(m: usize, n: usize) -> Arc<FockBasis> {
        Arc::new(build_basis(m, n).unwrap())
    }

    #[test]
    fn grid_ordering() {
        let spec = PotentialGridSpec::square_st(2.0, 5);
        assert_eq!(spec.len(), 25);
        assert_eq!(spec.coords(0), vec![-2.0, -2.0]);
        assert_eq!(spec.coords(1), vec![-2.0, -1.0]);
        assert_eq!(spec.coords(24), vec![2.0, 2.0]);
        assert_eq!(spec.potential(&[1.0, 0.5]), vec![1.5, -0.5, -1.5, 0.5]);
        let mut bad = spec.clone();
        bad.axes[0].direction = vec![1.0, 0.0, 0.0, 0.0];
        assert!(bad.validate().is_err());
    }

    #[test]
    fn square_sweep_small() {
        let spec = PotentialGridSpec::square_st(2.0, 9);
        let cells = sweep(&spec, &InternalHamiltonian::kinetic(&Graph::square()), &basis(4, 2), &AtlasOptions::default())
            .unwrap();
        for c in &cells {
            let (s, t) = (c.coords[0], c.coords[1]);
            assert_eq!(c.degeneracy > 1, s.abs() == t.abs(), "({s},{t})");
            if s.abs() != t.abs() {
                assert_eq!(c.uv_status, UvStatus::NonUvWithWitness);
                let e = 4.0 - 2.0 * (1.0 + s.abs().max(t.abs()).powi(2)).sqrt();
                assert!((c.ground_energy - e).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn triangle_rays_keep_the_exceptional_density() {
        for k in 1..=3 {
            let spec = PotentialGridSpec::triangle_ray(k, 3.0, 12);
            let opts = AtlasOptions { classify: false, ..Default::default() };
            let cells = sweep(&spec, &InternalHamiltonian::kinetic(&Graph::triangle()), &basis(3, 2), &opts).unwrap();
            let mut want = vec![0.5; 3];
            want[k - 1] = 1.0;
            for c in cells {
                assert_eq!(c.degeneracy, 1);
                assert!(c.density.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-12), "{:?}", c.density);
            }
        }
    }

    #[test]
    fn projections() {
        let p = Projector::octahedron_middle_plane();
        Projector::new(p.rows.clone(), p.origin.clone()).unwrap();
        // ρ_A family lies on the first axis, ρ_B on the second
        let beta = 0.3;
        let ra: Vec<f64> = (0..4).map(|i| if i == 1 || i == 2 { beta } else { 1.0 - beta }).collect();
        let q = p.apply(&ra);
        assert!(q[1].abs() < 1e-15 && (q[0] - (2.0 * beta - 1.0)).abs() < 1e-15);
        let t = Projector::barycentric_triangle();
        assert_eq!(t.apply(&[2.0 / 3.0; 3]), vec![0.0, 0.0]);
        assert_eq!(Projector::identity(3).apply(&[0.1, 0.2, 0.3]), vec![0.1, 0.2, 0.3]);
        assert!(Projector::new(vec![vec![1.0, 1.0]], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn triangle_hull_fills_the_incircle() {
        let op = InternalHamiltonian::kinetic(&Graph::triangle()).assemble_free(&basis(3, 2)).unwrap();
        let gm = ground_manifold(&op, 1e-8).unwrap();
        let pts = degenerate_manifold_density_hull(&gm, 2000, 1);
        let r = pts
            .iter()
            .map(|d| d.values().iter().map(|x| (x - 2.0 / 3.0).powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        assert!(r <= 1.0 / 6f64.sqrt() + 1e-10 && r > 1.0 / 6f64.sqrt() - 1e-2);
    }

    #[test]
    fn cuboctahedron_ground_manifold() {
        let op = InternalHamiltonian::kinetic(&Graph::cuboctahedron()).assemble_free(&basis(12, 2)).unwrap();
        let gm = ground_manifold(&op, 1e-8).unwrap();
        assert_eq!(gm.degeneracy, 3);
        let pts = degenerate_manifold_density_hull(&gm, 500, 2);
        let bar = [1.0 / 6.0; 12];
        let closest_pure = pts[..500]
            .iter()
            .map(|d| d.values().iter().zip(bar).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
            .fold(f64::INFINITY, f64::min);
        assert!(closest_pure > 1e-6);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let ens = crate::functionals::closest_ensemble_density(&gm, &bar, 128, &mut rng);
        assert!(ens.iter().zip(bar).all(|(a, b)| (a - b).abs() < 1e-8));
    }
}
