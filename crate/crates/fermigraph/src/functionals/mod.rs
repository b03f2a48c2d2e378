//! Density functionals: the ensemble (Lieb) functional, the pure-state constrained
//! search, the closed form for the two-particle triangle, and energy minimisation
//! over densities.

mod lieb;
mod minimize;
mod pure;
mod surface;
mod triangle;

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::convex::{project_simplex, simplex_least_squares};
use crate::error::Result;
use crate::fock::{build_basis, FockBasis, WaveFunction};
use crate::graph::Graph;
use crate::linalg::{hermitian_eigen, Matrix};
use crate::operators::{InternalHamiltonian, ManyBodyOperator, Potential};
use crate::scalar::{czero, C};
use crate::spectra::{density_of, eigendecompose, GroundManifold, Spectrum};

pub use lieb::{lieb_f, search_radius, LiebEvaluation, LiebOptions, LiebStatus};
pub use minimize::{
    minimize_energy_via_functional, DensityFunctional, EnergyMinimization, LiebFunctional, MinimizeOptions,
    PureFunctional, TriangleFunctional,
};
pub use pure::{pure_f, PureEvaluation, PureOptions};
pub use surface::{functional_surface, interior_lattice, write_surface_csv, SurfaceRow};
pub use triangle::{triangle_f_analytic, TriangleEvaluation, TriangleRegion, INCIRCLE_RADIUS};

/// H_0 together with its basis and the assembled potential-free operator.
#[derive(Clone, Debug)]
pub struct System {
    pub h0: InternalHamiltonian<f64>,
    pub basis: Arc<FockBasis>,
    free: ManyBodyOperator<f64>,
    norm: f64,
}

impl System {
    pub fn new(h0: InternalHamiltonian<f64>, basis: Arc<FockBasis>) -> Result<Self> {
        let free = h0.assemble_free(&basis)?;
        let spec = eigendecompose(&free)?;
        let norm = spec.values.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        Ok(Self { h0, basis, free, norm })
    }

    /// −Δ of `g` with N particles and no interaction.
    pub fn kinetic(g: &Graph, n: usize) -> Result<Self> {
        Self::new(InternalHamiltonian::kinetic(g), Arc::new(build_basis(g.vertex_count(), n)?))
    }

    pub fn m(&self) -> usize {
        self.basis.m()
    }

    pub fn n(&self) -> usize {
        self.basis.n()
    }

    pub fn free_operator(&self) -> &ManyBodyOperator<f64> {
        &self.free
    }

    /// Operator norm ‖H_0‖.
    pub fn h0_norm(&self) -> f64 {
        self.norm
    }

    /// H_0 + Σ v_i n_i.
    pub fn operator(&self, v: &[f64]) -> Result<ManyBodyOperator<f64>> {
        self.free.with_potential(v)
    }

    pub fn spectrum(&self, v: &[f64]) -> Result<Spectrum<f64>> {
        eigendecompose(&self.operator(v)?)
    }

    pub fn ground_energy(&self, v: &[f64]) -> Result<f64> {
        Ok(self.spectrum(v)?.values[0])
    }
}

/// Lowest eigenvalue of H_0 + V.
pub fn ground_energy(v: &Potential<f64>, h0: &InternalHamiltonian<f64>, basis: &Arc<FockBasis>) -> Result<f64> {
    Ok(eigendecompose(&h0.assemble(v, basis)?)?.values[0])
}

/// Static density response χ_ij = ∂ρ_i/∂v_j of a non-degenerate ground state.
pub fn linear_response(spec: &Spectrum<f64>) -> Matrix<f64> {
    let basis = spec.basis();
    let m = basis.m();
    let l = basis.len();
    let psi0 = spec.vectors.column(0);
    let mut chi = Matrix::zeros(m, m);
    for k in 1..l {
        let de = spec.values[k] - spec.values[0];
        if de <= 0.0 {
            continue;
        }
        // a_j = ⟨Ψ_k| n_j |Ψ_0⟩
        let mut a = vec![czero::<f64>(); m];
        for (r, idx) in basis.states().iter().enumerate() {
            let z = spec.vectors[(r, k)].conj() * psi0[r];
            for j in idx.vertices() {
                a[j] += z;
            }
        }
        for i in 0..m {
            for j in 0..m {
                chi[(i, j)] -= 2.0 * (a[i].conj() * a[j]).re / de;
            }
        }
    }
    chi
}

/// Uniformly distributed unit vector in C^g.
pub fn random_unit_vector(g: usize, rng: &mut ChaCha8Rng) -> Vec<C<f64>> {
    loop {
        let v: Vec<C<f64>> = (0..g)
            .map(|_| C::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let nrm = crate::scalar::cnorm(&v);
        if nrm > 1e-12 {
            return v.into_iter().map(|z| z / nrm).collect();
        }
    }
}

/// Linear combination Σ_k c_k Ψ_k of ground-manifold states.
pub fn combine(states: &[WaveFunction<f64>], c: &[C<f64>]) -> WaveFunction<f64> {
    let l = states[0].coeffs().len();
    let mut out = vec![czero(); l];
    for (s, ck) in states.iter().zip(c) {
        for (o, x) in out.iter_mut().zip(s.coeffs()) {
            *o += ck * x;
        }
    }
    WaveFunction::new(states[0].basis().clone(), out).expect("same basis")
}

/// Ensemble density in the ground manifold closest to `target`.
///
/// Pure densities of `samples` random ground states (plus the basis states) seed a
/// convex least-squares fit; the fit is then polished over all g×g density matrices
/// by projected gradient on the spectraplex.
pub fn closest_ensemble_density(
    gm: &GroundManifold<f64>,
    target: &[f64],
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let g = gm.degeneracy;
    if g == 1 {
        return density_of(&gm.states[0]).values().to_vec();
    }
    let m = target.len();
    let mut vecs: Vec<Vec<C<f64>>> = (0..g)
        .map(|k| (0..g).map(|j| if j == k { C::new(1.0, 0.0) } else { czero() }).collect())
        .collect();
    vecs.extend((0..samples).map(|_| random_unit_vector(g, rng)));
    let points: Vec<Vec<f64>> =
        vecs.iter().map(|c| density_of(&combine(&gm.states, c)).values().to_vec()).collect();
    let w = simplex_least_squares(&points, target, 2000);

    // n_i restricted to the ground space: (N_i)_{kl} = ⟨Ψ_k| n_i |Ψ_l⟩
    let basis = gm.states[0].basis();
    let mut blocks = vec![Matrix::<C<f64>>::zeros(g, g); m];
    for (r, idx) in basis.states().iter().enumerate() {
        for k in 0..g {
            for l in 0..g {
                let z = gm.states[k].coeffs()[r].conj() * gm.states[l].coeffs()[r];
                for i in idx.vertices() {
                    blocks[i][(k, l)] += z;
                }
            }
        }
    }
    let dens = |gamma: &Matrix<C<f64>>| -> Vec<f64> {
        blocks
            .iter()
            .map(|b| (0..g).map(|k| (0..g).map(|l| (gamma[(k, l)] * b[(l, k)]).re).sum::<f64>()).sum())
            .collect()
    };
    let mut gamma = Matrix::<C<f64>>::zeros(g, g);
    for (c, wk) in vecs.iter().zip(&w) {
        for k in 0..g {
            for l in 0..g {
                gamma[(k, l)] += c[k] * c[l].conj() * *wk;
            }
        }
    }
    let lip: f64 = blocks.iter().map(|b| b.frobenius_norm().powi(2)).sum::<f64>().max(1e-300);
    let mut best = dens(&gamma);
    let mut best_err = dist2(&best, target);
    for _ in 0..500 {
        let r: Vec<f64> = best.iter().zip(target).map(|(a, b)| a - b).collect();
        let step = Matrix::from_fn(g, g, |k, l| {
            let grad: C<f64> = blocks.iter().zip(&r).map(|(b, ri)| b[(k, l)] * *ri).sum();
            gamma[(k, l)] - grad / lip
        });
        let next = project_spectraplex(&step);
        let d = dens(&next);
        let err = dist2(&d, target);
        gamma = next;
        let improved = best_err - err;
        if err < best_err {
            best = d;
            best_err = err;
        }
        if improved.abs() < 1e-32 || best_err < 1e-30 {
            break;
        }
    }
    best
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest Hermitian PSD matrix with unit trace.
fn project_spectraplex(a: &Matrix<C<f64>>) -> Matrix<C<f64>> {
    let g = a.rows();
    let e = hermitian_eigen(a).expect("small Hermitian eigenproblem");
    let lam = project_simplex(&e.values);
    Matrix::from_fn(g, g, |k, l| (0..g).map(|j| e.vectors[(k, j)] * e.vectors[(l, j)].conj() * lam[j]).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::DEGENERACY_TOL;
    use rand::SeedableRng;

    #[test]
    fn ground_energies() {
        let tri = System::kinetic(&Graph::triangle(), 2).unwrap();
        assert!((tri.ground_energy(&[0.0; 3]).unwrap() - 3.0).abs() < 1e-12);
        assert!((tri.ground_energy(&[2.0, 1.0, 0.0]).unwrap() - 4.3249).abs() < 1e-4);
        assert!((tri.h0_norm() - 6.0).abs() < 1e-12);
        let sq = System::kinetic(&Graph::square(), 2).unwrap();
        let e = ground_energy(&Potential::new(vec![1.0, -1.0, -1.0, 1.0]).unwrap(), &sq.h0, &sq.basis).unwrap();
        assert!((e - (4.0 - 2.0 * 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn linear_response_matches_finite_differences() {
        let sys = System::kinetic(&Graph::chain(4), 2).unwrap();
        let v = [0.3, -0.2, 0.5, -0.6];
        let chi = linear_response(&sys.spectrum(&v).unwrap());
        let h = 1e-5;
        for j in 0..4 {
            let mut vp = v;
            let mut vm = v;
            vp[j] += h;
            vm[j] -= h;
            let rp = density_of(&sys.spectrum(&vp).unwrap().state(0));
            let rm = density_of(&sys.spectrum(&vm).unwrap().state(0));
            for i in 0..4 {
                let fd = (rp.values()[i] - rm.values()[i]) / (2.0 * h);
                assert!((fd - chi[(i, j)]).abs() < 1e-7, "chi[{i},{j}] = {} vs {fd}", chi[(i, j)]);
            }
        }
    }

    #[test]
    fn ensemble_selection_reaches_the_centre_of_the_incircle() {
        let sys = System::kinetic(&Graph::triangle(), 2).unwrap();
        let gm = GroundManifold::from_spectrum(&sys.spectrum(&[0.0; 3]).unwrap(), DEGENERACY_TOL);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rho = closest_ensemble_density(&gm, &[2.0 / 3.0; 3], 128, &mut rng);
        assert!(rho.iter().all(|x| (x - 2.0 / 3.0).abs() < 1e-10));
        // a target outside the hull lands on its boundary, at distance 1/sqrt(6) from the centre
        let far = closest_ensemble_density(&gm, &[0.0, 1.0, 1.0], 128, &mut rng);
        let d = far.iter().map(|x| (x - 2.0 / 3.0).powi(2)).sum::<f64>().sqrt();
        assert!((d - 1.0 / 6f64.sqrt()).abs() < 1e-6);
    }
}
