//! Property checks shared by the proptest suite and the acceptance run.

use std::sync::Arc;

use super::*;
use fermigraph::functionals::{lieb_f, pure_f, triangle_f_analytic, LiebOptions, PureOptions, System};
use fermigraph::graph::{graph_of_matrix, GRAPH_ZERO_TOL};
use fermigraph::linalg::{symmetric_eigen, Matrix};
use fermigraph::operators::{InternalHamiltonian, OneBodyHamiltonian, Potential, TwoBodyInteraction};
use fermigraph::repr::{decompose_density, state_from_density};
use fermigraph::scalar::C;
use fermigraph::spectra::{density_of, eigendecompose, ground_manifold, GroundManifold, DEGENERACY_TOL};
use fermigraph::{build_basis, fock::slater_determinant, FockBasis, Graph};

pub type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn system(h: &Matrix<f64>, w: Option<Matrix<f64>>, n: usize) -> (InternalHamiltonian<f64>, Arc<FockBasis>) {
    let m = h.rows();
    let w = w.unwrap_or_else(|| Matrix::zeros(m, m));
    let h0 = InternalHamiltonian::new(OneBodyHamiltonian::from_real(h).unwrap(), TwoBodyInteraction::new(w).unwrap())
        .unwrap();
    (h0, Arc::new(build_basis(m, n).unwrap()))
}

fn ground(h0: &InternalHamiltonian<f64>, basis: &Arc<FockBasis>, v: &[f64]) -> f64 {
    eigendecompose(&h0.assemble(&Potential::new(v.to_vec()).unwrap(), basis).unwrap()).unwrap().values[0]
}

/// state_from_density followed by density_of returns ρ.
pub fn hypersimplex_round_trip(m: usize, n: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    let raw: Vec<f64> = random_potential(m, 1.2, &mut r).iter().map(|x| 0.5 + x).collect();
    let rho = fermigraph::convex::project_hypersimplex(&raw, n);
    let parts = decompose_density(&rho, n).map_err(|e| e.to_string())?;
    ensure!(parts.iter().all(|(_, w)| *w >= 0.0), "negative weight in {parts:?}");
    ensure!((parts.iter().map(|(_, w)| w).sum::<f64>() - 1.0).abs() < 1e-9, "weights do not sum to 1");
    let basis = Arc::new(build_basis(m, n).unwrap());
    let psi = state_from_density(&rho, &basis).map_err(|e| e.to_string())?;
    let back = density_of(&psi);
    for (a, b) in back.values().iter().zip(&rho) {
        ensure!((a - b).abs() < 1e-9, "{:?} vs {rho:?}", back.values());
    }
    Ok(())
}

/// One-particle ground state of a hopping matrix with h_ij ≤ 0 is non-degenerate and
/// positive; non-interacting ground densities are positive and equal the orbital sum.
pub fn perron_frobenius(m: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    let g = random_connected_graph(m, 0.3, &mut r);
    let h = random_hopping(&g, &mut r);
    let (h1, basis1) = system(&h, None, 1);
    let gm = ground_manifold(&h1.assemble_free(&basis1).unwrap(), DEGENERACY_TOL).unwrap();
    ensure!(gm.degeneracy == 1, "one-particle ground level is {}-fold", gm.degeneracy);
    ensure!(
        gm.states[0].coeffs().iter().all(|c| c.re > 0.0 && c.im.abs() < 1e-12),
        "not positive: {:?}",
        gm.states[0].coeffs()
    );
    let (vals, vecs) = symmetric_eigen(&h);
    for n in 1..m {
        let (h0, basis) = system(&h, None, n);
        let spec = eigendecompose(&h0.assemble_free(&basis).unwrap()).unwrap();
        let gm = GroundManifold::from_spectrum(&spec, DEGENERACY_TOL);
        for s in &gm.states {
            ensure!(density_of(s).values().iter().all(|&x| x > 0.0), "zero density for N = {n}");
        }
        if gm.degeneracy == 1 && vals[n] - vals[n - 1] > 1e-6 {
            let orbitals: Vec<Vec<C<f64>>> =
                (0..n).map(|k| (0..m).map(|i| C::new(vecs[(i, k)], 0.0)).collect()).collect();
            let sd = slater_determinant(&orbitals, &basis).unwrap();
            let want: Vec<f64> = (0..m).map(|i| (0..n).map(|k| vecs[(i, k)].powi(2)).sum()).collect();
            for (a, b) in density_of(&sd).values().iter().zip(&want) {
                ensure!((a - b).abs() < 1e-10, "Slater density differs from orbital sum");
            }
            for (a, b) in density_of(&gm.states[0]).values().iter().zip(&want) {
                ensure!((a - b).abs() < 1e-10, "ground density differs from orbital sum");
            }
        }
    }
    Ok(())
}

/// Interacting chain with any diagonal interaction: non-degenerate ground state with
/// every coefficient positive after phase fixing.
pub fn chain_sign_uniformity(m: usize, n: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    let mut h = random_hopping(&Graph::chain(m), &mut r);
    for i in 0..m {
        h[(i, i)] = 0.0;
    }
    let w = random_interaction(m, -1.0, 2.0, &mut r);
    let (h0, basis) = system(&h, Some(w), n);
    let v = Potential::new(random_potential(m, 2.0, &mut r)).unwrap();
    let gm = ground_manifold(&h0.assemble(&v, &basis).unwrap(), DEGENERACY_TOL).unwrap();
    ensure!(gm.degeneracy == 1, "degenerate chain ground state");
    ensure!(
        gm.states[0].coeffs().iter().all(|c| c.re > 0.0 && c.im.abs() < 1e-12),
        "sign change in {:?}",
        gm.states[0].coeffs()
    );
    Ok(())
}

/// E(v + c·1) = E(v) + N·c.
pub fn gauge_shift(m: usize, n: usize, c: f64, seed: u64) -> Check {
    let mut r = rng(seed);
    let g = random_connected_graph(m, 0.4, &mut r);
    let (h0, basis) = system(&random_hopping(&g, &mut r), Some(random_interaction(m, 0.0, 1.0, &mut r)), n);
    let v = random_potential(m, 3.0, &mut r);
    let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
    let d = ground(&h0, &basis, &shifted) - ground(&h0, &basis, &v) - n as f64 * c;
    ensure!(d.abs() < 1e-10, "gauge shift off by {d:e}");
    Ok(())
}

/// Midpoint concavity of v ↦ E(v).
pub fn concavity_of_energy(m: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    let g = random_connected_graph(m, 0.4, &mut r);
    let n = 1 + (m - 1) / 2;
    let (h0, basis) = system(&random_hopping(&g, &mut r), Some(random_interaction(m, 0.0, 1.0, &mut r)), n);
    let a = random_potential(m, 3.0, &mut r);
    let b = random_potential(m, 3.0, &mut r);
    let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
    let gap = ground(&h0, &basis, &mid) - 0.5 * (ground(&h0, &basis, &a) + ground(&h0, &basis, &b));
    ensure!(gap >= -1e-10, "E is not concave: {gap:e}");
    Ok(())
}

/// The many-body graph of H is connected whenever the one-body graph is.
pub fn fermionic_graph_connected(m: usize, n: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    let g = random_connected_graph(m, 0.25, &mut r);
    let (h0, basis) = system(&random_hopping(&g, &mut r), Some(random_interaction(m, -2.0, 2.0, &mut r)), n);
    let v = Potential::new(random_potential(m, 2.0, &mut r)).unwrap();
    let op = h0.assemble(&v, &basis).unwrap();
    ensure!(graph_of_matrix(op.matrix(), GRAPH_ZERO_TOL).unwrap().is_connected(), "disconnected for {g:?}");
    Ok(())
}

/// Convexity of F along a random chord and F ≤ F̃ at its end point, on the triangle.
pub fn lieb_convex_and_below_pure(sys: &System, lam: f64, seed: u64) -> Check {
    let mut r = rng(seed);
    let a = random_interior_density(3, 2, 0.02, &mut r);
    let b = random_interior_density(3, 2, 0.02, &mut r);
    let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| lam * x + (1.0 - lam) * y).collect();
    let f = |rho: &[f64]| lieb_f(rho, sys, &LiebOptions::default()).unwrap().value;
    let (fa, fb, fm) = (f(&a), f(&b), f(&mix));
    ensure!(fm <= lam * fa + (1.0 - lam) * fb + 1e-6, "convexity fails at {mix:?}");
    let p = pure_f(&a, sys, &PureOptions { restarts: 4, ..Default::default() }).unwrap();
    ensure!(p.converged, "pure_f did not converge at {a:?}");
    ensure!(fa <= p.value + 1e-6, "F = {fa} > F_pure = {}", p.value);
    ensure!(fa <= triangle_f_analytic(&a).unwrap().value + 1e-6, "F above the closed form at {a:?}");
    Ok(())
}

/// F(ρ) + v·ρ ≥ E(v) on the square.
pub fn fenchel_young(sys: &System, seed: u64) -> Check {
    let mut r = rng(seed);
    let rho = random_interior_density(4, 2, 0.02, &mut r);
    let v = random_potential(4, 3.0, &mut r);
    let f = lieb_f(&rho, sys, &LiebOptions::default()).unwrap().value;
    let vr: f64 = v.iter().zip(&rho).map(|(a, b)| a * b).sum();
    let e = sys.ground_energy(&v).unwrap();
    ensure!(f + vr >= e - 1e-7, "F + v.rho = {} < E = {e}", f + vr);
    Ok(())
}
