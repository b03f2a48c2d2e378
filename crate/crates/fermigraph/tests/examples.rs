//! Worked examples on the triangle, square and cuboctahedron through the public API.

mod common;

use std::sync::Arc;

use fermigraph::atlas::{sweep, GridAxis, AtlasOptions, PotentialGridSpec};
use fermigraph::convex::project_hypersimplex;
use fermigraph::fock::{annihilate, create, slater_determinant, WaveFunction};
use fermigraph::functionals::{
    lieb_f, minimize_energy_via_functional, pure_f, triangle_f_analytic, LiebOptions, LiebStatus, MinimizeOptions,
    PureOptions, System, TriangleFunctional,
};
use fermigraph::graph::{graph_laplacian, graph_of_matrix};
use fermigraph::operators::{number_operator_matrix, InternalHamiltonian, Potential};
use fermigraph::repr::{nonuv_subspace, odlyzko_number, state_from_density, support, upsilon};
use fermigraph::scalar::C;
use fermigraph::spectra::{
    density_of, density_of_ensemble, eigendecompose, ground_manifold, EnsembleState, DEGENERACY_TOL,
};
use fermigraph::{build_basis, Graph, MultiIndex};

const REFERENCE_RHO: [f64; 3] = [0.2121, 0.8176, 0.9704];

fn basis(m: usize, n: usize) -> Arc<fermigraph::FockBasis> {
    Arc::new(build_basis(m, n).unwrap())
}

fn labels(l: &[usize], m: usize) -> MultiIndex {
    MultiIndex::from_labels(l, m).unwrap()
}

fn square_potential(s: f64, t: f64) -> Potential<f64> {
    Potential::new(vec![s + t, -s + t, -s - t, s - t]).unwrap()
}

fn square_psi_a(s: f64) -> WaveFunction<f64> {
    let a = -s + (1.0 + s * s).sqrt();
    let z = 1.0 + a * a;
    WaveFunction::from_real(basis(4, 2), &[0.0, a / z, a * a / z, 1.0 / z, a / z, 0.0]).unwrap()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

#[test]
fn graphs_and_their_many_body_graphs() {
    let l = graph_laplacian::<f64>(&Graph::triangle());
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(l[(i, j)], if i == j { -2.0 } else { 1.0 });
        }
    }
    let sq = graph_laplacian::<f64>(&Graph::square());
    assert_eq!((sq[(0, 2)], sq[(1, 3)], sq[(0, 0)]), (0.0, 0.0, -2.0));
    assert!(!Graph::empty(2).unwrap().is_connected());

    let tri = InternalHamiltonian::kinetic(&Graph::triangle()).assemble_free(&basis(3, 2)).unwrap();
    let g = graph_of_matrix(tri.matrix(), 1e-12).unwrap();
    assert_eq!((g.vertex_count(), g.edge_count()), (3, 3));

    let sq = InternalHamiltonian::kinetic(&Graph::square()).assemble_free(&basis(4, 2)).unwrap();
    let g = graph_of_matrix(sq.matrix(), 1e-12).unwrap();
    assert_eq!((g.vertex_count(), g.edge_count()), (6, 8));
    assert!(g.is_connected());
}

#[test]
fn basis_and_signs() {
    let b = build_basis(4, 2).unwrap();
    let listed: Vec<Vec<usize>> = b.states().iter().map(|s| s.labels()).collect();
    assert_eq!(listed, [[1, 2], [1, 3], [1, 4], [2, 3], [2, 4], [3, 4]]);
    assert_eq!(annihilate(1, labels(&[1, 2], 3)), Some((-1, labels(&[1], 3))));
    assert_eq!(create(2, labels(&[1, 2], 3)), Some((1, labels(&[1, 2, 3], 3))));
    assert_eq!(create(1, labels(&[1, 2], 3)), None);

    let r3 = 1.0 / 3f64.sqrt();
    let r2 = 1.0 / 2f64.sqrt();
    let orbitals = vec![
        vec![C::new(r3, 0.0); 3],
        vec![C::new(r2, 0.0), C::new(-r2, 0.0), C::new(0.0, 0.0)],
    ];
    let psi = slater_determinant(&orbitals, &basis(3, 2)).unwrap();
    let want = [-2.0, -1.0, 1.0].map(|x| x / 6f64.sqrt());
    let overlap: C<f64> = psi.coeffs().iter().zip(want).map(|(c, w)| c * w).sum();
    assert!((overlap.norm() - 1.0).abs() < 1e-12);
}

#[test]
fn assembled_matrices() {
    let b = basis(3, 2);
    let h = InternalHamiltonian::<f64>::kinetic(&Graph::triangle()).assemble_free(&b).unwrap();
    let off = [[0.0, -1.0, 1.0], [-1.0, 0.0, -1.0], [1.0, -1.0, 0.0]];
    for i in 0..3 {
        for j in 0..3 {
            let want = off[i][j] + if i == j { 4.0 } else { 0.0 };
            assert!((h.matrix()[(i, j)] - C::new(want, 0.0)).norm() < 1e-14);
        }
    }
    let n2 = number_operator_matrix::<f64>(1, &b).unwrap();
    let diag: Vec<f64> = (0..3).map(|k| n2.matrix()[(k, k)].re).collect();
    assert_eq!(diag, [1.0, 0.0, 1.0]);

    let (s, t) = (0.7, -0.3);
    let b = basis(4, 2);
    let h = InternalHamiltonian::kinetic(&Graph::square()).assemble(&square_potential(s, t), &b).unwrap();
    let diag: Vec<f64> = (0..6).map(|k| h.matrix()[(k, k)].re).collect();
    assert!(close(&diag, &[4.0 + 2.0 * t, 4.0, 4.0 + 2.0 * s, 4.0 - 2.0 * s, 4.0, 4.0 - 2.0 * t], 1e-12));
}

#[test]
fn spectra_and_densities() {
    let b = basis(3, 2);
    let h = InternalHamiltonian::kinetic(&Graph::triangle()).assemble_free(&b).unwrap();
    assert!(close(&eigendecompose(&h).unwrap().values, &[3.0, 3.0, 6.0], 1e-12));
    let h32 = InternalHamiltonian::<f32>::kinetic(&Graph::triangle()).assemble_free(&b).unwrap();
    let e32 = eigendecompose(&h32).unwrap().values;
    assert!(e32.iter().zip([3.0f32, 3.0, 6.0]).all(|(a, b)| (a - b).abs() < 1e-5));

    let sq = InternalHamiltonian::kinetic(&Graph::square());
    let b4 = basis(4, 2);
    let gm = ground_manifold(&sq.assemble(&square_potential(1.0, 0.0), &b4).unwrap(), DEGENERACY_TOL).unwrap();
    assert_eq!(gm.degeneracy, 1);
    assert!((gm.energy - (4.0 - 2.0 * 2f64.sqrt())).abs() < 1e-12);
    let gm = ground_manifold(&sq.assemble(&square_potential(1.0, 1.0), &b4).unwrap(), DEGENERACY_TOL).unwrap();
    assert_eq!(gm.degeneracy, 2);

    let r2 = 1.0 / 2f64.sqrt();
    let r6 = 1.0 / 6f64.sqrt();
    let a = WaveFunction::from_real(b.clone(), &[r2, 0.0, -r2]).unwrap();
    let bb = WaveFunction::from_real(b.clone(), &[r6, 2.0 * r6, r6]).unwrap();
    assert!(close(density_of(&a).values(), &[0.5, 1.0, 0.5], 1e-14));
    assert!(close(density_of(&bb).values(), &[5.0 / 6.0, 2.0 / 6.0, 5.0 / 6.0], 1e-14));
    let mix = density_of_ensemble(&EnsembleState::new(vec![0.5, 0.5], vec![a, bb]).unwrap());
    assert!(close(mix.values(), &[2.0 / 3.0; 3], 1e-14));
}

#[test]
fn representability_tools() {
    assert_eq!(odlyzko_number(5, 2).unwrap(), 6);
    let psi = square_psi_a(1.0);
    let sup: Vec<Vec<usize>> = support(&psi, 1e-12).into_iter().map(|s| s.labels()).collect();
    assert_eq!(sup, [[1, 3], [1, 4], [2, 3], [2, 4]]);
    assert_eq!(upsilon(&psi, 1e-12).unwrap().rank(), 3);
    let w = nonuv_subspace(&[psi], 1e-12).unwrap();
    assert_eq!(w.len(), 1);
    let cos = w[0].iter().zip([0.5, 0.5, -0.5, -0.5]).map(|(a, b)| a * b).sum::<f64>().abs()
        / w[0].iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!(cos > 1.0 - 1e-12);

    let r2 = 1.0 / 2f64.sqrt();
    let tri_a = WaveFunction::from_real(basis(3, 2), &[r2, 0.0, -r2]).unwrap();
    let k = &upsilon(&tri_a, 1e-12).unwrap().kernel()[0];
    assert!((k[0] + k[1]).abs() < 1e-12 && (k[1] + k[2]).abs() < 1e-12);

    // the reference density is rounded to four digits and sums to 2.0001
    let rho = project_hypersimplex(&REFERENCE_RHO, 2);
    let psi = state_from_density(&rho, &basis(3, 2)).unwrap();
    assert!(close(density_of(&psi).values(), &rho, 1e-12));
}

#[test]
fn triangle_functionals_agree_on_an_interior_grid() {
    let sys = System::kinetic(&Graph::triangle(), 2).unwrap();
    let mut points = Vec::new();
    let k = 22;
    for i in 1..k {
        for j in 1..k {
            let (x, y) = (i as f64 / k as f64, j as f64 / k as f64);
            let z = 2.0 - x - y;
            if z > 1e-9 && z < 1.0 - 1e-9 {
                points.push([x, y, z]);
            }
        }
    }
    assert!(points.len() >= 200, "{} points", points.len());
    let pure_opts = PureOptions { restarts: 8, ..Default::default() };
    for rho in &points {
        let exact = triangle_f_analytic(rho).unwrap().value;
        let lieb = lieb_f(rho, &sys, &LiebOptions::default()).unwrap();
        assert_eq!(lieb.status, LiebStatus::Converged, "{rho:?}");
        assert!((lieb.value - exact).abs() < 1e-5, "{rho:?}: {} vs {exact}", lieb.value);
        let pure = pure_f(rho, &sys, &pure_opts).unwrap();
        assert!((pure.value - exact).abs() < 1e-5, "{rho:?}: {} vs {exact}", pure.value);
    }

    let rho = project_hypersimplex(&REFERENCE_RHO, 2);
    assert!((lieb_f(&rho, &sys, &LiebOptions::default()).unwrap().value - 3.0832).abs() < 1e-3);
}

#[test]
fn energy_minimisation_shifts_with_a_constant() {
    let f = TriangleFunctional::new();
    let e0 = minimize_energy_via_functional(&[0.0; 3], &f, &MinimizeOptions::default()).unwrap();
    let e1 = minimize_energy_via_functional(&[-1.25; 3], &f, &MinimizeOptions::default()).unwrap();
    assert!((e0.energy - 3.0).abs() < 1e-9);
    assert!((e1.energy - (3.0 - 2.5)).abs() < 1e-9);
    assert!(triangle_f_analytic(e0.rho.values()).unwrap().value - 3.0 < 1e-9);
}

#[test]
fn extreme_density_costs_its_diagonal() {
    let sys = System::kinetic(&Graph::square(), 2).unwrap();
    let p = pure_f(&[1.0, 0.0, 1.0, 0.0], &sys, &PureOptions::default()).unwrap();
    assert!((p.value - 4.0).abs() < 1e-9);
}

#[test]
fn sweeps() {
    let b = basis(3, 2);
    let cells = sweep(
        &PotentialGridSpec::triangle_ray(2, 3.0, 12),
        &InternalHamiltonian::kinetic(&Graph::triangle()),
        &b,
        &AtlasOptions::default(),
    )
    .unwrap();
    for c in &cells {
        assert!(close(&c.density, &[0.5, 1.0, 0.5], 1e-9), "{:?}", c.coords);
    }

    let b12 = basis(12, 2);
    let mut direction = vec![0.0; 12];
    (direction[0], direction[1]) = (1.0, -1.0);
    let axis = GridAxis { name: "u".into(), direction, lo: 0.0, hi: 0.0, steps: 1 };
    let spec = PotentialGridSpec { base: vec![0.0; 12], axes: vec![axis] };
    let cells = sweep(&spec, &InternalHamiltonian::kinetic(&Graph::cuboctahedron()), &b12, &AtlasOptions::default()).unwrap();
    assert_eq!(cells.len(), 1);
    assert_eq!(cells[0].degeneracy, 3);
}
