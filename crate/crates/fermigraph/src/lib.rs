//! Exact many-body spectra, ground-state densities and density functionals for
//! spinless fermions hopping on a finite graph.

pub mod atlas;
pub mod convex;
pub mod error;
pub mod fock;
pub mod functionals;
pub mod graph;
pub mod linalg;
pub mod operators;
pub mod repr;
pub mod scalar;
pub mod spectra;

pub use error::{DensityViolation, Error, Result};
pub use fock::{build_basis, FockBasis, MultiIndex};
pub use graph::Graph;
pub use scalar::Real;
pub use fock::WaveFunction;
pub use operators::{InternalHamiltonian, ManyBodyOperator, Potential};
pub use spectra::{Density, GroundManifold, Spectrum};

pub type WaveFunction64 = WaveFunction<f64>;
pub type WaveFunction32 = WaveFunction<f32>;
pub type Density64 = Density<f64>;
pub type Density32 = Density<f32>;
pub type Potential64 = Potential<f64>;
pub type Potential32 = Potential<f32>;
pub type Hamiltonian64 = InternalHamiltonian<f64>;
pub type Hamiltonian32 = InternalHamiltonian<f32>;
pub type Operator64 = ManyBodyOperator<f64>;
pub type Operator32 = ManyBodyOperator<f32>;
pub type Spectrum64 = Spectrum<f64>;
pub type Spectrum32 = Spectrum<f32>;
