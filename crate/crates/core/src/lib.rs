//! PT-symmetric imaginary step potential: continuum eigenfunctions, the
//! first-order metric, observables, the equivalent Hermitian Hamiltonian and
//! its classical limit.
//!
//! All routines are generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`.

pub mod classical;
pub mod dynamics;
pub mod eigensystem;
pub mod error;
pub mod grid;
pub mod hequiv;
pub mod linalg;
pub mod metric;
pub mod observables;
pub mod params;
pub mod quadrature;
pub mod scalar;
pub mod spline;

pub use error::{Error, Result};
pub use scalar::{Cx, Real};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type PhysicalParams64 = params::PhysicalParams<f64>;
pub type ScaledParams64 = params::ScaledParams<f64>;
pub type EigenSolution64 = eigensystem::EigenSolution<f64>;
pub type UniformGrid64 = grid::UniformGrid<f64>;
pub type CoeffTable64 = hequiv::CoeffTable<f64>;
pub type AlphaInterpolant64 = hequiv::AlphaInterpolant<f64>;
pub type ClassicalHamiltonian64 = classical::ClassicalHamiltonian<f64>;
pub type PhaseState64 = classical::PhaseState<f64>;
pub type Packet64 = dynamics::Packet<f64>;
pub type EvolutionRun64 = dynamics::EvolutionRun<f64>;
