//! Monitored free-fermion dynamics of a periodic spinful BCS chain.
//!
//! States are fermionic Gaussian states held as Nambu covariance matrices
//! (or, on the fast path, as Slater determinants in the spin-mixed sector
//! basis). The crate covers unitary BdG evolution, stochastic projective
//! charge measurements, entanglement and pairing observables, the
//! quasiparticle/GGE analytic predictions and a deterministic parallel
//! ensemble engine.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the precision for the common case.

pub mod bdg;
pub mod engine;
pub mod error;
pub mod gaussian;
pub mod gge;
pub mod io;
pub mod lattice;
pub mod measurement;
pub mod observables;
pub mod orbital;
pub mod quadrature;
pub mod scalar;

pub use error::{Error, Result};
pub use gaussian::NambuCovariance;
pub use lattice::{InitState, ModeIndex, ModelParams, Spin};
pub use scalar::{Real, C};

pub type NambuCovarianceF64 = gaussian::NambuCovariance<f64>;
pub type NambuCovarianceF32 = gaussian::NambuCovariance<f32>;
pub type BdGMatrixF64 = bdg::BdGMatrix<f64>;
pub type SectorModelF64 = orbital::SectorModel<f64>;
pub type OrbitalStateF64 = orbital::OrbitalState<f64>;
pub type SectorModelF32 = orbital::SectorModel<f32>;
pub type OrbitalStateF32 = orbital::OrbitalState<f32>;
