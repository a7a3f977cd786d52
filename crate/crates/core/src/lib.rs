//! Shape-invariant potentials in supersymmetric quantum mechanics: a catalog
//! of closed-form superpotentials, their construction from free-particle
//! seeds, grid verifiers, algebraic spectra with an independent
//! finite-difference eigensolver, axially symmetric 3D prepotentials and
//! measure-weighted (radial) factorizations.
//!
//! Units are `ħ = 2m = 1`, so `H = −d²/dx² + V` and `V∓ = W² ∓ W′`.

pub mod ansatz;
pub mod bessel;
pub mod catalog;
pub mod error;
pub mod grid;
pub mod multidim;
pub mod oracle;
pub mod radial;
pub mod spectral;
mod tridiag;
pub mod verify;

pub use catalog::{DomainInterval, DomainKind, Family, ParamSet};
pub use error::{Result, SipError};
pub use grid::{SampledFunction, UniformGrid};
pub use verify::VerificationReport;
