//! Heat kernels on differential forms.
//!
//! Three settings are covered:
//!
//! - discrete exterior calculus on simplicial 2-complexes ([`complex`],
//!   [`dec`], [`spectral`]), with residual checks of the kernel identities
//!   in [`lab`];
//! - the unit flat torus, where every kernel is an explicit Fourier
//!   series ([`torus`]);
//! - the hyperbolic plane, where the scalar kernel is a spectral integral
//!   over conical functions and the 1-form kernel is assembled by finite
//!   differences ([`h2`]).

pub mod complex;
pub mod dec;
pub mod error;
pub mod export;
pub mod h2;
pub mod lab;
pub mod mesh;
pub mod operator;
pub mod quad;
pub mod report;
pub mod spectral;
pub mod torus;

pub use complex::SimplicialComplex;
pub use dec::{Dec, MassScheme};
pub use error::{Error, Result};
pub use lab::Lab;
pub use operator::{inner_product, Cochain, FormComponentMatrix, LinearOperator, Space};
pub use report::VerificationReport;
pub use spectral::{KernelMatrix, SpectralData};
