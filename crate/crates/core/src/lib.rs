//! Bilinear ergodic and Hilbert averages on finite model measure systems.
//!
//! Factored isometries `Uf = h·(f∘π)` act on weighted point sets; kernels and their lacunary
//! dilates feed weighted bilinear forms; oscillation functionals, discretization and transference
//! checks turn the convergence criteria into measurable quantities.

pub mod averages;
pub mod diagnostics;
pub mod discretize;
mod error;
pub mod functions;
pub mod kernels;
pub mod norms;
pub mod quadrature;
pub mod random;
pub mod systems;
pub mod transfer;
pub mod weights;

pub use error::{Error, Result};
pub use functions::{FlowFunction, Grid, PiecewiseConstant, SampleFunction, Sequence, TrigPoly};
pub use kernels::{DilationFamily, DiscreteKernel, KernelSpec, Parity};
pub use norms::{DistributionFunction, OscillationReport, OscillationVariant};
pub use systems::{FactoredIsometry, IsometryPower, Permutation, TranslationFlow, WeightedSpace};
pub use weights::{WeightSequence, Weights};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
