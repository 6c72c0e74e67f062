//! Numerical laboratory for the Hadamard-type instability of the periodic,
//! non-fully-dispersive (paraxial) Zakharov system
//!
//! ```text
//! i(∂t + ∂z)E + Δx E = n E,      (∂t² − Δx) n = Δx |E|²
//! ```
//!
//! linearised around a constant field `E = Ē ≠ 0`.
//!
//! The crate is organised bottom-up:
//!
//! - [`spectral`]: truncated Fourier series in the phase variable θ, Sobolev
//!   norms, dealiased products.
//! - [`dispersion`]: the dispersion polynomial, its τ-roots, the 4×4 mode
//!   matrix of the first harmonic, its eigenstructure and exact propagators.
//! - [`linear`]: the unstable linear mode and the inverse of the linear
//!   operator with vanishing Cauchy data, block by block in Fourier.
//! - [`nonlinear`]: the quadratic nonlinearity, time-weighted norms, the Picard
//!   fixed-point solver and an independent split-step integrator.
//! - [`experiments`]: scenario runners and deterministic CSV/JSON emission.
//!
//! Runnable walkthroughs of each capability live in the crate's `examples/`
//! directory.

pub mod dispersion;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod linear;
pub mod nonlinear;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
