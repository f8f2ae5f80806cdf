//! Forward and inverse spectral problems for `-y'' + ∫₀ˣ M(x-t) y'(t) dt = λy`
//! on `(0, π)` with Robin conditions `y'(0) - hy(0) = 0`, `y'(π) + Hy(π) = 0`.

pub mod error;
pub mod forward;
pub mod grid;
pub mod inverse;
pub mod io;
pub mod reconstruction;
pub mod registry;
pub mod special;
pub mod spectrum;
pub mod volterra;

pub use error::{Error, Result};
pub use grid::{Grid, SampledFunction};
pub use spectrum::{BoundaryCoefficients, SpectralPoint, Spectrum};
