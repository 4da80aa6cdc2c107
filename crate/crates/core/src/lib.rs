//! Worst-case recovery from iid random information.
//!
//! A model space `H` is described by its singular values `sigma_k` against an
//! `L2`-orthonormal basis. Information is a set of random linear functionals
//! (point evaluations, Gaussian functionals or Fourier coefficients) drawn
//! from a Christoffel-type density and weighted for least squares on the span
//! of the first `n` basis functions.

pub mod channels;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod mls;
pub mod model;
pub mod rng;
pub mod sobolev;
pub mod spectrum;
pub mod wls;

pub use channels::{Channel, DensitySpec, DrawRng, Functional, InfoDraw};
pub use error::{Error, Result};
pub use model::{Basis, CoefVector, ModelSpace, TrigBasis};
pub use spectrum::{Spectrum, SpectrumKind, TailSum};
pub use wls::{InfoMatrices, SpectralCheck, WceReport};
