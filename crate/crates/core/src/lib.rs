//! Two-photon (HBT) intensity-interferometry correlation functions for small
//! chaotic light sources such as a sonoluminescing bubble.
//!
//! The crate covers the full loop between a parametrized space-time source and
//! correlation data:
//!
//! - [`special`]: the Faddeeva function `W(z)`, `erfc` and `sinc`.
//! - [`kinematics`]: unit system (μm, ps) and pair observables `(q, Δω)`.
//! - [`sources`]: the five source densities (Gaussian, shell, sphere,
//!   exponential, expanding shock front) plus a coherent/chaotic flag.
//! - [`correlators`]: closed-form `C(q, Δω)`, the factorized `T(Δω)·Φ(q)`
//!   decomposition, small-q curvature and the `X` rescaled form factor.
//! - [`oracle`]: brute-force Fourier quadrature of the densities, used to
//!   validate every closed form.
//! - [`synth`]: exact, resolution-smeared and Poisson-noisy synthetic surfaces.
//! - [`inference`]: recovery of emission time, curvature, radius, shape and
//!   chaoticity from a surface.
//!
//! All quantities use μm for length, ps for time, μm⁻¹ for wavenumbers and
//! ps⁻¹ for angular frequencies, with ħ = 1.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod correlators;
pub mod error;
pub mod inference;
pub mod kinematics;
pub mod lsq;
pub mod oracle;
pub mod quadrature;
pub mod sources;
pub mod special;
pub mod surface_io;
pub mod synth;

pub use correlators::{correlation, factorized, CorrelationValue, FactorizedForm, CHAOTICITY};
pub use error::{HbtError, Result};
pub use inference::{FitConfig, FitReport};
pub use kinematics::{PhotonPair, RelativeKinematics, SPEED_OF_LIGHT};
pub use sources::{Emission, SourceCase, SourceSpec};
pub use synth::{CorrelationSurface, GridSpec, NoiseSpec, SurfaceRecord};

/// Complex number type used throughout the crate.
pub type Complex = num_complex::Complex64;
