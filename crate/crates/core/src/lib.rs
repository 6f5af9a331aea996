//! Discretized simulator of one- and two-photon imaging.
//!
//! The crate computes the detection densities of photons sent through linear
//! optical systems sampled on a one-dimensional transverse lattice:
//!
//! - single photons in pure or mixed states (coherent and partially coherent
//!   imaging),
//! - pure two-photon states: joint coincidence density, singles rates and the
//!   bucket-gated marginal densities,
//! - the ideal position-entangled state, the down-conversion amplitude with a
//!   Gaussian phase-matching function, factorizable states and the classically
//!   correlated pair source, each with closed-form and brute-force routes.
//!
//! It shows that gating one arm with a bucket detector transfers coherent
//! information about a remote object only when the pair is entangled.
//!
//! # Modules
//!
//! - [`grid`]: the lattice and its quadrature rule.
//! - [`optics`]: impulse-response kernels, composition and weak scatterers.
//! - [`sources`]: source states, reduced coherence and Schmidt analysis.
//! - [`measure`]: detection densities and image metrics.
//! - [`sampling`]: seeded Monte Carlo coincidence counting.
//! - [`scenarios`]: JSON scenario documents, the runner, file output and the
//!   built-in demo catalog.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod grid;
pub mod measure;
pub mod optics;
pub mod profiles;
pub mod sampling;
pub mod scenarios;
pub mod sources;

pub use error::{Error, Result};
pub use grid::Grid;
pub use measure::{Density, ImageMetrics, JointDensity};
pub use optics::{CMatrix, ElementSpec, Kernel, Scatterer};
pub use profiles::Profile;
pub use sources::{
    Arm, BiphotonMixture, BiphotonPure, CorrelatedPairSource, SchmidtSpectrum, SinglePhotonMixed, SinglePhotonPure,
    SpdcParams,
};

pub use num_complex::Complex64;
