//! Computational homogeneous dynamics laboratory.
//!
//! Library layout:
//! - [`group_algebra`]: real Jordan decomposition, SL(2) classification,
//!   Lie-algebra presentations, weight/horospherical decompositions,
//!   log-Jacobians, sl(2)-module structure, and the S-tilde subalgebra.
//! - [`hyperbolic`]: upper half-plane geometry, the modular fundamental
//!   domain, point and coset reduction, hyperbolic area, Haar sampling.
//! - [`flows`]: torus flows and orbit closures, geodesic/horocycle flows on
//!   the modular quotient, time averages, equidistribution and
//!   non-divergence statistics.
//! - [`shearing`]: conjugation-displacement formulas, fastest-divergence
//!   analysis, polynomial stability, joint transverse divergence.
//! - [`entropy`]: partition entropy, exact iterated-join entropy for model
//!   symbolic systems, stretch and translation entropy.
//! - [`quadforms`]: quadratic-form algebra, density search, value counting
//!   and gap analysis.
//!
//! With the default `parallel` feature the data-parallel kernels run on
//! rayon; building with `--no-default-features` selects the sequential
//! fallbacks, which produce bit-identical results.

pub mod entropy;
pub mod error;
pub mod flows;
pub mod group_algebra;
pub mod hyperbolic;
pub mod mat;
pub mod poly;
pub mod quadforms;
pub mod shearing;

pub use error::{Error, Result};

/// Named tolerance constants, surfaced so tests assert against the same
/// values the implementation uses.
pub mod tol {
    /// Spectral classification band half-width for SL(2) trace tests.
    pub const TAU_CLS: f64 = 1e-8;
    /// Relative reconstruction/commutation tolerance for Jordan triples.
    pub const JORDAN_RECON: f64 = 1e-9;
    /// Snap ad-eigenvalues to integers within this distance.
    pub const WEIGHT_SNAP: f64 = 1e-8;
    /// Bracket-grading projection residual bound.
    pub const GRADING: f64 = 1e-9;
    /// S-tilde membership residual bound.
    pub const STILDE: f64 = 1e-8;
    /// Fundamental-domain boundary tolerance.
    pub const FD_BOUNDARY: f64 = 1e-12;
    /// Joint-divergence diagonal verdict band.
    pub const JOINT_DIAG: f64 = 1e-10;
    /// Displacement-polynomial evaluation tolerance scale.
    pub const DISPLACEMENT: f64 = 1e-12;
    /// Probability-vector normalization tolerance.
    pub const PROB_SUM: f64 = 1e-12;
    /// Zero-eigenvalue threshold scale for quadratic-form signatures.
    pub const SIGNATURE_ZERO: f64 = 1e-10;
}
