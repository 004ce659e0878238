//! Harmonic functions on Riemannian cones `dr² + φ(r)² g_ω` over a closed
//! link `(N, g_ω)`, built by separation of variables.
//!
//! * [`warping`]: warping functions and radial curvature;
//! * [`link_spectrum`]: eigenvalues, eigenfunctions and projection on the link;
//! * [`radial`]: regular radial profiles `φ_m` in log space;
//! * [`dirichlet`]: harmonic extension of boundary data and sup norms;
//! * [`liouville`]: growth bounds `A(r)`, divergence verdicts and dominance checks.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dirichlet;
pub mod error;
pub mod link_spectrum;
pub mod liouville;
pub mod ode;
pub mod quadrature;
pub mod radial;
pub mod warping;

pub use dirichlet::{extend, BoundaryData, BoundaryDescriptor, ConeHarmonic};
pub use error::{Error, Result};
pub use link_spectrum::{build_spectrum, Coefficients, CustomSpectrum, EigenMode, LinkKind, LinkPoint, LinkSpectrum};
pub use liouville::{
    divergence_verdict, dominance_check, euclidean_exponent, growth_bound_general, growth_bound_nonneg, GrowthBound,
    Regime, Verdict,
};
pub use radial::{indicial_exponent, profile_ratio, solve_profile, RadialProfile};
pub use warping::{classify_curvature, radial_curvature, CurvatureSign, WarpingFunction, WarpingKind};
