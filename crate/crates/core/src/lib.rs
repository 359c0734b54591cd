//! Numerical verification of L^p-norm, moment and entropy inequalities for
//! log-concave densities.
//!
//! The crate computes norms, absolute central moments and entropies of
//! one-dimensional and product/Gaussian multivariate densities, evaluates the
//! constants appearing in the inequalities, checks each inequality with a
//! signed margin, and searches families of densities for the extremal ratios.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod density;
pub mod error;
pub mod functionals;
pub mod generator;
pub mod inequality;
pub mod multivariate;
pub mod quadrature;
pub mod search;
pub mod special;

pub use density::{catalog_members, AnalyticDensity, DensityHandle, DensitySpec, PiecewiseLogLinear};
pub use error::{Error, Result};
pub use functionals::{Density1d, Exponent, FunctionalMethod, FunctionalValue};
pub use generator::GeneratorConfig;
pub use inequality::{check_claim, ClaimId, ClaimParams, InequalityVerdict};
pub use multivariate::{MultivariateDensity, NdDensity};
pub use search::{maximize_tightness, SearchFamily, SearchOutcome, SearchProblem};
pub use special::{c_alpha, c_n, d_alpha, d_n, ConstantSet, MultivariateConstantSet};
