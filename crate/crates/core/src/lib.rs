//! Depth-based multivariate spacings and nonparametric tolerance regions.
//!
//! A sample is ordered from the centre outward by a data depth (Mahalanobis
//! or simplicial). Consecutive depth order statistics bound nested shells,
//! the multivariate spacings, whose probability contents behave like
//! univariate uniform spacings. Unions of the innermost shells give
//! tolerance regions whose coverage follows a known Beta law.
//!
//! Modules:
//! - [`numerics`]: linear algebra, special functions, samplers
//! - [`depth`]: Mahalanobis and simplicial depth (exact O(n log n) 2-D path)
//! - [`spacings`]: depth ordering, multivariate and univariate spacings
//! - [`tolerance`]: planning, fitting and checking tolerance regions
//! - [`geometry`]: 2-D convex hulls, point-in-polygon, area
//! - [`sim`]: Monte-Carlo coverage harnesses

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod depth;
pub mod error;
pub mod geometry;
pub mod numerics;
pub mod sim;
pub mod spacings;
pub mod tolerance;

pub use data::Dataset;
pub use error::{Error, Result};
