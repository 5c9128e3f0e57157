//! Numerical building blocks: small dense linear algebra, special functions,
//! and seedable samplers for the benchmark distributions.

pub mod linalg;
pub mod sampling;
pub mod special;

pub use linalg::{cholesky, quad_form_inv, sample_cov, Cholesky, Matrix};
pub use sampling::{sample_dist, Distribution, RngState, SimRng};
pub use special::{
    beta_cdf, beta_mean, beta_tail, chi_square_cdf, ln_gamma, normal_cdf, normal_quantile,
    reg_inc_beta, reg_lower_gamma,
};

/// Numerical tolerances shared across the crate.
///
/// Every threshold that decides an error or a convergence stop lives here.
pub mod tol {
    /// A Cholesky pivot at or below this fraction of its diagonal entry is
    /// treated as zero.
    pub const CHOLESKY_PIVOT: f64 = 1e-12;
    /// Maximum relative asymmetry accepted for a covariance matrix.
    pub const SYMMETRY: f64 = 1e-9;
    /// Relative scale of the tolerance used by the general-dimension
    /// point-in-simplex test (p != 2).
    pub const SIMPLEX_REL: f64 = 1e-12;
}
