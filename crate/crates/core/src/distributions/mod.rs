//! Densities, CDFs, moments and samplers for the Student-t, skew-t, normal,
//! gamma, truncated normal and chi-square distributions.

mod chi2;
mod skew_t;
pub mod special;
mod student_t;
mod trunc_normal;

pub use chi2::{chi2_cdf, chi2_quantile};
pub use skew_t::{
    sample_skew_t, skew_t_ln_pdf, skew_t_moments, skew_t_pdf, SkewTLogDensity, SkewTParams,
};
pub use student_t::{student_t_cdf, student_t_ln_pdf, student_t_pdf};
pub use trunc_normal::{trunc_normal_moments, TruncNormalMoments};
