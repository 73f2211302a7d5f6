//! Affine-invariant geometry on symmetric positive definite matrices,
//! closed-form radial fields toward boundary directions, and geometric
//! quantiles built on them.

pub mod error;
pub mod geometry;
pub mod optimize;
pub mod quantile;
pub mod radial;
pub mod sample;
pub mod spectral;

pub use error::{Error, Result};
pub use geometry::{distance, exp_map, geodesic, log_map, metric_inner, metric_norm, tangent_basis, TangentVector};
pub use optimize::{Fit, Gradient, OptimizerConfig};
pub use quantile::{
    frechet_mean, frechet_median, individual_treatment_effect, median_loss, quantile, quantile_gradient,
    quantile_loss, quantile_loss_at_candidate, Dataset, QuantileIndex, TreatmentEffect, TreatmentPair,
};
pub use radial::{
    busemann, power_mean_finite, power_mean_limit, power_mean_limit_degenerate, radial_field, radial_field_oracle,
    radial_frame, radial_jacobian_fd, ray_excess, BoundaryDirection, PowerMean, RadialFrame, RadialJacobian,
};
pub use spectral::{
    eig_sym, frobenius_inner, gram_schmidt, sym_exp, sym_log, sym_power, OrthonormalFrame, SpdPoint,
    SpectralDecomposition, SymmetricMatrix,
};
