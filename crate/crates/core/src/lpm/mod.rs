//! The linear-proximal iteration: each step linearizes `tr(F⁻¹)` and the
//! power constraint at the current beamformer, adds a proximal penalty, and
//! solves the resulting equality-constrained quadratic program in closed form.

pub mod convergence;
pub mod solver;
pub mod theta;
pub mod update;

pub use convergence::{convergence_ratio, RatioSample};
pub use solver::{initialize, initialize_perturbed, lpm_step, solve, LpmConfig, PenaltyUnits};
pub use theta::{theta_matrix, ChannelGrams, ThetaCoefficients, ThetaMatrix};
pub use update::{lambda_update, linearized_power, p_update, q_matrix, QMatrix, GRADIENT_SCALE};
