//! Cramér-Rao-bound-optimal transmit beamforming for a monostatic MIMO radar.
//!
//! The crate minimizes `tr(F(p)⁻¹)`, the summed bounds on target angle,
//! reflection coefficient and Doppler, over transmit beamformers `p` with
//! `‖p‖² = P_t`. The main solver ([`lpm::solve`]) is a linear-proximal
//! iteration with closed-form steps; [`baseline`] holds the reference
//! solvers used to certify it.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod error;
pub mod fim;
pub mod harness;
pub mod lpm;
pub mod scenario;
pub mod trace;

pub use error::{Error, Result};
pub use fim::{build_fim, crb_trace, FisherMatrix};
pub use lpm::{solve, LpmConfig};
pub use scenario::{Beamformer, RadarScenario};
