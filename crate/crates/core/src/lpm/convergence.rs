//! Empirical contraction ratios `‖p^{k+1} − p*‖ / ‖p^k − p*‖` of a run.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scenario::{Beamformer, CVector};
use crate::trace::SolverTrace;

/// Distances `‖p^k − p*‖` below this are treated as "already at the limit".
pub const RATIO_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RatioSample {
    Ratio(f64),
    /// `p^k` coincides with `p*`, so the ratio is 0/0 or undefined.
    ConvergedExactly,
}

impl RatioSample {
    pub fn value(self) -> Option<f64> {
        match self {
            RatioSample::Ratio(r) => Some(r),
            RatioSample::ConvergedExactly => None,
        }
    }
}

/// Ratios over consecutive retained iterates of `trace`, measured against
/// `p_star`. Needs a trace recorded with `keep_iterates`.
pub fn convergence_ratio(trace: &SolverTrace, p_star: &Beamformer) -> Result<Vec<RatioSample>> {
    ratios_of(&trace.iterates, &p_star.weights)
}

pub fn ratios_of(iterates: &[CVector], p_star: &CVector) -> Result<Vec<RatioSample>> {
    if iterates.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: iterates.len() });
    }
    if let Some(bad) = iterates.iter().find(|p| p.len() != p_star.len()) {
        return Err(Error::UnsupportedDimension { expected: p_star.len(), got: bad.len() });
    }
    let dist: Vec<f64> = iterates.iter().map(|p| (p - p_star).norm()).collect();
    Ok(dist
        .windows(2)
        .map(|w| {
            if w[0] < RATIO_FLOOR {
                RatioSample::ConvergedExactly
            } else {
                RatioSample::Ratio(w[1] / w[0])
            }
        })
        .collect())
}
