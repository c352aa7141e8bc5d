//! Exhaustive search over two-antenna beamformers.
//!
//! Every two-element beamformer on the power sphere is, up to a global phase
//! that the Fisher matrix ignores, `√P_t·[cos t, sin t·e^{jφ}]` with
//! `t ∈ [0, π/2]` and `φ ∈ [0, 2π)`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fim::{build_fim_from_products, crb_trace};
use crate::scenario::{channel_matrix, channel_matrix_deriv, Beamformer, CVector, RadarScenario};

pub const MIN_GRID_STEPS: usize = 100;

fn weights(budget: f64, t: f64, phi: f64) -> CVector {
    let r = budget.sqrt();
    CVector::from_vec(vec![Complex64::new(r * t.cos(), 0.0), Complex64::from_polar(r * t.sin(), phi)])
}

/// Best `tr(F⁻¹)` over `t = (π/2)·i/amp_steps`, `i = 0..=amp_steps`, and
/// `φ = 2π·k/phase_steps`, `k = 0..phase_steps`.
///
/// Grid points where the Fisher matrix is singular are skipped. Refining
/// either count by an integer factor keeps every old point, so the best value
/// never increases under such refinement.
pub fn grid_oracle_2tx(scenario: &RadarScenario, amp_steps: usize, phase_steps: usize) -> Result<(Beamformer, f64)> {
    scenario.validate()?;
    if scenario.n_tx != 2 {
        return Err(Error::UnsupportedDimension { expected: 2, got: scenario.n_tx });
    }
    if amp_steps < MIN_GRID_STEPS || phase_steps < MIN_GRID_STEPS {
        return Err(Error::InvalidParameter(format!(
            "grid needs at least {MIN_GRID_STEPS} steps per axis, got {amp_steps}×{phase_steps}"
        )));
    }
    let a = channel_matrix(scenario)?;
    let da = channel_matrix_deriv(scenario)?;
    let budget = scenario.power_budget;

    let best = (0..=amp_steps)
        .into_par_iter()
        .filter_map(|i| {
            let t = FRAC_PI_2 * i as f64 / amp_steps as f64;
            let mut row_best: Option<(f64, usize, usize)> = None;
            for k in 0..phase_steps {
                let phi = 2.0 * PI * k as f64 / phase_steps as f64;
                let p = weights(budget, t, phi);
                let f = build_fim_from_products(scenario, &(&a * &p), &(&da * &p));
                if let Ok(v) = crb_trace(&f) {
                    if row_best.is_none_or(|(b, _, _)| v < b) {
                        row_best = Some((v, i, k));
                    }
                }
            }
            row_best
        })
        // ties resolve to the lowest (i, k) so the result is schedule-independent
        .min_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))))
        .ok_or(Error::SingularFim { min_eigenvalue: 0.0 })?;

    let (value, i, k) = best;
    let t = FRAC_PI_2 * i as f64 / amp_steps as f64;
    let phi = 2.0 * PI * k as f64 / phase_steps as f64;
    Ok((Beamformer::new(weights(budget, t, phi), budget)?, value))
}
