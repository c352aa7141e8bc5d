use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fim::{build_fim, crb_trace, fim_weight_matrix, FisherMatrix};
use crate::lpm::theta::{ChannelGrams, ThetaCoefficients, ThetaMatrix};
use crate::lpm::update::{lambda_update, linearized_power, p_update, q_matrix, GRADIENT_SCALE};
use crate::scenario::{steering_tx, Beamformer, RadarScenario};
use crate::trace::{IterationRecord, SolveStatus, SolverTrace};

/// Largest factor by which the penalty may be doubled away from its
/// configured value.
pub const MAX_PENALTY_GROWTH: f64 = 1024.0;

/// How `rho` and `tolerance` relate to the physical units of the problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PenaltyUnits {
    /// Dimensionless: the penalty is measured against the curvature scale
    /// `tr(F(p⁰)⁻¹)/P_t` and the tolerance against `tr(F(p⁰)⁻¹)`, which is
    /// the same as running the iteration on `tr(F⁻¹)/tr(F(p⁰)⁻¹)` over the
    /// unit-power sphere. Results do not depend on the unit of power.
    #[default]
    Normalized,
    /// Raw values in SI units: `rho` in objective units per watt and an
    /// absolute tolerance on `tr(F⁻¹)`.
    Absolute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpmConfig {
    pub rho: f64,
    pub tolerance: f64,
    pub max_iters: usize,
    pub final_rescale: bool,
    pub units: PenaltyUnits,
    /// Retain every iterate in the trace (needed for convergence ratios).
    pub keep_iterates: bool,
}

impl Default for LpmConfig {
    fn default() -> Self {
        Self {
            rho: 5.0,
            tolerance: 1e-5,
            max_iters: 20_000,
            final_rescale: true,
            units: PenaltyUnits::Normalized,
            keep_iterates: false,
        }
    }
}

impl LpmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::InvalidParameter(format!("rho must be positive, got {}", self.rho)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// Steering-direction start `p⁰ = √P_t · a_t(θ)/‖a_t(θ)‖`.
pub fn initialize(scenario: &RadarScenario) -> Result<Beamformer> {
    let at = steering_tx(scenario.theta, scenario.n_tx)?;
    let scale = (scenario.power_budget / at.norm_squared()).sqrt();
    Beamformer::new(at.scale(scale), scenario.power_budget)
}

/// Relative spread of the random starts used by multi-trial experiments.
pub const DEFAULT_START_SPREAD: f64 = 0.1;

/// Random start `normalize(a_t(θ) + δ)` scaled to the power budget.
///
/// `δ` is circular complex Gaussian whose per-element standard deviation is
/// `spread·‖a_t‖/√N_t` (the real and imaginary parts each carry half of the
/// variance).
pub fn initialize_perturbed<R: Rng + ?Sized>(
    scenario: &RadarScenario,
    spread: f64,
    rng: &mut R,
) -> Result<Beamformer> {
    let at = steering_tx(scenario.theta, scenario.n_tx)?;
    let sigma = spread * at.norm() / (scenario.n_tx as f64).sqrt();
    let normal = Normal::new(0.0, sigma / std::f64::consts::SQRT_2)
        .map_err(|e| Error::InvalidParameter(format!("start spread: {e}")))?;
    let w = at.map(|x| x + Complex64::new(normal.sample(rng), normal.sample(rng)));
    Beamformer::new(w, scenario.power_budget)?.rescaled_to_budget()
}

/// One subproblem solve: build `Θ` and `Q` at `p_k` and apply the dual and
/// primal closed forms. Returns `(λ^{k+1}, p^{k+1})`.
pub fn lpm_step(
    scenario: &RadarScenario,
    grams: &ChannelGrams,
    p_k: &Beamformer,
    f_k: &FisherMatrix,
    lambda_k: f64,
    rho: f64,
) -> Result<(f64, Beamformer)> {
    let a = fim_weight_matrix(f_k)?;
    let theta = ThetaMatrix::from_coefficients(grams, &ThetaCoefficients::new(scenario, &a)).scaled(GRADIENT_SCALE);
    let q = q_matrix(&theta, lambda_k, rho, scenario.noise_power)?;
    let lambda = lambda_update(p_k, &q, rho, scenario.power_budget)?;
    let p = p_update(p_k, &q, lambda, rho)?;
    Ok((lambda, p))
}

/// Runs the linear-proximal iteration from `p0` (the steering start when
/// `None`) until the objective settles.
///
/// A penalty too small to keep `Q` positive definite is doubled and the
/// iteration retried, up to [`MAX_PENALTY_GROWTH`]. A Fisher matrix that
/// turns singular mid-run stops the solve with
/// [`SolveStatus::NumericalFailure`]; a singular start is an error.
pub fn solve(
    scenario: &RadarScenario,
    config: &LpmConfig,
    p0: Option<Beamformer>,
) -> Result<(Beamformer, SolverTrace)> {
    scenario.validate()?;
    config.validate()?;
    let mut p = match p0 {
        Some(p) => p,
        None => initialize(scenario)?,
    };
    if p.n_tx() != scenario.n_tx {
        return Err(Error::InvalidParameter(format!(
            "initial beamformer has {} weights, scenario has {} antennas",
            p.n_tx(),
            scenario.n_tx
        )));
    }
    p.power_budget = scenario.power_budget;

    let grams = ChannelGrams::new(scenario)?;
    let mut fim = build_fim(scenario, &p)?;
    let mut objective = crb_trace(&fim)?;
    let mut trace = SolverTrace::new(objective);

    let (mut rho, tolerance) = match config.units {
        PenaltyUnits::Normalized => {
            (config.rho * objective / scenario.power_budget, config.tolerance * objective)
        }
        PenaltyUnits::Absolute => (config.rho, config.tolerance),
    };
    let rho_cap = rho * MAX_PENALTY_GROWTH;
    let mut lambda = 0.0;
    if config.keep_iterates {
        trace.iterates.push(p.weights.clone());
    }

    for _ in 0..config.max_iters {
        let started = Instant::now();
        let (lambda_next, p_next) = loop {
            match lpm_step(scenario, &grams, &p, &fim, lambda, rho) {
                Ok(step) => break step,
                Err(Error::PenaltyTooSmall { .. }) if rho * 2.0 <= rho_cap => rho *= 2.0,
                Err(e @ Error::PenaltyTooSmall { .. }) => return Err(e),
                Err(e) => {
                    trace.status = SolveStatus::NumericalFailure;
                    trace.failure = Some(e.to_string());
                    return finish(scenario, config, p, trace);
                }
            }
        };
        let evaluated = build_fim(scenario, &p_next).and_then(|f| {
            let o = crb_trace(&f)?;
            if o.is_finite() {
                Ok((f, o))
            } else {
                Err(Error::NumericalFailure("objective is not finite".into()))
            }
        });
        let (next_fim, next_objective) = match evaluated {
            Ok(v) => v,
            Err(e) => {
                trace.status = SolveStatus::NumericalFailure;
                trace.failure = Some(e.to_string());
                return finish(scenario, config, p, trace);
            }
        };
        let elapsed = started.elapsed().as_secs_f64();

        let residual = (linearized_power(&p.weights, &p_next.weights) - scenario.power_budget).abs()
            / scenario.power_budget;
        trace.records.push(IterationRecord {
            objective: next_objective,
            lambda: lambda_next,
            rho,
            step_norm: (&p_next.weights - &p.weights).norm(),
            constraint_residual: residual,
            wall_time: elapsed,
        });
        if config.keep_iterates {
            trace.iterates.push(p_next.weights.clone());
        }

        let change = (next_objective - objective).abs();
        p = p_next;
        fim = next_fim;
        objective = next_objective;
        lambda = lambda_next;
        if change <= tolerance {
            trace.status = SolveStatus::Converged;
            break;
        }
    }
    finish(scenario, config, p, trace)
}

fn finish(
    scenario: &RadarScenario,
    config: &LpmConfig,
    p: Beamformer,
    mut trace: SolverTrace,
) -> Result<(Beamformer, SolverTrace)> {
    let p = if config.final_rescale { p.rescaled_to_budget()? } else { p };
    trace.final_objective = build_fim(scenario, &p).and_then(|f| crb_trace(&f)).unwrap_or(f64::NAN);
    Ok((p, trace))
}
