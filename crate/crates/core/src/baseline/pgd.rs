//! Projected gradient descent on the power sphere `‖p‖² = P_t`.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fim::{crb_trace, fim_weight_matrix, FimQuadraticForms, FisherMatrix};
use crate::lpm::{initialize, initialize_perturbed};
use crate::lpm::solver::DEFAULT_START_SPREAD;
use crate::scenario::{Beamformer, CVector, RadarScenario};
use crate::trace::{IterationRecord, SolveStatus, SolverTrace};

/// Halvings of the step before the line search gives up.
pub const MAX_BACKTRACKS: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PgdConfig {
    pub step_init: f64,
    pub backtrack_factor: f64,
    pub armijo_c: f64,
    /// Bound on the relative objective change that ends the run.
    pub tolerance: f64,
    pub max_iters: usize,
}

impl Default for PgdConfig {
    fn default() -> Self {
        Self { step_init: 1.0, backtrack_factor: 0.5, armijo_c: 1e-4, tolerance: 1e-8, max_iters: 20_000 }
    }
}

impl PgdConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidParameter(format!("{what} out of range: {v}")));
        if !(self.step_init > 0.0) {
            return bad("step_init", self.step_init);
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return bad("backtrack_factor", self.backtrack_factor);
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad("armijo_c", self.armijo_c);
        }
        if !(self.tolerance > 0.0) {
            return bad("tolerance", self.tolerance);
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// Objective and Wirtinger gradient `∇ = −Σ_ij [F⁻²]_ij·M_ji·p` at `p`.
///
/// For a Hermitian form `pᴴMp` this convention gives `Mp`; the gradient with
/// respect to the stacked real and imaginary parts is `2∇`.
pub fn crb_gradient(forms: &FimQuadraticForms, p: &CVector) -> Result<(f64, CVector)> {
    let f = forms.evaluate(p);
    let value = crb_trace(&f)?;
    Ok((value, gradient_at(forms, &f, p)?))
}

fn gradient_at(forms: &FimQuadraticForms, f: &FisherMatrix, p: &CVector) -> Result<CVector> {
    let a = fim_weight_matrix(f)?;
    Ok(-(forms.weighted(&a) * p))
}

fn objective(forms: &FimQuadraticForms, p: &CVector) -> Option<(FisherMatrix, f64)> {
    let f = forms.evaluate(p);
    crb_trace(&f).ok().filter(|v| v.is_finite()).map(|v| (f, v))
}

fn onto_sphere(p: CVector, radius: f64) -> CVector {
    let n = p.norm();
    p.scale(radius / n)
}

/// Projected gradient descent with an Armijo backtracking line search.
///
/// The trial step is `t·(‖p‖²/f)·∇`, which makes `step_init` independent of
/// the units of power and of the objective. The run converges when the
/// relative objective change drops below `tolerance` or the tangential
/// gradient vanishes to rounding.
pub fn pgd_solve(scenario: &RadarScenario, config: &PgdConfig, p0: &Beamformer) -> Result<(Beamformer, SolverTrace)> {
    scenario.validate()?;
    config.validate()?;
    if p0.n_tx() != scenario.n_tx {
        return Err(Error::InvalidParameter(format!(
            "initial beamformer has {} weights, scenario has {} antennas",
            p0.n_tx(),
            scenario.n_tx
        )));
    }
    let budget = scenario.power_budget;
    if (p0.power() - budget).abs() > 1e-9 * budget {
        return Err(Error::InvalidParameter(format!(
            "initial beamformer power {} differs from the budget {budget}",
            p0.power()
        )));
    }
    let radius = budget.sqrt();
    let forms = FimQuadraticForms::new(scenario)?;

    let mut x = onto_sphere(p0.weights.clone(), radius);
    let (mut fim, mut value) =
        objective(&forms, &x).ok_or(Error::SingularFim { min_eigenvalue: forms.evaluate(&x).min_eigenvalue() })?;
    let mut trace = SolverTrace::new(value);

    for _ in 0..config.max_iters {
        let started = Instant::now();
        let grad = match gradient_at(&forms, &fim, &x) {
            Ok(g) => g,
            Err(e) => {
                trace.status = SolveStatus::NumericalFailure;
                trace.failure = Some(e.to_string());
                break;
            }
        };
        let radial = x.dotc(&grad).re / budget;
        let tangential = &grad - x.scale(radial);
        let scale = budget / value;
        if scale * tangential.norm() <= 1e-12 * radius {
            trace.status = SolveStatus::Converged;
            break;
        }
        let decrease = 2.0 * scale * tangential.norm_squared();

        let mut t = config.step_init;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial = onto_sphere(&x - grad.scale(t * scale), radius);
            if let Some((f_trial, v_trial)) = objective(&forms, &trial) {
                if v_trial <= value - config.armijo_c * t * decrease {
                    accepted = Some((trial, f_trial, v_trial));
                    break;
                }
            }
            t *= config.backtrack_factor;
        }
        let Some((next, next_fim, next_value)) = accepted else {
            trace.status = SolveStatus::Stalled;
            break;
        };

        trace.records.push(IterationRecord {
            objective: next_value,
            // sphere multiplier estimate from ∇ + λp = 0
            lambda: -radial,
            rho: t,
            step_norm: (&next - &x).norm(),
            constraint_residual: (next.norm_squared() - budget).abs() / budget,
            wall_time: started.elapsed().as_secs_f64(),
        });
        let change = (value - next_value).abs() / value;
        x = next;
        fim = next_fim;
        value = next_value;
        if change <= config.tolerance {
            trace.status = SolveStatus::Converged;
            break;
        }
    }
    trace.final_objective = value;
    Ok((Beamformer::new(x, budget)?, trace))
}

/// Best of `starts` PGD runs: the steering start plus `starts − 1` random
/// perturbations of it drawn from `seed`.
pub fn pgd_multistart(
    scenario: &RadarScenario,
    config: &PgdConfig,
    starts: usize,
    seed: u64,
) -> Result<(Beamformer, SolverTrace)> {
    if starts == 0 {
        return Err(Error::InvalidParameter("need at least one start".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Beamformer, SolverTrace)> = None;
    for k in 0..starts {
        let p0 = if k == 0 {
            initialize(scenario)?
        } else {
            initialize_perturbed(scenario, DEFAULT_START_SPREAD, &mut rng)?
        };
        let run = pgd_solve(scenario, config, &p0)?;
        if best.as_ref().is_none_or(|b| run.1.final_objective < b.1.final_objective) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one start"))
}
