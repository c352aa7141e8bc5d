//! Self-check suite: every oracle in the crate run against the production
//! code paths, reported as one line per check.

use std::fmt;

use nalgebra::Matrix4;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baseline::{grid_oracle_2tx, pgd_multistart, subproblem_qp_oracle, PgdConfig};
use crate::error::Result;
use crate::fim::{build_fim, crb_trace, fim_numeric_oracle, fim_weight_matrix, FimQuadraticForms, FisherMatrix};
use crate::lpm::{linearized_power, solve, theta_matrix, LpmConfig, ThetaMatrix, GRADIENT_SCALE};
use crate::scenario::{Beamformer, CVector, RadarScenario};

/// Builds `Θ` from a scenario and weight matrix; replaceable for mutation
/// tests of the suite itself.
pub type ThetaBuilder = dyn Fn(&RadarScenario, &Matrix4<f64>) -> Result<ThetaMatrix> + Sync;

pub const FIM_TOLERANCE: f64 = 1e-5;
pub const THETA_TOLERANCE: f64 = 1e-5;
pub const SUBPROBLEM_TOLERANCE: f64 = 1e-6;
pub const LINEARIZATION_TOLERANCE: f64 = 1e-9;
pub const GRID_TOLERANCE: f64 = 0.01;
pub const AGREEMENT_TOLERANCE: f64 = 0.01;
pub const GRID_STEPS: usize = 1000;
pub const PGD_STARTS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Worst measured error, when the check got far enough to measure one.
    pub measured: Option<f64>,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckOutcome {
    fn measured(name: &'static str, measured: f64, tolerance: f64, detail: String) -> Self {
        Self { name, passed: measured <= tolerance, measured: Some(measured), tolerance, detail }
    }

    fn failed(name: &'static str, tolerance: f64, detail: String) -> Self {
        Self { name, passed: false, measured: None, tolerance, detail }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        match self.measured {
            Some(m) => write!(f, "{verdict} {:<20} {m:.3e} (tol {:.0e})  {}", self.name, self.tolerance, self.detail),
            None => write!(f, "{verdict} {:<20} -         (tol {:.0e})  {}", self.name, self.tolerance, self.detail),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct CheckReport {
    pub outcomes: Vec<CheckOutcome>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn outcome(&self, name: &str) -> Option<&CheckOutcome> {
        self.outcomes.iter().find(|o| o.name == name)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for o in &self.outcomes {
            writeln!(f, "{o}")?;
        }
        Ok(())
    }
}

fn random_vector(rng: &mut impl Rng, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// Random scenario of the given size around `template`: angle, reflection
/// coefficient and Doppler are redrawn.
pub fn random_scenario(rng: &mut impl Rng, template: &RadarScenario, n_tx: usize, n_rx: usize, n_blocks: usize) -> RadarScenario {
    RadarScenario {
        n_tx,
        n_rx,
        n_blocks,
        theta: rng.random_range(-1.2..1.2),
        beta: Complex64::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)),
        doppler_norm: rng.random_range(-50.0..50.0),
        ..template.clone()
    }
}

/// Relative Frobenius distance between the closed-form and brute-force
/// Fisher matrices.
pub fn fim_oracle_error(scenario: &RadarScenario, p: &Beamformer) -> Result<f64> {
    let f = build_fim(scenario, p)?;
    let g = fim_numeric_oracle(scenario, p)?;
    Ok((f.entries() - g.entries()).norm() / g.entries().norm())
}

/// Relative distance between `GRADIENT_SCALE·Θp/σ²` and the central
/// finite-difference gradient of `p ↦ Σ_ij a_ij F_ji(p)` in the stacked real
/// variables (written back as `∂/∂Re + j·∂/∂Im`).
pub fn theta_gradient_error(scenario: &RadarScenario, a: &Matrix4<f64>, p: &CVector, builder: &ThetaBuilder) -> Result<f64> {
    let weighted = |x: &CVector| -> Result<f64> {
        let f = build_fim(scenario, &Beamformer::new(x.clone(), scenario.power_budget)?)?;
        Ok(a.component_mul(&f.entries().transpose()).sum())
    };
    let h = 1e-4 * p.norm();
    let mut fd = CVector::zeros(p.len());
    for k in 0..p.len() {
        for unit in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
            let mut plus = p.clone();
            let mut minus = p.clone();
            plus[k] += unit * h;
            minus[k] -= unit * h;
            fd[k] += unit * ((weighted(&plus)? - weighted(&minus)?) / (2.0 * h));
        }
    }
    let theta = builder(scenario, a)?;
    let analytic = (theta.entries() * p).scale(GRADIENT_SCALE / scenario.noise_power);
    Ok((&analytic - &fd).norm() / fd.norm())
}

fn check_fim(template: &RadarScenario) -> CheckOutcome {
    const NAME: &str = "fim-oracle";
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for (i, &(n_tx, n_rx, n_blocks)) in [(2, 2, 8), (4, 9, 64)].iter().cycle().take(20).enumerate() {
        let s = random_scenario(&mut rng, template, n_tx, n_rx, n_blocks);
        let p = Beamformer { weights: random_vector(&mut rng, n_tx), power_budget: s.power_budget };
        match fim_oracle_error(&s, &p) {
            Ok(e) => worst = worst.max(e),
            Err(e) => return CheckOutcome::failed(NAME, FIM_TOLERANCE, format!("instance {i}: {e}")),
        }
    }
    CheckOutcome::measured(NAME, worst, FIM_TOLERANCE, "20 instances, relative Frobenius".into())
}

fn check_theta(template: &RadarScenario, builder: &ThetaBuilder) -> CheckOutcome {
    const NAME: &str = "theta-gradient";
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for (i, &(n_tx, n_rx, n_blocks)) in [(2, 2, 4), (4, 9, 64)].iter().cycle().take(20).enumerate() {
        let s = random_scenario(&mut rng, template, n_tx, n_rx, n_blocks);
        let m = Matrix4::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let a = m + m.transpose();
        let p = random_vector(&mut rng, n_tx);
        match theta_gradient_error(&s, &a, &p, builder) {
            Ok(e) if e.is_finite() => worst = worst.max(e),
            Ok(e) => return CheckOutcome::failed(NAME, THETA_TOLERANCE, format!("instance {i}: error {e}")),
            Err(e) => return CheckOutcome::failed(NAME, THETA_TOLERANCE, format!("instance {i}: {e}")),
        }
    }
    CheckOutcome::measured(NAME, worst, THETA_TOLERANCE, format!("20 instances, scale {GRADIENT_SCALE}"))
}

/// Iterates of an LPM run with a tight tolerance, so enough snapshots exist.
fn snapshot_run(scenario: &RadarScenario, lpm: &LpmConfig) -> Result<(Beamformer, crate::trace::SolverTrace)> {
    let config = LpmConfig { tolerance: lpm.tolerance.min(1e-12), keep_iterates: true, max_iters: 200, ..lpm.clone() };
    solve(scenario, &config, None)
}

/// Worst relative disagreement between the closed-form step and the QP
/// oracle over the first `count` iterations: `(λ error, p error, snapshots)`.
pub fn subproblem_errors(scenario: &RadarScenario, lpm: &LpmConfig, count: usize) -> Result<(f64, f64, usize)> {
    let (_, trace) = snapshot_run(scenario, lpm)?;
    let forms = FimQuadraticForms::new(scenario)?;
    let (mut worst_lambda, mut worst_p) = (0.0f64, 0.0f64);
    let snapshots = trace.iterations().min(count);
    for k in 0..snapshots {
        let p_k = &trace.iterates[k];
        let lambda_k = if k == 0 { 0.0 } else { trace.records[k - 1].lambda };
        let f = build_fim(scenario, &Beamformer { weights: p_k.clone(), power_budget: scenario.power_budget })?;
        let a = fim_weight_matrix(&f)?;
        let (lambda, p) = subproblem_qp_oracle(&forms, &a, p_k, lambda_k, trace.records[k].rho, scenario.power_budget)?;
        let closed_p = &trace.iterates[k + 1];
        let closed_lambda = trace.records[k].lambda;
        worst_lambda = worst_lambda.max((lambda - closed_lambda).abs() / closed_lambda.abs().max(f64::MIN_POSITIVE));
        worst_p = worst_p.max((&p - closed_p).norm() / closed_p.norm());
    }
    Ok((worst_lambda, worst_p, snapshots))
}

fn check_subproblem(scenario: &RadarScenario, lpm: &LpmConfig) -> CheckOutcome {
    const NAME: &str = "qp-subproblem";
    match subproblem_errors(scenario, lpm, 10) {
        Ok((dl, dp, n)) => CheckOutcome::measured(
            NAME,
            dl.max(dp),
            SUBPROBLEM_TOLERANCE,
            format!("{n} snapshots, lambda {dl:.1e}, p {dp:.1e}"),
        ),
        Err(e) => CheckOutcome::failed(NAME, SUBPROBLEM_TOLERANCE, e.to_string()),
    }
}

fn check_linearization(scenario: &RadarScenario, lpm: &LpmConfig) -> CheckOutcome {
    const NAME: &str = "linearized-power";
    let config = LpmConfig { keep_iterates: true, ..lpm.clone() };
    match solve(scenario, &config, None) {
        Ok((p, trace)) => {
            let budget = scenario.power_budget;
            let worst = trace
                .iterates
                .windows(2)
                .map(|w| (linearized_power(&w[0], &w[1]) - budget).abs() / budget)
                .fold(0.0f64, f64::max);
            let terminal = (p.power() - budget).abs() / budget;
            let mut outcome = CheckOutcome::measured(
                NAME,
                worst,
                LINEARIZATION_TOLERANCE,
                format!("{} iterations, terminal power error {terminal:.1e}", trace.iterations()),
            );
            outcome.passed &= terminal <= 1e-12;
            outcome
        }
        Err(e) => CheckOutcome::failed(NAME, LINEARIZATION_TOLERANCE, e.to_string()),
    }
}

/// `(LPM value, grid value)` for the two-antenna version of `template`.
pub fn grid_comparison(template: &RadarScenario, n_rx: usize, lpm: &LpmConfig, steps: usize) -> Result<(f64, f64)> {
    let s = RadarScenario { n_tx: 2, n_rx, n_blocks: 8, ..template.clone() };
    let (_, grid) = grid_oracle_2tx(&s, steps, steps)?;
    let (_, trace) = solve(&s, lpm, None)?;
    Ok((trace.final_objective, grid))
}

fn check_grid(template: &RadarScenario, lpm: &LpmConfig) -> CheckOutcome {
    const NAME: &str = "grid-2tx";
    let mut worst = f64::NEG_INFINITY;
    let mut detail = Vec::new();
    for n_rx in [2, 9] {
        match grid_comparison(template, n_rx, lpm, GRID_STEPS) {
            Ok((l, g)) => {
                let gap = (l - g) / g;
                worst = worst.max(gap);
                detail.push(format!("N_r={n_rx} gap {gap:+.1e}"));
            }
            Err(e) => return CheckOutcome::failed(NAME, GRID_TOLERANCE, format!("N_r={n_rx}: {e}")),
        }
    }
    CheckOutcome::measured(NAME, worst.max(0.0), GRID_TOLERANCE, detail.join(", "))
}

fn check_agreement(scenario: &RadarScenario, lpm: &LpmConfig) -> CheckOutcome {
    const NAME: &str = "lpm-vs-pgd";
    let run = || -> Result<(f64, f64)> {
        let (_, lt) = solve(scenario, lpm, None)?;
        let (_, pt) = pgd_multistart(scenario, &PgdConfig::default(), PGD_STARTS, 0)?;
        Ok((lt.final_objective, pt.final_objective))
    };
    match run() {
        Ok((l, p)) => CheckOutcome::measured(
            NAME,
            (l - p).abs() / p,
            AGREEMENT_TOLERANCE,
            format!("lpm {l:.6e}, pgd {p:.6e}"),
        ),
        Err(e) => CheckOutcome::failed(NAME, AGREEMENT_TOLERANCE, e.to_string()),
    }
}

fn check_start(scenario: &RadarScenario) -> Option<CheckOutcome> {
    let p = crate::lpm::initialize(scenario).ok()?;
    let f: Result<FisherMatrix> = build_fim(scenario, &p);
    match f.and_then(|f| crb_trace(&f)) {
        Ok(_) => None,
        Err(e) => Some(CheckOutcome::failed("scenario", 0.0, format!("steering start is not usable: {e}"))),
    }
}

/// Runs the suite for `scenario` with the production `Θ`.
pub fn run_checks(scenario: &RadarScenario, lpm: &LpmConfig) -> CheckReport {
    run_checks_with(scenario, lpm, &theta_matrix)
}

/// Runs the suite with a caller-supplied `Θ` builder.
pub fn run_checks_with(scenario: &RadarScenario, lpm: &LpmConfig, theta: &ThetaBuilder) -> CheckReport {
    let mut outcomes = Vec::new();
    if let Some(diagnostic) = check_start(scenario) {
        outcomes.push(diagnostic);
    }
    outcomes.push(check_fim(scenario));
    outcomes.push(check_theta(scenario, theta));
    outcomes.push(check_subproblem(scenario, lpm));
    outcomes.push(check_linearization(scenario, lpm));
    outcomes.push(check_grid(scenario, lpm));
    outcomes.push(check_agreement(scenario, lpm));
    CheckReport { outcomes }
}
