//! Experiment configuration: a flat TOML file, overridden key by key by
//! command-line flags of the same name (`n_tx` in the file, `--n-tx` on the
//! command line).

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::baseline::PgdConfig;
use crate::error::{Error, Result};
use crate::lpm::{LpmConfig, PenaltyUnits};
use crate::scenario::{
    db_to_linear, dbm_to_watts, doppler_norm_from_velocity, watts_to_dbm, RadarScenario, DEFAULT_CARRIER_HZ,
    DEFAULT_CPI_SECONDS, DEFAULT_VELOCITY,
};

pub const DEFAULT_SWEEP_N_TX: [usize; 5] = [4, 8, 16, 32, 64];
pub const DEFAULT_TRIALS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SolverChoice {
    Lpm,
    Pgd,
    Both,
}

impl SolverChoice {
    pub fn solvers(self) -> &'static [SolverKind] {
        match self {
            SolverChoice::Lpm => &[SolverKind::Lpm],
            SolverChoice::Pgd => &[SolverKind::Pgd],
            SolverChoice::Both => &[SolverKind::Lpm, SolverKind::Pgd],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Lpm,
    Pgd,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Lpm => "lpm",
            SolverKind::Pgd => "pgd",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for PenaltyUnits {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "normalized" => Ok(PenaltyUnits::Normalized),
            "absolute" => Ok(PenaltyUnits::Absolute),
            other => Err(format!("unknown penalty units '{other}' (expected normalized or absolute)")),
        }
    }
}

/// One layer of settings. Every field is optional so that a file layer and
/// a flag layer can be merged, the later one winning.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    /// Transmit antennas (single-scenario commands and power sweeps).
    #[arg(long)]
    pub n_tx: Option<usize>,
    /// Receive antennas.
    #[arg(long)]
    pub n_rx: Option<usize>,
    /// Pulse blocks per coherent interval.
    #[arg(long)]
    pub n_blocks: Option<usize>,
    /// Target angle in degrees.
    #[arg(long, allow_hyphen_values = true)]
    pub theta_deg: Option<f64>,
    /// Receiver noise power in dBm.
    #[arg(long, allow_hyphen_values = true)]
    pub noise_dbm: Option<f64>,
    /// Transmit power budget in dBm.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "snr_db")]
    pub power_dbm: Option<f64>,
    /// Radar SNR |β|²·P_t/σ² in dB; sets the power budget.
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<f64>,
    /// Radial target velocity in m/s (only affects the Doppler phase).
    #[arg(long, allow_hyphen_values = true)]
    pub velocity: Option<f64>,
    /// Carrier frequency in Hz.
    #[arg(long)]
    pub carrier_hz: Option<f64>,
    /// Coherent processing interval in seconds.
    #[arg(long)]
    pub cpi_s: Option<f64>,
    /// Proximal penalty.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Stopping tolerance of the linear-proximal iteration.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration cap for every solver.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// How rho and tol are scaled: normalized or absolute.
    #[arg(long)]
    pub penalty_units: Option<PenaltyUnits>,
    #[arg(long, value_enum)]
    pub solver: Option<SolverChoice>,
    /// Random trials per sweep point; trial 0 uses the steering start.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated transmit antenna counts to sweep.
    #[arg(long, value_delimiter = ',')]
    pub sweep_n_tx: Option<Vec<usize>>,
    /// Comma-separated power budgets in dBm to sweep.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub sweep_power_dbm: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ConfigLayer {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let layer: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        layer.check_exclusive()?;
        Ok(layer)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::from_toml_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    fn check_exclusive(&self) -> Result<()> {
        if self.power_dbm.is_some() && self.snr_db.is_some() {
            return Err(Error::Config("power_dbm and snr_db are mutually exclusive".into()));
        }
        Ok(())
    }

    /// Settings of `self` with every key set in `over` replaced. Choosing a
    /// power budget in either form in `over` discards both forms in `self`.
    pub fn merged(&self, over: &ConfigLayer) -> Result<ConfigLayer> {
        over.check_exclusive()?;
        let pick = |a: &Option<f64>, b: &Option<f64>| b.or(*a);
        let power_from_over = over.power_dbm.is_some() || over.snr_db.is_some();
        let (power_dbm, snr_db) =
            if power_from_over { (over.power_dbm, over.snr_db) } else { (self.power_dbm, self.snr_db) };
        Ok(ConfigLayer {
            n_tx: over.n_tx.or(self.n_tx),
            n_rx: over.n_rx.or(self.n_rx),
            n_blocks: over.n_blocks.or(self.n_blocks),
            theta_deg: pick(&self.theta_deg, &over.theta_deg),
            noise_dbm: pick(&self.noise_dbm, &over.noise_dbm),
            power_dbm,
            snr_db,
            velocity: pick(&self.velocity, &over.velocity),
            carrier_hz: pick(&self.carrier_hz, &over.carrier_hz),
            cpi_s: pick(&self.cpi_s, &over.cpi_s),
            rho: pick(&self.rho, &over.rho),
            tol: pick(&self.tol, &over.tol),
            max_iters: over.max_iters.or(self.max_iters),
            penalty_units: over.penalty_units.or(self.penalty_units),
            solver: over.solver.or(self.solver),
            trials: over.trials.or(self.trials),
            seed: over.seed.or(self.seed),
            sweep_n_tx: over.sweep_n_tx.clone().or_else(|| self.sweep_n_tx.clone()),
            sweep_power_dbm: over.sweep_power_dbm.clone().or_else(|| self.sweep_power_dbm.clone()),
            format: over.format.or(self.format),
            out: over.out.clone().or_else(|| self.out.clone()),
        })
    }

    /// Applies defaults and validates.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        self.check_exclusive()?;
        let noise_dbm = self.noise_dbm.unwrap_or(0.0);
        let power = match (self.power_dbm, self.snr_db) {
            (Some(dbm), None) => PowerSpec::Dbm(dbm),
            (None, Some(db)) => PowerSpec::SnrDb(db),
            (None, None) => PowerSpec::SnrDb(10.0),
            (Some(_), Some(_)) => unreachable!("checked above"),
        };
        let theta_deg = self.theta_deg.unwrap_or(45.0);
        let doppler_norm = doppler_norm_from_velocity(
            self.velocity.unwrap_or(DEFAULT_VELOCITY),
            self.carrier_hz.unwrap_or(DEFAULT_CARRIER_HZ),
            self.cpi_s.unwrap_or(DEFAULT_CPI_SECONDS),
        );
        let noise_power = dbm_to_watts(noise_dbm);
        let beta = Complex64::new(1.0, 0.0);
        let mut base = RadarScenario {
            n_tx: self.n_tx.unwrap_or(16),
            n_rx: self.n_rx.unwrap_or(9),
            n_blocks: self.n_blocks.unwrap_or(1024),
            theta: theta_deg.to_radians(),
            beta,
            doppler_norm,
            noise_power,
            power_budget: 1.0,
        };
        base.power_budget = power.watts(noise_power, beta);
        base.validate()?;

        let defaults = LpmConfig::default();
        let lpm = LpmConfig {
            rho: self.rho.unwrap_or(defaults.rho),
            tolerance: self.tol.unwrap_or(defaults.tolerance),
            max_iters: self.max_iters.unwrap_or(defaults.max_iters),
            units: self.penalty_units.unwrap_or_default(),
            ..defaults
        };
        lpm.validate()?;
        let pgd = PgdConfig { max_iters: self.max_iters.unwrap_or(PgdConfig::default().max_iters), ..Default::default() };
        pgd.validate()?;

        let sweep_n_tx = self.sweep_n_tx.clone().unwrap_or_else(|| match self.sweep_power_dbm {
            Some(_) => vec![base.n_tx],
            None => DEFAULT_SWEEP_N_TX.to_vec(),
        });
        check_increasing("sweep_n_tx", &sweep_n_tx.iter().map(|&n| n as f64).collect::<Vec<_>>())?;
        if sweep_n_tx.contains(&0) {
            return Err(Error::Config("sweep_n_tx entries must be positive".into()));
        }
        if let Some(p) = &self.sweep_power_dbm {
            check_increasing("sweep_power_dbm", p)?;
        }
        let trials = self.trials.unwrap_or(DEFAULT_TRIALS);
        if trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }

        Ok(ExperimentConfig {
            base,
            power,
            lpm,
            pgd,
            solver: self.solver.unwrap_or(SolverChoice::Both),
            sweep_n_tx,
            sweep_power_dbm: self.sweep_power_dbm.clone(),
            trials,
            seed: self.seed.unwrap_or(0),
            format: self.format.unwrap_or_default(),
            out: self.out.clone(),
        })
    }
}

fn check_increasing(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Config(format!("{name} must not be empty")));
    }
    if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(format!("{name} must be strictly increasing")));
    }
    Ok(())
}

/// How the transmit power budget was specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerSpec {
    Dbm(f64),
    /// Radar SNR `|β|²·P_t/σ²` in dB.
    SnrDb(f64),
}

impl PowerSpec {
    pub fn watts(self, noise_power: f64, beta: Complex64) -> f64 {
        match self {
            PowerSpec::Dbm(dbm) => dbm_to_watts(dbm),
            PowerSpec::SnrDb(db) => db_to_linear(db) * noise_power / beta.norm_sqr(),
        }
    }
}

/// Fully resolved experiment settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Scenario for single solves and the template for sweep points.
    pub base: RadarScenario,
    pub power: PowerSpec,
    pub lpm: LpmConfig,
    pub pgd: PgdConfig,
    pub solver: SolverChoice,
    pub sweep_n_tx: Vec<usize>,
    /// When absent every point uses the base power budget.
    pub sweep_power_dbm: Option<Vec<f64>>,
    pub trials: usize,
    pub seed: u64,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ConfigLayer::default().resolve().expect("defaults are valid")
    }
}

impl ExperimentConfig {
    pub fn base_power_dbm(&self) -> f64 {
        watts_to_dbm(self.base.power_budget)
    }

    /// Sweep points `(n_tx, power_dbm)` in axis order.
    pub fn points(&self) -> Vec<(usize, f64)> {
        let powers = self.sweep_power_dbm.clone().unwrap_or_else(|| vec![self.base_power_dbm()]);
        self.sweep_n_tx.iter().flat_map(|&n| powers.iter().map(move |&p| (n, p))).collect()
    }

    pub fn scenario_at(&self, n_tx: usize, power_dbm: f64) -> RadarScenario {
        RadarScenario { n_tx, power_budget: dbm_to_watts(power_dbm), ..self.base.clone() }
    }
}
