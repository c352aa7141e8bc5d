//! Physical model of a monostatic MIMO radar observing a single target.
//!
//! Both arrays are half-wavelength uniform linear arrays with element 0 as
//! the phase reference, so the steering vector element `m` is
//! `exp(j·π·m·sin θ)`. Steering vectors are column vectors and the
//! round-trip channel is the rank-one matrix `A(θ) = a_r(θ)·a_t(θ)ᴴ`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Carrier frequency used when converting a target velocity to Doppler.
pub const DEFAULT_CARRIER_HZ: f64 = 10.0e9;

/// Coherent processing interval used when converting a target velocity to
/// normalized Doppler.
pub const DEFAULT_CPI_SECONDS: f64 = 1.0e-3;

/// Radial target velocity of the reference experiment, m/s.
pub const DEFAULT_VELOCITY: f64 = 8.0;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1.0e-3 * 10f64.powf(dbm / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts / 1.0e-3).log10()
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Normalized Doppler `ν = F_D · T_cpi` with `F_D = 2 v f_c / c`.
///
/// With this normalization the echo of block `l ∈ 1..=L` carries the phase
/// `2π ν l / L`.
pub fn doppler_norm_from_velocity(velocity: f64, carrier_hz: f64, cpi_seconds: f64) -> f64 {
    2.0 * velocity * carrier_hz / SPEED_OF_LIGHT * cpi_seconds
}

/// All physical and experiment parameters of one radar scenario.
///
/// Powers are linear watts and angles radians; unit conversion happens once
/// at configuration ingestion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarScenario {
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_blocks: usize,
    pub theta: f64,
    pub beta: Complex64,
    pub doppler_norm: f64,
    pub noise_power: f64,
    pub power_budget: f64,
}

impl RadarScenario {
    /// Reference experiment: 9 receive antennas, θ = 45°, L = 1024,
    /// σ² = 0 dBm, |β| = 1 and a 10 dB radar SNR (so P_t = 10 dBm).
    pub fn reference(n_tx: usize) -> Self {
        let noise_power = dbm_to_watts(0.0);
        let beta = Complex64::new(1.0, 0.0);
        Self {
            n_tx,
            n_rx: 9,
            n_blocks: 1024,
            theta: 45f64.to_radians(),
            beta,
            doppler_norm: doppler_norm_from_velocity(
                DEFAULT_VELOCITY,
                DEFAULT_CARRIER_HZ,
                DEFAULT_CPI_SECONDS,
            ),
            noise_power,
            power_budget: db_to_linear(10.0) * noise_power / beta.norm_sqr(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_tx == 0 {
            return Err(Error::InvalidDimension { what: "n_tx", value: 0 });
        }
        if self.n_rx == 0 {
            return Err(Error::InvalidDimension { what: "n_rx", value: 0 });
        }
        if self.n_blocks == 0 {
            return Err(Error::InvalidDimension { what: "n_blocks", value: 0 });
        }
        if !(self.noise_power > 0.0 && self.noise_power.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise_power must be positive, got {}",
                self.noise_power
            )));
        }
        if !(self.power_budget > 0.0 && self.power_budget.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "power_budget must be positive, got {}",
                self.power_budget
            )));
        }
        if !(self.theta.abs() < PI / 2.0) {
            return Err(Error::InvalidParameter(format!(
                "theta must lie in (-pi/2, pi/2), got {}",
                self.theta
            )));
        }
        if !(self.beta.re.is_finite() && self.beta.im.is_finite() && self.doppler_norm.is_finite()) {
            return Err(Error::InvalidParameter("beta and doppler_norm must be finite".into()));
        }
        Ok(())
    }

    /// Radar SNR `|β|² P_t / σ²` on a linear scale.
    pub fn snr(&self) -> f64 {
        self.beta.norm_sqr() * self.power_budget / self.noise_power
    }
}

/// Complex transmit weights `p` together with the power budget they serve.
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer {
    pub weights: CVector,
    pub power_budget: f64,
}

impl Beamformer {
    pub fn new(weights: CVector, power_budget: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDimension { what: "beamformer length", value: 0 });
        }
        if !(power_budget > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "power budget must be positive, got {power_budget}"
            )));
        }
        Ok(Self { weights, power_budget })
    }

    pub fn n_tx(&self) -> usize {
        self.weights.len()
    }

    /// Radiated power `‖p‖²`.
    pub fn power(&self) -> f64 {
        self.weights.norm_squared()
    }

    pub fn is_zero(&self) -> bool {
        self.weights.iter().all(|w| *w == Complex64::new(0.0, 0.0))
    }

    /// Scales the weights onto the sphere `‖p‖² = P_t`.
    pub fn rescaled_to_budget(&self) -> Result<Self> {
        let power = self.power();
        if !(power > 0.0 && power.is_finite()) {
            return Err(Error::DegenerateInput("cannot rescale a zero beamformer"));
        }
        let scale = (self.power_budget / power).sqrt();
        Ok(Self { weights: self.weights.scale(scale), power_budget: self.power_budget })
    }

    pub fn phase_rotated(&self, phase: f64) -> Self {
        let rot = Complex64::from_polar(1.0, phase);
        Self { weights: self.weights.map(|w| w * rot), power_budget: self.power_budget }
    }
}

fn ula_response(theta: f64, n: usize, what: &'static str) -> Result<CVector> {
    if n == 0 {
        return Err(Error::InvalidDimension { what, value: 0 });
    }
    let k = PI * theta.sin();
    Ok(CVector::from_fn(n, |m, _| Complex64::from_polar(1.0, k * m as f64)))
}

fn ula_response_deriv(theta: f64, n: usize, what: &'static str) -> Result<CVector> {
    if n == 0 {
        return Err(Error::InvalidDimension { what, value: 0 });
    }
    let (sin, cos) = theta.sin_cos();
    Ok(CVector::from_fn(n, |m, _| {
        let m = m as f64;
        Complex64::new(0.0, PI * m * cos) * Complex64::from_polar(1.0, PI * m * sin)
    }))
}

/// Transmit steering vector `a_t(θ)`.
pub fn steering_tx(theta: f64, n_tx: usize) -> Result<CVector> {
    ula_response(theta, n_tx, "n_tx")
}

/// Receive steering vector `a_r(θ)`.
pub fn steering_rx(theta: f64, n_rx: usize) -> Result<CVector> {
    ula_response(theta, n_rx, "n_rx")
}

/// `∂a_t/∂θ`, element `m` equal to `j·π·m·cos θ·e^{jπ m sin θ}`.
pub fn steering_tx_deriv(theta: f64, n_tx: usize) -> Result<CVector> {
    ula_response_deriv(theta, n_tx, "n_tx")
}

pub fn steering_rx_deriv(theta: f64, n_rx: usize) -> Result<CVector> {
    ula_response_deriv(theta, n_rx, "n_rx")
}

/// `A(θ) = a_r(θ)·a_t(θ)ᴴ`, an `n_rx × n_tx` matrix.
pub fn channel_matrix(scenario: &RadarScenario) -> Result<CMatrix> {
    let at = steering_tx(scenario.theta, scenario.n_tx)?;
    let ar = steering_rx(scenario.theta, scenario.n_rx)?;
    Ok(&ar * at.adjoint())
}

/// `∂A/∂θ = ȧ_r·a_tᴴ + a_r·ȧ_tᴴ`.
pub fn channel_matrix_deriv(scenario: &RadarScenario) -> Result<CMatrix> {
    let at = steering_tx(scenario.theta, scenario.n_tx)?;
    let ar = steering_rx(scenario.theta, scenario.n_rx)?;
    let dat = steering_tx_deriv(scenario.theta, scenario.n_tx)?;
    let dar = steering_rx_deriv(scenario.theta, scenario.n_rx)?;
    Ok(&dar * at.adjoint() + &ar * dat.adjoint())
}
