//! Fisher information over `ξ = [θ, β_Re, β_Im, ν]` and the A-optimal
//! (trace of the CRB) objective.
//!
//! The noise-free echo of block `l ∈ 1..=L` is
//! `μ[l] = β·e^{j2πνl/L}·A(θ)·p`, and the Fisher entries are the Hermitian
//! form `F_ij = (2/σ²)·Re Σ_l (∂μ[l]/∂ξ_i)ᴴ (∂μ[l]/∂ξ_j)`. Every entry is a
//! Hermitian form in `p`, so `F` is linear in `P = p·pᴴ`.

use std::f64::consts::PI;

use nalgebra::{Cholesky, Matrix4, SymmetricEigen, U4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scenario::{
    channel_matrix, channel_matrix_deriv, steering_rx, steering_rx_deriv, steering_tx,
    steering_tx_deriv, Beamformer, CMatrix, CVector, RadarScenario,
};

/// Index of the angle in `ξ`.
pub const THETA: usize = 0;
/// Index of the real part of the reflection coefficient in `ξ`.
pub const BETA_RE: usize = 1;
/// Index of the imaginary part of the reflection coefficient in `ξ`.
pub const BETA_IM: usize = 2;
/// Index of the normalized Doppler in `ξ`.
pub const DOPPLER: usize = 3;

/// Relative eigenvalue floor below which a Fisher matrix counts as singular.
pub const SINGULARITY_THRESHOLD: f64 = 1e-12;

/// Real symmetric 4×4 Fisher information matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherMatrix(Matrix4<f64>);

impl FisherMatrix {
    pub fn from_entries(entries: Matrix4<f64>) -> Self {
        Self(entries)
    }

    pub fn entries(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        let eig = SymmetricEigen::new(self.0);
        let mut out = [0.0; 4];
        out.copy_from_slice(eig.eigenvalues.as_slice());
        out.sort_by(|a, b| a.total_cmp(b));
        out
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Cholesky factor after the singularity check used by every consumer
    /// of `F⁻¹`.
    fn spd_factor(&self) -> Result<Cholesky<f64, U4>> {
        let eig = self.eigenvalues();
        let spectral = eig.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if !(eig[0] > SINGULARITY_THRESHOLD * spectral) || !spectral.is_finite() {
            return Err(Error::SingularFim { min_eigenvalue: eig[0] });
        }
        Cholesky::new(self.0).ok_or(Error::SingularFim { min_eigenvalue: eig[0] })
    }
}

fn check_beamformer(scenario: &RadarScenario, p: &Beamformer) -> Result<()> {
    if p.n_tx() != scenario.n_tx {
        return Err(Error::InvalidParameter(format!(
            "beamformer has {} weights but the scenario has {} transmit antennas",
            p.n_tx(),
            scenario.n_tx
        )));
    }
    if p.is_zero() {
        return Err(Error::DegenerateInput("zero beamformer carries no information"));
    }
    Ok(())
}

/// Closed-form Fisher matrix.
pub fn build_fim(scenario: &RadarScenario, p: &Beamformer) -> Result<FisherMatrix> {
    check_beamformer(scenario, p)?;
    let a = channel_matrix(scenario)?;
    let da = channel_matrix_deriv(scenario)?;
    Ok(build_fim_from_products(scenario, &(&a * &p.weights), &(&da * &p.weights)))
}

/// Fisher matrix from `g = A·p` and `h = (∂A/∂θ)·p`.
pub(crate) fn build_fim_from_products(scenario: &RadarScenario, g: &CVector, h: &CVector) -> FisherMatrix {
    let l = scenario.n_blocks as f64;
    let beta = scenario.beta;
    let beta2 = beta.norm_sqr();
    let k = 2.0 / scenario.noise_power;
    let j = Complex64::new(0.0, 1.0);

    let gg = g.norm_squared();
    let hh = h.norm_squared();
    let hg = h.dotc(g); // hᴴ g

    // Σ_l (2π l / L) = π (L + 1),  Σ_l (2π l / L)² = (4π²/L²)·L(L+1)(2L+1)/6
    let s1 = PI * (l + 1.0);
    let s2 = 4.0 * PI * PI * (l + 1.0) * (2.0 * l + 1.0) / (6.0 * l);

    let mut f = Matrix4::zeros();
    f[(THETA, THETA)] = k * l * beta2 * hh;
    f[(THETA, BETA_RE)] = k * l * (beta.conj() * hg).re;
    f[(THETA, BETA_IM)] = k * l * (j * beta.conj() * hg).re;
    f[(THETA, DOPPLER)] = k * s1 * beta2 * (j * hg).re;
    f[(BETA_RE, BETA_RE)] = k * l * gg;
    f[(BETA_RE, DOPPLER)] = k * s1 * (j * beta).re * gg;
    f[(BETA_IM, BETA_IM)] = k * l * gg;
    f[(BETA_IM, DOPPLER)] = k * s1 * beta.re * gg;
    f[(DOPPLER, DOPPLER)] = k * s2 * beta2 * gg;
    for r in 0..4 {
        for c in 0..r {
            f[(r, c)] = f[(c, r)];
        }
    }
    FisherMatrix(f)
}

/// Brute-force Fisher matrix: the four partials of every `μ[l]` by central
/// differences on `ξ`, summed literally over the `L` blocks.
///
/// Intended for test-scale problems (`L ≤ 4096`, `N_t ≤ 64`).
pub fn fim_numeric_oracle(scenario: &RadarScenario, p: &Beamformer) -> Result<FisherMatrix> {
    check_beamformer(scenario, p)?;
    const STEP: f64 = 1e-6;
    let n_blocks = scenario.n_blocks;
    let xi0 = [scenario.theta, scenario.beta.re, scenario.beta.im, scenario.doppler_norm];

    // Ap depends on θ only, so cache it at the three θ values in use.
    let echo_base = |theta: f64| -> Result<CVector> {
        let at = steering_tx(theta, scenario.n_tx)?;
        let ar = steering_rx(theta, scenario.n_rx)?;
        Ok(ar * at.dotc(&p.weights))
    };
    let base = [echo_base(xi0[0])?, echo_base(xi0[0] + STEP)?, echo_base(xi0[0] - STEP)?];
    let mu = |l: usize, xi: &[f64; 4], base: &CVector| -> CVector {
        let beta = Complex64::new(xi[1], xi[2]);
        let phase = Complex64::from_polar(1.0, 2.0 * PI * xi[3] * l as f64 / n_blocks as f64);
        base.map(|x| beta * phase * x)
    };

    let mut f = Matrix4::<f64>::zeros();
    let mut partials: Vec<CVector> = Vec::with_capacity(4);
    for l in 1..=n_blocks {
        partials.clear();
        for i in 0..4 {
            let mut plus = xi0;
            let mut minus = xi0;
            plus[i] += STEP;
            minus[i] -= STEP;
            let (bp, bm) = if i == THETA { (&base[1], &base[2]) } else { (&base[0], &base[0]) };
            partials.push((mu(l, &plus, bp) - mu(l, &minus, bm)).unscale(2.0 * STEP));
        }
        for r in 0..4 {
            for c in 0..4 {
                f[(r, c)] += partials[r].dotc(&partials[c]).re;
            }
        }
    }
    f *= 2.0 / scenario.noise_power;
    f = (f + f.transpose()) * 0.5;
    Ok(FisherMatrix(f))
}

/// `tr(F⁻¹)`, the sum of the Cramér-Rao bounds of the four parameters.
pub fn crb_trace(f: &FisherMatrix) -> Result<f64> {
    let chol = f.spd_factor()?;
    // tr(F⁻¹) = ‖L⁻¹‖²_F for F = L·Lᵀ
    let l_inv = chol
        .l()
        .solve_lower_triangular(&Matrix4::identity())
        .ok_or_else(|| Error::NumericalFailure("triangular solve failed".into()))?;
    Ok(l_inv.norm_squared())
}

/// `F⁻²`, whose entries weight the linearized objective.
pub fn fim_weight_matrix(f: &FisherMatrix) -> Result<Matrix4<f64>> {
    let chol = f.spd_factor()?;
    let f_inv = chol.solve(&Matrix4::identity());
    let w = f_inv * f_inv;
    Ok((w + w.transpose()) * 0.5)
}

/// Hermitian matrices `M_ij` (upper triangle) with `F_ij = Re(pᴴ M_ij p)`.
///
/// They depend only on the scenario, so one instance serves every `p`.
#[derive(Debug, Clone)]
pub struct FimQuadraticForms {
    forms: Vec<CMatrix>,
    n_tx: usize,
}

fn upper_index(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    // rows of the upper triangle have lengths 4, 3, 2, 1
    i * 4 - i * (i.saturating_sub(1)) / 2 + (j - i)
}

impl FimQuadraticForms {
    pub fn new(scenario: &RadarScenario) -> Result<Self> {
        scenario.validate()?;
        let l = scenario.n_blocks;
        let beta = scenario.beta;
        let j = Complex64::new(0.0, 1.0);

        // ∂μ[l]/∂ξ_i = c_i(l)·B_i·p with B_θ = ∂A/∂θ and B = A otherwise.
        let coeff = |i: usize, blk: usize| -> Complex64 {
            let phase = Complex64::from_polar(1.0, 2.0 * PI * scenario.doppler_norm * blk as f64 / l as f64);
            match i {
                THETA => beta * phase,
                BETA_RE => phase,
                BETA_IM => j * phase,
                _ => j * 2.0 * PI * (blk as f64 / l as f64) * beta * phase,
            }
        };
        let mut w = [[Complex64::new(0.0, 0.0); 4]; 4];
        for blk in 1..=l {
            let c: Vec<Complex64> = (0..4).map(|i| coeff(i, blk)).collect();
            for r in 0..4 {
                for s in 0..4 {
                    w[r][s] += c[r].conj() * c[s];
                }
            }
        }

        let at = steering_tx(scenario.theta, scenario.n_tx)?;
        let ar = steering_rx(scenario.theta, scenario.n_rx)?;
        let dat = steering_tx_deriv(scenario.theta, scenario.n_tx)?;
        let dar = steering_rx_deriv(scenario.theta, scenario.n_rx)?;
        let a = &ar * at.adjoint();
        let da = &dar * at.adjoint() + &ar * dat.adjoint();
        let grams = [
            [da.adjoint() * &da, da.adjoint() * &a],
            [a.adjoint() * &da, a.adjoint() * &a],
        ];
        let which = |i: usize| usize::from(i != THETA);

        let inv_noise = 1.0 / scenario.noise_power;
        let mut forms = Vec::with_capacity(10);
        for r in 0..4 {
            for s in r..4 {
                let g_rs = &grams[which(r)][which(s)];
                let g_sr = &grams[which(s)][which(r)];
                let m = g_rs.map(|x| x * w[r][s]) + g_sr.map(|x| x * w[r][s].conj());
                forms.push(m.scale(inv_noise));
            }
        }
        Ok(Self { forms, n_tx: scenario.n_tx })
    }

    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    /// `M_ij`; the lower triangle aliases the upper one.
    pub fn form(&self, i: usize, j: usize) -> &CMatrix {
        &self.forms[upper_index(i, j)]
    }

    pub fn evaluate(&self, p: &CVector) -> FisherMatrix {
        let mut f = Matrix4::zeros();
        for r in 0..4 {
            for s in r..4 {
                let m = self.form(r, s);
                let v = p.dotc(&(m * p)).re;
                f[(r, s)] = v;
                f[(s, r)] = v;
            }
        }
        FisherMatrix(f)
    }

    /// `Σ_ij a_ij M_ji`, the Hermitian matrix of `p ↦ Σ_ij a_ij F_ji(p)`.
    pub fn weighted(&self, a: &Matrix4<f64>) -> CMatrix {
        let mut out = CMatrix::zeros(self.n_tx, self.n_tx);
        for r in 0..4 {
            for s in 0..4 {
                out += self.form(s, r).scale(a[(r, s)]);
            }
        }
        out
    }
}
