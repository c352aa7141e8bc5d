//! Closed-form dual and primal updates of one proximal subproblem.

use nalgebra::{Cholesky, Dyn, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lpm::theta::ThetaMatrix;
use crate::scenario::{Beamformer, CMatrix, CVector};

/// Factor between the real-imaginary-stacked gradient of
/// `p ↦ Σ_ij a_ij F_ji(p)` and `(1/σ²)·Θ·p`.
///
/// Differentiating every term of the subproblem Lagrangian under the same
/// real-stacked convention turns the Θ term of `Q` into `(2/σ²)·Θ`, so the
/// solver hands `GRADIENT_SCALE · Θ` to [`q_matrix`]. The value is pinned by
/// the finite-difference gradient oracle.
pub const GRADIENT_SCALE: f64 = 2.0;

/// `Q = −(1/σ²)·Θ + (2λ + ρ)·I` with its Cholesky factor.
#[derive(Debug, Clone)]
pub struct QMatrix {
    matrix: CMatrix,
    factor: Cholesky<Complex64, Dyn>,
}

impl QMatrix {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `Q⁻¹·v` via the Hermitian positive-definite factor.
    pub fn solve(&self, v: &CVector) -> CVector {
        self.factor.solve(v)
    }
}

pub fn min_hermitian_eigenvalue(m: &CMatrix) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

pub fn q_matrix(theta: &ThetaMatrix, lambda_k: f64, rho: f64, noise_power: f64) -> Result<QMatrix> {
    let t = theta.entries();
    if !t.is_square() {
        return Err(Error::InvalidParameter("theta must be square".into()));
    }
    let n = t.nrows();
    let shift = Complex64::new(2.0 * lambda_k + rho, 0.0);
    let mut q = t.map(|x| -x / noise_power);
    for i in 0..n {
        q[(i, i)] += shift;
    }
    // keep the diagonal exactly real
    for i in 0..n {
        q[(i, i)].im = 0.0;
    }
    // The complex factorization takes square roots of complex pivots, so a
    // negative pivot yields an imaginary diagonal entry instead of a failure.
    let factor = Cholesky::new(q.clone()).filter(|f| {
        f.l_dirty().diagonal().iter().all(|l| l.re > 0.0 && l.im.abs() <= 1e-8 * l.re)
    });
    match factor {
        Some(factor) => Ok(QMatrix { matrix: q, factor }),
        None => Err(Error::PenaltyTooSmall { min_eigenvalue: min_hermitian_eigenvalue(&q), rho }),
    }
}

/// `λ* = ρ/2 − (P_t + p_kᴴp_k) / (4·p_kᴴ Q⁻¹ p_k)`.
pub fn lambda_update(p_k: &Beamformer, q: &QMatrix, rho: f64, power_budget: f64) -> Result<f64> {
    if p_k.is_zero() {
        return Err(Error::DegenerateInput("zero iterate"));
    }
    let x = q.solve(&p_k.weights);
    let quad = p_k.weights.dotc(&x).re;
    if !(quad > 0.0 && quad.is_finite()) {
        return Err(Error::NumericalFailure(format!("p^H Q^-1 p = {quad:e} is not positive")));
    }
    let lambda = rho / 2.0 - (power_budget + p_k.power()) / (4.0 * quad);
    if !lambda.is_finite() {
        return Err(Error::NumericalFailure("dual update is not finite".into()));
    }
    Ok(lambda)
}

/// `p* = (ρ − 2λ^{k+1})·Q⁻¹·p_k`.
pub fn p_update(p_k: &Beamformer, q: &QMatrix, lambda_next: f64, rho: f64) -> Result<Beamformer> {
    let x = q.solve(&p_k.weights);
    let p = x.scale(rho - 2.0 * lambda_next);
    if p.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::NumericalFailure("primal update is not finite".into()));
    }
    Ok(Beamformer { weights: p, power_budget: p_k.power_budget })
}

/// `‖p_k‖² + 2·Re{p_kᴴ(p_next − p_k)}`, the linearized transmit power.
pub fn linearized_power(p_k: &CVector, p_next: &CVector) -> f64 {
    p_k.norm_squared() + 2.0 * p_k.dotc(&(p_next - p_k)).re
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn identity_theta(n: usize, scale: f64) -> ThetaMatrix {
        ThetaMatrix::from_matrix(CMatrix::identity(n, n).scale(scale))
    }

    fn beamformer(budget: f64, power: f64) -> Beamformer {
        let w = CVector::from_vec(vec![c(0.3, -0.2), c(0.1, 0.5), c(-0.4, 0.0)]);
        let w = w.scale((power / w.norm_squared()).sqrt());
        Beamformer::new(w, budget).unwrap()
    }

    #[test]
    fn q_from_zero_theta() {
        let q = q_matrix(&ThetaMatrix::from_matrix(CMatrix::zeros(3, 3)), 1.0, 5.0, 1e-3).unwrap();
        assert_eq!(q.matrix(), &CMatrix::identity(3, 3).scale(7.0));
    }

    #[test]
    fn q_from_noise_scaled_identity() {
        let noise = 1e-3;
        let q = q_matrix(&identity_theta(4, noise), 0.0, 2.0, noise).unwrap();
        assert!((q.matrix() - CMatrix::identity(4, 4)).norm() < 1e-15);
    }

    #[test]
    fn q_not_positive_definite_reports_eigenvalue() {
        match q_matrix(&identity_theta(3, 10.0), 0.0, 5.0, 1.0) {
            Err(Error::PenaltyTooSmall { min_eigenvalue, rho }) => {
                assert!((min_eigenvalue + 5.0).abs() < 1e-12);
                assert_eq!(rho, 5.0);
            }
            other => panic!("expected penalty error, got {other:?}"),
        }
    }

    #[test]
    fn lambda_with_identity_q() {
        let rho = 5.0;
        let q = q_matrix(&ThetaMatrix::from_matrix(CMatrix::zeros(3, 3)), -2.0, rho, 1.0).unwrap(); // Q = I
        let p = beamformer(2.0, 2.0);
        let lambda = lambda_update(&p, &q, rho, 2.0).unwrap();
        assert!((lambda - (rho / 2.0 - 0.5)).abs() < 1e-14);
    }

    #[test]
    fn lambda_with_doubled_q() {
        let rho = 5.0;
        let q = q_matrix(&ThetaMatrix::from_matrix(CMatrix::zeros(3, 3)), -1.5, rho, 1.0).unwrap(); // Q = 2I
        let p = beamformer(2.0, 2.0);
        let lambda = lambda_update(&p, &q, rho, 2.0).unwrap();
        assert!((lambda - (rho / 2.0 - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn fixed_point_on_the_sphere() {
        let rho = 5.0;
        let q = q_matrix(&ThetaMatrix::from_matrix(CMatrix::zeros(3, 3)), -2.0, rho, 1.0).unwrap();
        let p = beamformer(2.0, 2.0);
        let lambda = lambda_update(&p, &q, rho, 2.0).unwrap();
        let next = p_update(&p, &q, lambda, rho).unwrap();
        assert!((&next.weights - &p.weights).norm() < 1e-14);
    }

    #[test]
    fn half_power_iterate_is_scaled_by_one_and_a_half() {
        let rho = 5.0;
        let q = q_matrix(&ThetaMatrix::from_matrix(CMatrix::zeros(3, 3)), -2.0, rho, 1.0).unwrap();
        let p = beamformer(2.0, 1.0);
        let lambda = lambda_update(&p, &q, rho, 2.0).unwrap();
        let next = p_update(&p, &q, lambda, rho).unwrap();
        assert!((&next.weights - p.weights.scale(1.5)).norm() < 1e-14);
        assert!((linearized_power(&p.weights, &next.weights) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn linearized_constraint_is_exact_for_general_q() {
        let theta = CMatrix::from_fn(3, 3, |i, j| c((i + j) as f64 * 0.1, i as f64 - j as f64));
        let theta = ThetaMatrix::from_matrix((&theta + theta.adjoint()).scale(0.5));
        let rho = 40.0;
        let q = q_matrix(&theta, 0.3, rho, 1.0).unwrap();
        let p = beamformer(1.7, 0.9);
        let lambda = lambda_update(&p, &q, rho, 1.7).unwrap();
        let next = p_update(&p, &q, lambda, rho).unwrap();
        let lin = linearized_power(&p.weights, &next.weights);
        assert!((lin - 1.7).abs() <= 1e-9 * 1.7);
        // stationarity: Q p* + 2λ p_k − ρ p_k = 0
        let residual = q.matrix() * &next.weights + p.weights.scale(2.0 * lambda - rho);
        assert!(residual.norm() <= 1e-8 * q.matrix().norm() * next.weights.norm());
    }
}
