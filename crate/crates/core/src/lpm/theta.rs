//! The Hermitian matrix `Θ` of the proximal subproblem's stationarity
//! condition.
//!
//! For a symmetric weight matrix `a` (the entries of `(F^k)⁻²`),
//! `(1/σ²)·pᴴΘp = Σ_ij a_ij F_ji(p)`, with
//! `Θ = b·ȦᴴȦ + c·AᴴȦ + d·ȦᴴA + e·AᴴA` where `Ȧ = ∂A/∂θ`.

use std::f64::consts::PI;

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::Result;
use crate::scenario::{channel_matrix, channel_matrix_deriv, CMatrix, RadarScenario};

/// Scalar coefficients of the four Gram terms of `Θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaCoefficients {
    pub b: f64,
    pub c: Complex64,
    pub d: Complex64,
    pub e: f64,
}

impl ThetaCoefficients {
    pub fn new(scenario: &RadarScenario, a: &Matrix4<f64>) -> Self {
        // 1-based accessor so the expressions read like the coefficient table
        let w = |i: usize, j: usize| a[(i - 1, j - 1)];
        let l = scenario.n_blocks as f64;
        let beta = scenario.beta;
        let beta_c = beta.conj();
        let beta2 = beta.norm_sqr();
        let j = Complex64::new(0.0, 1.0);
        let dop = PI * (l + 1.0) * beta2;

        let b = 2.0 * l * beta2 * w(1, 1);
        let c = l * beta * w(2, 1) - l * beta * w(3, 1) * j - dop * w(4, 1) * j + l * beta * w(1, 2)
            - l * beta * w(1, 3) * j
            - dop * w(1, 4) * j;
        let d = l * beta_c * w(2, 1) + l * beta_c * w(3, 1) * j + dop * w(4, 1) * j + l * beta_c * w(1, 2)
            + l * beta_c * w(1, 3) * j
            + dop * w(1, 4) * j;
        let e = 2.0 * l * w(2, 2)
            + PI * (l + 1.0) * (beta - beta_c) * w(4, 2) * j
            + PI * (l + 1.0) * (beta + beta_c) * w(4, 3)
            + PI * (l + 1.0) * (beta - beta_c) * w(2, 4) * j
            + PI * (l + 1.0) * (beta + beta_c) * w(3, 4)
            + 2.0 * l * w(3, 3)
            + (4.0 * PI * PI / l) * (l + 1.0) * (2.0 * l + 1.0) / 3.0 * beta2 * w(4, 4);
        // e is real for any β: (β − β*)·j and β + β* are both real
        Self { b, c, d, e: e.re }
    }
}

/// Gram matrices `ȦᴴȦ`, `AᴴȦ` and `AᴴA`, fixed for a given scenario.
#[derive(Debug, Clone)]
pub struct ChannelGrams {
    pub deriv_deriv: CMatrix,
    pub chan_deriv: CMatrix,
    pub chan_chan: CMatrix,
}

impl ChannelGrams {
    pub fn new(scenario: &RadarScenario) -> Result<Self> {
        let a = channel_matrix(scenario)?;
        let da = channel_matrix_deriv(scenario)?;
        Ok(Self {
            deriv_deriv: da.adjoint() * &da,
            chan_deriv: a.adjoint() * &da,
            chan_chan: a.adjoint() * &a,
        })
    }
}

/// Hermitian `N_t × N_t` matrix `Θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaMatrix(CMatrix);

impl ThetaMatrix {
    pub fn from_coefficients(grams: &ChannelGrams, k: &ThetaCoefficients) -> Self {
        let mut m = grams.deriv_deriv.scale(k.b);
        m += grams.chan_deriv.map(|x| x * k.c);
        m += grams.chan_deriv.adjoint().map(|x| x * k.d);
        m += grams.chan_chan.scale(k.e);
        Self(m)
    }

    pub fn from_matrix(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn entries(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.scale(factor))
    }
}

/// `Θ` for the weights `a` (normally `fim_weight_matrix` of the current FIM).
pub fn theta_matrix(scenario: &RadarScenario, a: &Matrix4<f64>) -> Result<ThetaMatrix> {
    let grams = ChannelGrams::new(scenario)?;
    Ok(ThetaMatrix::from_coefficients(&grams, &ThetaCoefficients::new(scenario, a)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fim::{build_fim, FimQuadraticForms};
    use crate::scenario::{Beamformer, CVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(rng: &mut impl Rng) -> Matrix4<f64> {
        let m = Matrix4::from_fn(|_, _| rng.random_range(-1.0..1.0));
        m + m.transpose()
    }

    fn small_scenario() -> RadarScenario {
        let mut s = RadarScenario::reference(2);
        s.n_rx = 2;
        s.n_blocks = 4;
        s
    }

    #[test]
    fn zero_weights_give_zero_theta() {
        let s = small_scenario();
        let t = theta_matrix(&s, &Matrix4::zeros()).unwrap();
        assert!(t.entries().iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn real_beta_diagonal_weights_reduce_c_and_d() {
        // β real and a diagonal: only the a_11, a_22, a_33, a_44 terms survive,
        // so c and d vanish and b, e reduce to their diagonal parts.
        let mut s = small_scenario();
        s.beta = Complex64::new(0.7, 0.0);
        let a = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 2.0, 3.0, 4.0));
        let k = ThetaCoefficients::new(&s, &a);
        let l = s.n_blocks as f64;
        assert_eq!(k.c, Complex64::new(0.0, 0.0));
        assert_eq!(k.d, Complex64::new(0.0, 0.0));
        assert!((k.b - 2.0 * l * 0.49).abs() < 1e-14);
        let e = 2.0 * l * 2.0 + 2.0 * l * 3.0 + 4.0 * PI * PI / l * (l + 1.0) * (2.0 * l + 1.0) / 3.0 * 0.49 * 4.0;
        assert!((k.e - e).abs() < 1e-10 * e);
    }

    #[test]
    fn real_beta_doppler_coupling_is_imaginary() {
        // with β real and only a_41 = a_14 = 1: c = −2π(L+1)|β|² j, d = conj(c)
        let mut s = small_scenario();
        s.beta = Complex64::new(1.3, 0.0);
        let mut a = Matrix4::zeros();
        a[(3, 0)] = 1.0;
        a[(0, 3)] = 1.0;
        let k = ThetaCoefficients::new(&s, &a);
        let l = s.n_blocks as f64;
        let expected = Complex64::new(0.0, -2.0 * PI * (l + 1.0) * 1.69);
        assert!((k.c - expected).norm() < 1e-12);
        assert_eq!(k.d, k.c.conj());
    }

    #[test]
    fn theta_is_hermitian_and_d_is_conj_c() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut s = RadarScenario::reference(6);
        s.beta = Complex64::new(0.4, -1.1);
        for _ in 0..10 {
            let a = random_symmetric(&mut rng);
            let k = ThetaCoefficients::new(&s, &a);
            assert!((k.d - k.c.conj()).norm() <= 1e-12 * k.c.norm().max(1.0));
            let t = theta_matrix(&s, &a).unwrap();
            let m = t.entries();
            assert!((m - m.adjoint()).norm() <= 1e-9 * m.norm());
        }
    }

    #[test]
    fn quadratic_form_of_theta_equals_weighted_fim() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut s = small_scenario();
        s.beta = Complex64::new(-0.3, 0.9);
        let forms = FimQuadraticForms::new(&s).unwrap();
        for _ in 0..10 {
            let a = random_symmetric(&mut rng);
            let p = CVector::from_fn(2, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let f = build_fim(&s, &Beamformer::new(p.clone(), 1.0).unwrap()).unwrap();
            let weighted: f64 = (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).map(|(i, j)| a[(i, j)] * f.entries()[(j, i)]).sum();
            let t = theta_matrix(&s, &a).unwrap();
            let quad = p.dotc(&(t.entries() * &p)).re / s.noise_power;
            assert!((quad - weighted).abs() <= 1e-10 * weighted.abs().max(1e-300), "{quad} vs {weighted}");
            let via_forms = p.dotc(&(forms.weighted(&a) * &p)).re;
            assert!((via_forms - weighted).abs() <= 1e-9 * weighted.abs());
        }
    }
}
