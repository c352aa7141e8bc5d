use num_complex::Complex64;
use proptest::prelude::*;

use crbopt::baseline::{pgd_solve, PgdConfig};
use crbopt::fim::{build_fim, crb_trace, FimQuadraticForms, BETA_IM, BETA_RE};
use crbopt::lpm::{initialize, linearized_power, lpm_step, ChannelGrams};
use crbopt::scenario::{steering_rx, steering_tx, Beamformer, CVector, RadarScenario};

fn scenario() -> impl Strategy<Value = RadarScenario> {
    (1usize..=6, 1usize..=9, 1usize..=64, -1.4f64..1.4, -2.0f64..2.0, -2.0f64..2.0, -20.0f64..20.0).prop_map(
        |(n_tx, n_rx, n_blocks, theta, br, bi, nu)| RadarScenario {
            n_tx,
            n_rx,
            n_blocks,
            theta,
            beta: Complex64::new(br, bi),
            doppler_norm: nu,
            noise_power: 1e-3,
            power_budget: 1e-2,
        },
    )
}

/// Scenario plus beamformer in the regime where the FIM is invertible.
fn regular_case() -> impl Strategy<Value = (RadarScenario, CVector)> {
    (scenario(), 2usize..=6, 2usize..=9, 0.2f64..2.0)
        .prop_flat_map(|(s, n_tx, n_rx, beta_mag)| {
            let s = RadarScenario { n_tx, n_rx, beta: s.beta / s.beta.norm().max(1e-3) * beta_mag, ..s };
            (Just(s), prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n_tx))
        })
        .prop_map(|(s, w)| {
            let p = CVector::from_iterator(w.len(), w.into_iter().map(|(a, b)| Complex64::new(a, b)));
            (s, p)
        })
        .prop_filter("beamformer must not vanish", |(_, p)| p.norm() > 1e-2)
}

fn bf(p: &CVector, budget: f64) -> Beamformer {
    Beamformer::new(p.clone(), budget).unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn steering_elements_have_unit_modulus(theta in -1.5f64..1.5, n in 1usize..40) {
        for v in steering_tx(theta, n).unwrap().iter().chain(steering_rx(theta, n).unwrap().iter()) {
            prop_assert!((v.norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn fim_scales_with_power((s, p) in regular_case(), alpha in 0.1f64..10.0) {
        let f = build_fim(&s, &bf(&p, s.power_budget)).unwrap();
        let g = build_fim(&s, &bf(&p.scale(alpha), s.power_budget)).unwrap();
        for (a, b) in f.entries().iter().zip(g.entries().iter()) {
            prop_assert!((alpha * alpha * a - b).abs() <= 1e-9 * b.abs().max(f.entries().abs().max() * alpha * alpha));
        }
    }

    #[test]
    fn fim_ignores_global_phase((s, p) in regular_case(), phi in 0.0f64..6.3) {
        let f = build_fim(&s, &bf(&p, s.power_budget)).unwrap();
        let g = build_fim(&s, &bf(&p, s.power_budget).phase_rotated(phi)).unwrap();
        let scale = f.entries().abs().max();
        prop_assert!((f.entries() - g.entries()).abs().max() <= 1e-9 * scale);
    }

    #[test]
    fn fim_ignores_doppler((s, p) in regular_case(), nu in -100.0f64..100.0) {
        let other = RadarScenario { doppler_norm: nu, ..s.clone() };
        let f = build_fim(&s, &bf(&p, s.power_budget)).unwrap();
        let g = build_fim(&other, &bf(&p, s.power_budget)).unwrap();
        prop_assert!((f.entries() - g.entries()).abs().max() <= 1e-9 * f.entries().abs().max());
    }

    #[test]
    fn fim_is_symmetric_with_no_beta_cross_term((s, p) in regular_case()) {
        let f = build_fim(&s, &bf(&p, s.power_budget)).unwrap();
        let m = f.entries();
        prop_assert!((m - m.transpose()).abs().max() <= 1e-9 * m.abs().max().max(1.0));
        prop_assert_eq!(m[(BETA_RE, BETA_IM)], 0.0);
    }

    #[test]
    fn quadratic_forms_reassemble_fim((s, p) in regular_case()) {
        let forms = FimQuadraticForms::new(&s).unwrap();
        let f = build_fim(&s, &bf(&p, s.power_budget)).unwrap();
        let g = forms.evaluate(&p);
        prop_assert!((f.entries() - g.entries()).abs().max() <= 1e-9 * f.entries().abs().max());
        for i in 0..4 {
            for j in 0..4 {
                let m = forms.form(i, j);
                prop_assert!((m - m.adjoint()).norm() <= 1e-12 * m.norm().max(1.0));
            }
        }
    }

    /// Rotating β by 90° swaps the roles of its real and imaginary parts,
    /// which is an orthogonal change of parameters, so tr(F⁻¹) is unchanged.
    #[test]
    fn crb_invariant_under_quarter_turn_of_beta((s, p) in regular_case()) {
        let rotated = RadarScenario { beta: s.beta * Complex64::new(0.0, 1.0), ..s.clone() };
        let f = build_fim(&s, &bf(&p, s.power_budget)).unwrap();
        let g = build_fim(&rotated, &bf(&p, s.power_budget)).unwrap();
        let (a, b) = (f.entries(), g.entries());
        let scale = a.abs().max();
        // signed swap of the β_Re and β_Im coordinates
        let swap = |i: usize| match i { BETA_RE => (BETA_IM, -1.0), BETA_IM => (BETA_RE, 1.0), k => (k, 1.0) };
        for i in 0..4 {
            for j in 0..4 {
                let ((pi, si), (pj, sj)) = (swap(i), swap(j));
                prop_assert!((b[(i, j)] - si * sj * a[(pi, pj)]).abs() <= 1e-9 * scale);
            }
        }
        if let (Ok(x), Ok(y)) = (crb_trace(&f), crb_trace(&g)) {
            prop_assert!(close(x, y, 1e-7), "{} vs {}", x, y);
        }
    }

    #[test]
    fn lpm_step_is_exact_on_the_linearized_constraint((s, p) in regular_case(), power in 0.3f64..1.5, rho_scale in 2.0f64..50.0) {
        let p = p.scale((power * s.power_budget).sqrt() / p.norm());
        let pk = bf(&p, s.power_budget);
        let Ok(f) = build_fim(&s, &pk) else { return Ok(()) };
        let Ok(obj) = crb_trace(&f) else { return Ok(()) };
        let grams = ChannelGrams::new(&s).unwrap();
        let rho = rho_scale * obj / s.power_budget;
        match lpm_step(&s, &grams, &pk, &f, 0.0, rho) {
            Ok((_, next)) => {
                let lin = linearized_power(&pk.weights, &next.weights);
                prop_assert!(close(lin, s.power_budget, 1e-9), "{} vs {}", lin, s.power_budget);
            }
            // an indefinite Q is a legitimate outcome at small penalties
            Err(crbopt::Error::PenaltyTooSmall { .. }) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn pgd_stays_on_sphere_and_descends(n_tx in 2usize..8, theta in -1.2f64..1.2) {
        let s = RadarScenario { theta, ..RadarScenario::reference(n_tx) };
        let config = PgdConfig { max_iters: 50, ..Default::default() };
        let (p, trace) = pgd_solve(&s, &config, &initialize(&s).unwrap()).unwrap();
        prop_assert!((p.power() - s.power_budget).abs() <= 1e-12 * s.power_budget);
        let mut prev = trace.initial_objective;
        for r in &trace.records {
            prop_assert!(r.constraint_residual <= 1e-12);
            prop_assert!(r.objective < prev);
            prev = r.objective;
        }
    }
}
