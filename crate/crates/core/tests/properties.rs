use std::f64::consts::PI;

use proptest::prelude::*;
use stokes_string::cli::{emit_config, format_snapshot, parse_config_str, parse_snapshot};
use stokes_string::diagnostics::decay_fit;
use stokes_string::dynamics::{evaluate, Scheme, SimConfig};
use stokes_string::geometry::{closure_defect, enclosed_area, normalize_initial_data, CurveState, ForceParams};
use stokes_string::spectral::{resolvent_factor, LinearOperator, Resolvent, Spectral};

fn samples(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

/// Small smooth perturbation with modes 1..=6.
fn smooth(n: usize, amp: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 6).prop_map(move |c| {
        (0..n)
            .map(|j| {
                let a = -PI + j as f64 * 2.0 * PI / n as f64;
                c.iter().enumerate().map(|(i, (p, q))| {
                    let k = (i + 1) as f64;
                    amp / (k * k) * (p * (k * a).cos() + q * (k * a).sin())
                }).sum()
            })
            .collect()
    })
}

fn state(n: usize) -> impl Strategy<Value = CurveState> {
    (smooth(n, 0.05), smooth(n, 0.05)).prop_map(move |(d, y)| {
        let sp = Spectral::new(n).unwrap();
        normalize_initial_data(&sp, &d, &y, PI).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_round_trip(f in samples(64)) {
        let sp = Spectral::new(64).unwrap();
        let back = sp.inverse(&sp.forward(&f));
        for (a, b) in f.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-13);
        }
    }

    #[test]
    fn real_fields_have_conjugate_symmetric_modes(f in samples(32)) {
        let sp = Spectral::new(32).unwrap();
        let c = sp.forward(&f);
        for j in 1..32 {
            prop_assert!((c[j] - c[32 - j].conj()).norm() < 1e-14);
        }
        prop_assert!(c[0].im.abs() < 1e-15 && c[16].im.abs() < 1e-14);
    }

    #[test]
    fn hilbert_squared_is_minus_identity_on_oscillations(f in samples(32)) {
        let sp = Spectral::new(32).unwrap();
        let hh = sp.hilbert(&sp.hilbert(&f));
        let c = sp.forward(&f);
        let nyq = c[16].re;
        for (j, (a, b)) in f.iter().zip(&hh).enumerate() {
            // e^{i16α_j} = (−1)^j on this grid.
            let nyq_j = if j % 2 == 0 { nyq } else { -nyq };
            prop_assert!((b + (a - c[0].re - nyq_j)).abs() < 1e-13);
        }
    }

    #[test]
    fn resolvent_is_a_contraction(k in -200i64..200, dt in 1e-6f64..1.0, s in 0.2f64..5.0) {
        for op in [LinearOperator::bending(s), LinearOperator::stretching()] {
            for kind in [Resolvent::BackwardEuler, Resolvent::Bdf2] {
                let f = resolvent_factor(op, k, dt, kind);
                prop_assert!(f > 0.0 && f <= 1.0);
            }
        }
    }

    #[test]
    fn decay_fit_recovers_any_rate(gamma in -3.0f64..3.0, c in -5.0f64..5.0) {
        let series: Vec<(f64, f64)> = (0..20).map(|i| {
            let t = i as f64 * 0.25;
            (t, (c - gamma * t).exp())
        }).collect();
        let f = decay_fit(&series, 0..20).unwrap();
        prop_assert!((f.gamma - gamma).abs() < 1e-10);
        prop_assert!(f.r2 > 1.0 - 1e-10);
    }

    #[test]
    fn config_round_trip(n in 2usize..200, dt in 1e-6f64..1.0, eps in 0.0f64..0.5, seed: u64, bdf: bool, lambda in 0.0f64..3.0) {
        let c = SimConfig {
            n: 2 * n,
            dt,
            epsilon: eps,
            seed,
            scheme: if bdf { Scheme::ImexBdf2 } else { Scheme::ImexEuler },
            params: ForceParams { lambda, ..Default::default() },
            ..Default::default()
        };
        prop_assert_eq!(parse_config_str(&emit_config(&c)).unwrap(), c);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn normalization_invariants(st in state(64)) {
        let sp = Spectral::new(64).unwrap();
        prop_assert!(closure_defect(&sp, &st) <= 1e-13);
        prop_assert!((enclosed_area(&sp, &st) - PI).abs() <= 1e-12);
        prop_assert!(st.d.iter().sum::<f64>().abs() < 1e-12);
        prop_assert!(st.y_s.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn snapshot_round_trip(st in state(32), t in 0.0f64..10.0, b0 in -5.0f64..5.0, b1 in -5.0f64..5.0) {
        let st = CurveState { t, base: [b0, b1], ..st };
        prop_assert_eq!(parse_snapshot(&format_snapshot(&st)).unwrap(), st);
    }

    #[test]
    fn mean_angle_and_base_do_not_change_shape_rates(st in state(32), c in -PI..PI, b0 in -3.0f64..3.0) {
        let sp = Spectral::new(32).unwrap();
        let moved = CurveState { theta_bar: st.theta_bar + c, base: [b0, -b0], ..st.clone() };
        prop_assert!((closure_defect(&sp, &st) - closure_defect(&sp, &moved)).abs() < 1e-14);
        prop_assert!((enclosed_area(&sp, &st) - enclosed_area(&sp, &moved)).abs() < 1e-12);
        let p = ForceParams::default();
        let a = evaluate(&sp, &st, &p).unwrap();
        let b = evaluate(&sp, &moved, &p).unwrap();
        for j in 0..32 {
            prop_assert!((a.velocity.normal[j] - b.velocity.normal[j]).abs() < 1e-10);
            prop_assert!((a.velocity.tangential[j] - b.velocity.tangential[j]).abs() < 1e-10);
        }
        prop_assert!((a.rhs.s_dot - b.rhs.s_dot).abs() < 1e-12);
    }

    #[test]
    fn dissipation_is_nonnegative_and_force_balances(st in state(32)) {
        let sp = Spectral::new(32).unwrap();
        let ev = evaluate(&sp, &st, &ForceParams::default()).unwrap();
        prop_assert!(stokes_string::diagnostics::dissipation_rate(&ev) >= -1e-14);
        let net = ev.force.net();
        prop_assert!(net[0].abs() < 1e-10 && net[1].abs() < 1e-10);
    }
}
