use std::f64::consts::PI;

use stokes_string::diagnostics::sobolev_norms;
use stokes_string::dynamics::*;
use stokes_string::geometry::{enclosed_area, normalize_initial_data, CurveState, ForceParams};
use stokes_string::spectral::{implicit_linear_step, LinearOperator, Resolvent, Spectral};
use stokes_string::Error;

/// Even-mode data: the curve keeps a point symmetry, so closure holds exactly.
fn state(sp: &Spectral, eps: f64) -> CurveState {
    let d: Vec<f64> = sp.points().iter().map(|a| eps * (2.0 * a).sin() + 0.5 * eps * (4.0 * a).cos()).collect();
    let ys: Vec<f64> = sp.points().iter().map(|a| eps * (2.0 * a).cos()).collect();
    normalize_initial_data(sp, &d, &ys, PI).unwrap()
}

fn config(n: usize, dt: f64, t_final: f64, scheme: Scheme) -> SimConfig {
    SimConfig { n, dt, t_final, scheme, output_every: 1, ..Default::default() }
}

fn distance(a: &CurveState, b: &CurveState) -> f64 {
    let d = a.d.iter().zip(&b.d).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let y = a.y_s.iter().zip(&b.y_s).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    d.max(y).max((a.s - b.s).abs()).max((a.theta_bar - b.theta_bar).abs())
}

#[test]
fn zero_forcing_reduces_to_the_linear_resolvent() {
    let n = 32;
    let sp = Spectral::new(n).unwrap();
    // A pure third mode keeps the curve exactly closed under damping.
    let st = CurveState {
        d: sp.points().iter().map(|a| 0.05 * (3.0 * a).sin()).collect(),
        y_s: sp.points().iter().map(|a| 0.05 * (2.0 * a).cos()).collect(),
        s: 1.2,
        ..CurveState::equilibrium(n)
    };
    let p = ForceParams::default();
    let mut ev = evaluate(&sp, &st, &p).unwrap();
    ev.rhs.g_theta.iter_mut().for_each(|v| *v = 0.0);
    ev.rhs.g_y.iter_mut().for_each(|v| *v = 0.0);
    ev.rhs.s_dot = 0.0;
    ev.rhs.mean_angle_dot = 0.0;
    ev.rhs.base_velocity = [0.0, 0.0];
    let dt = 0.01;
    let cfg = SimConfig { n, dt, dealias: false, ..Default::default() };
    let next = Stepper::new(&cfg).advance(&sp, &st, &ev).unwrap();
    let d = sp.inverse(&implicit_linear_step(&sp.forward(&st.d), dt, LinearOperator::bending(1.2), Resolvent::BackwardEuler).unwrap());
    let y = sp.inverse(&implicit_linear_step(&sp.forward(&st.y_s), dt, LinearOperator::stretching(), Resolvent::BackwardEuler).unwrap());
    for j in 0..n {
        assert!((next.d[j] - d[j]).abs() < 1e-15);
        assert!((next.y_s[j] - y[j]).abs() < 1e-15);
    }
    // Mode 3 of D shrinks by 1/(1 + dt·27/(4·1.2³)).
    let f = 1.0 / (1.0 + dt * 27.0 / (4.0 * 1.2f64.powi(3)));
    assert!((next.d[8] - f * st.d[8]).abs() < 1e-15);
    assert_eq!(next.s, 1.2);
    assert!((next.t - dt).abs() < 1e-15);
}

#[test]
fn equilibrium_is_a_fixed_point() {
    let sp = Spectral::new(32).unwrap();
    let eq = CurveState::equilibrium(32);
    let cfg = config(32, 1e-2, 0.2, Scheme::ImexBdf2);
    let out = run_simulation(&eq, &cfg).unwrap();
    assert_eq!(out.termination, Termination::Completed);
    assert!(distance(&out.final_state, &eq) < 1e-14);
    assert!((enclosed_area(&sp, &out.final_state) - PI).abs() < 1e-13);
}

fn convergence_ratios(scheme: Scheme) -> Vec<f64> {
    let n = 64;
    let sp = Spectral::new(n).unwrap();
    let init = state(&sp, 0.05);
    let t = 0.1;
    let reference = run_simulation(&init, &config(n, 1e-4, t, scheme)).unwrap().final_state;
    let errs: Vec<f64> = [0.01, 0.005, 0.0025]
        .iter()
        .map(|&dt| distance(&run_simulation(&init, &config(n, dt, t, scheme)).unwrap().final_state, &reference))
        .collect();
    errs.windows(2).map(|w| w[0] / w[1]).collect()
}

#[test]
fn euler_converges_at_first_order() {
    for r in convergence_ratios(Scheme::ImexEuler) {
        assert!((1.7..2.3).contains(&r), "ratio {r}");
    }
}

#[test]
fn bdf2_converges_at_second_order() {
    for r in convergence_ratios(Scheme::ImexBdf2) {
        assert!((3.3..4.7).contains(&r), "ratio {r}");
    }
}

#[test]
fn runs_are_deterministic() {
    let sp = Spectral::new(32).unwrap();
    let init = state(&sp, 0.1);
    let cfg = config(32, 1e-3, 0.05, Scheme::ImexBdf2);
    let a = run_simulation(&init, &cfg).unwrap();
    let b = run_simulation(&init, &cfg).unwrap();
    assert_eq!(a.final_state, b.final_state);
    assert_eq!(a.records.len(), b.records.len());
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!(x.energy.to_bits(), y.energy.to_bits());
    }
}

#[test]
fn perturbation_decays_and_area_is_kept() {
    let n = 64;
    let sp = Spectral::new(n).unwrap();
    let init = state(&sp, 0.05);
    let out = run_simulation(&init, &SimConfig { n, dt: 1e-3, t_final: 0.5, output_every: 50, ..Default::default() }).unwrap();
    assert_eq!(out.termination, Termination::Completed, "{:?} at t = {}", out.abort, out.final_state.t);
    let h0 = sobolev_norms(&sp, &init).h2_5;
    let h1 = sobolev_norms(&sp, &out.final_state).h2_5;
    assert!(h1 < 0.5 * h0, "{h0} -> {h1}");
    let drift = (enclosed_area(&sp, &out.final_state) - PI).abs();
    assert!(drift < 1e-4, "{drift}");
    assert_eq!(out.records.len(), 11);
    assert_eq!(out.snapshots.iter().map(|s| s.0).collect::<Vec<_>>(), vec![0, 500]);
    assert!(out.max_projected_means[0] < 1e-6 && out.max_projected_means[1] < 1e-6);
}

#[test]
fn rates_do_not_depend_on_mean_angle() {
    let sp = Spectral::new(64).unwrap();
    let st = state(&sp, 0.1);
    let mut rot = st.clone();
    rot.theta_bar += 1.3;
    let p = ForceParams { lambda: 0.2, ..Default::default() };
    let a = evaluate(&sp, &st, &p).unwrap();
    let b = evaluate(&sp, &rot, &p).unwrap();
    assert!((a.rhs.s_dot - b.rhs.s_dot).abs() < 1e-12);
    assert!((a.rhs.mean_angle_dot - b.rhs.mean_angle_dot).abs() < 1e-12);
    for j in 0..64 {
        assert!((a.rhs.g_theta[j] - b.rhs.g_theta[j]).abs() < 1e-10);
        assert!((a.rhs.g_y[j] - b.rhs.g_y[j]).abs() < 1e-10);
    }
}

#[test]
fn perimeter_shrinks_toward_the_circle() {
    let sp = Spectral::new(64).unwrap();
    let st = state(&sp, 0.1);
    assert!(st.s > 1.0);
    let ev = evaluate(&sp, &st, &ForceParams::default()).unwrap();
    assert!(ev.rhs.s_dot < 0.0);
}

#[test]
fn config_validation() {
    assert!(SimConfig::default().validate().is_ok());
    assert!(SimConfig { n: 7, ..Default::default() }.validate().is_err());
    assert!(SimConfig { dt: 0.0, ..Default::default() }.validate().is_err());
    assert!(SimConfig { t_final: -1.0, ..Default::default() }.validate().is_err());
    assert!(SimConfig { output_every: 0, ..Default::default() }.validate().is_err());
    assert_eq!(SimConfig { dt: 1e-3, t_final: 0.5, ..Default::default() }.steps(), 500);
    assert_eq!(Scheme::parse("imex-bdf2"), Some(Scheme::ImexBdf2));
    assert_eq!(Scheme::parse(Scheme::ImexEuler.name()), Some(Scheme::ImexEuler));
    assert_eq!(Scheme::parse("rk4"), None);
}

#[test]
fn setup_errors_are_returned() {
    let sp = Spectral::new(32).unwrap();
    let init = state(&sp, 0.1);
    assert!(matches!(run_simulation(&init, &config(64, 1e-3, 0.1, Scheme::ImexEuler)), Err(Error::InvalidArgument(_))));
    let strict = SimConfig {
        abort_margins: AbortMargins { beta2_min: 0.99, ..Default::default() },
        ..config(32, 1e-3, 0.1, Scheme::ImexEuler)
    };
    assert!(matches!(run_simulation(&init, &strict), Err(Error::WellStretched(_))));
}

#[test]
fn single_step_helper_matches_stepper() {
    let sp = Spectral::new(32).unwrap();
    let init = state(&sp, 0.1);
    let cfg = config(32, 1e-3, 1e-3, Scheme::ImexBdf2);
    let a = time_step(&sp, &init, &cfg).unwrap();
    let b = run_simulation(&init, &SimConfig { scheme: Scheme::ImexEuler, ..cfg }).unwrap().final_state;
    assert_eq!(a, b);
}
