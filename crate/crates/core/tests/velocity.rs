use std::f64::consts::PI;

use stokes_string::geometry::{normalize_initial_data, CurveState, ForceParams, Frame};
use stokes_string::spectral::Spectral;
use stokes_string::velocity::*;

fn wavy(sp: &Spectral, eps: f64) -> CurveState {
    let d: Vec<f64> = sp.points().iter().map(|a| eps * ((2.0 * a).sin() + 0.5 * (3.0 * a).cos())).collect();
    let ys: Vec<f64> = sp.points().iter().map(|a| eps * (a.cos() - 0.4 * (2.0 * a).sin())).collect();
    normalize_initial_data(sp, &d, &ys, PI).unwrap()
}

fn max_gap(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x[0] - y[0]).abs().max((x[1] - y[1]).abs())).fold(0.0, f64::max)
}

fn max_gap1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn circle_feels_uniform_pressure_and_stays_put() {
    let sp = Spectral::new(64).unwrap();
    let frame = Frame::build(&sp, &CurveState::equilibrium(64)).unwrap();
    let force = force_density(&frame, &ForceParams::default());
    for (f, n) in force.total_alpha.iter().zip(&frame.curve.n_alpha) {
        assert!((f[0] - 0.5 * n[0]).abs() < 1e-14 && (f[1] - 0.5 * n[1]).abs() < 1e-14);
    }
    let net = force.net();
    assert!(net[0].abs() < 1e-14 && net[1].abs() < 1e-14);
    let vel = curve_velocity(&sp, &frame, &force).unwrap();
    assert!(vel.u_alpha.iter().all(|u| u[0].abs() < 1e-14 && u[1].abs() < 1e-14));
    assert!(power(&force, &vel).abs() < 1e-14);
}

#[test]
fn tension_only_circle_has_inward_force() {
    let sp = Spectral::new(32).unwrap();
    let frame = Frame::build(&sp, &CurveState::equilibrium(32)).unwrap();
    let p = ForceParams { c1: 0.0, c3: 0.0, lambda: 2.0, ..Default::default() };
    let force = force_density(&frame, &p);
    for (f, n) in force.total_alpha.iter().zip(&frame.curve.n_alpha) {
        assert!((f[0] - 2.0 * n[0]).abs() < 1e-14 && (f[1] - 2.0 * n[1]).abs() < 1e-14);
    }
}

#[test]
fn potential_differentiates_to_force() {
    let sp = Spectral::new(128).unwrap();
    let st = wavy(&sp, 0.1);
    let frame = Frame::build(&sp, &st).unwrap();
    let p = ForceParams { lambda: 0.3, b: 0.2, s_op: 0.5, ..Default::default() };
    let force = force_density(&frame, &p);
    for c in 0..2 {
        let a: Vec<f64> = force.potential.iter().map(|v| v[c]).collect();
        let f: Vec<f64> = force.total_alpha.iter().map(|v| v[c]).collect();
        assert!(max_gap1(&sp.derivative(&a, 1), &f) < 1e-9);
    }
    let net = force.net();
    assert!(net[0].abs() < 1e-10 && net[1].abs() < 1e-10);
}

#[test]
fn hilbert_form_agrees_with_single_layer() {
    let sp = Spectral::new(128).unwrap();
    let st = wavy(&sp, 0.1);
    let frame = Frame::build(&sp, &st).unwrap();
    let force = force_density(&frame, &ForceParams::default());
    let u = velocity_alpha(&sp, &frame, &force).unwrap();
    let v = velocity_single_layer(&sp, &frame, &force);
    let scale = u.iter().fold(0.0f64, |m, w| m.max(w[0].abs()).max(w[1].abs()));
    assert!(scale > 1e-3);
    assert!(max_gap(&u, &v) < 1e-10, "{}", max_gap(&u, &v));
}

#[test]
fn material_evaluation_agrees_with_interpolation() {
    let sp = Spectral::new(128).unwrap();
    let st = wavy(&sp, 0.1);
    let frame = Frame::build(&sp, &st).unwrap();
    let force = force_density(&frame, &ForceParams::default());
    let vel = curve_velocity(&sp, &frame, &force).unwrap();
    let direct = velocity_material(&sp, &frame, &force).unwrap();
    assert!(max_gap(&vel.u_s, &direct) < 1e-10);
}

#[test]
fn normal_derivative_terms_sum_to_derivative_of_velocity() {
    let sp = Spectral::new(128).unwrap();
    let st = wavy(&sp, 0.1);
    let frame = Frame::build(&sp, &st).unwrap();
    let p = ForceParams { lambda: 0.5, ..Default::default() };
    let force = force_density(&frame, &p);
    let vel = curve_velocity(&sp, &frame, &force).unwrap();
    let (u0, u1): (Vec<f64>, Vec<f64>) = vel.u_alpha.iter().map(|u| (u[0], u[1])).unzip();
    let (d0, d1) = (sp.derivative(&u0, 1), sp.derivative(&u1, 1));
    let spectral: Vec<f64> = (0..128).map(|j| d0[j] * frame.curve.n_alpha[j][0] + d1[j] * frame.curve.n_alpha[j][1]).collect();
    let terms = normal_derivative_terms(&sp, &frame, &force, &p).unwrap();
    assert!(max_gap1(&terms.total(), &spectral) < 1e-8, "{}", max_gap1(&terms.total(), &spectral));
    let low = terms.lower_order();
    assert!(max_gap1(&low.iter().zip(&terms.principal).map(|(a, b)| a + b).collect::<Vec<_>>(), &terms.total()) < 1e-14);

    let (s0, s1): (Vec<f64>, Vec<f64>) = vel.u_s.iter().map(|u| (u[0], u[1])).unzip();
    let (e0, e1) = (sp.derivative(&s0, 1), sp.derivative(&s1, 1));
    let along: Vec<f64> = (0..128).map(|j| e0[j] * frame.curve.t_s[j][0] + e1[j] * frame.curve.t_s[j][1]).collect();
    let tang = tangential_derivative_terms(&sp, &frame, &force, &p).unwrap();
    assert!(max_gap1(&tang.total(), &along) < 1e-8, "{}", max_gap1(&tang.total(), &along));
}

#[test]
fn transport_velocity_solves_its_ode() {
    // ∂_α 𝒯 = θ_α U up to the mean, anchored at the material origin.
    let sp = Spectral::new(64).unwrap();
    let st = wavy(&sp, 0.15);
    let frame = Frame::build(&sp, &st).unwrap();
    let force = force_density(&frame, &ForceParams::default());
    let vel = curve_velocity(&sp, &frame, &force).unwrap();
    let dt = sp.derivative(&vel.transport, 1);
    let flux: Vec<f64> = frame.theta_a.iter().zip(&vel.normal).map(|(a, u)| a * u).collect();
    let m = flux.iter().sum::<f64>() / 64.0;
    assert!(max_gap1(&dt, &flux.iter().map(|v| v - m).collect::<Vec<_>>()) < 1e-10);
    assert_eq!(vel.transport[0], vel.t_bar);
}

#[test]
fn dissipation_is_nonnegative() {
    let sp = Spectral::new(64).unwrap();
    for eps in [0.02, 0.1, 0.2] {
        let st = wavy(&sp, eps);
        let frame = Frame::build(&sp, &st).unwrap();
        let force = force_density(&frame, &ForceParams::default());
        let vel = curve_velocity(&sp, &frame, &force).unwrap();
        assert!(power(&force, &vel) > 0.0);
    }
}
