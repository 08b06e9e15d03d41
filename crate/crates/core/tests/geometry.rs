use std::f64::consts::PI;

use stokes_string::geometry::*;
use stokes_string::spectral::Spectral;
use stokes_string::Error;

fn shoelace(z: &[[f64; 2]]) -> f64 {
    let n = z.len();
    (0..n).map(|i| {
        let (a, b) = (z[i], z[(i + 1) % n]);
        a[0] * b[1] - b[0] * a[1]
    }).sum::<f64>() / 2.0
}

fn wavy(sp: &Spectral, eps: f64) -> CurveState {
    let d: Vec<f64> = sp.points().iter().map(|a| eps * (3.0 * a).sin() + 0.5 * eps * (2.0 * a).cos()).collect();
    let ys: Vec<f64> = sp.points().iter().map(|a| eps * (2.0 * a).cos()).collect();
    normalize_initial_data(sp, &d, &ys, PI).unwrap()
}

#[test]
fn equilibrium_is_unit_circle() {
    let sp = Spectral::new(64).unwrap();
    let st = CurveState::equilibrium(64);
    assert!(closure_defect(&sp, &st) < 1e-14);
    assert!((enclosed_area(&sp, &st) - PI).abs() < 1e-13);
    let c = reconstruct_curve(&sp, &st).unwrap();
    for (x, k) in c.z.iter().zip(&c.kappa) {
        assert!((x[0].hypot(x[1] + 1.0) - 1.0).abs() < 1e-13, "{x:?}");
        assert!((k - 1.0).abs() < 1e-13);
    }
    let (b1, b2) = wellposedness_margins(&sp, &st);
    assert!((b1 - 2.0 / PI).abs() < 1e-13);
    assert_eq!(b2, 1.0);
}

#[test]
fn area_matches_shoelace_of_fine_polygon() {
    let sp = Spectral::new(128).unwrap();
    let st = wavy(&sp, 0.2);
    let a = enclosed_area(&sp, &st);
    assert!((a - PI).abs() < 1e-12);
    // Shoelace on a refined copy of the curve has O(h²) error.
    let fine: Vec<f64> = (0..4096).map(|j| -PI + j as f64 * 2.0 * PI / 4096.0).collect();
    let frame = Frame::build(&sp, &st).unwrap();
    let z = frame.z_at(&sp, st.base, &fine);
    assert!((shoelace(&z) - a).abs() < 1e-5);
}

#[test]
fn normalized_data_closes() {
    let sp = Spectral::new(64).unwrap();
    let st = wavy(&sp, 0.3);
    assert!(closure_defect(&sp, &st) <= 1e-13);
    assert!(st.d.iter().sum::<f64>().abs() < 1e-12);
    assert!(st.y_s.iter().sum::<f64>().abs() < 1e-12);
    assert!(st.validate().is_ok());
}

#[test]
fn normalization_rejects_bad_input() {
    let sp = Spectral::new(16).unwrap();
    assert!(matches!(normalize_initial_data(&sp, &[0.0; 8], &[0.0; 16], PI), Err(Error::InvalidArgument(_))));
    assert!(normalize_initial_data(&sp, &[0.0; 16], &[0.0; 16], -1.0).is_err());
    let wild: Vec<f64> = sp.points().iter().map(|a| 50.0 * a.sin()).collect();
    assert!(normalize_initial_data(&sp, &wild, &[0.0; 16], PI).is_err());
}

#[test]
fn transfer_map_inverts() {
    let sp = Spectral::new(64).unwrap();
    let ys: Vec<f64> = sp.points().iter().map(|s| 0.4 * s.cos() + 0.2 * (3.0 * s).sin()).collect();
    let map = build_transfer_map(&sp, &ys);
    let targets: Vec<f64> = sp.points().to_vec();
    let s = invert_transfer(&sp, &map, &targets).unwrap();
    for (si, a) in s.iter().zip(&targets) {
        // y(s) = 0.4 sin s − (0.2/3)(cos 3s − cos 3π) pinned at −π.
        let y = 0.4 * si.sin() - 0.2 / 3.0 * ((3.0 * si).cos() + 1.0);
        assert!((si + y - a).abs() < 1e-12);
    }
    let bad: Vec<f64> = sp.points().iter().map(|s| 1.5 * s.cos()).collect();
    let map = build_transfer_map(&sp, &bad);
    assert!(matches!(invert_transfer(&sp, &map, &targets), Err(Error::WellStretched(_))));
}

#[test]
fn material_curve_agrees_with_arc_length_curve() {
    let sp = Spectral::new(64).unwrap();
    let st = wavy(&sp, 0.1);
    let frame = Frame::build(&sp, &st).unwrap();
    let direct = frame.z_at(&sp, st.base, &frame.alpha_of_s);
    for (a, b) in direct.iter().zip(&frame.curve.x) {
        assert!((a[0] - b[0]).abs() < 1e-13 && (a[1] - b[1]).abs() < 1e-13);
    }
}

#[test]
fn mean_angle_rotates_curve() {
    let sp = Spectral::new(64).unwrap();
    let st = wavy(&sp, 0.2);
    let mut rot = st.clone();
    rot.theta_bar += 0.7;
    let a = reconstruct_curve(&sp, &st).unwrap();
    let b = reconstruct_curve(&sp, &rot).unwrap();
    let (s, c) = 0.7f64.sin_cos();
    for (p, q) in a.z.iter().zip(&b.z) {
        assert!((c * p[0] - s * p[1] - q[0]).abs() < 1e-13);
        assert!((s * p[0] + c * p[1] - q[1]).abs() < 1e-13);
    }
    assert!((enclosed_area(&sp, &st) - enclosed_area(&sp, &rot)).abs() < 1e-13);
}

#[test]
fn state_validation() {
    let mut st = CurveState::equilibrium(8);
    assert!(st.validate().is_ok());
    st.s = 0.0;
    assert!(st.validate().is_err());
    st.s = 1.0;
    st.y_s[2] = -1.0;
    assert!(matches!(st.validate(), Err(Error::WellStretched(_))));
    st.y_s[2] = f64::NAN;
    assert!(st.validate().is_err());
    assert!(ForceParams::default().validate().is_ok());
    assert!(ForceParams { c1: 0.0, c3: 0.0, ..Default::default() }.validate().is_err());
    assert!(ForceParams { lambda: -1.0, ..Default::default() }.validate().is_err());
}
