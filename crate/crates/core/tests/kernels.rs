use std::f64::consts::PI;

use stokes_string::geometry::{normalize_initial_data, CurveState, Frame};
use stokes_string::kernels::*;
use stokes_string::spectral::{Coordinate, Spectral};
use stokes_string::Error;

fn g(x: [f64; 2]) -> Mat2 {
    fundamental_solution(x).unwrap().0
}

fn q(x: [f64; 2]) -> [f64; 2] {
    fundamental_solution(x).unwrap().1
}

#[test]
fn origin_is_singular() {
    assert!(matches!(fundamental_solution([0.0, 0.0]), Err(Error::Singularity)));
    assert!(fundamental_solution([f64::NAN, 0.0]).is_err());
}

#[test]
fn stokeslet_is_symmetric_and_matches_closed_form() {
    let x = [0.3, -1.1];
    let m = g(x);
    assert_eq!(m[0][1], m[1][0]);
    let r = x[0].hypot(x[1]);
    assert!((m[0][0] - (-r.ln() + x[0] * x[0] / (r * r)) / (4.0 * PI)).abs() < 1e-15);
    let p = q(x);
    assert!((p[1] - x[1] / (2.0 * PI * r * r)).abs() < 1e-15);
}

#[test]
fn stokes_equations_hold_away_from_origin() {
    // Fourth-order centered differences: −ΔG_{·j} + ∇Q_j = 0 and ∇·G_{·j} = 0.
    let x = [0.7, -0.4];
    let h = 1e-3;
    let shift = |dx: f64, dy: f64| [x[0] + dx, x[1] + dy];
    let d1 = |f: &dyn Fn([f64; 2]) -> f64, e: [f64; 2]| {
        (-f(shift(2.0 * h * e[0], 2.0 * h * e[1])) + 8.0 * f(shift(h * e[0], h * e[1])) - 8.0 * f(shift(-h * e[0], -h * e[1]))
            + f(shift(-2.0 * h * e[0], -2.0 * h * e[1])))
            / (12.0 * h)
    };
    let d2 = |f: &dyn Fn([f64; 2]) -> f64, e: [f64; 2]| {
        (-f(shift(2.0 * h * e[0], 2.0 * h * e[1])) + 16.0 * f(shift(h * e[0], h * e[1])) - 30.0 * f(x)
            + 16.0 * f(shift(-h * e[0], -h * e[1]))
            - f(shift(-2.0 * h * e[0], -2.0 * h * e[1])))
            / (12.0 * h * h)
    };
    let ex = [1.0, 0.0];
    let ey = [0.0, 1.0];
    for j in 0..2 {
        for i in 0..2 {
            let gij = move |p: [f64; 2]| g(p)[i][j];
            let qj = move |p: [f64; 2]| q(p)[j];
            let lap = d2(&gij, ex) + d2(&gij, ey);
            let grad = d1(&qj, if i == 0 { ex } else { ey });
            assert!((-lap + grad).abs() < 1e-6, "momentum ({i},{j}): {}", -lap + grad);
        }
        let div = d1(&move |p: [f64; 2]| g(p)[0][j], ex) + d1(&move |p: [f64; 2]| g(p)[1][j], ey);
        assert!(div.abs() < 1e-9, "divergence {j}: {div}");
    }
}

#[test]
fn tau_wraps_into_half_open_interval() {
    assert!((tau(0.0, 1.0) - 1.0).abs() < 1e-15);
    assert!((tau(3.0, -3.0) - (2.0 * PI - 6.0)).abs() < 1e-14);
    assert!((tau(-3.0, 3.0) - (6.0 - 2.0 * PI)).abs() < 1e-14);
    assert_eq!(tau(0.0, PI), -PI);
    assert!(tau(1.0, 1.0 + 4.0 * PI).abs() < 1e-14);
}

#[test]
fn constants_agree() {
    assert!((ARC_FACTOR - MATERIAL_FACTOR).abs() < 1e-18);
}

fn ellipse(t: f64) -> ([f64; 2], [f64; 2], [f64; 2]) {
    let (a, b) = (1.3, 0.8);
    ([a * t.cos(), b * t.sin()], [-a * t.sin(), b * t.cos()], [-a * t.cos(), -b * t.sin()])
}

#[test]
fn remainder_diagonal_is_limit_of_pairs() {
    for which in [Differentiated::Target, Differentiated::Source] {
        let (p0, a0, b0) = ellipse(0.4);
        let diag = remainder_diagonal(a0, b0, which);
        let mut errs = Vec::new();
        for t in [1e-2, 5e-3] {
            let (p1, a1, _) = ellipse(0.4 + t);
            let m = remainder_pair(p0, p1, a0, a1, t, which);
            let e = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| (m[i][j] - diag[i][j]).abs()).fold(0.0, f64::max);
            errs.push(e);
        }
        assert!(errs[0] < 1e-2, "{which:?}: {errs:?}");
        // First-order approach to the diagonal.
        assert!(errs[0] / errs[1] > 1.8, "{which:?}: {errs:?}");
    }
}

#[test]
fn source_and_target_diagonals_are_opposite() {
    let (_, a, b) = ellipse(1.1);
    let t = remainder_diagonal(a, b, Differentiated::Target);
    let s = remainder_diagonal(a, b, Differentiated::Source);
    for i in 0..2 {
        for j in 0..2 {
            assert_eq!(t[i][j], -s[i][j]);
        }
    }
}

fn wavy_frame(sp: &Spectral) -> (CurveState, Frame) {
    let d: Vec<f64> = sp.points().iter().map(|a| 0.1 * (2.0 * a).sin()).collect();
    let ys: Vec<f64> = sp.points().iter().map(|a| 0.1 * a.cos()).collect();
    let st = normalize_initial_data(sp, &d, &ys, PI).unwrap();
    let f = Frame::build(sp, &st).unwrap();
    (st, f)
}

#[test]
fn divided_differences_on_grid() {
    let sp = Spectral::new(32).unwrap();
    let (_, frame) = wavy_frame(&sp);
    for coord in [Coordinate::ArcLength, Coordinate::Material] {
        let dd = divided_differences(&frame, coord);
        let (p, d1) = match coord {
            Coordinate::ArcLength => (&frame.curve.z, &frame.curve.z_a),
            Coordinate::Material => (&frame.curve.x, &frame.curve.x_s),
        };
        let (t, l, _, nn) = dd.at(3, 29);
        assert!((t - 26.0 * 2.0 * PI / 32.0 + 2.0 * PI).abs() < 1e-14);
        for c in 0..2 {
            assert!((l[c] - (p[29][c] - p[3][c]) / t).abs() < 1e-14);
            assert!((nn[c] - (l[c] - d1[3][c]) / t).abs() < 1e-13);
        }
        let (t, l, _, _) = dd.at(5, 5);
        assert_eq!(t, 0.0);
        assert_eq!(l, d1[5]);
    }
}

#[test]
fn remainder_table_matches_pairs_and_rejects_crossings() {
    let sp = Spectral::new(32).unwrap();
    let (_, frame) = wavy_frame(&sp);
    let c = &frame.curve;
    let table = remainder_kernel(&frame, Coordinate::ArcLength, Differentiated::Source, None).unwrap();
    let t = 7.0 * 2.0 * PI / 32.0;
    let m = remainder_pair(c.z[2], c.z[9], c.z_a[2], c.z_a[9], t, Differentiated::Source);
    let k = table.at(2, 9);
    for i in 0..2 {
        for j in 0..2 {
            assert!((m[i][j] - k[i][j]).abs() < 1e-14);
        }
    }
    let v: Vec<[f64; 2]> = (0..32).map(|j| [j as f64 * 0.1, 1.0]).collect();
    let applied = table.apply(&v);
    let direct: f64 = 2.0 * PI / 32.0 * (0..32).map(|j| table.at(4, j)[0][0] * v[j][0] + table.at(4, j)[0][1] * v[j][1]).sum::<f64>();
    assert!((applied[4][0] - direct).abs() < 1e-12);
    assert!(matches!(
        remainder_kernel(&frame, Coordinate::Material, Differentiated::Target, Some(-0.1)),
        Err(Error::SelfIntersection(_))
    ));
}

#[test]
fn log_kernel_symbol() {
    // −ln|2 sin(x/2)| = Σ_{k≥1} cos(kx)/k, so the operator multiplies mode k by π/k.
    let sp = Spectral::new(64).unwrap();
    let f: Vec<f64> = sp.points().iter().map(|a| (3.0 * a).cos() + 2.0).collect();
    let out = log_kernel_apply(&sp, &f);
    for (o, a) in out.iter().zip(sp.points()) {
        assert!((o - PI / 3.0 * (3.0 * a).cos()).abs() < 1e-13);
    }
}

#[test]
fn log_subtracted_stokeslet_is_smooth_on_circle() {
    // On the circle |z_i − z_j| = 2 sin(τ/2) exactly, so the log part vanishes.
    let sp = Spectral::new(16).unwrap();
    let frame = Frame::build(&sp, &CurveState::equilibrium(16)).unwrap();
    let k = log_subtracted_stokeslet(&frame);
    for i in 0..16 {
        for j in 0..16 {
            let m = k.at(i, j);
            assert!((m[0][0] + m[1][1] - 1.0 / (4.0 * PI)).abs() < 1e-13);
        }
    }
}
