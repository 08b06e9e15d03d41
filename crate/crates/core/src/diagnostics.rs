//! Energy, dissipation, Fourier observables, the linearized velocity at the
//! circle, isoperimetric quantities, decay fits and the limit circle.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dynamics::{evaluate, Evaluation};
use crate::error::{Error, Result};
use crate::geometry::{closure_defect, enclosed_area, wellposedness_margins, CurveState, ForceParams, Frame};
use crate::spectral::{integrate, Spectral, V2};
use crate::velocity::{power, VelocityFields};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SobolevNorms {
    /// ‖θ − α‖ in Ḣ¹, Ḣ², Ḣ^{5/2}.
    pub h1: f64,
    pub h2: f64,
    pub h2_5: f64,
    /// ‖y_s‖ in ḣ⁰ and ḣ^{3/2}.
    pub h0: f64,
    pub h1_5: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub energy: f64,
    pub dissipation: f64,
    pub area: f64,
    pub s: f64,
    pub closure_defect: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub sobolev: SobolevNorms,
    /// `(a_k, b_k)` of `D = θ − α` for k = 1..=4.
    pub modes: [(f64, f64); 4],
    pub fuglede_ratio: f64,
    /// NaN when the curve is not convex.
    pub gage_value: f64,
}

impl DiagnosticsRecord {
    pub fn is_finite(&self) -> bool {
        let s = &self.sobolev;
        [self.t, self.energy, self.dissipation, self.area, self.s, self.closure_defect, self.beta1, self.beta2]
            .iter()
            .chain([s.h1, s.h2, s.h2_5, s.h0, s.h1_5].iter())
            .all(|v| v.is_finite())
            && self.modes.iter().all(|(a, b)| a.is_finite() && b.is_finite())
    }
}

pub fn theta_alpha(sp: &Spectral, state: &CurveState) -> Vec<f64> {
    sp.derivative(&state.d, 1).iter().map(|v| 1.0 + v).collect()
}

pub fn energy(sp: &Spectral, state: &CurveState, params: &ForceParams) -> f64 {
    let s = state.s;
    let p = params;
    let bend: Vec<f64> = theta_alpha(sp, state).iter().map(|ta| (ta - p.b * s).powi(2)).collect();
    let stretch: Vec<f64> = state.y_s.iter().map(|y| (s * (1.0 + y) - p.s_op).powi(2)).collect();
    p.c1 / (2.0 * s) * integrate(&bend) + 0.5 * p.c3 * integrate(&stretch) + 2.0 * PI * p.lambda * s
}

/// Boundary pairing `∫ u·F`, equal to `∫|∇u|²` over the plane.
pub fn dissipation_rate(ev: &Evaluation) -> f64 {
    power(&ev.force, &ev.velocity)
}

/// `a_k = ∫ cos(kα) f`, `b_k = ∫ sin(kα) f` for k = 0..n/2.
pub fn fourier_ab(sp: &Spectral, f: &[f64]) -> Vec<(f64, f64)> {
    let c = sp.forward(f);
    (0..=sp.n() / 2).map(|k| (2.0 * PI * c[k].re, -2.0 * PI * c[k].im)).collect()
}

/// `(a_k, b_k)` for any integer k, using `a_{−k} = a_k`, `b_{−k} = −b_k`.
fn ab_at(ab: &[(f64, f64)], k: i64) -> (f64, f64) {
    let m = k.unsigned_abs() as usize;
    if m >= ab.len() {
        return (0.0, 0.0);
    }
    let (a, b) = ab[m];
    if k < 0 {
        (a, -b)
    } else {
        (a, b)
    }
}

pub fn sobolev_norms(sp: &Spectral, state: &CurveState) -> SobolevNorms {
    SobolevNorms {
        h1: sp.sobolev_seminorm(&state.d, 1.0),
        h2: sp.sobolev_seminorm(&state.d, 2.0),
        h2_5: sp.sobolev_seminorm(&state.d, 2.5),
        h0: sp.sobolev_seminorm(&state.y_s, 0.0),
        h1_5: sp.sobolev_seminorm(&state.y_s, 1.5),
    }
}

/// `D = D̊ + θ̄`.
pub fn full_d(state: &CurveState) -> Vec<f64> {
    state.d.iter().map(|d| d + state.theta_bar).collect()
}

pub fn record_from(sp: &Spectral, state: &CurveState, params: &ForceParams, ev: &Evaluation) -> DiagnosticsRecord {
    let (beta1, beta2) = wellposedness_margins(sp, state);
    let ab = fourier_ab(sp, &full_d(state));
    let mut modes = [(0.0, 0.0); 4];
    for (k, m) in modes.iter_mut().enumerate() {
        *m = ab_at(&ab, k as i64 + 1);
    }
    let iso = isoperimetric_checks(sp, state);
    DiagnosticsRecord {
        t: state.t,
        energy: energy(sp, state, params),
        dissipation: dissipation_rate(ev),
        area: enclosed_area(sp, state),
        s: state.s,
        closure_defect: closure_defect(sp, state),
        beta1,
        beta2,
        sobolev: sobolev_norms(sp, state),
        modes,
        fuglede_ratio: iso.fuglede_ratio,
        gage_value: iso.gage_value.unwrap_or(f64::NAN),
    }
}

pub fn record(sp: &Spectral, state: &CurveState, params: &ForceParams) -> Result<DiagnosticsRecord> {
    let ev = evaluate(sp, state, params)?;
    Ok(record_from(sp, state, params, &ev))
}

/// Linearized velocity at the circle in closed form:
/// `−¼ℋ((λ+𝔰−1/2𝔰²)(D n_* − D̲n_*) − (D_αα n_* + D_α t_*)/𝔰² + 𝔰 y_α t_*)`.
pub fn linearized_velocity(sp: &Spectral, d: &[f64], y_alpha: &[f64], s: f64, lambda: f64) -> Vec<V2> {
    let n = sp.n();
    let alpha = sp.points();
    let w = lambda + s - 0.5 / (s * s);
    let da = sp.derivative(d, 1);
    let daa = sp.derivative(d, 2);
    let dc: Vec<f64> = (0..n).map(|j| -d[j] * alpha[j].cos()).collect();
    let ds: Vec<f64> = (0..n).map(|j| -d[j] * alpha[j].sin()).collect();
    // Drift-free antiderivative of −D t_*; constants are annihilated by ℋ.
    let under = [sp.antiderivative(&dc), sp.antiderivative(&ds)];
    let mut comp = [vec![0.0; n], vec![0.0; n]];
    for j in 0..n {
        let (sa, ca) = alpha[j].sin_cos();
        let ns = [-sa, ca];
        let ts = [ca, sa];
        for c in 0..2 {
            comp[c][j] = w * (d[j] * ns[c] - under[c][j]) - (daa[j] * ns[c] + da[j] * ts[c]) / (s * s) + s * y_alpha[j] * ts[c];
        }
    }
    let h0 = sp.hilbert(&comp[0]);
    let h1 = sp.hilbert(&comp[1]);
    (0..n).map(|j| [-0.25 * h0[j], -0.25 * h1[j]]).collect()
}

/// The same field assembled from the `(N_k, M_k)` coefficient formulas,
/// `(1/16π) Σ_{k≠0} (N_k, M_k)`.
pub fn linearized_velocity_modes(sp: &Spectral, d: &[f64], y_alpha: &[f64], s: f64, lambda: f64) -> Vec<V2> {
    let n = sp.n();
    let kmax = (n / 2) as i64 - 2;
    let ad = fourier_ab(sp, d);
    let ay = fourier_ab(sp, y_alpha);
    let w = lambda + s - 0.5 / (s * s);
    let s2 = s * s;
    let mut coef: Vec<(i64, Complex64, Complex64)> = Vec::new();
    for k in (-kmax..=kmax).filter(|&k| k != 0) {
        let kk = k as f64;
        let ak = kk.abs();
        let sg = kk / ak;
        let (am, bm) = ab_at(&ad, k - 1);
        let (ap, bp) = ab_at(&ad, k + 1);
        let (aym, bym) = ab_at(&ay, k - 1);
        let (ayp, byp) = ab_at(&ay, k + 1);
        let km = kk - 1.0;
        let kp = kk + 1.0;
        let cm = w * km / ak + kk * km * km / (s2 * ak) - kk * km / (s2 * ak);
        let cp = w * kp / ak + kk * kp * kp / (s2 * ak) + kk * kp / (s2 * ak);
        let nk = Complex64::new(-cm * am + s * sg * bym + cp * ap + s * sg * byp, cm * bm + s * sg * aym - cp * bp + s * sg * ayp);
        let mk = Complex64::new(cm * bm + s * sg * aym + cp * bp - s * sg * ayp, cm * am - s * sg * bym + cp * ap + s * sg * byp);
        coef.push((k, nk, mk));
    }
    sp.points()
        .iter()
        .map(|&x| {
            let mut acc = [Complex64::new(0.0, 0.0); 2];
            for &(k, nk, mk) in &coef {
                let e = Complex64::from_polar(1.0, k as f64 * x);
                acc[0] += nk * e;
                acc[1] += mk * e;
            }
            [acc[0].re / (16.0 * PI), acc[1].re / (16.0 * PI)]
        })
        .collect()
}

pub fn l2_norm_v2(f: &[V2]) -> f64 {
    let sq: Vec<f64> = f.iter().map(|v| v[0] * v[0] + v[1] * v[1]).collect();
    integrate(&sq).sqrt()
}

/// `‖u − ∂_η v_η|₀‖_{L²}` on the α-grid.
pub fn linearization_error(sp: &Spectral, state: &CurveState, params: &ForceParams) -> Result<f64> {
    let ev = evaluate(sp, state, params)?;
    Ok(linearization_error_from(sp, state, params, &ev.frame, &ev.velocity))
}

pub fn linearization_error_from(sp: &Spectral, state: &CurveState, params: &ForceParams, frame: &Frame, vel: &VelocityFields) -> f64 {
    let lin = linearized_velocity(sp, &full_d(state), &frame.ys_at_alpha, state.s, params.lambda);
    let diff: Vec<V2> = vel.u_alpha.iter().zip(&lin).map(|(u, l)| [u[0] - l[0], u[1] - l[1]]).collect();
    l2_norm_v2(&diff)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsoperimetricChecks {
    /// `(1/2𝔰)∫θ_α²`, None for non-convex curves.
    pub gage_value: Option<f64>,
    /// `‖θ − θ̄ − α‖²_{L²} / (𝔰 − 1)`, +∞ when 𝔰 − 1 < 1e−14.
    pub fuglede_ratio: f64,
    pub first_mode_norm: f64,
    /// `|(a₁, b₁)| / (‖D − D̄‖_{L²} ‖D‖_{Ḣ¹})`, NaN when the denominator is 0.
    pub first_mode_ratio: f64,
    /// `(𝔰 − 1, (1/4π)‖θ_α − 1‖²_{L²})`.
    pub perimeter_gap: (f64, f64),
}

pub fn isoperimetric_checks(sp: &Spectral, state: &CurveState) -> IsoperimetricChecks {
    let s = state.s;
    let ta = theta_alpha(sp, state);
    let convex = ta.iter().all(|&v| v > 0.0);
    let sq: Vec<f64> = ta.iter().map(|v| v * v).collect();
    let gage_value = convex.then(|| integrate(&sq) / (2.0 * s));
    let osc2 = integrate(&state.d.iter().map(|v| v * v).collect::<Vec<_>>());
    let gap = s - 1.0;
    let fuglede_ratio = if gap < 1e-14 { f64::INFINITY } else { osc2 / gap };
    let ab = fourier_ab(sp, &full_d(state));
    let first_mode_norm = ab[1].0.hypot(ab[1].1);
    let denom = osc2.sqrt() * sp.sobolev_seminorm(&state.d, 1.0);
    let first_mode_ratio = if denom > 0.0 { first_mode_norm / denom } else { f64::NAN };
    let dev: Vec<f64> = ta.iter().map(|v| (v - 1.0).powi(2)).collect();
    IsoperimetricChecks { gage_value, fuglede_ratio, first_mode_norm, first_mode_ratio, perimeter_gap: (gap, integrate(&dev) / (4.0 * PI)) }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    pub gamma: f64,
    pub r2: f64,
}

/// Least-squares fit of `log v = c − γ t` over `series[window]`.
pub fn decay_fit(series: &[(f64, f64)], window: std::ops::Range<usize>) -> Result<DecayFit> {
    if window.end > series.len() || window.len() < 2 {
        return Err(Error::InvalidArgument(format!("window {window:?} does not fit a series of length {}", series.len())));
    }
    let pts = &series[window];
    if let Some(&(t, v)) = pts.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(Error::Domain(format!("nonpositive value {v} at t = {t}")));
    }
    let m = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let lm = pts.iter().map(|p| p.1.ln()).sum::<f64>() / m;
    let (mut stt, mut stl, mut sll) = (0.0, 0.0, 0.0);
    for &(t, v) in pts {
        let dt = t - tm;
        let dl = v.ln() - lm;
        stt += dt * dt;
        stl += dt * dl;
        sll += dl * dl;
    }
    if stt == 0.0 {
        return Err(Error::Domain("window has a single time value".into()));
    }
    let slope = stl / stt;
    let r2 = if sll <= 1e-300 { 1.0 } else { (stl * stl / (stt * sll)).min(1.0) };
    Ok(DecayFit { gamma: -slope, r2 })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitCircleFit {
    pub center: V2,
    pub phase: f64,
    pub radius: f64,
    pub residual: f64,
}

/// The evenly parametrized circle `x_∞ + r(sin(s+φ), −cos(s+φ))` closest to
/// the material parametrization X(s).
pub fn limit_circle(sp: &Spectral, state: &CurveState) -> Result<LimitCircleFit> {
    let frame = Frame::build(sp, state)?;
    let area = enclosed_area(sp, state);
    if !(area > 0.0) {
        return Err(Error::Domain(format!("enclosed area {area} is not positive")));
    }
    let radius = (area / PI).sqrt();
    let x = &frame.curve.x;
    let n = sp.n();
    let (x0, x1): (Vec<f64>, Vec<f64>) = x.iter().map(|p| (p[0], p[1])).unzip();
    let center = [crate::spectral::mean(&x0), crate::spectral::mean(&x1)];
    let c0 = sp.forward(&x0);
    let c1 = sp.forward(&x1);
    let w1 = c0[1] + Complex64::i() * c1[1];
    let phase = (Complex64::i() * w1).arg();
    let s_pts = sp.points();
    let mut r0 = vec![0.0; n];
    let mut r1 = vec![0.0; n];
    for j in 0..n {
        let (sn, cs) = (s_pts[j] + phase).sin_cos();
        r0[j] = x0[j] - center[0] - radius * sn;
        r1[j] = x1[j] - center[1] + radius * cs;
    }
    let residual = sp.sobolev_seminorm(&r0, 2.5).hypot(sp.sobolev_seminorm(&r1, 2.5));
    Ok(LimitCircleFit { center, phase, radius, residual })
}
