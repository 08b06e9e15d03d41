//! Curve state, reconstruction of z and X, the α↔s transfer map, margins,
//! enclosed area and initial-data normalization.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spectral::{integrate, mean, subtract_mean, Interpolator, Spectral, V2};

/// Simulation state. `d` is the zero-mean oscillation of θ − α on the
/// α-grid, `y_s` the zero-mean stretching field on the s-grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveState {
    pub d: Vec<f64>,
    pub theta_bar: f64,
    pub y_s: Vec<f64>,
    pub s: f64,
    pub base: V2,
    pub t: f64,
}

impl CurveState {
    pub fn equilibrium(n: usize) -> Self {
        Self { d: vec![0.0; n], theta_bar: 0.0, y_s: vec![0.0; n], s: 1.0, base: [0.0, 0.0], t: 0.0 }
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }

    /// θ − α samples, i.e. D̊ + θ̄.
    pub fn theta_minus_alpha(&self) -> Vec<f64> {
        self.d.iter().map(|v| v + self.theta_bar).collect()
    }

    pub fn theta(&self, alpha: &[f64]) -> Vec<f64> {
        self.d.iter().zip(alpha).map(|(d, a)| a + d + self.theta_bar).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.d.iter().chain(&self.y_s).all(|v| v.is_finite())
            && self.theta_bar.is_finite()
            && self.s.is_finite()
            && self.base.iter().all(|v| v.is_finite())
    }

    pub fn validate(&self) -> Result<()> {
        if self.d.len() != self.y_s.len() || self.d.len() < 4 || self.d.len() % 2 != 0 {
            return Err(Error::InvalidArgument("state fields must share an even grid size".into()));
        }
        if !(self.s > 0.0) {
            return Err(Error::InvalidArgument(format!("perimeter must be positive, got {}", self.s)));
        }
        if !self.is_finite() {
            return Err(Error::NonFinite("state"));
        }
        let b2 = beta2(&self.y_s);
        if b2 <= 0.0 {
            return Err(Error::WellStretched(b2));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForceParams {
    pub c1: f64,
    pub c3: f64,
    pub lambda: f64,
    pub b: f64,
    pub s_op: f64,
}

impl Default for ForceParams {
    fn default() -> Self {
        Self { c1: 1.0, c3: 1.0, lambda: 0.0, b: 0.0, s_op: 0.0 }
    }
}

impl ForceParams {
    pub fn validate(&self) -> Result<()> {
        if self.c1 < 0.0 || self.c3 < 0.0 || self.lambda < 0.0 || self.s_op < 0.0 {
            return Err(Error::InvalidArgument("c1, c3, lambda and s_op must be nonnegative".into()));
        }
        if self.c1 == 0.0 && self.c3 == 0.0 && self.lambda == 0.0 {
            return Err(Error::InvalidArgument("c1, c3 and lambda cannot all vanish".into()));
        }
        Ok(())
    }
}

/// Material-to-arc-length map `α(s) = s + y(s)`.
#[derive(Clone, Debug)]
pub struct TransferMap {
    pub y: Vec<f64>,
    pub alpha_of_s: Vec<f64>,
    y_s: Vec<f64>,
}

pub fn build_transfer_map(sp: &Spectral, y_s: &[f64]) -> TransferMap {
    let y = sp.antiderivative(y_s);
    let alpha_of_s = y.iter().zip(sp.points()).map(|(y, s)| s + y).collect();
    TransferMap { y, alpha_of_s, y_s: y_s.to_vec() }
}

pub fn beta2(y_s: &[f64]) -> f64 {
    y_s.iter().fold(f64::INFINITY, |m, v| m.min(1.0 + v))
}

/// Solve `α(s) = target` for each target by Newton on the trigonometric
/// interpolant of y, falling back to bisection.
pub fn invert_transfer(sp: &Spectral, map: &TransferMap, targets: &[f64]) -> Result<Vec<f64>> {
    let b2 = beta2(&map.y_s);
    if b2 <= 0.0 {
        return Err(Error::WellStretched(b2));
    }
    let series = sp.series(&map.y);
    let eval = |s: f64| {
        let (y, ys) = series.eval(s);
        (s + y, 1.0 + ys)
    };
    let mut out = Vec::with_capacity(targets.len());
    for &a in targets {
        // α(s) − s is 2π-periodic, so solve for s in a bracket around a − y.
        let (mut lo, mut hi) = (-PI - 2.0 * PI, PI + 2.0 * PI);
        let mut s = a;
        let mut converged = false;
        for _ in 0..60 {
            let (f, fp) = eval(s);
            let r = f - a;
            if r.abs() <= 1e-14 * (1.0 + a.abs()) {
                converged = true;
                break;
            }
            if r > 0.0 {
                hi = hi.min(s);
            } else {
                lo = lo.max(s);
            }
            let mut next = s - r / fp;
            if !(next > lo && next < hi) || !fp.is_finite() || fp <= 0.0 {
                next = 0.5 * (lo + hi);
            }
            if (next - s).abs() <= 1e-16 * (1.0 + s.abs()) {
                s = next;
                converged = true;
                break;
            }
            s = next;
        }
        if !converged {
            let (f, _) = eval(s);
            if (f - a).abs() > 1e-12 {
                return Err(Error::Domain(format!("transfer inversion stalled at alpha = {a}")));
            }
        }
        out.push(s);
    }
    Ok(out)
}

/// `∫_{−π}^{π} (cos θ, sin θ) dα`.
pub fn closure_vector(sp: &Spectral, state: &CurveState) -> V2 {
    let theta = state.theta(sp.points());
    let c: Vec<f64> = theta.iter().map(|t| t.cos()).collect();
    let s: Vec<f64> = theta.iter().map(|t| t.sin()).collect();
    [integrate(&c), integrate(&s)]
}

pub fn closure_defect(sp: &Spectral, state: &CurveState) -> f64 {
    let c = closure_vector(sp, state);
    c[0].hypot(c[1])
}

/// Sampled curve on both grids.
#[derive(Clone, Debug)]
pub struct CurveSamples {
    pub z: Vec<V2>,
    pub z_a: Vec<V2>,
    pub z_aa: Vec<V2>,
    pub x: Vec<V2>,
    pub x_s: Vec<V2>,
    pub x_ss: Vec<V2>,
    pub t_alpha: Vec<V2>,
    pub n_alpha: Vec<V2>,
    pub t_s: Vec<V2>,
    pub n_s: Vec<V2>,
    pub kappa: Vec<f64>,
}

/// Everything derived from a state that the velocity and right-hand sides use.
#[derive(Clone, Debug)]
pub struct Frame {
    pub s: f64,
    pub alpha: Vec<f64>,
    pub theta: Vec<f64>,
    pub theta_a: Vec<f64>,
    pub theta_aa: Vec<f64>,
    pub theta_aaa: Vec<f64>,
    pub closure: V2,
    /// Fields at s(α_j).
    pub s_of_alpha: Vec<f64>,
    pub ys_at_alpha: Vec<f64>,
    pub yss_at_alpha: Vec<f64>,
    /// Material-grid fields.
    pub y_s: Vec<f64>,
    pub y_ss: Vec<f64>,
    pub alpha_of_s: Vec<f64>,
    pub theta_at_s: Vec<f64>,
    pub theta_a_at_s: Vec<f64>,
    pub theta_aa_at_s: Vec<f64>,
    pub theta_aaa_at_s: Vec<f64>,
    pub curve: CurveSamples,
    /// Evaluates α-grid fields at α(s_j).
    pub to_material: Interpolator,
    /// Antiderivative of t − mean(t), used to place X off-grid.
    z_potential: Vec<V2>,
}

fn unit(theta: f64) -> (V2, V2) {
    let (s, c) = theta.sin_cos();
    ([c, s], [-s, c])
}

impl Frame {
    pub fn build(sp: &Spectral, state: &CurveState) -> Result<Self> {
        state.validate()?;
        if state.n() != sp.n() {
            return Err(Error::InvalidArgument("state and spectral grid sizes differ".into()));
        }
        let s = state.s;
        let alpha = sp.points().to_vec();
        let theta = state.theta(&alpha);
        let d_a = sp.derivative(&state.d, 1);
        let theta_a: Vec<f64> = d_a.iter().map(|v| 1.0 + v).collect();
        let theta_aa = sp.derivative(&state.d, 2);
        let theta_aaa = sp.derivative(&state.d, 3);

        let (t_alpha, n_alpha): (Vec<V2>, Vec<V2>) = theta.iter().map(|&th| unit(th)).unzip();
        let tc: Vec<f64> = t_alpha.iter().map(|v| v[0]).collect();
        let ts: Vec<f64> = t_alpha.iter().map(|v| v[1]).collect();
        let closure = [integrate(&tc), integrate(&ts)];
        let drift = [closure[0] / (2.0 * PI), closure[1] / (2.0 * PI)];
        let pc = sp.antiderivative(&tc);
        let ps = sp.antiderivative(&ts);
        let z_potential: Vec<V2> = pc.iter().zip(&ps).map(|(a, b)| [*a, *b]).collect();
        let z: Vec<V2> = z_potential.iter().map(|p| [state.base[0] + s * p[0], state.base[1] + s * p[1]]).collect();
        let z_a: Vec<V2> = t_alpha.iter().map(|t| [s * (t[0] - drift[0]), s * (t[1] - drift[1])]).collect();
        let z_aa: Vec<V2> = n_alpha.iter().zip(&theta_a).map(|(n, ta)| [s * ta * n[0], s * ta * n[1]]).collect();
        let kappa: Vec<f64> = theta_a.iter().map(|v| v / s).collect();

        let y_s = state.y_s.clone();
        let y_ss = sp.derivative(&y_s, 1);
        let map = build_transfer_map(sp, &y_s);
        let s_of_alpha = invert_transfer(sp, &map, &alpha)?;
        let to_arc = Interpolator::new(sp.n(), &s_of_alpha);
        let ys_at_alpha = to_arc.eval(&y_s);
        let yss_at_alpha = to_arc.eval(&y_ss);

        let alpha_of_s = map.alpha_of_s.clone();
        let to_material = Interpolator::new(sp.n(), &alpha_of_s);
        let d_at_s = to_material.eval(&state.d);
        let theta_at_s: Vec<f64> = d_at_s.iter().zip(&alpha_of_s).map(|(d, a)| a + d + state.theta_bar).collect();
        let theta_a_at_s: Vec<f64> = to_material.eval(&d_a).iter().map(|v| 1.0 + v).collect();
        let theta_aa_at_s = to_material.eval(&theta_aa);
        let theta_aaa_at_s = to_material.eval(&theta_aaa);
        let (t_s, n_s): (Vec<V2>, Vec<V2>) = theta_at_s.iter().map(|&th| unit(th)).unzip();

        let pot_s = to_material.eval_v2(&z_potential);
        let x: Vec<V2> = pot_s.iter().map(|p| [state.base[0] + s * p[0], state.base[1] + s * p[1]]).collect();
        let x_s: Vec<V2> = t_s
            .iter()
            .zip(&y_s)
            .map(|(t, ys)| [(1.0 + ys) * s * (t[0] - drift[0]), (1.0 + ys) * s * (t[1] - drift[1])])
            .collect();
        let x_ss: Vec<V2> = (0..sp.n())
            .map(|j| {
                let g = 1.0 + y_s[j];
                let za = [s * (t_s[j][0] - drift[0]), s * (t_s[j][1] - drift[1])];
                let zaa = [s * theta_a_at_s[j] * n_s[j][0], s * theta_a_at_s[j] * n_s[j][1]];
                [g * g * zaa[0] + y_ss[j] * za[0], g * g * zaa[1] + y_ss[j] * za[1]]
            })
            .collect();

        let curve = CurveSamples { z, z_a, z_aa, x, x_s, x_ss, t_alpha, n_alpha, t_s, n_s, kappa };
        Ok(Self {
            s,
            alpha,
            theta,
            theta_a,
            theta_aa,
            theta_aaa,
            closure,
            s_of_alpha,
            ys_at_alpha,
            yss_at_alpha,
            y_s,
            y_ss,
            alpha_of_s,
            theta_at_s,
            theta_a_at_s,
            theta_aa_at_s,
            theta_aaa_at_s,
            curve,
            to_material,
            z_potential,
        })
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    /// z̃ at arbitrary arc-length points, by direct summation of the series.
    pub fn z_at(&self, sp: &Spectral, base: V2, points: &[f64]) -> Vec<V2> {
        let pot = Interpolator::new(sp.n(), points).eval_v2(&self.z_potential);
        pot.iter().map(|p| [base[0] + self.s * p[0], base[1] + self.s * p[1]]).collect()
    }
}

pub fn reconstruct_curve(sp: &Spectral, state: &CurveState) -> Result<CurveSamples> {
    Ok(Frame::build(sp, state)?.curve)
}

/// β1: smallest chord/arc ratio over grid pairs minus the normalized closure
/// defect. β2: min(1 + y_s).
pub fn wellposedness_margins(sp: &Spectral, state: &CurveState) -> (f64, f64) {
    let n = sp.n();
    let h = sp.h();
    let theta = state.theta(sp.points());
    let tc: Vec<f64> = theta.iter().map(|t| t.cos()).collect();
    let ts: Vec<f64> = theta.iter().map(|t| t.sin()).collect();
    let c = [integrate(&tc), integrate(&ts)];
    let cn = c[0].hypot(c[1]);
    // Prefix integrals ∫_{−π}^{α_j} (cos θ, sin θ) dα, spectrally accurate.
    let pc = sp.cumulative_integral(&tc);
    let ps = sp.cumulative_integral(&ts);
    let mut b1 = f64::INFINITY;
    for i in 0..n {
        for j in 0..i {
            let dx = pc[i] - pc[j];
            let dy = ps[i] - ps[j];
            let gap = (i - j) as f64 * h;
            let dist = gap.min(2.0 * PI - gap);
            b1 = b1.min(dx.hypot(dy) / dist);
        }
    }
    (b1 - cn / (2.0 * PI), beta2(&state.y_s))
}

/// `A = −½ ∫ z·z_α^⊥ dα` with `v^⊥ = (−v₂, v₁)`.
pub fn enclosed_area(sp: &Spectral, state: &CurveState) -> f64 {
    let s = state.s;
    let theta = state.theta(sp.points());
    let tc: Vec<f64> = theta.iter().map(|t| t.cos()).collect();
    let ts: Vec<f64> = theta.iter().map(|t| t.sin()).collect();
    let drift = [mean(&tc), mean(&ts)];
    let pc = sp.antiderivative(&tc);
    let ps = sp.antiderivative(&ts);
    let integrand: Vec<f64> = (0..sp.n())
        .map(|j| {
            let z = [state.base[0] + s * pc[j], state.base[1] + s * ps[j]];
            let za = [s * (tc[j] - drift[0]), s * (ts[j] - drift[1])];
            -0.5 * (-z[0] * za[1] + z[1] * za[0])
        })
        .collect();
    integrate(&integrand)
}

/// Closes the curve by adjusting the first Fourier modes of θ − α, splits
/// off the mean angle, and scales the perimeter to the requested area.
pub fn normalize_initial_data(sp: &Spectral, raw_d: &[f64], raw_ys: &[f64], target_area: f64) -> Result<CurveState> {
    let n = sp.n();
    if raw_d.len() != n || raw_ys.len() != n {
        return Err(Error::InvalidArgument("initial fields do not match the grid".into()));
    }
    if !(target_area > 0.0) {
        return Err(Error::InvalidArgument(format!("target area must be positive, got {target_area}")));
    }
    let mut y_s = raw_ys.to_vec();
    subtract_mean(&mut y_s);
    let alpha = sp.points();
    let cos1: Vec<f64> = alpha.iter().map(|a| a.cos()).collect();
    let sin1: Vec<f64> = alpha.iter().map(|a| a.sin()).collect();
    let mut d = raw_d.to_vec();
    let closure_of = |d: &[f64]| {
        let th: Vec<f64> = d.iter().zip(alpha).map(|(d, a)| a + d).collect();
        let c: Vec<f64> = th.iter().map(|t| t.cos()).collect();
        let s: Vec<f64> = th.iter().map(|t| t.sin()).collect();
        (th, [integrate(&c), integrate(&s)])
    };
    let mut iter = 0;
    loop {
        let (th, c) = closure_of(&d);
        let defect = c[0].hypot(c[1]);
        if defect <= 1e-13 {
            break;
        }
        if iter >= 50 || !defect.is_finite() {
            return Err(Error::NonClosable(defect));
        }
        iter += 1;
        // ∂C/∂a for D += a cos α + b sin α.
        let j = |basis: &[f64]| {
            let x: Vec<f64> = th.iter().zip(basis).map(|(t, b)| -t.sin() * b).collect();
            let y: Vec<f64> = th.iter().zip(basis).map(|(t, b)| t.cos() * b).collect();
            [integrate(&x), integrate(&y)]
        };
        let ja = j(&cos1);
        let jb = j(&sin1);
        let det = ja[0] * jb[1] - jb[0] * ja[1];
        if det.abs() < 1e-14 {
            return Err(Error::NonClosable(defect));
        }
        let da = (c[0] * jb[1] - jb[0] * c[1]) / det;
        let db = (ja[0] * c[1] - c[0] * ja[1]) / det;
        for k in 0..n {
            d[k] -= da * cos1[k] + db * sin1[k];
        }
    }
    let theta_bar = subtract_mean(&mut d);
    let mut state = CurveState { d, theta_bar, y_s, s: 1.0, base: [0.0, 0.0], t: 0.0 };
    let a1 = enclosed_area(sp, &state);
    if !(a1 > 0.0) {
        return Err(Error::Domain(format!("initial curve encloses nonpositive area {a1}")));
    }
    state.s = (target_area / a1).sqrt();
    Ok(state)
}
