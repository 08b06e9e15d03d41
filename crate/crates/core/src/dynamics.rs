//! Right-hand sides of the contour dynamic system and the IMEX integrator.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::diagnostics::{record_from, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::geometry::{closure_defect, wellposedness_margins, CurveState, ForceParams, Frame};
use crate::spectral::{integrate, subtract_mean, wavenumber, LinearOperator, Spectral, V2};
use crate::velocity::{
    curve_velocity, force_density, normal_derivative_terms, tangential_derivative_terms, ForceDensity, VelocityFields,
};

#[derive(Clone, Debug)]
pub struct RhsBundle {
    pub g_theta: Vec<f64>,
    pub g_y: Vec<f64>,
    pub s_dot: f64,
    pub mean_angle_dot: f64,
    pub base_velocity: V2,
    /// Means removed from g_θ (net of θ̄_t) and g_y before projection.
    pub projected_means: [f64; 2],
}

/// One full evaluation of a state: geometry, force, velocity and the RHS.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub frame: Frame,
    pub force: ForceDensity,
    pub velocity: VelocityFields,
    pub rhs: RhsBundle,
}

pub fn evaluate(sp: &Spectral, state: &CurveState, params: &ForceParams) -> Result<Evaluation> {
    let frame = Frame::build(sp, state)?;
    let force = force_density(&frame, params);
    let velocity = curve_velocity(sp, &frame, &force)?;
    let (s_dot, mean_angle_dot, base_velocity) = scalar_rates(&frame, &velocity);
    let (g_theta, m_theta) = g_theta(sp, &frame, &force, &velocity, params)?;
    let (g_y, m_y) = g_y(sp, &frame, &force, params, s_dot)?;
    let rhs = RhsBundle {
        g_theta,
        g_y,
        s_dot,
        mean_angle_dot,
        base_velocity,
        projected_means: [m_theta - mean_angle_dot, m_y],
    };
    Ok(Evaluation { frame, force, velocity, rhs })
}

/// `(𝔰_t, θ̄_t, base-point velocity)`.
pub fn scalar_rates(frame: &Frame, vel: &VelocityFields) -> (f64, f64, V2) {
    let flux: Vec<f64> = frame.theta_a.iter().zip(&vel.normal).map(|(a, u)| a * u).collect();
    let s_dot = -integrate(&flux) / (2.0 * PI);
    let tr: Vec<f64> = vel.transport.iter().zip(&frame.theta_a).map(|(t, a)| t * a).collect();
    let mean_dot = integrate(&tr) / (2.0 * PI * frame.s);
    (s_dot, mean_dot, vel.u_alpha[0])
}

/// `g_θ = θ_t − 𝓛θ`, projected to zero mean; also returns the removed mean.
pub fn g_theta(
    sp: &Spectral,
    frame: &Frame,
    force: &ForceDensity,
    vel: &VelocityFields,
    params: &ForceParams,
) -> Result<(Vec<f64>, f64)> {
    let terms = normal_derivative_terms(sp, frame, force, params)?;
    let low = terms.lower_order();
    let s = frame.s;
    let mut g: Vec<f64> = (0..frame.n())
        .map(|j| (low[j] + (vel.transport[j] - vel.tangential[j]) * frame.theta_a[j]) / s)
        .collect();
    let m = subtract_mean(&mut g);
    Ok((g, m))
}

/// `g_y = y_st − 𝔏y_s`, projected to zero mean; also returns the removed mean.
pub fn g_y(sp: &Spectral, frame: &Frame, force: &ForceDensity, params: &ForceParams, s_dot: f64) -> Result<(Vec<f64>, f64)> {
    let terms = tangential_derivative_terms(sp, frame, force, params)?;
    let low = terms.lower_order();
    let s = frame.s;
    let mut g: Vec<f64> = (0..frame.n()).map(|j| low[j] / s - (1.0 + frame.y_s[j]) * s_dot / s).collect();
    let m = subtract_mean(&mut g);
    Ok((g, m))
}

/// `𝓛θ = c₁ℋ(θ_ααα)/(4𝔰³)` on samples.
pub fn bending_operator(sp: &Spectral, d: &[f64], s: f64, c1: f64) -> Vec<f64> {
    let op = LinearOperator::Bending { s, c1 };
    sp.apply_multiplier(d, |k| Complex64::new(-op.rate(k), 0.0))
}

/// `𝔏y_s = −c₃𝔥(y_ss)/4` on samples.
pub fn stretching_operator(sp: &Spectral, y: &[f64], c3: f64) -> Vec<f64> {
    let op = LinearOperator::Stretching { c3 };
    sp.apply_multiplier(y, |k| Complex64::new(-op.rate(k), 0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    ImexEuler,
    ImexBdf2,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::ImexEuler => "imex-euler",
            Scheme::ImexBdf2 => "imex-bdf2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "imex-euler" => Some(Scheme::ImexEuler),
            "imex-bdf2" => Some(Scheme::ImexBdf2),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AbortMargins {
    pub beta1_min: f64,
    pub beta2_min: f64,
    pub defect_max: f64,
}

impl Default for AbortMargins {
    fn default() -> Self {
        Self { beta1_min: 1e-2, beta2_min: 1e-2, defect_max: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    pub dealias: bool,
    pub output_every: usize,
    pub preset: String,
    pub params: ForceParams,
    pub epsilon: f64,
    pub mode_k: usize,
    pub seed: u64,
    pub out_dir: String,
    pub abort_margins: AbortMargins,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 256,
            dt: 1e-3,
            t_final: 1.0,
            scheme: Scheme::ImexEuler,
            dealias: true,
            output_every: 10,
            preset: "theta-mode".into(),
            params: ForceParams::default(),
            epsilon: 0.01,
            mode_k: 2,
            seed: 0,
            out_dir: "out".into(),
            abort_margins: AbortMargins::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n < 4 || self.n % 2 != 0 {
            return bad(format!("n must be even and >= 4, got {}", self.n));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return bad(format!("t_final must be nonnegative, got {}", self.t_final));
        }
        if self.output_every == 0 {
            return bad("output_every must be positive".into());
        }
        let m = &self.abort_margins;
        if !(m.beta1_min > 0.0 && m.beta2_min > 0.0 && m.defect_max > 0.0) {
            return bad("abort margins must be positive".into());
        }
        self.params.validate()
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

/// Previous-step data kept by the BDF2 variant.
#[derive(Clone, Debug)]
struct History {
    d: Vec<Complex64>,
    y: Vec<Complex64>,
    /// Full D̊ rate `g_θ − σ(𝔰)D̊` in modes.
    d_rate: Vec<Complex64>,
    g_y: Vec<Complex64>,
    s: f64,
    theta_bar: f64,
    base: V2,
    s_dot: f64,
    mean_dot: f64,
    base_vel: V2,
}

/// Stateful integrator; holds the history needed by BDF2.
#[derive(Clone, Debug)]
pub struct Stepper {
    pub scheme: Scheme,
    pub dt: f64,
    pub dealias: bool,
    pub params: ForceParams,
    pub margins: AbortMargins,
    history: Option<History>,
}

impl Stepper {
    pub fn new(config: &SimConfig) -> Self {
        Self {
            scheme: config.scheme,
            dt: config.dt,
            dealias: config.dealias,
            params: config.params,
            margins: config.abort_margins,
            history: None,
        }
    }

    pub fn reset(&mut self) {
        self.history = None;
    }

    /// Advance by one step using an evaluation of `state`.
    pub fn advance(&mut self, sp: &Spectral, state: &CurveState, ev: &Evaluation) -> Result<CurveState> {
        let dt = self.dt;
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        let n = sp.n();
        let rhs = &ev.rhs;
        let (gt, gy) = if self.dealias {
            (sp.two_thirds_filter(&rhs.g_theta), sp.two_thirds_filter(&rhs.g_y))
        } else {
            (rhs.g_theta.clone(), rhs.g_y.clone())
        };
        let bend = LinearOperator::Bending { s: state.s, c1: self.params.c1 };
        let stretch = LinearOperator::Stretching { c3: self.params.c3 };
        let d_hat = sp.forward(&state.d);
        let y_hat = sp.forward(&state.y_s);
        let gt_hat = sp.forward(&gt);
        let gy_hat = sp.forward(&gy);

        let mut next = state.clone();
        let mut d_new = vec![Complex64::new(0.0, 0.0); n];
        let mut y_new = vec![Complex64::new(0.0, 0.0); n];
        match (&self.history, self.scheme) {
            (Some(h), Scheme::ImexBdf2) => {
                for j in 0..n {
                    let k = wavenumber(j, n);
                    let sb = bend.rate(k);
                    let ss = stretch.rate(k);
                    let g_prev = h.d_rate[j] + h.d[j] * sb;
                    d_new[j] = (d_hat[j] * 4.0 - h.d[j] + (gt_hat[j] * 2.0 - g_prev) * (2.0 * dt)) / (3.0 + 2.0 * dt * sb);
                    y_new[j] = (y_hat[j] * 4.0 - h.y[j] + (gy_hat[j] * 2.0 - h.g_y[j]) * (2.0 * dt)) / (3.0 + 2.0 * dt * ss);
                }
                let ab2 = |x: f64, xp: f64, f: f64, fp: f64| (4.0 * x - xp + 2.0 * dt * (2.0 * f - fp)) / 3.0;
                next.s = ab2(state.s, h.s, rhs.s_dot, h.s_dot);
                next.theta_bar = ab2(state.theta_bar, h.theta_bar, rhs.mean_angle_dot, h.mean_dot);
                for c in 0..2 {
                    next.base[c] = ab2(state.base[c], h.base[c], rhs.base_velocity[c], h.base_vel[c]);
                }
            }
            _ => {
                for j in 0..n {
                    let k = wavenumber(j, n);
                    d_new[j] = (d_hat[j] + gt_hat[j] * dt) / (1.0 + dt * bend.rate(k));
                    y_new[j] = (y_hat[j] + gy_hat[j] * dt) / (1.0 + dt * stretch.rate(k));
                }
                next.s = state.s + dt * rhs.s_dot;
                next.theta_bar = state.theta_bar + dt * rhs.mean_angle_dot;
                for c in 0..2 {
                    next.base[c] = state.base[c] + dt * rhs.base_velocity[c];
                }
            }
        }
        if self.scheme == Scheme::ImexBdf2 {
            let d_rate = (0..n).map(|j| gt_hat[j] - d_hat[j] * bend.rate(wavenumber(j, n))).collect();
            self.history = Some(History {
                d: d_hat,
                y: y_hat,
                d_rate,
                g_y: gy_hat,
                s: state.s,
                theta_bar: state.theta_bar,
                base: state.base,
                s_dot: rhs.s_dot,
                mean_dot: rhs.mean_angle_dot,
                base_vel: rhs.base_velocity,
            });
        }
        next.d = sp.inverse(&d_new);
        next.y_s = sp.inverse(&y_new);
        subtract_mean(&mut next.d);
        subtract_mean(&mut next.y_s);
        next.t = state.t + dt;
        self.check(sp, &next)?;
        Ok(next)
    }

    pub fn check(&self, sp: &Spectral, state: &CurveState) -> Result<()> {
        if !state.is_finite() {
            return Err(Error::NonFinite("state"));
        }
        if !(state.s > 0.0) {
            return Err(Error::InvalidArgument(format!("perimeter left the admissible range: {}", state.s)));
        }
        let (b1, b2) = wellposedness_margins(sp, state);
        if b2 < self.margins.beta2_min {
            return Err(Error::WellStretched(b2));
        }
        if b1 < self.margins.beta1_min {
            return Err(Error::SelfIntersection(b1));
        }
        let cd = closure_defect(sp, state);
        if cd > self.margins.defect_max {
            return Err(Error::ClosureDefect(cd));
        }
        Ok(())
    }
}

/// Single IMEX-Euler step from `state`.
pub fn time_step(sp: &Spectral, state: &CurveState, config: &SimConfig) -> Result<CurveState> {
    let ev = evaluate(sp, state, &config.params)?;
    let mut stepper = Stepper::new(&SimConfig { scheme: Scheme::ImexEuler, ..config.clone() });
    stepper.advance(sp, state, &ev)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Completed,
    MarginAbort,
    NanAbort,
}

impl Termination {
    pub fn name(&self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::MarginAbort => "margin-abort",
            Termination::NanAbort => "nan-abort",
        }
    }
}

/// Snapshots are kept at step 0, every `SNAPSHOT_STRIDE · output_every` steps, and at the end.
pub const SNAPSHOT_STRIDE: usize = 10;

#[derive(Clone, Debug)]
pub struct SimOutput {
    pub final_state: CurveState,
    pub records: Vec<DiagnosticsRecord>,
    /// `(step, state)`.
    pub snapshots: Vec<(usize, CurveState)>,
    /// Largest pre-projection means of g_θ and g_y seen over the run.
    pub max_projected_means: [f64; 2],
    pub termination: Termination,
    /// Message of the error that ended the run early.
    pub abort: Option<String>,
}

/// Steps `initial` to `config.t_final`, stopping early on margin or NaN aborts.
/// Setup errors are returned as `Err`; aborts are reported in the output.
pub fn run_simulation(initial: &CurveState, config: &SimConfig) -> Result<SimOutput> {
    config.validate()?;
    let sp = Spectral::new(config.n)?;
    if initial.n() != config.n {
        return Err(Error::InvalidArgument(format!("state has {} samples, config n = {}", initial.n(), config.n)));
    }
    initial.validate()?;
    let mut stepper = Stepper::new(config);
    stepper.check(&sp, initial)?;
    let steps = config.steps();
    let snap_every = config.output_every * SNAPSHOT_STRIDE;
    let mut state = initial.clone();
    let mut records = Vec::new();
    let mut snapshots = vec![(0, state.clone())];
    let mut max_means = [0.0f64; 2];
    let mut last_recorded = None;
    let mut step = 0;
    let outcome = loop {
        let ev = match evaluate(&sp, &state, &config.params) {
            Ok(ev) => ev,
            Err(e) => break Err(e),
        };
        if step % config.output_every == 0 {
            records.push(record_from(&sp, &state, &config.params, &ev));
            last_recorded = Some(step);
        }
        if step == steps {
            break Ok(());
        }
        for c in 0..2 {
            max_means[c] = max_means[c].max(ev.rhs.projected_means[c].abs());
        }
        match stepper.advance(&sp, &state, &ev) {
            Ok(next) => state = next,
            Err(e) => break Err(e),
        }
        step += 1;
        if step % snap_every == 0 && step != steps {
            snapshots.push((step, state.clone()));
        }
    };
    let (termination, abort) = match outcome {
        Ok(()) => (Termination::Completed, None),
        Err(e @ Error::NonFinite(_)) => (Termination::NanAbort, Some(e.to_string())),
        Err(e) if e.is_abort() || matches!(e, Error::Singularity) => (Termination::MarginAbort, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    if last_recorded != Some(step) {
        if let Ok(r) = crate::diagnostics::record(&sp, &state, &config.params) {
            records.push(r);
        }
    }
    if snapshots.last().map(|s| s.0) != Some(step) {
        snapshots.push((step, state.clone()));
    }
    Ok(SimOutput { final_state: state, records, snapshots, max_projected_means: max_means, termination, abort })
}
