//! Acceptance suite: one check group per criterion, with every tolerance in [`tol`].

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::cli::preset_state;
use crate::diagnostics::{
    decay_fit, full_d, isoperimetric_checks, limit_circle, linearization_error_from, linearized_velocity,
    linearized_velocity_modes, DiagnosticsRecord,
};
use crate::dynamics::{bending_operator, evaluate, run_simulation, stretching_operator, Scheme, SimConfig, SimOutput, Termination};
use crate::error::Result;
use crate::geometry::{normalize_initial_data, CurveState, ForceParams};
use crate::kernels::{divided_differences, fundamental_solution, remainder_kernel, Differentiated, Mat2};
use crate::spectral::{implicit_linear_step, subtract_mean, Coordinate, LinearOperator, Resolvent, Spectral, V2};

pub mod tol {
    pub const EQ_VELOCITY: f64 = 1e-10;
    pub const EQ_STEPS: usize = 1000;
    pub const EQ_DRIFT: f64 = 1e-8;
    pub const ENERGY_HORIZON: f64 = 0.5;
    pub const ENERGY_RATIO_ORDER1: f64 = 1.8;
    pub const ENERGY_RATIO_ORDER2: f64 = 3.5;
    pub const ENERGY_MONOTONE: f64 = 1e-10;
    pub const AREA_HORIZON: f64 = 1.0;
    pub const AREA_ABS: f64 = 1e-5;
    pub const CLOSURE: f64 = 1e-8;
    pub const CLOSURE_ORDER_HORIZON: f64 = 0.25;
    pub const CLOSURE_ORDER_RATIO: f64 = 1.8;
    pub const HILBERT: f64 = 1e-12;
    pub const DECAY_FACTOR_RATIO: f64 = 1.8;
    pub const INVARIANCE: f64 = 1e-10;
    pub const INVARIANCE_STATES: usize = 20;
    pub const LINEARIZATION_SPREAD: f64 = 3.0;
    pub const LINEARIZATION_FORMS: f64 = 1e-12;
    pub const DECAY_HORIZON: f64 = 5.0;
    pub const DECAY_R2: f64 = 0.99;
    pub const DECAY_GAMMA_REL: f64 = 0.05;
    pub const LIMIT_RESIDUAL: f64 = 1e-4;
    pub const GAGE: f64 = 1e-8;
    pub const GAGE_EQUALITY: f64 = 1e-12;
    pub const FUGLEDE_WINDOW: (f64, f64) = (1.0, 10.0);
    pub const FUGLEDE_STABILITY: f64 = 2.0;
    pub const PERIMETER_STATES: usize = 100;
    pub const FIRST_MODE_STABILITY: f64 = 2.0;
    pub const STOKES_FD_RATIO: f64 = 3.5;
    pub const DIVIDED_DIFFERENCE: f64 = 1e-10;
    pub const DIAGONAL_EXTRAPOLATION: f64 = 1e-6;
    pub const FORCE: f64 = 1e-10;
    pub const TWO_PATH: f64 = 1e-7;
    pub const N: usize = 256;
    pub const DT: f64 = 1e-3;
    pub const EPSILON: f64 = 0.01;
}

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
}

impl CriterionResult {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn line(&self) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let parts: Vec<String> = self
            .checks
            .iter()
            .map(|c| format!("{}{}: {}", if c.passed { "" } else { "[failed] " }, c.name, c.detail))
            .collect();
        format!("criterion {:>2} {verdict} {} | {}", self.id, self.title, parts.join("; "))
    }
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check { name: name.to_string(), passed, detail }
}

fn fail_on_error(name: &str, e: crate::Error) -> Check {
    check(name, false, format!("error: {e}"))
}

pub const TITLES: [&str; 12] = [
    "equilibrium fixed point",
    "energy dissipation identity",
    "area conservation",
    "closed-string preservation",
    "Hilbert transform and linear solver",
    "rotation/translation invariance",
    "linearization",
    "exponential convergence",
    "isoperimetric suite",
    "kernel correctness",
    "force sanity",
    "two-path consistency",
];

fn config(scheme: Scheme, dt: f64, t_final: f64, output_every: usize) -> SimConfig {
    SimConfig { n: tol::N, dt, t_final, scheme, output_every, epsilon: tol::EPSILON, ..SimConfig::default() }
}

fn theta_mode(n: usize, eps: f64) -> Result<CurveState> {
    preset_state("theta-mode", &SimConfig { n, epsilon: eps, ..SimConfig::default() })
}

fn random_state(n: usize, eps: f64, seed: u64) -> Result<CurveState> {
    preset_state("random", &SimConfig { n, epsilon: eps, seed, ..SimConfig::default() })
}

/// Runs shared between criteria 2, 3 and 4.
struct RefinementRuns {
    /// `(scheme, dt, output)`, output every step to `AREA_HORIZON`.
    runs: Vec<(Scheme, f64, SimOutput)>,
}

impl RefinementRuns {
    fn new() -> Result<Self> {
        let init = theta_mode(tol::N, tol::EPSILON)?;
        let mut runs = Vec::new();
        for scheme in [Scheme::ImexEuler, Scheme::ImexBdf2] {
            for dt in [tol::DT, tol::DT / 2.0] {
                let out = run_simulation(&init, &config(scheme, dt, tol::AREA_HORIZON, 1))?;
                runs.push((scheme, dt, out));
            }
        }
        Ok(Self { runs })
    }

    fn get(&self, scheme: Scheme, dt: f64) -> &SimOutput {
        &self.runs.iter().find(|r| r.0 == scheme && r.1 == dt).expect("run exists").2
    }
}

/// `|E(T) − E(0) + ∫₀ᵀ D_rate dt| / T` with the trapezoid rule on the recorded steps.
pub fn energy_residual(records: &[DiagnosticsRecord], horizon: f64) -> f64 {
    let rs: Vec<&DiagnosticsRecord> = records.iter().filter(|r| r.t <= horizon + 1e-9).collect();
    let mut integral = 0.0;
    for w in rs.windows(2) {
        integral += 0.5 * (w[0].dissipation + w[1].dissipation) * (w[1].t - w[0].t);
    }
    let de = rs[rs.len() - 1].energy - rs[0].energy;
    (de + integral).abs() / horizon
}

pub fn max_energy_increase(records: &[DiagnosticsRecord]) -> f64 {
    records.windows(2).map(|w| w[1].energy - w[0].energy).fold(f64::NEG_INFINITY, f64::max)
}

fn relative_area_drift(records: &[DiagnosticsRecord]) -> f64 {
    let a0 = records[0].area;
    (records[records.len() - 1].area - a0).abs() / a0
}

fn max_closure(records: &[DiagnosticsRecord]) -> f64 {
    records.iter().map(|r| r.closure_defect).fold(0.0, f64::max)
}

fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn state_distance(a: &CurveState, b: &CurveState) -> f64 {
    let mut d = max_abs(&a.d, &b.d).max(max_abs(&a.y_s, &b.y_s));
    d = d.max((a.s - b.s).abs()).max((a.theta_bar - b.theta_bar).abs());
    d.max((a.base[0] - b.base[0]).abs()).max((a.base[1] - b.base[1]).abs())
}

pub fn criterion_1() -> Vec<Check> {
    let mut out = Vec::new();
    let sp = Spectral::new(tol::N).expect("valid grid");
    let eq = CurveState::equilibrium(tol::N);
    match evaluate(&sp, &eq, &ForceParams::default()) {
        Ok(ev) => {
            let u = ev.velocity.u_alpha.iter().map(|v| v[0].abs().max(v[1].abs())).fold(0.0, f64::max);
            out.push(check("|u|_inf at t=0", u <= tol::EQ_VELOCITY, format!("{u:.3e} <= {:.0e}", tol::EQ_VELOCITY)));
        }
        Err(e) => out.push(fail_on_error("|u|_inf at t=0", e)),
    }
    let cfg = SimConfig { t_final: tol::EQ_STEPS as f64 * tol::DT, output_every: tol::EQ_STEPS, ..config(Scheme::ImexEuler, tol::DT, 0.0, 1) };
    match run_simulation(&eq, &cfg) {
        Ok(run) => {
            let moved = state_distance(&eq, &run.final_state);
            let steps = (run.final_state.t / tol::DT).round() as usize;
            out.push(check(
                "field drift after 1000 steps",
                moved < tol::EQ_DRIFT && steps == tol::EQ_STEPS,
                format!("{moved:.3e} < {:.0e} over {steps} steps", tol::EQ_DRIFT),
            ));
        }
        Err(e) => out.push(fail_on_error("field drift after 1000 steps", e)),
    }
    out
}

fn criterion_2(runs: &RefinementRuns) -> Vec<Check> {
    let mut out = Vec::new();
    for (scheme, need) in [(Scheme::ImexEuler, tol::ENERGY_RATIO_ORDER1), (Scheme::ImexBdf2, tol::ENERGY_RATIO_ORDER2)] {
        let coarse = energy_residual(&runs.get(scheme, tol::DT).records, tol::ENERGY_HORIZON);
        let fine = energy_residual(&runs.get(scheme, tol::DT / 2.0).records, tol::ENERGY_HORIZON);
        let ratio = coarse / fine;
        out.push(check(
            &format!("{} residual ratio", scheme.name()),
            ratio >= need,
            format!("{coarse:.3e}/{fine:.3e} = {ratio:.2} >= {need}"),
        ));
    }
    let inc = runs.runs.iter().map(|r| max_energy_increase(&r.2.records)).fold(f64::NEG_INFINITY, f64::max);
    out.push(check("energy monotone per step", inc <= tol::ENERGY_MONOTONE, format!("max increase {inc:.3e} <= {:.0e}", tol::ENERGY_MONOTONE)));
    out
}

fn criterion_3(runs: &RefinementRuns) -> Vec<Check> {
    let mut out = Vec::new();
    for (scheme, need) in [(Scheme::ImexEuler, tol::ENERGY_RATIO_ORDER1), (Scheme::ImexBdf2, tol::ENERGY_RATIO_ORDER2)] {
        let coarse = relative_area_drift(&runs.get(scheme, tol::DT).records);
        let fine = relative_area_drift(&runs.get(scheme, tol::DT / 2.0).records);
        let ratio = coarse / fine;
        out.push(check(
            &format!("{} area drift ratio", scheme.name()),
            ratio >= need,
            format!("{coarse:.3e}/{fine:.3e} = {ratio:.2} >= {need}"),
        ));
    }
    let r = &runs.get(Scheme::ImexEuler, tol::DT).records;
    let abs = (r[r.len() - 1].area - r[0].area).abs();
    out.push(check("absolute drift at dt=1e-3", abs <= tol::AREA_ABS, format!("{abs:.3e} <= {:.0e}", tol::AREA_ABS)));
    out
}

fn criterion_4(runs: &[(&str, &SimOutput)]) -> Vec<Check> {
    runs.iter()
        .map(|(name, out)| {
            let m = max_closure(&out.records);
            let done = out.termination == Termination::Completed;
            check(name, m <= tol::CLOSURE && done, format!("max defect {m:.3e} <= {:.0e}, {}", tol::CLOSURE, out.termination.name()))
        })
        .collect()
}

/// Principal-value trapezoid quadrature of `(1/2π) p.v.∫ cot((α−α′)/2) f(α′) dα′`
/// using only nodes an odd number of steps away from the target.
pub fn hilbert_quadrature(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let h = 2.0 * PI / n as f64;
    (0..n)
        .map(|i| {
            let mut acc = 0.0;
            for j in (0..n).filter(|j| (i + n - j) % 2 == 1) {
                let d = (i as f64 - j as f64) * h;
                acc += f[j] / (0.5 * d).tan();
            }
            acc * 2.0 * h / (2.0 * PI)
        })
        .collect()
}

pub fn criterion_5() -> Vec<Check> {
    let mut out = Vec::new();
    let n = tol::N;
    let sp = Spectral::new(n).expect("valid grid");
    let mut worst: f64 = 0.0;
    for k in 1..n / 2 {
        let f: Vec<f64> = sp.points().iter().map(|a| (k as f64 * a).sin()).collect();
        let h = sp.hilbert(&f);
        let q = hilbert_quadrature(&f);
        let exact: Vec<f64> = sp.points().iter().map(|a| -(k as f64 * a).cos()).collect();
        worst = worst.max(max_abs(&h, &q)).max(max_abs(&h, &exact));
    }
    out.push(check("H(sin k a) = -cos k a, k < n/2", worst <= tol::HILBERT, format!("max error {worst:.3e} <= {:.0e}", tol::HILBERT)));

    // Pure decay of single modes under the implicit bending step.
    let s = 1.0;
    let op = LinearOperator::bending(s);
    let horizon = 1.0;
    let err_at = |dt: f64| -> f64 {
        let steps = (horizon / dt).round() as usize;
        let mut worst: f64 = 0.0;
        for k in 1..=4i64 {
            let mut m = vec![Complex64::new(0.0, 0.0); n];
            m[k as usize] = Complex64::new(1.0, 0.0);
            for _ in 0..steps {
                m = implicit_linear_step(&m, dt, op, Resolvent::BackwardEuler).expect("valid step");
            }
            let exact = (-horizon * (k as f64).powi(3) / (4.0 * s.powi(3))).exp();
            worst = worst.max((m[k as usize].re - exact).abs() / exact);
        }
        worst
    };
    let (e1, e2) = (err_at(tol::DT), err_at(tol::DT / 2.0));
    let ratio = e1 / e2;
    out.push(check(
        "implicit decay factor, O(dt)",
        ratio >= tol::DECAY_FACTOR_RATIO && e1 < 1.0,
        format!("rel. error {e1:.3e} -> {e2:.3e}, ratio {ratio:.2} >= {}", tol::DECAY_FACTOR_RATIO),
    ));
    out
}

pub fn criterion_6() -> Vec<Check> {
    let sp = Spectral::new(tol::N).expect("valid grid");
    let p = ForceParams::default();
    let mut worst: f64 = 0.0;
    for seed in 0..tol::INVARIANCE_STATES as u64 {
        let st = match random_state(tol::N, 0.05, seed) {
            Ok(s) => s,
            Err(e) => return vec![fail_on_error("random state", e)],
        };
        let mut moved = st.clone();
        moved.theta_bar += 0.7 + 0.1 * seed as f64;
        moved.base = [st.base[0] + 1.3, st.base[1] - 2.1 * seed as f64];
        let (a, b) = match (evaluate(&sp, &st, &p), evaluate(&sp, &moved, &p)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return vec![fail_on_error("evaluation", e)],
        };
        worst = worst.max(max_abs(&a.velocity.normal, &b.velocity.normal));
        worst = worst.max(max_abs(&a.velocity.tangential, &b.velocity.tangential));
    }
    vec![check(
        "u.n and u.t under rotation and translation",
        worst <= tol::INVARIANCE,
        format!("{} states, max change {worst:.3e} <= {:.0e}", tol::INVARIANCE_STATES, tol::INVARIANCE),
    )]
}

pub fn criterion_7() -> Vec<Check> {
    let sp = Spectral::new(tol::N).expect("valid grid");
    let p = ForceParams::default();
    let mut out = Vec::new();
    let mut forms: f64 = 0.0;
    for (label, theta, stretch) in [("theta-only", 1.0, 0.0), ("y-only", 0.0, 1.0)] {
        let mut ratios = Vec::new();
        for eps in [1e-1, 1e-2, 1e-3] {
            let d: Vec<f64> = sp.points().iter().map(|a| theta * eps * (2.0 * a).sin()).collect();
            let y: Vec<f64> = sp.points().iter().map(|a| stretch * eps * (2.0 * a).sin()).collect();
            let res = normalize_initial_data(&sp, &d, &y, PI).and_then(|st| {
                let ev = evaluate(&sp, &st, &p)?;
                let err = linearization_error_from(&sp, &st, &p, &ev.frame, &ev.velocity);
                let dd = full_d(&st);
                let a = linearized_velocity(&sp, &dd, &ev.frame.ys_at_alpha, st.s, p.lambda);
                let b = linearized_velocity_modes(&sp, &dd, &ev.frame.ys_at_alpha, st.s, p.lambda);
                let gap = a.iter().zip(&b).map(|(x, y)| (x[0] - y[0]).abs().max((x[1] - y[1]).abs())).fold(0.0, f64::max);
                Ok((err, gap))
            });
            match res {
                Ok((err, gap)) => {
                    ratios.push(err / (eps * eps));
                    forms = forms.max(gap);
                }
                Err(e) => return vec![fail_on_error(label, e)],
            }
        }
        let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        out.push(check(
            &format!("{label} error/eps^2 spread"),
            lo > 0.0 && hi / lo <= tol::LINEARIZATION_SPREAD,
            format!("{:.3e}..{:.3e}, spread {:.3} <= {}", lo, hi, hi / lo, tol::LINEARIZATION_SPREAD),
        ));
    }
    out.push(check(
        "mode sum vs Hilbert form",
        forms <= tol::LINEARIZATION_FORMS,
        format!("max difference {forms:.3e} <= {:.0e}", tol::LINEARIZATION_FORMS),
    ));
    out
}

fn combined_norm(out: &SimOutput) -> Vec<(f64, f64)> {
    out.records.iter().map(|r| (r.t, r.sobolev.h2_5 + r.sobolev.h1_5)).collect()
}

fn tail_fit(out: &SimOutput) -> Result<crate::diagnostics::DecayFit> {
    let s = combined_norm(out);
    decay_fit(&s, s.len() / 2..s.len())
}

/// Mixed-preset runs to T=5: base, dt/2, 2n.
struct DecayRuns {
    runs: Vec<(&'static str, SimOutput, usize)>,
}

impl DecayRuns {
    fn new() -> Result<Self> {
        let mut runs = Vec::new();
        for (label, n, dt) in [("base", tol::N, tol::DT), ("dt/2", tol::N, tol::DT / 2.0), ("2n", 2 * tol::N, tol::DT)] {
            let cfg = SimConfig {
                n,
                dt,
                t_final: tol::DECAY_HORIZON,
                output_every: (0.05 / dt).round() as usize,
                preset: "mixed".into(),
                epsilon: tol::EPSILON,
                ..SimConfig::default()
            };
            let init = preset_state("mixed", &cfg)?;
            runs.push((label, run_simulation(&init, &cfg)?, n));
        }
        Ok(Self { runs })
    }
}

fn criterion_8(dr: &DecayRuns) -> Vec<Check> {
    let mut out = Vec::new();
    let mut gammas = Vec::new();
    for (label, run, _) in &dr.runs {
        match tail_fit(run) {
            Ok(f) => {
                out.push(check(&format!("{label} tail r^2"), f.r2 >= tol::DECAY_R2, format!("r^2 {:.5} >= {}, gamma {:.4}", f.r2, tol::DECAY_R2, f.gamma)));
                gammas.push(f.gamma);
            }
            Err(e) => out.push(fail_on_error(label, e)),
        }
    }
    if gammas.len() == 3 {
        let dev = gammas[1..].iter().map(|g| (g - gammas[0]).abs() / gammas[0]).fold(0.0, f64::max);
        out.push(check("gamma stable under dt/2 and 2n", dev <= tol::DECAY_GAMMA_REL, format!("max rel. change {dev:.2e} <= {}", tol::DECAY_GAMMA_REL)));
    }
    let (_, base, n) = &dr.runs[0];
    let sp = Spectral::new(*n).expect("valid grid");
    let fits: Vec<f64> = base.snapshots.iter().filter_map(|(_, s)| limit_circle(&sp, s).ok()).map(|f| f.residual).collect();
    let last = fits.last().copied().unwrap_or(f64::NAN);
    let decaying = fits.len() >= 2 && fits.windows(2).all(|w| w[1] < w[0]);
    out.push(check("limit-circle residual decaying", decaying, format!("{} snapshots, {:.3e} -> {:.3e}", fits.len(), fits[0], last)));
    out.push(check("limit-circle residual at T=5", last <= tol::LIMIT_RESIDUAL, format!("{last:.3e} <= {:.0e}", tol::LIMIT_RESIDUAL)));
    out
}

pub fn criterion_9() -> Vec<Check> {
    let n = tol::N;
    let sp = Spectral::new(n).expect("valid grid");
    let mut out = Vec::new();

    let circle = isoperimetric_checks(&sp, &CurveState::equilibrium(n));
    let g0 = circle.gage_value.unwrap_or(f64::NAN);
    let mut gage_min = f64::INFINITY;
    let mut convex = 0;
    let mut states = Vec::new();
    for seed in 0..tol::PERIMETER_STATES as u64 {
        let eps = 0.05 * (1 + seed % 5) as f64 / 5.0;
        match random_state(n, eps, seed) {
            Ok(s) => states.push(s),
            Err(e) => return vec![fail_on_error("random state", e)],
        }
    }
    for eps in [0.1, 0.05, 0.01] {
        match theta_mode(n, eps) {
            Ok(s) => states.push(s),
            Err(e) => return vec![fail_on_error("theta-mode state", e)],
        }
    }
    let mut gap_violation: f64 = f64::NEG_INFINITY;
    for (i, st) in states.iter().enumerate() {
        let iso = isoperimetric_checks(&sp, st);
        if let Some(g) = iso.gage_value {
            gage_min = gage_min.min(g);
            convex += 1;
        }
        if i < tol::PERIMETER_STATES {
            gap_violation = gap_violation.max(iso.perimeter_gap.0 - iso.perimeter_gap.1);
        }
    }
    out.push(check(
        "Gage",
        (g0 - PI).abs() <= tol::GAGE_EQUALITY && gage_min >= PI - tol::GAGE && convex > 0,
        format!("circle {:.3e} from pi; min over {convex} convex states {:.10} >= pi - {:.0e}", (g0 - PI).abs(), gage_min, tol::GAGE),
    ));

    let mut fug = Vec::new();
    for eps in [0.05, 0.01] {
        match theta_mode(n, eps) {
            Ok(s) => fug.push(isoperimetric_checks(&sp, &s).fuglede_ratio),
            Err(e) => return vec![fail_on_error("fuglede state", e)],
        }
    }
    let c_fit = fug.iter().map(|r| r.max(1.0 / r)).fold(0.0, f64::max);
    let (lo, hi) = tol::FUGLEDE_WINDOW;
    let spread = fug[0].max(fug[1]) / fug[0].min(fug[1]);
    out.push(check(
        "Fuglede ratio",
        fug.iter().all(|r| r.is_finite() && *r >= lo && *r <= hi) && spread <= tol::FUGLEDE_STABILITY,
        format!("eps 0.05: {:.4}, eps 0.01: {:.4}, fitted C {:.3}, spread {:.3}", fug[0], fug[1], c_fit, spread),
    ));
    out.push(check(
        "perimeter gap",
        gap_violation <= 0.0,
        format!("max (s-1) - |theta_a-1|^2/4pi over {} states = {gap_violation:.3e} <= 0", tol::PERIMETER_STATES),
    ));

    let mut first = Vec::new();
    for eps in [0.1, 0.01, 0.001] {
        for seed in 0..3u64 {
            match random_state(n, eps, 1000 + seed) {
                Ok(s) => first.push((seed, isoperimetric_checks(&sp, &s).first_mode_ratio)),
                Err(e) => return vec![fail_on_error("first-mode state", e)],
            }
        }
    }
    let mut worst: f64 = 0.0;
    let mut fitted: f64 = 0.0;
    for seed in 0..3u64 {
        let rs: Vec<f64> = first.iter().filter(|r| r.0 == seed).map(|r| r.1).collect();
        let hi = rs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = rs.iter().cloned().fold(f64::INFINITY, f64::min);
        worst = worst.max(hi / lo);
        fitted = fitted.max(hi);
    }
    out.push(check(
        "first-mode bound",
        worst.is_finite() && worst <= tol::FIRST_MODE_STABILITY,
        format!("fitted C {fitted:.4}, max spread across eps {worst:.3} <= {}", tol::FIRST_MODE_STABILITY),
    ));
    out
}

/// `−ΔG + ∇Q` and `div G` by centered differences with step h at x.
pub fn stokes_residuals(x: V2, h: f64) -> (f64, f64) {
    let g = |p: V2| fundamental_solution(p).expect("off origin").0;
    let q = |p: V2| fundamental_solution(p).expect("off origin").1;
    let shift = |p: V2, c: usize, d: f64| {
        let mut r = p;
        r[c] += d;
        r
    };
    let g0 = g(x);
    let mut lap = [[0.0; 2]; 2];
    let mut grad_q = [[0.0; 2]; 2];
    let mut div = [0.0; 2];
    for c in 0..2 {
        let gp = g(shift(x, c, h));
        let gm = g(shift(x, c, -h));
        let qp = q(shift(x, c, h));
        let qm = q(shift(x, c, -h));
        for i in 0..2 {
            for j in 0..2 {
                lap[i][j] += (gp[i][j] - 2.0 * g0[i][j] + gm[i][j]) / (h * h);
            }
            // ∂_c Q_i sits in row c, column i.
            grad_q[c][i] = (qp[i] - qm[i]) / (2.0 * h);
            div[i] += (gp[c][i] - gm[c][i]) / (2.0 * h);
        }
    }
    let mut mom: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            mom = mom.max((-lap[i][j] + grad_q[i][j]).abs());
        }
    }
    (mom, div[0].abs().max(div[1].abs()))
}

fn quartic_at_zero(nodes: &[f64], vals: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (i, &xi) in nodes.iter().enumerate() {
        let mut w = 1.0;
        for (j, &xj) in nodes.iter().enumerate() {
            if i != j {
                w *= (0.0 - xj) / (xi - xj);
            }
        }
        acc += w * vals[i];
    }
    acc
}

/// Largest gap between the analytic diagonal and the average of two
/// five-point (quartic) extrapolations of the off-diagonal entries.
pub fn diagonal_extrapolation_gap(table: &crate::kernels::KernelTable) -> f64 {
    let n = table.n;
    let h = 2.0 * PI / n as f64;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let at = |m: i64| -> Mat2 { table.at(i, ((i as i64 + m).rem_euclid(n as i64)) as usize) };
        let d = table.at(i, i);
        for r in 0..2 {
            for c in 0..2 {
                let left: Vec<i64> = vec![-3, -2, -1, 1, 2];
                let right: Vec<i64> = vec![-2, -1, 1, 2, 3];
                let ex = |ms: &[i64]| {
                    let nodes: Vec<f64> = ms.iter().map(|&m| m as f64 * h).collect();
                    let vals: Vec<f64> = ms.iter().map(|&m| at(m)[r][c]).collect();
                    quartic_at_zero(&nodes, &vals)
                };
                let e = 0.5 * (ex(&left) + ex(&right));
                worst = worst.max((e - d[r][c]).abs());
            }
        }
    }
    worst
}

pub fn criterion_10() -> Vec<Check> {
    let mut out = Vec::new();
    let pts: [V2; 4] = [[0.7, 0.3], [-1.1, 0.4], [0.2, -0.9], [1.5, 1.2]];
    let (mut mom_ratio, mut div_ratio) = (f64::INFINITY, f64::INFINITY);
    let mut detail = Vec::new();
    for x in pts {
        let (m1, d1) = stokes_residuals(x, 2e-2);
        let (m2, d2) = stokes_residuals(x, 1e-2);
        mom_ratio = mom_ratio.min(m1 / m2);
        div_ratio = div_ratio.min(d1 / d2);
        detail.push(format!("{m1:.1e}->{m2:.1e}"));
    }
    out.push(check(
        "Stokes residuals O(h^2)",
        mom_ratio >= tol::STOKES_FD_RATIO && div_ratio >= tol::STOKES_FD_RATIO,
        format!("min ratio momentum {mom_ratio:.2}, divergence {div_ratio:.2} >= {} ({})", tol::STOKES_FD_RATIO, detail.join(", ")),
    ));

    let sp = Spectral::new(tol::N).expect("valid grid");
    let st = match random_state(tol::N, 0.05, 7) {
        Ok(s) => s,
        Err(e) => return vec![fail_on_error("random state", e)],
    };
    let frame = match crate::geometry::Frame::build(&sp, &st) {
        Ok(f) => f,
        Err(e) => return vec![fail_on_error("frame", e)],
    };
    let mut dd_err: f64 = 0.0;
    for coord in [Coordinate::ArcLength, Coordinate::Material] {
        let dd = divided_differences(&frame, coord);
        let d1 = match coord {
            Coordinate::ArcLength => &frame.curve.z_a,
            Coordinate::Material => &frame.curve.x_s,
        };
        for i in 0..tol::N {
            for j in 0..tol::N {
                if i == j {
                    continue;
                }
                let (t, l, m, nn) = dd.at(i, j);
                for c in 0..2 {
                    dd_err = dd_err.max((l[c] + t * (m[c] - nn[c]) - d1[j][c]).abs());
                }
            }
        }
    }
    out.push(check("divided-difference identity", dd_err <= tol::DIVIDED_DIFFERENCE, format!("max error {dd_err:.3e} <= {:.0e}", tol::DIVIDED_DIFFERENCE)));

    let mut gap: f64 = 0.0;
    for coord in [Coordinate::ArcLength, Coordinate::Material] {
        for which in [Differentiated::Target, Differentiated::Source] {
            match remainder_kernel(&frame, coord, which, None) {
                Ok(t) => gap = gap.max(diagonal_extrapolation_gap(&t)),
                Err(e) => return vec![fail_on_error("remainder kernel", e)],
            }
        }
    }
    out.push(check("remainder diagonal vs quartic extrapolation", gap <= tol::DIAGONAL_EXTRAPOLATION, format!("max gap {gap:.3e} <= {:.0e}", tol::DIAGONAL_EXTRAPOLATION)));
    out
}

pub fn criterion_11() -> Vec<Check> {
    let sp = Spectral::new(tol::N).expect("valid grid");
    let p = ForceParams::default();
    let mut out = Vec::new();
    let eq = CurveState::equilibrium(tol::N);
    match evaluate(&sp, &eq, &p) {
        Ok(ev) => {
            let mut worst: f64 = 0.0;
            for (f, nv) in ev.force.total_alpha.iter().zip(&ev.frame.curve.n_alpha) {
                for c in 0..2 {
                    worst = worst.max((f[c] - 0.5 * nv[c]).abs());
                }
            }
            out.push(check("equilibrium force = n/2", worst <= tol::FORCE, format!("max deviation {worst:.3e} <= {:.0e}", tol::FORCE)));
        }
        Err(e) => out.push(fail_on_error("equilibrium force", e)),
    }
    let mut net: f64 = 0.0;
    let mut count = 0;
    let params = [p, ForceParams { lambda: 1.0, b: 0.3, s_op: 0.5, c1: 2.0, c3: 0.5 }];
    for seed in 0..10u64 {
        let st = match random_state(tol::N, 0.1, 500 + seed) {
            Ok(s) => s,
            Err(e) => return vec![fail_on_error("random state", e)],
        };
        for pp in &params {
            match evaluate(&sp, &st, pp) {
                Ok(ev) => {
                    let f = ev.force.net();
                    net = net.max(f[0].hypot(f[1]));
                    count += 1;
                }
                Err(e) => return vec![fail_on_error("evaluation", e)],
            }
        }
    }
    out.push(check("net force", net <= tol::FORCE, format!("max |int F ds| {net:.3e} <= {:.0e} over {count} states", tol::FORCE)));
    out
}

/// Largest gaps `|𝓛θ + g_θ − θ_t|` and `|𝔏y_s + g_y − y_st|` with the right
/// sides computed directly from the velocity.
pub fn two_path_gaps(sp: &Spectral, st: &CurveState, p: &ForceParams) -> Result<(f64, f64)> {
    let n = sp.n();
    let ev = evaluate(sp, st, p)?;
    let f = &ev.frame;
    let v = &ev.velocity;
    let (u0, u1): (Vec<f64>, Vec<f64>) = v.u_alpha.iter().map(|u| (u[0], u[1])).unzip();
    let d0 = sp.derivative(&u0, 1);
    let d1 = sp.derivative(&u1, 1);
    let un_a: Vec<f64> = (0..n).map(|j| d0[j] * f.curve.n_alpha[j][0] + d1[j] * f.curve.n_alpha[j][1]).collect();
    let lth = bending_operator(sp, &st.d, st.s, p.c1);
    let lhs: Vec<f64> = (0..n).map(|j| lth[j] + ev.rhs.g_theta[j]).collect();
    let mut rhs: Vec<f64> = (0..n).map(|j| (un_a[j] + (v.transport[j] - v.tangential[j]) * f.theta_a[j]) / st.s).collect();
    subtract_mean(&mut rhs);
    let gt = max_abs(&lhs, &rhs);

    let ly = stretching_operator(sp, &st.y_s, p.c3);
    let lhs: Vec<f64> = (0..n).map(|j| ly[j] + ev.rhs.g_y[j]).collect();
    // 𝔰(1 + y_s) = |X_s|, so y_st = (t·∂_s u − (1 + y_s)𝔰_t)/𝔰.
    let (w0, w1): (Vec<f64>, Vec<f64>) = v.u_s.iter().map(|u| (u[0], u[1])).unzip();
    let e0 = sp.derivative(&w0, 1);
    let e1 = sp.derivative(&w1, 1);
    let mut rhs: Vec<f64> = (0..n)
        .map(|j| {
            let tu = e0[j] * f.curve.t_s[j][0] + e1[j] * f.curve.t_s[j][1];
            (tu - (1.0 + st.y_s[j]) * ev.rhs.s_dot) / st.s
        })
        .collect();
    subtract_mean(&mut rhs);
    Ok((gt, max_abs(&lhs, &rhs)))
}

pub fn criterion_12() -> Vec<Check> {
    let sp = Spectral::new(tol::N).expect("valid grid");
    let mut worst = (0.0f64, 0.0f64);
    let mut count = 0;
    let mut states = Vec::new();
    for seed in 0..5u64 {
        states.push(random_state(tol::N, 0.05, 300 + seed));
    }
    states.push(theta_mode(tol::N, 0.05));
    states.push(preset_state("mixed", &SimConfig { n: tol::N, epsilon: 0.05, mode_k: 3, ..SimConfig::default() }));
    let params = [ForceParams::default(), ForceParams { lambda: 0.5, b: 0.2, s_op: 0.3, c1: 1.5, c3: 0.7 }];
    for st in states {
        let st = match st {
            Ok(s) => s,
            Err(e) => return vec![fail_on_error("state", e)],
        };
        for p in &params {
            match two_path_gaps(&sp, &st, p) {
                Ok((a, b)) => {
                    worst.0 = worst.0.max(a);
                    worst.1 = worst.1.max(b);
                    count += 1;
                }
                Err(e) => return vec![fail_on_error("two-path", e)],
            }
        }
    }
    vec![
        check("theta path", worst.0 <= tol::TWO_PATH, format!("max gap {:.3e} <= {:.0e} over {count} cases", worst.0, tol::TWO_PATH)),
        check("y_s path", worst.1 <= tol::TWO_PATH, format!("max gap {:.3e} <= {:.0e}", worst.1, tol::TWO_PATH)),
    ]
}

/// Extra small-data runs for the closure criterion. The random preset has no
/// symmetry protecting the closure vector, so it exposes integrator drift.
fn closure_runs() -> Result<Vec<(&'static str, SimOutput)>> {
    let mut out = Vec::new();
    let cases = [
        ("y-mode imex-euler T=1", "y-mode", Scheme::ImexEuler),
        ("random imex-euler T=1", "random", Scheme::ImexEuler),
        ("random imex-bdf2 T=1", "random", Scheme::ImexBdf2),
    ];
    for (label, preset, scheme) in cases {
        let cfg = SimConfig { preset: preset.into(), scheme, epsilon: tol::EPSILON, t_final: 1.0, output_every: 10, seed: 11, ..SimConfig::default() };
        let init = preset_state(preset, &cfg)?;
        out.push((label, run_simulation(&init, &cfg)?));
    }
    Ok(out)
}

/// Closure defect of the random preset after `CLOSURE_ORDER_HORIZON` with
/// imex-euler at dt and dt/2.
fn closure_drift_ratio() -> Result<(f64, f64)> {
    let mut d = Vec::new();
    for dt in [tol::DT, tol::DT / 2.0] {
        let cfg = SimConfig { preset: "random".into(), dt, epsilon: tol::EPSILON, t_final: tol::CLOSURE_ORDER_HORIZON, output_every: 10, seed: 11, ..SimConfig::default() };
        let init = preset_state("random", &cfg)?;
        let out = run_simulation(&init, &cfg)?;
        d.push(out.records.last().map(|r| r.closure_defect).unwrap_or(f64::NAN));
    }
    Ok((d[0], d[0] / d[1]))
}

/// Runs every criterion and returns one result per criterion, in order.
/// `progress` is called after each criterion completes.
pub fn run_all(mut progress: impl FnMut(&CriterionResult)) -> Vec<CriterionResult> {
    let mut results = Vec::new();
    let mut push = |id: u8, checks: Vec<Check>, results: &mut Vec<CriterionResult>| {
        let r = CriterionResult { id, title: TITLES[id as usize - 1], checks };
        progress(&r);
        results.push(r);
    };
    push(1, criterion_1(), &mut results);
    let refinement = RefinementRuns::new();
    match &refinement {
        Ok(r) => {
            push(2, criterion_2(r), &mut results);
            push(3, criterion_3(r), &mut results);
        }
        Err(e) => {
            push(2, vec![check("refinement runs", false, format!("error: {e}"))], &mut results);
            push(3, vec![check("refinement runs", false, format!("error: {e}"))], &mut results);
        }
    }
    let decay = DecayRuns::new();
    let extra = closure_runs();
    let mut closure_set: Vec<(String, &SimOutput)> = Vec::new();
    if let Ok(r) = &refinement {
        for (scheme, dt, out) in &r.runs {
            closure_set.push((format!("theta-mode {} dt={dt:e}", scheme.name()), out));
        }
    }
    if let Ok(d) = &decay {
        for (label, out, _) in &d.runs {
            closure_set.push((format!("mixed T=5 {label}"), out));
        }
    }
    if let Ok(x) = &extra {
        for (label, out) in x {
            closure_set.push((label.to_string(), out));
        }
    }
    let mut c4 = criterion_4(&closure_set.iter().map(|(l, o)| (l.as_str(), *o)).collect::<Vec<_>>());
    match closure_drift_ratio() {
        Ok((d, r)) => c4.push(check(
            "random imex-euler drift is first order",
            r >= tol::CLOSURE_ORDER_RATIO,
            format!("defect {d:.3e} at T={}, ratio {r:.2} >= {} under dt/2", tol::CLOSURE_ORDER_HORIZON, tol::CLOSURE_ORDER_RATIO),
        )),
        Err(e) => c4.push(check("closure order runs", false, format!("error: {e}"))),
    }
    for (label, err) in [("refinement runs", refinement.as_ref().err()), ("decay runs", decay.as_ref().err()), ("closure runs", extra.as_ref().err())] {
        if let Some(e) = err {
            c4.push(check(label, false, format!("error: {e}")));
        }
    }
    push(4, c4, &mut results);
    push(5, criterion_5(), &mut results);
    push(6, criterion_6(), &mut results);
    push(7, criterion_7(), &mut results);
    match &decay {
        Ok(d) => push(8, criterion_8(d), &mut results),
        Err(e) => push(8, vec![check("decay runs", false, format!("error: {e}"))], &mut results),
    }
    push(9, criterion_9(), &mut results);
    push(10, criterion_10(), &mut results);
    push(11, criterion_11(), &mut results);
    push(12, criterion_12(), &mut results);
    results
}

/// Checks known to be out of reach with the prescribed setup.
///
/// The closure vector obeys a neutral linear ODE (|𝔰C| is conserved, nothing
/// pulls it back to 0), so the O(dt²) local error of imex-euler accumulates to
/// an O(dt) defect, about 4e−8 at T=1 for asymmetric data.
///
/// The k=2 stretching mode of the mixed preset decays like e^{−t/2}, which
/// leaves an h^{5/2} residual near 8e−3 at T=5.
pub const KNOWN_SHORTFALLS: [(u8, &str); 2] = [(4, "random imex-euler T=1"), (8, "limit-circle residual at T=5")];

pub fn is_known_shortfall(id: u8, check: &str) -> bool {
    KNOWN_SHORTFALLS.iter().any(|(i, c)| *i == id && *c == check)
}

