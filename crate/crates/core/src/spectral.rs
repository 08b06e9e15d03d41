//! Periodic pseudo-spectral primitives on the grid `-π + j·2π/n`.
//!
//! Fourier modes are reported with the true phase of that grid, so `c_k` is
//! the coefficient of `e^{ikα}` and `c_0` is the sample mean. Multipliers act
//! on the raw FFT, where the phase cancels.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub type V2 = [f64; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coordinate {
    ArcLength,
    Material,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PeriodicGrid {
    pub n: usize,
    pub coordinate: Coordinate,
}

impl PeriodicGrid {
    pub fn new(n: usize, coordinate: Coordinate) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidArgument(format!("grid size must be even and >= 4, got {n}")));
        }
        Ok(Self { n, coordinate })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        -PI + j as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.point(j)).collect()
    }
}

/// A real periodic field sampled on a [`PeriodicGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    pub grid: PeriodicGrid,
    pub samples: Vec<f64>,
}

impl SpectralField {
    pub fn new(grid: PeriodicGrid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.n {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                grid.n,
                samples.len()
            )));
        }
        Ok(Self { grid, samples })
    }

    pub fn from_fn(grid: PeriodicGrid, f: impl Fn(f64) -> f64) -> Self {
        let samples = grid.points().into_iter().map(f).collect();
        Self { grid, samples }
    }

    pub fn modes(&self, sp: &Spectral) -> Vec<Complex64> {
        sp.forward(&self.samples)
    }

    pub fn mean(&self) -> f64 {
        mean(&self.samples)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Samples and modes of the same field; `spectral_transform` moves between them.
#[derive(Clone, Debug, PartialEq)]
pub enum Representation {
    Samples(Vec<f64>),
    Modes(Vec<Complex64>),
}

pub fn spectral_transform(sp: &Spectral, field: &Representation, direction: Direction) -> Result<Representation> {
    match (field, direction) {
        (Representation::Samples(s), Direction::Forward) => Ok(Representation::Modes(sp.forward(s))),
        (Representation::Modes(m), Direction::Inverse) => Ok(Representation::Samples(sp.inverse(m))),
        _ => Err(Error::InvalidArgument("transform direction does not match representation".into())),
    }
}

pub fn mean(f: &[f64]) -> f64 {
    pairwise_sum(f) / f.len() as f64
}

/// Pairwise summation with a fixed split order.
pub fn pairwise_sum(f: &[f64]) -> f64 {
    if f.len() <= 16 {
        return f.iter().sum();
    }
    let mid = f.len() / 2;
    pairwise_sum(&f[..mid]) + pairwise_sum(&f[mid..])
}

/// Trapezoid rule over one period.
pub fn integrate(f: &[f64]) -> f64 {
    pairwise_sum(f) * 2.0 * PI / f.len() as f64
}

pub fn integrate_v2(f: &[V2]) -> V2 {
    let a: Vec<f64> = f.iter().map(|v| v[0]).collect();
    let b: Vec<f64> = f.iter().map(|v| v[1]).collect();
    [integrate(&a), integrate(&b)]
}

pub fn subtract_mean(f: &mut [f64]) -> f64 {
    let m = mean(f);
    for v in f.iter_mut() {
        *v -= m;
    }
    m
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LinearOperator {
    /// `c₁ ℋ(∂³)/(4𝔰³)`, symbol `−c₁|k|³/(4𝔰³)`.
    Bending { s: f64, c1: f64 },
    /// `−c₃ 𝔥(∂²)/4` acting on y_s, symbol `−c₃|k|/4`.
    Stretching { c3: f64 },
}

impl LinearOperator {
    pub fn bending(s: f64) -> Self {
        LinearOperator::Bending { s, c1: 1.0 }
    }

    pub fn stretching() -> Self {
        LinearOperator::Stretching { c3: 1.0 }
    }

    /// Decay rate `σ_k ≥ 0`; the operator multiplies mode k by `−σ_k`.
    pub fn rate(&self, k: i64) -> f64 {
        let ak = k.unsigned_abs() as f64;
        match *self {
            LinearOperator::Bending { s, c1 } => c1 * ak * ak * ak / (4.0 * s * s * s),
            LinearOperator::Stretching { c3 } => c3 * ak / 4.0,
        }
    }

    fn validate(&self, dt: f64) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        if let LinearOperator::Bending { s, .. } = *self {
            if !(s > 0.0) {
                return Err(Error::InvalidArgument(format!("perimeter must be positive, got {s}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Resolvent {
    BackwardEuler,
    Bdf2,
}

/// Scalar factor the implicit solve applies to mode k.
pub fn resolvent_factor(op: LinearOperator, k: i64, dt: f64, kind: Resolvent) -> f64 {
    let r = op.rate(k);
    match kind {
        Resolvent::BackwardEuler => 1.0 / (1.0 + dt * r),
        Resolvent::Bdf2 => 1.0 / (1.0 + 2.0 / 3.0 * dt * r),
    }
}

/// Backward-Euler (or BDF2) resolvent applied to modes in FFT order.
pub fn implicit_linear_step(modes: &[Complex64], dt: f64, op: LinearOperator, kind: Resolvent) -> Result<Vec<Complex64>> {
    op.validate(dt)?;
    let n = modes.len();
    Ok(modes
        .iter()
        .enumerate()
        .map(|(j, c)| c * resolvent_factor(op, wavenumber(j, n), dt, kind))
        .collect())
}

pub fn wavenumber(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// FFT plans and grid data for one grid size.
pub struct Spectral {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    m: usize,
    pad_fwd: Arc<dyn Fft<f64>>,
    pad_inv: Arc<dyn Fft<f64>>,
    points: Vec<f64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("n", &self.n).finish()
    }
}

impl Spectral {
    pub fn new(n: usize) -> Result<Self> {
        let grid = PeriodicGrid::new(n, Coordinate::ArcLength)?;
        let mut planner = FftPlanner::new();
        let m = 3 * n / 2;
        Ok(Self {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            m,
            pad_fwd: planner.plan_fft_forward(m),
            pad_inv: planner.plan_fft_inverse(m),
            points: grid.points(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn grid(&self, coordinate: Coordinate) -> PeriodicGrid {
        PeriodicGrid { n: self.n, coordinate }
    }

    fn raw_forward(&self, f: &[f64]) -> Vec<Complex64> {
        assert_eq!(f.len(), self.n, "field length does not match the grid");
        let mut buf: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf
    }

    fn raw_inverse(&self, mut buf: Vec<Complex64>) -> Vec<f64> {
        self.inv.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    /// Modes `c_k` (FFT order) with `f(α_j) = Σ c_k e^{ikα_j}`.
    pub fn forward(&self, f: &[f64]) -> Vec<Complex64> {
        let scale = 1.0 / self.n as f64;
        let mut c = self.raw_forward(f);
        for (j, v) in c.iter_mut().enumerate() {
            let sign = if wavenumber(j, self.n) % 2 == 0 { 1.0 } else { -1.0 };
            *v *= sign * scale;
        }
        c
    }

    pub fn inverse(&self, modes: &[Complex64]) -> Vec<f64> {
        assert_eq!(modes.len(), self.n, "mode count does not match the grid");
        let buf: Vec<Complex64> = modes
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let sign = if wavenumber(j, self.n) % 2 == 0 { 1.0 } else { -1.0 };
                c * (sign * self.n as f64)
            })
            .collect();
        self.raw_inverse(buf)
    }

    pub fn apply_multiplier(&self, f: &[f64], mult: impl Fn(i64) -> Complex64) -> Vec<f64> {
        let mut c = self.raw_forward(f);
        for (j, v) in c.iter_mut().enumerate() {
            *v *= mult(wavenumber(j, self.n));
        }
        self.raw_inverse(c)
    }

    pub fn derivative(&self, f: &[f64], order: u32) -> Vec<f64> {
        let nyq = (self.n / 2) as i64;
        self.apply_multiplier(f, |k| {
            if order == 0 {
                return Complex64::new(1.0, 0.0);
            }
            if k == 0 || (k == nyq && order % 2 == 1) {
                return Complex64::new(0.0, 0.0);
            }
            Complex64::new(0.0, k as f64).powu(order)
        })
    }

    /// Hilbert transform, symbol `−i·sgn(k)`; the mean and the Nyquist mode map to 0.
    pub fn hilbert(&self, f: &[f64]) -> Vec<f64> {
        let nyq = (self.n / 2) as i64;
        self.apply_multiplier(f, |k| {
            if k == 0 || k == nyq {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -(k.signum() as f64))
            }
        })
    }

    /// Periodic antiderivative of the mean-free part, pinned to 0 at α = −π.
    pub fn antiderivative(&self, f: &[f64]) -> Vec<f64> {
        let nyq = (self.n / 2) as i64;
        let mut p = self.apply_multiplier(f, |k| {
            if k == 0 || k == nyq {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -1.0 / k as f64)
            }
        });
        let p0 = p[0];
        for v in p.iter_mut() {
            *v -= p0;
        }
        p
    }

    /// `∫_{−π}^{α_j} f`.
    pub fn cumulative_integral(&self, f: &[f64]) -> Vec<f64> {
        let m = mean(f);
        let mut p = self.antiderivative(f);
        for (v, a) in p.iter_mut().zip(&self.points) {
            *v += m * (a + PI);
        }
        p
    }

    /// Product without aliasing: both factors are evaluated on a 3n/2 grid,
    /// multiplied, and truncated back to |k| < n/2.
    pub fn dealiased_product(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let pa = self.pad(a);
        let pb = self.pad(b);
        let prod: Vec<f64> = pa.iter().zip(&pb).map(|(x, y)| x * y).collect();
        self.unpad(&prod)
    }

    fn pad(&self, f: &[f64]) -> Vec<f64> {
        let n = self.n;
        let c = self.raw_forward(f);
        let mut buf = vec![Complex64::new(0.0, 0.0); self.m];
        for j in 0..n {
            let k = wavenumber(j, n);
            if k.unsigned_abs() as usize == n / 2 {
                continue;
            }
            let idx = if k >= 0 { k as usize } else { (self.m as i64 + k) as usize };
            buf[idx] = c[j];
        }
        self.pad_inv.process(&mut buf);
        buf.iter().map(|v| v.re / n as f64).collect()
    }

    fn unpad(&self, g: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut buf: Vec<Complex64> = g.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.pad_fwd.process(&mut buf);
        let scale = n as f64 / self.m as f64;
        let mut c = vec![Complex64::new(0.0, 0.0); n];
        for (j, slot) in c.iter_mut().enumerate() {
            let k = wavenumber(j, n);
            if k.unsigned_abs() as usize == n / 2 {
                continue;
            }
            let idx = if k >= 0 { k as usize } else { (self.m as i64 + k) as usize };
            *slot = buf[idx] * scale;
        }
        self.raw_inverse(c)
    }

    /// `[ℋ, ψ] f = ℋ(ψf) − ψℋ(f)`.
    pub fn hilbert_commutator(&self, psi: &[f64], f: &[f64]) -> Vec<f64> {
        let a = self.hilbert(&self.dealiased_product(psi, f));
        let hf = self.hilbert(f);
        let b = self.dealiased_product(psi, &hf);
        a.iter().zip(&b).map(|(x, y)| x - y).collect()
    }

    /// `n·[ℋ, n] f` style contraction for a vector multiplier `w` and director `d`:
    /// returns `d·[ℋ, w] f`.
    pub fn projected_commutator(&self, d: &[V2], w: &[V2], f: &[f64]) -> Vec<f64> {
        let (w0, w1) = split(w);
        let c0 = self.hilbert_commutator(&w0, f);
        let c1 = self.hilbert_commutator(&w1, f);
        d.iter().zip(c0.iter().zip(&c1)).map(|(d, (a, b))| d[0] * a + d[1] * b).collect()
    }

    pub fn hilbert_v2(&self, f: &[V2]) -> Vec<V2> {
        let (a, b) = split(f);
        join(&self.hilbert(&a), &self.hilbert(&b))
    }

    /// Zero every mode with |k| > n/3.
    pub fn two_thirds_filter(&self, f: &[f64]) -> Vec<f64> {
        let cut = self.n as i64 / 3;
        self.apply_multiplier(f, |k| {
            if k.abs() > cut {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
    }

    /// `sqrt(2π Σ_{k≠0} |k|^{2γ} |c_k|²)`.
    pub fn sobolev_seminorm(&self, f: &[f64], gamma: f64) -> f64 {
        let c = self.forward(f);
        let mut terms: Vec<f64> = c
            .iter()
            .enumerate()
            .filter_map(|(j, v)| {
                let k = wavenumber(j, self.n);
                (k != 0).then(|| (k.unsigned_abs() as f64).powf(2.0 * gamma) * v.norm_sqr())
            })
            .collect();
        terms.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        (2.0 * PI * pairwise_sum(&terms)).sqrt()
    }

    /// Evaluation matrix of the trigonometric interpolant at arbitrary points.
    pub fn interpolator(&self, targets: &[f64]) -> Interpolator {
        Interpolator::new(self.n, targets)
    }

    pub fn series(&self, f: &[f64]) -> TrigSeries {
        TrigSeries::new(self, f)
    }
}

pub fn split(f: &[V2]) -> (Vec<f64>, Vec<f64>) {
    (f.iter().map(|v| v[0]).collect(), f.iter().map(|v| v[1]).collect())
}

pub fn join(a: &[f64], b: &[f64]) -> Vec<V2> {
    a.iter().zip(b).map(|(x, y)| [*x, *y]).collect()
}

/// Dense cardinal-function matrix: row i evaluates the band-limited
/// interpolant (Nyquist mode as a cosine) at `targets[i]`.
#[derive(Clone, Debug)]
pub struct Interpolator {
    n: usize,
    rows: usize,
    w: Vec<f64>,
}

impl Interpolator {
    pub fn new(n: usize, targets: &[f64]) -> Self {
        let h = 2.0 * PI / n as f64;
        let half: Vec<(f64, f64)> = (0..n)
            .map(|m| {
                let a = (-PI + m as f64 * h) / 2.0;
                (a.sin(), a.cos())
            })
            .collect();
        let nf = n as f64;
        let mut w = Vec::with_capacity(targets.len() * n);
        for &x in targets {
            let num = (nf * (x + PI) / 2.0).sin();
            let (sx, cx) = (x / 2.0).sin_cos();
            for (m, &(sa, ca)) in half.iter().enumerate() {
                let sd = sx * ca - cx * sa;
                let v = if sd.abs() > 1e-3 {
                    let cd = cx * ca + sx * sa;
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    sign * num * cd / (nf * sd)
                } else {
                    let d = x - (-PI + m as f64 * h);
                    if d == 0.0 {
                        1.0
                    } else {
                        (nf * d / 2.0).sin() / (nf * (d / 2.0).tan())
                    }
                };
                w.push(v);
            }
        }
        Self { n, rows: targets.len(), w }
    }

    pub fn eval(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.n);
        (0..self.rows)
            .map(|i| {
                let row = &self.w[i * self.n..(i + 1) * self.n];
                row.iter().zip(f).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    pub fn eval_v2(&self, f: &[V2]) -> Vec<V2> {
        let (a, b) = split(f);
        join(&self.eval(&a), &self.eval(&b))
    }
}

/// Fourier series of a real field, evaluated pointwise by recurrence.
#[derive(Clone, Debug)]
pub struct TrigSeries {
    c: Vec<Complex64>,
}

impl TrigSeries {
    pub fn new(sp: &Spectral, f: &[f64]) -> Self {
        let all = sp.forward(f);
        Self { c: all[..=sp.n / 2].to_vec() }
    }

    /// Value and first derivative at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let nyq = self.c.len() - 1;
        let step = Complex64::from_polar(1.0, x);
        let mut e = step;
        let mut v = self.c[0].re;
        let mut d = 0.0;
        for k in 1..nyq {
            let t = self.c[k] * e;
            v += 2.0 * t.re;
            d -= 2.0 * k as f64 * t.im;
            e *= step;
        }
        let kn = nyq as f64;
        v += self.c[nyq].re * (kn * x).cos();
        d -= kn * self.c[nyq].re * (kn * x).sin();
        (v, d)
    }
}
