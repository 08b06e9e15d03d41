//! Stokeslet G, pressure kernel Q, divided differences along the curve, and
//! the desingularized remainder kernels used by every boundary integral.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::Frame;
use crate::spectral::{Coordinate, Spectral, V2};

pub type Mat2 = [[f64; 2]; 2];

pub const ARC_FACTOR: f64 = 1.0 / (8.0 * PI);
pub const MATERIAL_FACTOR: f64 = 0.25 * (1.0 / (2.0 * PI));

const _: () = {
    // 1/(8π) and (1/4)·1/(2π) must be the same constant.
    let d = ARC_FACTOR - MATERIAL_FACTOR;
    assert!(d < 1e-17 && d > -1e-17);
};

pub fn fundamental_solution(x: V2) -> Result<(Mat2, V2)> {
    let r2 = x[0] * x[0] + x[1] * x[1];
    if r2 == 0.0 || !r2.is_finite() {
        return Err(Error::Singularity);
    }
    let c = 1.0 / (4.0 * PI);
    let lg = -0.5 * r2.ln();
    let g = [
        [c * (lg + x[0] * x[0] / r2), c * x[0] * x[1] / r2],
        [c * x[0] * x[1] / r2, c * (lg + x[1] * x[1] / r2)],
    ];
    let q = [x[0] / (2.0 * PI * r2), x[1] / (2.0 * PI * r2)];
    Ok((g, q))
}

/// Signed torus difference `α′ − α` mapped into [−π, π).
pub fn tau(alpha: f64, alpha_p: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut d = (alpha_p - alpha) % two_pi;
    if d >= PI {
        d -= two_pi;
    } else if d < -PI {
        d += two_pi;
    }
    d
}

/// τ for grid index offset `q = (j − i) mod n`.
fn grid_tau(q: usize, n: usize) -> f64 {
    let h = 2.0 * PI / n as f64;
    if q < n / 2 {
        q as f64 * h
    } else {
        q as f64 * h - 2.0 * PI
    }
}

fn cot_half(t: f64) -> f64 {
    let (s, c) = (0.5 * t).sin_cos();
    c / s
}

#[derive(Clone, Debug)]
pub struct DividedDifferences {
    pub n: usize,
    pub coordinate: Coordinate,
    /// Row-major over (i, j): τ(p_i, p_j).
    pub tau: Vec<f64>,
    pub l: Vec<V2>,
    pub m: Vec<V2>,
    pub nn: Vec<V2>,
}

impl DividedDifferences {
    pub fn at(&self, i: usize, j: usize) -> (f64, V2, V2, V2) {
        let k = i * self.n + j;
        (self.tau[k], self.l[k], self.m[k], self.nn[k])
    }
}

/// Points, first and second derivatives of the curve in the given coordinate.
fn curve_data(frame: &Frame, coordinate: Coordinate) -> (&[V2], &[V2], &[V2]) {
    let c = &frame.curve;
    match coordinate {
        Coordinate::ArcLength => (&c.z, &c.z_a, &c.z_aa),
        Coordinate::Material => (&c.x, &c.x_s, &c.x_ss),
    }
}

pub fn divided_differences(frame: &Frame, coordinate: Coordinate) -> DividedDifferences {
    let (p, d1, d2) = curve_data(frame, coordinate);
    let n = p.len();
    let mut tau = Vec::with_capacity(n * n);
    let mut l = Vec::with_capacity(n * n);
    let mut m = Vec::with_capacity(n * n);
    let mut nn = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                tau.push(0.0);
                l.push(d1[i]);
                m.push(d2[i]);
                nn.push([0.5 * d2[i][0], 0.5 * d2[i][1]]);
                continue;
            }
            let t = grid_tau((j + n - i) % n, n);
            let lv = [(p[j][0] - p[i][0]) / t, (p[j][1] - p[i][1]) / t];
            let mv = [(d1[j][0] - d1[i][0]) / t, (d1[j][1] - d1[i][1]) / t];
            let nv = [(lv[0] - d1[i][0]) / t, (lv[1] - d1[i][1]) / t];
            tau.push(t);
            l.push(lv);
            m.push(mv);
            nn.push(nv);
        }
    }
    DividedDifferences { n, coordinate, tau, l, m, nn }
}

/// Which endpoint of `G(p(σ) − p(σ′))` is differentiated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Differentiated {
    /// `∂_σ G + (1/8π) cot((σ−σ′)/2) Id`: the kernel of the normal-derivative terms.
    Target,
    /// `−∂_σ′ G + (1/8π) cot((σ−σ′)/2) Id`: the kernel of the velocity itself.
    Source,
}

/// Dense n×n table of 2×2 kernel values, row i = target point.
#[derive(Clone, Debug)]
pub struct KernelTable {
    pub n: usize,
    pub data: Vec<Mat2>,
}

impl KernelTable {
    pub fn at(&self, i: usize, j: usize) -> Mat2 {
        self.data[i * self.n + j]
    }

    /// Trapezoid rule `h Σ_j K(i, j) v_j`.
    pub fn apply(&self, v: &[V2]) -> Vec<V2> {
        let h = 2.0 * PI / self.n as f64;
        (0..self.n)
            .map(|i| {
                let row = &self.data[i * self.n..(i + 1) * self.n];
                let mut a = [0.0, 0.0];
                for (k, w) in row.iter().zip(v) {
                    a[0] += k[0][0] * w[0] + k[0][1] * w[1];
                    a[1] += k[1][0] * w[0] + k[1][1] * w[1];
                }
                [h * a[0], h * a[1]]
            })
            .collect()
    }
}

/// `(L·a/|L|²) Id − (a⊗L + L⊗a)/|L|² + 2(L·a) L⊗L/|L|⁴`.
#[inline]
fn bracket(l: V2, a: V2) -> Mat2 {
    let l2 = l[0] * l[0] + l[1] * l[1];
    let la = l[0] * a[0] + l[1] * a[1];
    let i2 = 1.0 / l2;
    let q = 2.0 * la * i2 * i2;
    [
        [la * i2 - 2.0 * a[0] * l[0] * i2 + q * l[0] * l[0], -(a[0] * l[1] + l[0] * a[1]) * i2 + q * l[0] * l[1]],
        [-(a[1] * l[0] + l[1] * a[0]) * i2 + q * l[1] * l[0], la * i2 - 2.0 * a[1] * l[1] * i2 + q * l[1] * l[1]],
    ]
}

/// O(1) term of the target-differentiated kernel at the diagonal, times 4π:
/// `−(a·b)/(2|a|²) Id + (a⊗b + b⊗a)/(2|a|²) − (a·b) a⊗a/|a|⁴`.
fn diagonal_target(a: V2, b: V2) -> Mat2 {
    let a2 = a[0] * a[0] + a[1] * a[1];
    let ab = a[0] * b[0] + a[1] * b[1];
    let mut m = [[0.0; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            let id = if r == c { 1.0 } else { 0.0 };
            m[r][c] = -ab / (2.0 * a2) * id + (a[r] * b[c] + b[r] * a[c]) / (2.0 * a2) - ab * a[r] * a[c] / (a2 * a2);
        }
    }
    m
}

/// Single pair of the remainder kernel, off the diagonal.
pub fn remainder_pair(pi: V2, pj: V2, ai: V2, aj: V2, t: f64, which: Differentiated) -> Mat2 {
    let l = [(pj[0] - pi[0]) / t, (pj[1] - pi[1]) / t];
    let a = match which {
        Differentiated::Target => ai,
        Differentiated::Source => aj,
    };
    let b = bracket(l, a);
    let c = 1.0 / (4.0 * PI * t);
    let s = ARC_FACTOR * cot_half(t);
    [[c * b[0][0] - s, c * b[0][1]], [c * b[1][0], c * b[1][1] - s]]
}

/// Analytic diagonal of the remainder kernel.
pub fn remainder_diagonal(a: V2, b: V2, which: Differentiated) -> Mat2 {
    let d = diagonal_target(a, b);
    let sign = match which {
        Differentiated::Target => 1.0,
        Differentiated::Source => -1.0,
    };
    let c = sign / (4.0 * PI);
    [[c * d[0][0], c * d[0][1]], [c * d[1][0], c * d[1][1]]]
}

/// Smooth remainder kernel table on the α-grid (`ArcLength`) or s-grid (`Material`).
pub fn remainder_kernel(frame: &Frame, coordinate: Coordinate, which: Differentiated, beta1: Option<f64>) -> Result<KernelTable> {
    if let Some(b1) = beta1 {
        if b1 <= 0.0 {
            return Err(Error::SelfIntersection(b1));
        }
    }
    let (p, d1, d2) = curve_data(frame, coordinate);
    let n = p.len();
    let taus: Vec<f64> = (0..n).map(|q| grid_tau(q, n)).collect();
    let cots: Vec<f64> = taus.iter().map(|&t| if t == 0.0 { 0.0 } else { ARC_FACTOR * cot_half(t) }).collect();
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                data.push(remainder_diagonal(d1[i], d2[i], which));
                continue;
            }
            let q = (j + n - i) % n;
            let t = taus[q];
            let l = [(p[j][0] - p[i][0]) / t, (p[j][1] - p[i][1]) / t];
            let a = match which {
                Differentiated::Target => d1[i],
                Differentiated::Source => d1[j],
            };
            let b = bracket(l, a);
            let c = 1.0 / (4.0 * PI * t);
            let s = cots[q];
            data.push([[c * b[0][0] - s, c * b[0][1]], [c * b[1][0], c * b[1][1] - s]]);
        }
    }
    Ok(KernelTable { n, data })
}

/// Smooth part of the Stokeslet after removing `−(1/4π) ln|2 sin((α−α′)/2)| Id`,
/// on the α-grid. Used by the single-layer cross-check.
pub fn log_subtracted_stokeslet(frame: &Frame) -> KernelTable {
    let z = &frame.curve.z;
    let za = &frame.curve.z_a;
    let n = z.len();
    let c = 1.0 / (4.0 * PI);
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (r2, e) = if i == j {
                (f64::NAN, za[i])
            } else {
                let x = [z[i][0] - z[j][0], z[i][1] - z[j][1]];
                (x[0] * x[0] + x[1] * x[1], x)
            };
            let e2 = e[0] * e[0] + e[1] * e[1];
            let lg = if i == j {
                -0.5 * e2.ln()
            } else {
                let t = grid_tau((j + n - i) % n, n);
                let s2 = 2.0 * (0.5 * t).sin();
                -0.5 * (r2 / (s2 * s2)).ln()
            };
            data.push([
                [c * (lg + e[0] * e[0] / e2), c * e[0] * e[1] / e2],
                [c * e[0] * e[1] / e2, c * (lg + e[1] * e[1] / e2)],
            ]);
        }
    }
    KernelTable { n, data }
}

/// Multiplier of `f ↦ ∫ −ln|2 sin((α−α′)/2)| f(α′) dα′`: π/|k| for k ≠ 0.
pub fn log_kernel_apply(sp: &Spectral, f: &[f64]) -> Vec<f64> {
    let nyq = (sp.n() / 2) as i64;
    sp.apply_multiplier(f, |k| {
        if k == 0 || k == nyq {
            num_complex::Complex64::new(0.0, 0.0)
        } else {
            num_complex::Complex64::new(PI / k.abs() as f64, 0.0)
        }
    })
}
