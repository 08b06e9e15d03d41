//! Force density, boundary velocity, tangential reparametrization velocity 𝒯,
//! and the decomposed normal-derivative term.
//!
//! The velocity is evaluated from the integrated-by-parts form
//! `u = ∫ −∂_{α′}G(z(α) − z(α′))·A(α′) dα′`, where `∂_α A` is the force density
//! per unit α. The principal part of the kernel is `(1/8π)cot((α′−α)/2)`, so
//! `u = −¼ℋ(A) + ∫ R·A` with R smooth and integrated by the trapezoid rule.

use std::f64::consts::PI;

use crate::error::Result;
use crate::geometry::{Frame, ForceParams};
use crate::kernels::{self, remainder_kernel, Differentiated};
use crate::spectral::{integrate, integrate_v2, split, Coordinate, Spectral, V2};

#[derive(Clone, Debug)]
pub struct ForceDensity {
    /// Bending and tension part, per unit α, on the α-grid.
    pub f_alpha: Vec<V2>,
    /// Stretching part, per unit s, on the s-grid.
    pub f_s: Vec<V2>,
    /// Full density per unit α on the α-grid.
    pub total_alpha: Vec<V2>,
    /// Full density per unit s on the s-grid.
    pub total_s: Vec<V2>,
    /// Antiderivative A with `∂_α A = total_alpha`.
    pub potential: Vec<V2>,
    /// Normal coefficient of the bending+tension part, per unit α, on the α-grid.
    pub bend_normal: Vec<f64>,
}

impl ForceDensity {
    pub fn net(&self) -> V2 {
        integrate_v2(&self.total_s)
    }
}

fn scale(v: V2, a: f64) -> V2 {
    [v[0] * a, v[1] * a]
}

fn add(a: V2, b: V2) -> V2 {
    [a[0] + b[0], a[1] + b[1]]
}

fn dot(a: V2, b: V2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Normal coefficient `λθ_α + c₁((B − ½B²)θ_α − θ_ααα/𝔰² − ½θ_α³/𝔰²)`.
fn bend_tension(p: &ForceParams, s: f64, ta: f64, taaa: f64) -> f64 {
    let s2 = s * s;
    p.lambda * ta + p.c1 * ((p.b - 0.5 * p.b * p.b) * ta - taaa / s2 - 0.5 * ta * ta * ta / s2)
}

pub fn force_density(frame: &Frame, params: &ForceParams) -> ForceDensity {
    let n = frame.n();
    let s = frame.s;
    let c = &frame.curve;
    let p = params;
    let bend_normal: Vec<f64> = (0..n).map(|j| bend_tension(p, s, frame.theta_a[j], frame.theta_aaa[j])).collect();
    let f_alpha: Vec<V2> = (0..n).map(|j| scale(c.n_alpha[j], bend_normal[j])).collect();

    let f_s: Vec<V2> = (0..n)
        .map(|j| {
            let g = 1.0 + frame.y_s[j];
            let tn = p.c3 * (s * g - p.s_op) * g * frame.theta_a_at_s[j];
            add(scale(c.t_s[j], p.c3 * s * frame.y_ss[j]), scale(c.n_s[j], tn))
        })
        .collect();

    let total_s: Vec<V2> = (0..n)
        .map(|j| {
            let g = 1.0 + frame.y_s[j];
            let bn = bend_tension(p, s, frame.theta_a_at_s[j], frame.theta_aaa_at_s[j]);
            add(scale(c.n_s[j], g * bn), f_s[j])
        })
        .collect();

    let total_alpha: Vec<V2> = (0..n)
        .map(|j| {
            let g = 1.0 + frame.ys_at_alpha[j];
            let ft = p.c3 * s * frame.yss_at_alpha[j] / g;
            let fn_ = bend_normal[j] + p.c3 * (s * g - p.s_op) * frame.theta_a[j];
            add(scale(c.t_alpha[j], ft), scale(c.n_alpha[j], fn_))
        })
        .collect();

    let potential: Vec<V2> = (0..n)
        .map(|j| {
            let ta = frame.theta_a[j];
            let g = 1.0 + frame.ys_at_alpha[j];
            let tcoef = p.lambda + p.c1 * ((p.b - 0.5 * p.b * p.b) - 0.5 * ta * ta / (s * s)) + p.c3 * (s * g - p.s_op);
            let ncoef = -p.c1 * frame.theta_aa[j] / (s * s);
            add(scale(c.t_alpha[j], tcoef), scale(c.n_alpha[j], ncoef))
        })
        .collect();

    ForceDensity { f_alpha, f_s, total_alpha, total_s, potential, bend_normal }
}

#[derive(Clone, Debug)]
pub struct VelocityFields {
    pub u_alpha: Vec<V2>,
    pub u_s: Vec<V2>,
    /// `U = u·n` on the α-grid.
    pub normal: Vec<f64>,
    /// `u·t` on the α-grid.
    pub tangential: Vec<f64>,
    /// 𝒯 on the α-grid.
    pub transport: Vec<f64>,
    pub t_bar: f64,
}

/// Velocity on the α-grid by Hilbert extraction plus smooth remainder quadrature.
pub fn velocity_alpha(sp: &Spectral, frame: &Frame, force: &ForceDensity) -> Result<Vec<V2>> {
    let k = remainder_kernel(frame, Coordinate::ArcLength, Differentiated::Source, None)?;
    let smooth = k.apply(&force.potential);
    let h = sp.hilbert_v2(&force.potential);
    Ok(smooth.iter().zip(&h).map(|(r, h)| [r[0] - 0.25 * h[0], r[1] - 0.25 * h[1]]).collect())
}

pub fn curve_velocity(sp: &Spectral, frame: &Frame, force: &ForceDensity) -> Result<VelocityFields> {
    let u_alpha = velocity_alpha(sp, frame, force)?;
    let u_s = frame.to_material.eval_v2(&u_alpha);
    let c = &frame.curve;
    let normal: Vec<f64> = u_alpha.iter().zip(&c.n_alpha).map(|(u, n)| dot(*u, *n)).collect();
    let tangential: Vec<f64> = u_alpha.iter().zip(&c.t_alpha).map(|(u, t)| dot(*u, *t)).collect();
    // α(s = −π) = −π, so the material anchor is the first α-grid sample.
    let t_bar = tangential[0];
    let flux: Vec<f64> = frame.theta_a.iter().zip(&normal).map(|(a, b)| a * b).collect();
    let transport: Vec<f64> = sp.antiderivative(&flux).iter().map(|v| v + t_bar).collect();
    Ok(VelocityFields { u_alpha, u_s, normal, tangential, transport, t_bar })
}

/// Velocity on the s-grid evaluated directly in material coordinates,
/// `u(s) = −¼𝔥(Ã) + ∫ R̃·Ã ds′` with Ã the potential composed with α(s).
pub fn velocity_material(sp: &Spectral, frame: &Frame, force: &ForceDensity) -> Result<Vec<V2>> {
    let k = remainder_kernel(frame, Coordinate::Material, Differentiated::Source, None)?;
    let pot = frame.to_material.eval_v2(&force.potential);
    let smooth = k.apply(&pot);
    let h = sp.hilbert_v2(&pot);
    Ok(smooth.iter().zip(&h).map(|(r, h)| [r[0] - 0.25 * h[0], r[1] - 0.25 * h[1]]).collect())
}

/// Single-layer cross-check: `u = ∫ G(z(α) − z(α′)) F(α′) dα′` with the
/// logarithmic singularity integrated exactly in Fourier space.
pub fn velocity_single_layer(sp: &Spectral, frame: &Frame, force: &ForceDensity) -> Vec<V2> {
    single_layer_apply(sp, frame, &force.total_alpha)
}

/// Pieces of `∂_α u·n`. Their sum is the full term; `principal` is
/// `c₁ℋ(θ_ααα)/(4𝔰²)`, the part carried by the implicit operator.
#[derive(Clone, Debug)]
pub struct NormalDerivativeTerms {
    pub principal: Vec<f64>,
    /// `(c₁/4𝔰²) n·[ℋ, n](θ_ααα)`.
    pub bending_commutator: Vec<f64>,
    /// `−¼ n·[ℋ, t](f_t)` with `f_t = c₃𝔰 y_ss/(1+y_s)` at s(α).
    pub stretching_commutator: Vec<f64>,
    /// `−¼ n·ℋ(f_low n)` for the lower-order normal force.
    pub hilbert_terms: Vec<f64>,
    /// `n·∫ R(α, α′) F(α′) dα′`.
    pub remainder: Vec<f64>,
}

impl NormalDerivativeTerms {
    pub fn total(&self) -> Vec<f64> {
        (0..self.principal.len())
            .map(|j| {
                self.principal[j]
                    + self.bending_commutator[j]
                    + self.stretching_commutator[j]
                    + self.hilbert_terms[j]
                    + self.remainder[j]
            })
            .collect()
    }

    /// Everything except the principal part.
    pub fn lower_order(&self) -> Vec<f64> {
        let t = self.total();
        t.iter().zip(&self.principal).map(|(a, b)| a - b).collect()
    }
}

pub fn normal_derivative_terms(sp: &Spectral, frame: &Frame, force: &ForceDensity, params: &ForceParams) -> Result<NormalDerivativeTerms> {
    let n = frame.n();
    let s = frame.s;
    let c = &frame.curve;
    let cb = params.c1 / (4.0 * s * s);
    let h3 = sp.hilbert(&frame.theta_aaa);
    let principal: Vec<f64> = h3.iter().map(|v| cb * v).collect();
    let bending_commutator: Vec<f64> =
        sp.projected_commutator(&c.n_alpha, &c.n_alpha, &frame.theta_aaa).iter().map(|v| cb * v).collect();
    let f_t: Vec<f64> =
        (0..n).map(|j| params.c3 * s * frame.yss_at_alpha[j] / (1.0 + frame.ys_at_alpha[j])).collect();
    let stretching_commutator: Vec<f64> =
        sp.projected_commutator(&c.n_alpha, &c.t_alpha, &f_t).iter().map(|v| -0.25 * v).collect();
    let f_low: Vec<f64> = (0..n)
        .map(|j| {
            let total_normal = force.bend_normal[j]
                + params.c3 * (s * (1.0 + frame.ys_at_alpha[j]) - params.s_op) * frame.theta_a[j];
            total_normal + params.c1 * frame.theta_aaa[j] / (s * s)
        })
        .collect();
    let low_vec: Vec<V2> = (0..n).map(|j| scale(c.n_alpha[j], f_low[j])).collect();
    let hl = sp.hilbert_v2(&low_vec);
    let hilbert_terms: Vec<f64> = (0..n).map(|j| -0.25 * dot(c.n_alpha[j], hl[j])).collect();
    let k = remainder_kernel(frame, Coordinate::ArcLength, Differentiated::Target, None)?;
    let r = k.apply(&force.total_alpha);
    let remainder: Vec<f64> = (0..n).map(|j| dot(c.n_alpha[j], r[j])).collect();
    Ok(NormalDerivativeTerms { principal, bending_commutator, stretching_commutator, hilbert_terms, remainder })
}

pub fn normal_derivative_term(sp: &Spectral, frame: &Frame, force: &ForceDensity, params: &ForceParams) -> Result<Vec<f64>> {
    Ok(normal_derivative_terms(sp, frame, force, params)?.total())
}

/// Pieces of `∂_s u·t` on the s-grid; `principal` is `−c₃𝔰𝔥(y_ss)/4`.
#[derive(Clone, Debug)]
pub struct TangentialDerivativeTerms {
    pub principal: Vec<f64>,
    /// `−(c₃𝔰/4) t·[𝔥, t](y_ss)`.
    pub stretching_commutator: Vec<f64>,
    /// `(c₁/4𝔰²) t·[𝔥, n](∂_s θ_αα)`.
    pub bending_commutator: Vec<f64>,
    /// `−¼ t·𝔥(φ_low n)`.
    pub hilbert_terms: Vec<f64>,
    /// `t·∫ R̃(s, s′) F(s′) ds′`.
    pub remainder: Vec<f64>,
}

impl TangentialDerivativeTerms {
    pub fn total(&self) -> Vec<f64> {
        (0..self.principal.len())
            .map(|j| {
                self.principal[j]
                    + self.stretching_commutator[j]
                    + self.bending_commutator[j]
                    + self.hilbert_terms[j]
                    + self.remainder[j]
            })
            .collect()
    }

    pub fn lower_order(&self) -> Vec<f64> {
        let t = self.total();
        t.iter().zip(&self.principal).map(|(a, b)| a - b).collect()
    }
}

pub fn tangential_derivative_terms(sp: &Spectral, frame: &Frame, force: &ForceDensity, params: &ForceParams) -> Result<TangentialDerivativeTerms> {
    let n = frame.n();
    let s = frame.s;
    let c = &frame.curve;
    let cs = params.c3 * s / 4.0;
    let hy = sp.hilbert(&frame.y_ss);
    let principal: Vec<f64> = hy.iter().map(|v| -cs * v).collect();
    let stretching_commutator: Vec<f64> =
        sp.projected_commutator(&c.t_s, &c.t_s, &frame.y_ss).iter().map(|v| -cs * v).collect();
    let ds_theta_aa: Vec<f64> = (0..n).map(|j| (1.0 + frame.y_s[j]) * frame.theta_aaa_at_s[j]).collect();
    let cb = params.c1 / (4.0 * s * s);
    let bending_commutator: Vec<f64> =
        sp.projected_commutator(&c.t_s, &c.n_s, &ds_theta_aa).iter().map(|v| cb * v).collect();
    let low_vec: Vec<V2> = (0..n)
        .map(|j| {
            let g = 1.0 + frame.y_s[j];
            let ta = frame.theta_a_at_s[j];
            let bn = bend_tension(params, s, ta, frame.theta_aaa_at_s[j]) + params.c1 * frame.theta_aaa_at_s[j] / (s * s);
            let phi = g * bn + params.c3 * (s * g - params.s_op) * g * ta;
            scale(c.n_s[j], phi)
        })
        .collect();
    let hl = sp.hilbert_v2(&low_vec);
    let hilbert_terms: Vec<f64> = (0..n).map(|j| -0.25 * dot(c.t_s[j], hl[j])).collect();
    let k = remainder_kernel(frame, Coordinate::Material, Differentiated::Target, None)?;
    let r = k.apply(&force.total_s);
    let remainder: Vec<f64> = (0..n).map(|j| dot(c.t_s[j], r[j])).collect();
    Ok(TangentialDerivativeTerms { principal, stretching_commutator, bending_commutator, hilbert_terms, remainder })
}

/// `∫ G(z(α) − z(α′)) f(α′) dα′` for a vector density f on the α-grid.
pub fn single_layer_apply(sp: &Spectral, frame: &Frame, density: &[V2]) -> Vec<V2> {
    let k = kernels::log_subtracted_stokeslet(frame);
    let smooth = k.apply(density);
    let (f0, f1) = split(density);
    let c = 1.0 / (4.0 * PI);
    let l0 = kernels::log_kernel_apply(sp, &f0);
    let l1 = kernels::log_kernel_apply(sp, &f1);
    smooth.iter().zip(l0.iter().zip(&l1)).map(|(s, (a, b))| [s[0] + c * a, s[1] + c * b]).collect()
}

/// `∫ u·F` split as in the energy identity: α-grid bending/tension plus
/// s-grid stretching.
pub fn power(force: &ForceDensity, vel: &VelocityFields) -> f64 {
    let a: Vec<f64> = vel.u_alpha.iter().zip(&force.f_alpha).map(|(u, f)| dot(*u, *f)).collect();
    let b: Vec<f64> = vel.u_s.iter().zip(&force.f_s).map(|(u, f)| dot(*u, *f)).collect();
    integrate(&a) + integrate(&b)
}
