//! The operator
//!
//! ```text
//! T[g](x) = −(i/4π) ∫ α·(x − y)/|x − y|³ Q(y) g(y) dy
//! ```
//!
//! of which every zero mode is a fixed point, evaluated pointwise with the
//! pole-centered singular quadrature.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::clifford::{alpha_dot, CVector, Mat4, Spinor4, Vec3};
use crate::quadrature::{integrate_singular, Decay, QuadratureError, QuadratureRule};
use crate::sampling::ball_samples;
use crate::zero_modes::DiracZeroModePair;

/// `T[g](x)` with its quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelApplication {
    pub pole: Vec3,
    #[serde(skip)]
    pub value: Spinor4,
    pub err_est: f64,
    pub converged: bool,
}

/// Evaluates `T[g](x)`. `decay` declares the decay of `Q g` about the
/// origin; `|x − y|⁻² ≤ 1` beyond the truncation radius, so it also bounds
/// the tail of the full integrand.
pub fn apply_t(
    q: &(impl Fn(Vec3) -> Mat4 + Sync + ?Sized),
    g: &(impl Fn(Vec3) -> Spinor4 + Sync + ?Sized),
    decay: Decay,
    x: Vec3,
    rule: &QuadratureRule,
) -> Result<KernelApplication, QuadratureError> {
    let integrand = |y: Vec3| {
        let d = x - y;
        let r = d.norm();
        alpha_dot(d * (1.0 / (r * r * r))).apply(&q(y).apply(&g(y)))
    };
    let est = integrate_singular(x, &integrand, decay, rule)?;
    let factor = Complex64::new(0.0, -1.0 / (4.0 * PI));
    Ok(KernelApplication {
        pole: x,
        value: est.value * factor,
        err_est: est.err_est / (4.0 * PI),
        converged: est.converged,
    })
}

/// `T[f](x)` for the field and potential of `pair`.
pub fn apply_t_pair(pair: &DiracZeroModePair, x: Vec3, rule: &QuadratureRule) -> Result<KernelApplication, QuadratureError> {
    let q = |y: Vec3| pair.q(y);
    let f = |y: Vec3| pair.f(y);
    apply_t(&q, &f, crate::asymptotics::source_decay(pair), x, rule)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointResidual {
    pub x: [f64; 3],
    /// `|f(x) − T[f](x)|`.
    pub residual: f64,
    pub err_est: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub points: Vec<PointResidual>,
    pub max_residual: f64,
    pub max_err_est: f64,
    pub quadrature_tol: f64,
}

/// `max_x |f(x) − T[f](x)|` over `samples`, with per-point error estimates.
pub fn fixed_point_residual(
    pair: &DiracZeroModePair,
    samples: &[Vec3],
    rule: &QuadratureRule,
) -> Result<ResidualReport, QuadratureError> {
    let mut points = Vec::with_capacity(samples.len());
    for &x in samples {
        let t = apply_t_pair(pair, x, rule)?;
        points.push(PointResidual {
            x: x.to_array(),
            residual: (pair.f(x) - t.value).norm(),
            err_est: t.err_est,
            converged: t.converged,
        });
    }
    let max_residual = points.iter().map(|p| p.residual).fold(0.0, f64::max);
    let max_err_est = points.iter().map(|p| p.err_est).fold(0.0, f64::max);
    Ok(ResidualReport {
        points,
        max_residual,
        max_err_est,
        quadrature_tol: rule.tol,
    })
}

/// Far-field radii added to the default sample set.
pub const FAR_FIELD_RADII: [f64; 3] = [10.0, 20.0, 40.0];

/// 20 quasi-random points in `|x| ≤ 5` followed by three far-field points
/// along a fixed oblique direction.
pub fn default_sample_set(seed: u64) -> Vec<Vec3> {
    let mut pts = ball_samples(20, 5.0, seed);
    let dir = Vec3::new(1.0, 2.0, 2.0).normalized();
    pts.extend(FAR_FIELD_RADII.iter().map(|&r| dir * r));
    pts
}

/// `sup |f(rω)|⟨r⟩²` over the samples and where it is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Envelope {
    pub c_f: f64,
    pub radius_at_sup: f64,
    pub omega_at_sup: [f64; 3],
    pub samples: usize,
}

pub fn decay_envelope<const N: usize>(
    f: &(impl Fn(Vec3) -> CVector<N> + ?Sized),
    radii: &[f64],
    omegas: &[Vec3],
) -> Envelope {
    let mut best = Envelope {
        c_f: 0.0,
        radius_at_sup: radii.first().copied().unwrap_or(0.0),
        omega_at_sup: omegas.first().map_or([0.0; 3], |w| w.to_array()),
        samples: radii.len() * omegas.len(),
    };
    for &r in radii {
        for &w in omegas {
            let v = f(w * r).norm() * (1.0 + r * r);
            if v > best.c_f {
                best.c_f = v;
                best.radius_at_sup = r;
                best.omega_at_sup = w.to_array();
            }
        }
    }
    best
}

/// Radius of the support of [`bump`].
pub const BUMP_RADIUS: f64 = 2.0;

/// Fixed smooth bump `exp(1 − 1/(1 − |x|²/R²))·ᵗ(1, 0, 0, 0)` supported in
/// `|x| < R = 2`, equal to `ᵗ(1, 0, 0, 0)` at the origin.
pub fn bump(x: Vec3) -> Spinor4 {
    let u = x.norm_sq() / (BUMP_RADIUS * BUMP_RADIUS);
    let mut out = Spinor4::zero();
    if u < 1.0 {
        out.0[0] = Complex64::new((1.0 - 1.0 / (1.0 - u)).exp(), 0.0);
    }
    out
}

/// `f + δ·bump` with the same potential; not a zero mode for `δ ≠ 0`.
pub fn perturbed_pair(pair: &DiracZeroModePair, delta: f64) -> DiracZeroModePair {
    let f = pair.field.clone();
    DiracZeroModePair {
        field: Arc::new(move |x| f(x) + bump(x) * delta),
        potential: pair.potential.clone(),
        decay: pair.decay,
        field_bound: pair.field_bound.map(|c| c + delta.abs() * (1.0 + BUMP_RADIUS * BUMP_RADIUS)),
    }
}
