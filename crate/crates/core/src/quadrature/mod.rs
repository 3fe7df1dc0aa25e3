//! Deterministic adaptive quadrature over ℝ³ for algebraically decaying
//! integrands.
//!
//! Every integral is a product rule: adaptive Gauss–Legendre panels in a
//! radial variable measured from a chosen center, times a fixed spherical
//! grid on each shell. Unbounded radial ranges are mapped by `s = t/(1−t)`
//! and truncated at `r_max`; the part beyond `r_max` is covered by
//! [`tail_bound`] from the caller's declared decay and is added to the error
//! estimate, never to the value.
//!
//! Integrands with a `|y − x|⁻²` singularity go through
//! [`integrate_singular`], which splits the integrand with a smooth
//! partition of unity: the piece near the pole is integrated in spherical
//! coordinates centered there, so the `s²` Jacobian cancels the singularity,
//! and the remainder is integrated around the origin.
//!
//! Reductions happen in a fixed pairwise order, so results are bitwise
//! reproducible for any thread count.

mod gauss;
mod sphere;

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clifford::{CVector, Vec3};

pub use gauss::gauss_legendre;
pub use sphere::{fibonacci_points, SphereGrid};
pub(crate) use sphere::AngularRule;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("invalid quadrature rule: {0}")]
    InvalidRule(String),
    #[error("decay exponent rho = {rho} must exceed 1 for the tail to be integrable")]
    NonIntegrableDecay { rho: f64 },
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("tolerance {tol:e} not reached: best value has error estimate {err_est:e}")]
    BudgetExceeded { tol: f64, err_est: f64 },
}

/// Values that can be integrated: real, complex, or complex vectors.
pub trait QuadValue:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    /// Euclidean magnitude, used for error estimates.
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl<const N: usize> QuadValue for CVector<N> {
    fn zero() -> Self {
        CVector::zero()
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Sum of `f(0..n)` by recursive halving; the order depends only on `n`.
pub fn pairwise_sum<V: QuadValue>(n: usize, f: &(impl Fn(usize) -> V + ?Sized)) -> V {
    fn go<V: QuadValue>(lo: usize, hi: usize, f: &(impl Fn(usize) -> V + ?Sized)) -> V {
        if hi - lo <= 8 {
            let mut acc = V::zero();
            for i in lo..hi {
                acc = acc + f(i);
            }
            acc
        } else {
            let mid = lo + (hi - lo) / 2;
            go(lo, mid, f) + go(mid, hi, f)
        }
    }
    go(0, n, f)
}

/// Declared pointwise decay of an integrand about the integration center:
/// `|g(y)| ≤ c⟨y⟩^(−ρ−2)` for large `|y|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Decay {
    /// Vanishes beyond the truncation radius.
    Compact,
    Algebraic { c: f64, rho: f64 },
}

/// Upper bound on `∫_{|y|>R} C⟨y⟩^(−ρ−2) dy`.
///
/// Uses `r²(1+r²)^(−(ρ+2)/2) ≤ r^(−ρ)`, giving `4πC R^(1−ρ)/(ρ−1)`.
pub fn tail_bound(c: f64, rho: f64, radius: f64) -> Result<f64, QuadratureError> {
    if !(rho > 1.0) {
        return Err(QuadratureError::NonIntegrableDecay { rho });
    }
    if !(radius > 0.0) || !(c >= 0.0) {
        return Err(QuadratureError::InvalidRegion(format!(
            "tail bound needs R > 0 and C ≥ 0, got R = {radius}, C = {c}"
        )));
    }
    Ok(4.0 * std::f64::consts::PI * c * radius.powf(1.0 - rho) / (rho - 1.0))
}

/// Parameters of the radial × spherical product rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    /// Gauss–Legendre points per radial panel.
    pub radial_order: usize,
    pub sphere: SphereGrid,
    /// Truncation radius for unbounded radial ranges.
    pub r_max: f64,
    /// Absolute tolerance on the total error estimate.
    pub tol: f64,
    /// Maximum bisection depth of any radial panel.
    pub adapt_depth: usize,
    /// Hard cap on the number of radial panels.
    pub max_panels: usize,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule {
            radial_order: 10,
            sphere: SphereGrid::gauss_with_points(2048),
            r_max: 1e10,
            tol: 1e-6,
            adapt_depth: 30,
            max_panels: 2000,
        }
    }
}

impl QuadratureRule {
    pub fn with_tol(&self, tol: f64) -> Self {
        QuadratureRule {
            tol,
            ..self.clone()
        }
    }

    pub fn with_sphere(&self, sphere: SphereGrid) -> Self {
        QuadratureRule {
            sphere,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), QuadratureError> {
        let bad = |msg: String| Err(QuadratureError::InvalidRule(msg));
        if !(self.r_max > 0.0) || !self.r_max.is_finite() {
            return bad(format!("r_max must be positive and finite, got {}", self.r_max));
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if self.adapt_depth < 1 {
            return bad("adapt_depth must be at least 1".into());
        }
        if self.radial_order < 1 {
            return bad("radial_order must be at least 1".into());
        }
        if self.max_panels < 1 {
            return bad("max_panels must be at least 1".into());
        }
        if !self.sphere.is_valid() {
            return bad(format!("sphere grid {:?} has no points", self.sphere));
        }
        Ok(())
    }
}

/// Result of a quadrature with its error accounting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<V> {
    pub value: V,
    /// `radial_err + angular_err + roundoff + tail`.
    pub err_est: f64,
    pub radial_err: f64,
    pub angular_err: f64,
    /// Rounding bound `∝ ε_mach ∫|g|`.
    pub roundoff: f64,
    pub tail: f64,
    /// Whether `err_est ≤ tol` was reached within the refinement budget.
    pub converged: bool,
    pub tol: f64,
    pub panels: usize,
    pub evaluations: usize,
}

impl<V: QuadValue> Estimate<V> {
    /// Turns an unconverged estimate into [`QuadratureError::BudgetExceeded`].
    pub fn require_converged(self) -> Result<Self, QuadratureError> {
        if self.converged {
            Ok(self)
        } else {
            Err(QuadratureError::BudgetExceeded {
                tol: self.tol,
                err_est: self.err_est,
            })
        }
    }

    pub fn map<W: QuadValue>(self, f: impl FnOnce(V) -> W) -> Estimate<W> {
        Estimate {
            value: f(self.value),
            err_est: self.err_est,
            radial_err: self.radial_err,
            angular_err: self.angular_err,
            roundoff: self.roundoff,
            tail: self.tail,
            converged: self.converged,
            tol: self.tol,
            panels: self.panels,
            evaluations: self.evaluations,
        }
    }

    /// Sum of two independent estimates; errors add.
    pub fn combine(self, o: Estimate<V>) -> Estimate<V> {
        Estimate {
            value: self.value + o.value,
            err_est: self.err_est + o.err_est,
            radial_err: self.radial_err + o.radial_err,
            angular_err: self.angular_err + o.angular_err,
            roundoff: self.roundoff + o.roundoff,
            tail: self.tail + o.tail,
            converged: self.converged && o.converged,
            tol: self.tol + o.tol,
            panels: self.panels + o.panels,
            evaluations: self.evaluations + o.evaluations,
        }
    }
}

/// Per-shell restriction of directions to a band `μ_lo ≤ axis·n ≤ μ_hi`.
pub type BandFn<'a> = &'a (dyn Fn(f64) -> (f64, f64) + Sync);

/// A radially structured region: the shells `inner ≤ |y − center| ≤ outer`
/// (unbounded when `outer` is `None`), optionally restricted on each shell to
/// a band of polar angles about `axis`.
#[derive(Clone)]
pub struct Region<'a> {
    pub center: Vec3,
    pub axis: Vec3,
    pub inner: f64,
    pub outer: Option<f64>,
    /// Radii where the integrand may be non-smooth; always panel boundaries.
    pub breaks: Vec<f64>,
    pub band: Option<BandFn<'a>>,
}

impl<'a> Region<'a> {
    pub fn all_space(center: Vec3) -> Self {
        Region {
            center,
            axis: Vec3::E3,
            inner: 0.0,
            outer: None,
            breaks: Vec::new(),
            band: None,
        }
    }

    pub fn ball(center: Vec3, radius: f64) -> Self {
        Region {
            outer: Some(radius),
            ..Region::all_space(center)
        }
    }

    pub fn exterior(center: Vec3, radius: f64) -> Self {
        Region {
            inner: radius,
            ..Region::all_space(center)
        }
    }

    pub fn with_axis(mut self, axis: Vec3) -> Self {
        self.axis = axis.normalized();
        self
    }

    pub fn with_breaks(mut self, breaks: impl IntoIterator<Item = f64>) -> Self {
        self.breaks.extend(breaks);
        self
    }

    pub fn with_band(mut self, band: BandFn<'a>) -> Self {
        self.band = Some(band);
        self
    }
}

/// Radial parametrization of a region.
#[derive(Debug, Clone, Copy)]
enum RadialMap {
    Linear,
    /// `s = t/(1−t)`.
    Rational,
}

impl RadialMap {
    fn radius(self, u: f64) -> f64 {
        match self {
            RadialMap::Linear => u,
            RadialMap::Rational => u / (1.0 - u),
        }
    }

    fn jacobian(self, u: f64) -> f64 {
        match self {
            RadialMap::Linear => 1.0,
            RadialMap::Rational => 1.0 / ((1.0 - u) * (1.0 - u)),
        }
    }

    fn inverse(self, s: f64) -> f64 {
        match self {
            RadialMap::Linear => s,
            RadialMap::Rational => s / (1.0 + s),
        }
    }
}

struct Panel<V> {
    a: f64,
    b: f64,
    depth: usize,
    left: V,
    right: V,
    err: f64,
    /// `∫|g|` over the panel, for the roundoff level of `err`.
    abs: f64,
}

struct Engine<'r, 'g, V, G: ?Sized> {
    g: &'g G,
    region: &'r Region<'r>,
    map: RadialMap,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    points_per_shell: usize,
    _v: std::marker::PhantomData<V>,
}

impl<V, G> Engine<'_, '_, V, G>
where
    V: QuadValue,
    G: Fn(Vec3) -> V + Sync + ?Sized,
{
    fn shell<W: QuadValue>(&self, angular: &AngularRule, u: f64, lift: &(impl Fn(V) -> W + Sync)) -> W {
        let s = self.map.radius(u);
        let band = self.region.band.map(|b| b(s));
        let center = self.region.center;
        let g = self.g;
        let ang = angular.integrate(band, &|n: Vec3| lift(g(center + n * s)));
        ang * (s * s * self.map.jacobian(u))
    }

    /// Gauss–Legendre values on each interval, evaluated in parallel and
    /// reduced in node order.
    fn eval_intervals<W: QuadValue>(
        &self,
        angular: &AngularRule,
        intervals: &[(f64, f64)],
        lift: &(impl Fn(V) -> W + Sync),
    ) -> Vec<W> {
        let n = self.nodes.len();
        let shells: Vec<W> = (0..intervals.len() * n)
            .into_par_iter()
            .map(|idx| {
                let (a, b) = intervals[idx / n];
                let k = idx % n;
                let u = 0.5 * (a + b) + 0.5 * (b - a) * self.nodes[k];
                self.shell(angular, u, lift) * self.weights[k]
            })
            .collect();
        intervals
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| pairwise_sum(n, &|k| shells[i * n + k]) * (0.5 * (b - a)))
            .collect()
    }
}

/// A value together with the integral of its magnitude.
#[derive(Clone, Copy)]
struct WithAbs<V> {
    value: V,
    abs: f64,
}

impl<V: QuadValue> Add for WithAbs<V> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        WithAbs {
            value: self.value + o.value,
            abs: self.abs + o.abs,
        }
    }
}

impl<V: QuadValue> Sub for WithAbs<V> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        WithAbs {
            value: self.value - o.value,
            abs: self.abs - o.abs,
        }
    }
}

impl<V: QuadValue> Mul<f64> for WithAbs<V> {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        WithAbs {
            value: self.value * s,
            abs: self.abs * s,
        }
    }
}

impl<V: QuadValue> QuadValue for WithAbs<V> {
    fn zero() -> Self {
        WithAbs {
            value: V::zero(),
            abs: 0.0,
        }
    }
    fn magnitude(&self) -> f64 {
        self.value.magnitude()
    }
}

/// Rounding error of a quadrature is bounded by this multiple of
/// `ε_mach ∫|g|`.
const ROUNDOFF_FACTOR: f64 = 32.0;

/// Integrates `g` over `region` with the radial panels refined adaptively
/// until the total error estimate meets `rule.tol` or the budget runs out.
pub fn integrate_region<V, G>(
    g: &G,
    region: &Region<'_>,
    decay: Decay,
    rule: &QuadratureRule,
) -> Result<Estimate<V>, QuadratureError>
where
    V: QuadValue,
    G: Fn(Vec3) -> V + Sync + ?Sized,
{
    rule.validate()?;
    if !(region.inner >= 0.0) || !region.center.is_finite() {
        return Err(QuadratureError::InvalidRegion(format!(
            "inner radius {} must be non-negative and the center finite",
            region.inner
        )));
    }
    let (map, outer, tail) = match region.outer {
        Some(outer) => (RadialMap::Linear, outer, 0.0),
        None => {
            let tail = match decay {
                Decay::Compact => 0.0,
                Decay::Algebraic { c, rho } => tail_bound(c, rho, rule.r_max.max(region.inner))?,
            };
            (RadialMap::Rational, rule.r_max, tail)
        }
    };
    if !(outer >= region.inner) {
        return Err(QuadratureError::InvalidRegion(format!(
            "outer radius {outer} below inner radius {}",
            region.inner
        )));
    }

    let mut cuts = vec![map.inverse(region.inner), map.inverse(outer)];
    let mut interior_breaks = region.breaks.clone();
    if matches!(map, RadialMap::Rational) {
        // s = 1 sits at t = 1/2 where the map is balanced
        interior_breaks.push(1.0);
    }
    for b in interior_breaks {
        if b > region.inner && b < outer {
            cuts.push(map.inverse(b));
        }
    }
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup();

    let (nodes, weights) = gauss_legendre(rule.radial_order);
    let angular = AngularRule::new(rule.sphere, region.axis);
    let engine = Engine {
        g,
        region,
        map,
        nodes,
        weights,
        points_per_shell: rule.sphere.point_count(),
        _v: std::marker::PhantomData,
    };

    let make_panels = |segs: &[(f64, f64, usize)], coarse_known: Option<&[V]>| -> Vec<Panel<V>> {
        let mut intervals = Vec::with_capacity(segs.len() * 3);
        for &(a, b, _) in segs {
            let m = 0.5 * (a + b);
            intervals.push((a, m));
            intervals.push((m, b));
            if coarse_known.is_none() {
                intervals.push((a, b));
            }
        }
        let vals = engine.eval_intervals(&angular, &intervals, &|v: V| WithAbs {
            value: v,
            abs: v.magnitude(),
        });
        let stride = if coarse_known.is_none() { 3 } else { 2 };
        segs.iter()
            .enumerate()
            .map(|(i, &(a, b, depth))| {
                let left = vals[i * stride];
                let right = vals[i * stride + 1];
                let coarse = match coarse_known {
                    Some(c) => c[i],
                    None => vals[i * stride + 2].value,
                };
                Panel {
                    a,
                    b,
                    depth,
                    left: left.value,
                    right: right.value,
                    err: (coarse - (left.value + right.value)).magnitude(),
                    abs: left.abs + right.abs,
                }
            })
            .collect()
    };

    let segs: Vec<(f64, f64, usize)> = cuts
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| (w[0], w[1], 0))
        .collect();
    let mut panels = make_panels(&segs, None);
    let mut shells_evaluated = segs.len() * 3 * rule.radial_order;

    let radial_target = 0.5 * rule.tol;
    // refinement cannot remove the truncation tail
    let hopeless = tail > rule.tol;
    if hopeless {
        log::warn!("truncation tail {tail:e} alone exceeds tol {:e}; skipping refinement", rule.tol);
    }
    let mut radial_ok;
    loop {
        let radial: f64 = panels.iter().map(|p| p.err).sum();
        radial_ok = radial <= radial_target;
        if radial_ok || hopeless || panels.len() >= rule.max_panels {
            break;
        }
        let pick = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| {
                p.depth < rule.adapt_depth
                    && (p.b - p.a) > 1e-15 * p.b.abs().max(1e-300)
                    // splitting cannot resolve below roundoff
                    && p.err > ROUNDOFF_FACTOR * f64::EPSILON * p.abs
            })
            .max_by(|(_, p), (_, q)| p.err.total_cmp(&q.err).then(q.a.total_cmp(&p.a)))
            .map(|(i, _)| i);
        let Some(i) = pick else { break };
        let p = panels.swap_remove(i);
        let m = 0.5 * (p.a + p.b);
        let children = make_panels(
            &[(p.a, m, p.depth + 1), (m, p.b, p.depth + 1)],
            Some(&[p.left, p.right]),
        );
        shells_evaluated += 4 * rule.radial_order;
        panels.extend(children);
    }
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));

    let value = pairwise_sum(panels.len(), &|i| panels[i].left + panels[i].right);
    let radial_err: f64 = panels.iter().map(|p| p.err).sum();

    // angular error: same panels, companion grid
    let companion = AngularRule::new(rule.sphere.companion(), region.axis);
    let halves: Vec<(f64, f64)> = panels
        .iter()
        .flat_map(|p| {
            let m = 0.5 * (p.a + p.b);
            [(p.a, m), (m, p.b)]
        })
        .collect();
    let coarse_vals = engine.eval_intervals(&companion, &halves, &|v: V| WithAbs {
        value: v,
        abs: v.magnitude(),
    });
    let coarse = pairwise_sum(coarse_vals.len(), &|i| coarse_vals[i]);
    let angular_err = (value - coarse.value).magnitude();
    let roundoff = ROUNDOFF_FACTOR * f64::EPSILON * coarse.abs;

    let err_est = radial_err + angular_err + roundoff + tail;
    let evaluations = shells_evaluated * engine.points_per_shell
        + halves.len() * rule.radial_order * rule.sphere.companion().point_count();
    Ok(Estimate {
        value,
        err_est,
        radial_err,
        angular_err,
        roundoff,
        tail,
        converged: radial_ok && err_est <= rule.tol,
        tol: rule.tol,
        panels: panels.len(),
        evaluations,
    })
}

/// `∫_{ℝ³} g(y) dy` in spherical coordinates about the origin.
pub fn integrate_r3<V, G>(g: &G, decay: Decay, rule: &QuadratureRule) -> Result<Estimate<V>, QuadratureError>
where
    V: QuadValue,
    G: Fn(Vec3) -> V + Sync + ?Sized,
{
    integrate_region(g, &Region::all_space(Vec3::ZERO), decay, rule)
}

/// Smooth cutoff: 1 for `s ≤ a`, 0 for `s ≥ 2a`, C^∞ in between.
pub fn near_cutoff(s: f64, a: f64) -> f64 {
    let u = s / a - 1.0;
    if u <= 0.0 {
        1.0
    } else if u >= 1.0 {
        0.0
    } else {
        let p = (-1.0 / u).exp();
        let q = (-1.0 / (1.0 - u)).exp();
        q / (p + q)
    }
}

/// Default radius of the pole-centered piece used by [`integrate_singular`].
pub fn default_near_radius(pole: Vec3) -> f64 {
    (pole.norm() / 3.0).max(0.5)
}

/// `∫_{ℝ³} g(y) dy` for `g` with an integrable `|y − pole|⁻²` singularity.
pub fn integrate_singular<V, G>(
    pole: Vec3,
    g: &G,
    decay: Decay,
    rule: &QuadratureRule,
) -> Result<Estimate<V>, QuadratureError>
where
    V: QuadValue,
    G: Fn(Vec3) -> V + Sync + ?Sized,
{
    integrate_singular_with(pole, g, decay, default_near_radius(pole), rule)
}

/// As [`integrate_singular`] with an explicit near radius `a`: the piece
/// `g·χ` with `χ = 1` on `|y − pole| ≤ a`, vanishing beyond `2a`, is
/// integrated around the pole; `g·(1 − χ)` around the origin. Each piece
/// gets half of `rule.tol`.
pub fn integrate_singular_with<V, G>(
    pole: Vec3,
    g: &G,
    decay: Decay,
    near_radius: f64,
    rule: &QuadratureRule,
) -> Result<Estimate<V>, QuadratureError>
where
    V: QuadValue,
    G: Fn(Vec3) -> V + Sync + ?Sized,
{
    if !(near_radius > 0.0) || !near_radius.is_finite() {
        return Err(QuadratureError::InvalidRegion(format!(
            "near radius must be positive, got {near_radius}"
        )));
    }
    let a = near_radius;
    let half = rule.with_tol(0.5 * rule.tol);
    let near_g = |y: Vec3| {
        let w = near_cutoff((y - pole).norm(), a);
        if w == 0.0 {
            V::zero()
        } else {
            g(y) * w
        }
    };
    let near_region = Region::ball(pole, 2.0 * a).with_breaks([a]);
    let near = integrate_region(&near_g, &near_region, Decay::Compact, &half)?;

    let far_g = |y: Vec3| {
        let w = 1.0 - near_cutoff((y - pole).norm(), a);
        if w == 0.0 {
            V::zero()
        } else {
            g(y) * w
        }
    };
    let far = integrate_region(&far_g, &Region::all_space(Vec3::ZERO), decay, &half)?;
    Ok(near.combine(far))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rule(tol: f64) -> QuadratureRule {
        QuadratureRule::default().with_tol(tol)
    }

    #[test]
    fn tail_bound_examples() {
        let t = tail_bound(3.0, 2.0, 100.0).unwrap();
        assert!((t - 12.0 * PI / 100.0).abs() < 1e-12);
        assert!(tail_bound(3.0, 2.0, 200.0).unwrap() < t);
        assert_eq!(tail_bound(6.0, 2.0, 100.0).unwrap(), 2.0 * t);
        assert!(matches!(
            tail_bound(1.0, 1.0, 10.0),
            Err(QuadratureError::NonIntegrableDecay { .. })
        ));
        assert!(tail_bound(1.0, 0.5, 10.0).is_err());
    }

    #[test]
    fn rule_validation() {
        assert!(QuadratureRule::default().validate().is_ok());
        assert!(rule(0.0).validate().is_err());
        let mut r = QuadratureRule::default();
        r.r_max = -1.0;
        assert!(r.validate().is_err());
        r = QuadratureRule::default();
        r.adapt_depth = 0;
        assert!(r.validate().is_err());
    }

    #[test]
    fn unit_ball_volume() {
        let g = |y: Vec3| if y.norm() < 1.0 { 1.0 } else { 0.0 };
        let est = integrate_r3(&g, Decay::Compact, &rule(1e-9)).unwrap();
        assert!((est.value - 4.0 * PI / 3.0).abs() < 1e-9, "{est:?}");
    }

    #[test]
    fn unreachable_tolerance_reports_budget_exceeded() {
        let g = |y: Vec3| y.bracket().powi(-4);
        let mut r = rule(1e-30);
        r.max_panels = 50;
        let est = integrate_r3(&g, Decay::Algebraic { c: 1.0, rho: 2.0 }, &r).unwrap();
        assert!(!est.converged);
        assert!((est.value - PI * PI).abs() < 1e-6);
        assert!(matches!(
            est.require_converged(),
            Err(QuadratureError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn odd_kernel_over_pole_ball_vanishes() {
        let pole = Vec3::new(0.4, -1.0, 2.0);
        let g = |y: Vec3| {
            let d = pole - y;
            let r = d.norm();
            if r < 1.5 {
                CVector([Complex64::new(d.x / r.powi(3), d.z / r.powi(3))])
            } else {
                CVector::zero()
            }
        };
        let est = integrate_singular_with(pole, &g, Decay::Compact, 1.5, &rule(1e-9)).unwrap();
        assert!(est.value.norm() < 1e-12, "{:?}", est.value);
    }

    #[test]
    fn cutoff_partition_is_smooth_and_bounded() {
        assert_eq!(near_cutoff(0.5, 1.0), 1.0);
        assert_eq!(near_cutoff(2.5, 1.0), 0.0);
        assert!((near_cutoff(1.5, 1.0) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for k in 0..=100 {
            let v = near_cutoff(1.0 + k as f64 / 100.0, 1.0);
            assert!(v <= prev && (0.0..=1.0).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn pairwise_sum_is_order_stable() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let a = pairwise_sum(v.len(), &|i| v[i]);
        let b = pairwise_sum(v.len(), &|i| v[i]);
        assert_eq!(a.to_bits(), b.to_bits());
        assert!((a - v.iter().sum::<f64>()).abs() < 1e-12);
    }
}
