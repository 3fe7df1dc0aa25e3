//! The large-`r` limit of `r² f(rω)`: the limit vector, radial scans,
//! uniformity in `ω` and the three-region error budget.
//!
//! For a zero mode `f` of `α·D + Q` the limit is
//!
//! ```text
//! L(ω) = −(i/4π) (α·ω) ∫ Q(y) f(y) dy,
//! ```
//!
//! so the only integral is `ω`-independent. [`LimitIntegral`] computes it
//! once; every `L(ω)` afterwards is one 4×4 product.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::clifford::{alpha_dot, pauli_contract, CVector, Spinor2, Spinor4, Vec3};
use crate::quadrature::{
    fibonacci_points, integrate_r3, integrate_region, Decay, Estimate, QuadValue, QuadratureError,
    QuadratureRule, Region,
};
use crate::zero_modes::DiracZeroModePair;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AsymptoticsError {
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("the region decomposition needs r >= 2 R0, got r = {r}, R0 = {r0}")]
    RadiusTooSmall { r: f64, r0: f64 },
    #[error("direction {0:?} is not a unit vector")]
    NonUnitDirection(Vec3),
    #[error("invalid probe: {0}")]
    InvalidProbe(String),
}

/// Directions and radii at which `r² f(rω)` is sampled.
#[derive(Debug, Clone)]
pub struct AsymptoticProbe {
    pub omegas: Vec<Vec3>,
    pub radii: Vec<f64>,
    pub rule: QuadratureRule,
}

impl Default for AsymptoticProbe {
    fn default() -> Self {
        AsymptoticProbe {
            omegas: fibonacci_directions(64),
            radii: geometric_ladder(10.0, 2.0, 6),
            rule: QuadratureRule::default(),
        }
    }
}

impl AsymptoticProbe {
    pub fn new(omegas: Vec<Vec3>, radii: Vec<f64>, rule: QuadratureRule) -> Result<Self, AsymptoticsError> {
        for &w in &omegas {
            check_unit(w)?;
        }
        if radii.is_empty() || omegas.is_empty() {
            return Err(AsymptoticsError::InvalidProbe("need at least one direction and one radius".into()));
        }
        if radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(AsymptoticsError::InvalidProbe(format!(
                "radii must be positive and strictly increasing, got {radii:?}"
            )));
        }
        rule.validate()?;
        Ok(AsymptoticProbe { omegas, radii, rule })
    }
}

/// `n` Fibonacci-lattice directions, renormalized to unit length.
pub fn fibonacci_directions(n: usize) -> Vec<Vec3> {
    fibonacci_points(n).into_iter().map(Vec3::normalized).collect()
}

/// `start · ratio^k` for `k = 0..count`.
pub fn geometric_ladder(start: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| start * ratio.powi(k as i32)).collect()
}

fn check_unit(w: Vec3) -> Result<(), AsymptoticsError> {
    if (w.norm() - 1.0).abs() > 1e-14 {
        Err(AsymptoticsError::NonUnitDirection(w))
    } else {
        Ok(())
    }
}

/// Declared decay of `Q f`: `|Qf| ≤ ‖Q‖₂|f| ≤ 4 C_q C_f ⟨y⟩^(−ρ−2)`.
///
/// Without a declared `C_f` the sampled envelope is used instead, which is
/// an estimate rather than a bound.
pub fn source_decay(pair: &DiracZeroModePair) -> Decay {
    let c_f = pair.field_bound.unwrap_or_else(|| {
        let f = |x: Vec3| pair.f(x);
        let radii = geometric_ladder(1.0, 2.0, 12);
        let env = crate::integral_operator::decay_envelope(&f, &radii, &fibonacci_directions(64));
        log::warn!("no declared field bound; using sampled envelope C_f = {}", env.c_f);
        env.c_f
    });
    Decay::Algebraic {
        c: 4.0 * pair.decay.c_q * c_f,
        rho: pair.decay.rho,
    }
}

/// The cached `ω`-independent integral `∫ Q(y) f(y) dy`.
#[derive(Debug, Clone, Copy)]
pub struct LimitIntegral {
    pub integral: Estimate<Spinor4>,
}

impl LimitIntegral {
    pub fn compute(pair: &DiracZeroModePair, rule: &QuadratureRule) -> Result<Self, AsymptoticsError> {
        let g = |y: Vec3| pair.source(y);
        let integral = integrate_r3(&g, source_decay(pair), rule)?;
        if !integral.converged {
            log::warn!(
                "limit integral did not reach tol {:e}: err_est = {:e}",
                integral.tol,
                integral.err_est
            );
        }
        Ok(LimitIntegral { integral })
    }

    /// `L(ω) = −(i/4π)(α·ω) ∫Qf`.
    pub fn limit_vector(&self, omega: Vec3) -> Spinor4 {
        let factor = Complex64::new(0.0, -1.0 / (4.0 * PI));
        alpha_dot(omega).apply(&self.integral.value) * factor
    }

    /// Error bound carried over to every `L(ω)` (α·ω is unitary).
    pub fn limit_err(&self) -> f64 {
        self.integral.err_est / (4.0 * PI)
    }
}

/// One-shot `L(ω)`; prefer [`LimitIntegral`] when several directions are needed.
pub fn limit_vector(pair: &DiracZeroModePair, omega: Vec3, rule: &QuadratureRule) -> Result<Spinor4, AsymptoticsError> {
    check_unit(omega)?;
    Ok(LimitIntegral::compute(pair, rule)?.limit_vector(omega))
}

/// `(i/4π) ∫ {(ω·A(y)) I₂ + iσ·(ω × A(y))} ψ(y) dy`, integrated separately for
/// each `ω`. `decay` declares the decay of the integrand `|A||ψ|`.
pub fn weyl_limit_vector(
    psi: &(impl Fn(Vec3) -> Spinor2 + Sync + ?Sized),
    a: &(impl Fn(Vec3) -> Vec3 + Sync + ?Sized),
    omega: Vec3,
    decay: Decay,
    rule: &QuadratureRule,
) -> Result<Estimate<Spinor2>, AsymptoticsError> {
    check_unit(omega)?;
    let g = |y: Vec3| pauli_contract(omega, a(y)).apply(&psi(y));
    let est = integrate_r3(&g, decay, rule)?;
    let factor = Complex64::new(0.0, 1.0 / (4.0 * PI));
    let k = 1.0 / (4.0 * PI);
    Ok(Estimate {
        err_est: est.err_est * k,
        radial_err: est.radial_err * k,
        angular_err: est.angular_err * k,
        roundoff: est.roundoff * k,
        tail: est.tail * k,
        ..est.map(|v| v * factor)
    })
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (0 for two points).
    pub stderr: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
    pub points: usize,
}

impl LogLogFit {
    /// `None` with fewer than two positive finite pairs.
    pub fn fit(xs: &[f64], ys: &[f64]) -> Option<Self> {
        let pts: Vec<(f64, f64)> = xs
            .iter()
            .zip(ys)
            .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
            .map(|(x, y)| (x.ln(), y.ln()))
            .collect();
        let n = pts.len();
        if n < 2 {
            return None;
        }
        let nf = n as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        if sxx == 0.0 {
            return None;
        }
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let ssr: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
        let stderr = if n > 2 { (ssr / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
        Some(LogLogFit {
            slope,
            intercept,
            stderr,
            residual: (ssr / nf).sqrt(),
            points: n,
        })
    }

    pub fn slope_within(&self, expected: f64, band: f64) -> bool {
        (self.slope - expected).abs() <= band
    }
}

/// One `(r, ω)` cell of a radial scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub r: f64,
    pub omega_index: usize,
    pub omega: [f64; 3],
    /// `|r² f(rω) − L(ω)|`.
    pub deviation: f64,
    /// `|r² f(rω)|`.
    pub modulus: f64,
    pub finite: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub rows: Vec<ScanRow>,
    /// Fit of `max_ω d(r, ω)` against `r`.
    pub fit: Option<LogLogFit>,
    pub non_finite: usize,
}

impl ScanReport {
    /// `max_ω d(r, ω)` for each radius of the ladder.
    pub fn sup_deviation(&self, radii: &[f64]) -> Vec<f64> {
        radii
            .iter()
            .map(|&r| {
                self.rows
                    .iter()
                    .filter(|row| row.r == r && row.finite)
                    .map(|row| row.deviation)
                    .fold(0.0, f64::max)
            })
            .collect()
    }
}

/// Tabulates `d(r, ω) = |r² f(rω) − L(ω)|` over the probe and fits the
/// decay of `max_ω d` in `r` on log-log axes. Non-finite field values are
/// recorded and left out of the fit.
pub fn radial_scan<const N: usize>(
    f: &(impl Fn(Vec3) -> CVector<N> + ?Sized),
    limit_map: &(impl Fn(Vec3) -> CVector<N> + ?Sized),
    probe: &AsymptoticProbe,
) -> ScanReport {
    let limits: Vec<CVector<N>> = probe.omegas.iter().map(|&w| limit_map(w)).collect();
    let mut rows = Vec::with_capacity(probe.radii.len() * probe.omegas.len());
    let mut non_finite = 0;
    for &r in &probe.radii {
        for (k, &w) in probe.omegas.iter().enumerate() {
            let v = f(w * r) * (r * r);
            let finite = v.is_finite();
            if !finite {
                non_finite += 1;
                log::warn!("non-finite field value at r = {r}, omega = {w:?}; excluded from fit");
            }
            rows.push(ScanRow {
                r,
                omega_index: k,
                omega: w.to_array(),
                deviation: (v - limits[k]).norm(),
                modulus: v.norm(),
                finite,
            });
        }
    }
    let mut report = ScanReport {
        rows,
        fit: None,
        non_finite,
    };
    let sup = report.sup_deviation(&probe.radii);
    report.fit = LogLogFit::fit(&probe.radii, &sup);
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniformityReport {
    pub r: f64,
    pub max_deviation: f64,
    pub median_deviation: f64,
    /// `max/median`, 1 when both vanish.
    pub ratio: f64,
    pub factor: f64,
    pub uniform: bool,
    /// `max_ω |r²f(rω)| − min_ω |r²f(rω)|`.
    pub modulus_spread: f64,
}

/// `max_ω d(r, ω)` at a fixed radius, judged uniform when it is within
/// `factor` of the median.
pub fn omega_uniformity<const N: usize>(
    f: &(impl Fn(Vec3) -> CVector<N> + ?Sized),
    limit_map: &(impl Fn(Vec3) -> CVector<N> + ?Sized),
    r: f64,
    omegas: &[Vec3],
    factor: f64,
) -> UniformityReport {
    let mut devs = Vec::with_capacity(omegas.len());
    let (mut mod_lo, mut mod_hi) = (f64::INFINITY, 0.0f64);
    for &w in omegas {
        let v = f(w * r) * (r * r);
        devs.push((v - limit_map(w)).norm());
        mod_lo = mod_lo.min(v.norm());
        mod_hi = mod_hi.max(v.norm());
    }
    let max = devs.iter().copied().fold(0.0, f64::max);
    devs.sort_by(f64::total_cmp);
    let median = match devs.len() {
        0 => 0.0,
        n if n % 2 == 1 => devs[n / 2],
        n => 0.5 * (devs[n / 2 - 1] + devs[n / 2]),
    };
    let ratio = if median > 0.0 {
        max / median
    } else if max == 0.0 {
        1.0
    } else {
        f64::INFINITY
    };
    UniformityReport {
        r,
        max_deviation: max,
        median_deviation: median,
        ratio,
        factor,
        uniform: ratio <= factor,
        modulus_spread: if omegas.is_empty() { 0.0 } else { mod_hi - mod_lo },
    }
}

/// Both sides of `L(ω) = 0 ⇔ ∫Qf = 0`, each judged against its error
/// estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub integral_norm: f64,
    pub integral_err: f64,
    pub min_limit_norm: f64,
    pub max_limit_norm: f64,
    pub integral_vanishes: bool,
    pub limit_vanishes: bool,
    /// `max_ω | 4π|L(ω)| − |∫Qf| |`.
    pub unitarity_gap: f64,
}

impl EquivalenceReport {
    pub fn consistent(&self) -> bool {
        self.integral_vanishes == self.limit_vanishes
    }
}

pub fn zero_limit_equivalence(limit: &LimitIntegral, omegas: &[Vec3]) -> EquivalenceReport {
    let integral_norm = limit.integral.value.norm();
    let err = limit.integral.err_est;
    let norms: Vec<f64> = omegas.iter().map(|&w| limit.limit_vector(w).norm()).collect();
    let min = norms.iter().copied().fold(f64::INFINITY, f64::min);
    let max = norms.iter().copied().fold(0.0, f64::max);
    let gap = norms
        .iter()
        .map(|n| (4.0 * PI * n - integral_norm).abs())
        .fold(0.0, f64::max);
    EquivalenceReport {
        integral_norm,
        integral_err: err,
        min_limit_norm: if norms.is_empty() { 0.0 } else { min },
        max_limit_norm: max,
        integral_vanishes: integral_norm <= err,
        limit_vanishes: max <= limit.limit_err(),
        unitarity_gap: gap,
    }
}

/// Which of the three regions a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BudgetRegion {
    /// `|y| ≤ R₀`
    Inner,
    /// `|y| > R₀`, `|rω − y| ≤ r/2`
    Near,
    /// `|y| > R₀`, `|rω − y| > r/2`
    Far,
}

/// Geometry of the decomposition for fixed `ω`, `r ≥ 2R₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BudgetGeometry {
    pub omega: Vec3,
    pub r: f64,
    pub r0: f64,
}

impl BudgetGeometry {
    pub fn new(omega: Vec3, r: f64, r0: f64) -> Result<Self, AsymptoticsError> {
        check_unit(omega)?;
        if !(r0 > 0.0) || !(r >= 2.0 * r0) {
            return Err(AsymptoticsError::RadiusTooSmall { r, r0 });
        }
        Ok(BudgetGeometry { omega, r, r0 })
    }

    pub fn in_inner(&self, y: Vec3) -> bool {
        y.norm() <= self.r0
    }

    pub fn in_near(&self, y: Vec3) -> bool {
        y.norm() > self.r0 && (self.omega * self.r - y).norm() <= 0.5 * self.r
    }

    pub fn in_far(&self, y: Vec3) -> bool {
        y.norm() > self.r0 && (self.omega * self.r - y).norm() > 0.5 * self.r
    }

    pub fn region_of(&self, y: Vec3) -> BudgetRegion {
        if self.in_inner(y) {
            BudgetRegion::Inner
        } else if self.in_near(y) {
            BudgetRegion::Near
        } else {
            BudgetRegion::Far
        }
    }

    /// `(i/4π) α·{ω − (ω − y/r)/|ω − y/r|³}`, applied to `v`.
    pub fn kernel_apply(&self, y: Vec3, v: &Spinor4) -> Spinor4 {
        let d = self.omega - y * (1.0 / self.r);
        let dn = d.norm();
        let k = self.omega - d * (1.0 / (dn * dn * dn));
        alpha_dot(k).apply(v) * Complex64::new(0.0, 1.0 / (4.0 * PI))
    }

    /// Upper end of the allowed `μ = ω·n` band on the shell `|y| = ρ` of the
    /// far region.
    pub fn far_band_top(&self, rho: f64) -> f64 {
        let r = self.r;
        ((0.75 * r * r + rho * rho) / (2.0 * r * rho)).min(1.0)
    }
}

/// The three regional integrals whose sum is `r² f(rω) − L(ω)`.
#[derive(Debug, Clone, Copy)]
pub struct ErrorBudget {
    pub geometry: BudgetGeometry,
    /// `R₀^(1−ρ)`, the level `ε` this `R₀` achieves.
    pub eps: f64,
    pub inner: Estimate<Spinor4>,
    pub near: Estimate<Spinor4>,
    pub far: Estimate<Spinor4>,
    /// `r² f(rω) − L(ω)` computed directly.
    pub deviation: Spinor4,
    pub limit_err: f64,
}

impl ErrorBudget {
    pub fn total(&self) -> Spinor4 {
        self.inner.value + self.near.value + self.far.value
    }

    /// `|I + II + III − (r² f(rω) − L(ω))|`.
    pub fn sum_gap(&self) -> f64 {
        (self.total() - self.deviation).norm()
    }

    pub fn combined_err(&self) -> f64 {
        self.inner.err_est + self.near.err_est + self.far.err_est + self.limit_err
    }
}

/// Integrates the deviation kernel over the inner ball, the ball around
/// `rω` (in coordinates centered there) and the rest (shell by shell, with
/// the excluded cap cut out of each shell's polar band).
pub fn error_budget(
    pair: &DiracZeroModePair,
    omega: Vec3,
    r: f64,
    r0: f64,
    limit: &LimitIntegral,
    rule: &QuadratureRule,
) -> Result<ErrorBudget, AsymptoticsError> {
    let geo = BudgetGeometry::new(omega, r, r0)?;
    let g = |y: Vec3| geo.kernel_apply(y, &pair.source(y));
    let third = rule.with_tol(rule.tol / 3.0);

    let inner = integrate_region(&g, &Region::ball(Vec3::ZERO, r0).with_axis(omega), Decay::Compact, &third)?;
    let near = integrate_region(&g, &Region::ball(omega * r, 0.5 * r).with_axis(omega), Decay::Compact, &third)?;

    let band = |rho: f64| (-1.0, geo.far_band_top(rho));
    let far_region = Region::exterior(Vec3::ZERO, r0)
        .with_axis(omega)
        .with_breaks([0.5 * r, 1.5 * r])
        .with_band(&band);
    // on the far region |ω − y/r| ≥ 1/2, so the kernel is at most 5/(4π)
    let far_decay = match source_decay(pair) {
        Decay::Algebraic { c, rho } => Decay::Algebraic {
            c: c * 5.0 / (4.0 * PI),
            rho,
        },
        Decay::Compact => Decay::Compact,
    };
    let far = integrate_region(&g, &far_region, far_decay, &third)?;

    let deviation = pair.f(omega * r) * (r * r) - limit.limit_vector(omega);
    Ok(ErrorBudget {
        geometry: geo,
        eps: r0.powf(1.0 - pair.decay.rho),
        inner,
        near,
        far,
        deviation,
        limit_err: limit.limit_err(),
    })
}

/// Largest relative deviation `|a − b| / |b|` over paired values.
pub fn max_relative_error<V: QuadValue>(pairs: &[(V, V)]) -> f64 {
    pairs
        .iter()
        .map(|(a, b)| (*a - *b).magnitude() / b.magnitude())
        .fold(0.0, f64::max)
}
