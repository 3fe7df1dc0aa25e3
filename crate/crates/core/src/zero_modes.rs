//! Closed-form zero modes, their potentials, the Weyl → Dirac embedding and
//! finite-difference residuals of the differential operators.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clifford::{alpha, alpha_dot, sigma, sigma_dot, Mat2, Mat4, Spinor2, Spinor4, Vec3, I};

pub type WeylField = Arc<dyn Fn(Vec3) -> Spinor2 + Send + Sync>;
pub type DiracField = Arc<dyn Fn(Vec3) -> Spinor4 + Send + Sync>;
pub type VectorPotential = Arc<dyn Fn(Vec3) -> Vec3 + Send + Sync>;
pub type MatrixPotential = Arc<dyn Fn(Vec3) -> Mat4 + Send + Sync>;
pub type ScalarPotential = Arc<dyn Fn(Vec3) -> f64 + Send + Sync>;
pub type MatrixProfile = Arc<dyn Fn(Vec3) -> Mat2 + Send + Sync>;

/// Finite-difference step below which round-off dominates the residual.
pub const MIN_FD_STEP: f64 = 1e-6;
pub const DEFAULT_FD_STEP: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZeroModeError {
    #[error("Assumption (A) requires the decay exponent rho > 1, got rho = {rho}")]
    DecayTooSlow { rho: f64 },
    #[error("decay constant C_q must be positive and finite, got {c_q}")]
    BadDecayConstant { c_q: f64 },
    #[error("phi0 must have unit norm, got |phi0| = {norm}")]
    NonUnitSpinor { norm: f64 },
    #[error("unknown zero-mode profile '{0}'")]
    UnknownProfile(String),
}

/// Declared entrywise bound `|q_jk(x)| ≤ C_q⟨x⟩^(−ρ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayParams {
    pub c_q: f64,
    pub rho: f64,
}

impl DecayParams {
    pub fn new(c_q: f64, rho: f64) -> Result<Self, ZeroModeError> {
        if !(rho > 1.0) {
            return Err(ZeroModeError::DecayTooSlow { rho });
        }
        if !(c_q > 0.0) || !c_q.is_finite() {
            return Err(ZeroModeError::BadDecayConstant { c_q });
        }
        Ok(DecayParams { c_q, rho })
    }

    pub fn envelope(&self, x: Vec3) -> f64 {
        self.c_q * x.bracket().powf(-self.rho)
    }
}

/// Fourth-order central difference of `f` along `e_axis` at `x`.
fn central_derivative<const N: usize>(
    f: &(impl Fn(Vec3) -> crate::clifford::CVector<N> + ?Sized),
    x: Vec3,
    axis: Vec3,
    h: f64,
) -> crate::clifford::CVector<N> {
    let fp1 = f(x + axis * h);
    let fm1 = f(x - axis * h);
    let fp2 = f(x + axis * (2.0 * h));
    let fm2 = f(x - axis * (2.0 * h));
    ((fp1 - fm1) * 8.0 - (fp2 - fm2)) * (1.0 / (12.0 * h))
}

fn check_step(h: f64) {
    if h < MIN_FD_STEP {
        log::warn!("finite-difference step h = {h:e} is below {MIN_FD_STEP:e}; cancellation dominates");
    }
}

/// `σ·(D − A(x))ψ` at `x`, with `D = (1/i)∇` by fourth-order central
/// differences of step `h`.
pub fn weyl_residual(
    psi: &(impl Fn(Vec3) -> Spinor2 + ?Sized),
    a: &(impl Fn(Vec3) -> Vec3 + ?Sized),
    x: Vec3,
    h: f64,
) -> Spinor2 {
    check_step(h);
    let minus_i = Complex64::new(0.0, -1.0);
    let psi_x = psi(x);
    let mut out = sigma_dot(a(x)).apply(&psi_x) * -1.0;
    for (j, e) in [Vec3::E1, Vec3::E2, Vec3::E3].into_iter().enumerate() {
        let d = central_derivative(psi, x, e, h);
        out += sigma(j + 1).apply(&d) * minus_i;
    }
    out
}

/// `(α·D + Q(x)) f` at `x` by fourth-order central differences.
pub fn dirac_residual(
    f: &(impl Fn(Vec3) -> Spinor4 + ?Sized),
    q: &(impl Fn(Vec3) -> Mat4 + ?Sized),
    x: Vec3,
    h: f64,
) -> Spinor4 {
    check_step(h);
    let minus_i = Complex64::new(0.0, -1.0);
    let mut out = q(x).apply(&f(x));
    for (j, e) in [Vec3::E1, Vec3::E2, Vec3::E3].into_iter().enumerate() {
        let d = central_derivative(f, x, e, h);
        out += alpha(j + 1).apply(&d) * minus_i;
    }
    out
}

/// The Loss–Yau zero mode
/// `ψ(x) = ⟨x⟩⁻³(I₂ + iσ·x)φ₀` with potential
/// `A(x) = 3⟨x⟩⁻⁴{(1−|x|²)w₀ + 2(w₀·x)x + 2w₀×x}`, `w₀ = (φ₀·σ_jφ₀)_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossYauMode {
    pub phi0: Spinor2,
    pub w0: Vec3,
}

impl Default for LossYauMode {
    fn default() -> Self {
        LossYauMode::new(Spinor2::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)))
            .expect("unit spinor")
    }
}

impl LossYauMode {
    pub fn new(phi0: Spinor2) -> Result<Self, ZeroModeError> {
        let norm = phi0.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(ZeroModeError::NonUnitSpinor { norm });
        }
        // φ₀·(σ_jφ₀) is the Hermitian pairing; it is real because σ_j is Hermitian
        let w = |j: usize| phi0.inner(&sigma(j).apply(&phi0)).re;
        Ok(LossYauMode {
            phi0,
            w0: Vec3::new(w(1), w(2), w(3)),
        })
    }

    pub fn psi(&self, x: Vec3) -> Spinor2 {
        let b = x.bracket();
        let m = Mat2::identity() + sigma_dot(x) * I;
        m.apply(&self.phi0) * b.powi(-3)
    }

    pub fn potential(&self, x: Vec3) -> Vec3 {
        let b2 = 1.0 + x.norm_sq();
        let w = self.w0;
        let v = w * (1.0 - x.norm_sq()) + x * (2.0 * w.dot(x)) + w.cross(x) * 2.0;
        v * (3.0 / (b2 * b2))
    }

    /// `lim r²ψ(rω) = i(σ·ω)φ₀`.
    pub fn limit(&self, omega: Vec3) -> Spinor2 {
        (sigma_dot(omega) * I).apply(&self.phi0)
    }

    /// The same mode written as `⟨x⟩⁻²U(x)φ₀` with `U(x) = ⟨x⟩⁻¹(I₂ + iσ·x)`
    /// and `U_∞(ω) = iσ·ω`.
    pub fn as_amn(&self) -> AmnMode {
        let me = *self;
        AmnMode {
            phi0: self.phi0,
            u: Arc::new(|x: Vec3| (Mat2::identity() + sigma_dot(x) * I) * (1.0 / x.bracket())),
            u_inf: Arc::new(|w: Vec3| sigma_dot(w) * I),
            potential: Arc::new(move |x| me.potential(x)),
        }
    }

    pub fn weyl_field(&self) -> WeylField {
        let me = *self;
        Arc::new(move |x| me.psi(x))
    }

    pub fn potential_field(&self) -> VectorPotential {
        let me = *self;
        Arc::new(move |x| me.potential(x))
    }

    /// Entries of `−α·A_L` are bounded by `|A_L| = 3⟨x⟩⁻²`, and `|ψ_L| = ⟨x⟩⁻²`.
    pub fn dirac_pair(&self, embedding: Embedding) -> DiracZeroModePair {
        let decay = DecayParams { c_q: 3.0, rho: 2.0 };
        let mut pair = embed_weyl_to_dirac(
            self.weyl_field(),
            self.potential_field(),
            None,
            decay,
            embedding,
        )
        .expect("Loss-Yau decay satisfies Assumption (A)");
        pair.field_bound = Some(1.0);
        pair
    }
}

/// A zero mode of the form `ψ(x) = ⟨x⟩⁻²U(x)φ₀` with a declared limit
/// profile `U_∞(ω) = lim U(rω)`.
#[derive(Clone)]
pub struct AmnMode {
    pub phi0: Spinor2,
    pub u: MatrixProfile,
    pub u_inf: MatrixProfile,
    pub potential: VectorPotential,
}

impl fmt::Debug for AmnMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AmnMode").field("phi0", &self.phi0).finish_non_exhaustive()
    }
}

impl AmnMode {
    pub fn psi(&self, x: Vec3) -> Spinor2 {
        (self.u)(x).apply(&self.phi0) * (1.0 / (1.0 + x.norm_sq()))
    }

    /// `U_∞(ω)φ₀`.
    pub fn declared_limit(&self, omega: Vec3) -> Spinor2 {
        (self.u_inf)(omega).apply(&self.phi0)
    }

    /// For each radius, `max_ω ‖U(rω) − U_∞(ω)‖_max`.
    pub fn limit_gaps(&self, omegas: &[Vec3], radii: &[f64]) -> Vec<f64> {
        radii
            .iter()
            .map(|&r| {
                omegas
                    .iter()
                    .map(|&w| (self.u)(w * r).max_abs_diff(&(self.u_inf)(w)))
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    /// The declared limit is plausible when the gaps shrink along the ladder
    /// and end below `tol`.
    pub fn limit_audit_passes(&self, omegas: &[Vec3], radii: &[f64], tol: f64) -> bool {
        let gaps = self.limit_gaps(omegas, radii);
        gaps.iter().all(|g| g.is_finite())
            && gaps.windows(2).all(|w| w[1] <= w[0])
            && gaps.last().is_some_and(|&g| g <= tol)
    }

    pub fn weyl_field(&self) -> WeylField {
        let me = self.clone();
        Arc::new(move |x| me.psi(x))
    }
}

pub type AmnFactory = fn() -> AmnMode;

/// Named AMN-form profiles selectable from configuration.
#[derive(Clone)]
pub struct AmnRegistry {
    entries: BTreeMap<String, AmnFactory>,
}

impl Default for AmnRegistry {
    fn default() -> Self {
        let mut r = AmnRegistry {
            entries: BTreeMap::new(),
        };
        r.register("loss-yau", || LossYauMode::default().as_amn());
        r
    }
}

impl AmnRegistry {
    pub fn register(&mut self, name: &str, factory: AmnFactory) {
        self.entries.insert(name.to_string(), factory);
    }

    pub fn get(&self, name: &str) -> Result<AmnMode, ZeroModeError> {
        self.entries
            .get(name)
            .map(|f| f())
            .ok_or_else(|| ZeroModeError::UnknownProfile(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

/// Which 2-block of the 4-spinor carries the Weyl spinor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Embedding {
    #[default]
    Upper,
    Lower,
}

/// A 4-spinor field `f` with its matrix potential `Q` and declared decay.
#[derive(Clone)]
pub struct DiracZeroModePair {
    pub field: DiracField,
    pub potential: MatrixPotential,
    pub decay: DecayParams,
    /// Declared `C_f` with `|f(x)| ≤ C_f⟨x⟩⁻²`, when known.
    pub field_bound: Option<f64>,
}

impl fmt::Debug for DiracZeroModePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiracZeroModePair")
            .field("decay", &self.decay)
            .field("field_bound", &self.field_bound)
            .finish_non_exhaustive()
    }
}

/// Sampled conformance with Assumption (A).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssumptionAudit {
    pub samples: usize,
    pub max_hermitian_defect: f64,
    /// `max_x max_jk |q_jk(x)| / (C_q⟨x⟩^(−ρ))`; at most 1 when conforming.
    pub max_decay_ratio: f64,
}

impl AssumptionAudit {
    pub fn passes(&self) -> bool {
        self.max_hermitian_defect <= 1e-12 && self.max_decay_ratio <= 1.0 + 1e-12
    }
}

impl DiracZeroModePair {
    /// `f ≡ 0`, `Q ≡ 0`.
    pub fn trivial() -> Self {
        DiracZeroModePair {
            field: Arc::new(|_| Spinor4::zero()),
            potential: Arc::new(|_| Mat4::zero()),
            decay: DecayParams { c_q: 1.0, rho: 2.0 },
            field_bound: Some(0.0),
        }
    }

    pub fn f(&self, x: Vec3) -> Spinor4 {
        (self.field)(x)
    }

    pub fn q(&self, x: Vec3) -> Mat4 {
        (self.potential)(x)
    }

    /// `Q(y)f(y)`.
    pub fn source(&self, y: Vec3) -> Spinor4 {
        self.q(y).apply(&self.f(y))
    }

    pub fn audit(&self, samples: &[Vec3]) -> AssumptionAudit {
        let mut defect: f64 = 0.0;
        let mut ratio: f64 = 0.0;
        for &x in samples {
            let q = self.q(x);
            defect = defect.max(q.hermitian_defect());
            ratio = ratio.max(q.max_abs_entry() / self.decay.envelope(x));
        }
        AssumptionAudit {
            samples: samples.len(),
            max_hermitian_defect: defect,
            max_decay_ratio: ratio,
        }
    }

    /// Largest `|(α·D + Q)f|` over `samples`.
    pub fn max_residual(&self, samples: &[Vec3], h: f64) -> f64 {
        let f = |x: Vec3| self.f(x);
        let q = |x: Vec3| self.q(x);
        samples
            .iter()
            .map(|&x| dirac_residual(&f, &q, x, h).norm())
            .fold(0.0, f64::max)
    }
}

/// `f = ᵗ(ψ, 0)` (or `ᵗ(0, ψ)`) with `Q(x) = −α·A(x) + q(x)I₄`.
///
/// `α·(D − A)` maps `ᵗ(u, 0)` to `ᵗ(0, σ·(D − A)u)`, so a Weyl zero mode
/// embeds as a Dirac zero mode when `q` is absent.
pub fn embed_weyl_to_dirac(
    psi: WeylField,
    a: VectorPotential,
    q: Option<ScalarPotential>,
    decay: DecayParams,
    embedding: Embedding,
) -> Result<DiracZeroModePair, ZeroModeError> {
    let decay = DecayParams::new(decay.c_q, decay.rho)?;
    let field: DiracField = match embedding {
        Embedding::Upper => Arc::new(move |x| Spinor4::from_halves(psi(x), Spinor2::zero())),
        Embedding::Lower => Arc::new(move |x| Spinor4::from_halves(Spinor2::zero(), psi(x))),
    };
    let potential: MatrixPotential = match q {
        None => Arc::new(move |x| -alpha_dot(a(x))),
        Some(q) => Arc::new(move |x| Mat4::identity() * q(x) - alpha_dot(a(x))),
    };
    Ok(DiracZeroModePair {
        field,
        potential,
        decay,
        field_bound: None,
    })
}

/// Largest difference quotient `|f(x) − f(x′)| / |x − x′|` over the given
/// pairs; a finite value is the sampled continuity certificate.
pub fn lipschitz_estimate<const N: usize>(
    f: &(impl Fn(Vec3) -> crate::clifford::CVector<N> + ?Sized),
    pairs: &[(Vec3, Vec3)],
) -> f64 {
    pairs
        .iter()
        .filter(|(x, y)| (*x - *y).norm() > 0.0)
        .map(|&(x, y)| (f(x) - f(y)).norm() / (x - y).norm())
        .fold(0.0, f64::max)
}
