//! Strict TOML experiment configuration and flag overrides.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{fibonacci_directions, geometric_ladder, AsymptoticProbe};
use crate::clifford::{Spinor2, Vec3};
use crate::quadrature::{QuadratureRule, SphereGrid};
use crate::zero_modes::{
    embed_weyl_to_dirac, AmnRegistry, DecayParams, DiracZeroModePair, Embedding, LossYauMode, VectorPotential,
    WeylField,
};

use super::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Seed of the Halton sample sets.
    pub seed: u64,
    pub family: FamilyConfig,
    pub rule: RuleConfig,
    pub probe: ProbeConfig,
    pub verify: VerifyConfig,
    pub budget: BudgetConfig,
    pub residual: ResidualConfig,
    /// Left out of reports so the output location does not change them.
    #[serde(skip_serializing)]
    pub outputs: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 1,
            family: FamilyConfig::default(),
            rule: RuleConfig::default(),
            probe: ProbeConfig::default(),
            verify: VerifyConfig::default(),
            budget: BudgetConfig::default(),
            residual: ResidualConfig::default(),
            outputs: OutputConfig::default(),
        }
    }
}

/// `name` is `loss-yau`, `zero-potential` or `amn:<profile>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FamilyConfig {
    pub name: String,
    /// `φ₀` as `[[re, im], [re, im]]`.
    pub phi0: [[f64; 2]; 2],
    pub embedding: Embedding,
    /// Overrides the family's declared decay of `Q`.
    pub decay: Option<DecayConfig>,
    /// Declared `C_f`; used for the tail bounds when given.
    pub c_f: Option<f64>,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig {
            name: "loss-yau".into(),
            phi0: [[1.0, 0.0], [0.0, 0.0]],
            embedding: Embedding::Upper,
            decay: None,
            c_f: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayConfig {
    pub c_q: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SphereKind {
    GaussProduct,
    Fibonacci,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RuleConfig {
    pub radial_order: usize,
    pub sphere_kind: SphereKind,
    pub sphere_points: usize,
    pub r_max: f64,
    pub tol: f64,
    pub adapt_depth: usize,
    pub max_panels: usize,
}

impl Default for RuleConfig {
    fn default() -> Self {
        let d = QuadratureRule::default();
        RuleConfig {
            radial_order: d.radial_order,
            sphere_kind: SphereKind::GaussProduct,
            sphere_points: d.sphere.point_count(),
            r_max: d.r_max,
            tol: d.tol,
            adapt_depth: d.adapt_depth,
            max_panels: d.max_panels,
        }
    }
}

impl RuleConfig {
    pub fn to_rule(&self) -> QuadratureRule {
        let sphere = match self.sphere_kind {
            SphereKind::GaussProduct => SphereGrid::gauss_with_points(self.sphere_points),
            SphereKind::Fibonacci => SphereGrid::Fibonacci {
                points: self.sphere_points,
            },
        };
        QuadratureRule {
            radial_order: self.radial_order,
            sphere,
            r_max: self.r_max,
            tol: self.tol,
            adapt_depth: self.adapt_depth,
            max_panels: self.max_panels,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeConfig {
    /// Number of Fibonacci directions.
    pub omega_count: usize,
    pub radii: Vec<f64>,
    /// Uniformity is judged by `max_ω d / median_ω d ≤ uniformity_factor`.
    pub uniformity_factor: f64,
    /// Relative tolerance for limits against a closed form, when one exists.
    pub limit_rel_tol: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            omega_count: 64,
            radii: geometric_ladder(10.0, 2.0, 6),
            uniformity_factor: 1.0 + 1e-10,
            limit_rel_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub points: usize,
    pub radius: f64,
    pub fd_step: f64,
    pub residual_tol: f64,
    pub envelope_radii: Vec<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            points: 100,
            radius: 10.0,
            fd_step: 1e-3,
            residual_tol: 1e-5,
            envelope_radii: vec![0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 40.0, 80.0, 160.0],
        }
    }
}

/// Two series: `R₀ = r0` fixed with `r` over `radii`, and `r = r_over_r0·R₀`
/// with `R₀` over `r0_ladder`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BudgetConfig {
    pub omega: [f64; 3],
    pub r0: f64,
    pub radii: Vec<f64>,
    pub r0_ladder: Vec<f64>,
    pub r_over_r0: f64,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        BudgetConfig {
            omega: [0.6, 0.0, 0.8],
            r0: 5.0,
            radii: vec![20.0, 40.0, 80.0, 160.0],
            r0_ladder: vec![5.0, 10.0, 20.0, 40.0],
            r_over_r0: 8.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResidualConfig {
    pub count: usize,
    pub radius: f64,
    pub far_field: Vec<f64>,
    pub far_direction: [f64; 3],
    /// Quadrature tolerance for `T f`; the global `--tol` overrides it.
    pub tol: f64,
    pub max_residual: f64,
}

impl Default for ResidualConfig {
    fn default() -> Self {
        ResidualConfig {
            count: 20,
            radius: 5.0,
            far_field: crate::integral_operator::FAR_FIELD_RADII.to_vec(),
            far_direction: [1.0, 2.0, 2.0],
            tol: 1e-5,
            max_residual: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
    Both,
}

impl Format {
    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }

    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: Format,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            format: Format::Both,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub r_max: Option<f64>,
    pub sphere_points: Option<usize>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub radial_order: Option<usize>,
    pub adapt_depth: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = &o.out {
            self.outputs.dir = v.clone();
        }
        if let Some(v) = o.tol {
            self.rule.tol = v;
            self.residual.tol = v;
        }
        if let Some(v) = o.r_max {
            self.rule.r_max = v;
        }
        if let Some(v) = o.sphere_points {
            self.rule.sphere_points = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.format {
            self.outputs.format = v;
        }
        if let Some(v) = o.radial_order {
            self.rule.radial_order = v;
        }
        if let Some(v) = o.adapt_depth {
            self.rule.adapt_depth = v;
        }
    }

    /// Checks every numeric parameter against the preconditions of the
    /// operation that consumes it.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        self.rule.to_rule().validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.probe_rule_checked()?;
        if !(self.residual.tol > 0.0) {
            return bad(format!("residual.tol must be positive, got {}", self.residual.tol));
        }
        if self.verify.points == 0 || !(self.verify.radius > 0.0) || !(self.verify.fd_step > 0.0) {
            return bad("verify needs points >= 1, radius > 0 and fd_step > 0".into());
        }
        if self.verify.envelope_radii.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
            return bad("verify.envelope_radii must be finite and non-negative".into());
        }
        let w = Vec3::from_array(self.budget.omega);
        if !w.is_finite() || w.norm() == 0.0 {
            return bad(format!("budget.omega must be a non-zero vector, got {:?}", self.budget.omega));
        }
        if !(self.budget.r0 > 0.0) || self.budget.r0_ladder.iter().any(|r| !(*r > 0.0)) || !(self.budget.r_over_r0 > 0.0) {
            return bad("budget radii must be positive".into());
        }
        if !(self.residual.radius > 0.0) || self.residual.far_field.iter().any(|r| !(*r > 0.0)) {
            return bad("residual radii must be positive".into());
        }
        if Vec3::from_array(self.residual.far_direction).norm() == 0.0 {
            return bad("residual.far_direction must be non-zero".into());
        }
        Family::build(&self.family)?;
        Ok(())
    }

    fn probe_rule_checked(&self) -> Result<AsymptoticProbe, CliError> {
        if self.probe.omega_count == 0 {
            return Err(CliError::Config("probe.omega_count must be at least 1".into()));
        }
        AsymptoticProbe::new(
            fibonacci_directions(self.probe.omega_count),
            self.probe.radii.clone(),
            self.rule.to_rule(),
        )
        .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn probe(&self) -> AsymptoticProbe {
        self.probe_rule_checked().expect("validated configuration")
    }
}

/// A resolved zero-mode family.
pub struct Family {
    pub name: String,
    pub pair: DiracZeroModePair,
    pub weyl: Option<WeylData>,
}

/// The 2-spinor data of families built from a Weyl–Dirac zero mode.
pub struct WeylData {
    pub psi: WeylField,
    pub potential: VectorPotential,
    /// Closed-form `lim r²ψ(rω)`.
    pub limit: WeylField,
    /// Decay of the Weyl limit integrand, bounded by `2|A||ψ|`.
    pub integrand_decay: crate::quadrature::Decay,
}

impl Family {
    pub fn build(cfg: &FamilyConfig) -> Result<Family, CliError> {
        let cerr = |e: crate::zero_modes::ZeroModeError| CliError::Config(e.to_string());
        let decay = match cfg.decay {
            Some(d) => DecayParams::new(d.c_q, d.rho).map_err(cerr)?,
            None => DecayParams { c_q: 3.0, rho: 2.0 },
        };
        if let Some(c) = cfg.c_f {
            if !(c >= 0.0) || !c.is_finite() {
                return Err(CliError::Config(format!("family.c_f must be finite and non-negative, got {c}")));
            }
        }
        let name = cfg.name.clone();
        if name == "zero-potential" {
            return Ok(Family {
                name,
                pair: DiracZeroModePair {
                    decay,
                    ..DiracZeroModePair::trivial()
                },
                weyl: None,
            });
        }
        let (psi, potential, limit): (WeylField, VectorPotential, WeylField) = if name == "loss-yau" {
            let [[a, b], [c, d]] = cfg.phi0;
            let phi0 = Spinor2::new(Complex64::new(a, b), Complex64::new(c, d));
            let m = LossYauMode::new(phi0).map_err(cerr)?;
            (m.weyl_field(), m.potential_field(), Arc::new(move |w| m.limit(w)))
        } else if let Some(id) = name.strip_prefix("amn:") {
            let amn = AmnRegistry::default().get(id).map_err(cerr)?;
            let limit_amn = amn.clone();
            (amn.weyl_field(), amn.potential.clone(), Arc::new(move |w| limit_amn.declared_limit(w)))
        } else {
            return Err(CliError::Config(format!(
                "unknown family '{name}'; expected loss-yau, zero-potential or amn:<profile>"
            )));
        };
        let mut pair = embed_weyl_to_dirac(psi.clone(), potential.clone(), None, decay, cfg.embedding).map_err(cerr)?;
        // |ψ| ≤ ⟨x⟩⁻² holds for every unitary profile U
        pair.field_bound = Some(cfg.c_f.unwrap_or(1.0));
        let c_psi = pair.field_bound.unwrap_or(1.0);
        Ok(Family {
            name,
            pair,
            weyl: Some(WeylData {
                psi,
                potential,
                limit,
                integrand_decay: crate::quadrature::Decay::Algebraic {
                    c: 4.0 * decay.c_q * c_psi,
                    rho: decay.rho,
                },
            }),
        })
    }
}
