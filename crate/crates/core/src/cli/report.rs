use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use crate::asymptotics::{
    error_budget, omega_uniformity, radial_scan, weyl_limit_vector, zero_limit_equivalence, BudgetGeometry,
    EquivalenceReport, ErrorBudget, LimitIntegral, LogLogFit, UniformityReport,
};
use crate::clifford::{Spinor2, Spinor4, Vec3};
use crate::integral_operator::{decay_envelope, fixed_point_residual, Envelope};
use crate::quadrature::{Estimate, QuadratureRule};
use crate::sampling::ball_samples;
use crate::zero_modes::{dirac_residual, weyl_residual, Embedding};

use super::config::{ExperimentConfig, Family};
use super::{CliError, EXIT_PASS, EXIT_TOLERANCE};

pub const SCHEMA: u32 = 1;

/// Failed checks and the files written.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub failures: Vec<String>,
    pub written: Vec<PathBuf>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            EXIT_PASS
        } else {
            EXIT_TOLERANCE
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct Check {
    name: String,
    value: f64,
    err_est: f64,
    threshold: f64,
    pass: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, err_est: f64, threshold: f64) -> Check {
        Check {
            name: name.into(),
            value,
            err_est,
            threshold,
            pass: value <= threshold,
        }
    }
}

fn failures_of(checks: &[Check]) -> Vec<String> {
    checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{}: {:e} (err_est {:e}) exceeds {:e}", c.name, c.value, c.err_est, c.threshold))
        .collect()
}

/// Full accounting of one quadrature, reported whether or not it converged.
#[derive(Debug, Clone, Copy, Serialize)]
struct QuadratureAccount {
    converged: bool,
    tol: f64,
    err_est: f64,
    radial_err: f64,
    angular_err: f64,
    roundoff: f64,
    tail: f64,
    panels: usize,
    evaluations: usize,
}

impl<V> From<&Estimate<V>> for QuadratureAccount {
    fn from(e: &Estimate<V>) -> Self {
        QuadratureAccount {
            converged: e.converged,
            tol: e.tol,
            err_est: e.err_est,
            radial_err: e.radial_err,
            angular_err: e.angular_err,
            roundoff: e.roundoff,
            tail: e.tail,
            panels: e.panels,
            evaluations: e.evaluations,
        }
    }
}

fn spinor_json<const N: usize>(v: &crate::clifford::CVector<N>) -> Vec<Complex64> {
    v.0.to_vec()
}

fn embed_limit(v: Spinor2, embedding: Embedding) -> Spinor4 {
    match embedding {
        Embedding::Upper => Spinor4::from_halves(v, Spinor2::zero()),
        Embedding::Lower => Spinor4::from_halves(Spinor2::zero(), v),
    }
}

struct Writer<'a> {
    cfg: &'a ExperimentConfig,
    written: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Result<Self, CliError> {
        let dir = &cfg.outputs.dir;
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.clone(),
            source,
        })?;
        Ok(Writer { cfg, written: Vec::new() })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.cfg.outputs.dir.join(name)
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        if !self.cfg.outputs.format.json() {
            return Ok(());
        }
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
        text.push('\n');
        write_file(&path, text.as_bytes())?;
        self.written.push(path);
        Ok(())
    }

    fn csv<R: Serialize>(&mut self, name: &str, rows: &[R]) -> Result<(), CliError> {
        if !self.cfg.outputs.format.csv() {
            return Ok(());
        }
        let path = self.path(name);
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in rows {
            w.serialize(row).map_err(|e| io_err(&path, e))?;
        }
        let bytes = w.into_inner().map_err(|e| io_err(&path, e))?;
        write_file(&path, &bytes)?;
        self.written.push(path);
        Ok(())
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

// ---------------------------------------------------------------- verify

#[derive(Serialize)]
struct VerifyReport<'a> {
    schema: u32,
    command: &'static str,
    family: &'a str,
    config: &'a ExperimentConfig,
    pass: bool,
    checks: &'a [Check],
    envelope: Envelope,
    limit_integral: LimitIntegralJson,
}

#[derive(Serialize)]
struct LimitIntegralJson {
    value: Vec<Complex64>,
    norm: f64,
    quadrature: QuadratureAccount,
}

impl From<&LimitIntegral> for LimitIntegralJson {
    fn from(l: &LimitIntegral) -> Self {
        LimitIntegralJson {
            value: spinor_json(&l.integral.value),
            norm: l.integral.value.norm(),
            quadrature: (&l.integral).into(),
        }
    }
}

fn limit_integral(family: &Family, rule: &QuadratureRule) -> Result<LimitIntegral, CliError> {
    LimitIntegral::compute(&family.pair, rule).map_err(|e| CliError::Config(e.to_string()))
}

fn limit_check(lim: &LimitIntegral) -> Check {
    let e = &lim.integral;
    Check {
        name: "limit-integral quadrature err_est".into(),
        value: e.err_est,
        err_est: e.err_est,
        threshold: e.tol,
        pass: e.converged,
    }
}

/// Residuals of the zero-mode equation, the Assumption (A) audit, the
/// decay envelope and the quadrature of `∫Qf`.
pub fn cmd_verify(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let family = Family::build(&cfg.family)?;
    let rule = cfg.rule.to_rule();
    let v = &cfg.verify;
    let samples = ball_samples(v.points, v.radius, cfg.seed);
    let mut checks = Vec::new();

    // discretization error estimated from the step-doubling difference
    let residuals = |h: f64| -> Vec<Vec<Complex64>> {
        match &family.weyl {
            Some(w) => samples
                .iter()
                .map(|&x| weyl_residual(&*w.psi, &*w.potential, x, h).0.to_vec())
                .collect(),
            None => {
                let f = |x: Vec3| family.pair.f(x);
                let q = |x: Vec3| family.pair.q(x);
                samples.iter().map(|&x| dirac_residual(&f, &q, x, h).0.to_vec()).collect()
            }
        }
    };
    let norm = |v: &[Complex64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let at_h = residuals(v.fd_step);
    let at_2h = residuals(2.0 * v.fd_step);
    let res_h: Vec<f64> = at_h.iter().map(|r| norm(r)).collect();
    let res_2h: Vec<f64> = at_h
        .iter()
        .zip(&at_2h)
        .map(|(a, b)| norm(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>()))
        .collect();
    let max_res = res_h.iter().copied().fold(0.0, f64::max);
    let fd_err = res_2h.iter().copied().fold(0.0, f64::max) / 15.0;
    checks.push(Check::at_most("zero-mode residual (max)", max_res, fd_err, v.residual_tol));

    let audit = family.pair.audit(&samples);
    checks.push(Check::at_most("hermitian defect of Q (max)", audit.max_hermitian_defect, 0.0, 1e-12));
    checks.push(Check::at_most(
        "|q_jk| / (C_q <x>^-rho) (max)",
        audit.max_decay_ratio,
        0.0,
        1.0 + 1e-12,
    ));

    let omegas = crate::asymptotics::fibonacci_directions(cfg.probe.omega_count);
    let f = |x: Vec3| family.pair.f(x);
    let envelope = decay_envelope(&f, &v.envelope_radii, &omegas);
    if let Some(bound) = family.pair.field_bound {
        checks.push(Check::at_most("sampled C_f against declared bound", envelope.c_f, 0.0, bound * (1.0 + 1e-12)));
    }

    let lim = limit_integral(&family, &rule)?;
    checks.push(limit_check(&lim));

    let failures = failures_of(&checks);
    let report = VerifyReport {
        schema: SCHEMA,
        command: "verify",
        family: &family.name,
        config: cfg,
        pass: failures.is_empty(),
        checks: &checks,
        envelope,
        limit_integral: (&lim).into(),
    };
    let mut w = Writer::new(cfg)?;
    w.json("verify.json", &report)?;
    w.csv("verify.csv", &checks)?;
    Ok(Outcome {
        failures,
        written: w.written,
    })
}

// ----------------------------------------------------------------- limit

#[derive(Serialize)]
struct LimitRow {
    omega_index: usize,
    omega: [f64; 3],
    value: Vec<Complex64>,
    modulus: f64,
    err_est: f64,
    /// Independently integrated 2-spinor limit, for Weyl families.
    weyl_value: Option<Vec<Complex64>>,
    weyl_err_est: Option<f64>,
    /// `|L − L_closed| / |L_closed|`, for families with a closed form.
    closed_form_rel_err: Option<f64>,
    weyl_closed_form_rel_err: Option<f64>,
}

#[derive(Serialize)]
struct ScanCsvRow {
    r: f64,
    omega_index: usize,
    omega_x: f64,
    omega_y: f64,
    omega_z: f64,
    deviation: f64,
    err_est: f64,
    modulus: f64,
    finite: bool,
}

#[derive(Serialize)]
struct SupRow {
    r: f64,
    sup_deviation: f64,
    err_est: f64,
}

#[derive(Serialize)]
struct FitJson {
    slope: Option<f64>,
    stderr: Option<f64>,
    intercept: Option<f64>,
    points: usize,
    expected_slope: f64,
    band: f64,
    checked: bool,
}

#[derive(Serialize)]
struct LimitReport<'a> {
    schema: u32,
    command: &'static str,
    family: &'a str,
    config: &'a ExperimentConfig,
    pass: bool,
    checks: &'a [Check],
    limit_integral: LimitIntegralJson,
    limits: Vec<LimitRow>,
    scan: Vec<ScanCsvRow>,
    fit: FitJson,
    uniformity: UniformityReport,
    equivalence: EquivalenceReport,
    budget: Vec<BudgetRow>,
}

/// Fitted slopes on families with a closed form are held to this band
/// around `−(ρ − 1)`.
const SLOPE_BAND: f64 = 0.1;

pub fn cmd_limit(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let family = Family::build(&cfg.family)?;
    let probe = cfg.probe();
    let rule = probe.rule.clone();
    let lim = limit_integral(&family, &rule)?;
    let limit_err = lim.limit_err();
    let mut checks = vec![limit_check(&lim)];

    let mut limits = Vec::with_capacity(probe.omegas.len());
    let mut worst_closed: f64 = 0.0;
    let mut worst_weyl: f64 = 0.0;
    let mut weyl_ok = true;
    let mut weyl_err: f64 = 0.0;
    for (k, &w) in probe.omegas.iter().enumerate() {
        let value = lim.limit_vector(w);
        let mut row = LimitRow {
            omega_index: k,
            omega: w.to_array(),
            value: spinor_json(&value),
            modulus: value.norm(),
            err_est: limit_err,
            weyl_value: None,
            weyl_err_est: None,
            closed_form_rel_err: None,
            weyl_closed_form_rel_err: None,
        };
        if let Some(wd) = &family.weyl {
            let closed = (wd.limit)(w);
            let rel = |v: Spinor2| (v - closed).norm() / closed.norm();
            let closed4 = embed_limit(closed, cfg.family.embedding);
            let e = (value - closed4).norm() / closed4.norm();
            let wl = weyl_limit_vector(&*wd.psi, &*wd.potential, w, wd.integrand_decay, &rule)
                .map_err(|e| CliError::Config(e.to_string()))?;
            weyl_ok &= wl.converged;
            weyl_err = weyl_err.max(wl.err_est);
            worst_closed = worst_closed.max(e);
            worst_weyl = worst_weyl.max(rel(wl.value));
            row.weyl_value = Some(spinor_json(&wl.value));
            row.weyl_err_est = Some(wl.err_est);
            row.closed_form_rel_err = Some(e);
            row.weyl_closed_form_rel_err = Some(rel(wl.value));
        }
        limits.push(row);
    }
    if family.weyl.is_some() {
        let tol = cfg.probe.limit_rel_tol;
        checks.push(Check::at_most("limit vs closed form (max rel)", worst_closed, limit_err, tol));
        checks.push(Check::at_most("Weyl limit vs closed form (max rel)", worst_weyl, weyl_err, tol));
        checks.push(Check {
            name: "Weyl limit quadratures converged".into(),
            value: if weyl_ok { 0.0 } else { 1.0 },
            err_est: 0.0,
            threshold: 0.0,
            pass: weyl_ok,
        });
    }

    let f = |x: Vec3| family.pair.f(x);
    let lmap = |w: Vec3| lim.limit_vector(w);
    let scan = radial_scan(&f, &lmap, &probe);
    let sup = scan.sup_deviation(&probe.radii);
    let expected = -(family.pair.decay.rho - 1.0).min(1.0);
    let fit = scan.fit;
    let slope_checked = family.weyl.is_some();
    if slope_checked {
        let (slope, stderr) = fit.map_or((f64::NAN, f64::NAN), |f| (f.slope, f.stderr));
        checks.push(Check {
            name: "radial scan slope".into(),
            value: slope,
            err_est: stderr,
            threshold: expected,
            pass: fit.is_some_and(|f| f.slope_within(expected, SLOPE_BAND)),
        });
    }
    let r_top = *probe.radii.last().expect("validated probe");
    let uniformity = omega_uniformity(&f, &lmap, r_top, &probe.omegas, cfg.probe.uniformity_factor);
    checks.push(Check {
        name: "uniformity max/median".into(),
        value: uniformity.ratio,
        err_est: limit_err / uniformity.median_deviation.max(f64::MIN_POSITIVE),
        threshold: uniformity.factor,
        pass: uniformity.uniform,
    });
    let equivalence = zero_limit_equivalence(&lim, &probe.omegas);
    checks.push(Check {
        name: "L = 0 iff integral of Qf = 0".into(),
        value: equivalence.unitarity_gap,
        err_est: lim.integral.err_est,
        threshold: lim.integral.err_est,
        pass: equivalence.consistent(),
    });

    let scan_rows: Vec<ScanCsvRow> = scan
        .rows
        .iter()
        .map(|r| ScanCsvRow {
            r: r.r,
            omega_index: r.omega_index,
            omega_x: r.omega[0],
            omega_y: r.omega[1],
            omega_z: r.omega[2],
            deviation: r.deviation,
            err_est: limit_err,
            modulus: r.modulus,
            finite: r.finite,
        })
        .collect();
    let sup_rows: Vec<SupRow> = probe
        .radii
        .iter()
        .zip(&sup)
        .map(|(&r, &d)| SupRow {
            r,
            sup_deviation: d,
            err_est: limit_err,
        })
        .collect();

    let budget = budget_rows(cfg, &family, &lim, &rule)?;
    for b in &budget {
        checks.push(Check {
            name: format!(
                "sum identity at r = {}, R0 = {}{}",
                b.r,
                b.r0,
                if b.converged { "" } else { " (region quadrature not converged)" }
            ),
            value: b.sum_gap,
            err_est: b.combined_err,
            threshold: b.combined_err,
            pass: b.sum_ok && b.converged,
        });
    }

    let failures = failures_of(&checks);
    let mut w = Writer::new(cfg)?;
    w.csv("limit_scan.csv", &scan_rows)?;
    w.csv("limit_sup.csv", &sup_rows)?;
    w.csv("limits.csv", &limits.iter().map(LimitCsvRow::from).collect::<Vec<_>>())?;
    let report = LimitReport {
        schema: SCHEMA,
        command: "limit",
        family: &family.name,
        config: cfg,
        pass: failures.is_empty(),
        checks: &checks,
        limit_integral: (&lim).into(),
        limits,
        scan: scan_rows,
        fit: FitJson {
            slope: fit.map(|f| f.slope),
            stderr: fit.map(|f| f.stderr),
            intercept: fit.map(|f| f.intercept),
            points: fit.map_or(0, |f| f.points),
            expected_slope: expected,
            band: SLOPE_BAND,
            checked: slope_checked,
        },
        uniformity,
        equivalence,
        budget,
    };
    w.json("limit.json", &report)?;
    Ok(Outcome {
        failures,
        written: w.written,
    })
}

#[derive(Serialize)]
struct LimitCsvRow {
    omega_index: usize,
    omega_x: f64,
    omega_y: f64,
    omega_z: f64,
    modulus: f64,
    err_est: f64,
}

impl From<&LimitRow> for LimitCsvRow {
    fn from(r: &LimitRow) -> Self {
        LimitCsvRow {
            omega_index: r.omega_index,
            omega_x: r.omega[0],
            omega_y: r.omega[1],
            omega_z: r.omega[2],
            modulus: r.modulus,
            err_est: r.err_est,
        }
    }
}

// ---------------------------------------------------------------- budget

#[derive(Debug, Clone, Serialize)]
struct BudgetRow {
    series: &'static str,
    r: f64,
    r0: f64,
    eps: f64,
    inner: f64,
    inner_err: f64,
    near: f64,
    near_err: f64,
    far: f64,
    far_err: f64,
    deviation: f64,
    sum_gap: f64,
    combined_err: f64,
    sum_ok: bool,
    converged: bool,
}

impl BudgetRow {
    fn new(series: &'static str, b: &ErrorBudget) -> Self {
        let combined = b.combined_err();
        BudgetRow {
            series,
            r: b.geometry.r,
            r0: b.geometry.r0,
            eps: b.eps,
            inner: b.inner.value.norm(),
            inner_err: b.inner.err_est,
            near: b.near.value.norm(),
            near_err: b.near.err_est,
            far: b.far.value.norm(),
            far_err: b.far.err_est,
            deviation: b.deviation.norm(),
            sum_gap: b.sum_gap(),
            combined_err: combined,
            sum_ok: b.sum_gap() <= combined,
            converged: b.inner.converged && b.near.converged && b.far.converged,
        }
    }
}

#[derive(Serialize)]
struct SlopeJson {
    series: &'static str,
    region: &'static str,
    against: &'static str,
    slope: Option<f64>,
    stderr: Option<f64>,
    points: usize,
    /// Every value exceeds its own error estimate, so the fit is meaningful.
    resolved: bool,
}

#[derive(Serialize)]
struct BudgetReport<'a> {
    schema: u32,
    command: &'static str,
    family: &'a str,
    config: &'a ExperimentConfig,
    pass: bool,
    checks: &'a [Check],
    omega: [f64; 3],
    budget: &'a [BudgetRow],
    slopes: Vec<SlopeJson>,
}

/// The `(r, R₀)` pairs a budget configuration requests, labelled by series.
pub fn budget_pairs(b: &super::BudgetConfig) -> Vec<(&'static str, f64, f64)> {
    let mut out: Vec<(&'static str, f64, f64)> = b.radii.iter().map(|&r| ("fixed-r0", r, b.r0)).collect();
    out.extend(b.r0_ladder.iter().map(|&r0| ("scaled-r", b.r_over_r0 * r0, r0)));
    out
}

fn budget_rows(
    cfg: &ExperimentConfig,
    family: &Family,
    lim: &LimitIntegral,
    rule: &QuadratureRule,
) -> Result<Vec<BudgetRow>, CliError> {
    let pairs = budget_pairs(&cfg.budget);
    let offending: Vec<String> = pairs
        .iter()
        .filter(|(_, r, r0)| BudgetGeometry::new(Vec3::E3, *r, *r0).is_err())
        .map(|(_, r, r0)| format!("(r = {r}, R0 = {r0})"))
        .collect();
    if !offending.is_empty() {
        return Err(CliError::Config(format!(
            "the error budget needs r >= 2 R0; offending pairs: {}",
            offending.join(", ")
        )));
    }
    let omega = Vec3::from_array(cfg.budget.omega).normalized();
    pairs
        .iter()
        .map(|&(series, r, r0)| {
            error_budget(&family.pair, omega, r, r0, lim, rule)
                .map(|b| BudgetRow::new(series, &b))
                .map_err(|e| CliError::Config(e.to_string()))
        })
        .collect()
}

pub fn cmd_budget(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let family = Family::build(&cfg.family)?;
    let rule = cfg.rule.to_rule();
    let lim = limit_integral(&family, &rule)?;
    let rows = budget_rows(cfg, &family, &lim, &rule)?;
    let omega = Vec3::from_array(cfg.budget.omega).normalized();

    let mut slopes = Vec::new();
    for (series, against) in [("fixed-r0", "r"), ("scaled-r", "R0")] {
        let sel: Vec<&BudgetRow> = rows.iter().filter(|b| b.series == series).collect();
        let xs: Vec<f64> = sel.iter().map(|b| if against == "r" { b.r } else { b.r0 }).collect();
        type Pick = fn(&BudgetRow) -> (f64, f64);
        let regions: [(&'static str, Pick); 3] = [
            ("I", |b| (b.inner, b.inner_err)),
            ("II", |b| (b.near, b.near_err)),
            ("III", |b| (b.far, b.far_err)),
        ];
        for (region, pick) in regions {
            let ys: Vec<f64> = sel.iter().map(|b| pick(b).0).collect();
            let fit = LogLogFit::fit(&xs, &ys);
            slopes.push(SlopeJson {
                series,
                region,
                against,
                slope: fit.map(|f| f.slope),
                stderr: fit.map(|f| f.stderr),
                points: fit.map_or(0, |f| f.points),
                resolved: sel.iter().all(|b| {
                    let (v, e) = pick(b);
                    v > e
                }),
            });
        }
    }

    let mut checks = vec![limit_check(&lim)];
    for b in &rows {
        checks.push(Check {
            name: format!(
                "sum identity at r = {}, R0 = {}{}",
                b.r,
                b.r0,
                if b.converged { "" } else { " (region quadrature not converged)" }
            ),
            value: b.sum_gap,
            err_est: b.combined_err,
            threshold: b.combined_err,
            pass: b.sum_ok && b.converged,
        });
    }
    let failures = failures_of(&checks);
    let mut w = Writer::new(cfg)?;
    w.csv("budget.csv", &rows)?;
    w.json(
        "budget.json",
        &BudgetReport {
            schema: SCHEMA,
            command: "budget",
            family: &family.name,
            config: cfg,
            pass: failures.is_empty(),
            checks: &checks,
            omega: omega.to_array(),
            budget: &rows,
            slopes,
        },
    )?;
    Ok(Outcome {
        failures,
        written: w.written,
    })
}

// -------------------------------------------------------------- residual

#[derive(Serialize)]
struct ResidualCsvRow {
    x: f64,
    y: f64,
    z: f64,
    norm_x: f64,
    residual: f64,
    err_est: f64,
    converged: bool,
}

#[derive(Serialize)]
struct ResidualSummary<'a> {
    schema: u32,
    command: &'static str,
    family: &'a str,
    config: &'a ExperimentConfig,
    pass: bool,
    max_residual: f64,
    max_err_est: f64,
    quadrature_tol: f64,
    sample_count: usize,
    threshold: f64,
}

/// Sample points of the residual command: Halton points in the ball
/// followed by the far-field points.
pub fn residual_samples(cfg: &ExperimentConfig) -> Vec<Vec3> {
    let r = &cfg.residual;
    let mut pts = ball_samples(r.count, r.radius, cfg.seed);
    let dir = Vec3::from_array(r.far_direction).normalized();
    pts.extend(r.far_field.iter().map(|&s| dir * s));
    pts
}

pub fn cmd_residual(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let family = Family::build(&cfg.family)?;
    let rule = cfg.rule.to_rule().with_tol(cfg.residual.tol);
    let samples = residual_samples(cfg);
    let rep = fixed_point_residual(&family.pair, &samples, &rule).map_err(|e| CliError::Config(e.to_string()))?;
    let threshold = cfg.residual.max_residual;
    let mut failures = Vec::new();
    if rep.max_residual > threshold {
        failures.push(format!(
            "max fixed-point residual {:e} (err_est {:e}) exceeds {:e}",
            rep.max_residual, rep.max_err_est, threshold
        ));
    }
    let rows: Vec<ResidualCsvRow> = rep
        .points
        .iter()
        .map(|p| ResidualCsvRow {
            x: p.x[0],
            y: p.x[1],
            z: p.x[2],
            norm_x: Vec3::from_array(p.x).norm(),
            residual: p.residual,
            err_est: p.err_est,
            converged: p.converged,
        })
        .collect();
    let mut w = Writer::new(cfg)?;
    w.csv("residual.csv", &rows)?;
    w.json(
        "residual.json",
        &ResidualSummary {
            schema: SCHEMA,
            command: "residual",
            family: &family.name,
            config: cfg,
            pass: failures.is_empty(),
            max_residual: rep.max_residual,
            max_err_est: rep.max_err_est,
            quadrature_tol: rep.quadrature_tol,
            sample_count: rep.points.len(),
            threshold,
        },
    )?;
    Ok(Outcome {
        failures,
        written: w.written,
    })
}
