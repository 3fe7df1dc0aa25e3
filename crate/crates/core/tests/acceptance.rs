//! Acceptance gate. Runs every criterion at its stated tolerance, prints one
//! PASS/FAIL line per criterion and exits non-zero if any fails.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use common::*;
use zeromode::asymptotics::*;
use zeromode::clifford::*;
use zeromode::integral_operator::*;
use zeromode::quadrature::*;
use zeromode::sampling::ball_samples;
use zeromode::zero_modes::*;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn within_time(v: Verdict, elapsed: Duration, limit: Option<Duration>) -> Verdict {
    match limit {
        Some(l) if elapsed > l => verdict(
            false,
            format!("{}; runtime {:.2?} exceeds {:.0?}", v.detail, elapsed, l),
        ),
        _ => verdict(v.pass, format!("{}; runtime {:.2?}", v.detail, elapsed)),
    }
}

fn criterion_1() -> Verdict {
    let pauli = pauli_table();
    let mut err: f64 = 0.0;
    for j in 1..=3 {
        err = err.max(sigma(j).max_abs_diff(&pauli[j - 1]));
        for k in 1..=3 {
            let delta = if j == k { 2.0 } else { 0.0 };
            let s = anticommutator(sigma(j), sigma(k)) - Mat2::identity() * delta;
            let a = anticommutator(alpha(j), alpha(k)) - Mat4::identity() * delta;
            err = err.max(s.max_abs_entry()).max(a.max_abs_entry());
        }
    }
    let mut rng = rng(11);
    for _ in 0..500 {
        let w = random_unit(&mut rng);
        let sw = sigma_dot(w);
        err = err.max((sw * sw - Mat2::identity()).max_abs_entry());
        let aw = alpha_dot(w);
        err = err.max((aw.adjoint() * aw - Mat4::identity()).max_abs_entry());
        let a = random_vec(&mut rng, 3.0);
        let b = random_vec(&mut rng, 3.0);
        let product = sigma_dot_oracle(a) * sigma_dot_oracle(b);
        err = err.max(pauli_contract(a, b).max_abs_diff(&product));
    }
    verdict(err <= 1e-13, format!("max elementwise error {err:.2e} <= 1e-13"))
}

fn criterion_2() -> Verdict {
    let m = LossYauMode::default();
    let mut rng = rng(12);
    let (mut e_psi, mut e_a): (f64, f64) = (0.0, 0.0);
    for _ in 0..1000 {
        let x = random_vec(&mut rng, 50.0);
        let b2 = 1.0 + x.x * x.x + x.y * x.y + x.z * x.z;
        e_psi = e_psi.max((m.psi(x).norm() * b2 - 1.0).abs());
        e_a = e_a.max((m.potential(x).norm() * b2 / 3.0 - 1.0).abs());
    }
    let err = e_psi.max(e_a);
    verdict(
        err <= 1e-12,
        format!("| |psi|<x>^2 - 1 | max {e_psi:.2e}, | |A|<x>^2/3 - 1 | max {e_a:.2e} <= 1e-12"),
    )
}

fn criterion_3() -> Verdict {
    let m = LossYauMode::default();
    let mut rng = rng(13);
    let psi = |x: Vec3| m.psi(x);
    let a = |x: Vec3| m.potential(x);
    let worst = (0..100)
        .map(|_| weyl_residual(&psi, &a, random_in_ball(&mut rng, 10.0), 1e-3).norm())
        .fold(0.0, f64::max);
    verdict(worst <= 1e-5, format!("max |residual| {worst:.2e} <= 1e-5 over 100 points, h = 1e-3"))
}

fn criterion_4() -> Verdict {
    let rule = QuadratureRule::default().with_tol(1e-7);
    let bracket = integrate_r3(&|y: Vec3| y.bracket().powi(-4), Decay::Algebraic { c: 1.0, rho: 2.0 }, &rule)
        .expect("valid rule");
    let gauss = integrate_r3(&|y: Vec3| (-y.norm_sq()).exp(), Decay::Algebraic { c: 2.0, rho: 2.0 }, &rule)
        .expect("valid rule");
    let pole = Vec3::new(0.3, -0.2, 0.5);
    let ball = integrate_singular_with(
        pole,
        &|y: Vec3| {
            let s2 = (y - pole).norm_sq();
            if s2 < 1.0 {
                1.0 / s2
            } else {
                0.0
            }
        },
        Decay::Compact,
        1.0,
        &rule,
    )
    .expect("valid rule");
    let cases = [
        ("<y>^-4", bracket.value, PI * PI),
        ("gaussian", gauss.value, PI.powf(1.5)),
        ("singular ball", ball.value, 4.0 * PI),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, v, exact) in cases {
        let rel = (v - exact).abs() / exact;
        pass &= rel <= 1e-6;
        parts.push(format!("{name} rel {rel:.1e}"));
    }
    verdict(pass, format!("{} <= 1e-6 at tol 1e-7", parts.join(", ")))
}

fn criterion_5() -> Verdict {
    let m = LossYauMode::default();
    let rule = QuadratureRule::default().with_tol(1e-6);
    let psi = |x: Vec3| m.psi(x);
    let a = |x: Vec3| m.potential(x);
    let mut worst: f64 = 0.0;
    let mut converged = true;
    for w in fibonacci_directions(16) {
        let est = weyl_limit_vector(&psi, &a, w, Decay::Algebraic { c: 12.0, rho: 2.0 }, &rule).expect("valid rule");
        converged &= est.converged;
        let exact = loss_yau_limit_oracle(w, c(1.0, 0.0), c(0.0, 0.0));
        worst = worst.max((est.value - exact).norm() / exact.norm());
    }
    verdict(
        worst <= 1e-4 && converged,
        format!("max relative error {worst:.2e} <= 1e-4 on 16 directions, converged = {converged}"),
    )
}

fn criterion_6(lim: &LimitIntegral) -> Verdict {
    let norms: Vec<f64> = fibonacci_directions(64).into_iter().map(|w| lim.limit_vector(w).norm()).collect();
    let lo = norms.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = norms.iter().copied().fold(0.0, f64::max);
    let mean = norms.iter().sum::<f64>() / norms.len() as f64;
    let spread = (hi - lo) / mean;
    let off = norms.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max);
    verdict(
        spread <= 1e-12 && off <= 1e-4,
        format!("spread of |L| {spread:.2e} <= 1e-12, max | |L| - 1 | {off:.2e} <= 1e-4"),
    )
}

fn criterion_7(pair: &DiracZeroModePair, lim: &LimitIntegral) -> Verdict {
    let probe = AsymptoticProbe::default();
    let f = |x: Vec3| pair.f(x);
    let l = |w: Vec3| lim.limit_vector(w);
    let scan = radial_scan(&f, &l, &probe);
    let Some(fit) = scan.fit else {
        return verdict(false, "no fit".into());
    };
    let ratio = probe
        .radii
        .iter()
        .map(|&r| omega_uniformity(&f, &l, r, &probe.omegas, 1.0 + 1e-10).ratio)
        .fold(0.0, f64::max);
    verdict(
        fit.slope_within(-1.0, 0.1) && ratio <= 1.0 + 1e-10,
        format!(
            "slope {:.4} (stderr {:.1e}) in -1 +- 0.1 over r = 10..320, max/median - 1 = {:.1e} <= 1e-10",
            fit.slope,
            fit.stderr,
            ratio - 1.0
        ),
    )
}

fn criterion_8(pair: &DiracZeroModePair) -> Verdict {
    let rule = QuadratureRule::default().with_tol(1e-5);
    let samples = ball_samples(20, 5.0, 1);
    let base = fixed_point_residual(pair, &samples, &rule).expect("valid rule");
    let bumped = fixed_point_residual(&perturbed_pair(pair, 1e-2), &samples, &rule).expect("valid rule");
    let ratio = bumped.max_residual / base.max_residual;
    verdict(
        base.max_residual <= 1e-3 && ratio >= 10.0,
        format!(
            "max |f - Tf| {:.2e} <= 1e-3 (err_est {:.1e}), perturbed {:.2e} = {:.0}x >= 10x",
            base.max_residual, base.max_err_est, bumped.max_residual, ratio
        ),
    )
}

fn criterion_9(pair: &DiracZeroModePair, lim: &LimitIntegral) -> Verdict {
    let rule = QuadratureRule::default();
    let omega = Vec3::new(0.6, 0.0, 0.8);
    let run = |r: f64, r0: f64| error_budget(pair, omega, r, r0, lim, &rule).expect("r >= 2 R0");

    let b = run(40.0, 10.0);
    let sum_ok = b.sum_gap() <= b.combined_err();

    let radii = [20.0, 40.0, 80.0, 160.0];
    let inner: Vec<ErrorBudget> = radii.iter().map(|&r| run(r, 5.0)).collect();
    let i_vals: Vec<f64> = inner.iter().map(|b| b.inner.value.norm()).collect();
    let i_fit = LogLogFit::fit(&radii, &i_vals);
    let i_ok = i_fit.is_some_and(|f| f.slope_within(-1.0, 0.2));
    let i_resolved = inner.iter().all(|b| b.inner.value.norm() > b.inner.err_est);

    let r0s = [5.0, 10.0, 20.0, 40.0];
    let iii: Vec<f64> = r0s.iter().map(|&r0| run(8.0 * r0, r0).far.value.norm()).collect();
    let iii_fit = LogLogFit::fit(&r0s, &iii);
    let iii_ok = iii_fit.is_some_and(|f| f.slope_within(-1.0, 0.2));

    let slope = |f: Option<LogLogFit>| f.map_or("none".to_string(), |f| format!("{:.3}", f.slope));
    verdict(
        sum_ok && i_ok && iii_ok,
        format!(
            "sum gap {:.1e} <= combined err {:.1e} [{}]; slope |I| vs r {} [{}; max |I| {:.1e}, resolved above err_est = {}]; slope |III| vs R0 {} [{}]",
            b.sum_gap(),
            b.combined_err(),
            if sum_ok { "ok" } else { "fail" },
            slope(i_fit),
            if i_ok { "ok" } else { "fail" },
            i_vals.iter().copied().fold(0.0, f64::max),
            i_resolved,
            slope(iii_fit),
            if iii_ok { "ok" } else { "fail" },
        ),
    )
}

fn criterion_10(pair: &DiracZeroModePair) -> Verdict {
    let f = |x: Vec3| pair.f(x);
    let radii = geometric_ladder(0.25, 2.0, 12);
    let env = decay_envelope(&f, &[&[0.0][..], &radii[..]].concat(), &fibonacci_directions(64));
    let cf_ok = (env.c_f - 1.0).abs() <= 1e-6;
    let rule = QuadratureRule::default().with_tol(1e-5);
    let dirs = [Vec3::new(1.0, 2.0, 2.0).normalized(), Vec3::E3, Vec3::new(-1.0, 1.0, 0.0).normalized()];
    let mut worst: f64 = 0.0;
    for r in FAR_FIELD_RADII {
        for d in dirs {
            let t = apply_t_pair(pair, d * r, &rule).expect("valid rule");
            worst = worst.max(t.value.norm() * (1.0 + r * r));
        }
    }
    let far_ok = worst <= 1.1 * env.c_f;
    verdict(
        cf_ok && far_ok,
        format!(
            "C_f = {:.9} (1 +- 1e-6), max |Tf|<x>^2 at |x| in {{10, 20, 40}} = {:.6} <= 1.1 C_f",
            env.c_f, worst
        ),
    )
}

fn main() {
    let total = Instant::now();
    let pair = LossYauMode::default().dirac_pair(Embedding::Upper);
    let mut results: Vec<(u32, &str, Verdict)> = Vec::new();
    let mut run = |id: u32, name: &'static str, limit: Option<Duration>, f: &dyn Fn() -> Verdict| {
        let t = Instant::now();
        let v = f();
        let v = within_time(v, t.elapsed(), limit);
        println!("[{}] {:>2}. {}: {}", if v.pass { "PASS" } else { "FAIL" }, id, name, v.detail);
        results.push((id, name, v));
    };
    let secs = Duration::from_secs;
    run(1, "Clifford identities", Some(secs(1)), &criterion_1);
    run(2, "Loss-Yau closed forms", Some(secs(1)), &criterion_2);
    run(3, "Weyl zero-mode residual", Some(secs(5)), &criterion_3);
    run(4, "quadrature golden values", Some(secs(30)), &criterion_4);
    run(5, "Weyl limit vs closed form", Some(secs(300)), &criterion_5);
    let lim = LimitIntegral::compute(&pair, &QuadratureRule::default()).expect("valid rule");
    run(6, "modulus of the limit", None, &|| criterion_6(&lim));
    run(7, "convergence order and uniformity", None, &|| criterion_7(&pair, &lim));
    run(8, "fixed point of T", None, &|| criterion_8(&pair));
    run(9, "error budget", None, &|| criterion_9(&pair, &lim));
    run(10, "decay bound", None, &|| criterion_10(&pair));

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    let elapsed = total.elapsed();
    let time_ok = elapsed <= secs(15 * 60);
    println!(
        "acceptance: {}/{} criteria passed in {:.1?}{}",
        results.len() - failed.len(),
        results.len(),
        elapsed,
        if time_ok { "" } else { " (exceeds the 15 minute budget)" }
    );
    if !failed.is_empty() || !time_ok {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
