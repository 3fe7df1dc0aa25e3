//! Oracles and random fixtures shared by the integration tests. Nothing here
//! calls into the library's algebra, so comparisons against it are
//! independent.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zeromode::clifford::{CMatrix, Mat2, Spinor2, Vec3};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Pauli matrices written out entry by entry.
pub fn pauli_table() -> [Mat2; 3] {
    let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    [
        CMatrix([[o, l], [l, o]]),
        CMatrix([[o, -i], [i, o]]),
        CMatrix([[l, o], [o, -l]]),
    ]
}

/// `σ·v` as the explicit matrix `[[v3, v1 − i v2], [v1 + i v2, −v3]]`.
pub fn sigma_dot_oracle(v: Vec3) -> Mat2 {
    CMatrix([[c(v.z, 0.0), c(v.x, -v.y)], [c(v.x, v.y), c(-v.z, 0.0)]])
}

/// `i(σ·ω)φ₀` for `φ₀ = (a, b)`, expanded by hand.
pub fn loss_yau_limit_oracle(w: Vec3, a: Complex64, b: Complex64) -> Spinor2 {
    let i = c(0.0, 1.0);
    let top = c(w.z, 0.0) * a + c(w.x, -w.y) * b;
    let bot = c(w.x, w.y) * a - c(w.z, 0.0) * b;
    Spinor2::new(i * top, i * bot)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, scale: f64) -> Vec3 {
    Vec3::new(
        rng.gen_range(-scale..scale),
        rng.gen_range(-scale..scale),
        rng.gen_range(-scale..scale),
    )
}

/// Uniform in the ball of radius `r`, by rejection.
pub fn random_in_ball(rng: &mut ChaCha8Rng, r: f64) -> Vec3 {
    loop {
        let v = random_vec(rng, r);
        if v.norm() <= r {
            return v;
        }
    }
}

pub fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = random_vec(rng, 1.0);
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v * (1.0 / n);
        }
    }
}

/// `4π ∫₀^∞ s² h(s) ds` by composite Simpson on `s = tan θ`, for radial
/// integrands decaying at least like `s⁻⁴`.
pub fn radial_oracle(h: impl Fn(f64) -> f64, panels: usize) -> f64 {
    let top = std::f64::consts::FRAC_PI_2;
    let f = |t: f64| {
        // the endpoint value is the limit t → π/2
        let s = t.min(top * (1.0 - 1e-12)).tan();
        let sec2 = 1.0 + s * s;
        s * s * h(s) * sec2
    };
    let n = 2 * panels;
    let dt = top / n as f64;
    let mut acc = f(0.0) + f(top);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(k as f64 * dt);
    }
    4.0 * std::f64::consts::PI * acc * dt / 3.0
}
