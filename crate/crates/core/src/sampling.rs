//! Reproducible quasi-random point sets.
//!
//! Points come from the Halton sequence in bases 2, 3 and 5, starting at
//! index `seed + 1`. No OS entropy is involved, so a seed fully determines
//! every sample set.

use std::f64::consts::PI;

use crate::clifford::Vec3;

/// Radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while index > 0 {
        out += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    out
}

/// The `i`-th point of the seeded 3D Halton sequence in the unit cube.
pub fn halton3(seed: u64, i: u64) -> [f64; 3] {
    let k = seed.wrapping_add(i).wrapping_add(1);
    [radical_inverse(k, 2), radical_inverse(k, 3), radical_inverse(k, 5)]
}

/// `n` points filling the ball `|x| ≤ radius` with uniform density.
pub fn ball_samples(n: usize, radius: f64, seed: u64) -> Vec<Vec3> {
    (0..n as u64)
        .map(|i| {
            let [u, v, w] = halton3(seed, i);
            let r = radius * u.cbrt();
            let z = 2.0 * v - 1.0;
            let s = (1.0 - z * z).max(0.0).sqrt();
            let phi = 2.0 * PI * w;
            Vec3::new(r * s * phi.cos(), r * s * phi.sin(), r * z)
        })
        .collect()
}

/// `n` unit directions, uniform in area.
pub fn sphere_samples(n: usize, seed: u64) -> Vec<Vec3> {
    (0..n as u64)
        .map(|i| {
            let [_, v, w] = halton3(seed, i);
            let z = 2.0 * v - 1.0;
            let s = (1.0 - z * z).max(0.0).sqrt();
            let phi = 2.0 * PI * w;
            Vec3::new(s * phi.cos(), s * phi.sin(), z).normalized()
        })
        .collect()
}
