//! Point sets with weights on the unit sphere S².

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::gauss::gauss_legendre;
use super::pairwise_sum;
use super::QuadValue;
use crate::clifford::Vec3;

/// Spherical integration scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SphereGrid {
    /// Spherical Fibonacci lattice with equal weights `4π/N`.
    Fibonacci { points: usize },
    /// Gauss–Legendre in `cos θ` times the periodic trapezoid rule in `φ`.
    /// Exact for spherical polynomials of degree `< min(2·polar, azimuthal)`.
    GaussProduct { polar: usize, azimuthal: usize },
}

impl SphereGrid {
    /// A product grid with roughly `points` nodes and twice as many
    /// azimuthal as polar nodes.
    pub fn gauss_with_points(points: usize) -> Self {
        let polar = ((points as f64 / 2.0).sqrt().round() as usize).max(2);
        SphereGrid::GaussProduct {
            polar,
            azimuthal: 2 * polar,
        }
    }

    pub fn point_count(&self) -> usize {
        match *self {
            SphereGrid::Fibonacci { points } => points,
            SphereGrid::GaussProduct { polar, azimuthal } => polar * azimuthal,
        }
    }

    /// Coarser grid used for the angular error estimate: half the Fibonacci
    /// points, or three quarters of each Gauss product dimension.
    pub fn companion(&self) -> Self {
        match *self {
            SphereGrid::Fibonacci { points } => SphereGrid::Fibonacci {
                points: (points / 2).max(1),
            },
            SphereGrid::GaussProduct { polar, azimuthal } => SphereGrid::GaussProduct {
                polar: (polar * 3 / 4).max(1),
                azimuthal: (azimuthal * 3 / 4).max(1),
            },
        }
    }

    pub fn is_valid(&self) -> bool {
        match *self {
            SphereGrid::Fibonacci { points } => points >= 1,
            SphereGrid::GaussProduct { polar, azimuthal } => polar >= 1 && azimuthal >= 1,
        }
    }

    /// Unit directions and weights over the full sphere. The polar axis of
    /// product grids is `axis`.
    pub fn nodes(&self, axis: Vec3) -> Vec<(Vec3, f64)> {
        match *self {
            SphereGrid::Fibonacci { points } => fibonacci_points(points)
                .into_iter()
                .map(|p| (p, 4.0 * PI / points as f64))
                .collect(),
            SphereGrid::GaussProduct { .. } => AngularRule::new(*self, axis).full_nodes(),
        }
    }
}

/// Spherical Fibonacci lattice: `z_i = 1 − (2i+1)/N`, azimuth advancing by
/// the golden angle.
pub fn fibonacci_points(n: usize) -> Vec<Vec3> {
    let golden_angle = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden_angle * i as f64;
            Vec3::new(rho * phi.cos(), rho * phi.sin(), z)
        })
        .collect()
}

/// Angular quadrature bound to a polar axis, able to integrate over the full
/// sphere or over a band `μ_lo ≤ axis·n ≤ μ_hi`.
#[derive(Debug, Clone)]
pub(crate) struct AngularRule {
    axis: Vec3,
    u: Vec3,
    v: Vec3,
    polar_nodes: Vec<f64>,
    polar_weights: Vec<f64>,
    azimuth: Vec<(f64, f64)>,
    fibonacci: Option<Vec<Vec3>>,
}

impl AngularRule {
    pub(crate) fn new(grid: SphereGrid, axis: Vec3) -> Self {
        let axis = axis.normalized();
        let (u, v) = axis.orthonormal_frame();
        let (polar, azimuthal, fibonacci) = match grid {
            SphereGrid::Fibonacci { points } => {
                let polar = ((points as f64 / 2.0).sqrt().round() as usize).max(2);
                (polar, 2 * polar, Some(fibonacci_points(points)))
            }
            SphereGrid::GaussProduct { polar, azimuthal } => (polar, azimuthal, None),
        };
        let (polar_nodes, polar_weights) = gauss_legendre(polar);
        let azimuth = (0..azimuthal)
            .map(|k| {
                let phi = 2.0 * PI * (k as f64 + 0.5) / azimuthal as f64;
                (phi.cos(), phi.sin())
            })
            .collect();
        AngularRule {
            axis,
            u,
            v,
            polar_nodes,
            polar_weights,
            azimuth,
            fibonacci,
        }
    }

    fn full_nodes(&self) -> Vec<(Vec3, f64)> {
        let mut out = Vec::with_capacity(self.polar_nodes.len() * self.azimuth.len());
        let dphi = 2.0 * PI / self.azimuth.len() as f64;
        for (&mu, &w) in self.polar_nodes.iter().zip(&self.polar_weights) {
            for &(c, s) in &self.azimuth {
                out.push((self.direction(mu, c, s), w * dphi));
            }
        }
        out
    }

    fn direction(&self, mu: f64, c: f64, s: f64) -> Vec3 {
        let sin_theta = (1.0 - mu * mu).max(0.0).sqrt();
        self.axis * mu + (self.u * c + self.v * s) * sin_theta
    }

    /// `∫ f(n) dn` over directions with `axis·n ∈ band` (full sphere when
    /// `band` is `None`). Banded integrals always use the product rule.
    pub(crate) fn integrate<V: QuadValue>(
        &self,
        band: Option<(f64, f64)>,
        f: &(impl Fn(Vec3) -> V + ?Sized),
    ) -> V {
        match (band, &self.fibonacci) {
            (None, Some(points)) => {
                let w = 4.0 * PI / points.len() as f64;
                pairwise_sum(points.len(), &|i| f(points[i])) * w
            }
            (band, _) => {
                let (lo, hi) = band.unwrap_or((-1.0, 1.0));
                let lo = lo.clamp(-1.0, 1.0);
                let hi = hi.clamp(-1.0, 1.0);
                if hi <= lo {
                    return V::zero();
                }
                let half = 0.5 * (hi - lo);
                let mid = 0.5 * (hi + lo);
                let dphi = 2.0 * PI / self.azimuth.len() as f64;
                let np = self.azimuth.len();
                let total = pairwise_sum(self.polar_nodes.len() * np, &|idx| {
                    let (j, k) = (idx / np, idx % np);
                    let mu = mid + half * self.polar_nodes[j];
                    let (c, s) = self.azimuth[k];
                    f(self.direction(mu, c, s)) * self.polar_weights[j]
                });
                total * (half * dphi)
            }
        }
    }
}
