//! Dense 2×2 and 4×4 complex matrix algebra for the Pauli and Dirac matrices.
//!
//! Everything here is fixed-size and `Copy`. The Dirac matrices use the
//! standard representation with off-diagonal Pauli blocks,
//!
//! ```text
//! α_j = [[0, σ_j], [σ_j, 0]]
//! ```
//!
//! and spinor norms are Euclidean, which is the norm under which
//! `|(α·x) f| = |x| |f|` holds.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// A point or direction in ℝ³.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };
    pub const E1: Vec3 = Vec3 { x: 1.0, y: 0.0, z: 0.0 };
    pub const E2: Vec3 = Vec3 { x: 0.0, y: 1.0, z: 0.0 };
    pub const E3: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 1.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y).hypot(self.z)
    }

    /// The Japanese bracket `⟨x⟩ = √(1 + |x|²)`.
    pub fn bracket(self) -> f64 {
        (1.0 + self.norm_sq()).sqrt()
    }

    /// Unit vector in the direction of `self`; the zero vector maps to itself.
    pub fn normalized(self) -> Vec3 {
        let n = self.norm();
        if n == 0.0 {
            self
        } else {
            self * (1.0 / n)
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Two unit vectors completing `self` (assumed unit) to a right-handed
    /// orthonormal frame `(u, v, self)`.
    pub fn orthonormal_frame(self) -> (Vec3, Vec3) {
        let helper = if self.x.abs() < 0.9 { Vec3::E1 } else { Vec3::E2 };
        let u = helper.cross(self).normalized();
        let v = self.cross(u);
        (u, v)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

/// A column vector in ℂᴺ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CVector<const N: usize>(pub [Complex64; N]);

pub type Spinor2 = CVector<2>;
pub type Spinor4 = CVector<4>;

impl<const N: usize> Default for CVector<N> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<const N: usize> CVector<N> {
    pub fn zero() -> Self {
        CVector([ZERO; N])
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Hermitian inner product `⟨self, o⟩ = Σ conj(self_k) o_k`.
    pub fn inner(&self, o: &Self) -> Complex64 {
        self.0.iter().zip(o.0.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        CVector(self.0.map(|c| c * s))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest componentwise modulus of `self - o`.
    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        self.0
            .iter()
            .zip(o.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Spinor2 {
    pub fn new(a: Complex64, b: Complex64) -> Self {
        CVector([a, b])
    }
}

impl Spinor4 {
    /// Stacks two 2-spinors as `ᵗ(upper, lower)`.
    pub fn from_halves(upper: Spinor2, lower: Spinor2) -> Self {
        CVector([upper.0[0], upper.0[1], lower.0[0], lower.0[1]])
    }

    pub fn upper(&self) -> Spinor2 {
        CVector([self.0[0], self.0[1]])
    }

    pub fn lower(&self) -> Spinor2 {
        CVector([self.0[2], self.0[3]])
    }
}

impl<const N: usize> Add for CVector<N> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(o.0) {
            *a += b;
        }
        self
    }
}

impl<const N: usize> AddAssign for CVector<N> {
    fn add_assign(&mut self, o: Self) {
        for (a, b) in self.0.iter_mut().zip(o.0) {
            *a += b;
        }
    }
}

impl<const N: usize> Sub for CVector<N> {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(o.0) {
            *a -= b;
        }
        self
    }
}

impl<const N: usize> Neg for CVector<N> {
    type Output = Self;
    fn neg(self) -> Self {
        CVector(self.0.map(|c| -c))
    }
}

impl<const N: usize> Mul<f64> for CVector<N> {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        CVector(self.0.map(|c| c * s))
    }
}

impl<const N: usize> Mul<Complex64> for CVector<N> {
    type Output = Self;
    fn mul(self, s: Complex64) -> Self {
        self.scale(s)
    }
}

impl<const N: usize> Index<usize> for CVector<N> {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

/// Row-major dense N×N complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CMatrix<const N: usize>(pub [[Complex64; N]; N]);

pub type Mat2 = CMatrix<2>;
pub type Mat4 = CMatrix<4>;

impl<const N: usize> Default for CMatrix<N> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<const N: usize> CMatrix<N> {
    pub fn zero() -> Self {
        CMatrix([[ZERO; N]; N])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for k in 0..N {
            m.0[k][k] = ONE;
        }
        m
    }

    pub fn scale(&self, s: Complex64) -> Self {
        CMatrix(self.0.map(|row| row.map(|c| c * s)))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut m = Self::zero();
        for j in 0..N {
            for k in 0..N {
                m.0[j][k] = self.0[k][j].conj();
            }
        }
        m
    }

    pub fn apply(&self, v: &CVector<N>) -> CVector<N> {
        let mut out = [ZERO; N];
        for (j, row) in self.0.iter().enumerate() {
            out[j] = row.iter().zip(v.0.iter()).map(|(a, b)| a * b).sum();
        }
        CVector(out)
    }

    /// Largest elementwise modulus of `self - o`.
    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..N {
            for k in 0..N {
                worst = worst.max((self.0[j][k] - o.0[j][k]).norm());
            }
        }
        worst
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.max_abs_diff(&Self::zero())
    }

    /// `‖A − Aᴴ‖_max ≤ tol`. With `tol = 0.0` this is an exact check.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (self.adjoint() * *self).max_abs_diff(&Self::identity()) <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.0
            .iter()
            .flatten()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl Mat4 {
    /// Assembles `[[a, b], [c, d]]` from 2×2 blocks.
    pub fn from_blocks(a: Mat2, b: Mat2, c: Mat2, d: Mat2) -> Self {
        let mut m = Mat4::zero();
        for j in 0..2 {
            for k in 0..2 {
                m.0[j][k] = a.0[j][k];
                m.0[j][k + 2] = b.0[j][k];
                m.0[j + 2][k] = c.0[j][k];
                m.0[j + 2][k + 2] = d.0[j][k];
            }
        }
        m
    }

    /// Returns block `(row, col)` with `row, col ∈ {0, 1}`.
    pub fn block(&self, row: usize, col: usize) -> Mat2 {
        let mut b = Mat2::zero();
        for j in 0..2 {
            for k in 0..2 {
                b.0[j][k] = self.0[2 * row + j][2 * col + k];
            }
        }
        b
    }
}

impl<const N: usize> Add for CMatrix<N> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        for j in 0..N {
            for k in 0..N {
                self.0[j][k] += o.0[j][k];
            }
        }
        self
    }
}

impl<const N: usize> Sub for CMatrix<N> {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        for j in 0..N {
            for k in 0..N {
                self.0[j][k] -= o.0[j][k];
            }
        }
        self
    }
}

impl<const N: usize> Neg for CMatrix<N> {
    type Output = Self;
    fn neg(self) -> Self {
        CMatrix(self.0.map(|row| row.map(|c| -c)))
    }
}

impl<const N: usize> Mul for CMatrix<N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut m = Self::zero();
        for j in 0..N {
            for k in 0..N {
                let mut acc = ZERO;
                for l in 0..N {
                    acc += self.0[j][l] * o.0[l][k];
                }
                m.0[j][k] = acc;
            }
        }
        m
    }
}

impl<const N: usize> Mul<CVector<N>> for CMatrix<N> {
    type Output = CVector<N>;
    fn mul(self, v: CVector<N>) -> CVector<N> {
        self.apply(&v)
    }
}

impl<const N: usize> Mul<f64> for CMatrix<N> {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        CMatrix(self.0.map(|row| row.map(|c| c * s)))
    }
}

impl<const N: usize> Mul<Complex64> for CMatrix<N> {
    type Output = Self;
    fn mul(self, s: Complex64) -> Self {
        self.scale(s)
    }
}

/// Pauli matrix `σ_j` for `j ∈ {1, 2, 3}`.
pub fn sigma(j: usize) -> Mat2 {
    match j {
        1 => CMatrix([[ZERO, ONE], [ONE, ZERO]]),
        2 => CMatrix([[ZERO, -I], [I, ZERO]]),
        3 => CMatrix([[ONE, ZERO], [ZERO, -ONE]]),
        _ => panic!("Pauli index must be 1, 2 or 3, got {j}"),
    }
}

/// Dirac matrix `α_j` for `j ∈ {1, 2, 3}`.
pub fn alpha(j: usize) -> Mat4 {
    let s = sigma(j);
    Mat4::from_blocks(Mat2::zero(), s, s, Mat2::zero())
}

/// `v₁σ₁ + v₂σ₂ + v₃σ₃`.
pub fn sigma_dot(v: Vec3) -> Mat2 {
    let re = |x: f64| Complex64::new(x, 0.0);
    CMatrix([
        [re(v.z), Complex64::new(v.x, -v.y)],
        [Complex64::new(v.x, v.y), re(-v.z)],
    ])
}

/// `v·α`, i.e. `[[0, σ·v], [σ·v, 0]]`.
pub fn alpha_dot(v: Vec3) -> Mat4 {
    let s = sigma_dot(v);
    Mat4::from_blocks(Mat2::zero(), s, s, Mat2::zero())
}

/// `(a·b) I₂ + i σ·(a×b)`, which equals `(σ·a)(σ·b)`.
pub fn pauli_contract(a: Vec3, b: Vec3) -> Mat2 {
    Mat2::identity() * a.dot(b) + sigma_dot(a.cross(b)) * I
}

pub fn anticommutator<const N: usize>(a: CMatrix<N>, b: CMatrix<N>) -> CMatrix<N> {
    a * b + b * a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_one_matches_display() {
        assert_eq!(sigma_dot(Vec3::E1), sigma(1));
        assert_eq!(sigma(1).0, [[ZERO, ONE], [ONE, ZERO]]);
        assert_eq!(sigma_dot(Vec3::ZERO), Mat2::zero());
    }

    #[test]
    fn alpha_three_has_sigma_three_blocks() {
        let a = alpha_dot(Vec3::E3);
        assert_eq!(a.block(0, 1), sigma(3));
        assert_eq!(a.block(1, 0), sigma(3));
        assert_eq!(a.block(0, 0), Mat2::zero());
        assert_eq!(a.block(1, 1), Mat2::zero());
    }

    #[test]
    fn pauli_products() {
        assert_eq!(pauli_contract(Vec3::E1, Vec3::E1), Mat2::identity());
        assert_eq!(pauli_contract(Vec3::E1, Vec3::E2), sigma(3) * I);
        assert_eq!(sigma(1) * sigma(2), sigma(3) * I);
        assert_eq!(sigma(2) * sigma(3), sigma(1) * I);
        assert_eq!(sigma(3) * sigma(1), sigma(2) * I);
    }

    #[test]
    fn exact_hermiticity_of_generators() {
        for j in 1..=3 {
            assert!(sigma(j).is_hermitian(0.0));
            assert!(alpha(j).is_hermitian(0.0));
        }
        let not_herm = CMatrix([[ZERO, I], [I, ZERO]]);
        assert!(!not_herm.is_hermitian(0.0));
    }

    #[test]
    fn spinor_halves_round_trip() {
        let u = Spinor2::new(ONE, I);
        let l = Spinor2::new(-ONE, Complex64::new(2.0, 3.0));
        let f = Spinor4::from_halves(u, l);
        assert_eq!(f.upper(), u);
        assert_eq!(f.lower(), l);
    }

    #[test]
    fn frame_is_orthonormal() {
        for w in [Vec3::E1, Vec3::E2, Vec3::E3, Vec3::new(1.0, -2.0, 0.5).normalized()] {
            let (u, v) = w.orthonormal_frame();
            assert!((u.norm() - 1.0).abs() < 1e-15);
            assert!((v.norm() - 1.0).abs() < 1e-15);
            assert!(u.dot(v).abs() < 1e-15 && u.dot(w).abs() < 1e-15);
            assert!((u.cross(v) - w).norm() < 1e-15);
        }
    }
}
