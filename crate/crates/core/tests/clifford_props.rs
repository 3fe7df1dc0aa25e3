mod common;

use common::*;
use proptest::prelude::*;
use zeromode::clifford::*;

fn vec3(scale: f64) -> impl Strategy<Value = Vec3> {
    (-scale..scale, -scale..scale, -scale..scale).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn unit() -> impl Strategy<Value = Vec3> {
    vec3(1.0).prop_filter("away from zero", |v| v.norm() > 1e-2).prop_map(Vec3::normalized)
}

fn spinor4() -> impl Strategy<Value = Spinor4> {
    proptest::array::uniform8(-5.0..5.0f64).prop_map(|a| {
        CVector([c(a[0], a[1]), c(a[2], a[3]), c(a[4], a[5]), c(a[6], a[7])])
    })
}

#[test]
fn pauli_and_dirac_matrices_match_tables() {
    let table = pauli_table();
    for j in 1..=3 {
        assert_eq!(sigma(j), table[j - 1]);
        let a = alpha(j);
        assert_eq!(a.block(0, 0), Mat2::zero());
        assert_eq!(a.block(1, 1), Mat2::zero());
        assert_eq!(a.block(0, 1), table[j - 1]);
        assert_eq!(a.block(1, 0), table[j - 1]);
        assert!(a.is_hermitian(0.0));
    }
}

#[test]
fn all_anticommutators() {
    for j in 1..=3 {
        for k in 1..=3 {
            let d = if j == k { 2.0 } else { 0.0 };
            assert!((anticommutator(sigma(j), sigma(k)) - Mat2::identity() * d).max_abs_entry() <= 1e-15);
            assert!((anticommutator(alpha(j), alpha(k)) - Mat4::identity() * d).max_abs_entry() <= 1e-15);
        }
    }
}

proptest! {
    #[test]
    fn sigma_dot_matches_explicit_matrix(v in vec3(10.0)) {
        prop_assert!(sigma_dot(v).max_abs_diff(&sigma_dot_oracle(v)) <= 1e-14);
    }

    #[test]
    fn sigma_dot_unit_squares_to_identity(w in unit()) {
        let s = sigma_dot(w);
        prop_assert!((s * s - Mat2::identity()).max_abs_entry() <= 1e-13);
    }

    #[test]
    fn alpha_dot_unit_is_unitary_and_hermitian(w in unit()) {
        let a = alpha_dot(w);
        prop_assert!(a.is_unitary(1e-13));
        prop_assert!(a.is_hermitian(1e-15));
        prop_assert!((a * a - Mat4::identity()).max_abs_entry() <= 1e-13);
    }

    #[test]
    fn contraction_identity(a in vec3(5.0), b in vec3(5.0)) {
        let lhs = sigma_dot_oracle(a) * sigma_dot_oracle(b);
        prop_assert!(pauli_contract(a, b).max_abs_diff(&lhs) <= 1e-13);
    }

    #[test]
    fn alpha_dot_scales_norms(x in vec3(10.0), f in spinor4()) {
        let lhs = alpha_dot(x).apply(&f).norm();
        let rhs = x.norm() * f.norm();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
    }

    #[test]
    fn alpha_dot_is_linear(x in vec3(3.0), y in vec3(3.0), s in -4.0..4.0f64) {
        let lhs = alpha_dot(x * s + y);
        let rhs = alpha_dot(x) * s + alpha_dot(y);
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-13);
    }

    #[test]
    fn cross_product_is_orthogonal(a in vec3(5.0), b in vec3(5.0)) {
        let x = a.cross(b);
        prop_assert!(x.dot(a).abs() <= 1e-11);
        prop_assert!(x.dot(b).abs() <= 1e-11);
    }

    #[test]
    fn frame_is_orthonormal(w in unit()) {
        let (u, v) = w.orthonormal_frame();
        prop_assert!((u.norm() - 1.0).abs() <= 1e-14);
        prop_assert!((v.norm() - 1.0).abs() <= 1e-14);
        prop_assert!(u.dot(v).abs() <= 1e-14 && u.dot(w).abs() <= 1e-14 && v.dot(w).abs() <= 1e-14);
        prop_assert!((u.cross(v) - w).norm() <= 1e-14);
    }

    #[test]
    fn adjoint_reverses_products(x in vec3(2.0), y in vec3(2.0)) {
        let a = alpha_dot(x) * c(0.3, 0.7);
        let b = alpha_dot(y) + Mat4::identity() * c(0.0, 1.0);
        prop_assert!((a * b).adjoint().max_abs_diff(&(b.adjoint() * a.adjoint())) <= 1e-13);
    }
}
