//! Randomized algebraic-law checks: bicomplex identities of the two
//! boundary operators, simplex-integral agreement, affine-map group laws,
//! exact polynomial recovery, and scalar-kernel ring laws.

use cyclochar::cycles::{
    compositions, simplex_monomial_integral, simplex_monomial_integral_beta,
};
use cyclochar::cyclic::{ArgAlgebra, Cochain, MatAlgebra};
use cyclochar::equivariant::polynomial_coefficients;
use cyclochar::graded::group::AffineMap;
use cyclochar::matrix::Mat;
use cyclochar::scalar::{rat, Rat, Scalar};
use proptest::prelude::*;

const DIM: usize = 2;

fn rat_strategy() -> impl Strategy<Value = Rat> {
    (-3i64..=3, 1i64..=3).prop_map(|(n, d)| rat(n, d))
}

fn mat_strategy() -> impl Strategy<Value = Mat> {
    proptest::collection::vec(rat_strategy(), DIM * DIM).prop_map(|v| {
        Mat::from_fn(DIM, DIM, |i, j| Scalar::from_rat(v[i * DIM + j].clone()))
    })
}

/// a (k+1)-linear functional tr(M₀a₀M₁a₁⋯Mₖaₖ): general enough to exercise
/// every term of the boundary operators
fn interleaved_cochain(mats: Vec<Mat>) -> Cochain<MatAlgebra> {
    let k = mats.len() - 1;
    Cochain::new(k, move |alg: &MatAlgebra, a: &[Mat]| {
        let mut w = Mat::identity(DIM);
        for (m, x) in mats.iter().zip(a) {
            w = alg.mul(&alg.mul(&w, m), x);
        }
        Ok(w.trace())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// the simplicial boundary squares to zero on arbitrary cochains
    #[test]
    fn simplicial_boundary_squares_to_zero(
        mats in proptest::collection::vec(mat_strategy(), 2..=3),
        args in proptest::collection::vec(mat_strategy(), 5),
    ) {
        let alg = MatAlgebra::full(DIM);
        let psi = interleaved_cochain(mats);
        let bb = psi.boundary_b().boundary_b();
        let v = bb.eval(&alg, &args[..bb.k + 1]).unwrap();
        prop_assert!(v.dist(&Scalar::zero()) < 1e-12, "b²ψ = {v:?}");
    }

    /// the cyclic boundary squares to zero on arbitrary cochains
    #[test]
    fn cyclic_boundary_squares_to_zero(
        mats in proptest::collection::vec(mat_strategy(), 4..=5),
        args in proptest::collection::vec(mat_strategy(), 3),
    ) {
        let alg = MatAlgebra::full(DIM);
        let psi = interleaved_cochain(mats);
        let cc = psi.boundary_cap().boundary_cap();
        let v = cc.eval(&alg, &args[..cc.k + 1]).unwrap();
        prop_assert!(v.dist(&Scalar::zero()) < 1e-12, "B²ψ = {v:?}");
    }

    /// the two boundaries anticommute, so their sum is a differential
    #[test]
    fn boundaries_anticommute(
        mats in proptest::collection::vec(mat_strategy(), 3..=4),
        args in proptest::collection::vec(mat_strategy(), 5),
    ) {
        let alg = MatAlgebra::full(DIM);
        let psi = interleaved_cochain(mats);
        let lhs = psi.boundary_b().boundary_cap();
        let rhs = psi.boundary_cap().boundary_b();
        let a = &args[..lhs.k + 1];
        let v = lhs.eval(&alg, a).unwrap().add(&rhs.eval(&alg, a).unwrap());
        prop_assert!(v.dist(&Scalar::zero()) < 1e-12, "(bB + Bb)ψ = {v:?}");
    }

    /// weak compositions enumerate exactly the lattice points of the scaled
    /// simplex, each summing to the requested total
    #[test]
    fn compositions_enumerate_the_simplex(total in 0usize..=5, parts in 1usize..=4) {
        let all = compositions(total, parts);
        for c in &all {
            prop_assert_eq!(c.len(), parts);
            prop_assert_eq!(c.iter().sum::<usize>(), total);
        }
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), all.len(), "duplicate compositions");
        // stars and bars
        let mut expect = 1usize;
        for i in 0..parts - 1 {
            expect = expect * (total + i + 1) / (i + 1);
        }
        prop_assert_eq!(all.len(), expect);
    }

    /// the recursive and beta-function simplex integrals agree
    #[test]
    fn simplex_integral_implementations_agree(
        pows in proptest::collection::vec(0usize..=4, 1..=4),
    ) {
        prop_assert_eq!(
            simplex_monomial_integral(&pows),
            simplex_monomial_integral_beta(&pows)
        );
    }

    /// integer-affine torus maps compose and invert exactly
    #[test]
    fn affine_maps_form_a_group(
        s1 in -2i64..=2, s2 in -2i64..=2,
        b in proptest::collection::vec(rat_strategy(), 2),
    ) {
        // shears generate enough of GL(2, Z) to be interesting
        let m1 = AffineMap { m: vec![vec![1, s1], vec![0, 1]], b: b.clone() };
        let m2 = AffineMap { m: vec![vec![1, 0], vec![s2, 1]], b: vec![b[1].clone(), b[0].clone()] };
        let g = m1.compose(&m2);
        let id = AffineMap::identity(2);
        prop_assert_eq!(g.compose(&g.inverse()), id.clone());
        prop_assert_eq!(g.inverse().compose(&g), id);
        // composition is associative against a third map
        let m3 = AffineMap::translation(b);
        prop_assert_eq!(m1.compose(&m2).compose(&m3), m1.compose(&m2.compose(&m3)));
    }

    /// exact polynomial evaluation at distinct rational nodes is invertible
    #[test]
    fn polynomial_recovery_is_exact(
        coeffs in proptest::collection::vec(rat_strategy(), 1..=5),
        shift in rat_strategy(),
    ) {
        let nodes: Vec<Rat> =
            (0..coeffs.len()).map(|i| rat(i as i64, 1) + shift.clone()).collect();
        let values: Vec<Scalar> = nodes
            .iter()
            .map(|t| {
                let mut acc = Rat::from_integer(0.into());
                let mut p = Rat::from_integer(1.into());
                for c in &coeffs {
                    acc += c.clone() * p.clone();
                    p *= t.clone();
                }
                Scalar::from_rat(acc)
            })
            .collect();
        let rec = polynomial_coefficients(&nodes, &values);
        for (c, r) in coeffs.iter().zip(&rec) {
            prop_assert!(Scalar::from_rat(c.clone()).sub(r).is_zero());
        }
    }

    /// the exact scalar kernel satisfies the ring laws and embeds into C
    #[test]
    fn exact_scalars_form_a_ring(
        a in rat_strategy(), b in rat_strategy(), c in rat_strategy(),
        pa in -2i32..=2, pb in -2i32..=2,
    ) {
        let x = Scalar::from_rat(a).mul(&Scalar::two_pi_i(pa));
        let y = Scalar::from_rat(b).mul(&Scalar::two_pi_i(pb));
        let z = Scalar::from_rat(c);
        let lhs = x.mul(&y.add(&z));
        let rhs = x.mul(&y).add(&x.mul(&z));
        prop_assert!(lhs.sub(&rhs).is_zero());
        prop_assert!(x.mul(&y).sub(&y.mul(&x)).is_zero());
        let approx = (x.to_c64() * y.to_c64() - lhs.to_c64() + x.to_c64() * z.to_c64()).norm();
        prop_assert!(approx < 1e-9, "embedding into C is not multiplicative");
    }
}
