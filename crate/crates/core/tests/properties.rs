//! Property tests for the spec-level invariants: exact ring laws, group
//! axioms under the boundary action, residue canonicality, the cocycle
//! order convention and the pruned-enumeration equivalence.

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use congcount::arith::{canonical_residue, gauss_gcd, GaussInt};
use congcount::dynamics::expanding_map;
use congcount::groups::ExactPoint;
use congcount::semigroup::{enumerate_words, EnumBound, SemigroupSpec, Word};
use congcount::GroupElement;

fn gauss(re: i64, im: i64) -> GaussInt {
    GaussInt::new(re, im)
}

fn cf12() -> SemigroupSpec {
    SemigroupSpec::cf(vec![GaussInt::from(1), GaussInt::from(2)], None).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn norm_is_multiplicative(
        ar in -1000i64..1000, ai in -1000i64..1000,
        br in -1000i64..1000, bi in -1000i64..1000,
    ) {
        let a = gauss(ar, ai);
        let b = gauss(br, bi);
        prop_assert_eq!(a.mul(&b).norm(), a.norm() * b.norm());
    }

    #[test]
    fn gcd_divides_both_arguments(
        ar in -500i64..500, ai in -500i64..500,
        br in -500i64..500, bi in -500i64..500,
    ) {
        let a = gauss(ar, ai);
        let b = gauss(br, bi);
        prop_assume!(!a.is_zero() || !b.is_zero());
        let g = gauss_gcd(&a, &b);
        prop_assert!(!g.is_zero());
        let (_, ra) = a.div_rem_nearest(&g);
        let (_, rb) = b.div_rem_nearest(&g);
        prop_assert!(ra.is_zero());
        prop_assert!(rb.is_zero());
    }

    #[test]
    fn canonical_residue_is_translation_invariant(
        xr in -50i64..50, xi in -50i64..50,
        kr in -5i64..5, ki in -5i64..5,
        which in 0usize..3,
    ) {
        let q = [gauss(3, 0), gauss(2, 1), gauss(1, 1)][which].clone();
        let x = gauss(xr, xi);
        let shifted = x.add(&q.mul(&gauss(kr, ki)));
        prop_assert_eq!(canonical_residue(&x, &q), canonical_residue(&shifted, &q));
    }

    #[test]
    fn mobius_action_is_a_left_action_exactly(
        w1 in proptest::collection::vec(0usize..4, 1..4),
        w2 in proptest::collection::vec(0usize..4, 1..4),
        num in -6i64..6, den in 1i64..9,
    ) {
        let spec = cf12();
        let g = spec.word_to_element(&Word(w1)).unwrap();
        let h = spec.word_to_element(&Word(w2)).unwrap();
        let x = ExactPoint::Finite(vec![
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::new(BigInt::from(1), BigInt::from(3)),
        ]);
        let lhs = g.multiply(&h).unwrap().mobius_apply_exact(&x);
        let rhs = g.mobius_apply_exact(&h.mobius_apply_exact(&x));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn conformal_chain_rule(
        w1 in proptest::collection::vec(0usize..4, 1..4),
        w2 in proptest::collection::vec(0usize..4, 1..4),
        t in 0.05f64..0.95,
    ) {
        let spec = cf12();
        let g = spec.word_to_element(&Word(w1)).unwrap();
        let h = spec.word_to_element(&Word(w2)).unwrap();
        let x = congcount::BoundaryPoint::Finite(vec![t, 0.01]);
        let gh = g.multiply(&h).unwrap();
        let lhs = gh.conformal_derivative(&x).unwrap();
        let rhs = g.conformal_derivative(&h.mobius_apply(&x)).unwrap()
            * h.conformal_derivative(&x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1e-300));
    }

    #[test]
    fn inverse_law_on_random_words(w in proptest::collection::vec(0usize..4, 0..6)) {
        let spec = cf12();
        let g = spec.word_to_element(&Word(w)).unwrap();
        prop_assert!(g.multiply(&g.inverse()).unwrap().is_identity());
        prop_assert!(g.inverse().multiply(&g).unwrap().is_identity());
    }

    #[test]
    fn norm_bound_enumeration_equals_filtered(limit in 20i64..400) {
        // the exact prune never skips a word the filter accepts
        let spec = cf12();
        let rsq = BigRational::from_integer(BigInt::from(limit));
        let gamma0 = spec.identity();
        let mut pruned = Vec::new();
        enumerate_words(
            &spec,
            &EnumBound::NormSqRatio { rsq: rsq.clone(), gamma0: gamma0.clone() },
            None,
            &mut |w, _| { pruned.push(w.clone()); Ok(()) },
        ).unwrap();
        let cap = &rsq * BigRational::from_integer(gamma0.frobenius_norm_sq());
        let mut filtered = Vec::new();
        enumerate_words(&spec, &EnumBound::MaxLen(7), None, &mut |w, g| {
            if BigRational::from_integer(g.frobenius_norm_sq()) <= cap {
                filtered.push(w.clone());
            }
            Ok(())
        }).unwrap();
        pruned.sort_by_key(|w| w.0.clone());
        filtered.sort_by_key(|w| w.0.clone());
        prop_assert_eq!(pruned, filtered);
    }
}

/// The cocycle order convention: for a word w, walking the anchor of w
/// through T and accumulating c(T^{k−1}u)···c(u) recovers the reversed
/// word product — the closed cocycle product formula.
#[test]
fn cocycle_recursion_matches_closed_product() {
    let spec = cf12();
    let mut state = 0xfeedu64;
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 33) % 4) as usize
    };
    for _ in 0..100 {
        let len = 2 + next() % 4;
        let w = Word((0..len).map(|_| next()).collect());
        let mut x = congcount::dynamics::cylinder_anchor(&spec, &w).unwrap();
        // walk T len times, recording symbols, accumulating on the left
        let mut product = spec.identity();
        for _ in 0..len {
            let (next_x, sym) = expanding_map(&spec, &x).unwrap();
            product = spec.generator(sym).multiply(&product).unwrap();
            x = next_x;
        }
        // c^k(u) = g_{α₁}⋯g_{α_k} = product of the itinerary reversed
        let reversed = Word(w.0.iter().rev().copied().collect());
        let closed = spec.word_to_element(&reversed).unwrap();
        assert_eq!(product, closed, "word {:?}", w);
    }
}

/// Exact group-axiom spot checks on long random words (associativity of
/// the matrix product in exact arithmetic).
#[test]
fn associativity_spot_checks() {
    let spec = cf12();
    let mut state = 0xace5u64;
    let mut next = move || {
        state = state.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
        ((state >> 33) % 4) as usize
    };
    for _ in 0..200 {
        let a = spec.word_to_element(&Word(vec![next(), next()])).unwrap();
        let b = spec.word_to_element(&Word(vec![next()])).unwrap();
        let c = spec.word_to_element(&Word(vec![next(), next(), next()])).unwrap();
        let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
        let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
        assert_eq!(left, right);
    }
}

/// GroupElement equality follows matrix equality, so the embedded Schottky
/// generators keep exact group relations after symmetric-square embedding.
#[test]
fn schottky_embedding_preserves_relations() {
    let g = GroupElement::sl2_i64(1, 2, 2, 5).unwrap();
    let h = GroupElement::sl2_i64(11, 4, 8, 3).unwrap();
    let eg = congcount::groups::sym_square_embed(&g).unwrap();
    let eh = congcount::groups::sym_square_embed(&h).unwrap();
    let word_sl2 = g.multiply(&h).unwrap().multiply(&g).unwrap();
    let word_so = eg.multiply(&eh).unwrap().multiply(&eg).unwrap();
    assert_eq!(congcount::groups::sym_square_embed(&word_sl2).unwrap(), word_so);
}

/// Cross-model distances: for random words in the theta pair, the SL₂
/// formula arccosh(‖g‖²/2) and the SO(2,1) hyperboloid formula agree.
#[test]
fn hyperbolic_distance_cross_model_on_random_words() {
    let g = GroupElement::sl2_i64(1, 2, 2, 5).unwrap();
    let h = GroupElement::sl2_i64(11, 4, 8, 3).unwrap();
    let mut state = 0x5117u64;
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
        (state >> 33) % 2
    };
    for _ in 0..100 {
        let mut w = GroupElement::identity(congcount::Setting::Sl2R);
        for _ in 0..1 + (next() + next()) as usize {
            w = w.multiply(if next() == 0 { &g } else { &h }).unwrap();
        }
        let so = congcount::groups::sym_square_embed(&w).unwrap();
        let d_sl2 = w.hyperbolic_distance();
        let d_so = so.hyperbolic_distance();
        assert!(
            (d_sl2 - d_so).abs() < 1e-9 * d_sl2.max(1.0),
            "{d_sl2} vs {d_so}"
        );
    }
}

/// Group axioms at volume: associativity and the inverse law over 10⁴
/// random triples of short words (exact arithmetic, zero tolerance).
#[test]
fn group_axioms_bulk() {
    let spec = cf12();
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state % 4) as usize
    };
    for _ in 0..10_000 {
        let a = spec.word_to_element(&Word(vec![next()])).unwrap();
        let b = spec.word_to_element(&Word(vec![next(), next()])).unwrap();
        let c = spec.word_to_element(&Word(vec![next()])).unwrap();
        let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
        let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
        assert_eq!(left, right);
        assert!(b.multiply(&b.inverse()).unwrap().is_identity());
    }
}
