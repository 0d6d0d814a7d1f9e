//! Property tests for words, the group ring and the radial engine.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use spectra_core::radial::{
    radial_convolve, radial_markov_power, sphere_size, to_radial, RadialElement,
};
use spectra_core::ring::leq_coefficientwise;
use spectra_core::{GenSet, GroupPresentation, Letter, RingElement, Word};

fn presentation() -> impl Strategy<Value = GroupPresentation> {
    prop_oneof![
        (1u32..=3).prop_map(GroupPresentation::free),
        prop::collection::vec(prop::sample::select(vec![0u32, 2, 3, 4, 5]), 2..=3)
            .prop_map(GroupPresentation::free_product_cyclic),
        (1u32..=3).prop_map(GroupPresentation::free_abelian),
    ]
}

/// A raw (possibly unreduced) word over the generators of `p`.
fn raw_word(rank: u32, max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec((1..=rank, any::<bool>()), 0..=max_len).prop_map(|letters| {
        Word::from_letters(letters.into_iter().map(|(g, inv)| Letter::new(g, inv)))
    })
}

fn word_in(p: &GroupPresentation, max_len: usize) -> BoxedStrategy<Word> {
    let p = p.clone();
    raw_word(p.rank(), max_len)
        .prop_map(move |w| p.normal_form(&w).unwrap())
        .boxed()
}

fn rational() -> impl Strategy<Value = BigRational> {
    (-6i64..=6, 1i64..=5).prop_map(|(n, d)| BigRational::new(n.into(), d.into()))
}

fn positive_rational() -> impl Strategy<Value = BigRational> {
    (1i64..=6, 1i64..=5).prop_map(|(n, d)| BigRational::new(n.into(), d.into()))
}

fn element_in(
    p: &GroupPresentation,
    terms: usize,
    coeff: BoxedStrategy<BigRational>,
) -> BoxedStrategy<RingElement> {
    let p = p.clone();
    prop::collection::vec((word_in(&p, 4), coeff), 0..=terms)
        .prop_map(move |t| RingElement::from_terms(&p, t).unwrap())
        .boxed()
}

/// `a + star(a)` with nonnegative coefficients.
fn nonneg_hermitean(p: &GroupPresentation, terms: usize) -> BoxedStrategy<RingElement> {
    element_in(p, terms, positive_rational().boxed())
        .prop_map(|a| a.add(&a.star()).unwrap())
        .boxed()
}

fn with_presentation<T: std::fmt::Debug>(
    f: impl Fn(&GroupPresentation) -> BoxedStrategy<T>,
) -> impl Strategy<Value = (GroupPresentation, T)> {
    presentation().prop_flat_map(move |p| (Just(p.clone()), f(&p)))
}

fn associativity_for(p: GroupPresentation) {
    let mut runner = proptest::test_runner::TestRunner::new(ProptestConfig::with_cases(10_000));
    let w = word_in(&p, 8);
    runner
        .run(&(w.clone(), w.clone(), w), |(x, y, z)| {
            let left = p.multiply(&p.multiply(&x, &y), &z);
            let right = p.multiply(&x, &p.multiply(&y, &z));
            prop_assert_eq!(left, right);
            Ok(())
        })
        .unwrap();
}

#[test]
fn multiply_is_associative_free() {
    associativity_for(GroupPresentation::free(3));
}

#[test]
fn multiply_is_associative_free_product_cyclic() {
    associativity_for(GroupPresentation::free_product_cyclic(vec![2, 3, 0]));
    associativity_for(GroupPresentation::free_product_cyclic(vec![4, 5]));
}

#[test]
fn multiply_is_associative_free_abelian() {
    associativity_for(GroupPresentation::free_abelian(3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn normal_form_is_idempotent_and_shortening(
        (p, w) in presentation().prop_flat_map(|p| { let r = p.rank(); (Just(p), raw_word(r, 12)) })
    ) {
        let n = p.normal_form(&w).unwrap();
        prop_assert_eq!(p.normal_form(&n).unwrap(), n.clone());
        prop_assert!(n.len() <= w.len());
    }

    #[test]
    fn invert_is_an_involution((p, w) in with_presentation(|p| word_in(p, 10))) {
        prop_assert_eq!(p.invert(&p.invert(&w)), w.clone());
        prop_assert!(p.multiply(&w, &p.invert(&w)).is_identity());
        prop_assert!(p.multiply(&p.invert(&w), &w).is_identity());
    }

    #[test]
    fn words_round_trip_through_text((p, w) in with_presentation(|p| word_in(p, 10))) {
        let parsed = p.normal_form(&Word::parse(&w.to_string()).unwrap()).unwrap();
        prop_assert_eq!(parsed, w);
    }

    #[test]
    fn symmetrize_is_closed_under_inverse(
        (p, ws) in with_presentation(|p| prop::collection::vec(word_in(p, 6), 1..6).boxed())
    ) {
        let set = GenSet::symmetrize(&p, ws.clone()).unwrap();
        prop_assert!(set.is_symmetric());
        for w in &ws {
            prop_assert!(set.contains(w));
        }
    }

    #[test]
    fn star_is_an_anti_homomorphism(
        (_p, (a, b)) in with_presentation(|p| (element_in(p, 5, rational().boxed()), element_in(p, 5, rational().boxed())).boxed())
    ) {
        let left = a.convolve(&b).unwrap().star();
        let right = b.star().convolve(&a.star()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn trace_of_star_square_is_the_l2_norm(
        (_p, a) in with_presentation(|p| element_in(p, 6, rational().boxed()))
    ) {
        let t = a.star().convolve(&a).unwrap().trace();
        let sum = a.coefficients().fold(BigRational::zero(), |acc, (_, c)| acc + c * c);
        prop_assert_eq!(t.clone(), sum);
        prop_assert!(t >= BigRational::zero());
    }

    #[test]
    fn l1_norm_is_submultiplicative(
        (_p, (a, b)) in with_presentation(|p| (element_in(p, 5, rational().boxed()), element_in(p, 5, rational().boxed())).boxed())
    ) {
        prop_assert!(a.convolve(&b).unwrap().l1_norm() <= a.l1_norm() * b.l1_norm());
    }

    #[test]
    fn l1_norm_is_multiplicative_on_nonnegative(
        (_p, (a, b)) in with_presentation(|p| (element_in(p, 5, positive_rational().boxed()), element_in(p, 5, positive_rational().boxed())).boxed())
    ) {
        prop_assert_eq!(a.convolve(&b).unwrap().l1_norm(), a.l1_norm() * b.l1_norm());
    }

    #[test]
    fn symmetrized_products_stay_hermitean_and_nonnegative(
        (_p, (a, b)) in with_presentation(|p| (nonneg_hermitean(p, 4), nonneg_hermitean(p, 4)).boxed())
    ) {
        let c = a.convolve(&b).unwrap().add(&b.convolve(&a).unwrap()).unwrap();
        prop_assert!(c.is_hermitean());
        prop_assert!(c.is_nonnegative());
    }
}

/// A hermitean `b` with `0 <= b <= a`: each coefficient pair of `a` scaled by
/// a factor in `[0, 1]`.
fn dominated(a: &RingElement, factors: &[(i64, i64)]) -> RingElement {
    let p = a.presentation();
    let mut terms = Vec::new();
    for (i, (w, c)) in a.terms_sorted().into_iter().enumerate() {
        let inv = p.invert(w);
        // the factor is keyed by the smaller of w and its inverse
        let key = if &inv < w { inv } else { w.clone() };
        let idx = a
            .terms_sorted()
            .iter()
            .position(|(v, _)| **v == key)
            .unwrap_or(i);
        let (n, d) = factors[idx % factors.len()];
        terms.push((w.clone(), c * BigRational::new(n.into(), d.into())));
    }
    RingElement::from_terms(p, terms).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn dominated_elements_have_smaller_moments(
        (_p, (a, factors)) in with_presentation(|p| (
            nonneg_hermitean(p, 3),
            prop::collection::vec((0i64..=4).prop_map(|n| (n, 4)), 1..8),
        ).boxed())
    ) {
        let b = dominated(&a, &factors);
        prop_assert!(b.is_hermitean());
        prop_assert!(leq_coefficientwise(&b, &a).unwrap());
        let (mut pa, mut pb) = (a.clone(), b.clone());
        for _ in 1..=4 {
            let ta = pa.convolve(&pa).unwrap().trace();
            let tb = pb.convolve(&pb).unwrap().trace();
            prop_assert!(tb <= ta);
            pa = pa.convolve(&a).unwrap();
            pb = pb.convolve(&b).unwrap();
        }
    }
}

fn radial(rank: u32, max_distance: usize) -> impl Strategy<Value = RadialElement> {
    prop::collection::vec((-4i64..=4, 1i64..=3), 0..=max_distance + 1).prop_map(move |cs| {
        RadialElement::new(
            rank,
            cs.into_iter()
                .map(|(n, d)| BigRational::new(n.into(), d.into()))
                .collect(),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn radial_convolution_commutes(rank in 1u32..=3, u in radial(3, 6), v in radial(3, 6)) {
        let u = RadialElement::new(rank, u.coefficients().to_vec());
        let v = RadialElement::new(rank, v.coefficients().to_vec());
        prop_assert_eq!(radial_convolve(&u, &v).unwrap(), radial_convolve(&v, &u).unwrap());
    }

    #[test]
    fn radial_convolution_matches_dense(u in radial(2, 4), v in radial(2, 4)) {
        let du = u.to_dense(100_000).unwrap();
        let dv = v.to_dense(100_000).unwrap();
        let dense = to_radial(&du.convolve(&dv).unwrap()).unwrap();
        prop_assert_eq!(radial_convolve(&u, &v).unwrap(), dense);
    }

    #[test]
    fn markov_powers_conserve_mass_and_parity(rank in 1u32..=4, k in 0u32..=40) {
        let a = radial_markov_power(rank, k);
        let mass = a
            .coefficients()
            .iter()
            .enumerate()
            .fold(BigRational::zero(), |acc, (l, c)| {
                acc + c * BigRational::from_integer(BigInt::from(sphere_size(rank, l)))
            });
        prop_assert!(mass.is_one());
        for (l, c) in a.coefficients().iter().enumerate() {
            if l % 2 != k as usize % 2 {
                prop_assert!(c.is_zero());
            }
        }
        prop_assert_eq!(a.size() > BigUint::zero(), true);
    }
}
