//! Property tests for the moment estimators, power iteration and sampling.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;

use spectra_core::radial::RadialElement;
use spectra_core::ring::DEFAULT_SUPPORT_GUARD;
use spectra_core::spectral::{
    ball_power_iteration, enumerate_return_probability, monte_carlo_return, radius_lower_bounds,
    trace_moments_dense, trace_moments_radial,
};
use spectra_core::{GenSet, GroupPresentation, Letter, RingElement, Word};

fn hermitean_free(rank: u32) -> impl Strategy<Value = RingElement> {
    let word = prop::collection::vec((1..=rank, any::<bool>()), 0..=3);
    prop::collection::vec((word, 1i64..=5), 1..=4).prop_map(move |terms| {
        let p = GroupPresentation::free(rank);
        let a = RingElement::from_terms(
            &p,
            terms.into_iter().map(|(letters, c)| {
                let w = Word::from_letters(letters.into_iter().map(|(g, i)| Letter::new(g, i)));
                (w, BigRational::from_integer(c.into()))
            }),
        )
        .unwrap();
        a.add(&a.star()).unwrap()
    })
}

fn radial_nonneg() -> impl Strategy<Value = RadialElement> {
    (1u32..=3, prop::collection::vec(0i64..=4, 1..=4)).prop_map(|(rank, cs)| {
        let mut cs: Vec<BigRational> = cs
            .into_iter()
            .map(|c| BigRational::from_integer(c.into()))
            .collect();
        if cs.iter().all(|c| *c == BigRational::from_integer(0.into())) {
            cs[0] = BigRational::from_integer(1.into());
        }
        RadialElement::new(rank, cs)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dense_moment_bounds_are_ordered(a in hermitean_free(2)) {
        let m = trace_moments_dense(&a, 4, 200_000).unwrap();
        prop_assert!(m.is_log_convex());
        let b = radius_lower_bounds(&m, 128).unwrap();
        for w in b.root.windows(2) {
            prop_assert!(w[1].value >= w[0].value * (1.0 - 1e-12));
        }
        for r in &b.ratio {
            let n = r.params.n.unwrap() as usize;
            prop_assert!(r.value >= b.root[n - 1].value * (1.0 - 1e-12));
        }
    }

    #[test]
    fn radial_moment_bounds_are_ordered(a in radial_nonneg()) {
        let m = trace_moments_radial(&a, 6).unwrap();
        prop_assert!(m.is_log_convex());
        let b = radius_lower_bounds(&m, 128).unwrap();
        for w in b.root.windows(2) {
            prop_assert!(w[1].value >= w[0].value * (1.0 - 1e-12));
        }
        for r in &b.ratio {
            let n = r.params.n.unwrap() as usize;
            prop_assert!(r.value >= b.root[n - 1].value * (1.0 - 1e-12));
        }
    }
}

fn families() -> Vec<GenSet> {
    vec![
        GroupPresentation::free(2).standard_set(),
        GroupPresentation::free_product_cyclic(vec![2, 3]).standard_set(),
        GroupPresentation::free_abelian(2).standard_set(),
    ]
}

#[test]
fn monte_carlo_agrees_with_enumeration() {
    for set in families() {
        for n in 1..=3u32 {
            let exact = enumerate_return_probability(&set, 2 * n).to_f64().unwrap();
            let mc = monte_carlo_return(&set, 2 * n, 40_000, 11 + n as u64).unwrap();
            let se = (exact * (1.0 - exact) / mc.trials as f64).sqrt();
            assert!(
                (mc.frequency - exact).abs() <= 4.0 * se,
                "{set} n={n}: {} vs {exact}",
                mc.frequency
            );
        }
    }
}

#[test]
fn monte_carlo_is_reproducible() {
    let set = GroupPresentation::free(2).standard_set();
    let a = monte_carlo_return(&set, 6, 5_000, 3).unwrap();
    let b = monte_carlo_return(&set, 6, 5_000, 3).unwrap();
    assert_eq!(a, b);
}

#[test]
fn power_iteration_grows_with_the_ball() {
    let mut sets = families();
    sets.push(GenSet::parse(&GroupPresentation::free(2), "a,A,ab,BA").unwrap());
    for set in sets {
        let mut previous = 0.0;
        for radius in 1..=6 {
            let r = ball_power_iteration(&set, radius, 400, 1e-13, DEFAULT_SUPPORT_GUARD).unwrap();
            assert!(
                r.value >= previous - 1e-9,
                "{set} radius {radius}: {} < {previous}",
                r.value
            );
            assert!(r.value <= 1.0);
            previous = r.value;
        }
    }
}
