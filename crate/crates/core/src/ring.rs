//! Exact sparse arithmetic in the real group ring.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::group::{GenSet, GroupPresentation, Word};
use crate::interval::biguint_to_rational;

/// Default cap on the number of stored words in a computed element.
pub const DEFAULT_SUPPORT_GUARD: usize = 5_000_000;

// below this many term products convolution stays on one thread
const PARALLEL_THRESHOLD: usize = 1 << 15;

/// A finitely supported element `sum a_g g` with rational coefficients.
///
/// Keys are normal-form words and no zero coefficient is stored.
#[derive(Clone, Debug, PartialEq)]
pub struct RingElement {
    presentation: GroupPresentation,
    coeffs: FxHashMap<Word, BigRational>,
}

impl RingElement {
    pub fn zero(p: &GroupPresentation) -> Self {
        RingElement {
            presentation: p.clone(),
            coeffs: FxHashMap::default(),
        }
    }

    /// `coefficient * g`.
    pub fn monomial(p: &GroupPresentation, word: &Word, coefficient: BigRational) -> Result<Self> {
        Self::from_terms(p, [(word.clone(), coefficient)])
    }

    /// The unit `delta_e`.
    pub fn one(p: &GroupPresentation) -> Self {
        let mut coeffs = FxHashMap::default();
        coeffs.insert(Word::identity(), BigRational::one());
        RingElement {
            presentation: p.clone(),
            coeffs,
        }
    }

    /// Sums the given terms after normalizing their words.
    pub fn from_terms(
        p: &GroupPresentation,
        terms: impl IntoIterator<Item = (Word, BigRational)>,
    ) -> Result<Self> {
        let mut coeffs: FxHashMap<Word, BigRational> = FxHashMap::default();
        for (w, c) in terms {
            let w = p.normal_form(&w)?;
            *coeffs.entry(w).or_insert_with(BigRational::zero) += c;
        }
        coeffs.retain(|_, c| !c.is_zero());
        Ok(RingElement {
            presentation: p.clone(),
            coeffs,
        })
    }

    /// Unnormalized indicator `u(S) = sum_{s in S} s`.
    pub fn indicator(set: &GenSet) -> Self {
        let coeffs = set
            .words()
            .iter()
            .map(|w| (w.clone(), BigRational::one()))
            .collect();
        RingElement {
            presentation: set.presentation().clone(),
            coeffs,
        }
    }

    pub(crate) fn from_map_unchecked(
        p: &GroupPresentation,
        coeffs: FxHashMap<Word, BigRational>,
    ) -> Self {
        debug_assert!(coeffs.values().all(|c| !c.is_zero()));
        RingElement {
            presentation: p.clone(),
            coeffs,
        }
    }

    pub fn presentation(&self) -> &GroupPresentation {
        &self.presentation
    }

    pub fn coefficient(&self, w: &Word) -> BigRational {
        self.coeffs
            .get(w)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&Word, &BigRational)> {
        self.coeffs.iter()
    }

    /// Terms in shortlex order of their words.
    pub fn terms_sorted(&self) -> Vec<(&Word, &BigRational)> {
        let mut terms: Vec<_> = self.coeffs.iter().collect();
        terms.sort_by(|a, b| a.0.cmp(b.0));
        terms
    }

    /// `supp(a)` in shortlex order.
    pub fn support(&self) -> Vec<Word> {
        let mut words: Vec<Word> = self.coeffs.keys().cloned().collect();
        words.sort();
        words
    }

    /// `size(a) = |supp(a)|`.
    pub fn size(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_word_len(&self) -> usize {
        self.coeffs.keys().map(Word::len).max().unwrap_or(0)
    }

    fn check_same(&self, other: &RingElement) -> Result<()> {
        if self.presentation != other.presentation {
            return Err(Error::PresentationMismatch {
                left: self.presentation.to_string(),
                right: other.presentation.to_string(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &RingElement) -> Result<RingElement> {
        self.check_same(other)?;
        let mut coeffs = self.coeffs.clone();
        for (w, c) in &other.coeffs {
            *coeffs.entry(w.clone()).or_insert_with(BigRational::zero) += c;
        }
        coeffs.retain(|_, c| !c.is_zero());
        Ok(RingElement::from_map_unchecked(&self.presentation, coeffs))
    }

    pub fn scale(&self, factor: &BigRational) -> RingElement {
        if factor.is_zero() {
            return RingElement::zero(&self.presentation);
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|(w, c)| (w.clone(), c * factor))
            .collect();
        RingElement::from_map_unchecked(&self.presentation, coeffs)
    }

    /// Group-ring product: the coefficient of `w` is the sum of `a_u b_v`
    /// over `u v = w`.
    pub fn convolve(&self, other: &RingElement) -> Result<RingElement> {
        self.check_same(other)?;
        let p = &self.presentation;
        let right: Vec<(&Word, &BigRational)> = other.coeffs.iter().collect();
        let left: Vec<(&Word, &BigRational)> = self.coeffs.iter().collect();
        let accumulate = |chunk: &[(&Word, &BigRational)]| {
            let mut acc: FxHashMap<Word, BigRational> = FxHashMap::default();
            for (u, x) in chunk {
                for (v, y) in &right {
                    let w = p.multiply(u, v);
                    let prod = *x * *y;
                    match acc.get_mut(&w) {
                        Some(c) => *c += prod,
                        None => {
                            acc.insert(w, prod);
                        }
                    }
                }
            }
            acc
        };
        let mut coeffs = if left.len() * right.len() < PARALLEL_THRESHOLD {
            accumulate(&left)
        } else {
            let chunk = (left.len() / rayon::current_num_threads().max(1)).max(64);
            left.par_chunks(chunk)
                .map(accumulate)
                .reduce(FxHashMap::default, merge_sum)
        };
        coeffs.retain(|_, c| !c.is_zero());
        Ok(RingElement::from_map_unchecked(p, coeffs))
    }

    /// The involution `a*`, with `(a*)_g = a_{g^-1}` for real coefficients.
    pub fn star(&self) -> RingElement {
        let p = &self.presentation;
        let coeffs = self
            .coeffs
            .iter()
            .map(|(w, c)| (p.invert(w), c.clone()))
            .collect();
        RingElement::from_map_unchecked(p, coeffs)
    }

    /// `tau(a) = a_e`.
    pub fn trace(&self) -> BigRational {
        self.coefficient(&Word::identity())
    }

    /// `||a||_1 = sum |a_g|`.
    pub fn l1_norm(&self) -> BigRational {
        self.coeffs
            .values()
            .fold(BigRational::zero(), |acc, c| acc + c.abs())
    }

    /// Sum of squared coefficients, `tau(a* a)`.
    pub fn l2_norm_squared(&self) -> BigRational {
        self.coeffs
            .values()
            .fold(BigRational::zero(), |acc, c| acc + c * c)
    }

    pub fn is_hermitean(&self) -> bool {
        self.first_non_hermitean().is_none()
    }

    pub(crate) fn first_non_hermitean(&self) -> Option<Word> {
        let p = &self.presentation;
        let mut bad: Vec<&Word> = self
            .coeffs
            .iter()
            .filter(|(w, c)| self.coeffs.get(&p.invert(w)) != Some(*c))
            .map(|(w, _)| w)
            .collect();
        bad.sort();
        bad.first().map(|w| (*w).clone())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.coeffs.values().all(|c| !c.is_negative())
    }

    /// The common value of all coefficients, if there is one.
    pub fn uniform_value(&self) -> Option<BigRational> {
        let mut values = self.coeffs.values();
        let first = values.next()?;
        values.all(|c| c == first).then(|| first.clone())
    }
}

/// `b <=_G a`: every coefficient of `b` is at most the matching one of `a`.
pub fn leq_coefficientwise(b: &RingElement, a: &RingElement) -> Result<bool> {
    b.check_same(a)?;
    let zero = BigRational::zero();
    let b_ok = b
        .coeffs
        .iter()
        .all(|(w, bc)| bc <= a.coeffs.get(w).unwrap_or(&zero));
    let a_ok = a
        .coeffs
        .iter()
        .filter(|(w, _)| !b.coeffs.contains_key(*w))
        .all(|(_, ac)| !ac.is_negative());
    Ok(b_ok && a_ok)
}

fn merge_sum<V: for<'a> std::ops::AddAssign<&'a V>>(
    mut a: FxHashMap<Word, V>,
    mut b: FxHashMap<Word, V>,
) -> FxHashMap<Word, V> {
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    for (w, v) in b {
        match a.get_mut(&w) {
            Some(c) => *c += &v,
            None => {
                a.insert(w, v);
            }
        }
    }
    a
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms_sorted()
            .into_iter()
            .map(|(w, c)| format!("{c}*{w}"))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// The Markov operator `m(S) = |S|^-1 sum_{s in S} s` of a symmetric set.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovOperator {
    element: RingElement,
    source: GenSet,
}

impl MarkovOperator {
    pub fn element(&self) -> &RingElement {
        &self.element
    }

    pub fn source(&self) -> &GenSet {
        &self.source
    }

    pub fn into_element(self) -> RingElement {
        self.element
    }
}

impl std::ops::Deref for MarkovOperator {
    type Target = RingElement;

    fn deref(&self) -> &RingElement {
        &self.element
    }
}

pub fn markov(set: &GenSet) -> Result<MarkovOperator> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    if !set.is_symmetric() {
        let p = set.presentation();
        let missing = set
            .words()
            .iter()
            .map(|w| p.invert(w))
            .find(|w| !set.contains(w))
            .expect("asymmetric set has a missing inverse");
        return Err(Error::NotSymmetric {
            missing: missing.to_string(),
        });
    }
    let weight = BigRational::new(BigInt::one(), BigInt::from(set.len()));
    let element = RingElement::indicator(set).scale(&weight);
    Ok(MarkovOperator {
        element,
        source: set.clone(),
    })
}

/// Upper estimate of `size(a^k)`: the smaller of `size(a)^k` and the ball
/// that can contain the product.
pub fn predicted_power_support(a: &RingElement, k: u32) -> u128 {
    let by_count = (a.size() as u128).checked_pow(k).unwrap_or(u128::MAX);
    let radius = (a.max_word_len() as u64)
        .saturating_mul(k as u64)
        .min(u32::MAX as u64) as u32;
    by_count.min(a.presentation().ball_size(radius))
}

fn check_guard(predicted: u128, guard: usize) -> Result<()> {
    if predicted > guard as u128 {
        Err(Error::SupportGuard { predicted, guard })
    } else {
        Ok(())
    }
}

/// Successive powers `u^1, u^2, ...` of an indicator `u = sum_{s in S} s`,
/// as nonnegative integer counts.
pub struct CountPowers<'a> {
    presentation: &'a GroupPresentation,
    support: Vec<Word>,
    counts: FxHashMap<Word, BigUint>,
    exponent: u32,
    guard: usize,
}

impl<'a> CountPowers<'a> {
    pub fn new(presentation: &'a GroupPresentation, support: Vec<Word>, guard: usize) -> Self {
        let mut counts = FxHashMap::default();
        counts.insert(Word::identity(), BigUint::one());
        CountPowers {
            presentation,
            support,
            counts,
            exponent: 0,
            guard,
        }
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn counts(&self) -> &FxHashMap<Word, BigUint> {
        &self.counts
    }

    /// Advances to the next power.
    pub fn step(&mut self) -> Result<()> {
        let p = self.presentation;
        let support = &self.support;
        let reach = self.counts.keys().map(Word::len).max().unwrap_or(0)
            + support.iter().map(Word::len).max().unwrap_or(0);
        let radius = reach.min(u32::MAX as usize) as u32;
        let predicted = (self.counts.len() as u128)
            .saturating_mul(support.len() as u128)
            .min(p.ball_size(radius));
        check_guard(predicted, self.guard)?;
        let entries: Vec<(&Word, &BigUint)> = self.counts.iter().collect();
        let accumulate = |chunk: &[(&Word, &BigUint)]| {
            let mut acc: FxHashMap<Word, BigUint> = FxHashMap::default();
            for (w, c) in chunk {
                for s in support {
                    let v = p.multiply(w, s);
                    match acc.get_mut(&v) {
                        Some(x) => *x += *c,
                        None => {
                            acc.insert(v, (*c).clone());
                        }
                    }
                }
            }
            acc
        };
        let next = if entries.len() * support.len() < PARALLEL_THRESHOLD {
            accumulate(&entries)
        } else {
            let chunk = (entries.len() / rayon::current_num_threads().max(1)).max(256);
            entries
                .par_chunks(chunk)
                .map(accumulate)
                .reduce(FxHashMap::default, merge_sum)
        };
        check_guard(next.len() as u128, self.guard)?;
        self.counts = next;
        self.exponent += 1;
        Ok(())
    }
}

/// Exact `a^k`. Uniform elements take the integer-count path: the
/// indicator is powered with integer counts and divided once at the end.
pub fn power_exact(a: &RingElement, k: u32, guard: usize) -> Result<RingElement> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "power exponent must be at least 1".into(),
        ));
    }
    check_guard(predicted_power_support(a, k), guard)?;
    let p = a.presentation();
    if a.is_zero() {
        return Ok(a.clone());
    }
    if let Some(c) = a.uniform_value() {
        let mut powers = CountPowers::new(p, a.support(), guard);
        for _ in 0..k {
            powers.step()?;
        }
        let scale = num_traits::pow(c, k as usize);
        let coeffs = powers
            .counts
            .into_iter()
            .map(|(w, n)| (w, biguint_to_rational(&n) * &scale))
            .collect();
        return Ok(RingElement::from_map_unchecked(p, coeffs));
    }
    let mut result = a.clone();
    for _ in 1..k {
        result = result.convolve(a)?;
        check_guard(result.size() as u128, guard)?;
    }
    Ok(result)
}
