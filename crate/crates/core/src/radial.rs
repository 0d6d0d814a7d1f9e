//! Sphere-constant (radial) elements of the free group `F_r`.
//!
//! A radial element is `sum_l c[l] * 1_{S(l)}` where `S(l)` is the sphere of
//! reduced words of length `l`. Powers of the standard Markov operator are
//! radial, and radial elements form a commutative subalgebra, so products
//! reduce to vectors indexed by distance. Sphere-constancy is checked against
//! the dense engine in the tests rather than assumed.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::{Error, Result};
use crate::group::{GroupPresentation, Letter, Word};
use crate::interval::biguint_to_rational;
use crate::ring::RingElement;

/// Number of reduced words of length `l` in `F_r`: `1`, then `2r (2r-1)^(l-1)`.
pub fn sphere_size(rank: u32, l: usize) -> BigUint {
    if l == 0 {
        BigUint::one()
    } else {
        BigUint::from(2 * rank) * num_traits::pow(BigUint::from(2 * rank - 1), l - 1)
    }
}

/// Sphere sizes `N(0..=max_distance)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SphereProfile {
    rank: u32,
    sizes: Vec<BigUint>,
}

impl SphereProfile {
    pub fn new(rank: u32, max_distance: usize) -> Self {
        let mut sizes = Vec::with_capacity(max_distance + 1);
        for l in 0..=max_distance {
            sizes.push(if l < 2 {
                sphere_size(rank, l)
            } else {
                &sizes[l - 1] * BigUint::from(2 * rank - 1)
            });
        }
        SphereProfile { rank, sizes }
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn size(&self, l: usize) -> &BigUint {
        &self.sizes[l]
    }

    pub fn sizes(&self) -> &[BigUint] {
        &self.sizes
    }

    pub fn ball_size(&self) -> BigUint {
        self.sizes.iter().sum()
    }
}

/// `sum_l coefficients[l] * 1_{S(l)}` in `F_rank`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RadialElement {
    rank: u32,
    coeffs: Vec<BigRational>,
}

impl RadialElement {
    /// Trailing zero coefficients are dropped.
    pub fn new(rank: u32, mut coeffs: Vec<BigRational>) -> Self {
        assert!(rank >= 1, "free group rank must be positive");
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        RadialElement { rank, coeffs }
    }

    pub fn zero(rank: u32) -> Self {
        RadialElement::new(rank, Vec::new())
    }

    /// `delta_e`.
    pub fn one(rank: u32) -> Self {
        RadialElement::new(rank, vec![BigRational::one()])
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    /// Largest distance with a nonzero coefficient (0 for the zero element).
    pub fn max_distance(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Per-element coefficient on the sphere of radius `l`.
    pub fn coefficient(&self, l: usize) -> BigRational {
        self.coeffs
            .get(l)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Distances carrying a nonzero coefficient.
    pub fn support_distances(&self) -> Vec<usize> {
        (0..self.coeffs.len())
            .filter(|&l| !self.coeffs[l].is_zero())
            .collect()
    }

    pub fn sphere_profile(&self) -> SphereProfile {
        SphereProfile::new(self.rank, self.max_distance())
    }

    /// `size(a)`, summed over the support spheres.
    pub fn size(&self) -> BigUint {
        let spheres = self.sphere_profile();
        self.support_distances()
            .into_iter()
            .map(|l| spheres.size(l).clone())
            .sum()
    }

    pub fn trace(&self) -> BigRational {
        self.coefficient(0)
    }

    pub fn l1_norm(&self) -> BigRational {
        let spheres = self.sphere_profile();
        self.coeffs
            .iter()
            .enumerate()
            .fold(BigRational::zero(), |acc, (l, c)| {
                acc + c.abs() * biguint_to_rational(spheres.size(l))
            })
    }

    /// `tau(a* a) = sum_l N(l) c[l]^2`.
    pub fn l2_norm_squared(&self) -> BigRational {
        let spheres = self.sphere_profile();
        self.coeffs
            .iter()
            .enumerate()
            .fold(BigRational::zero(), |acc, (l, c)| {
                acc + c * c * biguint_to_rational(spheres.size(l))
            })
    }

    pub fn is_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }

    pub fn scale(&self, factor: &BigRational) -> RadialElement {
        RadialElement::new(self.rank, self.coeffs.iter().map(|c| c * factor).collect())
    }

    /// Expands into a dense element; fails if the support exceeds `guard`.
    pub fn to_dense(&self, guard: usize) -> Result<RingElement> {
        let p = GroupPresentation::free(self.rank);
        let size = self.size();
        if size > BigUint::from(guard) {
            return Err(Error::SupportGuard {
                predicted: u128::try_from(size).unwrap_or(u128::MAX),
                guard,
            });
        }
        let mut coeffs = FxHashMap::default();
        for l in self.support_distances() {
            for w in sphere_words(self.rank, l) {
                coeffs.insert(w, self.coeffs[l].clone());
            }
        }
        Ok(RingElement::from_map_unchecked(&p, coeffs))
    }
}

/// Indicator of the union of the listed spheres.
pub fn indicator_radial(rank: u32, distances: &[usize]) -> RadialElement {
    let len = distances.iter().max().map_or(0, |&m| m + 1);
    let mut coeffs = vec![BigRational::zero(); len];
    for &l in distances {
        coeffs[l] = BigRational::one();
    }
    RadialElement::new(rank, coeffs)
}

/// Number of walks of length `k` from the root of the `2r`-regular tree that
/// end at each distance.
pub fn walk_distance_counts(rank: u32, k: u32) -> Vec<BigUint> {
    let degree = BigUint::from(2 * rank);
    let outward = BigUint::from(2 * rank - 1);
    let mut counts = vec![BigUint::one()];
    for _ in 0..k {
        let mut next = vec![BigUint::zero(); counts.len() + 1];
        for (l, c) in counts.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if l == 0 {
                next[1] += c * &degree;
            } else {
                next[l + 1] += c * &outward;
                next[l - 1] += c;
            }
        }
        counts = next;
    }
    counts
}

/// `m(Sigma)^k` for the standard set of `F_rank`: the coefficient at distance
/// `l` is the walk's distance distribution `P_k(l)` divided by `N(l)`.
pub fn radial_markov_power(rank: u32, k: u32) -> RadialElement {
    let counts = walk_distance_counts(rank, k);
    let total = num_traits::pow(BigUint::from(2 * rank), k as usize);
    let spheres = SphereProfile::new(rank, counts.len() - 1);
    let coeffs = counts
        .iter()
        .enumerate()
        .map(|(l, c)| {
            BigRational::new(
                BigInt::from(c.clone()),
                BigInt::from(spheres.size(l) * &total),
            )
        })
        .collect();
    RadialElement::new(rank, coeffs)
}

/// For a fixed reduced `w` with `|w| = j`, entry `t` counts reduced `s` with
/// `|s| = i` and `|s w| = i + j - 2t`.
pub fn cancellation_counts(rank: u32, i: usize, j: usize) -> Vec<BigUint> {
    let q = 2 * rank as u64;
    let pw = powers(q - 1, i + 1);
    (0..=i.min(j))
        .map(|t| {
            cancellation_count(q, i, j, t, &pw)
                .to_biguint()
                .expect("nonnegative count")
        })
        .collect()
}

fn powers(base: u64, n: usize) -> Vec<BigInt> {
    let base = BigInt::from(base);
    let mut out = Vec::with_capacity(n + 1);
    out.push(BigInt::one());
    for m in 0..n {
        let next = &out[m] * &base;
        out.push(next);
    }
    out
}

// s ends in the inverse of the first t letters of w. The letter before them
// must neither undo its right neighbour nor cancel the next letter of w; the
// remaining letters only avoid undoing their right neighbour.
fn cancellation_count(q: u64, i: usize, j: usize, t: usize, pw: &[BigInt]) -> BigInt {
    if t == i {
        BigInt::one()
    } else if t == j {
        if j == 0 {
            BigInt::from(q) * &pw[i - 1]
        } else {
            pw[i - j].clone()
        }
    } else {
        BigInt::from(q - 1 - u64::from(t > 0)) * &pw[i - t - 1]
    }
}

fn common_denominator(coeffs: &[BigRational]) -> BigInt {
    coeffs
        .iter()
        .filter(|c| !c.is_zero())
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
}

/// Product of radial elements, through exact sphere-product structure
/// constants.
pub fn radial_convolve(u: &RadialElement, v: &RadialElement) -> Result<RadialElement> {
    if u.rank != v.rank {
        return Err(Error::RankMismatch {
            left: u.rank,
            right: v.rank,
        });
    }
    if u.is_zero() || v.is_zero() {
        return Ok(RadialElement::zero(u.rank));
    }
    let rank = u.rank;
    let q = 2 * rank as u64;
    let du = common_denominator(&u.coeffs);
    let dv = common_denominator(&v.coeffs);
    let scaled = |coeffs: &[BigRational], d: &BigInt| -> Vec<(usize, BigInt)> {
        coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(l, c)| (l, (c * BigRational::from_integer(d.clone())).to_integer()))
            .collect()
    };
    let us = scaled(&u.coeffs, &du);
    let vs = scaled(&v.coeffs, &dv);
    let len = u.max_distance() + v.max_distance() + 1;
    let spheres = SphereProfile::new(rank, len - 1);
    let sizes: Vec<BigInt> = spheres
        .sizes()
        .iter()
        .map(|n| BigInt::from(n.clone()))
        .collect();
    let pw = powers(q - 1, u.max_distance() + 1);
    let add = |mut acc: Vec<BigInt>, other: Vec<BigInt>| {
        for (a, b) in acc.iter_mut().zip(other) {
            *a += b;
        }
        acc
    };
    let sums = us
        .par_iter()
        .map(|(i, ui)| {
            let mut local = vec![BigInt::zero(); len];
            for (j, vj) in &vs {
                // pairs (s, w) with |s| = i, |w| = j: N(j) choices of w times
                // the per-w cancellation counts
                let weight = ui * vj * &sizes[*j];
                for t in 0..=(*i).min(*j) {
                    let c = cancellation_count(q, *i, *j, t, &pw);
                    if !c.is_zero() {
                        local[i + j - 2 * t] += &weight * c;
                    }
                }
            }
            local
        })
        .reduce(|| vec![BigInt::zero(); len], add);
    let denom = du * dv;
    let coeffs = sums
        .into_iter()
        .enumerate()
        .map(|(l, s)| {
            if s.is_zero() {
                BigRational::zero()
            } else {
                BigRational::new(s, &denom * &sizes[l])
            }
        })
        .collect();
    Ok(RadialElement::new(rank, coeffs))
}

/// Reduced words of length `l` in `F_rank`, in shortlex order.
pub fn sphere_words(rank: u32, l: usize) -> Vec<Word> {
    let letters: Vec<Letter> = (1..=rank)
        .flat_map(|g| [Letter::new(g, false), Letter::new(g, true)])
        .collect();
    let mut out = Vec::new();
    let mut current: Vec<Letter> = Vec::with_capacity(l);
    fn extend(letters: &[Letter], l: usize, current: &mut Vec<Letter>, out: &mut Vec<Word>) {
        if current.len() == l {
            out.push(Word::from_letters(current.iter().copied()));
            return;
        }
        for &x in letters {
            if current.last().is_some_and(|&y| y == x.inverse()) {
                continue;
            }
            current.push(x);
            extend(letters, l, current, out);
            current.pop();
        }
    }
    extend(&letters, l, &mut current, &mut out);
    out
}

// First word of the sphere (shortlex) not present in `present`.
fn first_missing(rank: u32, l: usize, present: &FxHashSet<&Word>) -> Option<Word> {
    let letters: Vec<Letter> = (1..=rank)
        .flat_map(|g| [Letter::new(g, false), Letter::new(g, true)])
        .collect();
    fn search(
        letters: &[Letter],
        l: usize,
        current: &mut Vec<Letter>,
        present: &FxHashSet<&Word>,
    ) -> Option<Word> {
        if current.len() == l {
            let w = Word::from_letters(current.iter().copied());
            return (!present.contains(&w)).then_some(w);
        }
        for &x in letters {
            if current.last().is_some_and(|&y| y == x.inverse()) {
                continue;
            }
            current.push(x);
            let found = search(letters, l, current, present);
            current.pop();
            if found.is_some() {
                return found;
            }
        }
        None
    }
    search(&letters, l, &mut Vec::with_capacity(l), present)
}

/// Per-sphere coefficients of a sphere-constant element of a free group.
pub fn to_radial(a: &RingElement) -> Result<RadialElement> {
    let rank = match a.presentation() {
        GroupPresentation::Free { rank } => *rank,
        _ => return Err(Error::RadialUnsupported),
    };
    let terms = a.terms_sorted();
    let max_len = terms.iter().map(|(w, _)| w.len()).max().unwrap_or(0);
    let spheres = SphereProfile::new(rank, max_len);
    let mut first: Vec<Option<(&Word, &BigRational)>> = vec![None; max_len + 1];
    let mut counts: Vec<usize> = vec![0; max_len + 1];
    for (w, c) in &terms {
        let l = w.len();
        match first[l] {
            None => first[l] = Some((w, c)),
            Some((w0, c0)) if c0 != *c => {
                return Err(Error::NonRadial {
                    first: w0.to_string(),
                    second: w.to_string(),
                })
            }
            Some(_) => {}
        }
        counts[l] += 1;
    }
    let mut coeffs = vec![BigRational::zero(); max_len + 1];
    for l in 0..=max_len {
        let Some((w0, c0)) = first[l] else { continue };
        if BigUint::from(counts[l]) != *spheres.size(l) {
            let present: FxHashSet<&Word> = terms.iter().map(|(w, _)| *w).collect();
            let missing = first_missing(rank, l, &present).expect("incomplete sphere");
            return Err(Error::NonRadial {
                first: w0.to_string(),
                second: missing.to_string(),
            });
        }
        coeffs[l] = c0.clone();
    }
    Ok(RadialElement::new(rank, coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{markov, power_exact, DEFAULT_SUPPORT_GUARD};
    use num_traits::ToPrimitive;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn sphere_sizes() {
        assert_eq!(sphere_size(2, 0), BigUint::from(1u32));
        assert_eq!(sphere_size(2, 1), BigUint::from(4u32));
        assert_eq!(sphere_size(2, 5), BigUint::from(324u32));
        let profile = SphereProfile::new(3, 4);
        assert_eq!(
            profile.ball_size(),
            BigUint::from(GroupPresentation::free(3).ball_size(4))
        );
        for l in 0..=4 {
            assert_eq!(
                sphere_words(3, l).len(),
                sphere_size(3, l).to_usize().unwrap()
            );
        }
    }

    #[test]
    fn markov_power_examples() {
        let m1 = radial_markov_power(2, 1);
        assert_eq!(m1.coefficients(), &[q(0, 1), q(1, 4)]);
        let m2 = radial_markov_power(2, 2);
        assert_eq!(m2.coefficient(0), q(1, 4));
        assert_eq!(m2.coefficient(1), q(0, 1));
        assert_eq!(m2.coefficient(2), q(1, 16));
        assert_eq!(radial_markov_power(2, 4).coefficient(0), q(7, 64));
    }

    #[test]
    fn mass_conservation_and_parity() {
        for r in 1..=4 {
            for k in 1..=30 {
                let m = radial_markov_power(r, k);
                assert_eq!(m.l1_norm(), q(1, 1));
                for l in m.support_distances() {
                    assert_eq!(l % 2, k as usize % 2);
                }
            }
        }
    }

    #[test]
    fn sphere_product_examples() {
        let s1 = indicator_radial(2, &[1]);
        let sq = radial_convolve(&s1, &s1).unwrap();
        assert_eq!(sq.coefficients(), &[q(4, 1), q(0, 1), q(1, 1)]);
        let x = radial_markov_power(2, 5);
        assert_eq!(radial_convolve(&RadialElement::one(2), &x).unwrap(), x);
        let m3 = radial_convolve(&radial_markov_power(2, 2), &radial_markov_power(2, 1)).unwrap();
        assert_eq!(m3, radial_markov_power(2, 3));
        assert!(matches!(
            radial_convolve(&s1, &indicator_radial(3, &[1])),
            Err(Error::RankMismatch { .. })
        ));
        assert!(indicator_radial(2, &[]).is_zero());
    }

    #[test]
    fn cancellation_counts_match_brute_force() {
        for rank in 1..=3 {
            let p = GroupPresentation::free(rank);
            for i in 0..=4 {
                for j in 0..=4 {
                    let w = sphere_words(rank, j).pop().unwrap();
                    let mut brute = vec![0u64; i.min(j) + 1];
                    for s in sphere_words(rank, i) {
                        let len = p.multiply(&s, &w).len();
                        brute[(i + j - len) / 2] += 1;
                    }
                    let formula: Vec<u64> = cancellation_counts(rank, i, j)
                        .iter()
                        .map(|c| c.to_u64().unwrap())
                        .collect();
                    assert_eq!(formula, brute, "rank={rank} i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn to_radial_examples() {
        let p = GroupPresentation::free(2);
        let m = markov(&p.standard_set()).unwrap();
        assert_eq!(to_radial(&m).unwrap(), radial_markov_power(2, 1));
        let m4 = power_exact(&m, 4, DEFAULT_SUPPORT_GUARD).unwrap();
        assert_eq!(to_radial(&m4).unwrap(), radial_markov_power(2, 4));
        let delta_a = RingElement::monomial(&p, &Word::parse("a").unwrap(), q(1, 1)).unwrap();
        match to_radial(&delta_a) {
            Err(Error::NonRadial { first, second }) => {
                assert_eq!(first, "a");
                assert_eq!(second.len(), 1);
                assert_ne!(second, "a");
            }
            other => panic!("{other:?}"),
        }
        let z2 = GroupPresentation::free_abelian(2);
        assert!(matches!(
            to_radial(&RingElement::one(&z2)),
            Err(Error::RadialUnsupported)
        ));
    }

    #[test]
    fn even_ball_indicator_matches_dense_support() {
        let p = GroupPresentation::free(2);
        let m2 = power_exact(
            &markov(&p.standard_set()).unwrap(),
            2,
            DEFAULT_SUPPORT_GUARD,
        )
        .unwrap();
        let ind = indicator_radial(2, &[0, 2]);
        assert_eq!(ind.size(), BigUint::from(13u32));
        let dense = ind.to_dense(DEFAULT_SUPPORT_GUARD).unwrap();
        assert_eq!(dense.support(), m2.support());
    }
}
