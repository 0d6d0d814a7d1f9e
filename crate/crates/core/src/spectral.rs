//! Estimates of the spectral radius `rho(S) = ||m(S)||`, each tagged with the
//! side of the true value it is certified to lie on.
//!
//! Lower bounds come from trace moments (`tau(a^2n)^(1/2n)` and the moment
//! ratios, both below `||a||` by log-convexity of the moment sequence) and from
//! power iteration on a truncated ball. Exact values come from the closed form
//! for free groups.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{GenSet, GroupPresentation, Word};
use crate::interval::{self, biguint_to_rational, Interval};
use crate::radial::{radial_convolve, RadialElement};
use crate::ring::{CountPowers, RingElement};

/// Name of the pseudo-random generator used by the Monte Carlo estimator.
pub const RNG_NAME: &str = "ChaCha8";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Lower,
    Upper,
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    RootMoment,
    RatioMoment,
    BallPowerIteration,
    ClosedForm,
    Theorem1Bound,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::RootMoment => "root-moment",
            Method::RatioMoment => "ratio-moment",
            Method::BallPowerIteration => "ball-power-iteration",
            Method::ClosedForm => "closed-form",
            Method::Theorem1Bound => "theorem1-bound",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EstimateParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision_bits: Option<u32>,
}

/// A spectral radius estimate. `value` is rounded toward the certified side:
/// down for lower bounds, up for upper bounds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateReport {
    pub value: f64,
    pub direction: Direction,
    pub method: Method,
    pub params: EstimateParams,
    #[serde(skip)]
    pub enclosure: Option<Interval>,
}

impl EstimateReport {
    pub fn is_lower(&self) -> bool {
        self.direction == Direction::Lower
    }

    /// An interval containing a valid upper bound for the true value.
    pub fn upper_interval(&self) -> Result<Interval> {
        match self.direction {
            Direction::Lower => Err(Error::OneSided(format!(
                "{} estimate {}",
                self.method, self.value
            ))),
            Direction::Exact => Ok(self
                .enclosure
                .clone()
                .unwrap_or_else(|| Interval::point(interval::f64_to_rational(self.value)))),
            Direction::Upper => Ok(Interval::point(interval::f64_to_rational(self.value))),
        }
    }
}

/// True unless a lower bound exceeds an upper bound for the same quantity.
pub fn directions_consistent(reports: &[EstimateReport]) -> bool {
    let max_lower = reports
        .iter()
        .filter(|r| r.direction == Direction::Lower)
        .map(|r| r.value)
        .fold(f64::NEG_INFINITY, f64::max);
    reports
        .iter()
        .filter(|r| r.direction != Direction::Lower)
        .all(|r| {
            let upper = r.enclosure.as_ref().map_or(r.value, |iv| iv.hi_f64());
            max_lower <= upper
        })
}

/// `tau(a^2n)` for `n = 1..=n_max`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentSequence {
    pub description: String,
    pub values: Vec<BigRational>,
    /// All values are exact rationals.
    pub exact: bool,
}

impl MomentSequence {
    pub fn n_max(&self) -> usize {
        self.values.len()
    }

    /// `tau(a^2n)`, 1-based.
    pub fn moment(&self, n: usize) -> &BigRational {
        &self.values[n - 1]
    }

    /// `tau_2n^2 <= tau_(2n-2) tau_(2n+2)` for every interior `n`, with
    /// `tau_0 = 1`.
    pub fn is_log_convex(&self) -> bool {
        let mut seq = vec![BigRational::one()];
        seq.extend(self.values.iter().cloned());
        seq.windows(3).all(|w| &w[1] * &w[1] <= &w[0] * &w[2])
    }
}

fn require_hermitean(a: &RingElement) -> Result<()> {
    match a.first_non_hermitean() {
        Some(w) => Err(Error::NotHermitean {
            word: w.to_string(),
        }),
        None => Ok(()),
    }
}

/// Exact trace moments of a hermitean dense element, using
/// `tau(a^2n) = sum_g (a^n)_g^2`.
pub fn trace_moments_dense(a: &RingElement, n_max: u32, guard: usize) -> Result<MomentSequence> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    require_hermitean(a)?;
    if a.is_zero() {
        return Err(Error::InvalidArgument("moments of the zero element".into()));
    }
    let mut values = Vec::with_capacity(n_max as usize);
    if let Some(c) = a.uniform_value() {
        let mut powers = CountPowers::new(a.presentation(), a.support(), guard);
        let c2 = &c * &c;
        let mut scale = BigRational::one();
        for _ in 0..n_max {
            powers.step()?;
            scale *= &c2;
            let sum: BigUint = powers
                .counts()
                .par_iter()
                .map(|(_, n)| n * n)
                .reduce(BigUint::zero, |x, y| x + y);
            values.push(biguint_to_rational(&sum) * &scale);
        }
    } else {
        let mut power = a.clone();
        values.push(power.l2_norm_squared());
        for _ in 1..n_max {
            power = power.convolve(a)?;
            if power.size() > guard {
                return Err(Error::SupportGuard {
                    predicted: power.size() as u128,
                    guard,
                });
            }
            values.push(power.l2_norm_squared());
        }
    }
    Ok(MomentSequence {
        description: format!("dense element of size {} in {}", a.size(), a.presentation()),
        values,
        exact: true,
    })
}

/// Exact trace moments of a radial element through radial convolution.
pub fn trace_moments_radial(a: &RadialElement, n_max: u32) -> Result<MomentSequence> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    if a.is_zero() {
        return Err(Error::InvalidArgument("moments of the zero element".into()));
    }
    let mut values = Vec::with_capacity(n_max as usize);
    let mut power = a.clone();
    values.push(power.l2_norm_squared());
    for _ in 1..n_max {
        power = radial_convolve(&power, a)?;
        values.push(power.l2_norm_squared());
    }
    Ok(MomentSequence {
        description: format!(
            "radial element on {} spheres in free:{}",
            a.support_distances().len(),
            a.rank()
        ),
        values,
        exact: true,
    })
}

/// Root and ratio lower bounds derived from a moment sequence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowerBounds {
    /// `tau_2n^(1/2n)` for `n = 1..=n_max`.
    pub root: Vec<EstimateReport>,
    /// `(tau_2n / tau_(2n-2))^(1/2)` for `n = 2..=n_max`.
    pub ratio: Vec<EstimateReport>,
    pub best: EstimateReport,
}

/// Certified lower bounds for `||a||` from its trace moments, evaluated with
/// `precision` bits before rounding down to f64.
pub fn radius_lower_bounds(m: &MomentSequence, precision: u32) -> Result<LowerBounds> {
    if m.n_max() < 2 {
        return Err(Error::TooFewMoments {
            have: m.n_max(),
            need: 2,
        });
    }
    let precision = precision.max(64);
    let report = |value: f64, method: Method, n: usize| EstimateReport {
        value,
        direction: Direction::Lower,
        method,
        params: EstimateParams {
            n: Some(n as u32),
            precision_bits: Some(precision),
            ..Default::default()
        },
        enclosure: None,
    };
    let root: Vec<EstimateReport> = m
        .values
        .par_iter()
        .enumerate()
        .map(|(i, tau)| {
            let n = i + 1;
            let r = interval::nth_root_down(tau, 2 * n as u32, precision);
            report(interval::to_f64_down(&r), Method::RootMoment, n)
        })
        .collect();
    let ratio: Vec<EstimateReport> = m
        .values
        .par_windows(2)
        .enumerate()
        .map(|(i, w)| {
            let n = i + 2;
            let value = if w[0].is_zero() {
                0.0
            } else {
                let r = interval::nth_root_down(&(&w[1] / &w[0]), 2, precision);
                interval::to_f64_down(&r)
            };
            report(value, Method::RatioMoment, n)
        })
        .collect();
    let best = ratio.last().cloned().expect("at least one ratio");
    Ok(LowerBounds { root, ratio, best })
}

/// The best certified lower bound a moment sequence supports: the last ratio
/// estimate, or the root estimate when only one moment is known.
pub fn best_lower_bound(m: &MomentSequence, precision: u32) -> Result<EstimateReport> {
    match m.n_max() {
        0 => Err(Error::TooFewMoments { have: 0, need: 1 }),
        1 => {
            let precision = precision.max(64);
            let r = interval::nth_root_down(m.moment(1), 2, precision);
            Ok(EstimateReport {
                value: interval::to_f64_down(&r),
                direction: Direction::Lower,
                method: Method::RootMoment,
                params: EstimateParams {
                    n: Some(1),
                    precision_bits: Some(precision),
                    ..Default::default()
                },
                enclosure: None,
            })
        }
        _ => Ok(radius_lower_bounds(m, precision)?.best),
    }
}

/// Enclosure of `sqrt(2n - 1) / n`, the spectral radius of the standard
/// symmetric set of a free group of rank `n`.
pub fn kesten_interval(n_pairs: u32, precision: u32) -> Interval {
    let n = n_pairs as i64;
    Interval::from_integer(2 * n - 1)
        .sqrt(precision + 8)
        .div(&Interval::from_integer(n), precision + 8)
        .round(precision)
}

/// Exact spectral radius of the standard set of `F_n`.
pub fn kesten_exact_free(n_pairs: u32) -> Result<EstimateReport> {
    if n_pairs == 0 {
        return Err(Error::InvalidArgument(
            "free group rank must be positive".into(),
        ));
    }
    let n = n_pairs as f64;
    Ok(EstimateReport {
        value: (2.0 * n - 1.0).sqrt() / n,
        direction: Direction::Exact,
        method: Method::ClosedForm,
        params: EstimateParams {
            n: Some(n_pairs),
            ..Default::default()
        },
        enclosure: Some(kesten_interval(n_pairs, interval::DEFAULT_PRECISION)),
    })
}

/// The exact spectral radius when a closed form is known: the standard set
/// of a free group, or any symmetric generating set of `Z^d` (value 1, the
/// group being amenable).
pub fn closed_form_radius(set: &GenSet) -> Option<EstimateReport> {
    match set.presentation() {
        GroupPresentation::Free { rank } if set.is_standard() => kesten_exact_free(*rank).ok(),
        GroupPresentation::FreeAbelian { .. } if set.is_standard() => Some(EstimateReport {
            value: 1.0,
            direction: Direction::Exact,
            method: Method::ClosedForm,
            params: EstimateParams::default(),
            enclosure: Some(Interval::from_integer(1)),
        }),
        _ => None,
    }
}

/// `(|S|^-1/2, 2 sqrt(|S| - 1) / |S|)`: the lower bound from comparison with
/// a regular tree, and the spectral radius of the `|S|`-regular tree itself.
pub fn tree_comparison_bound(set_size: u64) -> (f64, f64) {
    assert!(set_size >= 1, "set size must be positive");
    let s = set_size as f64;
    (1.0 / s.sqrt(), 2.0 * (s - 1.0).sqrt() / s)
}

/// Lower bound for `||m(S)||` from power iteration of the Markov operator
/// compressed to the ball of radius `radius`, started at `delta_e`.
///
/// The tracked quantity is `||P m v|| / ||v||`, which never exceeds the
/// operator norm; the largest value seen is reported.
pub fn ball_power_iteration(
    set: &GenSet,
    radius: u32,
    iters: u32,
    tol: f64,
    guard: usize,
) -> Result<EstimateReport> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let p = set.presentation();
    let (best, used) = match p {
        GroupPresentation::Free { rank } if set.is_standard() => {
            radial_power_iteration(*rank, radius, iters, tol)
        }
        _ => dense_power_iteration(set, radius, iters, tol, guard)?,
    };
    Ok(EstimateReport {
        // absorb floating-point rounding in the norms
        value: (best * (1.0 - 1e-12)).max(0.0),
        direction: Direction::Lower,
        method: Method::BallPowerIteration,
        params: EstimateParams {
            radius: Some(radius),
            iterations: Some(used),
            precision_bits: Some(53),
            ..Default::default()
        },
        enclosure: None,
    })
}

fn iterate(dim: usize, iters: u32, tol: f64, apply: impl Fn(&[f64], &mut [f64])) -> (f64, u32) {
    let mut v = vec![0.0; dim];
    v[0] = 1.0;
    let mut w = vec![0.0; dim];
    let mut best: f64 = 0.0;
    let mut previous = f64::NAN;
    let mut used = 0;
    for it in 0..iters {
        used = it + 1;
        apply(&v, &mut w);
        let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let wn = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let quotient = wn / vn;
        best = best.max(quotient);
        if wn == 0.0 || (quotient - previous).abs() < tol {
            break;
        }
        previous = quotient;
        for (a, b) in v.iter_mut().zip(&w) {
            *a = b / wn;
        }
    }
    (best, used)
}

// Radial vectors rescaled by sqrt(N(l)) so the truncated operator is a
// symmetric tridiagonal matrix.
fn radial_power_iteration(rank: u32, radius: u32, iters: u32, tol: f64) -> (f64, u32) {
    let q = 2.0 * rank as f64;
    let inner = (q - 1.0).sqrt() / q;
    let root = 1.0 / q.sqrt();
    let dim = radius as usize + 1;
    let weight = |l: usize| if l == 0 { root } else { inner };
    iterate(dim, iters, tol, |v, w| {
        for l in 0..dim {
            let mut s = 0.0;
            if l > 0 {
                s += weight(l - 1) * v[l - 1];
            }
            if l + 1 < dim {
                s += weight(l) * v[l + 1];
            }
            w[l] = s;
        }
    })
}

fn dense_power_iteration(
    set: &GenSet,
    radius: u32,
    iters: u32,
    tol: f64,
    guard: usize,
) -> Result<(f64, u32)> {
    let p = set.presentation();
    let ball = p.ball(radius, guard)?;
    let index: FxHashMap<&Word, usize> = ball.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let weight = 1.0 / set.len() as f64;
    // (m v)(g) = |S|^-1 sum_s v(s g) for symmetric S
    let neighbours: Vec<Vec<usize>> = ball
        .iter()
        .map(|g| {
            set.words()
                .iter()
                .filter_map(|s| index.get(&p.multiply(s, g)).copied())
                .collect()
        })
        .collect();
    Ok(iterate(ball.len(), iters, tol, |v, w| {
        for (i, nb) in neighbours.iter().enumerate() {
            w[i] = weight * nb.iter().map(|&j| v[j]).sum::<f64>();
        }
    }))
}

/// Outcome of a Monte Carlo return-probability run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub steps: u32,
    pub trials: u64,
    pub returns: u64,
    pub frequency: f64,
    pub stderr: f64,
    pub seed: u64,
    pub generator: &'static str,
}

/// Fraction of `trials` random words of length `steps` (letters uniform in
/// `S`) that reduce to the identity. Trial `t` draws from stream `t` of a
/// ChaCha8 generator keyed by `seed`, so the result does not depend on
/// scheduling.
pub fn monte_carlo_return(
    set: &GenSet,
    steps: u32,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloReport> {
    if !steps.is_multiple_of(2) {
        return Err(Error::InvalidArgument("steps must be even".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let p = set.presentation();
    let words = set.words();
    let returns = (0..trials)
        .into_par_iter()
        .filter(|&t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t);
            let mut w = Word::identity();
            for _ in 0..steps {
                let s = &words[rng.random_range(0..words.len())];
                w = p.multiply(&w, s);
            }
            w.is_empty()
        })
        .count() as u64;
    let f = returns as f64 / trials as f64;
    Ok(MonteCarloReport {
        steps,
        trials,
        returns,
        frequency: f,
        stderr: (f * (1.0 - f) / trials as f64).sqrt(),
        seed,
        generator: RNG_NAME,
    })
}

/// Exact `tau(m(S)^steps)` by enumerating all `|S|^steps` words; only for
/// cross-checks on small cases.
pub fn enumerate_return_probability(set: &GenSet, steps: u32) -> BigRational {
    let p = set.presentation();
    let words = set.words();
    let mut frontier = vec![Word::identity()];
    for _ in 0..steps {
        frontier = frontier
            .iter()
            .flat_map(|w| words.iter().map(move |s| p.multiply(w, s)))
            .collect();
    }
    let hits = frontier.iter().filter(|w| w.is_empty()).count();
    BigRational::new(
        BigInt::from(hits),
        num_traits::pow(BigInt::from(words.len()), steps as usize),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::radial_markov_power;
    use crate::ring::{markov, DEFAULT_SUPPORT_GUARD};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn free_moments_dense_and_radial() {
        let f2 = GroupPresentation::free(2);
        let m = markov(&f2.standard_set()).unwrap();
        let dense = trace_moments_dense(&m, 3, DEFAULT_SUPPORT_GUARD).unwrap();
        let radial = trace_moments_radial(&radial_markov_power(2, 1), 3).unwrap();
        let expected = vec![q(1, 4), q(7, 64), q(29, 512)];
        assert_eq!(dense.values, expected);
        assert_eq!(radial.values, expected);
        assert!(dense.is_log_convex());
    }

    #[test]
    fn lower_bound_examples() {
        let radial = trace_moments_radial(&radial_markov_power(2, 1), 3).unwrap();
        let lb = radius_lower_bounds(&radial, 128).unwrap();
        assert!((lb.root[1].value - 0.5750).abs() < 1e-4);
        assert!((lb.ratio[1].value - (29.0f64 / 56.0).sqrt()).abs() < 1e-12);
        assert!((lb.best.value - 0.7196).abs() < 1e-4);
        assert!(lb.root.iter().chain(&lb.ratio).all(|r| r.value <= 1.0));
        let one = MomentSequence {
            description: String::new(),
            values: vec![q(1, 4)],
            exact: true,
        };
        assert!(matches!(
            radius_lower_bounds(&one, 128),
            Err(Error::TooFewMoments { .. })
        ));
    }

    #[test]
    fn kesten_values() {
        assert_eq!(kesten_exact_free(1).unwrap().value, 1.0);
        assert!((kesten_exact_free(2).unwrap().value - 0.8660254).abs() < 1e-7);
        assert!((kesten_exact_free(5).unwrap().value - 0.6).abs() < 1e-15);
        let iv = kesten_interval(2, 128);
        assert!(iv.lo_f64() <= 3f64.sqrt() / 2.0 && 3f64.sqrt() / 2.0 <= iv.hi_f64());
    }

    #[test]
    fn tree_bounds() {
        let (paper, refined) = tree_comparison_bound(4);
        assert_eq!(paper, 0.5);
        assert!((refined - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(tree_comparison_bound(1).0, 1.0);
        for s in 2..100 {
            let (p, r) = tree_comparison_bound(s);
            assert!(r >= p);
        }
    }

    #[test]
    fn ball_iteration_radius_zero_and_free() {
        let f2 = GroupPresentation::free(2);
        let r0 = ball_power_iteration(&f2.standard_set(), 0, 100, 1e-12, 1000).unwrap();
        assert_eq!(r0.value, 0.0);
        let r40 = ball_power_iteration(&f2.standard_set(), 40, 20_000, 1e-15, 1000).unwrap();
        let exact = 3f64.sqrt() / 2.0;
        assert!(
            r40.value < exact && r40.value > 0.99 * exact,
            "{}",
            r40.value
        );
        // the radial reduction agrees with explicit ball enumeration
        let set = GenSet::parse(&f2, "a,A,b,B,ab,BA").unwrap();
        assert!(ball_power_iteration(&set, 3, 10, 0.0, 1000).is_ok());
        let radial = radial_power_iteration(2, 6, 500, 0.0).0;
        let dense = dense_power_iteration(&f2.standard_set(), 6, 500, 0.0, 100_000)
            .unwrap()
            .0;
        assert!((radial - dense).abs() < 1e-9, "{radial} vs {dense}");
    }

    #[test]
    fn monte_carlo_validation() {
        let f2 = GroupPresentation::free(2);
        let s = f2.standard_set();
        assert!(monte_carlo_return(&s, 3, 10, 1).is_err());
        let one = monte_carlo_return(&s, 2, 1, 7).unwrap();
        assert!(one.frequency == 0.0 || one.frequency == 1.0);
        let a = monte_carlo_return(&s, 4, 1000, 3).unwrap();
        let b = monte_carlo_return(&s, 4, 1000, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn enumeration_oracle() {
        let f2 = GroupPresentation::free(2).standard_set();
        assert_eq!(enumerate_return_probability(&f2, 2), q(1, 4));
        assert_eq!(enumerate_return_probability(&f2, 4), q(7, 64));
    }
}
