//! Extraction of sets with small spectral radius from powers of a Markov
//! operator: threshold selection on the decreasing rearrangement of the
//! coefficients, the one-step minorant it induces, and certificates for the
//! sets `S_k = supp(b_k)`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::group::{GenSet, GroupPresentation};
use crate::interval::{biguint_to_rational, f64_to_rational, ln_rational, Interval};
use crate::radial::{indicator_radial, radial_markov_power, RadialElement};
use crate::ring::{
    leq_coefficientwise, markov, power_exact, predicted_power_support, RingElement,
    DEFAULT_SUPPORT_GUARD,
};
use crate::ser;
use crate::spectral::{
    best_lower_bound, closed_form_radius, radius_lower_bounds, trace_moments_dense,
    trace_moments_radial, Direction, EstimateParams, EstimateReport, Method,
};

/// Working precisions tried in turn when an interval comparison is not yet
/// decided.
const PRECISION_LADDER: [u32; 6] = [128, 256, 512, 1024, 2048, 4096];

/// Decides `x >= y` where `y` is given by enclosures of increasing precision.
fn certify_ge(x: &BigRational, enclosure: impl Fn(u32) -> Interval) -> Option<bool> {
    for prec in PRECISION_LADDER {
        let iv = enclosure(prec);
        if iv.hi() <= x {
            return Some(true);
        }
        if iv.lo() > x {
            return Some(false);
        }
    }
    None
}

fn rational(n: u64) -> BigRational {
    BigRational::from_integer(n.into())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Level {
    #[serde(serialize_with = "ser::rational")]
    pub value: BigRational,
    #[serde(serialize_with = "ser::biguint")]
    pub multiplicity: BigUint,
}

/// A nonincreasing step function on `[0, 1]`: block `i` has height
/// `levels[i].value` and width `multiplicity / total_count`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelProfile {
    levels: Vec<Level>,
}

impl LevelProfile {
    /// Levels must be strictly decreasing, in `(0, 1]`, with positive
    /// multiplicities.
    pub fn new(levels: Vec<(BigRational, BigUint)>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidProfile("empty profile".into()));
        }
        for (value, multiplicity) in &levels {
            if !value.is_positive() {
                return Err(Error::InvalidProfile(format!(
                    "level value {} is not positive",
                    ser::rational_string(value)
                )));
            }
            if value > &BigRational::one() {
                return Err(Error::InvalidProfile(format!(
                    "level value {} exceeds 1",
                    ser::rational_string(value)
                )));
            }
            if multiplicity.is_zero() {
                return Err(Error::InvalidProfile("zero multiplicity".into()));
            }
        }
        if levels.windows(2).any(|w| w[0].0 <= w[1].0) {
            return Err(Error::InvalidProfile(
                "level values must be strictly decreasing".into(),
            ));
        }
        Ok(LevelProfile {
            levels: levels
                .into_iter()
                .map(|(value, multiplicity)| Level {
                    value,
                    multiplicity,
                })
                .collect(),
        })
    }

    /// Sorts `(value, count)` pairs and merges equal values. Zero values are
    /// dropped.
    pub fn from_unsorted(pairs: impl IntoIterator<Item = (BigRational, BigUint)>) -> Result<Self> {
        let mut map: BTreeMap<BigRational, BigUint> = BTreeMap::new();
        for (v, c) in pairs {
            if !v.is_zero() {
                *map.entry(v).or_default() += c;
            }
        }
        LevelProfile::new(map.into_iter().rev().collect())
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn total_mass(&self) -> BigRational {
        self.levels
            .iter()
            .map(|l| &l.value * biguint_to_rational(&l.multiplicity))
            .fold(BigRational::zero(), |a, b| a + b)
    }

    pub fn total_count(&self) -> BigUint {
        self.levels.iter().map(|l| &l.multiplicity).sum()
    }

    /// `I`, the integral of the step function.
    pub fn integral(&self) -> BigRational {
        self.total_mass() / biguint_to_rational(&self.total_count())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GuaranteeStatus {
    Met,
    Violated,
    NotApplicable,
}

impl GuaranteeStatus {
    pub fn is_violated(self) -> bool {
        self == GuaranteeStatus::Violated
    }
}

/// The chosen block of a threshold selection and the lower bound it is
/// measured against.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub chosen_level_index: usize,
    #[serde(serialize_with = "ser::rational")]
    pub lambda: BigRational,
    #[serde(serialize_with = "ser::rational")]
    pub x0: BigRational,
    #[serde(serialize_with = "ser::rational")]
    pub objective: BigRational,
    #[serde(serialize_with = "ser::rational")]
    pub integral: BigRational,
    /// `1 / (-4 ln I)`, present when `I <= 1/3`.
    pub alpha: Option<f64>,
    /// `I / (-4 ln I)`, present when `I <= 1/3`.
    pub guarantee: Option<f64>,
    pub guarantee_met: GuaranteeStatus,
}

/// Enclosure of `I / (-4 ln I)` for `0 < I < 1`.
pub fn lemma2_bound(integral: &BigRational, prec: u32) -> Interval {
    let ln = ln_rational(integral, prec + 16);
    let denom = ln.neg().mul(&Interval::from_integer(4), prec + 16);
    Interval::point(integral.clone())
        .div(&denom, prec + 16)
        .round(prec)
}

/// Maximizes `x f(x)` over the profile. `f` is constant on each block, so
/// only right endpoints are candidates; ties go to the later block.
pub fn threshold_select(profile: &LevelProfile) -> ThresholdReport {
    let total = biguint_to_rational(&profile.total_count());
    let mut cumulative = BigUint::zero();
    let mut best: Option<(usize, BigRational, BigRational)> = None;
    for (i, level) in profile.levels.iter().enumerate() {
        cumulative += &level.multiplicity;
        let x = biguint_to_rational(&cumulative) / &total;
        let objective = &x * &level.value;
        if best.as_ref().is_none_or(|(_, _, b)| &objective >= b) {
            best = Some((i, x, objective));
        }
    }
    let (index, x0, objective) = best.expect("profile is nonempty");
    let integral = profile.integral();
    let (alpha, guarantee, guarantee_met) = if integral <= BigRational::new(1.into(), 3.into()) {
        let bound = lemma2_bound(&integral, 128);
        let ln = ln_rational(&integral, 128);
        let alpha = 1.0 / (-4.0 * ln.mid_f64());
        let met = match certify_ge(&objective, |p| lemma2_bound(&integral, p)) {
            Some(true) => GuaranteeStatus::Met,
            _ => GuaranteeStatus::Violated,
        };
        (Some(alpha), Some(bound.mid_f64()), met)
    } else {
        (None, None, GuaranteeStatus::NotApplicable)
    };
    ThresholdReport {
        chosen_level_index: index,
        lambda: profile.levels[index].value.clone(),
        x0,
        objective,
        integral,
        alpha,
        guarantee,
        guarantee_met,
    }
}

/// Profile of `f_n(x) = min(1, 1/(n x))` sampled at the right endpoints of a
/// uniform grid with `grid` cells.
pub fn discretized_profile(n: u64, grid: u64) -> Result<LevelProfile> {
    if n == 0 || grid == 0 {
        return Err(Error::InvalidArgument("n and grid must be positive".into()));
    }
    LevelProfile::from_unsorted((1..=grid).map(|j| {
        let v = BigRational::new(grid.into(), (n * j).into()).min(BigRational::one());
        (v, BigUint::one())
    }))
}

/// Either engine's representation of a group-ring element.
#[derive(Clone, Debug, PartialEq)]
pub enum Element {
    Dense(RingElement),
    Radial(RadialElement),
}

impl Element {
    pub fn l1_norm(&self) -> BigRational {
        match self {
            Element::Dense(a) => a.l1_norm(),
            Element::Radial(a) => a.l1_norm(),
        }
    }

    pub fn size(&self) -> BigUint {
        match self {
            Element::Dense(a) => BigUint::from(a.size()),
            Element::Radial(a) => a.size(),
        }
    }
}

fn too_small(size: &BigUint) -> Error {
    Error::SizeTooSmall {
        size: size.to_u128().unwrap_or(u128::MAX),
    }
}

/// The one-step minorant `b = lambda ||a||_1 1_{a >= lambda ||a||_1}` of a
/// nonnegative hermitean element with at least 3 nonzero coefficients.
pub fn one_step_minorant_dense(a: &RingElement) -> Result<(RingElement, ThresholdReport)> {
    if a.size() < 3 {
        return Err(too_small(&BigUint::from(a.size())));
    }
    if let Some((w, _)) = a.terms_sorted().into_iter().find(|(_, c)| c.is_negative()) {
        return Err(Error::NegativeCoefficient {
            word: w.to_string(),
        });
    }
    if let Some(w) = a.first_non_hermitean() {
        return Err(Error::NotHermitean {
            word: w.to_string(),
        });
    }
    let norm = a.l1_norm();
    let mut counts: BTreeMap<&BigRational, u64> = BTreeMap::new();
    for (_, c) in a.coefficients() {
        *counts.entry(c).or_default() += 1;
    }
    let profile = LevelProfile::from_unsorted(
        counts
            .into_iter()
            .map(|(v, c)| (v / &norm, BigUint::from(c))),
    )?;
    let report = threshold_select(&profile);
    let threshold = &report.lambda * &norm;
    let b = a
        .coefficients()
        .filter(|(_, c)| **c >= threshold)
        .map(|(w, _)| (w.clone(), threshold.clone()))
        .collect();
    Ok((RingElement::from_map_unchecked(a.presentation(), b), report))
}

/// Radial version: sphere `l` contributes `N(l)` copies of its coefficient.
pub fn one_step_minorant_radial(a: &RadialElement) -> Result<(RadialElement, ThresholdReport)> {
    let size = a.size();
    if size < BigUint::from(3u32) {
        return Err(too_small(&size));
    }
    if let Some(l) = a
        .support_distances()
        .into_iter()
        .find(|&l| a.coefficient(l).is_negative())
    {
        return Err(Error::NegativeCoefficient {
            word: format!("sphere {l}"),
        });
    }
    let norm = a.l1_norm();
    let spheres = a.sphere_profile();
    let profile = LevelProfile::from_unsorted(
        a.support_distances()
            .into_iter()
            .map(|l| (a.coefficient(l) / &norm, spheres.size(l).clone())),
    )?;
    let report = threshold_select(&profile);
    let threshold = &report.lambda * &norm;
    let coeffs = a
        .coefficients()
        .iter()
        .map(|c| {
            if c.is_positive() && *c >= threshold {
                threshold.clone()
            } else {
                BigRational::zero()
            }
        })
        .collect();
    Ok((RadialElement::new(a.rank(), coeffs), report))
}

pub fn one_step_minorant(a: &Element) -> Result<(Element, ThresholdReport)> {
    match a {
        Element::Dense(a) => one_step_minorant_dense(a).map(|(b, r)| (Element::Dense(b), r)),
        Element::Radial(a) => one_step_minorant_radial(a).map(|(b, r)| (Element::Radial(b), r)),
    }
}

/// `||b||_1 >= ||a||_1 / (4 ln size)`, decided in interval arithmetic.
pub fn corollary3_holds(b_l1: &BigRational, a_l1: &BigRational, size: &BigUint) -> bool {
    if size < &BigUint::from(2u32) {
        return false;
    }
    let size = biguint_to_rational(size);
    certify_ge(b_l1, |p| {
        let denom = ln_rational(&size, p + 16).mul(&Interval::from_integer(4), p + 16);
        Interval::point(a_l1.clone()).div(&denom, p + 16).round(p)
    })
    .unwrap_or(false)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Dense,
    Radial,
    #[default]
    Auto,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Dense => "dense",
            Engine::Radial => "radial",
            Engine::Auto => "auto",
        })
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Engine::Dense),
            "radial" => Ok(Engine::Radial),
            "auto" => Ok(Engine::Auto),
            _ => Err(Error::InvalidArgument(format!(
                "unknown engine '{s}' (expected dense, radial or auto)"
            ))),
        }
    }
}

impl Engine {
    /// The radial engine handles exactly the standard set of a free group.
    pub fn resolve(self, sigma: &GenSet) -> Result<Engine> {
        let radial_ok = sigma.presentation().is_free() && sigma.is_standard();
        match self {
            Engine::Auto if radial_ok => Ok(Engine::Radial),
            Engine::Auto => Ok(Engine::Dense),
            Engine::Radial if !radial_ok => Err(Error::RadialUnsupported),
            e => Ok(e),
        }
    }
}

fn serialize_words<S: Serializer>(set: &GenSet, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(set.words().iter().map(|w| w.to_string()))
}

/// An extracted set: explicit words, or a union of spheres of a free group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SkSet {
    Words {
        #[serde(serialize_with = "serialize_words")]
        words: GenSet,
    },
    Spheres {
        rank: u32,
        distances: Vec<usize>,
    },
}

impl SkSet {
    pub fn size(&self) -> BigUint {
        match self {
            SkSet::Words { words } => BigUint::from(words.len()),
            SkSet::Spheres { rank, distances } => indicator_radial(*rank, distances).size(),
        }
    }

    /// `S ∪ sigma`.
    pub fn union_with(&self, sigma: &GenSet) -> Result<SkSet> {
        match self {
            SkSet::Words { words } => Ok(SkSet::Words {
                words: words.union(sigma)?,
            }),
            SkSet::Spheres { rank, distances } => {
                if !(sigma.presentation().is_free() && sigma.is_standard()) {
                    return Err(Error::RadialUnsupported);
                }
                let mut d = distances.clone();
                if !d.contains(&1) {
                    d.push(1);
                    d.sort_unstable();
                }
                Ok(SkSet::Spheres {
                    rank: *rank,
                    distances: d,
                })
            }
        }
    }
}

impl fmt::Display for SkSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkSet::Words { words } => write!(f, "{words}"),
            SkSet::Spheres { rank, distances } => {
                let d: Vec<String> = distances.iter().map(|l| l.to_string()).collect();
                write!(f, "spheres {{{}}} of free:{rank}", d.join(","))
            }
        }
    }
}

/// Parameters of the estimators used inside a certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkOptions {
    pub engine: Engine,
    /// Trace moments used for the lower estimate of `rho(S_k)`.
    pub moments: u32,
    /// Trace moments used for `rho(sigma)` when no closed form exists.
    pub sigma_moments: u32,
    pub precision: u32,
    pub guard: usize,
}

impl Default for SkOptions {
    fn default() -> Self {
        SkOptions {
            engine: Engine::Auto,
            moments: 4,
            sigma_moments: 8,
            precision: 128,
            guard: DEFAULT_SUPPORT_GUARD,
        }
    }
}

/// Every quantity and checked inequality for one extracted set `S_k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkCertificate {
    pub k: u32,
    pub engine: Engine,
    #[serde(serialize_with = "ser::display")]
    pub sigma: GenSet,
    pub s_k: SkSet,
    #[serde(serialize_with = "ser::biguint")]
    pub s_k_size: BigUint,
    /// The single nonzero coefficient of `b_k`.
    #[serde(serialize_with = "ser::rational")]
    pub b_value: BigRational,
    #[serde(serialize_with = "ser::rational")]
    pub b_l1: BigRational,
    /// `||m(sigma)^k||_1`.
    #[serde(serialize_with = "ser::rational")]
    pub a_l1: BigRational,
    #[serde(serialize_with = "ser::biguint")]
    pub size_mk: BigUint,
    pub threshold: ThresholdReport,
    pub corollary3_ok: bool,
    /// `S_k` is symmetric and inside `sigma^k`.
    pub support_ok: bool,
    pub rho_sigma: EstimateReport,
    /// False when `rho(sigma)` is only known from below, so the right-hand
    /// side is not a proven bound.
    pub rhs_certified: bool,
    /// Upper end of the enclosure of `4k ln|sigma| rho(sigma)^k`.
    pub theorem1_rhs: f64,
    pub theorem1_rhs_enclosure: [f64; 2],
    pub rho_sk_lower: EstimateReport,
    pub rho_sk_upper: Option<EstimateReport>,
    pub consistency_ok: bool,
    #[serde(skip)]
    pub rhs_interval: Interval,
}

impl SkCertificate {
    pub fn all_ok(&self) -> bool {
        self.corollary3_ok
            && self.support_ok
            && self.consistency_ok
            && !self.threshold.guarantee_met.is_violated()
    }
}

/// Enclosure of `4k ln(sigma_size) rho^k`.
pub fn theorem1_rhs(k: u32, sigma_size: usize, rho: &Interval, prec: u32) -> Interval {
    let w = prec + 16;
    Interval::from_integer(4 * k as i64)
        .mul(&ln_rational(&rational(sigma_size as u64), w), w)
        .mul(&rho.powi(k, w), w)
        .round(prec)
}

/// `rho(sigma)`: the closed form when one exists, otherwise the best moment
/// lower bound.
pub fn sigma_radius(sigma: &GenSet, opts: &SkOptions) -> Result<EstimateReport> {
    if let Some(r) = closed_form_radius(sigma) {
        return Ok(r);
    }
    let m = markov(sigma)?;
    let moments = trace_moments_dense(&m, opts.sigma_moments.max(2), opts.guard)?;
    Ok(radius_lower_bounds(&moments, opts.precision)?.best)
}

/// An interval for `rho(sigma)` and whether it bounds the true value from
/// above.
fn rho_upper_interval(rho: &EstimateReport) -> (Interval, bool) {
    match rho.upper_interval() {
        Ok(iv) => (iv, true),
        Err(_) => (Interval::point(f64_to_rational(rho.value)), false),
    }
}

fn same_parity_lengths(p: &GroupPresentation) -> bool {
    matches!(
        p,
        GroupPresentation::Free { .. } | GroupPresentation::FreeAbelian { .. }
    )
}

/// Builds the certificate for `S_k = supp(b_k)` with `b_k` the one-step
/// minorant of `m(sigma)^k`.
pub fn generate_sk(sigma: &GenSet, k: u32, opts: &SkOptions) -> Result<SkCertificate> {
    let rho_sigma = sigma_radius(sigma, opts)?;
    generate_sk_with(sigma, k, &rho_sigma, opts)
}

/// Certificates for several `k`, computed in parallel and returned in the
/// order of `ks`.
pub fn generate_sk_many(
    sigma: &GenSet,
    ks: &[u32],
    opts: &SkOptions,
) -> Result<Vec<SkCertificate>> {
    let rho_sigma = sigma_radius(sigma, opts)?;
    ks.par_iter()
        .map(|&k| generate_sk_with(sigma, k, &rho_sigma, opts))
        .collect()
}

fn generate_sk_with(
    sigma: &GenSet,
    k: u32,
    rho_sigma: &EstimateReport,
    opts: &SkOptions,
) -> Result<SkCertificate> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if sigma.len() < 3 {
        return Err(too_small(&BigUint::from(sigma.len())));
    }
    let engine = opts.engine.resolve(sigma)?;
    let p = sigma.presentation();
    let moments_n = opts.moments.max(2);
    let ku = k as usize;

    let (s_k, b_value, b_l1, a_l1, size_mk, threshold, support_ok, moments) = match engine {
        Engine::Radial => {
            let rank = p.rank();
            let a = radial_markov_power(rank, k);
            let (b, report) = one_step_minorant_radial(&a)?;
            let distances = b.support_distances();
            let support_ok = distances
                .iter()
                .all(|&l| l <= ku && l % 2 == ku % 2 && a.coefficient(l).is_positive());
            let size = b.size();
            let m_sk = indicator_radial(rank, &distances)
                .scale(&(BigRational::one() / biguint_to_rational(&size)));
            let moments = trace_moments_radial(&m_sk, moments_n)?;
            (
                SkSet::Spheres { rank, distances },
                report.lambda.clone() * a.l1_norm(),
                b.l1_norm(),
                a.l1_norm(),
                a.size(),
                report,
                support_ok,
                moments,
            )
        }
        _ => {
            let m = markov(sigma)?;
            let a = power_exact(&m, k, opts.guard)?;
            let (b, report) = one_step_minorant_dense(&a)?;
            let set = GenSet::new_symmetric(p, b.support());
            let max_len = sigma.words().iter().map(|w| w.len()).max().unwrap_or(0);
            let parity = sigma.words().first().map_or(0, |w| w.len() % 2);
            let uniform_parity = sigma.words().iter().all(|w| w.len() % 2 == parity);
            let check_parity = same_parity_lengths(p) && uniform_parity;
            let support_ok = set.is_ok()
                && leq_coefficientwise(&b, &a)?
                && b.support().iter().all(|w| {
                    w.len() <= ku * max_len && (!check_parity || w.len() % 2 == (ku * parity) % 2)
                });
            let set = set?;
            let m_sk = markov(&set)?;
            // as many moments as the support guard allows; one moment still
            // gives the root bound |S_k|^(-1/2)
            let n = (1..=moments_n)
                .take_while(|&n| predicted_power_support(&m_sk, n) <= opts.guard as u128)
                .last()
                .unwrap_or(1);
            let moments = trace_moments_dense(&m_sk, n, opts.guard)?;
            (
                SkSet::Words { words: set },
                report.lambda.clone() * a.l1_norm(),
                b.l1_norm(),
                a.l1_norm(),
                BigUint::from(a.size()),
                report,
                support_ok,
                moments,
            )
        }
    };

    let corollary3_ok = corollary3_holds(&b_l1, &a_l1, &size_mk);
    let (rho_iv, rhs_certified) = rho_upper_interval(rho_sigma);
    let rhs = theorem1_rhs(k, sigma.len(), &rho_iv, opts.precision);
    let rho_sk_lower = best_lower_bound(&moments, opts.precision)?;
    let consistency_ok = &f64_to_rational(rho_sk_lower.value) <= rhs.hi();
    let rho_sk_upper = rhs_certified.then(|| EstimateReport {
        value: rhs.hi_f64(),
        direction: Direction::Upper,
        method: Method::Theorem1Bound,
        params: EstimateParams {
            n: Some(k),
            precision_bits: Some(opts.precision),
            ..Default::default()
        },
        enclosure: Some(rhs.clone()),
    });
    Ok(SkCertificate {
        k,
        engine,
        sigma: sigma.clone(),
        s_k_size: s_k.size(),
        s_k,
        b_value,
        b_l1,
        a_l1,
        size_mk,
        threshold,
        corollary3_ok,
        support_ok,
        rho_sigma: rho_sigma.clone(),
        rhs_certified,
        theorem1_rhs: rhs.hi_f64(),
        theorem1_rhs_enclosure: [rhs.lo_f64(), rhs.hi_f64()],
        rho_sk_lower,
        rho_sk_upper,
        consistency_ok,
        rhs_interval: rhs,
    })
}

/// `S' = S_k ∪ sigma` and the bound on `rho(S')` from the triangle
/// inequality.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AugmentReport {
    pub k: u32,
    pub s_prime: SkSet,
    #[serde(serialize_with = "ser::biguint")]
    pub s_prime_size: BigUint,
    pub sigma_contained: bool,
    /// Both radius inputs are proven upper bounds.
    pub certified: bool,
    /// `(|S_k|/|S'|) rho(S_k) + (|sigma \ S_k|/|S'|) rho(sigma)`.
    pub bound: f64,
    /// `rho(S_k) + |sigma| rho(sigma) rho(S_k)^2`.
    pub simplified_bound: f64,
}

pub fn augment_with_sigma(cert: &SkCertificate) -> Result<AugmentReport> {
    let prec = 128;
    let s_prime = cert.s_k.union_with(&cert.sigma)?;
    let s_prime_size = s_prime.size();
    let outside = &s_prime_size - &cert.s_k_size;
    let (rho_sigma, sigma_certified) = rho_upper_interval(&cert.rho_sigma);
    let rhs = &cert.rhs_interval;
    let total = biguint_to_rational(&s_prime_size);
    let w_sk = Interval::point(biguint_to_rational(&cert.s_k_size) / &total);
    let w_out = Interval::point(biguint_to_rational(&outside) / &total);
    let bound = w_sk.mul(rhs, prec).add(&w_out.mul(&rho_sigma, prec), prec);
    let simplified = rhs.add(
        &Interval::from_integer(cert.sigma.len() as i64)
            .mul(&rho_sigma, prec)
            .mul(&rhs.mul(rhs, prec), prec),
        prec,
    );
    Ok(AugmentReport {
        k: cert.k,
        s_prime,
        s_prime_size,
        sigma_contained: outside.is_zero(),
        certified: sigma_certified && cert.rhs_certified,
        bound: bound.hi_f64(),
        simplified_bound: simplified.hi_f64(),
    })
}

/// One `k` of the exponent chain `4k ln|sigma| rho^k < |sigma|^(-eps k)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainRow {
    pub k: u32,
    /// Upper end of the enclosure of the left side.
    pub lhs: f64,
    /// Lower end of the enclosure of `|sigma|^(-eps k)`.
    pub rhs: f64,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_k_size: Option<String>,
    /// `|S_k|^(-eps)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_k_power: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_sk_lower: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsilonReport {
    pub epsilon: f64,
    pub epsilon_enclosure: [f64; 2],
    pub sigma_size: usize,
    pub rho_sigma: EstimateReport,
    pub precision: u32,
    pub rows: Vec<ChainRow>,
    pub smallest_k: Option<u32>,
}

/// Enclosure of `eps = -ln rho / (2 ln |sigma|)`, clamped at 0.
pub fn epsilon_interval(sigma_size: usize, rho: &Interval, prec: u32) -> Interval {
    if rho.hi() >= &BigRational::one() {
        return Interval::from_integer(0);
    }
    let w = prec + 16;
    let ln_sigma = ln_rational(&rational(sigma_size as u64), w);
    rho.ln(w)
        .neg()
        .div(&ln_sigma.mul(&Interval::from_integer(2), w), w)
        .round(prec)
}

fn chain_row(k: u32, sigma_size: usize, rho: &Interval, eps: &Interval, prec: u32) -> ChainRow {
    let w = prec + 16;
    let lhs = theorem1_rhs(k, sigma_size, rho, w);
    let ln_sigma = ln_rational(&rational(sigma_size as u64), w);
    let exponent = eps
        .mul(&Interval::from_integer(k as i64), w)
        .mul(&ln_sigma, w)
        .neg();
    let rhs = exponent.exp(w);
    ChainRow {
        k,
        lhs: lhs.hi_f64(),
        rhs: rhs.lo_f64(),
        holds: lhs.certainly_lt(&rhs),
        s_k_size: None,
        s_k_power: None,
        rho_sk_lower: None,
    }
}

fn require_upper(rho: &EstimateReport) -> Result<Interval> {
    rho.upper_interval()
        .map_err(|_| Error::OneSided(format!("rho(sigma) = {} ({})", rho.value, rho.method)))
}

/// The exponent chain for each `k` in `ks`.
pub fn epsilon_chain(
    sigma: &GenSet,
    rho_sigma: &EstimateReport,
    ks: &[u32],
    precision: u32,
) -> Result<EpsilonReport> {
    let rho = require_upper(rho_sigma)?;
    let eps = epsilon_interval(sigma.len(), &rho, precision);
    let rows: Vec<ChainRow> = ks
        .par_iter()
        .map(|&k| chain_row(k, sigma.len(), &rho, &eps, precision))
        .collect();
    let smallest_k = rows.iter().filter(|r| r.holds).map(|r| r.k).min();
    Ok(EpsilonReport {
        epsilon: eps.mid_f64(),
        epsilon_enclosure: [eps.lo_f64(), eps.hi_f64()],
        sigma_size: sigma.len(),
        rho_sigma: rho_sigma.clone(),
        precision,
        rows,
        smallest_k,
    })
}

/// The exponent chain evaluated for existing certificates, also reporting
/// `|S_k|^(-eps)` next to the lower estimate of `rho(S_k)`.
pub fn epsilon_certificate(
    sigma: &GenSet,
    rho_sigma: &EstimateReport,
    certs: &[SkCertificate],
    precision: u32,
) -> Result<EpsilonReport> {
    let ks: Vec<u32> = certs.iter().map(|c| c.k).collect();
    let mut report = epsilon_chain(sigma, rho_sigma, &ks, precision)?;
    for (row, cert) in report.rows.iter_mut().zip(certs) {
        let size = biguint_to_rational(&cert.s_k_size);
        let ln = ln_rational(&size, 64).mid_f64();
        row.s_k_size = Some(cert.s_k_size.to_string());
        row.s_k_power = Some((-report.epsilon * ln).exp());
        row.rho_sk_lower = Some(cert.rho_sk_lower.value);
    }
    Ok(report)
}

/// The extremal example `f_n(x) = min(1, 1/(n x))` in closed form.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SharpnessRow {
    pub n: u64,
    /// `I_n = (1 + ln n) / n`.
    pub integral: f64,
    /// `max_x x f_n(x) = 1/n`.
    pub objective: f64,
    /// `1 / (1 + ln n)`.
    pub ratio: f64,
    pub guarantee: Option<f64>,
    pub guarantee_met: GuaranteeStatus,
    #[serde(skip)]
    pub ratio_interval: Interval,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SharpnessReport {
    pub rows: Vec<SharpnessRow>,
    pub ratios_decreasing: bool,
}

fn integral_fn(n: u64, prec: u32) -> Interval {
    let w = prec + 16;
    ln_rational(&rational(n), w)
        .add(&Interval::from_integer(1), w)
        .div(&Interval::point(rational(n)), w)
        .round(prec)
}

pub fn sharpness_scan(n: u64) -> Result<SharpnessRow> {
    if n < 3 {
        return Err(Error::InvalidArgument("sharpness scan needs n >= 3".into()));
    }
    let third = BigRational::new(1.into(), 3.into());
    let objective = BigRational::new(1.into(), n.into());
    let mut applicable = None;
    for prec in PRECISION_LADDER {
        let i = integral_fn(n, prec);
        if i.hi() <= &third {
            applicable = Some(true);
            break;
        }
        if i.lo() > &third {
            applicable = Some(false);
            break;
        }
    }
    let prec = 128;
    let integral = integral_fn(n, prec);
    let ratio = Interval::from_integer(1).div(
        &ln_rational(&rational(n), prec + 16).add(&Interval::from_integer(1), prec + 16),
        prec,
    );
    let (guarantee, guarantee_met) = if applicable == Some(true) {
        let bound = |p: u32| {
            let i = integral_fn(n, p + 16);
            let denom = i.ln(p + 16).neg().mul(&Interval::from_integer(4), p + 16);
            i.div(&denom, p + 16).round(p)
        };
        let met = match certify_ge(&objective, bound) {
            Some(true) => GuaranteeStatus::Met,
            _ => GuaranteeStatus::Violated,
        };
        (Some(bound(prec).mid_f64()), met)
    } else {
        (None, GuaranteeStatus::NotApplicable)
    };
    Ok(SharpnessRow {
        n,
        integral: integral.mid_f64(),
        objective: 1.0 / n as f64,
        ratio: ratio.mid_f64(),
        guarantee,
        guarantee_met,
        ratio_interval: ratio,
    })
}

/// Rows for each `n`, with a certified check that the ratios strictly
/// decrease along the list.
pub fn sharpness_table(ns: &[u64]) -> Result<SharpnessReport> {
    let rows = ns
        .iter()
        .map(|&n| sharpness_scan(n))
        .collect::<Result<Vec<_>>>()?;
    let ratios_decreasing = rows
        .windows(2)
        .all(|w| w[1].ratio_interval.certainly_lt(&w[0].ratio_interval));
    Ok(SharpnessReport {
        rows,
        ratios_decreasing,
    })
}

/// `gamma <= 2 (|S| rho(S))^(1/2)` and its ratio to `|S|^(1/2)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaReport {
    #[serde(serialize_with = "ser::biguint")]
    pub set_size: BigUint,
    pub rho_upper: f64,
    pub value: f64,
    pub ratio: f64,
    #[serde(skip)]
    pub ratio_interval: Interval,
}

pub fn gamma_bound_for_size(set_size: &BigUint, rho_upper: &EstimateReport) -> Result<GammaReport> {
    let rho = rho_upper.upper_interval().map_err(|_| {
        Error::OneSided(format!("rho = {} ({})", rho_upper.value, rho_upper.method))
    })?;
    let prec = 128;
    let two = Interval::from_integer(2);
    let size = Interval::point(biguint_to_rational(set_size));
    let value = two.mul(&size.mul(&rho, prec).sqrt(prec), prec);
    let ratio = two.mul(&rho.sqrt(prec), prec);
    Ok(GammaReport {
        set_size: set_size.clone(),
        rho_upper: rho.hi_f64(),
        value: value.hi_f64(),
        ratio: ratio.hi_f64(),
        ratio_interval: ratio,
    })
}

pub fn gamma_upper_bound(set: &GenSet, rho_upper: &EstimateReport) -> Result<GammaReport> {
    gamma_bound_for_size(&BigUint::from(set.len()), rho_upper)
}

/// Uses the proven bound `rho(S_k) <= 4k ln|sigma| rho(sigma)^k`.
pub fn gamma_for_certificate(cert: &SkCertificate) -> Result<GammaReport> {
    match &cert.rho_sk_upper {
        Some(r) => gamma_bound_for_size(&cert.s_k_size, r),
        None => Err(Error::OneSided(format!("rho(S_k) for k = {}", cert.k))),
    }
}

/// Certified strict decrease of the ratios along the list.
pub fn gamma_ratios_decreasing(reports: &[GammaReport]) -> bool {
    reports
        .windows(2)
        .all(|w| w[1].ratio_interval.certainly_lt(&w[0].ratio_interval))
}
