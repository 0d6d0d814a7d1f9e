//! Outward-rounded interval arithmetic over exact rationals.
//!
//! Endpoints are rationals; after every operation they are rounded outward to
//! dyadic numbers with `prec` significant bits, so an enclosure never loses
//! the true value while endpoint sizes stay bounded. `ln`, `exp` and roots are
//! evaluated by series or integer roots with explicit remainder bounds.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

/// Default working precision in bits.
pub const DEFAULT_PRECISION: u32 = 128;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    lo: BigRational,
    hi: BigRational,
}

fn bits(n: &BigInt) -> i64 {
    n.bits() as i64
}

fn pow2(e: u64) -> BigInt {
    BigInt::one() << e
}

/// Largest dyadic with `prec` significant bits that is `<= x`.
pub fn round_down(x: &BigRational, prec: u32) -> BigRational {
    if x.is_zero() {
        return x.clone();
    }
    let (n, d) = (x.numer(), x.denom());
    // shift so that floor(x * 2^s) has about prec bits
    let s = prec as i64 - (bits(n) - bits(d));
    if s >= 0 {
        let m = (n << s as u64).div_floor(d);
        BigRational::new(m, pow2(s as u64))
    } else {
        let m = n.div_floor(&(d << (-s) as u64));
        BigRational::from_integer(m << (-s) as u64)
    }
}

/// Smallest dyadic with `prec` significant bits that is `>= x`.
pub fn round_up(x: &BigRational, prec: u32) -> BigRational {
    -round_down(&-x, prec)
}

/// `floor(x^(1/m))` to `prec` bits: a certified lower bound of the m-th root.
pub fn nth_root_down(x: &BigRational, m: u32, prec: u32) -> BigRational {
    assert!(!x.is_negative(), "root of a negative number");
    assert!(m >= 1);
    if x.is_zero() {
        return x.clone();
    }
    let (n, d) = (x.numer(), x.denom());
    let e = (bits(n) - bits(d)).div_euclid(m as i64);
    let s = prec as i64 + 1 - e;
    let scaled = if s >= 0 {
        (n << (s as u64 * m as u64)).div_floor(d)
    } else {
        n.div_floor(&(d << ((-s) as u64 * m as u64)))
    };
    let r = scaled.to_biguint().unwrap().nth_root(m);
    shift_rational(BigInt::from(r), s)
}

/// A certified upper bound of the m-th root, `prec` bits.
pub fn nth_root_up(x: &BigRational, m: u32, prec: u32) -> BigRational {
    if x.is_zero() {
        return x.clone();
    }
    let down = nth_root_down(x, m, prec);
    // down = r / 2^s with r = floor(root * 2^s); (r + 1) / 2^s is above
    let (n, d) = (x.numer(), x.denom());
    let e = (bits(n) - bits(d)).div_euclid(m as i64);
    let s = prec as i64 + 1 - e;
    let ulp = shift_rational(BigInt::one(), s);
    down + ulp
}

fn shift_rational(m: BigInt, s: i64) -> BigRational {
    if s >= 0 {
        BigRational::new(m, pow2(s as u64))
    } else {
        BigRational::from_integer(m << (-s) as u64)
    }
}

/// Nearest-or-below f64.
pub fn to_f64_down(x: &BigRational) -> f64 {
    let f = x.to_f64().unwrap_or(if x.is_negative() {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    });
    match BigRational::from_float(f) {
        Some(q) if q > *x => f.next_down(),
        Some(_) => f,
        None if f == f64::INFINITY => f64::MAX,
        None => f,
    }
}

/// Nearest-or-above f64.
pub fn to_f64_up(x: &BigRational) -> f64 {
    -to_f64_down(&-x)
}

impl Interval {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        assert!(lo <= hi, "empty interval");
        Interval { lo, hi }
    }

    pub fn point(q: BigRational) -> Self {
        Interval {
            lo: q.clone(),
            hi: q,
        }
    }

    pub fn from_integer(n: i64) -> Self {
        Interval::point(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        Interval::point(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn lo_f64(&self) -> f64 {
        to_f64_down(&self.lo)
    }

    pub fn hi_f64(&self) -> f64 {
        to_f64_up(&self.hi)
    }

    pub fn mid_f64(&self) -> f64 {
        ((&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2)))
            .to_f64()
            .unwrap_or(f64::NAN)
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, q: &BigRational) -> bool {
        self.lo <= *q && *q <= self.hi
    }

    /// Every point of `self` is below every point of `other`.
    pub fn certainly_lt(&self, other: &Interval) -> bool {
        self.hi < other.lo
    }

    pub fn certainly_le(&self, other: &Interval) -> bool {
        self.hi <= other.lo
    }

    pub fn round(&self, prec: u32) -> Interval {
        Interval {
            lo: round_down(&self.lo, prec),
            hi: round_up(&self.hi, prec),
        }
    }

    pub fn neg(&self) -> Interval {
        Interval {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }

    pub fn add(&self, other: &Interval, prec: u32) -> Interval {
        Interval {
            lo: round_down(&(&self.lo + &other.lo), prec),
            hi: round_up(&(&self.hi + &other.hi), prec),
        }
    }

    pub fn sub(&self, other: &Interval, prec: u32) -> Interval {
        self.add(&other.neg(), prec)
    }

    pub fn mul(&self, other: &Interval, prec: u32) -> Interval {
        let products = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = products.iter().min().unwrap();
        let hi = products.iter().max().unwrap();
        Interval {
            lo: round_down(lo, prec),
            hi: round_up(hi, prec),
        }
    }

    /// Panics if `other` contains zero.
    pub fn div(&self, other: &Interval, prec: u32) -> Interval {
        assert!(
            other.lo.is_positive() || other.hi.is_negative(),
            "division by an interval containing zero"
        );
        let inv = Interval {
            lo: other.hi.recip(),
            hi: other.lo.recip(),
        };
        self.mul(&inv, prec)
    }

    pub fn powi(&self, k: u32, prec: u32) -> Interval {
        let mut result = Interval::from_integer(1);
        let mut base = self.clone();
        let mut k = k;
        // only valid for nonnegative intervals via repeated products
        assert!(
            !self.lo.is_negative(),
            "powi expects a nonnegative interval"
        );
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base, prec);
            }
            base = base.mul(&base, prec);
            k >>= 1;
        }
        result
    }

    pub fn sqrt(&self, prec: u32) -> Interval {
        self.nth_root(2, prec)
    }

    pub fn nth_root(&self, m: u32, prec: u32) -> Interval {
        assert!(!self.lo.is_negative(), "root of a negative interval");
        Interval {
            lo: nth_root_down(&self.lo, m, prec),
            hi: nth_root_up(&self.hi, m, prec),
        }
    }

    pub fn ln(&self, prec: u32) -> Interval {
        assert!(self.lo.is_positive(), "ln of a nonpositive interval");
        let lo = ln_rational(&self.lo, prec).lo;
        let hi = ln_rational(&self.hi, prec).hi;
        Interval { lo, hi }
    }

    pub fn exp(&self, prec: u32) -> Interval {
        let lo = exp_rational(&self.lo, prec).lo;
        let hi = exp_rational(&self.hi, prec).hi;
        Interval { lo, hi }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo_f64(), self.hi_f64())
    }
}

fn rational(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn ceil_div(n: &BigInt, d: &BigInt) -> BigInt {
    -((-n).div_floor(d))
}

fn fixed_to_interval(lo: BigInt, hi: BigInt, w: u32) -> Interval {
    Interval {
        lo: BigRational::new(lo, pow2(w as u64)),
        hi: BigRational::new(hi, pow2(w as u64)),
    }
}

/// Enclosure of `2 atanh(z)` for rational `0 <= z <= 1/3`, summed in fixed
/// point with `w` fractional bits, floors for the lower sum and ceilings for
/// the upper one.
fn two_atanh(z: &BigRational, prec: u32) -> Interval {
    if z.is_zero() {
        return Interval::from_integer(0);
    }
    let w = prec + 24;
    let (p, q) = (z.numer(), z.denom());
    let (p2, q2) = (p * p, q * q);
    let scaled = p << w as u64;
    let mut power_lo = scaled.div_floor(q);
    let mut power_hi = ceil_div(&scaled, q);
    let mut sum_lo = power_lo.clone();
    let mut sum_hi = power_hi.clone();
    let cutoff = pow2((w - prec) as u64);
    let mut k: u64 = 1;
    while power_hi >= cutoff {
        power_lo = (&power_lo * &p2).div_floor(&q2);
        power_hi = ceil_div(&(&power_hi * &p2), &q2);
        let odd = BigInt::from(2 * k + 1);
        sum_lo += power_lo.div_floor(&odd);
        sum_hi += ceil_div(&power_hi, &odd);
        k += 1;
    }
    // the remaining terms sum to less than the last power times z^2 * 9/8
    sum_hi += &power_hi;
    fixed_to_interval(sum_lo << 1u32, sum_hi << 1u32, w).round(prec)
}

/// Enclosure of `ln 2`.
pub fn ln2(prec: u32) -> Interval {
    two_atanh(&BigRational::new(BigInt::one(), BigInt::from(3)), prec + 8).round(prec)
}

/// Enclosure of `ln x` for rational `x > 0`.
pub fn ln_rational(x: &BigRational, prec: u32) -> Interval {
    assert!(x.is_positive());
    if x.is_one() {
        return Interval::from_integer(0);
    }
    let w = prec + 32;
    let (n, d) = (x.numer(), x.denom());
    let mut m = bits(n) - bits(d);
    let mut y = if m >= 0 {
        x / BigRational::from_integer(pow2(m as u64))
    } else {
        x * BigRational::from_integer(pow2((-m) as u64))
    };
    let two = rational(2);
    while y < BigRational::one() {
        y *= &two;
        m -= 1;
    }
    while y >= two {
        y /= &two;
        m += 1;
    }
    // y in [1, 2), z = (y-1)/(y+1) in [0, 1/3)
    let one = BigRational::one();
    let z = (&y - &one) / (&y + &one);
    let lny = two_atanh(&z, w);
    let scaled_ln2 = ln2(w).mul(&Interval::from_integer(m), w);
    lny.add(&scaled_ln2, w).round(prec)
}

/// Enclosure of `exp y` for rational `0 <= y <= 1/2` by a fixed-point
/// Taylor sum with `w` fractional bits.
fn exp_small(y: &BigRational, w: u32) -> Interval {
    let (p, q) = (y.numer(), y.denom());
    let one = pow2(w as u64);
    let mut term_lo = one.clone();
    let mut term_hi = one.clone();
    let mut sum_lo = one.clone();
    let mut sum_hi = one;
    let mut i: u64 = 1;
    while !term_hi.is_zero() {
        let d = q * BigInt::from(i);
        term_lo = (&term_lo * p).div_floor(&d);
        term_hi = ceil_div(&(&term_hi * p), &d);
        sum_lo += &term_lo;
        sum_hi += &term_hi;
        i += 1;
        if term_hi <= BigInt::one() {
            break;
        }
    }
    // the terms after the last one shrink by at least half each time
    sum_hi += &term_hi;
    fixed_to_interval(sum_lo, sum_hi, w)
}

/// Enclosure of `exp q` for rational `q`.
pub fn exp_rational(q: &BigRational, prec: u32) -> Interval {
    if q.is_zero() {
        return Interval::from_integer(1);
    }
    if q.is_negative() {
        let e = exp_rational(&-q, prec + 8);
        return Interval {
            lo: e.hi.recip(),
            hi: e.lo.recip(),
        }
        .round(prec);
    }
    // halve until y <= 1/2, then square back
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut s: u64 = 0;
    let mut y = q.clone();
    while y > half {
        y /= rational(2);
        s += 1;
    }
    let w = prec + 32 + s as u32;
    let mut r = exp_small(&y, w);
    for _ in 0..s {
        r = r.mul(&r, w);
    }
    r.round(prec)
}

/// Converts an unsigned big integer into a rational.
pub fn biguint_to_rational(n: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from_biguint(Sign::Plus, n.clone()))
}

/// Exact rational from an f64 (panics on non-finite input).
pub fn f64_to_rational(x: f64) -> BigRational {
    BigRational::from_f64(x).expect("finite float")
}
