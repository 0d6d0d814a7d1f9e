//! Serde helpers: exact numbers serialize as decimal strings so reports
//! survive re-parsing without loss.

use std::fmt::Display;

use num_bigint::BigUint;
use num_rational::BigRational;
use serde::Serializer;

/// `p/q`, always with an explicit denominator.
pub fn rational_string(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn rational<S: Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&rational_string(q))
}

pub fn biguint<S: Serializer>(n: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(n)
}

pub fn display<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}
