//! Serde helpers writing integers as exact JSON numbers and rationals as
//! numbers when integral, `"p/q"` strings otherwise.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

pub(crate) fn number(x: &BigInt) -> serde_json::Number {
    serde_json::Number::from_str(&x.to_string()).expect("integer literal")
}

pub(crate) fn rational_value(x: &BigRational) -> serde_json::Value {
    if x.is_integer() {
        serde_json::Value::Number(number(x.numer()))
    } else {
        serde_json::Value::String(x.to_string())
    }
}

pub(crate) fn int<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    number(x).serialize(s)
}

pub(crate) fn opt_int<S: Serializer>(x: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
    x.as_ref().map(number).serialize(s)
}

pub(crate) fn int_seq<S: Serializer>(xs: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        seq.serialize_element(&number(x))?;
    }
    seq.end()
}

pub(crate) fn rational<S: Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    rational_value(x).serialize(s)
}

pub(crate) fn rational_seq<S: Serializer>(xs: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(rational_value))
}
