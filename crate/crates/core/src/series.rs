//! Truncated real Puiseux series in one positive infinitesimal `t` over the rationals.
//!
//! A [`Series`] stores finitely many terms `c·t^e` with rational exponents and a
//! truncation order: nothing is known about terms with exponent `>= trunc`. Exact
//! elements carry `trunc = +∞`. Every operation propagates a sound truncation bound,
//! so a series with no stored terms and a finite `trunc` is an *unknown* quantity of
//! valuation at least `trunc`, never silently treated as zero.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub const DEFAULT_TRUNCATION: i64 = 8;
pub const DEFAULT_MAX_DENOMINATOR: u64 = 64;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// An element of the value group extended by `+∞`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Finite(Q),
    Infinity,
}

impl Value {
    pub fn int(n: i64) -> Self {
        Value::Finite(q(n))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Value::Finite(_))
    }

    pub fn finite(&self) -> Option<&Q> {
        match self {
            Value::Finite(g) => Some(g),
            Value::Infinity => None,
        }
    }

    pub fn add_q(&self, r: &Q) -> Value {
        match self {
            Value::Finite(g) => Value::Finite(g + r),
            Value::Infinity => Value::Infinity,
        }
    }

    /// `self - other`; `∞ - finite = ∞`. Returns `None` for `∞ - ∞`
    /// and `finite - ∞`.
    pub fn sub(&self, other: &Value) -> Option<Value> {
        match (self, other) {
            (Value::Finite(a), Value::Finite(b)) => Some(Value::Finite(a - b)),
            (Value::Infinity, Value::Finite(_)) => Some(Value::Infinity),
            _ => None,
        }
    }
}

impl Add for &Value {
    type Output = Value;
    fn add(self, rhs: &Value) -> Value {
        match (self, rhs) {
            (Value::Finite(a), Value::Finite(b)) => Value::Finite(a + b),
            _ => Value::Infinity,
        }
    }
}

impl Add for Value {
    type Output = Value;
    fn add(self, rhs: Value) -> Value {
        &self + &rhs
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Finite(g) => write!(f, "{g}"),
            Value::Infinity => write!(f, "+inf"),
        }
    }
}

/// Serializes a rational as its decimal-free string form, e.g. `"-3/2"`.
pub fn ser_q<S: serde::Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

pub fn ser_q_vec<S: serde::Serializer>(xs: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        seq.serialize_element(&x.to_string())?;
    }
    seq.end()
}

impl Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "+inf" || s == "inf" {
            return Ok(Value::Infinity);
        }
        s.parse::<Q>()
            .map(Value::Finite)
            .map_err(|_| serde::de::Error::custom(format!("bad value `{s}`")))
    }
}

/// A truncated Puiseux series. See the module docs for the truncation semantics.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Series {
    terms: Vec<(Q, Q)>,
    trunc: Value,
}

impl Series {
    pub fn zero() -> Self {
        Series { terms: Vec::new(), trunc: Value::Infinity }
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        Self::monomial(c, Q::zero())
    }

    pub fn int(n: i64) -> Self {
        Self::constant(q(n))
    }

    /// `c·t^e`.
    pub fn monomial(c: Q, e: Q) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Series { terms: vec![(e, c)], trunc: Value::Infinity }
    }

    /// The infinitesimal `t` itself.
    pub fn t() -> Self {
        Self::monomial(Q::one(), Q::one())
    }

    /// Nothing known beyond valuation `>= trunc`.
    pub fn unknown(trunc: Q) -> Self {
        Series { terms: Vec::new(), trunc: Value::Finite(trunc) }
    }

    /// Builds a canonical series from arbitrary `(exponent, coefficient)` pairs.
    pub fn from_terms<I: IntoIterator<Item = (Q, Q)>>(terms: I, trunc: Value) -> Self {
        let mut map: BTreeMap<Q, Q> = BTreeMap::new();
        for (e, c) in terms {
            if let Value::Finite(tr) = &trunc {
                if &e >= tr {
                    continue;
                }
            }
            *map.entry(e).or_insert_with(Q::zero) += c;
        }
        let terms = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Series { terms, trunc }
    }

    pub fn terms(&self) -> &[(Q, Q)] {
        &self.terms
    }

    pub fn trunc(&self) -> &Value {
        &self.trunc
    }

    pub fn is_exact(&self) -> bool {
        !self.trunc.is_finite()
    }

    /// Exactly zero (no terms, infinite truncation).
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && !self.trunc.is_finite()
    }

    /// No known terms but a finite truncation order.
    pub fn is_unknown(&self) -> bool {
        self.terms.is_empty() && self.trunc.is_finite()
    }

    /// Least stored exponent; `+∞` when nothing is stored.
    ///
    /// For an unknown series this is only an upper estimate of ignorance; use
    /// [`Series::val_checked`] or [`Series::order_bound`] when that matters.
    pub fn val(&self) -> Value {
        match self.terms.first() {
            Some((e, _)) => Value::Finite(e.clone()),
            None => Value::Infinity,
        }
    }

    pub fn val_checked(&self) -> Result<Value> {
        if self.is_unknown() {
            return Err(Error::TruncationInsufficient(format!(
                "valuation of O(t^{}) is unknown",
                self.trunc
            )));
        }
        Ok(self.val())
    }

    /// A sound lower bound on the valuation.
    pub fn order_bound(&self) -> Value {
        match self.terms.first() {
            Some((e, _)) => Value::Finite(e.clone()),
            None => self.trunc.clone(),
        }
    }

    /// Leading `(exponent, coefficient)`.
    pub fn lead(&self) -> Option<&(Q, Q)> {
        self.terms.first()
    }

    pub fn coeff(&self, e: &Q) -> Q {
        self.terms
            .iter()
            .find(|(x, _)| x == e)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Q::zero)
    }

    /// The rational value when the series is an exact constant.
    pub fn as_rational(&self) -> Option<Q> {
        if !self.is_exact() {
            return None;
        }
        match self.terms.as_slice() {
            [] => Some(Q::zero()),
            [(e, c)] if e.is_zero() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn max_denominator(&self) -> BigInt {
        let mut m = BigInt::one();
        for (e, _) in &self.terms {
            if e.denom() > &m {
                m = e.denom().clone();
            }
        }
        if let Value::Finite(tr) = &self.trunc {
            if tr.denom() > &m {
                m = tr.denom().clone();
            }
        }
        m
    }

    pub fn check_denominators(&self, limit: u64) -> Result<()> {
        let d = self.max_denominator();
        if d > BigInt::from(limit) {
            return Err(Error::DenominatorLimit { den: d.to_string(), limit });
        }
        Ok(())
    }

    /// Sign of the series as an element of the ordered field.
    pub fn sign(&self) -> Result<Ordering> {
        match self.terms.first() {
            Some((_, c)) => Ok(if c.is_positive() { Ordering::Greater } else { Ordering::Less }),
            None if self.is_exact() => Ok(Ordering::Equal),
            None => Err(Error::Undecidable(format!("sign of O(t^{})", self.trunc))),
        }
    }

    pub fn compare(&self, other: &Series) -> Result<Ordering> {
        (self - other).sign()
    }

    /// Drops terms with exponent `>= order` and lowers `trunc` accordingly.
    pub fn truncate(&self, order: &Q) -> Series {
        let new_trunc = std::cmp::min(self.trunc.clone(), Value::Finite(order.clone()));
        if self.is_zero() {
            return Series::zero();
        }
        let terms = self.terms.iter().filter(|(e, _)| e < order).cloned().collect();
        Series { terms, trunc: new_trunc }
    }

    /// Keeps only the terms, marking the result exact.
    pub fn forget_truncation(&self) -> Series {
        Series { terms: self.terms.clone(), trunc: Value::Infinity }
    }

    /// Multiplies by the monomial `c·t^e`.
    pub fn scale(&self, c: &Q, e: &Q) -> Series {
        if c.is_zero() {
            return Series::zero();
        }
        Series {
            terms: self.terms.iter().map(|(x, k)| (x + e, k * c)).collect(),
            trunc: self.trunc.add_q(e),
        }
    }

    pub fn pow(&self, n: u32) -> Series {
        let mut acc = Series::one();
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Multiplicative inverse, known at least up to absolute order `order`.
    pub fn inv_to(&self, order: &Q) -> Result<Series> {
        if self.is_exact() && self.terms.len() == 1 {
            let (v, c) = &self.terms[0];
            return Ok(Series::monomial(c.recip(), -v.clone()));
        }
        let (v, c) = match self.terms.first() {
            Some(lt) => lt.clone(),
            None if self.is_exact() => return Err(Error::DivisionByZero),
            None => {
                return Err(Error::TruncationInsufficient(format!(
                    "cannot invert O(t^{})",
                    self.trunc
                )))
            }
        };
        // result trunc: min(order, trunc - 2v)
        let mut target = Value::Finite(order.clone());
        if let Value::Finite(tr) = &self.trunc {
            let cap = tr - &v - &v;
            if cap < *order {
                target = Value::Finite(cap);
            }
        }
        let target_q = target.finite().expect("finite target").clone();
        let rel = &target_q + &v;
        let cinv = c.recip();
        let neg_v = -v.clone();
        if rel <= Q::zero() {
            return Ok(Series::unknown(target_q));
        }
        // x = c t^v (1 + u); 1/(1 + u) by the power-series recurrence on the
        // lattice generated by the exponents of u
        let u = &self.scale(&cinv, &neg_v) - &Series::one();
        let tau = match &u.trunc {
            Value::Finite(t) if *t < rel => t.clone(),
            _ => rel.clone(),
        };
        let den = u.terms.iter().fold(BigInt::one(), |acc, (e, _)| num_integer::Integer::lcm(&acc, e.denom()));
        let scaled = &tau * Q::from_integer(den.clone());
        let n = scaled.ceil().to_integer().to_usize().unwrap_or(0);
        let support: Vec<(usize, &Q)> = u
            .terms
            .iter()
            .filter(|(e, _)| *e < tau)
            .map(|(e, c)| ((e * Q::from_integer(den.clone())).to_integer().to_usize().expect("positive exponent"), c))
            .collect();
        let mut b: Vec<Q> = vec![Q::zero(); n.max(1)];
        b[0] = Q::one();
        for i in 1..n {
            let mut acc = Q::zero();
            for (k, c) in &support {
                if *k > i {
                    break;
                }
                if !b[i - k].is_zero() {
                    acc += *c * &b[i - k];
                }
            }
            b[i] = -acc;
        }
        let terms = b
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (Q::new(BigInt::from(i), den.clone()), c));
        let sum = Series::from_terms(terms, Value::Finite(tau));
        Ok(sum.scale(&cinv, &neg_v).truncate(&target_q))
    }

    pub fn div_to(&self, other: &Series, order: &Q) -> Result<Series> {
        // enough relative precision for the quotient to reach `order`
        let lead = other.order_bound();
        let extra = match (&lead, self.order_bound()) {
            (Value::Finite(a), Value::Finite(b)) => order + a - b + a,
            _ => order.clone(),
        };
        let inv = other.inv_to(&std::cmp::max(extra, order.clone()))?;
        let out = self * &inv;
        Ok(if out.is_exact() { out } else { out.truncate(order) })
    }

    pub fn to_f64_approx(&self, t_value: f64) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c.to_f64().unwrap_or(0.0) * t_value.powf(e.to_f64().unwrap_or(0.0)))
            .sum()
    }

    /// Parses the textual series grammar (`3*t^(1/2) + 2*t^2`, `1 - t + O(t^4)`).
    pub fn parse(text: &str) -> Result<Series> {
        crate::parse::parse_series(text, DEFAULT_MAX_DENOMINATOR)
    }
}

/// `min` of coordinate valuations.
pub fn val_tuple(xs: &[Series]) -> Value {
    xs.iter().map(|x| x.val()).min().unwrap_or(Value::Infinity)
}

/// Like [`val_tuple`] but fails when an unknown coordinate could be the minimum.
pub fn val_tuple_checked(xs: &[Series]) -> Result<Value> {
    let known = xs.iter().filter(|x| !x.is_unknown()).map(|x| x.val()).min().unwrap_or(Value::Infinity);
    for x in xs.iter().filter(|x| x.is_unknown()) {
        if x.trunc() <= &known {
            return Err(Error::TruncationInsufficient(format!(
                "coordinate O(t^{}) hides the tuple valuation",
                x.trunc()
            )));
        }
    }
    Ok(known)
}

pub fn sub_tuple(a: &[Series], b: &[Series]) -> Vec<Series> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add_tuple(a: &[Series], b: &[Series]) -> Vec<Series> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn dot(a: &[Series], b: &[Series]) -> Series {
    a.iter().zip(b).fold(Series::zero(), |acc, (x, y)| &acc + &(x * y))
}

fn merge_add(a: &[(Q, Q)], b: &[(Q, Q)], trunc: &Value, negate_b: bool) -> Vec<(Q, Q)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let below = |e: &Q| match trunc {
        Value::Finite(tr) => e < tr,
        Value::Infinity => true,
    };
    while i < a.len() || j < b.len() {
        let take = match (a.get(i), b.get(j)) {
            (Some((ea, _)), Some((eb, _))) => ea.cmp(eb),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => unreachable!(),
        };
        match take {
            Ordering::Less => {
                let (e, c) = &a[i];
                if below(e) {
                    out.push((e.clone(), c.clone()));
                }
                i += 1;
            }
            Ordering::Greater => {
                let (e, c) = &b[j];
                if below(e) {
                    out.push((e.clone(), if negate_b { -c } else { c.clone() }));
                }
                j += 1;
            }
            Ordering::Equal => {
                let (e, ca) = &a[i];
                let cb = &b[j].1;
                let c = if negate_b { ca - cb } else { ca + cb };
                if !c.is_zero() && below(e) {
                    out.push((e.clone(), c));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out
}

impl Add for &Series {
    type Output = Series;
    fn add(self, rhs: &Series) -> Series {
        let trunc = std::cmp::min(self.trunc.clone(), rhs.trunc.clone());
        Series { terms: merge_add(&self.terms, &rhs.terms, &trunc, false), trunc }
    }
}

impl Sub for &Series {
    type Output = Series;
    fn sub(self, rhs: &Series) -> Series {
        let trunc = std::cmp::min(self.trunc.clone(), rhs.trunc.clone());
        Series { terms: merge_add(&self.terms, &rhs.terms, &trunc, true), trunc }
    }
}

impl Mul for &Series {
    type Output = Series;
    fn mul(self, rhs: &Series) -> Series {
        if self.is_zero() || rhs.is_zero() {
            return Series::zero();
        }
        let t1 = &self.order_bound() + &rhs.trunc;
        let t2 = &rhs.order_bound() + &self.trunc;
        let trunc = std::cmp::min(t1, t2);
        let mut map: BTreeMap<Q, Q> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e = ea + eb;
                if let Value::Finite(tr) = &trunc {
                    if &e >= tr {
                        continue;
                    }
                }
                *map.entry(e).or_insert_with(Q::zero) += ca * cb;
            }
        }
        let terms = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Series { terms, trunc }
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        Series {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
            trunc: self.trunc.clone(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Series {
            type Output = Series;
            fn $m(self, rhs: Series) -> Series {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Series> for Series {
            type Output = Series;
            fn $m(self, rhs: &Series) -> Series {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Series {
    type Output = Series;
    fn neg(self) -> Series {
        -&self
    }
}

pub(crate) fn fmt_exponent(e: &Q) -> String {
    if e.is_integer() && !e.is_negative() {
        format!("{}", e.numer())
    } else {
        format!("({e})")
    }
}

fn fmt_monomial(c: &Q, e: &Q, first: bool) -> String {
    let mut s = String::new();
    let mag = c.abs();
    if first {
        if c.is_negative() {
            s.push('-');
        }
    } else if c.is_negative() {
        s.push_str(" - ");
    } else {
        s.push_str(" + ");
    }
    if e.is_zero() {
        s.push_str(&mag.to_string());
        return s;
    }
    if !mag.is_one() {
        s.push_str(&mag.to_string());
        s.push('*');
    }
    s.push('t');
    if !e.is_one() {
        s.push('^');
        s.push_str(&fmt_exponent(e));
    }
    s
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return match &self.trunc {
                Value::Infinity => write!(f, "0"),
                Value::Finite(tr) => write!(f, "O(t^{})", fmt_exponent(tr)),
            };
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            f.write_str(&fmt_monomial(c, e, i == 0))?;
        }
        if let Value::Finite(tr) = &self.trunc {
            write!(f, " + O(t^{})", fmt_exponent(tr))?;
        }
        Ok(())
    }
}

impl Serialize for Series {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Series {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Series::parse(&s).map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Series {
    fn from(n: i64) -> Self {
        Series::int(n)
    }
}

impl From<Q> for Series {
    fn from(c: Q) -> Self {
        Series::constant(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> Series {
        Series::parse(text).unwrap()
    }

    #[test]
    fn add_cancels() {
        assert_eq!(&s("1 + t") + &s("2 - t"), Series::int(3));
        assert!((&s("1 - t") + &s("t - 1")).is_zero());
    }

    #[test]
    fn sqrt_t_squared() {
        let r = s("t^(1/2)");
        assert_eq!(&r * &r, Series::t());
    }

    #[test]
    fn inverse_of_one_plus_t() {
        let inv = s("1 + t").inv_to(&q(4)).unwrap();
        assert_eq!(inv.to_string(), "1 - t + t^2 - t^3 + O(t^4)");
        let back = &inv * &s("1 + t");
        let diff = &back - &Series::one();
        assert!(diff.order_bound() >= Value::int(4));
    }

    #[test]
    fn inverse_of_zero_fails() {
        assert_eq!(Series::zero().inv_to(&q(4)), Err(Error::DivisionByZero));
    }

    #[test]
    fn valuations() {
        assert_eq!(s("t^(1/2) + 2*t").val(), Value::Finite(qf(1, 2)));
        assert_eq!(Series::zero().val(), Value::Infinity);
        assert_eq!(val_tuple(&[s("3*t^2"), s("t^(-1)")]), Value::int(-1));
    }

    #[test]
    fn comparisons() {
        assert_eq!(Series::t().compare(&Series::constant(qf(1, 1000))), Ok(Ordering::Less));
        assert_eq!(s("1 + t").compare(&Series::one()), Ok(Ordering::Greater));
        let x = s("3 - 2*t^(1/3)");
        assert_eq!(x.compare(&x), Ok(Ordering::Equal));
        let a = s("1 + O(t^2)");
        assert!(matches!(a.compare(&Series::one()), Err(Error::Undecidable(_))));
    }

    #[test]
    fn truncation() {
        assert_eq!(s("1 + t + t^2").truncate(&q(2)).to_string(), "1 + t + O(t^2)");
        assert!(Series::zero().truncate(&q(5)).is_zero());
        let z = s("t^3").truncate(&q(1));
        assert!(z.is_unknown());
        assert_eq!(z.trunc(), &Value::int(1));
    }

    #[test]
    fn mul_truncation_bound() {
        let a = s("t + O(t^3)");
        let b = s("t^2 + O(t^5)");
        let p = &a * &b;
        // min(1 + 5, 2 + 3) = 5
        assert_eq!(p.trunc(), &Value::int(5));
        assert_eq!(p.terms().len(), 1);
    }

    #[test]
    fn rendering() {
        assert_eq!(s("3*t^(1/2) + 2*t^2").to_string(), "3*t^(1/2) + 2*t^2");
        assert_eq!(s("-t^(-1) + 1/2").to_string(), "-t^(-1) + 1/2");
        assert_eq!(Series::zero().to_string(), "0");
    }
}
