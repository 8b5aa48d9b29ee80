//! Leading-term quotients RV and RV⁽ⁿ⁾, the residue map and balls.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::series::{fmt_exponent, val_tuple_checked, Q, Series, Value};

/// Class of `lead * t^gamma * (1 + M)`, or the zero class.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RvElement {
    Zero,
    Class { gamma: Q, lead: Q },
}

impl RvElement {
    pub fn new(gamma: Q, lead: Q) -> Self {
        if lead.is_zero() {
            RvElement::Zero
        } else {
            RvElement::Class { gamma, lead }
        }
    }

    pub fn one() -> Self {
        RvElement::Class { gamma: Q::zero(), lead: Q::from_integer(1.into()) }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, RvElement::Zero)
    }

    pub fn val(&self) -> Value {
        match self {
            RvElement::Zero => Value::Infinity,
            RvElement::Class { gamma, .. } => Value::Finite(gamma.clone()),
        }
    }

    pub fn lead(&self) -> Q {
        match self {
            RvElement::Zero => Q::zero(),
            RvElement::Class { lead, .. } => lead.clone(),
        }
    }

    pub fn signum(&self) -> Ordering {
        self.lead().cmp(&Q::zero())
    }

    pub fn mul(&self, other: &RvElement) -> RvElement {
        match (self, other) {
            (RvElement::Class { gamma: g1, lead: l1 }, RvElement::Class { gamma: g2, lead: l2 }) => {
                RvElement::Class { gamma: g1 + g2, lead: l1 * l2 }
            }
            _ => RvElement::Zero,
        }
    }

    pub fn inv(&self) -> Result<RvElement> {
        match self {
            RvElement::Zero => Err(Error::DivisionByZero),
            RvElement::Class { gamma, lead } => Ok(RvElement::Class { gamma: -gamma, lead: lead.recip() }),
        }
    }

    pub fn neg(&self) -> RvElement {
        match self {
            RvElement::Zero => RvElement::Zero,
            RvElement::Class { gamma, lead } => RvElement::Class { gamma: gamma.clone(), lead: -lead },
        }
    }

    /// The leading monomial, a canonical representative of the class.
    pub fn representative(&self) -> Series {
        match self {
            RvElement::Zero => Series::zero(),
            RvElement::Class { gamma, lead } => Series::monomial(lead.clone(), gamma.clone()),
        }
    }
}

impl PartialOrd for RvElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The order induced from R: classes compare as their representatives.
impl Ord for RvElement {
    fn cmp(&self, other: &Self) -> Ordering {
        let s1 = self.signum();
        let s2 = other.signum();
        if s1 != s2 {
            return s1.cmp(&s2);
        }
        match (self, other) {
            (RvElement::Class { gamma: g1, lead: l1 }, RvElement::Class { gamma: g2, lead: l2 }) => {
                // same sign: smaller gamma means larger magnitude
                let mag = match g2.cmp(g1) {
                    Ordering::Equal => l1.abs().cmp(&l2.abs()),
                    o => o,
                };
                if s1 == Ordering::Greater {
                    mag
                } else {
                    mag.reverse()
                }
            }
            _ => Ordering::Equal,
        }
    }
}

impl fmt::Display for RvElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RvElement::Zero => write!(f, "0@RV"),
            RvElement::Class { gamma, lead } => write!(f, "{}·t^{}@RV", lead, fmt_exponent(gamma)),
        }
    }
}

impl Serialize for RvElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

pub fn rvo(x: &Series) -> Result<RvElement> {
    if x.is_zero() {
        return Ok(RvElement::Zero);
    }
    match x.lead() {
        Some((e, c)) => Ok(RvElement::Class { gamma: e.clone(), lead: c.clone() }),
        None => Err(Error::TruncationInsufficient(format!("leading term of {x} is unknown"))),
    }
}

pub fn rv_mul(a: &RvElement, b: &RvElement) -> RvElement {
    a.mul(b)
}

pub fn vrv(a: &RvElement) -> Value {
    a.val()
}

/// Class of a tuple modulo `x ~ x'` iff `val(x - x') > val(x)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RvNElement {
    Zero,
    Class { gamma: Q, lead: Vec<Q> },
}

impl RvNElement {
    pub fn val(&self) -> Value {
        match self {
            RvNElement::Zero => Value::Infinity,
            RvNElement::Class { gamma, .. } => Value::Finite(gamma.clone()),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, RvNElement::Zero)
    }

    pub fn lead_vec(&self) -> Option<&[Q]> {
        match self {
            RvNElement::Zero => None,
            RvNElement::Class { lead, .. } => Some(lead),
        }
    }
}

impl fmt::Display for RvNElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RvNElement::Zero => write!(f, "0@RV"),
            RvNElement::Class { gamma, lead } => {
                let parts: Vec<String> = lead.iter().map(|c| c.to_string()).collect();
                write!(f, "({})·t^{}@RV", parts.join(", "), fmt_exponent(gamma))
            }
        }
    }
}

impl Serialize for RvNElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

pub fn rvo_n(xs: &[Series]) -> Result<RvNElement> {
    match val_tuple_checked(xs)? {
        Value::Infinity => Ok(RvNElement::Zero),
        Value::Finite(g) => {
            let mut lead = Vec::with_capacity(xs.len());
            // every coordinate's truncation lies above g once the minimum is known
            for x in xs {
                lead.push(x.coeff(&g));
            }
            Ok(RvNElement::Class { gamma: g, lead })
        }
    }
}

/// Residue of an element of O_R.
pub fn res(x: &Series) -> Result<Q> {
    let v = x.val_checked()?;
    if v < Value::Finite(Q::zero()) {
        return Err(Error::Domain(format!("res({x}): valuation {v} is negative")));
    }
    if x.order_bound() <= Value::Finite(Q::zero()) && x.val() > Value::Finite(Q::zero()) {
        return Err(Error::TruncationInsufficient(format!("constant term of {x} is unknown")));
    }
    Ok(x.coeff(&Q::zero()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: Vec<Series>,
    pub radius: Value,
    pub closed: bool,
}

impl Ball {
    pub fn open(center: Vec<Series>, radius: Value) -> Self {
        Ball { center, radius, closed: false }
    }

    pub fn closed(center: Vec<Series>, radius: Value) -> Self {
        Ball { center, radius, closed: true }
    }

    pub fn contains(&self, x: &[Series]) -> Result<bool> {
        let d: Vec<Series> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        let v = val_tuple_checked(&d)?;
        Ok(if self.closed { v >= self.radius } else { v > self.radius })
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = if self.center.len() == 1 {
            self.center[0].to_string()
        } else {
            let parts: Vec<String> = self.center.iter().map(|c| c.to_string()).collect();
            format!("({})", parts.join(", "))
        };
        let op = if self.closed { "≥" } else { ">" };
        write!(f, "B({c}, {op}{})", self.radius)
    }
}

impl Serialize for Ball {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// The fiber `rvo⁻¹(ξ)`, the open ball `B(c·t^γ, >γ)`.
pub fn rv_fiber(xi: &RvElement) -> Result<Ball> {
    match xi {
        RvElement::Zero => Err(Error::Domain("the fiber of 0@RV is the point {0}".into())),
        RvElement::Class { gamma, .. } => Ok(Ball::open(vec![xi.representative()], Value::Finite(gamma.clone()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{q, qf};

    fn s(text: &str) -> Series {
        Series::parse(text).unwrap()
    }

    #[test]
    fn rvo_examples() {
        assert_eq!(rvo(&s("3*t + 5*t^2")).unwrap(), RvElement::new(q(1), q(3)));
        assert_eq!(rvo(&Series::zero()).unwrap(), RvElement::Zero);
        assert_eq!(rvo(&s("1 + t")).unwrap(), rvo(&s("1 + t^2")).unwrap());
        assert!(matches!(rvo(&Series::unknown(q(3))), Err(Error::TruncationInsufficient(_))));
    }

    #[test]
    fn rv_arithmetic() {
        let a = RvElement::new(q(0), q(2));
        let b = RvElement::new(q(1), q(1));
        assert_eq!(rv_mul(&a, &b), RvElement::new(q(1), q(2)));
        assert_eq!(rv_mul(&RvElement::Zero, &a), RvElement::Zero);
        for x in ["t", "1 + t", "7*t^3"] {
            let x = s(x);
            assert_eq!(vrv(&rvo(&x).unwrap()), x.val());
        }
    }

    #[test]
    fn rv_order_follows_field_order() {
        let xs = ["-1", "-t", "-t^2", "0", "t^2", "t", "1/2", "1", "t^(-1)"];
        let rvs: Vec<RvElement> = xs.iter().map(|x| rvo(&s(x)).unwrap()).collect();
        for w in rvs.windows(2) {
            assert!(w[0] < w[1], "{} < {}", w[0], w[1]);
        }
    }

    #[test]
    fn rvn_examples() {
        let a = rvo_n(&[s("t"), s("t^2")]).unwrap();
        assert_eq!(a, RvNElement::Class { gamma: q(1), lead: vec![q(1), q(0)] });
        assert_eq!(rvo_n(&[s("t + t^3"), s("t^2 + t^3")]).unwrap(), a);
        assert_eq!(rvo_n(&[Series::zero(), Series::zero()]).unwrap(), RvNElement::Zero);
    }

    #[test]
    fn residues() {
        assert_eq!(res(&s("2 + t")).unwrap(), q(2));
        assert_eq!(res(&s("t")).unwrap(), q(0));
        assert!(matches!(res(&s("t^(-1)")), Err(Error::Domain(_))));
    }

    #[test]
    fn fibers() {
        let b = rv_fiber(&RvElement::new(q(1), q(1))).unwrap();
        assert_eq!(b.to_string(), "B(t, >1)");
        let b = rv_fiber(&RvElement::new(q(0), q(1))).unwrap();
        assert_eq!(b.to_string(), "B(1, >0)");
        assert!(b.contains(&[s("1 + t")]).unwrap());
        assert!(!b.contains(&[s("2")]).unwrap());
        assert_eq!(RvElement::new(qf(1, 2), q(3)).to_string(), "3·t^(1/2)@RV");
    }
}
