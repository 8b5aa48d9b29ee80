//! Newton–Puiseux root finding for univariate polynomials over the series field.
//!
//! Roots are grown term by term: after fixing a prefix `r`, the shifted
//! polynomial `p(r + Y)` is inspected through its Newton polygon and each edge
//! contributes leading terms `c t^s` of the remaining roots, where `c` runs over
//! the roots of the edge's characteristic polynomial.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::qpoly;
use crate::series::{Q, Series, Value};

/// One cluster of roots produced by the Newton polygon recursion.
#[derive(Clone, Debug, PartialEq)]
pub enum RootBranch {
    /// A real root known up to its truncation; multiplicity > 1 only for exact repeated roots.
    Real { root: Series, multiplicity: usize },
    /// Roots whose next leading coefficient is an irrational real algebraic number.
    Irrational { prefix: Series, valuation: Q, count: usize },
    /// Non-real roots (in conjugate pairs).
    Complex { valuation: Q, count: usize },
    /// Roots whose realness was not settled within the search budget.
    Unresolved { approx: Series, count: usize },
}

#[derive(Clone, Debug)]
pub struct RootOptions {
    /// Roots are reported with truncation at this exponent.
    pub precision: Q,
    pub max_denominator: u64,
    /// How far past `precision` the recursion may look to separate clusters.
    pub lookahead: Q,
}

impl RootOptions {
    pub fn new(precision: Q) -> Self {
        RootOptions { precision, max_denominator: crate::series::DEFAULT_MAX_DENOMINATOR, lookahead: Q::from_integer(BigInt::from(24)) }
    }
}

fn binom(n: usize, k: usize) -> Q {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    Q::from_integer(r)
}

/// Coefficients of `p(r + Y)` as a polynomial in `Y`.
pub fn taylor_shift(coeffs: &[Series], r: &Series) -> Vec<Series> {
    let d = coeffs.len();
    let mut powers = vec![Series::one()];
    for i in 1..d {
        let next = &powers[i - 1] * r;
        powers.push(next);
    }
    (0..d)
        .map(|i| {
            let mut acc = Series::zero();
            for j in i..d {
                if coeffs[j].is_zero() {
                    continue;
                }
                let term = &(&coeffs[j] * &powers[j - i]) * &Series::constant(binom(j, i));
                acc = &acc + &term;
            }
            acc
        })
        .collect()
}

pub fn eval_univariate(coeffs: &[Series], x: &Series) -> Series {
    coeffs.iter().rev().fold(Series::zero(), |acc, c| &(&acc * x) + c)
}

struct Finder<'a> {
    opts: &'a RootOptions,
    out: Vec<RootBranch>,
    steps: usize,
}

const MAX_STEPS: usize = 20_000;

impl Finder<'_> {
    /// Roots `Y` of `b` with `val(Y) > mu`; exactly `k` of them exist.
    fn level(&mut self, b: &[Series], shift: &Series, mu: Option<&Q>, k: usize) -> Result<()> {
        self.steps += 1;
        if self.steps > MAX_STEPS {
            return Err(Error::Undecidable("root refinement step budget exhausted".into()));
        }
        if k == 0 {
            return Ok(());
        }
        // exact zero root of multiplicity m0
        let m0 = b.iter().take(k + 1).position(|c| !c.is_zero()).unwrap_or(k);
        if m0 > 0 {
            self.out.push(RootBranch::Real { root: shift.clone(), multiplicity: m0 });
        }
        if m0 >= k {
            return Ok(());
        }
        // Newton polygon over indices m0..=k
        let mut known: Vec<(usize, Q)> = Vec::new();
        let mut unknown: Vec<(usize, Q)> = Vec::new();
        for (i, c) in b.iter().enumerate().take(k + 1).skip(m0) {
            if c.is_zero() {
                continue;
            }
            match c.val_checked() {
                Ok(Value::Finite(v)) => known.push((i, v)),
                _ => unknown.push((i, c.trunc().finite().cloned().expect("unknown has finite trunc"))),
            }
        }
        if known.last().map(|(i, _)| *i) != Some(k) {
            return Err(Error::TruncationInsufficient(format!("coefficient of Y^{k} in the shifted polynomial is unknown")));
        }
        let hull = lower_hull(&known);
        for w in hull.windows(2) {
            let (a, va) = &known[w[0]];
            let (bidx, vb) = &known[w[1]];
            let s = (va - vb) / Q::from_integer(BigInt::from(bidx - a));
            for (i, tau) in &unknown {
                let line = vb + &s * Q::from_integer(BigInt::from(*bidx as i64 - *i as i64));
                if *tau <= line {
                    return Err(Error::TruncationInsufficient(format!(
                        "an unknown coefficient may alter the Newton polygon at Y^{i}"
                    )));
                }
            }
        }
        let (j0, vj0) = known[0].clone();
        if j0 > m0 {
            // roots near the shift hidden by unknown low coefficients
            let beta = unknown
                .iter()
                .filter(|(i, _)| *i < j0)
                .map(|(i, tau)| (tau - &vj0) / Q::from_integer(BigInt::from(j0 - i)))
                .min()
                .expect("an unknown coefficient below the first known one");
            let bound = std::cmp::min(beta, self.opts.precision.clone());
            self.out.push(RootBranch::Unresolved { approx: shift.truncate(&bound), count: j0 - m0 });
        }
        for w in hull.windows(2) {
            let (a, va) = known[w[0]].clone();
            let (bidx, vb) = known[w[1]].clone();
            let s = (&va - &vb) / Q::from_integer(BigInt::from(bidx - a));
            if let Some(mu) = mu {
                if &s <= mu {
                    return Err(Error::Undecidable("Newton polygon edge below the current level".into()));
                }
            }
            if s.denom() > &BigInt::from(self.opts.max_denominator) {
                return Err(Error::DenominatorLimit { den: s.denom().to_string(), limit: self.opts.max_denominator });
            }
            let mut phi = vec![Q::zero(); bidx - a + 1];
            for (i, v) in &known {
                if *i < a || *i > bidx {
                    continue;
                }
                let line = &va - &s * Q::from_integer(BigInt::from(i - a));
                if *v == line {
                    phi[i - a] = b[*i].lead().unwrap().1.clone();
                }
            }
            self.edge(b, shift, &s, &phi)?;
        }
        Ok(())
    }

    fn edge(&mut self, b: &[Series], shift: &Series, s: &Q, phi: &[Q]) -> Result<()> {
        let (rational, rest) = qpoly::rational_roots(phi);
        for (c, m) in rational {
            if c.is_zero() {
                continue;
            }
            let term = Series::monomial(c.clone(), s.clone());
            let new_shift = shift + &term;
            let precision = &self.opts.precision;
            if m == 1 && s >= precision {
                self.out.push(RootBranch::Real { root: new_shift.truncate(precision), multiplicity: 1 });
                continue;
            }
            if s >= &(precision + &self.opts.lookahead) {
                self.out.push(RootBranch::Unresolved { approx: new_shift.truncate(precision), count: m });
                continue;
            }
            let nb = taylor_shift(b, &term);
            if m == 1 {
                if let Some(y) = newton_simple(&nb, s, precision) {
                    let sum = &new_shift + &y;
                    let exact = sum.is_exact() && sum.terms().iter().all(|(e, _)| e < precision);
                    let root = if exact { sum } else { sum.truncate(precision) };
                    if root.max_denominator() > BigInt::from(self.opts.max_denominator) {
                        return Err(Error::DenominatorLimit { den: root.max_denominator().to_string(), limit: self.opts.max_denominator });
                    }
                    self.out.push(RootBranch::Real { root, multiplicity: 1 });
                    continue;
                }
            }
            self.level(&nb, &new_shift, Some(s), m)?;
        }
        for (f, m) in qpoly::squarefree_decomposition(&rest) {
            let deg = qpoly::degree(&f).unwrap_or(0);
            if deg == 0 {
                continue;
            }
            let real = qpoly::count_real_roots(&f);
            if real > 0 {
                for _ in 0..real {
                    self.out.push(RootBranch::Irrational { prefix: shift.clone(), valuation: s.clone(), count: m });
                }
            }
            let complex = deg - real;
            if complex > 0 {
                self.out.push(RootBranch::Complex { valuation: s.clone(), count: complex * m });
            }
        }
        Ok(())
    }
}

/// The root of `b` with valuation above `s`, when it is simple and every other
/// root has valuation at most `s`. Newton steps from 0 then gain at least
/// `val(e) - s` per step, so the error after a correction of valuation `d`
/// has valuation at least `2d - s`.
fn newton_simple(b: &[Series], s: &Q, precision: &Q) -> Option<Series> {
    let db: Vec<Series> = b.iter().enumerate().skip(1).map(|(i, c)| c.scale(&Q::from_integer(BigInt::from(i)), &Q::zero())).collect();
    let two = Q::from_integer(BigInt::from(2));
    // working order: enough for val(f) up to precision + val(f')
    let work = &two * precision + &two * s.abs() + &two;
    let mut y = Series::zero();
    for _ in 0..64 {
        let fp = eval_truncated(&db, &y, &work);
        let Ok(Value::Finite(vfp)) = fp.val_checked() else { return None };
        let f = eval_truncated(b, &y, &work);
        let vf = match f.val_checked() {
            Ok(Value::Finite(v)) => v,
            Ok(Value::Infinity) => return Some(y),
            Err(_) => {
                // f(y) = O(t^T): the root is within T - val(f'(y)) of y
                let t = f.trunc().finite()?.clone();
                if &t - &vfp < *precision {
                    return None;
                }
                return Some(exact_or_truncated(b, y, precision));
            }
        };
        let d = &vf - &vfp;
        if &d <= s {
            return None;
        }
        let delta = f.div_to(&fp, precision).ok()?;
        y = (&y - &delta).truncate(precision);
        if &d * &two - s >= *precision {
            return Some(exact_or_truncated(b, y, precision));
        }
    }
    None
}

/// `y` itself when it is an exact root of `b`.
fn exact_or_truncated(b: &[Series], y: Series, precision: &Q) -> Series {
    let y = y.truncate(precision);
    let small = y.terms().len() <= 4 && b.iter().all(|c| c.is_exact());
    if small {
        let exact = Series::from_terms(y.terms().to_vec(), Value::Infinity);
        if eval_univariate(b, &exact).is_zero() {
            return exact;
        }
    }
    y
}

/// Horner evaluation that drops terms above `work`, widened for negative
/// valuations of `x`.
fn eval_truncated(coeffs: &[Series], x: &Series, work: &Q) -> Series {
    let loss = match x.val() {
        Value::Finite(v) if v.is_negative() => -v * Q::from_integer(BigInt::from(coeffs.len() as i64)),
        _ => Q::zero(),
    };
    let w = work + loss;
    coeffs.iter().rev().fold(Series::zero(), |acc, c| (&(&acc * x) + c).truncate(&w))
}

/// Indices into `pts` (sorted by abscissa) of the lower convex hull vertices.
fn lower_hull(pts: &[(usize, Q)]) -> Vec<usize> {
    let mut h: Vec<usize> = Vec::new();
    for i in 0..pts.len() {
        while h.len() >= 2 {
            let (x1, y1) = &pts[h[h.len() - 2]];
            let (x2, y2) = &pts[h[h.len() - 1]];
            let (x3, y3) = &pts[i];
            // drop the middle point when it is on or above the chord
            let lhs = (y2 - y1) * Q::from_integer(BigInt::from(x3 - x1));
            let rhs = (y3 - y1) * Q::from_integer(BigInt::from(x2 - x1));
            if lhs >= rhs {
                h.pop();
            } else {
                break;
            }
        }
        h.push(i);
    }
    h
}

/// All roots of `Σ coeffs[i] Y^i`, grouped into branches.
pub fn find_roots(coeffs: &[Series], opts: &RootOptions) -> Result<Vec<RootBranch>> {
    let d = match coeffs.iter().rposition(|c| !c.is_zero()) {
        Some(d) => d,
        None => return Err(Error::Domain("the zero polynomial has every element as a root".into())),
    };
    if coeffs[d].is_unknown() {
        return Err(Error::TruncationInsufficient("leading coefficient is unknown".into()));
    }
    let mut f = Finder { opts, out: Vec::new(), steps: 0 };
    f.level(&coeffs[..=d], &Series::zero(), None, d)?;
    Ok(f.out)
}

/// Distinct real roots in increasing order, failing when some branch cannot be settled.
pub fn real_roots(coeffs: &[Series], opts: &RootOptions) -> Result<Vec<Series>> {
    let mut roots = Vec::new();
    for br in find_roots(coeffs, opts)? {
        match br {
            RootBranch::Real { root, .. } => roots.push(root),
            RootBranch::Complex { .. } => {}
            RootBranch::Irrational { prefix, valuation, .. } => {
                return Err(Error::Unsupported(format!(
                    "root {prefix} + c*t^{valuation} has an irrational leading coefficient c"
                )))
            }
            RootBranch::Unresolved { approx, count } => {
                return Err(Error::TruncationInsufficient(format!(
                    "{count} roots near {approx} could not be separated"
                )))
            }
        }
    }
    sort_series(&mut roots)?;
    roots.dedup_by(|a, b| a == b && a.is_exact());
    Ok(roots)
}

/// Like [`real_roots`] but raises the precision until all roots are pairwise comparable.
pub fn real_roots_separated(coeffs: &[Series], opts: &RootOptions) -> Result<Vec<Series>> {
    let mut o = opts.clone();
    // linear growth: coincident roots never separate, and cost grows fast with precision
    for _ in 0..2 {
        match real_roots(coeffs, &o) {
            Err(Error::Undecidable(_)) | Err(Error::TruncationInsufficient(_)) => {
                o.precision = &o.precision + &opts.precision;
            }
            other => return other,
        }
    }
    real_roots(coeffs, &o)
}

pub fn sort_series(xs: &mut [Series]) -> Result<()> {
    let mut err = None;
    xs.sort_by(|a, b| match a.compare(b) {
        Ok(o) => o,
        Err(e) => {
            if !(a.is_exact() && b.is_exact() && a == b) {
                err.get_or_insert(e);
            }
            Ordering::Equal
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Residual `p(r)` of a candidate root together with the valuation it must exceed.
pub fn residual_bound(coeffs: &[Series], root: &Series) -> Value {
    // p(r + e) - p(r) = Σ a_i((r+e)^i - r^i); with val(e) >= N each term has
    // valuation at least val(a_i) + (i-1) val(r) + N.
    let n = match root.trunc() {
        Value::Finite(n) => n.clone(),
        Value::Infinity => return Value::Infinity,
    };
    let vr = match root.val() {
        Value::Finite(v) => std::cmp::min(v, n.clone()),
        Value::Infinity => n.clone(),
    };
    let mut best = Value::Infinity;
    for (i, a) in coeffs.iter().enumerate().skip(1) {
        if let Value::Finite(va) = a.order_bound() {
            let b = &va + Q::from_integer(BigInt::from(i as i64 - 1)) * &vr + &n;
            best = std::cmp::min(best, Value::Finite(b));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;
    use crate::series::{q, qf};

    fn coeffs(text: &str) -> Vec<Series> {
        parse_poly(text).unwrap().univariate_coeffs()
    }

    fn opts() -> RootOptions {
        RootOptions::new(q(8))
    }

    #[test]
    fn square_root_of_t() {
        let r = real_roots(&coeffs("x^2 - t"), &opts()).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0], Series::monomial(q(-1), qf(1, 2)));
        assert_eq!(r[1], Series::monomial(q(1), qf(1, 2)));
        assert!(r[0].is_exact());
    }

    #[test]
    fn no_real_roots() {
        let br = find_roots(&coeffs("x^2 + t"), &opts()).unwrap();
        assert_eq!(br, vec![RootBranch::Complex { valuation: qf(1, 2), count: 2 }]);
        assert!(real_roots(&coeffs("x^2 + t"), &opts()).unwrap().is_empty());
    }

    #[test]
    fn quadratic_with_rational_expansion() {
        // x^2 - x - t: roots 1 + t - t^2 + ... and -t + t^2 - ...
        let p = coeffs("x^2 - x - t");
        let r = real_roots(&p, &opts()).unwrap();
        assert_eq!(r.len(), 2);
        for root in &r {
            assert_eq!(root.trunc(), &Value::Finite(q(8)));
            let res = eval_univariate(&p, root);
            assert!(res.order_bound() >= Value::Finite(q(8)), "{res}");
        }
        assert_eq!(r[0].lead().unwrap(), &(q(1), q(-1)));
        assert_eq!(r[1].lead().unwrap(), &(q(0), q(1)));
    }

    #[test]
    fn repeated_exact_root() {
        let br = find_roots(&coeffs("(x - t)^2 * (x + 1)"), &opts()).unwrap();
        assert!(br.contains(&RootBranch::Real { root: Series::t(), multiplicity: 2 }));
        assert!(br.contains(&RootBranch::Real { root: Series::int(-1), multiplicity: 1 }));
    }

    #[test]
    fn irrational_leading_coefficient() {
        assert!(matches!(real_roots(&coeffs("x^2 - 2"), &opts()), Err(Error::Unsupported(_))));
    }

    #[test]
    fn close_roots_beyond_precision() {
        // roots ±t^10 agree to precision 8 but are real and simple
        let br = find_roots(&coeffs("x^2 - t^20"), &opts()).unwrap();
        assert_eq!(br.len(), 2);
        assert!(br.iter().all(|b| matches!(b, RootBranch::Real { .. })));
        let sep = real_roots_separated(&coeffs("x^2 - t^20"), &opts()).unwrap();
        assert_eq!(sep.len(), 2);
    }
}
