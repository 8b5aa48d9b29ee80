//! Dense univariate polynomials over Q, coefficients stored low to high.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;

use crate::series::Q;

pub fn trim(p: &mut Vec<Q>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

pub fn trimmed(mut p: Vec<Q>) -> Vec<Q> {
    trim(&mut p);
    p
}

pub fn degree(p: &[Q]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

pub fn eval(p: &[Q], x: &Q) -> Q {
    p.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
}

pub fn sign_at(p: &[Q], x: &Q) -> Ordering {
    eval(p, x).cmp(&Q::zero())
}

pub fn derivative(p: &[Q]) -> Vec<Q> {
    trimmed(p.iter().enumerate().skip(1).map(|(i, c)| c * Q::from_integer(BigInt::from(i))).collect())
}

pub fn sub(a: &[Q], b: &[Q]) -> Vec<Q> {
    let n = a.len().max(b.len());
    let z = Q::zero();
    trimmed((0..n).map(|i| a.get(i).unwrap_or(&z) - b.get(i).unwrap_or(&z)).collect())
}

pub fn mul(a: &[Q], b: &[Q]) -> Vec<Q> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Q::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trimmed(out)
}

pub fn scale(p: &[Q], c: &Q) -> Vec<Q> {
    trimmed(p.iter().map(|x| x * c).collect())
}

pub fn monic(p: &[Q]) -> Vec<Q> {
    match p.last() {
        Some(l) if !l.is_zero() => p.iter().map(|c| c / l).collect(),
        _ => p.to_vec(),
    }
}

/// Polynomial long division; panics on a zero divisor.
pub fn div_rem(a: &[Q], b: &[Q]) -> (Vec<Q>, Vec<Q>) {
    let db = degree(b).expect("division by the zero polynomial");
    let mut r = trimmed(a.to_vec());
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let mut quot = vec![Q::zero(); r.len() - db];
    let lb = &b[db];
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let c = &r[dr] / lb;
        for i in 0..=db {
            let delta = &c * &b[i];
            r[dr - db + i] -= delta;
        }
        quot[dr - db] = c;
        trim(&mut r);
    }
    (trimmed(quot), r)
}

/// Monic gcd; the gcd of two zero polynomials is zero.
pub fn gcd(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut x = trimmed(a.to_vec());
    let mut y = trimmed(b.to_vec());
    while !y.is_empty() {
        let (_, r) = div_rem(&x, &y);
        x = y;
        y = r;
    }
    monic(&x)
}

/// Yun's algorithm: `p = c * Π f_m^m` with squarefree, pairwise coprime `f_m`.
pub fn squarefree_decomposition(p: &[Q]) -> Vec<(Vec<Q>, usize)> {
    let p = trimmed(p.to_vec());
    if degree(&p).unwrap_or(0) == 0 {
        return Vec::new();
    }
    let dp = derivative(&p);
    let mut a = gcd(&p, &dp);
    let mut b = div_rem(&p, &a).0;
    let mut c = div_rem(&dp, &a).0;
    let mut d = sub(&c, &derivative(&b));
    let mut out = Vec::new();
    let mut m = 1;
    loop {
        a = gcd(&b, &d);
        if degree(&a).unwrap_or(0) > 0 {
            out.push((monic(&a), m));
        }
        if degree(&b).unwrap_or(0) == 0 {
            break;
        }
        b = div_rem(&b, &a).0;
        c = div_rem(&d, &a).0;
        d = sub(&c, &derivative(&b));
        m += 1;
        if degree(&b).unwrap_or(0) == 0 {
            break;
        }
    }
    out
}

pub fn squarefree_part(p: &[Q]) -> Vec<Q> {
    let p = trimmed(p.to_vec());
    if degree(&p).unwrap_or(0) == 0 {
        return monic(&p);
    }
    monic(&div_rem(&p, &gcd(&p, &derivative(&p))).0)
}

pub fn sturm_sequence(p: &[Q]) -> Vec<Vec<Q>> {
    let mut seq = vec![trimmed(p.to_vec()), derivative(p)];
    loop {
        let n = seq.len();
        if seq[n - 1].is_empty() {
            seq.pop();
            break;
        }
        let (_, r) = div_rem(&seq[n - 2], &seq[n - 1]);
        if r.is_empty() {
            break;
        }
        seq.push(r.iter().map(|c| -c).collect());
    }
    seq
}

fn sign_changes(signs: impl Iterator<Item = Ordering>) -> usize {
    let mut last = Ordering::Equal;
    let mut n = 0;
    for s in signs {
        if s == Ordering::Equal {
            continue;
        }
        if last != Ordering::Equal && s != last {
            n += 1;
        }
        last = s;
    }
    n
}

fn lead_sign(p: &[Q], at_plus_inf: bool) -> Ordering {
    match degree(p) {
        None => Ordering::Equal,
        Some(d) => {
            let s = p[d].cmp(&Q::zero());
            if at_plus_inf || d % 2 == 0 {
                s
            } else {
                s.reverse()
            }
        }
    }
}

/// Number of distinct real roots.
pub fn count_real_roots(p: &[Q]) -> usize {
    let seq = sturm_sequence(&squarefree_part(p));
    let at_neg = sign_changes(seq.iter().map(|q| lead_sign(q, false)));
    let at_pos = sign_changes(seq.iter().map(|q| lead_sign(q, true)));
    at_neg - at_pos
}

/// Number of distinct real roots in the half-open interval `(a, b]`.
pub fn count_roots_in(p: &[Q], a: &Q, b: &Q) -> usize {
    let seq = sturm_sequence(&squarefree_part(p));
    let va = sign_changes(seq.iter().map(|q| sign_at(q, a)));
    let vb = sign_changes(seq.iter().map(|q| sign_at(q, b)));
    va.saturating_sub(vb)
}

/// Cauchy bound: every root has absolute value below the result.
pub fn root_bound(p: &[Q]) -> Q {
    let d = match degree(p) {
        Some(d) if d > 0 => d,
        _ => return Q::one(),
    };
    let lead = p[d].abs();
    let m = p[..d].iter().map(|c| c.abs() / &lead).max().unwrap_or_else(Q::zero);
    Q::one() + m
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    if n.is_zero() {
        return vec![BigInt::one()];
    }
    let mut factors: Vec<(BigInt, u32)> = Vec::new();
    let mut rest = n.clone();
    let mut p = BigInt::from(2);
    let limit = BigInt::from(20_000);
    while &p * &p <= rest && p <= limit {
        let mut e = 0;
        while (&rest % &p).is_zero() {
            rest /= &p;
            e += 1;
        }
        if e > 0 {
            factors.push((p.clone(), e));
        }
        p += 1;
    }
    if rest > BigInt::one() {
        // may be composite beyond the trial limit; missing divisors only
        // cost rational roots, which then surface as unsupported irrationals
        factors.push((rest, 1));
    }
    let mut out = vec![BigInt::one()];
    for (f, e) in factors {
        let mut next = Vec::new();
        for d in &out {
            let mut x = d.clone();
            for _ in 0..=e {
                next.push(x.clone());
                x *= &f;
            }
        }
        out = next;
    }
    out
}

/// Integer polynomial with the same roots.
pub fn clear_denominators(p: &[Q]) -> Vec<BigInt> {
    let l = p.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    p.iter().map(|c| (c * Q::from_integer(l.clone())).to_integer()).collect()
}

/// Distinct rational roots of a nonzero polynomial, ascending.
pub fn rational_roots_simple(p: &[Q]) -> Vec<Q> {
    let p = trimmed(p.to_vec());
    let mut out = Vec::new();
    let Some(_) = degree(&p) else { return out };
    let lowest = p.iter().position(|c| !c.is_zero()).unwrap();
    if lowest > 0 {
        out.push(Q::zero());
    }
    let core = &p[lowest..];
    if let Some(rs) = closed_form_roots(core) {
        for r in rs {
            if !out.contains(&r) {
                out.push(r);
            }
        }
    } else if core.len() > 1 {
        let ints = clear_denominators(core);
        let a0 = &ints[0];
        let an = ints.last().unwrap();
        for num in divisors(a0) {
            for den in divisors(an) {
                for sgn in [1, -1] {
                    let r = Q::new(BigInt::from(sgn) * &num, den.clone());
                    if eval(core, &r).is_zero() && !out.contains(&r) {
                        out.push(r);
                    }
                }
            }
        }
    }
    out.sort();
    out
}

/// Exact `k`-th root of a non-negative rational, if rational.
fn rational_nth_root(x: &Q, k: u32) -> Option<Q> {
    let root = |n: &BigInt| {
        let r = n.nth_root(k);
        (num_traits::pow(r.clone(), k as usize) == *n).then_some(r)
    };
    Some(Q::new(root(x.numer())?, root(x.denom())?))
}

/// Rational roots of linear, binomial and quadratic polynomials without factoring.
fn closed_form_roots(p: &[Q]) -> Option<Vec<Q>> {
    let d = p.len() - 1;
    if d == 0 {
        return Some(Vec::new());
    }
    if p[1..d].iter().all(|c| c.is_zero()) {
        // a X^d + b
        let v = -(&p[0] / &p[d]);
        let k = d as u32;
        let mut out = Vec::new();
        if v.is_negative() {
            if d % 2 == 1 {
                out.extend(rational_nth_root(&-v, k).map(|r| -r));
            }
        } else if let Some(r) = rational_nth_root(&v, k) {
            if d % 2 == 0 && !r.is_zero() {
                out.push(-r.clone());
            }
            out.push(r);
        }
        return Some(out);
    }
    if d == 2 {
        let (a, b, c) = (&p[2], &p[1], &p[0]);
        let disc = b * b - Q::from_integer(BigInt::from(4)) * a * c;
        if disc.is_negative() {
            return Some(Vec::new());
        }
        let Some(sq) = rational_nth_root(&disc, 2) else { return Some(Vec::new()) };
        let two_a = a * Q::from_integer(BigInt::from(2));
        return Some(vec![(-b - &sq) / &two_a, (-b + sq) / two_a]);
    }
    None
}

/// Rational roots with multiplicities, plus the cofactor free of rational roots.
pub fn rational_roots(p: &[Q]) -> (Vec<(Q, usize)>, Vec<Q>) {
    let mut rest = trimmed(p.to_vec());
    let mut out = Vec::new();
    for r in rational_roots_simple(&rest) {
        let lin = vec![-r.clone(), Q::one()];
        let mut m = 0;
        loop {
            let (quot, rem) = div_rem(&rest, &lin);
            if !rem.is_empty() {
                break;
            }
            rest = quot;
            m += 1;
        }
        out.push((r, m));
    }
    (out, rest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{q, qf};

    fn p(cs: &[i64]) -> Vec<Q> {
        cs.iter().map(|&c| q(c)).collect()
    }

    #[test]
    fn division_identity() {
        let a = p(&[1, 0, -3, 2, 5]);
        let b = p(&[2, 1, 1]);
        let (quot, r) = div_rem(&a, &b);
        let back = sub(&a, &mul(&quot, &b));
        assert_eq!(back, r);
        assert!(degree(&r).map_or(true, |d| d < 2));
    }

    #[test]
    fn yun_multiplicities() {
        // (x-1)^2 (x+2)^3 x
        let f = mul(&mul(&mul(&p(&[-1, 1]), &p(&[-1, 1])), &mul(&p(&[2, 1]), &mul(&p(&[2, 1]), &p(&[2, 1])))), &p(&[0, 1]));
        let dec = squarefree_decomposition(&f);
        let mults: Vec<usize> = dec.iter().map(|(_, m)| *m).collect();
        assert_eq!(mults, vec![1, 2, 3]);
        let (roots, rest) = rational_roots(&f);
        assert_eq!(roots, vec![(q(-2), 3), (q(0), 1), (q(1), 2)]);
        assert_eq!(degree(&rest), Some(0));
    }

    #[test]
    fn sturm_counts() {
        // x^2 - 2: two irrational roots, x^2 + 1: none
        assert_eq!(count_real_roots(&p(&[-2, 0, 1])), 2);
        assert_eq!(count_real_roots(&p(&[1, 0, 1])), 0);
        assert_eq!(count_roots_in(&p(&[-2, 0, 1]), &q(0), &q(2)), 1);
        assert_eq!(rational_roots_simple(&p(&[-2, 0, 1])), Vec::<Q>::new());
        assert_eq!(rational_roots_simple(&[qf(-1, 4), q(0), q(1)]), vec![qf(-1, 2), qf(1, 2)]);
    }
}
