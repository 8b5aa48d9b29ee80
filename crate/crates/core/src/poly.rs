//! Multivariate polynomials with Puiseux-series coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::series::{Q, Series, Value};

pub type Exponents = Vec<u32>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyExpr {
    vars: Vec<String>,
    terms: BTreeMap<Exponents, Series>,
}

pub fn default_var_names(n: usize) -> Vec<String> {
    const NAMES: [&str; 4] = ["x", "y", "z", "w"];
    if n <= NAMES.len() {
        NAMES[..n].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=n).map(|i| format!("x{i}")).collect()
    }
}

impl PolyExpr {
    pub fn zero(vars: Vec<String>) -> Self {
        PolyExpr { vars, terms: BTreeMap::new() }
    }

    pub fn zero_n(n: usize) -> Self {
        Self::zero(default_var_names(n))
    }

    pub fn constant(vars: Vec<String>, c: Series) -> Self {
        let n = vars.len();
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(vec![0; n], c);
        }
        p
    }

    pub fn var(vars: Vec<String>, i: usize) -> Self {
        let n = vars.len();
        let mut e = vec![0; n];
        e[i] = 1;
        let mut p = Self::zero(vars);
        p.terms.insert(e, Series::one());
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Exponents, Series)>>(vars: Vec<String>, terms: I) -> Self {
        let mut p = Self::zero(vars);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, e: Exponents, c: Series) {
        assert_eq!(e.len(), self.vars.len(), "exponent arity");
        let entry = self.terms.entry(e.clone()).or_insert_with(Series::zero);
        *entry = &*entry + &c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn terms(&self) -> &BTreeMap<Exponents, Series> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&k| k == 0))
    }

    pub fn constant_term(&self) -> Series {
        self.terms.get(&vec![0; self.nvars()]).cloned().unwrap_or_else(Series::zero)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    /// Same polynomial with renamed (or re-embedded) variables.
    pub fn with_vars(&self, vars: Vec<String>) -> PolyExpr {
        assert_eq!(vars.len(), self.nvars());
        PolyExpr { vars, terms: self.terms.clone() }
    }

    /// Embeds into a larger variable list; `map[i]` is the new index of variable `i`.
    pub fn embed(&self, vars: Vec<String>, map: &[usize]) -> PolyExpr {
        let n = vars.len();
        let mut out = PolyExpr::zero(vars);
        for (e, c) in &self.terms {
            let mut ne = vec![0; n];
            for (i, &k) in e.iter().enumerate() {
                ne[map[i]] += k;
            }
            out.add_term(ne, c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Series) -> PolyExpr {
        PolyExpr::from_terms(self.vars.clone(), self.terms.iter().map(|(e, k)| (e.clone(), k * c)))
    }

    pub fn pow(&self, n: u32) -> PolyExpr {
        let mut acc = PolyExpr::constant(self.vars.clone(), Series::one());
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn eval(&self, point: &[Series]) -> Series {
        assert_eq!(point.len(), self.nvars(), "point arity");
        let mut powers: Vec<Vec<Series>> = Vec::with_capacity(point.len());
        for (i, x) in point.iter().enumerate() {
            let d = self.degree_in(i) as usize;
            let mut pw = Vec::with_capacity(d + 1);
            pw.push(Series::one());
            for k in 1..=d {
                let next = &pw[k - 1] * x;
                pw.push(next);
            }
            powers.push(pw);
        }
        let mut acc = Series::zero();
        for (e, c) in &self.terms {
            let mut m = c.clone();
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    m = &m * &powers[i][k as usize];
                }
            }
            acc = &acc + &m;
        }
        acc
    }

    /// Formal partial derivative in variable `i`.
    pub fn partial(&self, i: usize) -> PolyExpr {
        let mut out = PolyExpr::zero(self.vars.clone());
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut ne = e.clone();
            ne[i] -= 1;
            let k = Q::from_integer(e[i].into());
            out.add_term(ne, c.scale(&k, &Q::zero()));
        }
        out
    }

    pub fn gradient(&self) -> Vec<PolyExpr> {
        (0..self.nvars()).map(|i| self.partial(i)).collect()
    }

    /// Substitutes `subs[i]` for variable `i`; the result lives over the
    /// variables of the substituted polynomials.
    pub fn compose(&self, subs: &[PolyExpr]) -> PolyExpr {
        assert_eq!(subs.len(), self.nvars());
        let target = subs
            .first()
            .map(|p| p.vars.clone())
            .unwrap_or_default();
        let mut powers: Vec<Vec<PolyExpr>> = Vec::new();
        for (i, s) in subs.iter().enumerate() {
            let d = self.degree_in(i) as usize;
            let mut pw = vec![PolyExpr::constant(target.clone(), Series::one())];
            for k in 1..=d {
                let next = &pw[k - 1] * s;
                pw.push(next);
            }
            powers.push(pw);
        }
        let mut acc = PolyExpr::zero(target.clone());
        for (e, c) in &self.terms {
            let mut m = PolyExpr::constant(target.clone(), c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    m = &m * &powers[i][k as usize];
                }
            }
            acc = &acc + &m;
        }
        acc
    }

    /// `self(p + y)` as a polynomial in `y`.
    pub fn shift(&self, p: &[Series]) -> PolyExpr {
        let subs: Vec<PolyExpr> = (0..self.nvars())
            .map(|i| {
                &PolyExpr::var(self.vars.clone(), i) + &PolyExpr::constant(self.vars.clone(), p[i].clone())
            })
            .collect();
        self.compose(&subs)
    }

    pub fn homogeneous_part(&self, degree: u32) -> PolyExpr {
        PolyExpr::from_terms(
            self.vars.clone(),
            self.terms
                .iter()
                .filter(|(e, _)| e.iter().sum::<u32>() == degree)
                .map(|(e, c)| (e.clone(), c.clone())),
        )
    }

    /// Lowest-degree nonzero homogeneous component.
    pub fn lowest_form(&self) -> PolyExpr {
        match self.terms.keys().map(|e| e.iter().sum::<u32>()).min() {
            Some(d) => self.homogeneous_part(d),
            None => self.clone(),
        }
    }

    /// Coefficients `[a_0, a_1, ...]` of `self` as a polynomial in variable `var`
    /// after substituting `values` for the remaining variables (`values[var]` ignored).
    pub fn specialize(&self, var: usize, values: &[Series]) -> Vec<Series> {
        let d = self.degree_in(var) as usize;
        let mut coeffs = vec![Series::zero(); d + 1];
        for (e, c) in &self.terms {
            let mut m = c.clone();
            for (i, &k) in e.iter().enumerate() {
                if i != var && k > 0 {
                    m = &m * &values[i].pow(k);
                }
            }
            let slot = &mut coeffs[e[var] as usize];
            *slot = &*slot + &m;
        }
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        coeffs
    }

    /// Substitutes the given values; unsubstituted variables stay symbolic.
    pub fn substitute(&self, values: &[Option<Series>]) -> PolyExpr {
        let mut out = PolyExpr::zero(self.vars.clone());
        for (e, c) in &self.terms {
            let mut m = c.clone();
            let mut ne = e.clone();
            for (i, &k) in e.iter().enumerate() {
                if let (Some(v), true) = (&values[i], k > 0) {
                    m = &m * &v.pow(k);
                    ne[i] = 0;
                }
            }
            out.add_term(ne, m);
        }
        out
    }

    /// Indices of variables that actually occur.
    pub fn support(&self) -> Vec<usize> {
        (0..self.nvars()).filter(|&i| self.degree_in(i) > 0).collect()
    }

    /// Univariate coefficient list; panics unless the polynomial has one variable.
    pub fn univariate_coeffs(&self) -> Vec<Series> {
        assert_eq!(self.nvars(), 1, "univariate polynomial expected");
        self.specialize(0, &[Series::zero()])
    }

    pub fn from_univariate(var: &str, coeffs: &[Series]) -> PolyExpr {
        PolyExpr::from_terms(
            vec![var.to_string()],
            coeffs.iter().enumerate().map(|(i, c)| (vec![i as u32], c.clone())),
        )
    }

    pub fn has_rational_coefficients(&self) -> bool {
        self.terms.values().all(|c| c.as_rational().is_some())
    }

    /// Minimum coefficient valuation (`+∞` for the zero polynomial).
    pub fn coefficient_val(&self) -> Value {
        self.terms.values().map(|c| c.val()).min().unwrap_or(Value::Infinity)
    }

    pub fn map_coeffs(&self, f: impl Fn(&Series) -> Series) -> PolyExpr {
        PolyExpr::from_terms(self.vars.clone(), self.terms.iter().map(|(e, c)| (e.clone(), f(c))))
    }
}

impl Add for &PolyExpr {
    type Output = PolyExpr;
    fn add(self, rhs: &PolyExpr) -> PolyExpr {
        assert_eq!(self.nvars(), rhs.nvars(), "variable mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &PolyExpr {
    type Output = PolyExpr;
    fn sub(self, rhs: &PolyExpr) -> PolyExpr {
        self + &(-rhs)
    }
}

impl Neg for &PolyExpr {
    type Output = PolyExpr;
    fn neg(self) -> PolyExpr {
        self.map_coeffs(|c| -c)
    }
}

impl Mul for &PolyExpr {
    type Output = PolyExpr;
    fn mul(self, rhs: &PolyExpr) -> PolyExpr {
        assert_eq!(self.nvars(), rhs.nvars(), "variable mismatch");
        let mut out = PolyExpr::zero(self.vars.clone());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Exponents = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for PolyExpr {
            type Output = PolyExpr;
            fn $m(self, rhs: PolyExpr) -> PolyExpr {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

fn coefficient_text(c: &Series) -> (bool, String) {
    // (negative?, magnitude text) for single-term coefficients
    if c.is_exact() && c.terms().len() == 1 {
        let (_, k) = &c.terms()[0];
        let neg = k < &Q::zero();
        let mag = if neg { -c } else { c.clone() };
        return (neg, mag.to_string());
    }
    (false, format!("({c})"))
}

impl fmt::Display for PolyExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let (neg, mag) = coefficient_text(c);
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else if neg {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            first = false;
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| if k == 1 { self.vars[i].clone() } else { format!("{}^{k}", self.vars[i]) })
                .collect();
            if mono.is_empty() {
                f.write_str(&mag)?;
            } else {
                if mag != "1" {
                    write!(f, "{mag}*")?;
                }
                f.write_str(&mono.join("*"))?;
            }
        }
        Ok(())
    }
}

pub fn is_one(c: &Series) -> bool {
    c.as_rational().is_some_and(|r| r.is_one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;

    #[test]
    fn eval_examples() {
        let p = parse_poly("x^2 - t").unwrap();
        assert!(p.eval(&[Series::parse("t^(1/2)").unwrap()]).is_zero());
        let p = parse_poly("x + y").unwrap();
        assert_eq!(p.eval(&[Series::one(), Series::t()]), Series::parse("1 + t").unwrap());
        let p = parse_poly("x*y").unwrap();
        let v = p.eval(&[Series::parse("1 + t").unwrap(), Series::parse("1 - t").unwrap()]);
        assert_eq!(v, Series::parse("1 - t^2").unwrap());
    }

    #[test]
    fn gradients() {
        let g = parse_poly("x^2").unwrap().gradient();
        assert_eq!(g[0].to_string(), "2*x");
        let g = parse_poly("x*y").unwrap().gradient();
        assert_eq!(g[0].to_string(), "y");
        assert_eq!(g[1].to_string(), "x");
        let c = crate::parse::parse_poly_vars("5", &["x".into(), "y".into()]).unwrap();
        assert!(c.gradient().iter().all(|p| p.is_zero()));
    }

    #[test]
    fn shift_and_lowest_form() {
        let f = parse_poly("x^2 + y^2 - 1").unwrap();
        let lf = f.shift(&[Series::one(), Series::zero()]).lowest_form();
        assert_eq!(lf.to_string(), "2*x");
    }
}
