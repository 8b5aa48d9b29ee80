//! The Jacobian property: mean-value check, a partition on which the class of
//! the gradient is constant, witnesses and margin checks on sampled pairs.

use std::fmt;

use num_traits::Zero;
use rand::Rng;
use serde::Serialize;

use crate::cells::{fiber_code, FiberCode};
use crate::error::{Error, Result};
use crate::formula::{sample_piece, AtomicCondition, DefinablePiece, Rel, SampleConfig, Sampler};
use crate::poly::PolyExpr;
use crate::roots::{real_roots, RootOptions};
use crate::rv::{res, rvo, rvo_n, RvElement, RvNElement};
use crate::series::{dot, sub_tuple, val_tuple, Q, Series, Value};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct JpReport {
    pub piece: String,
    pub z: Vec<Series>,
    pub pairs: usize,
    pub min_margin: Value,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violating_pair: Option<(Vec<Series>, Vec<Series>)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MeanValueReport {
    pub g: String,
    pub residue: String,
    pub pairs: usize,
    pub min_margin: Value,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violating_pair: Option<(Series, Series)>,
}

fn margin_min(acc: &mut Option<Value>, m: Value) -> bool {
    let smaller = acc.as_ref().is_none_or(|a| m < *a);
    if smaller {
        *acc = Some(m);
    }
    smaller
}

/// A random element of O_R, often with a nonzero constant term.
pub fn sample_o(s: &mut Sampler) -> Series {
    let mut x = Series::zero();
    if s.rng_bool(0.8) {
        x = Series::constant(s.coeff());
    }
    let k = s.rng.gen_range(0..=2);
    for _ in 0..k {
        let e = s.exponent_above(&Q::zero());
        x = &x + &Series::monomial(s.coeff(), e);
    }
    x
}

fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Smallest sample size with at least `pairs` distinct pairs.
fn points_for(pairs: usize) -> usize {
    let mut k = 2;
    while pair_count(k) < pairs {
        k += 1;
    }
    k
}

/// Checks `val(g(x) - g(x') - g'(0)(x - x')) > val(x - x')` for univariate `g`
/// on sampled pairs of O_R, after verifying that `g` maps the samples into O_R
/// and that `res(g')` is constant on them.
pub fn mean_value_check(g: &PolyExpr, pairs: usize, seed: u64, cfg: &SampleConfig) -> Result<MeanValueReport> {
    if g.nvars() != 1 {
        return Err(Error::Input(format!("expected a univariate map, got {} variables", g.nvars())));
    }
    let dg = g.partial(0);
    let mut s = Sampler::new(cfg, seed);
    let k = points_for(pairs);
    let mut xs: Vec<Series> = Vec::with_capacity(k);
    let mut attempts = 0;
    while xs.len() < k {
        attempts += 1;
        if attempts > cfg.max_attempts {
            return Err(Error::Exhausted { attempts });
        }
        let x = sample_o(&mut s);
        if !xs.contains(&x) {
            xs.push(x);
        }
    }
    let gx: Vec<Series> = xs.iter().map(|x| g.eval(std::slice::from_ref(x))).collect();
    let mut residue: Option<Q> = None;
    for (x, y) in xs.iter().zip(&gx) {
        if y.val_checked()? < Value::Finite(Q::zero()) {
            return Err(Error::Precondition(format!("g({x}) = {y} lies outside O_R")));
        }
        let d = dg.eval(std::slice::from_ref(x));
        let r = res(&d).map_err(|e| match e {
            Error::Domain(_) => Error::Precondition(format!("g'({x}) = {d} lies outside O_R")),
            e => e,
        })?;
        match &residue {
            None => residue = Some(r),
            Some(r0) if *r0 != r => {
                return Err(Error::Precondition(format!("res(g') is not constant: {r0} and {r} (at x = {x})")));
            }
            _ => {}
        }
    }
    let slope = dg.eval(&[Series::zero()]);
    let mut min: Option<Value> = None;
    let mut violating = None;
    let mut checked = 0;
    'outer: for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            if checked >= pairs {
                break 'outer;
            }
            checked += 1;
            let dx = &xs[i] - &xs[j];
            let lhs = &(&gx[i] - &gx[j]) - &(&slope * &dx);
            let m = lhs.val_checked()?.sub(&dx.val()).unwrap_or(Value::Infinity);
            let fails = m <= Value::Finite(Q::zero());
            if margin_min(&mut min, m) && fails {
                violating = Some((xs[i].clone(), xs[j].clone()));
            }
        }
    }
    let min_margin = min.unwrap_or(Value::Infinity);
    let verdict = if min_margin > Value::Finite(Q::zero()) { Verdict::Holds } else { Verdict::Violated };
    Ok(MeanValueReport {
        g: g.to_string(),
        residue: residue.map_or("-".into(), |r| r.to_string()),
        pairs: checked,
        min_margin,
        verdict,
        violating_pair: violating,
    })
}

/// Data fixing a piece: per coordinate, the nearest centre and the class of
/// the offset from it; per gradient coordinate, its class.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct JpCode {
    pub boxes: Vec<FiberCode>,
    pub grad: Vec<RvElement>,
}

/// Partition of a domain into boxes around coordinate centres, refined by the
/// classes of the gradient coordinates. Pieces are fibers of [`JpPartition::code`].
#[derive(Clone, Debug)]
pub struct JpPartition {
    pub f: PolyExpr,
    pub domain: DefinablePiece,
    pub centres: Vec<Vec<Series>>,
    pub grad: Vec<PolyExpr>,
}

fn linear_root(p: &PolyExpr, i: usize) -> Option<Series> {
    if p.support() != vec![i] || p.degree_in(i) != 1 {
        return None;
    }
    let c = p.specialize(i, &vec![Series::zero(); p.nvars()]);
    let a1 = c[1].as_rational()?;
    let a0 = c[0].as_rational()?;
    Some(Series::constant(-a0 / a1))
}

pub fn jp_partition_build(f: &PolyExpr, domain: &DefinablePiece, opts: &RootOptions) -> Result<JpPartition> {
    let n = f.nvars();
    if domain.dim() != n {
        return Err(Error::Input(format!("domain has {} variables, map has {n}", domain.dim())));
    }
    let grad = f.gradient();
    let mut centres: Vec<Vec<Series>> = vec![vec![Series::zero()]; n];
    let push = |i: usize, c: Series, centres: &mut Vec<Vec<Series>>| {
        if !centres[i].contains(&c) {
            centres[i].push(c);
        }
    };
    for a in &domain.atoms {
        for i in 0..n {
            if let Some(c) = linear_root(a.poly(), i) {
                push(i, c, &mut centres);
            }
        }
    }
    if n == 1 && !grad[0].is_zero() {
        // critical points separate the monotone branches
        if let Ok(rs) = real_roots(&grad[0].univariate_coeffs(), opts) {
            for r in rs.into_iter().filter(|r| r.is_exact()) {
                push(0, r, &mut centres);
            }
        }
    }
    Ok(JpPartition { f: f.clone(), domain: domain.clone(), centres, grad })
}

impl JpPartition {
    pub fn code(&self, x: &[Series]) -> Result<JpCode> {
        let boxes = x.iter().zip(&self.centres).map(|(xi, s)| fiber_code(s, xi)).collect::<Result<Vec<_>>>()?;
        let grad = self.grad.iter().map(|g| rvo(&g.eval(x))).collect::<Result<Vec<_>>>()?;
        Ok(JpCode { boxes, grad })
    }

    pub fn contains(&self, code: &JpCode, x: &[Series]) -> Result<bool> {
        Ok(self.domain.contains(x)? && self.code(x)? == *code)
    }

    /// The piece as a conjunction of atoms.
    pub fn piece(&self, code: &JpCode) -> DefinablePiece {
        let vars = self.f.vars().to_vec();
        let mut piece = self.domain.clone();
        for (i, b) in code.boxes.iter().enumerate() {
            let xi = PolyExpr::var(vars.clone(), i);
            let off = |c: &Series| &xi - &PolyExpr::constant(vars.clone(), c.clone());
            let s = &self.centres[i];
            let cls = &b.class;
            let atom = match cls {
                RvElement::Zero => AtomicCondition::Sign { p: off(&s[b.index]), rel: Rel::Eq },
                _ => AtomicCondition::Rv { p: off(&s[b.index]), rel: Rel::Eq, xi: cls.clone() },
            };
            piece = piece.with_atom(atom);
            if let Value::Finite(g) = cls.val() {
                for (j, c) in s.iter().enumerate() {
                    if j != b.index {
                        let rel = if j < b.index { Rel::Lt } else { Rel::Le };
                        piece = piece.with_atom(AtomicCondition::Val { p: off(c), rel, gamma: Value::Finite(g.clone()) });
                    }
                }
            }
        }
        for (g, cls) in self.grad.iter().zip(&code.grad) {
            if g.is_constant() {
                continue;
            }
            piece = piece.with_atom(match cls {
                RvElement::Zero => AtomicCondition::Sign { p: g.clone(), rel: Rel::Eq },
                _ => AtomicCondition::Rv { p: g.clone(), rel: Rel::Eq, xi: cls.clone() },
            });
        }
        piece
    }

    /// Whether the piece is open: no coordinate pinned to a centre and no
    /// nonconstant gradient coordinate forced to vanish.
    pub fn full_dimensional(&self, code: &JpCode) -> bool {
        code.boxes.iter().all(|b| !b.class.is_zero())
            && self.grad.iter().zip(&code.grad).all(|(g, c)| g.is_constant() || !c.is_zero())
            && !self.domain.atoms.iter().any(|a| a.is_equation() && !a.poly().is_constant())
    }

    /// Distinct codes met by sampled domain points, in order of appearance.
    pub fn pieces_from_samples(&self, count: usize, seed: u64, cfg: &SampleConfig) -> Result<Vec<JpCode>> {
        let pts = sample_piece(&self.domain, count, seed, cfg)?;
        let mut out: Vec<JpCode> = Vec::new();
        for p in pts {
            // points too close to a truncated centre cannot be coded
            let Ok(c) = self.code(&p) else { continue };
            if !out.contains(&c) {
                out.push(c);
            }
        }
        Ok(out)
    }

    /// Points of the piece: offsets drawn from each box, then filtered by the full code.
    pub fn sample(&self, code: &JpCode, count: usize, seed: u64, cfg: &SampleConfig) -> Result<Vec<Vec<Series>>> {
        let mut s = Sampler::new(cfg, seed);
        let mut out: Vec<Vec<Series>> = Vec::with_capacity(count);
        let mut attempts = 0;
        while out.len() < count {
            if attempts >= cfg.max_attempts {
                if out.len() >= 2 {
                    break;
                }
                return Err(Error::Exhausted { attempts });
            }
            attempts += 1;
            let x: Vec<Series> = code
                .boxes
                .iter()
                .enumerate()
                .map(|(i, b)| &self.centres[i][b.index] + &(&b.class.representative() * &s.unit_factor()))
                .collect();
            if out.contains(&x) {
                continue;
            }
            if matches!(self.contains(code, &x), Ok(true)) {
                out.push(x);
            }
        }
        Ok(out)
    }
}

impl fmt::Display for JpCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b: Vec<String> = self.boxes.iter().map(|b| format!("{}:{}", b.index, b.class)).collect();
        let g: Vec<String> = self.grad.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}] grad [{}]", b.join(", "), g.join(", "))
    }
}

/// Leading monomial of each gradient coordinate at the first sample, after
/// checking that the class of the gradient is the same at every sample.
pub fn jp_witness(f: &PolyExpr, samples: &[Vec<Series>]) -> Result<Vec<Series>> {
    let grad = f.gradient();
    let first = samples.first().ok_or_else(|| Error::Input("no samples".into()))?;
    let gv = |x: &[Series]| -> Vec<Series> { grad.iter().map(|g| g.eval(x)).collect() };
    let g0 = gv(first);
    let cls = rvo_n(&g0)?;
    for x in &samples[1..] {
        let c = rvo_n(&gv(x))?;
        if c != cls {
            return Err(Error::Precondition(format!("gradient class varies on the piece: {cls} and {c}")));
        }
    }
    if cls == RvNElement::Zero {
        return Err(Error::Precondition("the gradient class is zero".into()));
    }
    g0.iter().map(|g| Ok(rvo(g)?.representative())).collect()
}

/// Margins `val(f(x) - f(x') - <z, x - x'>) - val(z) - val(x - x')` over up to
/// `pairs` distinct pairs of `samples`.
pub fn jp_check(f: &PolyExpr, piece: &str, z: &[Series], samples: &[Vec<Series>], pairs: usize) -> Result<JpReport> {
    if samples.len() < 2 {
        return Err(Error::Input("at least two sample points are needed".into()));
    }
    let fx: Vec<Series> = samples.iter().map(|x| f.eval(x)).collect();
    let vz = val_tuple(z);
    let mut min: Option<Value> = None;
    let mut violating = None;
    let mut checked = 0;
    'outer: for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            if checked >= pairs {
                break 'outer;
            }
            checked += 1;
            let d = sub_tuple(&samples[i], &samples[j]);
            let lhs = &(&fx[i] - &fx[j]) - &dot(z, &d);
            let rhs = match (&vz, val_tuple(&d)) {
                (Value::Finite(a), Value::Finite(b)) => Value::Finite(a + b),
                _ => Value::Infinity,
            };
            let m = lhs.val_checked()?.sub(&rhs).unwrap_or(Value::Infinity);
            let fails = m <= Value::Finite(Q::zero());
            if margin_min(&mut min, m) && fails {
                violating = Some((samples[i].clone(), samples[j].clone()));
            }
        }
    }
    let min_margin = min.unwrap_or(Value::Infinity);
    let verdict = if min_margin > Value::Finite(Q::zero()) { Verdict::Holds } else { Verdict::Violated };
    Ok(JpReport { piece: piece.to_string(), z: z.to_vec(), pairs: checked, min_margin, verdict, violating_pair: violating })
}

fn skipped(piece: String) -> JpReport {
    JpReport { piece, z: Vec::new(), pairs: 0, min_margin: Value::Infinity, verdict: Verdict::Skipped, violating_pair: None }
}

/// Builds the partition, then witnesses and checks every piece met by `pieces`
/// domain samples. Lower-dimensional pieces and constant maps are skipped.
pub fn jp_run(
    f: &PolyExpr,
    domain: &DefinablePiece,
    pieces: usize,
    pairs: usize,
    seed: u64,
    cfg: &SampleConfig,
) -> Result<Vec<JpReport>> {
    let opts = RootOptions::new(cfg.precision.clone());
    let part = jp_partition_build(f, domain, &opts)?;
    let codes = part.pieces_from_samples(pieces, seed, cfg)?;
    let mut out = Vec::with_capacity(codes.len());
    for (k, code) in codes.iter().enumerate() {
        let id = part.piece(code).to_string();
        if f.is_constant() || !part.full_dimensional(code) || code.grad.iter().all(|c| c.is_zero()) {
            out.push(skipped(id));
            continue;
        }
        let sub_seed = seed.wrapping_add(1 + k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        let pts = part.sample(code, points_for(pairs), sub_seed, cfg)?;
        let z = jp_witness(f, &pts)?;
        out.push(jp_check(f, &id, &z, &pts, pairs)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula_vars;
    use crate::parse::parse_poly_vars;
    use crate::series::q;

    fn vars(n: usize) -> Vec<String> {
        ["x", "y", "z"][..n].iter().map(|s| s.to_string()).collect()
    }

    fn poly(text: &str, n: usize) -> PolyExpr {
        parse_poly_vars(text, &vars(n)).unwrap()
    }

    fn dom(text: &str, n: usize) -> DefinablePiece {
        parse_formula_vars(text, Some(&vars(n))).unwrap()
    }

    #[test]
    fn mean_value_examples() {
        let cfg = SampleConfig::default();
        let r = mean_value_check(&poly("x + t*x^2", 1), 300, 1, &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(r.min_margin >= Value::Finite(q(1)));
        let r = mean_value_check(&poly("x", 1), 50, 1, &cfg).unwrap();
        assert_eq!(r.min_margin, Value::Infinity);
        assert!(matches!(mean_value_check(&poly("x^2", 1), 50, 1, &cfg), Err(Error::Precondition(_))));
    }

    #[test]
    fn witnesses() {
        let cfg = SampleConfig::default();
        let opts = RootOptions::new(q(8));
        let f = poly("x^2", 1);
        let part = jp_partition_build(&f, &dom("rv(x) = 1", 1), &opts).unwrap();
        let code = part.code(&[Series::parse("1 + t").unwrap()]).unwrap();
        let pts = part.sample(&code, 20, 3, &cfg).unwrap();
        assert_eq!(jp_witness(&f, &pts).unwrap(), vec![Series::int(2)]);

        let f = poly("x*y", 2);
        let part = jp_partition_build(&f, &dom("rv(x) = 1 & rv(y) = 1", 2), &opts).unwrap();
        let codes = part.pieces_from_samples(40, 5, &cfg).unwrap();
        assert_eq!(codes.len(), 1);
        let pts = part.sample(&codes[0], 20, 3, &cfg).unwrap();
        let z = jp_witness(&f, &pts).unwrap();
        assert_eq!(z, vec![Series::one(), Series::one()]);
        let r = jp_check(&f, "p", &z, &pts, 150).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);

        let f = poly("2*x - 3*y", 2);
        let part = jp_partition_build(&f, &dom("0 = 0", 2), &opts).unwrap();
        let pts = part.sample(&part.code(&[Series::one(), Series::one()]).unwrap(), 10, 1, &cfg).unwrap();
        let z = jp_witness(&f, &pts).unwrap();
        assert_eq!(z, vec![Series::int(2), Series::int(-3)]);
        assert_eq!(jp_check(&f, "p", &z, &pts, 45).unwrap().min_margin, Value::Infinity);
    }

    #[test]
    fn pieces_are_coded_consistently() {
        let cfg = SampleConfig::default();
        let opts = RootOptions::new(q(8));
        let f = poly("x^3 - 3*t^2*x", 1);
        let part = jp_partition_build(&f, &dom("0 = 0", 1), &opts).unwrap();
        assert_eq!(part.centres[0].len(), 3);
        for code in part.pieces_from_samples(30, 2, &cfg).unwrap() {
            let piece = part.piece(&code);
            if !part.full_dimensional(&code) {
                continue;
            }
            for x in part.sample(&code, 5, 9, &cfg).unwrap() {
                assert!(piece.contains(&x).unwrap(), "{piece} ∌ {}", x[0]);
            }
        }
    }

    #[test]
    fn runs_square_and_constant() {
        let cfg = SampleConfig::default();
        let reps = jp_run(&poly("x^2", 1), &dom("0 = 0", 1), 20, 200, 4, &cfg).unwrap();
        assert!(reps.iter().all(|r| r.verdict != Verdict::Violated));
        assert!(reps.iter().any(|r| r.verdict == Verdict::Holds));
        let reps = jp_run(&poly("5", 1), &dom("0 = 0", 1), 10, 10, 4, &cfg).unwrap();
        assert!(reps.iter().all(|r| r.verdict == Verdict::Skipped));
    }

    #[test]
    fn violation_is_reported_across_branches() {
        // one piece for both x near 1 and x near -1 would break the property
        let f = poly("x^3", 1);
        let pts = vec![vec![Series::one()], vec![Series::int(-1)]];
        let r = jp_check(&f, "p", &[Series::int(3)], &pts, 1).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        assert!(r.violating_pair.is_some());
    }
}
