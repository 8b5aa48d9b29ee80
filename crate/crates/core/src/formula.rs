//! Atomic conditions, definable pieces, partitions and a seeded point sampler.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::parse::{parse_raw_union, RawAtom, RawKind};
use crate::poly::PolyExpr;
use crate::roots::{real_roots, RootOptions};
use crate::rv::{rvo, RvElement};
use crate::series::{Q, Series, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Rel {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
    Ne,
}

impl Rel {
    pub fn holds(self, o: Ordering) -> bool {
        match self {
            Rel::Lt => o == Ordering::Less,
            Rel::Le => o != Ordering::Greater,
            Rel::Eq => o == Ordering::Equal,
            Rel::Ge => o != Ordering::Less,
            Rel::Gt => o == Ordering::Greater,
            Rel::Ne => o != Ordering::Equal,
        }
    }

    /// The relation with both sides swapped.
    pub fn flip(self) -> Rel {
        match self {
            Rel::Lt => Rel::Gt,
            Rel::Le => Rel::Ge,
            Rel::Ge => Rel::Le,
            Rel::Gt => Rel::Lt,
            r => r,
        }
    }

    pub fn negate(self) -> Rel {
        match self {
            Rel::Lt => Rel::Ge,
            Rel::Le => Rel::Gt,
            Rel::Eq => Rel::Ne,
            Rel::Ge => Rel::Lt,
            Rel::Gt => Rel::Le,
            Rel::Ne => Rel::Eq,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Eq => "=",
            Rel::Ge => ">=",
            Rel::Gt => ">",
            Rel::Ne => "!=",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AtomicCondition {
    /// `p rel 0`
    Sign { p: PolyExpr, rel: Rel },
    /// `rv(p) rel ξ` in the order of RV
    Rv { p: PolyExpr, rel: Rel, xi: RvElement },
    /// `val(p) rel γ`
    Val { p: PolyExpr, rel: Rel, gamma: Value },
}

impl AtomicCondition {
    pub fn poly(&self) -> &PolyExpr {
        match self {
            AtomicCondition::Sign { p, .. } | AtomicCondition::Rv { p, .. } | AtomicCondition::Val { p, .. } => p,
        }
    }

    pub fn rel(&self) -> Rel {
        match self {
            AtomicCondition::Sign { rel, .. } | AtomicCondition::Rv { rel, .. } | AtomicCondition::Val { rel, .. } => *rel,
        }
    }

    fn with_poly(&self, q: PolyExpr) -> AtomicCondition {
        match self {
            AtomicCondition::Sign { rel, .. } => AtomicCondition::Sign { p: q, rel: *rel },
            AtomicCondition::Rv { rel, xi, .. } => AtomicCondition::Rv { p: q, rel: *rel, xi: xi.clone() },
            AtomicCondition::Val { rel, gamma, .. } => AtomicCondition::Val { p: q, rel: *rel, gamma: gamma.clone() },
        }
    }

    pub fn map_poly(&self, f: impl FnOnce(&PolyExpr) -> PolyExpr) -> AtomicCondition {
        self.with_poly(f(self.poly()))
    }

    pub fn negated(&self) -> AtomicCondition {
        match self {
            AtomicCondition::Sign { p, rel } => AtomicCondition::Sign { p: p.clone(), rel: rel.negate() },
            AtomicCondition::Rv { p, rel, xi } => AtomicCondition::Rv { p: p.clone(), rel: rel.negate(), xi: xi.clone() },
            AtomicCondition::Val { p, rel, gamma } => {
                AtomicCondition::Val { p: p.clone(), rel: rel.negate(), gamma: gamma.clone() }
            }
        }
    }

    pub fn is_equation(&self) -> bool {
        matches!(self, AtomicCondition::Sign { rel: Rel::Eq, .. })
    }

    /// Truth at a point; an undecidable comparison is an error.
    pub fn holds(&self, point: &[Series]) -> Result<bool> {
        let v = self.poly().eval(point);
        self.holds_for_value(&v)
    }

    pub fn holds_for_value(&self, v: &Series) -> Result<bool> {
        match self {
            AtomicCondition::Sign { rel, .. } => Ok(rel.holds(v.sign()?)),
            AtomicCondition::Rv { rel, xi, .. } => Ok(rel.holds(rvo(v)?.cmp(xi))),
            AtomicCondition::Val { rel, gamma, .. } => {
                if v.is_unknown() {
                    // only the lower bound val >= trunc is known
                    let lb = v.trunc().clone();
                    let decided = match rel {
                        Rel::Gt | Rel::Ne if &lb > gamma => Some(true),
                        Rel::Ge if &lb >= gamma => Some(true),
                        Rel::Lt | Rel::Eq if &lb > gamma => Some(false),
                        Rel::Le if &lb > gamma => Some(false),
                        _ => None,
                    };
                    return decided.ok_or_else(|| Error::Undecidable(format!("val of {v} against {gamma}")));
                }
                Ok(rel.holds(v.val().cmp(gamma)))
            }
        }
    }

    /// Truth with values that vanish to the known precision treated as zero.
    pub fn holds_approx(&self, point: &[Series]) -> bool {
        let v = self.poly().eval(point);
        let v = if v.is_unknown() { Series::zero() } else { v };
        self.holds_for_value(&v).unwrap_or(false)
    }
}

impl fmt::Display for AtomicCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AtomicCondition::Sign { p, rel } => write!(f, "{p} {} 0", rel.symbol()),
            AtomicCondition::Rv { p, rel, xi } => write!(f, "rv({p}) {} {}", rel.symbol(), xi.representative()),
            AtomicCondition::Val { p, rel, gamma } => write!(f, "val({p}) {} {gamma}", rel.symbol()),
        }
    }
}

impl Serialize for AtomicCondition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// A conjunction of atoms over a fixed list of variables.
#[derive(Clone, Debug, PartialEq)]
pub struct DefinablePiece {
    pub vars: Vec<String>,
    pub atoms: Vec<AtomicCondition>,
}

impl DefinablePiece {
    pub fn new(vars: Vec<String>, atoms: Vec<AtomicCondition>) -> Self {
        DefinablePiece { vars, atoms }
    }

    /// The whole ambient space.
    pub fn everything(vars: Vec<String>) -> Self {
        DefinablePiece { vars, atoms: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn and(&self, other: &DefinablePiece) -> DefinablePiece {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        DefinablePiece { vars: self.vars.clone(), atoms }
    }

    pub fn with_atom(&self, a: AtomicCondition) -> DefinablePiece {
        let mut atoms = self.atoms.clone();
        atoms.push(a);
        DefinablePiece { vars: self.vars.clone(), atoms }
    }

    pub fn contains(&self, point: &[Series]) -> Result<bool> {
        if point.len() != self.dim() {
            return Err(Error::Input(format!("point has {} coordinates, piece has {}", point.len(), self.dim())));
        }
        for a in &self.atoms {
            if !a.holds(point)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn contains_approx(&self, point: &[Series]) -> bool {
        self.atoms.iter().all(|a| a.holds_approx(point))
    }

    pub fn atom_strings(&self) -> Vec<String> {
        self.atoms.iter().map(|a| a.to_string()).collect()
    }
}

impl fmt::Display for DefinablePiece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return write!(f, "0 = 0");
        }
        write!(f, "{}", self.atom_strings().join(" & "))
    }
}

impl Serialize for DefinablePiece {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.atom_strings().serialize(s)
    }
}

fn convert(vars: &[String], raw: RawAtom) -> Result<AtomicCondition> {
    match raw.kind {
        RawKind::Sign => Ok(AtomicCondition::Sign { p: &raw.lhs - &raw.rhs, rel: raw.rel }),
        RawKind::Rv => {
            if !raw.rhs.is_constant() || !raw.rhs.constant_term().is_exact() {
                return Err(Error::Syntax { pos: raw.pos, msg: "rv(...) must be compared with an exact constant".into() });
            }
            let xi = rvo(&raw.rhs.constant_term())?;
            Ok(AtomicCondition::Rv { p: raw.lhs.with_vars(vars.to_vec()), rel: raw.rel, xi })
        }
        RawKind::Val => match raw.rhs.constant_term().as_rational() {
            Some(g) if raw.rhs.is_constant() => Ok(AtomicCondition::Val { p: raw.lhs, rel: raw.rel, gamma: Value::Finite(g) }),
            _ => Err(Error::Syntax { pos: raw.pos, msg: "val(...) must be compared with a rational constant".into() }),
        },
    }
}

/// A finite union of pieces.
pub type Formula = Vec<DefinablePiece>;

pub fn parse_union(text: &str, vars: Option<&[String]>) -> Result<Formula> {
    let (vars, raw) = parse_raw_union(text, vars)?;
    raw.into_iter()
        .map(|conj| {
            let atoms = conj.into_iter().map(|a| convert(&vars, a)).collect::<Result<Vec<_>>>()?;
            Ok(DefinablePiece::new(vars.clone(), atoms))
        })
        .collect()
}

/// Parses a single conjunction; `0 = 0` yields an atom that always holds.
pub fn parse_formula(text: &str) -> Result<DefinablePiece> {
    parse_formula_vars(text, None)
}

pub fn parse_formula_vars(text: &str, vars: Option<&[String]>) -> Result<DefinablePiece> {
    let mut u = parse_union(text, vars)?;
    if u.len() != 1 {
        return Err(Error::Input("expected a conjunction without `|`".into()));
    }
    Ok(u.remove(0))
}

pub fn union_contains(f: &Formula, point: &[Series]) -> Result<bool> {
    for piece in f {
        if piece.contains(point)? {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Clone, Debug, Serialize)]
pub struct Partition {
    pub domain: DefinablePiece,
    pub pieces: Vec<DefinablePiece>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionCheck {
    pub samples: usize,
    pub undecided: usize,
    /// Points lying in no piece or in more than one, with the number of pieces hit.
    pub violations: Vec<(Vec<Series>, usize)>,
}

impl Partition {
    /// Index of the unique piece containing the point.
    pub fn locate(&self, point: &[Series]) -> Result<Option<usize>> {
        let mut hit = None;
        for (i, p) in self.pieces.iter().enumerate() {
            if p.contains(point)? {
                if hit.is_some() {
                    return Ok(None);
                }
                hit = Some(i);
            }
        }
        Ok(hit)
    }

    pub fn check_on_samples(&self, count: usize, seed: u64, cfg: &SampleConfig) -> Result<PartitionCheck> {
        let pts = sample_piece(&self.domain, count, seed, cfg)?;
        let mut undecided = 0;
        let mut violations = Vec::new();
        for pt in pts {
            let mut hits = 0;
            let mut ok = true;
            for p in &self.pieces {
                match p.contains(&pt) {
                    Ok(true) => hits += 1,
                    Ok(false) => {}
                    Err(_) => ok = false,
                }
            }
            if !ok {
                undecided += 1;
            } else if hits != 1 {
                violations.push((pt, hits));
            }
        }
        Ok(PartitionCheck { samples: count, undecided, violations })
    }
}

#[derive(Clone, Debug)]
pub struct SampleConfig {
    pub max_exp_denominator: i64,
    pub max_abs_exponent: i64,
    pub coeff_range: i64,
    pub max_attempts: usize,
    /// Truncation used for coordinates solved from equations.
    pub precision: Q,
    /// Accept points whose equations vanish only to the known precision.
    pub approximate: bool,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            max_exp_denominator: 6,
            max_abs_exponent: 4,
            coeff_range: 10,
            max_attempts: 20_000,
            precision: Q::from_integer(BigInt::from(crate::series::DEFAULT_TRUNCATION)),
            approximate: true,
        }
    }
}

pub struct Sampler<'a> {
    pub cfg: &'a SampleConfig,
    pub rng: ChaCha8Rng,
}

impl<'a> Sampler<'a> {
    pub fn new(cfg: &'a SampleConfig, seed: u64) -> Self {
        Sampler { cfg, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn exponent(&mut self) -> Q {
        let d = self.rng.gen_range(1..=self.cfg.max_exp_denominator);
        let m = self.cfg.max_abs_exponent * d;
        Q::new(BigInt::from(self.rng.gen_range(-m..=m)), BigInt::from(d))
    }

    /// An exponent strictly above `floor`, at most a few units higher.
    pub fn exponent_above(&mut self, floor: &Q) -> Q {
        let d = self.rng.gen_range(1..=self.cfg.max_exp_denominator);
        let k = self.rng.gen_range(1..=3 * d);
        floor + Q::new(BigInt::from(k), BigInt::from(d))
    }

    pub fn coeff(&mut self) -> Q {
        let r = self.cfg.coeff_range;
        let mut n = 0;
        while n == 0 {
            n = self.rng.gen_range(-r..=r);
        }
        let d = *[1, 1, 1, 2, 3].choose(&mut self.rng).unwrap();
        Q::new(BigInt::from(n), BigInt::from(d))
    }

    pub fn series(&mut self) -> Series {
        let k = self.rng.gen_range(0..=2);
        let mut s = Series::zero();
        for _ in 0..k {
            let e = self.exponent();
            let c = self.coeff();
            s = &s + &Series::monomial(c, e);
        }
        s
    }

    /// A point of `1 + M` times a random unit, or exactly 1.
    pub fn unit_factor(&mut self) -> Series {
        if self.rng.gen_bool(0.3) {
            return Series::one();
        }
        let e = self.exponent_above(&Q::zero());
        let c = self.coeff();
        &Series::one() + &Series::monomial(c, e)
    }

    /// `a` plus a perturbation, sometimes none.
    pub fn near(&mut self, a: &Series) -> Series {
        let roll = self.rng.gen_range(0..8);
        if roll == 0 && a.is_exact() {
            return a.clone();
        }
        let e = if roll < 5 {
            let base = match a.val() {
                Value::Finite(v) => v,
                Value::Infinity => Q::zero(),
            };
            self.exponent_above(&(base - Q::one()))
        } else {
            self.exponent()
        };
        let c = self.coeff();
        let pert = Series::monomial(c, e);
        match a.trunc() {
            Value::Finite(tr) => (a + &pert).truncate(tr),
            Value::Infinity => a + &pert,
        }
    }

    /// A point of the open ball `B(c, >r)`, sometimes `c` itself.
    pub fn in_ball(&mut self, c: &Series, r: &Q) -> Series {
        if self.rng.gen_bool(0.15) {
            return c.clone();
        }
        let e = self.exponent_above(r);
        let x = c + &Series::monomial(self.coeff(), e);
        match c.trunc() {
            Value::Finite(tr) => x.truncate(tr),
            Value::Infinity => x,
        }
    }

    pub fn rng_bool(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    pub fn pick<T: Clone>(&mut self, xs: &[T]) -> Option<T> {
        xs.choose(&mut self.rng).cloned()
    }
}

/// Values of `x_j` singled out by an atom once the other coordinates are fixed.
fn anchors(atom: &AtomicCondition, j: usize, filled: &[Option<Series>], s: &mut Sampler) -> Vec<Series> {
    let p = atom.poly().substitute(filled);
    if p.support() != vec![j] {
        return Vec::new();
    }
    let coeffs = p.specialize(j, &vec![Series::zero(); p.nvars()]);
    match atom {
        AtomicCondition::Sign { .. } => {
            let mut opts = RootOptions::new(s.cfg.precision.clone());
            opts.lookahead = Q::from_integer(BigInt::from(4));
            real_roots(&coeffs, &opts).unwrap_or_default()
        }
        AtomicCondition::Rv { .. } | AtomicCondition::Val { .. } if coeffs.len() == 2 => {
            let target = match atom {
                AtomicCondition::Rv { xi, .. } => xi.representative(),
                AtomicCondition::Val { gamma: Value::Finite(g), .. } => Series::monomial(s.coeff(), g.clone()),
                _ => return Vec::new(),
            };
            let target = &target * &s.unit_factor();
            // p = a1 x + a0: x = (target - a0) / a1
            match (&target - &coeffs[0]).div_to(&coeffs[1], &(&s.cfg.precision + Q::from_integer(BigInt::from(4)))) {
                Ok(x) => vec![x],
                Err(_) => Vec::new(),
            }
        }
        _ => Vec::new(),
    }
}

/// One candidate point, built coordinate by coordinate in random order.
fn candidate(piece: &DefinablePiece, s: &mut Sampler, ball: Option<(&[Series], &Q)>) -> Option<Vec<Series>> {
    let n = piece.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut s.rng);
    let mut filled: Vec<Option<Series>> = vec![None; n];
    for (step, &j) in order.iter().enumerate() {
        let remaining: Vec<usize> = order[step + 1..].to_vec();
        let mut forced: Vec<Series> = Vec::new();
        let mut soft: Vec<Series> = Vec::new();
        for atom in &piece.atoms {
            // only atoms whose unfilled variables reduce to x_j
            let supp = atom.poly().support();
            if supp.iter().any(|v| remaining.contains(v)) || !supp.contains(&j) {
                continue;
            }
            let a = anchors(atom, j, &filled, s);
            let exact_target = matches!(atom, AtomicCondition::Sign { rel: Rel::Eq, .. } | AtomicCondition::Rv { rel: Rel::Eq, .. });
            if exact_target {
                if a.is_empty() {
                    return None;
                }
                forced = a;
            } else {
                soft.extend(a);
            }
        }
        let value = if !forced.is_empty() {
            s.pick(&forced).unwrap()
        } else if let Some((c, r)) = ball {
            s.in_ball(&c[j], r)
        } else if !soft.is_empty() && s.rng.gen_bool(0.7) {
            let a = s.pick(&soft).unwrap();
            s.near(&a)
        } else {
            s.series()
        };
        filled[j] = Some(value);
    }
    Some(filled.into_iter().map(|v| v.unwrap()).collect())
}

/// `count` distinct points of `piece`, deterministic for a given seed.
pub fn sample_piece(piece: &DefinablePiece, count: usize, seed: u64, cfg: &SampleConfig) -> Result<Vec<Vec<Series>>> {
    let mut s = Sampler::new(cfg, seed);
    let mut out: Vec<Vec<Series>> = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        if attempts >= cfg.max_attempts {
            return Err(Error::Exhausted { attempts });
        }
        attempts += 1;
        let Some(pt) = candidate(piece, &mut s, None) else { continue };
        let ok = match piece.contains(&pt) {
            Ok(b) => b,
            Err(_) if cfg.approximate => piece.contains_approx(&pt),
            Err(_) => false,
        };
        if ok && !out.contains(&pt) {
            out.push(pt);
        }
    }
    Ok(out)
}

/// Up to `count` distinct points of `piece` inside the open ball `B(centre, >radius)`;
/// fewer when the attempt budget runs out.
pub fn sample_piece_in_ball(
    piece: &DefinablePiece,
    centre: &[Series],
    radius: &Q,
    count: usize,
    seed: u64,
    cfg: &SampleConfig,
) -> Vec<Vec<Series>> {
    let mut s = Sampler::new(cfg, seed);
    let mut out: Vec<Vec<Series>> = Vec::new();
    let r = Value::Finite(radius.clone());
    for _ in 0..cfg.max_attempts {
        if out.len() >= count {
            break;
        }
        let Some(pt) = candidate(piece, &mut s, Some((centre, radius))) else { continue };
        let d: Vec<Series> = pt.iter().zip(centre).map(|(a, b)| a - b).collect();
        let inside = match crate::series::val_tuple_checked(&d) {
            Ok(v) => v > r,
            Err(_) => false,
        };
        if !inside || out.contains(&pt) {
            continue;
        }
        let ok = match piece.contains(&pt) {
            Ok(b) => b,
            Err(_) if cfg.approximate => piece.contains_approx(&pt),
            Err(_) => false,
        };
        if ok {
            out.push(pt);
        }
    }
    out
}

pub fn eval_poly(p: &PolyExpr, point: &[Series]) -> Series {
    p.eval(point)
}

pub fn gradient(p: &PolyExpr) -> Vec<PolyExpr> {
    p.gradient()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;
    use crate::series::q;

    fn s(text: &str) -> Series {
        Series::parse(text).unwrap()
    }

    #[test]
    fn parse_atoms() {
        let p = parse_formula("x^2 - t < 0").unwrap();
        assert!(matches!(p.atoms[0], AtomicCondition::Sign { rel: Rel::Lt, .. }));
        let p = parse_formula("rv(x) = 1*t^1").unwrap();
        assert_eq!(p.atoms[0], AtomicCondition::Rv { p: parse_poly("x").unwrap(), rel: Rel::Eq, xi: RvElement::new(q(1), q(1)) });
        let p = parse_formula("x*y - 1 = 0 & x > 0").unwrap();
        assert_eq!(p.atoms.len(), 2);
        assert_eq!(p.to_string(), "x*y - 1 = 0 & x > 0");
    }

    #[test]
    fn evaluation() {
        let p = parse_poly("x^2 - t").unwrap();
        assert!(p.eval(&[s("t^(1/2)")]).is_zero());
        let p = parse_poly("x + y").unwrap();
        assert_eq!(p.eval(&[s("1"), s("t")]), s("1 + t"));
        let p = parse_poly("x*y").unwrap();
        assert_eq!(p.eval(&[s("1 + t"), s("1 - t")]), s("1 - t^2"));
    }

    #[test]
    fn gradients() {
        assert_eq!(gradient(&parse_poly("x^2").unwrap()), vec![parse_poly("2*x").unwrap()]);
        let g = gradient(&parse_poly("x*y").unwrap());
        assert_eq!(g[0].to_string(), "y");
        assert_eq!(g[1].to_string(), "x");
    }

    #[test]
    fn membership_examples() {
        let disc = parse_formula("x^2 + y^2 - 1 <= 0").unwrap();
        assert!(disc.contains(&[s("1 - t"), s("t")]).unwrap());
        assert!(!disc.contains(&[s("1 + t"), s("0")]).unwrap());
        let all = parse_formula("0 = 0").unwrap();
        assert!(all.contains(&[]).unwrap());
        let und = parse_formula("x > 0").unwrap();
        assert!(matches!(und.contains(&[Series::unknown(q(3))]), Err(Error::Undecidable(_))));
    }

    #[test]
    fn sampler_basics() {
        let cfg = SampleConfig::default();
        let unit_ball = parse_formula("rv(x) = 1").unwrap();
        let pts = sample_piece(&unit_ball, 30, 7, &cfg).unwrap();
        for p in &pts {
            assert_eq!(rvo(&p[0]).unwrap(), RvElement::one());
        }
        let thin = parse_formula("x > 0 & x < t").unwrap();
        let pts = sample_piece(&thin, 30, 7, &cfg).unwrap();
        for p in &pts {
            assert!(p[0].sign().unwrap() == Ordering::Greater);
            assert!(p[0].compare(&Series::t()).unwrap() == Ordering::Less);
        }
        let empty = parse_formula("x > 0 & x < 0").unwrap();
        let small = SampleConfig { max_attempts: 500, ..SampleConfig::default() };
        assert!(matches!(sample_piece(&empty, 1, 7, &small), Err(Error::Exhausted { attempts: 500 })));
        assert_eq!(sample_piece(&thin, 10, 3, &cfg).unwrap(), sample_piece(&thin, 10, 3, &cfg).unwrap());
    }

    #[test]
    fn sampling_on_a_curve() {
        let cfg = SampleConfig::default();
        let hyp = parse_formula("x*y - 1 = 0 & x > 0").unwrap();
        let pts = sample_piece(&hyp, 20, 1, &cfg).unwrap();
        assert_eq!(pts.len(), 20);
        for p in &pts {
            assert!(hyp.contains_approx(p));
        }
    }
}
