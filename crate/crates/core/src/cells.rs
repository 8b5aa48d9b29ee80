//! One-variable decomposition into points, open intervals and v-discs, the
//! normal form in terms of `rvo(x - c_i)`, monotonicity pieces and ball
//! decompositions with centres.
//!
//! Sets are handled as unions of convex sets `(lo, hi)` whose ends are cuts
//! just below or just above a ball; a point is the ball of radius `+inf`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{AtomicCondition, DefinablePiece, Formula, Rel, SampleConfig, Sampler};
use crate::poly::PolyExpr;
use crate::roots::{eval_univariate, find_roots, real_roots_separated, RootBranch, RootOptions};
use crate::rv::{rvo, Ball, RvElement};
use crate::series::{Q, Series, Value};

/// Open ball `B(center, >radius)`; radius `+inf` denotes the point `{center}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball1 {
    pub center: Series,
    pub radius: Value,
}

impl Ball1 {
    pub fn point(a: Series) -> Self {
        Ball1 { center: a, radius: Value::Infinity }
    }

    pub fn is_point(&self) -> bool {
        !self.radius.is_finite()
    }

    pub fn contains(&self, x: &Series) -> Result<bool> {
        let d = x - &self.center;
        if self.is_point() {
            return Ok(d.sign()? == Ordering::Equal);
        }
        Ok(d.val_checked()? > self.radius)
    }
}

enum BallRel {
    Equal,
    FirstInside,
    SecondInside,
    Disjoint(Ordering),
}

fn ball_relation(b1: &Ball1, b2: &Ball1) -> Result<BallRel> {
    let diff = &b1.center - &b2.center;
    let d = diff.val_checked()?;
    let meet = if b1.is_point() && b2.is_point() {
        d == Value::Infinity
    } else {
        d > std::cmp::min(b1.radius.clone(), b2.radius.clone())
    };
    if meet {
        return Ok(match b1.radius.cmp(&b2.radius) {
            Ordering::Equal => BallRel::Equal,
            Ordering::Greater => BallRel::FirstInside,
            Ordering::Less => BallRel::SecondInside,
        });
    }
    Ok(BallRel::Disjoint(diff.sign()?))
}

/// A Dedekind cut of R determined by a ball.
#[derive(Clone, Debug, PartialEq)]
pub enum Cut {
    NegInf,
    Below(Ball1),
    Above(Ball1),
    PosInf,
}

impl Cut {
    fn ball(&self) -> Option<&Ball1> {
        match self {
            Cut::Below(b) | Cut::Above(b) => Some(b),
            _ => None,
        }
    }
}

pub fn cut_cmp(a: &Cut, b: &Cut) -> Result<Ordering> {
    use Cut::*;
    Ok(match (a, b) {
        (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
        (NegInf, _) | (_, PosInf) => Ordering::Less,
        (_, NegInf) | (PosInf, _) => Ordering::Greater,
        (Below(b1), Below(b2)) => match ball_relation(b1, b2)? {
            BallRel::Equal => Ordering::Equal,
            BallRel::FirstInside => Ordering::Greater,
            BallRel::SecondInside => Ordering::Less,
            BallRel::Disjoint(o) => o,
        },
        (Above(b1), Above(b2)) => match ball_relation(b1, b2)? {
            BallRel::Equal => Ordering::Equal,
            BallRel::FirstInside => Ordering::Less,
            BallRel::SecondInside => Ordering::Greater,
            BallRel::Disjoint(o) => o,
        },
        (Below(b1), Above(b2)) => match ball_relation(b1, b2)? {
            BallRel::Disjoint(o) => o,
            _ => Ordering::Less,
        },
        (Above(b1), Below(b2)) => match ball_relation(b1, b2)? {
            BallRel::Disjoint(o) => o,
            _ => Ordering::Greater,
        },
    })
}

/// Position of `x` relative to a cut (`Greater`: above it). Never `Equal`.
pub fn point_vs_cut(x: &Series, cut: &Cut) -> Result<Ordering> {
    match cut {
        Cut::NegInf => Ok(Ordering::Greater),
        Cut::PosInf => Ok(Ordering::Less),
        Cut::Below(b) | Cut::Above(b) => {
            if b.contains(x)? {
                return Ok(if matches!(cut, Cut::Below(_)) { Ordering::Greater } else { Ordering::Less });
            }
            (x - &b.center).sign()
        }
    }
}

/// The convex set of points strictly between two cuts.
#[derive(Clone, Debug, PartialEq)]
pub struct Convex {
    pub lo: Cut,
    pub hi: Cut,
}

impl Convex {
    pub fn all() -> Self {
        Convex { lo: Cut::NegInf, hi: Cut::PosInf }
    }

    pub fn contains(&self, x: &Series) -> Result<bool> {
        Ok(point_vs_cut(x, &self.lo)? == Ordering::Greater && point_vs_cut(x, &self.hi)? == Ordering::Less)
    }

    pub fn is_empty(&self) -> Result<bool> {
        Ok(cut_cmp(&self.lo, &self.hi)? != Ordering::Less)
    }

    fn intersect(&self, other: &Convex) -> Result<Option<Convex>> {
        let lo = if cut_cmp(&self.lo, &other.lo)? == Ordering::Less { other.lo.clone() } else { self.lo.clone() };
        let hi = if cut_cmp(&self.hi, &other.hi)? == Ordering::Greater { other.hi.clone() } else { self.hi.clone() };
        let c = Convex { lo, hi };
        Ok(if c.is_empty()? { None } else { Some(c) })
    }
}

fn sort_cuts_by_lo(xs: &mut [Convex]) -> Result<()> {
    let mut err = None;
    xs.sort_by(|a, b| match cut_cmp(&a.lo, &b.lo) {
        Ok(o) => o,
        Err(e) => {
            err.get_or_insert(e);
            Ordering::Equal
        }
    });
    err.map_or(Ok(()), Err)
}

/// Sorted, pairwise disjoint and non-adjacent convex sets with the same union.
pub fn normalize(mut xs: Vec<Convex>) -> Result<Vec<Convex>> {
    sort_cuts_by_lo(&mut xs)?;
    let mut out: Vec<Convex> = Vec::new();
    for c in xs {
        if let Some(last) = out.last_mut() {
            if cut_cmp(&c.lo, &last.hi)? != Ordering::Greater {
                if cut_cmp(&c.hi, &last.hi)? == Ordering::Greater {
                    last.hi = c.hi;
                }
                continue;
            }
        }
        out.push(c);
    }
    Ok(out)
}

fn intersect_lists(a: &[Convex], b: &[Convex]) -> Result<Vec<Convex>> {
    let mut out = Vec::new();
    for x in a {
        for y in b {
            if let Some(z) = x.intersect(y)? {
                out.push(z);
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct CellOptions {
    pub precision: Q,
    pub max_denominator: u64,
}

impl Default for CellOptions {
    fn default() -> Self {
        CellOptions {
            precision: Q::from_integer(BigInt::from(crate::series::DEFAULT_TRUNCATION)),
            max_denominator: crate::series::DEFAULT_MAX_DENOMINATOR,
        }
    }
}

impl CellOptions {
    fn roots(&self) -> RootOptions {
        let mut o = RootOptions::new(self.precision.clone());
        o.max_denominator = self.max_denominator;
        o
    }
}

/// A point strictly below `x` (`dir = Less`) or above it.
fn step_from(x: &Series, dir: Ordering) -> Series {
    let e = match x.val() {
        Value::Finite(v) if v < Q::zero() => v - Q::one(),
        _ => -Q::one(),
    };
    let s = Series::monomial(if dir == Ordering::Less { -Q::one() } else { Q::one() }, e);
    x + &s
}

fn between(a: &Series, b: &Series) -> Series {
    (a + b).scale(&Q::new(BigInt::one(), BigInt::from(2)), &Q::zero())
}

/// Convex pieces where `p(x) rel 0`.
fn sign_atom_set(coeffs: &[Series], rel: Rel, opts: &CellOptions) -> Result<Vec<Convex>> {
    let nonzero = coeffs.iter().rposition(|c| !c.is_zero());
    let Some(d) = nonzero else {
        return Ok(if rel.holds(Ordering::Equal) { vec![Convex::all()] } else { Vec::new() });
    };
    if d == 0 {
        let s = coeffs[0].sign()?;
        return Ok(if rel.holds(s) { vec![Convex::all()] } else { Vec::new() });
    }
    let roots = real_roots_separated(&coeffs[..=d], &opts.roots())?;
    let mut out = Vec::new();
    let sign_at = |x: &Series| eval_univariate(coeffs, x).sign();
    if roots.is_empty() {
        if rel.holds(sign_at(&Series::zero())?) {
            out.push(Convex::all());
        }
        return Ok(out);
    }
    let k = roots.len();
    for i in 0..=k {
        let sample = if i == 0 {
            step_from(&roots[0], Ordering::Less)
        } else if i == k {
            step_from(&roots[k - 1], Ordering::Greater)
        } else {
            between(&roots[i - 1], &roots[i])
        };
        if rel.holds(sign_at(&sample)?) {
            let lo = if i == 0 { Cut::NegInf } else { Cut::Above(Ball1::point(roots[i - 1].clone())) };
            let hi = if i == k { Cut::PosInf } else { Cut::Below(Ball1::point(roots[i].clone())) };
            out.push(Convex { lo, hi });
        }
        if i < k && rel.holds(Ordering::Equal) {
            let b = Ball1::point(roots[i].clone());
            out.push(Convex { lo: Cut::Below(b.clone()), hi: Cut::Above(b) });
        }
    }
    Ok(out)
}

/// `rvo(x - a) rel xi` as convex pieces.
fn rv_condition_set(a: &Series, rel: Rel, xi: &RvElement) -> Vec<Convex> {
    let ball = match xi {
        RvElement::Zero => Ball1::point(a.clone()),
        RvElement::Class { gamma, .. } => Ball1 { center: a + &xi.representative(), radius: Value::Finite(gamma.clone()) },
    };
    let below = Cut::Below(ball.clone());
    let above = Cut::Above(ball);
    let c = |lo: Cut, hi: Cut| Convex { lo, hi };
    match rel {
        Rel::Lt => vec![c(Cut::NegInf, below)],
        Rel::Le => vec![c(Cut::NegInf, above)],
        Rel::Eq => vec![c(below, above)],
        Rel::Ge => vec![c(below, Cut::PosInf)],
        Rel::Gt => vec![c(above, Cut::PosInf)],
        Rel::Ne => vec![c(Cut::NegInf, below), c(above, Cut::PosInf)],
    }
}

/// Rewrites `rv(alpha x + beta) rel xi` as `rvo(x - a) rel' xi'`.
pub fn linear_rv_atom(p: &PolyExpr, rel: Rel, xi: &RvElement, opts: &CellOptions) -> Result<(Series, Rel, RvElement)> {
    let coeffs = p.univariate_coeffs();
    if coeffs.len() != 2 || coeffs[1].is_zero() {
        return Err(Error::Unsupported(format!("rv atom on non-linear term {p}")));
    }
    let alpha = &coeffs[1];
    let beta = &coeffs[0];
    let a = -(beta.div_to(alpha, &(&opts.precision + alpha.val().finite().cloned().unwrap_or_else(Q::zero)))?);
    let ra = rvo(alpha)?;
    let xi2 = xi.mul(&ra.inv()?);
    let rel2 = if ra.signum() == Ordering::Less { rel.flip() } else { rel };
    Ok((a, rel2, xi2))
}

fn atom_set(atom: &AtomicCondition, opts: &CellOptions) -> Result<Vec<Convex>> {
    match atom {
        AtomicCondition::Sign { p, rel } => sign_atom_set(&p.univariate_coeffs(), *rel, opts),
        AtomicCondition::Rv { p, rel, xi } => {
            let (a, rel2, xi2) = linear_rv_atom(p, *rel, xi, opts)?;
            Ok(rv_condition_set(&a, rel2, &xi2))
        }
        AtomicCondition::Val { .. } => Err(Error::Unsupported("val atoms in one-variable decompositions".into())),
    }
}

fn check_univariate(f: &Formula) -> Result<()> {
    for piece in f {
        if piece.dim() != 1 {
            return Err(Error::Input(format!("expected a formula in one variable, found {} variables", piece.dim())));
        }
    }
    Ok(())
}

/// The set defined by a one-variable formula as sorted disjoint convex pieces.
pub fn formula_convex_sets(f: &Formula, opts: &CellOptions) -> Result<Vec<Convex>> {
    check_univariate(f)?;
    let mut all = Vec::new();
    for piece in f {
        let mut acc = vec![Convex::all()];
        for atom in &piece.atoms {
            acc = intersect_lists(&acc, &atom_set(atom, opts)?)?;
            if acc.is_empty() {
                break;
            }
        }
        all.extend(acc);
    }
    normalize(all)
}

/// A bound on `rvo(x - a)`: an RV class, or the gap of RV separating the
/// classes of value `> gamma` from those of value `<= gamma` on one side of 0.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RvThreshold {
    Class { class: RvElement },
    Gap {
        #[serde(serialize_with = "crate::series::ser_q")]
        gamma: Q,
        positive: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RvBound {
    pub threshold: RvThreshold,
    pub strict: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum Cell1 {
    Point { a: Series },
    /// Open interval; a missing end is infinite.
    Interval { lo: Option<Series>, hi: Option<Series> },
    VDisc { center: Series, lower: Option<RvBound>, upper: Option<RvBound> },
}

impl Cell1 {
    pub fn to_convex(&self) -> Convex {
        match self {
            Cell1::Point { a } => {
                let b = Ball1::point(a.clone());
                Convex { lo: Cut::Below(b.clone()), hi: Cut::Above(b) }
            }
            Cell1::Interval { lo, hi } => Convex {
                lo: lo.as_ref().map_or(Cut::NegInf, |a| Cut::Above(Ball1::point(a.clone()))),
                hi: hi.as_ref().map_or(Cut::PosInf, |b| Cut::Below(Ball1::point(b.clone()))),
            },
            Cell1::VDisc { center, lower, upper } => Convex {
                lo: lower.as_ref().map_or(Cut::NegInf, |b| bound_to_cut(center, b, true)),
                hi: upper.as_ref().map_or(Cut::PosInf, |b| bound_to_cut(center, b, false)),
            },
        }
    }

    pub fn contains(&self, x: &Series) -> Result<bool> {
        self.to_convex().contains(x)
    }

    /// The cell as a disjunction of conjunctions of `rv`/`val` atoms in `x - c`.
    pub fn conditions(&self, var: &str) -> Vec<Vec<AtomicCondition>> {
        let rv = |c: &Series, rel: Rel, xi: RvElement| AtomicCondition::Rv { p: shift_var(var, c), rel, xi };
        match self {
            Cell1::Point { a } => vec![vec![rv(a, Rel::Eq, RvElement::Zero)]],
            Cell1::Interval { lo, hi } => {
                let mut conj = Vec::new();
                if let Some(a) = lo {
                    conj.push(rv(a, Rel::Gt, RvElement::Zero));
                }
                if let Some(b) = hi {
                    conj.push(rv(b, Rel::Lt, RvElement::Zero));
                }
                vec![conj]
            }
            Cell1::VDisc { center, lower, upper } => {
                let lo = lower.as_ref().map_or(vec![vec![]], |b| bound_conditions(var, center, b, true));
                let hi = upper.as_ref().map_or(vec![vec![]], |b| bound_conditions(var, center, b, false));
                let mut out = Vec::new();
                for l in &lo {
                    for h in &hi {
                        let mut c = l.clone();
                        c.extend(h.iter().cloned());
                        out.push(c);
                    }
                }
                out
            }
        }
    }
}

fn shift_var(var: &str, c: &Series) -> PolyExpr {
    let vars = vec![var.to_string()];
    &PolyExpr::var(vars.clone(), 0) - &PolyExpr::constant(vars, c.clone())
}

fn bound_to_cut(center: &Series, b: &RvBound, lower: bool) -> Cut {
    match &b.threshold {
        RvThreshold::Class { class } => {
            let ball = match class {
                RvElement::Zero => Ball1::point(center.clone()),
                RvElement::Class { gamma, .. } => {
                    Ball1 { center: center + &class.representative(), radius: Value::Finite(gamma.clone()) }
                }
            };
            // lower strict: above the class; lower non-strict: from the class on
            match (lower, b.strict) {
                (true, true) | (false, false) => Cut::Above(ball),
                (true, false) | (false, true) => Cut::Below(ball),
            }
        }
        RvThreshold::Gap { gamma, positive } => {
            let ball = Ball1 { center: center.clone(), radius: Value::Finite(gamma.clone()) };
            if *positive {
                Cut::Above(ball)
            } else {
                Cut::Below(ball)
            }
        }
    }
}

fn bound_conditions(var: &str, center: &Series, b: &RvBound, lower: bool) -> Vec<Vec<AtomicCondition>> {
    let p = shift_var(var, center);
    match &b.threshold {
        RvThreshold::Class { class } => {
            let rel = match (lower, b.strict) {
                (true, true) => Rel::Gt,
                (true, false) => Rel::Ge,
                (false, true) => Rel::Lt,
                (false, false) => Rel::Le,
            };
            vec![vec![AtomicCondition::Rv { p, rel, xi: class.clone() }]]
        }
        RvThreshold::Gap { gamma, positive } => {
            let g = Value::Finite(gamma.clone());
            let rv = |rel| AtomicCondition::Rv { p: p.clone(), rel, xi: RvElement::Zero };
            let val = |rel| AtomicCondition::Val { p: p.clone(), rel, gamma: g.clone() };
            match (lower, positive) {
                // above the positive gap: positive with val <= gamma
                (true, true) => vec![vec![rv(Rel::Gt), val(Rel::Le)]],
                // above the negative gap: nonnegative or val > gamma
                (true, false) => vec![vec![rv(Rel::Ge)], vec![val(Rel::Gt)]],
                (false, true) => vec![vec![rv(Rel::Le)], vec![val(Rel::Gt)]],
                (false, false) => vec![vec![rv(Rel::Lt), val(Rel::Le)]],
            }
        }
    }
}

/// Expresses a cut as a bound on `rvo(x - a)` when `a` is a valid centre for it.
fn cut_as_bound(cut: &Cut, a: &Series, lower: bool) -> Result<Option<Option<RvBound>>> {
    let b = match cut {
        Cut::NegInf | Cut::PosInf => return Ok(Some(None)),
        Cut::Below(b) | Cut::Above(b) => b,
    };
    let is_above = matches!(cut, Cut::Above(_));
    let d = &b.center - a;
    if b.is_point() {
        if d.sign()? != Ordering::Equal {
            return Ok(None);
        }
        let strict = if lower { is_above } else { !is_above };
        return Ok(Some(Some(RvBound { threshold: RvThreshold::Class { class: RvElement::Zero }, strict })));
    }
    let vd = d.val_checked()?;
    let gamma = b.radius.finite().expect("finite radius").clone();
    match vd.cmp(&b.radius) {
        Ordering::Less => Ok(None),
        Ordering::Equal => {
            let strict = if lower { is_above } else { !is_above };
            Ok(Some(Some(RvBound { threshold: RvThreshold::Class { class: rvo(&d)? }, strict })))
        }
        Ordering::Greater => {
            Ok(Some(Some(RvBound { threshold: RvThreshold::Gap { gamma, positive: is_above }, strict: true })))
        }
    }
}

fn is_gap(b: &Option<RvBound>) -> bool {
    matches!(b, Some(RvBound { threshold: RvThreshold::Gap { .. }, .. }))
}

fn as_vdisc(c: &Convex, candidates: &[Series]) -> Result<Option<Cell1>> {
    let mut best: Option<(usize, Cell1)> = None;
    for a in candidates {
        let (Some(lower), Some(upper)) = (cut_as_bound(&c.lo, a, true)?, cut_as_bound(&c.hi, a, false)?) else {
            continue;
        };
        let gaps = is_gap(&lower) as usize + is_gap(&upper) as usize;
        if best.as_ref().is_none_or(|(g, _)| gaps < *g) {
            best = Some((gaps, Cell1::VDisc { center: a.clone(), lower, upper }));
            if gaps == 0 {
                break;
            }
        }
    }
    Ok(best.map(|(_, c)| c))
}

fn point_cut_value(c: &Cut) -> Option<&Series> {
    c.ball().filter(|b| b.is_point()).map(|b| &b.center)
}

/// Points `m` inside `c` from which the given ball cut is expressible.
fn split_candidates(cut: &Cut) -> Vec<Series> {
    let Some(b) = cut.ball() else { return Vec::new() };
    let mut out = vec![b.center.clone()];
    if let Value::Finite(g) = &b.radius {
        let mut eps = Q::one();
        for _ in 0..40 {
            out.push(&b.center + &Series::monomial(eps.clone(), g.clone()));
            out.push(&b.center - &Series::monomial(eps.clone(), g.clone()));
            eps /= Q::from_integer(BigInt::from(2));
        }
    }
    out
}

fn decompose_convex(c: &Convex, candidates: &[Series], out: &mut Vec<Cell1>, depth: usize) -> Result<()> {
    let lo_pt = point_cut_value(&c.lo);
    let hi_pt = point_cut_value(&c.hi);
    let lo_simple = lo_pt.is_some() || matches!(c.lo, Cut::NegInf);
    let hi_simple = hi_pt.is_some() || matches!(c.hi, Cut::PosInf);
    if lo_simple && hi_simple {
        // point, or interval with possibly closed ends split off
        if let (Cut::Below(a), Cut::Above(b)) = (&c.lo, &c.hi) {
            if a == b {
                out.push(Cell1::Point { a: a.center.clone() });
                return Ok(());
            }
        }
        if let Cut::Below(a) = &c.lo {
            out.push(Cell1::Point { a: a.center.clone() });
        }
        out.push(Cell1::Interval { lo: lo_pt.cloned(), hi: hi_pt.cloned() });
        if let Cut::Above(b) = &c.hi {
            out.push(Cell1::Point { a: b.center.clone() });
        }
        return Ok(());
    }
    let mut cands: Vec<Series> = candidates.to_vec();
    for cut in [&c.lo, &c.hi] {
        if let Some(b) = cut.ball() {
            cands.push(b.center.clone());
        }
    }
    if let Some(cell) = as_vdisc(c, &cands)? {
        out.push(cell);
        return Ok(());
    }
    if depth > 4 {
        return Err(Error::Undecidable("no centre found for a convex piece".into()));
    }
    // split at a point from which the lower cut is expressible
    let target = if lo_simple { &c.hi } else { &c.lo };
    for m in split_candidates(target) {
        let inside = c.contains(&m).unwrap_or(false);
        if !inside {
            continue;
        }
        let pm = Ball1::point(m.clone());
        let left = Convex { lo: c.lo.clone(), hi: Cut::Below(pm.clone()) };
        let right = Convex { lo: Cut::Above(pm), hi: c.hi.clone() };
        let mut local = vec![m.clone()];
        local.extend(candidates.iter().cloned());
        decompose_convex(&left, &local, out, depth + 1)?;
        out.push(Cell1::Point { a: m });
        decompose_convex(&right, &local, out, depth + 1)?;
        return Ok(());
    }
    Err(Error::Undecidable("could not split a convex piece".into()))
}

/// Centres suggested by the formula itself: 0 and the bases of rv atoms.
fn formula_centres(f: &Formula, opts: &CellOptions) -> Vec<Series> {
    let mut out = vec![Series::zero()];
    for piece in f {
        for atom in &piece.atoms {
            if let AtomicCondition::Rv { p, rel, xi } = atom {
                if let Ok((a, _, _)) = linear_rv_atom(p, *rel, xi, opts) {
                    if !out.contains(&a) {
                        out.push(a);
                    }
                }
            }
        }
    }
    out
}

/// Pairwise disjoint points, open intervals and v-discs covering the formula's set.
pub fn cell_decompose(f: &Formula, opts: &CellOptions) -> Result<Vec<Cell1>> {
    let convex = formula_convex_sets(f, opts)?;
    let cands = formula_centres(f, opts);
    let mut out = Vec::new();
    for c in &convex {
        decompose_convex(c, &cands, &mut out, 0)?;
    }
    Ok(out)
}

pub fn cells_contain(cells: &[Cell1], x: &Series) -> Result<usize> {
    let mut n = 0;
    for c in cells {
        if c.contains(x)? {
            n += 1;
        }
    }
    Ok(n)
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalForm1 {
    pub centers: Vec<Series>,
    pub rv_params: Vec<RvElement>,
    /// Values `gamma` used by `val(x - c_i)` conditions bounding gaps.
    #[serde(serialize_with = "crate::series::ser_q_vec")]
    pub val_params: Vec<Q>,
    pub table: Vec<DefinablePiece>,
}

impl NormalForm1 {
    pub fn contains(&self, x: &Series) -> Result<bool> {
        crate::formula::union_contains(&self.table, std::slice::from_ref(x))
    }
}

pub fn normal_form(f: &Formula, opts: &CellOptions) -> Result<NormalForm1> {
    check_univariate(f)?;
    let var = f.first().map(|p| p.vars[0].clone()).unwrap_or_else(|| "x".to_string());
    let cells = cell_decompose(f, opts)?;
    let mut centers = vec![Series::zero()];
    let mut rv_params = vec![RvElement::Zero];
    let mut val_params: Vec<Q> = Vec::new();
    let mut table = Vec::new();
    let add_center = |c: &Series, centers: &mut Vec<Series>| {
        if !centers.contains(c) {
            centers.push(c.clone());
        }
    };
    for cell in &cells {
        match cell {
            Cell1::Point { a } => add_center(a, &mut centers),
            Cell1::Interval { lo, hi } => {
                for e in [lo, hi].into_iter().flatten() {
                    add_center(e, &mut centers);
                }
            }
            Cell1::VDisc { center, lower, upper } => {
                add_center(center, &mut centers);
                for b in [lower, upper].into_iter().flatten() {
                    match &b.threshold {
                        RvThreshold::Class { class } => {
                            if !rv_params.contains(class) {
                                rv_params.push(class.clone());
                            }
                        }
                        RvThreshold::Gap { gamma, .. } => {
                            if !val_params.contains(gamma) {
                                val_params.push(gamma.clone());
                            }
                        }
                    }
                }
            }
        }
        for conj in cell.conditions(&var) {
            table.push(DefinablePiece::new(vec![var.clone()], conj));
        }
    }
    Ok(NormalForm1 { centers, rv_params, val_params, table })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Behavior {
    Constant,
    StrictlyIncreasing,
    StrictlyDecreasing,
}

/// Cells on which `f` is constant or strictly monotone.
pub fn monotone_decomposition(f: &PolyExpr, opts: &CellOptions) -> Result<Vec<(Cell1, Behavior)>> {
    let df = f.partial(0).univariate_coeffs();
    if df.iter().all(|c| c.is_zero()) {
        return Ok(vec![(Cell1::Interval { lo: None, hi: None }, Behavior::Constant)]);
    }
    let roots = if df.len() > 1 { real_roots_separated(&df, &opts.roots())? } else { Vec::new() };
    let behave = |x: &Series| -> Result<Behavior> {
        Ok(match eval_univariate(&df, x).sign()? {
            Ordering::Greater => Behavior::StrictlyIncreasing,
            Ordering::Less => Behavior::StrictlyDecreasing,
            Ordering::Equal => Behavior::Constant,
        })
    };
    let mut out = Vec::new();
    if roots.is_empty() {
        out.push((Cell1::Interval { lo: None, hi: None }, behave(&Series::zero())?));
        return Ok(out);
    }
    let k = roots.len();
    for i in 0..=k {
        let sample = if i == 0 {
            step_from(&roots[0], Ordering::Less)
        } else if i == k {
            step_from(&roots[k - 1], Ordering::Greater)
        } else {
            between(&roots[i - 1], &roots[i])
        };
        let lo = if i == 0 { None } else { Some(roots[i - 1].clone()) };
        let hi = if i == k { None } else { Some(roots[i].clone()) };
        out.push((Cell1::Interval { lo, hi }, behave(&sample)?));
        if i < k {
            out.push((Cell1::Point { a: roots[i].clone() }, Behavior::Constant));
        }
    }
    Ok(out)
}

/// Root listing with realness, as reported to users.
#[derive(Clone, Debug, Serialize)]
pub struct NewtonRoot {
    pub root: Option<Series>,
    pub valuation: Value,
    pub real: bool,
    pub multiplicity: usize,
}

pub fn newton_polygon_roots(p: &PolyExpr, order: &Q, max_den: u64) -> Result<Vec<NewtonRoot>> {
    let coeffs = p.univariate_coeffs();
    if coeffs.len() < 2 {
        return Err(Error::Input("polynomial of degree at least 1 expected".into()));
    }
    let mut opts = RootOptions::new(order.clone());
    opts.max_denominator = max_den;
    let mut out = Vec::new();
    for br in find_roots(&coeffs, &opts)? {
        match br {
            RootBranch::Real { root, multiplicity } => {
                out.push(NewtonRoot { valuation: root.order_bound(), root: Some(root), real: true, multiplicity })
            }
            RootBranch::Complex { valuation, count } => {
                for _ in 0..count / 2 {
                    out.push(NewtonRoot { root: None, valuation: Value::Finite(valuation.clone()), real: false, multiplicity: 2 });
                }
            }
            RootBranch::Irrational { prefix, valuation, .. } => {
                return Err(Error::Unsupported(format!(
                    "root {prefix} + c*t^{valuation} needs an irrational residue extension"
                )))
            }
            RootBranch::Unresolved { approx, count } => {
                return Err(Error::TruncationInsufficient(format!("{count} roots near {approx} not separated")))
            }
        }
    }
    Ok(out)
}

/// Code of a point under the ball decomposition around `s0`: index of the
/// valuation-nearest centre (smallest index on ties) and the class of `b - c`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FiberCode {
    pub index: usize,
    pub class: RvElement,
}

pub fn fiber_code(s0: &[Series], b: &Series) -> Result<FiberCode> {
    if s0.is_empty() {
        return Err(Error::Input("the centre set must be nonempty".into()));
    }
    let mut best: Option<(usize, Value)> = None;
    for (i, s) in s0.iter().enumerate() {
        let v = (b - s).val_checked()?;
        if best.as_ref().is_none_or(|(_, bv)| v > *bv) {
            best = Some((i, v));
        }
    }
    let (index, _) = best.unwrap();
    Ok(FiberCode { index, class: rvo(&(b - &s0[index]))? })
}

/// The fiber of a code: `c + rvo⁻¹(ξ)`, or the centre itself.
pub fn fiber_ball(s0: &[Series], code: &FiberCode) -> Ball {
    let c = &s0[code.index];
    match &code.class {
        RvElement::Zero => Ball::closed(vec![c.clone()], Value::Infinity),
        RvElement::Class { gamma, .. } => {
            Ball::open(vec![c + &code.class.representative()], Value::Finite(gamma.clone()))
        }
    }
}

/// Centres adapted to a formula: every ball missing them lies inside or outside the set.
pub fn centres_for(f: &Formula, opts: &CellOptions) -> Result<Vec<Series>> {
    let cells = cell_decompose(f, opts)?;
    let mut out = vec![Series::zero()];
    for c in &cells {
        let pts: Vec<&Series> = match c {
            Cell1::Point { a } => vec![a],
            Cell1::Interval { lo, hi } => [lo, hi].into_iter().flatten().collect(),
            Cell1::VDisc { center, .. } => vec![center],
        };
        for p in pts {
            if !out.contains(p) {
                out.push(p.clone());
            }
        }
    }
    Ok(out)
}

impl fmt::Display for Cell1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell1::Point { a } => write!(f, "{{{a}}}"),
            Cell1::Interval { lo, hi } => {
                let l = lo.as_ref().map_or("-inf".to_string(), |x| x.to_string());
                let h = hi.as_ref().map_or("+inf".to_string(), |x| x.to_string());
                write!(f, "({l}, {h})")
            }
            Cell1::VDisc { center, lower, upper } => {
                let show = |b: &RvBound| match &b.threshold {
                    RvThreshold::Class { class } => class.to_string(),
                    RvThreshold::Gap { gamma, positive } => {
                        format!("gap({}, {gamma})", if *positive { "+" } else { "-" })
                    }
                };
                let l = lower.as_ref().map_or(String::new(), |b| format!("{} {} ", show(b), if b.strict { "<" } else { "<=" }));
                let u = upper.as_ref().map_or(String::new(), |b| format!(" {} {}", if b.strict { "<" } else { "<=" }, show(b)));
                write!(f, "{{x : {l}rv(x - ({center})){u}}}")
            }
        }
    }
}

/// Random points of R concentrated near the given anchors.
pub fn sample_line(anchors: &[Series], count: usize, seed: u64, cfg: &SampleConfig) -> Vec<Series> {
    let mut s = Sampler::new(cfg, seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = match s.pick(anchors) {
            Some(a) if s.rng_bool(0.75) => s.near(&a),
            _ => s.series(),
        };
        out.push(x);
    }
    out
}

/// Anchors worth sampling near: centres, endpoints and ball centres of the cells.
pub fn cell_anchors(cells: &[Cell1]) -> Vec<Series> {
    let mut out: Vec<Series> = vec![Series::zero()];
    let mut push = |x: &Series| {
        if !out.contains(x) {
            out.push(x.clone());
        }
    };
    for c in cells {
        let cv = c.to_convex();
        for cut in [&cv.lo, &cv.hi] {
            if let Some(b) = cut.ball() {
                push(&b.center);
            }
        }
        if let Cell1::VDisc { center, .. } = c {
            push(center);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_union;
    use crate::series::{q, qf};

    fn s(text: &str) -> Series {
        Series::parse(text).unwrap()
    }

    fn cells(text: &str) -> Vec<Cell1> {
        cell_decompose(&parse_union(text, None).unwrap(), &CellOptions::default()).unwrap()
    }

    #[test]
    fn interval_example() {
        assert_eq!(cells("0 < x & x < 1"), vec![Cell1::Interval { lo: Some(s("0")), hi: Some(s("1")) }]);
    }

    #[test]
    fn vdisc_example() {
        let c = cells("rv(x) = 1*t^1");
        assert_eq!(c.len(), 1);
        match &c[0] {
            Cell1::VDisc { center, lower, upper } => {
                assert!(center.is_zero());
                let want = RvThreshold::Class { class: RvElement::new(q(1), q(1)) };
                assert_eq!(lower.as_ref().unwrap().threshold, want);
                assert_eq!(upper.as_ref().unwrap().threshold, want);
                assert!(!lower.as_ref().unwrap().strict && !upper.as_ref().unwrap().strict);
            }
            other => panic!("{other:?}"),
        }
        assert!(c[0].contains(&s("t + t^2")).unwrap());
        assert!(!c[0].contains(&s("2*t")).unwrap());
    }

    #[test]
    fn root_interval_example() {
        let c = cells("x^2 < t");
        assert_eq!(c, vec![Cell1::Interval { lo: Some(s("-t^(1/2)")), hi: Some(s("t^(1/2)")) }]);
    }

    #[test]
    fn closed_ends_become_points() {
        let c = cells("x >= 0 & x <= 1");
        assert_eq!(c.len(), 3);
        assert_eq!(c[0], Cell1::Point { a: s("0") });
        assert_eq!(c[2], Cell1::Point { a: s("1") });
    }

    #[test]
    fn normal_form_examples() {
        let opts = CellOptions::default();
        let nf = normal_form(&parse_union("x = 2", None).unwrap(), &opts).unwrap();
        assert_eq!(nf.centers, vec![s("0"), s("2")]);
        assert_eq!(nf.table.len(), 1);
        assert_eq!(nf.table[0].to_string(), "rv(x - 2) = 0");
        let nf = normal_form(&parse_union("x > 1 & x < 3", None).unwrap(), &opts).unwrap();
        assert_eq!(nf.table[0].to_string(), "rv(x - 1) > 0 & rv(x - 3) < 0");
        let nf = normal_form(&parse_union("rv(x) = t", None).unwrap(), &opts).unwrap();
        assert_eq!(nf.centers, vec![s("0")]);
        assert!(nf.rv_params.contains(&RvElement::new(q(1), q(1))));
        assert_eq!(nf.table[0].to_string(), "rv(x) >= t & rv(x) <= t");
    }

    #[test]
    fn point_inside_ball_uses_gap() {
        // {x in B(t, >1) : x > t} has no centre giving plain RV bounds
        let c = cells("rv(x) = t & x > t");
        assert_eq!(c.len(), 1);
        let probe = [s("t + t^2"), s("t - t^2"), s("t + 1/1000*t"), s("t")];
        let want = [true, false, false, false];
        for (p, w) in probe.iter().zip(want) {
            assert_eq!(c[0].contains(p).unwrap(), w, "{p}");
        }
    }

    #[test]
    fn monotone_examples() {
        let opts = CellOptions::default();
        let m = monotone_decomposition(&crate::parse::parse_poly("x^2").unwrap(), &opts).unwrap();
        let kinds: Vec<Behavior> = m.iter().map(|(_, b)| *b).collect();
        assert_eq!(kinds, vec![Behavior::StrictlyDecreasing, Behavior::Constant, Behavior::StrictlyIncreasing]);
        let m = monotone_decomposition(&crate::parse::parse_poly("x^3 - 3*x").unwrap(), &opts).unwrap();
        assert_eq!(m.len(), 5);
        assert_eq!(m[1].0, Cell1::Point { a: s("-1") });
        assert_eq!(m[3].0, Cell1::Point { a: s("1") });
        let vars = vec!["x".to_string()];
        let five = PolyExpr::constant(vars, Series::int(5));
        assert_eq!(monotone_decomposition(&five, &opts).unwrap(), vec![(Cell1::Interval { lo: None, hi: None }, Behavior::Constant)]);
    }

    #[test]
    fn newton_examples() {
        let r = newton_polygon_roots(&crate::parse::parse_poly("x^2 - (2 + t)*x + (1 + t)").unwrap(), &q(8), 64).unwrap();
        let roots: Vec<Series> = r.iter().filter_map(|x| x.root.clone()).collect();
        assert!(roots.contains(&s("1")) && roots.contains(&s("1 + t")));
        let r = newton_polygon_roots(&crate::parse::parse_poly("x^2 + 1").unwrap(), &q(8), 64).unwrap();
        assert_eq!(r.len(), 1);
        assert!(!r[0].real);
        let r = newton_polygon_roots(&crate::parse::parse_poly("x^2 - t").unwrap(), &q(8), 64).unwrap();
        assert!(r.iter().all(|x| x.real && x.valuation == Value::Finite(qf(1, 2))));
    }

    #[test]
    fn centre_choice() {
        let s0 = vec![s("0"), s("1")];
        let c = fiber_code(&s0, &s("1 + t")).unwrap();
        assert_eq!(c, FiberCode { index: 1, class: RvElement::new(q(1), q(1)) });
        assert_eq!(fiber_ball(&s0, &c).to_string(), "B(1 + t, >1)");
        assert_eq!(fiber_code(&s0, &s("t")).unwrap().index, 0);
        assert_eq!(fiber_code(&[s("0")], &s("3*t^2")).unwrap().class, RvElement::new(q(2), q(3)));
    }
}
