//! Stratification checks on samples: risometries, rainbow codes, affine
//! directions, exhibitions, graph fits, straightening and a verifier for
//! candidate t-stratifications.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{
    parse_union, sample_piece, sample_piece_in_ball, DefinablePiece, Formula, SampleConfig, Sampler,
};
use crate::linalg::{rank, rref};
use crate::parse::{canonical_order, parse_poly_tuple, parse_raw_union};
use crate::poly::PolyExpr;
use crate::roots::{real_roots_separated, RootOptions};
use crate::rv::{res, rvo_n, RvNElement};
use crate::series::{sub_tuple, val_tuple, val_tuple_checked, Q, Series, Value};

/// Exact membership when decidable, otherwise membership treating unknown values as zero.
pub fn piece_holds(piece: &DefinablePiece, x: &[Series]) -> bool {
    match piece.contains(x) {
        Ok(b) => b,
        Err(_) => piece.contains_approx(x),
    }
}

pub fn union_holds(f: &Formula, x: &[Series]) -> bool {
    f.iter().any(|p| piece_holds(p, x))
}

/// A union of pieces minus further unions.
#[derive(Clone, Debug)]
pub struct Region {
    pub include: Formula,
    pub exclude: Vec<Formula>,
}

impl Region {
    pub fn new(include: Formula) -> Self {
        Region { include, exclude: Vec::new() }
    }

    pub fn contains(&self, x: &[Series]) -> bool {
        union_holds(&self.include, x) && !self.exclude.iter().any(|f| union_holds(f, x))
    }

    pub fn describe(&self) -> String {
        let show = |f: &Formula| {
            if f.is_empty() {
                "(empty)".to_string()
            } else {
                f.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" | ")
            }
        };
        let mut s = show(&self.include);
        for e in &self.exclude {
            s.push_str(&format!(" minus [{}]", show(e)));
        }
        s
    }

    /// Up to `count` sampled points of the region.
    pub fn sample(&self, count: usize, seed: u64, cfg: &SampleConfig) -> Vec<Vec<Series>> {
        let mut out = Vec::new();
        for (k, p) in self.include.iter().enumerate() {
            let pts = sample_piece(p, count, seed.wrapping_add(k as u64 * 7919), cfg).unwrap_or_default();
            out.extend(pts.into_iter().filter(|x| self.contains(x)));
        }
        out.truncate(count);
        out
    }

    pub fn sample_in_ball(&self, centre: &[Series], radius: &Q, count: usize, seed: u64, cfg: &SampleConfig) -> Vec<Vec<Series>> {
        let mut out: Vec<Vec<Series>> = Vec::new();
        for (k, p) in self.include.iter().enumerate() {
            for x in sample_piece_in_ball(p, centre, radius, count, seed.wrapping_add(k as u64 * 7919), cfg) {
                if self.contains(&x) && !out.contains(&x) {
                    out.push(x);
                }
            }
        }
        out.truncate(count);
        out
    }
}

#[derive(Clone, Debug)]
pub struct Stratum {
    pub region: Region,
    pub dim: usize,
    /// Polynomial parametrizations, each `n` polynomials in `dim` parameters.
    pub charts: Vec<Vec<PolyExpr>>,
}

#[derive(Clone, Debug)]
pub struct Candidate {
    pub vars: Vec<String>,
    pub domain: Formula,
    pub strata: Vec<Stratum>,
    /// Sets whose indicator functions must also be almost translation invariant.
    pub reflects: Vec<Formula>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct StratumFile {
    pub piece: String,
    #[serde(default)]
    pub minus: Vec<String>,
    pub dim: usize,
    #[serde(default)]
    pub charts: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct CandidateFile {
    #[serde(default)]
    pub vars: Option<Vec<String>>,
    #[serde(default)]
    pub domain: Option<String>,
    pub strata: Vec<StratumFile>,
    #[serde(default)]
    pub reflects: Vec<String>,
}

fn texts_vars(texts: &[&str]) -> Result<Vec<String>> {
    let mut vars: Vec<String> = Vec::new();
    for t in texts {
        // unparsable texts are reported, with their field, by `build`
        let Ok((vs, _)) = parse_raw_union(t, None) else { continue };
        for v in vs {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
    }
    canonical_order(&mut vars);
    Ok(vars)
}

impl CandidateFile {
    pub fn build(&self) -> Result<Candidate> {
        let vars = match &self.vars {
            Some(v) => v.clone(),
            None => {
                let mut texts: Vec<&str> = Vec::new();
                for s in &self.strata {
                    texts.push(&s.piece);
                    texts.extend(s.minus.iter().map(|m| m.as_str()));
                }
                texts.extend(self.reflects.iter().map(|r| r.as_str()));
                if let Some(d) = &self.domain {
                    texts.push(d);
                }
                texts_vars(&texts)?
            }
        };
        // errors name the field they came from, e.g. `strata[1].piece`
        let f = |t: &str, field: String| parse_union(t, Some(&vars)).map_err(|e| Error::Input(format!("{field}: {e}")));
        let mut strata = Vec::new();
        for (i, s) in self.strata.iter().enumerate() {
            let include = f(&s.piece, format!("strata[{i}].piece"))?;
            let exclude = s.minus.iter().enumerate().map(|(j, m)| f(m, format!("strata[{i}].minus[{j}]"))).collect::<Result<_>>()?;
            let region = Region { include, exclude };
            let mut charts = Vec::new();
            for (j, c) in s.charts.iter().enumerate() {
                let field = format!("strata[{i}].charts[{j}]");
                if c.len() != vars.len() {
                    return Err(Error::Input(format!("{field}: chart has {} components, expected {}", c.len(), vars.len())));
                }
                let (params, polys) = parse_poly_tuple(c).map_err(|e| Error::Input(format!("{field}: {e}")))?;
                if params.len() > s.dim {
                    return Err(Error::Input(format!("{field}: chart uses {} parameters for a stratum of dimension {}", params.len(), s.dim)));
                }
                // constant charts of points still need `dim` parameters
                let mut names = params.clone();
                let mut k = 0;
                while names.len() < s.dim {
                    names.push(format!("p{k}"));
                    k += 1;
                }
                let map: Vec<usize> = (0..params.len()).collect();
                charts.push(polys.iter().map(|p| p.embed(names.clone(), &map)).collect());
            }
            strata.push(Stratum { region, dim: s.dim, charts });
        }
        let domain = match &self.domain {
            Some(d) => f(d, "domain".into())?,
            None => vec![DefinablePiece::everything(vars.clone())],
        };
        let reflects = self.reflects.iter().enumerate().map(|(i, r)| f(r, format!("reflects[{i}]"))).collect::<Result<Vec<_>>>()?;
        Ok(Candidate { vars, domain, strata, reflects })
    }
}

impl Candidate {
    pub fn from_json(text: &str) -> Result<Candidate> {
        let file: CandidateFile = serde_json::from_str(text)
            .map_err(|e| Error::Input(e.to_string()))?;
        file.build()
    }

    pub fn n(&self) -> usize {
        self.vars.len()
    }

    pub fn strata_containing(&self, x: &[Series]) -> Vec<usize> {
        (0..self.strata.len()).filter(|&i| self.strata[i].region.contains(x)).collect()
    }

    pub fn stratum_of(&self, x: &[Series]) -> Option<usize> {
        (0..self.strata.len()).find(|&i| self.strata[i].region.contains(x))
    }

    fn signature(&self, x: &[Series]) -> (Option<usize>, Vec<bool>) {
        (self.stratum_of(x), self.reflects.iter().map(|f| union_holds(f, x)).collect())
    }
}

fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

fn points_for(pairs: usize) -> usize {
    let mut k = 2;
    while pair_count(k) < pairs {
        k += 1;
    }
    k
}

#[derive(Clone, Debug, Serialize)]
pub struct PairReport {
    pub pairs: usize,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violating_pair: Option<(Vec<Series>, Vec<Series>)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

fn check_pairs(
    samples: &[Vec<Series>],
    pairs: usize,
    mut test: impl FnMut(&[Series], &[Series]) -> Result<Option<String>>,
) -> Result<PairReport> {
    let mut checked = 0;
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            if checked >= pairs {
                break;
            }
            checked += 1;
            if let Some(d) = test(&samples[i], &samples[j])? {
                return Ok(PairReport {
                    pairs: checked,
                    holds: false,
                    violating_pair: Some((samples[i].clone(), samples[j].clone())),
                    detail: Some(d),
                });
            }
        }
    }
    Ok(PairReport { pairs: checked, holds: true, violating_pair: None, detail: None })
}

pub fn eval_map(phi: &[PolyExpr], x: &[Series]) -> Vec<Series> {
    phi.iter().map(|p| p.eval(x)).collect()
}

/// `rvo(φ(x) - φ(y)) = rvo(x - y)` on sampled pairs of `samples`.
pub fn risometry_on(phi: &[PolyExpr], samples: &[Vec<Series>], pairs: usize) -> Result<PairReport> {
    let images: Vec<Vec<Series>> = samples.iter().map(|x| eval_map(phi, x)).collect();
    let index = |x: &[Series]| samples.iter().position(|s| s == x).unwrap();
    check_pairs(samples, pairs, |x, y| {
        let a = rvo_n(&sub_tuple(&images[index(x)], &images[index(y)]))?;
        let b = rvo_n(&sub_tuple(x, y))?;
        Ok(if a == b { None } else { Some(format!("rv(φ(x) - φ(y)) = {a}, rv(x - y) = {b}")) })
    })
}

pub fn risometry_check(phi: &[PolyExpr], domain: &DefinablePiece, pairs: usize, seed: u64, cfg: &SampleConfig) -> Result<PairReport> {
    if phi.len() != domain.dim() {
        return Err(Error::Input(format!("map has {} components on a {}-dimensional domain", phi.len(), domain.dim())));
    }
    let samples = sample_piece(domain, points_for(pairs), seed, cfg)?;
    risometry_on(phi, &samples, pairs)
}

/// `φ ∘ ψ` for maps given by polynomial tuples over the same variables.
pub fn compose_maps(phi: &[PolyExpr], psi: &[PolyExpr]) -> Vec<PolyExpr> {
    phi.iter().map(|p| p.compose(psi)).collect()
}

/// Residue-field span of the differences of `points`, which must lie in O^n.
pub fn affine_direction(points: &[Vec<Series>]) -> Result<Vec<Vec<Q>>> {
    for x in points {
        for c in x {
            if c.val_checked()? < Value::Finite(Q::zero()) {
                return Err(Error::Domain(format!("{c} lies outside O_R")));
            }
        }
    }
    let Some(first) = points.first() else { return Ok(Vec::new()) };
    let mut rows = Vec::new();
    for x in &points[1..] {
        rows.push(sub_tuple(x, first).iter().map(res).collect::<Result<Vec<Q>>>()?);
    }
    Ok(rref(&rows).0)
}

/// Differences rescaled by their smallest valuation, so that their residues see the spread.
pub fn normalized_differences(points: &[Vec<Series>]) -> Result<Vec<Vec<Series>>> {
    let Some(first) = points.first() else { return Ok(Vec::new()) };
    let diffs: Vec<Vec<Series>> = points[1..].iter().map(|x| sub_tuple(x, first)).collect();
    let mut low: Option<Q> = None;
    for d in &diffs {
        if let Value::Finite(v) = val_tuple_checked(d)? {
            if low.as_ref().is_none_or(|l| v < *l) {
                low = Some(v);
            }
        }
    }
    let Some(low) = low else { return Ok(vec![vec![Series::zero(); first.len()]]) };
    let mut out = vec![vec![Series::zero(); first.len()]];
    for d in diffs {
        out.push(d.iter().map(|c| c.scale(&Q::one(), &-low.clone())).collect());
    }
    Ok(out)
}

/// Coordinates onto which projection restricts to an isomorphism on the span of `basis`.
pub fn exhibition_find(basis: &[Vec<Q>]) -> Vec<usize> {
    rref(basis).1
}

#[derive(Clone, Debug, Serialize)]
pub struct GraphFit {
    pub projection: Vec<usize>,
    pub table: Vec<(Vec<Series>, Vec<Series>)>,
    pub is_graph: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collision: Option<(Vec<Series>, Vec<Series>)>,
}

pub fn graph_fit(points: &[Vec<Series>], projection: &[usize]) -> GraphFit {
    let n = points.first().map_or(0, |p| p.len());
    let rest: Vec<usize> = (0..n).filter(|i| !projection.contains(i)).collect();
    let mut table: Vec<(Vec<Series>, Vec<Series>)> = Vec::new();
    let mut collision = None;
    for x in points {
        let key: Vec<Series> = projection.iter().map(|&i| x[i].clone()).collect();
        let value: Vec<Series> = rest.iter().map(|&i| x[i].clone()).collect();
        match table.iter().find(|(k, _)| *k == key) {
            Some((_, v)) if *v != value => {
                if collision.is_none() {
                    let mut other = x.clone();
                    for (slot, &i) in rest.iter().enumerate() {
                        other[i] = v[slot].clone();
                    }
                    collision = Some((other, x.clone()));
                }
            }
            Some(_) => {}
            None => table.push((key, value)),
        }
    }
    GraphFit { projection: projection.to_vec(), is_graph: collision.is_none(), table, collision }
}

/// Checks that `h ∘ M⁻¹` is a risometry on samples, i.e. `rvo(h(x) - h(y)) = rvo(M(x - y))`.
pub fn straightening_check(
    h: &[PolyExpr],
    m: &[Vec<Series>],
    domain: &DefinablePiece,
    pairs: usize,
    seed: u64,
    cfg: &SampleConfig,
) -> Result<PairReport> {
    let n = domain.dim();
    if m.len() != n || m.iter().any(|r| r.len() != n) {
        return Err(Error::Input(format!("matrix must be {n}×{n}")));
    }
    for r in m {
        for c in r {
            if c.val_checked()? < Value::Finite(Q::zero()) {
                return Err(Error::Precondition(format!("matrix entry {c} lies outside O_R")));
            }
        }
    }
    let det = crate::linalg::det_series(m);
    if det.val_checked()? != Value::Finite(Q::zero()) {
        return Err(Error::Precondition(format!("det = {det} is not a unit")));
    }
    let samples = sample_piece(domain, points_for(pairs), seed, cfg)?;
    let images: Vec<Vec<Series>> = samples.iter().map(|x| eval_map(h, x)).collect();
    let index = |x: &[Series]| samples.iter().position(|s| s == x).unwrap();
    check_pairs(&samples, pairs, |x, y| {
        let d = sub_tuple(x, y);
        let md: Vec<Series> = m.iter().map(|r| crate::series::dot(r, &d)).collect();
        let a = rvo_n(&sub_tuple(&images[index(x)], &images[index(y)]))?;
        let b = rvo_n(&md)?;
        Ok(if a == b { None } else { Some(format!("rv(h(x) - h(y)) = {a}, rv(M(x - y)) = {b}")) })
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RainbowEntry {
    /// `+∞` on the stratum itself; absent when no nearby point was resolved.
    pub distance: Option<Value>,
    pub class: Option<RvNElement>,
}

/// Points of the region met by moving `x` along single coordinate lines.
fn line_projections(region: &Region, x: &[Series], opts: &RootOptions) -> Vec<Vec<Series>> {
    let mut out = Vec::new();
    for piece in &region.include {
        for a in piece.atoms.iter().filter(|a| a.is_equation()) {
            for j in a.poly().support() {
                let mut vals = x.to_vec();
                vals[j] = Series::zero();
                let coeffs = a.poly().specialize(j, &vals);
                if coeffs.len() < 2 {
                    continue;
                }
                for r in real_roots_separated(&coeffs, opts).unwrap_or_default() {
                    let mut y = x.to_vec();
                    y[j] = r;
                    if region.contains(&y) && !out.contains(&y) {
                        out.push(y);
                    }
                }
            }
        }
    }
    out
}

/// Per stratum: the largest `val(x - s)` over projected stratum points and the
/// class of that difference. A coarsening of the full rainbow, reported as such.
pub fn rainbow_code(x: &[Series], cand: &Candidate, opts: &RootOptions) -> Vec<RainbowEntry> {
    cand.strata
        .iter()
        .map(|s| {
            if s.region.contains(x) {
                return RainbowEntry { distance: Some(Value::Infinity), class: Some(RvNElement::Zero) };
            }
            let mut best: Option<(Value, RvNElement)> = None;
            for y in line_projections(&s.region, x, opts) {
                let d = sub_tuple(x, &y);
                let (Ok(v), Ok(c)) = (val_tuple_checked(&d), rvo_n(&d)) else { continue };
                if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
                    best = Some((v, c));
                }
            }
            match best {
                Some((v, c)) => RainbowEntry { distance: Some(v), class: Some(c) },
                None => RainbowEntry { distance: None, class: None },
            }
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub sample: SampleConfig,
    pub balls: usize,
    pub points_per_ball: usize,
    pub shifts_per_point: usize,
    /// Attempts per witness search inside a ball.
    pub budget: usize,
    pub precision: Q,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            // half-integer exponents keep solved coordinates (square roots, cube
            // roots of sums) on a coarse exponent lattice
            sample: SampleConfig { max_exp_denominator: 2, ..SampleConfig::default() },
            balls: 40,
            points_per_ball: 12,
            shifts_per_point: 3,
            budget: 1000,
            precision: Q::from_integer(BigInt::from(12)),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BallWitness {
    pub centre: Vec<Series>,
    pub radius: Value,
    pub level: usize,
    pub reason: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<(Vec<Series>, Vec<Series>)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TstratReport {
    pub verdict: String,
    pub dimension_failures: Vec<String>,
    pub partition_points: usize,
    pub partition_failures: Vec<String>,
    pub balls_checked: usize,
    /// Number of balls whose lowest met stratum has each index.
    pub balls_by_level: Vec<usize>,
    pub pairs_checked: usize,
    pub violations: Vec<BallWitness>,
    pub note: String,
}

impl TstratReport {
    pub fn passed(&self) -> bool {
        self.dimension_failures.is_empty() && self.partition_failures.is_empty() && self.violations.is_empty()
    }
}

fn chart_jacobian_rank(chart: &[PolyExpr], params: &[Series]) -> usize {
    let k = params.len();
    let rows: Vec<Vec<Q>> = chart
        .iter()
        .map(|c| (0..k).map(|j| c.partial(j).eval(params).as_rational().unwrap_or_else(Q::zero)).collect())
        .collect();
    if k == 0 {
        0
    } else {
        rank(&rows)
    }
}

fn small_rational(rng: &mut ChaCha8Rng) -> Q {
    Q::new(BigInt::from(rng.gen_range(-6..=6)), BigInt::from(rng.gen_range(1..=3)))
}

fn check_dimensions(cand: &Candidate, rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut out = Vec::new();
    for (d, s) in cand.strata.iter().enumerate() {
        if s.dim > d {
            out.push(format!("S_{d} declares dimension {} > {d}", s.dim));
        }
        for (ci, chart) in s.charts.iter().enumerate() {
            for _ in 0..5 {
                let params: Vec<Series> = (0..s.dim).map(|_| Series::constant(small_rational(rng))).collect();
                let x = eval_map(chart, &params);
                if !s.region.contains(&x) {
                    // charts may cover the closure; only rank is enforced there
                    continue;
                }
                let r = chart_jacobian_rank(chart, &params);
                if r != s.dim {
                    out.push(format!("S_{d} chart {ci} has rank {r} at a sampled parameter, expected {}", s.dim));
                    break;
                }
            }
        }
    }
    out
}

enum Solved {
    Points(Vec<Vec<Series>>),
    Free,
}

/// Points of the region whose `proj` coordinates equal `q`, found by solving
/// its equations one coordinate at a time, restricted to the ball.
fn solve_fiber(region: &Region, proj: &[usize], q: &[Series], n: usize, ball: (&[Series], &Q), opts: &RootOptions) -> Solved {
    let mut found: Vec<Vec<Series>> = Vec::new();
    for piece in &region.include {
        let eqs: Vec<&PolyExpr> = piece.atoms.iter().filter(|a| a.is_equation()).map(|a| a.poly()).collect();
        let mut start: Vec<Option<Series>> = vec![None; n];
        for (k, &i) in proj.iter().enumerate() {
            start[i] = Some(q[k].clone());
        }
        let mut stack = vec![start];
        while let Some(vals) = stack.pop() {
            if vals.iter().all(|v| v.is_some()) {
                let x: Vec<Series> = vals.into_iter().map(|v| v.unwrap()).collect();
                let inside = val_tuple(&sub_tuple(&x, ball.0)) > Value::Finite(ball.1.clone());
                if inside && region.contains(&x) && !found.contains(&x) {
                    found.push(x);
                }
                continue;
            }
            let mut progressed = false;
            let mut dead = false;
            for e in &eqs {
                let p = e.substitute(&vals);
                let supp = p.support();
                if supp.is_empty() {
                    let c = p.constant_term();
                    let vanishes = c.is_zero() || c.is_unknown();
                    if !vanishes {
                        dead = true;
                        break;
                    }
                    continue;
                }
                if supp.len() == 1 {
                    let j = supp[0];
                    let coeffs = p.specialize(j, &vec![Series::zero(); n]);
                    for r in real_roots_separated(&coeffs, opts).unwrap_or_default() {
                        let mut next = vals.clone();
                        next[j] = Some(r);
                        stack.push(next);
                    }
                    progressed = true;
                    break;
                }
            }
            if dead {
                continue;
            }
            if !progressed {
                return Solved::Free;
            }
        }
    }
    Solved::Points(found)
}

fn sub_seed(seed: u64, k: u64) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(k.wrapping_mul(0xbf58_476d_1ce4_e5b9))
}

struct BallCtx<'a> {
    cand: &'a Candidate,
    centre: Vec<Series>,
    radius: Q,
    cfg: &'a VerifyConfig,
    opts: RootOptions,
}

impl BallCtx<'_> {
    fn inside(&self, x: &[Series]) -> bool {
        val_tuple(&sub_tuple(x, &self.centre)) > Value::Finite(self.radius.clone())
    }

    /// Tests invariance under translations along `proj` after straightening
    /// the lowest stratum into a graph over `proj`.
    fn straightened_invariance(
        &self,
        m: usize,
        proj: &[usize],
        lower: &[Vec<Series>],
        pts: &[Vec<Series>],
        rng: &mut ChaCha8Rng,
        pairs: &mut usize,
    ) -> std::result::Result<(), (String, Option<(Vec<Series>, Vec<Series>)>)> {
        let n = self.cand.n();
        let region = &self.cand.strata[m].region;
        let ball = (self.centre.as_slice(), &self.radius);
        let project = |x: &[Series]| -> Vec<Series> { proj.iter().map(|&i| x[i].clone()).collect() };
        for l in lower {
            match solve_fiber(region, proj, &project(l), n, ball, &self.opts) {
                Solved::Free => return Err((format!("S_{m} is not a graph over coordinates {proj:?}"), None)),
                Solved::Points(ps) if ps.len() > 1 => {
                    return Err((format!("S_{m} has {} points over one projection", ps.len()), Some((ps[0].clone(), ps[1].clone()))));
                }
                _ => {}
            }
        }
        let cfg = &self.cfg.sample;
        let mut s = Sampler::new(cfg, rng.gen());
        for x in pts {
            let sig = self.cand.signature(x);
            let q = project(x);
            let c = match solve_fiber(region, proj, &q, n, ball, &self.opts) {
                Solved::Free => return Err((format!("S_{m} is not a graph over coordinates {proj:?}"), None)),
                Solved::Points(ps) if ps.len() == 1 => ps.into_iter().next().unwrap(),
                Solved::Points(ps) if ps.len() > 1 => {
                    return Err((format!("S_{m} has {} points over one projection", ps.len()), Some((ps[0].clone(), ps[1].clone()))));
                }
                Solved::Points(_) => continue,
            };
            for _ in 0..self.cfg.shifts_per_point {
                let q2: Vec<Series> =
                    q.iter().map(|a| a + &Series::monomial(s.coeff(), s.exponent_above(&self.radius))).collect();
                let c2 = match solve_fiber(region, proj, &q2, n, ball, &self.opts) {
                    Solved::Points(ps) if ps.len() == 1 => ps.into_iter().next().unwrap(),
                    _ => continue,
                };
                let mut x2 = x.clone();
                for i in 0..n {
                    x2[i] = match proj.iter().position(|&p| p == i) {
                        Some(k) => q2[k].clone(),
                        None => &(&x[i] - &c[i]) + &c2[i],
                    };
                }
                if !self.inside(&x2) {
                    continue;
                }
                *pairs += 1;
                if self.cand.signature(&x2) != sig {
                    return Err((
                        format!("membership changes under a straightened shift along {proj:?}"),
                        Some((x.clone(), x2)),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Necessary conditions for a t-stratification, checked on sampled balls.
pub fn tstrat_verify(cand: &Candidate, cfg: &VerifyConfig) -> Result<TstratReport> {
    let n = cand.n();
    if cand.strata.len() != n + 1 {
        return Err(Error::Input(format!("expected {} strata S_0..S_{n}, got {}", n + 1, cand.strata.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dimension_failures = check_dimensions(cand, &mut rng);

    let mut small = cfg.sample.clone();
    small.max_attempts = cfg.budget.max(1);
    let mut pool: Vec<Vec<Series>> = Vec::new();
    for (k, piece) in cand.domain.iter().enumerate() {
        pool.extend(sample_piece(piece, cfg.balls, sub_seed(cfg.seed, 100 + k as u64), &small).unwrap_or_default());
    }
    for (i, s) in cand.strata.iter().enumerate() {
        pool.extend(s.region.sample(cfg.balls / 2 + 1, sub_seed(cfg.seed, 200 + i as u64), &small));
    }
    let mut partition_failures = Vec::new();
    for x in &pool {
        if !union_holds(&cand.domain, x) {
            continue;
        }
        let hits = cand.strata_containing(x);
        if hits.len() != 1 {
            let shown: Vec<String> = x.iter().map(|c| c.to_string()).collect();
            partition_failures.push(format!("({}) lies in strata {hits:?}", shown.join(", ")));
        }
    }

    let radii = [Q::from_integer((-1).into()), Q::zero(), Q::new(1.into(), 2.into()), Q::one(), Q::from_integer(2.into())];
    let opts = RootOptions::new(cfg.precision.clone());
    let mut balls_by_level = vec![0; n + 1];
    let mut violations = Vec::new();
    let mut pairs = 0;
    let mut checked = 0;
    // balls around stratum points first, so every level is exercised
    let mut centres: Vec<Vec<Series>> = Vec::new();
    let per = pool.len().max(1);
    for k in 0..cfg.balls {
        if pool.is_empty() {
            break;
        }
        centres.push(pool[(k * 7919 + rng.gen_range(0..per)) % per].clone());
    }
    for (b, centre) in centres.into_iter().enumerate() {
        let radius = radii[rng.gen_range(0..radii.len())].clone();
        let ctx = BallCtx { cand, centre: centre.clone(), radius: radius.clone(), cfg, opts: opts.clone() };
        let seed_b = sub_seed(cfg.seed, 1000 + b as u64);
        // lowest stratum meeting the ball
        let mut m = cand.stratum_of(&centre).unwrap_or(n);
        let mut witnesses: Vec<Vec<Vec<Series>>> = vec![Vec::new(); n + 1];
        for i in 0..=n {
            let found = cand.strata[i].region.sample_in_ball(&centre, &radius, cfg.points_per_ball, sub_seed(seed_b, i as u64), &small);
            if !found.is_empty() && i < m {
                m = i;
            }
            witnesses[i] = found;
        }
        checked += 1;
        balls_by_level[m] += 1;
        if m == 0 {
            continue;
        }
        let mut pts: Vec<Vec<Series>> = witnesses[m..].iter().flatten().cloned().collect();
        let generic = sample_piece_in_ball(&DefinablePiece::everything(cand.vars.clone()), &centre, &radius, cfg.points_per_ball, seed_b, &small);
        pts.extend(generic);
        pts.retain(|x| ctx.inside(x));
        if m == n {
            let sig = cand.signature(&centre);
            if let Some(x) = pts.iter().find(|x| cand.signature(x) != sig) {
                violations.push(BallWitness {
                    centre,
                    radius: Value::Finite(radius),
                    level: m,
                    reason: "membership varies on a ball meeting only the top stratum".into(),
                    pair: Some((ctx.centre.clone(), x.clone())),
                });
            }
            pairs += pts.len();
            continue;
        }
        let lower = &witnesses[m];
        let mut candidates: Vec<Vec<usize>> = Vec::new();
        if let Ok(diffs) = normalized_differences(lower) {
            if let Ok(v) = affine_direction(&diffs) {
                if v.len() == m {
                    candidates.push(exhibition_find(&v));
                }
            }
        }
        for sset in crate::linalg::subsets(n, m) {
            if !candidates.contains(&sset) {
                candidates.push(sset);
            }
        }
        let mut last_err = None;
        let mut ok = false;
        for proj in &candidates {
            match ctx.straightened_invariance(m, proj, lower, &pts, &mut rng, &mut pairs) {
                Ok(()) => {
                    ok = true;
                    break;
                }
                Err(e) => last_err = Some(e),
            }
        }
        if !ok {
            let (reason, pair) = last_err.unwrap_or(("no projection tested".into(), None));
            violations.push(BallWitness { centre, radius: Value::Finite(radius), level: m, reason, pair });
        }
    }
    let mut report = TstratReport {
        verdict: String::new(),
        dimension_failures,
        partition_points: pool.len(),
        partition_failures,
        balls_checked: checked,
        balls_by_level,
        pairs_checked: pairs,
        violations,
        note: "sampled necessary conditions; a pass is evidence, not a proof".into(),
    };
    report.verdict = if report.passed() { "necessary-conditions-pass".into() } else { "violation".into() };
    Ok(report)
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

    fn map(texts: &[&str]) -> Vec<PolyExpr> {
        texts.iter().map(|t| parse_poly_vars(t, &vars(texts.len())).unwrap()).collect()
    }

    fn s(t: &str) -> Series {
        Series::parse(t).unwrap()
    }

    #[test]
    fn risometries() {
        let cfg = SampleConfig::default();
        let o = parse_formula_vars("val(x) >= 0", Some(&vars(1))).unwrap();
        assert!(risometry_check(&map(&["x + 3"]), &o, 300, 1, &cfg).unwrap().holds);
        assert!(risometry_check(&map(&["x + t*x^2"]), &o, 300, 1, &cfg).unwrap().holds);
        let r = risometry_check(&map(&["2*x"]), &o, 300, 1, &cfg).unwrap();
        assert!(!r.holds);
        assert!(r.violating_pair.is_some());
    }

    #[test]
    fn affine_directions_and_exhibitions() {
        let graph: Vec<Vec<Series>> = ["0", "1", "3", "1/2 + t"].iter().map(|a| vec![s(a), &s(a) * &Series::t()]).collect();
        let v = affine_direction(&graph).unwrap();
        assert_eq!(v, vec![vec![q(1), q(0)]]);
        assert_eq!(exhibition_find(&v), vec![0]);
        assert_eq!(exhibition_find(&[vec![q(1), q(1)]]), vec![0]);
        assert!(exhibition_find(&[]).is_empty());
        let plane = vec![vec![s("0"), s("0")], vec![s("1"), s("0")], vec![s("0"), s("1")]];
        assert_eq!(affine_direction(&plane).unwrap().len(), 2);
        assert!(affine_direction(&[vec![s("1"), s("2")]]).unwrap().is_empty());
        assert!(matches!(affine_direction(&[vec![s("t^(-1)")], vec![s("0")]]), Err(Error::Domain(_))));
    }

    #[test]
    fn graph_fits() {
        let graph: Vec<Vec<Series>> = ["0", "1", "3"].iter().map(|a| vec![s(a), &s(a) * &Series::t()]).collect();
        let g = graph_fit(&graph, &[0]);
        assert!(g.is_graph);
        assert_eq!(g.table[1], (vec![s("1")], vec![s("t")]));
        let plane = vec![vec![s("1"), s("0")], vec![s("1"), s("1")]];
        assert!(!graph_fit(&plane, &[0]).is_graph);
        assert!(graph_fit(&plane[..1], &[0]).is_graph);
    }

    #[test]
    fn straightening() {
        let cfg = SampleConfig::default();
        let d = parse_formula_vars("val(x) >= 0 & val(y) >= 0", Some(&vars(2))).unwrap();
        let id = vec![vec![Series::one(), Series::zero()], vec![Series::zero(), Series::one()]];
        let m = vec![vec![Series::one(), Series::int(2)], vec![Series::zero(), Series::one()]];
        assert!(straightening_check(&map(&["x + 2*y", "y"]), &m, &d, 200, 1, &cfg).unwrap().holds);
        assert!(straightening_check(&map(&["x", "t*x^2 + y"]), &id, &d, 200, 1, &cfg).unwrap().holds);
        let singular = vec![vec![Series::one(), Series::one()], vec![Series::one(), &Series::one() + &Series::t()]];
        assert!(matches!(straightening_check(&map(&["x", "y"]), &singular, &d, 10, 1, &cfg), Err(Error::Precondition(_))));
    }

    #[test]
    fn rainbow_codes() {
        let cand = Candidate::from_json(r#"{"strata": [{"piece": "x = 0", "dim": 0}, {"piece": "x != 0", "dim": 1}]}"#).unwrap();
        let opts = RootOptions::new(q(8));
        let a = rainbow_code(&[s("1 + t")], &cand, &opts);
        let b = rainbow_code(&[s("1 + t^2")], &cand, &opts);
        assert_eq!(a[0].distance, Some(Value::Finite(q(0))));
        assert_eq!(a[0].class, b[0].class);
        let axis = Candidate::from_json(
            r#"{"vars": ["x", "y"], "strata": [{"piece": "1 = 0", "dim": 0}, {"piece": "y = 0", "dim": 1}, {"piece": "y != 0", "dim": 2}]}"#,
        )
        .unwrap();
        let c = rainbow_code(&[s("2"), s("0")], &axis, &opts);
        assert_eq!(c[1].distance, Some(Value::Infinity));
    }

    fn quick() -> VerifyConfig {
        VerifyConfig { balls: 24, ..VerifyConfig::default() }
    }

    #[test]
    fn axis_in_plane_passes() {
        let cand = Candidate::from_json(
            r#"{"vars": ["x", "y"], "strata": [{"piece": "1 = 0", "dim": 0}, {"piece": "y = 0", "dim": 1}, {"piece": "y != 0", "dim": 2}]}"#,
        )
        .unwrap();
        let r = tstrat_verify(&cand, &quick()).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.balls_by_level[1] > 0);
    }

    #[test]
    fn cross_needs_its_origin() {
        let with = Candidate::from_json(
            r#"{"strata": [{"piece": "x = 0 & y = 0", "dim": 0}, {"piece": "x*y = 0", "minus": ["x = 0 & y = 0"], "dim": 1},
                {"piece": "x*y != 0", "dim": 2}]}"#,
        )
        .unwrap();
        let r = tstrat_verify(&with, &quick()).unwrap();
        assert!(r.passed(), "{r:?}");
        let without = Candidate::from_json(
            r#"{"vars": ["x", "y"], "strata": [{"piece": "1 = 0", "dim": 0}, {"piece": "x*y = 0", "dim": 1}, {"piece": "x*y != 0", "dim": 2}]}"#,
        )
        .unwrap();
        let r = tstrat_verify(&without, &quick()).unwrap();
        assert!(!r.passed());
        assert!(r.violations.iter().any(|v| v.level == 1));
    }
}
