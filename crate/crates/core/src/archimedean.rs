//! Real semialgebraic data read over the Puiseux field: lifting, Whitney
//! conditions along Puiseux arcs, and a float probe for the exponential graph.
//!
//! The Puiseux field stands in for an ultrapower of the reals: both are real
//! closed fields with a convex valuation ring whose residue field contains the
//! reals' rational points, and every check here uses only that shared structure.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{AtomicCondition, DefinablePiece};
use crate::linalg::{in_plucker_span, kernel, maximal_minors, rref};
use crate::poly::PolyExpr;
use crate::rv::rvo_n;
use crate::series::{sub_tuple, Q, Series};
use crate::tstrat::{eval_map, tstrat_verify, Candidate, TstratReport, VerifyConfig};

fn is_rational_piece(p: &DefinablePiece) -> bool {
    p.atoms.iter().all(|a| {
        a.poly().has_rational_coefficients()
            && match a {
                AtomicCondition::Sign { .. } => true,
                // rv and val conditions are not part of the real language
                _ => false,
            }
    })
}

/// The non-standard version of a real set: the same conditions read over series.
pub fn star_lift_piece(p: &DefinablePiece) -> Result<DefinablePiece> {
    if !is_rational_piece(p) {
        return Err(Error::Input(format!("{p} is not a real semialgebraic condition with rational coefficients")));
    }
    Ok(p.clone())
}

pub fn star_lift(c: &Candidate) -> Result<Candidate> {
    for s in &c.strata {
        for f in std::iter::once(&s.region.include).chain(s.region.exclude.iter()) {
            for p in f {
                star_lift_piece(p)?;
            }
        }
        for chart in &s.charts {
            if chart.iter().any(|p| !p.has_rational_coefficients()) {
                return Err(Error::Input("charts must have rational coefficients".into()));
            }
        }
    }
    Ok(c.clone())
}

/// Membership of a rational point in the real set, evaluated in Q.
pub fn real_contains(p: &DefinablePiece, x: &[Q]) -> Result<bool> {
    for a in &p.atoms {
        let mut v = Q::zero();
        for (e, c) in a.poly().terms() {
            let c = c.as_rational().ok_or_else(|| Error::Input("non-rational coefficient".into()))?;
            let m = e.iter().zip(x).fold(c, |acc, (&k, xi)| acc * num_traits::pow(xi.clone(), k as usize));
            v += m;
        }
        if !a.rel().holds(v.cmp(&Q::zero())) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn archimedean_tstrat_check(c: &Candidate, cfg: &VerifyConfig) -> Result<TstratReport> {
    tstrat_verify(&star_lift(c)?, cfg)
}

#[derive(Clone, Debug, Serialize)]
pub struct ArcWitness {
    pub params: Vec<Series>,
    pub point: Vec<Series>,
    pub tangent_limit: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub secant_limit: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct WhitneyReport {
    pub upper: usize,
    pub lower: usize,
    pub point: Vec<String>,
    pub curves_tested: usize,
    pub a_holds: bool,
    pub b_holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_witness: Option<ArcWitness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_witness: Option<ArcWitness>,
    /// (b) held on every arc while (a) failed on one.
    pub inconsistent: bool,
    pub note: String,
}

fn qs(x: &[Q]) -> Vec<Series> {
    x.iter().map(|c| Series::constant(c.clone())).collect()
}

fn show_q(x: &[Q]) -> Vec<String> {
    x.iter().map(|c| c.to_string()).collect()
}

/// Tangent space of the lower stratum at `p` from the gradients of its equations.
fn lower_tangent(c: &Candidate, lower: usize, p: &[Q]) -> Result<(Vec<Vec<Q>>, Vec<Vec<Q>>, Vec<Q>, bool)> {
    let s = &c.strata[lower];
    let n = c.n();
    let ps = qs(p);
    let piece = s
        .region
        .include
        .iter()
        .find(|pc| crate::tstrat::piece_holds(pc, &ps))
        .ok_or_else(|| Error::Precondition(format!("({}) is not on S_{lower}", show_q(p).join(", "))))?;
    let eqs: Vec<&PolyExpr> = piece.atoms.iter().filter(|a| a.is_equation()).map(|a| a.poly()).collect();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for f in &eqs {
        let row: Vec<Q> = (0..n).map(|i| f.partial(i).eval(&ps).as_rational().unwrap_or_else(Q::zero)).collect();
        // affine part, used only when the stratum is affine
        let lin: Q = row.iter().zip(p).map(|(a, b)| a * b).fold(Q::zero(), |x, y| x + y);
        rhs.push(lin);
        rows.push(row);
    }
    let tangent = kernel(&rows, n);
    let affine = s.dim == 0 || eqs.iter().all(|f| f.total_degree().unwrap_or(0) <= 1);
    Ok((tangent, rows, rhs, affine))
}

/// Orthogonal projection onto `{x : A x = b}` for rational `A` of full row rank.
fn project_affine(a: &[Vec<Q>], b: &[Q], x: &[Series]) -> Vec<Series> {
    let (basis, _) = rref(a);
    if basis.is_empty() {
        return x.to_vec();
    }
    let m = a.len();
    // keep independent rows only
    let mut rows: Vec<Vec<Q>> = Vec::new();
    let mut rhs: Vec<Q> = Vec::new();
    for i in 0..m {
        let mut trial = rows.clone();
        trial.push(a[i].clone());
        if crate::linalg::rank(&trial) > rows.len() {
            rows = trial;
            rhs.push(b[i].clone());
        }
    }
    let k = rows.len();
    let g: Vec<Vec<Q>> = (0..k).map(|i| (0..k).map(|j| crate::linalg::dot_q(&rows[i], &rows[j])).collect()).collect();
    // invert the Gram matrix through [G | I]
    let aug: Vec<Vec<Q>> = (0..k)
        .map(|i| {
            let mut r = g[i].clone();
            r.extend((0..k).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    let (red, _) = rref(&aug);
    let inv: Vec<Vec<Q>> = red.iter().map(|r| r[k..].to_vec()).collect();
    let resid: Vec<Series> = (0..k)
        .map(|i| {
            let ax = rows[i].iter().zip(x).fold(Series::zero(), |acc, (c, xi)| &acc + &xi.scale(c, &Q::zero()));
            &ax - &Series::constant(rhs[i].clone())
        })
        .collect();
    let w: Vec<Series> = (0..k)
        .map(|i| (0..k).fold(Series::zero(), |acc, j| &acc + &resid[j].scale(&inv[i][j], &Q::zero())))
        .collect();
    x.iter()
        .enumerate()
        .map(|(c, xc)| {
            let corr = (0..k).fold(Series::zero(), |acc, i| &acc + &w[i].scale(&rows[i][c], &Q::zero()));
            xc - &corr
        })
        .collect()
}

fn preimage_grid(p: &[Q]) -> Vec<Q> {
    let mut g: Vec<Q> = Vec::new();
    for n in -6..=6 {
        g.push(Q::new(BigInt::from(n), BigInt::from(2)));
    }
    for c in p {
        for v in [c.clone(), -c.clone()] {
            if !g.contains(&v) {
                g.push(v);
            }
        }
    }
    g
}

/// Parameter values mapped exactly onto `p` by a chart.
fn chart_preimages(chart: &[PolyExpr], k: usize, p: &[Q]) -> Vec<Vec<Q>> {
    let grid = preimage_grid(p);
    let mut out = Vec::new();
    let mut idx = vec![0usize; k];
    loop {
        let u: Vec<Q> = idx.iter().map(|&i| grid[i].clone()).collect();
        let img = eval_map(chart, &qs(&u));
        if img.iter().zip(p).all(|(a, b)| a.as_rational().as_ref() == Some(b)) {
            out.push(u);
        }
        let mut pos = 0;
        loop {
            if pos == k {
                return out;
            }
            idx[pos] += 1;
            if idx[pos] < grid.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
        if k == 0 {
            return out;
        }
    }
}

/// Checks Whitney (a) and (b) for the pair (upper, lower) at `p` along Puiseux
/// arcs in the charts of the upper stratum. Limits of tangent spaces are read
/// off the leading terms of the chart's maximal minors.
pub fn whitney_check(c: &Candidate, upper: usize, lower: usize, p: &[Q], curves: usize, seed: u64) -> Result<WhitneyReport> {
    let n = c.n();
    let up = &c.strata[upper];
    if up.charts.is_empty() {
        return Err(Error::Precondition(format!("S_{upper} has no chart")));
    }
    let (t_lower, rows, rhs, affine) = lower_tangent(c, lower, p)?;
    let k = up.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<(usize, Vec<Q>)> = up
        .charts
        .iter()
        .enumerate()
        .flat_map(|(ci, ch)| chart_preimages(ch, k, p).into_iter().map(move |u| (ci, u)))
        .collect();
    let mut report = WhitneyReport {
        upper,
        lower,
        point: show_q(p),
        curves_tested: 0,
        a_holds: true,
        b_holds: true,
        a_witness: None,
        b_witness: None,
        inconsistent: false,
        note: String::new(),
    };
    if t_lower.len() != c.strata[lower].dim {
        // equations of the lower stratum do not cut out a manifold of its dimension here
        report.a_holds = false;
        report.b_holds = false;
        report.note = format!("S_{lower} is not smooth of dimension {} at p", c.strata[lower].dim);
        return Ok(report);
    }
    if k < n && !affine {
        return Err(Error::Unsupported(format!("nearest points on the non-affine stratum S_{lower}")));
    }
    if starts.is_empty() {
        report.note = "no chart of the upper stratum reaches p exactly; pair not incident here".into();
        return Ok(report);
    }
    let exps: Vec<Q> = [1, 2, 3, 4, 5, 6, 8].iter().map(|&m| Q::new(BigInt::from(m), BigInt::from(2))).collect();
    let ps = qs(p);
    let mut attempts = 0;
    while report.curves_tested < curves && attempts < curves * 20 {
        attempts += 1;
        let (ci, u0) = starts[rng.gen_range(0..starts.len())].clone();
        let chart = &up.charts[ci];
        let mut u: Vec<Series> = qs(&u0);
        let mut moved = false;
        for slot in u.iter_mut() {
            if rng.gen_bool(0.85) {
                let e = exps.choose(&mut rng).unwrap().clone();
                let mut cf = 0;
                while cf == 0 {
                    cf = rng.gen_range(-3..=3);
                }
                *slot = &*slot + &Series::monomial(Q::from_integer(BigInt::from(cf)), e);
                moved = true;
            }
        }
        if !moved {
            continue;
        }
        let gamma = eval_map(chart, &u);
        if gamma == ps || !up.region.contains(&gamma) {
            continue;
        }
        let cols: Vec<Vec<Series>> = (0..k).map(|j| chart.iter().map(|f| f.partial(j).eval(&u)).collect()).collect();
        let minors = if k == 0 { vec![Series::one()] } else { maximal_minors(&cols) };
        let Ok(cls) = rvo_n(&minors) else { continue };
        let Some(plucker) = cls.lead_vec().map(|v| v.to_vec()) else { continue };
        report.curves_tested += 1;
        if k == n {
            // an open stratum: its tangent space is everything
            continue;
        }
        let witness = |secant: Option<Vec<Q>>| ArcWitness {
            params: u.clone(),
            point: gamma.clone(),
            tangent_limit: show_q(&plucker),
            secant_limit: secant.map(|s| show_q(&s)),
        };
        if !t_lower.iter().all(|v| in_plucker_span(&plucker, n, k, v)) && report.a_holds {
            report.a_holds = false;
            report.a_witness = Some(witness(None));
        }
        let foot = if c.strata[lower].dim == 0 { ps.clone() } else { project_affine(&rows, &rhs, &gamma) };
        let secant = sub_tuple(&gamma, &foot);
        let Ok(sc) = rvo_n(&secant) else { continue };
        let Some(dir) = sc.lead_vec().map(|v| v.to_vec()) else { continue };
        if !in_plucker_span(&plucker, n, k, &dir) && report.b_holds {
            report.b_holds = false;
            report.b_witness = Some(witness(Some(dir)));
        }
    }
    report.inconsistent = report.b_holds && !report.a_holds;
    if report.curves_tested == 0 {
        report.note = "no admissible arc found".into();
    }
    Ok(report)
}

/// Rational points of a stratum from its charts at small parameter values.
pub fn base_points(c: &Candidate, stratum: usize, count: usize) -> Vec<Vec<Q>> {
    let s = &c.strata[stratum];
    let values: Vec<Q> = [0, 1, -1, 2, -2, 3].iter().map(|&v| Q::from_integer(BigInt::from(v))).collect();
    let mut out: Vec<Vec<Q>> = Vec::new();
    for chart in &s.charts {
        for shift in 0..values.len() {
            let u: Vec<Q> = (0..s.dim).map(|j| values[(shift + j) % values.len()].clone()).collect();
            let img = eval_map(chart, &qs(&u));
            let Some(pt) = img.iter().map(|x| x.as_rational()).collect::<Option<Vec<Q>>>() else { continue };
            if s.region.contains(&qs(&pt)) && !out.contains(&pt) {
                out.push(pt);
            }
            if out.len() >= count {
                return out;
            }
            if s.dim == 0 {
                break;
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct ImplicationReport {
    pub tstrat: TstratReport,
    pub tstrat_pass: bool,
    pub whitney: Vec<WhitneyReport>,
    pub whitney_pass: bool,
    /// A t-stratification pass together with a Whitney failure.
    pub implication_violated: bool,
}

/// Runs the t-stratification check and Whitney checks over incident pairs.
/// Whitney checks run regardless, so failing candidates still show their witnesses.
pub fn implication_suite(c: &Candidate, cfg: &VerifyConfig, curves: usize, points: usize) -> Result<ImplicationReport> {
    let ts = archimedean_tstrat_check(c, cfg)?;
    let tstrat_pass = ts.passed();
    let mut whitney = Vec::new();
    let n = c.n();
    for lower in 0..n {
        for p in base_points(c, lower, points) {
            for upper in lower + 1..=n {
                if c.strata[upper].charts.is_empty() {
                    continue;
                }
                let seed = cfg.seed.wrapping_add((lower * 31 + upper) as u64);
                let r = whitney_check(c, upper, lower, &p, curves, seed)?;
                if r.curves_tested > 0 || !(r.a_holds && r.b_holds) {
                    whitney.push(r);
                }
            }
        }
    }
    let whitney_pass = whitney.iter().all(|r| r.a_holds && r.b_holds);
    Ok(ImplicationReport { implication_violated: tstrat_pass && !whitney_pass, tstrat: ts, tstrat_pass, whitney, whitney_pass })
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpRow {
    pub base: f64,
    pub n: f64,
    pub pieces: usize,
    pub grid_size: usize,
    /// (piece, z) combinations with at least one violating pair.
    pub violated: usize,
    /// Best margin any grid z achieves on its piece; the inequality is strict,
    /// so zero (up to float noise) is already a failure.
    pub best_margin: f64,
    /// Mean over (piece, z) of the worst pair's shortfall.
    pub mean_shortfall: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ControlRow {
    pub name: String,
    pub n: f64,
    pub pairs: usize,
    pub violations: usize,
    pub min_margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpDemoReport {
    pub label: String,
    pub rows: Vec<ExpRow>,
    pub controls: Vec<ControlRow>,
    pub violations_everywhere: bool,
    pub margins_grow: bool,
    pub controls_clean: bool,
}

/// Margins within this of zero are float ties.
pub const FLOAT_TIE: f64 = 1e-9;

/// `ln|e^a - e^b - e^c|`, or `None` when the combination vanishes.
fn ln_abs_combo(a: f64, b: f64, c: f64) -> Option<f64> {
    let m = a.max(b).max(c);
    let inner = (a - m).exp() - (b - m).exp() - (c - m).exp();
    if inner == 0.0 {
        None
    } else {
        Some(m + inner.abs().ln())
    }
}

/// Points of one fiber of the leading-term map at scale `n`: `y0·(1 + n^{-1/2}·u)`.
fn fiber(rng: &mut ChaCha8Rng, y0: f64, n: f64, count: usize) -> Vec<f64> {
    (0..count).map(|_| y0 * (1.0 + n.powf(-0.5) * rng.gen_range(-1.0..1.0))).collect()
}

/// Log-scale probe: with `val_N(x) = -ln|x| / ln N`, tests the first-order
/// inequality for `y ↦ c^y` (c = a, b) on fibers inside `[N, N²]` against a
/// grid of slopes, and for the power-bounded controls `x·y` and `x^(1/2)`
/// with the gradient at one sample. Floating-point evidence, not a proof.
pub fn exponential_demo(a: f64, b: f64, ns: &[f64], seed: u64) -> Result<ExpDemoReport> {
    if a <= 1.0 || b <= 1.0 || a == b {
        return Err(Error::Input("need distinct bases a, b > 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pieces = 6;
    let per = 24;
    let mut rows = Vec::new();
    for &base in &[a, b] {
        for &n in ns {
            let ln_n = n.ln();
            let lb = base.ln();
            let mut violated = 0;
            let mut best_overall = f64::NEG_INFINITY;
            let mut grid_size = 0;
            let mut shortfall = 0.0;
            for _ in 0..pieces {
                let y0 = (ln_n * (1.0 + rng.gen_range(0.0..1.0))).exp();
                let ys = fiber(&mut rng, y0, n, per);
                // slopes from 1 up to base^(2 y0), plus the derivative near y0
                let mut grid: Vec<f64> = (0..=64).map(|j| lb * y0 * (j as f64) / 32.0).collect();
                for s in -2..=2 {
                    grid.push(lb.ln() + lb * y0 * (1.0 + s as f64 * n.powf(-0.5)));
                }
                grid_size = grid.len();
                for &ln_z in &grid {
                    let mut worst = f64::INFINITY;
                    for i in 0..ys.len() {
                        for j in 0..ys.len() {
                            if ys[j] <= ys[i] {
                                continue;
                            }
                            let d = ys[j] - ys[i];
                            let c = ln_z + d.ln();
                            let m = match ln_abs_combo(ys[j] * lb, ys[i] * lb, c) {
                                Some(lv) => (c - lv) / ln_n,
                                None => f64::INFINITY,
                            };
                            worst = worst.min(m);
                        }
                    }
                    if worst <= FLOAT_TIE {
                        violated += 1;
                    }
                    shortfall += -worst.min(0.0);
                    best_overall = best_overall.max(worst);
                }
            }
            rows.push(ExpRow {
                base,
                n,
                pieces,
                grid_size,
                violated,
                best_margin: best_overall,
                mean_shortfall: shortfall / (pieces * grid_size) as f64,
            });
        }
    }
    let mut controls = Vec::new();
    for &n in ns {
        let ln_n = n.ln();
        // x^(1/2)
        let mut pairs = 0;
        let mut bad = 0;
        let mut min_m = f64::INFINITY;
        for _ in 0..pieces {
            let y0 = (ln_n * (1.0 + rng.gen_range(0.0..1.0))).exp();
            let ys = fiber(&mut rng, y0, n, per);
            let z = 0.5 / ys[0].sqrt();
            for i in 0..ys.len() {
                for j in i + 1..ys.len() {
                    let d = ys[j] - ys[i];
                    let lhs = d * (1.0 / (ys[j].sqrt() + ys[i].sqrt()) - z);
                    let m = if lhs == 0.0 { f64::INFINITY } else { (z.ln() + d.abs().ln() - lhs.abs().ln()) / ln_n };
                    pairs += 1;
                    if m <= 0.0 {
                        bad += 1;
                    }
                    min_m = min_m.min(m);
                }
            }
        }
        controls.push(ControlRow { name: "x^(1/2)".into(), n, pairs, violations: bad, min_margin: min_m });
        // x·y
        let mut pairs = 0;
        let mut bad = 0;
        let mut min_m = f64::INFINITY;
        for _ in 0..pieces {
            let x0 = (ln_n * (1.0 + rng.gen_range(0.0..1.0))).exp();
            let y0 = (ln_n * (1.0 + rng.gen_range(0.0..1.0))).exp();
            let xs = fiber(&mut rng, x0, n, per);
            let ys = fiber(&mut rng, y0, n, per);
            let (zx, zy) = (ys[0], xs[0]);
            for i in 0..per {
                for j in i + 1..per {
                    let (dx, dy) = (xs[j] - xs[i], ys[j] - ys[i]);
                    let lhs = dx * (ys[i] - zx) + dy * (xs[j] - zy);
                    let m = if lhs == 0.0 {
                        f64::INFINITY
                    } else {
                        (zx.abs().max(zy.abs()).ln() + dx.abs().max(dy.abs()).ln() - lhs.abs().ln()) / ln_n
                    };
                    pairs += 1;
                    if m <= 0.0 {
                        bad += 1;
                    }
                    min_m = min_m.min(m);
                }
            }
        }
        controls.push(ControlRow { name: "x*y".into(), n, pairs, violations: bad, min_margin: min_m });
    }
    let violations_everywhere = rows.iter().all(|r| r.violated == r.pieces * r.grid_size);
    let margins_grow = [a, b].iter().all(|&base| {
        let ms: Vec<f64> = rows.iter().filter(|r| r.base == base).map(|r| r.mean_shortfall).collect();
        ms.windows(2).all(|w| w[1] > w[0])
    });
    let controls_clean = controls.iter().all(|c| c.violations == 0);
    Ok(ExpDemoReport {
        label: "floating-point log-scale probe: evidence, not proof".into(),
        rows,
        controls,
        violations_everywhere,
        margins_grow,
        controls_clean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::q;

    fn pt(xs: &[&str]) -> Vec<Series> {
        xs.iter().map(|x| Series::parse(x).unwrap()).collect()
    }

    #[test]
    fn lifting() {
        let disc = crate::formula::parse_formula_vars("x^2 + y^2 - 1 <= 0", None).unwrap();
        let lifted = star_lift_piece(&disc).unwrap();
        assert!(lifted.contains(&pt(&["1 - t", "t"])).unwrap());
        assert!(!lifted.contains(&pt(&["1 + t", "0"])).unwrap());
        let half = [Q::new(1.into(), 2.into()), q(0)];
        assert!(real_contains(&disc, &half).unwrap());
        assert!(lifted.contains(&pt(&["1/2", "0"])).unwrap());
        let bad = crate::formula::parse_formula_vars("x - t > 0", None).unwrap();
        assert!(star_lift_piece(&bad).is_err());
    }

    fn whitney_cusp() -> Candidate {
        Candidate::from_json(
            r#"{"vars": ["s", "x", "y"], "strata": [
                {"piece": "1 = 0", "dim": 0},
                {"piece": "x = 0 & y = 0", "dim": 1, "charts": [["a", "0", "0"]]},
                {"piece": "y^2 - s^2*x^2 - x^3 = 0", "minus": ["x = 0 & y = 0"], "dim": 2,
                 "charts": [["u", "v^2 - u^2", "v^3 - u^2*v"]]},
                {"piece": "y^2 - s^2*x^2 - x^3 != 0", "dim": 3, "charts": [["u", "v", "w"]]}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn whitney_cusp_fails_b_at_origin() {
        let c = whitney_cusp();
        let r = whitney_check(&c, 2, 1, &[q(0), q(0), q(0)], 60, 3).unwrap();
        assert!(r.a_holds);
        assert!(!r.b_holds, "{r:?}");
        assert!(r.b_witness.is_some());
        let r = whitney_check(&c, 2, 1, &[q(1), q(0), q(0)], 60, 3).unwrap();
        assert!(r.curves_tested > 0);
        assert!(r.a_holds && r.b_holds, "{r:?}");
    }

    #[test]
    fn cone_is_regular_over_its_vertex() {
        let c = Candidate::from_json(
            r#"{"vars": ["x", "y", "z"], "strata": [
                {"piece": "x = 0 & y = 0 & z = 0", "dim": 0, "charts": [["0", "0", "0"]]},
                {"piece": "1 = 0", "dim": 1},
                {"piece": "x^2 + y^2 - z^2 = 0", "minus": ["x = 0 & y = 0 & z = 0"], "dim": 2,
                 "charts": [["u^2 - v^2", "2*u*v", "u^2 + v^2"], ["u^2 - v^2", "2*u*v", "-u^2 - v^2"]]},
                {"piece": "x^2 + y^2 - z^2 != 0", "dim": 3, "charts": [["u", "v", "w"]]}]}"#,
        )
        .unwrap();
        let r = whitney_check(&c, 2, 0, &[q(0), q(0), q(0)], 40, 1).unwrap();
        assert!(r.curves_tested > 10);
        assert!(r.a_holds && r.b_holds, "{r:?}");
    }

    #[test]
    fn half_plane_edge() {
        let c = Candidate::from_json(
            r#"{"vars": ["x", "y"], "strata": [{"piece": "1 = 0", "dim": 0},
                {"piece": "y = 0", "dim": 1, "charts": [["u", "0"]]},
                {"piece": "y != 0", "dim": 2, "charts": [["u", "v"]]}]}"#,
        )
        .unwrap();
        let r = whitney_check(&c, 2, 1, &[q(1), q(0)], 20, 1).unwrap();
        assert!(r.a_holds && r.b_holds);
    }

    #[test]
    fn exponential_probe() {
        let r = exponential_demo(2.0, 3.0, &[1e3, 1e6], 0).unwrap();
        assert!(r.violations_everywhere, "{:?}", r.rows);
        assert!(r.margins_grow, "{:?}", r.rows);
        assert!(r.controls_clean, "{:?}", r.controls);
    }
}
