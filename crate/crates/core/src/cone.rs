//! Tangent cones: lowest forms of hypersurfaces, a curve-search membership
//! oracle, and the partition of a cone induced by a stratification.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{AtomicCondition, DefinablePiece, Formula, Rel};
use crate::poly::PolyExpr;
use crate::qpoly;
use crate::roots::{real_roots_separated, taylor_shift, RootOptions};
use crate::series::{Q, Series, Value};
use crate::tstrat::{Candidate, Region, Stratum};

fn series_point(p: &[Q]) -> Vec<Series> {
    p.iter().map(|c| Series::constant(c.clone())).collect()
}

/// Lowest-degree homogeneous part of `f(p + y)`.
pub fn tangent_cone_hypersurface(f: &PolyExpr, p: &[Q]) -> Result<PolyExpr> {
    if p.len() != f.nvars() {
        return Err(Error::Input(format!("point has {} coordinates, polynomial has {} variables", p.len(), f.nvars())));
    }
    let at = f.eval(&series_point(p));
    if !at.is_zero() {
        return Err(Error::Precondition(format!("f(p) = {at} is not zero")));
    }
    Ok(f.shift(&series_point(p)).lowest_form())
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum ConeSearch {
    Found { x: Vec<Series>, r: Series },
    /// No curve found within the budget; this is not a proof of absence.
    NotFound { attempts: usize },
}

impl ConeSearch {
    pub fn found(&self) -> bool {
        matches!(self, ConeSearch::Found { .. })
    }
}

fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Roots `u` of `f(base + u·e_j) = 0`.
fn roots_along(f: &PolyExpr, base: &[Series], j: usize, precision: &Q) -> Vec<Series> {
    let coeffs = f.specialize(j, base);
    let shifted = taylor_shift(&coeffs, &base[j]);
    if shifted.iter().all(|c| c.is_zero()) || shifted.len() < 2 {
        return Vec::new();
    }
    let mut opts = RootOptions::new(precision.clone());
    opts.lookahead = q_int(8);
    real_roots_separated(&shifted, &opts).unwrap_or_default()
}

/// Searches `x ∈ X`, `r > 0` with `val(x - p) > γ` and `val(r(x - p) - y) > γ`
/// along curves `p + t^k·w + u·e_j` with `u` solved from an equation of `X`.
pub fn tangent_cone_membership(x_set: &Region, p: &[Q], y: &[Q], gamma: &Q, budget: usize) -> Result<ConeSearch> {
    let n = p.len();
    if y.len() != n {
        return Err(Error::Input("direction and point differ in length".into()));
    }
    let g = if gamma.is_negative() { Q::zero() } else { gamma.clone() };
    let ps = series_point(p);
    let zero_dir = y.iter().all(|c| c.is_zero());
    // directions for y = 0: coordinate vectors and a few diagonals
    let mut dirs: Vec<(Vec<Q>, Q)> = Vec::new();
    if zero_dir {
        for i in 0..n {
            let mut e = vec![Q::zero(); n];
            e[i] = Q::one();
            dirs.push((e.clone(), Q::one()));
            e[i] = -Q::one();
            dirs.push((e, Q::one()));
        }
        dirs.push((vec![Q::one(); n], Q::one()));
        dirs.push(((0..n).map(|i| if i % 2 == 0 { Q::one() } else { -Q::one() }).collect(), Q::one()));
    } else {
        // positive rescalings, so that solved coordinates can stay rational
        for c in [(1, 1), (2, 1), (3, 1), (1, 2), (1, 3), (5, 1), (6, 1), (7, 1)] {
            let c = Q::new(c.0.into(), c.1.into());
            dirs.push((y.iter().map(|v| v * &c).collect(), c));
        }
    }
    let ks: Vec<Q> = if zero_dir { vec![&g + Q::one()] } else { (1..=6).map(|m| (&g + Q::one()) * q_int(m)).collect() };
    let mut attempts = 0;
    for piece in &x_set.include {
        let eqs: Vec<&PolyExpr> = piece.atoms.iter().filter(|a| a.is_equation()).map(|a| a.poly()).collect();
        for k in &ks {
            let lambda = Series::monomial(Q::one(), k.clone());
            for (w, c) in &dirs {
                let base: Vec<Series> =
                    ps.iter().zip(w).map(|(a, c)| a + &lambda.scale(c, &Q::zero())).collect();
                let mut tries: Vec<Vec<Series>> = Vec::new();
                if eqs.is_empty() {
                    // open piece: a tiny perturbation keeps generic points generic
                    let bump = Series::monomial(Q::one(), k * q_int(2) + &g + Q::one());
                    tries.push(base.iter().map(|c| c + &bump).collect());
                    tries.push(base.clone());
                } else {
                    let prec = (k + &g) * q_int(2) + q_int(6);
                    for j in 0..n {
                        attempts += 1;
                        if attempts > budget {
                            return Ok(ConeSearch::NotFound { attempts: budget });
                        }
                        for u in roots_along(eqs[0], &base, j, &prec) {
                            let mut x = base.clone();
                            x[j] = &x[j] + &u;
                            tries.push(x);
                        }
                    }
                }
                for x in tries {
                    let d: Vec<Series> = x.iter().zip(&ps).map(|(a, b)| a - b).collect();
                    let vd = crate::series::val_tuple(&d);
                    let Value::Finite(vd) = vd else { continue };
                    if vd <= g || !x_set.contains(&x) {
                        continue;
                    }
                    let r = if zero_dir {
                        Series::monomial(Q::one(), &g + Q::one() - &vd)
                    } else {
                        Series::monomial(Q::one() / c, -k.clone())
                    };
                    let scaled: Vec<Series> = d.iter().zip(y).map(|(a, c)| &(&r * a) - &Series::constant(c.clone())).collect();
                    if crate::series::val_tuple(&scaled) > Value::Finite(g.clone()) {
                        return Ok(ConeSearch::Found { x, r });
                    }
                }
            }
        }
    }
    Ok(ConeSearch::NotFound { attempts })
}

fn var_poly(vars: &[String], i: usize) -> PolyExpr {
    PolyExpr::var(vars.to_vec(), i)
}

fn const_poly(vars: &[String], c: Q) -> PolyExpr {
    PolyExpr::constant(vars.to_vec(), Series::constant(c))
}

/// The ray `{s·d : s > 0}`, or the line through `d` when `both`.
fn ray_piece(vars: &[String], d: &[Q], both: bool) -> DefinablePiece {
    let l = &(&var_poly(vars, 0) * &const_poly(vars, d[1].clone())) - &(&var_poly(vars, 1) * &const_poly(vars, d[0].clone()));
    let mut atoms = vec![AtomicCondition::Sign { p: l, rel: Rel::Eq }];
    if !both {
        let k = d.iter().position(|c| !c.is_zero()).unwrap();
        let sign = if d[k].is_positive() { Q::one() } else { -Q::one() };
        atoms.push(AtomicCondition::Sign { p: &var_poly(vars, k) * &const_poly(vars, sign), rel: Rel::Gt });
    }
    DefinablePiece::new(vars.to_vec(), atoms)
}

pub fn origin_piece(vars: &[String]) -> DefinablePiece {
    DefinablePiece::new(
        vars.to_vec(),
        (0..vars.len()).map(|i| AtomicCondition::Sign { p: var_poly(vars, i), rel: Rel::Eq }).collect(),
    )
}

/// Rational lines through the origin on which a binary form vanishes.
fn binary_form_lines(lf: &PolyExpr) -> Result<Vec<Vec<Q>>> {
    let deg = lf.total_degree().unwrap_or(0) as usize;
    let g: Vec<Q> = lf
        .specialize(1, &[Series::one(), Series::zero()])
        .iter()
        .map(|c| c.as_rational().ok_or_else(|| Error::Unsupported("cone of a form with series coefficients".into())))
        .collect::<Result<_>>()?;
    let g = qpoly::trimmed(g);
    let mut out = Vec::new();
    if g.is_empty() {
        return Err(Error::Unsupported("degenerate lowest form".into()));
    }
    let roots = qpoly::rational_roots_simple(&g);
    if qpoly::count_real_roots(&g) > roots.len() {
        return Err(Error::Unsupported(format!("lowest form {lf} has irrational tangent lines")));
    }
    for u in roots {
        out.push(vec![Q::one(), u]);
    }
    if qpoly::degree(&g).unwrap_or(0) < deg {
        out.push(vec![Q::zero(), Q::one()]);
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct ConeOptions {
    pub gamma: Q,
    pub budget: usize,
}

impl Default for ConeOptions {
    fn default() -> Self {
        ConeOptions { gamma: q_int(3), budget: 1000 }
    }
}

/// Tangent cone of a region at `p`, as a formula in direction coordinates.
pub fn cone_of_region(region: &Region, vars: &[String], p: &[Q], opts: &ConeOptions) -> Result<Formula> {
    let n = vars.len();
    let ps = series_point(p);
    let mut out: Formula = Vec::new();
    for piece in &region.include {
        let sub = Region { include: vec![piece.clone()], exclude: region.exclude.clone() };
        let eqs: Vec<&PolyExpr> = piece.atoms.iter().filter(|a| a.is_equation()).map(|a| a.poly()).collect();
        if eqs.iter().any(|f| !f.eval(&ps).is_zero()) {
            continue;
        }
        let near = tangent_cone_membership(&sub, p, &vec![Q::zero(); n], &opts.gamma, opts.budget)?.found();
        if !near {
            if sub.contains(&ps) {
                out.push(origin_piece(vars));
            }
            continue;
        }
        if eqs.is_empty() {
            out.push(DefinablePiece::everything(vars.to_vec()));
            continue;
        }
        let lfs: Vec<PolyExpr> =
            eqs.iter().map(|f| tangent_cone_hypersurface(f, p).map(|l| l.with_vars(vars.to_vec()))).collect::<Result<_>>()?;
        if n == 2 {
            for d in binary_form_lines(&lfs[0])? {
                let ds = series_point(&d);
                if lfs.iter().any(|l| !l.eval(&ds).is_zero()) {
                    continue;
                }
                let neg: Vec<Q> = d.iter().map(|c| -c).collect();
                let pos_in = tangent_cone_membership(&sub, p, &d, &opts.gamma, opts.budget)?.found();
                let neg_in = tangent_cone_membership(&sub, p, &neg, &opts.gamma, opts.budget)?.found();
                match (pos_in, neg_in) {
                    (true, true) => out.push(ray_piece(vars, &d, true)),
                    (true, false) => out.push(ray_piece(vars, &d, false)),
                    (false, true) => out.push(ray_piece(vars, &neg, false)),
                    (false, false) => {}
                }
            }
            out.push(origin_piece(vars));
        } else {
            out.push(DefinablePiece::new(
                vars.to_vec(),
                lfs.into_iter().map(|l| AtomicCondition::Sign { p: l, rel: Rel::Eq }).collect(),
            ));
        }
    }
    Ok(out)
}

/// `C_{p,0} = C_p(S_0)` and `C_{p,i} = C_p(S_0 ∪ … ∪ S_i) \ C_p(S_0 ∪ … ∪ S_{i-1})`.
pub fn induced_cone_partition(cand: &Candidate, p: &[Q], opts: &ConeOptions) -> Result<Candidate> {
    let vars = cand.vars.clone();
    let mut cumulative: Formula = Vec::new();
    let mut strata = Vec::new();
    for (i, s) in cand.strata.iter().enumerate() {
        let previous = cumulative.clone();
        cumulative.extend(cone_of_region(&s.region, &vars, p, opts)?);
        let region = Region { include: cumulative.clone(), exclude: if previous.is_empty() { Vec::new() } else { vec![previous] } };
        strata.push(Stratum { region, dim: i, charts: Vec::new() });
    }
    Ok(Candidate { vars: vars.clone(), domain: vec![DefinablePiece::everything(vars)], strata, reflects: Vec::new() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_union;
    use crate::parse::parse_poly_vars;
    use crate::series::q;
    use crate::tstrat::{tstrat_verify, VerifyConfig};

    fn vars(n: usize) -> Vec<String> {
        ["x", "y", "z"][..n].iter().map(|s| s.to_string()).collect()
    }

    fn poly(t: &str, n: usize) -> PolyExpr {
        parse_poly_vars(t, &vars(n)).unwrap()
    }

    fn region(t: &str, n: usize) -> Region {
        Region::new(parse_union(t, Some(&vars(n))).unwrap())
    }

    #[test]
    fn lowest_forms() {
        assert_eq!(tangent_cone_hypersurface(&poly("y^2 - x^3", 2), &[q(0), q(0)]).unwrap(), poly("y^2", 2));
        assert_eq!(tangent_cone_hypersurface(&poly("x^2 + y^2 - 1", 2), &[q(1), q(0)]).unwrap(), poly("2*x", 2));
        assert_eq!(tangent_cone_hypersurface(&poly("x + 2*y", 2), &[q(0), q(0)]).unwrap(), poly("x + 2*y", 2));
        assert!(tangent_cone_hypersurface(&poly("x - 1", 1), &[q(0)]).is_err());
    }

    #[test]
    fn cusp_oracle() {
        let cusp = region("y^2 - x^3 = 0", 2);
        let o = [q(0), q(0)];
        assert!(tangent_cone_membership(&cusp, &o, &[q(1), q(0)], &q(3), 1000).unwrap().found());
        assert!(!tangent_cone_membership(&cusp, &o, &[q(0), q(1)], &q(3), 1000).unwrap().found());
        assert!(!tangent_cone_membership(&cusp, &o, &[q(-1), q(0)], &q(3), 1000).unwrap().found());
        assert!(tangent_cone_membership(&cusp, &o, &[q(0), q(0)], &q(3), 1000).unwrap().found());
        let circle = region("x^2 + y^2 - 1 = 0", 2);
        assert!(tangent_cone_membership(&circle, &[q(1), q(0)], &[q(0), q(-2)], &q(3), 1000).unwrap().found());
    }

    #[test]
    fn cusp_cone_partition() {
        let cand = Candidate::from_json(
            r#"{"vars": ["x", "y"], "strata": [{"piece": "x = 0 & y = 0", "dim": 0},
                {"piece": "y^2 - x^3 = 0 & x != 0", "dim": 1}, {"piece": "y^2 - x^3 != 0", "dim": 2}]}"#,
        )
        .unwrap();
        let cones = induced_cone_partition(&cand, &[q(0), q(0)], &ConeOptions::default()).unwrap();
        let pt = |a: &str, b: &str| vec![Series::parse(a).unwrap(), Series::parse(b).unwrap()];
        assert_eq!(cones.stratum_of(&pt("0", "0")), Some(0));
        assert_eq!(cones.stratum_of(&pt("2", "0")), Some(1));
        assert_eq!(cones.stratum_of(&pt("-2", "0")), Some(2));
        assert_eq!(cones.stratum_of(&pt("1", "1")), Some(2));
        let r = tstrat_verify(&cones, &VerifyConfig { balls: 20, ..VerifyConfig::default() }).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn isolated_point() {
        let cand = Candidate::from_json(
            r#"{"vars": ["x", "y"], "strata": [{"piece": "x = 0 & y = 0", "dim": 0}, {"piece": "1 = 0", "dim": 1}, {"piece": "x^2 + y^2 != 0", "dim": 2}]}"#,
        )
        .unwrap();
        let c = cone_of_region(&cand.strata[0].region, &cand.vars, &[q(0), q(0)], &ConeOptions::default()).unwrap();
        assert_eq!(c, vec![origin_piece(&cand.vars)]);
    }
}
