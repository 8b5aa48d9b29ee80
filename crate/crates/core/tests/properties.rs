use std::cmp::Ordering;

use num_bigint::BigInt;
use proptest::prelude::*;

use tconvex::formula::{parse_formula_vars, sample_piece, SampleConfig};
use tconvex::jacobian::{jp_check, jp_witness};
use tconvex::linalg::rank;
use tconvex::parse::parse_poly_vars;
use tconvex::rv::{rv_fiber, rv_mul, rvo, vrv};
use tconvex::tstrat::{affine_direction, compose_maps, eval_map, risometry_on};
use tconvex::{Q, Series, Value};

fn qq(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

fn monomial() -> impl Strategy<Value = (Q, Q)> {
    let coeff = (-9i64..=9).prop_filter("nonzero", |n| *n != 0);
    (coeff, 1i64..=4, -6i64..=6, 1i64..=3).prop_map(|(c, cd, e, ed)| (qq(c, cd), qq(e, ed)))
}

/// Exact series with up to four terms.
fn series() -> impl Strategy<Value = Series> {
    prop::collection::vec(monomial(), 0..=4)
        .prop_map(|ms| ms.into_iter().fold(Series::zero(), |acc, (c, e)| &acc + &Series::monomial(c, e)))
}

fn nonzero() -> impl Strategy<Value = Series> {
    series().prop_filter("nonzero", |x| !x.is_zero())
}

fn vars() -> Vec<String> {
    vec!["x".into(), "y".into()]
}

fn ring_samples(count: usize, seed: u64) -> Vec<Vec<Series>> {
    let dom = parse_formula_vars("val(x) >= 0 & val(y) >= 0", Some(&vars())).unwrap();
    sample_piece(&dom, count, seed, &SampleConfig::default()).unwrap()
}

proptest! {
    #[test]
    fn ultrametric(x in series(), y in series()) {
        let (vx, vy, vs) = (x.val(), y.val(), (&x + &y).val());
        let m = std::cmp::min(vx.clone(), vy.clone());
        prop_assert!(vs >= m);
        if vx != vy {
            prop_assert_eq!(vs, m);
        }
    }

    #[test]
    fn valuation_is_a_homomorphism(x in nonzero(), y in nonzero()) {
        let (vx, vy) = (x.val().finite().unwrap().clone(), y.val().finite().unwrap().clone());
        prop_assert_eq!((&x * &y).val(), Value::Finite(&vx + &vy));
        let inv = x.inv_to(&qq(10, 1)).unwrap();
        prop_assert_eq!(inv.val(), Value::Finite(-vx));
    }

    #[test]
    fn positives_are_closed(x in nonzero(), y in nonzero()) {
        if x.sign().unwrap() == Ordering::Greater && y.sign().unwrap() == Ordering::Greater {
            prop_assert_eq!((&x + &y).sign().unwrap(), Ordering::Greater);
            prop_assert_eq!((&x * &y).sign().unwrap(), Ordering::Greater);
        }
    }

    #[test]
    fn render_parse_round_trip(x in series()) {
        prop_assert_eq!(Series::parse(&x.to_string()).unwrap(), x);
    }

    #[test]
    fn rv_is_multiplicative(x in nonzero(), y in nonzero()) {
        prop_assert_eq!(rvo(&(&x * &y)).unwrap(), rv_mul(&rvo(&x).unwrap(), &rvo(&y).unwrap()));
    }

    #[test]
    fn rv_classes_are_balls(x in nonzero(), y in nonzero()) {
        let same = rvo(&x).unwrap() == rvo(&y).unwrap();
        prop_assert_eq!(same, (&x - &y).val() > x.val());
        prop_assert_eq!(vrv(&rvo(&x).unwrap()), x.val());
        prop_assert!(rv_fiber(&rvo(&x).unwrap()).unwrap().contains(std::slice::from_ref(&x)).unwrap());
    }
}

/// Map components on O², some risometries and some not.
const COMPONENTS: &[&str] = &["x", "x + 1", "x - 2/3", "x + t*y^2", "x + t*x*y", "2*x", "-x", "x + y", "x/2 + t"];

fn map() -> impl Strategy<Value = Vec<String>> {
    (0..COMPONENTS.len(), 0..COMPONENTS.len()).prop_map(|(i, j)| {
        // the second component acts on y
        let swap = |s: &str| s.replace('x', "#").replace('y', "x").replace('#', "y");
        vec![COMPONENTS[i].to_string(), swap(COMPONENTS[j])]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn risometries_compose(phi in map(), psi in map(), seed in 0u64..1000) {
        let p = |m: &[String]| m.iter().map(|t| parse_poly_vars(t, &vars()).unwrap()).collect::<Vec<_>>();
        let (phi, psi) = (p(&phi), p(&psi));
        let s = ring_samples(16, seed);
        let psi_ok = risometry_on(&psi, &s, 200).unwrap().holds;
        if !psi_ok {
            return Ok(());
        }
        let image: Vec<Vec<Series>> = s.iter().map(|x| eval_map(&psi, x)).collect();
        if risometry_on(&phi, &image, 200).unwrap().holds {
            prop_assert!(risometry_on(&compose_maps(&phi, &psi), &s, 200).unwrap().holds);
        }
    }

    #[test]
    fn afd_grows_with_the_sample(seed in 0u64..1000, keep in 2usize..8) {
        let s = ring_samples(8, seed);
        let full = affine_direction(&s).unwrap();
        let sub = affine_direction(&s[..keep]).unwrap();
        let mut both = full.clone();
        both.extend(sub.iter().cloned());
        prop_assert_eq!(rank(&both), rank(&full));
    }

    #[test]
    fn witness_scales_with_the_map(a in 1i64..5, b in -4i64..5, c in nonzero(), seed in 0u64..1000) {
        prop_assume!(b != 0);
        let f = format!("{a}*x {} {}*y + t*x^2*y", if b < 0 { "-" } else { "+" }, b.abs());
        let cf = format!("({c})*({f})");
        let fp = parse_poly_vars(&f, &vars()).unwrap();
        let cfp = parse_poly_vars(&cf, &vars()).unwrap();
        let s = ring_samples(12, seed);
        let z = jp_witness(&fp, &s).unwrap();
        let cz = jp_witness(&cfp, &s).unwrap();
        let rc = rvo(&c).unwrap();
        for (u, v) in z.iter().zip(&cz) {
            prop_assert_eq!(rvo(v).unwrap(), rv_mul(&rc, &rvo(u).unwrap()));
        }
        // c·z witnesses c·f with exactly the same margins
        let scaled: Vec<Series> = z.iter().map(|u| &c * u).collect();
        let m = jp_check(&fp, "f", &z, &s, 66).unwrap().min_margin;
        prop_assert_eq!(&m, &jp_check(&cfp, "c*f", &scaled, &s, 66).unwrap().min_margin);
        prop_assert!(m > Value::Finite(Q::from_integer(0.into())));
        prop_assert!(jp_check(&cfp, "c*f", &cz, &s, 66).unwrap().min_margin > Value::Finite(Q::from_integer(0.into())));
    }
}
