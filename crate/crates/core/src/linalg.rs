//! Small dense linear algebra over Q and over series.

use num_traits::Zero;

use crate::series::{Q, Series};

/// Reduced row echelon form; returns the nonzero rows and their pivot columns.
pub fn rref(rows: &[Vec<Q>]) -> (Vec<Vec<Q>>, Vec<usize>) {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let lead = m[r][c].clone();
        for x in m[r].iter_mut() {
            *x = &*x / &lead;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..ncols {
                    let d = &f * &m[r][j];
                    m[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    m.truncate(r);
    (m, pivots)
}

pub fn rank(rows: &[Vec<Q>]) -> usize {
    rref(rows).1.len()
}

/// Basis of `{v : rows · v = 0}` in `ncols` unknowns.
pub fn kernel(rows: &[Vec<Q>], ncols: usize) -> Vec<Vec<Q>> {
    let (r, pivots) = rref(rows);
    let mut out = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Q::zero(); ncols];
        v[free] = Q::from_integer(1.into());
        for (row, &p) in r.iter().zip(&pivots) {
            v[p] = -row[free].clone();
        }
        out.push(v);
    }
    out
}

/// Whether `v` lies in the row span of `basis`.
pub fn in_span(basis: &[Vec<Q>], v: &[Q]) -> bool {
    let mut rows = basis.to_vec();
    let before = rank(&rows);
    rows.push(v.to_vec());
    rank(&rows) == before
}

pub fn dot_q(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).map(|(x, y)| x * y).fold(Q::zero(), |s, x| s + x)
}

/// Determinant by cofactor expansion; matrices here are at most 3×3.
pub fn det_series(m: &[Vec<Series>]) -> Series {
    match m.len() {
        0 => Series::one(),
        1 => m[0][0].clone(),
        n => {
            let mut acc = Series::zero();
            for j in 0..n {
                let minor: Vec<Vec<Series>> =
                    m[1..].iter().map(|r| r.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, x)| x.clone()).collect()).collect();
                let term = &m[0][j] * &det_series(&minor);
                acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            acc
        }
    }
}

/// All increasing `k`-subsets of `0..n`.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Maximal minors of an `n × k` matrix given by columns, indexed by row subsets.
pub fn maximal_minors(cols: &[Vec<Series>]) -> Vec<Series> {
    let k = cols.len();
    let n = cols.first().map_or(0, |c| c.len());
    subsets(n, k)
        .into_iter()
        .map(|rows| {
            let m: Vec<Vec<Series>> = rows.iter().map(|&i| cols.iter().map(|c| c[i].clone()).collect()).collect();
            det_series(&m)
        })
        .collect()
}

/// Whether `v` lies in the `k`-space with Plücker coordinates `p` (indexed as
/// [`subsets`]`(n, k)`): every `(k+1)`-minor of `[span | v]` vanishes.
pub fn in_plucker_span(p: &[Q], n: usize, k: usize, v: &[Q]) -> bool {
    let idx = subsets(n, k);
    for big in subsets(n, k + 1) {
        let mut s = Q::zero();
        for (pos, &i) in big.iter().enumerate() {
            let rest: Vec<usize> = big.iter().copied().filter(|&j| j != i).collect();
            let at = idx.iter().position(|r| *r == rest).unwrap();
            let term = &p[at] * &v[i];
            // expansion along the appended column
            if (pos + k) % 2 == 0 {
                s += term;
            } else {
                s -= term;
            }
        }
        if !s.is_zero() {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::q;

    fn row(xs: &[i64]) -> Vec<Q> {
        xs.iter().map(|&x| q(x)).collect()
    }

    #[test]
    fn echelon_and_kernel() {
        let rows = vec![row(&[1, 2, 3]), row(&[2, 4, 6]), row(&[0, 1, 1])];
        let (r, piv) = rref(&rows);
        assert_eq!(piv, vec![0, 1]);
        assert_eq!(r.len(), 2);
        let k = kernel(&rows, 3);
        assert_eq!(k.len(), 1);
        for b in &rows {
            assert!(dot_q(b, &k[0]).is_zero());
        }
        assert!(in_span(&rows, &row(&[1, 3, 4])));
        assert!(!in_span(&rows, &row(&[0, 0, 1])));
    }

    #[test]
    fn plucker_membership() {
        // the plane z = 0 in R^3, spanned by e1 and e1 + e2
        let cols = vec![vec![Series::one(), Series::zero(), Series::zero()], vec![Series::one(), Series::one(), Series::zero()]];
        let p: Vec<Q> = maximal_minors(&cols).iter().map(|s| s.coeff(&q(0))).collect();
        assert!(in_plucker_span(&p, 3, 2, &row(&[3, -1, 0])));
        assert!(!in_plucker_span(&p, 3, 2, &row(&[0, 0, 1])));
        // a line in R^2
        let p = vec![q(1), q(2)];
        assert!(in_plucker_span(&p, 2, 1, &row(&[2, 4])));
        assert!(!in_plucker_span(&p, 2, 1, &row(&[1, 0])));
    }
}
