//! Exact Nash equilibrium of small zero-sum games by support enumeration.

use crate::error::{Error, Result};

use super::qre::{check_matrix, col_payoffs, row_payoffs};

const TOL: f64 = 1e-9;

/// Largest matrix side the enumeration accepts.
pub const MAX_SIDE: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct NashEquilibrium {
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
    pub value: f64,
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_linear(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[piv][c].abs() < 1e-12 {
            return None;
        }
        m.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..n {
                m[r][k] -= f * m[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| m[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / m[r][r];
    }
    Some(x)
}

/// Weights `w` on `support` and level `v` with `sum_k coef(r, k) w_k = v`
/// for every `r` in `eq_rows` and `sum w = 1`.
fn equalizer(
    eq_rows: &[usize],
    support: &[usize],
    coef: impl Fn(usize, usize) -> f64,
) -> Option<(Vec<f64>, f64)> {
    let k = support.len();
    let mut m = Vec::with_capacity(k + 1);
    for &r in eq_rows {
        let mut row: Vec<f64> = support.iter().map(|&c| coef(r, c)).collect();
        row.push(-1.0);
        m.push(row);
    }
    let mut last = vec![1.0; k];
    last.push(0.0);
    m.push(last);
    let mut b = vec![0.0; k];
    b.push(1.0);
    let sol = solve_linear(m, b)?;
    let v = sol[k];
    let w = sol[..k].to_vec();
    w.iter().all(|x| *x >= -TOL).then_some((w, v))
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

/// Mixed Nash equilibrium of the zero-sum game where rows maximize `A`.
/// Enumerates equal-size support pairs, which suffices for nondegenerate
/// games and, by trying every pair, finds an equilibrium in the usual
/// degenerate cases (ties, dominance) too.
pub fn nash_oracle_small(a: &[Vec<f64>]) -> Result<NashEquilibrium> {
    let (p, q) = check_matrix(a)?;
    if p > MAX_SIDE || q > MAX_SIDE {
        return Err(Error::invalid("A", format!("support enumeration is limited to {MAX_SIDE}x{MAX_SIDE}")));
    }
    let scale = a.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    for k in 1..=p.min(q) {
        for rows in subsets(p, k) {
            for cols in subsets(q, k) {
                let Some((y, v)) = equalizer(&rows, &cols, |r, c| a[r][c]) else { continue };
                let Some((x, v2)) = equalizer(&cols, &rows, |c, r| a[r][c]) else { continue };
                if (v - v2).abs() > TOL * scale {
                    continue;
                }
                let mut mu = vec![0.0; p];
                let mut nu = vec![0.0; q];
                rows.iter().zip(&x).for_each(|(&i, &w)| mu[i] = w.max(0.0));
                cols.iter().zip(&y).for_each(|(&j, &w)| nu[j] = w.max(0.0));
                let rp = row_payoffs(a, &nu);
                let cp = col_payoffs(a, &mu);
                let no_row_dev = rp.iter().all(|&r| r <= v + TOL * scale);
                let no_col_dev = cp.iter().all(|&c| c >= v - TOL * scale);
                if no_row_dev && no_col_dev {
                    return Ok(NashEquilibrium { mu, nu, value: v });
                }
            }
        }
    }
    Err(Error::Degenerate("no equilibrium found by support enumeration".into()))
}
