//! Entropy-regularized equilibrium of a zero-sum matrix game.
//!
//! Rows belong to `L`, who maximizes `mu' A nu`; columns belong to `R`, who
//! minimizes it. The quantal response equilibrium is the unique fixed point
//! `mu = softmax(tau_L A nu)`, `nu = softmax(-tau_R A' mu)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverParams {
    #[serde(rename = "tau_L")]
    pub tau_l: f64,
    #[serde(rename = "tau_R")]
    pub tau_r: f64,
    /// Extragradient step; chosen from the matrix when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_size: Option<f64>,
    pub max_iters: usize,
    pub tolerance: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            tau_l: 10.0,
            tau_r: 10.0,
            step_size: None,
            max_iters: 1_000_000,
            tolerance: 1e-9,
        }
    }
}

impl SolverParams {
    pub fn with_tau(tau: f64) -> Self {
        SolverParams {
            tau_l: tau,
            tau_r: tau,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("tau_L", self.tau_l), ("tau_R", self.tau_r)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        if let Some(s) = self.step_size {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::invalid("step_size", format!("must be > 0, got {s}")));
            }
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters", "must be >= 1"));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::invalid("tolerance", "must be > 0"));
        }
        Ok(())
    }

    /// `1 / (max(1/tau) + 2 max|A|)`: never more than `1 / (2 max|A|)` and
    /// keeps the multiplicative-weights exponent `1 - step/tau` positive.
    pub fn auto_step(&self, a: &[Vec<f64>]) -> f64 {
        let eps = (1.0 / self.tau_l).max(1.0 / self.tau_r);
        eps_step(eps, max_abs(a))
    }
}

fn eps_step(eps: f64, norm: f64) -> f64 {
    1.0 / (eps + 2.0 * norm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumResult {
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
    /// Regularized value `mu' A nu + H(mu)/tau_L - H(nu)/tau_R`.
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
}

impl EquilibriumResult {
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("equilibrium is representable as TOML")
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

pub(crate) fn max_abs(a: &[Vec<f64>]) -> f64 {
    a.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

pub(crate) fn check_matrix(a: &[Vec<f64>]) -> Result<(usize, usize)> {
    let p = a.len();
    let q = a.first().map_or(0, Vec::len);
    if p == 0 || q == 0 || a.iter().any(|r| r.len() != q) {
        return Err(Error::DimensionMismatch("payoff matrix must be a nonempty rectangle".into()));
    }
    if a.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid("A", "entries must be finite"));
    }
    Ok((p, q))
}

pub fn softmax(v: &[f64]) -> Vec<f64> {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = v.iter().map(|x| (x - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// Shannon entropy in nats.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|x| x * x.ln()).sum::<f64>()
}

/// `A nu`.
pub fn row_payoffs(a: &[Vec<f64>], nu: &[f64]) -> Vec<f64> {
    a.iter().map(|r| r.iter().zip(nu).map(|(x, y)| x * y).sum()).collect()
}

/// `A' mu`.
pub fn col_payoffs(a: &[Vec<f64>], mu: &[f64]) -> Vec<f64> {
    let q = a[0].len();
    let mut out = vec![0.0; q];
    for (r, m) in a.iter().zip(mu) {
        for (o, x) in out.iter_mut().zip(r) {
            *o += m * x;
        }
    }
    out
}

pub fn bilinear(a: &[Vec<f64>], mu: &[f64], nu: &[f64]) -> f64 {
    mu.iter().zip(row_payoffs(a, nu)).map(|(m, r)| m * r).sum()
}

pub fn regularized_value(a: &[Vec<f64>], mu: &[f64], nu: &[f64], tau_l: f64, tau_r: f64) -> f64 {
    bilinear(a, mu, nu) + entropy(mu) / tau_l - entropy(nu) / tau_r
}

fn scaled(v: &[f64], s: f64) -> Vec<f64> {
    v.iter().map(|x| s * x).collect()
}

/// Largest violation of the two quantal-response equations.
pub fn qre_residual(a: &[Vec<f64>], mu: &[f64], nu: &[f64], tau_l: f64, tau_r: f64) -> f64 {
    let br_l = softmax(&scaled(&row_payoffs(a, nu), tau_l));
    let br_r = softmax(&scaled(&col_payoffs(a, mu), -tau_r));
    mu.iter()
        .zip(&br_l)
        .chain(nu.iter().zip(&br_r))
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Quantal best response of `side` to a fixed opponent mix.
pub fn best_response(a: &[Vec<f64>], opponent: &[f64], side: crate::model::Player, tau: f64) -> Vec<f64> {
    match side {
        crate::model::Player::L => softmax(&scaled(&row_payoffs(a, opponent), tau)),
        crate::model::Player::R => softmax(&scaled(&col_payoffs(a, opponent), -tau)),
    }
}

/// Normalize log-weights in place and return the probabilities.
fn normalize_log(logw: &mut [f64]) -> Vec<f64> {
    let m = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = logw.iter().map(|l| (l - m).exp()).sum();
    let lse = m + s.ln();
    logw.iter_mut().for_each(|l| *l -= lse);
    logw.iter().map(|l| l.exp()).collect()
}

/// Solve from uniform starting points.
pub fn qre_solve(a: &[Vec<f64>], solver: &SolverParams) -> Result<EquilibriumResult> {
    let (p, q) = check_matrix(a)?;
    qre_solve_from(a, solver, &vec![1.0 / p as f64; p], &vec![1.0 / q as f64; q])
}

/// Extragradient with multiplicative-weights (entropic mirror) steps,
/// started from interior `mu0`, `nu0`. With `e = 1/tau` and step `s`:
///
/// ```text
/// mid:  log mu~ = (1 - s e_L) log mu + s A nu      log nu~ = (1 - s e_R) log nu - s A' mu
/// next: log mu+ = (1 - s e_L) log mu + s A nu~     log nu+ = (1 - s e_R) log nu - s A' mu~
/// ```
///
/// Iterates are kept in log space so large `tau` cannot underflow.
pub fn qre_solve_from(
    a: &[Vec<f64>],
    solver: &SolverParams,
    mu0: &[f64],
    nu0: &[f64],
) -> Result<EquilibriumResult> {
    solver.validate()?;
    let (p, q) = check_matrix(a)?;
    if mu0.len() != p || nu0.len() != q {
        return Err(Error::DimensionMismatch("initial point does not match the matrix".into()));
    }
    if mu0.iter().chain(nu0).any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::invalid("initial point", "must lie in the simplex interior"));
    }
    let (el, er) = (1.0 / solver.tau_l, 1.0 / solver.tau_r);
    let step = solver.step_size.unwrap_or_else(|| solver.auto_step(a));
    let (kl, kr) = (1.0 - step * el, 1.0 - step * er);
    if kl < 0.0 || kr < 0.0 {
        return Err(Error::invalid("step_size", "step / tau must not exceed 1"));
    }

    let mut log_mu: Vec<f64> = mu0.iter().map(|x| x.ln()).collect();
    let mut log_nu: Vec<f64> = nu0.iter().map(|x| x.ln()).collect();
    let mut mu = normalize_log(&mut log_mu);
    let mut nu = normalize_log(&mut log_nu);
    let mut residual = qre_residual(a, &mu, &nu, solver.tau_l, solver.tau_r);
    let mut it = 0;
    let mut lm = vec![0.0; p];
    let mut ln = vec![0.0; q];
    while residual > solver.tolerance && it < solver.max_iters {
        let (rp, cp) = (row_payoffs(a, &nu), col_payoffs(a, &mu));
        for i in 0..p {
            lm[i] = kl * log_mu[i] + step * rp[i];
        }
        for j in 0..q {
            ln[j] = kr * log_nu[j] - step * cp[j];
        }
        let mu_mid = normalize_log(&mut lm);
        let nu_mid = normalize_log(&mut ln);
        let (rp, cp) = (row_payoffs(a, &nu_mid), col_payoffs(a, &mu_mid));
        for i in 0..p {
            log_mu[i] = kl * log_mu[i] + step * rp[i];
        }
        for j in 0..q {
            log_nu[j] = kr * log_nu[j] - step * cp[j];
        }
        mu = normalize_log(&mut log_mu);
        nu = normalize_log(&mut log_nu);
        it += 1;
        residual = qre_residual(a, &mu, &nu, solver.tau_l, solver.tau_r);
    }
    if !(residual <= solver.tolerance) {
        return Err(Error::NotConverged {
            iterations: it,
            residual,
        });
    }
    Ok(EquilibriumResult {
        value: regularized_value(a, &mu, &nu, solver.tau_l, solver.tau_r),
        mu,
        nu,
        residual,
        iterations: it,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Player;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Independent oracle: damped iteration of the two softmax equations.
    fn damped_fixed_point(a: &[Vec<f64>], tl: f64, tr: f64) -> (Vec<f64>, Vec<f64>) {
        let (p, q) = (a.len(), a[0].len());
        let mut mu = vec![1.0 / p as f64; p];
        let mut nu = vec![1.0 / q as f64; q];
        for _ in 0..200_000 {
            let bm = softmax(&row_payoffs(a, &nu).iter().map(|x| tl * x).collect::<Vec<_>>());
            let bn = softmax(&col_payoffs(a, &mu).iter().map(|x| -tr * x).collect::<Vec<_>>());
            let mut gap: f64 = 0.0;
            for (m, b) in mu.iter_mut().zip(&bm) {
                gap = gap.max((*m - b).abs());
                *m = 0.5 * *m + 0.5 * b;
            }
            for (n, b) in nu.iter_mut().zip(&bn) {
                gap = gap.max((*n - b).abs());
                *n = 0.5 * *n + 0.5 * b;
            }
            if gap < 1e-13 {
                break;
            }
        }
        (mu, nu)
    }

    #[test]
    fn zero_matrix_gives_uniform() {
        let a = vec![vec![0.0; 4]; 3];
        let r = qre_solve(&a, &SolverParams::with_tau(7.0)).unwrap();
        r.mu.iter().for_each(|m| assert_abs_diff_eq!(*m, 1.0 / 3.0, epsilon = 1e-12));
        r.nu.iter().for_each(|n| assert_abs_diff_eq!(*n, 0.25, epsilon = 1e-12));
        assert_eq!(qre_residual(&a, &r.mu, &r.nu, 7.0, 7.0), 0.0);
    }

    #[test]
    fn matching_pennies() {
        let a = vec![vec![1.0, -1.0], vec![-1.0, 1.0]];
        let r = qre_solve(&a, &SolverParams::with_tau(10.0)).unwrap();
        assert_abs_diff_eq!(r.mu[0], 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(r.nu[0], 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(r.value, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn matches_damped_iteration() {
        let a = vec![vec![2.0, 0.0], vec![0.0, 1.0]];
        let (mu, nu) = damped_fixed_point(&a, 1.0, 1.0);
        assert!(qre_residual(&a, &mu, &nu, 1.0, 1.0) < 1e-10);
        let r = qre_solve(&a, &SolverParams::with_tau(1.0)).unwrap();
        for (x, y) in r.mu.iter().zip(&mu).chain(r.nu.iter().zip(&nu)) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-6);
        }
    }

    #[test]
    fn perturbation_raises_residual() {
        let a = vec![vec![0.3, -0.2, 0.1], vec![-0.4, 0.2, 0.0], vec![0.1, 0.1, -0.3]];
        let r = qre_solve(&a, &SolverParams::with_tau(5.0)).unwrap();
        let mut last = r.residual;
        for eps in [1e-4, 1e-3, 1e-2, 1e-1] {
            let mut mu = r.mu.clone();
            mu[0] += eps;
            let s: f64 = mu.iter().sum();
            mu.iter_mut().for_each(|m| *m /= s);
            let res = qre_residual(&a, &mu, &r.nu, 5.0, 5.0);
            assert!(res > last);
            last = res;
        }
    }

    #[test]
    fn reports_non_convergence() {
        let a = vec![vec![2.0, 0.0], vec![0.0, 1.0]];
        let s = SolverParams {
            max_iters: 2,
            tolerance: 1e-14,
            ..SolverParams::with_tau(100.0)
        };
        match qre_solve(&a, &s) {
            Err(Error::NotConverged { iterations, residual }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 1e-14);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn entropy_falls_with_rationality() {
        let a = vec![vec![0.5, 0.2, 0.4], vec![0.1, 0.3, -0.2], vec![-0.3, 0.0, 0.1]];
        let h: Vec<f64> = [1.0, 10.0, 100.0]
            .iter()
            .map(|&t| entropy(&qre_solve(&a, &SolverParams::with_tau(t)).unwrap().mu))
            .collect();
        assert!(h[0] > h[1] && h[1] > h[2], "{h:?}");
    }

    #[test]
    fn best_response_limits() {
        let a = vec![vec![0.0; 3]; 3];
        assert_eq!(best_response(&a, &[1.0, 0.0, 0.0], Player::L, 50.0), vec![1.0 / 3.0; 3]);
        let a = vec![vec![0.1, 0.5], vec![0.4, -0.2]];
        let br = best_response(&a, &[0.0, 1.0], Player::L, 1e4);
        assert_abs_diff_eq!(br[0], 1.0, epsilon = 1e-12);
        let br = best_response(&a, &[0.0, 1.0], Player::R, 1e4);
        assert_abs_diff_eq!(br[1], 1.0, epsilon = 1e-12);
    }

    fn matrix(p: usize, q: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(-1.0..1.0f64, q), p)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn unique_from_any_interior_start(
            a in matrix(4, 3),
            tau in 0.5..20.0f64,
            w0 in prop::collection::vec(0.05..1.0f64, 7),
        ) {
            let solver = SolverParams { tolerance: 1e-11, ..SolverParams::with_tau(tau) };
            let r1 = qre_solve(&a, &solver).unwrap();
            let r2 = qre_solve_from(&a, &solver, &w0[..4], &w0[4..]).unwrap();
            for (x, y) in r1.mu.iter().zip(&r2.mu).chain(r1.nu.iter().zip(&r2.nu)) {
                prop_assert!((x - y).abs() < 1e-6);
            }
            prop_assert!((r1.mu.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(r1.residual <= solver.tolerance);
        }

        #[test]
        fn player_exchange_symmetry(a in matrix(3, 3), tau in 0.5..20.0f64) {
            // B = -A' swaps the roles of the two players.
            let b: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| -a[j][i]).collect()).collect();
            let s = SolverParams::with_tau(tau);
            let ra = qre_solve(&a, &s).unwrap();
            let rb = qre_solve(&b, &s).unwrap();
            for k in 0..3 {
                prop_assert!((ra.mu[k] - rb.nu[k]).abs() < 1e-6);
                prop_assert!((ra.nu[k] - rb.mu[k]).abs() < 1e-6);
            }
        }
    }
}
