//! Scalar functionals of trajectories.

use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Threshold on the bimodality coefficient above which a distribution is
/// read as multimodal. A uniform distribution sits exactly on it.
pub const BIMODALITY_THRESHOLD: f64 = 5.0 / 9.0;

/// Per-individual misinformation exposure: the average over steps
/// `0..T` and all sources of `exp(-kappa_hat |x_t - y|)` for every source
/// that misinformed at step `t`.
pub fn misinformation_exposure(traj: &Trajectory, kappa_hat: f64) -> Vec<f64> {
    let n = traj.susceptibilities.len();
    let m = traj.source_opinions.len();
    let steps = traj.horizon();
    let mut gamma = vec![0.0; n];
    if steps == 0 || m == 0 {
        return gamma;
    }
    for (xs, actions) in traj.opinion_history.iter().zip(&traj.action_history) {
        for (y, a) in traj.source_opinions.iter().zip(actions) {
            let miss = 1.0 - a.value();
            if miss == 0.0 {
                continue;
            }
            for (g, x) in gamma.iter_mut().zip(xs) {
                *g += (-kappa_hat * (x - y).abs()).exp() * miss;
            }
        }
    }
    let norm = 1.0 / (steps * m) as f64;
    gamma.iter_mut().for_each(|g| *g *= norm);
    gamma
}

/// `-sum_i sin(varpi x_i)^vartheta`. Positive when opinions lean negative,
/// which is what `L` (the maximizer) wants.
pub fn running_reward(x: &[f64], varpi: f64, vartheta: u32) -> f64 {
    -x.iter()
        .map(|&v| (varpi * v).sin().powi(vartheta as i32))
        .sum::<f64>()
}

/// `sum_{k=1}^{T} gamma^k`.
pub fn discount_mass(gamma: f64, horizon: usize) -> f64 {
    (1..=horizon).map(|k| gamma.powi(k as i32)).sum()
}

/// Finite-horizon discounted return `sum_{k=1}^{T} gamma^k r(x_k)`.
pub fn discounted_return(traj: &Trajectory, params: &ModelParams) -> f64 {
    let mut disc = 1.0;
    let mut total = 0.0;
    for xs in traj.opinion_history.iter().skip(1) {
        disc *= params.gamma;
        total += disc * running_reward(xs, params.varpi, params.vartheta);
    }
    total
}

/// Sample bimodality coefficient
/// `(G1^2 + 1) / (G2 + 3 (n-1)^2 / ((n-2)(n-3)))`, with `G1` and `G2` the
/// bias-corrected sample skewness and excess kurtosis.
pub fn bimodality(x: &[f64]) -> Result<f64> {
    let n = x.len();
    if n < 4 {
        return Err(Error::Degenerate(format!(
            "bimodality needs at least 4 samples, got {n}"
        )));
    }
    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    if !(m2 > 1e-24 * (1.0 + mean * mean)) {
        return Err(Error::Degenerate("bimodality of a zero-variance sample".into()));
    }
    let g1 = (nf * (nf - 1.0)).sqrt() / (nf - 2.0) * m3 / m2.powf(1.5);
    let g2 = (nf - 1.0) / ((nf - 2.0) * (nf - 3.0)) * ((nf + 1.0) * m4 / (m2 * m2) - 3.0 * (nf - 1.0));
    let correction = 3.0 * (nf - 1.0).powi(2) / ((nf - 2.0) * (nf - 3.0));
    Ok((g1 * g1 + 1.0) / (g2 + correction))
}

/// Mean of `values` over entries whose paired key satisfies `pred`.
pub fn conditional_mean(values: &[f64], keys: &[f64], pred: impl Fn(f64) -> bool) -> Option<f64> {
    let (sum, count) = values
        .iter()
        .zip(keys)
        .filter(|(_, k)| pred(**k))
        .fold((0.0, 0usize), |(s, c), (v, _)| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub mean_exposure: f64,
    pub bimodality: f64,
    pub discounted_return: f64,
    pub exposure_per_individual: Vec<f64>,
}

impl MetricReport {
    /// Metrics of a finished rollout; bimodality is taken on the final opinions.
    pub fn from_trajectory(traj: &Trajectory, params: &ModelParams) -> Result<Self> {
        let exposure = misinformation_exposure(traj, params.kappa_hat);
        let mean_exposure = exposure.iter().sum::<f64>() / exposure.len() as f64;
        Ok(MetricReport {
            mean_exposure,
            bimodality: bimodality(traj.final_opinions())?,
            discounted_return: discounted_return(traj, params),
            exposure_per_individual: exposure,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("metric report is representable as TOML")
    }
}
