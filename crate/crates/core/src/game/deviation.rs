//! What happens when `L` leaves its equilibrium strategy and `R` answers.

use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::model::{Player, SimulationConfig};
use crate::rng::SeedTree;
use crate::strategies::StrategyProfile;

use super::outcome::{sample_play, PlaySummary};
use super::qre::{best_response, bilinear, entropy, qre_solve, EquilibriumResult, SolverParams};
use super::PayoffMatrix;

/// The strategy `L` is pinned to.
#[derive(Debug, Clone, PartialEq)]
pub enum ForcedPlay {
    Profile(usize),
    Mixed(Vec<f64>),
}

impl ForcedPlay {
    pub fn distribution(&self, p: usize) -> Result<Vec<f64>> {
        match self {
            ForcedPlay::Profile(i) if *i < p => {
                let mut d = vec![0.0; p];
                d[*i] = 1.0;
                Ok(d)
            }
            ForcedPlay::Profile(i) => Err(Error::invalid("forced_L", format!("profile index {i} out of range 0..{p}"))),
            ForcedPlay::Mixed(w) => {
                let s: f64 = w.iter().sum();
                if w.len() != p || w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || (s - 1.0).abs() > 1e-9 {
                    return Err(Error::invalid("forced_L", "must be a distribution over the L profiles"));
                }
                Ok(w.clone())
            }
        }
    }
}

/// Expected mean factual probability of a mix over profiles.
pub fn expected_factual_prob(mix: &[f64], profiles: &[StrategyProfile]) -> f64 {
    mix.iter().zip(profiles).map(|(w, p)| w * p.mean_factual_prob()).sum()
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub forced_mu: Vec<f64>,
    pub response_nu: Vec<f64>,
    pub equilibrium: EquilibriumResult,
    pub response_factual_prob: f64,
    pub equilibrium_factual_prob_r: f64,
    pub tv_response_to_equilibrium: f64,
    /// Regularized value to `L` after the deviation and at equilibrium.
    pub value_deviation: f64,
    pub value_equilibrium: f64,
    /// Plain expected payoff `mu' A nu` in both situations.
    pub payoff_deviation: f64,
    pub payoff_equilibrium: f64,
    pub deviation_loses_for_l: bool,
    pub play: PlaySummary,
}

impl DeviationReport {
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("deviation report is representable as TOML")
    }
}

/// Pin `L` to `forced`, let `R` play its quantal best response against the
/// payoff matrix, and simulate the induced matchups. `R` responds once per
/// matchup, not step by step.
#[allow(clippy::too_many_arguments)]
pub fn deviation_experiment(
    config: &SimulationConfig,
    profiles: &[StrategyProfile],
    payoff: &PayoffMatrix,
    solver: &SolverParams,
    forced: &ForcedPlay,
    replications: usize,
) -> Result<(DeviationReport, Trajectory)> {
    let a = &payoff.values;
    if a.len() != profiles.len() || payoff.cols() != profiles.len() {
        return Err(Error::DimensionMismatch("payoff matrix does not match the profile list".into()));
    }
    let eq = qre_solve(a, solver)?;
    let mu = forced.distribution(profiles.len())?;
    let nu = best_response(a, &mu, Player::R, solver.tau_r);
    let value_deviation = bilinear(a, &mu, &nu) + entropy(&mu) / solver.tau_l - entropy(&nu) / solver.tau_r;
    let seeds = SeedTree::new(config.seed).child("deviation", &[]);
    let (play, sample) = sample_play(config, profiles, profiles, &mu, &nu, replications, &seeds)?;
    let report = DeviationReport {
        response_factual_prob: expected_factual_prob(&nu, profiles),
        equilibrium_factual_prob_r: expected_factual_prob(&eq.nu, profiles),
        tv_response_to_equilibrium: total_variation(&nu, &eq.nu),
        payoff_deviation: bilinear(a, &mu, &nu),
        payoff_equilibrium: bilinear(a, &eq.mu, &eq.nu),
        deviation_loses_for_l: value_deviation <= eq.value + 1e-12,
        value_deviation,
        value_equilibrium: eq.value,
        forced_mu: mu,
        response_nu: nu,
        equilibrium: eq,
        play,
    };
    Ok((report, sample))
}
