//! Opinion outcomes when both players draw profiles from mixed strategies.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{simulate, Trajectory};
use crate::error::{Error, Result};
use crate::metrics::{bimodality, conditional_mean, misinformation_exposure};
use crate::model::SimulationConfig;
use crate::rng::SeedTree;
use crate::strategies::StrategyProfile;

/// Outcome of one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayRecord {
    pub profile_l: usize,
    pub profile_r: usize,
    /// `None` when the final opinions have zero variance.
    pub bimodality: Option<f64>,
    pub mean_exposure: f64,
    /// Mean exposure over individuals ending left / right of centre.
    pub exposure_left: Option<f64>,
    pub exposure_right: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl MeanSe {
    pub fn of(xs: impl IntoIterator<Item = f64>) -> Option<Self> {
        let xs: Vec<f64> = xs.into_iter().collect();
        let n = xs.len();
        if n == 0 {
            return None;
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let se = if n > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Some(MeanSe { mean, se, n })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaySummary {
    pub bimodality: MeanSe,
    pub mean_exposure: MeanSe,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exposure_left: Option<MeanSe>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exposure_right: Option<MeanSe>,
    pub records: Vec<PlayRecord>,
}

fn record(traj: &Trajectory, config: &SimulationConfig, i: usize, j: usize) -> PlayRecord {
    let exposure = misinformation_exposure(traj, config.params.kappa_hat);
    let x = traj.final_opinions();
    PlayRecord {
        profile_l: i,
        profile_r: j,
        bimodality: bimodality(x).ok(),
        mean_exposure: exposure.iter().sum::<f64>() / exposure.len() as f64,
        exposure_left: conditional_mean(&exposure, x, |v| v < 0.0),
        exposure_right: conditional_mean(&exposure, x, |v| v > 0.0),
    }
}

/// Seeds for replication `k` of a play experiment rooted at `root`.
pub fn replication_seeds(root: &SeedTree, k: usize) -> SeedTree {
    root.child("play", &[k as u64])
}

fn check_mix(w: &[f64], n: usize, what: &'static str) -> Result<WeightedIndex<f64>> {
    if w.len() != n {
        return Err(Error::DimensionMismatch(format!("{what} has {} weights for {n} profiles", w.len())));
    }
    WeightedIndex::new(w).map_err(|e| Error::invalid(what, e.to_string()))
}

/// Run `replications` rollouts, each under a profile pair drawn from
/// `(mu, nu)`. Also returns the trajectory of replication 0.
pub fn sample_play(
    config: &SimulationConfig,
    profiles_l: &[StrategyProfile],
    profiles_r: &[StrategyProfile],
    mu: &[f64],
    nu: &[f64],
    replications: usize,
    root: &SeedTree,
) -> Result<(PlaySummary, Trajectory)> {
    if replications == 0 {
        return Err(Error::invalid("replications", "must be >= 1"));
    }
    let dl = check_mix(mu, profiles_l.len(), "mu")?;
    let dr = check_mix(nu, profiles_r.len(), "nu")?;
    let runs: Vec<(PlayRecord, Option<Trajectory>)> = (0..replications)
        .into_par_iter()
        .map(|k| {
            let seeds = replication_seeds(root, k);
            let mut pick = seeds.stream("matchup", &[]);
            let (i, j) = (dl.sample(&mut pick), dr.sample(&mut pick));
            let traj = simulate(config, &profiles_l[i], &profiles_r[j], &seeds)?;
            let rec = record(&traj, config, i, j);
            Ok((rec, (k == 0).then_some(traj)))
        })
        .collect::<Result<_>>()?;
    let mut sample = None;
    let mut records = Vec::with_capacity(replications);
    for (rec, traj) in runs {
        if traj.is_some() {
            sample = traj;
        }
        records.push(rec);
    }
    let bimodality = MeanSe::of(records.iter().filter_map(|r| r.bimodality))
        .ok_or_else(|| Error::Degenerate("every replication ended at a single opinion".into()))?;
    let summary = PlaySummary {
        bimodality,
        mean_exposure: MeanSe::of(records.iter().map(|r| r.mean_exposure)).expect("replications >= 1"),
        exposure_left: MeanSe::of(records.iter().filter_map(|r| r.exposure_left)),
        exposure_right: MeanSe::of(records.iter().filter_map(|r| r.exposure_right)),
        records,
    };
    Ok((summary, sample.expect("replication 0 is always kept")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategies::profile_library;

    #[test]
    fn pure_mixes_pick_the_named_profiles() {
        let cfg = SimulationConfig {
            n_individuals: 30,
            horizon_t: 10,
            ..Default::default()
        };
        let lib = profile_library();
        let mut mu = vec![0.0; 9];
        mu[4] = 1.0;
        let mut nu = vec![0.0; 9];
        nu[1] = 1.0;
        let (s, traj) = sample_play(&cfg, &lib, &lib, &mu, &nu, 3, &SeedTree::new(1)).unwrap();
        assert!(s.records.iter().all(|r| r.profile_l == 4 && r.profile_r == 1));
        assert_eq!(traj.horizon(), 10);
        assert_eq!(s.bimodality.n, 3);
        let again = sample_play(&cfg, &lib, &lib, &mu, &nu, 3, &SeedTree::new(1)).unwrap().0;
        assert_eq!(again, s);
    }

    #[test]
    fn mean_se() {
        let m = MeanSe::of([1.0, 3.0]).unwrap();
        assert_eq!(m.mean, 2.0);
        assert!((m.se - 1.0).abs() < 1e-15);
        assert!(MeanSe::of([]).is_none());
    }
}
