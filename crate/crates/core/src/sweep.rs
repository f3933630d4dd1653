//! Grid sweeps: rebuild the game at every cell, solve it and measure the
//! outcome of equilibrium play.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::outcome::{sample_play, MeanSe};
use crate::game::qre::{entropy, qre_solve, EquilibriumResult, SolverParams};
use crate::game::payoff::estimate_payoff_matrix;
use crate::model::SimulationConfig;
use crate::rng::SeedTree;
use crate::strategies::{profile_library_for, StrategyProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Eta,
    Xi,
    Tau,
    Beta1,
    Beta2,
}

impl SweepParam {
    pub const ALL: [SweepParam; 5] = [Self::Eta, Self::Xi, Self::Tau, Self::Beta1, Self::Beta2];

    pub fn name(self) -> &'static str {
        match self {
            Self::Eta => "eta",
            Self::Xi => "xi",
            Self::Tau => "tau",
            Self::Beta1 => "beta1",
            Self::Beta2 => "beta2",
        }
    }

    fn apply(self, v: f64, config: &mut SimulationConfig, solver: &mut SolverParams) {
        match self {
            Self::Eta => config.params.eta = v,
            Self::Xi => config.params.xi = v,
            Self::Tau => {
                solver.tau_l = v;
                solver.tau_r = v;
            }
            Self::Beta1 => config.beta1 = v,
            Self::Beta2 => config.beta2 = v,
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::invalid("axis", format!("unknown sweep parameter `{s}` (expected eta, xi, tau, beta1 or beta2)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(rename = "axis")]
    pub axes: Vec<Axis>,
    #[serde(default = "default_rollouts")]
    pub rollouts: usize,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub base: SimulationConfig,
    #[serde(default)]
    pub solver: SolverParams,
}

fn default_rollouts() -> usize {
    200
}

fn default_replications() -> usize {
    20
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::invalid("axis", format!("a sweep has 1 or 2 axes, got {}", self.axes.len())));
        }
        if self.axes.len() == 2 && self.axes[0].name == self.axes[1].name {
            return Err(Error::invalid("axis", "the two axes must differ"));
        }
        for ax in &self.axes {
            if ax.values.is_empty() {
                return Err(Error::invalid("axis", format!("axis `{}` has no values", ax.name)));
            }
            if ax.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("axis", format!("axis `{}` has a non-finite value", ax.name)));
            }
        }
        if self.rollouts < 2 {
            return Err(Error::invalid("rollouts", "need at least 2 rollouts per entry"));
        }
        if self.replications == 0 {
            return Err(Error::invalid("replications", "must be >= 1"));
        }
        self.base.validate()?;
        self.solver.validate()
    }

    /// Cells in row-major order over the axes.
    pub fn cells(&self) -> Vec<Vec<f64>> {
        self.axes.iter().fold(vec![Vec::new()], |acc, ax| {
            acc.iter()
                .flat_map(|prefix| {
                    ax.values.iter().map(move |v| {
                        let mut c = prefix.clone();
                        c.push(*v);
                        c
                    })
                })
                .collect()
        })
    }

    /// Config and solver for one cell.
    pub fn cell_setup(&self, values: &[f64]) -> (SimulationConfig, SolverParams) {
        let mut config = self.base.clone();
        let mut solver = self.solver;
        for (ax, v) in self.axes.iter().zip(values) {
            ax.name.apply(*v, &mut config, &mut solver);
        }
        (config, solver)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let spec: SweepSpec = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("sweep spec is representable as TOML")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    /// Radical sources misinform more than centrist ones.
    Phase1,
    /// The reverse: centrist sources misinform at least as much.
    Phase2,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Phase1 => "phase-1",
            Phase::Phase2 => "phase-2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseLabel {
    pub phase: Phase,
    pub radical_factual: f64,
    pub centrist_factual: f64,
    /// Set when both equilibrium mixes are close to uniform, so the
    /// ordering carries little signal.
    pub low_confidence: bool,
}

/// Relative entropy level above which a mix counts as near-uniform.
pub const NEAR_UNIFORM: f64 = 0.99;

/// Compare the expected factual probability of the two outermost sources
/// per side with that of the two innermost, under the equilibrium mixes.
pub fn phase_label(eq: &EquilibriumResult, profiles: &[StrategyProfile]) -> Result<PhaseLabel> {
    let half = profiles.first().map_or(0, StrategyProfile::len);
    if half < 2 || eq.mu.len() != profiles.len() || eq.nu.len() != profiles.len() {
        return Err(Error::DimensionMismatch(
            "phase labels need at least two sources per side and matching mixes".into(),
        ));
    }
    let k = 2.min(half / 2).max(1);
    let expect = |mix: &[f64], range: std::ops::Range<usize>| -> f64 {
        let len = range.len() as f64;
        mix.iter()
            .zip(profiles)
            .map(|(w, p)| w * p.factual_prob[range.clone()].iter().sum::<f64>() / len)
            .sum()
    };
    let both = |range: std::ops::Range<usize>| 0.5 * (expect(&eq.mu, range.clone()) + expect(&eq.nu, range));
    let centrist_factual = both(0..k);
    let radical_factual = both(half - k..half);
    let h_max = (profiles.len() as f64).ln();
    let low_confidence = entropy(&eq.mu) >= NEAR_UNIFORM * h_max && entropy(&eq.nu) >= NEAR_UNIFORM * h_max;
    Ok(PhaseLabel {
        phase: if radical_factual < centrist_factual { Phase::Phase1 } else { Phase::Phase2 },
        radical_factual,
        centrist_factual,
        low_confidence,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellOutcome {
    pub equilibrium: EquilibriumResult,
    pub bimodality: MeanSe,
    pub mean_exposure: MeanSe,
    pub phase: PhaseLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCellResult {
    pub index: usize,
    pub values: Vec<f64>,
    pub outcome: std::result::Result<CellOutcome, String>,
}

/// Everything for one cell. Depends only on the cell's own config, so
/// cells can run in any order.
pub fn run_cell(
    config: &SimulationConfig,
    solver: &SolverParams,
    profiles: &[StrategyProfile],
    rollouts: usize,
    replications: usize,
) -> Result<CellOutcome> {
    let payoff = estimate_payoff_matrix(profiles, profiles, config, rollouts)?;
    let equilibrium = qre_solve(&payoff.values, solver)?;
    let seeds = SeedTree::new(config.seed).child("equilibrium-play", &[]);
    let (play, _) = sample_play(config, profiles, profiles, &equilibrium.mu, &equilibrium.nu, replications, &seeds)?;
    Ok(CellOutcome {
        phase: phase_label(&equilibrium, profiles)?,
        equilibrium,
        bimodality: play.bimodality,
        mean_exposure: play.mean_exposure,
    })
}

/// Evaluate every cell in order; a failing cell is recorded, not fatal.
/// `on_cell` sees each result as soon as it is ready.
pub fn run_sweep_with(
    spec: &SweepSpec,
    profiles: &[StrategyProfile],
    mut on_cell: impl FnMut(&SweepCellResult),
) -> Result<Vec<SweepCellResult>> {
    spec.validate()?;
    let mut out = Vec::new();
    for (index, values) in spec.cells().into_iter().enumerate() {
        let (config, solver) = spec.cell_setup(&values);
        let outcome = run_cell(&config, &solver, profiles, spec.rollouts, spec.replications)
            .map_err(|e| e.to_string());
        let cell = SweepCellResult { index, values, outcome };
        on_cell(&cell);
        out.push(cell);
    }
    Ok(out)
}

/// Sweep with the default profile library sized to the base config.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepCellResult>> {
    let profiles = profile_library_for(spec.base.n_sources / 2)?;
    run_sweep_with(spec, &profiles, |_| {})
}

/// One row per cell.
pub fn write_sweep_csv<W: Write>(w: W, spec: &SweepSpec, cells: &[SweepCellResult]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = spec.axes.iter().map(|a| a.name.to_string()).collect();
    header.extend(
        [
            "bimodality",
            "bimodality_se",
            "mean_exposure",
            "mean_exposure_se",
            "phase",
            "low_confidence",
            "radical_factual",
            "centrist_factual",
            "value",
            "residual",
            "iterations",
            "error",
        ]
        .map(String::from),
    );
    out.write_record(&header)?;
    for c in cells {
        let mut rec: Vec<String> = c.values.iter().map(f64::to_string).collect();
        match &c.outcome {
            Ok(o) => rec.extend([
                o.bimodality.mean.to_string(),
                o.bimodality.se.to_string(),
                o.mean_exposure.mean.to_string(),
                o.mean_exposure.se.to_string(),
                o.phase.phase.to_string(),
                o.phase.low_confidence.to_string(),
                o.phase.radical_factual.to_string(),
                o.phase.centrist_factual.to_string(),
                o.equilibrium.value.to_string(),
                o.equilibrium.residual.to_string(),
                o.equilibrium.iterations.to_string(),
                String::new(),
            ]),
            Err(e) => {
                rec.extend(std::iter::repeat_n(String::new(), 11));
                rec.push(e.clone());
            }
        }
        out.write_record(&rec)?;
    }
    out.flush().map_err(|e| Error::io("<sweep csv>", e))?;
    Ok(())
}

/// Long format for heatmaps: axis values, metric name, value.
pub fn write_sweep_long_csv<W: Write>(w: W, spec: &SweepSpec, cells: &[SweepCellResult]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = spec.axes.iter().map(|a| a.name.to_string()).collect();
    header.extend(["metric", "value"].map(String::from));
    out.write_record(&header)?;
    for c in cells {
        let Ok(o) = &c.outcome else { continue };
        let phase = match o.phase.phase {
            Phase::Phase1 => 1.0,
            Phase::Phase2 => 2.0,
        };
        let metrics = [
            ("bimodality", o.bimodality.mean),
            ("bimodality_se", o.bimodality.se),
            ("mean_exposure", o.mean_exposure.mean),
            ("mean_exposure_se", o.mean_exposure.se),
            ("phase", phase),
            ("value", o.equilibrium.value),
        ];
        for (name, v) in metrics {
            let mut rec: Vec<String> = c.values.iter().map(f64::to_string).collect();
            rec.push(name.into());
            rec.push(v.to_string());
            out.write_record(&rec)?;
        }
    }
    out.flush().map_err(|e| Error::io("<sweep csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(axes: Vec<Axis>) -> SweepSpec {
        SweepSpec {
            axes,
            rollouts: 2,
            replications: 2,
            base: SimulationConfig {
                n_individuals: 20,
                horizon_t: 8,
                ..Default::default()
            },
            solver: SolverParams::default(),
        }
    }

    #[test]
    fn cells_are_row_major() {
        let s = spec(vec![
            Axis { name: SweepParam::Eta, values: vec![0.0, 1.0] },
            Axis { name: SweepParam::Xi, values: vec![2.0, 3.0, 4.0] },
        ]);
        let cells = s.cells();
        assert_eq!(cells.len(), 6);
        assert_eq!(cells[1], vec![0.0, 3.0]);
        assert_eq!(cells[3], vec![1.0, 2.0]);
        let (cfg, _) = s.cell_setup(&cells[5]);
        assert_eq!((cfg.params.eta, cfg.params.xi), (1.0, 4.0));
        let s = spec(vec![Axis { name: SweepParam::Tau, values: vec![3.0] }]);
        let (_, solver) = s.cell_setup(&[3.0]);
        assert_eq!((solver.tau_l, solver.tau_r), (3.0, 3.0));
    }

    #[test]
    fn validation() {
        assert!(spec(vec![]).validate().is_err());
        assert!(spec(vec![Axis { name: SweepParam::Eta, values: vec![] }]).validate().is_err());
        assert!(spec(vec![Axis { name: SweepParam::Eta, values: vec![f64::NAN] }]).validate().is_err());
        let three = vec![
            Axis { name: SweepParam::Eta, values: vec![1.0] },
            Axis { name: SweepParam::Xi, values: vec![1.0] },
            Axis { name: SweepParam::Tau, values: vec![1.0] },
        ];
        assert!(spec(three).validate().is_err());
        assert!("gamma".parse::<SweepParam>().is_err());
        assert_eq!("beta2".parse::<SweepParam>().unwrap(), SweepParam::Beta2);
    }

    #[test]
    fn toml_round_trip() {
        let s = spec(vec![Axis { name: SweepParam::Beta1, values: vec![1.0, 2.5] }]);
        assert_eq!(SweepSpec::from_toml_str(&s.to_toml_string()).unwrap(), s);
        let minimal = "[[axis]]\nname = \"tau\"\nvalues = [1.0, 10.0]\n";
        let parsed = SweepSpec::from_toml_str(minimal).unwrap();
        assert_eq!(parsed.rollouts, 200);
        assert_eq!(parsed.base, SimulationConfig::default());
    }

    #[test]
    fn phase_orders_radical_against_centrist() {
        let p = |name: &str, v: Vec<f64>| StrategyProfile::new(name, v).unwrap();
        let profiles = vec![p("radical", vec![1.0, 1.0, 0.5, 0.0, 0.0]), p("centrist", vec![0.0, 0.0, 0.5, 1.0, 1.0])];
        let eq = |w: f64| EquilibriumResult {
            mu: vec![w, 1.0 - w],
            nu: vec![w, 1.0 - w],
            value: 0.0,
            residual: 0.0,
            iterations: 0,
        };
        let l = phase_label(&eq(0.9), &profiles).unwrap();
        assert_eq!(l.phase, Phase::Phase1);
        assert!(!l.low_confidence);
        assert_eq!(phase_label(&eq(0.1), &profiles).unwrap().phase, Phase::Phase2);
        assert!(phase_label(&eq(0.5), &profiles).unwrap().low_confidence);
    }

    #[test]
    fn failing_cells_are_recorded() {
        let mut s = spec(vec![Axis { name: SweepParam::Beta1, values: vec![0.5, 2.0] }]);
        s.base.n_individuals = 12;
        let cells = run_sweep_with(&s, &crate::strategies::profile_library()[..2], |_| {}).unwrap();
        assert!(cells[0].outcome.is_err());
        assert!(cells[1].outcome.is_ok());
    }

    #[test]
    fn cell_results_do_not_depend_on_order() {
        let s = spec(vec![Axis { name: SweepParam::Eta, values: vec![0.0, 1.0] }]);
        let profiles = &crate::strategies::profile_library()[..3];
        let forward = run_sweep_with(&s, profiles, |_| {}).unwrap();
        let mut rev = s.clone();
        rev.axes[0].values.reverse();
        let backward = run_sweep_with(&rev, profiles, |_| {}).unwrap();
        assert_eq!(forward[0].outcome, backward[1].outcome);
        assert_eq!(forward[1].outcome, backward[0].outcome);
    }
}
