//! Domain types shared by the simulator, the metrics and the game layer.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar parameters of the opinion and credibility dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Misinformation gain: extra reach of a source while it misinforms.
    pub eta: f64,
    /// Credibility gain: penalty of low credibility on skeptical individuals.
    pub xi: f64,
    /// Individual-individual homophily rate.
    pub kappa: f64,
    /// Source-individual homophily rate.
    pub kappa_hat: f64,
    /// Credibility memory in (0, 1).
    pub lambda: f64,
    /// Step amplitude of both the social and the media term.
    pub h: f64,
    pub sigma: f64,
    /// Opinion-strength parameter of the running reward.
    pub varpi: f64,
    /// Steepness exponent of the running reward.
    pub vartheta: u32,
    pub gamma: f64,
    pub x_min: f64,
    pub x_max: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        default_params()
    }
}

pub fn default_params() -> ModelParams {
    let h = 0.1_f64;
    ModelParams {
        eta: 1.0,
        xi: 2.0,
        kappa: 20.0,
        kappa_hat: 5.0,
        lambda: 0.95,
        h,
        sigma: 0.1 * h.sqrt(),
        varpi: FRAC_PI_2,
        vartheta: 5,
        gamma: 0.99,
        x_min: -1.0,
        x_max: 1.0,
    }
}

fn finite(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::invalid(name, format!("must be finite, got {v}")))
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let check = |name, ok: bool, what: &str, v: f64| {
            finite(name, v)?;
            if ok {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("{what}, got {v}")))
            }
        };
        check("eta", self.eta >= 0.0, "must be >= 0", self.eta)?;
        check("xi", self.xi >= 0.0, "must be >= 0", self.xi)?;
        check("kappa", self.kappa > 0.0, "must be > 0", self.kappa)?;
        check("kappa_hat", self.kappa_hat > 0.0, "must be > 0", self.kappa_hat)?;
        check(
            "lambda",
            self.lambda > 0.0 && self.lambda < 1.0,
            "must lie in (0, 1)",
            self.lambda,
        )?;
        check("h", self.h > 0.0, "must be > 0", self.h)?;
        check("sigma", self.sigma >= 0.0, "must be >= 0", self.sigma)?;
        check("varpi", true, "", self.varpi)?;
        check(
            "gamma",
            self.gamma > 0.0 && self.gamma < 1.0,
            "must lie in (0, 1)",
            self.gamma,
        )?;
        finite("x_min", self.x_min)?;
        check("x_max", self.x_max > self.x_min, "must exceed x_min", self.x_max)?;
        if self.vartheta == 0 {
            return Err(Error::invalid("vartheta", "must be a positive integer"));
        }
        Ok(())
    }

    pub fn clamp_opinion(&self, x: f64) -> f64 {
        x.clamp(self.x_min, self.x_max)
    }
}

/// What a source publishes at one time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Misinformation,
    Factual,
}

impl Action {
    /// 1 for factual news, 0 for misinformation.
    pub fn value(self) -> f64 {
        match self {
            Action::Misinformation => 0.0,
            Action::Factual => 1.0,
        }
    }

    pub fn from_bit(bit: u8) -> Result<Self> {
        match bit {
            0 => Ok(Action::Misinformation),
            1 => Ok(Action::Factual),
            b => Err(Error::Parse(format!("action must be 0 or 1, got {b}"))),
        }
    }

    pub fn bit(self) -> u8 {
        self.value() as u8
    }
}

/// The two coalitions. `L` owns the sources with negative opinion and
/// maximizes the return; `R` owns the positive ones and minimizes it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    L,
    R,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::L => Player::R,
            Player::R => Player::L,
        }
    }

    /// Global source index of the `k`-th owned source, counting from the
    /// centre outwards. Sources are stored in ascending opinion order.
    pub fn source_index(self, k: usize, n_sources: usize) -> usize {
        let half = n_sources / 2;
        debug_assert!(k < half);
        match self {
            Player::L => half - 1 - k,
            Player::R => half + k,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationState {
    pub opinions: Vec<f64>,
    pub susceptibilities: Vec<f64>,
}

impl PopulationState {
    pub fn new(opinions: Vec<f64>, susceptibilities: Vec<f64>) -> Result<Self> {
        if opinions.is_empty() {
            return Err(Error::invalid("opinions", "population must be nonempty"));
        }
        if opinions.len() != susceptibilities.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} opinions but {} susceptibilities",
                opinions.len(),
                susceptibilities.len()
            )));
        }
        if let Some(s) = susceptibilities
            .iter()
            .find(|s| !(0.0..=1.0).contains(*s))
        {
            return Err(Error::invalid(
                "susceptibilities",
                format!("{s} outside [0, 1]"),
            ));
        }
        if let Some(x) = opinions.iter().find(|x| !x.is_finite()) {
            return Err(Error::invalid("opinions", format!("non-finite opinion {x}")));
        }
        Ok(PopulationState {
            opinions,
            susceptibilities,
        })
    }

    pub fn len(&self) -> usize {
        self.opinions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.opinions.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceState {
    pub source_opinions: Vec<f64>,
    pub credibilities: Vec<f64>,
    pub actions: Vec<Action>,
}

impl SourceState {
    /// Fully credible sources, all publishing factual news.
    pub fn fresh(source_opinions: Vec<f64>) -> Self {
        let m = source_opinions.len();
        SourceState {
            source_opinions,
            credibilities: vec![1.0; m],
            actions: vec![Action::Factual; m],
        }
    }

    pub fn len(&self) -> usize {
        self.source_opinions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source_opinions.is_empty()
    }
}

/// Everything needed to run one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub n_individuals: usize,
    pub n_sources: usize,
    #[serde(rename = "horizon_T")]
    pub horizon_t: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub n_bins_l: usize,
    pub seed: u64,
    pub params: ModelParams,
    /// Overrides the evenly spaced default layout when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_opinions: Option<Vec<f64>>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            n_individuals: 500,
            n_sources: 10,
            horizon_t: 200,
            beta1: 3.0,
            beta2: 2.0,
            n_bins_l: 20,
            seed: 0,
            params: default_params(),
            source_opinions: None,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n_individuals == 0 {
            return Err(Error::invalid("n_individuals", "must be >= 1"));
        }
        if self.n_sources < 2 || self.n_sources % 2 != 0 {
            return Err(Error::invalid(
                "n_sources",
                format!("must be even and >= 2, got {}", self.n_sources),
            ));
        }
        if self.horizon_t == 0 {
            return Err(Error::invalid("horizon_T", "must be >= 1"));
        }
        validate_beta_shapes(self.beta1, self.beta2)?;
        if self.n_bins_l < 2 {
            return Err(Error::invalid("n_bins_l", "must be >= 2"));
        }
        if let Some(ys) = &self.source_opinions {
            if ys.len() != self.n_sources {
                return Err(Error::DimensionMismatch(format!(
                    "{} source opinions for {} sources",
                    ys.len(),
                    self.n_sources
                )));
            }
            let (lo, hi) = (self.params.x_min, self.params.x_max);
            if ys.iter().any(|y| !(lo..=hi).contains(y)) {
                return Err(Error::invalid(
                    "source_opinions",
                    format!("every source opinion must lie in [{lo}, {hi}]"),
                ));
            }
            let half = self.n_sources / 2;
            let sorted = ys.windows(2).all(|w| w[0] <= w[1]);
            if !sorted || ys[half - 1] >= 0.0 || ys[half] <= 0.0 {
                return Err(Error::invalid(
                    "source_opinions",
                    "must be ascending with the lower half negative and the upper half positive",
                ));
            }
        }
        Ok(())
    }

    pub fn source_opinions(&self) -> Result<Vec<f64>> {
        match &self.source_opinions {
            Some(ys) => Ok(ys.clone()),
            None => default_source_opinions(self.n_sources, self.params.x_min, self.params.x_max),
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: SimulationConfig =
            toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }
}

fn validate_beta_shapes(beta1: f64, beta2: f64) -> Result<()> {
    for (name, v) in [("beta1", beta1), ("beta2", beta2)] {
        if !(v.is_finite() && v >= 1.0) {
            return Err(Error::invalid(name, format!("shape must be >= 1, got {v}")));
        }
    }
    Ok(())
}

pub fn sample_susceptibilities<R: Rng + ?Sized>(
    n: usize,
    beta1: f64,
    beta2: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("n", "must be >= 1"));
    }
    validate_beta_shapes(beta1, beta2)?;
    let dist = Beta::new(beta1, beta2).map_err(|e| Error::invalid("beta1", e.to_string()))?;
    Ok((0..n)
        .map(|_| dist.sample(rng).clamp(0.0, 1.0))
        .collect())
}

/// Uniform opinions on the opinion interval and Beta-distributed susceptibilities.
pub fn init_population<R: Rng + ?Sized>(
    config: &SimulationConfig,
    rng: &mut R,
) -> Result<PopulationState> {
    config.validate()?;
    let ModelParams { x_min, x_max, .. } = config.params;
    let opinions = (0..config.n_individuals)
        .map(|_| rng.random_range(x_min..=x_max))
        .collect();
    let susceptibilities =
        sample_susceptibilities(config.n_individuals, config.beta1, config.beta2, rng)?;
    PopulationState::new(opinions, susceptibilities)
}

/// Midpoints of `m` equal cells of the opinion interval. For a symmetric
/// interval this is mirror-symmetric and never places a source at 0.
pub fn default_source_opinions(m: usize, x_min: f64, x_max: f64) -> Result<Vec<f64>> {
    if m == 0 || m % 2 != 0 {
        return Err(Error::invalid(
            "n_sources",
            format!("must be even and >= 2, got {m}"),
        ));
    }
    let width = (x_max - x_min) / m as f64;
    Ok((0..m)
        .map(|k| x_min + (k as f64 + 0.5) * width)
        .collect())
}
