//! Opinion and credibility dynamics.
//!
//! Each step moves every individual by a kernel-weighted average pull toward
//! the other individuals (social term) and toward the sources (media term),
//! plus Gaussian noise, then clamps to the opinion interval. Source
//! credibility is an exponential moving average of factual actions.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{init_population, Action, ModelParams, PopulationState, SimulationConfig, SourceState};
use crate::rng::SeedTree;
use crate::strategies::{sample_actions_into, StrategyProfile};

/// Individual-individual interaction weight `exp(-kappa r)`.
pub fn social_kernel(r: f64, kappa: f64) -> f64 {
    (-kappa * r).exp()
}

/// Reach multiplier of an action; factual news decays faster with distance.
pub fn misinfo_factor(a: Action, eta: f64) -> f64 {
    1.0 + eta * a.value()
}

/// Credibility penalty, 1 for a fully credible source or a fully
/// susceptible individual.
pub fn credibility_factor(c: f64, s: f64, xi: f64) -> f64 {
    1.0 + xi * (1.0 - c) * (1.0 - s)
}

/// Source-individual interaction weight.
pub fn media_kernel(r: f64, c: f64, a: Action, s: f64, params: &ModelParams) -> f64 {
    (-params.kappa_hat * misinfo_factor(a, params.eta) * credibility_factor(c, s, params.xi) * r).exp()
}

/// One step of the credibility moving average.
pub fn credibility_step(c: &[f64], actions: &[Action], lambda: f64) -> Vec<f64> {
    debug_assert_eq!(c.len(), actions.len());
    c.iter()
        .zip(actions)
        .map(|(&c, a)| (lambda * c + (1.0 - lambda) * a.value()).clamp(0.0, 1.0))
        .collect()
}

/// Normalizer and unnormalized pull of the exponential social kernel for
/// every individual: `(sum_j w_ij, sum_j w_ij (x_j - x_i))` with
/// `w_ij = exp(-kappa |x_i - x_j|)`, self-interaction included.
///
/// Runs in `O(N log N)`: after sorting, the kernel factorizes across
/// neighbouring gaps, so left and right partial sums follow one-term
/// recursions.
pub fn social_sums(opinions: &[f64], kappa: f64) -> Vec<(f64, f64)> {
    let mut order: Vec<usize> = (0..opinions.len()).collect();
    let mut out = vec![(0.0, 0.0); opinions.len()];
    social_sums_into(opinions, kappa, &mut order, &mut out);
    out
}

fn social_sums_into(opinions: &[f64], kappa: f64, order: &mut Vec<usize>, out: &mut [(f64, f64)]) {
    let n = opinions.len();
    order.clear();
    order.extend(0..n);
    order.sort_unstable_by(|&a, &b| opinions[a].total_cmp(&opinions[b]));

    // left pass: j <= k
    let (mut s, mut t) = (0.0_f64, 0.0_f64);
    let mut prev = f64::NAN;
    for (rank, &i) in order.iter().enumerate() {
        let x = opinions[i];
        if rank == 0 {
            s = 1.0;
            t = 0.0;
        } else {
            let d = x - prev;
            let e = (-kappa * d).exp();
            t = e * (t - d * s);
            s = e * s + 1.0;
        }
        out[i] = (s, t);
        prev = x;
    }
    // right pass: j > k
    let (mut s, mut t) = (0.0_f64, 0.0_f64);
    let mut next = f64::NAN;
    for (rank, &i) in order.iter().enumerate().rev() {
        let x = opinions[i];
        if rank + 1 < n {
            let d = next - x;
            let e = (-kappa * d).exp();
            t = e * (t + d * s + d);
            s = e * (s + 1.0);
        }
        out[i].0 += s;
        out[i].1 += t;
        next = x;
    }
}

/// Scratch space for repeated opinion steps.
#[derive(Debug, Default, Clone)]
struct Workspace {
    order: Vec<usize>,
    social: Vec<(f64, f64)>,
    reach: Vec<f64>,
    penalty: Vec<f64>,
}

fn opinion_step_impl(
    pop: &PopulationState,
    src: &SourceState,
    params: &ModelParams,
    noise: &[f64],
    ws: &mut Workspace,
    out: &mut Vec<f64>,
) {
    let n = pop.len();
    let x = &pop.opinions;
    ws.social.resize(n, (0.0, 0.0));
    social_sums_into(x, params.kappa, &mut ws.order, &mut ws.social);

    ws.reach.clear();
    ws.penalty.clear();
    for (&c, &a) in src.credibilities.iter().zip(&src.actions) {
        ws.reach.push(params.kappa_hat * misinfo_factor(a, params.eta));
        ws.penalty.push(params.xi * (1.0 - c));
    }

    out.clear();
    for i in 0..n {
        let xi = x[i];
        let unsusceptible = 1.0 - pop.susceptibilities[i];
        let (a_norm, social) = ws.social[i];
        let (mut b_norm, mut media) = (0.0, 0.0);
        for ((&y, &reach), &pen) in src.source_opinions.iter().zip(&ws.reach).zip(&ws.penalty) {
            let w = (-reach * (1.0 + pen * unsusceptible) * (xi - y).abs()).exp();
            b_norm += w;
            media += w * (y - xi);
        }
        let next = xi + params.h * social / a_norm + params.h * media / b_norm + params.sigma * noise[i];
        out.push(params.clamp_opinion(next));
    }
}

/// Next opinions given explicit standard-normal noise draws.
pub fn opinion_step_with_noise(
    pop: &PopulationState,
    src: &SourceState,
    params: &ModelParams,
    noise: &[f64],
) -> Vec<f64> {
    assert_eq!(noise.len(), pop.len(), "one noise draw per individual");
    let mut out = Vec::with_capacity(pop.len());
    opinion_step_impl(pop, src, params, noise, &mut Workspace::default(), &mut out);
    out
}

pub fn opinion_step<R: Rng + ?Sized>(
    pop: &PopulationState,
    src: &SourceState,
    params: &ModelParams,
    rng: &mut R,
) -> Vec<f64> {
    let noise: Vec<f64> = (0..pop.len()).map(|_| rng.sample(StandardNormal)).collect();
    opinion_step_with_noise(pop, src, params, &noise)
}

/// Fraction of opinions in each of `l` equal-width bins; the last bin is
/// closed on the right and out-of-range values are assigned to the edge bins.
pub fn discretize_opinions(x: &[f64], l: usize, x_min: f64, x_max: f64) -> Vec<f64> {
    assert!(l >= 2, "need at least two bins");
    let mut z = vec![0.0; l];
    if x.is_empty() {
        return z;
    }
    let width = (x_max - x_min) / l as f64;
    let inc = 1.0 / x.len() as f64;
    for &v in x {
        let k = ((v - x_min) / width).floor();
        let k = if k.is_nan() { 0 } else { (k.max(0.0) as usize).min(l - 1) };
        z[k] += inc;
    }
    z
}

/// Centre of each histogram bin.
pub fn bin_centers(l: usize, x_min: f64, x_max: f64) -> Vec<f64> {
    let width = (x_max - x_min) / l as f64;
    (0..l).map(|k| x_min + (k as f64 + 0.5) * width).collect()
}

/// What a source can see: the opinion histogram and every credibility.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub histogram: Vec<f64>,
    pub credibilities: Vec<f64>,
}

impl Observation {
    pub fn new(pop: &PopulationState, src: &SourceState, l: usize, params: &ModelParams) -> Self {
        Observation {
            histogram: discretize_opinions(&pop.opinions, l, params.x_min, params.x_max),
            credibilities: src.credibilities.clone(),
        }
    }
}

/// Stepwise simulator over an explicit state.
#[derive(Debug, Clone)]
pub struct Engine {
    pub params: ModelParams,
    pub population: PopulationState,
    pub sources: SourceState,
    ws: Workspace,
    next: Vec<f64>,
}

impl Engine {
    pub fn new(params: ModelParams, population: PopulationState, sources: SourceState) -> Self {
        Engine {
            params,
            population,
            sources,
            ws: Workspace::default(),
            next: Vec::new(),
        }
    }

    /// Publish `actions`, move opinions under them, then update credibility.
    pub fn step(&mut self, actions: &[Action], noise: &[f64]) {
        assert_eq!(actions.len(), self.sources.len());
        assert_eq!(noise.len(), self.population.len());
        self.sources.actions.copy_from_slice(actions);
        opinion_step_impl(
            &self.population,
            &self.sources,
            &self.params,
            noise,
            &mut self.ws,
            &mut self.next,
        );
        std::mem::swap(&mut self.population.opinions, &mut self.next);
        let lambda = self.params.lambda;
        for (c, a) in self.sources.credibilities.iter_mut().zip(actions) {
            *c = (lambda * *c + (1.0 - lambda) * a.value()).clamp(0.0, 1.0);
        }
    }
}

/// Receives the state after every step of a rollout.
pub trait StepObserver {
    /// Called once with the initial state before any action.
    fn start(&mut self, engine: &Engine);
    /// Called after step `t` (0-based) with the actions taken at that step;
    /// the engine already holds `x_{t+1}` and `c_{t+1}`.
    fn step(&mut self, t: usize, actions: &[Action], engine: &Engine);
}

/// Full time series of one rollout.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `T + 1` rows of `N` opinions.
    pub opinion_history: Vec<Vec<f64>>,
    /// `T + 1` rows of `M` credibilities.
    pub credibility_history: Vec<Vec<f64>>,
    /// `T` rows of `M` actions; row `t` was taken at state `t`.
    pub action_history: Vec<Vec<Action>>,
    pub susceptibilities: Vec<f64>,
    pub source_opinions: Vec<f64>,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.action_history.len()
    }

    pub fn final_opinions(&self) -> &[f64] {
        self.opinion_history.last().expect("trajectory has an initial state")
    }

    /// Long-format CSV, one row per entity and time step. Fields that do not
    /// apply to an entity kind are left empty.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "entity_kind", "entity_id", "opinion", "credibility", "action", "susceptibility"])?;
        for (t, xs) in self.opinion_history.iter().enumerate() {
            for (i, (x, s)) in xs.iter().zip(&self.susceptibilities).enumerate() {
                w.write_record([
                    t.to_string(),
                    "individual".into(),
                    i.to_string(),
                    x.to_string(),
                    String::new(),
                    String::new(),
                    s.to_string(),
                ])?;
            }
            for (m, (y, c)) in self
                .source_opinions
                .iter()
                .zip(&self.credibility_history[t])
                .enumerate()
            {
                let action = self
                    .action_history
                    .get(t)
                    .map(|row| row[m].bit().to_string())
                    .unwrap_or_default();
                w.write_record([
                    t.to_string(),
                    "source".into(),
                    m.to_string(),
                    y.to_string(),
                    c.to_string(),
                    action,
                    String::new(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io("<trajectory csv>", e))?;
        Ok(())
    }
}

#[derive(Debug, Default)]
struct Recorder {
    traj: Option<Trajectory>,
}

impl StepObserver for Recorder {
    fn start(&mut self, engine: &Engine) {
        self.traj = Some(Trajectory {
            opinion_history: vec![engine.population.opinions.clone()],
            credibility_history: vec![engine.sources.credibilities.clone()],
            action_history: Vec::new(),
            susceptibilities: engine.population.susceptibilities.clone(),
            source_opinions: engine.sources.source_opinions.clone(),
        });
    }

    fn step(&mut self, _t: usize, actions: &[Action], engine: &Engine) {
        let traj = self.traj.as_mut().expect("start() runs first");
        traj.opinion_history.push(engine.population.opinions.clone());
        traj.credibility_history.push(engine.sources.credibilities.clone());
        traj.action_history.push(actions.to_vec());
    }
}

fn check_profiles(config: &SimulationConfig, l: &StrategyProfile, r: &StrategyProfile) -> Result<()> {
    let half = config.n_sources / 2;
    for (side, p) in [("L", l), ("R", r)] {
        if p.len() != half {
            return Err(Error::DimensionMismatch(format!(
                "profile `{}` for player {side} covers {} sources, player owns {half}",
                p.name,
                p.len()
            )));
        }
    }
    Ok(())
}

/// Run `config.horizon_t` steps with actions drawn i.i.d. each step from the
/// two stationary profiles, reporting every state to `observer`.
///
/// Initial opinions, actions and noise come from separate streams of
/// `seeds`, so changing the profiles never perturbs the noise sequence.
pub fn run<O: StepObserver>(
    config: &SimulationConfig,
    profile_l: &StrategyProfile,
    profile_r: &StrategyProfile,
    seeds: &SeedTree,
    observer: &mut O,
) -> Result<()> {
    config.validate()?;
    check_profiles(config, profile_l, profile_r)?;
    let population = init_population(config, &mut seeds.stream("population", &[]))?;
    let sources = SourceState::fresh(config.source_opinions()?);
    let mut engine = Engine::new(config.params, population, sources);
    let mut action_rng = seeds.stream("actions", &[]);
    let mut noise_rng = seeds.stream("noise", &[]);
    let mut actions = Vec::with_capacity(config.n_sources);
    let mut noise = vec![0.0; config.n_individuals];

    observer.start(&engine);
    for t in 0..config.horizon_t {
        sample_actions_into(profile_l, profile_r, &mut action_rng, &mut actions);
        for w in noise.iter_mut() {
            *w = noise_rng.sample(StandardNormal);
        }
        engine.step(&actions, &noise);
        observer.step(t, &actions, &engine);
    }
    Ok(())
}

/// Run one rollout and keep the whole history.
pub fn simulate(
    config: &SimulationConfig,
    profile_l: &StrategyProfile,
    profile_r: &StrategyProfile,
    seeds: &SeedTree,
) -> Result<Trajectory> {
    let mut rec = Recorder::default();
    run(config, profile_l, profile_r, seeds, &mut rec)?;
    Ok(rec.traj.expect("run() always starts the observer"))
}
