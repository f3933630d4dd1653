//! Command-line workflows. Each `cmd_*` function is usable on its own; the
//! binary only parses arguments and maps errors to exit codes.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::dynamics::{bin_centers, discretize_opinions, simulate, Trajectory};
use crate::error::{Error, Result};
use crate::game::deviation::{deviation_experiment, ForcedPlay};
use crate::game::payoff::{estimate_payoff_matrix, payoff_paths, PayoffMatrix, PayoffMetadata};
use crate::game::qre::{qre_solve, EquilibriumResult, SolverParams};
use crate::metrics::MetricReport;
use crate::model::SimulationConfig;
use crate::rng::SeedTree;
use crate::strategies::{
    find_profile_index, load_credibility_curve, profile_library_for, profiles_from_toml,
    read_credibility_csv_file, StrategyProfile,
};
use crate::sweep::{run_sweep_with, write_sweep_csv, write_sweep_long_csv, SweepSpec};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Settings read from `--config`: the simulation config at top level plus
/// optional `[solver]` and `[estimation]` tables.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub simulation: SimulationConfig,
    pub solver: SolverParams,
    pub estimation: Estimation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Estimation {
    #[serde(default = "default_rollouts")]
    pub n_rollouts: usize,
    #[serde(default = "default_replications")]
    pub replications: usize,
}

fn default_rollouts() -> usize {
    200
}

fn default_replications() -> usize {
    20
}

impl Default for Estimation {
    fn default() -> Self {
        Estimation {
            n_rollouts: default_rollouts(),
            replications: default_replications(),
        }
    }
}

fn from_value<T: serde::de::DeserializeOwned>(v: toml::Value) -> Result<T> {
    v.try_into().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        let solver: SolverParams = match table.remove("solver") {
            Some(v) => from_value(v)?,
            None => SolverParams::default(),
        };
        let estimation: Estimation = match table.remove("estimation") {
            Some(v) => from_value(v)?,
            None => Estimation::default(),
        };
        let simulation: SimulationConfig = if table.is_empty() {
            SimulationConfig::default()
        } else {
            from_value(toml::Value::Table(table))?
        };
        simulation.validate()?;
        solver.validate()?;
        Ok(RunConfig { simulation, solver, estimation })
    }

    pub fn to_toml_string(&self) -> String {
        let mut table = toml::Table::try_from(&self.simulation).expect("config is a table");
        table.insert("solver".into(), toml::Value::try_from(self.solver).expect("solver is a table"));
        table.insert("estimation".into(), toml::Value::try_from(self.estimation).expect("estimation is a table"));
        toml::to_string(&table).expect("run config is representable as TOML")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }
}

/// Written last by every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub workers: usize,
    pub wall_clock_seconds: f64,
    pub artifacts: Vec<PathBuf>,
    #[serde(default)]
    pub notes: BTreeMap<String, String>,
    pub config: toml::Table,
}

/// Options shared by all commands.
#[derive(Debug, Clone, Args, Default)]
pub struct CommonOpts {
    /// Run configuration (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Root seed; overrides the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for rollouts.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Replace existing output files.
    #[arg(long)]
    pub force: bool,
    /// Profile library (TOML, `[[profile]]` tables) replacing the defaults.
    #[arg(long)]
    pub profile_file: Option<PathBuf>,
}

impl CommonOpts {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        CommonOpts {
            out: out.into(),
            ..Default::default()
        }
    }

    fn run_config(&self) -> Result<RunConfig> {
        let mut rc = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            rc.simulation.seed = s;
        }
        Ok(rc)
    }

    fn workers(&self) -> Result<usize> {
        match self.workers {
            Some(0) => Err(Error::invalid("workers", "must be >= 1")),
            Some(w) => Ok(w),
            None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
        }
    }

    fn profiles(&self, config: &SimulationConfig) -> Result<Vec<StrategyProfile>> {
        let half = config.n_sources / 2;
        match &self.profile_file {
            None => profile_library_for(half),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                let lib = profiles_from_toml(&text)?;
                if lib[0].len() != half {
                    return Err(Error::DimensionMismatch(format!(
                        "profile file covers {} sources per player, config has {half}",
                        lib[0].len()
                    )));
                }
                Ok(lib)
            }
        }
    }
}

/// Tracks outputs of one command so nothing is clobbered by accident and
/// the manifest can list them.
struct Outputs {
    dir: PathBuf,
    force: bool,
    written: Vec<PathBuf>,
    started: Instant,
}

impl Outputs {
    fn new(dir: &Path, force: bool, names: &[&str]) -> Result<Self> {
        if !force {
            for name in names.iter().chain(["manifest.toml"].iter()) {
                let p = dir.join(name);
                if p.exists() {
                    return Err(Error::WouldOverwrite(p));
                }
            }
        }
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Outputs {
            dir: dir.to_owned(),
            force,
            written: Vec::new(),
            started: Instant::now(),
        })
    }

    fn path(&mut self, name: &str) -> Result<PathBuf> {
        let p = self.dir.join(name);
        if !self.force && p.exists() {
            return Err(Error::WouldOverwrite(p));
        }
        if let Some(parent) = p.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        self.written.push(p.clone());
        Ok(p)
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let p = self.path(name)?;
        File::create(&p).map(BufWriter::new).map_err(|e| Error::io(&p, e))
    }

    fn write(&mut self, name: &str, text: &str) -> Result<()> {
        let p = self.path(name)?;
        std::fs::write(&p, text).map_err(|e| Error::io(&p, e))
    }

    fn finish(
        self,
        command: &str,
        rc: &RunConfig,
        workers: usize,
        notes: BTreeMap<String, String>,
    ) -> Result<RunManifest> {
        let manifest = RunManifest {
            command: command.into(),
            version: VERSION.into(),
            seed: rc.simulation.seed,
            workers,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            artifacts: self.written.clone(),
            notes,
            config: rc.to_toml_string().parse().expect("run config round-trips"),
        };
        let p = self.dir.join("manifest.toml");
        let text = toml::to_string(&manifest).expect("manifest is representable as TOML");
        std::fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
        Ok(manifest)
    }
}

fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid("workers", e.to_string()))?
        .install(f)
}

/// Opinion histogram per step: `t, bin_center, density`.
pub fn write_histogram_csv<W: std::io::Write>(w: W, traj: &Trajectory, config: &SimulationConfig) -> Result<()> {
    let (l, lo, hi) = (config.n_bins_l, config.params.x_min, config.params.x_max);
    let centers = bin_centers(l, lo, hi);
    let width = (hi - lo) / l as f64;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "bin_center", "density"])?;
    for (t, xs) in traj.opinion_history.iter().enumerate() {
        for (c, f) in centers.iter().zip(discretize_opinions(xs, l, lo, hi)) {
            out.write_record([t.to_string(), c.to_string(), (f / width).to_string()])?;
        }
    }
    out.flush().map_err(|e| Error::io("<histogram csv>", e))?;
    Ok(())
}

/// How `simulate` chooses the two profiles.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileChoice {
    /// Names or `P<k>` tags for `L` and `R`.
    Named(String, String),
    /// Both profiles read off a credibility-versus-bias curve.
    Curve(PathBuf),
}

impl ProfileChoice {
    /// `"P3"` plays the same profile on both sides, `"P1,P3"` sets `L` and `R`.
    pub fn parse_names(s: &str) -> Self {
        match s.split_once(',') {
            Some((l, r)) => ProfileChoice::Named(l.trim().into(), r.trim().into()),
            None => ProfileChoice::Named(s.trim().into(), s.trim().into()),
        }
    }
}

pub fn cmd_simulate(opts: &CommonOpts, choice: &ProfileChoice) -> Result<RunManifest> {
    let rc = opts.run_config()?;
    let config = &rc.simulation;
    let workers = opts.workers()?;
    let (pl, pr) = match choice {
        ProfileChoice::Named(l, r) => {
            let lib = opts.profiles(config)?;
            let (i, j) = (find_profile_index(&lib, l)?, find_profile_index(&lib, r)?);
            (lib[i].clone(), lib[j].clone())
        }
        ProfileChoice::Curve(path) => {
            let rows = read_credibility_csv_file(path)?;
            load_credibility_curve(&rows, &config.source_opinions()?)?
        }
    };
    let mut out = Outputs::new(&opts.out, opts.force, &["trajectory.csv", "metrics.toml", "histogram.csv"])?;
    let traj = simulate(config, &pl, &pr, &SeedTree::new(config.seed))?;
    let report = MetricReport::from_trajectory(&traj, &config.params)?;
    traj.write_csv(out.create("trajectory.csv")?)?;
    out.write("metrics.toml", &report.to_toml_string())?;
    write_histogram_csv(out.create("histogram.csv")?, &traj, config)?;
    let notes = BTreeMap::from([
        ("profile_L".to_owned(), pl.name.clone()),
        ("profile_R".to_owned(), pr.name.clone()),
    ]);
    out.finish("simulate", &rc, workers, notes)
}

/// Estimate the payoff matrix over the profile library and save it as
/// `payoff.csv`, `payoff_std_errors.csv` and `payoff_meta.toml`.
pub fn cmd_payoff(opts: &CommonOpts) -> Result<RunManifest> {
    let rc = opts.run_config()?;
    let config = &rc.simulation;
    let workers = opts.workers()?;
    let lib = opts.profiles(config)?;
    let mut out = Outputs::new(&opts.out, opts.force, &["payoff.csv", "payoff_std_errors.csv", "payoff_meta.toml"])?;
    let m = with_pool(workers, || estimate_payoff_matrix(&lib, &lib, config, rc.estimation.n_rollouts))?;
    let mut meta = PayoffMetadata::new(config, &lib, &lib, &m);
    // both players draw from the same list and the layout is mirror
    // symmetric, so every profile is its own mirror image
    let mirror: Vec<usize> = (0..lib.len()).collect();
    meta.antisymmetry = Some(m.antisymmetry(&mirror, 3.0)?);
    for p in payoff_paths(&out.dir, "payoff") {
        out.path(p.file_name().and_then(|n| n.to_str()).expect("utf-8 file name"))?;
    }
    m.save(&out.dir, "payoff", &meta)?;
    out.finish("payoff", &rc, workers, BTreeMap::new())
}

/// `dir/stem.csv` to `(dir, stem)`.
fn payoff_location(values_csv: &Path) -> Result<(PathBuf, String)> {
    let stem = values_csv
        .file_stem()
        .and_then(|s| s.to_str())
        .filter(|_| values_csv.extension().is_some_and(|e| e == "csv"))
        .ok_or_else(|| Error::invalid("payoff", format!("expected a .csv file, got {}", values_csv.display())))?;
    let dir = values_csv.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf);
    Ok((dir, stem.to_owned()))
}

pub fn load_payoff(values_csv: &Path) -> Result<(PayoffMatrix, PayoffMetadata)> {
    let (dir, stem) = payoff_location(values_csv)?;
    PayoffMatrix::load(&dir, &stem)
}

/// Solve the game stored next to `values_csv`; `tau_*` override the config.
pub fn cmd_solve(
    opts: &CommonOpts,
    values_csv: &Path,
    tau_l: Option<f64>,
    tau_r: Option<f64>,
) -> Result<RunManifest> {
    let mut rc = opts.run_config()?;
    let (m, meta) = load_payoff(values_csv)?;
    rc.simulation = meta.config;
    rc.estimation.n_rollouts = meta.n_rollouts;
    if let Some(t) = tau_l {
        rc.solver.tau_l = t;
    }
    if let Some(t) = tau_r {
        rc.solver.tau_r = t;
    }
    rc.solver.validate()?;
    let mut out = Outputs::new(&opts.out, opts.force, &["equilibrium.toml"])?;
    let eq = qre_solve(&m.values, &rc.solver)?;
    out.write("equilibrium.toml", &eq.to_toml_string())?;
    let notes = BTreeMap::from([("payoff".to_owned(), values_csv.display().to_string())]);
    out.finish("solve", &rc, 1, notes)
}

/// `forced` is a profile name or tag, or `equilibrium` for `L`'s own
/// equilibrium mix. The payoff matrix is read from `payoff` when given and
/// estimated otherwise.
pub fn cmd_deviate(opts: &CommonOpts, forced: &str, payoff: Option<&Path>) -> Result<RunManifest> {
    let mut rc = opts.run_config()?;
    let workers = opts.workers()?;
    let loaded = payoff.map(load_payoff).transpose()?;
    let lib = match &loaded {
        Some((_, meta)) => {
            rc.simulation = meta.config.clone();
            rc.estimation.n_rollouts = meta.n_rollouts;
            if let Some(s) = opts.seed {
                rc.simulation.seed = s;
            }
            meta.profiles_l.clone()
        }
        None => opts.profiles(&rc.simulation)?,
    };
    let forced_play = if forced == "equilibrium" {
        None
    } else {
        Some(ForcedPlay::Profile(find_profile_index(&lib, forced)?))
    };
    let mut names = vec!["deviation.toml", "deviation_trajectory.csv"];
    if loaded.is_none() {
        names.extend(["payoff.csv", "payoff_std_errors.csv", "payoff_meta.toml"]);
    }
    let mut out = Outputs::new(&opts.out, opts.force, &names)?;
    let config = rc.simulation.clone();
    let matrix = match loaded {
        Some((m, _)) => m,
        None => {
            let m = with_pool(workers, || estimate_payoff_matrix(&lib, &lib, &config, rc.estimation.n_rollouts))?;
            for name in ["payoff.csv", "payoff_std_errors.csv", "payoff_meta.toml"] {
                out.path(name)?;
            }
            m.save(&out.dir, "payoff", &PayoffMetadata::new(&config, &lib, &lib, &m))?;
            m
        }
    };
    let forced_play = match forced_play {
        Some(f) => f,
        None => ForcedPlay::Mixed(qre_solve(&matrix.values, &rc.solver)?.mu),
    };
    let (report, sample) = with_pool(workers, || {
        deviation_experiment(&config, &lib, &matrix, &rc.solver, &forced_play, rc.estimation.replications)
    })?;
    out.write("deviation.toml", &report.to_toml_string())?;
    sample.write_csv(out.create("deviation_trajectory.csv")?)?;
    let notes = BTreeMap::from([("forced_L".to_owned(), forced.to_owned())]);
    out.finish("deviate", &rc, workers, notes)
}

/// Run a sweep spec. Fails only when the spec is invalid or every cell failed.
pub fn cmd_sweep(opts: &CommonOpts, spec_path: &Path) -> Result<RunManifest> {
    let text = std::fs::read_to_string(spec_path).map_err(|e| Error::io(spec_path, e))?;
    let mut spec = SweepSpec::from_toml_str(&text)?;
    if let Some(s) = opts.seed {
        spec.base.seed = s;
    }
    let workers = opts.workers()?;
    let lib = opts.profiles(&spec.base)?;
    let mut out = Outputs::new(&opts.out, opts.force, &["sweep.csv", "sweep_long.csv"])?;
    let mut cell_error = None;
    let cells = with_pool(workers, || {
        run_sweep_with(&spec, &lib, |c| {
            let (config, solver) = spec.cell_setup(&c.values);
            let name = format!("cells/cell_{:03}.toml", c.index);
            let record = CellManifest {
                index: c.index,
                values: c.values.clone(),
                seed: config.seed,
                error: c.outcome.as_ref().err().cloned(),
                equilibrium: c.outcome.as_ref().ok().map(|o| o.equilibrium.clone()),
                solver,
                config,
            };
            let text = toml::to_string(&record).expect("cell manifest is representable as TOML");
            if let Err(e) = out.write(&name, &text) {
                cell_error.get_or_insert(e);
            }
        })
    })?;
    if let Some(e) = cell_error {
        return Err(e);
    }
    write_sweep_csv(out.create("sweep.csv")?, &spec, &cells)?;
    write_sweep_long_csv(out.create("sweep_long.csv")?, &spec, &cells)?;
    let failed: Vec<String> = cells
        .iter()
        .filter_map(|c| c.outcome.as_ref().err().map(|e| format!("cell {}: {e}", c.index)))
        .collect();
    if failed.len() == cells.len() {
        return Err(Error::Degenerate(format!("every sweep cell failed: {}", failed.join("; "))));
    }
    let rc = RunConfig {
        simulation: spec.base.clone(),
        solver: spec.solver,
        estimation: Estimation {
            n_rollouts: spec.rollouts,
            replications: spec.replications,
        },
    };
    let mut notes = BTreeMap::from([("cells".to_owned(), cells.len().to_string())]);
    if !failed.is_empty() {
        notes.insert("failed_cells".into(), failed.join("; "));
    }
    out.finish("sweep", &rc, workers, notes)
}

#[derive(Debug, Serialize)]
struct CellManifest {
    index: usize,
    values: Vec<f64>,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    solver: SolverParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    equilibrium: Option<EquilibriumResult>,
    config: SimulationConfig,
}

#[derive(Debug, Parser)]
#[command(name = "misinfo-game", version, about = "Opinion dynamics under competing news sources")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one rollout under two fixed profiles.
    Simulate {
        #[command(flatten)]
        common: CommonOpts,
        /// `P3` for both players or `P1,P3` for L and R.
        #[arg(long, conflicts_with = "curve_csv", required_unless_present = "curve_csv")]
        profiles: Option<String>,
        /// Credibility-versus-bias curve (`bias,credibility`) for both players.
        #[arg(long)]
        curve_csv: Option<PathBuf>,
    },
    /// Estimate the payoff matrix over the profile library.
    Payoff {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Solve the regularized game for a saved payoff matrix.
    Solve {
        #[command(flatten)]
        common: CommonOpts,
        /// Values CSV written by `payoff`.
        payoff: PathBuf,
        #[arg(long)]
        tau_l: Option<f64>,
        #[arg(long)]
        tau_r: Option<f64>,
    },
    /// Pin L to one profile and let R respond.
    Deviate {
        #[command(flatten)]
        common: CommonOpts,
        /// Forced L profile, or `equilibrium`.
        #[arg(long)]
        profiles: String,
        /// Reuse a saved payoff matrix instead of estimating one.
        payoff: Option<PathBuf>,
    },
    /// Run a parameter sweep described by a TOML spec.
    Sweep {
        #[command(flatten)]
        common: CommonOpts,
        spec: PathBuf,
    },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotConverged { .. } => 3,
        Error::Degenerate(_) => 1,
        _ => 2,
    }
}

pub fn dispatch(cli: &Cli) -> Result<RunManifest> {
    match &cli.command {
        Command::Simulate { common, profiles, curve_csv } => {
            let choice = match (profiles, curve_csv) {
                (_, Some(p)) => ProfileChoice::Curve(p.clone()),
                (Some(s), None) => ProfileChoice::parse_names(s),
                (None, None) => return Err(Error::invalid("profiles", "pass --profiles or --curve-csv")),
            };
            cmd_simulate(common, &choice)
        }
        Command::Payoff { common } => cmd_payoff(common),
        Command::Solve { common, payoff, tau_l, tau_r } => cmd_solve(common, payoff, *tau_l, *tau_r),
        Command::Deviate { common, profiles, payoff } => cmd_deviate(common, profiles, payoff.as_deref()),
        Command::Sweep { common, spec } => cmd_sweep(common, spec),
    }
}

/// Parse, run and report; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(&cli) {
        Ok(m) => {
            if let Some(f) = m.notes.get("failed_cells") {
                eprintln!("warning: some cells failed: {f}");
            }
            eprintln!("{}: wrote {} files to {}", m.command, m.artifacts.len() + 1, cli_out(&cli).display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn cli_out(cli: &Cli) -> &Path {
    match &cli.command {
        Command::Simulate { common, .. }
        | Command::Payoff { common }
        | Command::Solve { common, .. }
        | Command::Deviate { common, .. }
        | Command::Sweep { common, .. } => &common.out,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_config_tables() {
        let rc = RunConfig::from_toml_str(
            "n_individuals = 50\nn_sources = 10\nhorizon_T = 20\nbeta1 = 3.0\nbeta2 = 2.0\n\
             n_bins_l = 10\nseed = 4\n[params]\neta = 1.0\nxi = 2.0\nkappa = 20.0\nkappa_hat = 5.0\n\
             lambda = 0.95\nh = 0.1\nsigma = 0.03\nvarpi = 1.5707963267948966\nvartheta = 5\n\
             gamma = 0.99\nx_min = -1.0\nx_max = 1.0\n[solver]\ntau_L = 3.0\ntau_R = 4.0\n\
             max_iters = 100\ntolerance = 1e-8\n[estimation]\nn_rollouts = 7\n",
        )
        .unwrap();
        assert_eq!(rc.simulation.n_individuals, 50);
        assert_eq!(rc.solver.tau_r, 4.0);
        assert_eq!(rc.estimation.n_rollouts, 7);
        assert_eq!(rc.estimation.replications, 20);
        assert_eq!(RunConfig::from_toml_str(&rc.to_toml_string()).unwrap(), rc);
        assert_eq!(RunConfig::from_toml_str("").unwrap(), RunConfig::default());
        let partial = RunConfig::from_toml_str("[solver]\ntau_L = 1.0\n").unwrap();
        assert_eq!((partial.solver.tau_l, partial.solver.tau_r), (1.0, 10.0));
        assert!(RunConfig::from_toml_str("bogus = 1\n").is_err());
    }

    #[test]
    fn profile_choice() {
        assert_eq!(ProfileChoice::parse_names("P3"), ProfileChoice::Named("P3".into(), "P3".into()));
        assert_eq!(
            ProfileChoice::parse_names("P1, step"),
            ProfileChoice::Named("P1".into(), "step".into())
        );
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::NotConverged { iterations: 1, residual: 1.0 }), 3);
        assert_eq!(exit_code(&Error::invalid("x", "y")), 2);
        assert_eq!(
            exit_code(&Error::UnknownProfile { name: "Q".into(), valid: vec![] }),
            2
        );
    }
}
