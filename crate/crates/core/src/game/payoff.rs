//! Monte-Carlo payoff matrix over pairs of stationary profiles.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{run, Engine, StepObserver};
use crate::error::{Error, Result};
use crate::metrics::{discount_mass, running_reward};
use crate::model::{Action, SimulationConfig};
use crate::rng::SeedTree;
use crate::strategies::StrategyProfile;

use super::Matrix;

/// Estimated payoffs to `L` (rows) against `R` (columns).
///
/// Entries are discounted returns divided by `scale = N * sum_k gamma^k`,
/// i.e. the per-individual, per-unit-discount reward, which lies in
/// `[-1, 1]`. Multiply by `scale` to recover the raw return.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    pub values: Matrix,
    pub std_errors: Matrix,
    pub n_rollouts: usize,
    pub row_names: Vec<String>,
    pub col_names: Vec<String>,
    pub scale: f64,
}

impl PayoffMatrix {
    pub fn new(values: Matrix, std_errors: Matrix, n_rollouts: usize) -> Result<Self> {
        let p = values.len();
        let q = values.first().map_or(0, Vec::len);
        if p == 0 || q == 0 {
            return Err(Error::DimensionMismatch("empty payoff matrix".into()));
        }
        let shape_ok = |m: &Matrix| m.len() == p && m.iter().all(|r| r.len() == q);
        if !shape_ok(&values) || !shape_ok(&std_errors) {
            return Err(Error::DimensionMismatch(format!(
                "values and std errors must both be {p}x{q}"
            )));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("values", "payoffs must be finite"));
        }
        if std_errors.iter().flatten().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("std_errors", "must be finite and >= 0"));
        }
        Ok(PayoffMatrix {
            values,
            std_errors,
            n_rollouts,
            row_names: (1..=p).map(|i| format!("P{i}")).collect(),
            col_names: (1..=q).map(|j| format!("P{j}")).collect(),
            scale: 1.0,
        })
    }

    pub fn rows(&self) -> usize {
        self.values.len()
    }

    pub fn cols(&self) -> usize {
        self.values[0].len()
    }

    /// Compare `A[i][j]` with `-A[m(j)][m(i)]`, where `mirror` maps each
    /// profile to its mirror image.
    pub fn antisymmetry(&self, mirror: &[usize], z: f64) -> Result<AntisymmetryReport> {
        let p = self.rows();
        if self.cols() != p || mirror.len() != p || mirror.iter().any(|&m| m >= p) {
            return Err(Error::DimensionMismatch(
                "antisymmetry needs a square matrix and a full mirror map".into(),
            ));
        }
        let mut within = 0;
        let mut max_z: f64 = 0.0;
        for i in 0..p {
            for j in 0..p {
                let (mi, mj) = (mirror[j], mirror[i]);
                let gap = (self.values[i][j] + self.values[mi][mj]).abs();
                let se = self.std_errors[i][j].hypot(self.std_errors[mi][mj]);
                let zz = if se > 0.0 { gap / se } else if gap == 0.0 { 0.0 } else { f64::INFINITY };
                max_z = max_z.max(zz);
                if zz <= z {
                    within += 1;
                }
            }
        }
        Ok(AntisymmetryReport {
            z_threshold: z,
            fraction_within: within as f64 / (p * p) as f64,
            max_z,
        })
    }

    /// Values CSV: a `profile` column with row names, then one column per
    /// column profile. Floats are written in shortest round-trip form.
    pub fn write_values_csv<W: Write>(&self, w: W) -> Result<()> {
        write_table(w, &self.row_names, &self.col_names, &self.values)
    }

    pub fn write_std_errors_csv<W: Write>(&self, w: W) -> Result<()> {
        write_table(w, &self.row_names, &self.col_names, &self.std_errors)
    }

    /// Write `stem.csv`, `stem_std_errors.csv` and `stem_meta.toml` into `dir`.
    pub fn save(&self, dir: &Path, stem: &str, meta: &PayoffMetadata) -> Result<[std::path::PathBuf; 3]> {
        let paths = payoff_paths(dir, stem);
        let create = |p: &Path| std::fs::File::create(p).map_err(|e| Error::io(p, e));
        self.write_values_csv(create(&paths[0])?)?;
        self.write_std_errors_csv(create(&paths[1])?)?;
        std::fs::write(&paths[2], meta.to_toml_string()).map_err(|e| Error::io(&paths[2], e))?;
        Ok(paths)
    }

    /// Read back what [`PayoffMatrix::save`] wrote.
    pub fn load(dir: &Path, stem: &str) -> Result<(Self, PayoffMetadata)> {
        let paths = payoff_paths(dir, stem);
        let open = |p: &Path| std::fs::File::open(p).map_err(|e| Error::io(p, e));
        let (rows, cols, values) = read_table(open(&paths[0])?)?;
        let (rows2, cols2, errs) = read_table(open(&paths[1])?)?;
        if rows != rows2 || cols != cols2 {
            return Err(Error::DimensionMismatch(
                "values and std error files disagree on profile names".into(),
            ));
        }
        let text = std::fs::read_to_string(&paths[2]).map_err(|e| Error::io(&paths[2], e))?;
        let meta: PayoffMetadata = toml::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut m = PayoffMatrix::new(values, errs, meta.n_rollouts)?;
        m.row_names = rows;
        m.col_names = cols;
        m.scale = meta.scale;
        Ok((m, meta))
    }
}

pub fn payoff_paths(dir: &Path, stem: &str) -> [std::path::PathBuf; 3] {
    [
        dir.join(format!("{stem}.csv")),
        dir.join(format!("{stem}_std_errors.csv")),
        dir.join(format!("{stem}_meta.toml")),
    ]
}

fn write_table<W: Write>(w: W, rows: &[String], cols: &[String], m: &Matrix) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["profile".to_owned()];
    header.extend(cols.iter().cloned());
    out.write_record(&header)?;
    for (name, row) in rows.iter().zip(m) {
        let mut rec = vec![name.clone()];
        rec.extend(row.iter().map(|v| v.to_string()));
        out.write_record(&rec)?;
    }
    out.flush().map_err(|e| Error::io("<payoff csv>", e))?;
    Ok(())
}

fn read_table<R: Read>(r: R) -> Result<(Vec<String>, Vec<String>, Matrix)> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers()?.clone();
    if header.get(0) != Some("profile") || header.len() < 2 {
        return Err(Error::Parse("payoff CSV must start with a `profile` column".into()));
    }
    let cols: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    let mut rows = Vec::new();
    let mut m = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        rows.push(rec[0].to_owned());
        let row = rec
            .iter()
            .skip(1)
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("`{s}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        m.push(row);
    }
    Ok((rows, cols, m))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntisymmetryReport {
    pub z_threshold: f64,
    pub fraction_within: f64,
    pub max_z: f64,
}

/// Provenance stored next to a payoff matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffMetadata {
    pub n_rollouts: usize,
    pub seed: u64,
    pub scale: f64,
    /// FNV-1a hash of the config's TOML form, hex encoded.
    pub config_hash: String,
    pub profiles_l: Vec<StrategyProfile>,
    pub profiles_r: Vec<StrategyProfile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub antisymmetry: Option<AntisymmetryReport>,
    pub config: SimulationConfig,
}

impl PayoffMetadata {
    pub fn new(
        config: &SimulationConfig,
        profiles_l: &[StrategyProfile],
        profiles_r: &[StrategyProfile],
        matrix: &PayoffMatrix,
    ) -> Self {
        PayoffMetadata {
            n_rollouts: matrix.n_rollouts,
            seed: config.seed,
            scale: matrix.scale,
            config_hash: config_hash(config),
            profiles_l: profiles_l.to_vec(),
            profiles_r: profiles_r.to_vec(),
            antisymmetry: None,
            config: config.clone(),
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("payoff metadata is representable as TOML")
    }
}

pub fn config_hash(config: &SimulationConfig) -> String {
    let h = config
        .to_toml_string()
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
            (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
        });
    format!("{h:016x}")
}

/// Accumulates the discounted return without keeping the trajectory.
struct ReturnAccumulator {
    gamma: f64,
    disc: f64,
    total: f64,
}

impl StepObserver for ReturnAccumulator {
    fn start(&mut self, _engine: &Engine) {
        self.disc = 1.0;
        self.total = 0.0;
    }

    fn step(&mut self, _t: usize, _actions: &[Action], engine: &Engine) {
        self.disc *= self.gamma;
        let p = &engine.params;
        self.total += self.disc * running_reward(&engine.population.opinions, p.varpi, p.vartheta);
    }
}

/// Seeds for rollout `k` of entry `(i, j)`.
pub fn rollout_seeds(root: u64, i: usize, j: usize, k: usize) -> SeedTree {
    SeedTree::new(root).child("payoff", &[i as u64, j as u64, k as u64])
}

/// Raw discounted return of one rollout.
pub fn rollout_return(
    config: &SimulationConfig,
    profile_l: &StrategyProfile,
    profile_r: &StrategyProfile,
    seeds: &SeedTree,
) -> Result<f64> {
    let mut acc = ReturnAccumulator {
        gamma: config.params.gamma,
        disc: 1.0,
        total: 0.0,
    };
    run(config, profile_l, profile_r, seeds, &mut acc)?;
    Ok(acc.total)
}

/// Mean and standard error of the normalized return for every profile
/// pair. Rollouts run on the current rayon pool; each has its own seed
/// derived from `(config.seed, i, j, k)` and results are reduced in index
/// order, so the output does not depend on the number of workers.
pub fn estimate_payoff_matrix(
    profiles_l: &[StrategyProfile],
    profiles_r: &[StrategyProfile],
    config: &SimulationConfig,
    n_rollouts: usize,
) -> Result<PayoffMatrix> {
    config.validate()?;
    if n_rollouts < 2 {
        return Err(Error::invalid("n_rollouts", "need at least 2 rollouts per entry"));
    }
    if profiles_l.is_empty() || profiles_r.is_empty() {
        return Err(Error::invalid("profiles", "need at least one profile per player"));
    }
    let (p, q) = (profiles_l.len(), profiles_r.len());
    let scale = config.n_individuals as f64 * discount_mass(config.params.gamma, config.horizon_t);
    let returns: Vec<f64> = (0..p * q * n_rollouts)
        .into_par_iter()
        .map(|idx| {
            let k = idx % n_rollouts;
            let (i, j) = (idx / n_rollouts / q, idx / n_rollouts % q);
            let seeds = rollout_seeds(config.seed, i, j, k);
            rollout_return(config, &profiles_l[i], &profiles_r[j], &seeds).map(|r| r / scale)
        })
        .collect::<Result<_>>()?;

    let mut values = vec![vec![0.0; q]; p];
    let mut errs = vec![vec![0.0; q]; p];
    for (cell, samples) in returns.chunks(n_rollouts).enumerate() {
        let n = n_rollouts as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0);
        values[cell / q][cell % q] = mean;
        errs[cell / q][cell % q] = (var / n).sqrt();
    }
    let mut m = PayoffMatrix::new(values, errs, n_rollouts)?;
    m.row_names = profiles_l.iter().map(|p| p.name.clone()).collect();
    m.col_names = profiles_r.iter().map(|p| p.name.clone()).collect();
    m.scale = scale;
    Ok(m)
}
