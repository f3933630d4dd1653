//! Stationary action profiles.
//!
//! A profile lists, for each source a player owns, the probability of
//! publishing factual news at any step. Owned sources are ordered from the
//! centre outwards, so the same profile describes mirrored behaviour for `L`
//! and `R`. Under a fixed profile the long-run credibility of a source equals
//! its factual probability.

use std::io::Read;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Action, Player};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    pub name: String,
    /// Factual probability per owned source, centrist first.
    pub factual_prob: Vec<f64>,
}

impl StrategyProfile {
    pub fn new(name: impl Into<String>, factual_prob: Vec<f64>) -> Result<Self> {
        if factual_prob.is_empty() {
            return Err(Error::invalid("factual_prob", "profile must be nonempty"));
        }
        if let Some(p) = factual_prob
            .iter()
            .find(|p| !(p.is_finite() && (0.0..=1.0).contains(*p)))
        {
            return Err(Error::invalid(
                "factual_prob",
                format!("probability {p} outside [0, 1]"),
            ));
        }
        Ok(StrategyProfile {
            name: name.into(),
            factual_prob,
        })
    }

    pub fn len(&self) -> usize {
        self.factual_prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factual_prob.is_empty()
    }

    pub fn mean_factual_prob(&self) -> f64 {
        self.factual_prob.iter().sum::<f64>() / self.len() as f64
    }

    /// Same shape over `half` sources, by linear interpolation along the
    /// centre-to-edge axis.
    pub fn resample(&self, half: usize) -> Result<Self> {
        if half == 0 {
            return Err(Error::invalid("half", "must be >= 1"));
        }
        if half == self.len() {
            return Ok(self.clone());
        }
        let src = &self.factual_prob;
        let last = (src.len() - 1) as f64;
        let probs = (0..half)
            .map(|k| {
                let u = if half == 1 {
                    0.5
                } else {
                    k as f64 / (half - 1) as f64
                };
                let pos = u * last;
                let lo = pos.floor() as usize;
                let hi = (lo + 1).min(src.len() - 1);
                let w = pos - lo as f64;
                src[lo] * (1.0 - w) + src[hi] * w
            })
            .collect();
        StrategyProfile::new(self.name.clone(), probs)
    }
}

const LIBRARY: [(&str, [f64; 5]); 9] = [
    ("all-factual", [1.0, 1.0, 1.0, 1.0, 1.0]),
    ("mild-radical-misinform", [1.0, 1.0, 1.0, 0.8, 0.6]),
    ("real-world", [1.0, 0.95, 0.85, 0.6, 0.3]),
    ("strong-radical-misinform", [1.0, 0.9, 0.6, 0.3, 0.1]),
    ("all-misinform", [0.0, 0.0, 0.0, 0.0, 0.0]),
    ("uniform-half", [0.5, 0.5, 0.5, 0.5, 0.5]),
    ("inverted", [0.3, 0.6, 0.85, 0.95, 1.0]),
    ("strong-inverted", [0.1, 0.3, 0.6, 0.9, 1.0]),
    ("step", [1.0, 1.0, 0.0, 0.0, 0.0]),
];

/// Index of the all-factual profile in [`profile_library`].
pub const ALL_FACTUAL: usize = 0;
/// Index of the real-world-like profile in [`profile_library`].
pub const REAL_WORLD: usize = 2;
/// Index of the all-misinform profile in [`profile_library`].
pub const ALL_MISINFORM: usize = 4;

/// The nine default profiles for five sources per player. The shapes are a
/// reconstruction of the usual families: all factual, radical sources
/// misinforming (three strengths), all misinforming, a uniform coin flip,
/// centrist sources misinforming (two strengths) and a hard step.
pub fn profile_library() -> Vec<StrategyProfile> {
    LIBRARY
        .iter()
        .map(|(name, p)| StrategyProfile {
            name: (*name).to_owned(),
            factual_prob: p.to_vec(),
        })
        .collect()
}

/// The default library resampled to `half` sources per player.
pub fn profile_library_for(half: usize) -> Result<Vec<StrategyProfile>> {
    profile_library().iter().map(|p| p.resample(half)).collect()
}

/// Look a profile up by name or by its 1-based tag (`P1`..`P9`).
pub fn find_profile<'a>(library: &'a [StrategyProfile], key: &str) -> Result<&'a StrategyProfile> {
    find_profile_index(library, key).map(|i| &library[i])
}

pub fn find_profile_index(library: &[StrategyProfile], key: &str) -> Result<usize> {
    if let Some(i) = library.iter().position(|p| p.name == key) {
        return Ok(i);
    }
    if let Some(n) = key
        .strip_prefix(['P', 'p'])
        .and_then(|d| d.parse::<usize>().ok())
    {
        if (1..=library.len()).contains(&n) {
            return Ok(n - 1);
        }
    }
    Err(Error::UnknownProfile {
        name: key.to_owned(),
        valid: library.iter().map(|p| p.name.clone()).collect(),
    })
}

/// Independent Bernoulli actions for all `M` sources, in global source order.
pub fn sample_actions<R: Rng + ?Sized>(
    profile_l: &StrategyProfile,
    profile_r: &StrategyProfile,
    rng: &mut R,
) -> Vec<Action> {
    let mut out = Vec::with_capacity(profile_l.len() + profile_r.len());
    sample_actions_into(profile_l, profile_r, rng, &mut out);
    out
}

pub(crate) fn sample_actions_into<R: Rng + ?Sized>(
    profile_l: &StrategyProfile,
    profile_r: &StrategyProfile,
    rng: &mut R,
    out: &mut Vec<Action>,
) {
    debug_assert_eq!(profile_l.len(), profile_r.len());
    let half = profile_l.len();
    out.clear();
    for m in 0..2 * half {
        let p = if m < half {
            profile_l.factual_prob[half - 1 - m]
        } else {
            profile_r.factual_prob[m - half]
        };
        out.push(if rng.random::<f64>() < p {
            Action::Factual
        } else {
            Action::Misinformation
        });
    }
}

/// Factual probability of every source in global order.
pub fn global_factual_probs(profile_l: &StrategyProfile, profile_r: &StrategyProfile) -> Vec<f64> {
    let half = profile_l.len();
    (0..2 * half)
        .map(|m| {
            if m < half {
                profile_l.factual_prob[half - 1 - m]
            } else {
                profile_r.factual_prob[m - half]
            }
        })
        .collect()
}

/// Map the profile entries of `player` onto global source indices.
pub fn owned_indices(player: Player, half: usize) -> Vec<usize> {
    (0..half)
        .map(|k| player.source_index(k, 2 * half))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CredibilityCurveRecord {
    pub bias: f64,
    pub credibility: f64,
}

/// Build one profile per player from credibility-versus-bias observations.
///
/// The curve is interpolated piecewise linearly through the records sorted
/// by bias and held constant beyond the outermost records. Records at bias
/// exactly 0 count for both sides.
pub fn load_credibility_curve(
    rows: &[CredibilityCurveRecord],
    source_opinions: &[f64],
) -> Result<(StrategyProfile, StrategyProfile)> {
    if rows.len() < 2 {
        return Err(Error::invalid("credibility curve", "need at least two records"));
    }
    for r in rows {
        if !r.bias.is_finite() || !r.credibility.is_finite() {
            return Err(Error::invalid(
                "credibility curve",
                format!("non-finite record ({}, {})", r.bias, r.credibility),
            ));
        }
        if !(0.0..=1.0).contains(&r.credibility) {
            return Err(Error::invalid(
                "credibility curve",
                format!("credibility {} outside [0, 1]", r.credibility),
            ));
        }
    }
    if !rows.iter().any(|r| r.bias <= 0.0) {
        return Err(Error::invalid("credibility curve", "no records with bias <= 0"));
    }
    if !rows.iter().any(|r| r.bias >= 0.0) {
        return Err(Error::invalid("credibility curve", "no records with bias >= 0"));
    }
    let m = source_opinions.len();
    if m < 2 || m % 2 != 0 {
        return Err(Error::invalid("n_sources", "must be even and >= 2"));
    }
    let mut sorted = rows.to_vec();
    sorted.sort_by(|a, b| a.bias.total_cmp(&b.bias));
    let interp = |y: f64| -> f64 {
        let first = sorted[0];
        let last = sorted[sorted.len() - 1];
        if y <= first.bias {
            return first.credibility;
        }
        if y >= last.bias {
            return last.credibility;
        }
        let k = sorted.partition_point(|r| r.bias <= y);
        let (a, b) = (sorted[k - 1], sorted[k]);
        if b.bias == a.bias {
            return b.credibility;
        }
        let w = (y - a.bias) / (b.bias - a.bias);
        (a.credibility * (1.0 - w) + b.credibility * w).clamp(0.0, 1.0)
    };
    let half = m / 2;
    let side = |player: Player, name: &str| {
        let probs = (0..half)
            .map(|k| interp(source_opinions[player.source_index(k, m)]))
            .collect();
        StrategyProfile::new(name, probs)
    };
    Ok((side(Player::L, "curve-L")?, side(Player::R, "curve-R")?))
}

/// Read a `bias,credibility` CSV with a mandatory header.
pub fn read_credibility_csv<R: Read>(reader: R) -> Result<Vec<CredibilityCurveRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().map(str::trim).collect::<Vec<_>>() != ["bias", "credibility"] {
        return Err(Error::Parse(format!(
            "credibility curve header must be `bias,credibility`, got `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    rdr.deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

pub fn read_credibility_csv_file(path: &Path) -> Result<Vec<CredibilityCurveRecord>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_credibility_csv(f)
}

#[derive(Debug, Serialize, Deserialize)]
struct ProfileFile {
    profile: Vec<StrategyProfile>,
}

/// Profile files are TOML with one `[[profile]]` table per entry, each
/// carrying `name` and `factual_prob`.
pub fn profiles_from_toml(text: &str) -> Result<Vec<StrategyProfile>> {
    let file: ProfileFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if file.profile.is_empty() {
        return Err(Error::invalid("profile", "profile file lists no profiles"));
    }
    let half = file.profile[0].len();
    file.profile
        .into_iter()
        .map(|p| {
            if p.len() != half {
                return Err(Error::DimensionMismatch(format!(
                    "profile `{}` has {} entries, expected {half}",
                    p.name,
                    p.len()
                )));
            }
            StrategyProfile::new(p.name, p.factual_prob)
        })
        .collect()
}

pub fn profiles_to_toml(profiles: &[StrategyProfile]) -> String {
    toml::to_string(&ProfileFile {
        profile: profiles.to_vec(),
    })
    .expect("profiles are representable as TOML")
}
