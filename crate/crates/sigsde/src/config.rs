//! JSON run configuration.
//!
//! The raw layer is permissive (everything optional) so that validation can
//! report the dotted field path of whatever is missing or inconsistent;
//! the validated `RunConfig` carries fully-built domain objects.

use crate::estimator::SolverConfig;
use crate::model::{Scheme, Theta, ThetaCoeff};
use crate::word::Word;
use serde::Deserialize;
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error)]
#[error("config: {0}")]
pub struct ConfigError(pub String);

fn missing(path: &str) -> ConfigError {
    ConfigError(format!("missing field `{path}`"))
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum CoeffSpec {
    Known(f64),
    Unknown {
        /// 1-based unknown index, matching the θ¹..θ^d naming.
        var: usize,
        #[serde(default = "one")]
        coef: f64,
        #[serde(default)]
        offset: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    m: Option<usize>,
    n: Option<usize>,
    q: Option<usize>,
    /// keys "i,j" -> word string -> coefficient
    theta: Option<BTreeMap<String, BTreeMap<String, CoeffSpec>>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimulation {
    #[serde(rename = "T")]
    t_horizon: Option<f64>,
    dt: Option<f64>,
    #[serde(rename = "N")]
    n_traj: Option<usize>,
    seed: Option<u64>,
    scheme: Option<Scheme>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    starts: Option<usize>,
    bound: Option<f64>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    dedup: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEstimation {
    r: Option<usize>,
    word_sets: Option<Vec<Vec<String>>>,
    trials: Option<usize>,
    solver: Option<RawSolver>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: Option<RawModel>,
    theta_true: Option<Vec<f64>>,
    simulation: Option<RawSimulation>,
    estimation: Option<RawEstimation>,
    output: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SimSettings {
    pub t_horizon: f64,
    pub dt: f64,
    pub n_traj: usize,
    pub seed: u64,
    pub scheme: Scheme,
}

#[derive(Debug, Clone)]
pub struct EstimationSettings {
    pub r: usize,
    pub word_sets: Vec<Vec<Word>>,
    pub trials: usize,
    pub solver: SolverConfig,
}

#[derive(Debug)]
pub struct RunConfig {
    pub theta: Theta,
    pub theta_true: Option<Vec<f64>>,
    pub simulation: SimSettings,
    pub estimation: EstimationSettings,
    pub output: Option<String>,
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig =
        serde_json::from_str(text).map_err(|e| ConfigError(format!("invalid JSON: {e}")))?;
    let model = raw.model.ok_or_else(|| missing("model"))?;
    let m = model.m.ok_or_else(|| missing("model.m"))?;
    let n = model.n.ok_or_else(|| missing("model.n"))?;
    let q = model.q.unwrap_or(3);
    if m == 0 || n == 0 || q == 0 {
        return Err(ConfigError("model.m, model.n, model.q must be >= 1".into()));
    }
    let entries = model.theta.ok_or_else(|| missing("model.theta"))?;
    let mut theta = Theta::new(m, n, q);
    for (key, words) in &entries {
        let (i, j) = parse_entry_key(key)?;
        for (word_str, spec) in words {
            let word = Word::parse(word_str)
                .map_err(|e| ConfigError(format!("model.theta.\"{key}\".\"{word_str}\": {e}")))?;
            let coeff = match *spec {
                CoeffSpec::Known(c) => ThetaCoeff::Known(c),
                CoeffSpec::Unknown { var, coef, offset } => {
                    if var == 0 {
                        return Err(ConfigError(format!(
                            "model.theta.\"{key}\".\"{word_str}\": var is 1-based"
                        )));
                    }
                    ThetaCoeff::Unknown {
                        var: var - 1,
                        coef,
                        offset,
                    }
                }
            };
            theta
                .set_entry(i, j, &word, coeff)
                .map_err(|e| ConfigError(format!("model.theta.\"{key}\".\"{word_str}\": {e}")))?;
        }
    }
    theta
        .validate()
        .map_err(|e| ConfigError(format!("model.theta: {e}")))?;
    let d = theta.num_unknowns();

    if let Some(truth) = &raw.theta_true {
        if truth.len() != d {
            return Err(ConfigError(format!(
                "theta_true has {} entries, model has {d} unknowns",
                truth.len()
            )));
        }
    }

    let sim = raw.simulation.ok_or_else(|| missing("simulation"))?;
    let simulation = SimSettings {
        t_horizon: sim.t_horizon.ok_or_else(|| missing("simulation.T"))?,
        dt: sim.dt.unwrap_or(0.001),
        n_traj: sim.n_traj.unwrap_or(2000),
        seed: sim.seed.unwrap_or(7),
        scheme: sim.scheme.unwrap_or(Scheme::Heun),
    };
    if simulation.t_horizon <= 0.0 || simulation.dt <= 0.0 || simulation.n_traj == 0 {
        return Err(ConfigError(
            "simulation.T, simulation.dt, simulation.N must be positive".into(),
        ));
    }

    let est = raw.estimation.unwrap_or_default();
    let raw_sets = est.word_sets.ok_or_else(|| missing("estimation.word_sets"))?;
    if raw_sets.is_empty() {
        return Err(ConfigError("estimation.word_sets must be non-empty".into()));
    }
    let mut word_sets = Vec::with_capacity(raw_sets.len());
    for (si, set) in raw_sets.iter().enumerate() {
        let mut words = Vec::with_capacity(set.len());
        for ws in set {
            let w = Word::parse(ws).map_err(|e| {
                ConfigError(format!("estimation.word_sets[{si}].\"{ws}\": {e}"))
            })?;
            if w.max_letter().is_some_and(|l| l as usize > m) {
                return Err(ConfigError(format!(
                    "estimation.word_sets[{si}].\"{ws}\": letter outside [0,{m}]"
                )));
            }
            if words.contains(&w) {
                return Err(ConfigError(format!(
                    "estimation.word_sets[{si}]: duplicate word {ws}"
                )));
            }
            words.push(w);
        }
        if words.len() != d {
            return Err(ConfigError(format!(
                "estimation.word_sets[{si}] has {} words, model has {d} unknowns",
                words.len()
            )));
        }
        word_sets.push(words);
    }
    let rs = est.solver.unwrap_or_default();
    let defaults = SolverConfig::default();
    let estimation = EstimationSettings {
        r: est.r.unwrap_or(3),
        word_sets,
        trials: est.trials.unwrap_or(20),
        solver: SolverConfig {
            starts: rs.starts.unwrap_or(defaults.starts),
            bound: rs.bound.unwrap_or(defaults.bound),
            tol: rs.tol.unwrap_or(defaults.tol),
            max_iter: rs.max_iter.unwrap_or(defaults.max_iter),
            dedup: rs.dedup.unwrap_or(defaults.dedup),
            seed: rs.seed.unwrap_or(defaults.seed),
        },
    };

    Ok(RunConfig {
        theta,
        theta_true: raw.theta_true,
        simulation,
        estimation,
        output: raw.output,
    })
}

fn parse_entry_key(key: &str) -> Result<(usize, usize), ConfigError> {
    let bad = || ConfigError(format!("model.theta key {key:?}: expected \"i,j\""));
    let (i, j) = key.split_once(',').ok_or_else(bad)?;
    Ok((
        i.trim().parse().map_err(|_| bad())?,
        j.trim().parse().map_err(|_| bad())?,
    ))
}
