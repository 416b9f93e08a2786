//! Command-line front end: simulation, signatures, moment polynomials,
//! estimation runs, and the bundled benchmark experiments.

use clap::{Parser, Subcommand};
use sigsde::config::{parse_config, RunConfig};
use sigsde::driving::{expected_signature_bm_time, mc_expected_signature, trajectory_rng};
use sigsde::estimator::{moment_polys, nonident_paths, run_experiment, ExperimentSummary, SimParams};
use sigsde::exec::limit_threads;
use sigsde::model::{simulate, DEFAULT_NORM_CAP};
use sigsde::path::{full_signature, read_path_csv, write_path_csv};
use sigsde::picard::PicardTable;
use sigsde::word::Word;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "sigsde", version, about = "Signature-SDE simulation and moment-matching estimation")]
struct Cli {
    /// Cap the worker thread count (env: SIGSDE_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate lifted trajectories from a config and write them as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Number of trajectories (default: simulation.N from the config).
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Signature of a sampled path read from CSV (t,y0,...,ym).
    Sig {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 3)]
        level: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expected signature of time-augmented Brownian motion; with --mc,
    /// a Monte Carlo column plus standard errors for comparison.
    ExpectedSig {
        #[arg(long)]
        n: usize,
        #[arg(long = "T")]
        t_horizon: f64,
        #[arg(long, default_value_t = 6)]
        level: usize,
        #[arg(long)]
        mc: Option<usize>,
        #[arg(long, default_value_t = 0.001)]
        dt: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the moment polynomials P_r^I for one word set of a config.
    BuildPoly {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        word_set: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full estimation run from a config; writes roots/summary/moments CSV.
    Estimate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        word_set: usize,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a bundled benchmark experiment (1, 2 or 3) at desk scale.
    Experiment {
        index: u8,
        #[arg(long, default_value_t = 0)]
        word_set: usize,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Use the full 100-trial protocol.
        #[arg(long)]
        full: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two systems, one Brownian draw: close at short horizons, apart later.
    NonidentDemo {
        #[arg(long = "T", default_value_t = 0.3)]
        t_horizon: f64,
        #[arg(long, default_value_t = 0.001)]
        dt: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum CliError {
    Config(String),
    Io(std::io::Error),
    NoRoots,
    Aborted(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::NoRoots => 3,
            CliError::Aborted(_) => 4,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Config(m) => m.clone(),
            CliError::Io(e) => format!("io: {e}"),
            CliError::NoRoots => "no real roots found in any trial".to_string(),
            CliError::Aborted(m) => format!("numeric abort: {m}"),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(|| {
        std::env::var("SIGSDE_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(t) = threads {
        limit_threads(t);
    }
    if let Err(e) = run(cli.cmd) {
        eprintln!("error: {}", e.message());
        std::process::exit(e.exit_code());
    }
}

fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| CliError::Config(e.to_string()))
}

/// SIGSDE_OUT_DIR wins over the flag, which wins over the config default.
fn resolve_out(flag: Option<PathBuf>, config_default: Option<&str>) -> PathBuf {
    if let Ok(dir) = std::env::var("SIGSDE_OUT_DIR") {
        return PathBuf::from(dir);
    }
    flag.unwrap_or_else(|| PathBuf::from(config_default.unwrap_or("out")))
}

fn writer(out: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            Box::new(fs::File::create(p)?)
        }
        None => Box::new(std::io::stdout().lock()),
    })
}

fn bind_truth(cfg: &RunConfig) -> Result<sigsde::model::BoundTheta, CliError> {
    let truth = cfg.theta_true.clone().unwrap_or_default();
    cfg.theta
        .bind(&truth)
        .map_err(|e| CliError::Config(format!("theta_true: {e}")))
}

fn run(cmd: Cmd) -> Result<(), CliError> {
    match cmd {
        Cmd::Simulate {
            config,
            samples,
            out,
        } => {
            let cfg = load_config(&config)?;
            let bound = bind_truth(&cfg)?;
            let n_traj = samples.unwrap_or(cfg.simulation.n_traj);
            let mut w = writer(&out)?;
            for i in 0..n_traj {
                let mut rng = trajectory_rng(cfg.simulation.seed, i as u64);
                let traj = simulate(
                    &bound,
                    cfg.simulation.t_horizon,
                    cfg.simulation.dt,
                    cfg.simulation.scheme,
                    &mut rng,
                    DEFAULT_NORM_CAP,
                )
                .map_err(|e| CliError::Aborted(format!("sample {i}: {e}")))?;
                let sample = (n_traj > 1).then_some(i);
                write_path_csv(&traj.level_one_path(), sample, i == 0, &mut w)?;
            }
            Ok(())
        }
        Cmd::Sig { input, level, out } => {
            let file = fs::File::open(&input)
                .map_err(|e| CliError::Config(format!("{}: {e}", input.display())))?;
            let path = read_path_csv(BufReader::new(file))
                .map_err(|e| CliError::Config(format!("{}: {e}", input.display())))?;
            let sig = full_signature(&path, level);
            let mut w = writer(&out)?;
            sig.write_csv(&mut w)?;
            Ok(())
        }
        Cmd::ExpectedSig {
            n,
            t_horizon,
            level,
            mc,
            dt,
            seed,
            out,
        } => {
            if n == 0 || t_horizon <= 0.0 {
                return Err(CliError::Config("--n and --T must be positive".into()));
            }
            let closed = expected_signature_bm_time(n, t_horizon, level);
            let mut w = writer(&out)?;
            match mc {
                None => closed.write_csv(&mut w)?,
                Some(samples) => {
                    let (mean, se) = mc_expected_signature(n, t_horizon, level, samples, dt, seed);
                    writeln!(w, "word;closed;mc;se")?;
                    for ((word, &c), (&m, &e)) in closed
                        .words()
                        .iter()
                        .zip(closed.data())
                        .zip(mean.data().iter().zip(se.data()))
                    {
                        writeln!(w, "{};{c};{m};{e}", word.render())?;
                    }
                }
            }
            Ok(())
        }
        Cmd::BuildPoly {
            config,
            word_set,
            out,
        } => {
            let cfg = load_config(&config)?;
            let words = pick_word_set(&cfg, word_set)?;
            let mut table = PicardTable::new(cfg.theta.clone());
            let polys = moment_polys(&mut table, cfg.estimation.r, &words, cfg.simulation.t_horizon)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let mut w = writer(&out)?;
            writeln!(w, "word;polynomial")?;
            for (word, p) in words.iter().zip(&polys) {
                writeln!(w, "{};{p}", word.render())?;
            }
            Ok(())
        }
        Cmd::Estimate {
            config,
            out,
            word_set,
            trials,
            seed,
        } => {
            let cfg = load_config(&config)?;
            run_estimation(&cfg, word_set, trials, seed, out)
        }
        Cmd::Experiment {
            index,
            word_set,
            trials,
            seed,
            full,
            out,
        } => {
            let text = match index {
                1 => include_str!("../configs/experiment1.json"),
                2 => include_str!("../configs/experiment2.json"),
                3 => include_str!("../configs/experiment3.json"),
                other => {
                    return Err(CliError::Config(format!(
                        "no bundled experiment {other}; choose 1, 2 or 3"
                    )))
                }
            };
            let cfg = parse_config(text).expect("bundled config is valid");
            let trials = trials.or(full.then_some(100));
            run_estimation(&cfg, word_set, trials, seed, out)
        }
        Cmd::NonidentDemo {
            t_horizon,
            dt,
            seed,
            out,
        } => {
            let (path_a, path_b, dist) = nonident_paths(t_horizon, dt, seed);
            println!("L2 distance at T={t_horizon}: {dist}");
            if let Some(dir) = out {
                fs::create_dir_all(&dir)?;
                for (path, name) in [(&path_a, "path_a.csv"), (&path_b, "path_b.csv")] {
                    let file = fs::File::create(dir.join(name))?;
                    write_path_csv(path, None, true, file)?;
                }
            }
            Ok(())
        }
    }
}

fn pick_word_set(cfg: &RunConfig, index: usize) -> Result<Vec<Word>, CliError> {
    cfg.estimation
        .word_sets
        .get(index)
        .cloned()
        .ok_or_else(|| {
            CliError::Config(format!(
                "word set {index} out of range (config has {})",
                cfg.estimation.word_sets.len()
            ))
        })
}

fn run_estimation(
    cfg: &RunConfig,
    word_set: usize,
    trials: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let words = pick_word_set(cfg, word_set)?;
    let truth = cfg
        .theta_true
        .clone()
        .ok_or_else(|| CliError::Config("theta_true required for estimation".into()))?;
    let sim = SimParams {
        t_horizon: cfg.simulation.t_horizon,
        dt: cfg.simulation.dt,
        n_traj: cfg.simulation.n_traj,
        seed: seed.unwrap_or(cfg.simulation.seed),
        scheme: cfg.simulation.scheme,
    };
    let trials = trials.unwrap_or(cfg.estimation.trials);
    let summary = run_experiment(
        &cfg.theta,
        &truth,
        &sim,
        cfg.estimation.r,
        &words,
        &cfg.estimation.solver,
        trials,
    )
    .map_err(|e| match e {
        sigsde::estimator::EstimatorError::AllAborted(n) => {
            CliError::Aborted(format!("all {n} trajectories exceeded the norm cap"))
        }
        other => CliError::Config(other.to_string()),
    })?;
    if summary.trials.iter().all(|t| t.roots.is_empty()) {
        return Err(CliError::NoRoots);
    }
    let dir = resolve_out(out, cfg.output.as_deref());
    fs::create_dir_all(&dir)?;
    write_report(&dir, &words, &summary)?;
    let d = truth.len();
    for k in 0..d {
        println!(
            "theta{}: mean {} std {}",
            k + 1,
            summary.mean[k],
            summary.std_dev[k]
        );
    }
    println!(
        "trials {} excluded {} aborted-trajectories {} (report in {})",
        summary.trials.len(),
        summary.excluded_trials,
        summary.aborted_trajectories,
        dir.display()
    );
    Ok(())
}

fn write_report(
    dir: &Path,
    words: &[Word],
    summary: &ExperimentSummary,
) -> Result<(), CliError> {
    let d = summary.mean.len();
    let mut roots = fs::File::create(dir.join("roots.csv"))?;
    let comps: Vec<String> = (1..=d).map(|k| format!("theta{k}")).collect();
    writeln!(roots, "trial,root,residual,selected,{}", comps.join(","))?;
    for (ti, trial) in summary.trials.iter().enumerate() {
        for (ri, root) in trial.roots.iter().enumerate() {
            let selected = trial.estimate.as_deref() == Some(root.x.as_slice());
            let vals: Vec<String> = root.x.iter().map(f64::to_string).collect();
            writeln!(
                roots,
                "{ti},{ri},{},{},{}",
                root.residual,
                selected as u8,
                vals.join(",")
            )?;
        }
    }

    let mut moments = fs::File::create(dir.join("moments.csv"))?;
    writeln!(moments, "trial,word,value")?;
    for (ti, trial) in summary.trials.iter().enumerate() {
        for (word, v) in words.iter().zip(&trial.targets) {
            writeln!(moments, "{ti},{},{v}", word.render())?;
        }
    }

    let mut sfile = fs::File::create(dir.join("summary.csv"))?;
    writeln!(sfile, "component,mean,std_dev")?;
    for k in 0..d {
        writeln!(
            sfile,
            "theta{},{},{}",
            k + 1,
            summary.mean[k],
            summary.std_dev[k]
        )?;
    }
    Ok(())
}
