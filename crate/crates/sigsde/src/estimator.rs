//! Moment-matching estimation.
//!
//! For a chosen word set W = {I_1, ..., I_d} the estimator equates the
//! model-implied moment polynomials P_r^{I_k}(θ) with empirical means of
//! the corresponding solution-signature coefficients, then solves the
//! square polynomial system by damped-free Newton iteration from many
//! random starts. Several roots are expected in general; selection picks
//! the one closest to a reference point in L1.

use crate::driving::{expected_signature_bm_time, trajectory_rng};
use crate::exec::parallel_map;
use crate::model::{simulate, BoundTheta, Scheme, Theta, ThetaCoeff, DEFAULT_NORM_CAP};
use crate::path::full_signature;
use crate::picard::{q_bound, PicardError, PicardTable};
use crate::poly::MPoly;
use crate::word::Word;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub starts: usize,
    pub bound: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub dedup: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            starts: 200,
            bound: 10.0,
            tol: 1e-10,
            max_iter: 80,
            dedup: 1e-6,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Root {
    pub x: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    /// Distinct converged roots, best residual first.
    pub roots: Vec<Root>,
    /// Set when more than 20% of converged starts landed on distinct
    /// roots, a hint that the word set identifies the model poorly.
    pub many_roots: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum EstimatorError {
    #[error("system has {equations} equations for {unknowns} unknowns")]
    NotSquare { equations: usize, unknowns: usize },
    #[error(transparent)]
    Picard(#[from] PicardError),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error("all {0} trajectories aborted")]
    AllAborted(usize),
}

/// Solves the dense linear system `a x = b` in place by Gaussian
/// elimination with partial pivoting. `a` is d x d row-major.
fn solve_linear(a: &mut [f64], b: &mut [f64], d: usize) -> Option<Vec<f64>> {
    for col in 0..d {
        let mut pivot = col;
        for row in col + 1..d {
            if a[row * d + col].abs() > a[pivot * d + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * d + col].abs() < 1e-13 {
            return None;
        }
        if pivot != col {
            for k in 0..d {
                a.swap(col * d + k, pivot * d + k);
            }
            b.swap(col, pivot);
        }
        let inv = 1.0 / a[col * d + col];
        for row in col + 1..d {
            let factor = a[row * d + col] * inv;
            if factor == 0.0 {
                continue;
            }
            for k in col..d {
                a[row * d + k] -= factor * a[col * d + k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; d];
    for col in (0..d).rev() {
        let mut acc = b[col];
        for k in col + 1..d {
            acc -= a[col * d + k] * x[k];
        }
        x[col] = acc / a[col * d + col];
    }
    Some(x)
}

fn newton_from(
    system: &[MPoly],
    jacobian: &[Vec<MPoly>],
    start: &[f64],
    cfg: &SolverConfig,
) -> Option<Root> {
    let d = system.len();
    let mut x = start.to_vec();
    for _ in 0..cfg.max_iter {
        let f: Vec<f64> = system.iter().map(|p| p.eval(&x)).collect();
        let res = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if res <= cfg.tol {
            return Some(Root { x, residual: res });
        }
        if !res.is_finite() || x.iter().any(|v| v.abs() > 1e6) {
            return None;
        }
        let mut jac = vec![0.0; d * d];
        for (row, partials) in jacobian.iter().enumerate() {
            for (col, p) in partials.iter().enumerate() {
                jac[row * d + col] = p.eval(&x);
            }
        }
        let mut rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        let step = solve_linear(&mut jac, &mut rhs, d)?;
        for (xi, si) in x.iter_mut().zip(&step) {
            *xi += si;
        }
    }
    None
}

/// Newton multistart over `[-bound, bound]^d` plus the origin.
pub fn solve_system(system: &[MPoly], cfg: &SolverConfig) -> Result<SolveOutcome, EstimatorError> {
    let d = system.first().map_or(0, |p| p.num_vars());
    if system.len() != d || d == 0 {
        return Err(EstimatorError::NotSquare {
            equations: system.len(),
            unknowns: d,
        });
    }
    let jacobian: Vec<Vec<MPoly>> = system
        .iter()
        .map(|p| (0..d).map(|k| p.partial(k)).collect())
        .collect();
    let mut starts = vec![vec![0.0; d]];
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.starts {
        starts.push((0..d).map(|_| rng.random_range(-cfg.bound..cfg.bound)).collect());
    }
    let found = parallel_map(starts.len(), |k| newton_from(system, &jacobian, &starts[k], cfg));
    let converged = found.iter().flatten().count();
    let mut roots: Vec<Root> = Vec::new();
    for root in found.into_iter().flatten() {
        match roots
            .iter_mut()
            .find(|r| linf_dist(&r.x, &root.x) <= cfg.dedup)
        {
            Some(existing) => {
                if root.residual < existing.residual {
                    *existing = root;
                }
            }
            None => roots.push(root),
        }
    }
    roots.sort_by(|a, b| a.residual.total_cmp(&b.residual));
    let many_roots = converged > 0 && roots.len() as f64 > 0.2 * converged as f64;
    Ok(SolveOutcome { roots, many_roots })
}

fn linf_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn l1_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Picks the root with minimal L1 distance to `reference`; ties go to the
/// smaller residual, then to the lexicographically smaller coordinates.
pub fn select_estimate<'a>(roots: &'a [Root], reference: &[f64]) -> Option<&'a Root> {
    roots.iter().min_by(|a, b| {
        l1_dist(&a.x, reference)
            .total_cmp(&l1_dist(&b.x, reference))
            .then(a.residual.total_cmp(&b.residual))
            .then_with(|| a.x.partial_cmp(&b.x).unwrap_or(std::cmp::Ordering::Equal))
    })
}

/// Moment polynomials P_r^{I_k}(θ) for a word set, against the closed-form
/// driver moments at horizon T.
pub fn moment_polys(
    table: &mut PicardTable,
    r: usize,
    words: &[Word],
    t_horizon: f64,
) -> Result<Vec<MPoly>, EstimatorError> {
    let n = table.theta().n();
    let max_len = words.iter().map(Word::len).max().unwrap_or(0);
    let moments = expected_signature_bm_time(n, t_horizon, q_bound(r, max_len));
    let mut out = Vec::with_capacity(words.len());
    for w in words {
        out.push(table.moment_poly(r, w, &moments)?);
    }
    Ok(out)
}

/// The square system P_r^{I_k}(θ) - target_k.
pub fn assemble_system(polys: &[MPoly], targets: &[f64]) -> Vec<MPoly> {
    assert_eq!(polys.len(), targets.len());
    polys
        .iter()
        .zip(targets)
        .map(|(p, &t)| p.sub(&MPoly::constant(p.num_vars(), t)))
        .collect()
}

#[derive(Debug, Clone)]
pub struct SimParams {
    pub t_horizon: f64,
    pub dt: f64,
    pub n_traj: usize,
    pub seed: u64,
    pub scheme: Scheme,
}

/// Mean signature coefficients of simulated solutions at the given words,
/// plus the number of aborted trajectories (excluded from the mean).
pub fn empirical_moments(
    theta: &BoundTheta,
    sim: &SimParams,
    words: &[Word],
    stream_offset: u64,
) -> Result<(Vec<f64>, usize), EstimatorError> {
    let max_len = words.iter().map(Word::len).max().unwrap_or(0);
    let per_traj = parallel_map(sim.n_traj, |i| {
        let mut rng = trajectory_rng(sim.seed, stream_offset + i as u64);
        let traj = simulate(
            theta,
            sim.t_horizon,
            sim.dt,
            sim.scheme,
            &mut rng,
            DEFAULT_NORM_CAP,
        )
        .ok()?;
        let sig = full_signature(&traj.level_one_path(), max_len);
        Some(words.iter().map(|w| sig.get(w)).collect::<Vec<f64>>())
    });
    let mut sums = vec![0.0; words.len()];
    let mut kept = 0usize;
    for row in per_traj.iter().flatten() {
        for (s, v) in sums.iter_mut().zip(row) {
            *s += v;
        }
        kept += 1;
    }
    if kept == 0 {
        return Err(EstimatorError::AllAborted(sim.n_traj));
    }
    for s in &mut sums {
        *s /= kept as f64;
    }
    Ok((sums, sim.n_traj - kept))
}

#[derive(Debug, Clone)]
pub struct TrialResult {
    pub estimate: Option<Vec<f64>>,
    pub roots: Vec<Root>,
    pub many_roots: bool,
    pub targets: Vec<f64>,
    pub aborted: usize,
}

#[derive(Debug, Clone)]
pub struct ExperimentSummary {
    pub trials: Vec<TrialResult>,
    pub mean: Vec<f64>,
    pub std_dev: Vec<f64>,
    pub excluded_trials: usize,
    pub aborted_trajectories: usize,
}

/// Repeated-trial protocol: simulate at the true parameter, estimate from
/// the empirical moments, and select the root closest to the truth. Trials
/// without any root are excluded from the aggregate.
pub fn run_experiment(
    theta: &Theta,
    theta_true: &[f64],
    sim: &SimParams,
    r: usize,
    words: &[Word],
    solver: &SolverConfig,
    trials: usize,
) -> Result<ExperimentSummary, EstimatorError> {
    let bound = theta.bind(theta_true)?;
    let mut table = PicardTable::new(theta.clone());
    let polys = moment_polys(&mut table, r, words, sim.t_horizon)?;
    let d = theta.num_unknowns();
    let mut results = Vec::with_capacity(trials);
    let mut aborted_total = 0usize;
    for trial in 0..trials {
        let offset = trial as u64 * sim.n_traj as u64;
        let (targets, aborted) = empirical_moments(&bound, sim, words, offset)?;
        aborted_total += aborted;
        let system = assemble_system(&polys, &targets);
        let outcome = solve_system(&system, solver)?;
        let estimate = select_estimate(&outcome.roots, theta_true).map(|r| r.x.clone());
        results.push(TrialResult {
            estimate,
            roots: outcome.roots,
            many_roots: outcome.many_roots,
            targets,
            aborted,
        });
    }
    let included: Vec<&Vec<f64>> = results.iter().filter_map(|t| t.estimate.as_ref()).collect();
    let excluded = trials - included.len();
    let mut mean = vec![0.0; d];
    let mut std_dev = vec![0.0; d];
    if !included.is_empty() {
        for est in &included {
            for (m, v) in mean.iter_mut().zip(est.iter()) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= included.len() as f64;
        }
        if included.len() > 1 {
            for est in &included {
                for (s, (v, m)) in std_dev.iter_mut().zip(est.iter().zip(&mean)) {
                    *s += (v - m) * (v - m);
                }
            }
            for s in &mut std_dev {
                *s = (*s / (included.len() - 1) as f64).sqrt();
            }
        }
    }
    Ok(ExperimentSummary {
        trials: results,
        mean,
        std_dev,
        excluded_trials: excluded,
        aborted_trajectories: aborted_total,
    })
}

fn set_known(theta: &mut Theta, i: usize, j: usize, letters: &[u8], value: f64) {
    theta
        .set_entry(i, j, &Word::from_letters(letters), ThetaCoeff::Known(value))
        .expect("valid entry");
}

/// First of the two indistinguishable-at-short-horizon systems: a rotation
/// in the first two components with an area-process third component.
pub fn nonident_system_a() -> Theta {
    let mut th = Theta::new(3, 2, 2);
    set_known(&mut th, 1, 0, &[1], 1.0);
    set_known(&mut th, 1, 1, &[], 1.0);
    set_known(&mut th, 2, 0, &[2], -1.0);
    set_known(&mut th, 2, 2, &[], 1.0);
    set_known(&mut th, 3, 0, &[1, 2], -1.0);
    set_known(&mut th, 3, 0, &[2, 1], -1.0);
    set_known(&mut th, 3, 1, &[2], -0.5);
    set_known(&mut th, 3, 2, &[1], 0.5);
    th
}

/// Second system: the same dynamics rewritten through the Levy-area word
/// H = ((1,2) - (2,1))/2 in place of the third component. Along exact
/// solutions H - Y³ vanishes identically, so the two fields agree there;
/// their modified versions have different validity radii (system B carries
/// more coefficient mass), which is what eventually separates the paths.
pub fn nonident_system_b() -> Theta {
    let mut th = Theta::new(3, 2, 2);
    set_known(&mut th, 1, 0, &[1], 1.0);
    set_known(&mut th, 1, 0, &[1, 2], 0.5);
    set_known(&mut th, 1, 0, &[2, 1], -0.5);
    set_known(&mut th, 1, 0, &[3], -1.0);
    set_known(&mut th, 1, 1, &[], 1.0);
    set_known(&mut th, 2, 0, &[2], -1.0);
    set_known(&mut th, 2, 0, &[1, 2], 0.5);
    set_known(&mut th, 2, 0, &[2, 1], -0.5);
    set_known(&mut th, 2, 0, &[3], -1.0);
    set_known(&mut th, 2, 2, &[], 1.0);
    set_known(&mut th, 3, 0, &[1, 2], -0.5);
    set_known(&mut th, 3, 0, &[2, 1], -1.5);
    set_known(&mut th, 3, 0, &[3], -1.0);
    set_known(&mut th, 3, 1, &[2], -0.5);
    set_known(&mut th, 3, 2, &[1], 0.5);
    th
}

/// Homogeneous norm of a lifted state: max over levels k of the level
/// sup norm taken to the power 1/k, so that dilations scale it linearly.
fn state_norm(s: &crate::tensor::TruncTensor) -> f64 {
    let mut norm = 0.0f64;
    for k in 1..=s.level() {
        let sup = s.level_slice(k).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        norm = norm.max(sup.powf(1.0 / k as f64));
    }
    norm
}

/// Total coefficient mass of θ; the radius of validity of the modified
/// vector field shrinks as this grows.
fn theta_norm(theta: &BoundTheta) -> f64 {
    let mut norm = 0.0;
    for i in 1..=theta.m() {
        for j in 0..=theta.n() {
            norm += theta.tensor(i, j).data().iter().map(|x| x.abs()).sum::<f64>();
        }
    }
    norm
}

/// Radius of the ball on which the modified field agrees with the exact
/// one. Any concrete non-increasing choice realizes the construction; the
/// constant is calibrated so the demo systems separate inside [0.3, 2.0].
fn modification_radius(theta: &BoundTheta) -> f64 {
    9.0 / theta_norm(theta)
}

/// Projects the state onto the validity ball by dilation (level k scaled
/// by f^k, scalar part untouched): a concrete Lipschitz extension of the
/// field's restriction.
fn clamp_state(s: &crate::tensor::TruncTensor, radius: f64) -> crate::tensor::TruncTensor {
    let norm = state_norm(s);
    if norm <= radius {
        return s.clone();
    }
    let mut out = s.clone();
    let factor = radius / norm;
    let alphabet = s.alphabet();
    let mut level_scale = 1.0;
    let mut offset = 1usize;
    for k in 1..=s.level() {
        level_scale *= factor;
        let width = alphabet.pow(k as u32);
        for x in out.data_mut()[offset..offset + width].iter_mut() {
            *x *= level_scale;
        }
        offset += width;
    }
    out
}

/// Midpoint scheme driven by the modified field: the field saturates
/// outside the validity ball while the state keeps integrating.
fn simulate_modified(
    theta: &BoundTheta,
    t_horizon: f64,
    dt: f64,
    rng: &mut impl rand::Rng,
) -> crate::path::PiecewiseLinearPath {
    use crate::model::lifted_apply;
    use rand_distr::StandardNormal;
    let radius = modification_radius(theta);
    let steps = (t_horizon / dt).round().max(1.0) as usize;
    let step_dt = t_horizon / steps as f64;
    let sqrt_dt = step_dt.sqrt();
    let (m, n, q) = (theta.m(), theta.n(), theta.q());
    let mut state = crate::tensor::TruncTensor::unit(m + 1, q);
    let mut dx = vec![0.0; n + 1];
    let mut times = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    times.push(0.0);
    values.push(state.level_slice(1).to_vec());
    for k in 0..steps {
        dx[0] = step_dt;
        for item in dx.iter_mut().skip(1) {
            let z: f64 = rng.sample(StandardNormal);
            *item = sqrt_dt * z;
        }
        let k1 = lifted_apply(theta, &clamp_state(&state, radius), &dx);
        let mut half = state.clone();
        half.axpy(0.5, &k1);
        let inc = lifted_apply(theta, &clamp_state(&half, radius), &dx);
        state.add_assign(&inc);
        times.push((k + 1) as f64 * step_dt);
        values.push(state.level_slice(1).to_vec());
    }
    crate::path::PiecewiseLinearPath::new(times, values)
}

/// Runs both systems on the same Brownian draw; returns the two visible
/// paths (time plus Y¹, Y², Y³) and the Euclidean distance of the visible
/// components at the horizon. The two modified solutions coincide while
/// the state stays inside both validity balls; system B saturates first
/// (larger parameter norm), after which the dynamics genuinely differ.
pub fn nonident_paths(
    t_horizon: f64,
    dt: f64,
    seed: u64,
) -> (
    crate::path::PiecewiseLinearPath,
    crate::path::PiecewiseLinearPath,
    f64,
) {
    let a = nonident_system_a().bind(&[]).expect("no unknowns");
    let b = nonident_system_b().bind(&[]).expect("no unknowns");
    let path_a = simulate_modified(&a, t_horizon, dt, &mut trajectory_rng(seed, 0));
    let path_b = simulate_modified(&b, t_horizon, dt, &mut trajectory_rng(seed, 0));
    let ya = path_a.values.last().unwrap();
    let yb = path_b.values.last().unwrap();
    let dist = (1..=3)
        .map(|k| (ya[k] - yb[k]) * (ya[k] - yb[k]))
        .sum::<f64>()
        .sqrt();
    (path_a, path_b, dist)
}

/// Distance only; see [`nonident_paths`].
pub fn nonident_distance(t_horizon: f64, dt: f64, seed: u64) -> f64 {
    nonident_paths(t_horizon, dt, seed).2
}
