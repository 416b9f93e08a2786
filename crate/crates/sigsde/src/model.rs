//! Parametrized affine-in-signature vector fields and trajectory simulation.
//!
//! The model state is an element of T^(<=q)(R^{m+1}) driven by the lifted
//! vector field tens(s) ∘ F_θ(s), where F_θ has row 0 fixed to (1, 0, ..., 0)
//! for the time coordinate and rows 1..m given by coefficient-wise dot
//! products with the θ tensors.

use crate::path::PiecewiseLinearPath;
use crate::poly::MPoly;
use crate::tensor::{level_offset, tensor_dim, TruncTensor};
use crate::word::Word;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// One coefficient slot of a θ tensor: a known scalar or an affine function
/// of a single unknown (`coef * u_var + offset`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaCoeff {
    Known(f64),
    Unknown { var: usize, coef: f64, offset: f64 },
}

impl ThetaCoeff {
    pub fn eval(&self, unknowns: &[f64]) -> f64 {
        match *self {
            ThetaCoeff::Known(c) => c,
            ThetaCoeff::Unknown { var, coef, offset } => coef * unknowns[var] + offset,
        }
    }

    pub fn to_poly(&self, num_vars: usize) -> MPoly {
        match *self {
            ThetaCoeff::Known(c) => MPoly::constant(num_vars, c),
            ThetaCoeff::Unknown { var, coef, offset } => {
                let mut p = MPoly::linear(num_vars, var, coef);
                if offset != 0.0 {
                    p.add_assign(&MPoly::constant(num_vars, offset));
                }
                p
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ThetaCoeff::Known(c) if *c == 0.0)
    }
}

/// Parameter matrix θ: one tensor in T^(<=q)(R^{m+1}) per (i, j) with
/// i ∈ {1..m}, j ∈ {0..n}. Row 0 is implicit (drift 1, diffusion 0).
#[derive(Debug, Clone)]
pub struct Theta {
    m: usize,
    n: usize,
    q: usize,
    /// entries[i-1][j] is a flat coefficient table over the solution alphabet.
    entries: Vec<Vec<Vec<ThetaCoeff>>>,
    num_unknowns: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("unknown variable indices must cover 0..d without gaps (missing {0})")]
    MaskGap(usize),
    #[error("d = {d} exceeds dim T^(<=q)(R^(m+1)) = {dim}")]
    TooManyUnknowns { d: usize, dim: usize },
    #[error("word {word} outside alphabet {alphabet} or level {level}")]
    BadWord {
        word: String,
        alphabet: usize,
        level: usize,
    },
    #[error("entry index ({i},{j}) outside 1..={m} x 0..={n}")]
    BadEntry {
        i: usize,
        j: usize,
        m: usize,
        n: usize,
    },
    #[error("expected {expected} bound values, got {got}")]
    BindMismatch { expected: usize, got: usize },
}

impl Theta {
    pub fn new(m: usize, n: usize, q: usize) -> Self {
        let dim = tensor_dim(m + 1, q);
        Theta {
            m,
            n,
            q,
            entries: vec![vec![vec![ThetaCoeff::Known(0.0); dim]; n + 1]; m],
            num_unknowns: 0,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Number of scalar unknowns d.
    pub fn num_unknowns(&self) -> usize {
        self.num_unknowns
    }

    pub fn state_dim(&self) -> usize {
        tensor_dim(self.m + 1, self.q)
    }

    pub fn set_entry(
        &mut self,
        i: usize,
        j: usize,
        word: &Word,
        value: ThetaCoeff,
    ) -> Result<(), ModelError> {
        if i == 0 || i > self.m || j > self.n {
            return Err(ModelError::BadEntry {
                i,
                j,
                m: self.m,
                n: self.n,
            });
        }
        if word.len() > self.q || word.max_letter().is_some_and(|l| l as usize > self.m) {
            return Err(ModelError::BadWord {
                word: word.render(),
                alphabet: self.m + 1,
                level: self.q,
            });
        }
        let idx = crate::tensor::flat_index(self.m + 1, self.q, word);
        self.entries[i - 1][j][idx] = value;
        if let ThetaCoeff::Unknown { var, .. } = value {
            self.num_unknowns = self.num_unknowns.max(var + 1);
        }
        Ok(())
    }

    /// Checks the unknown mask: variables 0..d all referenced, d <= dim V~.
    pub fn validate(&self) -> Result<(), ModelError> {
        let d = self.num_unknowns;
        let dim = self.state_dim();
        if d > dim {
            return Err(ModelError::TooManyUnknowns { d, dim });
        }
        let mut seen = vec![false; d];
        for row in &self.entries {
            for col in row {
                for c in col {
                    if let ThetaCoeff::Unknown { var, .. } = c {
                        seen[*var] = true;
                    }
                }
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(ModelError::MaskGap(missing));
        }
        Ok(())
    }

    /// Coefficient θ_{i,j}^{word} as a polynomial in the unknowns. Row 0
    /// follows the convention: 1 iff (j, word) = (0, ∅), else 0.
    pub fn coeff_poly(&self, i: usize, j: usize, word: &Word) -> MPoly {
        let d = self.num_unknowns;
        if i == 0 {
            return if j == 0 && word.is_empty() {
                MPoly::constant(d, 1.0)
            } else {
                MPoly::zero(d)
            };
        }
        let idx = crate::tensor::flat_index(self.m + 1, self.q, word);
        self.entries[i - 1][j][idx].to_poly(d)
    }

    /// Same, by flat word index (hot path for the α recursion).
    pub fn coeff_at(&self, i: usize, j: usize, flat_idx: usize) -> &ThetaCoeff {
        &self.entries[i - 1][j][flat_idx]
    }

    /// Binds the unknowns to numeric values.
    pub fn bind(&self, unknowns: &[f64]) -> Result<BoundTheta, ModelError> {
        if unknowns.len() != self.num_unknowns {
            return Err(ModelError::BindMismatch {
                expected: self.num_unknowns,
                got: unknowns.len(),
            });
        }
        let alphabet = self.m + 1;
        let tensors = self
            .entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|col| {
                        let mut t = TruncTensor::zero(alphabet, self.q);
                        for (slot, c) in t.data_mut().iter_mut().zip(col) {
                            *slot = c.eval(unknowns);
                        }
                        t
                    })
                    .collect()
            })
            .collect();
        Ok(BoundTheta {
            m: self.m,
            n: self.n,
            q: self.q,
            tensors,
        })
    }
}

/// θ with all unknowns bound to numbers; what the simulator consumes.
#[derive(Debug, Clone)]
pub struct BoundTheta {
    m: usize,
    n: usize,
    q: usize,
    /// tensors[i-1][j]
    tensors: Vec<Vec<TruncTensor>>,
}

impl BoundTheta {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn tensor(&self, i: usize, j: usize) -> &TruncTensor {
        &self.tensors[i - 1][j]
    }
}

/// F_θ(s): an (m+1) x (n+1) matrix, row-major. Row 0 is (1, 0, ..., 0);
/// row i, column j is the dot product <θ_{i,j}, s>.
pub fn eval_f(theta: &BoundTheta, s: &TruncTensor) -> Vec<f64> {
    let (m, n) = (theta.m, theta.n);
    let mut f = vec![0.0; (m + 1) * (n + 1)];
    f[0] = 1.0;
    for i in 1..=m {
        for j in 0..=n {
            let t = theta.tensor(i, j);
            f[i * (n + 1) + j] = t
                .data()
                .iter()
                .zip(s.data())
                .map(|(a, b)| a * b)
                .sum::<f64>();
        }
    }
    f
}

/// The lifted increment tens(s)(F_θ(s)·dx): word (I⁻, i) receives
/// s^{I⁻} · v_i; level 0 receives nothing.
pub fn lifted_apply(theta: &BoundTheta, s: &TruncTensor, dx: &[f64]) -> TruncTensor {
    let (m, n, q) = (theta.m, theta.n, theta.q);
    assert_eq!(dx.len(), n + 1);
    let f = eval_f(theta, s);
    let mut v = vec![0.0; m + 1];
    for i in 0..=m {
        v[i] = (0..=n).map(|j| f[i * (n + 1) + j] * dx[j]).sum();
    }
    let alphabet = m + 1;
    let mut out = TruncTensor::zero(alphabet, q);
    for k in 1..=q {
        let prev_off = level_offset(alphabet, k - 1);
        let out_off = level_offset(alphabet, k);
        for p in 0..alphabet.pow((k - 1) as u32) {
            let sp = s.data()[prev_off + p];
            if sp == 0.0 {
                continue;
            }
            let base = out_off + p * alphabet;
            for (i, &vi) in v.iter().enumerate() {
                out.data_mut()[base + i] += sp * vi;
            }
        }
    }
    out
}

/// Heun predictor-corrector step for the Stratonovich lifted SDE.
pub fn heun_step(theta: &BoundTheta, s: &TruncTensor, dx: &[f64]) -> TruncTensor {
    let k1 = lifted_apply(theta, s, dx);
    let mut predictor = s.clone();
    predictor.add_assign(&k1);
    let k2 = lifted_apply(theta, &predictor, dx);
    let mut out = s.clone();
    out.axpy(0.5, &k1);
    out.axpy(0.5, &k2);
    out
}

/// Explicit Stratonovich midpoint step: evaluate the field at the
/// half-increment predictor.
pub fn midpoint_step(theta: &BoundTheta, s: &TruncTensor, dx: &[f64]) -> TruncTensor {
    let k1 = lifted_apply(theta, s, dx);
    let mut half = s.clone();
    half.axpy(0.5, &k1);
    let k = lifted_apply(theta, &half, dx);
    let mut out = s.clone();
    out.add_assign(&k);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Heun,
    Midpoint,
}

/// Default cap on the state sup-norm; beyond it a trajectory aborts.
pub const DEFAULT_NORM_CAP: f64 = 1e6;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("trajectory aborted at step {step}: state norm {norm:.3e} exceeds cap {cap:.3e}")]
    Aborted { step: usize, norm: f64, cap: f64 },
}

/// Simulated lifted trajectory: uniform grid, lifted states, and the
/// projected level-1 path (coordinate 0 is time).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<TruncTensor>,
    pub path: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn level_one_path(&self) -> PiecewiseLinearPath {
        PiecewiseLinearPath::new(self.times.clone(), self.path.clone())
    }
}

fn project_level_one(state: &TruncTensor, m: usize) -> Vec<f64> {
    state.level_slice(1)[..=m].to_vec()
}

/// Simulates one trajectory from Y_0 = 1 with increments
/// dx = (dt, ΔW_1, ..., ΔW_n), ΔW ~ N(0, dt) from the given stream.
pub fn simulate(
    theta: &BoundTheta,
    t_horizon: f64,
    dt: f64,
    scheme: Scheme,
    rng: &mut ChaCha8Rng,
    norm_cap: f64,
) -> Result<Trajectory, SimError> {
    assert!(dt > 0.0 && t_horizon > 0.0);
    let steps = (t_horizon / dt).round().max(1.0) as usize;
    let step_dt = t_horizon / steps as f64;
    let sqrt_dt = step_dt.sqrt();
    let (m, n, q) = (theta.m, theta.n, theta.q);
    let mut state = TruncTensor::unit(m + 1, q);
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut path = Vec::with_capacity(steps + 1);
    times.push(0.0);
    path.push(project_level_one(&state, m));
    states.push(state.clone());
    let mut dx = vec![0.0; n + 1];
    for step in 1..=steps {
        dx[0] = step_dt;
        for item in dx.iter_mut().skip(1) {
            let z: f64 = rng.sample(StandardNormal);
            *item = sqrt_dt * z;
        }
        state = match scheme {
            Scheme::Heun => heun_step(theta, &state, &dx),
            Scheme::Midpoint => midpoint_step(theta, &state, &dx),
        };
        let norm = state.sup_norm();
        if !norm.is_finite() || norm > norm_cap {
            return Err(SimError::Aborted {
                step,
                norm,
                cap: norm_cap,
            });
        }
        times.push(step as f64 * step_dt);
        path.push(project_level_one(&state, m));
        states.push(state.clone());
    }
    Ok(Trajectory {
        times,
        states,
        path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driving::trajectory_rng;
    use crate::word::Word;

    fn w(letters: &[u8]) -> Word {
        Word::from_letters(letters)
    }

    /// Experiment-style scalar model: drift tensor a·∅ + b·(1),
    /// diffusion tensor c·∅ + d·(1,1), all known.
    fn scalar_theta(a: f64, b: f64, c: f64, dd: f64, q: usize) -> BoundTheta {
        let mut th = Theta::new(1, 1, q);
        th.set_entry(1, 0, &Word::empty(), ThetaCoeff::Known(a)).unwrap();
        th.set_entry(1, 0, &w(&[1]), ThetaCoeff::Known(b)).unwrap();
        th.set_entry(1, 1, &Word::empty(), ThetaCoeff::Known(c)).unwrap();
        th.set_entry(1, 1, &w(&[1, 1]), ThetaCoeff::Known(dd)).unwrap();
        th.bind(&[]).unwrap()
    }

    #[test]
    fn eval_f_zero_field() {
        let theta = scalar_theta(0.0, 0.0, 0.0, 0.0, 2);
        let f = eval_f(&theta, &TruncTensor::unit(2, 2));
        assert_eq!(f, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn eval_f_sample_state() {
        // θ_{1,0} = -1·∅ + 1·(1), θ_{1,1} = 4·(1,1),
        // s = 1 + 0.3·(1) + 0.045·(1,1) -> F = [[1,0],[-0.7,0.18]]
        let theta = scalar_theta(-1.0, 1.0, 0.0, 4.0, 2);
        let mut s = TruncTensor::unit(2, 2);
        s.set(&w(&[1]), 0.3);
        s.set(&w(&[1, 1]), 0.045);
        let f = eval_f(&theta, &s);
        assert_eq!(f[0], 1.0);
        assert_eq!(f[1], 0.0);
        assert!((f[2] + 0.7).abs() < 1e-15);
        assert!((f[3] - 0.18).abs() < 1e-15);
    }

    #[test]
    fn eval_f_rows_linear_in_state() {
        let theta = scalar_theta(0.5, -2.0, 1.0, 3.0, 2);
        let mut s1 = TruncTensor::unit(2, 2);
        s1.set(&w(&[1]), 0.2);
        let mut s2 = TruncTensor::zero(2, 2);
        s2.set(&w(&[1, 1]), -0.4);
        let mut s12 = s1.clone();
        s12.add_assign(&s2);
        let f1 = eval_f(&theta, &s1);
        let f2 = eval_f(&theta, &s2);
        let f12 = eval_f(&theta, &s12);
        // rows 1..m are additive; row 0 is affine (constant).
        for j in 0..2 {
            assert!((f12[2 + j] - f1[2 + j] - f2[2 + j]).abs() < 1e-14);
        }
    }

    #[test]
    fn lifted_apply_unit_state() {
        let theta = scalar_theta(0.0, 0.0, 1.0, 0.0, 2);
        let inc = lifted_apply(&theta, &TruncTensor::unit(2, 2), &[0.0, 1.0]);
        // v = (0, 1): only word (1) receives mass 1.
        assert_eq!(inc.get(&Word::empty()), 0.0);
        assert_eq!(inc.get(&w(&[0])), 0.0);
        assert_eq!(inc.get(&w(&[1])), 1.0);
        assert!(inc.level_slice(2).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn lifted_apply_hand_table() {
        // q=2, m=1, s = 1 + a·(1), v = (dt, b):
        // level 1: (0)↦dt, (1)↦b; level 2: (1,0)↦a·dt, (1,1)↦a·b,
        // (0,·) rows get s^{(0)} = 0 prefixes.
        let (a, dt, b) = (0.7, 0.1, -0.3);
        let mut theta = Theta::new(1, 1, 2);
        theta
            .set_entry(1, 0, &Word::empty(), ThetaCoeff::Known(b / dt))
            .unwrap();
        let theta = theta.bind(&[]).unwrap();
        let mut s = TruncTensor::unit(2, 2);
        s.set(&w(&[1]), a);
        let inc = lifted_apply(&theta, &s, &[dt, 0.0]);
        assert!((inc.get(&w(&[0])) - dt).abs() < 1e-15);
        assert!((inc.get(&w(&[1])) - b).abs() < 1e-15);
        assert!((inc.get(&w(&[1, 0])) - a * dt).abs() < 1e-15);
        assert!((inc.get(&w(&[1, 1])) - a * b).abs() < 1e-15);
        assert_eq!(inc.get(&w(&[0, 0])), 0.0);
        assert_eq!(inc.get(&w(&[0, 1])), 0.0);
    }

    #[test]
    fn heun_hand_step() {
        // dY = Y dt at q=1: θ_{1,0} = (1), s^(1) = 1, dx = (0.1, 0)
        // -> 1 + ½(0.1 + 0.11) = 1.105.
        let mut th = Theta::new(1, 1, 1);
        th.set_entry(1, 0, &w(&[1]), ThetaCoeff::Known(1.0)).unwrap();
        let theta = th.bind(&[]).unwrap();
        let mut s = TruncTensor::unit(2, 1);
        s.set(&w(&[1]), 1.0);
        let out = heun_step(&theta, &s, &[0.1, 0.0]);
        assert!((out.get(&w(&[1])) - 1.105).abs() < 1e-15);
    }

    #[test]
    fn zero_increment_is_identity() {
        let theta = scalar_theta(1.0, -1.0, 2.0, 0.5, 3);
        let mut s = TruncTensor::unit(2, 3);
        s.set(&w(&[1]), 0.4);
        s.set(&w(&[1, 1]), 0.08);
        assert_eq!(heun_step(&theta, &s, &[0.0, 0.0]), s);
        assert_eq!(midpoint_step(&theta, &s, &[0.0, 0.0]), s);
    }

    #[test]
    fn heun_drift_consistency() {
        // (s' - s)/dt -> lifted_apply(θ, s, (1,0)) as dt -> 0.
        let theta = scalar_theta(0.3, 0.8, 0.0, 0.0, 3);
        let mut s = TruncTensor::unit(2, 3);
        s.set(&w(&[1]), 0.2);
        let rate = lifted_apply(&theta, &s, &[1.0, 0.0]);
        let mut errs = Vec::new();
        for dt in [1e-2, 1e-3] {
            let out = heun_step(&theta, &s, &[dt, 0.0]);
            let mut diff = out.clone();
            diff.axpy(-1.0, &s);
            diff.scale(1.0 / dt);
            errs.push(diff.sup_distance(&rate));
        }
        // The one-step rate deviates from the field at O(dt).
        assert!(errs[1] <= errs[0] / 8.0, "errs {errs:?}");
    }

    #[test]
    fn zero_field_gives_time_ray() {
        let theta = scalar_theta(0.0, 0.0, 0.0, 0.0, 3);
        let mut rng = trajectory_rng(1, 0);
        let traj = simulate(&theta, 1.0, 0.01, Scheme::Heun, &mut rng, 1e6).unwrap();
        let last = traj.path.last().unwrap();
        assert!((last[0] - 1.0).abs() < 1e-12);
        assert_eq!(last[1], 0.0);
    }

    #[test]
    fn deterministic_drift_matches_ode_oracle() {
        // dY = (1 + Y) dt: Y(T) = e^T - 1, compared against an RK4 run.
        let theta = scalar_theta(1.0, 1.0, 0.0, 0.0, 3);
        let mut rng = trajectory_rng(2, 0);
        let t_end = 0.5;
        let traj = simulate(&theta, t_end, 1e-3, Scheme::Heun, &mut rng, 1e6).unwrap();
        let y_sim = traj.path.last().unwrap()[1];

        // RK4 oracle for y' = 1 + y, y(0) = 0.
        let mut y = 0.0f64;
        let h = 1e-3;
        let steps = (t_end / h).round() as usize;
        for _ in 0..steps {
            let k1 = 1.0 + y;
            let k2 = 1.0 + (y + 0.5 * h * k1);
            let k3 = 1.0 + (y + 0.5 * h * k2);
            let k4 = 1.0 + (y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        assert!((y - (t_end.exp() - 1.0)).abs() < 1e-10);
        assert!((y_sim - y).abs() < 1e-4, "sim {y_sim} vs ode {y}");
    }

    #[test]
    fn simulate_is_seed_deterministic() {
        let theta = scalar_theta(-1.0, 1.0, 1.0, 0.5, 3);
        let mut r1 = trajectory_rng(9, 4);
        let mut r2 = trajectory_rng(9, 4);
        let a = simulate(&theta, 0.2, 0.001, Scheme::Heun, &mut r1, 1e6).unwrap();
        let b = simulate(&theta, 0.2, 0.001, Scheme::Heun, &mut r2, 1e6).unwrap();
        assert_eq!(a.path, b.path);
    }

    #[test]
    fn state_invariants_along_trajectory() {
        let theta = scalar_theta(-1.0, 1.0, 1.0, 0.2, 3);
        let mut rng = trajectory_rng(3, 1);
        let traj = simulate(&theta, 0.2, 0.001, Scheme::Heun, &mut rng, 1e6).unwrap();
        for (k, state) in traj.states.iter().enumerate() {
            assert_eq!(state.get(&Word::empty()), 1.0);
            assert!((state.get(&w(&[0])) - traj.times[k]).abs() <= 1e-12);
        }
    }

    #[test]
    fn blow_up_aborts_with_diagnostic() {
        // Strong positive feedback: dY = 100·Y² dt via the shuffle square
        // (1,1) with a large horizon blows past the cap.
        let theta = scalar_theta(1.0, 100.0, 0.0, 0.0, 2);
        let mut rng = trajectory_rng(5, 0);
        let res = simulate(&theta, 50.0, 0.01, Scheme::Heun, &mut rng, 1e3);
        assert!(matches!(res, Err(SimError::Aborted { .. })));
    }

    #[test]
    fn signature_consistency_deterministic_run() {
        // Zero diffusion: signature of the recorded level-1 path matches
        // the simulated lifted state at T.
        let theta = scalar_theta(0.5, 1.0, 0.0, 0.0, 3);
        let mut rng = trajectory_rng(6, 0);
        let traj = simulate(&theta, 0.5, 1e-3, Scheme::Heun, &mut rng, 1e6).unwrap();
        let sig = crate::path::full_signature(&traj.level_one_path(), 3);
        let final_state = traj.states.last().unwrap();
        let scale = final_state.sup_norm().max(1.0);
        assert!(
            sig.sup_distance(final_state) / scale <= 5e-3,
            "distance {}",
            sig.sup_distance(final_state) / scale
        );
    }

    #[test]
    fn shuffle_consistency_of_states() {
        let theta = scalar_theta(0.5, 1.0, 0.0, 0.0, 3);
        let mut rng = trajectory_rng(6, 0);
        let traj = simulate(&theta, 0.5, 1e-3, Scheme::Heun, &mut rng, 1e6).unwrap();
        for state in traj.states.iter().step_by(100) {
            let y1 = state.get(&w(&[1]));
            let y11 = state.get(&w(&[1, 1]));
            assert!((y1 * y1 - 2.0 * y11).abs() <= 5e-3 * (1.0 + y1 * y1));
        }
    }

    #[test]
    fn bind_and_mask_validation() {
        let mut th = Theta::new(1, 1, 2);
        th.set_entry(
            1,
            0,
            &Word::empty(),
            ThetaCoeff::Unknown {
                var: 1,
                coef: 1.0,
                offset: 0.0,
            },
        )
        .unwrap();
        // var 0 never referenced -> gap.
        assert!(matches!(th.validate(), Err(ModelError::MaskGap(0))));
        th.set_entry(
            1,
            1,
            &w(&[1]),
            ThetaCoeff::Unknown {
                var: 0,
                coef: -2.0,
                offset: 0.5,
            },
        )
        .unwrap();
        th.validate().unwrap();
        let bound = th.bind(&[2.0, 3.0]).unwrap();
        assert_eq!(bound.tensor(1, 0).get(&Word::empty()), 3.0);
        assert_eq!(bound.tensor(1, 1).get(&w(&[1])), -3.5);
        assert!(th.bind(&[1.0]).is_err());
    }
}
