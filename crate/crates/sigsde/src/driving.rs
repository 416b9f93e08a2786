//! Expected signature of the time-augmented driving noise X = (t, W),
//! where W is an n-dimensional Brownian motion, plus a Monte Carlo oracle.
//!
//! The closed form is the tensor exponential of the generator
//! T·e_(0) + (T/2)·Σ_i e_(i,i), the standard expression for Stratonovich
//! Brownian motion with time. The Monte Carlo estimate is independent of it
//! and acts as the arbiter for normalization conventions.

use crate::exec::parallel_map;
use crate::tensor::TruncTensor;
use crate::word::Word;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// E[S(t, W)_{0,T}] over the alphabet [n]_0, truncated at `q_max`.
pub fn expected_signature_bm_time(n: usize, t_horizon: f64, q_max: usize) -> TruncTensor {
    assert!(t_horizon > 0.0);
    let alphabet = n + 1;
    let mut gen = TruncTensor::zero(alphabet, q_max);
    if q_max >= 1 {
        gen.set(&Word::from_letters(&[0]), t_horizon);
    }
    if q_max >= 2 {
        for i in 1..=n {
            gen.set(&Word::from_letters(&[i as u8, i as u8]), 0.5 * t_horizon);
        }
    }
    gen.trunc_exp().expect("generator has zero scalar part")
}

/// A deterministic RNG stream for trajectory `index` under `seed`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Samples one Brownian trajectory on a uniform grid; returns (times, values).
pub fn sample_brownian(
    n: usize,
    t_horizon: f64,
    steps: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let dt = t_horizon / steps as f64;
    let sqrt_dt = dt.sqrt();
    let mut times = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    times.push(0.0);
    values.push(vec![0.0; n]);
    for k in 1..=steps {
        times.push(k as f64 * dt);
        let prev = values[k - 1].clone();
        values.push(
            prev.iter()
                .map(|&x| {
                    let z: f64 = rng.sample(StandardNormal);
                    x + sqrt_dt * z
                })
                .collect(),
        );
    }
    (times, values)
}

/// Monte Carlo estimate of the expected signature with per-coefficient
/// standard errors of the mean.
pub fn mc_expected_signature(
    n: usize,
    t_horizon: f64,
    q_max: usize,
    samples: usize,
    dt: f64,
    seed: u64,
) -> (TruncTensor, TruncTensor) {
    assert!(samples >= 1);
    let steps = (t_horizon / dt).round().max(1.0) as usize;
    let alphabet = n + 1;

    // Fixed-size chunks keep the reduction order (and hence the result)
    // independent of the worker count.
    const CHUNK: usize = 512;
    let chunks = samples.div_ceil(CHUNK);
    let partials = parallel_map(chunks, |c| {
        let lo = c * CHUNK;
        let hi = ((c + 1) * CHUNK).min(samples);
        let mut sum = TruncTensor::zero(alphabet, q_max);
        let mut sumsq = TruncTensor::zero(alphabet, q_max);
        let step_dt = t_horizon / steps as f64;
        let sqrt_dt = step_dt.sqrt();
        let mut scratch = Vec::new();
        for i in lo..hi {
            let mut rng = trajectory_rng(seed, i as u64);
            // Chen fold over sampled increments directly, without building
            // the interpolated path.
            let mut sig = TruncTensor::unit(alphabet, q_max);
            let mut inc = vec![0.0; alphabet];
            for _ in 0..steps {
                inc[0] = step_dt;
                for d in inc.iter_mut().skip(1) {
                    let z: f64 = rng.sample(StandardNormal);
                    *d = sqrt_dt * z;
                }
                sig.concat_exp_assign(&inc, &mut scratch);
            }
            for ((s, ss), &x) in sum
                .data_mut()
                .iter_mut()
                .zip(sumsq.data_mut().iter_mut())
                .zip(sig.data())
            {
                *s += x;
                *ss += x * x;
            }
        }
        (sum, sumsq)
    });

    let mut sum = TruncTensor::zero(alphabet, q_max);
    let mut sumsq = TruncTensor::zero(alphabet, q_max);
    for (s, ss) in partials {
        sum.add_assign(&s);
        sumsq.add_assign(&ss);
    }
    let n_f = samples as f64;
    let mut mean = sum;
    mean.scale(1.0 / n_f);
    let mut se = TruncTensor::zero(alphabet, q_max);
    if samples > 1 {
        for ((e, &m), &ss) in se.data_mut().iter_mut().zip(mean.data()).zip(sumsq.data()) {
            let var = ((ss - n_f * m * m) / (n_f - 1.0)).max(0.0);
            *e = (var / n_f).sqrt();
        }
    }
    (mean, se)
}
