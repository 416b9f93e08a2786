//! Signatures of piecewise-linear sampled paths.
//!
//! A sampled path is interpreted as its piecewise-linear interpolation, for
//! which the iterated-integral signature is exact: each segment contributes
//! the tensor exponential of its increment, and segments compose by Chen's
//! identity.

use crate::tensor::TruncTensor;
use std::io::{BufRead, Write};

/// Strictly increasing time grid plus one point per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearPath {
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl PiecewiseLinearPath {
    pub fn new(times: Vec<f64>, values: Vec<Vec<f64>>) -> Self {
        assert_eq!(times.len(), values.len(), "grid/value count mismatch");
        assert!(!times.is_empty(), "empty path");
        assert!(
            times.windows(2).all(|w| w[0] < w[1]),
            "times must be strictly increasing"
        );
        let dim = values[0].len();
        assert!(values.iter().all(|v| v.len() == dim));
        PiecewiseLinearPath { times, values }
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    /// Number of segments.
    pub fn segments(&self) -> usize {
        self.times.len() - 1
    }

    pub fn increment(&self, seg: usize) -> Vec<f64> {
        self.values[seg + 1]
            .iter()
            .zip(&self.values[seg])
            .map(|(b, a)| b - a)
            .collect()
    }

    /// Path reversed in time (for the inverse-signature property).
    pub fn reversed(&self) -> PiecewiseLinearPath {
        let t0 = self.times[0];
        let t1 = *self.times.last().unwrap();
        let times = self.times.iter().rev().map(|&t| t0 + t1 - t).collect();
        let values = self.values.iter().rev().cloned().collect();
        PiecewiseLinearPath::new(times, values)
    }

    /// Refines every segment with its midpoint; signature-invariant.
    pub fn with_midpoints(&self) -> PiecewiseLinearPath {
        let mut times = Vec::with_capacity(self.times.len() * 2 - 1);
        let mut values = Vec::with_capacity(times.capacity());
        for i in 0..self.segments() {
            times.push(self.times[i]);
            values.push(self.values[i].clone());
            times.push(0.5 * (self.times[i] + self.times[i + 1]));
            values.push(
                self.values[i]
                    .iter()
                    .zip(&self.values[i + 1])
                    .map(|(a, b)| 0.5 * (a + b))
                    .collect(),
            );
        }
        times.push(*self.times.last().unwrap());
        values.push(self.values.last().unwrap().clone());
        PiecewiseLinearPath::new(times, values)
    }
}

/// Signature of one linear segment: level k is increment^{⊗k} / k!.
pub fn segment_signature(increment: &[f64], q: usize) -> TruncTensor {
    let dim = increment.len();
    let mut out = TruncTensor::unit(dim, q);
    segment_signature_into(increment, &mut out);
    out
}

/// Overwrites `out` with the segment signature; `out` must carry the same
/// alphabet. Allocation-free so a Chen fold can reuse one scratch tensor.
pub fn segment_signature_into(increment: &[f64], out: &mut TruncTensor) {
    let dim = increment.len();
    assert_eq!(dim, out.alphabet());
    let q = out.level();
    let data = out.data_mut();
    data[0] = 1.0;
    // Level k built from level k-1 by an outer product with the increment.
    let mut prev_off = 0usize;
    let mut prev_len = 1usize;
    for k in 1..=q {
        let off = prev_off + prev_len;
        let inv_k = 1.0 / k as f64;
        let (lo, hi) = data.split_at_mut(off);
        let prev = &lo[prev_off..];
        for (i, &p) in prev.iter().enumerate() {
            for (j, &d) in increment.iter().enumerate() {
                hi[i * dim + j] = p * d * inv_k;
            }
        }
        prev_off = off;
        prev_len *= dim;
    }
}

/// Signature of the path over grid indices `[s, t]`, by a Chen fold of
/// segment signatures. `s == t` yields the unit.
pub fn path_signature(path: &PiecewiseLinearPath, s: usize, t: usize, q: usize) -> TruncTensor {
    assert!(s <= t && t < path.times.len(), "bad grid indices");
    let dim = path.dim();
    let mut acc = TruncTensor::unit(dim, q);
    let mut inc = vec![0.0; dim];
    let mut scratch = Vec::new();
    for seg in s..t {
        for (k, d) in inc.iter_mut().enumerate() {
            *d = path.values[seg + 1][k] - path.values[seg][k];
        }
        acc.concat_exp_assign(&inc, &mut scratch);
    }
    acc
}

/// Signature over the whole grid.
pub fn full_signature(path: &PiecewiseLinearPath, q: usize) -> TruncTensor {
    path_signature(path, 0, path.segments(), q)
}

/// Prepends the time grid as coordinate 0.
pub fn augment_time(times: &[f64], values: &[Vec<f64>]) -> PiecewiseLinearPath {
    let augmented = times
        .iter()
        .zip(values)
        .map(|(&t, v)| {
            let mut row = Vec::with_capacity(v.len() + 1);
            row.push(t);
            row.extend_from_slice(v);
            row
        })
        .collect();
    PiecewiseLinearPath::new(times.to_vec(), augmented)
}

/// Drops coordinate 0 (inverse of `augment_time` up to the grid).
pub fn drop_time(path: &PiecewiseLinearPath) -> Vec<Vec<f64>> {
    path.values.iter().map(|v| v[1..].to_vec()).collect()
}

/// Writes `t,y0,...,ym` rows; f64 Display round-trips exactly, so a
/// read-back path is bit-identical. An optional sample id prefixes each row.
pub fn write_path_csv<W: Write>(
    path: &PiecewiseLinearPath,
    sample: Option<usize>,
    header: bool,
    mut w: W,
) -> std::io::Result<()> {
    if header {
        let cols: Vec<String> = (0..path.dim()).map(|k| format!("y{k}")).collect();
        let prefix = if sample.is_some() { "sample," } else { "" };
        writeln!(w, "{prefix}t,{}", cols.join(","))?;
    }
    for (t, row) in path.times.iter().zip(&path.values) {
        if let Some(s) = sample {
            write!(w, "{s},")?;
        }
        let vals: Vec<String> = row.iter().map(f64::to_string).collect();
        writeln!(w, "{t},{}", vals.join(","))?;
    }
    Ok(())
}

/// Reads the `write_path_csv` single-sample format (no sample column).
pub fn read_path_csv<R: BufRead>(r: R) -> Result<PiecewiseLinearPath, String> {
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        let line = line.trim();
        if line.is_empty() || line.starts_with("t,") {
            continue;
        }
        let mut fields = line.split(',');
        let bad = |what: &str| format!("line {}: {what}", lineno + 1);
        let t: f64 = fields
            .next()
            .ok_or_else(|| bad("empty row"))?
            .trim()
            .parse()
            .map_err(|_| bad("bad time"))?;
        let row: Vec<f64> = fields
            .map(|f| f.trim().parse().map_err(|_| bad("bad value")))
            .collect::<Result<_, _>>()?;
        if row.is_empty() {
            return Err(bad("no coordinates"));
        }
        times.push(t);
        values.push(row);
    }
    if times.is_empty() {
        return Err("no rows".to_string());
    }
    Ok(PiecewiseLinearPath::new(times, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::{shuffle, Word};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn w(letters: &[u8]) -> Word {
        Word::from_letters(letters)
    }

    #[test]
    fn segment_scalar_powers() {
        let s = segment_signature(&[2.0], 3);
        assert_eq!(s.get(&Word::empty()), 1.0);
        assert_eq!(s.get(&w(&[0])), 2.0);
        assert_eq!(s.get(&w(&[0, 0])), 2.0);
        assert!((s.get(&w(&[0, 0, 0])) - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn constant_segment_is_unit() {
        assert_eq!(segment_signature(&[0.0, 0.0], 3), TruncTensor::unit(2, 3));
    }

    #[test]
    fn symmetric_increment_level_two() {
        let s = segment_signature(&[1.0, 1.0], 2);
        for word in [[0u8, 0], [0, 1], [1, 0], [1, 1]] {
            assert_eq!(s.get(&w(&word)), 0.5);
        }
    }

    #[test]
    fn empty_interval_is_unit() {
        let p = PiecewiseLinearPath::new(vec![0.0, 1.0], vec![vec![0.0], vec![1.0]]);
        assert_eq!(path_signature(&p, 1, 1, 3), TruncTensor::unit(1, 3));
    }

    #[test]
    fn single_segment_matches_segment_signature() {
        let p = PiecewiseLinearPath::new(vec![0.0, 0.5], vec![vec![0.0, 1.0], vec![2.0, -1.0]]);
        let sig = full_signature(&p, 3);
        assert_eq!(sig, segment_signature(&[2.0, -2.0], 3));
    }

    #[test]
    fn two_segment_scalar_path() {
        // 0 -> 1 -> 3: S^(0) = 3, S^(0,0) = 3²/2 = 4.5
        let p = PiecewiseLinearPath::new(
            vec![0.0, 1.0, 2.0],
            vec![vec![0.0], vec![1.0], vec![3.0]],
        );
        let sig = full_signature(&p, 2);
        assert!((sig.get(&w(&[0])) - 3.0).abs() < 1e-14);
        assert!((sig.get(&w(&[0, 0])) - 4.5).abs() < 1e-14);
    }

    #[test]
    fn augment_time_roundtrip() {
        let times = vec![0.0, 0.5, 1.0];
        let values = vec![vec![0.0], vec![1.0], vec![0.0]];
        let aug = augment_time(&times, &values);
        assert_eq!(aug.dim(), 2);
        assert_eq!(aug.values[1], vec![0.5, 1.0]);
        assert_eq!(drop_time(&aug), values);
    }

    #[test]
    fn augment_constant_path_is_time_ray() {
        let times = vec![0.0, 1.0, 2.0];
        let values = vec![vec![5.0], vec![5.0], vec![5.0]];
        let aug = augment_time(&times, &values);
        let sig = full_signature(&aug, 2);
        assert_eq!(sig.get(&w(&[0])), 2.0);
        assert_eq!(sig.get(&w(&[1])), 0.0);
        assert_eq!(sig.get(&w(&[1, 1])), 0.0);
    }

    fn random_path(rng: &mut StdRng, dim: usize, max_segs: usize) -> PiecewiseLinearPath {
        let segs = rng.random_range(1..=max_segs);
        let mut times = vec![0.0];
        let mut values = vec![vec![0.0; dim]];
        for i in 0..segs {
            times.push(times[i] + rng.random_range(0.05..0.5));
            let prev = values[i].clone();
            values.push(
                prev.iter()
                    .map(|&x| x + rng.random_range(-0.5..0.5))
                    .collect(),
            );
        }
        PiecewiseLinearPath::new(times, values)
    }

    #[test]
    fn shuffle_identity_on_random_paths() {
        let mut rng = StdRng::seed_from_u64(42);
        for _ in 0..10 {
            let dim = rng.random_range(1..=3);
            let p = random_path(&mut rng, dim, 20);
            let sig = full_signature(&p, 4);
            let words = crate::word::enumerate_words(dim, 2);
            for i in &words {
                for j in &words {
                    if i.len() + j.len() > 4 {
                        continue;
                    }
                    let lhs = sig.get(i) * sig.get(j);
                    let rhs: f64 = shuffle(i, j)
                        .iter()
                        .map(|(k, &mult)| mult as f64 * sig.get(k))
                        .sum();
                    assert!(
                        (lhs - rhs).abs() <= 1e-10,
                        "shuffle identity failed: {} ⧢ {}",
                        i,
                        j
                    );
                }
            }
        }
    }

    #[test]
    fn chen_identity_all_splits() {
        let mut rng = StdRng::seed_from_u64(7);
        let p = random_path(&mut rng, 2, 8);
        let q = 3;
        let total = full_signature(&p, q);
        for j in 0..=p.segments() {
            let left = path_signature(&p, 0, j, q);
            let right = path_signature(&p, j, p.segments(), q);
            assert!(left.concat_mul(&right).sup_distance(&total) <= 1e-12);
        }
    }

    #[test]
    fn reversal_gives_inverse() {
        let mut rng = StdRng::seed_from_u64(11);
        let p = random_path(&mut rng, 3, 10);
        let sig = full_signature(&p, 3);
        let rev = full_signature(&p.reversed(), 3);
        let prod = sig.concat_mul(&rev);
        assert!(prod.sup_distance(&TruncTensor::unit(3, 3)) <= 1e-10);
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let mut rng = StdRng::seed_from_u64(17);
        let p = random_path(&mut rng, 2, 5);
        let mut buf = Vec::new();
        write_path_csv(&p, None, true, &mut buf).unwrap();
        let back = read_path_csv(buf.as_slice()).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn refinement_invariance() {
        let mut rng = StdRng::seed_from_u64(13);
        let p = random_path(&mut rng, 2, 6);
        let refined = p.with_midpoints();
        let a = full_signature(&p, 4);
        let b = full_signature(&refined, 4);
        assert!(a.sup_distance(&b) <= 1e-12);
    }
}
