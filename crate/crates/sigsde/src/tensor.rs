//! Truncated tensor algebra T^(<=q)(R^a) with a flat coefficient layout.
//!
//! Coefficients are stored in one contiguous vector, ordered by the
//! canonical (length, lexicographic) word enumeration. Level k occupies
//! `a^k` consecutive slots, and a word's within-level index is its base-a
//! digit expansion, so indexing is O(1) and the concatenation product
//! reduces to strided loops.

use crate::word::{enumerate_words, Word};
use std::io::{BufRead, Write};

/// Element of T^(<=level)(R^alphabet); dense flat storage.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncTensor {
    alphabet: usize,
    level: usize,
    data: Vec<f64>,
}

/// Number of words of length <= level over `alphabet` letters.
pub fn tensor_dim(alphabet: usize, level: usize) -> usize {
    let mut dim = 0usize;
    let mut pow = 1usize;
    for _ in 0..=level {
        dim += pow;
        pow *= alphabet;
    }
    dim
}

/// Start offset of level `k` in the flat layout.
pub fn level_offset(alphabet: usize, k: usize) -> usize {
    tensor_dim(alphabet, k) - alphabet.pow(k as u32)
}

impl TruncTensor {
    pub fn zero(alphabet: usize, level: usize) -> Self {
        assert!(alphabet >= 1);
        TruncTensor {
            alphabet,
            level,
            data: vec![0.0; tensor_dim(alphabet, level)],
        }
    }

    /// The multiplicative identity 1.
    pub fn unit(alphabet: usize, level: usize) -> Self {
        let mut t = Self::zero(alphabet, level);
        t.data[0] = 1.0;
        t
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Flat index of a word; panics if the word violates the bounds.
    pub fn index_of(&self, word: &Word) -> usize {
        flat_index(self.alphabet, self.level, word)
    }

    pub fn get(&self, word: &Word) -> f64 {
        self.data[self.index_of(word)]
    }

    pub fn set(&mut self, word: &Word, value: f64) {
        let idx = self.index_of(word);
        self.data[idx] = value;
    }

    pub fn add_to(&mut self, word: &Word, value: f64) {
        let idx = self.index_of(word);
        self.data[idx] += value;
    }

    /// Slice holding level `k`.
    pub fn level_slice(&self, k: usize) -> &[f64] {
        let off = level_offset(self.alphabet, k);
        &self.data[off..off + self.alphabet.pow(k as u32)]
    }

    pub fn scale(&mut self, c: f64) {
        for x in &mut self.data {
            *x *= c;
        }
    }

    pub fn add_assign(&mut self, other: &TruncTensor) {
        self.check_compatible(other);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn axpy(&mut self, c: f64, other: &TruncTensor) {
        self.check_compatible(other);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn sup_distance(&self, other: &TruncTensor) -> f64 {
        self.check_compatible(other);
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    fn check_compatible(&self, other: &TruncTensor) {
        assert_eq!(self.alphabet, other.alphabet, "alphabet mismatch");
        assert_eq!(self.level, other.level, "level mismatch");
    }

    /// Words of this tensor in canonical order (index-aligned with `data`).
    pub fn words(&self) -> Vec<Word> {
        enumerate_words(self.alphabet, self.level)
    }

    /// Concatenation (Chen) product, truncated at `level`.
    pub fn concat_mul(&self, other: &TruncTensor) -> TruncTensor {
        self.check_compatible(other);
        let a = self.alphabet;
        let mut out = TruncTensor::zero(a, self.level);
        for k in 0..=self.level {
            let out_off = level_offset(a, k);
            for k1 in 0..=k {
                let k2 = k - k1;
                let s1 = self.level_slice(k1);
                let s2 = other.level_slice(k2);
                let stride = a.pow(k2 as u32);
                for (i1, &c1) in s1.iter().enumerate() {
                    if c1 == 0.0 {
                        continue;
                    }
                    let base = out_off + i1 * stride;
                    for (i2, &c2) in s2.iter().enumerate() {
                        out.data[base + i2] += c1 * c2;
                    }
                }
            }
        }
        out
    }

    /// In-place right multiplication `self <- self ⊗ other`, allocation-free.
    ///
    /// Levels are updated in descending order so that the lower levels read
    /// on the right-hand side are still the pre-update values.
    pub fn concat_mul_assign(&mut self, other: &TruncTensor) {
        self.check_compatible(other);
        let a = self.alphabet;
        for k in (1..=self.level).rev() {
            let out_off = level_offset(a, k);
            // k2 = 0 term is self^k * other^∅.
            let unit = other.data[0];
            if unit != 1.0 {
                let n = a.pow(k as u32);
                for i in 0..n {
                    self.data[out_off + i] *= unit;
                }
            }
            for k2 in 1..=k {
                let k1 = k - k2;
                let s1_off = level_offset(a, k1);
                let s2_off = level_offset(a, k2);
                let stride = a.pow(k2 as u32);
                let src = &other.data[s2_off..s2_off + stride];
                for i1 in 0..a.pow(k1 as u32) {
                    let c1 = self.data[s1_off + i1];
                    if c1 == 0.0 {
                        continue;
                    }
                    let base = out_off + i1 * stride;
                    let dst = &mut self.data[base..base + stride];
                    for (d, &s) in dst.iter_mut().zip(src) {
                        *d += c1 * s;
                    }
                }
            }
        }
        self.data[0] *= other.data[0];
    }

    /// In-place Chen step `self <- self ⊗ exp(x)` for a level-1 element x
    /// with coordinates `increment` (one per letter).
    ///
    /// Builds each target level by a Horner chain that folds the series
    /// factorials into per-stage scalings, so exp(x) is never materialized;
    /// roughly a fifth of the arithmetic of a general product. `scratch` is
    /// resized to alphabet^(level-1) and reused across calls.
    pub fn concat_exp_assign(&mut self, increment: &[f64], scratch: &mut Vec<f64>) {
        assert_eq!(increment.len(), self.alphabet, "increment dimension");
        let a = self.alphabet;
        if self.level == 0 {
            return;
        }
        let half = a.pow((self.level - 1) as u32);
        scratch.resize(2 * half, 0.0);
        let (buf_a, buf_b) = scratch.split_at_mut(half);
        for l in (1..=self.level).rev() {
            // V_j = (V_{j-1} ⊗ x)/(l-j+1) + S_j for j = 1..l-1, seeded with
            // the scalar part; the stage scalings compose to the 1/(l-j)!
            // each source level owes the series. Descending l keeps the
            // levels read on the right-hand side pre-update.
            buf_a[0] = self.data[0];
            let mut cur_is_a = true;
            let mut width = 1usize;
            for j in 1..l {
                let c = 1.0 / (l - j + 1) as f64;
                let src_off = level_offset(a, j);
                let src = &self.data[src_off..src_off + width * a];
                let (cur, nxt) = if cur_is_a {
                    (&*buf_a, &mut *buf_b)
                } else {
                    (&*buf_b, &mut *buf_a)
                };
                for ((dst, s), &v) in nxt[..width * a]
                    .chunks_exact_mut(a)
                    .zip(src.chunks_exact(a))
                    .zip(&cur[..width])
                {
                    let vc = v * c;
                    for ((d, &sv), &i0) in dst.iter_mut().zip(s).zip(increment) {
                        *d = vc * i0 + sv;
                    }
                }
                cur_is_a = !cur_is_a;
                width *= a;
            }
            let cur = if cur_is_a { &*buf_a } else { &*buf_b };
            let out_off = level_offset(a, l);
            let out = &mut self.data[out_off..out_off + width * a];
            for (dst, &v) in out.chunks_exact_mut(a).zip(&cur[..width]) {
                for (d, &i0) in dst.iter_mut().zip(increment) {
                    *d += v * i0;
                }
            }
        }
    }

    /// Tensor exponential sum_{k<=level} a^{⊗k}/k!; exact because the
    /// argument is nilpotent at the truncation level. Rejects a nonzero
    /// scalar part.
    pub fn trunc_exp(&self) -> Result<TruncTensor, TensorError> {
        if self.data[0] != 0.0 {
            return Err(TensorError::NonzeroScalarPart(self.data[0]));
        }
        let mut acc = TruncTensor::unit(self.alphabet, self.level);
        let mut term = TruncTensor::unit(self.alphabet, self.level);
        for k in 1..=self.level {
            term = term.concat_mul(self);
            term.scale(1.0 / k as f64);
            acc.add_assign(&term);
        }
        Ok(acc)
    }

    /// Writes `word;coefficient` rows in canonical order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "word;coefficient")?;
        for (word, &c) in self.words().iter().zip(&self.data) {
            writeln!(w, "{};{}", word.render(), c)?;
        }
        Ok(())
    }

    /// Reads the `write_csv` format; absent words stay zero.
    pub fn read_csv<R: BufRead>(alphabet: usize, level: usize, r: R) -> Result<Self, TensorError> {
        let mut t = TruncTensor::zero(alphabet, level);
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| TensorError::Csv(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with("word;") {
                continue;
            }
            let (ws, cs) = line
                .split_once(';')
                .ok_or_else(|| TensorError::Csv(format!("line {}: missing ';'", lineno + 1)))?;
            let word = Word::parse(ws).map_err(TensorError::Csv)?;
            let coeff: f64 = cs
                .trim()
                .parse()
                .map_err(|_| TensorError::Csv(format!("line {}: bad coefficient", lineno + 1)))?;
            if word.len() > level || word.max_letter().is_some_and(|l| l as usize >= alphabet) {
                return Err(TensorError::Csv(format!(
                    "word {} outside alphabet {} level {}",
                    word.render(),
                    alphabet,
                    level
                )));
            }
            t.set(&word, coeff);
        }
        Ok(t)
    }
}

/// Flat index of `word` in the (length, lexicographic) layout.
pub fn flat_index(alphabet: usize, level: usize, word: &Word) -> usize {
    assert!(word.len() <= level, "word {} exceeds level {}", word, level);
    let mut idx = 0usize;
    for &l in &word.0 {
        assert!((l as usize) < alphabet, "letter {} outside alphabet", l);
        idx = idx * alphabet + l as usize;
    }
    level_offset(alphabet, word.len()) + idx
}

#[derive(Debug, thiserror::Error)]
pub enum TensorError {
    #[error("tensor exponential requires zero scalar part, got {0}")]
    NonzeroScalarPart(f64),
    #[error("csv: {0}")]
    Csv(String),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::Word;

    fn w(letters: &[u8]) -> Word {
        Word::from_letters(letters)
    }

    #[test]
    fn layout_matches_enumeration() {
        let t = TruncTensor::zero(3, 3);
        for (i, word) in t.words().iter().enumerate() {
            assert_eq!(t.index_of(word), i);
        }
    }

    #[test]
    fn unit_is_identity() {
        let mut t = TruncTensor::zero(2, 2);
        t.set(&w(&[0]), 2.5);
        t.set(&w(&[1, 0]), -1.0);
        t.set(&Word::empty(), 1.0);
        let unit = TruncTensor::unit(2, 2);
        assert_eq!(unit.concat_mul(&t), t);
        assert_eq!(t.concat_mul(&unit), t);
    }

    #[test]
    fn scalar_series_product() {
        // q=2, one letter: (1 + 2·(0)) ⊗ (1 + 3·(0)) = 1 + 5·(0) + 6·(0,0)
        let mut s = TruncTensor::unit(1, 2);
        s.set(&w(&[0]), 2.0);
        let mut t = TruncTensor::unit(1, 2);
        t.set(&w(&[0]), 3.0);
        let p = s.concat_mul(&t);
        assert_eq!(p.get(&Word::empty()), 1.0);
        assert_eq!(p.get(&w(&[0])), 5.0);
        assert_eq!(p.get(&w(&[0, 0])), 6.0);
    }

    #[test]
    fn concat_is_associative() {
        let mut rng = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            rng ^= rng << 13;
            rng ^= rng >> 7;
            rng ^= rng << 17;
            (rng >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for _ in 0..5 {
            let mut abc = Vec::new();
            for _ in 0..3 {
                let mut t = TruncTensor::zero(2, 3);
                for x in t.data_mut() {
                    *x = next();
                }
                abc.push(t);
            }
            let left = abc[0].concat_mul(&abc[1]).concat_mul(&abc[2]);
            let right = abc[0].concat_mul(&abc[1].concat_mul(&abc[2]));
            let scale = left.sup_norm().max(1.0);
            assert!(left.sup_distance(&right) / scale <= 1e-12);
        }
    }

    #[test]
    fn concat_assign_matches_concat() {
        let mut s = TruncTensor::unit(2, 3);
        s.set(&w(&[0]), 0.7);
        s.set(&w(&[1, 1]), -0.2);
        let mut t = TruncTensor::unit(2, 3);
        t.set(&w(&[1]), 1.3);
        t.set(&w(&[0, 1]), 0.4);
        let expected = s.concat_mul(&t);
        s.concat_mul_assign(&t);
        assert!(s.sup_distance(&expected) <= 1e-15);
    }

    #[test]
    fn concat_exp_assign_matches_general_product() {
        let mut rng = 0xdeadbeefcafef00du64;
        let mut next = move || {
            rng ^= rng << 13;
            rng ^= rng >> 7;
            rng ^= rng << 17;
            (rng >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut scratch = Vec::new();
        for &(a, q) in &[(1usize, 4usize), (2, 5), (3, 6), (4, 3)] {
            let mut s = TruncTensor::zero(a, q);
            for x in s.data_mut() {
                *x = next();
            }
            let inc: Vec<f64> = (0..a).map(|_| next()).collect();
            let mut gen = TruncTensor::zero(a, q);
            for (letter, &v) in inc.iter().enumerate() {
                gen.set(&Word::from_letters(&[letter as u8]), v);
            }
            let expected = s.concat_mul(&gen.trunc_exp().unwrap());
            let mut got = s.clone();
            got.concat_exp_assign(&inc, &mut scratch);
            assert!(got.sup_distance(&expected) <= 1e-14);
        }
    }

    #[test]
    fn exp_of_zero_is_unit() {
        let z = TruncTensor::zero(2, 3);
        assert_eq!(z.trunc_exp().unwrap(), TruncTensor::unit(2, 3));
    }

    #[test]
    fn exp_scalar_direction() {
        // q=2, a = T·(0): exp = 1 + T·(0) + T²/2·(0,0)
        let big_t = 0.3;
        let mut a = TruncTensor::zero(1, 2);
        a.set(&w(&[0]), big_t);
        let e = a.trunc_exp().unwrap();
        assert!((e.get(&Word::empty()) - 1.0).abs() < 1e-15);
        assert!((e.get(&w(&[0])) - big_t).abs() < 1e-15);
        assert!((e.get(&w(&[0, 0])) - big_t * big_t / 2.0).abs() < 1e-15);
    }

    #[test]
    fn exp_of_level_two_generator_has_no_cross_terms() {
        // q=3, a = c·(1,1): (1,1) coefficient is c, nothing at level 3,
        // and (1,1,1,1) would only appear at level 4.
        let c = 0.7;
        let mut a = TruncTensor::zero(2, 3);
        a.set(&w(&[1, 1]), c);
        let e = a.trunc_exp().unwrap();
        assert_eq!(e.get(&w(&[1, 1])), c);
        for word in e.words() {
            if word.len() == 3 {
                assert_eq!(e.get(&word), 0.0);
            }
        }
    }

    #[test]
    fn exp_rejects_scalar_part() {
        let u = TruncTensor::unit(2, 2);
        assert!(u.trunc_exp().is_err());
    }

    #[test]
    fn exp_inverse_is_group_like() {
        let mut a = TruncTensor::zero(2, 4);
        a.set(&w(&[0]), 0.4);
        a.set(&w(&[1]), -0.9);
        a.set(&w(&[0, 1]), 0.25);
        let mut neg = a.clone();
        neg.scale(-1.0);
        let p = a.trunc_exp().unwrap().concat_mul(&neg.trunc_exp().unwrap());
        assert!(p.sup_distance(&TruncTensor::unit(2, 4)) <= 1e-12);
    }

    #[test]
    fn csv_roundtrip() {
        let mut t = TruncTensor::zero(2, 2);
        t.set(&Word::empty(), 1.0);
        t.set(&w(&[0, 1]), -0.125);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = TruncTensor::read_csv(2, 2, buf.as_slice()).unwrap();
        assert_eq!(t, back);
    }
}
