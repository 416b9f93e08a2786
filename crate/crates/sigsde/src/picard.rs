//! Picard-iterate signature coefficients as polynomials in the unknowns.
//!
//! For a driver X and the r-th Picard iterate Y(r) of the lifted equation,
//! every coefficient <e_I, Y(r)_T> is a finite linear combination
//! Σ_J α^I_{r,J}(θ) · S(X)^J over driver words J of length at most
//! Q(r, |I|). The α table is built by a memoized recursion; replacing the
//! driver signature by its expectation yields the moment polynomials the
//! estimator matches against data. A numeric Picard iteration on the same
//! driver serves as an independent check of the whole table.

use crate::model::{lifted_apply, BoundTheta, Theta};
use crate::path::PiecewiseLinearPath;
use crate::poly::MPoly;
use crate::tensor::TruncTensor;
use crate::word::Word;
use std::collections::HashMap;

/// Sharp length bound Q(r, ℓ): driver words longer than this cannot appear
/// in a level-ℓ coefficient of the r-th iterate.
pub fn q_bound(r: usize, l: usize) -> usize {
    if r == 0 || l == 0 {
        0
    } else if l == 1 {
        1 << (r - 1)
    } else {
        (1 << r) - 1
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PicardError {
    #[error("moment tensor truncated at level {have}, need {need} for (r={r}, |I|={len})")]
    MomentLevel {
        have: usize,
        need: usize,
        r: usize,
        len: usize,
    },
    #[error("moment tensor alphabet {have}, expected {need}")]
    MomentAlphabet { have: usize, need: usize },
    #[error("driver dimension {have}, expected {need} (time plus noise)")]
    DriverDim { have: usize, need: usize },
    #[error("numeric Picard did not converge to {tol:e} after {refinements} refinements")]
    NoConvergence { tol: f64, refinements: usize },
}

/// Memoized α^I_{r,J} table for one parametrized model.
pub struct PicardTable {
    theta: Theta,
    solution_words: Vec<Word>,
    memo: HashMap<(usize, Word, Word), MPoly>,
}

impl PicardTable {
    pub fn new(theta: Theta) -> Self {
        let words = crate::word::enumerate_words(theta.m() + 1, theta.q());
        PicardTable {
            theta,
            solution_words: words,
            memo: HashMap::new(),
        }
    }

    pub fn theta(&self) -> &Theta {
        &self.theta
    }

    /// α^I_{r,J} over solution word I and driver word J.
    pub fn alpha(&mut self, r: usize, i_word: &Word, j_word: &Word) -> MPoly {
        let d = self.theta.num_unknowns();
        if i_word.is_empty() {
            return if j_word.is_empty() {
                MPoly::constant(d, 1.0)
            } else {
                MPoly::zero(d)
            };
        }
        if r == 0 || j_word.is_empty() {
            return MPoly::zero(d);
        }
        let key = (r, i_word.clone(), j_word.clone());
        if let Some(p) = self.memo.get(&key) {
            return p.clone();
        }
        let p = if i_word.len() == 1 {
            self.alpha_single(r, i_word.last(), j_word)
        } else {
            self.alpha_multi(r, i_word, j_word)
        };
        self.memo.insert(key, p.clone());
        p
    }

    /// |I| = 1: peel the last driver letter, summing over the θ word K.
    fn alpha_single(&mut self, r: usize, letter: u8, j_word: &Word) -> MPoly {
        let d = self.theta.num_unknowns();
        let q = self.theta.q();
        if j_word.len() > q_bound(r - 1, q) + 1 {
            return MPoly::zero(d);
        }
        let col = j_word.last() as usize;
        let j_prefix = j_word.prefix();
        let mut out = MPoly::zero(d);
        let words = self.solution_words.clone();
        for k_word in &words {
            if j_prefix.len() > q_bound(r - 1, k_word.len()) {
                continue;
            }
            let coeff = self.theta.coeff_poly(letter as usize, col, k_word);
            if coeff.is_zero() {
                continue;
            }
            let inner = self.alpha(r - 1, k_word, &j_prefix);
            if inner.is_zero() {
                continue;
            }
            out.add_mul(&coeff, &inner);
        }
        out
    }

    /// |I| >= 2: split J's first |J|-1 letters between the prefix I⁻ at
    /// stage r-1 and the last letter I^f at stage r.
    fn alpha_multi(&mut self, r: usize, i_word: &Word, j_word: &Word) -> MPoly {
        let d = self.theta.num_unknowns();
        let cap_prefix = q_bound(r - 1, i_word.len() - 1);
        let cap_last = q_bound(r, 1);
        if j_word.len() > cap_prefix + cap_last {
            return MPoly::zero(d);
        }
        let i_prefix = i_word.prefix();
        let i_last = Word::from_letters(&[i_word.last()]);
        let positions = j_word.len() - 1;
        let mut out = MPoly::zero(d);
        for mask in 0u32..(1 << positions) {
            let picked = mask.count_ones() as usize;
            if picked > cap_prefix || positions - picked > cap_last - 1 {
                continue;
            }
            let mut left = Vec::with_capacity(picked);
            let mut right = Vec::with_capacity(positions - picked);
            for p in 0..positions {
                if mask & (1 << p) != 0 {
                    left.push(p);
                } else {
                    right.push(p);
                }
            }
            let a = self.alpha(r - 1, &i_prefix, &j_word.subword(&left));
            if a.is_zero() {
                continue;
            }
            let tail = j_word.subword(&right).append(j_word.last());
            let b = self.alpha(r, &i_last, &tail);
            if b.is_zero() {
                continue;
            }
            out.add_mul(&a, &b);
        }
        out
    }

    /// P_r^I(θ) = Σ_J α^I_{r,J}(θ) · E[X^J], contracting the α table
    /// against a driver moment tensor.
    pub fn moment_poly(
        &mut self,
        r: usize,
        i_word: &Word,
        moments: &TruncTensor,
    ) -> Result<MPoly, PicardError> {
        let need_alphabet = self.theta.n() + 1;
        if moments.alphabet() != need_alphabet {
            return Err(PicardError::MomentAlphabet {
                have: moments.alphabet(),
                need: need_alphabet,
            });
        }
        let need = q_bound(r, i_word.len());
        if moments.level() < need {
            return Err(PicardError::MomentLevel {
                have: moments.level(),
                need,
                r,
                len: i_word.len(),
            });
        }
        let d = self.theta.num_unknowns();
        let mut out = MPoly::zero(d);
        for (j_word, &m) in moments.words().iter().zip(moments.data()) {
            if m == 0.0 || j_word.len() > need {
                continue;
            }
            let a = self.alpha(r, i_word, j_word);
            if a.is_zero() {
                continue;
            }
            out.add_assign(&a.scale(m));
        }
        Ok(out)
    }
}

/// r Picard iterations of the lifted equation on the driver's grid, with
/// trapezoid quadrature, refined by grid doubling until the final state is
/// stable to `tol` in sup norm.
pub fn numeric_picard(
    theta: &BoundTheta,
    driver: &PiecewiseLinearPath,
    r: usize,
    tol: f64,
) -> Result<TruncTensor, PicardError> {
    if driver.dim() != theta.n() + 1 {
        return Err(PicardError::DriverDim {
            have: driver.dim(),
            need: theta.n() + 1,
        });
    }
    const MAX_REFINEMENTS: usize = 16;
    let mut path = driver.clone();
    let mut prev = picard_on_grid(theta, &path, r);
    for _ in 0..MAX_REFINEMENTS {
        path = path.with_midpoints();
        let cur = picard_on_grid(theta, &path, r);
        if cur.sup_distance(&prev) <= tol {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(PicardError::NoConvergence {
        tol,
        refinements: MAX_REFINEMENTS,
    })
}

fn picard_on_grid(theta: &BoundTheta, driver: &PiecewiseLinearPath, r: usize) -> TruncTensor {
    let unit = TruncTensor::unit(theta.m() + 1, theta.q());
    let nodes = driver.times.len();
    let mut cur = vec![unit.clone(); nodes];
    for _ in 0..r {
        let mut next = Vec::with_capacity(nodes);
        let mut acc = unit.clone();
        next.push(acc.clone());
        for seg in 0..driver.segments() {
            let dx = driver.increment(seg);
            let lo = lifted_apply(theta, &cur[seg], &dx);
            let hi = lifted_apply(theta, &cur[seg + 1], &dx);
            acc.axpy(0.5, &lo);
            acc.axpy(0.5, &hi);
            next.push(acc.clone());
        }
        cur = next;
    }
    cur.pop().expect("non-empty grid")
}

/// Contracts the α table against an actual driver signature: the symbolic
/// prediction of <e_I, Y(r)_T> for a deterministic driver.
pub fn predict_coefficient(
    table: &mut PicardTable,
    unknowns: &[f64],
    r: usize,
    i_word: &Word,
    driver_sig: &TruncTensor,
) -> f64 {
    let mut total = 0.0;
    let cap = q_bound(r, i_word.len());
    for (j_word, &s) in driver_sig.words().iter().zip(driver_sig.data()) {
        if s == 0.0 || j_word.len() > cap {
            continue;
        }
        let a = table.alpha(r, i_word, j_word);
        if a.is_zero() {
            continue;
        }
        total += a.eval(unknowns) * s;
    }
    total
}
