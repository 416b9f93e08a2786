//! Sparse multivariate polynomials over f64.
//!
//! Terms map exponent vectors to coefficients; zero coefficients are never
//! stored. Coefficients below a fixed prune threshold are dropped after
//! every arithmetic step to bound term growth during recursion.

use std::collections::HashMap;
use std::fmt;

const PRUNE_EPS: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct MPoly {
    num_vars: usize,
    terms: HashMap<Vec<u32>, f64>,
}

impl MPoly {
    pub fn zero(num_vars: usize) -> Self {
        MPoly {
            num_vars,
            terms: HashMap::new(),
        }
    }

    pub fn constant(num_vars: usize, c: f64) -> Self {
        let mut p = MPoly::zero(num_vars);
        if c != 0.0 {
            p.terms.insert(vec![0; num_vars], c);
        }
        p
    }

    /// The monomial `c * x_k`.
    pub fn linear(num_vars: usize, k: usize, c: f64) -> Self {
        assert!(k < num_vars);
        let mut p = MPoly::zero(num_vars);
        if c != 0.0 {
            let mut exps = vec![0; num_vars];
            exps[k] = 1;
            p.terms.insert(exps, c);
        }
        p
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum())
            .max()
            .unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &f64)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: f64) {
        assert_eq!(exps.len(), self.num_vars);
        let entry = self.terms.entry(exps).or_insert(0.0);
        *entry += c;
        if entry.abs() <= PRUNE_EPS {
            let key = self
                .terms
                .iter()
                .find(|(_, v)| v.abs() <= PRUNE_EPS)
                .map(|(k, _)| k.clone());
            if let Some(k) = key {
                self.terms.remove(&k);
            }
        }
    }

    pub fn add_assign(&mut self, other: &MPoly) {
        assert_eq!(self.num_vars, other.num_vars);
        for (e, &c) in &other.terms {
            let entry = self.terms.entry(e.clone()).or_insert(0.0);
            *entry += c;
        }
        self.prune();
    }

    pub fn add(&self, other: &MPoly) -> MPoly {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn sub(&self, other: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            let entry = out.terms.entry(e.clone()).or_insert(0.0);
            *entry -= c;
        }
        out.prune();
        out
    }

    pub fn scale(&self, c: f64) -> MPoly {
        let mut out = MPoly::zero(self.num_vars);
        if c == 0.0 {
            return out;
        }
        for (e, &v) in &self.terms {
            out.terms.insert(e.clone(), v * c);
        }
        out.prune();
        out
    }

    pub fn mul(&self, other: &MPoly) -> MPoly {
        assert_eq!(self.num_vars, other.num_vars);
        let mut out = MPoly::zero(self.num_vars);
        for (e1, &c1) in &self.terms {
            for (e2, &c2) in &other.terms {
                let exps: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *out.terms.entry(exps).or_insert(0.0) += c1 * c2;
            }
        }
        out.prune();
        out
    }

    /// Accumulates `self += a * b` without an intermediate clone.
    pub fn add_mul(&mut self, a: &MPoly, b: &MPoly) {
        assert_eq!(self.num_vars, a.num_vars);
        assert_eq!(self.num_vars, b.num_vars);
        for (e1, &c1) in &a.terms {
            for (e2, &c2) in &b.terms {
                let exps: Vec<u32> = e1.iter().zip(e2).map(|(x, y)| x + y).collect();
                *self.terms.entry(exps).or_insert(0.0) += c1 * c2;
            }
        }
        self.prune();
    }

    pub fn partial(&self, k: usize) -> MPoly {
        assert!(k < self.num_vars);
        let mut out = MPoly::zero(self.num_vars);
        for (e, &c) in &self.terms {
            if e[k] == 0 {
                continue;
            }
            let mut exps = e.clone();
            exps[k] -= 1;
            *out.terms.entry(exps).or_insert(0.0) += c * e[k] as f64;
        }
        out.prune();
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.num_vars);
        self.terms
            .iter()
            .map(|(e, &c)| {
                c * e
                    .iter()
                    .zip(x)
                    .map(|(&p, &v)| v.powi(p as i32))
                    .product::<f64>()
            })
            .sum()
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| c.abs() > PRUNE_EPS);
    }

    /// Sorted (by total degree, then exponents) term list for stable output.
    pub fn sorted_terms(&self) -> Vec<(Vec<u32>, f64)> {
        let mut terms: Vec<_> = self.terms.iter().map(|(e, &c)| (e.clone(), c)).collect();
        terms.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            da.cmp(&db).then_with(|| a.0.cmp(&b.0))
        });
        terms
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (exps, c) in self.sorted_terms() {
            if first {
                if c < 0.0 {
                    write!(f, "-")?;
                }
                first = false;
            } else if c < 0.0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = c.abs();
            let monomial: Vec<String> = exps
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0)
                .map(|(i, &p)| {
                    if p == 1 {
                        format!("t{}", i + 1)
                    } else {
                        format!("t{}^{}", i + 1, p)
                    }
                })
                .collect();
            if monomial.is_empty() {
                write!(f, "{mag}")?;
            } else if (mag - 1.0).abs() < 1e-15 {
                write!(f, "{}", monomial.join("*"))?;
            } else {
                write!(f, "{mag}*{}", monomial.join("*"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_eval() {
        // p = 2 x0^2 + 3 x1 - 1
        let mut p = MPoly::zero(2);
        p.add_term(vec![2, 0], 2.0);
        p.add_term(vec![0, 1], 3.0);
        p.add_term(vec![0, 0], -1.0);
        assert_eq!(p.eval(&[2.0, 1.0]), 10.0);
        assert_eq!(p.total_degree(), 2);

        let q = MPoly::linear(2, 0, 1.0); // x0
        let pq = p.mul(&q);
        assert_eq!(pq.eval(&[2.0, 1.0]), 20.0);
        assert_eq!(pq.total_degree(), 3);
    }

    #[test]
    fn partial_derivative() {
        let mut p = MPoly::zero(1);
        p.add_term(vec![3], 1.0); // x^3
        let dp = p.partial(0);
        assert_eq!(dp.eval(&[2.0]), 12.0);
    }

    #[test]
    fn cancellation_prunes_zero_terms() {
        let p = MPoly::linear(1, 0, 1.0);
        let diff = p.sub(&p);
        assert!(diff.is_zero());
    }

    #[test]
    fn display_is_readable() {
        let mut p = MPoly::zero(2);
        p.add_term(vec![1, 0], -1.0);
        p.add_term(vec![0, 2], 0.5);
        let s = format!("{p}");
        assert!(s.contains("t1") && s.contains("t2^2"), "{s}");
    }
}
