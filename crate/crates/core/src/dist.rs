//! Memoryless source distributions and compensated summation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|sum - 1|` for a valid distribution.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sums terms in descending magnitude order with compensation. The result
/// depends only on the multiset of terms, not on their input order.
pub fn stable_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(|a, b| b.abs().total_cmp(&a.abs()).then(b.total_cmp(a)));
    let mut acc = CompensatedSum::default();
    for t in terms {
        acc.add(t);
    }
    acc.total()
}

/// Streaming mean and variance (Welford), mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. pairwise combination.
    pub fn merge(&mut self, other: &RunningStats) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample variance with the `n - 1` denominator.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// Probabilities `P(n)` of each symbol of a memoryless source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SymbolDistribution {
    probs: Vec<f64>,
}

impl SymbolDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("no symbols".into()));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidDistribution(format!(
                "probability of symbol {i} is {p}"
            )));
        }
        let total = stable_sum(probs.clone());
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(SymbolDistribution { probs })
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform distribution needs at least one symbol");
        SymbolDistribution {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, symbol: usize) -> f64 {
        self.probs[symbol]
    }

    /// Total probability of a set of symbols.
    pub fn mass<I: IntoIterator<Item = usize>>(&self, symbols: I) -> f64 {
        stable_sum(symbols.into_iter().map(|s| self.probs[s]).collect())
    }

    /// Product distribution on blocks of `d` letters. Block `(m_1, .., m_d)`
    /// has index `m_1 N^(d-1) + .. + m_d` (first letter most significant).
    pub fn blockify(&self, d: usize, alphabet_cap: usize) -> Result<SymbolDistribution> {
        if d == 0 {
            return Err(Error::InvalidFamily("block length must be positive".into()));
        }
        let n = self.len();
        let size = block_alphabet(n, d, alphabet_cap)?;
        let mut probs = Vec::with_capacity(size);
        let mut letters = vec![0usize; d];
        for _ in 0..size {
            probs.push(letters.iter().fold(1.0, |acc, &m| acc * self.probs[m]));
            for pos in (0..d).rev() {
                letters[pos] += 1;
                if letters[pos] < n {
                    break;
                }
                letters[pos] = 0;
            }
        }
        Ok(SymbolDistribution { probs })
    }
}

/// `n^d`, failing when it exceeds `cap`.
pub fn block_alphabet(n: usize, d: usize, cap: usize) -> Result<usize> {
    let mut size: usize = 1;
    for _ in 0..d {
        size = size
            .checked_mul(n)
            .filter(|&s| s <= cap)
            .ok_or(Error::AlphabetCapExceeded {
                size: n.saturating_pow(d as u32),
                cap,
            })?;
    }
    Ok(size)
}

impl TryFrom<Vec<f64>> for SymbolDistribution {
    type Error = Error;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        SymbolDistribution::new(probs)
    }
}

impl From<SymbolDistribution> for Vec<f64> {
    fn from(d: SymbolDistribution) -> Self {
        d.probs
    }
}
