//! Key appearance equivocation `H(K | M^L C^L)`.
//!
//! With equiprobable keys, a consistent pair `(m, c)` leaves exactly
//! `|St(m)|` candidate keys, so the equivocation is the expectation of
//! `log |St(m)|` over messages. `St(m)` only depends on the support of `m`
//! (its set of distinct symbols), and it is nontrivial only when the
//! support lies inside some maximal fixed set. The exact routine therefore
//! walks the subsets of the distinct maximal fixed sets and weighs each by
//! the probability that a message has exactly that support.

use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{stable_sum, RunningStats, SymbolDistribution};
use crate::error::{Error, Result};
use crate::group::SupportKey;
use crate::model::CipherModel;
use crate::perm::Word;

/// Powers below this are reported as zero.
pub const UNDERFLOW_FLOOR: f64 = 1e-300;

/// Limits for [`brute_force_equivocation`].
pub const BRUTE_FORCE_MAX_WORDS: u128 = 10_000_000;
pub const BRUTE_FORCE_MAX_ORDER: usize = 10_000;

/// Samples drawn per deterministic RNG stream in the Monte Carlo estimator.
pub const MC_BATCH: usize = 4096;

/// `x^n` with `0^n = 0` and results under [`UNDERFLOW_FLOOR`] flushed to zero.
pub fn guarded_pow(x: f64, n: usize) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let v = if n <= i32::MAX as usize {
        x.powi(n as i32)
    } else {
        (n as f64 * x.ln()).exp()
    };
    if v.abs() < UNDERFLOW_FLOOR {
        0.0
    } else {
        v
    }
}

fn check_length(length: usize) -> Result<()> {
    if length == 0 {
        Err(Error::ZeroLength)
    } else {
        Ok(())
    }
}

/// Probability that a random message of `length` symbols uses exactly the
/// symbols of `support`, by inclusion-exclusion:
/// `sum over S ⊆ T of (-1)^(|T|-|S|) P(S)^length`.
pub fn support_probability(dist: &SymbolDistribution, support: &[usize], length: usize) -> f64 {
    let t = support.len();
    if t == 0 || t > length {
        return 0.0;
    }
    assert!(
        t <= 40,
        "support of {t} symbols is too large for inclusion-exclusion"
    );
    let probs: Vec<f64> = support.iter().map(|&s| dist.prob(s)).collect();
    let terms = (0u64..1 << t)
        .map(|mask| {
            let mass = stable_sum(
                (0..t)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| probs[i])
                    .collect(),
            );
            let sign = if (t - mask.count_ones() as usize).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            sign * guarded_pow(mass, length)
        })
        .collect();
    stable_sum(terms)
}

/// One distinct maximal fixed set with everything the exact sum needs that
/// does not depend on the message length.
#[derive(Debug)]
struct FixedSetBlock {
    /// `P(S)` for every subset `S` (local bitmask over the set's symbols).
    masses: Vec<f64>,
    /// `(S, log |St(S)|)` for the nonempty subsets this block accounts for
    /// that have a nontrivial stabilizer.
    terms: Vec<(u32, f64)>,
}

/// Subsets of the distinct maximal fixed sets, with stabilizer sizes.
#[derive(Debug)]
pub(crate) struct SupportLattice {
    blocks: Vec<FixedSetBlock>,
}

impl SupportLattice {
    pub(crate) fn build(model: &CipherModel) -> Result<Self> {
        let report = model.maximal_keys();
        let sets = &report.maximal_fixed_sets;
        let cap = model.caps().max_exact_subsets;
        let subsets = sets.iter().fold(0u128, |acc, s| {
            acc.saturating_add(1u128.checked_shl(s.len() as u32).unwrap_or(u128::MAX))
        });
        if subsets > cap || sets.iter().any(|s| s.len() >= 32) {
            return Err(Error::ExactTooLarge { subsets, cap });
        }

        let group = model.group();
        let dist = model.distribution();
        let degree = group.degree();

        let mut membership: Vec<Vec<(usize, u32)>> = vec![Vec::new(); degree];
        for (b, set) in sets.iter().enumerate() {
            for (bit, &s) in set.iter().enumerate() {
                membership[s].push((b, bit as u32));
            }
        }

        // counts[b][S] = number of keys g with F(g) ∩ F_b = S
        let mut counts: Vec<Vec<u64>> = sets.iter().map(|s| vec![0; 1 << s.len()]).collect();
        let mut touched_total = vec![0u64; sets.len()];
        let mut local = vec![0u32; sets.len()];
        let mut touched: Vec<usize> = Vec::new();
        for g in group.elements() {
            for s in g.fixed_points() {
                for &(b, bit) in &membership[s] {
                    if local[b] == 0 {
                        touched.push(b);
                    }
                    local[b] |= 1 << bit;
                }
            }
            for &b in &touched {
                counts[b][local[b] as usize] += 1;
                touched_total[b] += 1;
                local[b] = 0;
            }
            touched.clear();
        }
        let order = group.order() as u64;
        for (b, c) in counts.iter_mut().enumerate() {
            c[0] += order - touched_total[b];
        }

        let blocks = sets
            .par_iter()
            .zip(counts.into_par_iter())
            .enumerate()
            .map(|(b, (set, mut stab))| {
                let f = set.len();
                // superset sums: stab[S] = |{g : S ⊆ F(g)}| = |St(S)|
                for bit in 0..f {
                    let step = 1usize << bit;
                    for mask in 0..stab.len() {
                        if mask & step == 0 {
                            stab[mask] += stab[mask | step];
                        }
                    }
                }
                // a support inside an earlier maximal set is counted there
                let earlier: Vec<u32> = sets[..b]
                    .iter()
                    .map(|other| {
                        set.iter()
                            .enumerate()
                            .filter(|(_, s)| other.binary_search(s).is_ok())
                            .fold(0u32, |m, (bit, _)| m | 1 << bit)
                    })
                    .filter(|&m| m != 0)
                    .collect();
                let mut masses = vec![0.0; 1 << f];
                for mask in 1..masses.len() {
                    let low = mask.trailing_zeros() as usize;
                    masses[mask] = masses[mask & (mask - 1)] + dist.prob(set[low]);
                }
                let terms = (1u32..1 << f)
                    .filter(|&mask| stab[mask as usize] > 1)
                    .filter(|&mask| earlier.iter().all(|&m| mask & !m != 0))
                    .map(|mask| (mask, model.log(stab[mask as usize] as f64)))
                    .collect();
                FixedSetBlock { masses, terms }
            })
            .collect();
        Ok(SupportLattice { blocks })
    }

    fn equivocation(&self, length: usize) -> f64 {
        let terms: Vec<f64> = self
            .blocks
            .par_iter()
            .flat_map_iter(|block| {
                let mut exact: Vec<f64> = block
                    .masses
                    .iter()
                    .map(|&m| guarded_pow(m, length))
                    .collect();
                // Möbius inversion over subsets: exact[S] = P(support == S)
                let f = exact.len().trailing_zeros();
                for bit in 0..f {
                    let step = 1usize << bit;
                    for mask in 0..exact.len() {
                        if mask & step != 0 {
                            exact[mask] -= exact[mask ^ step];
                        }
                    }
                }
                block
                    .terms
                    .iter()
                    .filter(|(mask, _)| mask.count_ones() as usize <= length)
                    .map(|&(mask, w)| w * exact[mask as usize])
                    .collect::<Vec<_>>()
            })
            .collect();
        stable_sum(terms)
    }
}

/// Exact equivocation for messages of `length` cipher symbols.
pub fn exact_equivocation(model: &CipherModel, length: usize) -> Result<f64> {
    check_length(length)?;
    Ok(model.lattice()?.equivocation(length))
}

/// Direct evaluation over every message: `sum_m P(m) log |St(m)|`, with the
/// stabilizer found by testing every key on the message.
pub fn brute_force_equivocation(model: &CipherModel, length: usize) -> Result<f64> {
    check_length(length)?;
    let group = model.group();
    let dist = model.distribution();
    let n = group.degree();
    let words = (n as u128)
        .checked_pow(length as u32)
        .filter(|&w| w <= BRUTE_FORCE_MAX_WORDS)
        .ok_or_else(|| {
            Error::BruteForceTooLarge(format!(
                "{n}^{length} messages exceeds {BRUTE_FORCE_MAX_WORDS}"
            ))
        })?;
    if group.order() > BRUTE_FORCE_MAX_ORDER {
        return Err(Error::BruteForceTooLarge(format!(
            "group order {} exceeds {BRUTE_FORCE_MAX_ORDER}",
            group.order()
        )));
    }
    let terms: Vec<f64> = (0..words as u64)
        .into_par_iter()
        .map(|code| {
            let mut rest = code;
            let mut symbols = vec![0usize; length];
            for slot in symbols.iter_mut().rev() {
                *slot = (rest % n as u64) as usize;
                rest /= n as u64;
            }
            let prob = symbols.iter().fold(1.0, |acc, &s| acc * dist.prob(s));
            let word = Word::new(symbols).expect("length is positive");
            let stab = group
                .elements()
                .iter()
                .filter(|g| g.fixes_word(&word))
                .count();
            prob * model.log(stab as f64)
        })
        .collect();
    Ok(stable_sum(terms))
}

/// The three exponential bounds on the equivocation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremBounds {
    /// `log(2) R^L`
    pub lower: f64,
    /// `log|K| · |K_max| · R^L`, counting maximal keys.
    pub upper_paper: f64,
    /// `log|K| · sum over distinct maximal fixed sets F of P(F)^L`.
    pub upper_tight: f64,
}

pub fn theorem_bounds(model: &CipherModel, length: usize) -> Result<TheoremBounds> {
    check_length(length)?;
    let report = model.maximal_keys();
    if report.degenerate || report.rate == 0.0 {
        return Ok(TheoremBounds {
            lower: 0.0,
            upper_paper: 0.0,
            upper_tight: 0.0,
        });
    }
    let rate_pow = guarded_pow(report.rate, length);
    let log_order = model.log(report.order as f64);
    let tight = stable_sum(
        report
            .fixed_set_probs
            .iter()
            .map(|&p| guarded_pow(p, length))
            .collect(),
    );
    Ok(TheoremBounds {
        lower: model.log(2.0) * rate_pow,
        upper_paper: log_order * report.n_maximal_keys() as f64 * rate_pow,
        upper_tight: log_order * tight,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Averages `log |St(m)|` over i.i.d. messages.
///
/// Batch `b` of [`MC_BATCH`] samples draws from ChaCha8 stream `b` seeded
/// with `seed`, and batch statistics are merged in batch order, so the
/// output does not depend on the number of worker threads.
pub fn monte_carlo_equivocation(
    model: &CipherModel,
    length: usize,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_length(length)?;
    if samples < 100 {
        return Err(Error::TooFewSamples(samples));
    }
    let group = model.group();
    let degree = group.degree();
    let sampler = WeightedIndex::new(model.distribution().probs())
        .map_err(|e| Error::InvalidDistribution(e.to_string()))?;
    let batches = samples.div_ceil(MC_BATCH);
    let stats: Vec<RunningStats> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let count = MC_BATCH.min(samples - b * MC_BATCH);
            let mut cache: HashMap<SupportKey, f64> = HashMap::new();
            let mut stats = RunningStats::default();
            for _ in 0..count {
                let key = SupportKey::new(degree, (0..length).map(|_| sampler.sample(&mut rng)));
                let value = *cache
                    .entry(key)
                    .or_insert_with_key(|key| model.log(group.stabilizer_by_key(key).len() as f64));
                stats.push(value);
            }
            stats
        })
        .collect();
    let mut total = RunningStats::default();
    stats.iter().for_each(|s| total.merge(s));
    Ok(McEstimate {
        mean: total.mean(),
        stderr: total.stderr(),
        samples,
    })
}

/// Residual key uncertainty for one observed plaintext/ciphertext pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairEntropy {
    /// `keys` equiprobable keys map the plaintext to the ciphertext.
    Consistent { keys: usize, entropy: f64 },
    /// No key maps the plaintext to the ciphertext; the pair has probability zero.
    Inconsistent,
}

/// `H(K | m, c) = log |{k : T_k(m) = c}|`, which by the coset structure
/// equals `log |St(m)|` whenever one consistent key exists.
pub fn message_key_entropy(
    model: &CipherModel,
    plain: &Word,
    cipher: &Word,
) -> Result<PairEntropy> {
    if plain.len() != cipher.len() {
        return Err(Error::LengthMismatch {
            plain: plain.len(),
            cipher: cipher.len(),
        });
    }
    let group = model.group();
    plain.check_alphabet(group.degree())?;
    cipher.check_alphabet(group.degree())?;
    let Some(pairs) = crate::attack::partial_map(plain, cipher) else {
        return Ok(PairEntropy::Inconsistent);
    };
    let found = group
        .elements()
        .iter()
        .any(|g| pairs.iter().all(|&(x, y)| g.apply(x) == y));
    if !found {
        return Ok(PairEntropy::Inconsistent);
    }
    let keys = group.word_stabilizer(plain)?.len();
    Ok(PairEntropy::Consistent {
        keys,
        entropy: model.log(keys as f64),
    })
}

/// One row of an equivocation curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivocationReport {
    /// Message length in cipher symbols.
    pub length: usize,
    /// Message length in source letters (differs for block alphabets).
    pub letters: usize,
    pub exact: Option<f64>,
    pub lower_bound: f64,
    pub upper_bound_paper: f64,
    pub upper_bound_tight: f64,
    pub mc: Option<McEstimate>,
    #[serde(rename = "R")]
    pub rate: f64,
}

/// Computes one report per length (in cipher symbols). The exact value is
/// left out when it exceeds the subset cap and a Monte Carlo configuration
/// is given; without one that is an error.
pub fn equivocation_curve(
    model: &CipherModel,
    lengths: &[usize],
    mc: Option<McConfig>,
) -> Result<Vec<EquivocationReport>> {
    let exact_ok = match model.lattice() {
        Ok(_) => true,
        Err(e @ Error::ExactTooLarge { .. }) => {
            if mc.is_none() {
                return Err(e);
            }
            false
        }
        Err(e) => return Err(e),
    };
    let block = model.spec().block_len();
    lengths
        .iter()
        .map(|&length| {
            let bounds = theorem_bounds(model, length)?;
            let exact = if exact_ok {
                Some(exact_equivocation(model, length)?)
            } else {
                None
            };
            let mc = mc
                .map(|c| monte_carlo_equivocation(model, length, c.samples, c.seed))
                .transpose()?;
            Ok(EquivocationReport {
                length,
                letters: length * block,
                exact,
                lower_bound: bounds.lower,
                upper_bound_paper: bounds.upper_paper,
                upper_bound_tight: bounds.upper_tight,
                mc,
                rate: model.maximal_keys().rate,
            })
        })
        .collect()
}
