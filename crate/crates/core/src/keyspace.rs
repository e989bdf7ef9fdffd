//! Fixed-set structure of a key space: maximal keys, their probabilities,
//! the rate `R`, and the closed-form profiles of the named families.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{stable_sum, SymbolDistribution};
use crate::error::{Error, Result};
use crate::group::GeneratedGroup;
use crate::model::GroupFamilySpec;

/// Maximal keys of a group under a source distribution.
///
/// A non-identity key is maximal when no other non-identity key has a
/// strictly larger fixed set. Keys with equal fixed sets are all maximal
/// together, so both the key count and the count of distinct maximal fixed
/// sets are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximalKeyReport {
    pub order: usize,
    /// The group is trivial and has no non-identity keys.
    pub degenerate: bool,
    /// Ascending element indices.
    pub maximal_key_indices: Vec<usize>,
    /// `P_tau` for each entry of `maximal_key_indices`.
    pub maximal_key_probs: Vec<f64>,
    /// Distinct maximal fixed sets, each sorted, listed in lexicographic order.
    pub maximal_fixed_sets: Vec<Vec<usize>>,
    /// Probability mass of each entry of `maximal_fixed_sets`.
    pub fixed_set_probs: Vec<f64>,
    /// Maximal keys attaining the rate.
    pub argmax_keys: Vec<usize>,
    pub rate: f64,
}

impl MaximalKeyReport {
    pub fn n_maximal_keys(&self) -> usize {
        self.maximal_key_indices.len()
    }

    pub fn n_maximal_fixed_sets(&self) -> usize {
        self.maximal_fixed_sets.len()
    }

    pub fn to_json(&self) -> KeyspaceReportJson {
        KeyspaceReportJson {
            rate: self.rate,
            order: self.order,
            n_maximal_keys: self.n_maximal_keys(),
            n_maximal_fixed_sets: self.n_maximal_fixed_sets(),
            maximal_fixed_sets: self.maximal_fixed_sets.clone(),
            argmax_keys: self.argmax_keys.clone(),
        }
    }
}

/// Wire form of [`MaximalKeyReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyspaceReportJson {
    #[serde(rename = "R")]
    pub rate: f64,
    pub order: usize,
    pub n_maximal_keys: usize,
    pub n_maximal_fixed_sets: usize,
    pub maximal_fixed_sets: Vec<Vec<usize>>,
    pub argmax_keys: Vec<usize>,
}

fn fixed_bits(degree: usize, images: &[usize]) -> FixedBitSet {
    let mut bits = FixedBitSet::with_capacity(degree);
    for (i, &j) in images.iter().enumerate() {
        if i == j {
            bits.insert(i);
        }
    }
    bits
}

/// Groups non-identity keys by fixed set; key lists come back ascending.
fn keys_by_fixed_set(group: &GeneratedGroup) -> HashMap<FixedBitSet, Vec<usize>> {
    let degree = group.degree();
    let identity = group.identity_index();
    let mut merged = group
        .elements()
        .par_iter()
        .enumerate()
        .filter(|(i, _)| *i != identity)
        .fold(
            HashMap::new,
            |mut acc: HashMap<FixedBitSet, Vec<usize>>, (i, g)| {
                acc.entry(fixed_bits(degree, g.images()))
                    .or_default()
                    .push(i);
                acc
            },
        )
        .reduce(HashMap::new, |mut a, b| {
            for (k, mut v) in b {
                a.entry(k).or_default().append(&mut v);
            }
            a
        });
    for keys in merged.values_mut() {
        keys.sort_unstable();
    }
    merged
}

pub fn maximal_keys(group: &GeneratedGroup, dist: &SymbolDistribution) -> MaximalKeyReport {
    assert_eq!(
        group.degree(),
        dist.len(),
        "distribution must cover the group's alphabet"
    );
    let by_set = keys_by_fixed_set(group);
    if by_set.is_empty() {
        return MaximalKeyReport {
            order: group.order(),
            degenerate: true,
            maximal_key_indices: Vec::new(),
            maximal_key_probs: Vec::new(),
            maximal_fixed_sets: Vec::new(),
            fixed_set_probs: Vec::new(),
            argmax_keys: Vec::new(),
            rate: 0.0,
        };
    }

    let mut sets: Vec<(FixedBitSet, Vec<usize>)> = by_set.into_iter().collect();
    // larger sets first; ties broken by content for determinism
    sets.sort_by(|a, b| {
        b.0.count_ones(..)
            .cmp(&a.0.count_ones(..))
            .then_with(|| a.0.ones().cmp(b.0.ones()))
    });
    let mut maximal: Vec<(FixedBitSet, Vec<usize>)> = Vec::new();
    for (set, keys) in sets {
        // every strict superset was seen earlier, and lies under some maximal set
        let covered = maximal.iter().any(|(m, _)| set.is_subset(m) && set != *m);
        if !covered {
            maximal.push((set, keys));
        }
    }

    let mut fixed: Vec<(Vec<usize>, f64, Vec<usize>)> = maximal
        .into_iter()
        .map(|(set, keys)| {
            let symbols: Vec<usize> = set.ones().collect();
            let prob = dist.mass(symbols.iter().copied());
            (symbols, prob, keys)
        })
        .collect();
    fixed.sort_by(|a, b| a.0.cmp(&b.0));

    let rate = fixed.iter().map(|f| f.1).fold(0.0, f64::max);
    let mut keyed: Vec<(usize, f64)> = fixed
        .iter()
        .flat_map(|(_, p, keys)| keys.iter().map(move |&k| (k, *p)))
        .collect();
    keyed.sort_by_key(|&(k, _)| k);
    let argmax_keys = keyed
        .iter()
        .filter(|&&(_, p)| p == rate)
        .map(|&(k, _)| k)
        .collect();

    MaximalKeyReport {
        order: group.order(),
        degenerate: false,
        maximal_key_indices: keyed.iter().map(|&(k, _)| k).collect(),
        maximal_key_probs: keyed.iter().map(|&(_, p)| p).collect(),
        fixed_set_probs: fixed.iter().map(|f| f.1).collect(),
        maximal_fixed_sets: fixed.into_iter().map(|f| f.0).collect(),
        argmax_keys,
        rate,
    }
}

/// The rate `R`: the largest probability mass of a maximal fixed set.
pub fn rate(group: &GeneratedGroup, dist: &SymbolDistribution) -> f64 {
    maximal_keys(group, dist).rate
}

/// Closed-form key-space profile of a named family, computed without
/// enumerating the group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormProfile {
    #[serde(rename = "R")]
    pub rate: f64,
    pub order: u128,
    /// The maximal-key count as stated for the family. For the alternating
    /// group this is `C(N,3)`, which counts distinct maximal fixed sets.
    pub stated_n_maximal: u128,
    pub n_maximal_keys: u128,
    pub n_maximal_fixed_sets: u128,
}

fn factorial(n: usize) -> Result<u128> {
    (1..=n as u128)
        .try_fold(1u128, |acc, k| acc.checked_mul(k))
        .ok_or_else(|| Error::InvalidFamily(format!("{n}! overflows")))
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

/// Mass of the `keep` most probable symbols.
fn top_mass(dist: &SymbolDistribution, keep: usize) -> f64 {
    let mut probs = dist.probs().to_vec();
    probs.sort_by(|a, b| b.total_cmp(a));
    probs.truncate(keep);
    stable_sum(probs)
}

/// Closed-form `(R, |K|, |K_max|)` for the four named families.
pub fn closed_form_profile(
    spec: &GroupFamilySpec,
    dist: &SymbolDistribution,
) -> Result<ClosedFormProfile> {
    let letters = spec.source_alphabet()?;
    if spec.is_named_family() && dist.len() != letters {
        return Err(Error::AlphabetMismatch {
            expected: letters,
            found: dist.len(),
        });
    }
    let profile = match *spec {
        GroupFamilySpec::Symmetric { n } => {
            let pairs = if n >= 2 { binomial(n, 2) } else { 0 };
            ClosedFormProfile {
                rate: if n >= 2 { top_mass(dist, n - 2) } else { 0.0 },
                order: factorial(n)?,
                stated_n_maximal: pairs,
                n_maximal_keys: pairs,
                n_maximal_fixed_sets: pairs,
            }
        }
        GroupFamilySpec::Alternating { n } => {
            let triples = binomial(n, 3);
            ClosedFormProfile {
                rate: if n >= 3 { top_mass(dist, n - 3) } else { 0.0 },
                order: if n >= 2 { factorial(n)? / 2 } else { 1 },
                stated_n_maximal: triples,
                // each 3-subset carries two 3-cycles with the same fixed set
                n_maximal_keys: 2 * triples,
                n_maximal_fixed_sets: triples,
            }
        }
        GroupFamilySpec::Position { d, .. } => {
            let pairs = binomial(d, 2);
            let squares: Vec<f64> = dist.probs().iter().map(|p| p * p).collect();
            ClosedFormProfile {
                rate: if d >= 2 { stable_sum(squares) } else { 0.0 },
                order: factorial(d)?,
                stated_n_maximal: pairs,
                n_maximal_keys: pairs,
                n_maximal_fixed_sets: pairs,
            }
        }
        GroupFamilySpec::Affine { q } => {
            let q128 = q as u128;
            let stated = q128 * q128.saturating_sub(2);
            if q == 2 {
                // x+1 is the only non-identity key and fixes nothing
                ClosedFormProfile {
                    rate: 0.0,
                    order: 2,
                    stated_n_maximal: stated,
                    n_maximal_keys: 1,
                    n_maximal_fixed_sets: 1,
                }
            } else {
                ClosedFormProfile {
                    rate: dist.probs().iter().copied().fold(0.0, f64::max),
                    order: q128 * (q128 - 1),
                    stated_n_maximal: stated,
                    n_maximal_keys: stated,
                    n_maximal_fixed_sets: q128,
                }
            }
        }
        GroupFamilySpec::Generators { .. } => return Err(Error::NoClosedForm),
    };
    Ok(profile)
}

/// Compares an enumerated report against the closed form: rate, order and
/// both maximal counts must agree exactly.
pub fn profile_matches(report: &MaximalKeyReport, profile: &ClosedFormProfile) -> bool {
    report.rate == profile.rate
        && report.order as u128 == profile.order
        && report.n_maximal_keys() as u128 == profile.n_maximal_keys
        && report.n_maximal_fixed_sets() as u128 == profile.n_maximal_fixed_sets
}
