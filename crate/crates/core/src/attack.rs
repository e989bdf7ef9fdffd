//! Known-plaintext attack: the keys consistent with an intercepted
//! plaintext/ciphertext pair form a left coset of the plaintext's
//! stabilizer, so the residual uncertainty is `log |St(m)|`.

use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::RunningStats;
use crate::error::{Error, Result};
use crate::model::CipherModel;
use crate::perm::{Permutation, Word};

/// Trials simulated per work item; statistics merge in chunk order.
const TRIAL_CHUNK: usize = 1024;

/// The distinct `(plain symbol, cipher symbol)` pairs of `m -> c`, or `None`
/// if no bijection can realize them. Pairs are sorted by plain symbol.
pub(crate) fn partial_map(plain: &Word, cipher: &Word) -> Option<Vec<(usize, usize)>> {
    let mut pairs: Vec<(usize, usize)> = plain
        .symbols()
        .iter()
        .copied()
        .zip(cipher.symbols().iter().copied())
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    let forward_ok = pairs.windows(2).all(|w| w[0].0 != w[1].0);
    let mut images: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    images.sort_unstable();
    let injective = images.windows(2).all(|w| w[0] != w[1]);
    (forward_ok && injective).then_some(pairs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackOutcome {
    pub consistent_count: usize,
    /// Ascending element indices of every consistent key.
    pub consistent: Vec<usize>,
    /// Smallest consistent element index.
    pub representative_index: Option<usize>,
    pub representative: Option<Permutation>,
    pub stabilizer_size: usize,
    /// `log(consistent_count)`, or 0 when no key is consistent.
    pub residual_entropy: f64,
    pub resolved: bool,
}

/// Finds every key `k` with `T_k(plain) = cipher`.
pub fn consistent_keys(model: &CipherModel, plain: &Word, cipher: &Word) -> Result<AttackOutcome> {
    if plain.len() != cipher.len() {
        return Err(Error::LengthMismatch {
            plain: plain.len(),
            cipher: cipher.len(),
        });
    }
    let group = model.group();
    plain.check_alphabet(group.degree())?;
    cipher.check_alphabet(group.degree())?;
    let stabilizer_size = group.word_stabilizer(plain)?.len();
    let consistent: Vec<usize> = match partial_map(plain, cipher) {
        None => Vec::new(),
        Some(pairs) => group
            .elements()
            .iter()
            .enumerate()
            .filter(|(_, g)| pairs.iter().all(|&(x, y)| g.apply(x) == y))
            .map(|(i, _)| i)
            .collect(),
    };
    let count = consistent.len();
    debug_assert!(count == 0 || count == stabilizer_size);
    let representative_index = consistent.first().copied();
    Ok(AttackOutcome {
        consistent_count: count,
        representative: representative_index.map(|i| group.element(i).clone()),
        representative_index,
        consistent,
        stabilizer_size,
        residual_entropy: if count > 0 {
            model.log(count as f64)
        } else {
            0.0
        },
        resolved: count == 1,
    })
}

/// Residual entropy after each prefix `1..=max_length` for one simulated
/// interception. Trial `t` uses ChaCha8 stream `t` seeded with `seed`.
pub fn simulate_trial(
    model: &CipherModel,
    max_length: usize,
    seed: u64,
    trial: u64,
) -> Result<Vec<f64>> {
    let sampler = WeightedIndex::new(model.distribution().probs())
        .map_err(|e| Error::InvalidDistribution(e.to_string()))?;
    Ok(run_trial(model, &sampler, max_length, seed, trial))
}

fn run_trial(
    model: &CipherModel,
    sampler: &WeightedIndex<f64>,
    max_length: usize,
    seed: u64,
    trial: u64,
) -> Vec<f64> {
    let group = model.group();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let key = group.element(rng.random_range(0..group.order()));
    let mut candidates: Vec<usize> = (0..group.order()).collect();
    (0..max_length)
        .map(|_| {
            let m = sampler.sample(&mut rng);
            let c = key.apply(m);
            candidates.retain(|&k| group.element(k).apply(m) == c);
            model.log(candidates.len() as f64)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    /// Intercepted length in cipher symbols.
    pub length: usize,
    pub mean_residual_entropy: f64,
    pub stderr: f64,
    pub frac_resolved: f64,
    pub trials: usize,
}

/// Simulates `trials` known-plaintext interceptions of up to `max_length`
/// symbols and averages the residual entropy per prefix length.
pub fn simulate_attack(
    model: &CipherModel,
    max_length: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<TrajectoryRow>> {
    if max_length == 0 {
        return Err(Error::ZeroLength);
    }
    if trials == 0 {
        return Err(Error::InvalidFamily(
            "at least one trial is required".into(),
        ));
    }
    let sampler = WeightedIndex::new(model.distribution().probs())
        .map_err(|e| Error::InvalidDistribution(e.to_string()))?;
    let chunks = trials.div_ceil(TRIAL_CHUNK);
    let partial: Vec<(Vec<RunningStats>, Vec<usize>)> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut stats = vec![RunningStats::default(); max_length];
            let mut resolved = vec![0usize; max_length];
            let end = ((chunk + 1) * TRIAL_CHUNK).min(trials);
            for trial in chunk * TRIAL_CHUNK..end {
                let path = run_trial(model, &sampler, max_length, seed, trial as u64);
                for (l, h) in path.into_iter().enumerate() {
                    stats[l].push(h);
                    if h == 0.0 {
                        resolved[l] += 1;
                    }
                }
            }
            (stats, resolved)
        })
        .collect();
    let mut stats = vec![RunningStats::default(); max_length];
    let mut resolved = vec![0usize; max_length];
    for (s, r) in &partial {
        for l in 0..max_length {
            stats[l].merge(&s[l]);
            resolved[l] += r[l];
        }
    }
    Ok((0..max_length)
        .map(|l| TrajectoryRow {
            length: l + 1,
            mean_residual_entropy: stats[l].mean(),
            stderr: stats[l].stderr(),
            frac_resolved: resolved[l] as f64 / trials as f64,
            trials,
        })
        .collect())
}

/// Parses a pair file: two data lines of 0-based symbols separated by
/// whitespace or commas; blank lines and lines starting with `#` are skipped.
pub fn parse_pair_text(text: &str, alphabet: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut rows: Vec<(usize, Vec<usize>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let symbols = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                let s: usize = t.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("invalid symbol {t:?}"),
                })?;
                if s >= alphabet {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("symbol {s} out of range for alphabet of size {alphabet}"),
                    });
                }
                Ok(s)
            })
            .collect::<Result<Vec<_>>>()?;
        if symbols.is_empty() {
            continue;
        }
        rows.push((line_no, symbols));
    }
    match rows.len() {
        2 => {}
        0 | 1 => {
            return Err(Error::Parse {
                line: text.lines().count(),
                message: "expected a plaintext line and a ciphertext line".into(),
            })
        }
        _ => {
            return Err(Error::Parse {
                line: rows[2].0,
                message: "more than two data lines".into(),
            })
        }
    }
    let (_, cipher) = rows.pop().expect("two rows");
    let (_, plain) = rows.pop().expect("two rows");
    if plain.len() != cipher.len() {
        return Err(Error::LengthMismatch {
            plain: plain.len(),
            cipher: cipher.len(),
        });
    }
    Ok((plain, cipher))
}

pub fn load_pair_file(path: &Path, alphabet: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let text = std::fs::read_to_string(path)?;
    parse_pair_text(&text, alphabet)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivocation::exact_equivocation;
    use crate::model::{build_family, GroupFamilySpec};
    use crate::SymbolDistribution;

    fn w(v: &[usize]) -> Word {
        Word::new(v.to_vec()).unwrap()
    }

    fn s3() -> CipherModel {
        build_family(
            &GroupFamilySpec::Symmetric { n: 3 },
            &SymbolDistribution::uniform(3),
        )
        .unwrap()
    }

    #[test]
    fn consistent_key_examples() {
        let m = s3();
        let out = consistent_keys(&m, &w(&[0, 1, 0]), &w(&[1, 0, 1])).unwrap();
        assert_eq!(out.consistent_count, 1);
        assert_eq!(out.representative.unwrap().images(), &[1, 0, 2]);
        assert_eq!(out.residual_entropy, 0.0);
        assert!(out.resolved);

        let out = consistent_keys(&m, &w(&[0, 0]), &w(&[1, 1])).unwrap();
        assert_eq!(out.consistent_count, 2);
        assert_eq!(out.stabilizer_size, 2);
        assert_eq!(out.residual_entropy, 1.0);
        assert!(!out.resolved);

        let af = build_family(
            &GroupFamilySpec::Affine { q: 5 },
            &SymbolDistribution::uniform(5),
        )
        .unwrap();
        let out = consistent_keys(&af, &w(&[0, 1]), &w(&[1, 3])).unwrap();
        assert_eq!(out.consistent_count, 1);
        let expected = crate::FiniteField::new(5)
            .unwrap()
            .affine_permutation(2, 1)
            .unwrap();
        assert_eq!(out.representative, Some(expected));
    }

    #[test]
    fn inconsistent_pairs() {
        let m = s3();
        let out = consistent_keys(&m, &w(&[0, 1]), &w(&[0, 0])).unwrap();
        assert_eq!(out.consistent_count, 0);
        assert!(out.representative.is_none());
        let out = consistent_keys(&m, &w(&[0, 0]), &w(&[0, 1])).unwrap();
        assert_eq!(out.consistent_count, 0);
        assert!(matches!(
            consistent_keys(&m, &w(&[0]), &w(&[0, 1])),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn coset_law_and_ciphertext_independence() {
        let models = [
            s3(),
            build_family(
                &GroupFamilySpec::Alternating { n: 5 },
                &SymbolDistribution::uniform(5),
            )
            .unwrap(),
            build_family(
                &GroupFamilySpec::Affine { q: 7 },
                &SymbolDistribution::uniform(7),
            )
            .unwrap(),
        ];
        let plains = [vec![0], vec![0, 0, 1], vec![2, 1], vec![1, 2, 3, 1]];
        for model in &models {
            let group = model.group();
            for p in &plains {
                let m = w(p);
                if m.check_alphabet(group.degree()).is_err() {
                    continue;
                }
                let stab = group.word_stabilizer(&m).unwrap();
                for key in group.elements() {
                    let c = key.apply_word(&m).unwrap();
                    let out = consistent_keys(model, &m, &c).unwrap();
                    assert_eq!(out.consistent_count, stab.len());
                    let rep = out.representative.clone().unwrap();
                    let mut coset: Vec<usize> = stab
                        .iter()
                        .map(|&h| {
                            group
                                .index_of(&rep.compose(group.element(h)).unwrap())
                                .unwrap()
                        })
                        .collect();
                    coset.sort_unstable();
                    assert_eq!(coset, out.consistent);
                    assert!(group
                        .left_coset_check(&out.consistent, out.representative_index.unwrap())
                        .unwrap());
                }
            }
        }
    }

    #[test]
    fn trajectories_never_increase() {
        let m = build_family(
            &GroupFamilySpec::Symmetric { n: 4 },
            &SymbolDistribution::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap(),
        )
        .unwrap();
        for trial in 0..200 {
            let path = simulate_trial(&m, 8, 99, trial).unwrap();
            assert!(path.windows(2).all(|p| p[1] <= p[0]));
        }
    }

    #[test]
    fn trivial_group_always_resolved() {
        let m = build_family(
            &GroupFamilySpec::Symmetric { n: 1 },
            &SymbolDistribution::uniform(1),
        )
        .unwrap();
        let rows = simulate_attack(&m, 3, 50, 1).unwrap();
        for r in rows {
            assert_eq!(r.mean_residual_entropy, 0.0);
            assert_eq!(r.frac_resolved, 1.0);
        }
    }

    #[test]
    fn simulation_tracks_exact_equivocation() {
        let m = s3();
        let rows = simulate_attack(&m, 3, 20_000, 4).unwrap();
        for r in &rows {
            let exact = exact_equivocation(&m, r.length).unwrap();
            assert!((r.mean_residual_entropy - exact).abs() <= 4.0 * r.stderr + 1e-12);
        }
        assert_eq!(rows, simulate_attack(&m, 3, 20_000, 4).unwrap());
    }

    #[test]
    fn pair_files() {
        assert_eq!(
            parse_pair_text("0 1 2\n1 0 2\n", 3).unwrap(),
            (vec![0, 1, 2], vec![1, 0, 2])
        );
        assert_eq!(
            parse_pair_text("# intercepted\n0, 1, 1\n\n2, 0, 0\n", 3).unwrap(),
            (vec![0, 1, 1], vec![2, 0, 0])
        );
        assert!(matches!(
            parse_pair_text("0 1 2\n1 0\n", 3),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            parse_pair_text("0 1\n9 0\n", 3),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_pair_text("0 x\n1 0\n", 3),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(parse_pair_text("0 1\n", 3).is_err());
        assert!(parse_pair_text("0\n1\n2\n", 3).is_err());

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pair.txt");
        std::fs::write(&path, "0 0\n1 1\n").unwrap();
        assert_eq!(load_pair_file(&path, 3).unwrap(), (vec![0, 0], vec![1, 1]));
        assert!(matches!(
            load_pair_file(&dir.path().join("missing"), 3),
            Err(Error::Io(_))
        ));
    }
}
