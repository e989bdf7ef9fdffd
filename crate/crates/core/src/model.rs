//! Key-space families and the cipher model every analysis consumes.

use std::sync::OnceLock;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::dist::{block_alphabet, SymbolDistribution};
use crate::equivocation::SupportLattice;
use crate::error::{Error, Result};
use crate::field::FiniteField;
use crate::group::{generate, GeneratedGroup};
use crate::keyspace::{maximal_keys, MaximalKeyReport};
use crate::perm::{Permutation, Word};

/// Size limits for explicit enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub max_order: usize,
    pub max_alphabet: usize,
    /// Upper limit on subset evaluations in the exact equivocation.
    pub max_exact_subsets: u128,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_order: 1_000_000,
            max_alphabet: 4096,
            max_exact_subsets: 1 << 24,
        }
    }
}

/// Which key space to build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum GroupFamilySpec {
    /// All permutations of `n` symbols.
    Symmetric { n: usize },
    /// Even permutations of `n` symbols.
    Alternating { n: usize },
    /// `x -> a x + b` over GF(q), `a != 0`.
    Affine { q: usize },
    /// Position permutations of blocks of `d` letters over an alphabet of
    /// size `base_n`, acting on the `base_n^d` blocks.
    Position { d: usize, base_n: usize },
    /// Closure of explicit generators.
    Generators {
        #[serde(default, alias = "n", skip_serializing_if = "Option::is_none")]
        degree: Option<usize>,
        generators: Vec<Permutation>,
    },
}

impl GroupFamilySpec {
    /// Size of the letter alphabet the source distribution is defined on.
    pub fn source_alphabet(&self) -> Result<usize> {
        match self {
            GroupFamilySpec::Symmetric { n } | GroupFamilySpec::Alternating { n } => Ok(*n),
            GroupFamilySpec::Affine { q } => Ok(*q),
            GroupFamilySpec::Position { base_n, .. } => Ok(*base_n),
            GroupFamilySpec::Generators { degree, generators } => generators
                .first()
                .map(|g| g.degree())
                .or(*degree)
                .ok_or(Error::NoGenerators),
        }
    }

    /// Letters per cipher symbol: `d` for position permutations, else 1.
    pub fn block_len(&self) -> usize {
        match self {
            GroupFamilySpec::Position { d, .. } => *d,
            _ => 1,
        }
    }

    pub fn is_named_family(&self) -> bool {
        !matches!(self, GroupFamilySpec::Generators { .. })
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: usize| {
            if v == 0 {
                Err(Error::InvalidFamily(format!("{name} must be positive")))
            } else {
                Ok(())
            }
        };
        match self {
            GroupFamilySpec::Symmetric { n } | GroupFamilySpec::Alternating { n } => {
                positive("n", *n)
            }
            GroupFamilySpec::Affine { q } => positive("q", *q),
            GroupFamilySpec::Position { d, base_n } => {
                positive("d", *d)?;
                if *base_n < 2 {
                    return Err(Error::InvalidFamily("base_n must be at least 2".into()));
                }
                Ok(())
            }
            GroupFamilySpec::Generators { degree, generators } => {
                if let (Some(d), Some(g)) = (degree, generators.first()) {
                    if *d != g.degree() {
                        return Err(Error::AlphabetMismatch {
                            expected: *d,
                            found: g.degree(),
                        });
                    }
                }
                Ok(())
            }
        }
    }
}

/// Logarithm base for entropies; bits by default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogBase(f64);

impl LogBase {
    pub const BITS: LogBase = LogBase(2.0);

    pub fn new(base: f64) -> Result<Self> {
        if base.is_finite() && base > 0.0 && base != 1.0 {
            Ok(LogBase(base))
        } else {
            Err(Error::InvalidLogBase(base))
        }
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    pub fn log(&self, x: f64) -> f64 {
        if self.0 == 2.0 {
            x.log2()
        } else {
            x.ln() / self.0.ln()
        }
    }
}

impl Default for LogBase {
    fn default() -> Self {
        LogBase::BITS
    }
}

fn checked_product(factors: impl IntoIterator<Item = usize>, cap: usize) -> Result<usize> {
    let mut acc: usize = 1;
    for f in factors {
        acc = match acc.checked_mul(f) {
            Some(v) if v <= cap => v,
            _ => {
                return Err(Error::OrderCapExceeded {
                    partial: acc.saturating_mul(f),
                    cap,
                })
            }
        };
    }
    Ok(acc)
}

fn check_alphabet(size: usize, caps: &Caps) -> Result<()> {
    if size > caps.max_alphabet {
        Err(Error::AlphabetCapExceeded {
            size,
            cap: caps.max_alphabet,
        })
    } else {
        Ok(())
    }
}

fn symmetric_group(n: usize, caps: &Caps) -> Result<GeneratedGroup> {
    check_alphabet(n, caps)?;
    checked_product(1..=n, caps.max_order)?;
    let elements: Vec<Permutation> = (0..n)
        .permutations(n)
        .map(Permutation::from_images_unchecked)
        .collect();
    let mut generators = Vec::new();
    if n >= 2 {
        generators.push(Permutation::from_cycles(n, &[vec![0, 1]])?);
        if n >= 3 {
            generators.push(Permutation::from_cycles(n, &[(0..n).collect()])?);
        }
    }
    Ok(GeneratedGroup::from_elements(n, elements, generators))
}

fn alternating_group(n: usize, caps: &Caps) -> Result<GeneratedGroup> {
    check_alphabet(n, caps)?;
    let order = checked_product(1..=n, usize::MAX)? / if n >= 2 { 2 } else { 1 };
    if order > caps.max_order {
        return Err(Error::OrderCapExceeded {
            partial: order,
            cap: caps.max_order,
        });
    }
    let elements: Vec<Permutation> = (0..n)
        .permutations(n)
        .map(Permutation::from_images_unchecked)
        .filter(Permutation::is_even)
        .collect();
    let generators = (2..n)
        .map(|i| Permutation::from_cycles(n, &[vec![0, 1, i]]))
        .collect::<Result<Vec<_>>>()?;
    Ok(GeneratedGroup::from_elements(n, elements, generators))
}

fn affine_group(q: usize, caps: &Caps) -> Result<GeneratedGroup> {
    let field = FiniteField::new(q)?;
    check_alphabet(q, caps)?;
    checked_product([q, q - 1], caps.max_order)?;
    let mut elements = Vec::with_capacity(q * (q - 1));
    for a in 1..q {
        for b in 0..q {
            elements.push(field.affine_permutation(a, b)?);
        }
    }
    elements.sort();
    let mut generators = Vec::new();
    let g = field.primitive_element();
    if g != 1 {
        generators.push(field.affine_permutation(g, 0)?);
    }
    generators.push(field.affine_permutation(1, 1)?);
    Ok(GeneratedGroup::from_elements(q, elements, generators))
}

/// Block permutation `m_1..m_d -> m_pi(1)..m_pi(d)` on big-endian block indices.
fn position_map(pi: &[usize], base_n: usize, size: usize) -> Permutation {
    let d = pi.len();
    let mut letters = vec![0usize; d];
    let images = (0..size)
        .map(|w| {
            let mut rest = w;
            for pos in (0..d).rev() {
                letters[pos] = rest % base_n;
                rest /= base_n;
            }
            pi.iter().fold(0, |acc, &src| acc * base_n + letters[src])
        })
        .collect();
    Permutation::from_images_unchecked(images)
}

fn position_group(d: usize, base_n: usize, caps: &Caps) -> Result<GeneratedGroup> {
    let size = block_alphabet(base_n, d, caps.max_alphabet)?;
    checked_product(1..=d, caps.max_order)?;
    let mut elements: Vec<Permutation> = (0..d)
        .permutations(d)
        .map(|pi| position_map(&pi, base_n, size))
        .collect();
    elements.sort();
    let generators = (0..d.saturating_sub(1))
        .map(|i| {
            let mut pi: Vec<usize> = (0..d).collect();
            pi.swap(i, i + 1);
            position_map(&pi, base_n, size)
        })
        .collect();
    Ok(GeneratedGroup::from_elements(size, elements, generators))
}

/// Enumerates the key space described by `spec`.
pub fn build_group(spec: &GroupFamilySpec, caps: &Caps) -> Result<GeneratedGroup> {
    spec.validate()?;
    match spec {
        GroupFamilySpec::Symmetric { n } => symmetric_group(*n, caps),
        GroupFamilySpec::Alternating { n } => alternating_group(*n, caps),
        GroupFamilySpec::Affine { q } => affine_group(*q, caps),
        GroupFamilySpec::Position { d, base_n } => position_group(*d, *base_n, caps),
        GroupFamilySpec::Generators { generators, .. } => {
            let g = generate(generators, caps.max_order)?;
            check_alphabet(g.degree(), caps)?;
            Ok(g)
        }
    }
}

/// Builds a model with default caps and bits as the entropy unit.
pub fn build_family(
    spec: &GroupFamilySpec,
    base_distribution: &SymbolDistribution,
) -> Result<CipherModel> {
    build_family_with(spec, base_distribution, LogBase::BITS, Caps::default())
}

pub fn build_family_with(
    spec: &GroupFamilySpec,
    base_distribution: &SymbolDistribution,
    log_base: LogBase,
    caps: Caps,
) -> Result<CipherModel> {
    spec.validate()?;
    let letters = spec.source_alphabet()?;
    if base_distribution.len() != letters {
        return Err(Error::AlphabetMismatch {
            expected: letters,
            found: base_distribution.len(),
        });
    }
    let group = build_group(spec, &caps)?;
    let distribution = match spec {
        GroupFamilySpec::Position { d, .. } => base_distribution.blockify(*d, caps.max_alphabet)?,
        _ => base_distribution.clone(),
    };
    Ok(CipherModel {
        spec: spec.clone(),
        group,
        distribution,
        base_distribution: base_distribution.clone(),
        log_base,
        caps,
        keyspace: OnceLock::new(),
        lattice: OnceLock::new(),
    })
}

/// A key space with its source distribution and entropy unit.
///
/// The keyspace report and the support lattice used by the exact
/// equivocation are computed lazily and cached.
#[derive(Debug)]
pub struct CipherModel {
    spec: GroupFamilySpec,
    group: GeneratedGroup,
    distribution: SymbolDistribution,
    base_distribution: SymbolDistribution,
    log_base: LogBase,
    caps: Caps,
    keyspace: OnceLock<MaximalKeyReport>,
    lattice: OnceLock<SupportLattice>,
}

impl CipherModel {
    /// Model over an arbitrary group; the distribution covers the group's degree.
    pub fn new(
        group: GeneratedGroup,
        distribution: SymbolDistribution,
        log_base: LogBase,
    ) -> Result<Self> {
        if distribution.len() != group.degree() {
            return Err(Error::AlphabetMismatch {
                expected: group.degree(),
                found: distribution.len(),
            });
        }
        Ok(CipherModel {
            spec: GroupFamilySpec::Generators {
                degree: Some(group.degree()),
                generators: group.generators().to_vec(),
            },
            group,
            base_distribution: distribution.clone(),
            distribution,
            log_base,
            caps: Caps::default(),
            keyspace: OnceLock::new(),
            lattice: OnceLock::new(),
        })
    }

    pub fn with_log_base(mut self, log_base: LogBase) -> Self {
        self.log_base = log_base;
        self
    }

    pub fn with_caps(mut self, caps: Caps) -> Self {
        self.caps = caps;
        self.lattice = OnceLock::new();
        self
    }

    pub fn spec(&self) -> &GroupFamilySpec {
        &self.spec
    }

    pub fn group(&self) -> &GeneratedGroup {
        &self.group
    }

    /// Distribution over the cipher alphabet (blocks for position models).
    pub fn distribution(&self) -> &SymbolDistribution {
        &self.distribution
    }

    /// Distribution over source letters, as supplied.
    pub fn base_distribution(&self) -> &SymbolDistribution {
        &self.base_distribution
    }

    pub fn log_base(&self) -> LogBase {
        self.log_base
    }

    pub fn caps(&self) -> &Caps {
        &self.caps
    }

    pub fn degree(&self) -> usize {
        self.group.degree()
    }

    pub fn log(&self, x: f64) -> f64 {
        self.log_base.log(x)
    }

    pub fn maximal_keys(&self) -> &MaximalKeyReport {
        self.keyspace
            .get_or_init(|| maximal_keys(&self.group, &self.distribution))
    }

    pub(crate) fn lattice(&self) -> Result<&SupportLattice> {
        if let Some(l) = self.lattice.get() {
            return Ok(l);
        }
        let built = SupportLattice::build(self)?;
        Ok(self.lattice.get_or_init(|| built))
    }

    /// Converts a message length in source letters to cipher symbols.
    pub fn symbols_for_letters(&self, letters: usize) -> Result<usize> {
        let block = self.spec.block_len();
        if !letters.is_multiple_of(block) {
            return Err(Error::NotBlockAligned {
                length: letters,
                block,
            });
        }
        Ok(letters / block)
    }

    /// Groups a letter sequence into cipher symbols (big-endian block indices
    /// for position models).
    pub fn encode_letters(&self, letters: &[usize]) -> Result<Word> {
        let base = self.base_distribution.len();
        if let Some(&symbol) = letters.iter().find(|&&s| s >= base) {
            return Err(Error::SymbolOutOfRange {
                symbol,
                alphabet: base,
            });
        }
        let block = self.spec.block_len();
        self.symbols_for_letters(letters.len())?;
        Word::new(
            letters
                .chunks(block)
                .map(|c| c.iter().fold(0, |acc, &m| acc * base + m))
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn uniform(n: usize) -> SymbolDistribution {
        SymbolDistribution::uniform(n)
    }

    #[test]
    fn family_orders() {
        let s3 = build_family(&GroupFamilySpec::Symmetric { n: 3 }, &uniform(3)).unwrap();
        assert_eq!((s3.group().order(), s3.degree()), (6, 3));
        let a5 = build_family(&GroupFamilySpec::Alternating { n: 5 }, &uniform(5)).unwrap();
        assert_eq!(a5.group().order(), 60);
        let af5 = build_family(&GroupFamilySpec::Affine { q: 5 }, &uniform(5)).unwrap();
        assert_eq!(af5.group().order(), 20);
        let af8 = build_family(&GroupFamilySpec::Affine { q: 8 }, &uniform(8)).unwrap();
        assert_eq!(af8.group().order(), 56);
    }

    #[test]
    fn position_two_by_two() {
        let spec = GroupFamilySpec::Position { d: 2, base_n: 2 };
        let m = build_family(&spec, &uniform(2)).unwrap();
        assert_eq!((m.degree(), m.group().order()), (4, 2));
        // words 00,01,10,11 are indices 0..4; the swap exchanges 01 and 10
        assert!(m.group().element(0).is_identity());
        assert_eq!(m.group().element(1).images(), &[0, 2, 1, 3]);
        assert_eq!(m.distribution().probs(), &[0.25; 4]);
    }

    #[test]
    fn position_groups_are_faithful_copies_of_sd() {
        for d in 1..=4 {
            for base_n in 2..=3 {
                let g = build_group(&GroupFamilySpec::Position { d, base_n }, &Caps::default())
                    .unwrap();
                assert_eq!(g.order(), (1..=d).product::<usize>());
                assert!(g.is_closed());
                let again = generate(g.generators(), 1000)
                    .map(|h| h.order())
                    .unwrap_or(1);
                assert_eq!(again, g.order());
            }
        }
    }

    #[test]
    fn family_generators_regenerate_the_group() {
        let specs = [
            GroupFamilySpec::Symmetric { n: 4 },
            GroupFamilySpec::Alternating { n: 5 },
            GroupFamilySpec::Affine { q: 7 },
            GroupFamilySpec::Affine { q: 9 },
        ];
        for spec in specs {
            let g = build_group(&spec, &Caps::default()).unwrap();
            let h = generate(g.generators(), 10_000).unwrap();
            let a: BTreeSet<_> = g.elements().iter().cloned().collect();
            let b: BTreeSet<_> = h.elements().iter().cloned().collect();
            assert_eq!(a, b, "{spec:?}");
        }
    }

    #[test]
    fn symmetric_matches_generated_s3() {
        let fam = build_group(&GroupFamilySpec::Symmetric { n: 3 }, &Caps::default()).unwrap();
        let gens = vec![
            Permutation::new(vec![1, 0, 2]).unwrap(),
            Permutation::new(vec![1, 2, 0]).unwrap(),
        ];
        let gen = generate(&gens, 100).unwrap();
        let a: BTreeSet<_> = fam.elements().iter().cloned().collect();
        let b: BTreeSet<_> = gen.elements().iter().cloned().collect();
        assert_eq!(a, b);
        // lexicographic image order for families
        assert!(fam.elements().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn caps_are_enforced() {
        let caps = Caps::default();
        assert!(matches!(
            build_group(&GroupFamilySpec::Symmetric { n: 10 }, &caps),
            Err(Error::OrderCapExceeded { .. })
        ));
        assert!(matches!(
            build_group(&GroupFamilySpec::Position { d: 13, base_n: 2 }, &caps),
            Err(Error::AlphabetCapExceeded { .. })
        ));
        assert!(matches!(
            build_group(&GroupFamilySpec::Affine { q: 6 }, &caps),
            Err(Error::NotPrimePower(6))
        ));
        let small = Caps {
            max_order: 10,
            ..caps
        };
        assert!(build_group(&GroupFamilySpec::Alternating { n: 4 }, &small).is_err());
    }

    #[test]
    fn distribution_length_must_match() {
        let err = build_family(&GroupFamilySpec::Symmetric { n: 3 }, &uniform(4)).unwrap_err();
        assert!(matches!(err, Error::AlphabetMismatch { .. }));
        let spec = GroupFamilySpec::Position { d: 2, base_n: 3 };
        assert!(build_family(&spec, &uniform(9)).is_err());
        assert!(build_family(&spec, &uniform(3)).is_ok());
    }

    #[test]
    fn spec_json() {
        let s: GroupFamilySpec = serde_json::from_str(r#"{"family":"symmetric","n":3}"#).unwrap();
        assert_eq!(s, GroupFamilySpec::Symmetric { n: 3 });
        let s: GroupFamilySpec =
            serde_json::from_str(r#"{"family":"position","d":2,"base_n":2}"#).unwrap();
        assert_eq!(s, GroupFamilySpec::Position { d: 2, base_n: 2 });
        let s: GroupFamilySpec =
            serde_json::from_str(r#"{"family":"generators","generators":[[1,0,2],[1,2,0]]}"#)
                .unwrap();
        assert_eq!(build_group(&s, &Caps::default()).unwrap().order(), 6);
        assert!(serde_json::from_str::<GroupFamilySpec>(r#"{"family":"cyclic","n":3}"#).is_err());
        let back = serde_json::to_string(&GroupFamilySpec::Affine { q: 5 }).unwrap();
        assert_eq!(back, r#"{"family":"affine","q":5}"#);
    }

    #[test]
    fn letters_to_blocks() {
        let spec = GroupFamilySpec::Position { d: 2, base_n: 3 };
        let m = build_family(&spec, &uniform(3)).unwrap();
        let w = m.encode_letters(&[0, 1, 2, 2]).unwrap();
        assert_eq!(w.symbols(), &[1, 8]);
        assert!(m.encode_letters(&[0, 1, 2]).is_err());
        assert!(m.encode_letters(&[0, 3]).is_err());
        assert_eq!(m.symbols_for_letters(6).unwrap(), 3);
    }

    #[test]
    fn log_base() {
        assert!(LogBase::new(1.0).is_err());
        assert!(LogBase::new(-2.0).is_err());
        assert_eq!(LogBase::BITS.log(8.0), 3.0);
        let nats = LogBase::new(std::f64::consts::E).unwrap();
        assert!((nats.log(2.0) - std::f64::consts::LN_2).abs() < 1e-15);
    }
}
