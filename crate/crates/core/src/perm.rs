//! Permutations of a finite alphabet `{0, .., N-1}` and their letter-wise
//! action on words.
//!
//! Alphabet symbols are 0-based everywhere in this crate.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A bijection of `{0, .., N-1}` stored as its dense image array.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &img in &images {
            if img >= n {
                return Err(Error::NotAPermutation(format!(
                    "image {img} out of range for degree {n}"
                )));
            }
            if seen[img] {
                return Err(Error::NotAPermutation(format!("image {img} repeated")));
            }
            seen[img] = true;
        }
        Ok(Permutation { images })
    }

    /// Builds a permutation from images already known to be a bijection.
    pub(crate) fn from_images_unchecked(images: Vec<usize>) -> Self {
        debug_assert!(Permutation::new(images.clone()).is_ok());
        Permutation { images }
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n).collect(),
        }
    }

    /// Builds a permutation of degree `n` from disjoint cycles.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut images: Vec<usize> = (0..n).collect();
        let mut touched = vec![false; n];
        for cycle in cycles {
            for (k, &from) in cycle.iter().enumerate() {
                let to = cycle[(k + 1) % cycle.len()];
                if from >= n || to >= n {
                    return Err(Error::SymbolOutOfRange {
                        symbol: from.max(to),
                        alphabet: n,
                    });
                }
                if touched[from] {
                    return Err(Error::NotAPermutation(format!(
                        "cycles are not disjoint at {from}"
                    )));
                }
                touched[from] = true;
                images[from] = to;
            }
        }
        Ok(Permutation { images })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.degree() != other.degree() {
            return Err(Error::AlphabetMismatch {
                expected: self.degree(),
                found: other.degree(),
            });
        }
        Ok(self.compose_unchecked(other))
    }

    pub(crate) fn compose_unchecked(&self, other: &Permutation) -> Permutation {
        Permutation {
            images: other.images.iter().map(|&j| self.images[j]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.degree()];
        for (i, &j) in self.images.iter().enumerate() {
            images[j] = i;
        }
        Permutation { images }
    }

    /// The fixed set `{ j : p(j) = j }`.
    pub fn fixed_set(&self) -> BTreeSet<usize> {
        self.fixed_points().collect()
    }

    pub fn fixed_points(&self) -> impl Iterator<Item = usize> + '_ {
        self.images
            .iter()
            .enumerate()
            .filter(|(i, &j)| *i == j)
            .map(|(i, _)| i)
    }

    /// Disjoint cycles of length at least 2, each starting at its minimum,
    /// sorted by first element.
    pub fn cycle_decomposition(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut visited = vec![false; n];
        let mut cycles = Vec::new();
        for start in 0..n {
            if visited[start] || self.images[start] == start {
                continue;
            }
            let mut cycle = vec![start];
            visited[start] = true;
            let mut cur = self.images[start];
            while cur != start {
                visited[cur] = true;
                cycle.push(cur);
                cur = self.images[cur];
            }
            cycles.push(cycle);
        }
        cycles
    }

    /// True for even permutations.
    pub fn is_even(&self) -> bool {
        let transpositions: usize = self.cycle_decomposition().iter().map(|c| c.len() - 1).sum();
        transpositions.is_multiple_of(2)
    }

    /// Letter-wise encryption `T_p(m) = p(m_1) p(m_2) ...`.
    pub fn apply_word(&self, word: &Word) -> Result<Word> {
        word.check_alphabet(self.degree())?;
        Ok(Word {
            symbols: word.symbols.iter().map(|&s| self.images[s]).collect(),
        })
    }

    /// True when `apply_word(word) == word`, without allocating.
    pub fn fixes_word(&self, word: &Word) -> bool {
        word.symbols.iter().all(|&s| self.images[s] == s)
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycle_decomposition();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for c in cycles {
            write!(f, "(")?;
            for (k, s) in c.iter().enumerate() {
                if k > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{s}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;

    fn try_from(images: Vec<usize>) -> Result<Self> {
        Permutation::new(images)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.images
    }
}

/// A nonempty message or cryptogram over a 0-based alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Word {
    symbols: Vec<usize>,
}

impl Word {
    pub fn new(symbols: Vec<usize>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::EmptyWord);
        }
        Ok(Word { symbols })
    }

    /// Builds a word and checks every symbol is below `alphabet`.
    pub fn over(symbols: Vec<usize>, alphabet: usize) -> Result<Self> {
        let w = Word::new(symbols)?;
        w.check_alphabet(alphabet)?;
        Ok(w)
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn prefix(&self, len: usize) -> Word {
        debug_assert!(len >= 1 && len <= self.len());
        Word {
            symbols: self.symbols[..len].to_vec(),
        }
    }

    /// Distinct symbols occurring in the word.
    pub fn support(&self) -> BTreeSet<usize> {
        self.symbols.iter().copied().collect()
    }

    pub fn check_alphabet(&self, alphabet: usize) -> Result<()> {
        match self.symbols.iter().find(|&&s| s >= alphabet) {
            Some(&symbol) => Err(Error::SymbolOutOfRange { symbol, alphabet }),
            None => Ok(()),
        }
    }
}

impl TryFrom<Vec<usize>> for Word {
    type Error = Error;

    fn try_from(symbols: Vec<usize>) -> Result<Self> {
        Word::new(symbols)
    }
}

impl From<Word> for Vec<usize> {
    fn from(w: Word) -> Self {
        w.symbols
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(images: &[usize]) -> Permutation {
        Permutation::new(images.to_vec()).unwrap()
    }

    /// Composition straight from the definition, used as a pair table.
    fn compose_table(a: &[usize], b: &[usize]) -> Vec<usize> {
        (0..a.len()).map(|i| a[b[i]]).collect()
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
        assert!(Permutation::new(vec![0, 3, 1]).is_err());
        assert!(Permutation::new(vec![]).is_ok());
    }

    #[test]
    fn compose_examples() {
        let swap01 = p(&[1, 0, 2]);
        let swap12 = p(&[0, 2, 1]);
        let e = Permutation::identity(3);
        assert_eq!(swap01.compose(&e).unwrap(), swap01);
        let pq = swap01.compose(&swap12).unwrap();
        assert_eq!(pq.images(), &[1, 2, 0]);
        assert_eq!(
            pq.images(),
            compose_table(&[1, 0, 2], &[0, 2, 1]).as_slice()
        );
        let qp = swap12.compose(&swap01).unwrap();
        assert_eq!(
            qp.images(),
            compose_table(&[0, 2, 1], &[1, 0, 2]).as_slice()
        );
        assert_eq!(qp.images(), &[2, 0, 1]);
        assert!(swap01.compose(&swap01).unwrap().is_identity());
    }

    #[test]
    fn compose_size_mismatch() {
        let err = p(&[1, 0]).compose(&p(&[0, 1, 2])).unwrap_err();
        assert!(err.to_string().contains("alphabet mismatch"));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(Permutation::identity(4).inverse(), Permutation::identity(4));
        assert_eq!(p(&[1, 2, 0]).inverse().images(), &[2, 0, 1]);
    }

    #[test]
    fn fixed_set_examples() {
        assert_eq!(
            Permutation::identity(4).fixed_set(),
            BTreeSet::from([0, 1, 2, 3])
        );
        assert_eq!(p(&[1, 0, 2]).fixed_set(), BTreeSet::from([2]));
        assert!(p(&[1, 2, 0]).fixed_set().is_empty());
    }

    #[test]
    fn cycle_examples() {
        assert!(Permutation::identity(5).cycle_decomposition().is_empty());
        assert_eq!(
            p(&[1, 0, 3, 2]).cycle_decomposition(),
            vec![vec![0, 1], vec![2, 3]]
        );
        let q = p(&[1, 2, 0, 4, 3]);
        let cycles = q.cycle_decomposition();
        assert_eq!(cycles, vec![vec![0, 1, 2], vec![3, 4]]);
        assert_eq!(Permutation::from_cycles(5, &cycles).unwrap(), q);
    }

    #[test]
    fn parity() {
        assert!(Permutation::identity(3).is_even());
        assert!(!p(&[1, 0, 2]).is_even());
        assert!(p(&[1, 2, 0]).is_even());
        assert!(p(&[1, 0, 3, 2]).is_even());
    }

    #[test]
    fn apply_word_examples() {
        let m = Word::new(vec![0, 2, 1, 0]).unwrap();
        assert_eq!(Permutation::identity(3).apply_word(&m).unwrap(), m);
        let c = p(&[1, 0, 2]).apply_word(&m).unwrap();
        assert_eq!(c.symbols(), &[1, 2, 0, 1]);
        let bad = Word::new(vec![0, 3]).unwrap();
        assert!(matches!(
            p(&[1, 0, 2]).apply_word(&bad),
            Err(Error::SymbolOutOfRange { symbol: 3, .. })
        ));
        assert_eq!(Word::new(vec![]), Err(Error::EmptyWord));
    }

    #[test]
    fn json_format() {
        let q: Permutation = serde_json::from_str("[1,0,2]").unwrap();
        assert_eq!(q, p(&[1, 0, 2]));
        assert_eq!(serde_json::to_string(&q).unwrap(), "[1,0,2]");
        assert!(serde_json::from_str::<Permutation>("[1,1,2]").is_err());
    }

    fn perm_strategy(max_n: usize) -> impl Strategy<Value = Permutation> {
        (1..=max_n)
            .prop_flat_map(|n| Just((0..n).collect::<Vec<_>>()).prop_shuffle())
            .prop_map(|v| Permutation::new(v).unwrap())
    }

    fn perm_pair(max_n: usize) -> impl Strategy<Value = (Permutation, Permutation)> {
        (1..=max_n).prop_flat_map(|n| {
            let base: Vec<usize> = (0..n).collect();
            (Just(base.clone()).prop_shuffle(), Just(base).prop_shuffle())
                .prop_map(|(a, b)| (Permutation::new(a).unwrap(), Permutation::new(b).unwrap()))
        })
    }

    proptest! {
        #[test]
        fn inverse_is_two_sided(q in perm_strategy(64)) {
            let e = Permutation::identity(q.degree());
            prop_assert_eq!(q.compose(&q.inverse()).unwrap(), e.clone());
            prop_assert_eq!(q.inverse().compose(&q).unwrap(), e);
        }

        #[test]
        fn compose_preserves_bijectivity((a, b) in perm_pair(64)) {
            let c = a.compose(&b).unwrap();
            prop_assert!(Permutation::new(c.images().to_vec()).is_ok());
            prop_assert!(Permutation::new(a.inverse().images().to_vec()).is_ok());
            let common: BTreeSet<usize> = a.fixed_set().intersection(&b.fixed_set()).copied().collect();
            prop_assert!(common.is_subset(&c.fixed_set()));
        }

        #[test]
        fn cycles_rebuild_input(q in perm_strategy(64)) {
            let cycles = q.cycle_decomposition();
            let mut covered: BTreeSet<usize> = q.fixed_set();
            for c in &cycles {
                prop_assert!(c.len() >= 2);
                prop_assert_eq!(c[0], *c.iter().min().unwrap());
                for &s in c {
                    prop_assert!(covered.insert(s));
                }
            }
            prop_assert_eq!(covered.len(), q.degree());
            prop_assert!(cycles.windows(2).all(|w| w[0][0] < w[1][0]));
            prop_assert_eq!(Permutation::from_cycles(q.degree(), &cycles).unwrap(), q);
        }

        #[test]
        fn word_round_trip(
            (q, m) in perm_strategy(16).prop_flat_map(|q| {
                let n = q.degree();
                (Just(q), proptest::collection::vec(0..n, 1..20))
            })
        ) {
            let m = Word::new(m).unwrap();
            let c = q.apply_word(&m).unwrap();
            prop_assert_eq!(c.len(), m.len());
            prop_assert_eq!(q.inverse().apply_word(&c).unwrap(), m);
        }
    }
}
