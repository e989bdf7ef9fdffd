//! Explicitly enumerated permutation groups and their stabilizers.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::perm::{Permutation, Word};

/// Memo key for a set of alphabet symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SupportKey {
    Mask(u64),
    Sorted(Box<[usize]>),
}

impl SupportKey {
    pub fn new<I: IntoIterator<Item = usize>>(degree: usize, symbols: I) -> Self {
        if degree <= 64 {
            SupportKey::Mask(symbols.into_iter().fold(0u64, |m, s| m | (1 << s)))
        } else {
            let set: BTreeSet<usize> = symbols.into_iter().collect();
            SupportKey::Sorted(set.into_iter().collect())
        }
    }

    pub fn symbols(&self) -> Vec<usize> {
        match self {
            SupportKey::Mask(m) => (0..64).filter(|i| m >> i & 1 == 1).collect(),
            SupportKey::Sorted(s) => s.to_vec(),
        }
    }
}

/// A finite permutation group with every element listed.
///
/// Element indices are stable: for groups built by [`generate`] they follow
/// breadth-first discovery order from the identity, for the named families
/// they follow lexicographic order of the image arrays. The identity is
/// always element 0.
#[derive(Debug)]
pub struct GeneratedGroup {
    degree: usize,
    elements: Vec<Permutation>,
    generators: Vec<Permutation>,
    index: HashMap<Permutation, usize>,
    stabilizers: RwLock<HashMap<SupportKey, Arc<[usize]>>>,
}

impl Clone for GeneratedGroup {
    fn clone(&self) -> Self {
        GeneratedGroup {
            degree: self.degree,
            elements: self.elements.clone(),
            generators: self.generators.clone(),
            index: self.index.clone(),
            stabilizers: RwLock::new(HashMap::new()),
        }
    }
}

/// Closes `generators` under composition, breadth first from the identity,
/// applying generators in input order.
pub fn generate(generators: &[Permutation], cap: usize) -> Result<GeneratedGroup> {
    let first = generators.first().ok_or(Error::NoGenerators)?;
    let degree = first.degree();
    if let Some(g) = generators.iter().find(|g| g.degree() != degree) {
        return Err(Error::AlphabetMismatch {
            expected: degree,
            found: g.degree(),
        });
    }
    let identity = Permutation::identity(degree);
    let mut elements = vec![identity.clone()];
    let mut index = HashMap::from([(identity, 0)]);
    let mut queue = VecDeque::from([0usize]);
    if cap == 0 {
        return Err(Error::OrderCapExceeded { partial: 1, cap });
    }
    while let Some(i) = queue.pop_front() {
        for g in generators {
            let next = g.compose_unchecked(&elements[i]);
            if index.contains_key(&next) {
                continue;
            }
            if elements.len() == cap {
                return Err(Error::OrderCapExceeded {
                    partial: elements.len() + 1,
                    cap,
                });
            }
            index.insert(next.clone(), elements.len());
            queue.push_back(elements.len());
            elements.push(next);
        }
    }
    Ok(GeneratedGroup {
        degree,
        elements,
        generators: generators.to_vec(),
        index,
        stabilizers: RwLock::new(HashMap::new()),
    })
}

impl GeneratedGroup {
    /// Wraps an already closed element list. Duplicates are dropped and the
    /// identity is moved to the front if needed.
    pub(crate) fn from_elements(
        degree: usize,
        elements: Vec<Permutation>,
        generators: Vec<Permutation>,
    ) -> Self {
        let identity = Permutation::identity(degree);
        let mut seen = HashSet::new();
        let mut list = vec![identity.clone()];
        seen.insert(identity);
        for e in elements {
            if seen.insert(e.clone()) {
                list.push(e);
            }
        }
        let index = list
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        GeneratedGroup {
            degree,
            elements: list,
            generators,
            index,
            stabilizers: RwLock::new(HashMap::new()),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Permutation {
        &self.elements[i]
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn identity_index(&self) -> usize {
        0
    }

    pub fn index_of(&self, p: &Permutation) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        self.index.contains_key(p)
    }

    /// Exhaustive closure check: every product and inverse is a member.
    pub fn is_closed(&self) -> bool {
        self.elements.iter().all(|a| {
            self.contains(&a.inverse())
                && self
                    .elements
                    .iter()
                    .all(|b| self.contains(&a.compose_unchecked(b)))
        })
    }

    /// Closure check on the given index pairs only.
    pub fn is_closed_on(&self, pairs: impl IntoIterator<Item = (usize, usize)>) -> bool {
        pairs.into_iter().all(|(i, j)| {
            let (a, b) = (&self.elements[i], &self.elements[j]);
            self.contains(&a.inverse()) && self.contains(&a.compose_unchecked(b))
        })
    }

    fn check_symbols<'a, I: IntoIterator<Item = &'a usize>>(&self, symbols: I) -> Result<()> {
        match symbols.into_iter().find(|&&s| s >= self.degree) {
            Some(&symbol) => Err(Error::SymbolOutOfRange {
                symbol,
                alphabet: self.degree,
            }),
            None => Ok(()),
        }
    }

    /// Indices of all elements fixing every point of `points`, ascending.
    /// Results are memoized per point set.
    pub fn pointwise_stabilizer(&self, points: &BTreeSet<usize>) -> Result<Arc<[usize]>> {
        self.check_symbols(points)?;
        Ok(self.stabilizer_by_key(&SupportKey::new(self.degree, points.iter().copied())))
    }

    /// Memoized stabilizer lookup for symbols already known to be in range.
    pub fn stabilizer_by_key(&self, key: &SupportKey) -> Arc<[usize]> {
        if let Some(hit) = self
            .stabilizers
            .read()
            .expect("stabilizer cache poisoned")
            .get(key)
        {
            return Arc::clone(hit);
        }
        let points = key.symbols();
        let stab: Arc<[usize]> = self
            .elements
            .iter()
            .enumerate()
            .filter(|(_, g)| points.iter().all(|&s| g.apply(s) == s))
            .map(|(i, _)| i)
            .collect();
        self.stabilizers
            .write()
            .expect("stabilizer cache poisoned")
            .entry(key.clone())
            .or_insert(stab)
            .clone()
    }

    /// `St(m)`: elements with `T_g(m) = m`, i.e. the pointwise stabilizer of
    /// the distinct symbols of `m`.
    pub fn word_stabilizer(&self, word: &Word) -> Result<Arc<[usize]>> {
        self.check_symbols(word.symbols())?;
        Ok(self.stabilizer_by_key(&SupportKey::new(
            self.degree,
            word.symbols().iter().copied(),
        )))
    }

    /// `G(i, j) = { g : g(i) = j }`, ascending element indices.
    pub fn transporter(&self, i: usize, j: usize) -> Result<Vec<usize>> {
        self.check_symbols([&i, &j])?;
        Ok(self
            .elements
            .iter()
            .enumerate()
            .filter(|(_, g)| g.apply(i) == j)
            .map(|(k, _)| k)
            .collect())
    }

    /// True iff `set` is the left coset `rep ∘ H` of the subgroup
    /// `H = rep⁻¹ ∘ set`.
    pub fn left_coset_check(&self, set: &[usize], rep: usize) -> Result<bool> {
        let order = self.order();
        if let Some(&bad) = set.iter().find(|&&i| i >= order) {
            return Err(Error::ElementOutOfRange { index: bad, order });
        }
        if !set.contains(&rep) {
            return Err(Error::RepresentativeNotInSet(rep));
        }
        let members: BTreeSet<usize> = set.iter().copied().collect();
        let rep_inv = self.elements[rep].inverse();
        let sub: BTreeSet<usize> = members
            .iter()
            .map(|&s| self.index[&rep_inv.compose_unchecked(&self.elements[s])])
            .collect();
        if !sub.contains(&self.identity_index()) {
            return Ok(false);
        }
        // a nonempty finite subset closed under composition is a subgroup
        for &a in &sub {
            for &b in &sub {
                let prod = self.elements[a].compose_unchecked(&self.elements[b]);
                if !sub.contains(&self.index[&prod]) {
                    return Ok(false);
                }
            }
        }
        let rebuilt: BTreeSet<usize> = sub
            .iter()
            .map(|&h| self.index[&self.elements[rep].compose_unchecked(&self.elements[h])])
            .collect();
        Ok(rebuilt == members)
    }
}
