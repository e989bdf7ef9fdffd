//! Key appearance equivocation `H(K | M^L C^L)` for substitution ciphers
//! whose key space is a permutation group on a finite alphabet.
//!
//! The crate enumerates the key space explicitly, finds its maximal keys
//! and rate, computes the equivocation exactly (over support sets of
//! messages), by brute force, or by Monte Carlo, evaluates the exponential
//! bounds in terms of the rate, and simulates the known-plaintext attack.

pub mod attack;
pub mod dist;
pub mod equivocation;
pub mod error;
pub mod field;
pub mod fixtures;
pub mod format;
pub mod group;
pub mod keyspace;
pub mod model;
pub mod perm;

pub use dist::SymbolDistribution;
pub use error::{Error, Result};
pub use field::FiniteField;
pub use group::{generate, GeneratedGroup};
pub use model::{build_family, build_family_with, Caps, CipherModel, GroupFamilySpec, LogBase};
pub use perm::{Permutation, Word};
