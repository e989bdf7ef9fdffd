//! Enumerated key-space structure against the closed-form family profiles.

use kae_core::keyspace::{closed_form_profile, profile_matches};
use kae_core::{build_family, GroupFamilySpec, SymbolDistribution};

fn descending(n: usize) -> SymbolDistribution {
    // weights n, n-1, .., 1 normalised
    let total = (n * (n + 1) / 2) as f64;
    SymbolDistribution::new((0..n).map(|i| (n - i) as f64 / total).collect()).unwrap()
}

fn check(spec: GroupFamilySpec, dist: SymbolDistribution) {
    let model = build_family(&spec, &dist).unwrap();
    let report = model.maximal_keys();
    let profile = closed_form_profile(&spec, &dist).unwrap();
    assert!(
        profile_matches(report, &profile),
        "{spec:?}: enumerated {report:?} vs closed form {profile:?}"
    );
}

#[test]
fn symmetric_groups() {
    for n in 3..=6 {
        check(
            GroupFamilySpec::Symmetric { n },
            SymbolDistribution::uniform(n),
        );
        check(GroupFamilySpec::Symmetric { n }, descending(n));
    }
}

#[test]
fn alternating_groups() {
    for n in 4..=6 {
        check(
            GroupFamilySpec::Alternating { n },
            SymbolDistribution::uniform(n),
        );
        check(GroupFamilySpec::Alternating { n }, descending(n));
    }
}

#[test]
fn position_groups() {
    let bases = [vec![0.5, 0.5], vec![0.75, 0.25], vec![0.5, 0.25, 0.25]];
    for d in 2..=4 {
        for base in &bases {
            check(
                GroupFamilySpec::Position {
                    d,
                    base_n: base.len(),
                },
                SymbolDistribution::new(base.clone()).unwrap(),
            );
        }
    }
}

#[test]
fn affine_groups() {
    for q in [3, 4, 5, 7, 8, 9, 11, 13, 16] {
        check(
            GroupFamilySpec::Affine { q },
            SymbolDistribution::uniform(q),
        );
        check(GroupFamilySpec::Affine { q }, descending(q));
    }
}

#[test]
fn shuffled_distributions_give_the_same_rate() {
    let probs = vec![0.1, 0.4, 0.2, 0.3];
    let dist = SymbolDistribution::new(probs).unwrap();
    for spec in [
        GroupFamilySpec::Symmetric { n: 4 },
        GroupFamilySpec::Alternating { n: 4 },
    ] {
        check(spec, dist.clone());
    }
}
