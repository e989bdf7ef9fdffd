//! Reference models shared by the verification command and the test suites.

use crate::dist::SymbolDistribution;
use crate::model::{build_family, CipherModel, GroupFamilySpec};

pub struct Fixture {
    pub name: &'static str,
    pub spec: GroupFamilySpec,
    pub base: Vec<f64>,
}

impl Fixture {
    pub fn model(&self) -> CipherModel {
        let dist = SymbolDistribution::new(self.base.clone()).expect("fixture distribution");
        build_family(&self.spec, &dist).expect("fixture model")
    }
}

/// S_3 (uniform and skewed), A_4, affine GF(5) and 2-letter position
/// permutations over a binary alphabet.
pub fn reference_fixtures() -> Vec<Fixture> {
    vec![
        Fixture {
            name: "S3 uniform",
            spec: GroupFamilySpec::Symmetric { n: 3 },
            base: vec![1.0 / 3.0; 3],
        },
        Fixture {
            name: "S3 [0.5,0.3,0.2]",
            spec: GroupFamilySpec::Symmetric { n: 3 },
            base: vec![0.5, 0.3, 0.2],
        },
        Fixture {
            name: "A4 uniform",
            spec: GroupFamilySpec::Alternating { n: 4 },
            base: vec![0.25; 4],
        },
        Fixture {
            name: "affine GF(5) [0.4,0.2,0.2,0.1,0.1]",
            spec: GroupFamilySpec::Affine { q: 5 },
            base: vec![0.4, 0.2, 0.2, 0.1, 0.1],
        },
        Fixture {
            name: "position d=2 N=2 uniform",
            spec: GroupFamilySpec::Position { d: 2, base_n: 2 },
            base: vec![0.5, 0.5],
        },
    ]
}
