use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use kae_core::attack::{consistent_keys, load_pair_file, simulate_attack, TrajectoryRow};
use kae_core::equivocation::{
    brute_force_equivocation, equivocation_curve, exact_equivocation, monte_carlo_equivocation,
    EquivocationReport,
};
use kae_core::fixtures::reference_fixtures;
use kae_core::format::{curve_csv, num, trajectory_csv};
use kae_core::keyspace::{
    closed_form_profile, profile_matches, ClosedFormProfile, KeyspaceReportJson,
};
use kae_core::CipherModel;
use serde::{Deserialize, Serialize};

use crate::config::{OutputFormat, RunConfig};
use crate::CliError;

/// Seed used by randomized commands when neither `--seed` nor `mc.seed` is given.
pub const DEFAULT_SEED: u64 = 42;

/// What a command wants written: `stdout` goes to the configured output
/// target, `stderr` always to the terminal. `failed` requests exit code 1.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub failed: bool,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            stdout,
            ..Default::default()
        }
    }
}

/// JSON form of `analyze` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeJson {
    pub keyspace: KeyspaceReportJson,
    #[serde(default)]
    pub closed_form: Option<ClosedFormProfile>,
    #[serde(default)]
    pub closed_form_match: Option<bool>,
}

/// JSON form of an `attack --pairs` result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairJson {
    pub consistent_count: usize,
    pub residual_entropy: Option<f64>,
    pub stabilizer_size: usize,
    pub resolved: bool,
    pub representative: Option<Vec<usize>>,
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

pub fn analyze(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let model = cfg.model()?;
    let report = model.maximal_keys();
    let profile = if cfg.group.is_named_family() {
        Some(closed_form_profile(&cfg.group, model.base_distribution())?)
    } else {
        None
    };
    let matched = profile.as_ref().map(|p| profile_matches(report, p));

    if cfg.output.format == OutputFormat::Json {
        return Ok(Outcome::ok(to_json(&AnalyzeJson {
            keyspace: report.to_json(),
            closed_form: profile,
            closed_form_match: matched,
        })));
    }

    let mut out = String::new();
    let _ = writeln!(out, "R={}", num(report.rate));
    let _ = writeln!(out, "order={}", report.order);
    let _ = writeln!(out, "maximal_keys={}", report.n_maximal_keys());
    let _ = writeln!(out, "maximal_fixed_sets={}", report.n_maximal_fixed_sets());
    if let (Some(p), Some(m)) = (&profile, matched) {
        let _ = writeln!(out, "closed_form_R={}", num(p.rate));
        let _ = writeln!(out, "closed_form_order={}", p.order);
        let _ = writeln!(out, "closed_form_maximal_keys={}", p.n_maximal_keys);
        let _ = writeln!(out, "closed_form_fixed_sets={}", p.n_maximal_fixed_sets);
        if p.stated_n_maximal != p.n_maximal_keys {
            let _ = writeln!(out, "closed_form_stated_maximal={}", p.stated_n_maximal);
        }
        let _ = writeln!(out, "match={m}");
        out.push_str(if m { "MATCH\n" } else { "MISMATCH\n" });
    }
    Ok(Outcome::ok(out))
}

fn symbol_lengths(model: &CipherModel, letters: &[usize]) -> Result<Vec<usize>, CliError> {
    letters
        .iter()
        .map(|&l| Ok(model.symbols_for_letters(l)?))
        .collect()
}

/// Rows violating `lower <= exact <= upper_tight <= upper_paper` by more than `slack`.
pub fn sandwich_violations(rows: &[EquivocationReport], slack: f64) -> Vec<usize> {
    rows.iter()
        .filter(|r| {
            let inner = match r.exact {
                Some(e) => r.lower_bound <= e + slack && e <= r.upper_bound_tight + slack,
                None => r.lower_bound <= r.upper_bound_tight + slack,
            };
            !(inner && r.upper_bound_tight <= r.upper_bound_paper + slack)
        })
        .map(|r| r.letters)
        .collect()
}

pub fn curve(cfg: &RunConfig, verify: bool, seed: Option<u64>) -> Result<Outcome, CliError> {
    let model = cfg.model()?;
    let lengths = symbol_lengths(&model, &cfg.letter_lengths())?;
    let mc = cfg.mc.map(|mut c| {
        if let Some(s) = seed {
            c.seed = s;
        }
        c
    });
    let rows = equivocation_curve(&model, &lengths, mc)?;
    let stdout = match cfg.output.format {
        OutputFormat::Csv => curve_csv(&rows),
        OutputFormat::Json => to_json(&rows),
    };
    let mut outcome = Outcome::ok(stdout);
    if verify {
        let bad = sandwich_violations(&rows, 1e-12);
        outcome.failed = !bad.is_empty();
        outcome.stderr = if bad.is_empty() {
            format!("PASS sandwich on {} rows\n", rows.len())
        } else {
            format!("FAIL sandwich at L={bad:?}\n")
        };
    }
    Ok(outcome)
}

pub fn attack_pairs(cfg: &RunConfig, pairs: &Path) -> Result<Outcome, CliError> {
    let model = cfg.model()?;
    let (plain, cipher) = load_pair_file(pairs, model.base_distribution().len())?;
    let plain = model.encode_letters(&plain)?;
    let cipher = model.encode_letters(&cipher)?;
    let outcome = consistent_keys(&model, &plain, &cipher)?;
    let representative = outcome.representative.as_ref().map(|p| p.images().to_vec());

    if cfg.output.format == OutputFormat::Json {
        return Ok(Outcome::ok(to_json(&PairJson {
            consistent_count: outcome.consistent_count,
            residual_entropy: (outcome.consistent_count > 0).then_some(outcome.residual_entropy),
            stabilizer_size: outcome.stabilizer_size,
            resolved: outcome.resolved,
            representative,
        })));
    }

    let mut out = String::new();
    if outcome.consistent_count == 0 {
        out.push_str("consistent_count=0 (pair has probability zero under this key space)\n");
        return Ok(Outcome::ok(out));
    }
    let _ = writeln!(out, "consistent_count={}", outcome.consistent_count);
    let _ = writeln!(out, "residual_entropy={}", num(outcome.residual_entropy));
    let _ = writeln!(out, "stabilizer_size={}", outcome.stabilizer_size);
    let _ = writeln!(out, "resolved={}", outcome.resolved);
    if let Some(r) = representative {
        let _ = writeln!(
            out,
            "representative={}",
            serde_json::to_string(&r).expect("array")
        );
    }
    Ok(Outcome::ok(out))
}

pub fn attack_simulate(
    cfg: &RunConfig,
    trials: usize,
    seed: Option<u64>,
    max_letters: Option<usize>,
) -> Result<Outcome, CliError> {
    let model = cfg.model()?;
    let seed = seed.or(cfg.mc.map(|c| c.seed)).unwrap_or(DEFAULT_SEED);
    let letters = match max_letters {
        Some(l) => l,
        None => cfg.letter_lengths().into_iter().max().unwrap_or(0),
    };
    let max_length = model.symbols_for_letters(letters)?;
    let rows: Vec<TrajectoryRow> = simulate_attack(&model, max_length, trials, seed)?;
    let stdout = match cfg.output.format {
        OutputFormat::Csv => trajectory_csv(&rows, cfg.group.block_len()),
        OutputFormat::Json => to_json(&rows),
    };
    Ok(Outcome::ok(stdout))
}

fn relative_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(f64::MIN_POSITIVE)
}

/// Runs the built-in checks on the reference fixtures.
pub fn verify(seed: Option<u64>) -> Result<Outcome, CliError> {
    let seed = seed.unwrap_or(DEFAULT_SEED);
    let mut out = String::new();
    let mut failed = false;
    let mut line = |ok: bool, name: &str, check: String| {
        failed |= !ok;
        let _ = writeln!(out, "{} {name}: {check}", if ok { "PASS" } else { "FAIL" });
    };

    for fixture in reference_fixtures() {
        let model = fixture.model();
        let name = fixture.name;

        let mut worst = 0.0f64;
        let mut ok = true;
        for l in 1..=6 {
            let exact = exact_equivocation(&model, l)?;
            let brute = brute_force_equivocation(&model, l)?;
            ok &= relative_close(exact, brute, 1e-9);
            if brute != 0.0 {
                worst = worst.max((exact - brute).abs() / brute.abs());
            }
        }
        line(
            ok,
            name,
            format!("exact = brute force for L=1..6 (max rel err {worst:.1e})"),
        );

        let lengths: Vec<usize> = (1..=12).collect();
        let rows = equivocation_curve(&model, &lengths, None)?;
        let bad = sandwich_violations(&rows, 1e-12);
        let detail = if bad.is_empty() {
            String::new()
        } else {
            format!(", violated at L={bad:?}")
        };
        line(
            bad.is_empty(),
            name,
            format!("bounds sandwich for L=1..12{detail}"),
        );

        if fixture.spec.is_named_family() {
            let profile = closed_form_profile(&fixture.spec, model.base_distribution())?;
            line(
                profile_matches(model.maximal_keys(), &profile),
                name,
                "closed-form profile".into(),
            );
        }

        let group = model.group();
        if group.order() <= 2000 {
            let mut failures = 0usize;
            for i in 0..group.degree() {
                let stab = group.pointwise_stabilizer(&BTreeSet::from([i]))?;
                for j in 0..group.degree() {
                    let t = group.transporter(i, j)?;
                    if t.is_empty() {
                        continue;
                    }
                    let coset = t.len() == stab.len()
                        && t.iter()
                            .all(|&r| group.left_coset_check(&t, r).unwrap_or(false));
                    failures += usize::from(!coset);
                }
            }
            line(
                failures == 0,
                name,
                format!("transporters are cosets ({failures} failures)"),
            );
        }

        let exact = exact_equivocation(&model, 3)?;
        let mc = monte_carlo_equivocation(&model, 3, 100_000, seed)?;
        let ok = (mc.mean - exact).abs() <= 4.0 * mc.stderr.max(1e-15);
        line(
            ok,
            name,
            format!(
                "Monte Carlo L=3 mean {} vs exact {}",
                num(mc.mean),
                num(exact)
            ),
        );
    }
    Ok(Outcome {
        stdout: out,
        stderr: String::new(),
        failed,
    })
}
