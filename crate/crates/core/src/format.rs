//! Locale-independent number formatting and CSV rows.

use std::fmt::Write as _;

use crate::attack::TrajectoryRow;
use crate::equivocation::EquivocationReport;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Formats like C's `%.{digits}g`: shortest of fixed or exponent notation,
/// trailing zeros removed.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn num(x: f64) -> String {
    format_sig(x, SIGNIFICANT_DIGITS)
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub const CURVE_HEADER: &str = "L,exact,lower,upper_paper,upper_tight,mc_mean,mc_stderr";

/// CSV for an equivocation curve; `L` is reported in source letters.
pub fn curve_csv(rows: &[EquivocationReport]) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.letters,
            opt(r.exact),
            num(r.lower_bound),
            num(r.upper_bound_paper),
            num(r.upper_bound_tight),
            opt(r.mc.map(|m| m.mean)),
            opt(r.mc.map(|m| m.stderr)),
        );
    }
    out
}

pub const TRAJECTORY_HEADER: &str = "L,mean_residual_entropy_bits,frac_resolved,trials";

/// CSV for a simulated attack; `letters_per_symbol` rescales `L` to letters.
pub fn trajectory_csv(rows: &[TrajectoryRow], letters_per_symbol: usize) -> String {
    let mut out = String::from(TRAJECTORY_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.length * letters_per_symbol,
            num(r.mean_residual_entropy),
            num(r.frac_resolved),
            r.trials
        );
    }
    out
}
