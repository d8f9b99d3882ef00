//! Significant-digit formatting shared by reports and the CLI.
//!
//! Every number that leaves the library in text form — CLI output, CSV
//! reports — goes through [`format_significant`], so re-parsing a report
//! yields exactly the values that were printed, independent of locale or
//! caller. The format is plain decimal while the magnitude allows it and
//! scientific otherwise, always carrying the requested number of
//! significant digits.

/// Format `v` with `digits` significant digits (`digits >= 1`).
///
/// Values with decimal exponent in `[-4, digits)` print in fixed notation,
/// everything else in scientific notation with `digits − 1` fractional
/// places. Rounding that carries into the next decade (e.g. 999.96 at 4
/// digits) keeps the precomputed number of decimals, so such edge values
/// may show one extra digit; the printed string still round-trips.
pub fn format_significant(v: f64, digits: usize) -> String {
    assert!(digits >= 1, "at least one significant digit is needed");
    if !v.is_finite() {
        return format!("{v}");
    }
    if v == 0.0 {
        return format!("{:.*}", digits - 1, 0.0);
    }
    let exp = decimal_exponent(v);
    if exp >= -4 && exp < digits as i32 {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{:.*e}", digits - 1, v)
    }
}

/// The decimal exponent of the leading significant digit, read off the
/// shortest-round-trip scientific rendering (robust where `log10` rounds
/// the wrong way at decade boundaries).
fn decimal_exponent(v: f64) -> i32 {
    let s = format!("{:e}", v.abs());
    s.split('e')
        .nth(1)
        .and_then(|e| e.parse().ok())
        .expect("scientific rendering of a finite nonzero float carries an exponent")
}
