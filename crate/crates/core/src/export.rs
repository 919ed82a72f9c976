//! Plain-text exports for plotting and diagnostics.
//!
//! Columns are tab separated with a single `#` header line. Reals use Rust's
//! shortest round-trip formatting, so files reload to identical values.

use std::io::{self, Write};

use crate::bandwidth::BandwidthSearch;
use crate::cusum::CusumProfile;

pub fn write_two_column<W: Write, A: std::fmt::Display>(
    mut out: W,
    header: (&str, &str),
    rows: impl IntoIterator<Item = (A, f64)>,
) -> io::Result<()> {
    writeln!(out, "# {}\t{}", header.0, header.1)?;
    for (a, b) in rows {
        writeln!(out, "{a}\t{b}")?;
    }
    Ok(())
}

pub fn write_one_column<W: Write, A: std::fmt::Display>(
    mut out: W,
    header: &str,
    values: impl IntoIterator<Item = A>,
) -> io::Result<()> {
    writeln!(out, "# {header}")?;
    for v in values {
        writeln!(out, "{v}")?;
    }
    Ok(())
}

/// `(t, W(t))` rows.
pub fn write_profile<W: Write>(out: W, profile: &CusumProfile) -> io::Result<()> {
    write_two_column(out, ("t", "W"), profile.iter())
}

/// `(h, F(h))` rows.
pub fn write_bandwidth_search<W: Write>(out: W, search: &BandwidthSearch) -> io::Result<()> {
    write_two_column(
        out,
        ("h", "F"),
        search.h_grid.iter().copied().zip(search.f_values.iter().copied()),
    )
}

/// Formats with `digits` significant digits, for human-readable summaries.
pub fn format_sig(value: f64, digits: usize) -> String {
    if value == 0.0 || !value.is_finite() {
        return format!("{value}");
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    if !(-5..15).contains(&magnitude) {
        return format!("{:.*e}", digits.saturating_sub(1), value);
    }
    format!("{value:.decimals$}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_round_trips_through_text() {
        let p = CusumProfile {
            n: 10,
            trim: 2,
            values: vec![0.1, 1.0 / 3.0, 2.5e-17, 0.0, 7.0, 1e300, 0.2],
            undefined_counts: vec![0; 7],
        };
        let mut buf = Vec::new();
        write_profile(&mut buf, &p).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# t\tW"));
        let parsed: Vec<(usize, f64)> = lines
            .map(|l| {
                let (a, b) = l.split_once('\t').unwrap();
                (a.parse().unwrap(), b.parse().unwrap())
            })
            .collect();
        assert_eq!(parsed, p.iter().collect::<Vec<_>>());
    }

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(1.78812, 4), "1.788");
        assert_eq!(format_sig(12.2361, 4), "12.24");
        assert_eq!(format_sig(0.012, 4), "0.01200");
        assert_eq!(format_sig(1234.5, 4), "1234");
        assert_eq!(format_sig(0.0, 4), "0");
        assert_eq!(format_sig(3.2e-9, 4), "3.200e-9");
    }
}
