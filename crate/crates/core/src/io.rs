//! Text formats: curve snapshots and diagnostics / twin-run CSV files.
//!
//! Snapshot floats carry 17 significant digits and CSV floats use the
//! shortest representation that round-trips, so both read back bit-exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::curve::{ClosedCurve, Grid, Vec2};
use crate::diagnostics::{DiagnosticsRecord, CSV_COLUMNS};
use crate::error::{Error, Result};
use crate::experiments::TwinRunReport;

pub const SNAPSHOT_MAGIC: &str = "sqgfront-snapshot";
pub const SNAPSHOT_VERSION: u32 = 1;
pub const TWIN_COLUMNS: [&str; 4] = ["time", "d_h1", "d_speed", "d_total"];

/// Parameter values in a snapshot must match the grid to this tolerance.
const GAMMA_TOL: f64 = 1e-12;

/// A curve together with the Sobolev offset used for its diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub curve: ClosedCurve,
    pub s: f64,
}

pub fn format_snapshot(curve: &ClosedCurve, s: f64) -> String {
    let mut out = String::with_capacity(80 * (curve.n() + 4));
    let _ = writeln!(out, "{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION}");
    let _ = writeln!(out, "n {}", curve.n());
    let _ = writeln!(out, "time {:.16e}", curve.time);
    let _ = writeln!(out, "s {:.16e}", s);
    for (g, p) in curve.grid.nodes().into_iter().zip(&curve.points) {
        let _ = writeln!(out, "{:.16e} {:.16e} {:.16e}", g, p.x, p.y);
    }
    out
}

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        reason: reason.into(),
    }
}

fn header_value<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, key: &str) -> Result<(usize, &'a str)> {
    let (no, line) = lines.next().ok_or_else(|| parse_err(0, format!("missing `{key}` header")))?;
    let mut parts = line.split_whitespace();
    match (parts.next(), parts.next(), parts.next()) {
        (Some(k), Some(v), None) if k == key => Ok((no, v)),
        _ => Err(parse_err(no, format!("expected `{key} <value>`, found `{line}`"))),
    }
}

fn num<T: std::str::FromStr>(line: usize, text: &str) -> Result<T> {
    text.parse().map_err(|_| parse_err(line, format!("cannot parse `{text}`")))
}

pub fn parse_snapshot(text: &str) -> Result<Snapshot> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (no, version) = header_value(&mut lines, SNAPSHOT_MAGIC)?;
    if num::<u32>(no, version)? != SNAPSHOT_VERSION {
        return Err(parse_err(no, format!("unsupported snapshot version {version}")));
    }
    let (no, n) = header_value(&mut lines, "n")?;
    let grid = Grid::new(num(no, n)?)?;
    let (no, time) = header_value(&mut lines, "time")?;
    let time: f64 = num(no, time)?;
    let (no, s) = header_value(&mut lines, "s")?;
    let s: f64 = num(no, s)?;

    let nodes = grid.nodes();
    let mut points = Vec::with_capacity(grid.n());
    for (no, line) in lines {
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 3 {
            return Err(parse_err(no, "expected `gamma x1 x2`"));
        }
        let i = points.len();
        if i >= grid.n() {
            return Err(parse_err(no, format!("more than {} node lines", grid.n())));
        }
        let g: f64 = num(no, cols[0])?;
        if (g - nodes[i]).abs() > GAMMA_TOL {
            return Err(parse_err(no, format!("gamma {g} does not match grid node {}", nodes[i])));
        }
        points.push(Vec2::new(num(no, cols[1])?, num(no, cols[2])?));
    }
    let mut curve = ClosedCurve::new(grid, points)?;
    curve.time = time;
    Ok(Snapshot { curve, s })
}

pub fn write_snapshot(path: &Path, curve: &ClosedCurve, s: f64) -> Result<()> {
    fs::write(path, format_snapshot(curve, s))?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    parse_snapshot(&fs::read_to_string(path)?)
}

fn csv(header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn parse_csv(text: &str, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut lines = text.lines().enumerate();
    let (_, first) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    if first.trim() != header.join(",") {
        return Err(parse_err(1, format!("unexpected header `{first}`")));
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let row = l
                .split(',')
                .map(|c| num::<f64>(i + 1, c.trim()))
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != header.len() {
                return Err(parse_err(i + 1, format!("expected {} columns", header.len())));
            }
            Ok(row)
        })
        .collect()
}

pub fn format_diagnostics_csv(records: &[DiagnosticsRecord]) -> String {
    csv(&CSV_COLUMNS, records.iter().map(|r| r.fields().to_vec()))
}

pub fn parse_diagnostics_csv(text: &str) -> Result<Vec<DiagnosticsRecord>> {
    Ok(parse_csv(text, &CSV_COLUMNS)?
        .into_iter()
        .map(|row| {
            let mut a = [0.0; 13];
            a.copy_from_slice(&row);
            DiagnosticsRecord::from_fields(a)
        })
        .collect())
}

pub fn format_twin_csv(report: &TwinRunReport) -> String {
    let rows = (0..report.times.len())
        .map(|i| vec![report.times[i], report.d_h1[i], report.d_speed[i], report.d_total[i]]);
    csv(&TWIN_COLUMNS, rows)
}

/// `(times, d_h1, d_speed, d_total)` columns of a twin CSV.
pub fn parse_twin_csv(text: &str) -> Result<[Vec<f64>; 4]> {
    let rows = parse_csv(text, &TWIN_COLUMNS)?;
    let col = |j: usize| rows.iter().map(|r| r[j]).collect();
    Ok([col(0), col(1), col(2), col(3)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::record;
    use proptest::prelude::*;

    fn wobbly(n: usize) -> ClosedCurve {
        let mut c = ClosedCurve::from_fn(Grid::new(n).unwrap(), |g| {
            Vec2::new(g.cos() + 0.1 * (3.0 * g).sin(), 0.7 * g.sin() - 1.0 / 3.0)
        });
        c.time = 0.1 + 0.2;
        c
    }

    #[test]
    fn snapshot_round_trip_is_bit_exact() {
        let c = wobbly(64);
        let back = parse_snapshot(&format_snapshot(&c, 0.25)).unwrap();
        assert_eq!(back.curve, c);
        assert_eq!(back.s, 0.25);
    }

    #[test]
    fn snapshot_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.txt");
        let c = wobbly(16);
        write_snapshot(&path, &c, 0.3).unwrap();
        assert_eq!(read_snapshot(&path).unwrap().curve, c);
    }

    #[test]
    fn snapshot_header_layout() {
        let text = format_snapshot(&wobbly(8), 0.25);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "sqgfront-snapshot 1");
        assert_eq!(lines[1], "n 8");
        assert!(lines[2].starts_with("time "));
        assert!(lines[3].starts_with("s "));
        assert_eq!(lines.len(), 12);
        assert_eq!(lines[4].split_whitespace().count(), 3);
    }

    #[test]
    fn malformed_snapshots_rejected() {
        let good = format_snapshot(&wobbly(8), 0.25);
        let truncated: String = good.lines().take(10).map(|l| format!("{l}\n")).collect();
        assert!(matches!(parse_snapshot(&truncated), Err(Error::LengthMismatch { .. })));
        let bad_version = good.replacen("sqgfront-snapshot 1", "sqgfront-snapshot 9", 1);
        assert!(parse_snapshot(&bad_version).is_err());
        let bad_gamma = good.replacen("-3.1415926535897931e0", "-3.0000000000000000e0", 1);
        assert!(matches!(parse_snapshot(&bad_gamma), Err(Error::Parse { line: 5, .. })));
        assert!(parse_snapshot("").is_err());
    }

    #[test]
    fn diagnostics_csv_round_trip() {
        let recs = vec![record(&wobbly(32), 0.25).unwrap(), record(&wobbly(32).scaled(2.0), 0.25).unwrap()];
        let text = format_diagnostics_csv(&recs);
        assert_eq!(
            text.lines().next().unwrap(),
            "time,F_max,A_mean,speed_variation,l2_norm,h2s_norm,holder,lambda_sup,dlambda_sup,dlambda_h_half,curvature_max,area,perimeter"
        );
        assert_eq!(parse_diagnostics_csv(&text).unwrap(), recs);
    }

    #[test]
    fn csv_rejects_wrong_header() {
        assert!(parse_diagnostics_csv("time,F\n1,2\n").is_err());
        assert!(parse_twin_csv("time,d_h1,d_speed,d_total\n1,2,3\n").is_err());
    }

    proptest! {
        #[test]
        fn csv_floats_round_trip(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let rec = DiagnosticsRecord::from_fields([v; 13]);
            let back = parse_diagnostics_csv(&format_diagnostics_csv(&[rec.clone()])).unwrap();
            prop_assert_eq!(back[0].fields().map(f64::to_bits), rec.fields().map(f64::to_bits));
        }

        #[test]
        fn snapshot_floats_round_trip(x in proptest::num::f64::NORMAL, y in proptest::num::f64::NORMAL) {
            let mut c = ClosedCurve::circle(Grid::new(8).unwrap(), 1.0);
            c.points[3] = Vec2::new(x, y);
            c.time = x;
            let back = parse_snapshot(&format_snapshot(&c, 0.25)).unwrap().curve;
            prop_assert_eq!(back.points[3].x.to_bits(), x.to_bits());
            prop_assert_eq!(back.points[3].y.to_bits(), y.to_bits());
            prop_assert_eq!(back.time.to_bits(), x.to_bits());
        }
    }
}
