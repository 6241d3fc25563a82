//! Gnuplot scripts for the CSV outputs. The scripts only reference the CSV
//! files by name, so they are run from the output directory.

use std::fs;
use std::path::{Path, PathBuf};

use sqgfront::diagnostics::CSV_COLUMNS;
use sqgfront::Result;

const PREAMBLE: &str = "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'time'\nset grid\n";

fn diagnostics_script() -> String {
    let mut out = String::from(PREAMBLE);
    out.push_str("set terminal pngcairo size 900,600\n");
    for (i, name) in CSV_COLUMNS.iter().enumerate().skip(1) {
        let log = if matches!(*name, "speed_variation" | "F_max" | "h2s_norm") {
            "set logscale y\n"
        } else {
            "unset logscale y\n"
        };
        out.push_str(&format!(
            "set output '{name}.png'\n{log}plot 'diagnostics.csv' using 1:{} with lines\n",
            i + 1
        ));
    }
    out
}

fn twin_script() -> String {
    let mut out = String::from(PREAMBLE);
    out.push_str("set terminal pngcairo size 900,600\nset output 'twin.png'\nset logscale y\n");
    out.push_str("plot 'twin.csv' using 1:2 with lines, '' using 1:3 with lines, '' using 1:4 with lines\n");
    out
}

/// Write a script for each CSV present in `dir`; returns the paths written.
pub fn write_scripts(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (csv, script, body) in [
        ("diagnostics.csv", "plot_diagnostics.gp", diagnostics_script as fn() -> String),
        ("twin.csv", "plot_twin.gp", twin_script),
    ] {
        if dir.join(csv).is_file() {
            let path = dir.join(script);
            fs::write(&path, body())?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagnostics_script_covers_every_column() {
        let s = diagnostics_script();
        for name in &CSV_COLUMNS[1..] {
            assert!(s.contains(&format!("'{name}.png'")), "{name}");
        }
        assert!(s.contains("using 1:13"));
    }

    #[test]
    fn scripts_only_for_present_files() {
        let dir = tempfile::tempdir().unwrap();
        assert!(write_scripts(dir.path()).unwrap().is_empty());
        fs::write(dir.path().join("twin.csv"), "time,d_h1,d_speed,d_total\n").unwrap();
        let w = write_scripts(dir.path()).unwrap();
        assert_eq!(w, vec![dir.path().join("plot_twin.gp")]);
    }
}
