//! Simulation configuration and its flat `key = value` text form.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Environment variable holding the default output directory.
pub const OUTPUT_DIR_ENV: &str = "SQGFRONT_OUTPUT_DIR";

/// Shape parameters of the canned initial curves. Each scenario reads only
/// the fields it needs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioParams {
    pub radius: f64,
    pub semi_major: f64,
    pub semi_minor: f64,
    pub amplitude: f64,
    pub mode: u32,
    /// Overall scale `c` of the random rough-data spectrum.
    pub roughness: f64,
    /// Neck width of the filament probe.
    pub gap: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            radius: 1.0,
            semi_major: 1.2,
            semi_minor: 0.8,
            amplitude: 0.05,
            mode: 3,
            roughness: 0.2,
            gap: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimConfig {
    pub scenario: String,
    pub params: ScenarioParams,
    pub n: usize,
    /// Time step; `0` selects the CFL heuristic.
    pub dt: f64,
    pub t_end: f64,
    /// Sobolev offset: the monitored norm is `H^{2+s}`.
    pub s: f64,
    /// Relative Krasny threshold; `0` disables filtering.
    pub filter_level: f64,
    /// Speed-variation level that triggers a constant-speed projection.
    pub reparam_trigger: f64,
    pub record_interval: usize,
    /// `0` keeps only the initial and final snapshots.
    pub snapshot_interval: usize,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// `0` lets the thread pool decide.
    pub threads: usize,
    pub c_cfl: f64,
    /// Arc-chord level treated as a suspected singularity.
    pub f_max_limit: f64,
    /// Steps leaving a chord shorter than this many node spacings are
    /// rejected as unresolved.
    pub min_gap_cells: f64,
    /// `0` means unlimited.
    pub max_steps: usize,
    /// Twin-run perturbation size.
    pub delta: f64,
    /// Fourier mode of the twin-run normal displacement.
    pub twin_mode: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            scenario: "circle".to_string(),
            params: ScenarioParams::default(),
            n: 256,
            dt: 0.0,
            t_end: 0.5,
            s: 0.25,
            filter_level: 1e-12,
            reparam_trigger: 1e-3,
            record_interval: 10,
            snapshot_interval: 0,
            output_dir: default_output_dir(),
            seed: 7,
            threads: 0,
            c_cfl: 0.2,
            f_max_limit: 1e3,
            min_gap_cells: 4.0,
            max_steps: 0,
            delta: 1e-6,
            twin_mode: 2,
        }
    }
}

/// `$SQGFRONT_OUTPUT_DIR`, or `output` when unset.
pub fn default_output_dir() -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("output"))
}

/// Every key accepted by [`SimConfig::set`], in serialization order.
pub const KEYS: &[&str] = &[
    "scenario",
    "n",
    "dt",
    "t_end",
    "s",
    "filter_level",
    "reparam_trigger",
    "record_interval",
    "snapshot_interval",
    "output_dir",
    "seed",
    "threads",
    "c_cfl",
    "f_max_limit",
    "min_gap_cells",
    "max_steps",
    "delta",
    "twin_mode",
    "radius",
    "semi_major",
    "semi_minor",
    "amplitude",
    "mode",
    "roughness",
    "gap",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config {
        key: key.to_string(),
        reason: format!("cannot parse `{value}`"),
    })
}

fn bad(key: &str, reason: &str) -> Error {
    Error::Config {
        key: key.to_string(),
        reason: reason.to_string(),
    }
}

impl SimConfig {
    /// Assign one key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "scenario" => self.scenario = value.to_string(),
            "n" => self.n = parse(key, value)?,
            "dt" => self.dt = parse(key, value)?,
            "t_end" => self.t_end = parse(key, value)?,
            "s" => self.s = parse(key, value)?,
            "filter_level" => self.filter_level = parse(key, value)?,
            "reparam_trigger" => self.reparam_trigger = parse(key, value)?,
            "record_interval" => self.record_interval = parse(key, value)?,
            "snapshot_interval" => self.snapshot_interval = parse(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "seed" => self.seed = parse(key, value)?,
            "threads" => self.threads = parse(key, value)?,
            "c_cfl" => self.c_cfl = parse(key, value)?,
            "f_max_limit" => self.f_max_limit = parse(key, value)?,
            "min_gap_cells" => self.min_gap_cells = parse(key, value)?,
            "max_steps" => self.max_steps = parse(key, value)?,
            "delta" => self.delta = parse(key, value)?,
            "twin_mode" => self.twin_mode = parse(key, value)?,
            "radius" => self.params.radius = parse(key, value)?,
            "semi_major" => self.params.semi_major = parse(key, value)?,
            "semi_minor" => self.params.semi_minor = parse(key, value)?,
            "amplitude" => self.params.amplitude = parse(key, value)?,
            "mode" => self.params.mode = parse(key, value)?,
            "roughness" => self.params.roughness = parse(key, value)?,
            "gap" => self.params.gap = parse(key, value)?,
            _ => return Err(bad(key, "unknown key")),
        }
        Ok(())
    }

    /// Apply every `key = value` line of `text` on top of `self`.
    ///
    /// Blank lines and `#` comments are skipped; a later line overrides an
    /// earlier one.
    pub fn merge_text(&mut self, text: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: idx + 1,
                reason: format!("expected `key = value`, found `{line}`"),
            })?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.merge_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Check ranges. `s` outside `(0, 1/2)` is allowed with a warning.
    pub fn validate(&self) -> Result<()> {
        if self.n < 8 || self.n % 2 != 0 {
            return Err(bad("n", "must be even and at least 8"));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(bad("t_end", "must be positive"));
        }
        if !(self.dt >= 0.0) || !self.dt.is_finite() {
            return Err(bad("dt", "must be non-negative (0 selects the CFL step)"));
        }
        if !(self.s >= 0.0) || !self.s.is_finite() {
            return Err(bad("s", "must be non-negative"));
        }
        if !(self.s > 0.0 && self.s < 0.5) {
            log::warn!("s = {} lies outside (0, 1/2)", self.s);
        }
        if !(self.filter_level >= 0.0 && self.filter_level < 1.0) {
            return Err(bad("filter_level", "must lie in [0, 1)"));
        }
        if !(self.reparam_trigger > 0.0) {
            return Err(bad("reparam_trigger", "must be positive"));
        }
        if self.record_interval == 0 {
            return Err(bad("record_interval", "must be at least 1"));
        }
        if !(self.c_cfl > 0.0) || !self.c_cfl.is_finite() {
            return Err(bad("c_cfl", "must be positive"));
        }
        if !(self.f_max_limit > 0.0) {
            return Err(bad("f_max_limit", "must be positive"));
        }
        if !(self.min_gap_cells >= 0.0) || !self.min_gap_cells.is_finite() {
            return Err(bad("min_gap_cells", "must be non-negative"));
        }
        if !(self.delta >= 0.0) || !self.delta.is_finite() {
            return Err(bad("delta", "must be non-negative"));
        }
        if self.twin_mode == 0 {
            return Err(bad("twin_mode", "must be at least 1"));
        }
        Ok(())
    }

    /// Text form accepted by [`SimConfig::from_text`].
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        line("scenario", self.scenario.clone());
        line("n", self.n.to_string());
        line("dt", format!("{:e}", self.dt));
        line("t_end", format!("{:e}", self.t_end));
        line("s", format!("{:e}", self.s));
        line("filter_level", format!("{:e}", self.filter_level));
        line("reparam_trigger", format!("{:e}", self.reparam_trigger));
        line("record_interval", self.record_interval.to_string());
        line("snapshot_interval", self.snapshot_interval.to_string());
        line("output_dir", self.output_dir.display().to_string());
        line("seed", self.seed.to_string());
        line("threads", self.threads.to_string());
        line("c_cfl", format!("{:e}", self.c_cfl));
        line("f_max_limit", format!("{:e}", self.f_max_limit));
        line("min_gap_cells", format!("{:e}", self.min_gap_cells));
        line("max_steps", self.max_steps.to_string());
        line("delta", format!("{:e}", self.delta));
        line("twin_mode", self.twin_mode.to_string());
        line("radius", format!("{:e}", p.radius));
        line("semi_major", format!("{:e}", p.semi_major));
        line("semi_minor", format!("{:e}", p.semi_minor));
        line("amplitude", format!("{:e}", p.amplitude));
        line("mode", p.mode.to_string());
        line("roughness", format!("{:e}", p.roughness));
        line("gap", format!("{:e}", p.gap));
        out
    }
}

/// Run `f` on a pool of `threads` workers (`0` = rayon's default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| bad("threads", &e.to_string()))?;
    Ok(pool.install(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        SimConfig::default().validate().unwrap();
    }

    #[test]
    fn parses_comments_and_overrides() {
        let cfg = SimConfig::from_text(
            "# header\nscenario = ellipse\nn = 64 # trailing\n\nn=128\nsemi_major = 2.0\n",
        )
        .unwrap();
        assert_eq!(cfg.scenario, "ellipse");
        assert_eq!(cfg.n, 128);
        assert_eq!(cfg.params.semi_major, 2.0);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = SimConfig::from_text("n_nodes = 64").unwrap_err();
        assert!(err.to_string().contains("n_nodes"), "{err}");
    }

    #[test]
    fn unparsable_value_names_key() {
        let err = SimConfig::from_text("dt = fast").unwrap_err();
        assert!(err.to_string().contains("`dt`"), "{err}");
    }

    #[test]
    fn missing_equals_reports_line() {
        let err = SimConfig::from_text("n = 64\nscenario circle").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn invalid_ranges_rejected() {
        for text in ["n = 10\nn = 7", "n = 6", "t_end = 0", "dt = -1", "record_interval = 0"] {
            let err = SimConfig::from_text(text).unwrap_err();
            assert!(matches!(err, Error::Config { .. }), "{text}: {err}");
        }
    }

    #[test]
    fn s_outside_range_is_permitted() {
        SimConfig::from_text("s = 0.75").unwrap();
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = SimConfig::default();
        cfg.scenario = "rough_h2s".into();
        cfg.dt = 1.0 / 3.0;
        cfg.params.roughness = 0.123456789012345;
        cfg.output_dir = PathBuf::from("/tmp/run a");
        let back = SimConfig::from_text(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn every_key_is_settable() {
        let mut cfg = SimConfig::default();
        let defaults = SimConfig::default().to_text();
        for line in defaults.lines() {
            let (k, v) = line.split_once(" = ").unwrap();
            assert!(KEYS.contains(&k), "{k}");
            cfg.set(k, v).unwrap();
        }
        assert_eq!(KEYS.len(), defaults.lines().count());
    }
}
