//! `sqgfront`: command-line driver for the contour-dynamics simulator.
//!
//! Exit status: 0 when the run completed (or hit `max_steps`), 2 when it
//! stopped on a suspected singularity (outputs are still written), 1 on a
//! usage, configuration or I/O error.

mod plot;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use sqgfront::config::with_threads;
use sqgfront::diagnostics::record;
use sqgfront::evolve::run;
use sqgfront::experiments::{convergence_study, regularize, twin_run};
use sqgfront::io::{format_diagnostics_csv, format_twin_csv, read_snapshot, write_snapshot};
use sqgfront::reparam::{enforce_constant_speed, speed_variation};
use sqgfront::{Error, Result, Scenario, SimConfig, Termination};

#[derive(Parser, Debug)]
#[command(name = "sqgfront", version, about = "Evolve and diagnose SQG sharp-front contours")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve a scenario; writes diagnostics.csv and snapshots/.
    Run(ConfigArgs),
    /// Diagnostics record of one curve file, as CSV.
    Diagnose {
        curve: PathBuf,
        /// Sobolev offset; defaults to the one stored in the file.
        #[arg(long)]
        s: Option<f64>,
        /// Write here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Evolve a scenario and its perturbation; writes twin.csv and twin.json.
    Twin(ConfigArgs),
    /// Self-convergence study; writes orders.json.
    Converge {
        #[command(flatten)]
        config: ConfigArgs,
        /// Resolutions, ascending; the last is the spatial reference.
        #[arg(long, value_delimiter = ',', default_values_t = [32usize, 64, 128])]
        n_list: Vec<usize>,
        /// Step sizes, descending; the last is the temporal reference.
        #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.005, 0.0025])]
        dt_list: Vec<f64>,
    },
    /// Mollify a curve file and project it onto constant speed.
    Reparam {
        curve: PathBuf,
        /// Mollification width; 0 skips mollification.
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Write gnuplot scripts for the CSV files in a directory.
    Plot {
        /// Directory holding diagnostics.csv and/or twin.csv.
        dir: Option<PathBuf>,
    },
}

/// Configuration sources, applied in order: scenario defaults, `--config`
/// file, `--set` pairs, then the dedicated flags.
#[derive(Args, Debug, Default)]
struct ConfigArgs {
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// `key=value` override; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<SimConfig> {
        let file = match &self.config {
            Some(path) => Some(fs::read_to_string(path)?),
            None => None,
        };
        let sets = self
            .sets
            .iter()
            .map(|kv| {
                kv.split_once('=').ok_or_else(|| Error::Config {
                    key: kv.clone(),
                    reason: "expected KEY=VALUE".into(),
                })
            })
            .collect::<Result<Vec<_>>>()?;

        // The scenario must be known before its defaults can be laid down.
        let mut probe = SimConfig::default();
        if let Some(text) = &file {
            probe.merge_text(text)?;
        }
        for (k, v) in &sets {
            probe.set(k.trim(), v)?;
        }
        let name = self.scenario.clone().unwrap_or(probe.scenario);
        let defaults = name.parse::<Scenario>()?.defaults();

        let mut cfg = SimConfig {
            scenario: name,
            n: defaults.n,
            dt: defaults.dt,
            t_end: defaults.t_end,
            ..SimConfig::default()
        };
        if let Some(text) = &file {
            cfg.merge_text(text)?;
        }
        for (k, v) in &sets {
            cfg.set(k.trim(), v)?;
        }
        if let Some(v) = &self.scenario {
            cfg.scenario = v.clone();
        }
        macro_rules! flag {
            ($($field:ident),*) => { $(if let Some(v) = &self.$field { cfg.$field = v.clone(); })* };
        }
        flag!(n, dt, t_end, s, delta, seed, threads, output_dir);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn termination_status(t: Termination) -> ExitCode {
    if t.is_singular() {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn cmd_run(args: &ConfigArgs) -> Result<ExitCode> {
    let cfg = args.resolve()?;
    let out = with_threads(cfg.threads, || run(&cfg))??;
    let dir = &cfg.output_dir;
    let snap_dir = dir.join("snapshots");
    fs::create_dir_all(&snap_dir)?;
    write(&dir.join("diagnostics.csv"), &format_diagnostics_csv(&out.records))?;
    for (i, c) in out.snapshots.iter().enumerate() {
        write_snapshot(&snap_dir.join(format!("snapshot_{i:05}.txt")), c, cfg.s)?;
    }
    write(&dir.join("config.txt"), &cfg.to_text())?;
    let summary = json!({
        "termination": out.termination.as_str(),
        "message": out.message,
        "steps_taken": out.steps_taken,
        "dt": out.dt,
        "final_time": out.final_curve.time,
    });
    write(&dir.join("summary.json"), &format!("{summary:#}\n"))?;
    println!(
        "{}: {} steps of dt = {:e}, t = {:e}",
        out.termination.as_str(),
        out.steps_taken,
        out.dt,
        out.final_curve.time
    );
    if let Some(m) = &out.message {
        println!("{m}");
    }
    Ok(termination_status(out.termination))
}

fn cmd_diagnose(curve: &Path, s: Option<f64>, output: Option<&Path>) -> Result<ExitCode> {
    let snap = read_snapshot(curve)?;
    let rec = record(&snap.curve, s.unwrap_or(snap.s))?;
    let text = format_diagnostics_csv(&[rec]);
    match output {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_twin(args: &ConfigArgs) -> Result<ExitCode> {
    let cfg = args.resolve()?;
    let report = with_threads(cfg.threads, || twin_run(&cfg))??;
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir)?;
    write(&dir.join("twin.csv"), &format_twin_csv(&report))?;
    let summary = json!({
        "fitted_c": report.fitted_c,
        "fit_intercept": report.fit_intercept,
        "fit_residual": report.fit_residual,
        "termination": report.termination.as_str(),
        "dt": report.dt,
        "delta": cfg.delta,
    });
    write(&dir.join("twin.json"), &format!("{summary:#}\n"))?;
    println!(
        "{}: fitted C = {:e}, log residual = {:e}",
        report.termination.as_str(),
        report.fitted_c,
        report.fit_residual
    );
    Ok(termination_status(report.termination))
}

fn cmd_converge(args: &ConfigArgs, n_list: &[usize], dt_list: &[f64]) -> Result<ExitCode> {
    let cfg = args.resolve()?;
    let report = with_threads(cfg.threads, || convergence_study(&cfg, n_list, dt_list))??;
    fs::create_dir_all(&cfg.output_dir)?;
    let text = serde_json::to_string_pretty(&report).map_err(|e| Error::Config {
        key: "orders.json".into(),
        reason: e.to_string(),
    })?;
    write(&cfg.output_dir.join("orders.json"), &format!("{text}\n"))?;
    println!("spatial orders: {:?}", report.spatial_orders);
    println!("temporal orders: {:?}", report.temporal_orders);
    Ok(ExitCode::SUCCESS)
}

fn cmd_reparam(curve: &Path, eps: f64, output: &Path) -> Result<ExitCode> {
    if !(eps >= 0.0) {
        return Err(Error::Config {
            key: "eps".into(),
            reason: "must be non-negative".into(),
        });
    }
    let snap = read_snapshot(curve)?;
    let out = if eps > 0.0 {
        regularize(&snap.curve, eps)?
    } else {
        enforce_constant_speed(&snap.curve)?.0
    };
    write_snapshot(output, &out, snap.s)?;
    println!(
        "speed variation {:e} -> {:e}",
        speed_variation(&snap.curve),
        speed_variation(&out)
    );
    Ok(ExitCode::SUCCESS)
}

fn dispatch(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Diagnose { curve, s, output } => cmd_diagnose(curve, *s, output.as_deref()),
        Command::Twin(args) => cmd_twin(args),
        Command::Converge { config, n_list, dt_list } => cmd_converge(config, n_list, dt_list),
        Command::Reparam { curve, eps, output } => cmd_reparam(curve, *eps, output),
        Command::Plot { dir } => {
            let dir = dir.clone().unwrap_or_else(sqgfront::config::default_output_dir);
            let written = plot::write_scripts(&dir)?;
            if written.is_empty() {
                return Err(Error::Config {
                    key: "dir".into(),
                    reason: format!("no diagnostics.csv or twin.csv in {}", dir.display()),
                });
            }
            for p in written {
                println!("{}", p.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
