//! Command-line front end: runs cruises and sweeps, fits energy lines,
//! and emits force maps. All file output happens here.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 scenario
//! timeout (partial data still written).

mod emit;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use windward_core::energy::fit_line;
use windward_core::experiment::{build_maps, run_cruise, run_sweep, SweepSpec};
use windward_core::forcemap::save_map_csv;
use windward_core::{RunConfig, TackSide};

#[derive(Parser)]
#[command(name = "windward", version, about = "Hybrid sailboat cruise simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one multi-loop cruise and write trajectory/energy/event CSVs.
    Simulate {
        /// TOML configuration file; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Close-hauled heading angle in degrees.
        #[arg(long)]
        theta: Option<f64>,
        /// Number of loops to sail.
        #[arg(long)]
        loops: Option<u32>,
        /// RNG seed for this scenario.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Sweep several heading angles over several seeds.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated heading angles in degrees.
        #[arg(long, value_delimiter = ',')]
        thetas: Option<Vec<f64>>,
        #[arg(long)]
        loops: Option<u32>,
        /// Comma-separated seeds (one cruise per theta per seed).
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Fit the energy-time line of an energy CSV.
    Fit {
        /// energy.csv produced by `simulate`.
        #[arg(long)]
        energy: PathBuf,
        /// Also print the predicted energy at this time (s).
        #[arg(long)]
        predict_at: Option<f64>,
    },
    /// Emit the sail force-distribution map as CSV.
    Forcemap {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Tack side: right or left.
        #[arg(long, default_value = "right")]
        side: String,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the effective configuration as canonical TOML.
    DumpConfig {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load_config(path: &Option<PathBuf>) -> Result<RunConfig> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("cannot read config {}", p.display()))?;
            Ok(RunConfig::from_toml_str(&text)?)
        }
        None => Ok(RunConfig::default()),
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn cmd_simulate(
    config: Option<PathBuf>,
    theta: Option<f64>,
    loops: Option<u32>,
    seed: Option<u64>,
    out: PathBuf,
) -> Result<u8> {
    let cfg = load_config(&config)?;
    let theta = theta.unwrap_or(cfg.mission.theta_setting_deg);
    let loops = loops.unwrap_or(cfg.mission.loops_target);
    let seed = seed.unwrap_or(cfg.sim.seed);
    let result = run_cruise(&cfg, theta, loops, seed)?;

    fs::create_dir_all(&out).with_context(|| format!("cannot create {}", out.display()))?;
    write(&out.join("trajectory.csv"), &emit::trajectory_csv(&result))?;
    write(&out.join("energy.csv"), &emit::energy_csv(&result.ledger, &cfg.power))?;
    write(&out.join("events.csv"), &emit::events_csv(&result))?;
    let summary = emit::cruise_summary(&result, &cfg.power, loops);
    write(&out.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(if result.timed_out { 2 } else { 0 })
}

fn cmd_sweep(
    config: Option<PathBuf>,
    thetas: Option<Vec<f64>>,
    loops: Option<u32>,
    seeds: Option<Vec<u64>>,
    out: PathBuf,
) -> Result<u8> {
    let cfg = load_config(&config)?;
    let mut spec = SweepSpec::default();
    if let Some(t) = thetas {
        spec.thetas_deg = t;
    }
    if let Some(l) = loops {
        spec.loops = l;
    }
    if let Some(s) = seeds {
        spec.seeds = s;
    }
    let report = run_sweep(&cfg, &spec)?;

    fs::create_dir_all(&out).with_context(|| format!("cannot create {}", out.display()))?;
    write(&out.join("sweep.csv"), &emit::sweep_csv(&report))?;
    let summary = emit::sweep_summary(&report);
    write(&out.join("summary.txt"), &summary)?;
    print!("{summary}");
    let timeouts = report.rows.iter().any(|r| r.timed_out_runs > 0);
    Ok(if timeouts { 2 } else { 0 })
}

fn cmd_fit(energy: PathBuf, predict_at: Option<f64>) -> Result<u8> {
    let text = fs::read_to_string(&energy)
        .with_context(|| format!("cannot read {}", energy.display()))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().context("energy CSV is empty")?;
    let columns: Vec<&str> = header.split(',').collect();
    let t_col = columns
        .iter()
        .position(|c| c.trim() == "t")
        .context("energy CSV has no `t` column")?;
    let e_col = columns
        .iter()
        .position(|c| c.trim() == "cumulative_j")
        .context("energy CSV has no `cumulative_j` column")?;
    let mut ts = Vec::new();
    let mut es = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let parse = |col: usize, name: &str| -> Result<f64> {
            fields
                .get(col)
                .with_context(|| format!("line {}: missing {name} field", idx + 1))?
                .trim()
                .parse::<f64>()
                .with_context(|| format!("line {}: bad {name} value", idx + 1))
        };
        ts.push(parse(t_col, "t")?);
        es.push(parse(e_col, "cumulative_j")?);
    }
    let fit = fit_line(ts.iter().copied(), es.iter().copied())?;
    println!("slope_w     : {:.9}", fit.slope_w);
    println!("intercept_j : {:.9}", fit.intercept_j);
    println!("r_squared   : {:.9}", fit.r_squared);
    if let Some(t) = predict_at {
        println!("predicted_j : {:.9}", fit.predict(t));
    }
    Ok(0)
}

fn cmd_forcemap(config: Option<PathBuf>, side: String, out: PathBuf) -> Result<u8> {
    let cfg = load_config(&config)?;
    let side = match side.to_ascii_lowercase().as_str() {
        "right" => TackSide::Right,
        "left" => TackSide::Left,
        other => bail!("unknown tack side `{other}` (use right or left)"),
    };
    let (right, left) = build_maps(&cfg)?;
    let map = match side {
        TackSide::Right => right,
        TackSide::Left => left,
    };
    if let Some(dir) = out.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    save_map_csv(&map, &out)?;
    println!(
        "wrote {} ({} x {} cells)",
        out.display(),
        map.theta_grid.len(),
        map.phi_grid.len()
    );
    Ok(0)
}

fn run() -> Result<u8> {
    let cli = Cli::try_parse().map_err(|e| {
        // clap prints its own message; keep exit code 1 for usage errors.
        let _ = e.print();
        std::process::exit(1);
    });
    let cli = match cli {
        Ok(c) => c,
        Err(_) => unreachable!(),
    };
    match cli.command {
        Command::Simulate {
            config,
            theta,
            loops,
            seed,
            out,
        } => cmd_simulate(config, theta, loops, seed, out),
        Command::Sweep {
            config,
            thetas,
            loops,
            seeds,
            out,
        } => cmd_sweep(config, thetas, loops, seeds, out),
        Command::Fit { energy, predict_at } => cmd_fit(energy, predict_at),
        Command::Forcemap { config, side, out } => cmd_forcemap(config, side, out),
        Command::DumpConfig { config } => {
            let cfg = load_config(&config)?;
            print!("{}", cfg.to_toml_string());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
