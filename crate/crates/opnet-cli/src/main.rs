//! `opnet` command line: single runs, sweeps, closed-form analytics and the
//! encounter power-law fit.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use opnet_sim::analytics::{
    encounter_probability, expected_contact_duration, expected_epoch_time,
    expected_transition_length, fit_cube_law, max_intercontact_time, EncounterRegion,
};
use opnet_sim::engine;
use opnet_sim::mobility::region_visit_probability;
use opnet_cli::report::{emit_report, parse_report, ReportRow};
use opnet_cli::sweep::{parse_axis, run_point, run_sweep, SweepSpec};
use opnet_sim::scenario::{validate_scenario, ScenarioConfig};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "opnet",
    about = "Deterministic opportunistic-network simulator",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario and print its metrics.
    Run {
        /// Scenario file.
        cfg: PathBuf,
        /// Override the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write a one-row CSV report.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Also write the full event log.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Also print the closed-form estimators for this scenario.
        #[arg(long)]
        analyze: bool,
    },
    /// Run a scenario across one or more axes and write a CSV report.
    Sweep {
        /// Base scenario file.
        cfg: PathBuf,
        /// Axis spec, repeatable (crossed): `area_side=1000,2000`,
        /// `mobility=biased,unbiased`, `router=epidemic,snw,prophet`.
        #[arg(long = "axis", required = true)]
        axes: Vec<String>,
        /// Replications per point; replication k uses seed base+k.
        #[arg(long, default_value_t = 1)]
        reps: u64,
        /// Worker threads for parallel points (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Output CSV path.
        #[arg(long)]
        csv: PathBuf,
    },
    /// Print the closed-form estimators for a scenario.
    Analyze {
        /// Scenario file.
        cfg: PathBuf,
    },
    /// Fit `count = c * area^exponent` over a sweep CSV's encounter counts.
    FitCube {
        /// Sweep CSV produced by `opnet sweep`.
        #[arg(long)]
        csv: PathBuf,
    },
}

fn load_scenario(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let cfg = opnet_sim::config::parse_scenario(&text)
        .with_context(|| format!("parsing {}", path.display()))?;
    validate_scenario(&cfg)?;
    Ok(cfg)
}

fn scenario_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "NA".into())
}

fn cmd_run(
    path: &Path,
    seed: Option<u64>,
    csv: Option<&Path>,
    log_path: Option<&Path>,
    analyze: bool,
) -> Result<()> {
    let mut cfg = load_scenario(path)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let name = scenario_name(path);
    let mobility = if cfg.is_biased() { "biased" } else { "unbiased" };
    let row = run_point(&cfg, &name, mobility);
    if row.created.is_none() {
        bail!("simulation failed for {}", path.display());
    }

    println!("scenario              {name}");
    println!("router                {}", cfg.router.as_str());
    println!("mobility              {mobility}");
    println!("seed                  {}", cfg.seed);
    println!("created               {}", row.created.unwrap());
    println!("delivered (distinct)  {}", row.delivered.unwrap());
    println!("relayed               {}", row.relayed.unwrap());
    println!("dropped (ttl)         {}", row.dropped_ttl.unwrap());
    println!("dropped (buffer)      {}", row.dropped_buffer.unwrap());
    println!(
        "delivery probability  {}",
        fmt_opt(row.delivery_probability)
    );
    println!("overhead ratio        {}", fmt_opt(row.overhead_ratio));
    println!("average latency (s)   {}", fmt_opt(row.avg_latency_s));
    println!(
        "encounters src/dst    {}/{}",
        row.encounters_src.unwrap(),
        row.encounters_dst.unwrap()
    );

    if let Some(csv_path) = csv {
        std::fs::write(csv_path, emit_report(&[row]))
            .with_context(|| format!("writing {}", csv_path.display()))?;
    }
    if let Some(log_path) = log_path {
        // Re-run is cheap relative to keeping every log in memory for the
        // common no-log case; determinism makes it exact.
        let (_, log) = engine::run(&cfg)?;
        std::fs::write(log_path, log.export())
            .with_context(|| format!("writing {}", log_path.display()))?;
    }
    if analyze {
        println!();
        print_analysis(&cfg)?;
    }
    Ok(())
}

fn print_analysis(cfg: &ScenarioConfig) -> Result<()> {
    let field = cfg.field;
    println!("field side (m)                    {}", field.side);
    println!("field area (m^2)                  {}", field.area());
    println!(
        "expected transition length (m)    {:.4}",
        expected_transition_length(&field)
    );
    let mobile = cfg.mobile_nodes().next();
    match mobile {
        Some(node) => {
            let v = node.velocity.expect("validated mobile node");
            let r = node.rf_range;
            let b = node.bit_rate;
            let lambda = cfg.traffic.lambda();
            println!(
                "expected epoch time (s)           {:.4}",
                expected_epoch_time(&field, v)?
            );
            println!(
                "expected contact duration (s)     {:.4}  (diametral bound 2R/v)",
                expected_contact_duration(r, v)?
            );
            println!(
                "max inter-contact, rate (s)       {:.4}  (2Rb/(lambda v))",
                max_intercontact_time(r, b, lambda, v)?
            );
            let buffer_bound = cfg
                .source()
                .map(|s| s.buffer_capacity as f64 / lambda)
                .unwrap_or(f64::NAN);
            println!("max inter-contact, buffer (s)     {buffer_bound:.4}  (B/lambda)");
        }
        None => println!("no mobile nodes: epoch, contact and inter-contact bounds undefined"),
    }
    for (label, node) in [("source", cfg.source()), ("destination", cfg.destination())] {
        if let Some(node) = node {
            let center = node.position.expect("validated static node");
            let region = EncounterRegion::new(center, node.rf_range, &field)
                .map_err(|e| anyhow!("{label} encounter region: {e}"))?;
            println!(
                "encounter probability {label:<12} {:.6e}",
                encounter_probability(&region, &field)
            );
        }
    }
    let mut seen = Vec::new();
    for node in &cfg.nodes {
        if let Some(bias) = node.bias {
            if seen.contains(&bias) {
                continue;
            }
            seen.push(bias);
            println!(
                "bias region ({}, {}, {}, {}): degree {}, sigma {:.4}, region visit probability {:.4}",
                bias.region.x_min,
                bias.region.y_min,
                bias.region.x_max,
                bias.region.y_max,
                bias.degree,
                bias.sigma,
                region_visit_probability(&bias)
            );
        }
    }
    Ok(())
}

fn cmd_sweep(
    path: &Path,
    axes: &[String],
    reps: u64,
    workers: Option<usize>,
    csv: &Path,
) -> Result<()> {
    if reps < 1 {
        bail!("--reps must be at least 1");
    }
    let base = load_scenario(path)?;
    let axes = axes
        .iter()
        .map(|s| parse_axis(s))
        .collect::<Result<Vec<_>>>()?;
    let spec = SweepSpec {
        base,
        base_name: scenario_name(path),
        axes,
        replications: reps,
    };
    let rows = match workers {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .context("building worker pool")?
            .install(|| run_sweep(&spec)),
        None => run_sweep(&spec),
    };
    std::fs::write(csv, emit_report(&rows)).with_context(|| format!("writing {}", csv.display()))?;
    eprintln!("wrote {} rows to {}", rows.len(), csv.display());
    Ok(())
}

fn cmd_fit_cube(csv: &Path) -> Result<()> {
    let text = std::fs::read_to_string(csv).with_context(|| format!("reading {}", csv.display()))?;
    let rows = parse_report(&text).map_err(|e| anyhow!("{}: {e}", csv.display()))?;
    let samples = encounter_samples(&rows)?;
    println!("side (m)    area (m^2)      mean encounters");
    for &(side, area, mean) in &samples {
        println!("{side:<11} {area:<15} {mean}");
    }
    let area_fit = fit_cube_law(
        &samples
            .iter()
            .map(|&(_, area, mean)| (area, mean))
            .collect::<Vec<_>>(),
    )?;
    let side_fit = fit_cube_law(
        &samples
            .iter()
            .map(|&(side, _, mean)| (side, mean))
            .collect::<Vec<_>>(),
    )?;
    println!();
    println!("fit over area in m^2:  count = c * area^exponent");
    println!("  exponent  {:.4}", area_fit.exponent);
    println!("  c         {:.6e}", area_fit.c);
    println!("  residual  {:.4}  (rms, log space)", area_fit.residual);
    println!();
    println!("fit over side-denominated field size (a 1000 m square counts as 1000):");
    println!("  exponent  {:.4}", side_fit.exponent);
    println!("  c         {:.6e}", side_fit.c);
    println!("  residual  {:.4}  (rms, log space)", side_fit.residual);
    Ok(())
}

/// Groups sweep rows by area side and averages total endpoint encounters:
/// `(side, side^2, mean count)` per side, ascending.
fn encounter_samples(rows: &[ReportRow]) -> Result<Vec<(f64, f64, f64)>> {
    let mut by_side: BTreeMap<u64, (f64, Vec<f64>)> = BTreeMap::new();
    for row in rows {
        let (Some(src), Some(dst)) = (row.encounters_src, row.encounters_dst) else {
            continue;
        };
        let key = row.area_side.to_bits();
        by_side
            .entry(key)
            .or_insert_with(|| (row.area_side, Vec::new()))
            .1
            .push((src + dst) as f64);
    }
    if by_side.len() < 3 {
        bail!(
            "need rows with encounter counts for at least 3 distinct area sides, got {}",
            by_side.len()
        );
    }
    let mut samples: Vec<(f64, f64, f64)> = by_side
        .values()
        .map(|(side, counts)| {
            let mean = counts.iter().sum::<f64>() / counts.len() as f64;
            (*side, side * side, mean)
        })
        .collect();
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(samples)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.cmd {
        Cmd::Run {
            cfg,
            seed,
            csv,
            log,
            analyze,
        } => cmd_run(cfg, *seed, csv.as_deref(), log.as_deref(), *analyze),
        Cmd::Sweep {
            cfg,
            axes,
            reps,
            workers,
            csv,
        } => cmd_sweep(cfg, axes, *reps, *workers, csv),
        Cmd::Analyze { cfg } => {
            let cfg = load_scenario(cfg)?;
            print_analysis(&cfg)
        }
        Cmd::FitCube { csv } => cmd_fit_cube(csv),
    }
}
