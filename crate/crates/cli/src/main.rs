use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use coverage_core::acceptance::{run_acceptance, SuiteConfig};
use coverage_core::experiments::{
    generate_random_scenario, parse_scenario, render_report, report_json, run_experiment, Epsilon0, Format, Report,
    Scenario, ScenarioTemplate,
};
use coverage_core::protocol::MultiHopCost;

#[derive(Parser)]
#[command(name = "covctl", version, about = "Multi-robot coverage scenarios, solvers and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Template {
    /// 1500x850 room, two rectangular obstacles, random Gaussian centre.
    Desk,
    /// Obstacle-free room with the Gaussian in the far corner.
    Convex,
}

#[derive(Subcommand)]
enum Command {
    /// Draw scenario files from a template.
    Gen {
        #[arg(long, value_enum, default_value = "desk")]
        template: Template,
        #[arg(long, default_value_t = 10)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_parser = parse_factor, default_value = "4")]
        factor: u32,
        #[arg(long, default_value = "auto")]
        epsilon0: Epsilon0,
        /// Output directory; one `<id>.json` per scenario.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Run scenario files (or directories of them) and write a JSON report.
    Run {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
        /// Overrides every scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_parser = parse_factor)]
        factor: Option<u32>,
        #[arg(long)]
        epsilon0: Option<Epsilon0>,
        /// Report path; stdout when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance suites and print one PASS/FAIL line per criterion.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Smaller suites for a fast smoke check.
        #[arg(long)]
        quick: bool,
        #[arg(long, value_enum, default_value = "vertex-aware")]
        multi_hop: MultiHop,
    },
    /// Turn a JSON report into CSV, JSON and SVG files.
    Render {
        report: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "csv,json,svg")]
        format: Vec<Format>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MultiHop {
    VertexAware,
    AsWritten,
}

fn parse_factor(s: &str) -> std::result::Result<u32, String> {
    match s {
        "2" => Ok(2),
        "4" => Ok(4),
        _ => Err(format!("factor must be 2 or 4, got {s}")),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen {
            template,
            m,
            count,
            seed,
            factor,
            epsilon0,
            out,
        } => {
            let mut t = match template {
                Template::Desk => ScenarioTemplate::desk(m),
                Template::Convex => ScenarioTemplate::convex(m),
            };
            t.radius_factor = factor;
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            for k in 0..count {
                let mut s = generate_random_scenario(&t, seed.wrapping_add(k))?;
                s.epsilon0 = epsilon0;
                let path = out.join(format!("{}.json", s.id));
                std::fs::write(&path, s.to_json()?).with_context(|| format!("writing {}", path.display()))?;
                println!("{}", path.display());
            }
        }
        Command::Run {
            scenarios,
            seed,
            factor,
            epsilon0,
            out,
        } => {
            let mut batch = load_scenarios(&scenarios)?;
            for s in &mut batch {
                if let Some(seed) = seed {
                    s.seed = seed;
                }
                if let Some(f) = factor {
                    s.radius_factor = f;
                }
                if let Some(e) = epsilon0 {
                    s.epsilon0 = e;
                }
            }
            let report = run_experiment(&batch);
            let json = report_json(&report)?;
            match out {
                Some(path) => std::fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{json}"),
            }
            for s in &report.summary {
                eprintln!(
                    "{:<18} scenarios {:>3}  mean cost {:>12}  mean % vs centralized {:>8}",
                    s.solver.name(),
                    s.scenarios,
                    s.mean_cost.map_or("-".into(), |c| format!("{c:.4}")),
                    s.mean_pct_vs_centralized.map_or("-".into(), |p| format!("{p:.2}")),
                );
            }
            if report.scenarios.iter().any(|s| s.error.is_some()) {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Verify { seed, quick, multi_hop } => {
            let mut cfg = SuiteConfig {
                seed,
                multi_hop: match multi_hop {
                    MultiHop::VertexAware => MultiHopCost::VertexAware,
                    MultiHop::AsWritten => MultiHopCost::AsWritten,
                },
                ..SuiteConfig::default()
            };
            if quick {
                cfg.oracle_instances = 20;
                cfg.locality_tuples = 50;
                cfg.desk_scenarios = 2;
            }
            let criteria = run_acceptance(&cfg);
            for c in &criteria {
                println!("{}", c.line());
            }
            if criteria.iter().any(|c| !c.passed) {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Render { report, out, format } => {
            let text = std::fs::read_to_string(&report).with_context(|| format!("reading {}", report.display()))?;
            let parsed: Report = serde_json::from_str(&text).with_context(|| format!("parsing {}", report.display()))?;
            for path in render_report(&parsed, &out, &format)? {
                println!("{}", path.display());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn load_scenarios(paths: &[PathBuf]) -> Result<Vec<Scenario>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut inner: Vec<PathBuf> = std::fs::read_dir(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "json"))
                .collect();
            inner.sort();
            files.extend(inner);
        } else {
            files.push(p.clone());
        }
    }
    if files.is_empty() {
        bail!("no scenario files found");
    }
    files.iter().map(|f| load_one(f)).collect()
}

fn load_one(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_scenario(&text).with_context(|| format!("in {}", path.display()))
}
