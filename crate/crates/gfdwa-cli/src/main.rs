//! Scenario runner: `run` executes one scenario under a selected planner
//! variant and writes trace/metrics files; `batch` runs a whole suite under
//! every variant and checks the success table against the expected one.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use gfdwa::scenario::{self, Scenario};
use gfdwa::sim;
use gfdwa::variant::{CollisionModel, VariantRegistry, DWA_ABLATION, GF_DWA};

const EXIT_FAILURE_OUTCOME: u8 = 1;
const EXIT_CONFIG_ERROR: u8 = 2;

/// Expected batch results for the bundled suite.
const EXPECTED_BATCH: &str = include_str!("../expected/batch_expected.json");

#[derive(Parser)]
#[command(name = "gfdwa", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its trace and metrics.
    Run(RunArgs),
    /// Run every scenario in a directory (default: the bundled suite) under
    /// every planner variant and compare the success table to the expected
    /// one.
    Batch(BatchArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file path, or the name of a bundled scenario (s1..s5,
    /// multi1, multi2).
    scenario: String,
    /// Output directory for trace.jsonl, metrics.json, and run_info.json.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Planner variant to run under.
    #[arg(long, default_value = GF_DWA)]
    variant: String,
    /// Scenario field override as a dotted path, e.g.
    /// `weights.collision_gradient=0` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Also write per-step candidate endpoints to plotdata.jsonl.
    #[arg(long)]
    plot_data: bool,
}

#[derive(Args)]
struct BatchArgs {
    /// Directory of scenario TOML files; the bundled suite when omitted.
    dir: Option<PathBuf>,
    /// Output directory for batch_results.json and batch_results.txt.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for running scenarios concurrently.
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Batch(args) => cmd_batch(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_CONFIG_ERROR)
        }
    }
}

fn parse_overrides(raw: &[String]) -> Result<Vec<(String, String)>> {
    raw.iter()
        .map(|s| {
            s.split_once('=')
                .map(|(k, v)| (k.trim().to_owned(), v.trim().to_owned()))
                .ok_or_else(|| anyhow!("override `{s}` is not of the form key=value"))
        })
        .collect()
}

fn load_scenario_arg(arg: &str, overrides: &[(String, String)]) -> Result<Scenario> {
    let path = Path::new(arg);
    let text = if path.exists() {
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    } else if let Some(bundled) = scenario::bundled(arg) {
        bundled.to_owned()
    } else {
        return Err(anyhow!(
            "`{arg}` is neither a scenario file nor a bundled scenario name"
        ));
    };
    scenario::load_scenario_with_overrides(&text, overrides)
        .with_context(|| format!("loading scenario `{arg}`"))
}

fn resolve_variant(registry: &VariantRegistry, name: &str) -> Result<Arc<dyn CollisionModel>> {
    registry.create(name).ok_or_else(|| {
        anyhow!(
            "unknown variant `{name}`; registered: {}",
            registry.names().join(", ")
        )
    })
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let overrides = parse_overrides(&args.set)?;
    let scenario = load_scenario_arg(&args.scenario, &overrides)?;
    let registry = VariantRegistry::builtin();
    let model = resolve_variant(&registry, &args.variant)?;

    let started = std::time::Instant::now();
    let outcome = sim::run_with(&scenario, model.as_ref())
        .with_context(|| format!("running scenario `{}`", scenario.name))?;
    let elapsed = started.elapsed();
    let summary = sim::metrics(&outcome);

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    std::fs::write(args.out.join("trace.jsonl"), sim::trace_to_jsonl(&outcome))?;
    std::fs::write(
        args.out.join("metrics.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    if args.plot_data {
        std::fs::write(args.out.join("plotdata.jsonl"), sim::plot_to_jsonl(&outcome))?;
    }
    // provenance lives in a sidecar so the data files stay reproducible
    let info = serde_json::json!({
        "tool": "gfdwa",
        "version": env!("CARGO_PKG_VERSION"),
        "scenario": args.scenario,
        "variant": args.variant,
        "overrides": args.set,
        "elapsed_seconds": elapsed.as_secs_f64(),
        "created_unix": std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    });
    std::fs::write(
        args.out.join("run_info.json"),
        serde_json::to_string_pretty(&info)?,
    )?;

    for robot in &summary.robots {
        println!(
            "{}: {:?}{}",
            robot.id,
            robot.status,
            robot
                .steps_to_goal
                .map(|s| format!(" in {s} steps"))
                .unwrap_or_default()
        );
    }
    println!(
        "{}: {} (max steps {})",
        scenario.name,
        if summary.success { "success" } else { "failure" },
        summary.max_steps
    );
    Ok(if summary.success {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILURE_OUTCOME)
    })
}

#[derive(Debug, Clone, serde::Serialize)]
struct BatchRow {
    scenario: String,
    #[serde(flatten)]
    results: std::collections::BTreeMap<String, String>,
}

fn run_cell(scenario: &Scenario, model: &dyn CollisionModel) -> String {
    match sim::run_with(scenario, model) {
        Ok(outcome) => {
            if sim::metrics(&outcome).success {
                "success".to_owned()
            } else {
                "failure".to_owned()
            }
        }
        Err(err) => format!("error: {err}"),
    }
}

fn cmd_batch(args: BatchArgs) -> Result<ExitCode> {
    // (name, scenario source or load error)
    let sources: Vec<(String, Result<String>)> = match &args.dir {
        Some(dir) => {
            let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
                .with_context(|| format!("reading {}", dir.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == "toml"))
                .collect();
            if entries.is_empty() {
                return Err(anyhow!("no scenario files in {}", dir.display()));
            }
            entries.sort();
            entries
                .into_iter()
                .map(|p| {
                    let name = p.file_stem().unwrap().to_string_lossy().into_owned();
                    let text = std::fs::read_to_string(&p)
                        .with_context(|| format!("reading {}", p.display()));
                    (name, text)
                })
                .collect()
        }
        None => {
            let mut names = scenario::BUNDLED_NAMES;
            names.sort_unstable();
            names
                .iter()
                .map(|name| (name.to_string(), Ok(scenario::bundled(name).unwrap().to_owned())))
                .collect()
        }
    };

    let registry = VariantRegistry::builtin();
    let variants = [GF_DWA, DWA_ABLATION];
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers.unwrap_or_else(|| sources.len().min(4)))
        .build()
        .context("building worker pool")?;

    let rows: Vec<BatchRow> = pool.install(|| {
        sources
            .par_iter()
            .map(|(name, text)| {
                let mut results = std::collections::BTreeMap::new();
                match text {
                    Ok(text) => match scenario::load_scenario(text) {
                        Ok(scenario) => {
                            for variant in variants {
                                let model = registry.create(variant).unwrap();
                                results.insert(
                                    variant.to_owned(),
                                    run_cell(&scenario, model.as_ref()),
                                );
                            }
                        }
                        Err(err) => {
                            for variant in variants {
                                results.insert(variant.to_owned(), format!("error: {err}"));
                            }
                        }
                    },
                    Err(err) => {
                        for variant in variants {
                            results.insert(variant.to_owned(), format!("error: {err:#}"));
                        }
                    }
                }
                BatchRow {
                    scenario: name.clone(),
                    results,
                }
            })
            .collect()
    });

    let mut table = String::new();
    table.push_str(&format!("{:<12}{:<16}{}\n", "scenario", GF_DWA, DWA_ABLATION));
    for row in &rows {
        table.push_str(&format!(
            "{:<12}{:<16}{}\n",
            row.scenario,
            row.results.get(GF_DWA).map(String::as_str).unwrap_or("-"),
            row.results.get(DWA_ABLATION).map(String::as_str).unwrap_or("-"),
        ));
    }
    print!("{table}");

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    std::fs::write(
        args.out.join("batch_results.json"),
        serde_json::to_string_pretty(&rows)?,
    )?;
    std::fs::write(args.out.join("batch_results.txt"), &table)?;

    let expected: serde_json::Value =
        serde_json::from_str(EXPECTED_BATCH).expect("bundled expectation parses");
    let got = serde_json::to_value(&rows)?;
    if got == expected {
        println!("batch matches the expected results");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("batch differs from the expected results");
        Ok(ExitCode::from(EXIT_FAILURE_OUTCOME))
    }
}
