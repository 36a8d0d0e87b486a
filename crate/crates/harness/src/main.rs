use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mpquic_pns::experiment::{compare_modes, run_scenario, sweep_default_limit, ComparisonReport, MetricsReport};
use mpquic_pns::SpaceMode;
use mpquic_pns_harness::export::{self, OutputFormat};
use mpquic_pns_harness::{load_config, ConfigError};
use serde::Serialize;

/// Simulates a bulk transfer over multipath QUIC with single or multiple
/// packet number spaces.
#[derive(Parser)]
#[command(name = "pns-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and print its metrics.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the numbering mode from the config.
        #[arg(long, value_parser = parse_mode)]
        mode: Option<SpaceMode>,
        #[arg(long)]
        seed: Option<u64>,
        /// CSV: a directory of tables. JSON: a single file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Run a scenario under SPNS and MPNS and print the comparison.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Also sweep the suppression default limit under SPNS, e.g.
        /// `2,4,8,64,inf`; `inf` disables suppression.
        #[arg(long, value_delimiter = ',', value_parser = parse_limit)]
        sweep_default_limit: Vec<Option<usize>>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
}

fn parse_mode(s: &str) -> Result<SpaceMode, String> {
    match s.to_ascii_lowercase().as_str() {
        "spns" => Ok(SpaceMode::Spns),
        "mpns" => Ok(SpaceMode::Mpns),
        _ => Err(format!("unknown mode {s:?}, expected spns or mpns")),
    }
}

fn parse_limit(s: &str) -> Result<Option<usize>, String> {
    if s.eq_ignore_ascii_case("inf") {
        return Ok(None);
    }
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(Some(n)),
        _ => Err(format!("invalid limit {s:?}, expected a positive integer or inf")),
    }
}

enum Failure {
    Config(String),
    Incomplete,
    Other(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<mpquic_pns::Error> for Failure {
    fn from(e: mpquic_pns::Error) -> Self {
        match e {
            mpquic_pns::Error::Config(_) => Failure::Config(e.to_string()),
            _ => Failure::Other(e.to_string()),
        }
    }
}

fn other<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Other(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Incomplete) => {
            eprintln!("error: transfer did not complete before the duration cap");
            ExitCode::from(3)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run {
            config,
            mode,
            seed,
            out,
            format,
        } => {
            let mut cfg = load_config(&config)?;
            cfg.mode = mode.unwrap_or(cfg.mode);
            cfg.seed = seed.unwrap_or(cfg.seed);
            let m = run_scenario(&cfg)?;
            print_run(&m);
            if let Some(out) = out {
                match format {
                    OutputFormat::Csv => export::write_report_csv_dir(&m, &out).map_err(other)?,
                    OutputFormat::Json => export::write_json(&m, create(&out)?).map_err(other)?,
                }
            }
            if m.incomplete {
                return Err(Failure::Incomplete);
            }
        }
        Command::Compare {
            config,
            seed,
            sweep_default_limit: limits,
            out,
            format,
        } => {
            let mut cfg = load_config(&config)?;
            cfg.seed = seed.unwrap_or(cfg.seed);
            let cmp = compare_modes(&cfg)?;
            print!("{}", cmp.table());
            let sweep = if limits.is_empty() {
                Vec::new()
            } else {
                let spns = mpquic_pns::experiment::ScenarioConfig {
                    mode: SpaceMode::Spns,
                    ..cfg
                };
                sweep_default_limit(&spns, &limits)?
            };
            if !sweep.is_empty() {
                println!();
                println!(
                    "{:>14}{:>14}{:>14}{:>12}",
                    "default_limit", "ACK size (B)", "speed (kB/s)", "max ranges"
                );
                for (l, m) in &sweep {
                    let l = l.map_or("inf".to_string(), |l| l.to_string());
                    println!(
                        "{l:>14}{:>14.2}{:>14.1}{:>12}",
                        m.avg_ack_frame_size, m.goodput, m.max_ranges_per_frame
                    );
                }
            }
            if let Some(out) = out {
                write_comparison(&cmp, &sweep, &out, format)?;
            }
            let incomplete = cmp.spns.incomplete || cmp.mpns.incomplete || sweep.iter().any(|(_, m)| m.incomplete);
            if incomplete {
                return Err(Failure::Incomplete);
            }
        }
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Other(format!("cannot create {}: {e}", path.display())))
}

fn print_run(m: &MetricsReport) {
    println!("mode                 {}", m.mode);
    println!("completion time      {:.3} s", m.completion_time);
    println!("goodput              {:.1} kB/s", m.goodput);
    println!("ack frames           {}", m.ack_frames);
    println!("avg ack frame size   {:.2} B", m.avg_ack_frame_size);
    println!("max ranges per frame {}", m.max_ranges_per_frame);
    println!("max reorder holes    {}", m.max_hole_count);
    println!(
        "losses               {} packet threshold, {} time threshold, {} spurious",
        m.packet_threshold_losses, m.time_threshold_losses, m.spurious_retx
    );
    for (i, s) in m.rtt_samples.iter().enumerate() {
        println!("rtt samples path {i}   {}", s.len());
    }
    println!("mixed rtt samples    {}", m.mixed_rtt_samples.len());
}

#[derive(Serialize)]
struct CompareOutput<'a> {
    comparison: &'a ComparisonReport,
    sweep: Vec<SweepEntry<'a>>,
}

#[derive(Serialize)]
struct SweepEntry<'a> {
    /// `None` when suppression is disabled.
    default_limit: Option<usize>,
    metrics: &'a MetricsReport,
}

fn write_comparison(
    cmp: &ComparisonReport,
    sweep: &[(Option<usize>, MetricsReport)],
    out: &Path,
    format: OutputFormat,
) -> Result<(), Failure> {
    match format {
        OutputFormat::Json => {
            let doc = CompareOutput {
                comparison: cmp,
                sweep: sweep
                    .iter()
                    .map(|(l, m)| SweepEntry {
                        default_limit: *l,
                        metrics: m,
                    })
                    .collect(),
            };
            export::write_json(&doc, create(out)?).map_err(other)
        }
        OutputFormat::Csv => {
            std::fs::create_dir_all(out).map_err(other)?;
            export::write_comparison_csv(cmp, create(&out.join("comparison.csv"))?).map_err(other)?;
            export::write_sweep_csv(sweep, create(&out.join("sweep.csv"))?).map_err(other)?;
            export::write_report_csv_dir(&cmp.spns, &out.join("spns")).map_err(other)?;
            export::write_report_csv_dir(&cmp.mpns, &out.join("mpns")).map_err(other)
        }
    }
}
