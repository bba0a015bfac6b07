mod commands;
mod scenario;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

/// Reliability and performance tables, curves, and simulations for mirrored
/// and hybrid disk arrays.
#[derive(Parser)]
#[command(name = "arraylab", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Per-layout exact tables: no-repair lifetimes or leading unreliability terms
    Table(TableArgs),
    /// Reliability-versus-time curves as CSV, with crossovers reported on stderr
    Curve(CurveArgs),
    /// Run a scenario file and print its result records
    Run(RunArgs),
    /// Closed-form and Monte Carlo expected seek distances
    Seek(SeekArgs),
    /// Print a layout's cells, parity equations, and survivor counts
    Layout(LayoutArgs),
}

#[derive(Args)]
pub struct TableArgs {
    /// Which table: "mttdl" or "epsilon"
    pub name: String,
    /// Array size (number of disks)
    #[arg(long, default_value_t = 8)]
    pub n: u32,
    /// Output format: csv or json
    #[arg(long, default_value = "csv")]
    pub format: String,
    /// Write to a file instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct CurveArgs {
    #[arg(long, default_value_t = 8)]
    pub n: u32,
    /// Comma-separated layout names; defaults to the full table set
    #[arg(long)]
    pub layout: Option<String>,
    /// Largest time, in units of the disk MTTF
    #[arg(long = "t-max", default_value_t = 3.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct RunArgs {
    /// Scenario file with [layout] [workload] [repair] [sim] sections
    pub scenario: PathBuf,
    #[arg(long, default_value = "csv")]
    pub format: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SeekArgs {
    /// read:<k>, write:<k>, aap_single, aap_mirrored, ns_circle, ns_interval, or two_head
    #[arg(long)]
    pub kind: String,
    #[arg(long, default_value_t = 200_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value = "csv")]
    pub format: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct LayoutArgs {
    /// Layout name, e.g. bm, cd, raid6, weaver:3, id:2
    #[arg(long)]
    pub layout: String,
    #[arg(long, default_value_t = 8)]
    pub n: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Table(a) => commands::table(&a),
        Cmd::Curve(a) => commands::curve(&a),
        Cmd::Run(a) => scenario::run(&a),
        Cmd::Seek(a) => commands::seek(&a),
        Cmd::Layout(a) => commands::layout(&a),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(commands::exit_code(&e));
    }
}
