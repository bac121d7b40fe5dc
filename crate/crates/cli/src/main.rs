//! `troplin`: command-line front end. Every command prints a JSON report
//! and exits 0 (verified), 1 (refuted), 2 (inconclusive or cap exceeded)
//! or 3 (input error).

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Parser, Subcommand};
use serde_json::json;

use commands::{Outcome, SideFiles};
use report::{CliError, RunReport, Status};

#[derive(Parser)]
#[command(name = "troplin", version, about = "Limit linear series on metric graphs")]
struct Cli {
    /// Seed for randomized choices.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the rank function axioms.
    ValidateRank { file: PathBuf },
    /// Convert between permutation arrays and rank functions.
    #[command(group(ArgGroup::new("dir").required(true).args(["to_rank", "to_array"])))]
    PermConvert {
        #[arg(long)]
        to_rank: bool,
        #[arg(long)]
        to_array: bool,
        file: PathBuf,
    },
    /// Dump the coherent matroid complex of a rank function.
    MatroidExport { file: PathBuf },
    /// Principal divisor of a function.
    DivisorOf {
        file: PathBuf,
        /// Also write the graph as DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Compatibility of the functions of a series file with its structure.
    CheckCompat { file: PathBuf },
    /// Crude rank check on a grid.
    RankCheck {
        file: PathBuf,
        #[arg(long, default_value_t = 4)]
        grid_denominator: u64,
        #[arg(long, default_value_t = 5_000_000)]
        max_nodes: u64,
        /// When verified, write the witnesses, pruned, as a series file.
        #[arg(long)]
        module_out: Option<PathBuf>,
    },
    /// Enumerate slope structures with bounded slopes.
    EnumerateSlopes {
        file: PathBuf,
        #[arg(long)]
        bound: i64,
        #[arg(long, default_value_t = 1)]
        subdivision: u64,
    },
    /// Reduced divisor and unsaturated cut at a point.
    Reduce {
        file: PathBuf,
        /// A vertex name or `edge:offset`.
        #[arg(long)]
        at: String,
    },
    /// Quotient tree of a rank-one series.
    ClassifyG1d {
        file: PathBuf,
        #[arg(long)]
        base: String,
        /// Also write the tree as DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Pull back the rank-one series of a tree along a harmonic morphism.
    Pullback {
        #[arg(long)]
        morphism: PathBuf,
        /// Base point on the source; defaults to its first vertex.
        #[arg(long)]
        base: Option<String>,
        #[arg(long, default_value_t = 1)]
        tree_grid: u64,
        /// Write the module as a series file.
        #[arg(long)]
        module_out: Option<PathBuf>,
        /// Also write the refined source graph as DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Tropical rank over the extremal generators.
    TropicalRank {
        file: PathBuf,
        #[arg(long)]
        r_max: Option<usize>,
        #[arg(long, default_value_t = 200_000)]
        max_nodes: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::ValidateRank { .. } => "validate-rank",
            Command::PermConvert { .. } => "perm-convert",
            Command::MatroidExport { .. } => "matroid-export",
            Command::DivisorOf { .. } => "divisor-of",
            Command::CheckCompat { .. } => "check-compat",
            Command::RankCheck { .. } => "rank-check",
            Command::EnumerateSlopes { .. } => "enumerate-slopes",
            Command::Reduce { .. } => "reduce",
            Command::ClassifyG1d { .. } => "classify-g1d",
            Command::Pullback { .. } => "pullback",
            Command::TropicalRank { .. } => "tropical-rank",
        }
    }

    fn run(&self, side: &mut SideFiles) -> Result<Outcome, CliError> {
        match self {
            Command::ValidateRank { file } => commands::validate_rank(file),
            Command::PermConvert { to_rank: true, file, .. } => commands::perm_to_rank(file),
            Command::PermConvert { file, .. } => commands::rank_to_perm(file),
            Command::MatroidExport { file } => commands::matroid_export(file),
            Command::DivisorOf { file, dot } => commands::divisor_of(file, dot.as_deref(), side),
            Command::CheckCompat { file } => commands::check_compat(file),
            Command::RankCheck {
                file,
                grid_denominator,
                max_nodes,
                module_out,
            } => commands::rank_check(file, *grid_denominator, *max_nodes, module_out.as_deref(), side),
            Command::EnumerateSlopes {
                file,
                bound,
                subdivision,
            } => commands::enumerate_slopes(file, *bound, *subdivision),
            Command::Reduce { file, at } => commands::reduce(file, at),
            Command::ClassifyG1d { file, base, dot } => commands::classify(file, base, dot.as_deref(), side),
            Command::Pullback {
                morphism,
                base,
                tree_grid,
                module_out,
                dot,
            } => commands::pullback(
                morphism,
                base.as_deref(),
                *tree_grid,
                module_out.as_deref(),
                dot.as_deref(),
                side,
            ),
            Command::TropicalRank { file, r_max, max_nodes } => commands::tropical_rank_cmd(file, *r_max, *max_nodes),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: {e}");
        }
    }
    let start = Instant::now();
    let mut side = SideFiles::new();
    let report = match cli.command.run(&mut side) {
        Ok(o) => RunReport {
            command: cli.command.name().to_string(),
            inputs: o.inputs,
            seed: cli.seed,
            status: o.status,
            result: o.result,
        },
        Err(e) => {
            eprintln!("{e}");
            let status = match e {
                CliError::Input(_) => Status::Error,
                CliError::Cap(_) => Status::Inconclusive,
            };
            RunReport {
                command: cli.command.name().to_string(),
                inputs: Vec::new(),
                seed: cli.seed,
                status,
                result: json!({ "error": e.to_string() }),
            }
        }
    };
    eprintln!("{}: {:.3} s", report.command, start.elapsed().as_secs_f64());
    for (path, text) in &side {
        if let Err(e) = std::fs::write(path, text) {
            eprintln!("cannot write {}: {e}", path.display());
            return ExitCode::from(3);
        }
    }
    let text = report.to_json();
    match &cli.out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, &text) {
                eprintln!("cannot write {}: {e}", p.display());
                return ExitCode::from(3);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(report.status.exit_code() as u8)
}
