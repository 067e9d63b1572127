mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

/// Grasp, placement and regrasp planning for a parallel-jaw gripper on a
/// tabletop.
#[derive(Parser, Debug)]
#[command(name = "regrasp", version)]
struct Cli {
    /// Worker threads for the parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Omit wall-clock lines so output can be compared byte for byte.
    #[arg(long, global = true)]
    quiet_timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Plan grasps and placements, solve IK for every robot and write the store.
    Precompute {
        #[arg(long)]
        config: PathBuf,
        /// Store file; overrides REGRASP_STORE and the config.
        #[arg(long)]
        store: Option<PathBuf>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Find a pick-and-place sequence taking the object from one pose to another.
    Reorient {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        store: Option<PathBuf>,
        /// Robot name; defaults to the first robot in the config.
        #[arg(long)]
        robot: Option<String>,
        /// `placement:ID,x,y,yaw` (store placement id, meters, radians) or
        /// twelve numbers: row-major rotation then translation.
        #[arg(long, allow_hyphen_values = true)]
        init: String,
        #[arg(long, allow_hyphen_values = true)]
        goal: String,
        /// Sequence JSON destination; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write tables, graphs or geometry scenes to files.
    Export {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(value_enum)]
        kind: ExportKind,
        /// Output file, or directory for `csv`.
        #[arg(long)]
        out: PathBuf,
        /// Store placement id for `grasps` and `placement`.
        #[arg(long)]
        placement: Option<i64>,
        #[arg(long)]
        robot: Option<String>,
    },
    /// Print row counts and run the integrity audit.
    Inspect {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        store: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ExportKind {
    /// One CSV file per table.
    Csv,
    /// Regrasp graph in Graphviz format.
    Graph,
    /// Object with hand glyphs of its free grasps, or of one placement's grips.
    Grasps,
    /// Object posed in one stable placement.
    Placement,
    /// Over-segmentation facets as PLY.
    Facets,
    /// Surface samples as PLY.
    Samples,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
