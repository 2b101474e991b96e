//! `pprvari`: validate, transform and configure PPR models, measure the
//! sequence space, generate control software and serve the session API.

mod commands;
mod configure;
mod support;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "pprvari", version, about = "Variability toolchain for product-process-resource models")]
struct Cli {
    /// Output format of the payload.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Workspace directory holding the generated models and session state.
    #[arg(long, short = 'w', global = true, env = "PPRVARI_WORKSPACE")]
    workspace: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
    /// Statistics table; only for `stats`.
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a PPR-DSL file.
    Validate { file: PathBuf },
    /// Transform a PPR-DSL file into a workspace of variability models.
    Transform {
        file: PathBuf,
        /// Target directory; defaults to the workspace.
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Model name used for the model ids; defaults to the file stem.
        #[arg(long)]
        name: Option<String>,
    },
    /// Model statistics of a PPR-DSL file.
    Stats {
        file: PathBuf,
        #[arg(long)]
        name: Option<String>,
        /// Cap on counted product configurations.
        #[arg(long, default_value_t = pprvari_core::transform::CONFIG_LIMIT)]
        limit: usize,
    },
    /// Staged configuration: product, process sequence, resources.
    Configure(configure::ConfigureArgs),
    /// Size of the process sequence space, full and staged.
    Metrics(MetricsArgs),
    /// Apply the deltas of a finished session to a base network.
    Generate(GenerateArgs),
    /// Serve the HTTP session API for a workspace.
    Serve(ServeArgs),
    /// Write the bundled shift-fork sample (model, base network, deltas).
    Sample { dir: PathBuf },
}

#[derive(Args)]
pub struct MetricsArgs {
    /// Decision configuration (`.dconfig`) or session snapshot (`.json`).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Product selection, comma separated, instead of a configuration file.
    #[arg(long, value_delimiter = ',')]
    products: Option<Vec<String>>,
    /// Plain permutation count n!/(n-r)!, no workspace needed.
    #[arg(long, requires = "r")]
    n: Option<u64>,
    #[arg(long, requires = "n")]
    r: Option<u64>,
}

#[derive(Args)]
pub struct GenerateArgs {
    /// Finished session snapshot; defaults to the workspace session.
    #[arg(long)]
    session: Option<PathBuf>,
    /// Base network; defaults to `base.fbn` in the workspace.
    #[arg(long)]
    base: Option<PathBuf>,
    /// Directory of `.delta` files; defaults to `deltas/` in the workspace.
    #[arg(long)]
    deltas: Option<PathBuf>,
    /// Output network; defaults to `generated.fbn` in the workspace.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long)]
    base: Option<PathBuf>,
    #[arg(long)]
    deltas: Option<PathBuf>,
    /// Keep session snapshots in the workspace across restarts.
    #[arg(long)]
    persist: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.format == Format::Table && !matches!(cli.command, Command::Stats { .. }) {
        eprintln!("error: --format table is only available for stats");
        return ExitCode::from(2);
    }
    let ctx = support::Ctx { format: cli.format, workspace: cli.workspace };
    let result = match cli.command {
        Command::Validate { file } => commands::validate(&ctx, &file),
        Command::Transform { file, out, name } => commands::transform(&ctx, &file, out, name),
        Command::Stats { file, name, limit } => commands::stats(&ctx, &file, name, limit),
        Command::Configure(a) => configure::run(&ctx, a),
        Command::Metrics(a) => commands::metrics(&ctx, a),
        Command::Generate(a) => commands::generate(&ctx, a),
        Command::Serve(a) => commands::serve(&ctx, a),
        Command::Sample { dir } => commands::sample(&ctx, &dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("{}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}
