mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "abgame", version, about = "Exact solver and bound checker for the AB game")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Directory for the run manifest and artifacts.
    #[arg(long, global = true, env = "ABGAME_OUT")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Text,
    Csv,
    /// Solve only: print the strategy tree as JSON.
    Tree,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Black and white pegs, distinct-color questions.
    Ab,
    /// Black pegs only.
    Abb,
    /// One extra joker color allowed in questions.
    AbStar,
    /// The first `--opening` questions are fixed color blocks.
    AbFixed,
}

#[derive(Args, Clone, Debug, serde::Serialize)]
pub struct Guards {
    /// Give up after this many search nodes.
    #[arg(long)]
    pub max_nodes: Option<u64>,
    /// Give up after this many seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Worst-case number of questions for one game.
    Solve {
        #[arg(long)]
        pegs: usize,
        #[arg(long)]
        colors: usize,
        #[arg(long, value_enum, default_value_t = Variant::Ab)]
        variant: Variant,
        /// Fixed opening length for ab-fixed.
        #[arg(long)]
        opening: Option<usize>,
        /// Largest depth searched.
        #[arg(long, default_value_t = 16)]
        budget: usize,
        #[command(flatten)]
        guards: Guards,
    },
    /// Values for a grid of games; cells over budget print as a dash.
    Table {
        /// Peg range such as `2-4` or `3`.
        #[arg(long)]
        pegs: String,
        /// Color range; colors below the peg count are skipped.
        #[arg(long, required_unless_present = "equal")]
        colors: Option<String>,
        #[arg(long, value_enum, default_value_t = Variant::Ab)]
        variant: Variant,
        #[arg(long)]
        opening: Option<usize>,
        #[arg(long, default_value_t = 16)]
        budget: usize,
        /// Solve only the games with as many colors as pegs and print them next to the counting bound.
        #[arg(long)]
        equal: bool,
        #[command(flatten)]
        guards: Guards,
    },
    /// Check that every non-reducible end-game needs more than `q` questions.
    Lower {
        #[arg(long)]
        pegs: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        q: usize,
        #[command(flatten)]
        guards: Guards,
    },
    /// Check the two-phase strategy within `q` questions.
    Upper {
        #[arg(long)]
        pegs: usize,
        #[arg(long)]
        colors: usize,
        #[arg(long)]
        q: usize,
        /// Reduction-phase length.
        #[arg(long)]
        x: usize,
        #[arg(long, value_enum, default_value_t = Mode::Generalizing)]
        mode: Mode,
        #[command(flatten)]
        guards: Guards,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Generalizing,
    Fixed,
}

pub const EXIT_INVALID: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;
pub const EXIT_UNVERIFIED: u8 = 4;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("error: --workers must be positive");
            return ExitCode::from(EXIT_INVALID);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    }
    let ctx = commands::Context {
        out: cli.out,
        format: cli.format,
        workers: cli.workers,
    };
    let result = match cli.command {
        Command::Solve {
            pegs,
            colors,
            variant,
            opening,
            budget,
            guards,
        } => commands::solve(&ctx, pegs, colors, variant, opening, budget, &guards),
        Command::Table {
            pegs,
            colors,
            variant,
            opening,
            budget,
            equal,
            guards,
        } => commands::table(&ctx, &pegs, colors.as_deref(), variant, opening, budget, equal, &guards),
        Command::Lower { pegs, r, q, guards } => commands::lower(&ctx, pegs, r, q, &guards),
        Command::Upper {
            pegs,
            colors,
            q,
            x,
            mode,
            guards,
        } => commands::upper(&ctx, pegs, colors, q, x, mode, &guards),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                abgame::Error::BudgetExhausted { .. } => EXIT_BUDGET,
                _ => EXIT_INVALID,
            })
        }
    }
}
