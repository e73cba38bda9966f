//! gazemodal: a self-contained pipeline for multi-modal chest-X-ray
//! classification and explainability experiments over seeded synthetic
//! data. One global seed reproduces every byte of output.

use clap::error::ErrorKind;
use clap::Parser;

pub mod commands;
pub mod config;
pub mod error;

pub use error::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "gazemodal",
    about = "Multi-modal chest X-ray classification and explainability pipeline",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(clap::Subcommand, Debug)]
pub enum Command {
    /// Generate a seeded synthetic dataset, report corpus, and annotations
    #[command(name = "gen-data")]
    GenData(commands::gen_data::GenDataArgs),
    /// Train skip-gram word embeddings on a report corpus
    #[command(name = "train-embed")]
    TrainEmbed(commands::train_embed::TrainEmbedArgs),
    /// Run one cross-validated experiment
    #[command(name = "run-exp")]
    RunExp(commands::run_exp::RunExpArgs),
    /// Score saved attention maps against bounding boxes
    #[command(name = "eval-attn")]
    EvalAttn(commands::eval_attn::EvalAttnArgs),
    /// Run the full experiment matrix (9 classification + 6 explainability)
    #[command(name = "run-matrix")]
    RunMatrix(commands::run_matrix::RunMatrixArgs),
    /// Aggregate per-experiment CSV outputs into summary tables
    #[command(name = "report")]
    Report(commands::report::ReportArgs),
}

/// Parses and runs a command line; returns the process exit code
/// (0 success, 1 usage error, 2 data error).
pub fn dispatch<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                _ => {
                    eprint!("{e}");
                    1
                }
            };
        }
    };
    let result = match cli.command {
        Command::GenData(args) => commands::gen_data::run(args),
        Command::TrainEmbed(args) => commands::train_embed::run(args),
        Command::RunExp(args) => commands::run_exp::run(args),
        Command::EvalAttn(args) => commands::eval_attn::run(args),
        Command::RunMatrix(args) => commands::run_matrix::run(args),
        Command::Report(args) => commands::report::run(args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
