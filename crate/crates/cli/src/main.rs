//! `rrcnn`: dataset generation, training, decomposition, evaluation,
//! gradient checking and batch timing.

mod cmd;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::UsageError;

#[derive(Parser, Debug)]
#[command(name = "rrcnn", version, about = "Recurrent residual convolutional signal decomposition")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every verb.
#[derive(Args, Debug, Clone, Default)]
pub struct ConfigArgs {
    /// Flat key=value config file; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Section of the config file to apply on top of its global keys.
    #[arg(long)]
    pub section: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a table dataset as CSV files plus a manifest.
    Gen(cmd::generate::GenArgs),
    /// Train a model on a generated dataset.
    Train(cmd::train::TrainArgs),
    /// Decompose a signal with a trained model, IF or CSA.
    Decompose(cmd::decompose::DecomposeArgs),
    /// Score methods on one of the example signals.
    Eval(cmd::eval::EvalArgs),
    /// Compare backprop against central differences on a random model.
    Gradcheck(cmd::gradcheck::GradcheckArgs),
    /// Time batched decomposition of copies of the noisy chirp example.
    Bench(cmd::bench::BenchArgs),
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<rrcnn::Error>() {
            return match e {
                rrcnn::Error::Diverged { .. } => 3,
                rrcnn::Error::ShapeMismatch(_) | rrcnn::Error::MissingModel(_) => 4,
                rrcnn::Error::InvalidArgument(_) | rrcnn::Error::Parse(_) => 2,
                _ => 1,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => cmd::generate::run(a),
        Command::Train(a) => cmd::train::run(a),
        Command::Decompose(a) => cmd::decompose::run(a),
        Command::Eval(a) => cmd::eval::run(a),
        Command::Gradcheck(a) => cmd::gradcheck::run(a),
        Command::Bench(a) => cmd::bench::run(a),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
