//! `somna`: train, classify, impute, super-class, evaluate, and render
//! self-organizing maps over data with missing values.

mod commands;
mod config;
mod error;
mod render;

use clap::Parser;

use config::{Cli, Command};

fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(args) => commands::train(args),
        Command::Classify(args) => commands::classify(args),
        Command::Impute(args) => commands::impute(args),
        Command::Superclass(args) => commands::superclass(args),
        Command::Evaluate(args) => commands::evaluate(args),
        Command::Render(args) => commands::render(args),
    };
    match result {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::from(e.exit_code())
        }
    }
}
