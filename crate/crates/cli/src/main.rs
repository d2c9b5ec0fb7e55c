use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod error;
mod manifest;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Certify(a) => commands::certify(a),
        Command::PminGrid(a) => commands::pmin_grid_cmd(a),
        Command::Project(a) => commands::project_cmd(a),
        Command::SmoothPredict(a) => commands::smooth_predict_cmd(a),
        Command::Fixture(a) => commands::fixture(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
