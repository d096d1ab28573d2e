// Copyright 2026 The Veracity Bond Authors
// SPDX-License-Identifier: Apache-2.0

//! The `veracity` command line.
//!
//! Exit codes: 0 success, 1 validation error, 2 reference table mismatch,
//! 3 replay divergence.

pub mod args;
pub mod commands;
pub mod error;
pub mod golden;
pub mod render;

use std::fs;
use std::io::Write;

pub use args::{Cli, Command, Format};
pub use error::CliError;

use commands::Outcome;

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::CollusionTable(a) => commands::collusion_table_cmd(cli, a),
        Command::CapacityTable(a) => commands::capacity_table_cmd(cli, a),
        Command::Simulate(a) => commands::simulate_cmd(cli, a),
        Command::MinPanel(a) => commands::min_panel_cmd(cli, a),
        Command::MinJurors(a) => commands::min_jurors_cmd(cli, a),
        Command::Verify(a) => commands::verify_cmd(cli, a),
    }
}

/// Runs the command, writes its report and returns the exit code. A failed
/// table check still writes the report so the diff can be inspected.
pub fn run(cli: &Cli) -> u8 {
    let outcome = match execute(cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let written = match &cli.output {
        Some(path) => fs::write(path, &outcome.report),
        None => std::io::stdout().lock().write_all(outcome.report.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return 1;
    }
    if let Some(note) = &outcome.note {
        eprintln!("{note}");
    }
    match outcome.failure {
        None => 0,
        Some(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
