// Copyright 2026 The Veracity Bond Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "veracity", version, about = "Veracity bond analyses and scenario runner")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Overrides the config seed and `VERACITY_SEED`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Progress messages on stderr.
    #[arg(long, short, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Collusion probability by panel size and colluding share.
    CollusionTable(CollusionTableArgs),
    /// Minimum juror pool per platform and staffing configuration.
    CapacityTable(CapacityTableArgs),
    /// Run an agent-based scenario.
    Simulate(SimulateArgs),
    /// Smallest odd panel meeting a collusion risk target.
    MinPanel(MinPanelArgs),
    /// Minimum juror pool for one workload.
    MinJurors(MinJurorsArgs),
    /// Replay event logs and compare terminal state hashes.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct PoolArgs {
    /// Juror pool size for the hypergeometric model.
    #[arg(long, default_value_t = veracity_core::collusion::REFERENCE_POOL, conflicts_with = "binomial")]
    pub pool: u64,

    /// Use the infinite-pool binomial limit.
    #[arg(long)]
    pub binomial: bool,
}

#[derive(Debug, Args)]
pub struct CollusionTableArgs {
    #[command(flatten)]
    pub pool: PoolArgs,

    /// Colluding shares, each below 0.5.
    #[arg(long, value_delimiter = ',')]
    pub ratios: Option<Vec<f64>>,

    /// Odd panel sizes.
    #[arg(long, value_delimiter = ',')]
    pub panels: Option<Vec<u64>>,

    /// Compare against the embedded reference table.
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Args)]
pub struct CapacityTableArgs {
    /// JSON file with `platforms` and `staffing` arrays.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// `NAME:POSTS_PER_DAY:CHALLENGE_RATIO`, repeatable.
    #[arg(long = "platform")]
    pub platforms: Vec<String>,

    /// `NAME:PANEL:HOURS_PER_CASE:AVAILABLE_HOURS`, repeatable.
    #[arg(long = "staffing")]
    pub staffing: Vec<String>,

    /// Compare against the embedded reference table.
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario config file.
    #[arg(long, conflicts_with = "scenario", required_unless_present = "scenario")]
    pub config: Option<PathBuf>,

    /// Bundled scenario name (`all-honest`, `collusion-sweep`).
    #[arg(long)]
    pub scenario: Option<String>,

    /// Directory for metrics files and event logs.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,

    /// Replay every event log and compare terminal state hashes.
    #[arg(long)]
    pub verify_replay: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RiskModeArg {
    Exact,
    Hoeffding,
}

#[derive(Debug, Args)]
pub struct MinPanelArgs {
    #[command(flatten)]
    pub pool: PoolArgs,

    /// Colluding share.
    #[arg(long)]
    pub ratio: f64,

    /// Maximum acceptable collusion probability.
    #[arg(long)]
    pub epsilon: f64,

    #[arg(long, value_enum, default_value_t = RiskModeArg::Exact)]
    pub mode: RiskModeArg,
}

#[derive(Debug, Args)]
pub struct MinJurorsArgs {
    /// Disputes per hour.
    #[arg(long, conflicts_with_all = ["posts_per_day", "challenge_ratio"])]
    pub lambda: Option<f64>,

    #[arg(long, requires = "challenge_ratio")]
    pub posts_per_day: Option<f64>,

    #[arg(long, requires = "posts_per_day")]
    pub challenge_ratio: Option<f64>,

    #[arg(long)]
    pub panel: u64,

    /// Juror-hours per case.
    #[arg(long)]
    pub hours: f64,

    /// Juror-hours each juror supplies per hour.
    #[arg(long)]
    pub available: f64,

    /// Also simulate the queue at this pool size.
    #[arg(long)]
    pub simulate_pool: Option<u64>,

    /// Simulated disputes for `--simulate-pool`.
    #[arg(long, default_value_t = 20_000.0)]
    pub arrivals: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Output directories of `simulate` or single `.jsonl` event logs.
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,

    /// Expected terminal state hash, for a single log.
    #[arg(long)]
    pub expect_hash: Option<String>,
}
