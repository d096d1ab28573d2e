// Copyright 2026 The Veracity Bond Authors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use veracity_core::capacity::{
    capacity_table, dispute_rate_from_volume, format_count, format_volume, min_jurors, reference_platforms,
    reference_staffing, verify_stability, CapacityQuery, CapacityTable, PlatformRow, StabilityConfig, StaffingConfig,
};
use veracity_core::collusion::{
    collusion_table, exact_collusion_probability, format_probability, format_sci, hoeffding_bound, min_panel_for_risk,
    CollusionQuery, CollusionTable, PoolSize, RiskMode, TABLE_PANELS, TABLE_RATIOS,
};
use veracity_core::simulation::{run_scenario, ScenarioConfig, ScenarioRun};
use veracity_core::{Contest, ContestError, EventLog};

use crate::args::{
    CapacityTableArgs, Cli, CollusionTableArgs, Format, MinJurorsArgs, MinPanelArgs, PoolArgs, RiskModeArg,
    SimulateArgs, VerifyArgs,
};
use crate::error::CliError;
use crate::golden;
use crate::render::{csv_string, flatten_json, percent_label, text_table};

pub const SEED_ENV: &str = "VERACITY_SEED";

const BUNDLED: [(&str, &str); 2] = [
    ("all-honest", include_str!("../../../scenarios/all-honest.json")),
    (
        "collusion-sweep",
        include_str!("../../../scenarios/collusion-sweep.json"),
    ),
];

pub fn bundled_scenario(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

/// Flag, then `VERACITY_SEED`, then the fallback.
pub fn resolve_seed(flag: Option<u64>, fallback: u64) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(fallback),
    }
}

/// What a command produced: the report body plus a line for stderr.
pub struct Outcome {
    pub report: String,
    pub note: Option<String>,
    /// Set when the report was produced but a `--check` failed.
    pub failure: Option<CliError>,
}

impl Outcome {
    fn report(report: String) -> Self {
        Outcome {
            report,
            note: None,
            failure: None,
        }
    }

    fn checked(report: String, check: Option<Result<usize, CliError>>) -> Self {
        match check {
            None => Outcome::report(report),
            Some(Ok(n)) => Outcome {
                report,
                note: Some(format!("check: {n} reference cells match")),
                failure: None,
            },
            Some(Err(e)) => Outcome {
                report,
                note: None,
                failure: Some(e),
            },
        }
    }
}

fn pool_size(p: &PoolArgs) -> PoolSize {
    if p.binomial {
        PoolSize::Infinite
    } else {
        PoolSize::Finite(p.pool)
    }
}

fn pool_label(pool: PoolSize) -> String {
    match pool {
        PoolSize::Finite(n) => format!("pool N={n}"),
        PoolSize::Infinite => "binomial limit".to_string(),
    }
}

pub fn collusion_table_cmd(cli: &Cli, args: &CollusionTableArgs) -> Result<Outcome, CliError> {
    let ratios = args.ratios.clone().unwrap_or_else(|| TABLE_RATIOS.to_vec());
    let panels = args.panels.clone().unwrap_or_else(|| TABLE_PANELS.to_vec());
    if ratios.is_empty() || panels.is_empty() {
        return Err(CliError::Validation("empty grid".into()));
    }
    for &p in &ratios {
        if !(0.0..0.5).contains(&p) {
            return Err(CliError::Validation(format!(
                "ratio {p}: colluding share must be in [0, 0.5)"
            )));
        }
    }
    let pool = pool_size(&args.pool);
    let table = collusion_table(pool, &ratios, &panels)?;
    let report = render_collusion(&table, cli.format)?;
    Ok(Outcome::checked(
        report,
        args.check.then(|| golden::check_collusion(&table)),
    ))
}

fn render_collusion(table: &CollusionTable, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|(n, cells)| {
                    json!({
                        "panel": n,
                        "cells": cells.iter().map(|c| json!({
                            "ratio": c.ratio,
                            "exact_tail": c.exact_tail,
                            "printed": format_probability(c.exact_tail),
                            "hoeffding": c.hoeffding,
                            "omega": c.omega,
                            "clamped": c.clamped,
                        })).collect::<Vec<_>>(),
                    })
                })
                .collect();
            Ok(serde_json::to_string_pretty(&json!({
                "pool": table.pool,
                "ratios": table.ratios,
                "rows": rows,
            }))? + "\n")
        }
        Format::Csv => {
            let mut header = vec!["panel".to_string()];
            header.extend(table.ratios.iter().map(|r| format!("{r:.2}")));
            let rows = table.rows.iter().map(|(n, cells)| {
                let mut row = vec![n.to_string()];
                row.extend(cells.iter().map(|c| format_probability(c.exact_tail)));
                row
            });
            csv_string(&header, rows)
        }
        Format::Text => {
            let mut header = vec!["Jury size n".to_string()];
            header.extend(table.ratios.iter().map(|&r| percent_label(r)));
            let rows: Vec<Vec<String>> = table
                .rows
                .iter()
                .map(|(n, cells)| {
                    let mut row = vec![n.to_string()];
                    row.extend(cells.iter().map(|c| format_probability(c.exact_tail)));
                    row
                })
                .collect();
            Ok(format!(
                "Collusion probability P(X >= t), {}\n{}",
                pool_label(table.pool),
                text_table(&header, &rows)
            ))
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CapacityFile {
    #[serde(default)]
    platforms: Option<Vec<PlatformRow>>,
    #[serde(default)]
    staffing: Option<Vec<StaffingConfig>>,
}

fn split_fields<const N: usize>(arg: &str, what: &str) -> Result<[String; N], CliError> {
    // the name is everything before the last N-1 colons
    let mut parts: Vec<String> = arg.rsplitn(N, ':').map(str::to_string).collect();
    parts.reverse();
    parts
        .try_into()
        .map_err(|_| CliError::Validation(format!("{what} {arg:?}: expected {N} ':'-separated fields")))
}

fn number<T: std::str::FromStr>(field: &str, what: &str) -> Result<T, CliError> {
    field
        .parse()
        .map_err(|_| CliError::Validation(format!("{what}: {field:?} is not a number")))
}

fn parse_platform(arg: &str) -> Result<PlatformRow, CliError> {
    let [name, posts, ratio] = split_fields::<3>(arg, "--platform")?;
    Ok(PlatformRow {
        name,
        posts_per_day: number(&posts, "posts_per_day")?,
        challenge_ratio: number(&ratio, "challenge_ratio")?,
    })
}

fn parse_staffing(arg: &str) -> Result<StaffingConfig, CliError> {
    let [name, n, h, a] = split_fields::<4>(arg, "--staffing")?;
    Ok(StaffingConfig {
        name,
        panel_size: number(&n, "panel_size")?,
        hours_per_case: number(&h, "hours_per_case")?,
        available_hours: number(&a, "available_hours")?,
    })
}

pub fn capacity_table_cmd(cli: &Cli, args: &CapacityTableArgs) -> Result<Outcome, CliError> {
    let (mut platforms, mut staffing) = (reference_platforms(), reference_staffing());
    if let Some(path) = &args.config {
        let text = read(path)?;
        let file: CapacityFile =
            serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        if let Some(p) = file.platforms {
            platforms = p;
        }
        if let Some(s) = file.staffing {
            staffing = s;
        }
    }
    if !args.platforms.is_empty() {
        platforms = args
            .platforms
            .iter()
            .map(|s| parse_platform(s))
            .collect::<Result<_, _>>()?;
    }
    if !args.staffing.is_empty() {
        staffing = args
            .staffing
            .iter()
            .map(|s| parse_staffing(s))
            .collect::<Result<_, _>>()?;
    }
    let table = capacity_table(&platforms, &staffing)?;
    let report = render_capacity(&table, cli.format)?;
    Ok(Outcome::checked(
        report,
        args.check.then(|| golden::check_capacity(&table)),
    ))
}

fn render_capacity(table: &CapacityTable, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(table)? + "\n"),
        Format::Csv => {
            let mut header: Vec<String> = ["platform", "posts_per_day", "lambda"].map(String::from).to_vec();
            header.extend(table.configs.iter().map(|c| c.name.clone()));
            let rows = table.rows.iter().map(|r| {
                let mut row = vec![r.platform.clone(), r.posts_per_day.to_string(), r.lambda.to_string()];
                row.extend(r.n_min.iter().map(u64::to_string));
                row
            });
            csv_string(&header, rows)
        }
        Format::Text => {
            let mut header: Vec<String> = ["Platform", "Volume/day", "Disputes/hr"].map(String::from).to_vec();
            header.extend(table.configs.iter().map(|c| c.name.clone()));
            let rows: Vec<Vec<String>> = table
                .rows
                .iter()
                .map(|r| {
                    let mut row = vec![
                        r.platform.clone(),
                        format_volume(r.posts_per_day),
                        format_count(r.lambda),
                    ];
                    row.extend(r.n_min.iter().map(|&n| format_count(n as f64)));
                    row
                })
                .collect();
            let configs: Vec<String> = table
                .configs
                .iter()
                .map(|c| {
                    format!(
                        "{} (n={}, h={}, a={})",
                        c.name, c.panel_size, c.hours_per_case, c.available_hours
                    )
                })
                .collect();
            Ok(format!(
                "Minimum juror pool N_min = ceil(lambda*n*h/a)\n{}{}\n",
                text_table(&header, &rows),
                configs.join("; ")
            ))
        }
    }
}

#[derive(Serialize)]
struct MinPanelReport {
    ratio: f64,
    epsilon: f64,
    mode: RiskMode,
    pool: PoolSize,
    panel: u64,
    exact_tail: f64,
    hoeffding: f64,
}

pub fn min_panel_cmd(cli: &Cli, args: &MinPanelArgs) -> Result<Outcome, CliError> {
    let pool = pool_size(&args.pool);
    let mode = match args.mode {
        RiskModeArg::Exact => RiskMode::Exact,
        RiskModeArg::Hoeffding => RiskMode::Hoeffding,
    };
    let panel = min_panel_for_risk(pool, args.ratio, args.epsilon, mode)?;
    let r = MinPanelReport {
        ratio: args.ratio,
        epsilon: args.epsilon,
        mode,
        pool,
        panel,
        exact_tail: exact_collusion_probability(&CollusionQuery::with_ratio(pool, args.ratio, panel))?.exact_tail,
        hoeffding: hoeffding_bound(panel, args.ratio)?,
    };
    let report = match cli.format {
        Format::Json => serde_json::to_string_pretty(&r)? + "\n",
        Format::Csv => csv_string(
            &["ratio", "epsilon", "mode", "panel", "exact_tail", "hoeffding"].map(String::from),
            [vec![
                r.ratio.to_string(),
                r.epsilon.to_string(),
                format!("{:?}", args.mode).to_lowercase(),
                r.panel.to_string(),
                r.exact_tail.to_string(),
                r.hoeffding.to_string(),
            ]],
        )?,
        Format::Text => format!(
            "smallest odd panel: {}\nexact tail: {}\nhoeffding bound: {}\n({}, p={}, epsilon={})\n",
            r.panel,
            format_sci(r.exact_tail),
            format_sci(r.hoeffding),
            pool_label(pool),
            r.ratio,
            r.epsilon
        ),
    };
    Ok(Outcome::report(report))
}

pub fn min_jurors_cmd(cli: &Cli, args: &MinJurorsArgs) -> Result<Outcome, CliError> {
    let lambda = match (args.lambda, args.posts_per_day, args.challenge_ratio) {
        (Some(l), _, _) => l,
        (None, Some(posts), Some(ratio)) => dispute_rate_from_volume(posts, ratio)?,
        _ => {
            return Err(CliError::Validation(
                "give --lambda or both --posts-per-day and --challenge-ratio".into(),
            ))
        }
    };
    let q = CapacityQuery {
        lambda,
        panel_size: args.panel,
        hours_per_case: args.hours,
        available_hours: args.available,
    };
    let result = min_jurors(&q)?;
    let stability = match args.simulate_pool {
        Some(pool) => {
            let seed = resolve_seed(cli.seed, 0)?;
            let cfg = StabilityConfig::for_arrivals(lambda, args.arrivals);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut r = verify_stability(&q, pool, &cfg, &mut rng)?;
            r.stats.trajectory.clear();
            Some((seed, r))
        }
        None => None,
    };
    let mut value = json!({ "query": q, "result": result });
    if let Some((seed, r)) = &stability {
        value["stability"] = json!({
            "seed": seed,
            "verdict": r.verdict,
            "pool": r.pool,
            "utilization": r.utilization,
            "backlog_slope": r.backlog_slope,
            "shortfall_rate": r.shortfall_rate,
            "littles_law_error": r.littles_law_error,
            "mean_in_system": r.stats.mean_in_system,
            "mean_wait": r.stats.mean_wait,
        });
    }
    let report = match cli.format {
        Format::Json => serde_json::to_string_pretty(&value)? + "\n",
        Format::Csv => {
            let pairs = flatten_json(&value);
            csv_string(
                &["field", "value"].map(String::from),
                pairs.into_iter().map(|(k, v)| vec![k, v]),
            )?
        }
        Format::Text => {
            let mut s = format!(
                "N_min = {}\nlambda = {lambda} disputes/hr, n = {}, h = {}, a = {}\nutilization at N_min = {:.4}\n",
                result.n_min, q.panel_size, q.hours_per_case, q.available_hours, result.utilization
            );
            if let Some((seed, r)) = &stability {
                s += &format!(
                    "simulated N = {} (seed {seed}): {:?}, utilization {:.4}, backlog slope {:.4}, shortfall rate {:.4}, Little's law error {:.4}\n",
                    r.pool, r.verdict, r.utilization, r.backlog_slope, r.shortfall_rate, r.littles_law_error
                );
            }
            s
        }
    };
    Ok(Outcome::report(report))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

pub fn load_scenario(cli: &Cli, args: &SimulateArgs) -> Result<ScenarioConfig, CliError> {
    let (label, text) = match (&args.config, &args.scenario) {
        (Some(path), _) => (path.display().to_string(), read(path)?),
        (None, Some(name)) => {
            let text = bundled_scenario(name).ok_or_else(|| {
                let names: Vec<_> = BUNDLED.iter().map(|(n, _)| *n).collect();
                CliError::Validation(format!("unknown scenario {name:?}; bundled: {}", names.join(", ")))
            })?;
            (name.clone(), text.to_string())
        }
        (None, None) => return Err(CliError::Validation("give --config or --scenario".into())),
    };
    let mut cfg = ScenarioConfig::from_json(&text).map_err(|e| CliError::Validation(format!("{label}: {e}")))?;
    cfg.seed = resolve_seed(cli.seed, cfg.seed)?;
    Ok(cfg)
}

/// File-name-safe form of a content id.
fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn write_run(dir: &Path, run: &ScenarioRun) -> Result<(), CliError> {
    let logs = dir.join("logs");
    fs::create_dir_all(&logs)?;
    fs::write(
        dir.join("metrics.json"),
        serde_json::to_string_pretty(&run.metrics)? + "\n",
    )?;
    let metrics = serde_json::to_value(&run.metrics)?;
    fs::write(
        dir.join("metrics.csv"),
        csv_string(
            &["field", "value"].map(String::from),
            flatten_json(&metrics).into_iter().map(|(k, v)| vec![k, v]),
        )?,
    )?;
    let mut rows = Vec::new();
    for rec in &run.records {
        let stem = file_stem(rec.content_id.as_str());
        fs::write(logs.join(format!("{stem}.jsonl")), rec.log.to_jsonl())?;
        let audit = rec.log.audit_to_jsonl();
        if !audit.is_empty() {
            fs::write(logs.join(format!("{stem}.audit.jsonl")), audit)?;
        }
        rows.push(vec![
            rec.content_id.as_str().to_string(),
            rec.state_hash.clone(),
            rec.log.len().to_string(),
        ]);
    }
    fs::write(
        dir.join("contests.csv"),
        csv_string(&["content_id", "state_hash", "events"].map(String::from), rows)?,
    )?;
    Ok(())
}

pub fn simulate_cmd(cli: &Cli, args: &SimulateArgs) -> Result<Outcome, CliError> {
    let cfg = load_scenario(cli, args)?;
    if cli.verbose > 0 {
        eprintln!("running {} ({} contests, seed {})", cfg.name, cfg.contests, cfg.seed);
    }
    let run = run_scenario(&cfg)?;
    if run.metrics.escrow_residual != 0 {
        return Err(CliError::Validation(format!(
            "escrow residual {} after {}",
            run.metrics.escrow_residual, cfg.name
        )));
    }
    let mut notes = Vec::new();
    if args.verify_replay {
        for rec in &run.records {
            rec.verify_replay()
                .map_err(|e| CliError::Divergence(format!("{}: {e}", rec.content_id)))?;
        }
        notes.push(format!(
            "replay: {} logs reproduce their terminal hashes",
            run.records.len()
        ));
    }
    if let Some(dir) = &args.out_dir {
        write_run(dir, &run)?;
        notes.push(format!("wrote {}", dir.display()));
    }
    let m = &run.metrics;
    let report = match cli.format {
        Format::Json => serde_json::to_string_pretty(m)? + "\n",
        Format::Csv => csv_string(
            &["field", "value"].map(String::from),
            flatten_json(&serde_json::to_value(m)?)
                .into_iter()
                .map(|(k, v)| vec![k, v]),
        )?,
        Format::Text => {
            let mut s = format!(
                "scenario {} (seed {}): {} contests, {} false, {} challenged\n",
                m.name, m.seed, m.contests, m.false_contents, m.challenged_contents
            );
            s += &format!(
                "outcomes: {} unchallenged, {} for creator, {} for challenger\n",
                m.outcomes.expired_unchallenged, m.outcomes.resolved_for_creator, m.outcomes.resolved_for_challenger
            );
            s += &format!(
                "misinformation survival rate: {:.6} ({} of {})\n",
                m.misinformation_survival_rate, m.misinformation_survived, m.false_contents
            );
            s += &format!(
                "false-challenge success rate: {:.6} ({} of {})\n",
                m.false_challenge_success_rate, m.false_challenge_wins, m.challenges_against_true
            );
            s += &format!(
                "panels: {}, substitutions: {}, bench refills: {}, capped submissions: {}\n",
                m.panels, m.substitutions, m.bench_refills, m.capped_submissions
            );
            if let Some(c) = &m.collusion {
                s += &format!(
                    "collusion: {} of {} panels had a bloc majority; empirical {} [{}, {}] vs exact {} (k={}, N={}, n={})\n",
                    c.bloc_majorities,
                    c.panels,
                    format_sci(c.empirical_rate),
                    format_sci(c.wilson_low),
                    format_sci(c.wilson_high),
                    format_sci(c.exact),
                    c.colluders,
                    c.pool,
                    c.panel
                );
            }
            for (role, l) in &m.by_role {
                s += &format!(
                    "{:<10} deposited {:>12} credited {:>12} net {:>12}\n",
                    format!("{role:?}").to_lowercase(),
                    l.deposited,
                    l.credited,
                    l.net
                );
            }
            s += &format!(
                "platform {}, reserve {}, escrow residual {}\n",
                m.platform, m.reserve, m.escrow_residual
            );
            s
        }
    };
    Ok(Outcome {
        report,
        note: (!notes.is_empty()).then(|| notes.join("\n")),
        failure: None,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifiedLog {
    pub log: String,
    pub events: usize,
    pub state: String,
    pub state_hash: String,
}

fn load_log(path: &Path) -> Result<EventLog, CliError> {
    let text = read(path)?;
    let log = EventLog::from_jsonl(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let audit = path.with_extension("audit.jsonl");
    if audit.exists() {
        return log
            .with_audit_jsonl(&read(&audit)?)
            .map_err(|e| CliError::Validation(format!("{}: {e}", audit.display())));
    }
    Ok(log)
}

fn replay_file(path: &Path) -> Result<VerifiedLog, CliError> {
    let log = load_log(path)?;
    let contest = Contest::replay(&log).map_err(|e| match e {
        ContestError::EmptyLog => CliError::Validation(format!("{}: {e}", path.display())),
        other => CliError::Divergence(format!("{}: {other}", path.display())),
    })?;
    Ok(VerifiedLog {
        log: path.display().to_string(),
        events: log.len(),
        state: format!("{:?}", contest.state()),
        state_hash: contest.state_hash(),
    })
}

fn verify_dir(dir: &Path) -> Result<Vec<VerifiedLog>, CliError> {
    let index = dir.join("contests.csv");
    let mut rdr =
        csv::Reader::from_path(&index).map_err(|e| CliError::Validation(format!("{}: {e}", index.display())))?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let (id, want) = (&rec[0], &rec[1]);
        let path: PathBuf = dir.join("logs").join(format!("{}.jsonl", file_stem(id)));
        let v = replay_file(&path)?;
        if v.state_hash != want {
            return Err(CliError::Divergence(format!(
                "{id}: replayed hash {} differs from recorded {want}",
                v.state_hash
            )));
        }
        out.push(v);
    }
    Ok(out)
}

pub fn verify_cmd(cli: &Cli, args: &VerifyArgs) -> Result<Outcome, CliError> {
    if args.expect_hash.is_some() && (args.paths.len() != 1 || args.paths[0].is_dir()) {
        return Err(CliError::Validation("--expect-hash needs exactly one log file".into()));
    }
    let mut verified = Vec::new();
    for path in &args.paths {
        if path.is_dir() {
            verified.extend(verify_dir(path)?);
        } else {
            let v = replay_file(path)?;
            if let Some(want) = &args.expect_hash {
                if &v.state_hash != want {
                    return Err(CliError::Divergence(format!(
                        "{}: replayed hash {} differs from expected {want}",
                        v.log, v.state_hash
                    )));
                }
            }
            verified.push(v);
        }
    }
    let report = match cli.format {
        Format::Json => serde_json::to_string_pretty(&verified)? + "\n",
        Format::Csv => csv_string(
            &["log", "events", "state", "state_hash"].map(String::from),
            verified.iter().map(|v| {
                vec![
                    v.log.clone(),
                    v.events.to_string(),
                    v.state.clone(),
                    v.state_hash.clone(),
                ]
            }),
        )?,
        Format::Text => {
            let rows: Vec<Vec<String>> = verified
                .iter()
                .map(|v| {
                    vec![
                        v.log.clone(),
                        v.events.to_string(),
                        v.state.clone(),
                        v.state_hash.clone(),
                    ]
                })
                .collect();
            text_table(&["Log", "Events", "State", "State hash"].map(String::from), &rows)
        }
    };
    Ok(Outcome {
        report,
        note: Some(format!("verified {} log(s)", verified.len())),
        failure: None,
    })
}
