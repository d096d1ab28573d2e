// Copyright 2026 The Veracity Bond Authors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use veracity_cli::golden::{capacity_cells, collusion_cells};
use veracity_core::capacity::{
    capacity_table, format_count, reference_platforms, reference_staffing, verify_stability, CapacityQuery, Stability,
    StabilityConfig,
};
use veracity_core::collusion::{
    exact_collusion_probability, hoeffding_bound, hypergeometric_upper_tail, CollusionQuery, PoolSize, REFERENCE_POOL,
};
use veracity_core::contest::{Contest, ContestConfig, EventLog, Verdict};
use veracity_core::jury::{benefit_at, optimal_participation, reputation_score};
use veracity_core::protocol::distribute_forfeited_bond;
use veracity_core::simulation::{empirical_collusion_rate, run_scenario, AgentGroup, AgentStrategy, ScenarioConfig};
use veracity_core::{Fraction, JurorFeeCurve, JurorProfile, Money, ParticipantId, PayoutPolicy};

type Verdict_ = Result<String, String>;

fn veracity(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_veracity"))
        .args(args)
        .env_remove("VERACITY_SEED")
        .output()
        .expect("spawn veracity")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed <= limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    csv::Reader::from_reader(text.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

fn table_reproduction() -> Verdict_ {
    let start = Instant::now();
    let out = veracity(&["collusion-table", "--check", "--format", "csv"]);
    let elapsed = start.elapsed();
    ensure(out.status.code() == Some(0), || {
        format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr))
    })?;
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    let mut exact = 0;
    let mut sentinels = 0;
    for cell in collusion_cells() {
        let row = rows
            .iter()
            .find(|r| r[0] == cell.panel.to_string())
            .ok_or_else(|| format!("missing row {}", cell.panel))?;
        let col = [0.05, 0.10, 0.15, 0.20, 0.25, 0.30]
            .iter()
            .position(|&p| (p - cell.ratio).abs() < 1e-9)
            .unwrap();
        let got = &row[col + 1];
        ensure(*got == cell.printed, || {
            format!("n={} p={}: {got} vs {}", cell.panel, cell.ratio, cell.printed)
        })?;
        exact += 1;
        sentinels += usize::from(got == "<1e-10");
    }
    within(elapsed, Duration::from_secs(5))?;
    Ok(format!(
        "{exact}/84 cells identical at 3 s.f., {sentinels} <1e-10 sentinels in the reference cells, pool N={REFERENCE_POOL}, {elapsed:.2?}"
    ))
}

fn capacity_reproduction() -> Verdict_ {
    let start = Instant::now();
    let out = veracity(&["capacity-table", "--check", "--format", "csv"]);
    let elapsed = start.elapsed();
    ensure(out.status.code() == Some(0), || format!("exit {:?}", out.status.code()))?;
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    let configs = ["Quick", "Standard", "Thorough"];
    for cell in capacity_cells() {
        let row = rows.iter().find(|r| r[0] == cell.platform).ok_or("missing platform")?;
        let col = configs.iter().position(|c| *c == cell.staffing).unwrap();
        let got: u64 = row[3 + col].parse().unwrap();
        ensure(got == cell.n_min, || {
            format!("{}/{}: {got} vs {}", cell.platform, cell.staffing, cell.n_min)
        })?;
        let shown = format_count(got as f64);
        ensure(shown == cell.display, || {
            format!("{}/{}: shows {shown}", cell.platform, cell.staffing)
        })?;
    }
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!("12/12 integers exact, display forms match, {elapsed:.2?}"))
}

fn hoeffding_dominance() -> Verdict_ {
    let start = Instant::now();
    let mut cells = 0;
    for pool in [PoolSize::Finite(REFERENCE_POOL), PoolSize::Infinite] {
        for n in (11..=101u64).step_by(2) {
            for step in 5..=30 {
                let p = step as f64 / 100.0;
                let exact = exact_collusion_probability(&CollusionQuery::with_ratio(pool, p, n))
                    .map_err(|e| e.to_string())?
                    .exact_tail;
                let bound = hoeffding_bound(n, p).map_err(|e| e.to_string())?;
                ensure(exact <= bound, || format!("{pool:?} n={n} p={p}: {exact} > {bound}"))?;
                cells += 1;
            }
        }
    }
    let checkpoint = (-2.0f64 * 21.0 * 0.16).exp();
    ensure(checkpoint < 0.002, || format!("checkpoint {checkpoint}"))?;
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!(
        "{cells} cells dominated, exp(-2*21*0.16) = {checkpoint:.6}, {:.2?}",
        start.elapsed()
    ))
}

fn counting_oracle(pool: usize, colluders: usize, panel: usize, t: usize) -> f64 {
    let mut ways = vec![vec![0u128; panel + 1]; panel + 1];
    ways[0][0] = 1;
    for member in 0..pool {
        let bad = usize::from(member < colluders);
        for j in (1..=panel.min(member + 1)).rev() {
            for x in (bad..=j).rev() {
                let add = ways[j - 1][x - bad];
                ways[j][x] += add;
            }
        }
    }
    let total: u128 = ways[panel].iter().sum();
    let hits: u128 = ways[panel][t..].iter().sum();
    hits as f64 / total as f64
}

fn small_instance_oracle() -> Verdict_ {
    let start = Instant::now();
    let mut cells = 0;
    let mut worst = 0.0f64;
    for pool in 1..=60usize {
        for panel in (1..=15usize).step_by(2).filter(|&n| n <= pool) {
            let t = panel / 2 + 1;
            for k in 0..=pool {
                let want = counting_oracle(pool, k, panel, t);
                let got = hypergeometric_upper_tail(pool as u64, k as u64, panel as u64, t as u64);
                let rel = if want == 0.0 { got } else { (got - want).abs() / want };
                ensure(rel <= 1e-12, || format!("N={pool} k={k} n={panel}: {got} vs {want}"))?;
                worst = worst.max(rel);
                cells += 1;
            }
        }
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!(
        "{cells} instances, worst relative error {worst:.1e}, {:.2?}",
        start.elapsed()
    ))
}

fn threshold_sharpness() -> Verdict_ {
    let start = Instant::now();
    let table = capacity_table(&reference_platforms()[..2], &reference_staffing()).map_err(|e| e.to_string())?;
    let mut worst_slope: f64 = 0.0;
    let mut runs = 0;
    for row in &table.rows {
        for (cfg, &n_min) in table.configs.iter().zip(&row.n_min) {
            let q = CapacityQuery {
                lambda: row.lambda,
                panel_size: cfg.panel_size,
                hours_per_case: cfg.hours_per_case,
                available_hours: cfg.available_hours,
            };
            let stab = StabilityConfig::for_arrivals(q.lambda, 50_000.0);
            let under = (0.8 * n_min as f64).ceil() as u64;
            for seed in 0..3u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let at = verify_stability(&q, n_min, &stab, &mut rng).map_err(|e| e.to_string())?;
                ensure(at.verdict == Stability::Stable && at.littles_law_error <= 0.05, || {
                    format!("{}/{} N={n_min} seed {seed}: {:?}", row.platform, cfg.name, at.verdict)
                })?;
                let below = verify_stability(&q, under, &stab, &mut rng).map_err(|e| e.to_string())?;
                let rel = (below.backlog_slope - below.shortfall_rate).abs() / below.shortfall_rate;
                ensure(below.verdict == Stability::Divergent && rel <= 0.2, || {
                    format!(
                        "{}/{} N={under} seed {seed}: {:?}, slope {} vs {}",
                        row.platform, cfg.name, below.verdict, below.backlog_slope, below.shortfall_rate
                    )
                })?;
                worst_slope = worst_slope.max(rel);
                runs += 2;
            }
        }
    }
    within(start.elapsed(), Duration::from_secs(120))?;
    Ok(format!(
        "{runs} runs, stable at N_min, divergent at ceil(0.8 N_min), worst slope error {:.1}%, {:.2?}",
        worst_slope * 100.0,
        start.elapsed()
    ))
}

fn group(count: u32, strategy: AgentStrategy) -> AgentGroup {
    AgentGroup { count, strategy }
}

fn random_policy(rng: &mut ChaCha8Rng) -> PayoutPolicy {
    loop {
        let den = rng.random_range(1..=1000u64);
        let platform = Fraction::new(rng.random_range(0..=den), den).unwrap();
        let jury = Fraction::new(rng.random_range(0..=den), den).unwrap();
        let curve = if rng.random_bool(0.5) {
            JurorFeeCurve::Flat
        } else {
            JurorFeeCurve::LogScale {
                base: rng.random_range(1..10_000),
            }
        };
        if let Ok(p) = PayoutPolicy::new(platform, jury, curve) {
            return p;
        }
    }
}

fn random_scenario(rng: &mut ChaCha8Rng) -> ScenarioConfig {
    let panel = [1usize, 3, 5, 7, 9][rng.random_range(0..5)];
    let mut policy = random_policy(rng);
    policy.gamma = Fraction::new(rng.random_range(1..10), 10).unwrap();
    ScenarioConfig {
        name: "conservation".into(),
        seed: rng.random(),
        contests: rng.random_range(5..30),
        wave_size: rng.random_range(1..8),
        bond: Money::new(rng.random_range(1..1_000_000)),
        truth_prior: None,
        creators: vec![
            group(
                8,
                AgentStrategy::HonestCreator {
                    accuracy: rng.random_range(0.5..1.0),
                },
            ),
            group(
                8,
                AgentStrategy::MisinfoCreator {
                    accuracy: rng.random_range(0.0..0.5),
                },
            ),
        ],
        challengers: vec![
            group(
                6,
                AgentStrategy::DiligentChallenger {
                    detection_skill: rng.random_range(0.0..1.0),
                },
            ),
            group(
                4,
                AgentStrategy::FrivolousChallenger {
                    challenge_rate: rng.random_range(0.0..0.6),
                },
            ),
        ],
        jurors: vec![
            group(
                25,
                AgentStrategy::DiligentJuror {
                    error_rate: rng.random_range(0.0..0.5),
                },
            ),
            group(
                10,
                AgentStrategy::LazyJuror {
                    abstain_prob: rng.random_range(0.0..0.9),
                },
            ),
            group(
                6,
                AgentStrategy::ColludingJuror {
                    bloc: 1,
                    target: if rng.random_bool(0.5) {
                        Verdict::ForChallenger
                    } else {
                        Verdict::ForCreator
                    },
                },
            ),
        ],
        contest: ContestConfig {
            panel_size: panel,
            bench_size: rng.random_range(0..4),
            policy,
            reputation_threshold: -1000.0,
            ..ContestConfig::default()
        },
        challenge_cap: rng.random_range(1..6),
        evaluators_per_juror: rng.random_range(1..4),
        rating_noise: rng.random_range(0.0..0.5),
        reputation: Default::default(),
    }
}

fn conservation() -> Verdict_ {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..10_000 {
        let beta = Money::new(rng.random_range(1..=1u64 << 50));
        let policy = random_policy(&mut rng);
        let n = 2 * rng.random_range(0..50usize) + 1;
        let jurors: Vec<ParticipantId> = (0..n).map(|j| ParticipantId::new(format!("j{j}"))).collect();
        let payout = distribute_forfeited_bond(beta, &policy, &jurors).map_err(|e| format!("draw {i}: {e}"))?;
        let total = payout.total().map_err(|e| e.to_string())?;
        ensure(total == beta, || format!("draw {i}: {total} != {beta}"))?;
    }
    let mut contests = 0;
    for i in 0..100 {
        let cfg = random_scenario(&mut rng);
        let run = run_scenario(&cfg).map_err(|e| format!("scenario {i}: {e}"))?;
        ensure(run.metrics.escrow_residual == 0, || {
            format!("scenario {i}: residual {}", run.metrics.escrow_residual)
        })?;
        contests += run.metrics.contests;
    }
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!(
        "10000 payouts sum to beta exactly, 100 scenarios ({contests} contests) end with residual 0, {:.2?}",
        start.elapsed()
    ))
}

fn empirical_collusion() -> Verdict_ {
    let start = Instant::now();
    let reference = 7.81e-2;
    let q = CollusionQuery::with_ratio(PoolSize::Finite(REFERENCE_POOL), 0.30, 11);
    let r = empirical_collusion_rate(&q, 100_000, &mut ChaCha8Rng::seed_from_u64(2026)).map_err(|e| e.to_string())?;
    ensure(r.contains(reference), || {
        format!("rate {} with interval [{}, {}]", r.rate, r.wilson_low, r.wilson_high)
    })?;
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!(
        "rate {:.5}, 3-sigma Wilson [{:.5}, {:.5}] contains {reference}, {:.2?}",
        r.rate,
        r.wilson_low,
        r.wilson_high,
        start.elapsed()
    ))
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().display().to_string();
                out.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Verdict_ {
    let start = Instant::now();
    let commands: Vec<Vec<&str>> = vec![
        vec!["collusion-table", "--format", "csv"],
        vec!["collusion-table", "--binomial", "--format", "json"],
        vec!["capacity-table", "--format", "json"],
        vec!["capacity-table"],
        vec!["min-panel", "--ratio", "0.2", "--epsilon", "0.001"],
        vec![
            "min-jurors",
            "--lambda",
            "4.1667",
            "--panel",
            "21",
            "--hours",
            "0.5",
            "--available",
            "2",
            "--simulate-pool",
            "22",
            "--seed",
            "9",
            "--format",
            "json",
        ],
    ];
    for args in &commands {
        let (a, b) = (veracity(args), veracity(args));
        ensure(
            a.status.success() && a.stdout == b.stdout && !a.stdout.is_empty(),
            || format!("{} differs between runs", args.join(" ")),
        )?;
    }
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut logs = 0;
    for scenario in ["all-honest", "collusion-sweep"] {
        let dirs = ["a", "b"].map(|s| tmp.path().join(format!("{scenario}-{s}")));
        for d in &dirs {
            let out = veracity(&[
                "simulate",
                "--scenario",
                scenario,
                "--out-dir",
                d.to_str().unwrap(),
                "--format",
                "json",
            ]);
            ensure(out.status.success(), || {
                format!("simulate {scenario}: {}", String::from_utf8_lossy(&out.stderr))
            })?;
        }
        let (ta, tb) = (read_tree(&dirs[0]), read_tree(&dirs[1]));
        ensure(ta == tb, || format!("{scenario}: outputs differ between runs"))?;
        let out = veracity(&["verify", dirs[0].to_str().unwrap(), "--format", "csv"]);
        ensure(out.status.code() == Some(0), || {
            format!("verify {scenario}: exit {:?}", out.status.code())
        })?;
        // replay in-process as well
        let index = fs::read_to_string(dirs[0].join("contests.csv")).unwrap();
        for row in csv_rows(&index) {
            let text = fs::read_to_string(dirs[0].join("logs").join(format!("{}.jsonl", row[0]))).unwrap();
            let log = EventLog::from_jsonl(&text).map_err(|e| e.to_string())?;
            let hash = Contest::replay(&log).map_err(|e| e.to_string())?.state_hash();
            ensure(hash == row[1], || format!("{}: replay hash differs", row[0]))?;
            logs += 1;
        }
    }
    Ok(format!(
        "{} commands and 2 scenarios byte-identical across runs, {logs} logs replay to their terminal hashes, {:.2?}",
        commands.len(),
        start.elapsed()
    ))
}

fn random_profile(rng: &mut ChaCha8Rng, i: usize) -> JurorProfile {
    let mut p = JurorProfile::new(format!("p{i}").as_str());
    p.visibility = rng.random_range(0.0..10.0);
    p.weight_prosocial = rng.random_range(0.0..5.0);
    p.weight_monetary = rng.random_range(0.0..5.0);
    p.est_va = rng.random_range(-1.0..1.0);
    p.est_vy = rng.random_range(-1.0..1.0);
    p.cost_coefficient = rng.random_range(0.05..5.0);
    p.reputation = reputation_score(&p);
    p
}

fn reputation_properties() -> Verdict_ {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_gap: f64 = 0.0;
    let d = 0.5;
    for i in 0..1000 {
        let p = random_profile(&mut rng, i);
        let r = reputation_score(&p);
        let tol = 1e-9 * (1.0 + r.abs());
        let shifted = |f: &dyn Fn(&mut JurorProfile)| {
            let mut q = p.clone();
            f(&mut q);
            reputation_score(&q) - r
        };
        let dx = shifted(&|q| q.visibility += d);
        let dva = shifted(&|q| q.est_va += d);
        let dvy = shifted(&|q| q.est_vy += d);
        let dva2 = shifted(&|q| q.est_va += 2.0 * d);
        ensure(
            (dx - d * (p.weight_prosocial * p.est_va - p.weight_monetary * p.est_vy)).abs() < tol,
            || format!("profile {i}: not linear in x"),
        )?;
        ensure(
            (dva - d * p.visibility * p.weight_prosocial).abs() < tol && dva >= 0.0,
            || format!("profile {i}: E[v_a] slope"),
        )?;
        ensure(
            (dvy + d * p.visibility * p.weight_monetary).abs() < tol && dvy <= 0.0,
            || format!("profile {i}: E[v_y] slope"),
        )?;
        ensure((dva2 - 2.0 * dva).abs() < tol, || format!("profile {i}: curvature"))?;

        let y = rng.random_range(0.0..2.0);
        let grid = (0..=1000)
            .map(|k| k as f64 / 1000.0)
            .max_by(|a, b| benefit_at(&p, y, *a).total_cmp(&benefit_at(&p, y, *b)))
            .unwrap();
        let gap = (optimal_participation(&p, y) - grid).abs();
        ensure(gap <= 1e-3 + 1e-12, || {
            format!("profile {i}: a* off grid argmax by {gap}")
        })?;
        worst_gap = worst_gap.max(gap);
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!(
        "1000 profiles linear with signs (+, -), worst |a* - argmax| = {worst_gap:.1e}, {:.2?}",
        start.elapsed()
    ))
}

fn main() {
    type Criterion = (&'static str, fn() -> Verdict_);
    let criteria: [Criterion; 9] = [
        ("1 collusion table reproduction", table_reproduction),
        ("2 capacity table reproduction", capacity_reproduction),
        ("3 Hoeffding dominance", hoeffding_dominance),
        ("4 small-instance oracle", small_instance_oracle),
        ("5 capacity threshold sharpness", threshold_sharpness),
        ("6 money conservation", conservation),
        ("7 empirical collusion agreement", empirical_collusion),
        ("8 determinism and replay", determinism),
        ("9 reputation properties", reputation_properties),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
