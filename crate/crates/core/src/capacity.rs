// Copyright 2026 The Veracity Bond Authors
// SPDX-License-Identifier: Apache-2.0

//! Juror-pool sizing.
//!
//! Each dispute consumes `n·h` juror-hours and a pool of `N` jurors supplies
//! `N·a` juror-hours per time unit, so the backlog stays finite exactly when
//! `N ≥ N_min = ⌈λnh/a⌉`. All rates (`λ` and `a`) are on one common time
//! basis; no unit conversion is applied.
//!
//! Stability is checked by simulation: every juror is a server working at
//! rate `a`, every dispute is a batch of `n` tasks of `h` juror-hours each
//! (wall time `h/a`), served FCFS.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;
use crate::queue::{mgc_simulate, QueueParams, QueueStats, ServiceDist};

/// Relative tolerance below which `λnh/a` is treated as an exact integer.
const INTEGER_SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityQuery {
    /// Disputes per time unit.
    pub lambda: f64,
    pub panel_size: u64,
    /// Juror-hours per case.
    pub hours_per_case: f64,
    /// Juror-hours each juror supplies per time unit.
    pub available_hours: f64,
}

impl CapacityQuery {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        if !(self.lambda >= 0.0) {
            return Err(AnalysisError::Negative {
                name: "lambda",
                value: self.lambda,
            });
        }
        if self.panel_size == 0 || self.panel_size.is_multiple_of(2) {
            return Err(AnalysisError::EvenPanel(self.panel_size));
        }
        if !(self.hours_per_case > 0.0) {
            return Err(AnalysisError::NonPositive {
                name: "hours_per_case",
                value: self.hours_per_case,
            });
        }
        if !(self.available_hours > 0.0) {
            return Err(AnalysisError::NonPositive {
                name: "available_hours",
                value: self.available_hours,
            });
        }
        Ok(())
    }

    /// Juror-hours demanded per time unit, `λnh`.
    pub fn demand(&self) -> f64 {
        self.lambda * self.panel_size as f64 * self.hours_per_case
    }

    /// `λnh / (N·a)`.
    pub fn utilization(&self, pool: u64) -> f64 {
        if pool == 0 {
            return f64::INFINITY;
        }
        self.demand() / (pool as f64 * self.available_hours)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    pub n_min: u64,
    /// Whole panels the pool can seat at once, `⌊N_min/n⌋`.
    pub panel_servers: u64,
    /// Work utilization at `N = N_min`.
    pub utilization: f64,
    pub stable: bool,
}

fn ceil_snapped(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() <= INTEGER_SNAP * x.abs().max(1.0) {
        r as u64
    } else {
        x.ceil() as u64
    }
}

pub fn min_jurors(q: &CapacityQuery) -> Result<CapacityResult, AnalysisError> {
    q.validate()?;
    let n_min = ceil_snapped(q.demand() / q.available_hours);
    let utilization = if n_min == 0 { 0.0 } else { q.utilization(n_min) };
    Ok(CapacityResult {
        n_min,
        panel_servers: n_min / q.panel_size,
        utilization,
        stable: utilization <= 1.0 + INTEGER_SNAP,
    })
}

/// Disputes per hour from daily content volume and a challenge ratio.
pub fn dispute_rate_from_volume(posts_per_day: f64, challenge_ratio: f64) -> Result<f64, AnalysisError> {
    if !(0.0..=1.0).contains(&challenge_ratio) {
        return Err(AnalysisError::InvalidChallengeRatio(challenge_ratio));
    }
    if !(posts_per_day >= 0.0) {
        return Err(AnalysisError::Negative {
            name: "posts_per_day",
            value: posts_per_day,
        });
    }
    Ok(posts_per_day * challenge_ratio / 24.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    /// Simulation looks stable but `ρ = 1` exactly.
    StableMarginal,
    Divergent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityConfig {
    pub service: ServiceFamily,
    /// Simulated time units.
    pub horizon: f64,
    /// Fraction of the horizon discarded before measuring.
    pub warmup_fraction: f64,
    pub samples: usize,
    /// Divergent when backlog slope exceeds this fraction of `λnh`.
    pub slope_tolerance: f64,
    /// Maximum `|L − λW| / max(L, 1)` for a stable verdict.
    pub littles_tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServiceFamily {
    Deterministic,
    Exponential,
    LogNormal,
}

impl StabilityConfig {
    /// Horizon sized for roughly `target_arrivals` disputes.
    pub fn for_arrivals(lambda: f64, target_arrivals: f64) -> Self {
        let horizon = if lambda > 0.0 {
            target_arrivals / lambda
        } else {
            1_000.0
        };
        StabilityConfig {
            service: ServiceFamily::Deterministic,
            horizon,
            warmup_fraction: 0.1,
            samples: 400,
            slope_tolerance: 0.05,
            littles_tolerance: 0.05,
        }
    }

    fn service(&self, mean: f64) -> ServiceDist {
        match self.service {
            ServiceFamily::Deterministic => ServiceDist::Deterministic { mean },
            ServiceFamily::Exponential => ServiceDist::Exponential { mean },
            ServiceFamily::LogNormal => ServiceDist::LogNormal { mean, cv: 0.5 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub verdict: Stability,
    pub pool: u64,
    pub utilization: f64,
    /// Fitted growth of unfinished juror-hours per time unit.
    pub backlog_slope: f64,
    /// `λnh − Na`, the fluid-limit growth rate when positive.
    pub shortfall_rate: f64,
    pub littles_law_error: f64,
    pub stats: QueueStats,
}

pub fn verify_stability<R: Rng + ?Sized>(
    q: &CapacityQuery,
    pool: u64,
    config: &StabilityConfig,
    rng: &mut R,
) -> Result<StabilityReport, AnalysisError> {
    q.validate()?;
    if pool == 0 {
        return Err(AnalysisError::NonPositive {
            name: "pool",
            value: 0.0,
        });
    }
    let a = q.available_hours;
    let params = QueueParams {
        arrival_rate: q.lambda,
        service: config.service(q.hours_per_case / a),
        servers: pool as usize,
        batch: q.panel_size as usize,
        horizon: config.horizon,
        warmup: config.horizon * config.warmup_fraction,
        samples: config.samples,
    };
    let stats = mgc_simulate(&params, rng)?;
    let backlog_slope = stats.slope_after(params.warmup, |s| s.work * a);
    let shortfall_rate = q.demand() - pool as f64 * a;
    let littles_law_error = stats.littles_law_error();
    let utilization = q.utilization(pool);

    let bounded = backlog_slope <= config.slope_tolerance * q.demand().max(f64::MIN_POSITIVE);
    let verdict = if bounded && littles_law_error <= config.littles_tolerance {
        if (utilization - 1.0).abs() <= INTEGER_SNAP {
            Stability::StableMarginal
        } else {
            Stability::Stable
        }
    } else {
        Stability::Divergent
    };
    Ok(StabilityReport {
        verdict,
        pool,
        utilization,
        backlog_slope,
        shortfall_rate,
        littles_law_error,
        stats,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformRow {
    pub name: String,
    pub posts_per_day: f64,
    pub challenge_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaffingConfig {
    pub name: String,
    pub panel_size: u64,
    pub hours_per_case: f64,
    pub available_hours: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityRow {
    pub platform: String,
    pub posts_per_day: f64,
    pub lambda: f64,
    pub n_min: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityTable {
    pub configs: Vec<StaffingConfig>,
    pub rows: Vec<CapacityRow>,
}

/// Reference platforms. Challenge ratios are inferred so that volume × ratio
/// reproduces the published dispute rates.
pub fn reference_platforms() -> Vec<PlatformRow> {
    [
        ("Small Community", 100e3, 0.001),
        ("Reddit", 1.3e6, 0.002),
        ("Twitter/X", 500e6, 0.005),
        ("Facebook", 4.0e9, 0.003),
    ]
    .into_iter()
    .map(|(name, posts_per_day, challenge_ratio)| PlatformRow {
        name: name.to_string(),
        posts_per_day,
        challenge_ratio,
    })
    .collect()
}

pub fn reference_staffing() -> Vec<StaffingConfig> {
    [
        ("Quick", 21, 0.5, 2.0),
        ("Standard", 31, 1.0, 4.0),
        ("Thorough", 35, 2.0, 8.0),
    ]
    .into_iter()
    .map(|(name, panel_size, hours_per_case, available_hours)| StaffingConfig {
        name: name.to_string(),
        panel_size,
        hours_per_case,
        available_hours,
    })
    .collect()
}

pub fn capacity_table(rows: &[PlatformRow], configs: &[StaffingConfig]) -> Result<CapacityTable, AnalysisError> {
    let rows = rows
        .iter()
        .map(|row| {
            let lambda = dispute_rate_from_volume(row.posts_per_day, row.challenge_ratio)?;
            let n_min = configs
                .iter()
                .map(|c| {
                    min_jurors(&CapacityQuery {
                        lambda,
                        panel_size: c.panel_size,
                        hours_per_case: c.hours_per_case,
                        available_hours: c.available_hours,
                    })
                    .map(|r| r.n_min)
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(CapacityRow {
                platform: row.name.clone(),
                posts_per_day: row.posts_per_day,
                lambda,
                n_min,
            })
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    Ok(CapacityTable {
        configs: configs.to_vec(),
        rows,
    })
}

/// Compact count: `22`, `547K`, `2.6M`.
pub fn format_count(x: f64) -> String {
    if x < 1e3 {
        format!("{}", x.round() as u64)
    } else if x < 1e6 {
        format!("{}K", (x / 1e3).round() as u64)
    } else if x < 1e9 {
        format!("{:.1}M", x / 1e6)
    } else {
        format!("{:.1}B", x / 1e9)
    }
}

/// Content volume style: `100K`, `1.3M`, `500.0M`, `4.0B`.
pub fn format_volume(x: f64) -> String {
    if x < 1e6 {
        format_count(x)
    } else if x < 1e9 {
        format!("{:.1}M", x / 1e6)
    } else {
        format!("{:.1}B", x / 1e9)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(lambda: f64, n: u64, h: f64, a: f64) -> CapacityQuery {
        CapacityQuery {
            lambda,
            panel_size: n,
            hours_per_case: h,
            available_hours: a,
        }
    }

    #[test]
    fn reference_examples() {
        let reddit = dispute_rate_from_volume(1.3e6, 0.002).unwrap();
        assert!((reddit - 108.333).abs() < 1e-3);
        assert_eq!(min_jurors(&q(reddit, 31, 1.0, 4.0)).unwrap().n_min, 840);
        let small = dispute_rate_from_volume(100e3, 0.001).unwrap();
        assert_eq!(min_jurors(&q(small, 21, 0.5, 2.0)).unwrap().n_min, 22);
        assert_eq!(min_jurors(&q(500e3, 21, 0.5, 2.0)).unwrap().n_min, 2_625_000);
        assert_eq!(min_jurors(&q(0.0, 21, 0.5, 2.0)).unwrap().n_min, 0);
    }

    #[test]
    fn exact_products_do_not_round_up() {
        let twitter = dispute_rate_from_volume(500e6, 0.005).unwrap();
        assert_eq!(min_jurors(&q(twitter, 21, 0.5, 2.0)).unwrap().n_min, 546_875);
        assert_eq!(format_count(546_875.0), "547K");
    }

    #[test]
    fn rejects_bad_units() {
        assert!(min_jurors(&q(1.0, 21, 0.0, 2.0)).is_err());
        assert!(min_jurors(&q(1.0, 21, 0.5, 0.0)).is_err());
        assert!(min_jurors(&q(-1.0, 21, 0.5, 2.0)).is_err());
        assert!(dispute_rate_from_volume(1.0, 1.5).is_err());
        assert_eq!(dispute_rate_from_volume(1e6, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn twitter_rate_display() {
        let lambda = dispute_rate_from_volume(5e8, 0.005).unwrap();
        assert!((lambda - 104_166.67).abs() < 0.01);
        assert_eq!(format_count(lambda), "104K");
    }

    #[test]
    fn count_formats() {
        assert_eq!(format_count(22.0), "22");
        assert_eq!(format_count(2_625_000.0), "2.6M");
        assert_eq!(format_count(3_875_000.0), "3.9M");
        assert_eq!(format_volume(500e6), "500.0M");
        assert_eq!(format_volume(4e9), "4.0B");
        assert_eq!(format_volume(1.3e6), "1.3M");
        assert_eq!(format_volume(100e3), "100K");
    }

    #[test]
    fn empty_configs_give_empty_rows() {
        let t = capacity_table(&reference_platforms(), &[]).unwrap();
        assert!(t.rows.iter().all(|r| r.n_min.is_empty()));
        let t = capacity_table(&[], &reference_staffing()).unwrap();
        assert!(t.rows.is_empty());
    }
}
