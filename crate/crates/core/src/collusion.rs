// Copyright 2026 The Veracity Bond Authors
// SPDX-License-Identifier: Apache-2.0

//! Probability that a colluding bloc seats a majority on a jury panel.
//!
//! With `k` colluders in a pool of `N` and a panel of `n = 2m + 1` drawn
//! without replacement, the number of colluders seated is
//! `X ~ Hypergeometric(N, k, n)` and the bloc controls the verdict when
//! `X ≥ t = m + 1`. As `N → ∞` with `k/N = p` fixed this tends to the
//! binomial tail. Both are bounded by `exp(−2n(½ − p)²)`.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;

use crate::error::AnalysisError;

/// Results below this are flagged as clamped.
pub const COMPUTATION_FLOOR: f64 = 1e-15;
/// Table cells below this print as `<1e-10`.
pub const DISPLAY_FLOOR: f64 = 1e-10;
/// Pool size under which the reference collusion table was produced.
pub const REFERENCE_POOL: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolSize {
    Finite(u64),
    /// Binomial limit.
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Colluders {
    Count(u64),
    Ratio(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollusionQuery {
    pub pool: PoolSize,
    pub colluders: Colluders,
    pub panel: u64,
}

impl CollusionQuery {
    pub fn finite(pool: u64, colluders: u64, panel: u64) -> Self {
        CollusionQuery {
            pool: PoolSize::Finite(pool),
            colluders: Colluders::Count(colluders),
            panel,
        }
    }

    pub fn binomial(ratio: f64, panel: u64) -> Self {
        CollusionQuery {
            pool: PoolSize::Infinite,
            colluders: Colluders::Ratio(ratio),
            panel,
        }
    }

    /// Query for a colluding share `ratio` of `pool`; finite pools get
    /// `k = round(ratio · N)`.
    pub fn with_ratio(pool: PoolSize, ratio: f64, panel: u64) -> Self {
        match pool {
            PoolSize::Finite(n_pool) => Self::finite(n_pool, (ratio * n_pool as f64).round() as u64, panel),
            PoolSize::Infinite => Self::binomial(ratio, panel),
        }
    }

    /// Colluding share `p = k / N`.
    pub fn ratio(&self) -> f64 {
        match (self.pool, self.colluders) {
            (_, Colluders::Ratio(p)) => p,
            (PoolSize::Finite(n), Colluders::Count(k)) => {
                if n == 0 {
                    0.0
                } else {
                    k as f64 / n as f64
                }
            }
            (PoolSize::Infinite, Colluders::Count(_)) => f64::NAN,
        }
    }

    pub fn threshold(&self) -> u64 {
        self.panel / 2 + 1
    }

    fn validate(&self) -> Result<(), AnalysisError> {
        if self.panel == 0 || self.panel.is_multiple_of(2) {
            return Err(AnalysisError::EvenPanel(self.panel));
        }
        match (self.pool, self.colluders) {
            (PoolSize::Finite(pool), Colluders::Count(k)) => {
                if k > pool {
                    return Err(AnalysisError::ColludersExceedPool { colluders: k, pool });
                }
                if self.panel > pool {
                    return Err(AnalysisError::PanelExceedsPool {
                        panel: self.panel,
                        pool,
                    });
                }
            }
            (_, Colluders::Ratio(p)) if !(0.0..=1.0).contains(&p) => {
                return Err(AnalysisError::RatioOutOfRange(p));
            }
            (PoolSize::Finite(_), Colluders::Ratio(_)) | (PoolSize::Infinite, Colluders::Ratio(_)) => {}
            (PoolSize::Infinite, Colluders::Count(_)) => {
                return Err(AnalysisError::RatioOutOfRange(f64::NAN));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollusionResult {
    pub panel: u64,
    pub ratio: f64,
    /// `P(X ≥ t)`, unclamped.
    pub exact_tail: f64,
    /// `exp(−2n(½ − p)²)`, absent when `p ≥ ½`.
    pub hoeffding: Option<f64>,
    /// `2(½ − p)²`.
    pub omega: f64,
    /// `exact_tail` is positive but below [`COMPUTATION_FLOOR`].
    pub clamped: bool,
}

impl CollusionResult {
    /// The tail with the computation floor applied.
    pub fn floored_tail(&self) -> f64 {
        if self.clamped {
            COMPUTATION_FLOOR
        } else {
            self.exact_tail
        }
    }
}

fn ln_choose(n: u64, k: u64) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Neumaier-compensated sum of `exp(log_terms)`, smallest first.
fn sum_exp(mut log_terms: Vec<f64>) -> f64 {
    log_terms.sort_by(f64::total_cmp);
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for lt in log_terms {
        let term = lt.exp();
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    (sum + comp).min(1.0)
}

/// `P(X ≥ t)` for `X ~ Hypergeometric(pool, colluders, panel)`.
pub fn hypergeometric_upper_tail(pool: u64, colluders: u64, panel: u64, t: u64) -> f64 {
    let honest = pool - colluders;
    let lo = t.max(panel.saturating_sub(honest));
    let hi = colluders.min(panel);
    if lo > hi {
        return 0.0;
    }
    let ln_total = ln_choose(pool, panel);
    let terms = (lo..=hi)
        .map(|x| ln_choose(colluders, x) + ln_choose(honest, panel - x) - ln_total)
        .collect();
    sum_exp(terms)
}

/// `P(X ≥ t)` for `X ~ Binomial(n, p)`.
pub fn binomial_upper_tail(n: u64, p: f64, t: u64) -> f64 {
    if t > n {
        return 0.0;
    }
    if p <= 0.0 {
        return if t == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return 1.0;
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let terms = (t..=n)
        .map(|x| ln_choose(n, x) + x as f64 * lp + (n - x) as f64 * lq)
        .collect();
    sum_exp(terms)
}

pub fn hoeffding_bound(panel: u64, ratio: f64) -> Result<f64, AnalysisError> {
    if !(0.0..0.5).contains(&ratio) {
        return Err(AnalysisError::RatioOutOfRange(ratio));
    }
    Ok((-(panel as f64) * omega(ratio)).exp())
}

/// Decay rate `Ω = 2(½ − p)²`.
pub fn omega(ratio: f64) -> f64 {
    2.0 * (0.5 - ratio).powi(2)
}

pub fn exact_collusion_probability(q: &CollusionQuery) -> Result<CollusionResult, AnalysisError> {
    q.validate()?;
    let t = q.threshold();
    let tail = match (q.pool, q.colluders) {
        (PoolSize::Finite(pool), Colluders::Count(k)) => hypergeometric_upper_tail(pool, k, q.panel, t),
        (PoolSize::Finite(pool), Colluders::Ratio(p)) => {
            let k = (p * pool as f64).round() as u64;
            hypergeometric_upper_tail(pool, k, q.panel, t)
        }
        (PoolSize::Infinite, Colluders::Ratio(p)) => binomial_upper_tail(q.panel, p, t),
        (PoolSize::Infinite, Colluders::Count(_)) => unreachable!("rejected by validate"),
    };
    let ratio = q.ratio();
    Ok(CollusionResult {
        panel: q.panel,
        ratio,
        exact_tail: tail,
        hoeffding: hoeffding_bound(q.panel, ratio).ok(),
        omega: omega(ratio),
        clamped: tail > 0.0 && tail < COMPUTATION_FLOOR,
    })
}

/// Panel sizes of the reference collusion table.
pub const TABLE_PANELS: [u64; 14] = [11, 15, 21, 25, 31, 35, 41, 43, 51, 61, 71, 81, 91, 101];
/// Colluder ratios of the reference collusion table.
pub const TABLE_RATIOS: [f64; 6] = [0.05, 0.10, 0.15, 0.20, 0.25, 0.30];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollusionTable {
    pub pool: PoolSize,
    pub ratios: Vec<f64>,
    pub rows: Vec<(u64, Vec<CollusionResult>)>,
}

pub fn collusion_table(pool: PoolSize, ratios: &[f64], panels: &[u64]) -> Result<CollusionTable, AnalysisError> {
    let rows = panels
        .iter()
        .map(|&n| {
            let cells = ratios
                .iter()
                .map(|&p| exact_collusion_probability(&CollusionQuery::with_ratio(pool, p, n)))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((n, cells))
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    Ok(CollusionTable {
        pool,
        ratios: ratios.to_vec(),
        rows,
    })
}

/// Scientific notation with a two-digit exponent (`2.92e-04`), or the
/// `<1e-10` sentinel below the display floor.
pub fn format_probability(p: f64) -> String {
    if p < DISPLAY_FLOOR {
        return "<1e-10".to_string();
    }
    format_sci(p)
}

pub fn format_sci(p: f64) -> String {
    let s = format!("{p:.2e}");
    match s.split_once('e') {
        Some((mantissa, exp)) => {
            let exp: i32 = exp.parse().expect("rust float exponent");
            let sign = if exp < 0 { '-' } else { '+' };
            format!("{mantissa}e{sign}{:02}", exp.abs())
        }
        None => s,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskMode {
    Exact,
    Hoeffding,
}

/// Smallest odd panel whose collusion risk is at most `epsilon`.
pub fn min_panel_for_risk(pool: PoolSize, ratio: f64, epsilon: f64, mode: RiskMode) -> Result<u64, AnalysisError> {
    if !(0.0..0.5).contains(&ratio) {
        return Err(AnalysisError::RatioOutOfRange(ratio));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(AnalysisError::InvalidEpsilon(epsilon));
    }
    let max_panel = match pool {
        PoolSize::Finite(n) if n % 2 == 1 => n,
        PoolSize::Finite(n) => n.saturating_sub(1),
        PoolSize::Infinite => u64::MAX,
    };
    let mut n = 1u64;
    loop {
        let risk = match mode {
            RiskMode::Exact => exact_collusion_probability(&CollusionQuery::with_ratio(pool, ratio, n))?.exact_tail,
            RiskMode::Hoeffding => hoeffding_bound(n, ratio)?,
        };
        if risk <= epsilon || n >= max_panel {
            return Ok(n);
        }
        n += 2;
    }
}
