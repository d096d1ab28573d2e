// Copyright 2026 The Veracity Bond Authors
// SPDX-License-Identifier: Apache-2.0

//! First-come-first-served multi-server queue with Poisson arrivals.
//!
//! Each arrival (a dispute) brings `batch` tasks; a dispute leaves once all
//! of its tasks are served. With `batch = 1` this is the plain M/G/c queue.
//! Because service is FCFS, every task's start time is fixed the moment it
//! arrives (`max(arrival, earliest server free time)`), so the whole run is
//! a single pass over arrivals with a heap of server free times.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand::Rng;
use rand_distr::{Distribution, Exp, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ServiceDist {
    Deterministic {
        mean: f64,
    },
    Exponential {
        mean: f64,
    },
    /// `cv` is the coefficient of variation.
    LogNormal {
        mean: f64,
        cv: f64,
    },
}

impl ServiceDist {
    pub fn mean(&self) -> f64 {
        match *self {
            ServiceDist::Deterministic { mean }
            | ServiceDist::Exponential { mean }
            | ServiceDist::LogNormal { mean, .. } => mean,
        }
    }

    /// Same family, mean multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> ServiceDist {
        match *self {
            ServiceDist::Deterministic { mean } => ServiceDist::Deterministic { mean: mean * factor },
            ServiceDist::Exponential { mean } => ServiceDist::Exponential { mean: mean * factor },
            ServiceDist::LogNormal { mean, cv } => ServiceDist::LogNormal {
                mean: mean * factor,
                cv,
            },
        }
    }

    fn sampler(&self) -> Result<Sampler, AnalysisError> {
        let mean = self.mean();
        if !(mean > 0.0) {
            return Err(AnalysisError::NonPositive {
                name: "service mean",
                value: mean,
            });
        }
        Ok(match *self {
            ServiceDist::Deterministic { mean } => Sampler::Fixed(mean),
            ServiceDist::Exponential { mean } => Sampler::Exp(Exp::new(1.0 / mean).expect("positive rate")),
            ServiceDist::LogNormal { mean, cv } => {
                let sigma2 = (1.0 + cv * cv).ln();
                let mu = mean.ln() - sigma2 / 2.0;
                Sampler::LogNormal(LogNormal::new(mu, sigma2.sqrt()).map_err(|_| AnalysisError::Negative {
                    name: "service cv",
                    value: cv,
                })?)
            }
        })
    }
}

enum Sampler {
    Fixed(f64),
    Exp(Exp<f64>),
    LogNormal(LogNormal<f64>),
}

impl Sampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Fixed(v) => *v,
            Sampler::Exp(d) => d.sample(rng),
            Sampler::LogNormal(d) => d.sample(rng),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueueParams {
    pub arrival_rate: f64,
    pub service: ServiceDist,
    pub servers: usize,
    /// Tasks per arrival.
    pub batch: usize,
    pub horizon: f64,
    /// Statistics ignore `[0, warmup)`.
    pub warmup: f64,
    /// Number of backlog snapshots over the horizon.
    pub samples: usize,
}

impl QueueParams {
    pub fn mgc(arrival_rate: f64, service: ServiceDist, servers: usize, horizon: f64) -> Self {
        QueueParams {
            arrival_rate,
            service,
            servers,
            batch: 1,
            horizon,
            warmup: horizon * 0.1,
            samples: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BacklogSample {
    pub time: f64,
    /// Arrivals not yet departed.
    pub in_system: u64,
    /// Unfinished server-time, queued plus remaining in service.
    pub work: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueStats {
    /// Time-average number in system over the measurement window.
    pub mean_in_system: f64,
    /// Mean sojourn of arrivals in the window.
    pub mean_wait: f64,
    /// Departures per unit time in the window.
    pub throughput: f64,
    /// Arrivals per unit time in the window.
    pub observed_arrival_rate: f64,
    pub arrivals: u64,
    pub trajectory: Vec<BacklogSample>,
}

impl QueueStats {
    /// `|L − λW| / max(L, 1)`.
    pub fn littles_law_error(&self) -> f64 {
        (self.mean_in_system - self.observed_arrival_rate * self.mean_wait).abs() / self.mean_in_system.max(1.0)
    }

    /// Least-squares slope of `value(sample)` over samples at or after `from`.
    pub fn slope_after(&self, from: f64, value: impl Fn(&BacklogSample) -> f64) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .trajectory
            .iter()
            .filter(|s| s.time >= from)
            .map(|s| (s.time, value(s)))
            .collect();
        least_squares_slope(&pts)
    }
}

pub fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    if points.len() < 2 {
        return 0.0;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (sxy, sxx) = points.iter().fold((0.0, 0.0), |(sxy, sxx), &(x, y)| {
        (sxy + (x - mx) * (y - my), sxx + (x - mx) * (x - mx))
    });
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Time(f64);

impl Eq for Time {}

impl PartialOrd for Time {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Time {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

pub fn mgc_simulate<R: Rng + ?Sized>(params: &QueueParams, rng: &mut R) -> Result<QueueStats, AnalysisError> {
    if !(params.horizon > 0.0) {
        return Err(AnalysisError::NonPositive {
            name: "horizon",
            value: params.horizon,
        });
    }
    if params.servers == 0 {
        return Err(AnalysisError::NonPositive {
            name: "servers",
            value: 0.0,
        });
    }
    if params.arrival_rate < 0.0 {
        return Err(AnalysisError::Negative {
            name: "arrival rate",
            value: params.arrival_rate,
        });
    }
    let warmup = params.warmup.clamp(0.0, params.horizon);
    let window = params.horizon - warmup;
    let sampler = params.service.sampler()?;
    let batch = params.batch.max(1);

    let mut free: BinaryHeap<Reverse<Time>> = (0..params.servers).map(|_| Reverse(Time(0.0))).collect();
    let mut departures: BinaryHeap<Reverse<Time>> = BinaryHeap::new();
    let sample_times: Vec<f64> = (1..=params.samples)
        .map(|i| params.horizon * i as f64 / params.samples as f64)
        .collect();
    let mut next_sample = 0;
    let mut trajectory = Vec::with_capacity(params.samples);

    let mut arrived: u64 = 0;
    let mut departed: u64 = 0;
    let mut area = 0.0; // ∫ in_system dt over the window
    let mut window_arrivals: u64 = 0;
    let mut window_sojourn = 0.0;
    let mut window_departures: u64 = 0;

    let interarrival = (params.arrival_rate > 0.0).then(|| Exp::new(params.arrival_rate).expect("positive rate"));
    let mut now = 0.0;

    loop {
        let arrival = match &interarrival {
            Some(exp) => now + exp.sample(rng),
            None => f64::INFINITY,
        };
        while next_sample < sample_times.len() && sample_times[next_sample] < arrival.min(params.horizon + 1.0) {
            let t = sample_times[next_sample];
            trajectory.push(snapshot(t, arrived, &mut departed, &mut departures, &free));
            next_sample += 1;
        }
        if arrival > params.horizon {
            break;
        }
        now = arrival;
        arrived += 1;

        let mut done = now;
        for _ in 0..batch {
            let Reverse(Time(f)) = free.pop().expect("servers > 0");
            let finish = now.max(f) + sampler.sample(rng);
            free.push(Reverse(Time(finish)));
            done = done.max(finish);
        }
        departures.push(Reverse(Time(done)));

        let overlap = done.min(params.horizon) - now.max(warmup);
        if overlap > 0.0 {
            area += overlap;
        }
        if now >= warmup {
            window_arrivals += 1;
            window_sojourn += done - now;
        }
        if done >= warmup && done <= params.horizon {
            window_departures += 1;
        }
    }
    let (mean_in_system, throughput, observed_arrival_rate) = if window > 0.0 {
        (
            area / window,
            window_departures as f64 / window,
            window_arrivals as f64 / window,
        )
    } else {
        (0.0, 0.0, 0.0)
    };
    let mean_wait = if window_arrivals > 0 {
        window_sojourn / window_arrivals as f64
    } else {
        0.0
    };
    Ok(QueueStats {
        mean_in_system,
        mean_wait,
        throughput,
        observed_arrival_rate,
        arrivals: arrived,
        trajectory,
    })
}

fn snapshot(
    t: f64,
    arrived: u64,
    departed: &mut u64,
    departures: &mut BinaryHeap<Reverse<Time>>,
    free: &BinaryHeap<Reverse<Time>>,
) -> BacklogSample {
    while let Some(Reverse(Time(d))) = departures.peek() {
        if *d > t {
            break;
        }
        departures.pop();
        *departed += 1;
    }
    let work = free.iter().map(|Reverse(Time(f))| (f - t).max(0.0)).sum();
    BacklogSample {
        time: t,
        in_system: arrived - *departed,
        work,
    }
}
