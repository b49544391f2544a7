//! Stochastic simulation of both access models.
//!
//! Replications are independent: replication `r` draws from
//! `RngStream::new(seed, r)`, may run on any thread, and results are pooled
//! in replication order, so a config always produces the same summary.

pub mod event;
pub mod forkjoin;
pub mod fountain;
pub mod summary;

use rayon::prelude::*;

use crate::analytic::{FountainParams, SystemParams};
use crate::error::ModelError;
use crate::stat::RngStream;

pub use event::EventQueue;
pub use forkjoin::{run_forkjoin_replication, CancelPolicy, ForkJoinRun, TaskAudit, TaskState};
pub use fountain::run_fountain_replication;
pub use summary::{collect_summary, ecdf_at, summarize_replications, EcdfPoint, SimSummary, DEFAULT_ECDF_POINTS};

pub const DEFAULT_REQUESTS: usize = 1_000_000;
pub const DEFAULT_WARMUP: usize = 10_000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_REPLICATIONS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelConfig {
    ForkJoin { params: SystemParams, cancel: CancelPolicy },
    Fountain(FountainParams),
}

impl ModelConfig {
    fn name(&self) -> &'static str {
        match self {
            ModelConfig::ForkJoin { .. } => "fork-join",
            ModelConfig::Fountain(_) => "fountain",
        }
    }
}

/// One simulation experiment.
///
/// `num_requests` counts requests per replication, warm-up included; the
/// first `warmup` of them are excluded from the statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub model: ModelConfig,
    pub num_requests: usize,
    pub warmup: usize,
    pub seed: u64,
    pub replications: usize,
    pub ecdf_points: usize,
}

impl SimConfig {
    pub fn new(model: ModelConfig) -> Self {
        SimConfig {
            model,
            num_requests: DEFAULT_REQUESTS,
            warmup: DEFAULT_WARMUP,
            seed: DEFAULT_SEED,
            replications: DEFAULT_REPLICATIONS,
            ecdf_points: DEFAULT_ECDF_POINTS,
        }
    }

    pub fn forkjoin(params: SystemParams) -> Self {
        Self::new(ModelConfig::ForkJoin {
            params,
            cancel: CancelPolicy::Preempt,
        })
    }

    pub fn fountain(params: FountainParams) -> Self {
        Self::new(ModelConfig::Fountain(params))
    }

    pub fn with_requests(mut self, num_requests: usize, warmup: usize) -> Self {
        self.num_requests = num_requests;
        self.warmup = warmup;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_replications(mut self, replications: usize) -> Self {
        self.replications = replications;
        self
    }

    pub fn with_cancel(mut self, policy: CancelPolicy) -> Self {
        if let ModelConfig::ForkJoin { cancel, .. } = &mut self.model {
            *cancel = policy;
        }
        self
    }

    pub fn with_ecdf_points(mut self, points: usize) -> Self {
        self.ecdf_points = points;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.num_requests <= self.warmup {
            return Err(ModelError::param(
                "requests",
                format!("must exceed warmup ({}), got {}", self.warmup, self.num_requests),
            ));
        }
        if self.replications < 1 {
            return Err(ModelError::param("replications", "must be at least 1"));
        }
        if self.ecdf_points < 1 {
            return Err(ModelError::param("ecdf_points", "must be at least 1"));
        }
        if (self.num_requests - self.warmup) * self.replications < 2 {
            return Err(ModelError::TooFewSamples {
                needed: 2,
                got: (self.num_requests - self.warmup) * self.replications,
            });
        }
        Ok(())
    }
}

/// Fork-join results with per-replication diagnostics.
#[derive(Debug, Clone)]
pub struct ForkJoinReport {
    pub summary: SimSummary,
    pub time_avg_in_system: Vec<f64>,
    pub audits: Vec<TaskAudit>,
}

/// Simulates the fork-join system described by `cfg`.
pub fn simulate_forkjoin(cfg: &SimConfig) -> Result<SimSummary, ModelError> {
    simulate_forkjoin_report(cfg).map(|r| r.summary)
}

pub fn simulate_forkjoin_report(cfg: &SimConfig) -> Result<ForkJoinReport, ModelError> {
    let ModelConfig::ForkJoin { params, cancel } = cfg.model else {
        return Err(ModelError::WrongModel {
            expected: "fork-join",
            found: cfg.model.name(),
        });
    };
    cfg.validate()?;
    params.ensure_stable()?;
    if !(params.lambda() > 0.0) {
        return Err(ModelError::param("lambda", "simulation needs a positive arrival rate"));
    }
    let runs: Vec<ForkJoinRun> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|r| {
            run_forkjoin_replication(
                &params,
                cancel,
                cfg.num_requests,
                cfg.warmup,
                RngStream::new(cfg.seed, r),
            )
        })
        .collect();
    let time_avg_in_system = runs.iter().map(|r| r.time_avg_in_system).collect();
    let audits = runs.iter().map(|r| r.audit).collect();
    let samples: Vec<Vec<f64>> = runs.into_iter().map(|r| r.samples).collect();
    Ok(ForkJoinReport {
        summary: summarize_replications(&samples, cfg.ecdf_points)?,
        time_avg_in_system,
        audits,
    })
}

/// Simulates the fountain system described by `cfg`. Fountain requests are
/// independent, so only `num_requests - warmup` draws per replication are
/// generated.
pub fn simulate_fountain(cfg: &SimConfig) -> Result<SimSummary, ModelError> {
    let ModelConfig::Fountain(params) = cfg.model else {
        return Err(ModelError::WrongModel {
            expected: "fountain",
            found: cfg.model.name(),
        });
    };
    cfg.validate()?;
    let count = cfg.num_requests - cfg.warmup;
    let samples: Vec<Vec<f64>> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|r| run_fountain_replication(&params, count, RngStream::new(cfg.seed, r)))
        .collect();
    summarize_replications(&samples, cfg.ecdf_points)
}

/// Dispatches on the configured model.
pub fn simulate(cfg: &SimConfig) -> Result<SimSummary, ModelError> {
    match cfg.model {
        ModelConfig::ForkJoin { .. } => simulate_forkjoin(cfg),
        ModelConfig::Fountain(_) => simulate_fountain(cfg),
    }
}
