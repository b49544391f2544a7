//! Grid expansion and per-point evaluation.

use rayon::prelude::*;

use coded_delay::analytic::{fj_bounds, fountain_mean_response, FountainParams, SystemParams};
use coded_delay::sim::{simulate_forkjoin, simulate_fountain, SimConfig, SimSummary};

use crate::config::{ExperimentConfig, Mode};

/// One grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    ForkJoin {
        n: usize,
        k: usize,
        lambda: f64,
        mu: f64,
    },
    Fountain {
        n: usize,
        k: usize,
        delivery: f64,
        wait_scale: f64,
    },
}

impl Point {
    pub fn n(&self) -> usize {
        match *self {
            Point::ForkJoin { n, .. } | Point::Fountain { n, .. } => n,
        }
    }

    pub fn k(&self) -> usize {
        match *self {
            Point::ForkJoin { k, .. } | Point::Fountain { k, .. } => k,
        }
    }

    /// Seed derived from the run seed and the point's parameters only, so a
    /// row does not depend on which other points share the grid.
    pub fn seed(&self, base: u64) -> u64 {
        let words: [u64; 5] = match *self {
            Point::ForkJoin { n, k, lambda, mu } => [1, n as u64, k as u64, lambda.to_bits(), mu.to_bits()],
            Point::Fountain {
                n,
                k,
                delivery,
                wait_scale,
            } => [2, n as u64, k as u64, delivery.to_bits(), wait_scale.to_bits()],
        };
        words.iter().fold(splitmix64(base), |h, &w| splitmix64(h ^ w))
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub n: usize,
    pub k: usize,
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub delivery: Option<f64>,
    pub wait_scale: Option<f64>,
    pub analytic: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub sim_mean: Option<f64>,
    pub ci95: Option<f64>,
    pub in_sandwich: Option<bool>,
    pub valid: bool,
    /// First error met while evaluating the row, if any.
    pub note: Option<String>,
}

impl ResultRow {
    fn empty(p: &Point) -> Self {
        let (lambda, mu, delivery, wait_scale) = match *p {
            Point::ForkJoin { lambda, mu, .. } => (Some(lambda), Some(mu), None, None),
            Point::Fountain {
                delivery, wait_scale, ..
            } => (None, None, Some(delivery), Some(wait_scale)),
        };
        ResultRow {
            n: p.n(),
            k: p.k(),
            lambda,
            mu,
            delivery,
            wait_scale,
            analytic: None,
            lower: None,
            upper: None,
            sim_mean: None,
            ci95: None,
            in_sandwich: None,
            valid: false,
            note: None,
        }
    }

    fn invalid(mut self, why: impl ToString) -> Self {
        self.valid = false;
        self.note.get_or_insert_with(|| why.to_string());
        self
    }
}

/// Expands the grid in a fixed order: the last-listed axis varies fastest.
/// Fork-join grids nest `mu, lambda, n, k`; fountain grids nest
/// `wait_scale, delivery, n, k`.
pub fn grid_points(cfg: &ExperimentConfig) -> Vec<Point> {
    let g = &cfg.grid;
    let mut out = Vec::new();
    if cfg.mode.is_fountain() {
        for &wait_scale in &g.wait_scale {
            for &delivery in &g.delivery {
                for &n in &g.n {
                    for &k in &g.k {
                        out.push(Point::Fountain {
                            n,
                            k,
                            delivery,
                            wait_scale,
                        });
                    }
                }
            }
        }
        return out;
    }
    for &mu in &g.mu {
        for &lambda in &g.lambda {
            if cfg.mode == Mode::SweepNFixedRate {
                for &k in &g.k {
                    let n = k.saturating_mul(cfg.expansion);
                    out.push(Point::ForkJoin { n, k, lambda, mu });
                }
                continue;
            }
            for &n in &g.n {
                for &k in &g.k {
                    out.push(Point::ForkJoin { n, k, lambda, mu });
                }
            }
        }
    }
    out
}

fn sim_config(cfg: &ExperimentConfig, sim: SimConfig, seed: u64) -> SimConfig {
    sim.with_requests(cfg.requests, cfg.warmup)
        .with_seed(seed)
        .with_replications(cfg.replications)
        .with_ecdf_points(cfg.ecdf_points)
        .with_cancel(cfg.cancel)
}

/// Evaluates one point. The summary is returned for simulated rows.
pub fn run_point(cfg: &ExperimentConfig, point: &Point) -> (ResultRow, Option<SimSummary>) {
    let mut row = ResultRow::empty(point);
    match *point {
        Point::ForkJoin { n, k, lambda, mu } => {
            let p = match SystemParams::new(n, k, lambda, mu) {
                Ok(p) => p,
                Err(e) => return (row.invalid(e), None),
            };
            let b = fj_bounds(&p);
            row.lower = b.lower;
            row.upper = b.upper;
            row.valid = b.lower_valid() && b.upper_valid();
            if !row.valid {
                row.note = Some("bound regime invalid".into());
            }
            if !cfg.mode.simulates() {
                return (row, None);
            }
            match simulate_forkjoin(&sim_config(cfg, SimConfig::forkjoin(p), point.seed(cfg.seed))) {
                Ok(s) => {
                    row.sim_mean = Some(s.mean);
                    row.ci95 = Some(s.ci95_halfwidth);
                    let ci = s.ci95_halfwidth;
                    let above = row.lower.is_none_or(|lo| s.mean >= lo - ci);
                    let below = row.upper.is_none_or(|hi| s.mean <= hi + ci);
                    row.in_sandwich = Some(above && below);
                    (row, Some(s))
                }
                Err(e) => (row.invalid(e), None),
            }
        }
        Point::Fountain {
            n,
            k,
            delivery,
            wait_scale,
        } => {
            let p = match FountainParams::new(n, k, wait_scale, delivery) {
                Ok(p) => p,
                Err(e) => return (row.invalid(e), None),
            };
            let exact = fountain_mean_response(&p);
            row.analytic = Some(exact);
            row.valid = true;
            if !cfg.mode.simulates() {
                return (row, None);
            }
            match simulate_fountain(&sim_config(cfg, SimConfig::fountain(p), point.seed(cfg.seed))) {
                Ok(s) => {
                    row.sim_mean = Some(s.mean);
                    row.ci95 = Some(s.ci95_halfwidth);
                    // The closed form is exact, so the band is the sampling
                    // error alone.
                    row.in_sandwich = Some((s.mean - exact).abs() <= 3.0 * s.ci95_halfwidth);
                    (row, Some(s))
                }
                Err(e) => (row.invalid(e), None),
            }
        }
    }
}

/// Runs every grid point, returning rows (and summaries) in grid order.
pub fn run_sweep_with_summaries(cfg: &ExperimentConfig) -> Vec<(ResultRow, Option<SimSummary>)> {
    grid_points(cfg).par_iter().map(|p| run_point(cfg, p)).collect()
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Vec<ResultRow> {
    run_sweep_with_summaries(cfg).into_iter().map(|(r, _)| r).collect()
}
