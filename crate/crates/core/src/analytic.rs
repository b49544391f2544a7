//! Closed-form response times.
//!
//! Fountain model: `T = wait_scale·(H_n - H_{n-k}) + delivery/k`, exact.
//!
//! Fork-join model: no closed form is known for `1 < k`. The upper bound
//! comes from the split-merge system (an M/G/1 queue whose service time is
//! the k-th order statistic of the n task times, evaluated with the
//! Pollaczek-Khinchin formula). The lower bound sums the mean response of
//! k M/M/1 stages with rates `(n - j)·μ′`, `j = 0..k-1`.

use crate::error::ModelError;
use crate::stat::{exp_orderstat_moments, harmonic, harmonic_rho};

/// Parameters of an (n, k) multiple-fountain system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FountainParams {
    n: usize,
    k: usize,
    wait_scale: f64,
    delivery: f64,
}

impl FountainParams {
    /// `wait_scale` is the mean availability delay `1/μ`; `delivery` is the
    /// time `D` to deliver the full content from one server.
    pub fn new(n: usize, k: usize, wait_scale: f64, delivery: f64) -> Result<Self, ModelError> {
        check_nk(n, k)?;
        check_nonneg("wait_scale", wait_scale)?;
        check_nonneg("delivery", delivery)?;
        Ok(FountainParams {
            n,
            k,
            wait_scale,
            delivery,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn wait_scale(&self) -> f64 {
        self.wait_scale
    }

    pub fn delivery(&self) -> f64 {
        self.delivery
    }
}

/// Parameters of an (n, k) fork-join system.
///
/// `mu` is the read rate for one unit of content. Each disk holds 1/k of the
/// content, so one task is served at rate `mu_prime = k·mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    n: usize,
    k: usize,
    lambda: f64,
    mu: f64,
}

impl SystemParams {
    /// Validates ranges only. Stability (`rho < 1`) is reported by
    /// [`SystemParams::is_stable`] so that bounds can still be evaluated and
    /// flagged outside the stable region.
    pub fn new(n: usize, k: usize, lambda: f64, mu: f64) -> Result<Self, ModelError> {
        check_nk(n, k)?;
        check_nonneg("lambda", lambda)?;
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(ModelError::param(
                "mu",
                format!("must be positive and finite, got {mu}"),
            ));
        }
        Ok(SystemParams { n, k, lambda, mu })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Per-task service rate `k·mu`.
    pub fn mu_prime(&self) -> f64 {
        self.k as f64 * self.mu
    }

    /// Load factor `lambda / mu_prime`.
    pub fn rho(&self) -> f64 {
        self.lambda / self.mu_prime()
    }

    pub fn is_stable(&self) -> bool {
        self.mu_prime() > self.lambda
    }

    pub fn ensure_stable(&self) -> Result<(), ModelError> {
        if self.is_stable() {
            Ok(())
        } else {
            Err(ModelError::Unstable {
                lambda: self.lambda,
                capacity: self.mu_prime(),
            })
        }
    }
}

/// First two moments of a service time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceMoments {
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
}

impl ServiceMoments {
    pub fn from_mean_variance(mean: f64, variance: f64) -> Result<Self, ModelError> {
        check_nonneg("mean", mean)?;
        check_nonneg("variance", variance)?;
        Ok(ServiceMoments {
            mean,
            variance,
            second_moment: variance + mean * mean,
        })
    }

    /// Moments of `Exp(rate)`.
    pub fn exponential(rate: f64) -> Result<Self, ModelError> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(ModelError::param(
                "rate",
                format!("must be positive and finite, got {rate}"),
            ));
        }
        Self::from_mean_variance(1.0 / rate, 1.0 / (rate * rate))
    }

    pub fn deterministic(value: f64) -> Result<Self, ModelError> {
        Self::from_mean_variance(value, 0.0)
    }
}

/// Lower and upper bounds on the fork-join mean response time. `None` marks a
/// bound that does not exist for the given parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPair {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl BoundPair {
    pub fn lower_valid(&self) -> bool {
        self.lower.is_some()
    }

    pub fn upper_valid(&self) -> bool {
        self.upper.is_some()
    }

    /// Relative gap `(upper - lower) / lower` when both bounds exist.
    pub fn relative_gap(&self) -> Option<f64> {
        match (self.lower, self.upper) {
            (Some(lo), Some(hi)) => Some((hi - lo) / lo),
            _ => None,
        }
    }
}

/// Service-time description for the general-distribution upper bound.
///
/// `c_nk` bounds the variance of the k-th order statistic as
/// `V[S] <= c_nk·sigma²`. It depends only on (n, k) and must be supplied by
/// the caller; no default table is built in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralServiceParams {
    pub mean_service: f64,
    pub sigma: f64,
    pub c_nk: f64,
}

impl GeneralServiceParams {
    pub fn new(mean_service: f64, sigma: f64, c_nk: f64) -> Result<Self, ModelError> {
        check_nonneg("mean_service", mean_service)?;
        check_nonneg("sigma", sigma)?;
        if !(c_nk > 0.0 && c_nk.is_finite()) {
            return Err(ModelError::param("c_nk", format!("must be positive, got {c_nk}")));
        }
        Ok(GeneralServiceParams {
            mean_service,
            sigma,
            c_nk,
        })
    }
}

fn check_nk(n: usize, k: usize) -> Result<(), ModelError> {
    if n < 1 {
        return Err(ModelError::param("n", "must be at least 1"));
    }
    if k < 1 || k > n {
        return Err(ModelError::param(
            "k",
            format!("must satisfy 1 <= k <= n = {n}, got {k}"),
        ));
    }
    Ok(())
}

fn check_nonneg(name: &'static str, v: f64) -> Result<(), ModelError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ModelError::param(
            name,
            format!("must be nonnegative and finite, got {v}"),
        ))
    }
}

/// Mean download time of the (n, k) multiple fountain.
pub fn fountain_mean_response(p: &FountainParams) -> f64 {
    let waiting = if p.wait_scale == 0.0 {
        0.0
    } else {
        // rate = 1 / wait_scale, so mean = wait_scale · (H_n - H_{n-k}).
        p.wait_scale * exp_orderstat_moments(p.n, p.k, 1.0).map(|m| m.mean).unwrap_or(0.0)
    };
    waiting + p.delivery / p.k as f64
}

/// Variance of the fountain download time, `wait_scale²·(H_{n²} - H_{(n-k)²})`.
pub fn fountain_response_variance(p: &FountainParams) -> f64 {
    let v = exp_orderstat_moments(p.n, p.k, 1.0).map(|m| m.variance).unwrap_or(0.0);
    p.wait_scale * p.wait_scale * v
}

/// Approximate minimizer of the fountain mean over k, from the log
/// approximation of the harmonic numbers:
/// `ceil((-Dμ + sqrt(D²μ² + 4nDμ)) / 2)` with `μ = 1/wait_scale`,
/// clamped to `[1, n]`.
pub fn fountain_optimal_k(n: usize, wait_scale: f64, delivery: f64) -> Result<usize, ModelError> {
    if n < 1 {
        return Err(ModelError::param("n", "must be at least 1"));
    }
    check_nonneg("wait_scale", wait_scale)?;
    check_nonneg("delivery", delivery)?;
    if wait_scale == 0.0 {
        return Ok(n);
    }
    if delivery == 0.0 {
        return Ok(1);
    }
    let d_mu = delivery / wait_scale;
    let root = (-d_mu + (d_mu * d_mu + 4.0 * n as f64 * d_mu).sqrt()) / 2.0;
    let k = root.ceil();
    Ok(if k < 1.0 {
        1
    } else if k >= n as f64 {
        n
    } else {
        k as usize
    })
}

/// Exact minimizer of the fountain mean over `k in 1..=n`; ties go to the
/// smaller k.
pub fn fountain_exact_argmin(n: usize, wait_scale: f64, delivery: f64) -> Result<usize, ModelError> {
    if n < 1 {
        return Err(ModelError::param("n", "must be at least 1"));
    }
    let mut best = (1, f64::INFINITY);
    for k in 1..=n {
        let t = fountain_mean_response(&FountainParams::new(n, k, wait_scale, delivery)?);
        if t < best.1 {
            best = (k, t);
        }
    }
    Ok(best.0)
}

/// Mean response of an M/M/1 queue, `1/(service_rate - lambda)`.
pub fn mm1_mean_response(lambda: f64, service_rate: f64) -> Result<f64, ModelError> {
    check_nonneg("lambda", lambda)?;
    if !(service_rate > lambda) {
        return Err(ModelError::Unstable {
            lambda,
            capacity: service_rate,
        });
    }
    Ok(1.0 / (service_rate - lambda))
}

/// Pollaczek-Khinchin mean response of an M/G/1 queue:
/// `E[S] + λ·E[S²] / (2(1 - λ·E[S]))`.
pub fn pk_mean_response(lambda: f64, s: &ServiceMoments) -> Result<f64, ModelError> {
    check_nonneg("lambda", lambda)?;
    let load = lambda * s.mean;
    if !(load < 1.0) {
        return Err(ModelError::Unstable {
            lambda,
            capacity: 1.0 / s.mean,
        });
    }
    Ok(s.mean + lambda * s.second_moment / (2.0 * (1.0 - load)))
}

/// Lower bound from the k-stage decomposition,
/// `(1/μ′)[H_n - H_{n-k} + ρ(H_{n(n-ρ)} - H_{(n-k)(n-k-ρ)})]`.
pub fn fj_lower_bound(p: &SystemParams) -> Result<f64, ModelError> {
    let mu_prime = p.mu_prime();
    // The slowest stage is j = k-1 with rate (n-k+1)·μ′.
    let slowest = (p.n - p.k + 1) as f64 * mu_prime;
    if !(slowest > p.lambda) {
        return Err(ModelError::InvalidRegime {
            stage_rate: slowest,
            lambda: p.lambda,
        });
    }
    let rho = p.rho();
    let coarse = harmonic(p.n) - harmonic(p.n - p.k);
    if rho < 1.0 {
        let shifted = harmonic_rho(p.n, rho)? - harmonic_rho(p.n - p.k, rho)?;
        Ok((coarse + rho * shifted) / mu_prime)
    } else {
        // The closed form needs j - ρ > 0 for every j in 1..=n; fall back to
        // the stage sum, which only needs the stage rates above λ.
        Ok(fj_lower_bound_stage_sum(p))
    }
}

/// `Σ_{j=0..k-1} 1/((n-j)·μ′ - λ)`, the stage-sum form of the lower bound.
/// Assumes every stage rate exceeds λ.
pub fn fj_lower_bound_stage_sum(p: &SystemParams) -> f64 {
    let mu_prime = p.mu_prime();
    (0..p.k)
        .rev()
        .map(|j| 1.0 / ((p.n - j) as f64 * mu_prime - p.lambda))
        .sum()
}

/// Moments of the split-merge service time: the k-th order statistic of n
/// `Exp(μ′)` task times.
pub fn split_merge_service(p: &SystemParams) -> ServiceMoments {
    let m = exp_orderstat_moments(p.n, p.k, p.mu_prime()).expect("SystemParams already validated");
    ServiceMoments {
        mean: m.mean,
        variance: m.variance,
        second_moment: m.second_moment(),
    }
}

/// Split-merge upper bound,
/// `E[S] + λE[S²] / (2(1 - λE[S]))` with exponential order-statistic moments.
pub fn fj_upper_bound(p: &SystemParams) -> Result<f64, ModelError> {
    let s = split_merge_service(p);
    let load = p.lambda * s.mean;
    if !(load < 1.0) {
        return Err(ModelError::SplitMergeUnstable { load });
    }
    pk_mean_response(p.lambda, &s)
}

/// Split-merge upper bound for a general task-time distribution with mean
/// `g.mean_service` and standard deviation `g.sigma`, using
/// `E[S] <= mean + sigma·sqrt((k-1)/(n-k+1))` and `V[S] <= c_nk·sigma²`.
pub fn fj_upper_bound_general(p: &SystemParams, g: &GeneralServiceParams) -> Result<f64, ModelError> {
    if !(g.c_nk > 0.0) {
        return Err(ModelError::param("c_nk", format!("must be positive, got {}", g.c_nk)));
    }
    let spread = ((p.k - 1) as f64 / (p.n - p.k + 1) as f64).sqrt();
    let mean_bound = g.mean_service + g.sigma * spread;
    let var_bound = g.c_nk * g.sigma * g.sigma;
    let load = p.lambda * mean_bound;
    if !(load < 1.0) {
        return Err(ModelError::SplitMergeUnstable { load });
    }
    pk_mean_response(p.lambda, &ServiceMoments::from_mean_variance(mean_bound, var_bound)?)
}

/// Both fork-join bounds, with missing bounds recorded as `None`.
pub fn fj_bounds(p: &SystemParams) -> BoundPair {
    BoundPair {
        lower: fj_lower_bound(p).ok(),
        upper: fj_upper_bound(p).ok(),
    }
}
