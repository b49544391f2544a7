//! Harmonic numbers, exponential order statistics and seeded random streams.
//!
//! The k-th smallest of n i.i.d. `Exp(rate)` variables has
//!
//! ```text
//! E[X_{k,n}] = (H_n - H_{n-k}) / rate
//! V[X_{k,n}] = (H_{n^2} - H_{(n-k)^2}) / rate^2
//! ```
//!
//! where `H_n = Σ 1/j` and `H_{n^2} = Σ 1/j²` over `j = 1..=n`.

use std::sync::RwLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::error::ModelError;

/// Prefix sums above this index are computed on demand instead of cached.
const CACHE_LIMIT: usize = 1 << 22;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    fn value(self) -> f64 {
        self.sum + self.comp
    }
}

struct PrefixTable {
    values: Vec<f64>,
    state: CompensatedSum,
}

impl PrefixTable {
    const fn new() -> Self {
        PrefixTable {
            values: Vec::new(),
            state: CompensatedSum { sum: 0.0, comp: 0.0 },
        }
    }

    fn extend_to(&mut self, n: usize, term: fn(usize) -> f64) {
        if self.values.is_empty() {
            self.values.push(0.0);
        }
        while self.values.len() <= n {
            let j = self.values.len();
            self.state.add(term(j));
            self.values.push(self.state.value());
        }
    }
}

static PLAIN: RwLock<PrefixTable> = RwLock::new(PrefixTable::new());
static SQUARED: RwLock<PrefixTable> = RwLock::new(PrefixTable::new());

fn inv(j: usize) -> f64 {
    1.0 / j as f64
}

fn inv_sq(j: usize) -> f64 {
    let j = j as f64;
    1.0 / (j * j)
}

fn cached_prefix(table: &RwLock<PrefixTable>, n: usize, term: fn(usize) -> f64) -> f64 {
    if n > CACHE_LIMIT {
        return (1..=n)
            .rev()
            .fold(CompensatedSum::default(), |mut acc, j| {
                acc.add(term(j));
                acc
            })
            .value();
    }
    {
        let guard = table.read().unwrap_or_else(|e| e.into_inner());
        if let Some(&v) = guard.values.get(n) {
            return v;
        }
    }
    let mut guard = table.write().unwrap_or_else(|e| e.into_inner());
    guard.extend_to(n, term);
    guard.values[n]
}

/// `H_n = Σ_{j=1..n} 1/j`, with `H_0 = 0`.
pub fn harmonic(n: usize) -> f64 {
    cached_prefix(&PLAIN, n, inv)
}

/// `H_{n^2} = Σ_{j=1..n} 1/j²`, with `H_{0^2} = 0`.
pub fn harmonic_sq(n: usize) -> f64 {
    cached_prefix(&SQUARED, n, inv_sq)
}

/// `Σ_{j=1..n} 1/(j(j - rho))`, the shifted harmonic sum of the fork-join
/// lower bound. Requires `0 <= rho < 1`.
pub fn harmonic_rho(n: usize, rho: f64) -> Result<f64, ModelError> {
    if !(0.0..1.0).contains(&rho) {
        return Err(ModelError::param("rho", format!("must lie in [0, 1), got {rho}")));
    }
    let mut acc = CompensatedSum::default();
    for j in (1..=n).rev() {
        let j = j as f64;
        acc.add(1.0 / (j * (j - rho)));
    }
    Ok(acc.value())
}

/// Mean and variance of the k-th smallest of n i.i.d. exponentials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderStatMoments {
    pub n: usize,
    pub k: usize,
    pub rate: f64,
    pub mean: f64,
    pub variance: f64,
}

impl OrderStatMoments {
    pub fn second_moment(&self) -> f64 {
        self.variance + self.mean * self.mean
    }
}

fn check_order(n: usize, k: usize, rate: f64) -> Result<(), ModelError> {
    if k < 1 || k > n {
        return Err(ModelError::param(
            "k",
            format!("must satisfy 1 <= k <= n = {n}, got {k}"),
        ));
    }
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(ModelError::param(
            "rate",
            format!("must be positive and finite, got {rate}"),
        ));
    }
    Ok(())
}

/// Moments of `X_{k,n}` for `Exp(rate)` samples.
///
/// The harmonic differences are evaluated as the tail sums
/// `Σ_{i=n-k+1..n} 1/i` (and squares) so small k at large n does not cancel.
pub fn exp_orderstat_moments(n: usize, k: usize, rate: f64) -> Result<OrderStatMoments, ModelError> {
    check_order(n, k, rate)?;
    let mut tail = CompensatedSum::default();
    let mut tail_sq = CompensatedSum::default();
    for i in (n - k + 1..=n).rev() {
        tail.add(inv(i));
        tail_sq.add(inv_sq(i));
    }
    Ok(OrderStatMoments {
        n,
        k,
        rate,
        mean: tail.value() / rate,
        variance: tail_sq.value() / (rate * rate),
    })
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    statrs::function::factorial::ln_binomial(n as u64, k as u64)
}

/// Exact in f64 for n <= 50 (all such coefficients are below 2^53).
fn binomial_small(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut c = 1u64;
    for i in 0..k {
        c = c * (n - i) as u64 / (i + 1) as u64;
    }
    c as f64
}

/// Density of `X_{k,n}` for `Exp(rate)` samples:
/// `n·C(n-1, k-1)·F(x)^{k-1}·(1-F(x))^{n-k}·f(x)`.
pub fn orderstat_pdf(x: f64, n: usize, k: usize, rate: f64) -> Result<f64, ModelError> {
    check_order(n, k, rate)?;
    if !(x >= 0.0) {
        return Err(ModelError::param("x", format!("must be nonnegative, got {x}")));
    }
    let cdf = -(-rate * x).exp_m1();
    if k > 1 && cdf == 0.0 {
        return Ok(0.0);
    }
    let lower_pow = (k - 1) as f64;
    let upper_pow = (n - k + 1) as f64;
    if n > 50 {
        let ln_density = (n as f64).ln() + ln_binomial(n - 1, k - 1) + if k > 1 { lower_pow * cdf.ln() } else { 0.0 }
            - upper_pow * rate * x
            + rate.ln();
        Ok(ln_density.exp())
    } else {
        Ok(n as f64 * binomial_small(n - 1, k - 1) * cdf.powi(k as i32 - 1) * (-upper_pow * rate * x).exp() * rate)
    }
}

/// `P(X_{k,n} <= x) = Σ_{j=k..n} C(n,j) F^j (1-F)^{n-j}` for `Exp(rate)` samples.
pub fn orderstat_cdf(x: f64, n: usize, k: usize, rate: f64) -> Result<f64, ModelError> {
    check_order(n, k, rate)?;
    if !(x >= 0.0) {
        return Err(ModelError::param("x", format!("must be nonnegative, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let ln_f = (-(-rate * x).exp_m1()).ln();
    let ln_survival = -rate * x;
    let mut acc = CompensatedSum::default();
    for j in (k..=n).rev() {
        let ln_term = ln_binomial(n, j) + j as f64 * ln_f + (n - j) as f64 * ln_survival;
        acc.add(ln_term.exp());
    }
    Ok(acc.value().min(1.0))
}

/// A reproducible random stream identified by `(seed, stream_id)`.
///
/// Backed by ChaCha8 with the stream id mapped onto the cipher's stream
/// counter, so replication `i` can be regenerated without drawing streams
/// `0..i` first.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh stream with the same seed and a different id.
    pub fn fork(&self, stream_id: u64) -> Self {
        RngStream::new(self.seed, stream_id)
    }

    /// Uniform draw in `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }

    /// Exponential draw with mean `1/rate`. The caller guarantees `rate > 0`.
    #[inline]
    pub(crate) fn exp_unchecked(&mut self, rate: f64) -> f64 {
        debug_assert!(rate > 0.0);
        let e: f64 = self.rng.sample(Exp1);
        e / rate
    }
}

/// Draws one `Exp(rate)` variate from `stream`.
pub fn sample_exponential(stream: &mut RngStream, rate: f64) -> Result<f64, ModelError> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(ModelError::param(
            "rate",
            format!("must be positive and finite, got {rate}"),
        ));
    }
    Ok(stream.exp_unchecked(rate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn direct_sum(n: usize, term: impl Fn(f64) -> f64) -> f64 {
        (1..=n).map(|j| term(j as f64)).sum()
    }

    /// Adaptive Simpson quadrature, test-only oracle.
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        fn rule(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
            let m = 0.5 * (a + b);
            (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
        }
        fn recurse(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let left = rule(f, a, m);
            let right = rule(f, m, b);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            recurse(f, a, m, left, tol / 2.0, depth - 1) + recurse(f, m, b, right, tol / 2.0, depth - 1)
        }
        // Pre-split so narrow peaks are not missed by the first estimate.
        let pieces = 64;
        let w = (b - a) / pieces as f64;
        (0..pieces)
            .map(|i| {
                let (lo, hi) = (a + i as f64 * w, a + (i + 1) as f64 * w);
                recurse(f, lo, hi, rule(f, lo, hi), tol / pieces as f64, depth)
            })
            .sum()
    }

    #[test]
    fn harmonic_examples() {
        assert_eq!(harmonic(0), 0.0);
        assert_eq!(harmonic(1), 1.0);
        assert!((harmonic(10) - 2.928_968_253_968_254).abs() < 1e-15);
        assert!((harmonic(10) - direct_sum(10, |j| 1.0 / j)).abs() < 1e-14);
    }

    #[test]
    fn harmonic_sq_examples() {
        assert_eq!(harmonic_sq(0), 0.0);
        assert_eq!(harmonic_sq(2), 1.25);
        assert!((harmonic_sq(10) - 1.549_767_731_166_540_8).abs() < 1e-15);
    }

    #[test]
    fn harmonic_sq_stays_below_basel_limit() {
        let basel = std::f64::consts::PI.powi(2) / 6.0;
        let mut prev = 0.0;
        for n in [1, 2, 10, 1000, 100_000] {
            let h = harmonic_sq(n);
            assert!(h < basel && h > prev);
            prev = h;
        }
    }

    #[test]
    fn harmonic_large_n_accuracy() {
        // H_n = ln n + γ + 1/(2n) - 1/(12n²) + 1/(120n⁴) - ...
        let n = 1_000_000usize;
        let nf = n as f64;
        let gamma = 0.577_215_664_901_532_9;
        let asymptotic = nf.ln() + gamma + 1.0 / (2.0 * nf) - 1.0 / (12.0 * nf * nf);
        assert!((harmonic(n) - asymptotic).abs() < 1e-12);
    }

    #[test]
    fn harmonic_rho_examples() {
        assert_eq!(harmonic_rho(0, 0.5).unwrap(), 0.0);
        assert!((harmonic_rho(10, 0.0).unwrap() - harmonic_sq(10)).abs() < 1e-15);
        // Recomputed by exact rational summation.
        assert!((harmonic_rho(10, 1.0 / 15.0).unwrap() - 1.634_740_998_099_633).abs() < 1e-14);
    }

    #[test]
    fn harmonic_rho_rejects_rho_at_or_above_one() {
        assert!(harmonic_rho(3, 1.0).is_err());
        assert!(harmonic_rho(3, 1.5).is_err());
        assert!(harmonic_rho(3, -0.1).is_err());
        assert!(harmonic_rho(3, f64::NAN).is_err());
    }

    #[test]
    fn moments_examples() {
        let m = exp_orderstat_moments(1, 1, 1.0).unwrap();
        assert_eq!((m.mean, m.variance), (1.0, 1.0));
        assert_eq!(exp_orderstat_moments(2, 1, 1.0).unwrap().mean, 0.5);
        let m = exp_orderstat_moments(10, 5, 1.0).unwrap();
        assert!((m.mean - 0.645_634_920_634_920_7).abs() < 1e-15);
        assert!((m.variance - 0.086_156_620_055_429_58).abs() < 1e-15);
    }

    #[test]
    fn moments_reject_bad_input() {
        assert!(exp_orderstat_moments(5, 0, 1.0).is_err());
        assert!(exp_orderstat_moments(5, 6, 1.0).is_err());
        assert!(exp_orderstat_moments(5, 2, 0.0).is_err());
        assert!(exp_orderstat_moments(5, 2, -1.0).is_err());
    }

    #[test]
    fn pdf_examples() {
        assert_eq!(orderstat_pdf(0.0, 3, 1, 1.0).unwrap(), 3.0);
        assert_eq!(orderstat_pdf(0.0, 3, 2, 1.0).unwrap(), 0.0);
        assert!(orderstat_pdf(-0.1, 3, 2, 1.0).is_err());
    }

    #[test]
    fn pdf_integrates_to_one() {
        let f = |x: f64| orderstat_pdf(x, 10, 5, 2.0).unwrap();
        // Mass beyond x = 20 is below e^{-120}.
        let total = simpson(&f, 0.0, 20.0, 1e-10, 40);
        assert!((total - 1.0).abs() < 1e-6, "integral {total}");
    }

    #[test]
    fn pdf_log_space_branch_integrates_to_one() {
        let f = |x: f64| orderstat_pdf(x, 80, 40, 1.0).unwrap();
        let total = simpson(&f, 0.0, 10.0, 1e-10, 40);
        assert!((total - 1.0).abs() < 1e-6, "integral {total}");
        // Continuity across the n = 50 switch.
        let direct = 51.0
            * ((1..=25).map(|i| ((50 - 25 + i) as f64 / i as f64).ln()).sum::<f64>()).exp()
            * (-(-0.3f64).exp_m1()).powi(25)
            * (-0.3f64 * 26.0).exp();
        let via_log = orderstat_pdf(0.3, 51, 26, 1.0).unwrap();
        assert!((direct - via_log).abs() / direct < 1e-10);
    }

    #[test]
    fn pdf_matches_finite_difference_of_cdf() {
        let (n, k, rate) = (10, 5, 2.0);
        let h = 1e-5;
        for i in 1..=20 {
            let x = 0.1 * i as f64;
            let fd =
                (orderstat_cdf(x + h, n, k, rate).unwrap() - orderstat_cdf(x - h, n, k, rate).unwrap()) / (2.0 * h);
            let pdf = orderstat_pdf(x, n, k, rate).unwrap();
            assert!((fd - pdf).abs() < 1e-6, "x={x}: fd {fd} vs pdf {pdf}");
        }
    }

    #[test]
    fn sample_mean_within_one_percent() {
        let mut s = RngStream::new(7, 0);
        let n = 1_000_000;
        let mean = (0..n).map(|_| sample_exponential(&mut s, 2.0).unwrap()).sum::<f64>() / n as f64;
        assert!((0.495..=0.505).contains(&mean), "mean {mean}");
    }

    #[test]
    fn sample_rejects_nonpositive_rate() {
        let mut s = RngStream::new(1, 0);
        assert!(sample_exponential(&mut s, 0.0).is_err());
        assert!(sample_exponential(&mut s, -3.0).is_err());
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let draw = |seed, id| {
            let mut s = RngStream::new(seed, id);
            (0..64).map(|_| s.uniform().to_bits()).collect::<Vec<_>>()
        };
        assert_eq!(draw(42, 3), draw(42, 3));
        assert_ne!(draw(42, 3), draw(42, 4));
        assert_ne!(draw(42, 3), draw(43, 3));
        assert_eq!(RngStream::new(42, 0).fork(3).stream_id(), 3);
    }

    #[test]
    fn empirical_order_statistic_matches_moments() {
        let (n, k, rate) = (10, 5, 1.5);
        let reps = 100_000;
        let mut s = RngStream::new(11, 0);
        let mut buf = vec![0.0; n];
        let draws: Vec<f64> = (0..reps)
            .map(|_| {
                for x in buf.iter_mut() {
                    *x = sample_exponential(&mut s, rate).unwrap();
                }
                buf.sort_by(f64::total_cmp);
                buf[k - 1]
            })
            .collect();
        let mean = draws.iter().sum::<f64>() / reps as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        let se = (var / reps as f64).sqrt();
        let m = exp_orderstat_moments(n, k, rate).unwrap();
        assert!((mean - m.mean).abs() < 3.0 * se, "mean {mean} vs {}", m.mean);
    }

    proptest! {
        #[test]
        fn harmonic_step_is_reciprocal(n in 2usize..5000) {
            prop_assert!((harmonic(n) - harmonic(n - 1) - 1.0 / n as f64).abs() < 1e-14);
        }

        #[test]
        fn full_order_statistic_mean_is_harmonic(n in 1usize..200, rate in 0.01f64..100.0) {
            let m = exp_orderstat_moments(n, n, rate).unwrap();
            prop_assert!((m.mean - harmonic(n) / rate).abs() <= 1e-12 * m.mean);
        }

        #[test]
        fn moments_monotone(n in 2usize..100, rate in 0.1f64..10.0, k_frac in 0.0f64..1.0) {
            let k = 1 + ((n - 1) as f64 * k_frac) as usize;
            if k < n {
                let a = exp_orderstat_moments(n, k, rate).unwrap();
                let b = exp_orderstat_moments(n, k + 1, rate).unwrap();
                prop_assert!(b.mean > a.mean);
            }
            let a = exp_orderstat_moments(n, k, rate).unwrap();
            let c = exp_orderstat_moments(n + 1, k, rate).unwrap();
            prop_assert!(c.mean < a.mean);
            prop_assert!(a.mean > 0.0 && a.variance > 0.0);
        }
    }
}
