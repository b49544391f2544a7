//! Monte Carlo for the (n, k) multiple fountain.
//!
//! Each request sees n independent `Exp(1/wait_scale)` availability delays;
//! it completes at the k-th smallest delay plus the block delivery time
//! `delivery / k`. Requests do not interact.

use crate::analytic::FountainParams;
use crate::stat::RngStream;

/// Draws `count` independent fountain response times.
pub fn run_fountain_replication(params: &FountainParams, count: usize, mut rng: RngStream) -> Vec<f64> {
    let (n, k) = (params.n(), params.k());
    let block = params.delivery() / k as f64;
    if params.wait_scale() == 0.0 {
        return vec![block; count];
    }
    let rate = 1.0 / params.wait_scale();
    let mut delays = vec![0.0; n];
    (0..count)
        .map(|_| {
            for d in delays.iter_mut() {
                *d = rng.exp_unchecked(rate);
            }
            let (_, kth, _) = delays.select_nth_unstable_by(k - 1, f64::total_cmp);
            *kth + block
        })
        .collect()
}
