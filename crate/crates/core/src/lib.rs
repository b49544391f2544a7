//! Latency models for content stored with an (n, k) erasure code.
//!
//! Two access models are covered. In the *multiple fountain* model a request
//! completes once any k of n servers have made their block available and
//! delivered it. In the *fork-join* model every request forks one task to each
//! of n FCFS disk queues and departs when any k tasks finish.
//!
//! - [`stat`]: harmonic numbers, exponential order statistics, seeded RNG streams.
//! - [`analytic`]: closed-form fountain response time and fork-join bounds.
//! - [`sim`]: discrete-event fork-join simulation and fountain Monte Carlo.
//! - [`codec`]: a systematic Cauchy MDS code over GF(2^8) with a shard file format.

// `!(x > y)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod codec;
pub mod error;
pub mod sim;
pub mod stat;

pub use error::ModelError;
