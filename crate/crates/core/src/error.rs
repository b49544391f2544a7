use thiserror::Error;

/// Errors raised by the statistical, analytic and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    /// A queue whose arrival rate meets or exceeds its service capacity.
    #[error("unstable queue: arrival rate {lambda} >= service capacity {capacity}")]
    Unstable { lambda: f64, capacity: f64 },

    /// The split-merge system saturates (λ·E[S] ≥ 1) so the upper bound does
    /// not exist, even though the fork-join system itself may be stable.
    #[error("split-merge system unstable: lambda * E[S] = {load} >= 1")]
    SplitMergeUnstable { load: f64 },

    /// Some stage rate (n - j)·μ′ of the lower-bound stage decomposition is ≤ λ.
    #[error("lower bound undefined: stage rate {stage_rate} <= lambda {lambda}")]
    InvalidRegime { stage_rate: f64, lambda: f64 },

    #[error("simulation config is for the {found} model, expected {expected}")]
    WrongModel {
        expected: &'static str,
        found: &'static str,
    },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
}

impl ModelError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        ModelError::InvalidParam {
            name,
            reason: reason.into(),
        }
    }
}
