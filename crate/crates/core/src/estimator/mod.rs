//! Randomized estimators of total variation distance.
//!
//! [`TvEstimator`] estimates `d_TV(P, Q)` for two nets over one DAG. It
//! computes the normalizer `Z = Pr[X ≠ Y]` of the coupling net with one
//! inference query, draws `m` assignments from `π(w) = g(w)/Z` symbol by
//! symbol through prefix queries, and returns `Z · mean(f(w))`.
//!
//! [`estimate_tv_uniform`] estimates `d_TV(P, 𝕌)` against the uniform
//! distribution by plain Monte Carlo, with no inference queries at all.

mod terms;
mod tv;
mod uniform;

use alloc::string::String;
use core::time::Duration;

pub use terms::{f_value, g_value, h_term};
pub use tv::{estimate_tv, PrefixCache, SamplePlan, TvEstimator, TV_BLOCK};
pub use uniform::{
    additive_sample_value, estimate_tv_uniform, ratio_sample_value, UniformEstimator, UniformPlan,
    UNIFORM_BLOCK,
};

use crate::coupling::CouplingError;
use crate::inference::InferenceError;
use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EstimatorError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Coupling(#[from] CouplingError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("sampling requires a positive normalizer")]
    ZeroNormalizer,
    #[error("contract violation: {0}")]
    ContractViolation(String),
}

/// Accuracy, confidence, and reproducibility knobs shared by both estimators.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateParams {
    /// Relative accuracy, in `(0, 1)`.
    pub eps: f64,
    /// Failure probability, in `(0, 1)`.
    pub delta: f64,
    pub seed: u64,
    /// Use exactly this many samples instead of the Hoeffding count.
    pub m_override: Option<u64>,
    /// Cache prefix normalizers across samples. Results are identical either
    /// way; only the work done per logical query changes.
    pub memoize: bool,
}

impl EstimateParams {
    pub fn new(eps: f64, delta: f64, seed: u64) -> Result<Self, EstimatorError> {
        let params = EstimateParams {
            eps,
            delta,
            seed,
            m_override: None,
            memoize: false,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_samples(mut self, m: u64) -> Self {
        self.m_override = Some(m);
        self
    }

    pub fn with_memo(mut self, memoize: bool) -> Self {
        self.memoize = memoize;
        self
    }

    pub fn validate(&self) -> Result<(), EstimatorError> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(EstimatorError::InvalidParams(alloc::format!(
                "eps must lie in (0, 1), got {}",
                self.eps
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(EstimatorError::InvalidParams(alloc::format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        Ok(())
    }
}

/// Which branch the uniform-distribution estimator returned from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UniformPhase {
    /// The additive estimate was large enough to be returned directly.
    Additive,
    /// The distance is small; the ratio estimator was run.
    Ratio,
}

/// Outcome of an estimation run.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateReport {
    pub estimate: f64,
    /// Samples used (in uniform mode, summed over both phases).
    pub m: u64,
    /// Normalizer `Z`; in uniform mode, the phase threshold.
    pub z: f64,
    /// Mean of the sampled `f` values, `estimate / z`; in uniform mode, the
    /// additive estimate.
    pub alpha_hat: f64,
    /// Logical inference queries issued.
    pub queries: u64,
    pub seed: u64,
    /// Wall time; zero unless the caller measured it.
    pub elapsed: Duration,
    /// Width of the tree decomposition used for inference (uniform mode:
    /// width of the decomposition of P's moral graph).
    pub width: usize,
    pub phase: Option<UniformPhase>,
}

/// Real-valued Hoeffding sample count `2 n² ε⁻² ln(2/δ)`: the smallest `m`
/// with `2·exp(−m ε² / (2 n²)) ≤ δ`.
pub fn hoeffding_bound(n: usize, eps: f64, delta: f64) -> f64 {
    let n = n as f64;
    2.0 * n * n / (eps * eps) * libm::log(2.0 / delta)
}

/// Number of samples for a net with `n` nodes: the override when set,
/// otherwise `⌈2 n² ε⁻² ln(2/δ)⌉`.
pub fn sample_count(n: usize, params: &EstimateParams) -> u64 {
    params
        .m_override
        .unwrap_or_else(|| libm::ceil(hoeffding_bound(n, params.eps, params.delta)) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_count_closes_hoeffding() {
        let params = EstimateParams::new(0.1, 0.05, 0).unwrap();
        assert_eq!(sample_count(2, &params), 2952);
        let m = sample_count(7, &params) as f64;
        let tail = 2.0 * libm::exp(-m * 0.01 / (2.0 * 49.0));
        assert!(tail <= 0.05);
        let tail_short = 2.0 * libm::exp(-(m - 1.0) * 0.01 / (2.0 * 49.0));
        assert!(tail_short > 0.05 * 0.999);
    }

    #[test]
    fn doubling_n_quadruples_the_bound() {
        let a = hoeffding_bound(3, 0.2, 0.1);
        let b = hoeffding_bound(6, 0.2, 0.1);
        assert!((b / a - 4.0).abs() < 1e-12);
    }

    #[test]
    fn override_is_verbatim() {
        let params = EstimateParams::new(0.1, 0.1, 0).unwrap().with_samples(17);
        assert_eq!(sample_count(100, &params), 17);
    }

    #[test]
    fn params_are_validated() {
        assert!(EstimateParams::new(0.0, 0.1, 0).is_err());
        assert!(EstimateParams::new(1.0, 0.1, 0).is_err());
        assert!(EstimateParams::new(0.1, 1.5, 0).is_err());
        assert!(EstimateParams::new(f64::NAN, 0.1, 0).is_err());
    }
}
