//! Multi-threaded sampling.
//!
//! Work is split into the same fixed blocks the serial estimators use, and
//! block results are collected in block order, so any thread count gives the
//! same report as a serial run. Only `elapsed` differs.

use std::time::Instant;

use rayon::prelude::*;
use tvbn_core::estimator::{
    EstimateParams, EstimateReport, EstimatorError, PrefixCache, TvEstimator, UniformEstimator,
    UniformPhase,
};
use tvbn_core::inference::QueryCount;
use tvbn_core::model::BayesNet;
use tvbn_core::Scalar;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error("cannot start thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Runs `f` on a pool of `threads` workers, or on rayon's global pool.
fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, RunError> {
    match threads {
        None => Ok(f()),
        Some(t) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()?
            .install(f)),
    }
}

/// Samples and reduces every block of a planned run.
pub fn estimate_tv_parallel<S: Scalar>(
    p: &BayesNet<S>,
    q: &BayesNet<S>,
    params: &EstimateParams,
    threads: Option<usize>,
) -> Result<EstimateReport, RunError> {
    let start = Instant::now();
    let est = TvEstimator::new(p, q)?;
    let plan = est.plan(params)?;
    let blocks: Result<Vec<(f64, QueryCount)>, EstimatorError> = with_pool(threads, || {
        (0..plan.block_count())
            .into_par_iter()
            .map_init(PrefixCache::new, |cache, block| {
                let mut count = QueryCount::default();
                let cache = params.memoize.then_some(cache);
                let sum = est.block_sum(&plan, params, block, &mut count, cache)?;
                Ok((sum, count))
            })
            .collect()
    })?;
    let blocks = blocks?;
    let sums: Vec<f64> = blocks.iter().map(|b| b.0).collect();
    let mut queries = QueryCount::default();
    for (_, c) in &blocks {
        queries.merge(*c);
    }
    let mut report = est.finish(&plan, &sums, queries, params);
    report.elapsed = start.elapsed();
    Ok(report)
}

/// Parallel version of the two-phase uniform estimator.
pub fn estimate_tv_uniform_parallel(
    p: &BayesNet<f64>,
    params: &EstimateParams,
    threads: Option<usize>,
) -> Result<EstimateReport, RunError> {
    let start = Instant::now();
    let est = UniformEstimator::new(p, params)?;
    let seed = params.seed;
    let mut report = with_pool(threads, || {
        let plan = est.plan();
        let sums: Vec<f64> = (0..UniformEstimator::block_count(plan.m_additive))
            .into_par_iter()
            .map(|b| est.additive_block_sum(seed, b))
            .collect();
        let additive = est.additive_estimate(&sums);
        match plan.phase_for(additive) {
            UniformPhase::Additive => est.report(additive, None, seed),
            UniformPhase::Ratio => {
                let sums: Vec<f64> = (0..UniformEstimator::block_count(plan.m_ratio))
                    .into_par_iter()
                    .map(|b| est.ratio_block_sum(seed, b))
                    .collect();
                est.report(additive, Some(&sums), seed)
            }
        }
    })?;
    report.elapsed = start.elapsed();
    Ok(report)
}
