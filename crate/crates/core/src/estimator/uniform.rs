//! Two-phase estimator of `d_TV(P, 𝕌)`.
//!
//! Phase A samples `x ~ P` and averages `max(0, 1 − 1/(P(x)ℓⁿ))`, an unbiased
//! `[0, 1]`-valued estimate of the distance with additive error at most
//! `a = ε/(32ℓ^{d+1})`. If that estimate clears the threshold
//! `1/(16ℓ^{d+1}) − a` it is returned. Otherwise the distance is at most
//! `1/(16ℓ^{d+1})`, every value `max(0, P(x)ℓⁿ − 1)` with `x ~ 𝕌` is at most
//! `16·d_TV·ℓ^{d+1}·n`, and Phase B averages those values instead.

use alloc::vec::Vec;

use rand::RngCore;

use super::{EstimateParams, EstimateReport, EstimatorError, UniformPhase};
use crate::model::{moralize, BayesNet};
use crate::rng::{self, ADDITIVE_PHASE, RATIO_PHASE};
use crate::scalar::pairwise_sum;
use crate::treedecomp::decompose;

/// Samples per random stream in the uniform estimator.
pub const UNIFORM_BLOCK: u64 = 4096;

/// Sample counts and thresholds fixed before sampling.
#[derive(Clone, Debug, PartialEq)]
pub struct UniformPlan {
    /// Maximum in-degree of the DAG.
    pub d: usize,
    /// `ℓ^{d+1}`.
    pub locality: f64,
    /// Additive accuracy of Phase A.
    pub additive_error: f64,
    /// Phase A estimates above this are returned directly.
    pub threshold: f64,
    pub m_additive: u64,
    pub m_ratio: u64,
}

impl UniformPlan {
    pub fn new(p: &BayesNet<f64>, params: &EstimateParams) -> Result<Self, EstimatorError> {
        params.validate()?;
        let n = p.len() as f64;
        let d = p.dag().max_in_degree();
        let locality = libm::pow(p.alphabet() as f64, (d + 1) as f64);
        let eps_a = params.eps.min(0.5);
        let additive_error = eps_a / (32.0 * locality);
        let threshold = 1.0 / (16.0 * locality) - additive_error;
        let log_term = libm::log(4.0 / params.delta);
        let base = 512.0 * locality * locality * log_term;
        let m_additive = params
            .m_override
            .unwrap_or_else(|| libm::ceil(base / (eps_a * eps_a)) as u64);
        let m_ratio = params
            .m_override
            .unwrap_or_else(|| libm::ceil(base * n * n / (params.eps * params.eps)) as u64);
        Ok(UniformPlan {
            d,
            locality,
            additive_error,
            threshold,
            m_additive,
            m_ratio,
        })
    }

    pub fn phase_for(&self, additive_estimate: f64) -> UniformPhase {
        if additive_estimate > self.threshold {
            UniformPhase::Additive
        } else {
            UniformPhase::Ratio
        }
    }
}

/// `max(0, 1 − 1/(P(x)ℓⁿ))`, the Phase A value of an assignment drawn from `P`.
pub fn additive_sample_value(p: &BayesNet<f64>, x: &[usize]) -> Result<f64, EstimatorError> {
    p.check_assignment(x)?;
    let scaled = scaled_mass(p, x);
    if scaled <= 0.0 {
        return Err(EstimatorError::ContractViolation(alloc::format!(
            "P({x:?}) = 0 cannot be drawn from P"
        )));
    }
    Ok((1.0 - 1.0 / scaled).max(0.0))
}

/// `max(0, P(x)ℓⁿ − 1)`, the Phase B value of a uniform assignment.
pub fn ratio_sample_value(p: &BayesNet<f64>, x: &[usize]) -> Result<f64, EstimatorError> {
    p.check_assignment(x)?;
    Ok((scaled_mass(p, x) - 1.0).max(0.0))
}

fn scaled_mass(p: &BayesNet<f64>, x: &[usize]) -> f64 {
    let l = p.alphabet() as f64;
    (0..p.len()).map(|i| l * p.local_term(i, x)).product()
}

/// Draws `x ~ P` in topological order and returns `P(x)ℓⁿ`.
fn sample_from<R: RngCore>(p: &BayesNet<f64>, rng: &mut R, x: &mut [usize]) -> f64 {
    let l = p.alphabet();
    let mut scaled = 1.0;
    for &node in p.dag().topo_order() {
        let row = crate::model::row_index(p.dag().parents(node).iter().map(|&u| x[u]), l);
        let probs = p.cpt(node).row(row);
        let target = rng::unit_f64(rng);
        let mut cumulative = 0.0;
        let mut chosen = None;
        for (b, &pb) in probs.iter().enumerate() {
            cumulative += pb;
            if pb > 0.0 && target < cumulative {
                chosen = Some(b);
                break;
            }
        }
        // rounding can leave the target just past the row sum
        let b = chosen.unwrap_or_else(|| probs.iter().rposition(|&v| v > 0.0).unwrap_or(0));
        x[node] = b;
        scaled *= l as f64 * probs[b];
    }
    scaled
}

/// Estimator of `d_TV(P, 𝕌)` for one float net.
#[derive(Clone, Debug)]
pub struct UniformEstimator {
    p: BayesNet<f64>,
    plan: UniformPlan,
    width: usize,
}

impl UniformEstimator {
    pub fn new(p: &BayesNet<f64>, params: &EstimateParams) -> Result<Self, EstimatorError> {
        let plan = UniformPlan::new(p, params)?;
        let width = decompose(&moralize(p)).width();
        Ok(UniformEstimator {
            p: p.clone(),
            plan,
            width,
        })
    }

    pub fn plan(&self) -> &UniformPlan {
        &self.plan
    }

    pub fn block_count(m: u64) -> u64 {
        m.div_ceil(UNIFORM_BLOCK)
    }

    fn block_len(m: u64, block: u64) -> u64 {
        let start = block * UNIFORM_BLOCK;
        (start + UNIFORM_BLOCK).min(m).saturating_sub(start)
    }

    /// Sum of Phase A values over one block of samples from `P`.
    pub fn additive_block_sum(&self, seed: u64, block: u64) -> f64 {
        let mut rng = rng::stream(seed, ADDITIVE_PHASE | block);
        let mut x = alloc::vec![0; self.p.len()];
        let len = Self::block_len(self.plan.m_additive, block);
        let values: Vec<f64> = (0..len)
            .map(|_| {
                let scaled = sample_from(&self.p, &mut rng, &mut x);
                (1.0 - 1.0 / scaled).max(0.0)
            })
            .collect();
        pairwise_sum(&values)
    }

    /// Sum of Phase B values over one block of uniform assignments.
    pub fn ratio_block_sum(&self, seed: u64, block: u64) -> f64 {
        let mut rng = rng::stream(seed, RATIO_PHASE | block);
        let l = self.p.alphabet() as u64;
        let mut x = alloc::vec![0; self.p.len()];
        let len = Self::block_len(self.plan.m_ratio, block);
        let values: Vec<f64> = (0..len)
            .map(|_| {
                for v in x.iter_mut() {
                    *v = uniform_symbol(&mut rng, l);
                }
                (scaled_mass(&self.p, &x) - 1.0).max(0.0)
            })
            .collect();
        pairwise_sum(&values)
    }

    /// Mean of Phase A from its block sums (in block order).
    pub fn additive_estimate(&self, block_sums: &[f64]) -> f64 {
        mean(block_sums, self.plan.m_additive)
    }

    /// Builds the report. `ratio_sums` is `None` when Phase A was returned.
    pub fn report(
        &self,
        additive_estimate: f64,
        ratio_sums: Option<&[f64]>,
        seed: u64,
    ) -> EstimateReport {
        let (estimate, m, phase) = match ratio_sums {
            None => (
                additive_estimate,
                self.plan.m_additive,
                UniformPhase::Additive,
            ),
            Some(sums) => (
                mean(sums, self.plan.m_ratio),
                self.plan.m_additive + self.plan.m_ratio,
                UniformPhase::Ratio,
            ),
        };
        EstimateReport {
            estimate,
            m,
            z: self.plan.threshold,
            alpha_hat: additive_estimate,
            queries: 0,
            seed,
            elapsed: core::time::Duration::ZERO,
            width: self.width,
            phase: Some(phase),
        }
    }

    /// Runs both phases on the current thread.
    pub fn run(&self, seed: u64) -> EstimateReport {
        let sums: Vec<f64> = (0..Self::block_count(self.plan.m_additive))
            .map(|b| self.additive_block_sum(seed, b))
            .collect();
        let est_a = self.additive_estimate(&sums);
        match self.plan.phase_for(est_a) {
            UniformPhase::Additive => self.report(est_a, None, seed),
            UniformPhase::Ratio => {
                let sums: Vec<f64> = (0..Self::block_count(self.plan.m_ratio))
                    .map(|b| self.ratio_block_sum(seed, b))
                    .collect();
                self.report(est_a, Some(&sums), seed)
            }
        }
    }
}

fn mean(block_sums: &[f64], m: u64) -> f64 {
    if m == 0 {
        0.0
    } else {
        pairwise_sum(block_sums) / m as f64
    }
}

/// Unbiased draw from `[0, l)` by rejection.
fn uniform_symbol<R: RngCore>(rng: &mut R, l: u64) -> usize {
    let zone = u64::MAX - u64::MAX % l;
    loop {
        let v = rng.next_u64();
        if v < zone {
            return (v % l) as usize;
        }
    }
}

/// Estimates `d_TV(P, 𝕌)` within relative error `eps` with probability at
/// least `1 − delta`.
pub fn estimate_tv_uniform(
    p: &BayesNet<f64>,
    params: &EstimateParams,
) -> Result<EstimateReport, EstimatorError> {
    Ok(UniformEstimator::new(p, params)?.run(params.seed))
}
