use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::RngCore;

use super::{f_value, sample_count, EstimateParams, EstimateReport, EstimatorError};
use crate::coupling::{build_coupling, CouplingNet};
use crate::inference::{InferenceEngine, QueryCount, QuerySets};
use crate::model::{moralize, BayesNet, ModelError};
use crate::rng;
use crate::scalar::{pairwise_sum, Scalar};
use crate::treedecomp::{decompose, TreeDecomposition};

/// Samples per reduction block. Block sums are combined with a fixed
/// pairwise tree, so any schedule over blocks gives the same estimate.
pub const TV_BLOCK: u64 = 256;

/// Prefix normalizers keyed by the prefix symbols (in topological order).
pub type PrefixCache<S> = BTreeMap<Vec<usize>, S>;

/// Normalizer and sample count fixed before sampling starts.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePlan<S> {
    pub z: S,
    pub m: u64,
    /// Queries spent while planning (the single `Z` query).
    pub queries: QueryCount,
}

impl<S> SamplePlan<S> {
    pub fn block_count(&self) -> u64 {
        self.m.div_ceil(TV_BLOCK)
    }
}

/// Everything needed to estimate `d_TV(P, Q)`: both nets, their coupling
/// net, and an inference engine over it.
#[derive(Clone, Debug)]
pub struct TvEstimator<S> {
    p: BayesNet<S>,
    q: BayesNet<S>,
    coupling: CouplingNet<S>,
    td: TreeDecomposition,
    engine: InferenceEngine<S>,
}

impl<S: Scalar> TvEstimator<S> {
    /// Builds the coupling and decomposes its moral graph with min-fill.
    pub fn new(p: &BayesNet<S>, q: &BayesNet<S>) -> Result<Self, EstimatorError> {
        let coupling = build_coupling(p, q)?;
        let td = decompose(&moralize(coupling.net()));
        Self::with_decomposition(p, q, coupling, td)
    }

    pub fn with_decomposition(
        p: &BayesNet<S>,
        q: &BayesNet<S>,
        coupling: CouplingNet<S>,
        td: TreeDecomposition,
    ) -> Result<Self, EstimatorError> {
        p.check_same_structure(q)?;
        let engine = InferenceEngine::new(coupling.net(), &td)?;
        Ok(TvEstimator {
            p: p.clone(),
            q: q.clone(),
            coupling,
            td,
            engine,
        })
    }

    pub fn coupling(&self) -> &CouplingNet<S> {
        &self.coupling
    }

    pub fn decomposition(&self) -> &TreeDecomposition {
        &self.td
    }

    pub fn width(&self) -> usize {
        self.td.width()
    }

    pub fn engine(&self) -> &InferenceEngine<S> {
        &self.engine
    }

    fn n(&self) -> usize {
        self.p.len()
    }

    fn topo(&self) -> &[usize] {
        self.p.dag().topo_order()
    }

    fn paired_sets(&self) -> QuerySets {
        QuerySets::full(self.n(), self.coupling.encoding().paired_alphabet())
    }

    /// `Z = Pr[X ≠ Y] = 1 − Pr[X = Y]`: one query with every set equal to
    /// the diagonal pairs.
    pub fn compute_z(&self, counter: &mut QueryCount) -> Result<S, EstimatorError> {
        let enc = self.coupling.encoding();
        let mut sets = self.paired_sets();
        for i in 0..self.n() {
            sets.set(i, enc.diagonal());
        }
        let agree = self.engine.query(&sets, counter)?;
        Ok(clamp(S::one() - agree))
    }

    /// `Z_{b_1..b_k} = Pr[X_{t_1} = b_1, ..., X_{t_k} = b_k] −
    /// Pr[X = Y, X_{t_1} = b_1, ..., X_{t_k} = b_k]` where `t` is the
    /// topological order. Two queries.
    pub fn compute_z_prefix(
        &self,
        prefix: &[usize],
        counter: &mut QueryCount,
    ) -> Result<S, EstimatorError> {
        let n = self.n();
        let l = self.p.alphabet();
        if prefix.len() > n {
            return Err(ModelError::LengthMismatch {
                expected: n,
                got: prefix.len(),
            }
            .into());
        }
        if let Some(&symbol) = prefix.iter().find(|&&b| b >= l) {
            return Err(ModelError::SymbolOutOfRange {
                symbol,
                alphabet: l,
            }
            .into());
        }
        let enc = self.coupling.encoding();
        let topo = self.topo();
        let mut marginal = self.paired_sets();
        let mut agree = self.paired_sets();
        for (pos, &node) in topo.iter().enumerate() {
            match prefix.get(pos) {
                Some(&b) => {
                    marginal.set(node, enc.with_x(b));
                    agree.set(node, core::iter::once(b * l + b));
                }
                None => {
                    agree.set(node, enc.diagonal());
                }
            }
        }
        let with_prefix = self.engine.query(&marginal, counter)?;
        let agreeing = self.engine.query(&agree, counter)?;
        Ok(clamp(with_prefix - agreeing))
    }

    fn prefix_z(
        &self,
        prefix: &[usize],
        counter: &mut QueryCount,
        cache: &mut Option<&mut PrefixCache<S>>,
    ) -> Result<S, EstimatorError> {
        if let Some(cache) = cache.as_deref_mut() {
            if let Some(v) = cache.get(prefix) {
                // a cache hit still stands for the two logical queries
                counter.0 += 2;
                return Ok(v.clone());
            }
            let v = self.compute_z_prefix(prefix, counter)?;
            cache.insert(prefix.to_vec(), v.clone());
            return Ok(v);
        }
        self.compute_z_prefix(prefix, counter)
    }

    /// Draws `w ~ π` one node at a time in topological order. Candidate
    /// symbols are evaluated lazily, so each node costs at most `2ℓ`
    /// queries; the chosen prefix mass becomes the next denominator.
    /// Returns `w` indexed by node.
    pub fn sample_pi<R: RngCore>(
        &self,
        z: &S,
        rng: &mut R,
        counter: &mut QueryCount,
        mut cache: Option<&mut PrefixCache<S>>,
    ) -> Result<Vec<usize>, EstimatorError> {
        if z.is_negligible() {
            return Err(EstimatorError::ZeroNormalizer);
        }
        let n = self.n();
        let l = self.p.alphabet();
        let mut prefix: Vec<usize> = Vec::with_capacity(n);
        let mut denominator = z.clone();
        let mut masses: Vec<S> = Vec::with_capacity(l);
        for _ in 0..n {
            let target = rng::unit_f64(rng) * denominator.as_f64();
            let mut cumulative = 0.0;
            let mut chosen = None;
            masses.clear();
            for b in 0..l {
                prefix.push(b);
                let mass = self.prefix_z(&prefix, counter, &mut cache)?;
                prefix.pop();
                cumulative += mass.as_f64();
                let positive = !mass.is_null();
                masses.push(mass);
                if positive && target < cumulative {
                    chosen = Some(b);
                    break;
                }
            }
            // rounding can leave the target just past the last mass
            let b = match chosen {
                Some(b) => b,
                None => masses.iter().rposition(|m| !m.is_null()).ok_or_else(|| {
                    EstimatorError::ContractViolation(alloc::format!(
                        "prefix {prefix:?} has no extension with positive mass"
                    ))
                })?,
            };
            denominator = masses[b].clone();
            prefix.push(b);
        }
        let mut w = alloc::vec![0; n];
        for (&node, &b) in self.topo().iter().zip(&prefix) {
            w[node] = b;
        }
        Ok(w)
    }

    /// Computes `Z` and fixes the sample count.
    pub fn plan(&self, params: &EstimateParams) -> Result<SamplePlan<S>, EstimatorError> {
        params.validate()?;
        let mut queries = QueryCount::default();
        let z = self.compute_z(&mut queries)?;
        let m = if z.is_negligible() {
            0
        } else {
            sample_count(self.n(), params)
        };
        Ok(SamplePlan { z, m, queries })
    }

    /// `f(w)` for the `index`-th sample, drawn from its own random stream.
    pub fn sample_f(
        &self,
        plan: &SamplePlan<S>,
        seed: u64,
        index: u64,
        counter: &mut QueryCount,
        cache: Option<&mut PrefixCache<S>>,
    ) -> Result<f64, EstimatorError> {
        let mut rng = rng::stream(seed, index);
        let w = self.sample_pi(&plan.z, &mut rng, counter, cache)?;
        Ok(f_value(&self.p, &self.q, &w)?.as_f64())
    }

    /// Sum of `f` over the samples of one block.
    pub fn block_sum(
        &self,
        plan: &SamplePlan<S>,
        params: &EstimateParams,
        block: u64,
        counter: &mut QueryCount,
        mut cache: Option<&mut PrefixCache<S>>,
    ) -> Result<f64, EstimatorError> {
        let start = block * TV_BLOCK;
        let end = (start + TV_BLOCK).min(plan.m);
        let mut values = Vec::with_capacity((end - start) as usize);
        for index in start..end {
            values.push(self.sample_f(plan, params.seed, index, counter, cache.as_deref_mut())?);
        }
        Ok(pairwise_sum(&values))
    }

    /// Assembles the report from per-block sums listed in block order.
    pub fn finish(
        &self,
        plan: &SamplePlan<S>,
        block_sums: &[f64],
        sampling_queries: QueryCount,
        params: &EstimateParams,
    ) -> EstimateReport {
        let z = plan.z.as_f64();
        let (estimate, alpha_hat) = if plan.m == 0 {
            (0.0, 0.0)
        } else {
            let alpha = pairwise_sum(block_sums) / plan.m as f64;
            (z * alpha, alpha)
        };
        let mut queries = plan.queries;
        queries.merge(sampling_queries);
        EstimateReport {
            estimate,
            m: plan.m,
            z,
            alpha_hat,
            queries: queries.0,
            seed: params.seed,
            elapsed: core::time::Duration::ZERO,
            width: self.width(),
            phase: None,
        }
    }

    /// Runs the whole estimator on the current thread.
    pub fn run(&self, params: &EstimateParams) -> Result<EstimateReport, EstimatorError> {
        let plan = self.plan(params)?;
        let mut queries = QueryCount::default();
        let mut cache = PrefixCache::new();
        let mut sums = Vec::with_capacity(plan.block_count() as usize);
        for block in 0..plan.block_count() {
            let cache = params.memoize.then_some(&mut cache);
            sums.push(self.block_sum(&plan, params, block, &mut queries, cache)?);
        }
        Ok(self.finish(&plan, &sums, queries, params))
    }
}

fn clamp<S: Scalar>(v: S) -> S {
    if v.is_negative() {
        S::zero()
    } else {
        v
    }
}

/// Estimates `d_TV(P, Q)` within relative error `eps` with probability at
/// least `1 − delta`.
pub fn estimate_tv<S: Scalar>(
    p: &BayesNet<S>,
    q: &BayesNet<S>,
    params: &EstimateParams,
) -> Result<EstimateReport, EstimatorError> {
    TvEstimator::new(p, q)?.run(params)
}
