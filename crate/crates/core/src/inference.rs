//! Exact probabilistic inference by variable elimination.
//!
//! A query fixes a symbol set per variable and asks for
//! `Pr[X_0 ∈ S_0, ..., X_{n-1} ∈ S_{n-1}]`. Evidence is applied by zeroing
//! factor entries, then variables are summed out along an elimination order
//! derived from a tree decomposition of the moral graph.

use alloc::vec::Vec;

use crate::model::{moralize, BayesNet};
use crate::scalar::Scalar;
use crate::treedecomp::{
    elimination_order, induced_scope_size, verify_decomposition, TreeDecomposition,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InferenceError {
    #[error("variable {var} is not in the factor scope")]
    VarNotInScope { var: usize },
    #[error("factor scope must be strictly increasing")]
    UnsortedScope,
    #[error("factor table has {got} entries, expected {expected}")]
    TableLength { expected: usize, got: usize },
    #[error("factors use different alphabets ({0} vs {1})")]
    AlphabetMismatch(usize, usize),
    #[error("query covers {got} variables over alphabet {got_alphabet}, net has {expected} over {expected_alphabet}")]
    QueryShape {
        expected: usize,
        got: usize,
        expected_alphabet: usize,
        got_alphabet: usize,
    },
    #[error("tree decomposition does not match the moral graph of the net")]
    DecompositionMismatch,
    #[error("elimination order is not a permutation of the net's nodes")]
    NotAPermutation,
    #[error("intermediate factor over {size} variables exceeds the bound of {bound}")]
    ScopeBound { size: usize, bound: usize },
}

/// A nonnegative table over the joint assignments of `scope`, row-major
/// with the first (lowest-indexed) variable most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct Factor<S> {
    scope: Vec<usize>,
    alphabet: usize,
    table: Vec<S>,
}

impl<S: Scalar> Factor<S> {
    pub fn new(scope: Vec<usize>, alphabet: usize, table: Vec<S>) -> Result<Self, InferenceError> {
        if scope.windows(2).any(|w| w[0] >= w[1]) {
            return Err(InferenceError::UnsortedScope);
        }
        let expected = alphabet.pow(scope.len() as u32);
        if table.len() != expected {
            return Err(InferenceError::TableLength {
                expected,
                got: table.len(),
            });
        }
        Ok(Factor {
            scope,
            alphabet,
            table,
        })
    }

    /// The empty-scope factor with value one.
    pub fn unit(alphabet: usize) -> Self {
        Factor {
            scope: Vec::new(),
            alphabet,
            table: alloc::vec![S::one()],
        }
    }

    /// CPT of `node` as a factor over its parents and itself.
    pub fn from_cpt(net: &BayesNet<S>, node: usize) -> Self {
        let alphabet = net.alphabet();
        let parents = net.dag().parents(node);
        let mut scope: Vec<usize> = parents.to_vec();
        scope.push(node);
        scope.sort_unstable();
        // position of each CPT digit (parents in declared order, then the node) in the sorted scope
        let digits: Vec<usize> = parents
            .iter()
            .chain(core::iter::once(&node))
            .map(|v| {
                scope
                    .iter()
                    .position(|s| s == v)
                    .expect("variable in scope")
            })
            .collect();
        let k = scope.len();
        let mut strides = alloc::vec![1usize; k];
        for i in (0..k.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * alphabet;
        }
        let cpt_table = net.cpt(node).table();
        let mut table = alloc::vec![S::zero(); cpt_table.len()];
        let mut assignment = alloc::vec![0usize; k];
        for (flat, value) in cpt_table.iter().enumerate() {
            let mut rest = flat;
            for &pos in digits.iter().rev() {
                assignment[pos] = rest % alphabet;
                rest /= alphabet;
            }
            let idx: usize = assignment.iter().zip(&strides).map(|(a, s)| a * s).sum();
            table[idx] = value.clone();
        }
        Factor {
            scope,
            alphabet,
            table,
        }
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn table(&self) -> &[S] {
        &self.table
    }

    /// Value of an empty-scope factor.
    pub fn scalar(&self) -> Option<&S> {
        self.scope.is_empty().then(|| &self.table[0])
    }

    fn stride_of(&self, pos: usize) -> usize {
        self.alphabet.pow((self.scope.len() - 1 - pos) as u32)
    }

    /// Zeroes every entry whose `var` coordinate is not allowed.
    pub fn restrict(&self, var: usize, allowed: &[bool]) -> Result<Self, InferenceError> {
        let mut out = self.clone();
        out.restrict_in_place(var, allowed)?;
        Ok(out)
    }

    fn restrict_in_place(&mut self, var: usize, allowed: &[bool]) -> Result<(), InferenceError> {
        let pos = self
            .scope
            .iter()
            .position(|&v| v == var)
            .ok_or(InferenceError::VarNotInScope { var })?;
        let stride = self.stride_of(pos);
        let alphabet = self.alphabet;
        for (idx, value) in self.table.iter_mut().enumerate() {
            let symbol = (idx / stride) % alphabet;
            if !allowed.get(symbol).copied().unwrap_or(false) {
                *value = S::zero();
            }
        }
        Ok(())
    }

    /// Pointwise product over the union of both scopes.
    pub fn multiply(&self, other: &Self) -> Result<Self, InferenceError> {
        if self.alphabet != other.alphabet && !self.scope.is_empty() && !other.scope.is_empty() {
            return Err(InferenceError::AlphabetMismatch(
                self.alphabet,
                other.alphabet,
            ));
        }
        let alphabet = if self.scope.is_empty() {
            other.alphabet
        } else {
            self.alphabet
        };
        let scope = merge_scopes(&self.scope, &other.scope);
        let strides_a = strides_within(&scope, &self.scope, alphabet);
        let strides_b = strides_within(&scope, &other.scope, alphabet);
        let len = alphabet.pow(scope.len() as u32);
        let mut table = Vec::with_capacity(len);
        let mut digits = alloc::vec![0usize; scope.len()];
        let (mut ia, mut ib) = (0usize, 0usize);
        for _ in 0..len {
            table.push(self.table[ia].clone() * other.table[ib].clone());
            // odometer increment, least significant digit last
            for d in (0..scope.len()).rev() {
                digits[d] += 1;
                ia += strides_a[d];
                ib += strides_b[d];
                if digits[d] < alphabet {
                    break;
                }
                digits[d] = 0;
                ia -= strides_a[d] * alphabet;
                ib -= strides_b[d] * alphabet;
            }
        }
        Ok(Factor {
            scope,
            alphabet,
            table,
        })
    }

    /// Sums `var` out of the factor.
    pub fn sum_out(&self, var: usize) -> Result<Self, InferenceError> {
        let pos = self
            .scope
            .iter()
            .position(|&v| v == var)
            .ok_or(InferenceError::VarNotInScope { var })?;
        let stride = self.stride_of(pos);
        let block = stride * self.alphabet;
        let mut scope = self.scope.clone();
        scope.remove(pos);
        let mut table = Vec::with_capacity(self.table.len() / self.alphabet);
        for outer in (0..self.table.len()).step_by(block) {
            for inner in 0..stride {
                let mut acc = S::zero();
                for s in 0..self.alphabet {
                    acc = acc + self.table[outer + s * stride + inner].clone();
                }
                table.push(acc);
            }
        }
        Ok(Factor {
            scope,
            alphabet: self.alphabet,
            table,
        })
    }

    pub fn total(&self) -> S {
        self.table.iter().fold(S::zero(), |acc, v| acc + v.clone())
    }
}

fn merge_scopes(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x == y => {
                out.push(x);
                i += 1;
                j += 1;
            }
            (Some(&x), Some(&y)) if x < y => {
                out.push(x);
                i += 1;
            }
            (Some(_), Some(&y)) => {
                out.push(y);
                j += 1;
            }
            (Some(&x), None) => {
                out.push(x);
                i += 1;
            }
            (None, Some(&y)) => {
                out.push(y);
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

/// For each variable of `outer`, its stride inside a factor over `inner`
/// (zero when absent).
fn strides_within(outer: &[usize], inner: &[usize], alphabet: usize) -> Vec<usize> {
    outer
        .iter()
        .map(|v| match inner.iter().position(|u| u == v) {
            Some(pos) => alphabet.pow((inner.len() - 1 - pos) as u32),
            None => 0,
        })
        .collect()
}

/// Per-variable symbol sets `S_0, ..., S_{n-1}` of an inference query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuerySets {
    alphabet: usize,
    sets: Vec<Vec<bool>>,
}

impl QuerySets {
    /// Every variable unconstrained.
    pub fn full(n: usize, alphabet: usize) -> Self {
        QuerySets {
            alphabet,
            sets: alloc::vec![alloc::vec![true; alphabet]; n],
        }
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    /// Replaces `S_var` by `symbols`; symbols outside the alphabet are ignored.
    pub fn set(&mut self, var: usize, symbols: impl IntoIterator<Item = usize>) -> &mut Self {
        let mask = &mut self.sets[var];
        mask.iter_mut().for_each(|m| *m = false);
        for s in symbols {
            if let Some(m) = mask.get_mut(s) {
                *m = true;
            }
        }
        self
    }

    pub fn with(mut self, var: usize, symbols: impl IntoIterator<Item = usize>) -> Self {
        self.set(var, symbols);
        self
    }

    pub fn allowed(&self, var: usize) -> &[bool] {
        &self.sets[var]
    }

    pub fn contains(&self, var: usize, symbol: usize) -> bool {
        self.sets[var].get(symbol).copied().unwrap_or(false)
    }

    pub fn is_full(&self, var: usize) -> bool {
        self.sets[var].iter().all(|&b| b)
    }
}

/// Logical count of inference queries issued during one run or one sample.
/// Each worker owns its counter; counters are merged by addition.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct QueryCount(pub u64);

impl QueryCount {
    pub fn bump(&mut self) {
        self.0 += 1;
    }

    pub fn merge(&mut self, other: QueryCount) {
        self.0 += other.0;
    }
}

/// Variable elimination over a fixed net and elimination order.
#[derive(Clone, Debug)]
pub struct InferenceEngine<S> {
    n: usize,
    alphabet: usize,
    factors: Vec<Factor<S>>,
    order: Vec<usize>,
    /// bucket (order position) receiving each CPT factor
    initial_bucket: Vec<usize>,
    position: Vec<usize>,
    scope_bound: usize,
}

impl<S: Scalar> InferenceEngine<S> {
    /// Engine eliminating along `elimination_order(td)`; `td` must be a valid
    /// decomposition of the net's moral graph.
    pub fn new(net: &BayesNet<S>, td: &TreeDecomposition) -> Result<Self, InferenceError> {
        if !verify_decomposition(&moralize(net), td) {
            return Err(InferenceError::DecompositionMismatch);
        }
        Self::build(net, elimination_order(td), td.max_bag_size())
    }

    /// Engine for an arbitrary elimination order (any permutation is valid;
    /// only the cost changes).
    pub fn with_order(net: &BayesNet<S>, order: Vec<usize>) -> Result<Self, InferenceError> {
        let bound =
            induced_scope_size(&moralize(net), &order).ok_or(InferenceError::NotAPermutation)?;
        Self::build(net, order, bound)
    }

    fn build(
        net: &BayesNet<S>,
        order: Vec<usize>,
        scope_bound: usize,
    ) -> Result<Self, InferenceError> {
        let n = net.len();
        if order.len() != n {
            return Err(InferenceError::NotAPermutation);
        }
        let mut position = alloc::vec![usize::MAX; n];
        for (i, &v) in order.iter().enumerate() {
            if v >= n || position[v] != usize::MAX {
                return Err(InferenceError::NotAPermutation);
            }
            position[v] = i;
        }
        let factors: Vec<Factor<S>> = (0..n).map(|i| Factor::from_cpt(net, i)).collect();
        let initial_bucket = factors
            .iter()
            .map(|f| {
                f.scope
                    .iter()
                    .map(|&v| position[v])
                    .min()
                    .expect("CPT scope is nonempty")
            })
            .collect();
        Ok(InferenceEngine {
            n,
            alphabet: net.alphabet(),
            factors,
            order,
            initial_bucket,
            position,
            scope_bound,
        })
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Largest factor scope the engine may build.
    pub fn scope_bound(&self) -> usize {
        self.scope_bound
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    /// Pr[X_i ∈ S_i for all i]. Counts one query.
    pub fn query(&self, q: &QuerySets, counter: &mut QueryCount) -> Result<S, InferenceError> {
        if q.len() != self.n || q.alphabet() != self.alphabet {
            return Err(InferenceError::QueryShape {
                expected: self.n,
                got: q.len(),
                expected_alphabet: self.alphabet,
                got_alphabet: q.alphabet(),
            });
        }
        counter.bump();
        let mut buckets: Vec<Vec<Factor<S>>> = alloc::vec![Vec::new(); self.n];
        for (node, factor) in self.factors.iter().enumerate() {
            let mut f = factor.clone();
            // each variable is the child of exactly one CPT, so masking there
            // restricts the whole product
            if !q.is_full(node) {
                f.restrict_in_place(node, q.allowed(node))?;
            }
            buckets[self.initial_bucket[node]].push(f);
        }
        let mut result = S::one();
        for (pos, &var) in self.order.iter().enumerate() {
            let mut bucket = core::mem::take(&mut buckets[pos]);
            let Some(mut product) = bucket.pop() else {
                continue;
            };
            for f in bucket {
                product = product.multiply(&f)?;
            }
            if product.scope.len() > self.scope_bound {
                return Err(InferenceError::ScopeBound {
                    size: product.scope.len(),
                    bound: self.scope_bound,
                });
            }
            let reduced = product.sum_out(var)?;
            match reduced.scope.iter().map(|&v| self.position[v]).min() {
                Some(next) => buckets[next].push(reduced),
                None => result = result * reduced.table[0].clone(),
            }
        }
        Ok(result)
    }
}

/// One-shot query: builds an engine from `td` and answers `q`.
pub fn infer<S: Scalar>(
    net: &BayesNet<S>,
    q: &QuerySets,
    td: &TreeDecomposition,
) -> Result<S, InferenceError> {
    InferenceEngine::new(net, td)?.query(q, &mut QueryCount::default())
}
