//! Per-assignment quantities behind the importance-sampling estimator.
//!
//! For `w ∈ [ℓ]^n`, `h(w, i)` is the smaller of the two conditionals of node
//! `i`, `g(w) = P(w) − ∏_i h(w, i)`, and `f(w) = max(0, P(w) − Q(w)) / g(w)`.
//! All three take time linear in `n`.

use alloc::format;

use super::EstimatorError;
use crate::model::BayesNet;
use crate::scalar::Scalar;

fn check<S: Scalar>(p: &BayesNet<S>, q: &BayesNet<S>, w: &[usize]) -> Result<(), EstimatorError> {
    p.check_same_structure(q)?;
    p.check_assignment(w)?;
    Ok(())
}

/// `min(P(w_i | w_Π(i)), Q(w_i | w_Π(i)))`.
pub fn h_term<S: Scalar>(
    p: &BayesNet<S>,
    q: &BayesNet<S>,
    w: &[usize],
    node: usize,
) -> Result<S, EstimatorError> {
    check(p, q, w)?;
    if node >= p.len() {
        return Err(crate::model::ModelError::NodeOutOfRange { node, n: p.len() }.into());
    }
    Ok(S::min_of(p.local_term(node, w), q.local_term(node, w)))
}

/// `P(w) − ∏_i h(w, i)`, never negative.
pub fn g_value<S: Scalar>(
    p: &BayesNet<S>,
    q: &BayesNet<S>,
    w: &[usize],
) -> Result<S, EstimatorError> {
    check(p, q, w)?;
    let mut mass = S::one();
    let mut overlap = S::one();
    for i in 0..p.len() {
        let a = p.local_term(i, w);
        let b = q.local_term(i, w);
        overlap = overlap * S::min_of(a, b);
        mass = mass * a.clone();
    }
    Ok(mass - overlap)
}

/// `max(0, P(w) − Q(w)) / g(w)`, in `[0, 1]`. Errors when `g(w) = 0`,
/// which never happens on the support of the sampling distribution.
///
/// Evaluated as `max(0, 1 − Q/P) / (1 − H/P)` with per-node ratios, so long
/// assignments do not underflow.
pub fn f_value<S: Scalar>(
    p: &BayesNet<S>,
    q: &BayesNet<S>,
    w: &[usize],
) -> Result<S, EstimatorError> {
    check(p, q, w)?;
    let mut q_ratio = S::one();
    let mut h_ratio = S::one();
    for i in 0..p.len() {
        let a = p.local_term(i, w);
        if a.is_null() {
            return Err(EstimatorError::ContractViolation(format!(
                "g(w) = 0 for w = {w:?} (P(w) = 0)"
            )));
        }
        let b = q.local_term(i, w);
        q_ratio = q_ratio * (b.clone() / a.clone());
        h_ratio = h_ratio * (S::min_of(a, b) / a.clone());
    }
    let residual = S::one() - h_ratio;
    if residual <= S::zero() {
        return Err(EstimatorError::ContractViolation(format!(
            "g(w) = 0 for w = {w:?}"
        )));
    }
    let excess = S::max_of(&S::zero(), &(S::one() - q_ratio));
    Ok(excess / residual)
}
