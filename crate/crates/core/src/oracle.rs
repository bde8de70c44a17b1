//! Brute-force reference values in exact rational arithmetic.
//!
//! Everything here enumerates outcomes and evaluates masses straight from the
//! CPT tables, without going through the estimator's evaluation path. Work is
//! capped by an outcome budget; above it the oracle refuses instead of
//! truncating.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::coupling::{build_coupling, CouplingError};
use crate::inference::QuerySets;
use crate::model::{BayesNet, ModelError};
use crate::scalar::Exact;

/// Default cap on the number of enumerated outcomes.
pub const DEFAULT_BUDGET: u64 = 300_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("enumerating {alphabet}^{exponent} outcomes exceeds the budget of {budget}")]
    BudgetExceeded {
        alphabet: usize,
        exponent: usize,
        budget: u64,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Coupling(#[from] CouplingError),
    #[error("query has {got} sets over alphabet {alphabet}, net has {n} nodes over alphabet {net_alphabet}")]
    QueryShape {
        got: usize,
        alphabet: usize,
        n: usize,
        net_alphabet: usize,
    },
}

/// Outcome of one identity in [`Oracle::identity_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    pub tv: Exact,
    pub z: Exact,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Names of the identities checked by [`Oracle::identity_check`].
pub mod identity {
    /// `Σ_w g(w)·f(w) = d_TV(P, Q)`.
    pub const SUM_G_F: &str = "sum_g_f_equals_tv";
    /// `d_TV ≤ Z`.
    pub const Z_LOWER: &str = "tv_le_z";
    /// `Z ≤ 2n·d_TV`.
    pub const Z_UPPER: &str = "z_le_2n_tv";
    /// `g(w) ≥ 0` for every `w`.
    pub const G_NONNEGATIVE: &str = "g_nonnegative";
    /// `g(w) ≥ P(w) − Q(w)` for every `w`.
    pub const G_DOMINATES: &str = "g_ge_p_minus_q";
    /// The X-marginal of the coupling net equals `P`.
    pub const X_MARGINAL: &str = "x_marginal_is_p";
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Oracle {
    budget: u64,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle {
            budget: DEFAULT_BUDGET,
        }
    }
}

impl Oracle {
    pub fn new(budget: u64) -> Self {
        Oracle { budget }
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    fn admit(&self, alphabet: usize, exponent: usize) -> Result<(), OracleError> {
        let refuse = OracleError::BudgetExceeded {
            alphabet,
            exponent,
            budget: self.budget,
        };
        let count = u32::try_from(exponent)
            .ok()
            .and_then(|e| (alphabet as u128).checked_pow(e))
            .ok_or(refuse.clone())?;
        if count > self.budget as u128 {
            return Err(refuse);
        }
        Ok(())
    }

    /// `P(x)`, read directly from the CPT tables.
    pub fn mass(&self, net: &BayesNet<Exact>, x: &[usize]) -> Result<Exact, OracleError> {
        net.check_assignment(x)?;
        Ok(product_mass(net, x))
    }

    /// `½ Σ_w |P(w) − Q(w)|`.
    pub fn tv(&self, p: &BayesNet<Exact>, q: &BayesNet<Exact>) -> Result<Exact, OracleError> {
        p.check_same_structure(q)?;
        self.admit(p.alphabet(), p.len())?;
        let mut total = Exact::zero();
        for_each_assignment(p.len(), p.alphabet(), |w| {
            total += (product_mass(p, w) - product_mass(q, w)).abs();
        });
        Ok(total / Exact::from_integer(2.into()))
    }

    /// `Pr[X_0 ∈ S_0, ..., X_{n-1} ∈ S_{n-1}]` by summing the mass of every
    /// consistent assignment.
    pub fn infer(&self, net: &BayesNet<Exact>, sets: &QuerySets) -> Result<Exact, OracleError> {
        if sets.len() != net.len() || sets.alphabet() != net.alphabet() {
            return Err(OracleError::QueryShape {
                got: sets.len(),
                alphabet: sets.alphabet(),
                n: net.len(),
                net_alphabet: net.alphabet(),
            });
        }
        self.admit(net.alphabet(), net.len())?;
        let mut total = Exact::zero();
        for_each_assignment(net.len(), net.alphabet(), |w| {
            if w.iter().enumerate().all(|(i, &s)| sets.contains(i, s)) {
                total += product_mass(net, w);
            }
        });
        Ok(total)
    }

    /// `Z = Σ_w g(w)`.
    pub fn z(&self, p: &BayesNet<Exact>, q: &BayesNet<Exact>) -> Result<Exact, OracleError> {
        self.prefix_z(p, q, &[])
    }

    /// `Σ g(w)` over the `w` whose first `prefix.len()` nodes, taken in the
    /// DAG's topological order, carry the prefix symbols.
    pub fn prefix_z(
        &self,
        p: &BayesNet<Exact>,
        q: &BayesNet<Exact>,
        prefix: &[usize],
    ) -> Result<Exact, OracleError> {
        p.check_same_structure(q)?;
        if prefix.len() > p.len() {
            return Err(ModelError::LengthMismatch {
                expected: p.len(),
                got: prefix.len(),
            }
            .into());
        }
        if let Some(&symbol) = prefix.iter().find(|&&b| b >= p.alphabet()) {
            return Err(ModelError::SymbolOutOfRange {
                symbol,
                alphabet: p.alphabet(),
            }
            .into());
        }
        self.admit(p.alphabet(), p.len())?;
        let fixed: Vec<(usize, usize)> = p
            .dag()
            .topo_order()
            .iter()
            .copied()
            .zip(prefix.iter().copied())
            .collect();
        let mut total = Exact::zero();
        for_each_assignment(p.len(), p.alphabet(), |w| {
            if fixed.iter().all(|&(node, b)| w[node] == b) {
                total += g(p, q, w);
            }
        });
        Ok(total)
    }

    /// Checks the exact identities relating `g`, `f`, `Z`, and `d_TV`, and
    /// that the coupling net's X-marginal is `P`. Needs `ℓ^{2n}` outcomes
    /// within budget.
    pub fn identity_check(
        &self,
        p: &BayesNet<Exact>,
        q: &BayesNet<Exact>,
    ) -> Result<IdentityReport, OracleError> {
        p.check_same_structure(q)?;
        let n = p.len();
        let l = p.alphabet();
        self.admit(l, 2 * n)?;

        let mut tv = Exact::zero();
        let mut z = Exact::zero();
        let mut sum_gf = Exact::zero();
        let mut negative_g: Option<Vec<usize>> = None;
        let mut below_excess: Option<Vec<usize>> = None;
        for_each_assignment(n, l, |w| {
            let pw = product_mass(p, w);
            let qw = product_mass(q, w);
            let gw = g(p, q, w);
            let diff = pw.clone() - qw;
            let excess = if diff.is_positive() {
                diff.clone()
            } else {
                Exact::zero()
            };
            if gw.is_negative() && negative_g.is_none() {
                negative_g = Some(w.to_vec());
            }
            if gw < diff && below_excess.is_none() {
                below_excess = Some(w.to_vec());
            }
            if gw.is_positive() {
                sum_gf += gw.clone() * (excess.clone() / gw.clone());
            }
            tv += excess;
            z += gw;
        });

        let coupling = build_coupling(p, q)?;
        let (net, _) = coupling.into_parts();
        let mut marginal = alloc::vec![Exact::zero(); l.pow(n as u32)];
        for_each_assignment(n, l * l, |pair| {
            let x_index = pair.iter().fold(0, |acc, &s| acc * l + s / l);
            marginal[x_index] += product_mass(&net, pair);
        });
        let mut marginal_mismatch: Option<Vec<usize>> = None;
        let mut x_index = 0;
        for_each_assignment(n, l, |x| {
            if marginal_mismatch.is_none() && marginal[x_index] != product_mass(p, x) {
                marginal_mismatch = Some(x.to_vec());
            }
            x_index += 1;
        });

        let two_n = Exact::from_integer((2 * n).into());
        let upper = two_n * tv.clone();
        let checks = alloc::vec![
            IdentityCheck {
                name: identity::SUM_G_F,
                passed: sum_gf == tv,
                detail: format!("sum g*f = {sum_gf}, d_TV = {tv}"),
            },
            IdentityCheck {
                name: identity::Z_LOWER,
                passed: tv <= z,
                detail: format!("d_TV = {tv}, Z = {z}"),
            },
            IdentityCheck {
                name: identity::Z_UPPER,
                passed: z <= upper,
                detail: format!("Z = {z}, 2n*d_TV = {upper}"),
            },
            witness_check(identity::G_NONNEGATIVE, negative_g),
            witness_check(identity::G_DOMINATES, below_excess),
            witness_check(identity::X_MARGINAL, marginal_mismatch),
        ];
        Ok(IdentityReport { tv, z, checks })
    }
}

fn witness_check(name: &'static str, witness: Option<Vec<usize>>) -> IdentityCheck {
    match witness {
        None => IdentityCheck {
            name,
            passed: true,
            detail: String::from("holds for every assignment"),
        },
        Some(w) => IdentityCheck {
            name,
            passed: false,
            detail: format!("fails at {w:?}"),
        },
    }
}

/// Visits every assignment of `[alphabet]^n` in lexicographic order, the
/// first node most significant.
fn for_each_assignment(n: usize, alphabet: usize, mut visit: impl FnMut(&[usize])) {
    let mut w = alloc::vec![0; n];
    loop {
        visit(&w);
        let mut i = n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            w[i] += 1;
            if w[i] < alphabet {
                break;
            }
            w[i] = 0;
        }
    }
}

fn entry<'a>(net: &'a BayesNet<Exact>, node: usize, w: &[usize]) -> &'a Exact {
    let l = net.alphabet();
    let mut row = 0;
    for &parent in net.dag().parents(node) {
        row = row * l + w[parent];
    }
    &net.cpt(node).table()[row * l + w[node]]
}

fn product_mass(net: &BayesNet<Exact>, w: &[usize]) -> Exact {
    let mut out = Exact::one();
    for node in 0..net.len() {
        out *= entry(net, node, w);
    }
    out
}

/// `P(w) − ∏_i min(P_i(w), Q_i(w))`.
fn g(p: &BayesNet<Exact>, q: &BayesNet<Exact>, w: &[usize]) -> Exact {
    let mut overlap = Exact::one();
    for node in 0..p.len() {
        let a = entry(p, node, w);
        let b = entry(q, node, w);
        overlap *= if a < b { a } else { b };
    }
    product_mass(p, w) - overlap
}

/// [`Oracle::tv`] with the default budget.
pub fn exact_tv(p: &BayesNet<Exact>, q: &BayesNet<Exact>) -> Result<Exact, OracleError> {
    Oracle::default().tv(p, q)
}

/// [`Oracle::infer`] with the default budget.
pub fn exact_infer(net: &BayesNet<Exact>, sets: &QuerySets) -> Result<Exact, OracleError> {
    Oracle::default().infer(net, sets)
}

/// [`Oracle::z`] with the default budget.
pub fn exact_z(p: &BayesNet<Exact>, q: &BayesNet<Exact>) -> Result<Exact, OracleError> {
    Oracle::default().z(p, q)
}

/// [`Oracle::prefix_z`] with the default budget.
pub fn exact_prefix_z(
    p: &BayesNet<Exact>,
    q: &BayesNet<Exact>,
    prefix: &[usize],
) -> Result<Exact, OracleError> {
    Oracle::default().prefix_z(p, q, prefix)
}

/// [`Oracle::identity_check`] with the default budget.
pub fn exact_identity_check(
    p: &BayesNet<Exact>,
    q: &BayesNet<Exact>,
) -> Result<IdentityReport, OracleError> {
    Oracle::default().identity_check(p, q)
}
