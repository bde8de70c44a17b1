use alloc::format;
use alloc::vec::Vec;

use super::dag::{structural_violations, topological_order};
use super::{row_index, Dag, ModelError, ValidationReport, Violation};
use crate::scalar::Scalar;

/// Conditional probability table of one node, stored as a flat
/// `rows × alphabet` table.
#[derive(Clone, Debug, PartialEq)]
pub struct Cpt<S> {
    node: usize,
    parent_count: usize,
    alphabet: usize,
    table: Vec<S>,
}

impl<S: Scalar> Cpt<S> {
    pub fn node(&self) -> usize {
        self.node
    }

    pub fn parent_count(&self) -> usize {
        self.parent_count
    }

    pub fn row_count(&self) -> usize {
        self.table.len() / self.alphabet
    }

    pub fn row(&self, row: usize) -> &[S] {
        &self.table[row * self.alphabet..(row + 1) * self.alphabet]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[S]> {
        self.table.chunks_exact(self.alphabet)
    }

    /// Flat table, row-major over parent assignments then the node's symbol.
    pub fn table(&self) -> &[S] {
        &self.table
    }
}

/// Unchecked net description as read from a file or assembled by hand.
/// [`RawNet::validate`] reports every defect; [`RawNet::into_net`] turns a
/// valid description into a [`BayesNet`].
#[derive(Clone, Debug, PartialEq)]
pub struct RawNet<S> {
    pub alphabet: usize,
    pub parents: Vec<Vec<usize>>,
    /// `cpt[i][r][s]` = Pr[X_i = s | parents of i take their r-th assignment].
    pub cpt: Vec<Vec<Vec<S>>>,
}

impl<S: Scalar> RawNet<S> {
    pub fn validate(&self) -> ValidationReport {
        let mut out = Vec::new();
        if self.alphabet < 2 {
            out.push(Violation::AlphabetTooSmall {
                alphabet: self.alphabet,
            });
        }
        out.extend(structural_violations(&self.parents));
        if out
            .iter()
            .all(|v| !matches!(v, Violation::ParentOutOfRange { .. }))
        {
            if let Err(nodes) = topological_order(&self.parents) {
                out.push(Violation::Cycle { nodes });
            }
        }
        if self.cpt.len() != self.parents.len() {
            out.push(Violation::CptCount {
                expected: self.parents.len(),
                got: self.cpt.len(),
            });
        }
        if self.alphabet == 0 {
            return out.into();
        }
        for (node, (rows, parents)) in self.cpt.iter().zip(&self.parents).enumerate() {
            let expected_rows = checked_pow(self.alphabet, parents.len());
            if Some(rows.len()) != expected_rows {
                out.push(Violation::RowCount {
                    node,
                    expected: expected_rows.unwrap_or(usize::MAX),
                    got: rows.len(),
                });
            }
            for (row, values) in rows.iter().enumerate() {
                if values.len() != self.alphabet {
                    out.push(Violation::RowLength {
                        node,
                        row,
                        expected: self.alphabet,
                        got: values.len(),
                    });
                    continue;
                }
                let mut sum = S::zero();
                for (symbol, v) in values.iter().enumerate() {
                    if v.is_negative() {
                        out.push(Violation::NegativeEntry { node, row, symbol });
                    }
                    sum = sum + v.clone();
                }
                if !sum.is_unit_sum() {
                    out.push(Violation::RowSum {
                        node,
                        row,
                        sum: sum.as_f64(),
                    });
                }
            }
        }
        out.into()
    }

    pub fn into_net(self) -> Result<BayesNet<S>, ModelError> {
        let report = self.validate();
        if !report.is_ok() {
            return Err(ModelError::Invalid(report));
        }
        let dag = Dag::new(self.parents)?;
        let alphabet = self.alphabet;
        let cpts = self
            .cpt
            .into_iter()
            .enumerate()
            .map(|(node, rows)| Cpt {
                node,
                parent_count: dag.parents(node).len(),
                alphabet,
                table: rows.into_iter().flatten().collect(),
            })
            .collect();
        Ok(BayesNet {
            dag,
            alphabet,
            cpts,
        })
    }
}

fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    u32::try_from(exp).ok().and_then(|e| base.checked_pow(e))
}

/// A validated discrete Bayes net: a DAG plus one CPT per node over the
/// alphabet `0..alphabet`.
#[derive(Clone, Debug, PartialEq)]
pub struct BayesNet<S> {
    dag: Dag,
    alphabet: usize,
    cpts: Vec<Cpt<S>>,
}

impl<S: Scalar> BayesNet<S> {
    /// Builds and validates a net from its DAG and nested tables.
    pub fn new(dag: Dag, alphabet: usize, cpt: Vec<Vec<Vec<S>>>) -> Result<Self, ModelError> {
        RawNet {
            alphabet,
            parents: dag.parent_lists().to_vec(),
            cpt,
        }
        .into_net()
    }

    /// Same DAG with every CPT row uniform.
    pub fn uniform(dag: Dag, alphabet: usize) -> Self {
        let value = S::from_ratio(1, alphabet as u64);
        let cpts = (0..dag.len())
            .map(|node| {
                let rows = alphabet.pow(dag.parents(node).len() as u32);
                Cpt {
                    node,
                    parent_count: dag.parents(node).len(),
                    alphabet,
                    table: alloc::vec![value.clone(); rows * alphabet],
                }
            })
            .collect();
        BayesNet {
            dag,
            alphabet,
            cpts,
        }
    }

    pub fn len(&self) -> usize {
        self.dag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dag.is_empty()
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn cpt(&self, node: usize) -> &Cpt<S> {
        &self.cpts[node]
    }

    pub fn cpts(&self) -> &[Cpt<S>] {
        &self.cpts
    }

    pub fn to_raw(&self) -> RawNet<S> {
        RawNet {
            alphabet: self.alphabet,
            parents: self.dag.parent_lists().to_vec(),
            cpt: self
                .cpts
                .iter()
                .map(|c| c.rows().map(<[S]>::to_vec).collect())
                .collect(),
        }
    }

    pub fn map_scalar<T: Scalar>(&self, mut f: impl FnMut(&S) -> T) -> BayesNet<T> {
        BayesNet {
            dag: self.dag.clone(),
            alphabet: self.alphabet,
            cpts: self
                .cpts
                .iter()
                .map(|c| Cpt {
                    node: c.node,
                    parent_count: c.parent_count,
                    alphabet: c.alphabet,
                    table: c.table.iter().map(&mut f).collect(),
                })
                .collect(),
        }
    }

    /// Pr[X_node = symbol | Π(node) = parent_symbols], a direct lookup.
    pub fn conditional(
        &self,
        node: usize,
        symbol: usize,
        parent_symbols: &[usize],
    ) -> Result<S, ModelError> {
        let n = self.len();
        if node >= n {
            return Err(ModelError::NodeOutOfRange { node, n });
        }
        self.check_symbol(symbol)?;
        let parent_count = self.dag.parents(node).len();
        if parent_symbols.len() != parent_count {
            return Err(ModelError::LengthMismatch {
                expected: parent_count,
                got: parent_symbols.len(),
            });
        }
        for &s in parent_symbols {
            self.check_symbol(s)?;
        }
        let row = row_index(parent_symbols.iter().copied(), self.alphabet);
        Ok(self.cpts[node].row(row)[symbol].clone())
    }

    /// The CPT entry for `node` selected by a full assignment. No range checks.
    pub fn local_term(&self, node: usize, assignment: &[usize]) -> &S {
        let row = row_index(
            self.dag.parents(node).iter().map(|&p| assignment[p]),
            self.alphabet,
        );
        &self.cpts[node].row(row)[assignment[node]]
    }

    /// Joint probability of a full assignment: one CPT lookup per node.
    pub fn mass(&self, assignment: &[usize]) -> Result<S, ModelError> {
        self.check_assignment(assignment)?;
        Ok((0..self.len()).fold(S::one(), |acc, i| {
            acc * self.local_term(i, assignment).clone()
        }))
    }

    pub fn check_assignment(&self, assignment: &[usize]) -> Result<(), ModelError> {
        if assignment.len() != self.len() {
            return Err(ModelError::LengthMismatch {
                expected: self.len(),
                got: assignment.len(),
            });
        }
        assignment.iter().try_for_each(|&s| self.check_symbol(s))
    }

    fn check_symbol(&self, symbol: usize) -> Result<(), ModelError> {
        if symbol >= self.alphabet {
            return Err(ModelError::SymbolOutOfRange {
                symbol,
                alphabet: self.alphabet,
            });
        }
        Ok(())
    }

    /// Errors unless both nets share node count, parent lists, and alphabet.
    pub fn check_same_structure<T: Scalar>(&self, other: &BayesNet<T>) -> Result<(), ModelError> {
        if self.len() != other.len() {
            return Err(ModelError::StructureMismatch(format!(
                "{} vs {} nodes",
                self.len(),
                other.len()
            )));
        }
        if self.alphabet != other.alphabet() {
            return Err(ModelError::StructureMismatch(format!(
                "alphabet {} vs {}",
                self.alphabet,
                other.alphabet()
            )));
        }
        if let Some(node) = (0..self.len()).find(|&i| self.dag.parents(i) != other.dag().parents(i))
        {
            return Err(ModelError::StructureMismatch(format!(
                "parent lists differ at node {node}"
            )));
        }
        Ok(())
    }
}

impl BayesNet<crate::scalar::Exact> {
    /// Same net in the `f64` backend.
    pub fn to_float(&self) -> BayesNet<f64> {
        self.map_scalar(f64::from_exact)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;
    use alloc::vec;
    use num_bigint::BigInt;

    fn q(a: i64, b: i64) -> Exact {
        Exact::new(BigInt::from(a), BigInt::from(b))
    }

    fn ber_two_thirds() -> BayesNet<Exact> {
        RawNet {
            alphabet: 2,
            parents: vec![vec![], vec![]],
            cpt: vec![vec![vec![q(2, 3), q(1, 3)]]; 2],
        }
        .into_net()
        .unwrap()
    }

    fn chain() -> BayesNet<f64> {
        RawNet {
            alphabet: 2,
            parents: vec![vec![], vec![0]],
            cpt: vec![vec![vec![0.6, 0.4]], vec![vec![0.9, 0.1], vec![0.5, 0.5]]],
        }
        .into_net()
        .unwrap()
    }

    #[test]
    fn mass_of_product_net() {
        let net = ber_two_thirds();
        assert_eq!(net.mass(&[0, 0]).unwrap(), q(4, 9));
        assert_eq!(net.mass(&[0, 1]).unwrap(), q(2, 9));
    }

    #[test]
    fn mass_rejects_bad_assignments() {
        let net = ber_two_thirds();
        assert!(matches!(
            net.mass(&[0, 2]),
            Err(ModelError::SymbolOutOfRange { symbol: 2, .. })
        ));
        assert!(matches!(
            net.mass(&[0]),
            Err(ModelError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn point_mass_row_zeroes_inconsistent_assignment() {
        let mut raw = chain().to_raw();
        raw.cpt[1][0] = vec![0.0, 1.0];
        let net = raw.into_net().unwrap();
        assert_eq!(net.mass(&[0, 0]).unwrap(), 0.0);
    }

    #[test]
    fn conditional_lookups() {
        let net = ber_two_thirds();
        assert_eq!(net.conditional(0, 0, &[]).unwrap(), q(2, 3));
        let chain = chain();
        assert_eq!(chain.conditional(1, 1, &[0]).unwrap(), 0.1);
        let total: f64 = (0..2).map(|b| chain.conditional(1, b, &[1]).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(chain.conditional(2, 0, &[]).is_err());
        assert!(chain.conditional(1, 0, &[]).is_err());
        assert!(chain.conditional(1, 5, &[0]).is_err());
    }

    #[test]
    fn validate_reports_row_sum() {
        let mut raw = chain().to_raw();
        raw.cpt[1][1] = vec![0.5, 0.4];
        let report = raw.validate();
        assert_eq!(report.violations.len(), 1);
        let msg = alloc::format!("{report}");
        assert!(msg.contains("row sum 0.9 ≠ 1 at node 1"), "{msg}");
    }

    #[test]
    fn validate_reports_self_loop() {
        let raw = RawNet {
            alphabet: 2,
            parents: vec![vec![0]],
            cpt: vec![vec![vec![0.5, 0.5], vec![0.5, 0.5]]],
        };
        let report = raw.validate();
        assert_eq!(report.violations, vec![Violation::SelfLoop { node: 0 }]);
    }

    #[test]
    fn validate_reports_shape_defects() {
        let raw = RawNet {
            alphabet: 2,
            parents: vec![vec![1], vec![0]],
            cpt: vec![vec![vec![0.5, 0.5]], vec![vec![-0.5, 1.5], vec![1.0]]],
        };
        let report = raw.validate();
        let v = &report.violations;
        assert!(v.iter().any(|x| matches!(x, Violation::Cycle { .. })));
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::RowCount { node: 0, .. })));
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::NegativeEntry { node: 1, .. })));
        assert!(v.iter().any(|x| matches!(
            x,
            Violation::RowLength {
                node: 1,
                row: 1,
                ..
            }
        )));
    }

    #[test]
    fn exact_rows_must_sum_exactly() {
        let raw = RawNet {
            alphabet: 2,
            parents: vec![vec![]],
            cpt: vec![vec![vec![q(333_333_333_333, 1_000_000_000_000), q(2, 3)]]],
        };
        assert!(!raw.validate().is_ok());
    }

    #[test]
    fn structure_mismatch_detected() {
        let a = chain();
        let b = BayesNet::<f64>::uniform(Dag::empty(2), 2);
        assert!(a.check_same_structure(&b).is_err());
        assert!(a.check_same_structure(&a).is_ok());
    }
}
