//! Local partial coupling of two nets over the same DAG.
//!
//! The coupling is itself a Bayes net over the shared DAG whose symbols are
//! pairs `(x, y)` of original symbols. For every node and every pair of parent
//! assignments `(c1, c2)`, the row puts mass `min(P(b|c1), Q(b|c2))` on
//! `(b, b)` and keeps the X-marginal equal to `P(·|c1)`. The joint
//! Y-marginal is not constrained to be `Q`.

use alloc::vec::Vec;

use crate::model::{row_assignment, row_index, BayesNet, ModelError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CouplingError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("pair ({x}, {y}) out of range for alphabet {alphabet}")]
    PairOutOfRange { x: usize, y: usize, alphabet: usize },
    #[error("paired symbol {symbol} out of range for alphabet {alphabet}")]
    SymbolOutOfRange { symbol: usize, alphabet: usize },
    #[error("rows have different lengths ({0} vs {1})")]
    RowLength(usize, usize),
    #[error("input row is not a probability distribution")]
    NotNormalized,
}

/// Bijection between `(x, y) ∈ [ℓ]²` and paired symbols `x·ℓ + y ∈ [ℓ²]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairEncoding {
    alphabet: usize,
}

impl PairEncoding {
    pub fn new(alphabet: usize) -> Self {
        PairEncoding { alphabet }
    }

    /// Size of the original alphabet.
    pub fn base_alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn paired_alphabet(&self) -> usize {
        self.alphabet * self.alphabet
    }

    pub fn encode(&self, x: usize, y: usize) -> Result<usize, CouplingError> {
        if x >= self.alphabet || y >= self.alphabet {
            return Err(CouplingError::PairOutOfRange {
                x,
                y,
                alphabet: self.alphabet,
            });
        }
        Ok(x * self.alphabet + y)
    }

    pub fn decode(&self, symbol: usize) -> Result<(usize, usize), CouplingError> {
        if symbol >= self.paired_alphabet() {
            return Err(CouplingError::SymbolOutOfRange {
                symbol,
                alphabet: self.paired_alphabet(),
            });
        }
        Ok((symbol / self.alphabet, symbol % self.alphabet))
    }

    /// Paired symbols `(b, b)` for every `b`.
    pub fn diagonal(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.alphabet).map(move |b| b * self.alphabet + b)
    }

    /// Paired symbols `(x, y)` for every `y`.
    pub fn with_x(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.alphabet).map(move |y| x * self.alphabet + y)
    }
}

/// Coupled row of two conditionals over `[ℓ]`, returned as a distribution
/// over paired symbols (index `x·ℓ + y`).
///
/// Diagonal mass is `min(p(b), q(b))`. The leftover masses
/// `r_p(b) = p(b) - min` and `r_q(y) = q(y) - min` both sum to `D`; the
/// off-diagonal entry `(b, y)` gets `r_p(b)·r_q(y)/D`, so each row has
/// X-marginal `p` and Y-marginal `q`.
pub fn coupling_row<S: Scalar>(p: &[S], q: &[S]) -> Result<Vec<S>, CouplingError> {
    if p.len() != q.len() {
        return Err(CouplingError::RowLength(p.len(), q.len()));
    }
    for row in [p, q] {
        let sum = row.iter().fold(S::zero(), |acc, v| acc + v.clone());
        if row.iter().any(Scalar::is_negative) || !sum.is_unit_sum() {
            return Err(CouplingError::NotNormalized);
        }
    }
    let l = p.len();
    let diag: Vec<S> = p.iter().zip(q).map(|(a, b)| S::min_of(a, b)).collect();
    let rest_p: Vec<S> = p
        .iter()
        .zip(&diag)
        .map(|(a, m)| a.clone() - m.clone())
        .collect();
    let rest_q: Vec<S> = q
        .iter()
        .zip(&diag)
        .map(|(b, m)| b.clone() - m.clone())
        .collect();
    let leftover = rest_p.iter().fold(S::zero(), |acc, v| acc + v.clone());
    let mut row = alloc::vec![S::zero(); l * l];
    for b in 0..l {
        row[b * l + b] = diag[b].clone();
    }
    if !leftover.is_null() {
        for (b, rp) in rest_p.iter().enumerate().filter(|(_, r)| !r.is_null()) {
            for (y, rq) in rest_q
                .iter()
                .enumerate()
                .filter(|(y, r)| *y != b && !r.is_null())
            {
                row[b * l + y] = rp.clone() * rq.clone() / leftover.clone();
            }
        }
    }
    Ok(row)
}

/// The coupling net together with the pair encoding of its symbols.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingNet<S> {
    net: BayesNet<S>,
    encoding: PairEncoding,
}

impl<S: Scalar> CouplingNet<S> {
    pub fn net(&self) -> &BayesNet<S> {
        &self.net
    }

    pub fn encoding(&self) -> PairEncoding {
        self.encoding
    }

    pub fn into_parts(self) -> (BayesNet<S>, PairEncoding) {
        (self.net, self.encoding)
    }
}

/// Builds the coupling net of `p` and `q`, which must share DAG and alphabet.
/// Every one of the `ℓ^{2k}` rows of a node with `k` parents is materialized.
pub fn build_coupling<S: Scalar>(
    p: &BayesNet<S>,
    q: &BayesNet<S>,
) -> Result<CouplingNet<S>, CouplingError> {
    p.check_same_structure(q)?;
    let l = p.alphabet();
    let encoding = PairEncoding::new(l);
    let paired = encoding.paired_alphabet();
    let mut tables = Vec::with_capacity(p.len());
    for node in 0..p.len() {
        let k = p.dag().parents(node).len();
        let rows = paired.pow(k as u32);
        let mut node_rows = Vec::with_capacity(rows);
        for r in 0..rows {
            let parent_pairs = row_assignment(r, k, paired);
            let row_p = row_index(parent_pairs.iter().map(|&s| s / l), l);
            let row_q = row_index(parent_pairs.iter().map(|&s| s % l), l);
            node_rows.push(coupling_row(
                p.cpt(node).row(row_p),
                q.cpt(node).row(row_q),
            )?);
        }
        tables.push(node_rows);
    }
    let net = BayesNet::new(p.dag().clone(), paired, tables)?;
    Ok(CouplingNet { net, encoding })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;
    use num_bigint::BigInt;

    fn q(a: i64, b: i64) -> Exact {
        Exact::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn encoding_matches_formula() {
        let e = PairEncoding::new(2);
        assert_eq!(e.encode(0, 0).unwrap(), 0);
        assert_eq!(e.encode(0, 1).unwrap(), 1);
        assert_eq!(e.encode(1, 0).unwrap(), 2);
        assert_eq!(e.encode(1, 1).unwrap(), 3);
        assert!(e.encode(2, 0).is_err());
        assert!(e.decode(4).is_err());
        for l in 2..=5 {
            let e = PairEncoding::new(l);
            assert_eq!(e.encode(l - 1, l - 1).unwrap(), l * l - 1);
            for x in 0..l {
                for y in 0..l {
                    assert_eq!(e.decode(e.encode(x, y).unwrap()).unwrap(), (x, y));
                }
            }
        }
    }

    #[test]
    fn equal_rows_couple_on_the_diagonal() {
        let p = [q(1, 5), q(3, 5), q(1, 5)];
        let row = coupling_row(&p, &p).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                let expected = if x == y { p[x].clone() } else { q(0, 1) };
                assert_eq!(row[x * 3 + y], expected);
            }
        }
    }

    #[test]
    fn crossed_bernoullis() {
        let row = coupling_row(&[q(2, 3), q(1, 3)], &[q(1, 3), q(2, 3)]).unwrap();
        assert_eq!(row, [q(1, 3), q(1, 3), q(0, 1), q(1, 3)]);
    }

    #[test]
    fn disjoint_supports_force_off_diagonal() {
        let row = coupling_row(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(row, [0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn rejects_bad_rows() {
        assert_eq!(
            coupling_row(&[0.5, 0.4], &[0.5, 0.5]),
            Err(CouplingError::NotNormalized)
        );
        assert_eq!(
            coupling_row(&[1.0], &[0.5, 0.5]),
            Err(CouplingError::RowLength(1, 2))
        );
    }
}
