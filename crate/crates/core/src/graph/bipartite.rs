use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector, Insertion, RowReducer};

/// A branch node: the sum of its two parents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Intermediate {
    pub parents: (usize, usize),
    pub vector: BitVector,
}

/// A dependent client vector and the nodes it is currently wired to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependentNode {
    /// Row of the client matrix.
    pub row: usize,
    pub vector: BitVector,
    /// Inbound node ids, sorted.
    pub inbound: Vec<usize>,
}

/// Bipartite view of a client matrix `D` of rank `T`.
///
/// Node ids `0..T` are the basis rows, in the order forward elimination
/// keeps them; branch nodes get ids `T, T+1, ...` as they are created.
/// Dependent nodes are indexed separately, in row order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteModel {
    t: usize,
    basis_rows: Vec<usize>,
    vectors: Vec<BitVector>,
    intermediates: Vec<Intermediate>,
    dependents: Vec<DependentNode>,
}

impl BipartiteModel {
    pub fn t(&self) -> usize {
        self.t
    }

    /// Rows of `D` used as the independent nodes.
    pub fn basis_rows(&self) -> &[usize] {
        &self.basis_rows
    }

    pub fn num_nodes(&self) -> usize {
        self.vectors.len()
    }

    pub fn vector(&self, node: usize) -> &BitVector {
        &self.vectors[node]
    }

    pub fn intermediates(&self) -> &[Intermediate] {
        &self.intermediates
    }

    pub fn dependents(&self) -> &[DependentNode] {
        &self.dependents
    }

    pub fn inbound(&self, dependent: usize) -> &[usize] {
        &self.dependents[dependent].inbound
    }

    /// Dependent nodes wired to `node`.
    pub fn outbound(&self, node: usize) -> BTreeSet<usize> {
        self.dependents
            .iter()
            .enumerate()
            .filter(|(_, v)| v.inbound.binary_search(&node).is_ok())
            .map(|(j, _)| j)
            .collect()
    }

    pub fn out_degree(&self, node: usize) -> usize {
        self.dependents
            .iter()
            .filter(|v| v.inbound.binary_search(&node).is_ok())
            .count()
    }

    /// Adds the chain of prefix sums over `order`. Returns the new node ids;
    /// the `i`-th one holds the sum of the first `i + 2` nodes.
    pub fn make_branch(&mut self, order: &[usize]) -> Result<Vec<usize>> {
        if order.len() < 2 {
            return Err(Error::invalid("a branch needs at least two nodes"));
        }
        if let Some(&bad) = order.iter().find(|&&s| s >= self.vectors.len()) {
            return Err(Error::invalid(format!("unknown node {bad}")));
        }
        let mut created = Vec::with_capacity(order.len() - 1);
        let mut prev = order[0];
        for &next in &order[1..] {
            let vector = self.vectors[prev].xor(&self.vectors[next]);
            let id = self.vectors.len();
            self.vectors.push(vector.clone());
            self.intermediates.push(Intermediate {
                parents: (prev, next),
                vector,
            });
            created.push(id);
            prev = id;
        }
        Ok(created)
    }

    /// Rewires dependent node `j` to `inbound`.
    pub(crate) fn set_inbound(&mut self, j: usize, mut inbound: Vec<usize>) {
        inbound.sort_unstable();
        self.dependents[j].inbound = inbound;
    }

    /// Checks that every dependent vector is the sum of its inbound nodes and
    /// every branch node the sum of its parents.
    pub fn check(&self) -> bool {
        let deps_ok = self.dependents.iter().all(|v| {
            let mut acc = BitVector::zeros(self.t);
            for &s in &v.inbound {
                acc.xor_assign(&self.vectors[s]);
            }
            acc == v.vector
        });
        let branches_ok = self
            .intermediates
            .iter()
            .all(|b| self.vectors[b.parents.0].xor(&self.vectors[b.parents.1]) == b.vector);
        deps_ok && branches_ok
    }
}

/// Splits `d` into a basis and dependent rows and wires each dependent row to
/// the basis rows in its unique expansion.
pub fn build_bipartite(d: &BitMatrix) -> Result<BipartiteModel> {
    let t = d.num_cols();
    let mut red = RowReducer::tracking(t, d.num_rows());
    let mut basis_rows = Vec::new();
    let mut dependent_rows = Vec::new();
    for (i, row) in d.rows().iter().enumerate() {
        match red.insert(row) {
            Insertion::Independent => basis_rows.push(i),
            Insertion::Dependent(_) => dependent_rows.push(i),
        }
    }
    if basis_rows.len() != t {
        return Err(Error::invalid(format!(
            "client matrix has rank {} but {t} columns",
            basis_rows.len()
        )));
    }
    let basis = d.select_rows(&basis_rows);
    let mut seen = BTreeSet::new();
    if let Some(dup) = d.rows().iter().position(|r| !seen.insert(r.clone())) {
        return Err(Error::invalid(format!("client row {} repeats an earlier row", dup + 1)));
    }
    let dependents = dependent_rows
        .into_iter()
        .map(|row| {
            let coeffs = basis.solve_row(d.row(row))?.expect("basis spans every row");
            Ok(DependentNode {
                row,
                vector: d.row(row).clone(),
                inbound: coeffs.iter_ones().collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BipartiteModel {
        t,
        vectors: basis.into_rows(),
        basis_rows,
        intermediates: Vec::new(),
        dependents,
    })
}
