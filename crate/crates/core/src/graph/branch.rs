use std::cmp::Reverse;
use std::collections::BTreeSet;

use super::{build_bipartite, BipartiteModel};
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};

/// One iteration of the branch loop.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchStep {
    /// Dependent node that was split.
    pub dependent: usize,
    /// Its inbound nodes in branch order.
    pub order: Vec<usize>,
    /// Dependent nodes rewired onto the new branch.
    pub rewired: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct BranchOutput {
    /// Candidate rows: the basis, the branch nodes, then the dependent
    /// vectors, duplicates removed.
    pub candidates: BitMatrix,
    pub model: BipartiteModel,
    pub steps: Vec<BranchStep>,
}

impl BranchOutput {
    pub fn iterations(&self) -> usize {
        self.steps.len()
    }

    pub fn intermediate_count(&self) -> usize {
        self.model.intermediates().len()
    }

    pub fn max_dependent_degree(&self) -> usize {
        self.model
            .dependents()
            .iter()
            .map(|v| v.inbound.len())
            .max()
            .unwrap_or(0)
    }
}

/// Splits high-degree dependent nodes with branches until every dependent
/// node has at most `k` inbound nodes.
///
/// Each round takes the dependent node of highest degree (lowest index on
/// ties), orders its inbound nodes by decreasing out-degree (lowest id on
/// ties) and branches on them. Any dependent node of degree at least `k`
/// whose inbound set meets the branched set in exactly a prefix of length
/// `l >= 2` swaps that prefix for the branch node holding its sum.
pub fn branch_pass(d: &BitMatrix, k: usize) -> Result<BranchOutput> {
    if k < 2 {
        return Err(Error::invalid(format!("branching needs k >= 2, got {k}")));
    }
    let mut model = build_bipartite(d)?;
    let mut steps = Vec::new();
    loop {
        let pick = model
            .dependents()
            .iter()
            .enumerate()
            .filter(|(_, v)| v.inbound.len() > k)
            .min_by_key(|(j, v)| (Reverse(v.inbound.len()), *j))
            .map(|(j, _)| j);
        let Some(i) = pick else { break };
        let mut order = model.inbound(i).to_vec();
        order.sort_by_cached_key(|&s| (Reverse(model.out_degree(s)), s));
        let created = model.make_branch(&order)?;
        let chosen: BTreeSet<usize> = order.iter().copied().collect();
        let mut rewired = Vec::new();
        for j in 0..model.dependents().len() {
            let inbound = model.inbound(j);
            if inbound.len() < k {
                continue;
            }
            let common: BTreeSet<usize> = inbound.iter().copied().filter(|s| chosen.contains(s)).collect();
            let l = common.len();
            if l < 2 || !order[..l].iter().all(|s| common.contains(s)) {
                continue;
            }
            let mut next: Vec<usize> = inbound.iter().copied().filter(|s| !common.contains(s)).collect();
            next.push(created[l - 2]);
            model.set_inbound(j, next);
            rewired.push(j);
        }
        steps.push(BranchStep {
            dependent: i,
            order,
            rewired,
        });
    }
    let mut seen = BTreeSet::new();
    let rows: Vec<BitVector> = (0..model.num_nodes())
        .map(|s| model.vector(s))
        .chain(model.dependents().iter().map(|v| &v.vector))
        .filter(|v| !v.is_zero() && seen.insert((*v).clone()))
        .cloned()
        .collect();
    Ok(BranchOutput {
        candidates: BitMatrix::from_rows(model.t(), rows)?,
        model,
        steps,
    })
}
