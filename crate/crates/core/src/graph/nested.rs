use std::cmp::Reverse;

use super::{build_bipartite, SchemeResult};
use crate::access::AccessAssignment;
use crate::error::Result;
use crate::gf2::{BitMatrix, BitVector};

/// `T`-row scheme for instances whose outbound sets form a chain under
/// inclusion, or `None` when they do not.
///
/// Basis nodes feeding some dependent client are chained into prefix sums;
/// the rest stay as plain rows. Every client then adds at most two rows.
pub fn nested_scheme(d: &BitMatrix) -> Result<Option<SchemeResult>> {
    let model = build_bipartite(d)?;
    let t = model.t();
    let outbound: Vec<_> = (0..t).map(|u| model.outbound(u)).collect();
    let mut order: Vec<usize> = (0..t).collect();
    order.sort_by_key(|&u| Reverse(outbound[u].len()));
    if order.windows(2).any(|w| !outbound[w[1]].is_subset(&outbound[w[0]])) {
        return Ok(None);
    }
    let chain: Vec<usize> = order.iter().copied().filter(|&u| !outbound[u].is_empty()).collect();

    let mut p = BitMatrix::empty(t);
    let mut clients = vec![Vec::new(); d.num_rows()];
    // row of P holding the sum of the first i+1 chain nodes
    let mut prefix_row = Vec::with_capacity(chain.len());
    let mut acc = BitVector::zeros(t);
    for (i, &u) in chain.iter().enumerate() {
        acc.xor_assign(model.vector(u));
        prefix_row.push(p.num_rows());
        p.push_row(acc.clone())?;
        let client = model.basis_rows()[u];
        clients[client] = if i == 0 {
            vec![prefix_row[0]]
        } else {
            vec![prefix_row[i - 1], prefix_row[i]]
        };
    }
    for u in order.iter().copied().filter(|&u| outbound[u].is_empty()) {
        clients[model.basis_rows()[u]] = vec![p.num_rows()];
        p.push_row(model.vector(u).clone())?;
    }
    for (j, v) in model.dependents().iter().enumerate() {
        // Inclusion makes the inbound set a prefix of the chain.
        let depth = chain.iter().take_while(|&&u| outbound[u].contains(&j)).count();
        clients[v.row] = if depth == 0 {
            Vec::new()
        } else {
            vec![prefix_row[depth - 1]]
        };
    }
    Ok(Some(SchemeResult {
        p,
        assignment: AccessAssignment::new(clients),
        k: 2,
    }))
}
