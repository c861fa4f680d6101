use super::SchemeResult;
use crate::access::AccessAssignment;
use crate::error::{Error, Result};
use crate::gf2::BitMatrix;

/// Result of successive circuit removal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScrOutput {
    pub scheme: SchemeResult,
    /// Circuits removed in each pass, as row indices of that pass's input.
    pub circuits: Vec<Vec<Vec<usize>>>,
}

struct Pass {
    p: BitMatrix,
    // input row -> rows of p
    rows: Vec<Vec<usize>>,
    circuits: Vec<Vec<usize>>,
}

fn one_pass(g: &BitMatrix) -> Result<Pass> {
    let mut out = BitMatrix::empty(g.num_cols());
    let mut rows = vec![Vec::new(); g.num_rows()];
    let mut circuits = Vec::new();
    let mut remaining: Vec<usize> = (0..g.num_rows()).collect();
    while let Some(local) = g.select_rows(&remaining).find_circuit() {
        let circuit: Vec<usize> = local.iter().map(|&i| remaining[i]).collect();
        // The last member is the dependent one: it equals the full prefix sum.
        let r = circuit.len() - 1;
        let first = out.num_rows();
        let mut acc = g.row(circuit[0]).clone();
        for t in 0..r {
            if t > 0 {
                acc.xor_assign(g.row(circuit[t]));
            }
            out.push_row(acc.clone())?;
            rows[circuit[t]] = if t == 0 {
                vec![first]
            } else {
                vec![first + t - 1, first + t]
            };
        }
        rows[circuit[r]] = if r == 0 { Vec::new() } else { vec![first + r - 1] };
        remaining.retain(|i| !circuit.contains(i));
        circuits.push(circuit);
    }
    for i in remaining {
        rows[i] = vec![out.num_rows()];
        out.push_row(g.row(i).clone())?;
    }
    Ok(Pass { p: out, rows, circuits })
}

/// Successive circuit removal for `k = 2^q`: `q` passes, each replacing every
/// circuit found by the prefix sums of all but its last member.
pub fn scr(d: &BitMatrix, q: u32) -> Result<ScrOutput> {
    if q == 0 || q >= usize::BITS {
        return Err(Error::invalid(format!("q must be at least 1, got {q}")));
    }
    let mut current = d.clone();
    let mut clients: Vec<Vec<usize>> = (0..d.num_rows()).map(|i| vec![i]).collect();
    let mut circuits = Vec::new();
    for _ in 0..q {
        let pass = one_pass(&current)?;
        clients = clients
            .into_iter()
            .map(|via| {
                let mut used = vec![false; pass.p.num_rows()];
                for r in via {
                    for &s in &pass.rows[r] {
                        used[s] ^= true;
                    }
                }
                (0..used.len()).filter(|&s| used[s]).collect()
            })
            .collect();
        circuits.push(pass.circuits);
        current = pass.p;
    }
    Ok(ScrOutput {
        scheme: SchemeResult {
            p: current,
            assignment: AccessAssignment::new(clients),
            k: 1 << q,
        },
        circuits,
    })
}

/// [`scr`] for a `k` that must be a power of two.
pub fn scr_for_k(d: &BitMatrix, k: usize) -> Result<ScrOutput> {
    if k < 2 || !k.is_power_of_two() {
        return Err(Error::invalid(format!(
            "successive circuit removal needs k = 2^q with q >= 1, got {k}"
        )));
    }
    scr(d, k.trailing_zeros())
}
