//! Schemes that exploit the structure of the client vectors.
//!
//! All constructions work in coefficient space: the input `D` holds one
//! client vector per row over `F_2^T`, and the output rows form `P`.

mod bipartite;
mod branch;
mod cover;
mod nested;
mod scr;
mod search;

pub use bipartite::{build_bipartite, BipartiteModel, DependentNode, Intermediate};
pub use branch::{branch_pass, BranchOutput, BranchStep};
pub use nested::nested_scheme;
pub use scr::{scr, scr_for_k, ScrOutput};
pub use search::{oracle_min_tk, search_min_subset, SearchLimits, SearchOutcome, ORACLE_MAX_T, SEARCH_MAX_T};

use crate::access::AccessAssignment;
use crate::error::Result;
use crate::gf2::BitMatrix;

/// Rows of `P` plus the rows each client adds up.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemeResult {
    pub p: BitMatrix,
    pub assignment: AccessAssignment,
    pub k: usize,
}

impl SchemeResult {
    /// `T_k`.
    pub fn size(&self) -> usize {
        self.p.num_rows()
    }

    pub fn validate(&self, d: &BitMatrix) -> Result<()> {
        self.assignment.validate(&self.p, d, self.k)
    }
}

/// `T (floor(n / (T+1)) + 1)`.
pub fn scr_worst_case(t: usize, n: usize) -> usize {
    t * (n / (t + 1) + 1)
}

/// `2 floor(n / 3)`.
pub fn scr_best_case(n: usize) -> usize {
    2 * (n / 3)
}

/// Six unit vectors followed by `111100`, `111010` and `110011`.
///
/// The three dependent clients overlap so that no ordering of the basis
/// nests the outbound sets, yet six rows suffice for `k = 2`.
pub fn overlapping_example() -> BitMatrix {
    let mut rows: Vec<String> = (0..6)
        .map(|i| (0..6).map(|j| if i == j { '1' } else { '0' }).collect())
        .collect();
    rows.extend(["111100", "111010", "110011"].map(String::from));
    let refs: Vec<&str> = rows.iter().map(String::as_str).collect();
    BitMatrix::from_strs(&refs).expect("fixed fixture")
}
