//! Universal k-limited-access transformations.
//!
//! A scheme is a matrix `P` with `T` columns such that every coefficient
//! vector `d` (or, for the uncoded fallback, every client vector) is the sum
//! of at most `k` rows of `P`. The transformed code is `A_k = P A`. None of
//! the coded constructions look at `A`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;

use crate::access::AccessAssignment;
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};

/// Largest `P` that the builders will materialise.
pub const MAX_BUILD_ROWS: u128 = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SchemeMode {
    /// One row per client: each client reads exactly its own vector.
    Uncoded,
    /// `[I_T; 1_T]`, valid for `ceil(T/2) <= k`.
    Case1,
    /// Block-diagonal enumeration of all nonzero chunks.
    Case2,
    /// `P = I_T`, the conventional code.
    Identity,
}

impl fmt::Display for SchemeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeMode::Uncoded => "uncoded",
            SchemeMode::Case1 => "case1",
            SchemeMode::Case2 => "case2",
            SchemeMode::Identity => "identity",
        })
    }
}

/// Chunking used by the block-diagonal construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockLayout {
    /// Chunk width `ceil(T/k)`.
    pub width: usize,
    /// Number of full-width chunks.
    pub blocks: usize,
    /// Width of the trailing chunk, 0 when absent.
    pub remainder: usize,
}

impl BlockLayout {
    pub fn new(t: usize, k: usize) -> Self {
        let width = t.div_ceil(k);
        let blocks = t / width;
        Self {
            width,
            blocks,
            remainder: t - blocks * width,
        }
    }

    /// Number of rows `Q (2^w - 1) + 2^rem - 1`.
    pub fn rows(&self) -> u128 {
        self.blocks as u128 * ((1u128 << self.width) - 1) + ((1u128 << self.remainder) - 1)
    }

    fn block_offset(&self, block: usize) -> usize {
        block * ((1usize << self.width) - 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LimitedAccessScheme {
    k: usize,
    t: usize,
    p: BitMatrix,
    mode: SchemeMode,
    layout: Option<BlockLayout>,
    // Uncoded mode: client vector -> row.
    lookup: Option<BTreeMap<BitVector, usize>>,
}

impl LimitedAccessScheme {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn t_k(&self) -> usize {
        self.p.num_rows()
    }

    pub fn p(&self) -> &BitMatrix {
        &self.p
    }

    pub fn mode(&self) -> SchemeMode {
        self.mode
    }

    pub fn layout(&self) -> Option<BlockLayout> {
        self.layout
    }

    /// Rows of `P` (0-based, sorted) that add up to `d`.
    pub fn reconstruct(&self, d: &BitVector) -> Result<Vec<usize>> {
        if d.len() != self.t {
            return Err(Error::DimensionMismatch {
                expected: self.t,
                actual: d.len(),
            });
        }
        match self.mode {
            SchemeMode::Identity => Ok(d.iter_ones().collect()),
            SchemeMode::Case1 => Ok(reconstruct_case1(d)),
            SchemeMode::Case2 => Ok(reconstruct_case2(self.layout.expect("case2 schemes carry a layout"), d)),
            SchemeMode::Uncoded => {
                if d.is_zero() {
                    return Ok(Vec::new());
                }
                self.lookup
                    .as_ref()
                    .and_then(|l| l.get(d))
                    .map(|&r| vec![r])
                    .ok_or_else(|| Error::Infeasible(format!("vector {d} is not served by the uncoded scheme")))
            }
        }
    }

    /// Runs [`reconstruct`](Self::reconstruct) for every row of `clients`.
    pub fn assign(&self, clients: &BitMatrix) -> Result<AccessAssignment> {
        let rows = clients
            .rows()
            .iter()
            .map(|d| self.reconstruct(d))
            .collect::<Result<Vec<_>>>()?;
        Ok(AccessAssignment::new(rows))
    }

    /// `A_k = P A`.
    pub fn transform(&self, a: &BitMatrix) -> Result<BitMatrix> {
        self.p.mul(a)
    }
}

fn check_k(t: usize, k: usize) -> Result<()> {
    if k == 0 || k > t {
        return Err(Error::invalid(format!("need 1 <= k <= T, got k={k}, T={t}")));
    }
    Ok(())
}

fn sum_binomials(t: u64, k: u64) -> BigUint {
    let mut total = BigUint::default();
    let mut c = BigUint::one();
    for i in 1..=k {
        if i > t {
            break;
        }
        c = c * BigUint::from(t - i + 1) / BigUint::from(i);
        total += &c;
    }
    total
}

/// Smallest number of rows that can serve `n` distinct client vectors of a
/// rank-`t` code when each client adds at most `k` rows:
/// `max(T, min{x : C(x,1) + ... + C(x,k) >= n})`.
pub fn lower_bound_tk(t: u64, n: u64, k: u64) -> Result<u64> {
    if k == 0 || k > t {
        return Err(Error::invalid(format!("need 1 <= k <= T, got k={k}, T={t}")));
    }
    if n == 0 {
        return Err(Error::invalid("need n >= 1"));
    }
    Ok(counting_rows(n, k).max(t))
}

/// Smallest `x` with `C(x,1) + ... + C(x,k) >= n`: fewer rows cannot produce
/// `n` distinct nonzero sums of at most `k` of them.
pub fn counting_rows(n: u64, k: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let target = BigUint::from(n);
    // sum_binomials(n, k) >= n, so the answer lies in [1, n].
    let (mut lo, mut hi) = (1u64, n);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if sum_binomials(mid, k.max(1)) >= target {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// `P = [I_T; 1_T]`: `T + 1` rows, every vector reachable with `ceil(T/2)` rows.
pub fn build_case1(t: usize) -> Result<LimitedAccessScheme> {
    if t < 2 {
        return Err(Error::invalid(format!("case 1 needs T >= 2, got {t}")));
    }
    let mut p = BitMatrix::identity(t);
    p.push_row(BitVector::ones(t))?;
    Ok(LimitedAccessScheme {
        k: t.div_ceil(2),
        t,
        p,
        mode: SchemeMode::Case1,
        layout: None,
        lookup: None,
    })
}

/// Light vectors use their own support; heavy ones use the complement plus
/// the all-ones row (index `T`).
pub fn reconstruct_case1(d: &BitVector) -> Vec<usize> {
    let t = d.len();
    if d.weight() <= t.div_ceil(2) {
        d.iter_ones().collect()
    } else {
        let mut rows: Vec<usize> = d.complement().iter_ones().collect();
        rows.push(t);
        rows
    }
}

/// Block-diagonal `P` whose blocks list every nonzero chunk pattern in
/// increasing binary value.
///
/// Any `1 <= k <= T` gives a valid scheme; `build_scheme` only selects it
/// for `k < ceil(T/2)`.
pub fn build_case2(t: usize, k: usize) -> Result<LimitedAccessScheme> {
    check_k(t, k)?;
    let layout = BlockLayout::new(t, k);
    if layout.rows() > MAX_BUILD_ROWS {
        return Err(Error::Refused(format!(
            "case 2 scheme for T={t}, k={k} has {} rows",
            layout.rows()
        )));
    }
    let mut p = BitMatrix::empty(t);
    let chunk_widths =
        std::iter::repeat_n(layout.width, layout.blocks).chain((layout.remainder > 0).then_some(layout.remainder));
    let mut start = 0;
    for w in chunk_widths {
        for value in 1u64..(1u64 << w) {
            let mut row = BitVector::zeros(t);
            for bit in 0..w {
                if (value >> (w - 1 - bit)) & 1 == 1 {
                    row.set(start + bit, true);
                }
            }
            p.push_row(row)?;
        }
        start += w;
    }
    Ok(LimitedAccessScheme {
        k,
        t,
        p,
        mode: SchemeMode::Case2,
        layout: Some(layout),
        lookup: None,
    })
}

/// One row per nonzero chunk of `d`; the row index is the block offset plus
/// the chunk's binary value minus one.
pub fn reconstruct_case2(layout: BlockLayout, d: &BitVector) -> Vec<usize> {
    let mut rows = Vec::new();
    let chunks = (0..layout.blocks)
        .map(|b| (b, b * layout.width, layout.width))
        .chain((layout.remainder > 0).then_some((layout.blocks, layout.blocks * layout.width, layout.remainder)));
    for (block, start, width) in chunks {
        let value = d.slice(start, width).to_u64() as usize;
        if value != 0 {
            rows.push(layout.block_offset(block) + value - 1);
        }
    }
    rows
}

/// Mode and size that [`build_scheme`] would pick.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SchemePlan {
    pub mode: SchemeMode,
    pub t_k: u128,
}

/// Size of the coded construction for `(T, k)`, ignoring the uncoded fallback.
pub fn coded_plan(t: usize, k: usize) -> Result<SchemePlan> {
    check_k(t, k)?;
    if t > 64 {
        return Err(Error::invalid(format!("T up to 64 supported, got {t}")));
    }
    Ok(if k >= t {
        SchemePlan {
            mode: SchemeMode::Identity,
            t_k: t as u128,
        }
    } else if k >= t.div_ceil(2) {
        SchemePlan {
            mode: SchemeMode::Case1,
            t_k: t as u128 + 1,
        }
    } else {
        SchemePlan {
            mode: SchemeMode::Case2,
            t_k: BlockLayout::new(t, k).rows(),
        }
    })
}

/// Picks the smallest admissible construction for `n` clients: the coded
/// one for the regime of `k`, or `n` uncoded rows when that is strictly
/// smaller.
pub fn plan_scheme(t: usize, n: u64, k: usize) -> Result<SchemePlan> {
    let coded = coded_plan(t, k)?;
    Ok(if (n as u128) < coded.t_k {
        SchemePlan {
            mode: SchemeMode::Uncoded,
            t_k: n as u128,
        }
    } else {
        coded
    })
}

/// Builds the scheme chosen by [`plan_scheme`]. The uncoded fallback needs the
/// client coefficient vectors, which become the rows of `P`.
pub fn build_scheme(t: usize, n: u64, k: usize, clients: Option<&BitMatrix>) -> Result<LimitedAccessScheme> {
    let plan = plan_scheme(t, n, k)?;
    match plan.mode {
        SchemeMode::Identity => Ok(LimitedAccessScheme {
            k,
            t,
            p: BitMatrix::identity(t),
            mode: SchemeMode::Identity,
            layout: None,
            lookup: None,
        }),
        SchemeMode::Case1 => {
            let mut s = build_case1(t)?;
            s.k = k;
            Ok(s)
        }
        SchemeMode::Case2 => build_case2(t, k),
        SchemeMode::Uncoded => {
            let clients = clients.ok_or_else(|| {
                Error::invalid(format!(
                    "n={n} is below the coded size, the uncoded scheme needs the client vectors"
                ))
            })?;
            if clients.num_cols() != t || clients.num_rows() as u64 != n {
                return Err(Error::invalid(format!(
                    "client matrix is {}x{}, expected {n}x{t}",
                    clients.num_rows(),
                    clients.num_cols()
                )));
            }
            let mut lookup = BTreeMap::new();
            for (i, d) in clients.rows().iter().enumerate() {
                lookup.entry(d.clone()).or_insert(i);
            }
            Ok(LimitedAccessScheme {
                k,
                t,
                p: clients.clone(),
                mode: SchemeMode::Uncoded,
                layout: None,
                lookup: Some(lookup),
            })
        }
    }
}

/// A scheme restricted to the rows its clients actually use.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrunedScheme {
    /// The retained rows of `P`, in original order.
    pub p: BitMatrix,
    /// Original index of each retained row.
    pub kept: Vec<usize>,
    /// Assignment re-indexed into `p`.
    pub assignment: AccessAssignment,
}

impl PrunedScheme {
    pub fn t_k(&self) -> usize {
        self.p.num_rows()
    }
}

/// Drops every row of `scheme` that no client references.
pub fn prune_used_rows(scheme: &LimitedAccessScheme, clients: &BitMatrix) -> Result<PrunedScheme> {
    let full = scheme.assign(clients)?;
    let mut used = vec![false; scheme.t_k()];
    for rows in full.iter() {
        for &r in rows {
            used[r] = true;
        }
    }
    let kept: Vec<usize> = (0..scheme.t_k()).filter(|&r| used[r]).collect();
    let mut new_index = vec![usize::MAX; scheme.t_k()];
    for (j, &r) in kept.iter().enumerate() {
        new_index[r] = j;
    }
    let assignment = AccessAssignment::new(
        full.iter()
            .map(|rows| rows.iter().map(|&r| new_index[r]).collect())
            .collect(),
    );
    Ok(PrunedScheme {
        p: scheme.p().select_rows(&kept),
        kept,
        assignment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    fn one_based(rows: Vec<usize>) -> Vec<usize> {
        rows.into_iter().map(|r| r + 1).collect()
    }

    #[test]
    fn lower_bound_examples() {
        assert_eq!(lower_bound_tk(4, 15, 2).unwrap(), 5);
        assert_eq!(lower_bound_tk(3, 7, 1).unwrap(), 7);
        assert_eq!(lower_bound_tk(20, 20, 20).unwrap(), 20);
        assert!(lower_bound_tk(3, 7, 0).is_err());
        assert!(lower_bound_tk(3, 7, 4).is_err());
    }

    #[test]
    fn lower_bound_handles_64_bit_sizes() {
        let n = u64::MAX; // 2^64 - 1
        assert_eq!(lower_bound_tk(64, n, 63).unwrap(), 65);
        assert_eq!(lower_bound_tk(64, n, 1).unwrap(), n);
    }

    #[test]
    fn case1_matrices() {
        let s = build_case1(4).unwrap();
        assert_eq!(
            s.p(),
            &BitMatrix::from_strs(&["1000", "0100", "0010", "0001", "1111"]).unwrap()
        );
        assert_eq!(
            build_case1(2).unwrap().p(),
            &BitMatrix::from_strs(&["10", "01", "11"]).unwrap()
        );
        assert_eq!(
            build_case1(3).unwrap().p(),
            &BitMatrix::from_strs(&["100", "010", "001", "111"]).unwrap()
        );
        assert!(build_case1(1).is_err());
    }

    #[test]
    fn case1_reconstruction_examples() {
        assert_eq!(reconstruct_case1(&v("1100")), vec![0, 1]);
        assert_eq!(reconstruct_case1(&v("1110")), vec![3, 4]);
        assert_eq!(reconstruct_case1(&v("1000")), vec![0]);
        assert_eq!(reconstruct_case1(&v("0000")), Vec::<usize>::new());
    }

    #[test]
    fn case2_fixture_t8_k3() {
        let s = build_case2(8, 3).unwrap();
        let layout = s.layout().unwrap();
        assert_eq!((layout.width, layout.blocks, layout.remainder), (3, 2, 2));
        assert_eq!(s.t_k(), 17);
        let z1 = ["001", "010", "011", "100", "101", "110", "111"];
        for (i, pat) in z1.iter().enumerate() {
            assert_eq!(s.p().row(i).to_string(), format!("{pat}00000"));
            assert_eq!(s.p().row(7 + i).to_string(), format!("000{pat}00"));
        }
        for (i, pat) in ["01", "10", "11"].iter().enumerate() {
            assert_eq!(s.p().row(14 + i).to_string(), format!("000000{pat}"));
        }
        assert_eq!(one_based(s.reconstruct(&v("01001110")).unwrap()), vec![2, 10, 16]);
    }

    #[test]
    fn case2_small_cases() {
        let s = build_case2(4, 2).unwrap();
        assert_eq!(s.t_k(), 6);
        assert_eq!(s.layout().unwrap().remainder, 0);
        assert_eq!(one_based(s.reconstruct(&v("1101")).unwrap()), vec![3, 4]);
        assert_eq!(s.reconstruct(&v("0000")).unwrap(), Vec::<usize>::new());

        let s = build_case2(2, 1).unwrap();
        assert_eq!(s.p(), &BitMatrix::from_strs(&["01", "10", "11"]).unwrap());
        assert!(build_case2(4, 0).is_err());
        assert!(build_case2(4, 5).is_err());
    }

    #[test]
    fn build_scheme_selection() {
        let s = build_scheme(20, (1 << 20) - 1, 10, None).unwrap();
        assert_eq!((s.mode(), s.t_k()), (SchemeMode::Case1, 21));

        let clients = crate::instance::random_coefficient_instance(20, 15, 1).unwrap();
        let s = build_scheme(20, 15, 10, Some(&clients)).unwrap();
        assert_eq!((s.mode(), s.t_k()), (SchemeMode::Uncoded, 15));
        assert!(build_scheme(20, 15, 10, None).is_err());
        let a = s.assign(&clients).unwrap();
        a.validate(s.p(), &clients, 1).unwrap();

        let s = build_scheme(20, 400, 20, None).unwrap();
        assert_eq!((s.mode(), s.t_k()), (SchemeMode::Identity, 20));
        assert_eq!(s.p(), &BitMatrix::identity(20));
    }

    #[test]
    fn prune_examples() {
        let s = build_case2(4, 2).unwrap();
        let d = BitMatrix::from_strs(&["1100", "0011"]).unwrap();
        let pruned = prune_used_rows(&s, &d).unwrap();
        assert_eq!(pruned.t_k(), 2);
        assert_eq!(pruned.p, BitMatrix::from_strs(&["1100", "0011"]).unwrap());
        pruned.assignment.validate(&pruned.p, &d, 2).unwrap();

        let s = build_case1(5).unwrap();
        let d = BitMatrix::from_strs(&["10000"]).unwrap();
        assert_eq!(prune_used_rows(&s, &d).unwrap().t_k(), 1);
    }
}
