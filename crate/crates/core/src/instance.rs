//! Index coding instances, fitting matrices and their completion into a
//! coding matrix.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};

/// Requests and side information of `n` clients over `m` messages.
///
/// Message indices are 0-based here and 1-based in the text format.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexCodingInstance {
    m: usize,
    requests: Vec<usize>,
    side_info: Vec<BTreeSet<usize>>,
}

impl IndexCodingInstance {
    pub fn new(m: usize, requests: Vec<usize>, side_info: Vec<BTreeSet<usize>>) -> Result<Self> {
        let n = requests.len();
        if side_info.len() != n {
            return Err(Error::invalid(format!(
                "{n} requests but {} side-information sets",
                side_info.len()
            )));
        }
        if m < n {
            return Err(Error::invalid(format!("need m >= n, got m={m}, n={n}")));
        }
        for (i, (&q, s)) in requests.iter().zip(&side_info).enumerate() {
            if q >= m {
                return Err(Error::invalid(format!(
                    "client {}: request {} out of range",
                    i + 1,
                    q + 1
                )));
            }
            if s.contains(&q) {
                return Err(Error::invalid(format!(
                    "client {}: requested message {} is in its side information",
                    i + 1,
                    q + 1
                )));
            }
            if let Some(&bad) = s.iter().find(|&&j| j >= m) {
                return Err(Error::invalid(format!(
                    "client {}: side-information message {} out of range",
                    i + 1,
                    bad + 1
                )));
            }
        }
        Ok(Self { m, requests, side_info })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.requests.len()
    }

    pub fn request(&self, client: usize) -> usize {
        self.requests[client]
    }

    pub fn requests(&self) -> &[usize] {
        &self.requests
    }

    pub fn side_info(&self, client: usize) -> &BTreeSet<usize> {
        &self.side_info[client]
    }

    /// Parses `m n` followed by `n` lines `q : s1 s2 ...` (1-based).
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing header line \"m n\"".into(),
        })?;
        let nums = parse_numbers(header, hline)?;
        let [m, n] = nums[..] else {
            return Err(Error::Parse {
                line: hline,
                message: "header must be \"m n\"".into(),
            });
        };
        let mut requests = Vec::with_capacity(n);
        let mut side_info = Vec::with_capacity(n);
        for (lineno, line) in lines {
            let (q, rest) = line.split_once(':').ok_or(Error::Parse {
                line: lineno,
                message: "expected \"q : s1 s2 ...\"".into(),
            })?;
            let q = parse_numbers(q, lineno)?;
            let [q] = q[..] else {
                return Err(Error::Parse {
                    line: lineno,
                    message: "exactly one requested message expected".into(),
                });
            };
            let s = parse_numbers(rest, lineno)?;
            if q == 0 || s.contains(&0) {
                return Err(Error::Parse {
                    line: lineno,
                    message: "message indices are 1-based".into(),
                });
            }
            requests.push(q - 1);
            side_info.push(s.into_iter().map(|x| x - 1).collect());
        }
        if requests.len() != n {
            return Err(Error::invalid(format!(
                "header announces {n} clients, found {}",
                requests.len()
            )));
        }
        Self::new(m, requests, side_info)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.m, self.n());
        for (q, si) in self.requests.iter().zip(&self.side_info) {
            let _ = write!(s, "{} :", q + 1);
            for j in si {
                let _ = write!(s, " {}", j + 1);
            }
            s.push('\n');
        }
        s
    }
}

fn parse_numbers(s: &str, line: usize) -> Result<Vec<usize>> {
    s.split_whitespace()
        .map(|t| {
            t.parse::<usize>().map_err(|e| Error::Parse {
                line,
                message: format!("{t:?}: {e}"),
            })
        })
        .collect()
}

/// The 0/1/free pattern of admissible coding rows.
///
/// `known` holds the forced entries (a single 1 at the request), `star_mask`
/// marks the free entries, which are exactly the side-information columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FittingMatrix {
    pub known: BitMatrix,
    pub star_mask: BitMatrix,
    instance: IndexCodingInstance,
}

impl FittingMatrix {
    pub fn instance(&self) -> &IndexCodingInstance {
        &self.instance
    }

    /// Whether `g` fits row `client` of the pattern.
    pub fn admits(&self, client: usize, g: &BitVector) -> bool {
        let known = self.known.row(client);
        let star = self.star_mask.row(client);
        g.len() == known.len() && (0..g.len()).all(|j| star.get(j) || g.get(j) == known.get(j))
    }
}

pub fn build_fitting_matrix(inst: &IndexCodingInstance) -> FittingMatrix {
    let (m, n) = (inst.m(), inst.n());
    let mut known = BitMatrix::zeros(n, m);
    let mut star_mask = BitMatrix::zeros(n, m);
    for i in 0..n {
        known.set(i, inst.request(i), true);
        for &j in inst.side_info(i) {
            star_mask.set(i, j, true);
        }
    }
    FittingMatrix {
        known,
        star_mask,
        instance: inst.clone(),
    }
}

/// How the free entries of a fitting matrix are filled.
#[derive(Clone, Debug)]
pub enum CompletionPolicy {
    /// Every free entry becomes 0.
    Zeros,
    /// A completed `G` produced elsewhere.
    External(BitMatrix),
}

/// A completed fitting matrix `G` with a coding matrix `A` spanning its rows.
#[derive(Clone, Debug)]
pub struct CodingSetup {
    pub g: BitMatrix,
    pub a: BitMatrix,
    instance: IndexCodingInstance,
}

impl CodingSetup {
    pub fn t(&self) -> usize {
        self.a.num_rows()
    }

    pub fn instance(&self) -> &IndexCodingInstance {
        &self.instance
    }

    /// Coefficient vectors `d_i` with `d_i * A = g_i`, one row per client.
    pub fn coefficients(&self) -> BitMatrix {
        let rows = self
            .g
            .rows()
            .iter()
            .map(|g| {
                self.a
                    .solve_row(g)
                    .expect("width checked at construction")
                    .expect("every row of G lies in the row space of A")
            })
            .collect();
        BitMatrix::from_rows(self.t(), rows).expect("solutions have width T")
    }

    /// Derives `G` from an externally designed full-rank coding matrix `A`.
    ///
    /// For each client this finds a row of the span of `A` with a 1 at the
    /// request and zeros outside the side information. Unlike [`complete`],
    /// two clients may end up with the same row (the two-transmission code
    /// for the four-client example does exactly that).
    pub fn from_coding_matrix(inst: &IndexCodingInstance, a: BitMatrix) -> Result<Self> {
        if a.num_cols() != inst.m() {
            return Err(Error::DimensionMismatch {
                expected: inst.m(),
                actual: a.num_cols(),
            });
        }
        if a.rank() != a.num_rows() {
            return Err(Error::invalid("coding matrix must have full row rank"));
        }
        let mut g = BitMatrix::empty(inst.m());
        for i in 0..inst.n() {
            let q = inst.request(i);
            let side = inst.side_info(i);
            // Columns that must read 1 (the request) or 0 (everything unknown).
            let constrained: Vec<usize> = (0..inst.m()).filter(|j| !side.contains(j)).collect();
            let target = BitVector::from_indices(constrained.len(), constrained.iter().position(|&j| j == q));
            let d = a.select_columns(&constrained).solve_row(&target)?.ok_or_else(|| {
                Error::invalid(format!(
                    "client {} cannot decode message {} from the given coding matrix",
                    i + 1,
                    q + 1
                ))
            })?;
            g.push_row(a.combine(&d)?)?;
        }
        Ok(Self {
            g,
            a,
            instance: inst.clone(),
        })
    }
}

/// Fills the free entries of `fm` and extracts a coding matrix.
///
/// Completed rows must be pairwise distinct.
pub fn complete(fm: &FittingMatrix, policy: CompletionPolicy) -> Result<CodingSetup> {
    let g = match policy {
        CompletionPolicy::Zeros => fm.known.clone(),
        CompletionPolicy::External(g) => {
            if g.num_rows() != fm.known.num_rows() || g.num_cols() != fm.known.num_cols() {
                return Err(Error::invalid(format!(
                    "external G is {}x{}, fitting matrix is {}x{}",
                    g.num_rows(),
                    g.num_cols(),
                    fm.known.num_rows(),
                    fm.known.num_cols()
                )));
            }
            if let Some(i) = (0..g.num_rows()).find(|&i| !fm.admits(i, g.row(i))) {
                return Err(Error::invalid(format!(
                    "row {} of external G violates the fitting pattern",
                    i + 1
                )));
            }
            g
        }
    };
    let mut seen = HashSet::new();
    for (i, r) in g.rows().iter().enumerate() {
        if !seen.insert(r) {
            return Err(Error::CompletionRejected(format!(
                "row {} duplicates an earlier row ({r})",
                i + 1
            )));
        }
    }
    let a = g.row_basis();
    Ok(CodingSetup {
        g,
        a,
        instance: fm.instance.clone(),
    })
}

fn check_sample_size(t: usize, n: usize) -> Result<u64> {
    if t == 0 || t > 63 {
        return Err(Error::invalid(format!("T must be in 1..=63, got {t}")));
    }
    let total = (1u64 << t) - 1;
    if n == 0 || n as u64 > total {
        return Err(Error::invalid(format!("need 1 <= n <= 2^T - 1 = {total}, got n = {n}")));
    }
    Ok(total)
}

fn sample_distinct(rng: &mut ChaCha8Rng, t: usize, n: usize, total: u64) -> BitMatrix {
    let values: Vec<u64> = if total <= (1 << 26) {
        index::sample(rng, total as usize, n)
            .into_iter()
            .map(|i| i as u64 + 1)
            .collect()
    } else {
        let mut seen = HashSet::with_capacity(n);
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let v = rng.random_range(1..=total);
            if seen.insert(v) {
                out.push(v);
            }
        }
        out
    };
    BitMatrix::from_u64_rows(t, &values)
}

/// `n` distinct nonzero coefficient vectors of width `t`, drawn uniformly
/// without replacement.
pub fn random_coefficient_instance(t: usize, n: usize, seed: u64) -> Result<BitMatrix> {
    let total = check_sample_size(t, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample_distinct(&mut rng, t, n, total))
}

/// Like [`random_coefficient_instance`] but redraws until the rows span the
/// whole space, so the instance really needs `t` transmissions.
pub fn random_full_rank_instance(t: usize, n: usize, seed: u64) -> Result<BitMatrix> {
    let total = check_sample_size(t, n)?;
    if n < t {
        return Err(Error::invalid(format!("full rank needs n >= T ({n} < {t})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let d = sample_distinct(&mut rng, t, n, total);
        if d.rank() == t {
            return Ok(d);
        }
    }
}

/// A random instance together with a consistent code of `t` transmissions.
///
/// Draws a full-rank `t x m` coding matrix and `n` distinct full-rank
/// coefficient vectors, then reads each client's request and side information
/// off its row `g_i = d_i A`; a few unrelated messages are added to the side
/// information as well.
pub fn synthesize_instance(t: usize, n: usize, m: usize, seed: u64) -> Result<(IndexCodingInstance, CodingSetup)> {
    if m < n || m < t {
        return Err(Error::invalid(format!("need m >= n and m >= T (m={m}, n={n}, T={t})")));
    }
    let d = random_full_rank_instance(t, n, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let a = loop {
        let rows = (0..t)
            .map(|_| BitVector::from_bools(&(0..m).map(|_| rng.random_bool(0.5)).collect::<Vec<_>>()))
            .collect();
        let a = BitMatrix::from_rows(m, rows)?;
        if a.rank() == t {
            break a;
        }
    };
    let g = d.mul(&a)?;
    let mut requests = Vec::with_capacity(n);
    let mut side_info = Vec::with_capacity(n);
    for row in g.rows() {
        let support: Vec<usize> = row.iter_ones().collect();
        let q = support[rng.random_range(0..support.len())];
        let mut s: BTreeSet<usize> = support.into_iter().filter(|&j| j != q).collect();
        for _ in 0..rng.random_range(0..3) {
            let extra = rng.random_range(0..m);
            if extra != q {
                s.insert(extra);
            }
        }
        requests.push(q);
        side_info.push(s);
    }
    let inst = IndexCodingInstance::new(m, requests, side_info)?;
    let setup = complete(&build_fitting_matrix(&inst), CompletionPolicy::External(g))?;
    Ok((inst, setup))
}

/// The four-client, five-message example: clients 1/2 hold each other's
/// request, as do clients 3/4; message 5 is requested by nobody.
pub fn two_pair_example() -> IndexCodingInstance {
    IndexCodingInstance::new(
        5,
        vec![0, 1, 2, 3],
        vec![
            BTreeSet::from([1]),
            BTreeSet::from([0]),
            BTreeSet::from([3]),
            BTreeSet::from([2]),
        ],
    )
    .expect("valid fixture")
}
