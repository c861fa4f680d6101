//! End-to-end simulation of the limited-access broadcast: coded payloads go
//! to everyone, each client privately receives only its own coding rows.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::access::AccessAssignment;
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};
use crate::instance::CodingSetup;

/// Default message length in bits.
pub const DEFAULT_MESSAGE_BITS: usize = 64;

/// Row subsets examined per client before the sampler gives up and keeps
/// the assigned rows.
pub const MINIMAL_SUBSET_LIMIT: u128 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MessageStore {
    f: usize,
    messages: BitMatrix,
}

impl MessageStore {
    pub fn new(messages: BitMatrix) -> Self {
        Self {
            f: messages.num_cols(),
            messages,
        }
    }

    /// `m` uniformly random messages of `f` bits.
    pub fn random(m: usize, f: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..m)
            .map(|_| BitVector::from_bools(&(0..f).map(|_| rng.random_bool(0.5)).collect::<Vec<_>>()))
            .collect();
        Self::new(BitMatrix::from_rows(f, rows).expect("rows have width f"))
    }

    pub fn f(&self) -> usize {
        self.f
    }

    pub fn m(&self) -> usize {
        self.messages.num_rows()
    }

    pub fn message(&self, j: usize) -> &BitVector {
        self.messages.row(j)
    }

    pub fn as_matrix(&self) -> &BitMatrix {
        &self.messages
    }
}

/// Which rows each client is handed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AccessPolicy {
    /// Exactly the rows of the assignment.
    #[default]
    Assigned,
    /// A uniformly random choice among the smallest row sets that rebuild the
    /// client's vector.
    UniformMinimal,
}

/// What one client receives over its private channel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrivateHeader {
    pub rows: Vec<usize>,
    pub coding_rows: Vec<BitVector>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransmissionLog {
    pub t: usize,
    pub k: usize,
    pub m: usize,
    pub f: usize,
    /// `Y_k = A_k B`, one payload per row of `A_k`.
    pub payloads: BitMatrix,
    pub headers: Vec<PrivateHeader>,
    pub broadcast_bits: u64,
    pub private_bits: u64,
}

impl TransmissionLog {
    pub fn t_k(&self) -> usize {
        self.payloads.num_rows()
    }

    pub fn n(&self) -> usize {
        self.headers.len()
    }

    /// `C_k`: broadcast plus private header bits.
    pub fn total_bits(&self) -> u64 {
        self.broadcast_bits + self.private_bits
    }

    /// `C = T (F + m)`, the cost of broadcasting `A` with its coefficients.
    pub fn conventional_bits(&self) -> u64 {
        (self.t * (self.f + self.m)) as u64
    }

    /// `n k m + T_k F`.
    pub fn cost_bound(&self) -> u64 {
        (self.n() * self.k * self.m + self.t_k() * self.f) as u64
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClientOutcome {
    pub rows_used: usize,
    pub decode_ok: bool,
    /// Set when decoding failed.
    pub reason: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProtocolRun {
    pub log: TransmissionLog,
    pub outcomes: Vec<ClientOutcome>,
}

impl ProtocolRun {
    /// The first client that failed to decode, as an error.
    pub fn ensure_decoded(&self) -> Result<()> {
        match self.outcomes.iter().position(|o| !o.decode_ok) {
            None => Ok(()),
            Some(i) => Err(Error::SimulationFailure {
                client: i + 1,
                reason: self.outcomes[i].reason.clone().unwrap_or_default(),
            }),
        }
    }

    /// Per-client lines `client_id,rows_used,decode_ok` followed by a totals
    /// section.
    pub fn report_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["client_id", "rows_used", "decode_ok"])?;
        for (i, o) in self.outcomes.iter().enumerate() {
            w.write_record([(i + 1).to_string(), o.rows_used.to_string(), o.decode_ok.to_string()])?;
        }
        w.flush()?;
        let mut out =
            String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?).expect("csv output is utf-8");
        let log = &self.log;
        out.push_str("C_k,C,T,T_k,k\n");
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            log.total_bits(),
            log.conventional_bits(),
            log.t,
            log.t_k(),
            log.k
        ));
        Ok(out)
    }
}

fn combinations(n: usize, r: usize, mut visit: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        visit(&idx);
        let Some(i) = (0..r).rev().find(|&i| idx[i] != i + n - r) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn binom(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    (0..r).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// All smallest row sets of `p` adding up to `d`, or `None` when there are
/// too many candidates to list.
fn minimal_row_sets(p: &BitMatrix, d: &BitVector, upto: usize) -> Option<Vec<Vec<usize>>> {
    let n = p.num_rows();
    let budget: u128 = (0..=upto).map(|r| binom(n, r)).sum();
    if budget > MINIMAL_SUBSET_LIMIT {
        return None;
    }
    for r in 0..=upto {
        let mut hits = Vec::new();
        combinations(n, r, |rows| {
            if &p.sum_rows(rows.iter().copied()) == d {
                hits.push(rows.to_vec());
            }
        });
        if !hits.is_empty() {
            return Some(hits);
        }
    }
    None
}

/// Runs the protocol for the transformed code `A_k = P A`.
///
/// `assignment` lists, per client, the rows of `P` whose sum is its
/// coefficient vector. Decoding is carried out on the actual message bits;
/// failures are reported per client rather than raised.
pub fn run_protocol(
    setup: &CodingSetup,
    p: &BitMatrix,
    assignment: &AccessAssignment,
    k: usize,
    store: &MessageStore,
    policy: AccessPolicy,
    seed: u64,
) -> Result<ProtocolRun> {
    let inst = setup.instance();
    if p.num_cols() != setup.t() {
        return Err(Error::DimensionMismatch {
            expected: setup.t(),
            actual: p.num_cols(),
        });
    }
    if assignment.num_clients() != inst.n() {
        return Err(Error::DimensionMismatch {
            expected: inst.n(),
            actual: assignment.num_clients(),
        });
    }
    if store.m() != inst.m() {
        return Err(Error::DimensionMismatch {
            expected: inst.m(),
            actual: store.m(),
        });
    }
    if let Some(&bad) = assignment.iter().flatten().find(|&&r| r >= p.num_rows()) {
        return Err(Error::invalid(format!("assignment references missing row {}", bad + 1)));
    }
    let (m, f) = (inst.m(), store.f());
    let a_k = p.mul(&setup.a)?;
    let payloads = a_k.mul(store.as_matrix())?;
    let coefficients = setup.coefficients();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut headers = Vec::with_capacity(inst.n());
    let mut outcomes = Vec::with_capacity(inst.n());
    for i in 0..inst.n() {
        let assigned = assignment.rows(i).to_vec();
        let rows = match policy {
            AccessPolicy::Assigned => assigned,
            AccessPolicy::UniformMinimal => match minimal_row_sets(p, coefficients.row(i), assigned.len()) {
                Some(sets) => sets.choose(&mut rng).expect("nonempty").clone(),
                None => assigned,
            },
        };
        let header = PrivateHeader {
            coding_rows: rows.iter().map(|&r| a_k.row(r).clone()).collect(),
            rows,
        };
        outcomes.push(decode(setup, i, &header, &payloads, store));
        headers.push(header);
    }
    let private_rows: usize = headers.iter().map(|h| h.rows.len()).sum();
    Ok(ProtocolRun {
        log: TransmissionLog {
            t: setup.t(),
            k,
            m,
            f,
            broadcast_bits: (payloads.num_rows() * f) as u64,
            private_bits: (private_rows * m) as u64,
            payloads,
            headers,
        },
        outcomes,
    })
}

fn decode(
    setup: &CodingSetup,
    client: usize,
    header: &PrivateHeader,
    payloads: &BitMatrix,
    store: &MessageStore,
) -> ClientOutcome {
    let inst = setup.instance();
    let q = inst.request(client);
    let side = inst.side_info(client);
    let fail = |reason: String| ClientOutcome {
        rows_used: header.rows.len(),
        decode_ok: false,
        reason: Some(reason),
    };
    let mut g = BitVector::zeros(inst.m());
    for row in &header.coding_rows {
        g.xor_assign(row);
    }
    if !g.get(q) {
        return fail(format!("combined row misses requested message {}", q + 1));
    }
    let mut value = payloads.sum_rows(header.rows.iter().copied());
    for j in g.iter_ones().filter(|&j| j != q) {
        if !side.contains(&j) {
            return fail(format!(
                "combined row needs message {} outside the side information",
                j + 1
            ));
        }
        value.xor_assign(store.message(j));
    }
    if &value != store.message(q) {
        return fail("recovered bits differ from the requested message".into());
    }
    ClientOutcome {
        rows_used: header.rows.len(),
        decode_ok: true,
        reason: None,
    }
}

/// A coding row as a curious client sees it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CodingRow {
    pub index: usize,
    pub coefficients: String,
}

/// Everything one client observes: its own coding rows, every payload and
/// the number of broadcast rows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClientView {
    pub client: usize,
    pub t_k: usize,
    pub coding_rows: Vec<CodingRow>,
    pub payloads: Vec<String>,
}

impl ClientView {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("view serialises")
    }
}

/// The view of client `client` (0-based) in a finished run.
pub fn curious_view(log: &TransmissionLog, client: usize) -> Result<ClientView> {
    let header = log
        .headers
        .get(client)
        .ok_or_else(|| Error::invalid(format!("no client {}", client + 1)))?;
    Ok(ClientView {
        client: client + 1,
        t_k: log.t_k(),
        coding_rows: header
            .rows
            .iter()
            .zip(&header.coding_rows)
            .map(|(&index, row)| CodingRow {
                index: index + 1,
                coefficients: row.to_string(),
            })
            .collect(),
        payloads: log.payloads.rows().iter().map(BitVector::to_string).collect(),
    })
}
