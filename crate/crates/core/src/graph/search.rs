use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

use super::cover::Layers;
use super::SchemeResult;
use crate::access::AccessAssignment;
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};
use crate::universal::counting_rows;

/// Widest coefficient space the subset search accepts.
pub const SEARCH_MAX_T: usize = 24;

/// Widest coefficient space the exhaustive oracle accepts.
pub const ORACLE_MAX_T: usize = 4;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchLimits {
    /// Largest subset worth returning.
    pub size_cap: Option<usize>,
    /// Wall-clock budget; once spent the best subset seen so far is returned.
    pub time_budget: Option<Duration>,
    /// Same as `time_budget` but counted in search nodes, so results are
    /// reproducible.
    pub node_budget: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOutcome {
    pub scheme: SchemeResult,
    /// False when a budget ran out before minimality was proven.
    pub exact: bool,
    /// Search nodes expanded.
    pub nodes: u64,
}

fn masks(m: &BitMatrix) -> Vec<u64> {
    let mut seen = std::collections::BTreeSet::new();
    m.rows()
        .iter()
        .map(BitVector::to_u64)
        .filter(|&v| v != 0 && seen.insert(v))
        .collect()
}

fn binom(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    (0..r).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

struct Searcher<'a> {
    t: usize,
    k: usize,
    pool: &'a [u64],
    deadline: Option<Instant>,
    node_budget: u64,
    nodes: u64,
    out_of_budget: bool,
    found: Option<Vec<usize>>,
}

impl Searcher<'_> {
    fn layers_for(&self, chosen: &[usize]) -> Layers {
        let mut l = Layers::new(self.t, self.k);
        for &i in chosen {
            l.add(self.pool[i]);
        }
        l
    }

    fn covers(&self, chosen: &[usize], targets: &[u64]) -> bool {
        let l = self.layers_for(chosen);
        targets.iter().all(|&v| l.contains(self.k, v))
    }

    /// Upper bound on how many of `uncovered` can still be reached with
    /// `spare` more rows: each new row alone with old ones, plus every
    /// combination holding two or more new rows.
    fn reach_bound(&self, layers: &Layers, chosen: usize, allowed: &[usize], uncovered: &[u64], spare: usize) -> u128 {
        let mut gains: Vec<usize> = allowed
            .iter()
            .map(|&i| {
                let x = self.pool[i];
                uncovered
                    .iter()
                    .filter(|&&v| layers.contains(self.k - 1, v ^ x))
                    .count()
            })
            .collect();
        gains.sort_unstable_by(|a, b| b.cmp(a));
        let single: u128 = gains.iter().take(spare).map(|&g| g as u128).sum();
        let multi: u128 = (2..=self.k)
            .map(|j| binom(chosen + spare, j) - binom(chosen, j) - spare as u128 * binom(chosen, j - 1))
            .sum();
        single + multi
    }

    fn dfs(
        &mut self,
        chosen: &mut Vec<usize>,
        layers: &Layers,
        allowed: &[usize],
        uncovered: &[u64],
        limit: usize,
    ) -> bool {
        if uncovered.is_empty() {
            self.found = Some(chosen.clone());
            return true;
        }
        let spare = limit - chosen.len();
        if spare == 0 {
            return false;
        }
        self.nodes += 1;
        if self.nodes > self.node_budget || self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.out_of_budget = true;
            return false;
        }
        if uncovered.len() as u128 > self.reach_bound(layers, chosen.len(), allowed, uncovered, spare) {
            return false;
        }

        let mut widest = layers.clone();
        for &i in allowed {
            widest.add(self.pool[i]);
        }
        let mut best: Option<Vec<usize>> = None;
        for &v in uncovered {
            let contributors: Vec<usize> = allowed
                .iter()
                .copied()
                .filter(|&i| widest.contains(self.k - 1, v ^ self.pool[i]))
                .collect();
            if contributors.is_empty() {
                return false;
            }
            if best.as_ref().is_none_or(|b| contributors.len() < b.len()) {
                let single = contributors.len() == 1;
                best = Some(contributors);
                if single {
                    break;
                }
            }
        }
        let contributors = best.expect("uncovered is not empty");

        let mut branches: Vec<(usize, Layers, Vec<u64>)> = contributors
            .iter()
            .map(|&i| {
                let mut next = layers.clone();
                next.add(self.pool[i]);
                let left: Vec<u64> = uncovered
                    .iter()
                    .copied()
                    .filter(|&v| !next.contains(self.k, v))
                    .collect();
                (i, next, left)
            })
            .collect();
        branches.sort_by_key(|(i, _, left)| (left.len(), *i));

        let mut excluded = Vec::with_capacity(branches.len());
        for (i, next, left) in &branches {
            excluded.push(*i);
            let rest: Vec<usize> = allowed.iter().copied().filter(|a| !excluded.contains(a)).collect();
            chosen.push(*i);
            let hit = self.dfs(chosen, next, &rest, left, limit);
            chosen.pop();
            if hit || self.out_of_budget {
                return hit;
            }
        }
        false
    }
}

/// Splits `d` into at most `k` rows of `p` for every row of `d`.
fn decompose(t: usize, k: usize, p: &[u64], d: &BitMatrix) -> Option<Vec<Vec<usize>>> {
    // prefix[j] = layers over the rows of p
    let mut layers = Layers::new(t, k);
    for &x in p {
        layers.add(x);
    }
    d.rows()
        .iter()
        .map(|row| {
            let mut v = row.to_u64();
            let mut used = vec![false; p.len()];
            for j in (1..=k).rev() {
                if v == 0 {
                    break;
                }
                if layers.contains(j - 1, v) {
                    continue;
                }
                let i = (0..p.len()).find(|&i| layers.contains(j - 1, v ^ p[i]))?;
                used[i] ^= true;
                v ^= p[i];
            }
            (v == 0).then(|| (0..p.len()).filter(|&i| used[i]).collect())
        })
        .collect()
}

/// Smallest subset of the candidate rows `r` such that every row of `d` is a
/// sum of at most `k` of its members.
///
/// Starts from the candidates with redundant rows dropped and keeps asking a
/// branch-and-bound search for something strictly smaller. Returns `None`
/// when no subset within `size_cap` works.
pub fn search_min_subset(
    r: &BitMatrix,
    d: &BitMatrix,
    k: usize,
    limits: SearchLimits,
) -> Result<Option<SearchOutcome>> {
    let t = d.num_cols();
    if r.num_cols() != t {
        return Err(Error::DimensionMismatch {
            expected: t,
            actual: r.num_cols(),
        });
    }
    if t > SEARCH_MAX_T {
        return Err(Error::Refused(format!(
            "subset search supports T <= {SEARCH_MAX_T}, got {t}"
        )));
    }
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let pool = masks(r);
    let targets = masks(d);
    let cap = limits.size_cap.unwrap_or(usize::MAX);
    let mut searcher = Searcher {
        t,
        k,
        pool: &pool,
        deadline: limits.time_budget.map(|b| Instant::now() + b),
        node_budget: limits.node_budget.unwrap_or(u64::MAX),
        nodes: 0,
        out_of_budget: false,
        found: None,
    };

    let all: Vec<usize> = (0..pool.len()).collect();
    if !searcher.covers(&all, &targets) {
        return Ok(None);
    }
    let mut answer = all.clone();
    for i in (0..pool.len()).rev() {
        let trial: Vec<usize> = answer.iter().copied().filter(|&j| j != i).collect();
        if searcher.covers(&trial, &targets) {
            answer = trial;
        }
    }

    let floor = if targets.is_empty() {
        0
    } else {
        d.rank().max(counting_rows(targets.len() as u64, k as u64) as usize)
    };
    // Shrink the best known subset until the search proves nothing smaller
    // exists or a budget runs out.
    let empty = Layers::new(t, k);
    let mut exact = true;
    while answer.len() > floor {
        let limit = (answer.len() - 1).min(cap);
        if limit < floor {
            break;
        }
        let mut chosen = Vec::new();
        if searcher.dfs(&mut chosen, &empty, &all, &targets, limit) {
            answer = searcher.found.take().expect("dfs records its hit");
        } else {
            exact = !searcher.out_of_budget;
            break;
        }
    }
    if answer.len() > cap {
        return Ok(None);
    }
    answer.sort_unstable();
    let chosen: Vec<u64> = answer.iter().map(|&i| pool[i]).collect();
    let clients = decompose(t, k, &chosen, d).expect("chosen rows cover every client");
    let p = BitMatrix::from_u64_rows(t, &chosen);
    Ok(Some(SearchOutcome {
        scheme: SchemeResult {
            p,
            assignment: AccessAssignment::new(clients),
            k,
        },
        exact,
        nodes: searcher.nodes,
    }))
}

type TableCache = Mutex<HashMap<(usize, usize), Arc<Vec<u8>>>>;

fn oracle_table(t: usize, k: usize) -> Arc<Vec<u8>> {
    static TABLES: OnceLock<TableCache> = OnceLock::new();
    let tables = TABLES.get_or_init(Default::default);
    if let Some(table) = tables.lock().expect("oracle cache").get(&(t, k)) {
        return Arc::clone(table);
    }
    let points = 1usize << t;
    let nonzero = points - 1;
    // best[s] = fewest rows whose sums of at most k hit exactly the point set s
    let mut best = vec![u8::MAX; 1 << points];
    for subset in 0u32..(1 << nonzero) {
        let rows: Vec<usize> = (1..points).filter(|x| (subset >> (x - 1)) & 1 == 1).collect();
        let mut reach = 1u32;
        for _ in 0..k {
            let mut next = reach;
            for y in (0..points).filter(|y| (reach >> y) & 1 == 1) {
                for &x in &rows {
                    next |= 1 << (y ^ x);
                }
            }
            reach = next;
        }
        let size = subset.count_ones() as u8;
        let slot = &mut best[reach as usize];
        *slot = (*slot).min(size);
    }
    // Any subset reaching a superset of s also serves s.
    for bit in 0..points {
        for s in 0..best.len() {
            if s & (1 << bit) == 0 {
                best[s] = best[s].min(best[s | (1 << bit)]);
            }
        }
    }
    let table = Arc::new(best);
    tables.lock().expect("oracle cache").insert((t, k), Arc::clone(&table));
    table
}

/// Exact minimum `T_k` over every subset of the nonzero vectors of `F_2^T`.
/// Only for `T <= 4`; all subsets are tabulated once per `(T, k)`.
pub fn oracle_min_tk(d: &BitMatrix, k: usize) -> Result<usize> {
    let t = d.num_cols();
    if t > ORACLE_MAX_T {
        return Err(Error::Refused(format!(
            "exhaustive oracle supports T <= {ORACLE_MAX_T}, got {t}"
        )));
    }
    let k = k.min((1 << t) - 1);
    let wanted = d.rows().iter().fold(1usize, |acc, r| acc | 1 << r.to_u64());
    match oracle_table(t, k)[wanted] {
        u8::MAX => Err(Error::Infeasible(
            "no subset of the nonzero vectors covers the clients".into(),
        )),
        size => Ok(size as usize),
    }
}
