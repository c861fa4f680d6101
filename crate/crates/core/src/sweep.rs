//! Bandwidth-versus-`k` experiment sweeps written as long-format CSV.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Duration;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{branch_pass, scr_for_k, search_min_subset, SearchLimits, SEARCH_MAX_T};
use crate::instance::random_full_rank_instance;
use crate::universal::{build_scheme, lower_bound_tk, plan_scheme, prune_used_rows};

/// Search nodes per Branch-Search instance in sampled sweeps.
pub const DEFAULT_NODE_BUDGET: u64 = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Fig4,
    Fig6,
    Fig9,
    Custom,
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig4" => Ok(Self::Fig4),
            "fig6" => Ok(Self::Fig6),
            "fig9" => Ok(Self::Fig9),
            "custom" => Ok(Self::Custom),
            _ => Err(Error::invalid(format!(
                "unknown experiment '{s}' (fig4, fig6, fig9, custom)"
            ))),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Fig4 => "fig4",
            Self::Fig6 => "fig6",
            Self::Fig9 => "fig9",
            Self::Custom => "custom",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SchemeKind {
    Scheme1,
    Scr,
    BranchSearch,
    Lb,
    UbUncoded,
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scheme1" => Ok(Self::Scheme1),
            "scr" => Ok(Self::Scr),
            "branch-search" => Ok(Self::BranchSearch),
            "lb" => Ok(Self::Lb),
            "ub-uncoded" => Ok(Self::UbUncoded),
            _ => Err(Error::invalid(format!(
                "unknown scheme '{s}' (scheme1, scr, branch-search, lb, ub-uncoded)"
            ))),
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Scheme1 => "scheme1",
            Self::Scr => "scr",
            Self::BranchSearch => "branch-search",
            Self::Lb => "lb",
            Self::UbUncoded => "ub-uncoded",
        })
    }
}

/// Client count, either fixed or a function of `T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NSpec {
    Value(u64),
    /// `2^T - 1`
    AllVectors,
    /// `T^4`
    Quartic,
    /// `T^2`
    Square,
}

impl NSpec {
    pub fn resolve(self, t: usize) -> Result<u64> {
        let t64 = t as u64;
        match self {
            NSpec::Value(n) => Ok(n),
            NSpec::AllVectors if t < 64 => Ok((1u64 << t) - 1),
            NSpec::AllVectors => Ok(u64::MAX),
            NSpec::Quartic => t64.checked_pow(4).ok_or_else(|| Error::invalid("T^4 overflows")),
            NSpec::Square => Ok(t64 * t64),
        }
    }
}

impl FromStr for NSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace(' ', "").as_str() {
            "2^T-1" => Ok(NSpec::AllVectors),
            "T^4" => Ok(NSpec::Quartic),
            "T^2" => Ok(NSpec::Square),
            other => other
                .parse()
                .map(NSpec::Value)
                .map_err(|_| Error::invalid(format!("bad n expression '{s}' (2^T-1, T^4, T^2 or a number)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub experiment: Experiment,
    pub t: usize,
    pub ks: Vec<usize>,
    pub ns: Vec<NSpec>,
    pub instances: usize,
    pub seed: u64,
    pub schemes: Vec<SchemeKind>,
    pub size_cap: Option<usize>,
    pub time_budget: Option<Duration>,
    pub node_budget: Option<u64>,
}

impl SweepSpec {
    /// Default settings for each experiment.
    pub fn preset(experiment: Experiment) -> Self {
        use SchemeKind::*;
        let base = SweepSpec {
            experiment,
            t: 10,
            ks: vec![2],
            ns: vec![NSpec::Value(100)],
            instances: 100,
            seed: 1,
            schemes: vec![Scheme1, Lb, UbUncoded],
            size_cap: None,
            time_budget: None,
            node_budget: Some(DEFAULT_NODE_BUDGET),
        };
        match experiment {
            Experiment::Fig4 => SweepSpec {
                t: 20,
                ks: (1..=20).collect(),
                ns: vec![NSpec::AllVectors, NSpec::Quartic, NSpec::Square],
                instances: 1,
                ..base
            },
            Experiment::Fig6 => SweepSpec {
                t: 10,
                ks: vec![2, 5],
                ns: doubling_ns(10),
                instances: 100,
                ..base
            },
            Experiment::Fig9 => SweepSpec {
                t: 6,
                ks: vec![2],
                ns: (7..=63).map(NSpec::Value).collect(),
                instances: 1000,
                schemes: vec![Scr, BranchSearch, Lb, UbUncoded, Scheme1],
                ..base
            },
            Experiment::Custom => base,
        }
    }

    /// Whether values come from formulas rather than sampled instances.
    pub fn analytic(&self) -> bool {
        self.experiment == Experiment::Fig4
    }

    pub fn validate(&self) -> Result<()> {
        if self.ks.is_empty() || self.ns.is_empty() || self.schemes.is_empty() {
            return Err(Error::invalid("sweep needs at least one k, one n and one scheme"));
        }
        if self.instances == 0 {
            return Err(Error::invalid("instance count must be at least 1"));
        }
        if self.t == 0 || self.t > 64 {
            return Err(Error::invalid(format!("T must be in 1..=64, got {}", self.t)));
        }
        if let Some(&k) = self.ks.iter().find(|&&k| k == 0 || k > self.t) {
            return Err(Error::invalid(format!("k={k} outside 1..=T")));
        }
        Ok(())
    }
}

/// `T, 2T, 4T, ...` below `2^T - 1`, then `2^T - 1` itself.
pub fn doubling_ns(t: usize) -> Vec<NSpec> {
    let top = (1u64 << t) - 1;
    let mut out = Vec::new();
    let mut n = t as u64;
    while n < top {
        out.push(NSpec::Value(n));
        n *= 2;
    }
    out.push(NSpec::Value(top));
    out
}

/// One line of the output CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub experiment: Experiment,
    pub t: usize,
    pub k: usize,
    pub n: u64,
    pub scheme: SchemeKind,
    pub stat: &'static str,
    /// `None` for skipped points.
    pub value: Option<f64>,
    pub seed: u64,
    pub instances: usize,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for instance `i` at point `(T, k, n)`; independent of scheduling.
pub fn instance_seed(seed: u64, t: usize, k: usize, n: u64, i: usize) -> u64 {
    let point = splitmix(splitmix(splitmix(t as u64) ^ k as u64) ^ n);
    splitmix(seed ^ point ^ splitmix(i as u64))
}

struct Stats {
    mean: f64,
    std: f64,
    min: f64,
    max: f64,
}

fn stats(values: &[f64]) -> Stats {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Stats {
        mean,
        std: var.sqrt(),
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

fn skip_reason(spec: &SweepSpec, scheme: SchemeKind, k: usize, n: u64) -> Option<String> {
    let t = spec.t;
    let max_n = if t >= 64 { u64::MAX } else { (1u64 << t) - 1 };
    let sampled = !spec.analytic() && !matches!(scheme, SchemeKind::Lb | SchemeKind::UbUncoded);
    if sampled && (n < t as u64 || n > max_n || t > 63) {
        return Some(format!("cannot draw {n} distinct full-rank vectors in dimension {t}"));
    }
    match scheme {
        SchemeKind::Scr if !(k >= 2 && k.is_power_of_two()) => Some(format!("k={k} is not a power of two")),
        SchemeKind::BranchSearch if k < 2 => Some("branching needs k >= 2".into()),
        SchemeKind::BranchSearch if t > SEARCH_MAX_T => Some(format!("T={t} above the search cap {SEARCH_MAX_T}")),
        SchemeKind::Scr | SchemeKind::BranchSearch if spec.analytic() => {
            Some("sampled scheme in an analytic sweep".into())
        }
        _ => None,
    }
}

fn sample(spec: &SweepSpec, scheme: SchemeKind, k: usize, n: u64) -> Result<Vec<f64>> {
    let t = spec.t;
    let limits = SearchLimits {
        size_cap: spec.size_cap,
        time_budget: spec.time_budget,
        node_budget: spec.node_budget,
    };
    (0..spec.instances)
        .map(|i| {
            if let SchemeKind::Lb = scheme {
                return Ok(lower_bound_tk(t as u64, n, k as u64)? as f64);
            }
            if let SchemeKind::UbUncoded = scheme {
                return Ok(n as f64);
            }
            let d = random_full_rank_instance(t, n as usize, instance_seed(spec.seed, t, k, n, i))?;
            let size = match scheme {
                SchemeKind::Scheme1 => {
                    let s = build_scheme(t, n, k, Some(&d))?;
                    let pruned = prune_used_rows(&s, &d)?;
                    pruned.assignment.validate(&pruned.p, &d, k)?;
                    pruned.t_k()
                }
                SchemeKind::Scr => {
                    let out = scr_for_k(&d, k)?;
                    out.scheme.validate(&d)?;
                    out.scheme.size()
                }
                SchemeKind::BranchSearch => {
                    let r = branch_pass(&d, k)?.candidates;
                    match search_min_subset(&r, &d, k, limits)? {
                        Some(found) => {
                            found.scheme.validate(&d)?;
                            found.scheme.size()
                        }
                        None => r.num_rows(),
                    }
                }
                SchemeKind::Lb | SchemeKind::UbUncoded => unreachable!(),
            };
            Ok(size as f64)
        })
        .collect()
}

fn analytic_value(spec: &SweepSpec, scheme: SchemeKind, k: usize, n: u64) -> Result<f64> {
    let t = spec.t;
    Ok(match scheme {
        SchemeKind::Scheme1 => plan_scheme(t, n, k)?.t_k as f64,
        SchemeKind::Lb => lower_bound_tk(t as u64, n, k as u64)? as f64,
        SchemeKind::UbUncoded => n as f64,
        SchemeKind::Scr | SchemeKind::BranchSearch => unreachable!("skipped before"),
    })
}

fn run_point(spec: &SweepSpec, k: usize, n: u64) -> Result<Vec<SweepRow>> {
    let row = |scheme, stat, value| SweepRow {
        experiment: spec.experiment,
        t: spec.t,
        k,
        n,
        scheme,
        stat,
        value,
        seed: spec.seed,
        instances: spec.instances,
    };
    let mut rows = Vec::new();
    for &scheme in &spec.schemes {
        if skip_reason(spec, scheme, k, n).is_some() {
            rows.push(row(scheme, "skipped", None));
        } else if spec.analytic() {
            rows.push(row(scheme, "value", Some(analytic_value(spec, scheme, k, n)?)));
        } else {
            let s = stats(&sample(spec, scheme, k, n)?);
            for (stat, value) in [("mean", s.mean), ("std", s.std), ("min", s.min), ("max", s.max)] {
                rows.push(row(scheme, stat, Some(value)));
            }
        }
    }
    Ok(rows)
}

/// Worker threads for sweeps: `KLAC_THREADS` when set, else rayon's default.
pub fn thread_count() -> Option<usize> {
    std::env::var("KLAC_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n| n > 0)
}

/// Runs every `(k, n)` point of `spec`. Rows come out in point order no
/// matter how the pool schedules them.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let mut points = Vec::new();
    for n in &spec.ns {
        let n = n.resolve(spec.t)?;
        for &k in &spec.ks {
            points.push((k, n));
        }
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(threads) = thread_count() {
        builder = builder.num_threads(threads);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let chunks = pool.install(|| {
        points
            .par_iter()
            .map(|&(k, n)| run_point(spec, k, n))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(chunks.into_iter().flatten().collect())
}

pub const CSV_HEADER: [&str; 9] = [
    "experiment",
    "T",
    "k",
    "n",
    "scheme",
    "stat",
    "value",
    "seed",
    "instances",
];

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.experiment.to_string(),
            r.t.to_string(),
            r.k.to_string(),
            r.n.to_string(),
            r.scheme.to_string(),
            r.stat.to_string(),
            r.value.map(|v| v.to_string()).unwrap_or_default(),
            r.seed.to_string(),
            r.instances.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
