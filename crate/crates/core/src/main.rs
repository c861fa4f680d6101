use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use klac::access::AccessAssignment;
use klac::graph::{branch_pass, nested_scheme, scr_for_k, search_min_subset, SchemeResult, SearchLimits};
use klac::instance::{build_fitting_matrix, complete, synthesize_instance, CompletionPolicy, IndexCodingInstance};
use klac::privacy::privacy_report;
use klac::protocol::{run_protocol, AccessPolicy, MessageStore, DEFAULT_MESSAGE_BITS};
use klac::sweep::{run_sweep, write_sweep_csv, Experiment, NSpec, SchemeKind, SweepSpec};
use klac::universal::{build_scheme, lower_bound_tk};
use klac::{BitMatrix, Error, Result};

#[derive(Parser)]
#[command(
    name = "klac",
    version,
    about = "k-limited-access transformations for linear index codes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lower bound on T_k.
    Bounds(BoundsArgs),
    /// Build a limited-access scheme and print P.
    Construct(ConstructArgs),
    /// Privacy metrics as CSV.
    Privacy(PrivacyArgs),
    /// Simulate the broadcast and report per-client decoding.
    Simulate(SimulateArgs),
    /// Regenerate an experiment as CSV.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long = "T")]
    t: u64,
    #[arg(long)]
    n: Option<u64>,
    /// 2^T-1, T^4 or T^2.
    #[arg(long = "n-expr")]
    n_expr: Option<NSpec>,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long = "k-min")]
    k_min: Option<u64>,
    #[arg(long = "k-max")]
    k_max: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstructScheme {
    Scheme1,
    Scr,
    BranchSearch,
    Nested,
}

#[derive(Args)]
struct SearchArgs {
    /// Largest subset the branch-search step may return.
    #[arg(long = "size-cap")]
    size_cap: Option<usize>,
    /// Seconds per branch-search instance.
    #[arg(long = "time-budget", default_value_t = 10.0)]
    time_budget: f64,
    /// Search nodes per branch-search instance.
    #[arg(long = "node-budget")]
    node_budget: Option<u64>,
}

impl SearchArgs {
    fn limits(&self) -> Result<SearchLimits> {
        Ok(SearchLimits {
            size_cap: self.size_cap,
            time_budget: Some(seconds(self.time_budget)?),
            node_budget: self.node_budget,
        })
    }
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long = "T")]
    t: Option<usize>,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long, value_enum, default_value = "scheme1")]
    scheme: ConstructScheme,
    /// Client coefficient vectors, one 0/1 row each.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Where to write P (stdout by default).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Where to write the assignment CSV.
    #[arg(long)]
    assignment: Option<PathBuf>,
    #[command(flatten)]
    search: SearchArgs,
    /// Print per-iteration circuits or branch choices to stderr.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct PrivacyArgs {
    #[arg(long)]
    m: usize,
    #[arg(long = "T")]
    t: usize,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long = "k-min")]
    k_min: Option<usize>,
    #[arg(long = "k-max")]
    k_max: Option<usize>,
    /// Side-information size of the curious client.
    #[arg(long, default_value_t = 0)]
    s: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Assigned,
    Uniform,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long = "T")]
    t: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: usize,
    /// Number of messages.
    #[arg(long)]
    m: Option<usize>,
    /// Message size in bits.
    #[arg(long = "F", default_value_t = DEFAULT_MESSAGE_BITS)]
    f: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "scheme1")]
    scheme: ConstructScheme,
    /// Instance file; requests and side information per client.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "assigned")]
    policy: Policy,
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value = "custom")]
    experiment: Experiment,
    #[arg(long = "T")]
    t: Option<usize>,
    /// Comma-separated k values.
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    #[arg(long = "k-min")]
    k_min: Option<usize>,
    #[arg(long = "k-max")]
    k_max: Option<usize>,
    /// Comma-separated client counts.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<u64>>,
    /// Comma-separated expressions in T: 2^T-1, T^4, T^2.
    #[arg(long = "n-expr", value_delimiter = ',')]
    n_expr: Option<Vec<NSpec>>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated: scheme1, scr, branch-search, lb, ub-uncoded.
    #[arg(long, value_delimiter = ',')]
    scheme: Option<Vec<SchemeKind>>,
    #[arg(long = "size-cap")]
    size_cap: Option<usize>,
    /// Seconds per branch-search instance; off by default so sweeps stay reproducible.
    #[arg(long = "time-budget")]
    time_budget: Option<f64>,
    #[arg(long = "node-budget")]
    node_budget: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn seconds(s: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(s).map_err(|_| Error::invalid(format!("bad time budget {s}")))
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn k_range(k: Option<usize>, lo: Option<usize>, hi: Option<usize>, max: usize) -> Result<Vec<usize>> {
    match (k, lo, hi) {
        (Some(k), None, None) => Ok(vec![k]),
        (None, lo, hi) if lo.is_some() || hi.is_some() => {
            let (lo, hi) = (lo.unwrap_or(1), hi.unwrap_or(max));
            if lo > hi {
                return Err(Error::invalid(format!("empty k range {lo}..={hi}")));
            }
            Ok((lo..=hi).collect())
        }
        (None, None, None) => Err(Error::invalid("give --k or --k-min/--k-max")),
        _ => Err(Error::invalid("--k conflicts with --k-min/--k-max")),
    }
}

fn cmd_bounds(args: BoundsArgs) -> Result<()> {
    let n = match (args.n, args.n_expr) {
        (Some(n), None) => n,
        (None, Some(e)) => e.resolve(args.t as usize)?,
        _ => return Err(Error::invalid("give exactly one of --n and --n-expr")),
    };
    let ks = k_range(
        args.k.map(|k| k as usize),
        args.k_min.map(|k| k as usize),
        args.k_max.map(|k| k as usize),
        args.t as usize,
    )?;
    if let [k] = ks[..] {
        println!("{}", lower_bound_tk(args.t, n, k as u64)?);
    } else {
        println!("T,n,k,lower_bound");
        for k in ks {
            println!("{},{n},{k},{}", args.t, lower_bound_tk(args.t, n, k as u64)?);
        }
    }
    Ok(())
}

fn trace_result(scheme: ConstructScheme, d: &BitMatrix, k: usize) -> Result<()> {
    match scheme {
        ConstructScheme::Scr => {
            let out = scr_for_k(d, k)?;
            for (pass, circuits) in out.circuits.iter().enumerate() {
                for c in circuits {
                    let rows: Vec<String> = c.iter().map(|r| (r + 1).to_string()).collect();
                    eprintln!("pass {} circuit {}", pass + 1, rows.join(" "));
                }
            }
        }
        ConstructScheme::BranchSearch => {
            let out = branch_pass(d, k)?;
            for (i, step) in out.steps.iter().enumerate() {
                let order: Vec<String> = step.order.iter().map(|s| (s + 1).to_string()).collect();
                eprintln!(
                    "iteration {} dependent {} order {} rewired {}",
                    i + 1,
                    step.dependent + 1,
                    order.join(" "),
                    step.rewired.len()
                );
            }
            eprintln!("candidates {}", out.candidates.num_rows());
        }
        _ => {}
    }
    Ok(())
}

/// Builds the requested scheme for client vectors `d`.
fn graph_or_universal(
    scheme: ConstructScheme,
    d: &BitMatrix,
    k: usize,
    search: &SearchArgs,
    trace: bool,
) -> Result<SchemeResult> {
    if trace {
        trace_result(scheme, d, k)?;
    }
    let t = d.num_cols();
    let result = match scheme {
        ConstructScheme::Scheme1 => {
            let s = build_scheme(t, d.num_rows() as u64, k, Some(d))?;
            let assignment = s.assign(d)?;
            SchemeResult {
                p: s.p().clone(),
                assignment,
                k,
            }
        }
        ConstructScheme::Scr => scr_for_k(d, k)?.scheme,
        ConstructScheme::BranchSearch => {
            let r = branch_pass(d, k)?.candidates;
            let found = search_min_subset(&r, d, k, search.limits()?)?
                .ok_or_else(|| Error::Infeasible("no subset of the candidates fits the size cap".into()))?;
            if !found.exact {
                eprintln!("search budget exhausted, result may not be minimal");
            }
            found.scheme
        }
        ConstructScheme::Nested => {
            nested_scheme(d)?.ok_or_else(|| Error::Infeasible("outbound sets are not nested".into()))?
        }
    };
    result.validate(d)?;
    Ok(result)
}

fn cmd_construct(args: ConstructArgs) -> Result<()> {
    let (p, assignment): (BitMatrix, Option<AccessAssignment>) = match &args.input {
        Some(path) => {
            let d = BitMatrix::parse_text(&fs::read_to_string(path)?)?;
            if let Some(t) = args.t.filter(|&t| t != d.num_cols()) {
                return Err(Error::DimensionMismatch {
                    expected: t,
                    actual: d.num_cols(),
                });
            }
            let r = graph_or_universal(args.scheme, &d, args.k, &args.search, args.trace)?;
            (r.p, Some(r.assignment))
        }
        None => {
            if !matches!(args.scheme, ConstructScheme::Scheme1) {
                return Err(Error::invalid("this scheme needs --input with the client vectors"));
            }
            let t = args
                .t
                .ok_or_else(|| Error::invalid("--T is required without --input"))?;
            let n = args
                .n
                .ok_or_else(|| Error::invalid("--n is required without --input"))?;
            (build_scheme(t, n, args.k, None)?.p().clone(), None)
        }
    };
    emit(args.output.as_deref(), &p.to_text())?;
    if let (Some(path), Some(a)) = (&args.assignment, &assignment) {
        let mut file = fs::File::create(path)?;
        a.write_csv(&mut file)?;
    }
    Ok(())
}

fn cmd_privacy(args: PrivacyArgs) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for k in k_range(args.k, args.k_min, args.k_max, args.t)? {
        w.serialize(privacy_report(args.m, args.t, k, args.s)?)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    emit(args.output.as_deref(), &String::from_utf8(bytes).expect("csv is utf-8"))
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let setup = match &args.input {
        Some(path) => {
            let inst = IndexCodingInstance::parse_text(&fs::read_to_string(path)?)?;
            complete(&build_fitting_matrix(&inst), CompletionPolicy::Zeros)?
        }
        None => {
            let t = args
                .t
                .ok_or_else(|| Error::invalid("--T is required without --input"))?;
            let n = args
                .n
                .ok_or_else(|| Error::invalid("--n is required without --input"))?;
            synthesize_instance(t, n, args.m.unwrap_or(n.max(t)), args.seed)?.1
        }
    };
    let d = setup.coefficients();
    let scheme = graph_or_universal(args.scheme, &d, args.k, &args.search, args.trace)?;
    let store = MessageStore::random(setup.instance().m(), args.f, args.seed);
    let policy = match args.policy {
        Policy::Assigned => AccessPolicy::Assigned,
        Policy::Uniform => AccessPolicy::UniformMinimal,
    };
    let run = run_protocol(&setup, &scheme.p, &scheme.assignment, args.k, &store, policy, args.seed)?;
    emit(args.output.as_deref(), &run.report_csv()?)?;
    run.ensure_decoded()
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let mut spec = SweepSpec::preset(args.experiment);
    if let Some(t) = args.t {
        spec.t = t;
        if args.experiment == Experiment::Fig4 && args.k.is_none() && args.k_min.is_none() && args.k_max.is_none() {
            spec.ks = (1..=t).collect();
        }
    }
    if args.k.is_some() || args.k_min.is_some() || args.k_max.is_some() {
        spec.ks = match args.k {
            Some(ks) if args.k_min.is_none() && args.k_max.is_none() => ks,
            Some(_) => return Err(Error::invalid("--k conflicts with --k-min/--k-max")),
            None => k_range(None, args.k_min, args.k_max, spec.t)?,
        };
    }
    match (args.n, args.n_expr) {
        (Some(_), Some(_)) => return Err(Error::invalid("give only one of --n and --n-expr")),
        (Some(ns), None) => spec.ns = ns.into_iter().map(NSpec::Value).collect(),
        (None, Some(exprs)) => spec.ns = exprs,
        (None, None) => {}
    }
    if let Some(i) = args.instances {
        spec.instances = i;
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    if let Some(schemes) = args.scheme {
        spec.schemes = schemes;
    }
    spec.size_cap = args.size_cap;
    spec.time_budget = args.time_budget.map(seconds).transpose()?;
    if args.node_budget.is_some() {
        spec.node_budget = args.node_budget;
    }
    let rows = run_sweep(&spec)?;
    let mut buf = Vec::new();
    write_sweep_csv(&rows, &mut buf)?;
    emit(args.output.as_deref(), &String::from_utf8(buf).expect("csv is utf-8"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bounds(a) => cmd_bounds(a),
        Command::Construct(a) => cmd_construct(a),
        Command::Privacy(a) => cmd_privacy(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
