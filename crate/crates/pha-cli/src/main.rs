//! `pha` — probabilistic Horn abduction from the command line.
//!
//! Subcommands: `compile-bn` turns a Bayesian network (JSON) into a `.pha`
//! knowledge base, `explain` enumerates minimal explanations of a query,
//! `posterior` prints a conditional distribution, and `check` cross-checks
//! the engine against exhaustive enumeration on a small network.
//!
//! Exit codes: 0 success, 1 domain failure (parse/validation errors,
//! undefined posteriors, check mismatches), 2 I/O or usage errors.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use pha::bn::CompileOptions;
use pha::engine::{
    EngineError, SearchOptions, SearchReport, SearchState, StepOutcome, StopCriteria,
    TerminationReason,
};
use pha::kb::{program_to_string, Diagnostic};
use pha::oracle;
use pha::probability::{distribution, mass, InferenceError};
use pha::terms::{Atom, Term};
use pha::{BayesianNetwork, DomainsFile, MassGap, StdKnowledgeBase};

#[derive(Parser)]
#[command(
    name = "pha",
    version,
    about = "Probabilistic Horn abduction: compile, explain, and query",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a Bayesian network (JSON) into a .pha knowledge base
    CompileBn(CompileBnArgs),
    /// Enumerate minimal explanations of a ground query
    Explain(ExplainArgs),
    /// Posterior distribution of one variable given observations
    Posterior(PosteriorArgs),
    /// Cross-check engine answers against exhaustive enumeration
    Check(CheckArgs),
}

#[derive(Args)]
struct CompileBnArgs {
    /// Network JSON file ("-" for stdin)
    input: String,
    /// Output .pha file ("-" for stdout)
    #[arg(short, long)]
    output: String,
    /// Emit each exclusivity constraint in both argument orders
    #[arg(long)]
    symmetric_constraints: bool,
    /// Also emit exclusivity constraints between the hypotheses of a CPT row
    #[arg(long)]
    c_constraints: bool,
    /// Do not write the <output>.domains.json sidecar
    #[arg(long)]
    no_sidecar: bool,
}

#[derive(Args, Clone)]
struct StopArgs {
    /// Stop once queue mass <= epsilon * max(found mass, epsilon floor)
    #[arg(long)]
    epsilon: Option<f64>,
    /// Floor for the epsilon rule, so zero-mass queries still terminate early
    #[arg(long, default_value_t = 0.0)]
    epsilon_floor: f64,
    /// Stop after this many explanations
    #[arg(long)]
    max_explanations: Option<usize>,
    /// Stop after this many queue expansions
    #[arg(long)]
    max_expansions: Option<u64>,
}

impl StopArgs {
    fn criteria(&self) -> StopCriteria {
        StopCriteria {
            max_expansions: self.max_expansions,
            max_explanations: self.max_explanations,
            mass_gap: self.epsilon.map(|epsilon| MassGap {
                epsilon,
                floor: self.epsilon_floor,
            }),
        }
    }
}

#[derive(Args)]
struct ExplainArgs {
    /// Knowledge base (.pha file, "-" for stdin)
    kb: String,
    /// Ground query conjunction, e.g. "smoke(yes), report(no)"
    query: String,
    #[command(flatten)]
    stop: StopArgs,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Keep zero-prior partial explanations instead of pruning them
    #[arg(long)]
    keep_zero: bool,
    /// Print found/queue mass to stderr after every expansion
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct PosteriorArgs {
    /// Knowledge base (.pha file, "-" for stdin)
    kb: String,
    /// Variable to query (atoms var(value))
    #[arg(long = "var")]
    variable: String,
    /// Observed ground conjunction; empty for the prior distribution
    #[arg(long, default_value = "")]
    obs: String,
    /// Value domain, e.g. --values yes,no (default: the KB's domains sidecar)
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    values: Option<Vec<String>>,
    #[command(flatten)]
    stop: StopArgs,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct CheckArgs {
    /// Network JSON file ("-" for stdin)
    bn: String,
    /// Compiled .pha to check against the network (default: compile in memory)
    #[arg(long)]
    kb: Option<String>,
    /// Largest engine-vs-enumeration difference to accept
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Seed for the sampled posterior spot-checks
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// How many posterior spot-checks to sample
    #[arg(long, default_value_t = 3)]
    posterior_samples: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Human-readable table
    Table,
    /// Machine-readable JSON
    #[value(alias = "machine-readable")]
    Json,
}

/// A failed command: domain errors exit 1, I/O errors exit 2.
enum Failure {
    Domain(String),
    Io(String),
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Io(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Domain(m) | Failure::Io(m) => m,
        }
    }
}

fn diagnostics_failure(diags: Vec<Diagnostic>) -> Failure {
    let lines: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
    Failure::Domain(lines.join("\n"))
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        Failure::Domain(format!("error: {e}"))
    }
}

impl From<InferenceError> for Failure {
    fn from(e: InferenceError) -> Self {
        Failure::Domain(format!("error: {e}"))
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::CompileBn(args) => cmd_compile_bn(&args),
        Command::Explain(args) => cmd_explain(&args),
        Command::Posterior(args) => cmd_posterior(&args),
        Command::Check(args) => cmd_check(&args),
    };
    if let Err(failure) = result {
        eprintln!("{}", failure.message());
        std::process::exit(failure.exit_code());
    }
}

// --- I/O helpers ---------------------------------------------------------------

fn read_input(path: &str) -> Result<String, Failure> {
    if path == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Failure::Io(format!("error: cannot read stdin: {e}")))?;
        Ok(text)
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| Failure::Io(format!("error: cannot read {path}: {e}")))
    }
}

fn write_output(path: &str, content: &str) -> Result<(), Failure> {
    if path == "-" {
        print!("{content}");
        Ok(())
    } else {
        std::fs::write(path, content)
            .map_err(|e| Failure::Io(format!("error: cannot write {path}: {e}")))
    }
}

fn load_kb(path: &str) -> Result<StdKnowledgeBase, Failure> {
    let text = read_input(path)?;
    let kb = StdKnowledgeBase::parse(&text).map_err(diagnostics_failure)?;
    for warning in kb.warnings() {
        eprintln!("{warning}");
    }
    Ok(kb)
}

fn parse_query(text: &str) -> Result<Vec<Atom>, Failure> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    pha::kb::parse_query(text).map_err(diagnostics_failure)
}

// --- compile-bn ------------------------------------------------------------------

fn cmd_compile_bn(args: &CompileBnArgs) -> Result<(), Failure> {
    let text = read_input(&args.input)?;
    let bn = BayesianNetwork::parse(&text).map_err(diagnostics_failure)?;
    let compiled = bn.compile::<f64>(&CompileOptions {
        symmetric_constraints: args.symmetric_constraints,
        c_constraints: args.c_constraints,
    });
    write_output(&args.output, &program_to_string(&compiled.program))?;
    if !args.no_sidecar && args.output != "-" {
        let sidecar = sidecar_path(Path::new(&args.output));
        let json = compiled.domains.to_json();
        std::fs::write(&sidecar, json)
            .map_err(|e| Failure::Io(format!("error: cannot write {}: {e}", sidecar.display())))?;
    }
    Ok(())
}

fn sidecar_path(output: &Path) -> PathBuf {
    output.with_extension("domains.json")
}

// --- explain ---------------------------------------------------------------------

#[derive(Serialize)]
struct QueryReport {
    query: String,
    explanations: Vec<ReportExplanation>,
    bounds: Bounds,
    termination: String,
    expansions: u64,
    wall_time_ms: f64,
}

#[derive(Serialize)]
struct ReportExplanation {
    rank: usize,
    prior: f64,
    hypotheses: Vec<String>,
}

#[derive(Serialize)]
struct Bounds {
    lower: f64,
    upper: f64,
}

fn termination_name(reason: TerminationReason) -> &'static str {
    match reason {
        TerminationReason::Exhausted => "exhausted",
        TerminationReason::MaxExpansions => "max-expansions",
        TerminationReason::MaxExplanations => "max-explanations",
        TerminationReason::MassGapReached => "mass-gap",
    }
}

/// Drive a search by hand so `--trace` can watch the bounds move; stopping
/// matches `SearchState::run` exactly.
fn run_search(
    kb: &StdKnowledgeBase,
    query: &[Atom],
    options: SearchOptions,
    stop: &StopCriteria,
    trace: bool,
) -> Result<SearchReport<f64>, Failure> {
    let mut seen = BTreeSet::new();
    let atoms: Vec<Atom> = query
        .iter()
        .filter(|a| seen.insert((*a).clone()))
        .cloned()
        .collect();
    let mut state = SearchState::new(kb, atoms, options)?;
    let reason = loop {
        if let Some(reason) = stop.satisfied(&state) {
            break reason;
        }
        match state.step(kb)? {
            StepOutcome::Exhausted => break TerminationReason::Exhausted,
            _ if trace => {
                eprintln!(
                    "expansion {:>6}: found={:.12e} queued={:.12e}",
                    state.expansions(),
                    state.found_mass(),
                    state.queue_mass(),
                );
            }
            _ => {}
        }
    };
    Ok(state.report(reason))
}

fn cmd_explain(args: &ExplainArgs) -> Result<(), Failure> {
    let kb = load_kb(&args.kb)?;
    let query = parse_query(&args.query)?;
    let options = SearchOptions {
        keep_zero: args.keep_zero,
        ..Default::default()
    };
    let started = Instant::now();
    let report = run_search(&kb, &query, options, &args.stop.criteria(), args.trace)?;
    let wall_time_ms = started.elapsed().as_secs_f64() * 1e3;

    let query_text = query
        .iter()
        .map(|a| a.to_string())
        .collect::<Vec<_>>()
        .join(", ");
    match args.format {
        Format::Json => {
            let out = QueryReport {
                query: query_text,
                explanations: report
                    .explanations
                    .iter()
                    .enumerate()
                    .map(|(i, e)| ReportExplanation {
                        rank: i + 1,
                        prior: e.prior,
                        hypotheses: e.hypotheses.iter().map(|h| h.to_string()).collect(),
                    })
                    .collect(),
                bounds: Bounds {
                    lower: report.lower,
                    upper: report.upper,
                },
                termination: termination_name(report.termination).to_string(),
                expansions: report.expansions,
                wall_time_ms,
            };
            println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
        }
        Format::Table => {
            if report.explanations.is_empty() {
                println!("no explanations found");
            } else {
                println!("{:>4}  {:<16}  hypotheses", "rank", "prior");
                for (i, e) in report.explanations.iter().enumerate() {
                    let hyps = e
                        .hypotheses
                        .iter()
                        .map(|h| h.to_string())
                        .collect::<Vec<_>>()
                        .join(", ");
                    println!("{:>4}  {:<16.12}  {}", i + 1, e.prior, hyps);
                }
            }
            println!();
            println!(
                "bounds: [{:.12}, {:.12}]{}",
                report.lower,
                report.upper,
                if report.termination == TerminationReason::Exhausted {
                    "  (exact)"
                } else {
                    ""
                }
            );
            println!(
                "termination: {} after {} expansions ({:.1} ms)",
                termination_name(report.termination),
                report.expansions,
                wall_time_ms
            );
            if report.disjointness_warning {
                eprintln!(
                    "warning: duplicate proofs reached the same hypothesis set; \
                     rules may not be disjoint and the mass may overcount"
                );
            }
        }
    }
    Ok(())
}

// --- posterior -------------------------------------------------------------------

#[derive(Serialize)]
struct PosteriorReport {
    variable: String,
    observations: String,
    entries: Vec<PosteriorEntry>,
    denominator: Bounds,
}

#[derive(Serialize)]
struct PosteriorEntry {
    value: String,
    lower: f64,
    upper: f64,
    exact: bool,
}

fn resolve_values(args: &PosteriorArgs) -> Result<Vec<String>, Failure> {
    if let Some(values) = &args.values {
        return Ok(values.clone());
    }
    if args.kb == "-" {
        return Err(Failure::Io(
            "error: --values is required when the knowledge base comes from stdin".to_string(),
        ));
    }
    let sidecar = sidecar_path(Path::new(&args.kb));
    let text = std::fs::read_to_string(&sidecar).map_err(|e| {
        Failure::Io(format!(
            "error: cannot determine the value domain of {}: pass --values or provide {} ({e})",
            args.variable,
            sidecar.display()
        ))
    })?;
    let domains = DomainsFile::parse(&text).map_err(|d| diagnostics_failure(vec![d]))?;
    domains.values_of(&args.variable).map(<[String]>::to_vec).ok_or_else(|| {
        Failure::Domain(format!(
            "error: {} does not list variable {}",
            sidecar.display(),
            args.variable
        ))
    })
}

fn cmd_posterior(args: &PosteriorArgs) -> Result<(), Failure> {
    let kb = load_kb(&args.kb)?;
    let values = resolve_values(args)?;
    let observations = parse_query(&args.obs)?;
    let result = distribution(
        &kb,
        &args.variable,
        &values,
        &observations,
        &args.stop.criteria(),
    )?;

    match args.format {
        Format::Json => {
            let out = PosteriorReport {
                variable: result.variable.clone(),
                observations: args.obs.clone(),
                entries: result
                    .entries
                    .iter()
                    .map(|e| PosteriorEntry {
                        value: e.value.clone(),
                        lower: e.lower,
                        upper: e.upper,
                        exact: e.exact,
                    })
                    .collect(),
                denominator: Bounds {
                    lower: result.denominator.lower,
                    upper: result.denominator.upper,
                },
            };
            println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
        }
        Format::Table => {
            let given = if observations.is_empty() {
                String::new()
            } else {
                format!(" | {}", args.obs.trim())
            };
            for e in &result.entries {
                if e.exact {
                    println!(
                        "P({}({}){}) = {:.12}",
                        result.variable, e.value, given, e.lower
                    );
                } else {
                    println!(
                        "P({}({}){}) in [{:.12}, {:.12}]",
                        result.variable, e.value, given, e.lower, e.upper
                    );
                }
            }
        }
    }
    Ok(())
}

// --- check -----------------------------------------------------------------------

/// Exhaustive enumeration is exponential in the joint domain; refuse
/// networks bigger than this many binary-equivalent variables.
const CHECK_SIZE_LIMIT_BITS: f64 = 14.0;

fn cmd_check(args: &CheckArgs) -> Result<(), Failure> {
    let text = read_input(&args.bn)?;
    let bn = BayesianNetwork::parse(&text).map_err(diagnostics_failure)?;

    let bits: f64 = bn
        .variables()
        .iter()
        .map(|v| (v.values.len() as f64).log2())
        .sum();
    if bits > CHECK_SIZE_LIMIT_BITS {
        return Err(Failure::Domain(format!(
            "error: network too large for exhaustive checking: {bits:.1} \
             binary-equivalent variables (limit {CHECK_SIZE_LIMIT_BITS})"
        )));
    }

    let kb_text = match &args.kb {
        Some(path) => read_input(path)?,
        None => program_to_string(&bn.compile::<f64>(&CompileOptions::default()).program),
    };
    let kb = StdKnowledgeBase::parse(&kb_text).map_err(diagnostics_failure)?;

    let oracle_failure = |e: oracle::OracleError| Failure::Domain(format!("error: {e}"));

    println!(
        "{:<24} {:<18} {:<18} {}",
        "marginal", "engine", "enumeration", "|diff|"
    );
    let mut max_diff: f64 = 0.0;
    let mut mismatches = 0usize;
    let mut marginals = 0usize;
    for variable in bn.variables() {
        for value in &variable.values {
            let atom = Atom::new(&variable.name, vec![Term::constant(value)]);
            let engine = mass(&kb, std::slice::from_ref(&atom), &StopCriteria::exhaustive())?;
            let mut assignment = BTreeMap::new();
            assignment.insert(variable.name.clone(), value.clone());
            let reference = oracle::marginal(&bn, &assignment).map_err(oracle_failure)?;
            let diff = (engine.lower - reference).abs();
            max_diff = max_diff.max(diff);
            marginals += 1;
            let flag = if diff > args.tolerance {
                mismatches += 1;
                "  MISMATCH"
            } else {
                ""
            };
            println!(
                "{:<24} {:<18.12} {:<18.12} {:.2e}{flag}",
                format!("{}={}", variable.name, value),
                engine.lower,
                reference,
                diff
            );
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut sampled = 0usize;
    let mut attempts = 0usize;
    while sampled < args.posterior_samples && attempts < 20 * (args.posterior_samples + 1) {
        attempts += 1;
        let Some((target, target_value, observations)) = sample_posterior_case(&bn, &mut rng)
        else {
            break;
        };
        let reference =
            match oracle::posterior_exact(&bn, &target, &target_value, &observations) {
                Ok(p) => p,
                // Zero-probability observations happen with unlucky draws;
                // resample.
                Err(oracle::OracleError::ZeroProbabilityObservation) => continue,
                Err(e) => return Err(oracle_failure(e)),
            };
        let obs_atoms: Vec<Atom> = observations
            .iter()
            .map(|(name, value)| Atom::new(name, vec![Term::constant(value)]))
            .collect();
        let target_atom = Atom::new(&target, vec![Term::constant(&target_value)]);
        let engine = pha::probability::posterior(
            &kb,
            &target_atom,
            &obs_atoms,
            &StopCriteria::exhaustive(),
        )?;
        let diff = (engine.lower - reference).abs();
        max_diff = max_diff.max(diff);
        let flag = if diff > args.tolerance {
            mismatches += 1;
            "  MISMATCH"
        } else {
            ""
        };
        let obs_text = obs_atoms
            .iter()
            .map(|a| a.to_string())
            .collect::<Vec<_>>()
            .join(", ");
        println!(
            "{:<24} {:<18.12} {:<18.12} {:.2e}{flag}",
            format!("{}={} | {}", target, target_value, obs_text),
            engine.lower,
            reference,
            diff
        );
        sampled += 1;
    }

    println!(
        "{marginals} marginals compared, {sampled} posteriors sampled, max abs diff {max_diff:.2e} (tolerance {:.0e})",
        args.tolerance
    );
    if mismatches > 0 {
        return Err(Failure::Domain(format!(
            "error: {mismatches} answers differ from exhaustive enumeration by more than {:.0e}",
            args.tolerance
        )));
    }
    println!("OK");
    Ok(())
}

/// One random spot-check: a target variable/value and one or two observed
/// variables with random values.
fn sample_posterior_case(
    bn: &BayesianNetwork,
    rng: &mut ChaCha8Rng,
) -> Option<(String, String, BTreeMap<String, String>)> {
    let variables = bn.variables();
    if variables.len() < 2 {
        return None;
    }
    let target = rng.gen_range(0..variables.len());
    let target_value = variables[target].values[rng.gen_range(0..variables[target].values.len())]
        .clone();
    let obs_count = rng.gen_range(1..=2.min(variables.len() - 1));
    let mut pool: Vec<usize> = (0..variables.len()).filter(|&i| i != target).collect();
    let mut observations = BTreeMap::new();
    for _ in 0..obs_count {
        let at = rng.gen_range(0..pool.len());
        let v = pool.swap_remove(at);
        let value = variables[v].values[rng.gen_range(0..variables[v].values.len())].clone();
        observations.insert(variables[v].name.clone(), value);
    }
    Some((variables[target].name.clone(), target_value, observations))
}
