//! `icx`: solve, evaluate and compare inspection schemes from JSON files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use icx::costfn::checks::{check_monotone, check_submodular, CheckMode, CheckOutcome, MAX_EXHAUSTIVE};
use icx::generate::{seeded_instance, CostClass};
use icx::hard::{
    gap_instance, gap_reference_scheme, gen_nonic_example, gen_xos_hard, intro_instance, query_experiment,
    seeded_params, unique_optimal_scheme,
};
use icx::io::{canonical_json, instance_digest, instance_to_value, parse_instance, parse_scheme, SchemeJson};
use icx::model::{
    agent_utility, best_responses, expected_inspection_cost, is_ic, marginal, principal_favored_response,
    principal_utility,
};
use icx::oracle::{brute_force_deterministic, brute_force_randomized_with};
use icx::report::{solve_report, Mode, SolveOptions, TOOL_VERSION};
use icx::{Error, Execution, Instance, InspectionScheme};

#[derive(Parser)]
#[command(name = "icx", version, about = "Optimal incentive-compatible inspection schemes")]
struct Cli {
    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    /// Also write the JSON output to this file.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Det,
    Rand,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Det => Mode::Det,
            ModeArg::Rand => Mode::Rand,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Intro,
    Gap,
    Nonic,
    XosHard,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    Monotone,
    Submodular,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and print a report.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "det")]
        mode: ModeArg,
        /// Skip the exhaustive submodularity check in rand mode.
        #[arg(long)]
        no_verify: bool,
        /// Include wall-clock time (makes the output run-dependent).
        #[arg(long)]
        timing: bool,
    },
    /// Evaluate a scheme: agent utilities, best responses, IC verdict, principal utility.
    Eval {
        instance: PathBuf,
        scheme: PathBuf,
        /// Tolerance for best responses and the IC check.
        #[arg(long, env = "ICX_TOL", default_value_t = 1e-9)]
        tol: f64,
    },
    /// Run a solver and the matching brute-force oracle and report the gap.
    Compare {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "det")]
        mode: ModeArg,
        /// Allowed gap in det mode.
        #[arg(long, env = "ICX_TOL", default_value_t = 1e-9)]
        tol: f64,
        /// Allowed gap in rand mode.
        #[arg(long, default_value_t = 1e-4)]
        rand_tol: f64,
        /// Payment grid of the randomized oracle.
        #[arg(long, env = "ICX_ALPHA_GRID", default_value_t = 1e-4)]
        alpha_grid: f64,
    },
    /// Solve by exhaustive enumeration (det) or LP over all distributions (rand).
    BruteForce {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "det")]
        mode: ModeArg,
        #[arg(long, env = "ICX_ALPHA_GRID", default_value_t = 1e-4)]
        alpha_grid: f64,
    },
    /// Check the cost function for monotonicity and submodularity.
    CheckCostfn {
        instance: PathBuf,
        /// Exit with code 4 unless this class holds.
        #[arg(long, value_enum)]
        require: Option<ClassArg>,
        /// Sampled checks above this many actions use this many random probes.
        #[arg(long, default_value_t = 20000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write a fixture or random instance.
    Gen {
        #[arg(long, value_enum)]
        family: Family,
        /// Number of actions (gap, random).
        #[arg(long, default_value_t = 10)]
        n: usize,
        /// Prime size of the hidden ground set (xos-hard).
        #[arg(long, default_value_t = 7)]
        k: usize,
        /// Size of the hidden set; changes the family (xos-hard).
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Cost class for the random family.
        #[arg(long, value_enum, default_value = "submodular")]
        class: ClassArg,
        /// Where xos-hard writes the hidden set [default: <out>.hidden.json or hidden.json].
        #[arg(long, value_name = "FILE")]
        sidecar: Option<PathBuf>,
        /// Also write the family's reference scheme here.
        #[arg(long, value_name = "FILE")]
        scheme_out: Option<PathBuf>,
    },
    /// Count value queries needed to locate the hidden rotation class.
    QueryExperiment {
        #[arg(long, default_value_t = 13)]
        k: usize,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Hidden-set size override (not the canonical family).
        #[arg(long)]
        m: Option<usize>,
        /// Omit per-trial counts from the output.
        #[arg(long)]
        summary: bool,
    },
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Io(String),
    /// Ran fine but the result did not meet the requested bar.
    Check(String),
    Gap(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Core(Error::Input(_) | Error::Json(_)) | Failure::Io(_) => 2,
            Failure::Core(Error::Validation(_)) => 3,
            Failure::Core(Error::ClassCheck { .. }) | Failure::Check(_) => 4,
            Failure::Core(Error::SizeLimit(_)) => 5,
            Failure::Core(_) | Failure::Gap(_) => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Io(m) | Failure::Check(m) | Failure::Gap(m) => m.clone(),
        }
    }
}

type CmdResult = Result<Value, (Option<Value>, Failure)>;

fn fail<T>(f: impl Into<Failure>) -> Result<T, (Option<Value>, Failure)> {
    Err((None, f.into()))
}

fn read(path: &Path) -> Result<String, (Option<Value>, Failure)> {
    fs::read_to_string(path).or_else(|e| fail(Failure::Io(format!("cannot read {}: {e}", path.display()))))
}

fn load_instance(path: &Path) -> Result<Instance, (Option<Value>, Failure)> {
    parse_instance(&read(path)?).or_else(fail)
}

fn write(path: &Path, v: &Value) -> Result<(), (Option<Value>, Failure)> {
    let text = serde_json::to_string_pretty(v).expect("values serialize") + "\n";
    fs::write(path, text).or_else(|e| fail(Failure::Io(format!("cannot write {}: {e}", path.display()))))
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("reports serialize")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    let (value, failure) = match run(&cli.command, exec, cli.out.as_deref()) {
        Ok(v) => (Some(v), None),
        Err((v, f)) => (v, Some(f)),
    };
    if let Some(v) = &value {
        let text = serde_json::to_string_pretty(v).expect("values serialize");
        // a closed pipe (e.g. `| head`) is not an error worth a panic
        let _ = writeln!(std::io::stdout().lock(), "{text}");
        if let Some(path) = &cli.out {
            if let Err((_, f)) = write(path, v) {
                eprintln!("error: {}", f.message());
                return ExitCode::from(f.code());
            }
        }
    }
    match failure {
        None => ExitCode::SUCCESS,
        Some(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(cmd: &Command, exec: Execution, out: Option<&Path>) -> CmdResult {
    match cmd {
        Command::Solve { instance, mode, no_verify, timing } => {
            let inst = load_instance(instance)?;
            let opts = SolveOptions { exec, verify_submodular: !no_verify, timing: *timing };
            Ok(to_value(&solve_report(&inst, (*mode).into(), opts).or_else(fail)?))
        }
        Command::Eval { instance, scheme, tol } => {
            let inst = load_instance(instance)?;
            let s = parse_scheme(&inst, &read(scheme)?).or_else(fail)?;
            Ok(evaluate(&inst, &s, *tol))
        }
        Command::Compare { instance, mode, tol, rand_tol, alpha_grid } => {
            let inst = load_instance(instance)?;
            compare(&inst, *mode, *tol, *rand_tol, *alpha_grid, exec)
        }
        Command::BruteForce { instance, mode, alpha_grid } => {
            let inst = load_instance(instance)?;
            let digest = instance_digest(&inst).or_else(fail)?;
            Ok(match mode {
                ModeArg::Det => {
                    let r = brute_force_deterministic(&inst).or_else(fail)?;
                    json!({
                        "tool_version": TOOL_VERSION,
                        "instance_digest": digest,
                        "mode": "det",
                        "scheme": SchemeJson::from_scheme(&inst, &r.scheme),
                        "utility": r.utility,
                    })
                }
                ModeArg::Rand => {
                    let r = brute_force_randomized_with(&inst, *alpha_grid, &[], exec).or_else(fail)?;
                    json!({
                        "tool_version": TOOL_VERSION,
                        "instance_digest": digest,
                        "mode": "rand",
                        "scheme": SchemeJson::from_scheme(&inst, &r.scheme),
                        "utility": r.utility,
                        "p_i": r.p_i,
                        "search": r.search,
                    })
                }
            })
        }
        Command::CheckCostfn { instance, require, samples, seed } => {
            let inst = load_instance(instance)?;
            check_costfn(&inst, *require, *samples, *seed)
        }
        Command::Gen { family, n, k, m, seed, class, sidecar, scheme_out } => {
            generate(*family, *n, *k, *m, *seed, *class, sidecar.as_deref(), scheme_out.as_deref(), out)
        }
        Command::QueryExperiment { k, trials, seed, m, summary } => {
            let mut stats = query_experiment(*k, *trials, *seed, *m, exec).or_else(fail)?;
            if *summary {
                stats.counts.clear();
            }
            let mut v = to_value(&stats);
            v["tool_version"] = json!(TOOL_VERSION);
            Ok(v)
        }
    }
}

fn evaluate(inst: &Instance, s: &InspectionScheme, tol: f64) -> Value {
    let ids = |js: &[usize]| js.iter().map(|&j| inst.id(j).to_string()).collect::<Vec<_>>();
    let agent: serde_json::Map<String, Value> =
        (0..inst.n()).map(|j| (inst.id(j).to_string(), json!(agent_utility(inst, s, j)))).collect();
    let marginals: serde_json::Map<String, Value> =
        (0..inst.n()).map(|j| (inst.id(j).to_string(), json!(marginal(s, j) + 0.0))).collect();
    let (favored, favored_utility) = principal_favored_response(inst, s, tol);
    json!({
        "tool_version": TOOL_VERSION,
        "suggested": inst.id(s.suggested),
        "ic": is_ic(inst, s, tol),
        "agent_utilities": agent,
        "best_responses": ids(&best_responses(inst, s, tol)),
        "principal_utility": principal_utility(inst, s, s.suggested),
        "favored_response": inst.id(favored),
        "favored_principal_utility": favored_utility,
        "marginals": marginals,
        "inspection_cost": expected_inspection_cost(inst, s),
        "tolerance": tol,
    })
}

fn compare(inst: &Instance, mode: ModeArg, tol: f64, rand_tol: f64, grid: f64, exec: Execution) -> CmdResult {
    let opts = SolveOptions { exec, ..SolveOptions::default() };
    let report = solve_report(inst, mode.into(), opts).or_else(fail)?;
    let (oracle_scheme, oracle_utility, tolerance) = match mode {
        ModeArg::Det => {
            let r = brute_force_deterministic(inst).or_else(fail)?;
            (r.scheme, r.utility, tol)
        }
        ModeArg::Rand => {
            let r = brute_force_randomized_with(inst, grid, &[], exec).or_else(fail)?;
            (r.scheme, r.utility, rand_tol)
        }
    };
    let gap = (report.utility - oracle_utility).abs();
    let pass = gap <= tolerance;
    let v = json!({
        "tool_version": TOOL_VERSION,
        "instance_digest": report.instance_digest,
        "mode": report.mode,
        "solver_utility": report.utility,
        "oracle_utility": oracle_utility,
        "gap": gap,
        "tolerance": tolerance,
        "pass": pass,
        "solver_scheme": report.scheme,
        "oracle_scheme": SchemeJson::from_scheme(inst, &oracle_scheme),
    });
    if pass {
        Ok(v)
    } else {
        Err((Some(v), Failure::Gap(format!("solver and oracle differ by {gap:e} > {tolerance:e}"))))
    }
}

fn outcome_value(inst: &Instance, o: &CheckOutcome) -> Value {
    json!({
        "holds": o.holds,
        "witness": o.witness,
        "witness_ids": o.witness.map(|w| describe_witness(inst, &w).to_string()),
    })
}

fn describe_witness(inst: &Instance, w: &icx::costfn::checks::Witness) -> String {
    use icx::costfn::checks::Witness;
    let set = |s| inst.ids_of(s).join(",");
    match *w {
        Witness::Monotone { set: s, element } => format!("v({{{}}} + {}) < v({{{}}})", set(s), inst.id(element), set(s)),
        Witness::Submodular { set: s, element, extra } => format!(
            "gain of {} at {{{}}} is below its gain after adding {}",
            inst.id(element),
            set(s),
            inst.id(extra)
        ),
        Witness::Xos { set: s } => format!("certificate differs at {{{}}}", set(s)),
    }
}

fn check_costfn(inst: &Instance, require: Option<ClassArg>, samples: usize, seed: u64) -> CmdResult {
    let mode = if inst.n() <= MAX_EXHAUSTIVE { CheckMode::Exhaustive } else { CheckMode::Sampled { seed, count: samples } };
    let f = inst.cost_fn().as_ref();
    let mono = check_monotone(f, mode).or_else(fail)?;
    let sub = check_submodular(f, mode).or_else(fail)?;
    let v = json!({
        "tool_version": TOOL_VERSION,
        "instance_digest": instance_digest(inst).or_else(fail)?,
        "n": inst.n(),
        "mode": match mode { CheckMode::Exhaustive => "exhaustive", CheckMode::Sampled { .. } => "sampled" },
        "monotone": outcome_value(inst, &mono),
        "submodular": outcome_value(inst, &sub),
    });
    let missing = match require {
        Some(ClassArg::Monotone) if !mono.holds => Some("monotone"),
        Some(ClassArg::Submodular) if !sub.holds => Some("submodular"),
        _ => None,
    };
    match missing {
        Some(class) => Err((Some(v), Failure::Check(format!("cost function is not {class}")))),
        None => Ok(v),
    }
}

#[allow(clippy::too_many_arguments)]
fn generate(
    family: Family,
    n: usize,
    k: usize,
    m: Option<usize>,
    seed: u64,
    class: ClassArg,
    sidecar: Option<&Path>,
    scheme_out: Option<&Path>,
    out: Option<&Path>,
) -> CmdResult {
    let (inst, scheme) = match family {
        Family::Intro => (intro_instance(), None),
        Family::Gap => (gap_instance(n).or_else(fail)?, Some(gap_reference_scheme(n))),
        Family::Nonic => {
            let ex = gen_nonic_example();
            (ex.instance, Some(ex.scheme))
        }
        Family::Random => {
            if !(1..=20).contains(&n) {
                return fail(Error::Input(format!("random instances need 1 <= n <= 20, got {n}")));
            }
            let class = match class {
                ClassArg::Monotone => CostClass::Monotone,
                ClassArg::Submodular => CostClass::Submodular,
            };
            (seeded_instance(n, seed, class), None)
        }
        Family::XosHard => {
            let params = seeded_params(k, m, seed).or_else(fail)?;
            let inst = gen_xos_hard(&params).or_else(fail)?;
            let hidden = json!({
                "k": params.k,
                "m": params.threshold(),
                "seed": seed,
                "canonical": params.canonical(),
                "hidden_set": params.t_elements(),
                "hidden_ids": params.t_elements().iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            });
            let path = match (sidecar, out) {
                (Some(p), _) => p.to_path_buf(),
                (None, Some(o)) => o.with_extension("hidden.json"),
                (None, None) => PathBuf::from("hidden.json"),
            };
            write(&path, &hidden)?;
            let scheme = if params.canonical() { Some(unique_optimal_scheme(&params).or_else(fail)?) } else { None };
            (inst, scheme)
        }
    };
    if let Some(path) = scheme_out {
        match &scheme {
            Some(s) => write(path, &to_value(&SchemeJson::from_scheme(&inst, s)))?,
            None => return fail(Error::Input("this family has no reference scheme".into())),
        }
    }
    let v = instance_to_value(&inst).or_else(fail)?;
    // canonical form so that digests of generated files match
    Ok(serde_json::from_str(&canonical_json(&v)).expect("canonical JSON parses"))
}
