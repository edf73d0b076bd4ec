use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use selbal::bounds::{bracket_table, sigma_brackets, DEFAULT_THRESHOLD_CAP};
use selbal::construction::{
    build_instance, figure_example, plan_parameters, ConstructionParams, LevelZero,
};
use selbal::geometry::{find_shell, smallest_shell};
use selbal::instance::{parse_instance, write_family, Instance};
use selbal::solver::{
    sample_random, solve_branch_bound_with_stats, solve_exhaustive, solve_exhaustive_real,
    solve_mitm, structural_verify, MitmOptions, RealFamily, RealVerdict, Verdict, DEFAULT_BUDGET,
    DEFAULT_MEMORY_BUDGET,
};
use selbal::{UnitVectorFamily, VERSION};

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;

const DEFAULT_TRIALS: u64 = 1_000_000;
const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(
    name = "selbal",
    version,
    about = "Selectively balancing unit vectors: build, search, verify, bound"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a constructed instance file.
    Generate(GenerateArgs),
    /// Decide whether an instance is selectively balancing.
    Solve(SolveArgs),
    /// Check the construction preconditions recorded in an instance.
    Verify(VerifyArgs),
    /// Bracket sigma(n) between a construction and the counting threshold.
    Bounds(BoundsArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Engine {
    Exhaustive,
    Mitm,
    Bb,
    Sample,
    Structural,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Format {
    Json,
    Table,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum LevelZeroArg {
    Translates,
    AllBasis,
}

#[derive(Args, Debug)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// The 34-vector family on the 5 x 5 grid.
    #[arg(long = "example-figure2", conflicts_with_all = ["plan", "dim", "base", "depth", "side"])]
    example_figure2: bool,
    /// Plan parameters from lambda and d instead of giving them.
    #[arg(long, requires_all = ["lambda", "dim"])]
    plan: bool,
    #[arg(long)]
    lambda: Option<f64>,
    /// Lattice dimension d.
    #[arg(short = 'd', long = "dim")]
    dim: Option<usize>,
    /// Base p.
    #[arg(short = 'p', long = "base", default_value_t = 2)]
    base: u32,
    /// Chain depth k.
    #[arg(short = 'k', long = "depth")]
    depth: Option<u32>,
    /// Side length L.
    #[arg(short = 'L', long = "side")]
    side: Option<u64>,
    /// Take the most populated shell of [-D, D]^d instead of the smallest
    /// shell that is large enough.
    #[arg(long = "shell-box")]
    shell_box: Option<i64>,
    #[arg(long = "level0", value_enum, default_value_t = LevelZeroArg::Translates)]
    level0: LevelZeroArg,
    /// Instance file to write (standard output when absent).
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Engine::Exhaustive)]
    engine: Engine,
    /// Node budget (exhaustive, bb), stored-entry budget (mitm) or number of
    /// trials (sample).
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Grid cell side for mitm, as a fraction of the unit length.
    #[arg(long = "cell-side")]
    cell_side: Option<f64>,
    /// Band around norm 1 treated as undecidable for floating-point input.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    instance: PathBuf,
    /// Random sign vectors to try after the structural checks pass.
    #[arg(long, default_value_t = 0)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    /// A single n.
    #[arg(short = 'n', conflicts_with_all = ["from", "to"])]
    n: Option<u64>,
    #[arg(long, requires = "to")]
    from: Option<u64>,
    #[arg(long, requires = "from")]
    to: Option<u64>,
    #[arg(long, default_value_t = 1)]
    step: u64,
    /// Largest m tried for the counting threshold.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD_CAP)]
    cap: u64,
    #[command(flatten)]
    out: Output,
}

fn emit(out: &Output, report: &Value, table: impl FnOnce() -> String) -> anyhow::Result<()> {
    let text = match out.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            s
        }
        Format::Table => table(),
    };
    match &out.output {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn read_instance(path: &Path) -> anyhow::Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("parsing {}", path.display()))
}

fn set_threads(threads: Option<usize>) -> anyhow::Result<()> {
    if let Some(n) = threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn family_summary(family: &UnitVectorFamily) -> Value {
    let (m, n) = (family.len() as f64, family.dim() as f64);
    json!({
        "n": family.dim(),
        "m": family.len(),
        "p": family.base(),
        "k": family.exp(),
        "ratio": if n > 1.0 { json!(m / (n * n.log2())) } else { Value::Null },
    })
}

fn table_of(value: &Value) -> String {
    fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
        match v {
            Value::Object(map) => {
                for (k, x) in map {
                    let key = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    flatten(&key, x, rows);
                }
            }
            Value::Array(xs) if xs.iter().all(Value::is_number) => {
                let cells: Vec<String> = xs.iter().map(Value::to_string).collect();
                rows.push((prefix.to_string(), cells.join(" ")));
            }
            Value::String(s) => rows.push((prefix.to_string(), s.clone())),
            other => rows.push((prefix.to_string(), other.to_string())),
        }
    }
    let mut rows = Vec::new();
    flatten("", value, &mut rows);
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<width$}  {v}\n"))
        .collect()
}

fn cmd_generate(args: &GenerateArgs) -> anyhow::Result<u8> {
    let mut planned = Value::Null;
    let family = if args.example_figure2 {
        figure_example()
    } else if args.plan {
        let lambda = args.lambda.expect("required by clap");
        let d = args.dim.expect("required by clap");
        let plan = plan_parameters(lambda, d)?;
        planned = json!({
            "lambda": plan.lambda,
            "d": plan.dim,
            "D": plan.box_bound,
            "L": plan.side,
            "k": plan.depth,
            "m": plan.vector_count.to_string(),
            "n": plan.ambient_dim.map(|n| n.to_string()),
            "ratio": plan.ratio,
            "mu_range": [plan.mu_range.0, plan.mu_range.1],
        });
        build_instance(&plan.params()?)?
    } else {
        let (Some(d), Some(k), Some(side)) = (args.dim, args.depth, args.side) else {
            bail!("give --example-figure2, --plan --lambda X -d D, or all of -d, -k and -L");
        };
        let need = (args.base as usize)
            .checked_pow(2 * k)
            .context("p^(2k) overflows")?;
        let shell = match args.shell_box {
            Some(b) => find_shell(d, b)?,
            None => smallest_shell(d, need)?,
        };
        let level_zero = match args.level0 {
            LevelZeroArg::Translates => LevelZero::Translates,
            LevelZeroArg::AllBasis => LevelZero::AllBasis,
        };
        build_instance(&ConstructionParams::new(
            args.base, k, side, shell, level_zero,
        )?)?
    };
    let text = write_family(&family);
    let mut summary = family_summary(&family);
    if !planned.is_null() {
        summary["plan"] = planned;
    }
    match &args.output {
        Some(path) => {
            fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
            println!("{}", serde_json::to_string(&summary)?);
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            eprintln!("{}", serde_json::to_string(&summary)?);
        }
    }
    Ok(EXIT_OK)
}

fn exit_for(v: &Verdict) -> u8 {
    if v.is_definitive() {
        EXIT_OK
    } else {
        EXIT_INCONCLUSIVE
    }
}

fn cmd_solve(args: &SolveArgs) -> anyhow::Result<u8> {
    set_threads(args.threads)?;
    let instance = read_instance(&args.instance)?;
    let config = json!({
        "command": "solve",
        "instance": args.instance.display().to_string(),
        "engine": args.engine,
        "budget": args.budget,
        "seed": args.seed,
        "cell_side": args.cell_side,
        "tolerance": args.tolerance,
        "threads": args.threads,
    });
    let family = match instance {
        Instance::Exact(f) => f,
        Instance::Real(vectors) => return solve_real(args, vectors, config),
    };
    let mut stats = Value::Null;
    let (verdict, budget) = match args.engine {
        Engine::Exhaustive => {
            let b = args.budget.unwrap_or(DEFAULT_BUDGET);
            (solve_exhaustive(&family, b)?, Some(b))
        }
        Engine::Bb => {
            let b = args.budget.unwrap_or(DEFAULT_BUDGET);
            let (v, st) = solve_branch_bound_with_stats(&family, b)?;
            stats = json!({ "nodes": st.nodes, "pruned": st.pruned, "leaves": st.leaves });
            (v, Some(b))
        }
        Engine::Mitm => {
            let b = args.budget.unwrap_or(DEFAULT_MEMORY_BUDGET);
            let opts = MitmOptions {
                cell_side: args.cell_side,
                memory_budget: b,
            };
            (solve_mitm(&family, opts)?, Some(b))
        }
        Engine::Sample => {
            let t = args.budget.unwrap_or(DEFAULT_TRIALS);
            (sample_random(&family, t, args.seed)?, Some(t))
        }
        Engine::Structural => (structural_verify(&family)?, None),
    };
    let mut report = serde_json::to_value(verdict.report(family.scale_sq()))?;
    // Budgets are echoed for every engine, not only on inconclusive runs.
    report["budget"] = json!(budget);
    report["version"] = json!(VERSION);
    report["config"] = config;
    report["instance"] = family_summary(&family);
    if !stats.is_null() {
        report["stats"] = stats;
    }
    emit(&args.out, &report, || table_of(&report))?;
    Ok(exit_for(&verdict))
}

fn solve_real(args: &SolveArgs, vectors: Vec<Vec<f64>>, config: Value) -> anyhow::Result<u8> {
    if args.engine != Engine::Exhaustive {
        bail!("floating-point instances are only supported by the exhaustive engine");
    }
    let family = RealFamily::new(vectors, args.tolerance)?;
    let budget = args.budget.unwrap_or(DEFAULT_BUDGET);
    let verdict = solve_exhaustive_real(&family, args.tolerance, budget)?;
    let mut report = json!({
        "verdict": verdict.label(),
        "method": "exhaustive",
        "budget": budget,
        "version": VERSION,
        "config": config,
        "instance": { "n": family.dim(), "m": family.len() },
    });
    match &verdict {
        RealVerdict::Balancing {
            witness,
            norm_sq,
            explored,
        } => {
            report["witness"] = json!(witness);
            report["norm_sq"] = json!(norm_sq);
            report["explored"] = json!(explored);
        }
        RealVerdict::NotBalancing {
            min_norm_sq,
            minimizer,
            explored,
        } => {
            report["minimizer"] = json!(minimizer);
            report["min_norm_sq"] = json!(min_norm_sq);
            report["explored"] = json!(explored);
        }
        RealVerdict::Boundary {
            candidate,
            norm_sq,
            count,
            explored,
        } => {
            report["candidate"] = json!(candidate);
            report["norm_sq"] = json!(norm_sq);
            report["boundary_count"] = json!(count);
            report["explored"] = json!(explored);
        }
        RealVerdict::Inconclusive { explored, .. } => {
            report["explored"] = json!(explored);
        }
    }
    emit(&args.out, &report, || table_of(&report))?;
    Ok(if verdict.is_definitive() {
        EXIT_OK
    } else {
        EXIT_INCONCLUSIVE
    })
}

fn cmd_verify(args: &VerifyArgs) -> anyhow::Result<u8> {
    set_threads(args.threads)?;
    let family = match read_instance(&args.instance)? {
        Instance::Exact(f) => f,
        Instance::Real(_) => bail!("floating-point instances carry no construction to verify"),
    };
    let mut report = json!({
        "version": VERSION,
        "config": {
            "command": "verify",
            "instance": args.instance.display().to_string(),
            "trials": args.trials,
            "seed": args.seed,
            "threads": args.threads,
        },
        "instance": family_summary(&family),
    });
    let code = match structural_verify(&family) {
        Ok(verdict) => {
            report["structural"] = json!("pass");
            report["verdict"] = serde_json::to_value(verdict.report(family.scale_sq()))?;
            if args.trials > 0 {
                let sampled = sample_random(&family, args.trials, args.seed)?;
                report["sample"] = serde_json::to_value(sampled.report(family.scale_sq()))?;
                if sampled.is_balancing() {
                    // A witness here would contradict the structural verdict.
                    report["structural"] = json!("contradicted");
                }
            }
            if report["structural"] == "pass" {
                EXIT_OK
            } else {
                EXIT_ERROR
            }
        }
        Err(selbal::Error::Precondition { check, detail }) => {
            report["structural"] = json!("fail");
            report["failed_check"] = json!(check.name());
            report["detail"] = json!(detail);
            eprintln!("precondition failed: {check} ({detail})");
            EXIT_ERROR
        }
        Err(e) => return Err(e.into()),
    };
    emit(&args.out, &report, || table_of(&report))?;
    Ok(code)
}

fn cmd_bounds(args: &BoundsArgs) -> anyhow::Result<u8> {
    let ns: Vec<u64> = match (args.n, args.from, args.to) {
        (Some(n), _, _) => vec![n],
        (None, Some(a), Some(b)) => {
            if args.step == 0 || a == 0 || a > b {
                bail!("need 1 <= --from <= --to and --step >= 1");
            }
            (a..=b).step_by(args.step as usize).collect()
        }
        _ => bail!("give -n N or --from A --to B"),
    };
    if ns.contains(&0) {
        bail!("n must be at least 1");
    }
    let rows = sigma_brackets(ns, args.cap)?;
    let report = json!({
        "version": VERSION,
        "config": {
            "command": "bounds",
            "n": args.n,
            "from": args.from,
            "to": args.to,
            "step": args.step,
            "cap": args.cap,
        },
        "rows": rows,
    });
    emit(&args.out, &report, || bracket_table(&rows))?;
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { EXIT_OK });
        }
    };
    let result = match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bounds(a) => cmd_bounds(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
