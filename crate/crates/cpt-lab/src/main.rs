//! Thin command-line front end: argument parsing, file I/O and dispatch into
//! the library. Exit codes: 0 success, 1 I/O or parse failure, 2 regime or
//! precondition failure, 3 audit violation.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cpt_lab::audit::{run_audit, Lemma};
use cpt_lab::optimizer::{diverge, optimize, PayoffProfile};
use cpt_lab::witness::{default_indices, witness, WitnessReport};
use cpt_lab::{
    classify, kernel_law, sample_joint, solve_market_price_of_risk, verify_assumptions,
    ChoquetError, CptSpec, DistortionForm, KernelModel, Law, MarketSpec, Measure,
};

#[derive(Parser)]
#[command(
    name = "cpt-lab",
    about = "Behavioural portfolio objectives under probability distortion: evaluation, well-posedness, witnesses, audits, payoff search",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify well-posedness from the preference quadruple
    Classify(ClassifyArgs),
    /// Exhaustive classifier sweep over a rational parameter grid
    ClassifyGrid(ClassifyGridArgs),
    /// Evaluate the CPT value of a payoff law
    Evaluate(EvaluateArgs),
    /// Build a diverging feasible sequence for an ill-posed regime
    Witness(WitnessArgs),
    /// Audit one of the inequality estimates over a random corpus
    Audit(AuditArgs),
    /// Solve a market's price of risk, verify assumptions, optionally sample
    Market(MarketArgs),
    /// Search for a high-value feasible payoff (well-posed regimes)
    Optimize(OptimizeArgs),
    /// Drive the matching witness past a value target (ill-posed regimes)
    Diverge(DivergeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormArg {
    Power,
    Tk,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    P,
    Q,
}

impl From<MeasureArg> for Measure {
    fn from(m: MeasureArg) -> Measure {
        match m {
            MeasureArg::P => Measure::P,
            MeasureArg::Q => Measure::Q,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CauseArg {
    /// alpha >= beta
    #[value(name = "a_ge_b")]
    AGeB,
    /// beta/delta < 1
    #[value(name = "bd_lt_1")]
    BdLt1,
    /// alpha/gamma > 1
    #[value(name = "ag_gt_1")]
    AgGt1,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long, value_enum, default_value = "power")]
    form: FormArg,
    #[arg(long, default_value_t = 1.0)]
    c_plus: f64,
    #[arg(long, default_value_t = 1.0)]
    c_minus: f64,
}

#[derive(Args)]
struct ClassifyGridArgs {
    /// Grid step; must divide 1 into at most 64 levels
    #[arg(long, default_value_t = 0.05)]
    step: f64,
    /// CSV destination (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    spec_file: PathBuf,
    #[arg(long)]
    law_file: PathBuf,
    /// Absolute quadrature target on quantile-grid bodies
    #[arg(long, default_value_t = 1e-9)]
    body_tol: f64,
    /// Relative tolerance for the fitted tail at the grid junction
    #[arg(long, default_value_t = 0.05)]
    tail_tol: f64,
    /// Totals above this are reported as suspected divergence
    #[arg(long, default_value_t = 1e12)]
    divergence_cutoff: f64,
    /// Absolute tolerance of the truncation root finder
    #[arg(long, default_value_t = 1e-10)]
    root_tol: f64,
}

#[derive(Args)]
struct WitnessArgs {
    #[arg(long, value_enum)]
    cause: CauseArg,
    #[arg(long, default_value_t = 100)]
    n_max: u64,
    #[arg(long, default_value_t = 0.0)]
    x0: f64,
    /// Synthetic kernel variance; ignored when --market-file is given
    #[arg(long, default_value_t = 0.16)]
    v: f64,
    #[arg(long)]
    market_file: Option<PathBuf>,
    /// Preference quadruple; defaults to a per-cause reference spec
    #[arg(long)]
    spec_file: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum LemmaArg {
    Eleql,
    Lemeta,
    L1l2,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long, value_enum)]
    lemma: LemmaArg,
    #[arg(long, default_value_t = 1000)]
    corpus_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Preferences for the budget-constrained audit (lemeta)
    #[arg(long)]
    spec_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0.16)]
    v: f64,
    #[arg(long)]
    market_file: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    x0: f64,
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
}

#[derive(Args)]
struct MarketArgs {
    #[arg(long)]
    market_file: PathBuf,
    /// Also draw joint samples (rho, U, U*) and write them as CSV
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, value_enum, default_value = "q")]
    measure: MeasureArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also emit the kernel quantile grid of this size
    #[arg(long)]
    law_grid: Option<usize>,
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long)]
    spec_file: PathBuf,
    #[arg(long)]
    market_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0.16)]
    v: f64,
    #[arg(long, default_value_t = 1.0)]
    x0: f64,
    #[arg(long, default_value_t = 4000)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
}

#[derive(Args)]
struct DivergeArgs {
    #[arg(long)]
    spec_file: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    x0: f64,
    #[arg(long = "target-M", default_value_t = 100.0)]
    target_m: f64,
    #[arg(long)]
    market_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0.16)]
    v: f64,
}

/// Failure with its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn io(context: &str, e: impl std::fmt::Display) -> Failure {
        Failure { code: 1, message: format!("{context}: {e}") }
    }

    fn precondition(e: impl std::fmt::Display) -> Failure {
        Failure { code: 2, message: e.to_string() }
    }
}

fn full(x: f64) -> String {
    // 17 significant digits round-trip any f64
    format!("{x:.16e}")
}

/// Prints to stdout, treating a closed pipe as a clean stop.
fn emit(line: std::fmt::Arguments<'_>) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if writeln!(out, "{line}").is_err() {
        std::process::exit(0);
    }
}

macro_rules! emitln {
    ($($arg:tt)*) => { emit(format_args!($($arg)*)) };
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::io(&format!("reading {}", path.display()), e))?;
    serde_json::from_str(&text).map_err(|e| {
        Failure::io(
            &format!("parsing {} (line {}, column {})", path.display(), e.line(), e.column()),
            e,
        )
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)
                .map_err(|e| Failure::io(&format!("creating {}", dir.display()), e))?;
        }
    }
    std::fs::write(path, contents)
        .map_err(|e| Failure::io(&format!("writing {}", path.display()), e))
}

fn kernel_from(market_file: &Option<PathBuf>, v: f64) -> Result<KernelModel, Failure> {
    match market_file {
        Some(path) => {
            let market: MarketSpec = read_json(path)?;
            solve_market_price_of_risk(&market).map_err(Failure::precondition)
        }
        None => KernelModel::from_variance(v).map_err(Failure::precondition),
    }
}

fn witness_csv(report: &WitnessReport) -> String {
    let mut out = String::from("n,closed_form,numeric,budget_residual,truncation_level\n");
    for p in &report.points {
        let closed = p.closed_form.map(full).unwrap_or_default();
        let trunc = p.truncation_level.map(full).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.index,
            closed,
            full(p.numeric),
            full(p.budget_residual),
            trunc
        );
    }
    out
}

fn profile_csv(profile: &PayoffProfile) -> String {
    let mut out = String::from("u_lo,u_hi,ustar_lo,ustar_hi,value\n");
    let u = profile.grid.u_edges();
    let us = profile.grid.ustar_edges();
    let nj = profile.grid.n_ustar();
    for (idx, v) in profile.node_values.iter().enumerate() {
        let i = idx / nj;
        let j = idx % nj;
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            full(u[i]),
            full(u[i + 1]),
            full(us[j]),
            full(us[j + 1]),
            full(*v)
        );
    }
    out
}

fn run() -> Result<(), Failure> {
    if let Ok(threads) = std::env::var("CPT_LAB_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    match Cli::parse().command {
        Command::Classify(a) => {
            let form = match a.form {
                FormArg::Power => DistortionForm::PurePower,
                FormArg::Tk => DistortionForm::TverskyKahneman,
            };
            let spec =
                CptSpec::new(a.alpha, a.beta, a.gamma, a.delta, form, a.c_plus, a.c_minus, 0.0)
                    .map_err(Failure::precondition)?;
            let verdict = classify(&spec);
            emitln!("{}", serde_json::to_string(&verdict).expect("verdict serializes"));
            Ok(())
        }
        Command::ClassifyGrid(a) => {
            let grid = cpt_lab::regime::classify_grid(a.step).map_err(Failure::precondition)?;
            let mut csv = String::from("alpha,beta,gamma,delta,verdict,cause\n");
            for p in &grid {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{}",
                    full(p.alpha),
                    full(p.beta),
                    full(p.gamma),
                    full(p.delta),
                    p.verdict,
                    p.cause
                );
            }
            match &a.out {
                Some(path) => {
                    write_file(path, &csv)?;
                    emitln!("{}", serde_json::json!({"rows": grid.len(), "csv_path": path}));
                }
                None => {
                    use std::io::Write;
                    let _ = std::io::stdout().lock().write_all(csv.as_bytes());
                }
            }
            Ok(())
        }
        Command::Evaluate(a) => {
            let spec: CptSpec = read_json(&a.spec_file)?;
            let law: Law = read_json(&a.law_file)?;
            // the reference point is applied once, as a payoff shift to zero
            let shifted = if spec.reference_point() != 0.0 {
                law.shift(-spec.reference_point()).map_err(Failure::precondition)?
            } else {
                law
            };
            let cfg = cpt_lab::EngineConfig {
                body_abs_tol: a.body_tol,
                tail_consistency_tol: a.tail_tol,
                divergence_cutoff: a.divergence_cutoff,
                root_abs_tol: a.root_tol,
                ..cpt_lab::EngineConfig::default()
            };
            match cpt_lab::choquet::cpt_value_with(&shifted, &spec, &cfg) {
                Ok(v) => {
                    emitln!("{}", serde_json::to_string(&v).expect("value serializes"));
                    Ok(())
                }
                Err(e @ ChoquetError::UndefinedFunctional { .. }) => {
                    Err(Failure::precondition(e))
                }
                Err(e) => Err(Failure::precondition(e)),
            }
        }
        Command::Witness(a) => {
            let model = kernel_from(&a.market_file, a.v)?;
            let (cause, default_spec) = match a.cause {
                CauseArg::AGeB => {
                    (cpt_lab::Cause::AlphaGeBeta, CptSpec::power(0.9, 0.5, 1.0, 1.0))
                }
                CauseArg::BdLt1 => (
                    cpt_lab::Cause::BetaDeltaBelowOne,
                    CptSpec::power(0.6, 0.7, 0.15, 0.9),
                ),
                CauseArg::AgGt1 => (
                    cpt_lab::Cause::AlphaGammaAboveOne,
                    CptSpec::power(0.9, 0.95, 0.3, 0.9),
                ),
            };
            let spec = match &a.spec_file {
                Some(path) => read_json(path)?,
                None => default_spec.expect("reference spec is valid"),
            };
            let indices = default_indices(a.n_max);
            let report =
                witness(cause, &spec, &model, a.x0, &indices).map_err(Failure::precondition)?;
            let csv_path = a.output_dir.join(format!("witness_{}.csv", report.cause));
            write_file(&csv_path, &witness_csv(&report))?;
            emitln!("{}", serde_json::json!({ "report": report, "csv_path": csv_path }));
            Ok(())
        }
        Command::Audit(a) => {
            let lemma = match a.lemma {
                LemmaArg::Eleql => Lemma::EleqL,
                LemmaArg::Lemeta => Lemma::Lemeta,
                LemmaArg::L1l2 => Lemma::L1L2,
            };
            let spec = match &a.spec_file {
                Some(path) => read_json(path)?,
                None => CptSpec::power(0.5, 0.8, 0.6, 0.7).expect("reference spec is valid"),
            };
            let model = kernel_from(&a.market_file, a.v)?;
            let run = run_audit(lemma, a.corpus_size, a.seed, &spec, &model, a.x0)
                .map_err(Failure::precondition)?;
            let mut csv = String::from("case,lemma,lhs,rhs,slack,vacuous,pass\n");
            for (i, c) in run.cases.iter().enumerate() {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{}",
                    i,
                    c.lemma,
                    full(c.lhs),
                    full(c.rhs),
                    full(c.slack()),
                    c.vacuous,
                    c.pass
                );
            }
            let csv_path = a.output_dir.join(format!("audit_{lemma}.csv"));
            write_file(&csv_path, &csv)?;
            emitln!(
                "{}",
                serde_json::json!({
                    "lemma": lemma,
                    "cases": run.cases.len(),
                    "violations": run.violations,
                    "vacuous": run.vacuous,
                    "csv_path": csv_path,
                })
            );
            if run.violations > 0 {
                return Err(Failure {
                    code: 3,
                    message: format!("{} audit violation(s)", run.violations),
                });
            }
            Ok(())
        }
        Command::Market(a) => {
            let market: MarketSpec = read_json(&a.market_file)?;
            let model = solve_market_price_of_risk(&market).map_err(Failure::precondition)?;
            let report = verify_assumptions(&model);
            let mut sample_path = None;
            if let Some(n) = a.samples {
                let measure: Measure = a.measure.into();
                let samples =
                    sample_joint(&model, measure, n, a.seed).map_err(Failure::precondition)?;
                let mut csv = String::from("rho,U,U_star\n");
                for s in &samples {
                    let _ = writeln!(csv, "{},{},{}", full(s.rho), full(s.u), full(s.u_star));
                }
                let path = a.output_dir.join(format!(
                    "samples_{}.csv",
                    match measure {
                        Measure::P => "P",
                        Measure::Q => "Q",
                    }
                ));
                write_file(&path, &csv)?;
                sample_path = Some(path);
            }
            let mut law_summary = None;
            if let Some(g) = a.law_grid {
                let law =
                    kernel_law(&model, a.measure.into(), g).map_err(Failure::precondition)?;
                law_summary = Some(law);
            }
            emitln!(
                "{}",
                serde_json::json!({
                    "model": model,
                    "assumptions": report,
                    "samples_csv": sample_path,
                    "kernel_law": law_summary,
                })
            );
            Ok(())
        }
        Command::Optimize(a) => {
            let spec: CptSpec = read_json(&a.spec_file)?;
            let model = kernel_from(&a.market_file, a.v)?;
            let out =
                optimize(&spec, &model, a.x0, a.iters, a.seed).map_err(Failure::precondition)?;
            let trace_path = a.output_dir.join("optimize_trace.csv");
            let mut csv = String::from("step,best_value\n");
            for (i, v) in out.trace.iter().enumerate() {
                let _ = writeln!(csv, "{},{}", i, full(*v));
            }
            write_file(&trace_path, &csv)?;

            let profile_path = a.output_dir.join("optimize_profile.csv");
            write_file(&profile_path, &profile_csv(&out.best))?;
            emitln!(
                "{}",
                serde_json::json!({
                    "best_value": out.best_value,
                    "evaluations": out.evaluations,
                    "trace_csv_path": trace_path,
                    "profile_csv_path": profile_path,
                })
            );
            Ok(())
        }
        Command::Diverge(a) => {
            let spec: CptSpec = read_json(&a.spec_file)?;
            let model = kernel_from(&a.market_file, a.v)?;
            let out = diverge(&spec, &model, a.x0, a.target_m).map_err(Failure::precondition)?;
            emitln!("{}", serde_json::to_string(&out).expect("outcome serializes"));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
