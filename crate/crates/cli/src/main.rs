//! `cvexact compile|compare|preset|verify`.
//!
//! Exit codes: 0 success, 2 bad input, 3 target not eligible, 4 verification
//! above threshold.

mod dsl;
mod presets;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use cvexact::baseline::{
    estimate_commutator_count, trotter_error, trotter_suzuki, CommutatorEstimate,
};
use cvexact::circuit::{count_gates, deserialize, optimize, serialize, DecompReport};
use cvexact::decomposer::{check_eligibility, compile, CompileOptions, DecompError, TargetGate};
use cvexact::gate::GateSeq;
use cvexact::identities::Kernel;
use cvexact::verifier::{
    residual_against, verify_numeric, verify_symbolic, FockContext, NumericReport,
};

const SYMBOLIC_TOLERANCE: f64 = 1e-9;
const DENSE_LIMIT: f64 = 4096.0;

#[derive(Parser)]
#[command(
    name = "cvexact",
    version,
    about = "Exact decomposition of quadrature-monomial gates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a target such as "t=0.1 X[0] X[1] X[2]^2"
    Compile {
        spec: String,
        #[command(flatten)]
        flags: CompileFlags,
    },
    /// Compare the exact gate count with the commutator-method estimate
    Compare {
        spec: String,
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
        #[command(flatten)]
        flags: CompileFlags,
    },
    /// Compile the kernel gate of a named application
    Preset {
        /// bose-hubbard-dipole, bose-hubbard-tunneling, cross-kerr,
        /// pca-rotation, matrix-inversion, pde-cubic or montecarlo:<n>
        name: String,
        #[arg(short, long, default_value_t = 1.0, allow_negative_numbers = true)]
        t: f64,
        #[command(flatten)]
        flags: CompileFlags,
    },
    /// Check a circuit document against a target
    Verify {
        circuit: PathBuf,
        spec: String,
        #[command(flatten)]
        numeric: NumericFlags,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Args, Clone)]
struct CompileFlags {
    /// Write the circuit document here
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_verify: bool,
    #[command(flatten)]
    numeric: NumericFlags,
    /// Cubic strength t in the 3 alpha^2 t = s split of the P X^2 identity
    #[arg(long, default_value_t = 1.0)]
    param_split: f64,
    /// Size of the conjugating shifts in the ancilla and sum identities
    #[arg(long, default_value_t = CompileOptions::default().shift_scale)]
    shift_scale: f64,
    #[arg(long)]
    no_optimize: bool,
    /// Abort once this many non-Fourier gates have been emitted
    #[arg(long, default_value_t = CompileOptions::default().max_gates)]
    max_gates: usize,
    /// Split a sum of products into K exact product-formula steps
    #[arg(long)]
    trotter: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Clone)]
struct NumericFlags {
    /// Fock cutoff D for the numeric check (skipped when absent)
    #[arg(long)]
    numeric_cutoff: Option<usize>,
    /// Compared levels d per mode
    #[arg(long, default_value_t = 5)]
    subspace: usize,
    #[arg(long, default_value_t = 1e-5)]
    numeric_tolerance: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

enum Failure {
    Input(String),
    Ineligible(String),
    Verification(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Ineligible(_) => 3,
            Failure::Verification(_) => 4,
        }
    }
}

impl From<DecompError> for Failure {
    fn from(e: DecompError) -> Self {
        match e {
            DecompError::InvalidTarget(_) => Failure::Input(e.to_string()),
            DecompError::GateBudget(_) => {
                Failure::Input(format!("{e}; raise --max-gates to continue"))
            }
            _ => Failure::Ineligible(e.to_string()),
        }
    }
}

impl From<dsl::ParseError> for Failure {
    fn from(e: dsl::ParseError) -> Self {
        Failure::Input(format!("cannot parse target: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compile { spec, flags } => cmd_compile(&spec, &flags),
        Command::Compare {
            spec,
            epsilon,
            flags,
        } => cmd_compare(&spec, epsilon, &flags),
        Command::Preset { name, t, flags } => match presets::lookup(&name, t) {
            Some(target) => cmd_compile(&dsl::format(&target), &flags),
            None => Err(Failure::Input(format!(
                "unknown preset `{name}`; known: {}",
                presets::NAMES.join(", ")
            ))),
        },
        Command::Verify {
            circuit,
            spec,
            numeric,
            format,
        } => cmd_verify(&circuit, &spec, &numeric, format),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Input(m) | Failure::Ineligible(m) | Failure::Verification(m)) = &f;
            eprintln!("error: {m}");
            ExitCode::from(f.code())
        }
    }
}

fn options(flags: &CompileFlags) -> Result<CompileOptions, Failure> {
    if !(flags.param_split.is_finite() && flags.param_split > 0.0) {
        return Err(Failure::Input("--param-split must be positive".into()));
    }
    if !(flags.shift_scale.is_finite() && flags.shift_scale > 0.0) {
        return Err(Failure::Input("--shift-scale must be positive".into()));
    }
    Ok(CompileOptions {
        param_split: flags.param_split,
        shift_scale: flags.shift_scale,
        optimize: !flags.no_optimize,
        max_gates: flags.max_gates,
    })
}

fn numeric_check(
    seq: &GateSeq,
    target: &TargetGate,
    flags: &NumericFlags,
) -> Result<Option<(NumericReport, FockContext)>, Failure> {
    let Some(cutoff) = flags.numeric_cutoff else {
        return Ok(None);
    };
    let mut ctx = FockContext::new(cutoff, flags.subspace);
    ctx.tolerance = flags.numeric_tolerance;
    verify_numeric(seq, target, &ctx)
        .map(|r| Some((r, ctx)))
        .map_err(|e| Failure::Input(format!("numeric check: {e}")))
}

fn cmd_compile(spec: &str, flags: &CompileFlags) -> Result<(), Failure> {
    if let Some(k) = flags.trotter {
        return cmd_trotter(spec, k, flags);
    }
    let target = dsl::parse(spec)?;
    let opts = options(flags)?;
    let verdict = check_eligibility(&target);
    let (seq, mut report) = compile(&target, &opts)?;
    let mut failures = Vec::new();
    let mut numeric_ctx = None;
    if !flags.no_verify {
        let r = verify_symbolic(&seq, &target).map_err(|e| Failure::Verification(e.to_string()))?;
        report.residual_symbolic = Some(r);
        if r > SYMBOLIC_TOLERANCE {
            failures.push(format!(
                "symbolic residual {r:e} exceeds {SYMBOLIC_TOLERANCE:e}"
            ));
        }
        if let Some((n, ctx)) = numeric_check(&seq, &target, &flags.numeric)? {
            report.residual_numeric = Some(n.subspace_error);
            report.phase_offset = Some(n.phase_offset);
            if n.subspace_error > ctx.tolerance {
                failures.push(format!(
                    "numeric error {:e} exceeds {:e} at cutoff {} on {} levels",
                    n.subspace_error, ctx.tolerance, ctx.cutoff, ctx.subspace
                ));
            }
            numeric_ctx = Some(ctx);
        }
    }
    write_circuit(&seq, flags.out.as_ref())?;
    let route = verdict.route.map(|r| r.to_string()).unwrap_or_default();
    match flags.format {
        Format::Json => println!(
            "{}",
            json!({ "target": dsl::format(&target), "route": route, "reason": verdict.reason, "report": report })
        ),
        Format::Text => print!(
            "{}",
            text_report(&target, &route, &report, numeric_ctx.as_ref())
        ),
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(failures.join("; ")))
    }
}

fn write_circuit(seq: &GateSeq, out: Option<&PathBuf>) -> Result<(), Failure> {
    if let Some(path) = out {
        let doc = serialize(seq).map_err(|e| Failure::Input(e.to_string()))?;
        fs::write(path, doc).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn text_report(
    target: &TargetGate,
    route: &str,
    r: &DecompReport,
    ctx: Option<&FockContext>,
) -> String {
    let mut s = String::new();
    s += &format!("target      {}\n", dsl::format(target));
    s += &format!("route       {route}\n");
    s += &format!(
        "gates       {} non-Fourier, {} total\n",
        r.n_gates_nonfourier, r.n_gates_total
    );
    s += &format!(
        "before opt  {} non-Fourier, {} total\n",
        r.n_gates_preopt, r.n_gates_preopt_total
    );
    s += &format!("ancillas    {}\n", r.n_ancillas);
    s += &format!("depth       {}\n", r.recursion_depth);
    let trace: Vec<String> = r
        .recursion_trace
        .iter()
        .map(|(l, d)| format!("{l}@{d}"))
        .collect();
    s += &format!(
        "trace       {}\n",
        if trace.is_empty() {
            "-".to_string()
        } else {
            trace.join(" ")
        }
    );
    match r.residual_symbolic {
        Some(v) => s += &format!("symbolic    residual {v:e}\n"),
        None => s += "symbolic    skipped\n",
    }
    if let (Some(e), Some(p), Some(ctx)) = (r.residual_numeric, r.phase_offset, ctx) {
        s += &format!(
            "numeric     error {e:e}, phase {p:e} (D={}, d={})\n",
            ctx.cutoff, ctx.subspace
        );
    }
    s
}

fn cmd_trotter(spec: &str, k: usize, flags: &CompileFlags) -> Result<(), Failure> {
    let sum = dsl::parse_sum(spec)?;
    let terms: Vec<_> = sum
        .terms
        .iter()
        .map(|f| Kernel::product(f.iter().copied()).to_poly())
        .collect();
    let raw = trotter_suzuki(&terms, sum.strength, k)?;
    let seq = if flags.no_optimize {
        raw.clone()
    } else {
        optimize(&raw)
    };
    let generator = terms
        .iter()
        .fold(cvexact::weyl::NOPoly::zero(), |acc, p| &acc + p);
    // Quadratic or higher terms give non-terminating conjugation series; the
    // symbolic residual is then unavailable.
    let residual = if flags.no_verify {
        None
    } else {
        residual_against(&seq, &generator, sum.strength).ok()
    };
    let numeric = match (flags.no_verify, flags.numeric.numeric_cutoff) {
        (false, Some(cutoff)) => {
            let modes = seq.total_modes().max(1) as u32;
            if (cutoff as f64).powi(modes as i32) > DENSE_LIMIT {
                return Err(Failure::Input(format!(
                    "dense check needs {cutoff}^{modes} > {DENSE_LIMIT} states"
                )));
            }
            let ctx = FockContext::new(cutoff, flags.numeric.subspace);
            Some(trotter_error(&terms, sum.strength, k, &ctx)?)
        }
        _ => None,
    };
    write_circuit(&seq, flags.out.as_ref())?;
    let gates = count_gates(&seq, true);
    match flags.format {
        Format::Json => println!(
            "{}",
            json!({ "terms": sum.terms.len(), "steps": k, "n_gates_nonfourier": gates,
                    "n_gates_total": seq.len(), "n_ancillas": seq.ancilla_modes.len(),
                    "residual_symbolic": residual,
                    "residual_numeric": numeric.as_ref().map(|n| n.subspace_error) })
        ),
        Format::Text => {
            println!("product formula  {} terms, {k} steps", sum.terms.len());
            println!("gates            {gates} non-Fourier, {} total", seq.len());
            if let Some(r) = residual {
                println!("symbolic         residual {r:e} (approximation)");
            }
            if let Some(n) = &numeric {
                println!(
                    "numeric          error {:e} against the exact exponential",
                    n.subspace_error
                );
            }
        }
    }
    Ok(())
}

fn cmd_compare(spec: &str, epsilon: f64, flags: &CompileFlags) -> Result<(), Failure> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Failure::Input("--epsilon must be positive".into()));
    }
    let target = dsl::parse(spec)?;
    let (_, report) = compile(&target, &options(flags)?)?;
    let CommutatorEstimate {
        count,
        k,
        repeats,
        levels,
        model,
    } = estimate_commutator_count(&target, epsilon);
    let ratio = count / report.n_gates_nonfourier.max(1) as f64;
    match flags.format {
        Format::Json => println!(
            "{}",
            json!({ "target": dsl::format(&target), "exact": report.n_gates_nonfourier,
                    "estimate": count, "k": k, "repeats": repeats, "levels": levels,
                    "epsilon": epsilon, "ratio": ratio, "model": model })
        ),
        Format::Text => {
            println!("target      {}", dsl::format(&target));
            println!("exact       {} gates", report.n_gates_nonfourier);
            println!(
                "commutator  {count:.2e} gates (eps {epsilon:e}, outer K {k}, {levels} levels)"
            );
            println!("ratio       {ratio:.2e}");
            println!("model       {model}");
        }
    }
    Ok(())
}

fn cmd_verify(
    path: &PathBuf,
    spec: &str,
    numeric: &NumericFlags,
    format: Format,
) -> Result<(), Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let seq = deserialize(&text).map_err(|e| Failure::Input(e.to_string()))?;
    let target = dsl::parse(spec)?;
    let residual =
        verify_symbolic(&seq, &target).map_err(|e| Failure::Verification(e.to_string()))?;
    let num = numeric_check(&seq, &target, numeric)?;
    match format {
        Format::Json => println!(
            "{}",
            json!({ "target": dsl::format(&target), "residual_symbolic": residual,
                    "residual_numeric": num.as_ref().map(|n| n.0.subspace_error),
                    "phase_offset": num.as_ref().map(|n| n.0.phase_offset) })
        ),
        Format::Text => {
            println!("target      {}", dsl::format(&target));
            println!("symbolic    residual {residual:e}");
            if let Some((n, ctx)) = &num {
                println!(
                    "numeric     error {:e}, phase {:e} (D={}, d={})",
                    n.subspace_error, n.phase_offset, ctx.cutoff, ctx.subspace
                );
            }
        }
    }
    if residual > SYMBOLIC_TOLERANCE {
        return Err(Failure::Verification(format!(
            "symbolic residual {residual:e} exceeds {SYMBOLIC_TOLERANCE:e}"
        )));
    }
    if let Some((n, ctx)) = num {
        if n.subspace_error > ctx.tolerance {
            return Err(Failure::Verification(format!(
                "numeric error {:e} exceeds {:e}",
                n.subspace_error, ctx.tolerance
            )));
        }
    }
    Ok(())
}
