//! Command-line front end: single evaluations, convergence studies emitting
//! CSV, the two-benchmark decay-rate table and preflight diagnostics.
//!
//! Exit codes: 0 success, 1 usage/parse/I-O, 2 preflight failure,
//! 3 non-convergence.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex;
use serde_json::json;

use crate::analysis::{fit_decay_rate, largest_safe_d_prime};
use crate::exprparse::{self, Expr};
use crate::model::{ellipse_contour, preflight, PreflightReport};
use crate::oracle::{exact_exp_series, exact_reciprocal, fp_limit_oracle, OracleConfig};
use crate::quadrature::{fp_integral_adaptive, fp_integral_full, fp_integral_symmetric};
use crate::{FpError, FpProblem64, FpResult64, Integrand64, QuadratureConfig};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PREFLIGHT: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "fpq",
    about = "Finite-part integrals of x^-n f(x) over [0,1] by contour quadrature",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate one finite-part integral adaptively.
    Compute(ComputeArgs),
    /// Run a convergence study over a list of node counts, emitting CSV.
    Study(StudyArgs),
    /// Reproduce the decay-rate benchmark table for the two reference integrals.
    Table2,
    /// Run the contour preflight checks only.
    Check(CheckArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SymmetricMode {
    Auto,
    On,
    Off,
}

#[derive(Args, Debug)]
pub struct ComputeArgs {
    /// Order of the singularity x^-n (n >= 1).
    #[arg(short = 'n', long = "order")]
    pub n: u32,
    /// Integrand f(z), e.g. "exp(z)" or "1/(1+z)".
    #[arg(short = 'f', long = "function")]
    pub expr: String,
    /// Ellipse parameter rho > 1 (foci 0 and 1, larger = wider contour).
    #[arg(long, default_value_t = 2.0)]
    pub rho: f64,
    /// Relative tolerance for adaptive refinement.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Use the symmetry-reduced rule (auto = when the contour and integrand allow it).
    #[arg(long, value_enum, default_value_t = SymmetricMode::Auto)]
    pub symmetric: SymmetricMode,
    /// Initial node count for adaptive refinement.
    #[arg(long, default_value_t = 8)]
    pub n_start: usize,
    /// Node budget for adaptive refinement.
    #[arg(long, default_value_t = 4096)]
    pub n_max: usize,
    /// Skip the preflight contour checks.
    #[arg(long)]
    pub skip_preflight: bool,
    /// Emit a machine-readable JSON record instead of the human block.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct StudyArgs {
    /// Order of the singularity x^-n (n >= 1).
    #[arg(short = 'n', long = "order")]
    pub n: u32,
    /// Integrand f(z).
    #[arg(short = 'f', long = "function")]
    pub expr: String,
    /// Ellipse parameter rho > 1.
    #[arg(long, default_value_t = 2.0)]
    pub rho: f64,
    /// Comma-separated node counts, e.g. "4,8,16,32".
    #[arg(long = "n-list")]
    pub n_list: String,
    /// Reference value; when absent the definition-based oracle is used.
    #[arg(long)]
    pub exact: Option<f64>,
    /// Use the symmetry-reduced rule.
    #[arg(long, value_enum, default_value_t = SymmetricMode::Auto)]
    pub symmetric: SymmetricMode,
    /// Output path for the CSV (stdout when absent).
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Order of the singularity x^-n.
    #[arg(short = 'n', long = "order", default_value_t = 1)]
    pub n: u32,
    /// Integrand f(z).
    #[arg(short = 'f', long = "function")]
    pub expr: String,
    /// Ellipse parameter rho > 1.
    #[arg(long, default_value_t = 2.0)]
    pub rho: f64,
}

/// One-line failure with the exit code the shell contract demands.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

fn failure_from(err: FpError) -> Failure {
    let code = match err {
        FpError::NonConvergence { .. } => EXIT_NONCONVERGENCE,
        _ => EXIT_PREFLIGHT,
    };
    Failure::new(code, err.to_string())
}

/// Parses `src` and wraps it as an [`Integrand64`], probing realness on
/// `[0,1]` and scanning a box around the ellipse for candidate singularities.
fn build_integrand(src: &str, rho: f64) -> Result<(Integrand64, Expr, bool), Failure> {
    let e = exprparse::parse(src).map_err(|err| Failure::new(EXIT_USAGE, err.to_string()))?;
    let probe_real = exprparse::real_on_interval_probe(&e, 33).map_err(|err| {
        Failure::new(
            EXIT_PREFLIGHT,
            format!("integrand not finite on [0,1]: {err}"),
        )
    })?;

    // scan a padded bounding box of the ellipse for poles / branch points
    let a = 0.25 * (rho + 1.0 / rho);
    let b = 0.25 * (rho - 1.0 / rho).abs().max(0.25);
    let sing = exprparse::potential_singularities(
        &e,
        (0.5 - a - 0.5, 0.5 + a + 0.5),
        (-b - 0.5, b + 0.5),
        16,
    );

    let e_eval = e.clone();
    let f = Integrand64::new(move |z| {
        exprparse::eval_expr(&e_eval, z).unwrap_or(Complex::new(f64::NAN, f64::NAN))
    })
    .real_on_interval(probe_real)
    .with_singularities(sing);
    Ok((f, e, probe_real))
}

fn build_problem(n: u32, src: &str, rho: f64) -> Result<(FpProblem64, bool), Failure> {
    let (f, _, probe_real) = build_integrand(src, rho)?;
    let contour = ellipse_contour(rho)
        .map_err(|err| Failure::new(EXIT_PREFLIGHT, format!("invalid contour: {err}")))?;
    let p = FpProblem64::new(n, f, contour).map_err(failure_from)?;
    Ok((p, probe_real))
}

fn run_preflight(p: &FpProblem64) -> Result<PreflightReport, Failure> {
    let report = preflight(p, 512).map_err(failure_from)?;
    if !report.winding_ok {
        return Err(Failure::new(
            EXIT_PREFLIGHT,
            "preflight failed: contour does not wind once around [0,1]",
        ));
    }
    if let Some(s) = report.enclosed_singularities.first() {
        return Err(Failure::new(
            EXIT_PREFLIGHT,
            format!("preflight failed: contour encloses a singularity of f at {s}"),
        ));
    }
    Ok(report)
}

fn choose_symmetric(mode: SymmetricMode, probe_real: bool, report: &PreflightReport) -> bool {
    match mode {
        SymmetricMode::On => true,
        SymmetricMode::Off => false,
        SymmetricMode::Auto => probe_real && report.symmetry_ok,
    }
}

/// Adaptive doubling on top of the symmetry-reduced rule.
fn adaptive_symmetric(
    p: &FpProblem64,
    tol: f64,
    n_start: usize,
    n_max: usize,
) -> Result<FpResult64, FpError> {
    let mut m = (n_start / 2).max(2);
    let mut prev = fp_integral_symmetric(p, m)?;
    let mut last_diff = f64::INFINITY;
    while 2 * m <= n_max {
        m *= 2;
        let cur = fp_integral_symmetric(p, m)?;
        let diff = (cur.value - prev.value).norm();
        if diff <= tol * cur.value.norm().max(1.0) {
            return Ok(FpResult64 {
                err_estimate: Some(diff),
                n_samples: prev.n_samples + cur.n_samples,
                ..cur
            });
        }
        last_diff = diff;
        prev = cur;
    }
    Err(FpError::NonConvergence {
        n_samples: prev.n_samples,
        estimate: prev.value.re,
        err_bound: last_diff,
    })
}

/// Formats with 12 significant digits for the human-readable block.
fn human(v: f64) -> String {
    format!("{v:.11e}")
}

pub fn cmd_compute(args: &ComputeArgs) -> Result<String, Failure> {
    let (p, probe_real) = build_problem(args.n, &args.expr, args.rho)?;
    let report = if args.skip_preflight {
        PreflightReport {
            winding_ok: true,
            symmetry_ok: p.contour.is_symmetric(),
            enclosed_singularities: vec![],
        }
    } else {
        run_preflight(&p)?
    };
    let symmetric = choose_symmetric(args.symmetric, probe_real, &report);

    let result = if symmetric {
        adaptive_symmetric(&p, args.tol, args.n_start, args.n_max)
    } else {
        let cfg = QuadratureConfig {
            n_samples: args.n_start,
            rel_tol: args.tol,
            n_max: args.n_max,
            ..QuadratureConfig::default()
        };
        fp_integral_adaptive(&p, &cfg)
    }
    .map_err(failure_from)?;

    if args.json {
        let record = json!({
            "n": args.n,
            "expr": args.expr,
            "rho": args.rho,
            "mode": if symmetric { "symmetric" } else { "full" },
            "value": result.real(),
            "value_im": result.value.im,
            "n_samples": result.n_samples,
            "err_estimate": result.err_estimate,
            "imag_residual": result.imag_residual,
            "preflight": {
                "winding_ok": report.winding_ok,
                "symmetry_ok": report.symmetry_ok,
                "enclosed_singularities": report.enclosed_singularities,
                "skipped": args.skip_preflight,
            },
        });
        return Ok(format!("{record}"));
    }

    let mut out = String::new();
    let _ = writeln!(out, "value         = {}", human(result.real()));
    let _ = writeln!(out, "n_samples     = {}", result.n_samples);
    let _ = writeln!(
        out,
        "err_estimate  = {}",
        result
            .err_estimate
            .map(human)
            .unwrap_or_else(|| "n/a".into())
    );
    let _ = writeln!(out, "imag_residual = {}", human(result.imag_residual));
    let _ = writeln!(out, "mode          = {}", if symmetric { "symmetric" } else { "full" });
    let _ = writeln!(
        out,
        "preflight     = winding {}, symmetry {}, enclosed singularities: {}",
        if report.winding_ok { "ok" } else { "FAIL" },
        if report.symmetry_ok { "ok" } else { "FAIL" },
        if report.enclosed_singularities.is_empty() {
            "none".to_string()
        } else {
            report.enclosed_singularities.join(", ")
        }
    );
    Ok(out)
}

fn parse_n_list(s: &str) -> Result<Vec<usize>, Failure> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let v: usize = part
            .trim()
            .parse()
            .map_err(|_| Failure::new(EXIT_USAGE, format!("invalid node count '{part}'")))?;
        if v < 2 {
            return Err(Failure::new(EXIT_USAGE, "node counts must be >= 2"));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(Failure::new(EXIT_USAGE, "empty node-count list"));
    }
    Ok(out)
}

/// Builds the CSV body for a convergence study. Separated from I/O so tests
/// can check byte-for-byte determinism.
pub fn study_csv(args: &StudyArgs) -> Result<String, Failure> {
    let n_list = parse_n_list(&args.n_list)?;
    let (p, probe_real) = build_problem(args.n, &args.expr, args.rho)?;
    let report = run_preflight(&p)?;
    let symmetric = choose_symmetric(args.symmetric, probe_real, &report);

    let exact = match args.exact {
        Some(v) => v,
        None => fp_limit_oracle(&p.f, args.n, &OracleConfig::for_order(args.n))
            .map_err(failure_from)?
            .value,
    };
    let scale = exact.abs().max(f64::MIN_POSITIVE);

    let mut rows = Vec::with_capacity(n_list.len());
    for &n_samples in &n_list {
        // N is the rule's own node parameter: the symmetry-reduced rule does
        // N+1 evaluations and resolves like the full rule with 2N nodes
        let r = if symmetric {
            fp_integral_symmetric(&p, n_samples)
        } else {
            fp_integral_full(&p, n_samples)
        }
        .map_err(failure_from)?;
        let approx = r.real();
        rows.push((n_samples, approx, (approx - exact).abs() / scale));
    }

    let mut csv = String::from("N,approx,rel_error\n");
    for &(n_samples, approx, rel) in &rows {
        let _ = writeln!(csv, "{n_samples},{approx:.16e},{rel:.16e}");
    }
    let floor = 100.0 * f64::EPSILON;
    let samples: Vec<(usize, f64)> = rows.iter().map(|&(n, _, rel)| (n, rel)).collect();
    if let Ok(fit) = fit_decay_rate(&samples, floor) {
        let _ = writeln!(csv, "# rate={:.16e}", fit.rate);
    }
    Ok(csv)
}

pub fn cmd_study(args: &StudyArgs) -> Result<Option<String>, Failure> {
    let csv = study_csv(args)?;
    match &args.output {
        Some(path) => {
            std::fs::write(path, csv.as_bytes()).map_err(|err| {
                Failure::new(EXIT_USAGE, format!("cannot write {}: {err}", path.display()))
            })?;
            Ok(None)
        }
        None => Ok(Some(csv)),
    }
}

/// The two reference integrals with their published decay rates.
const TABLE2_REFERENCE_EXP: [f64; 5] = [0.024, 0.025, 0.021, 0.029, 0.039];
const TABLE2_REFERENCE_REC: [f64; 5] = [0.25, 0.29, 0.32, 0.35, 0.38];

pub fn cmd_table2() -> Result<String, Failure> {
    let mut out = String::new();
    let _ = writeln!(out, "integrand      n   measured_rate  reference_rate");
    let floor = 100.0 * f64::EPSILON;

    for n in 1..=5u32 {
        let (p, _) = build_problem(n, "exp(z)", 10.0)?;
        let exact: f64 = exact_exp_series(n, 60);
        let mut samples = Vec::new();
        for n_samples in 4..=15usize {
            let r = fp_integral_symmetric(&p, n_samples).map_err(failure_from)?;
            samples.push((n_samples, (r.real() - exact).abs() / exact.abs()));
        }
        let fit = fit_decay_rate(&samples, floor).map_err(failure_from)?;
        let _ = writeln!(
            out,
            "exp(z)/x^{n}     {n}   {:<14.4}  {:<14.4}",
            fit.rate,
            TABLE2_REFERENCE_EXP[(n - 1) as usize]
        );
    }
    for n in 1..=5u32 {
        let (p, _) = build_problem(n, "1/(1+z)", 2.0)?;
        let exact: f64 = exact_reciprocal(n);
        let mut samples = Vec::new();
        for n_samples in (6..=38usize).step_by(2) {
            let r = fp_integral_symmetric(&p, n_samples).map_err(failure_from)?;
            samples.push((n_samples, (r.real() - exact).abs() / exact.abs()));
        }
        let fit = fit_decay_rate(&samples, floor).map_err(failure_from)?;
        let _ = writeln!(
            out,
            "1/((1+x)x^{n})   {n}   {:<14.4}  {:<14.4}",
            fit.rate,
            TABLE2_REFERENCE_REC[(n - 1) as usize]
        );
    }
    Ok(out)
}

pub fn cmd_check(args: &CheckArgs) -> Result<String, Failure> {
    let (p, probe_real) = build_problem(args.n, &args.expr, args.rho)?;
    let report = run_preflight(&p)?;
    let mut out = String::new();
    let _ = writeln!(out, "winding:   ok");
    let _ = writeln!(
        out,
        "symmetry:  {}",
        if report.symmetry_ok { "ok" } else { "FAIL" }
    );
    let _ = writeln!(out, "real f on [0,1] (probe): {probe_real}");
    let _ = writeln!(out, "enclosed singularities:  none");
    match largest_safe_d_prime(&p.f, p.n, &p.contour, 192) {
        Some(d) => {
            let _ = writeln!(out, "largest safe d' (strip half-width): {d:.2}");
        }
        None => {
            let _ = writeln!(out, "largest safe d': none found (kernel blows up immediately)");
        }
    }
    Ok(out)
}

/// Dispatches a parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = match &cli.command {
        Command::Compute(args) => cmd_compute(args).map(Some),
        Command::Study(args) => cmd_study(args),
        Command::Table2 => cmd_table2().map(Some),
        Command::Check(args) => cmd_check(args).map(Some),
    };
    match outcome {
        Ok(Some(text)) => {
            print!("{text}");
            0
        }
        Ok(None) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
