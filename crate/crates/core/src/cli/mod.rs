//! Command-line front end: `ml`, `classify`, `integrate`, `decay`, `selftest`.
//!
//! Exit codes: 0 success, 1 failed verdict or self-test, 2 invalid input,
//! 3 numerical non-convergence.

mod output;
pub mod selftest;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::decay::{self, DecayReport, ScanConfig};
use crate::error::{Error, Result};
use crate::fmt17;
use crate::mlf::{imag_axis_constant, ml_eval, ml_series_truncated, MlParams};
use crate::phase::{self, CubicForm, LinearChange, PhaseClass};
use crate::quad::{self, AmplitudeSpec, IntegralSpec, QuadOptions, QuadResult};

pub use output::{csv_with_header, to_json, Sig17};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "mlosc",
    version,
    about = "Mittag-Leffler kernels, cubic phases and decay sweeps"
)]
pub struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Tolerance (classification, quadrature, sweep verdict).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for randomized self-test matrices.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate E_{α,β}(z).
    #[command(allow_negative_numbers = true)]
    Ml {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        /// Real and imaginary part of z.
        #[arg(long, num_args = 2, value_names = ["RE", "IM"], allow_hyphen_values = true)]
        z: Vec<f64>,
    },
    /// Classify a binary cubic c30 x₁³ + c21 x₁²x₂ + c12 x₁x₂² + c03 x₂³.
    #[command(allow_negative_numbers = true)]
    Classify {
        #[arg(num_args = 4, value_names = ["C30", "C21", "C12", "C03"], allow_hyphen_values = true)]
        coeffs: Vec<f64>,
    },
    /// Integrate the JSON integral spec in FILE.
    Integrate {
        spec: PathBuf,
        #[arg(long)]
        max_cells: Option<usize>,
        /// Also compute the majorant with the calibrated kernel constant.
        #[arg(long)]
        majorant: bool,
    },
    /// Sweep λ for the canonical phase of a class.
    #[command(allow_negative_numbers = true)]
    Decay(DecayArgs),
    /// Fast deterministic subset of the acceptance checks.
    Selftest {
        #[arg(long, hide = true, value_enum)]
        fault: Option<selftest::Fault>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AmplitudeKindArg {
    Constant,
    PowerSingular,
}

#[derive(Debug, clap::Args)]
pub struct DecayArgs {
    /// JSON sweep configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// dinf, d4plus, d4minus or a2.
    #[arg(long)]
    pub class: Option<PhaseClass>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, value_enum)]
    pub amplitude: Option<AmplitudeKindArg>,
    /// Value of a constant amplitude.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub gamma1: Option<f64>,
    #[arg(long)]
    pub gamma2: Option<f64>,
    #[arg(long, num_args = 2, value_names = ["A1", "A2"])]
    pub anchor: Option<Vec<f64>>,
    /// Lebesgue exponent; "inf" allowed.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub lambda_min: Option<f64>,
    #[arg(long)]
    pub lambda_max: Option<f64>,
    #[arg(long)]
    pub points_per_decade: Option<usize>,
    #[arg(long)]
    pub max_cells: Option<usize>,
}

/// Report written by a command, plus the exit code it implies.
struct Outcome {
    text: String,
    code: i32,
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    command: &'a str,
    version: &'a str,
    config: C,
    result: R,
}

#[derive(Serialize)]
struct Globals {
    format: Format,
    tol: Option<f64>,
    seed: u64,
    threads: Option<usize>,
}

fn render<C: Serialize, R: Serialize>(
    cli: &Cli,
    command: &str,
    config: C,
    result: R,
    csv: impl FnOnce() -> (Vec<&'static str>, Vec<Vec<String>>),
) -> Result<String> {
    #[derive(Serialize)]
    struct Config<C> {
        globals: Globals,
        #[serde(flatten)]
        command: C,
    }
    let config = Config {
        globals: Globals {
            format: cli.format,
            tol: cli.tol,
            seed: cli.seed,
            threads: cli.threads,
        },
        command: config,
    };
    match cli.format {
        Format::Json => {
            let env = Envelope {
                command,
                version: env!("CARGO_PKG_VERSION"),
                config,
                result,
            };
            Ok(to_json(&env, true)? + "\n")
        }
        Format::Csv => {
            let (header, rows) = csv();
            csv_with_header(&config, &header, &rows)
        }
    }
}

fn complex_row(z: Complex64) -> Vec<String> {
    vec![fmt17(z.re), fmt17(z.im)]
}

fn cmd_ml(cli: &Cli, alpha: f64, beta: f64, z: &[f64]) -> Result<Outcome> {
    let params = MlParams::new(alpha, beta);
    let z = Complex64::new(z[0], z[1]);
    // α ≥ 2 has no contour path; the series is the only evaluator there
    let value = if alpha >= 2.0 {
        ml_series_truncated(params, z, 100_000)?.value
    } else {
        ml_eval(params, z)?
    };
    #[derive(Serialize)]
    struct Cfg {
        alpha: f64,
        beta: f64,
        z_re: f64,
        z_im: f64,
    }
    #[derive(Serialize)]
    struct Out {
        re: f64,
        im: f64,
    }
    let text = render(
        cli,
        "ml",
        Cfg {
            alpha,
            beta,
            z_re: z.re,
            z_im: z.im,
        },
        Out {
            re: value.re,
            im: value.im,
        },
        || (vec!["re", "im"], vec![complex_row(value)]),
    )?;
    Ok(Outcome { text, code: 0 })
}

fn cmd_classify(cli: &Cli, coeffs: &[f64]) -> Result<Outcome> {
    let form = CubicForm::new(coeffs[0], coeffs[1], coeffs[2], coeffs[3]);
    let tol = cli.tol.unwrap_or(phase::DEFAULT_TOL);
    let (class, t) = phase::normalize(&form, tol)?;
    let residual = phase::apply_linear_change(&form, &t)?.distance(&class.canonical());
    #[derive(Serialize)]
    struct Cfg {
        form: CubicForm,
        tol: f64,
    }
    #[derive(Serialize)]
    struct Out {
        class: PhaseClass,
        transform: LinearChange,
        canonical: CubicForm,
        residual: f64,
    }
    let text = render(
        cli,
        "classify",
        Cfg { form, tol },
        Out {
            class,
            transform: t,
            canonical: class.canonical(),
            residual,
        },
        || {
            let row = vec![
                class.to_string(),
                fmt17(t.t11),
                fmt17(t.t12),
                fmt17(t.t21),
                fmt17(t.t22),
                fmt17(t.scale),
            ];
            (
                vec!["class", "t11", "t12", "t21", "t22", "scale"],
                vec![row],
            )
        },
    )?;
    Ok(Outcome { text, code: 0 })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn cmd_integrate(
    cli: &Cli,
    path: &PathBuf,
    max_cells: Option<usize>,
    majorant: bool,
) -> Result<Outcome> {
    let mut spec: IntegralSpec = read_json(path)?;
    if cli.tol.is_some() {
        spec.tol = cli.tol;
    }
    spec.validate()?;
    let mut opts = QuadOptions::new(spec.tol.unwrap_or(quad::DEFAULT_TOL));
    if let Some(m) = max_cells {
        opts.max_cells = m;
    }
    let mut r: QuadResult = quad::integrate(&spec, &opts)?;
    if majorant {
        let c_hat = imag_axis_constant(spec.params)?;
        r.majorant = Some(quad::envelope_integral(&spec, c_hat, &opts)?.value.re);
    }
    #[derive(Serialize)]
    struct Cfg {
        spec: IntegralSpec,
        tol: f64,
        max_cells: usize,
        majorant: bool,
    }
    let code = if r.budget_exceeded {
        eprintln!(
            "warning: {}",
            Error::BudgetExceeded {
                budget: opts.max_cells,
                error_estimate: r.error_estimate
            }
        );
        3
    } else {
        0
    };
    let text = render(
        cli,
        "integrate",
        Cfg {
            spec,
            tol: opts.tol,
            max_cells: opts.max_cells,
            majorant,
        },
        r,
        || {
            let mut row = complex_row(r.value);
            row.extend([
                fmt17(r.error_estimate),
                r.cells_used.to_string(),
                r.majorant.map(fmt17).unwrap_or_default(),
                r.budget_exceeded.to_string(),
            ]);
            (
                vec![
                    "re",
                    "im",
                    "error_estimate",
                    "cells_used",
                    "majorant",
                    "budget_exceeded",
                ],
                vec![row],
            )
        },
    )?;
    Ok(Outcome { text, code })
}

/// Sweep configuration from the optional file, then the flags.
pub fn resolve_scan(args: &DecayArgs, tol: Option<f64>) -> Result<ScanConfig> {
    let mut cfg = match &args.config {
        Some(path) => read_json::<ScanConfig>(path)?,
        None => {
            let class = args.class.ok_or_else(|| {
                Error::InvalidInput("--class is required without --config".into())
            })?;
            ScanConfig::new(class, MlParams::new(0.5, 1.0), AmplitudeSpec::constant(1.0))
        }
    };
    if let Some(c) = args.class {
        cfg.class = c;
    }
    if let Some(a) = args.alpha {
        cfg.params.alpha = a;
    }
    if let Some(b) = args.beta {
        cfg.params.beta = b;
    }
    let p = cfg.amplitude.p;
    match args.amplitude {
        Some(AmplitudeKindArg::Constant) => {
            cfg.amplitude = AmplitudeSpec::constant(args.c.unwrap_or(1.0))
        }
        Some(AmplitudeKindArg::PowerSingular) => {
            let anchor = args
                .anchor
                .as_deref()
                .map(|a| [a[0], a[1]])
                .unwrap_or([0.0, 0.0]);
            let p = if p.is_finite() { p } else { 2.0 };
            cfg.amplitude = AmplitudeSpec::power_singular(
                args.gamma1.unwrap_or(0.0),
                args.gamma2.unwrap_or(0.0),
                anchor,
                p,
            );
        }
        None => {
            if let quad::AmplitudeKind::Constant { c } = &mut cfg.amplitude.kind {
                *c = args.c.unwrap_or(*c);
            }
            if let quad::AmplitudeKind::PowerSingular {
                gamma1,
                gamma2,
                anchor,
            } = &mut cfg.amplitude.kind
            {
                *gamma1 = args.gamma1.unwrap_or(*gamma1);
                *gamma2 = args.gamma2.unwrap_or(*gamma2);
                if let Some(a) = &args.anchor {
                    *anchor = [a[0], a[1]];
                }
            }
        }
    }
    if let Some(p) = args.p {
        cfg.amplitude.p = p;
    }
    if let Some(v) = args.lambda_min {
        cfg.lambda_min = v;
    }
    if let Some(v) = args.lambda_max {
        cfg.lambda_max = v;
    }
    if let Some(v) = args.points_per_decade {
        cfg.points_per_decade = v;
    }
    if let Some(v) = args.max_cells {
        cfg.max_cells = v;
    }
    if let Some(t) = tol {
        cfg.tol = t;
    }
    cfg.amplitude.validate(&quad::Domain::UNIT)?;
    Ok(cfg)
}

fn cmd_decay(cli: &Cli, args: &DecayArgs) -> Result<Outcome> {
    let cfg = resolve_scan(args, cli.tol)?;
    let report: DecayReport = decay::decay_scan(&cfg)?;
    let code = if report.verdict.pass { 0 } else { 1 };
    eprintln!(
        "verdict: {}: {}",
        if report.verdict.pass { "pass" } else { "fail" },
        report.verdict.message
    );
    let text = match cli.format {
        Format::Json => render(cli, "decay", &cfg, &report, || unreachable!())?,
        Format::Csv => {
            #[derive(Serialize)]
            struct Cfg<'a> {
                globals: Globals,
                #[serde(flatten)]
                scan: &'a ScanConfig,
            }
            let globals = Globals {
                format: cli.format,
                tol: cli.tol,
                seed: cli.seed,
                threads: cli.threads,
            };
            let mut body = Vec::new();
            report.write_csv(&mut body)?;
            format!(
                "# config: {}\n",
                to_json(
                    &Cfg {
                        globals,
                        scan: &cfg
                    },
                    false
                )?
            ) + &String::from_utf8(body).expect("csv writes UTF-8")
        }
    };
    Ok(Outcome { text, code })
}

fn cmd_selftest(cli: &Cli, fault: Option<selftest::Fault>) -> Result<Outcome> {
    let report = selftest::run(cli.seed, fault);
    let code = if report.pass { 0 } else { 1 };
    for c in &report.checks {
        eprintln!(
            "{} {}: {}",
            if c.pass { "ok  " } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    let text = render(
        cli,
        "selftest",
        selftest::Config {
            seed: cli.seed,
            fault,
        },
        &report,
        || {
            let rows = report
                .checks
                .iter()
                .map(|c| vec![c.name.clone(), c.pass.to_string(), c.detail.clone()])
                .collect();
            (vec!["check", "pass", "detail"], rows)
        },
    )?;
    Ok(Outcome { text, code })
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    if let Some(t) = cli.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "--tol must be positive, got {t}"
            )));
        }
    }
    match &cli.command {
        Command::Ml { alpha, beta, z } => cmd_ml(cli, *alpha, *beta, z),
        Command::Classify { coeffs } => cmd_classify(cli, coeffs),
        Command::Integrate {
            spec,
            max_cells,
            majorant,
        } => cmd_integrate(cli, spec, *max_cells, *majorant),
        Command::Decay(args) => cmd_decay(cli, args),
        Command::Selftest { fault } => cmd_selftest(cli, *fault),
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let outcome = match cli.threads {
        Some(0) => return Err(Error::InvalidInput("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidInput(e.to_string()))?
            .install(|| dispatch(cli))?,
        None => dispatch(cli)?,
    };
    match &cli.out {
        Some(path) => std::fs::write(path, &outcome.text)?,
        None => print!("{}", outcome.text),
    }
    Ok(outcome.code)
}

/// Runs the parsed command; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests;
