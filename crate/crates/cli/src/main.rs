//! `u1kepler` command-line driver.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or input error,
//! 3 collision singularity during a simulation.

mod files;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use u1kepler::dynamics::{self, integrate, FlowConfig, FlowErrorKind, Integrator};
use u1kepler::generators::{Corruption, Realization};
use u1kepler::jordan::{AlgebraDescriptor, AlgebraKind};
use u1kepler::poisson::PhaseJet;
use u1kepler::verify::{run_suite, AllConfig, SuiteName, SuiteOptions, SuiteReport};
use u1kepler::Error;

use files::{chart_label, inline_or_file, PointFile, SpecFile};

const VERSION: &str = env!("CARGO_PKG_VERSION");

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_SINGULARITY: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "u1kepler",
    version,
    about = "U(1)-Kepler problems on the rank-one cone of H_n(C)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
enum Command {
    /// Run identity-verification suites.
    Verify(VerifyArgs),
    /// Integrate the Kepler flow and write a trajectory CSV.
    Simulate(SimulateArgs),
    /// Evaluate the Poisson bracket of two generators at a point.
    Bracket(BracketArgs),
    /// Evaluate one generator at a point.
    Eval(EvalArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum AlgebraArg {
    Hn,
    Gamma3,
}

impl From<AlgebraArg> for AlgebraKind {
    fn from(a: AlgebraArg) -> Self {
        match a {
            AlgebraArg::Hn => AlgebraKind::Hn,
            AlgebraArg::Gamma3 => AlgebraKind::Gamma3,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum SuiteArg {
    All,
    Matrix,
    Lemma,
    Realization,
    Quadratic,
    Kepler,
    Differentiation,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ControlArg {
    None,
    FlipSMu,
    DropXMu2,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "hn")]
    algebra: AlgebraArg,
    /// Matrix orders, comma separated (ignored for gamma3).
    #[arg(long, value_delimiter = ',', default_value = "2")]
    n: Vec<usize>,
    /// Magnetic charges, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0",
        allow_hyphen_values = true
    )]
    mu: Vec<f64>,
    #[arg(long, value_enum, default_value = "all")]
    suite: SuiteArg,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Overrides every identity tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Time step of the Kepler cross-check trajectories.
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Deliberately corrupt the generators (the suites should then fail).
    #[arg(long, value_enum, default_value = "none")]
    negative_control: ControlArg,
    /// Report file (JSON).
    #[arg(long)]
    out: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum PresetArg {
    Circular,
    Elliptic,
    /// Random configuration at the requested `--energy`, drawn from `--seed`.
    Sample,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum IntegratorArg {
    Rk4,
    Rk45,
}

#[derive(Args, Debug, Serialize)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value = "hn")]
    algebra: AlgebraArg,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    mu: f64,
    /// Initial phase point file.
    #[arg(long, conflicts_with = "preset")]
    init: Option<String>,
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
    /// Target energy for `--preset sample`.
    #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
    energy: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, default_value_t = 10.0)]
    t_end: f64,
    #[arg(long, value_enum, default_value = "rk4")]
    integrator: IntegratorArg,
    #[arg(long, default_value_t = 1e-10)]
    rel_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    abs_tol: f64,
    #[arg(long, default_value_t = u1kepler::cone::CHART_SWITCH_THRESHOLD)]
    chart_switch_threshold: f64,
    /// Record every k-th step.
    #[arg(long, default_value_t = 1)]
    stride: usize,
    /// Trajectory CSV; the sidecar goes to `<out>.json`.
    #[arg(long)]
    out: String,
}

#[derive(Args, Debug, Serialize)]
struct BracketArgs {
    /// Generator spec (file or inline JSON).
    #[arg(long)]
    f: String,
    #[arg(long)]
    g: String,
    /// Phase point (file or inline JSON).
    #[arg(long)]
    point: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    mu: f64,
}

#[derive(Args, Debug, Serialize)]
struct EvalArgs {
    #[arg(long)]
    f: String,
    #[arg(long)]
    point: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    mu: f64,
}

/// Failure with its exit code.
struct Exit(u8, String);

impl From<Error> for Exit {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Numerical(_) => EXIT_FAIL,
            _ => EXIT_USAGE,
        };
        Exit(code, e.to_string())
    }
}

fn io_err(path: &str) -> impl Fn(std::io::Error) -> Exit + '_ {
    move |e| Exit(EXIT_USAGE, format!("cannot write {path}: {e}"))
}

fn write_json(path: &str, value: &serde_json::Value) -> Result<(), Exit> {
    let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
    std::fs::write(path, text).map_err(io_err(path))
}

fn cmd_verify(args: &VerifyArgs, config: &serde_json::Value) -> Result<u8, Exit> {
    let algebra = AlgebraKind::from(args.algebra);
    if algebra == AlgebraKind::Gamma3 && args.mu.iter().any(|&m| m != 0.0) {
        return Err(Exit(EXIT_USAGE, "gamma3 supports only --mu 0".into()));
    }
    if algebra == AlgebraKind::Hn && args.n.iter().any(|&n| n < 2) {
        return Err(Exit(EXIT_USAGE, "--n must be at least 2".into()));
    }
    if args.trials == 0 {
        return Err(Exit(EXIT_USAGE, "--trials must be positive".into()));
    }
    let corruption = match args.negative_control {
        ControlArg::None => Corruption::None,
        ControlArg::FlipSMu => Corruption::FlipSMuTerm,
        ControlArg::DropXMu2 => Corruption::DropXMuSquared,
    };
    let cfg = AllConfig {
        algebra,
        n_list: &args.n,
        mu_list: &args.mu,
        trials: args.trials,
        seed: args.seed,
        flow: FlowConfig {
            dt: args.dt,
            ..FlowConfig::default()
        },
        opts: SuiteOptions {
            tolerance: args.tol,
            corruption,
        },
    };
    let names: Vec<SuiteName> = match args.suite {
        SuiteArg::All => SuiteName::ALL
            .into_iter()
            .filter(|s| s.applies(algebra, &args.n, &args.mu))
            .collect(),
        SuiteArg::Matrix => vec![SuiteName::Matrix],
        SuiteArg::Lemma => vec![SuiteName::Lemma],
        SuiteArg::Realization => vec![SuiteName::Realization],
        SuiteArg::Quadratic => vec![SuiteName::Quadratic],
        SuiteArg::Kepler => vec![SuiteName::Kepler],
        SuiteArg::Differentiation => vec![SuiteName::Differentiation],
    };
    let mut reports: Vec<SuiteReport> = Vec::new();
    for name in names {
        reports.extend(run_suite(name, &cfg)?);
    }
    for r in &reports {
        println!(
            "{:<16} {} max residual {:.3e} (tolerance {:.0e})",
            r.suite,
            if r.pass { "PASS" } else { "FAIL" },
            r.max_residual,
            r.tolerance
        );
        for i in r.identities.iter().filter(|i| !i.pass) {
            println!(
                "  {}: {:.3e} > {:.0e} at trial {}",
                i.name, i.max_residual, i.tolerance, i.argmax_trial
            );
        }
    }
    let pass = reports.iter().all(|r| r.pass);
    if let Some(out) = &args.out {
        write_json(
            out,
            &json!({ "version": VERSION, "seed": args.seed, "config": config, "pass": pass, "reports": reports }),
        )?;
    }
    Ok(if pass { 0 } else { EXIT_FAIL })
}

fn initial_point(args: &SimulateArgs) -> Result<u1kepler::cone::PhasePoint, Exit> {
    let kepler_only = |what: &str| -> Result<(), Exit> {
        if args.n != 2 || args.mu != 0.0 {
            return Err(Exit(
                EXIT_USAGE,
                format!("--preset {what} needs --n 2 --mu 0"),
            ));
        }
        Ok(())
    };
    let algebra = AlgebraKind::from(args.algebra);
    let ph = match (&args.init, args.preset) {
        (Some(path), None) => inline_or_file::<PointFile>(path)?.to_phase()?,
        (None, Some(PresetArg::Circular)) => {
            kepler_only("circular")?;
            dynamics::circular()?
        }
        (None, Some(PresetArg::Elliptic)) => {
            kepler_only("elliptic")?;
            dynamics::elliptic()?
        }
        (None, Some(PresetArg::Sample)) => {
            let desc = match algebra {
                AlgebraKind::Hn => AlgebraDescriptor::hn(args.n)?,
                AlgebraKind::Gamma3 => AlgebraDescriptor::gamma3(),
            };
            dynamics::sample_initial(&desc, args.mu, args.energy, args.seed)?
        }
        _ => {
            return Err(Exit(
                EXIT_USAGE,
                "exactly one of --init or --preset is required".into(),
            ))
        }
    };
    let desc = ph.algebra();
    if args.init.is_some()
        && (desc.kind != algebra || (algebra == AlgebraKind::Hn && desc.n != args.n))
    {
        return Err(Exit(
            EXIT_USAGE,
            format!("initial point lives on {desc}, but the command line asks for a different algebra or n"),
        ));
    }
    Ok(ph)
}

fn cmd_simulate(args: &SimulateArgs, config: &serde_json::Value) -> Result<u8, Exit> {
    if AlgebraKind::from(args.algebra) == AlgebraKind::Gamma3 && args.mu != 0.0 {
        return Err(Exit(EXIT_USAGE, "gamma3 supports only --mu 0".into()));
    }
    let initial = initial_point(args)?;
    let flow = FlowConfig {
        dt: args.dt,
        t_end: args.t_end,
        integrator: match args.integrator {
            IntegratorArg::Rk4 => Integrator::Rk4,
            IntegratorArg::Rk45 => Integrator::Rk45,
        },
        rel_tol: args.rel_tol,
        abs_tol: args.abs_tol,
        chart_switch_threshold: args.chart_switch_threshold,
        monitor_stride: args.stride,
    };
    flow.validate()?;
    let (record, status, code, error) = match integrate(&initial, args.mu, &flow) {
        Ok(rec) => (rec, "complete", 0, None),
        Err(e) => {
            let (status, code) = match e.kind {
                FlowErrorKind::Singularity => ("singularity", EXIT_SINGULARITY),
                FlowErrorKind::StepUnderflow => ("step-underflow", EXIT_FAIL),
                FlowErrorKind::Other(Error::Numerical(_)) => ("failed", EXIT_FAIL),
                FlowErrorKind::Other(_) => ("failed", EXIT_USAGE),
            };
            let msg = e.to_string();
            (*e.partial, status, code, Some(msg))
        }
    };
    let file = File::create(&args.out).map_err(io_err(&args.out))?;
    let mut w = BufWriter::new(file);
    record.write_csv(&mut w).map_err(io_err(&args.out))?;
    w.flush().map_err(io_err(&args.out))?;

    let drifts = record.max_drifts();
    let sidecar = format!("{}.json", args.out);
    write_json(
        &sidecar,
        &json!({
            "version": VERSION,
            "seed": args.seed,
            "config": config,
            "algebra": record.algebra.to_string(),
            "n": record.algebra.n,
            "mu": args.mu,
            "flow": flow,
            "initial": PointFile::from_phase(&initial),
            "pivot_history": record
                .pivot_history
                .iter()
                .map(|(t, c)| json!({ "t": t, "chart": chart_label(*c) }))
                .collect::<Vec<_>>(),
            "status": status,
            "partial": status != "complete",
            "error": error,
            "samples": record.len(),
            "steps": record.steps,
            "max_drift": drifts,
        }),
    )?;
    println!(
        "{status}: {} samples, t = {:.6}; max drift H {:.3e}, L_ab {:.3e}, A_a {:.3e}, L2 {:.3e}, A2 {:.3e}; max hla_residual {:.3e}",
        record.len(),
        record.times.last().copied().unwrap_or(0.0),
        drifts.h,
        drifts.luv,
        drifts.lrl,
        drifts.l2,
        drifts.a2,
        drifts.hla_residual
    );
    if let Some(msg) = error {
        eprintln!("error: {msg}");
    }
    Ok(code)
}

fn cmd_bracket(args: &BracketArgs) -> Result<u8, Exit> {
    let f = inline_or_file::<SpecFile>(&args.f)?.to_spec()?;
    let g = inline_or_file::<SpecFile>(&args.g)?.to_spec()?;
    let ph = inline_or_file::<PointFile>(&args.point)?.to_phase()?;
    check_spec_algebra(&[&f, &g], &ph)?;
    let re = Realization::new(args.mu);
    re.compile(&f)?;
    re.compile(&g)?;
    let ctx = PhaseJet::new(&ph, args.mu)?;
    let value = ctx.bracket(&re.eval(&ctx, &f), &re.eval(&ctx, &g));
    println!("{value:.16e}");
    Ok(0)
}

fn cmd_eval(args: &EvalArgs) -> Result<u8, Exit> {
    let f = inline_or_file::<SpecFile>(&args.f)?.to_spec()?;
    let ph = inline_or_file::<PointFile>(&args.point)?.to_phase()?;
    check_spec_algebra(&[&f], &ph)?;
    let value = Realization::new(args.mu).compile(&f)?.value(&ph, args.mu)?;
    println!("{value:.16e}");
    Ok(0)
}

fn check_spec_algebra(
    specs: &[&u1kepler::generators::GeneratorSpec],
    ph: &u1kepler::cone::PhasePoint,
) -> Result<(), Exit> {
    for s in specs {
        for u in s.params() {
            if u.descriptor() != ph.algebra() {
                return Err(Error::AlgebraMismatch {
                    left: u.descriptor(),
                    right: ph.algebra(),
                }
                .into());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = serde_json::to_value(&cli.command).expect("serializable");
    let result = match &cli.command {
        Command::Verify(a) => cmd_verify(a, &config),
        Command::Simulate(a) => cmd_simulate(a, &config),
        Command::Bracket(a) => cmd_bracket(a),
        Command::Eval(a) => cmd_eval(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Exit(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
