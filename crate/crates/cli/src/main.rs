//! `qsep`: batch runner for the lemma checks, the attack pipelines, the
//! PRFSG security game and the fast and full suites.
//!
//! Exit status is 0 when every result passes, 1 when any check fails and 2
//! for usage or sizing errors (unknown subcommand, bad flag value, invalid
//! configuration, over-budget sizes).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qsep_core::blockenc::SvdBackend;
use qsep_core::error::QsepError;
use qsep_core::harness::{emit_report, resolve_config, run_experiment, ConfigOverrides, ExperimentKind, Params, ReportFormat, Sweep};
use qsep_core::tomography::TomographyMode;

#[derive(Parser, Debug)]
#[command(name = "qsep", version, about = "Simulation testbench for oracle separations of pseudorandom quantum primitives")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true)]
    lambda: Option<usize>,
    #[arg(long, global = true)]
    ell: Option<usize>,
    #[arg(long, global = true)]
    s: Option<usize>,
    #[arg(long, global = true)]
    c: Option<usize>,
    #[arg(long, global = true)]
    p: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true, value_enum)]
    backend: Option<Backend>,
    #[arg(long, global = true, value_enum)]
    tomo: Option<Tomo>,
    /// Report path; the report goes to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Leave runtimes out of the report so that reruns are byte-identical.
    #[arg(long, global = true)]
    no_timing: bool,
    /// Sweep one parameter, e.g. `--sweep ell=1,2,3`.
    #[arg(long, global = true, value_parser = parse_sweep)]
    sweep: Option<Sweep>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one lemma check from the dispatch table.
    Lemma {
        id: String,
        /// Extra check parameter as `key=value`; repeatable.
        #[arg(long = "param", value_parser = parse_kv)]
        params: Vec<(String, f64)>,
    },
    /// Run an attack pipeline against a toy candidate.
    Attack {
        #[arg(value_enum)]
        kind: AttackArg,
    },
    /// Run the PRFSG security game checks.
    PrfsgGame,
    /// Run a suite profile.
    Suite {
        #[arg(value_enum)]
        profile: Profile,
    },
    /// Run the experiment named in the `--config` file.
    Run,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Backend {
    Ideal,
    Poly,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Tomo {
    Exact,
    Sampled,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AttackArg {
    Pru,
    Pri,
    PriVsHri,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Profile {
    All,
    Fast,
}

fn parse_kv(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got {s}"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("value of {k}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn parse_sweep(s: &str) -> Result<Sweep, String> {
    let (k, vs) = s.split_once('=').ok_or_else(|| format!("expected name=v1,v2,..., got {s}"))?;
    let values = vs.split(',').map(|v| v.trim().parse::<f64>().map_err(|e| format!("sweep value {v}: {e}"))).collect::<Result<Vec<_>, _>>()?;
    Ok(Sweep { param: k.trim().to_string(), values })
}

fn overrides(cli: &Cli) -> ConfigOverrides {
    let mut o = ConfigOverrides {
        lambda: cli.lambda,
        ell: cli.ell,
        s: cli.s,
        c: cli.c,
        p: cli.p,
        trials: cli.trials,
        seed: cli.seed,
        backend: cli.backend.map(|b| match b {
            Backend::Ideal => SvdBackend::Ideal,
            Backend::Poly => SvdBackend::Poly,
        }),
        tomography: cli.tomo.map(|t| match t {
            Tomo::Exact => TomographyMode::Exact,
            Tomo::Sampled => TomographyMode::Sampled,
        }),
        output: cli.out.clone(),
        format: cli.format.map(|f| match f {
            Format::Json => ReportFormat::Json,
            Format::Csv => ReportFormat::Csv,
        }),
        timing: cli.no_timing.then_some(false),
        sweep: cli.sweep.clone(),
        ..Default::default()
    };
    match &cli.command {
        Command::Lemma { id, params } => {
            o.experiment = Some(ExperimentKind::Lemmas);
            o.lemmas = Some(vec![id.clone()]);
            o.params = params.iter().cloned().collect::<Params>();
        }
        Command::Attack { kind } => {
            o.experiment = Some(match kind {
                AttackArg::Pru => ExperimentKind::AttackPru,
                AttackArg::Pri => ExperimentKind::AttackPri,
                AttackArg::PriVsHri => ExperimentKind::AttackPriVsHri,
            });
        }
        Command::PrfsgGame => o.experiment = Some(ExperimentKind::PrfsgGame),
        Command::Suite { profile } => {
            o.experiment = Some(match profile {
                Profile::All => ExperimentKind::SuiteAll,
                Profile::Fast => ExperimentKind::SuiteFast,
            });
        }
        Command::Run => {}
    }
    o
}

fn run(cli: &Cli) -> Result<bool, QsepError> {
    let cfg = resolve_config(cli.config.as_deref(), &overrides(cli))?;
    let report = run_experiment(&cfg)?;
    match &cfg.output {
        Some(path) => emit_report(&report, cfg.format, path)?,
        None => match cfg.format {
            ReportFormat::Json => println!("{}", report.to_json()?),
            ReportFormat::Csv => print!("{}", report.to_csv()?),
        },
    }
    let failed: Vec<String> = report.results.iter().filter(|r| !r.pass()).map(|r| r.id()).collect();
    eprintln!("{} results, {} failed{}", report.results.len(), failed.len(), if failed.is_empty() { String::new() } else { format!(": {}", failed.join(", ")) });
    Ok(failed.is_empty())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
