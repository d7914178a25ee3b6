//! `qsum3`: command-line front end for the three-user summation simulator.
//!
//! Subcommands run honest or attacked Monte Carlo batches, evaluate the
//! exact efficiency comparison, or validate an entangling-probe parameter
//! file. Reports go to standard output or `--out` as JSON or CSV. Exit
//! codes: 0 on success, 1 when `--fail-on-abort` is set and a batch
//! aborted, 2 on invalid arguments.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qsum3_cli::efficiency::{efficiency_table, EfficiencyEntry, TableParams};
use qsum3_cli::runner::{aux_stream, monte_carlo, InputMode, RunSpec};
use qsum3_core::attack::entangle::{
    entangle_measure_detection, entangle_measure_leakage, EveParamsDoc, EveUnitaryParams,
    DEFAULT_PROBE_DIM,
};
use qsum3_core::attack::{AttackStrategy, ChannelTarget};
use qsum3_core::protocol::{ProtocolConfig, SecretInputs};

#[derive(Parser)]
#[command(
    name = "qsum3",
    version,
    about = "Simulator for a three-user secure summation protocol over single-particle states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    globals: Globals,
}

#[derive(Args)]
struct Globals {
    /// Secret length in bits.
    #[arg(long, global = true, default_value_t = 32)]
    n: usize,
    /// Extra pair budget: the preparers send 8(n + delta) carrier pairs.
    #[arg(long, global = true, default_value_t = 16)]
    delta: usize,
    /// Decoys Bob inserts into his sequence.
    #[arg(long, global = true, default_value_t = 20)]
    gamma_b: usize,
    /// Decoys Charlie inserts into his sequence.
    #[arg(long, global = true, default_value_t = 20)]
    gamma_c: usize,
    /// Master seed; every trial derives its own stream from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of protocol runs in the batch.
    #[arg(long, global = true, default_value_t = 1000)]
    trials: u64,
    /// Largest tolerated fraction of mismatched decoys per channel.
    #[arg(long, global = true, default_value_t = 0.0)]
    tolerance: f64,
    /// Significance level of the announcement-count test.
    #[arg(long, global = true, default_value_t = 1e-6)]
    alpha: f64,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Omit wall-clock timing so identical invocations emit identical bytes.
    #[arg(long, global = true)]
    redact_timing: bool,
    /// Exit 1 when any run in the batch aborted.
    #[arg(long, global = true)]
    fail_on_abort: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a batch of honest protocol executions.
    RunHonest {
        /// Alice's fixed secret as a bit string, e.g. 1011; random per
        /// trial when omitted. All three secrets must be given together.
        #[arg(long)]
        x: Option<String>,
        /// Bob's fixed secret as a bit string.
        #[arg(long)]
        y: Option<String>,
        /// Charlie's fixed secret as a bit string.
        #[arg(long)]
        z: Option<String>,
    },
    /// Run a batch with one adversary strategy active.
    RunAttack {
        /// Which adversary to simulate.
        #[arg(long, value_enum)]
        attack: AttackArg,
        /// Channel an eavesdropping strategy disturbs; ignored by the
        /// participant strategies, which fix their own target.
        #[arg(long, value_enum, default_value_t = ChannelArg::BobToAlice)]
        channel: ChannelArg,
        /// Entangling-probe parameter file; when omitted the probe is
        /// drawn deterministically from the seed.
        #[arg(long)]
        params_file: Option<PathBuf>,
    },
    /// Print the exact six-entry qubit-efficiency comparison.
    Efficiency {
        /// Secret length of the first comparison family; defaults to n.
        #[arg(long = "L")]
        l: Option<u64>,
        /// Secret length of the second comparison family; defaults to n.
        #[arg(long)]
        m: Option<u64>,
        /// Qudit dimension of the dimension-parametrized entry.
        #[arg(long, default_value_t = 1)]
        d: u64,
    },
    /// Validate an entangling-probe parameter file and print its
    /// detection probabilities and leakage.
    CheckEntangle {
        #[arg(long)]
        params_file: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AttackArg {
    MeasureResend,
    InterceptResend,
    EntangleMeasure,
    AliceFakePublish,
    AliceFloodSummation,
    BobInterceptCharlie,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ChannelArg {
    BobToAlice,
    CharlieToAlice,
}

impl From<ChannelArg> for ChannelTarget {
    fn from(c: ChannelArg) -> Self {
        match c {
            ChannelArg::BobToAlice => ChannelTarget::BobToAlice,
            ChannelArg::CharlieToAlice => ChannelTarget::CharlieToAlice,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Anything that should terminate with exit code 2 and a usage hint.
struct UsageError(String);

impl<E: std::error::Error> From<E> for UsageError {
    fn from(e: E) -> Self {
        Self(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(UsageError(message)) => {
            let usage = Cli::command().render_usage();
            eprintln!("error: {message}\n\n{usage}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, UsageError> {
    let globals = &cli.globals;
    let config = ProtocolConfig {
        n: globals.n,
        delta: globals.delta,
        gamma_b: globals.gamma_b,
        gamma_c: globals.gamma_c,
        alpha: globals.alpha,
        decoy_tolerance: globals.tolerance,
        strict_direct_check: false,
    };

    match &cli.command {
        Command::RunHonest { x, y, z } => {
            config.validate()?;
            let input_mode = fixed_inputs(x, y, z)?;
            let spec = RunSpec { config, attack: AttackStrategy::None, trials: globals.trials, input_mode };
            run_batch(&spec, globals)
        }
        Command::RunAttack { attack, channel, params_file } => {
            config.validate()?;
            let strategy = build_strategy(*attack, *channel, params_file.as_deref(), globals.seed)?;
            let spec = RunSpec {
                config,
                attack: strategy,
                trials: globals.trials,
                input_mode: InputMode::Random,
            };
            run_batch(&spec, globals)
        }
        Command::Efficiency { l, m, d } => {
            let params = TableParams {
                n: globals.n as u64,
                delta: globals.delta as u64,
                l: l.unwrap_or(globals.n as u64),
                m: m.unwrap_or(globals.n as u64),
                d: *d,
            };
            let table = efficiency_table(&params)?;
            let text = match globals.format {
                Format::Json => {
                    let mut t = serde_json::to_string_pretty(&table).expect("table serializes");
                    t.push('\n');
                    t
                }
                Format::Csv => efficiency_csv(&table),
            };
            emit(&text, globals)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::CheckEntangle { params_file } => {
            let params = load_params(params_file)?;
            let summary = EntangleSummary::of(&params);
            let text = match globals.format {
                Format::Json => {
                    let mut t = serde_json::to_string_pretty(&summary).expect("summary serializes");
                    t.push('\n');
                    t
                }
                Format::Csv => summary.to_csv(),
            };
            emit(&text, globals)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run_batch(spec: &RunSpec, globals: &Globals) -> Result<ExitCode, UsageError> {
    let mut report = monte_carlo(spec, globals.seed)?;
    if globals.redact_timing {
        report = report.redact_timing();
    }
    let text = match globals.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    emit(&text, globals)?;
    if globals.fail_on_abort && report.total_aborts() > 0 {
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn emit(text: &str, globals: &Globals) -> Result<(), UsageError> {
    match &globals.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| UsageError(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| UsageError(format!("cannot write report: {e}"))),
    }
}

fn fixed_inputs(
    x: &Option<String>,
    y: &Option<String>,
    z: &Option<String>,
) -> Result<InputMode, UsageError> {
    match (x, y, z) {
        (None, None, None) => Ok(InputMode::Random),
        (Some(x), Some(y), Some(z)) => Ok(InputMode::Fixed(SecretInputs {
            x: parse_bits("--x", x)?,
            y: parse_bits("--y", y)?,
            z: parse_bits("--z", z)?,
        })),
        _ => Err(UsageError("--x, --y and --z must be given together".into())),
    }
}

fn parse_bits(flag: &str, text: &str) -> Result<Vec<u8>, UsageError> {
    text.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(UsageError(format!("{flag}: expected a bit string, found {other:?}"))),
        })
        .collect()
}

fn build_strategy(
    attack: AttackArg,
    channel: ChannelArg,
    params_file: Option<&std::path::Path>,
    seed: u64,
) -> Result<AttackStrategy, UsageError> {
    let channel = ChannelTarget::from(channel);
    Ok(match attack {
        AttackArg::MeasureResend => AttackStrategy::MeasureResend { channel },
        AttackArg::InterceptResend => AttackStrategy::InterceptResend { channel },
        AttackArg::EntangleMeasure => {
            let params = match params_file {
                Some(path) => load_params(path)?,
                None => {
                    let mut rng = aux_stream(seed).substream(0);
                    EveUnitaryParams::random(DEFAULT_PROBE_DIM, &mut rng)
                }
            };
            AttackStrategy::EntangleMeasure { channel, params }
        }
        AttackArg::AliceFakePublish => AttackStrategy::AliceFakePublish,
        AttackArg::AliceFloodSummation => AttackStrategy::AliceFloodSummation,
        AttackArg::BobInterceptCharlie => AttackStrategy::BobInterceptCharlie,
    })
}

fn load_params(path: &std::path::Path) -> Result<EveUnitaryParams, UsageError> {
    let text = fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
    let doc: EveParamsDoc = serde_json::from_str(&text)
        .map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    EveUnitaryParams::try_from(doc)
        .map_err(|e| UsageError(format!("{}: invalid probe parameters: {e}", path.display())))
}

/// What `check-entangle` prints for a valid parameter file.
#[derive(Serialize)]
struct EntangleSummary {
    probe_dim: usize,
    /// Detection probability when the probe acts on each decoy state.
    detection: DetectionDoc,
    max_detection: f64,
    /// Mean detection over the four equiprobable decoy states.
    mean_detection: f64,
    /// What an undetected probe can learn; `null` when undefined because a
    /// carrier branch never occurs.
    leakage: Option<f64>,
}

#[derive(Serialize)]
struct DetectionDoc {
    z0: f64,
    z1: f64,
    x_plus: f64,
    x_minus: f64,
}

impl EntangleSummary {
    fn of(params: &EveUnitaryParams) -> Self {
        let d = entangle_measure_detection(params);
        Self {
            probe_dim: params.probe_dim(),
            detection: DetectionDoc { z0: d.z0, z1: d.z1, x_plus: d.x_plus, x_minus: d.x_minus },
            max_detection: d.max(),
            mean_detection: d.uniform_mean(),
            leakage: entangle_measure_leakage(params).ok(),
        }
    }

    fn to_csv(&self) -> String {
        let mut out = String::from("metric,value\n");
        let _ = writeln!(out, "probe_dim,{}", self.probe_dim);
        let _ = writeln!(out, "detection.z0,{}", self.detection.z0);
        let _ = writeln!(out, "detection.z1,{}", self.detection.z1);
        let _ = writeln!(out, "detection.x_plus,{}", self.detection.x_plus);
        let _ = writeln!(out, "detection.x_minus,{}", self.detection.x_minus);
        let _ = writeln!(out, "max_detection,{}", self.max_detection);
        let _ = writeln!(out, "mean_detection,{}", self.mean_detection);
        let _ = match self.leakage {
            Some(v) => writeln!(out, "leakage,{v}"),
            None => writeln!(out, "leakage,"),
        };
        out
    }
}

fn efficiency_csv(table: &[EfficiencyEntry]) -> String {
    let mut out = String::from("id,nu,q,r,numerator,denominator,exact,value\n");
    for e in table {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            e.id, e.nu, e.q, e.r, e.numerator, e.denominator, e.exact, e.value
        );
    }
    out
}
