//! `qwsn` command line: teleportation runs, stage traces, gate inspection
//! and scenario files.
//!
//! Exit codes: 0 success, 1 a protocol or scenario check failed, 2 usage error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::gates::{truth_table, Gate};
use crate::qstate::{format_amplitude, new_qubit, Amplitude};
use crate::scenario::{run_scenario, ScenarioConfig};
use crate::teleport::{teleport, trace_report, ProtocolVariant, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Receiver fidelity below `1 - FIDELITY_TOL` fails a teleport run.
pub const FIDELITY_TOL: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(
    name = "qwsn",
    version,
    about = "Reversible-gate quantum teleportation and EPR-pair key distribution for sensor networks",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Feynman,
    Toffoli,
}

impl From<VariantArg> for ProtocolVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Feynman => ProtocolVariant::Feynman,
            VariantArg::Toffoli => ProtocolVariant::Toffoli,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GateAction {
    Matrix,
    TruthTable,
}

#[derive(Debug, Subcommand)]
enum CliCommand {
    /// Teleport alpha|0> + beta|1> repeatedly and summarize fidelity and outcomes
    Teleport {
        /// Amplitude of |0>, written `re[+im i]`
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        /// Amplitude of |1>, written `re[+im i]`
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
        #[arg(long, value_enum, default_value = "feynman")]
        variant: VariantArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        runs: usize,
    },
    /// Print every circuit stage next to its transcribed expression
    Trace {
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
        #[arg(long, value_enum, default_value = "feynman")]
        variant: VariantArg,
    },
    /// Show a gate's matrix or truth table
    Gate {
        /// I, X, Y, Z, H, FG, TG, FRG; TG accepts wiring such as `TG(c=1,3;t=2)`
        #[arg(long)]
        name: String,
        #[arg(long, value_enum, default_value = "matrix")]
        action: GateAction,
    },
    /// Run a sensor-network scenario file
    Scenario {
        #[arg(long)]
        config: PathBuf,
    },
}

/// A validated invocation.
#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Teleport {
        alpha: Amplitude,
        beta: Amplitude,
        variant: ProtocolVariant,
        seed: u64,
        runs: usize,
    },
    Trace {
        alpha: Amplitude,
        beta: Amplitude,
        variant: ProtocolVariant,
    },
    Gate {
        gate: Gate,
        action: GateAction,
    },
    Scenario {
        config: PathBuf,
    },
}

/// What parsing produced when it did not yield a command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseOutcome {
    /// `--help` or `--version`: print and exit 0.
    Info(String),
    /// Usage error text; exit 2.
    Usage(String),
}

fn parse_amplitude(flag: &str, text: &str) -> Result<Amplitude, ParseOutcome> {
    let amp = Complex64::from_str(text.trim()).map_err(|_| {
        ParseOutcome::Usage(format!("error: invalid value `{text}` for --{flag}\n"))
    })?;
    if !amp.re.is_finite() || !amp.im.is_finite() {
        return Err(ParseOutcome::Usage(format!(
            "error: --{flag} must be finite\n"
        )));
    }
    Ok(amp)
}

fn parse_pair(alpha: &str, beta: &str) -> Result<(Amplitude, Amplitude), ParseOutcome> {
    let a = parse_amplitude("alpha", alpha)?;
    let b = parse_amplitude("beta", beta)?;
    new_qubit(a, b).map_err(|e| ParseOutcome::Usage(format!("error: --alpha/--beta: {e}\n")))?;
    Ok((a, b))
}

pub fn parse_args<I, T>(argv: I) -> Result<Command, ParseOutcome>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ParseOutcome::Info(e.to_string()),
        _ => ParseOutcome::Usage(e.to_string()),
    })?;
    Ok(match cli.command {
        CliCommand::Teleport {
            alpha,
            beta,
            variant,
            seed,
            runs,
        } => {
            let (alpha, beta) = parse_pair(&alpha, &beta)?;
            if runs == 0 {
                return Err(ParseOutcome::Usage(
                    "error: --runs must be at least 1\n".into(),
                ));
            }
            Command::Teleport {
                alpha,
                beta,
                variant: variant.into(),
                seed,
                runs,
            }
        }
        CliCommand::Trace {
            alpha,
            beta,
            variant,
        } => {
            let (alpha, beta) = parse_pair(&alpha, &beta)?;
            Command::Trace {
                alpha,
                beta,
                variant: variant.into(),
            }
        }
        CliCommand::Gate { name, action } => Command::Gate {
            gate: Gate::parse(&name)
                .map_err(|e| ParseOutcome::Usage(format!("error: --name: {e}\n")))?,
            action,
        },
        CliCommand::Scenario { config } => Command::Scenario { config },
    })
}

/// Exit code plus the text for standard output and standard error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl RunOutput {
    fn ok(stdout: String) -> Self {
        Self {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }
}

pub fn run(command: &Command) -> RunOutput {
    match command {
        Command::Teleport {
            alpha,
            beta,
            variant,
            seed,
            runs,
        } => run_teleport(*alpha, *beta, *variant, *seed, *runs),
        Command::Trace {
            alpha,
            beta,
            variant,
        } => match trace_report(*alpha, *beta, *variant) {
            Ok(report) => {
                let endpoints_match = report.verdict(0) == Verdict::Match
                    && report.verdict(report.blocks.len() - 1) == Verdict::Match;
                RunOutput {
                    code: if endpoints_match {
                        EXIT_OK
                    } else {
                        EXIT_CHECK_FAILED
                    },
                    stdout: report.render(),
                    stderr: String::new(),
                }
            }
            Err(e) => usage(format!("error: {e}\n")),
        },
        Command::Gate { gate, action } => run_gate(gate, *action),
        Command::Scenario { config } => {
            let cfg = match ScenarioConfig::load(config) {
                Ok(cfg) => cfg,
                Err(e) => return usage(format!("error: {e}\n")),
            };
            match run_scenario(&cfg) {
                Ok(report) => RunOutput {
                    code: if report.success() {
                        EXIT_OK
                    } else {
                        EXIT_CHECK_FAILED
                    },
                    stdout: report.render(),
                    stderr: String::new(),
                },
                Err(e) => usage(format!("error: {e}\n")),
            }
        }
    }
}

fn usage(stderr: String) -> RunOutput {
    RunOutput {
        code: EXIT_USAGE,
        stdout: String::new(),
        stderr,
    }
}

fn run_teleport(
    alpha: Amplitude,
    beta: Amplitude,
    variant: ProtocolVariant,
    seed: u64,
    runs: usize,
) -> RunOutput {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fidelity_min = f64::INFINITY;
    let mut outcomes = [0usize; 4];
    for _ in 0..runs {
        match teleport(alpha, beta, variant, &mut rng) {
            Ok(r) => {
                fidelity_min = fidelity_min.min(r.input_fidelity);
                outcomes[r.message.index()] += 1;
            }
            Err(e) => return usage(format!("error: {e}\n")),
        }
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        "teleport variant={} alpha={} beta={} seed={} runs={}",
        variant,
        format_amplitude(alpha),
        format_amplitude(beta),
        seed,
        runs
    );
    let _ = writeln!(
        out,
        "fidelity_min={:.12} outcomes=[{},{},{},{}]",
        fidelity_min, outcomes[0], outcomes[1], outcomes[2], outcomes[3]
    );
    RunOutput {
        code: if fidelity_min >= 1.0 - FIDELITY_TOL {
            EXIT_OK
        } else {
            EXIT_CHECK_FAILED
        },
        stdout: out,
        stderr: String::new(),
    }
}

fn run_gate(gate: &Gate, action: GateAction) -> RunOutput {
    let mut out = String::new();
    let _ = writeln!(out, "gate {} arity={}", gate.name(), gate.arity());
    match action {
        GateAction::Matrix => {
            for row in 0..gate.dim() {
                let cells: Vec<String> = (0..gate.dim())
                    .map(|col| format_amplitude(gate.entry(row, col)))
                    .collect();
                let _ = writeln!(out, "{}", cells.join(" "));
            }
            RunOutput::ok(out)
        }
        GateAction::TruthTable => match truth_table(gate) {
            Ok(table) => {
                let w = gate.arity();
                for (input, output) in table.mapping.iter().enumerate() {
                    let _ = writeln!(out, "{input:0w$b} -> {output:0w$b}");
                }
                RunOutput::ok(out)
            }
            Err(e) => usage(format!("error: {e}\n")),
        },
    }
}

/// Parses `argv`, runs the command and writes its output.
pub fn main_with_args<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let result = match parse_args(argv) {
        Ok(command) => run(&command),
        Err(ParseOutcome::Info(text)) => RunOutput::ok(text),
        Err(ParseOutcome::Usage(text)) => usage(text),
    };
    let _ = stdout.write_all(result.stdout.as_bytes());
    let _ = stderr.write_all(result.stderr.as_bytes());
    result.code
}
