//! Command-line front end for the qkdsim laboratory.
//!
//! Subcommands: `simulate` (run a protocol), `equivalence` (compare two
//! protocols), `codes` (inspect/validate code pairs), `bounds` (evaluate
//! security formulas), `verify` (oracle-vs-frame and identity checks).
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error, 3 verification
//! check failure.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{RawConfig, RunConfig};
use qkdsim::protocols::ProtocolKind;

#[derive(Parser, Debug)]
#[command(
    name = "qkdsim",
    version,
    about = "Simulation laboratory for CSS-code quantum key distribution"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a protocol for many trials; write per-trial records and a summary.
    Simulate(SimulateArgs),
    /// Compare two protocols' outcome statistics (mc, exhaustive, or dense mode).
    Equivalence(EquivalenceArgs),
    /// Print parameters and rates for a code pair and validate it.
    Codes(CodesArgs),
    /// Evaluate security-bound formulas, optionally over a parameter grid.
    Bounds(BoundsArgs),
    /// Run the oracle-vs-frame and operator-identity checks.
    Verify(VerifyArgs),
}

/// Flags mirror config-file keys one-to-one: key `a.b` is flag `--a-b`.
#[derive(Args, Debug, Default, Clone)]
pub struct SimulateArgs {
    /// Configuration file with flat dotted keys (`key = value` lines).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Protocol: 1|purification, 2|css, 3|bb84.
    #[arg(long)]
    pub protocol: Option<String>,
    /// Code pair: steane, toy3, repetition3, random, file.
    #[arg(long = "code-kind")]
    pub code_kind: Option<String>,
    #[arg(long = "code-n")]
    pub code_n: Option<usize>,
    #[arg(long = "code-dim1")]
    pub code_dim1: Option<usize>,
    #[arg(long = "code-dim2")]
    pub code_dim2: Option<usize>,
    #[arg(long = "code-t")]
    pub code_t: Option<usize>,
    #[arg(long = "code-path")]
    pub code_path: Option<PathBuf>,
    /// BB84 transmits ceil((4 + delta) n) qubits.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long = "threshold-rate")]
    pub threshold_rate: Option<f64>,
    #[arg(long = "threshold-margin")]
    pub threshold_margin: Option<f64>,
    /// Scramble transit order with a random permutation.
    #[arg(long)]
    pub scramble: Option<bool>,
    /// Announce the phase pattern z in the CSS-code protocol.
    #[arg(long = "announce-z")]
    pub announce_z: Option<bool>,
    /// Attack: none, iid_pauli, intercept_resend, fixed_pattern.
    #[arg(long = "attack-kind")]
    pub attack_kind: Option<String>,
    #[arg(long = "attack-px")]
    pub attack_px: Option<f64>,
    #[arg(long = "attack-py")]
    pub attack_py: Option<f64>,
    #[arg(long = "attack-pz")]
    pub attack_pz: Option<f64>,
    #[arg(long = "attack-fraction")]
    pub attack_fraction: Option<f64>,
    #[arg(long = "attack-bit-pattern")]
    pub attack_bit_pattern: Option<String>,
    #[arg(long = "attack-phase-pattern")]
    pub attack_phase_pattern: Option<String>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Master seed; required (all runs are reproducible).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (default: $QKDSIM_OUT_DIR or ./out).
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
}

impl SimulateArgs {
    pub fn into_raw(self) -> anyhow::Result<RawConfig> {
        let mut raw = match &self.config {
            Some(path) => RawConfig::from_file(path)?,
            None => RawConfig::default(),
        };
        macro_rules! flag {
            ($field:expr, $key:literal) => {
                if let Some(v) = $field {
                    raw.set_flag($key, v);
                }
            };
        }
        flag!(self.protocol, "protocol");
        flag!(self.code_kind, "code.kind");
        flag!(self.code_n, "code.n");
        flag!(self.code_dim1, "code.dim1");
        flag!(self.code_dim2, "code.dim2");
        flag!(self.code_t, "code.t");
        flag!(self.code_path.map(|p| p.display().to_string()), "code.path");
        flag!(self.delta, "delta");
        flag!(self.threshold_rate, "threshold.rate");
        flag!(self.threshold_margin, "threshold.margin");
        flag!(self.scramble, "scramble");
        flag!(self.announce_z, "announce_z");
        flag!(self.attack_kind, "attack.kind");
        flag!(self.attack_px, "attack.px");
        flag!(self.attack_py, "attack.py");
        flag!(self.attack_pz, "attack.pz");
        flag!(self.attack_fraction, "attack.fraction");
        flag!(self.attack_bit_pattern, "attack.bit_pattern");
        flag!(self.attack_phase_pattern, "attack.phase_pattern");
        flag!(self.trials, "trials");
        flag!(self.seed, "seed");
        flag!(self.out_dir.map(|p| p.display().to_string()), "out.dir");
        Ok(raw)
    }

    pub fn resolve(self) -> anyhow::Result<RunConfig> {
        config::resolve_run(&self.into_raw()?)
    }
}

#[derive(Args, Debug)]
pub struct EquivalenceArgs {
    #[command(flatten)]
    pub base: SimulateArgs,
    /// Protocols to compare, e.g. "2,3" or "1,2".
    #[arg(long, default_value = "2,3")]
    pub kinds: String,
    /// mc (Monte Carlo TVD), exhaustive (fixed patterns, coupled draws),
    /// or dense (statevector, coherent attack).
    #[arg(long, default_value = "mc")]
    pub mode: String,
    #[arg(long = "max-weight", default_value_t = 2)]
    pub max_weight: usize,
    #[arg(long = "draws-per-pattern", default_value_t = 25)]
    pub draws_per_pattern: usize,
    /// Rotation angle of the built-in coherent attack (dense mode).
    #[arg(long, default_value_t = 0.4)]
    pub theta: f64,
}

#[derive(Args, Debug)]
pub struct CodesArgs {
    #[arg(long = "code-kind", default_value = "steane")]
    pub code_kind: String,
    #[arg(long = "code-n")]
    pub code_n: Option<usize>,
    #[arg(long = "code-dim1")]
    pub code_dim1: Option<usize>,
    #[arg(long = "code-dim2")]
    pub code_dim2: Option<usize>,
    #[arg(long = "code-t")]
    pub code_t: Option<usize>,
    /// Read the pair from a code file instead of a named constructor.
    #[arg(long)]
    pub import: Option<PathBuf>,
    /// Write the pair to a code file.
    #[arg(long)]
    pub export: Option<PathBuf>,
    /// Seed for random code generation.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    /// lo_chau, sampling_tail, sampling_experiment, key_rate, entropy, threshold.
    #[arg(long)]
    pub formula: String,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub planted: Option<usize>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// gv or shannon (key_rate).
    #[arg(long = "rate-mode", default_value = "shannon")]
    pub rate_mode: String,
    /// Parameter sweep start:stop:step (key_rate, entropy).
    #[arg(long)]
    pub grid: Option<String>,
    /// Write the columnar output to a file as well as stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Random frame-vs-oracle circuits to run.
    #[arg(long, default_value_t = 500)]
    pub circuits: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

fn parse_kinds(spec: &str) -> anyhow::Result<(ProtocolKind, ProtocolKind)> {
    let parse_one = |s: &str| match s.trim() {
        "1" | "purification" => Ok(ProtocolKind::Purification),
        "2" | "css" => Ok(ProtocolKind::CssCode),
        "3" | "bb84" => Ok(ProtocolKind::Bb84),
        other => Err(anyhow::anyhow!("unknown protocol `{other}`")),
    };
    let (a, b) = spec
        .split_once(',')
        .ok_or_else(|| anyhow::anyhow!("--kinds takes two protocols, e.g. 2,3"))?;
    Ok((parse_one(a)?, parse_one(b)?))
}

// Usage problems (bad keys, bad values, missing arguments) exit 1;
// failures during execution (I/O, internal errors) exit 2.
enum CliError {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Simulate(args) => {
            let run = args.resolve().map_err(CliError::Usage)?;
            commands::cmd_simulate(run).map_err(CliError::Runtime)
        }
        Command::Equivalence(args) => {
            let kinds = parse_kinds(&args.kinds).map_err(CliError::Usage)?;
            let base = args.base.clone().resolve().map_err(CliError::Usage)?;
            commands::cmd_equivalence(commands::EquivalenceRun {
                base,
                kinds,
                mode: args.mode,
                max_weight: args.max_weight,
                draws_per_pattern: args.draws_per_pattern,
                theta: args.theta,
            })
            .map_err(CliError::Runtime)
        }
        Command::Codes(args) => {
            let (pair, name) = match &args.import {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| {
                        CliError::Usage(anyhow::anyhow!("reading {}: {e}", path.display()))
                    })?;
                    let pair = qkdsim::css::CssCodePair::from_text(&text).map_err(|e| {
                        CliError::Usage(anyhow::anyhow!("parsing code file: {e}"))
                    })?;
                    (pair, "file".to_string())
                }
                None => {
                    let mut raw = RawConfig::default();
                    raw.set_flag("code.kind", &args.code_kind);
                    if let Some(n) = args.code_n {
                        raw.set_flag("code.n", n);
                    }
                    if let Some(d) = args.code_dim1 {
                        raw.set_flag("code.dim1", d);
                    }
                    if let Some(d) = args.code_dim2 {
                        raw.set_flag("code.dim2", d);
                    }
                    if let Some(t) = args.code_t {
                        raw.set_flag("code.t", t);
                    }
                    config::build_code(&raw, args.seed).map_err(CliError::Usage)?
                }
            };
            commands::cmd_codes(pair, &name, args.export).map_err(CliError::Runtime)
        }
        Command::Bounds(args) => commands::cmd_bounds(commands::BoundsRun {
            formula: args.formula,
            s: args.s,
            m: args.m,
            n: args.n,
            delta: args.delta,
            eps: args.eps,
            p: args.p,
            planted: args.planted,
            trials: args.trials,
            seed: args.seed,
            rate_mode: args.rate_mode,
            grid: args.grid,
            out: args.out,
        })
        .map_err(CliError::Usage),
        Command::Verify(args) => {
            commands::cmd_verify(args.circuits, args.seed).map_err(CliError::Runtime)
        }
    }
}

/// Executes a parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match execute(cli) {
        Ok(code) => code,
        Err(CliError::Usage(e)) => {
            eprintln!("usage error: {e:#}");
            1
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}
