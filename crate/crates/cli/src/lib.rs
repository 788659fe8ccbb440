//! `quasilin` command line: config ingestion, one subcommand per solver
//! module, CSV/key-value output and the acceptance runner.
//!
//! Exit codes: 0 success, 1 invalid input or I/O, 2 numerical
//! non-convergence, 3 acceptance failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;

use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::{Axis, CmdOutput, SweepArgs, WolffArgs};
use config::{Overrides, RunConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Validation(String),
    Numerical(String),
    Acceptance(String),
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        CliError::Numerical(msg.into())
    }

    pub fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Acceptance(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Numerical(m) | CliError::Acceptance(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<quasilin::Error> for CliError {
    fn from(e: quasilin::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "quasilin", version, about = "Sublinear weighted p-Laplace problems on (-1, 1) with measure data")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default: config `output.dir`, then $QUASILIN_OUT, then ./quasilin-out).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweep and verify.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Solver tolerance for truncation limits.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub p: Option<f64>,
    #[arg(long, global = true)]
    pub q: Option<f64>,
    /// Positive number or "inf".
    #[arg(long, global = true)]
    pub gamma: Option<String>,
    /// Weight exponent; switches the weight to (1 - |x|)^beta.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Density exponent; switches the density to c (1 - |x|)^(-alpha).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Potential W mu: solution curve and flux constant.
    Solve,
    /// Wolff potential next to W mu at evenly spaced points.
    Wolff {
        #[arg(long, default_value_t = quasilin::wolff::DEFAULT_RADIUS)]
        radius: f64,
        #[arg(long, default_value_t = 65)]
        samples: usize,
        #[arg(long, default_value_t = 0.05)]
        margin: f64,
    },
    /// Generalized energy E_gamma and its two identities.
    Energy,
    /// Minimal solution of the sublinear problem by monotone iteration.
    Iterate,
    /// Bracket and Rayleigh lower bound for the trace constant.
    Trace,
    /// Finite-energy classification over a parameter grid.
    Sweep {
        /// name=lo:hi:step or name=v1,v2 with name in p, beta, q, alpha; repeatable.
        #[arg(long = "axis")]
        axes: Vec<String>,
        #[arg(long, default_value_t = 64)]
        levels: u32,
        #[arg(long, default_value_t = 16)]
        window: usize,
        #[arg(long, default_value_t = 0.05)]
        dead_band: f64,
    },
    /// Runs a verification suite ("acceptance", or one criterion number).
    Verify {
        #[arg(default_value = "acceptance")]
        suite: String,
        #[arg(long, default_value_t = quasilin::acceptance::DEFAULT_SEED)]
        seed: u64,
    },
}

impl Cli {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            tol: self.tol,
            p: self.p,
            q: self.q,
            gamma: self.gamma.clone(),
            beta: self.beta,
            alpha: self.alpha,
        }
    }
}

/// Runs a parsed command line, printing a summary to stdout.
pub fn run(cli: &Cli) -> Result<CmdOutput, CliError> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::validation("--jobs must be >= 1"));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cfg = RunConfig::load(cli.config.as_deref(), &cli.overrides())?;
    let out = match &cli.cmd {
        Cmd::Solve => commands::cmd_solve(&cfg)?,
        Cmd::Wolff { radius, samples, margin } => commands::cmd_wolff(
            &cfg,
            WolffArgs {
                radius: *radius,
                samples: *samples,
                margin: *margin,
            },
        )?,
        Cmd::Energy => commands::cmd_energy(&cfg)?,
        Cmd::Iterate => commands::cmd_iterate(&cfg)?,
        Cmd::Trace => commands::cmd_trace(&cfg)?,
        Cmd::Sweep { axes, levels, window, dead_band } => {
            let axes = axes.iter().map(|a| Axis::parse(a)).collect::<Result<Vec<_>, _>>()?;
            commands::cmd_sweep(
                &cfg,
                &SweepArgs {
                    axes,
                    levels: *levels,
                    window: *window,
                    dead_band: *dead_band,
                },
            )?
        }
        Cmd::Verify { suite, seed } => {
            let (out, outcomes) = commands::cmd_verify(&cfg, suite, *seed)?;
            for o in &outcomes {
                say(&format!("{o}\n"));
            }
            let failed: Vec<String> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id.to_string()).collect();
            if !failed.is_empty() {
                return Err(CliError::Acceptance(format!("verify: criteria {} failed", failed.join(", "))));
            }
            out
        }
    };
    say(&out.report.render());
    for f in &out.files {
        say(&format!("wrote {}\n", f.display()));
    }
    Ok(out)
}

/// Stdout write that tolerates a closed pipe (`quasilin ... | head`).
fn say(s: &str) {
    use std::io::Write;
    let _ = std::io::stdout().lock().write_all(s.as_bytes());
}
