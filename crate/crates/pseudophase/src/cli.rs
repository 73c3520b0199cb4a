use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pseudophase_core::analysis::BitOrder;

use crate::runner::{self, parse_ids, Options, Outcome, RunError};

#[derive(Debug, Parser)]
#[command(name = "pseudophase", version, about = "Phase-sequence tagged optical field simulator")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Order {
    Msb,
    Lsb,
}

#[derive(Debug, Args)]
struct Common {
    /// Detector sensitivity.
    #[arg(long, global = true, default_value_t = 1.0)]
    mu: f64,
    /// Slot duration.
    #[arg(long = "tau-slot", global = true, default_value_t = 1.0)]
    tau_slot: f64,
    /// Relative spread below which a branch counts as flat.
    #[arg(long = "epsilon-flat", global = true, default_value_t = 0.05)]
    epsilon_flat: f64,
    /// Normalized level above which a sequence counts as present.
    #[arg(long, global = true, default_value_t = 0.5)]
    theta: f64,
    #[arg(long = "bit-order", global = true, value_enum, default_value_t = Order::Msb)]
    bit_order: Order,
    /// Sequence family file (comma-separated quarter turns per line).
    #[arg(long, global = true, value_name = "FILE")]
    family: Option<PathBuf>,
    /// Directory to write the run bundle into.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Include fields.csv in the bundle.
    #[arg(long = "dump-fields", global = true)]
    dump_fields: bool,
    /// Include traces.csv in the bundle.
    #[arg(long, global = true)]
    traces: bool,
    #[arg(long = "samples-per-slot", global = true, default_value_t = 1)]
    samples_per_slot: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the sequence family.
    Sequences,
    /// Check balance, pairwise agreement and XOR closure of the family.
    CheckFamily,
    /// Build, scan and analyze a named state: product, ghz, w or shor15.
    Demo {
        name: String,
        /// Three comma-separated sequence ids.
        #[arg(long)]
        ids: Option<String>,
    },
    /// Evaluate a netlist and analyze its sink fields.
    Run {
        netlist: PathBuf,
        /// M-matrix file to compare against.
        #[arg(long, value_name = "M_FILE")]
        expect: Option<PathBuf>,
        /// Comma-separated LO sequence ids.
        #[arg(long)]
        lo: Option<String>,
    },
    /// Enumerate the terms admitted by an M-matrix file.
    Reconstruct {
        m_file: PathBuf,
        /// Number of leading fields forming the argument register.
        #[arg(long = "x-fields")]
        x_fields: Option<usize>,
    },
}

impl Common {
    fn options(&self) -> Options {
        Options {
            mu: self.mu,
            tau_slot: self.tau_slot,
            epsilon_flat: self.epsilon_flat,
            theta: self.theta,
            bit_order: match self.bit_order {
                Order::Msb => BitOrder::MsbFirst,
                Order::Lsb => BitOrder::LsbFirst,
            },
            family: self.family.clone(),
            dump_fields: self.dump_fields,
            traces: self.traces,
            samples_per_slot: self.samples_per_slot,
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome, RunError> {
    let opts = cli.common.options();
    let outcome = match &cli.command {
        Command::Sequences => runner::sequences(&opts)?,
        Command::CheckFamily => runner::check_family(&opts)?,
        Command::Demo { name, ids } => {
            let ids = ids.as_deref().map(parse_ids).transpose()?;
            runner::run_demo(name, ids.as_deref(), &opts)?
        }
        Command::Run { netlist, expect, lo } => {
            let lo = lo.as_deref().map(parse_ids).transpose()?;
            runner::run_netlist(netlist, expect.as_deref(), lo.as_deref(), &opts)?
        }
        Command::Reconstruct { m_file, x_fields } => runner::reconstruct(m_file, *x_fields, &opts)?,
    };
    if let Some(dir) = &cli.common.out {
        outcome.bundle.write_to(dir)?;
    }
    Ok(outcome)
}

/// Runs the command line and returns the process exit code: 0 success,
/// 1 analysis mismatch, 2 usage, parse or configuration error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(o) => {
            print!("{}", o.report);
            o.status.exit_code()
        }
        Err(e @ RunError::Diagnostics { .. }) => {
            eprintln!("{}", e);
            e.exit_code()
        }
        Err(e) => {
            eprintln!("error: {}", e);
            e.exit_code()
        }
    }
}
