//! `nusrc`: filter design, conversion, oracle and response reports.

mod commands;
mod io;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nusrc::ComputeOrder;

use commands::{BenchArgs, ConvertArgs, Job, JobArgs, Scale};
use spec::{load_json, FilterSpec};

#[derive(Parser)]
#[command(name = "nusrc", version, about = "Nonuniform sampling-rate conversion")]
struct Cli {
    /// Worker threads for the oracle and other parallel stages.
    #[arg(long, global = true, env = "NUSRC_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design a filter and print its parallel form as JSON.
    Design {
        /// Butterworth lowpass order.
        #[arg(long, requires = "cutoff_hz", conflicts_with = "filter")]
        butterworth: Option<usize>,
        #[arg(long)]
        cutoff_hz: Option<f64>,
        /// Filter spec: inline JSON or a path.
        #[arg(long)]
        filter: Option<String>,
        /// Fail unless the design matches the third-order 20 kHz reference.
        #[arg(long)]
        check_table: bool,
    },
    /// Convert a signal onto an output grid with the recursive converter.
    Convert {
        #[command(flatten)]
        job: JobOpts,
        #[arg(long, value_enum, default_value_t = Ordering::Rebased)]
        ordering: Ordering,
        /// Re-anchor repeated-pole moments every this many outputs.
        #[arg(long)]
        reanchor_every: Option<usize>,
        /// Report JSON path; printed to stderr when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Include per-output counts in the report.
        #[arg(long)]
        report_steps: bool,
        /// Compare against direct summation and fail above --verify-tol.
        #[arg(long)]
        verify: bool,
        /// Number of leading outputs to verify (all by default).
        #[arg(long, requires = "verify")]
        verify_samples: Option<usize>,
        #[arg(long, default_value_t = 1e-8)]
        verify_tol: f64,
    },
    /// Convert by direct summation over all inputs.
    Oracle {
        #[command(flatten)]
        job: JobOpts,
    },
    /// Write |H(j2πf)|² over a frequency sweep.
    Response {
        /// Filter spec: inline JSON or a path.
        #[arg(long)]
        filter: String,
        #[arg(long, default_value_t = 10.0)]
        f_min: f64,
        #[arg(long, default_value_t = 1e6)]
        f_max: f64,
        #[arg(long, default_value_t = 512)]
        points: usize,
        #[arg(long, value_enum, default_value_t = Scale::Log)]
        scale: Scale,
        /// CSV path; stdout when omitted.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Time a conversion of seeded white noise and report per-output counts.
    Bench {
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(
            long,
            default_value = r#"{"kind":"uniform","period_s":2.0833333333333333e-5}"#
        )]
        input_grid: String,
        #[arg(
            long,
            default_value = r#"{"kind":"uniform","period_s":2.2675736961451248e-5}"#
        )]
        output_grid: String,
        #[arg(long)]
        filter: Option<String>,
        #[arg(long, value_enum, default_value_t = Ordering::Rebased)]
        ordering: Ordering,
        #[arg(long)]
        reanchor_every: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON path; stdout when omitted.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct JobOpts {
    /// CSV `t,value` or WAV file.
    #[arg(long, short)]
    input: PathBuf,
    /// WAV channel to read.
    #[arg(long, default_value_t = 0)]
    channel: usize,
    /// Input grid spec; defaults to the CSV timestamps or the WAV rate.
    #[arg(long)]
    input_grid: Option<String>,
    /// Output grid spec: inline JSON or a path.
    #[arg(long)]
    output_grid: String,
    /// Filter spec; defaults to third-order Butterworth at 0.45 of the lower rate.
    #[arg(long)]
    filter: Option<String>,
    /// Output CSV path; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl JobOpts {
    fn load(&self) -> Result<Job> {
        Job::load(&JobArgs {
            input: &self.input,
            channel: self.channel,
            input_grid: self.input_grid.as_deref(),
            output_grid: &self.output_grid,
            filter: self.filter.as_deref(),
        })
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Ordering {
    /// Powers of the per-period decay from time zero.
    Direct,
    /// Per-step decay relative to the current instant.
    Rebased,
}

impl From<Ordering> for ComputeOrder {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Direct => ComputeOrder::Direct,
            Ordering::Rebased => ComputeOrder::Rebased,
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring thread pool")?;
    }
    match cli.command {
        Command::Design {
            butterworth,
            cutoff_hz,
            filter,
            check_table,
        } => {
            let spec = match (butterworth, filter) {
                (Some(order), _) => FilterSpec::butterworth(order, cutoff_hz.unwrap_or_default()),
                (None, Some(f)) => load_json(&f, "filter")?,
                (None, None) => anyhow::bail!("pass --butterworth N --cutoff-hz F or --filter"),
            };
            commands::design(&spec, check_table)
        }
        Command::Convert {
            job,
            ordering,
            reanchor_every,
            report,
            report_steps,
            verify,
            verify_samples,
            verify_tol,
        } => commands::convert(
            &job.load()?,
            &ConvertArgs {
                output: job.output.as_deref(),
                report: report.as_deref(),
                order: ordering.into(),
                reanchor_every,
                report_steps,
                verify,
                verify_samples,
                verify_tol,
            },
        ),
        Command::Oracle { job } => commands::oracle(&job.load()?, job.output.as_deref()),
        Command::Response {
            filter,
            f_min,
            f_max,
            points,
            scale,
            output,
        } => commands::response(
            &load_json(&filter, "filter")?,
            f_min,
            f_max,
            points,
            scale,
            output.as_deref(),
        ),
        Command::Bench {
            samples,
            input_grid,
            output_grid,
            filter,
            ordering,
            reanchor_every,
            seed,
            output,
        } => commands::bench(&BenchArgs {
            samples,
            input_grid: &input_grid,
            output_grid: &output_grid,
            filter: filter.as_deref(),
            order: ordering.into(),
            reanchor_every,
            seed,
            output: output.as_ref(),
        }),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
