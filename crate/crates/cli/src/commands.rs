//! Subcommand implementations.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use nusrc::{
    convert_offline, oracle_convert, ComputeOrder, ConversionReport, ConverterConfig, ParallelForm,
    RationalTF, Section, TimeGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::io::{read_signal, write_csv, Signal};
use crate::spec::{default_filter, load_json, Extent, FilterSpec, GridSpec};

/// Reference values of the third-order Butterworth design at 20 kHz.
pub mod reference {
    pub const GAIN: f64 = 1.984_401_707_539_188_5e15;
    pub const S0: (f64, f64) = (-125_663.706_143_59, 0.0);
    pub const S1: (f64, f64) = (-62_831.853_071_8, 108_827.961_854_05);
    pub const RESIDUE: f64 = 125_663.706_143_602_92;
}

#[derive(Serialize)]
struct DesignReport<'a> {
    gain: f64,
    zeros: Vec<[f64; 2]>,
    poles: Vec<[f64; 2]>,
    sections: &'a [Section<f64>],
}

fn pairs(v: &[num_complex::Complex<f64>]) -> Vec<[f64; 2]> {
    v.iter().map(|c| [c.re, c.im]).collect()
}

pub fn design(filter: &FilterSpec, check_table: bool) -> Result<()> {
    let (tf, form) = filter.parallel_form()?;
    if check_table {
        check_reference_design(&tf, &form)?;
    }
    let report = DesignReport {
        gain: tf.gain(),
        zeros: pairs(tf.zeros()),
        poles: pairs(tf.poles()),
        sections: form.sections(),
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

/// Compares to 10 significant figures.
fn check_reference_design(tf: &RationalTF<f64>, form: &ParallelForm<f64>) -> Result<()> {
    let close =
        |got: f64, want: f64| (got - want).abs() <= 1e-10 * want.abs().max(f64::MIN_POSITIVE);
    let mut bad = Vec::new();
    let mut check = |name: &str, got: f64, want: f64| {
        if !(close(got, want) || (want == 0.0 && got.abs() < 1e-6)) {
            bad.push(format!("{name}: got {got:.12e}, expected {want:.12e}"));
        }
    };
    ensure!(
        tf.poles().len() == 3,
        "--check-table applies to the third-order 20 kHz design"
    );
    check("gain", tf.gain(), reference::GAIN);
    check("s0.re", tf.poles()[0].re, reference::S0.0);
    check("s0.im", tf.poles()[0].im, reference::S0.1);
    check("s1.re", tf.poles()[1].re, reference::S1.0);
    check("s1.im", tf.poles()[1].im, reference::S1.1);
    match form.sections().first() {
        Some(Section::FirstOrder { a, .. }) => check("a", *a, reference::RESIDUE),
        other => bad.push(format!(
            "first section: expected first order, got {other:?}"
        )),
    }
    if bad.is_empty() {
        eprintln!("design matches reference values");
        Ok(())
    } else {
        bail!(
            "design differs from reference values:\n  {}",
            bad.join("\n  ")
        )
    }
}

/// Inputs shared by `convert` and `oracle`.
pub struct Job {
    pub values: Vec<f64>,
    pub grid_in: TimeGrid<f64>,
    pub grid_out: TimeGrid<f64>,
    pub form: ParallelForm<f64>,
}

pub struct JobArgs<'a> {
    pub input: &'a Path,
    pub channel: usize,
    pub input_grid: Option<&'a str>,
    pub output_grid: &'a str,
    pub filter: Option<&'a str>,
}

impl Job {
    pub fn load(args: &JobArgs) -> Result<Job> {
        let signal = read_signal(args.input, args.channel)?;
        let n = signal.values().len();
        let input_spec = match args.input_grid {
            Some(s) => Some(load_json::<GridSpec>(s, "input grid")?),
            None => None,
        };
        let grid_in = match (&signal, &input_spec) {
            (_, Some(spec)) => {
                let g = spec.build(Extent::Exactly(n))?;
                if let Signal::Timed { times, .. } = &signal {
                    check_times_agree(times, g.timestamps())?;
                }
                g
            }
            (Signal::Timed { times, .. }, None) => TimeGrid::from_timestamps(times.clone())?,
            (Signal::Uniform { rate_hz, .. }, None) => TimeGrid::uniform(1.0 / rate_hz, n)?,
        };
        let input_period = match (&signal, &input_spec) {
            (_, Some(spec)) => spec.nominal_period(),
            (Signal::Uniform { rate_hz, .. }, None) => Some(1.0 / rate_hz),
            (Signal::Timed { times, .. }, None) => {
                (n >= 2).then(|| (times[n - 1] - times[0]) / (n - 1) as f64)
            }
        };

        let output_spec: GridSpec = load_json(args.output_grid, "output grid")?;
        let last = *grid_in.timestamps().last().expect("signal is non-empty");
        let grid_out = output_spec.build(Extent::Until(last))?;

        let filter = match args.filter {
            Some(s) => load_json(s, "filter")?,
            None => {
                let (tx, ty) = input_period.zip(output_spec.nominal_period()).context(
                    "cannot pick a default filter without nominal periods; pass --filter",
                )?;
                default_filter(tx, ty)
            }
        };
        let (_, form) = filter.parallel_form()?;
        let (Signal::Timed { values, .. } | Signal::Uniform { values, .. }) = signal;
        Ok(Job {
            values,
            grid_in,
            grid_out,
            form,
        })
    }
}

/// CSV timestamps must match a supplied input grid to within `1e-9` of a period.
fn check_times_agree(file: &[f64], grid: &[f64]) -> Result<()> {
    let span = if grid.len() >= 2 {
        (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64
    } else {
        1.0
    };
    for (n, (a, b)) in file.iter().zip(grid).enumerate() {
        ensure!(
            (a - b).abs() <= 1e-9 * span.abs().max(a.abs() * 1e-7),
            "input row {n}: file time {a} differs from input grid time {b}"
        );
    }
    Ok(())
}

pub struct ConvertArgs<'a> {
    pub output: Option<&'a Path>,
    pub report: Option<&'a Path>,
    pub order: ComputeOrder,
    pub reanchor_every: Option<usize>,
    pub report_steps: bool,
    pub verify: bool,
    pub verify_samples: Option<usize>,
    pub verify_tol: f64,
}

pub fn convert(job: &Job, args: &ConvertArgs) -> Result<()> {
    let config = ConverterConfig {
        order: args.order,
        output_period: None,
        reanchor_every: args.reanchor_every,
        record_steps: args.report_steps,
    };
    let (y, mut report) =
        convert_offline(&job.values, &job.grid_in, &job.grid_out, &job.form, config)?;
    ensure!(
        y.iter().all(|v| v.is_finite()),
        "conversion produced non-finite output; the direct ordering overflows on long \
         horizons, use --ordering rebased"
    );
    write_csv(args.output, ["t", "value"], job.grid_out.timestamps(), &y)?;

    if args.verify {
        let err = verify(job, &y, args.verify_samples)?;
        report.max_relative_error = Some(err);
    }
    write_report(args.report, &report)?;
    if let Some(err) = report.max_relative_error {
        eprintln!("max error relative to oracle RMS: {err:.3e}");
        ensure!(
            err <= args.verify_tol,
            "verification failed: {err:.3e} exceeds {:.1e}",
            args.verify_tol
        );
    }
    Ok(())
}

/// Max error over the first `samples` outputs, relative to the oracle's RMS.
fn verify(job: &Job, y: &[f64], samples: Option<usize>) -> Result<f64> {
    let k = samples.unwrap_or(y.len()).min(y.len());
    ensure!(k > 0, "nothing to verify");
    let prefix = TimeGrid::from_timestamps(job.grid_out.timestamps()[..k].to_vec())?;
    let reference = oracle_convert(&job.values, &job.grid_in, &prefix, &job.form)?;
    let rms = (reference.iter().map(|v| v * v).sum::<f64>() / k as f64).sqrt();
    let worst = y
        .iter()
        .zip(&reference)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(if rms > 0.0 { worst / rms } else { worst })
}

fn write_report(path: Option<&Path>, report: &ConversionReport) -> Result<()> {
    let json = serde_json::to_string_pretty(report)?;
    match path {
        Some(p) => {
            std::fs::write(p, json + "\n").with_context(|| format!("writing {}", p.display()))
        }
        None => {
            eprintln!("{json}");
            Ok(())
        }
    }
}

pub fn oracle(job: &Job, output: Option<&Path>) -> Result<()> {
    let y = oracle_convert(&job.values, &job.grid_in, &job.grid_out, &job.form)?;
    write_csv(output, ["t", "value"], job.grid_out.timestamps(), &y)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Scale {
    Log,
    Linear,
}

pub fn response(
    filter: &FilterSpec,
    f_min: f64,
    f_max: f64,
    points: usize,
    scale: Scale,
    output: Option<&Path>,
) -> Result<()> {
    ensure!(points > 0, "empty frequency range: --points is 0");
    ensure!(
        f_min.is_finite() && f_max.is_finite() && f_min >= 0.0,
        "frequencies must be finite and non-negative"
    );
    ensure!(
        f_max > f_min || (points == 1 && f_max == f_min),
        "empty frequency range: {f_min} Hz to {f_max} Hz"
    );
    if scale == Scale::Log {
        ensure!(f_min > 0.0, "log sweep needs --f-min > 0");
    }
    let tf = filter.transfer_function()?;
    let step = |k: usize| {
        if points == 1 {
            return f_min;
        }
        let u = k as f64 / (points - 1) as f64;
        match scale {
            Scale::Linear => f_min + u * (f_max - f_min),
            Scale::Log => f_min * (f_max / f_min).powf(u),
        }
    };
    let freqs: Vec<f64> = (0..points)
        .map(|k| if k + 1 == points { f_max } else { step(k) })
        .collect();
    let mags: Vec<f64> = freqs.iter().map(|&f| tf.magnitude_squared(f)).collect();
    write_csv(output, ["f_hz", "mag2"], &freqs, &mags)
}

#[derive(Serialize)]
struct PerOutput {
    mults: f64,
    adds: f64,
    exps: f64,
    transcendentals: f64,
}

#[derive(Serialize)]
struct BenchReport {
    order: ComputeOrder,
    sections: usize,
    inputs: usize,
    outputs: usize,
    seconds: f64,
    outputs_per_second: f64,
    inputs_per_second: f64,
    per_output: PerOutput,
    new_terms: nusrc::TermStats,
}

pub struct BenchArgs<'a> {
    pub samples: usize,
    pub input_grid: &'a str,
    pub output_grid: &'a str,
    pub filter: Option<&'a str>,
    pub order: ComputeOrder,
    pub reanchor_every: Option<usize>,
    pub seed: u64,
    pub output: Option<&'a PathBuf>,
}

pub fn bench(args: &BenchArgs) -> Result<()> {
    ensure!(args.samples > 0, "--samples must be positive");
    let in_spec: GridSpec = load_json(args.input_grid, "input grid")?;
    let out_spec: GridSpec = load_json(args.output_grid, "output grid")?;
    let grid_in = in_spec.build(Extent::Exactly(args.samples))?;
    let last = *grid_in.timestamps().last().expect("samples > 0");
    let grid_out = out_spec.build(Extent::Until(last))?;
    let filter = match args.filter {
        Some(s) => load_json(s, "filter")?,
        None => default_filter(
            in_spec
                .nominal_period()
                .context("input grid has no nominal period")?,
            out_spec
                .nominal_period()
                .context("output grid has no nominal period")?,
        ),
    };
    let (_, form) = filter.parallel_form()?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let x: Vec<f64> = (0..args.samples)
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    let config = ConverterConfig {
        order: args.order,
        output_period: None,
        reanchor_every: args.reanchor_every,
        record_steps: false,
    };

    let start = Instant::now();
    let (y, report) = convert_offline(&x, &grid_in, &grid_out, &form, config)?;
    let seconds = start.elapsed().as_secs_f64();
    std::hint::black_box(&y);

    let (mults, adds, exps, transcendentals) = report.per_output();
    let bench = BenchReport {
        order: report.order,
        sections: report.sections,
        inputs: args.samples,
        outputs: report.outputs,
        seconds,
        outputs_per_second: report.outputs as f64 / seconds,
        inputs_per_second: args.samples as f64 / seconds,
        per_output: PerOutput {
            mults,
            adds,
            exps,
            transcendentals,
        },
        new_terms: report.new_terms,
    };
    let json = serde_json::to_string_pretty(&bench)? + "\n";
    match args.output {
        Some(p) => std::fs::write(p, json).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{json}"),
    }
    Ok(())
}
