//! CSV and WAV sample files.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};

/// Samples read from disk.
#[derive(Clone, Debug, PartialEq)]
pub enum Signal {
    /// `t,value` rows.
    Timed { times: Vec<f64>, values: Vec<f64> },
    /// Uniform PCM with the header's rate; the first sample is at `t = 0`.
    Uniform { rate_hz: f64, values: Vec<f64> },
}

impl Signal {
    pub fn values(&self) -> &[f64] {
        match self {
            Signal::Timed { values, .. } | Signal::Uniform { values, .. } => values,
        }
    }
}

/// Reads `path` as WAV if it ends in `.wav`, otherwise as CSV.
pub fn read_signal(path: &Path, channel: usize) -> Result<Signal> {
    let is_wav = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("wav"));
    if is_wav {
        let (rate_hz, values) = read_wav(path, channel)?;
        Ok(Signal::Uniform { rate_hz, values })
    } else {
        let (times, values) = read_csv(path)?;
        Ok(Signal::Timed { times, values })
    }
}

/// Reads two-column `t,value` rows. A first row that does not parse as
/// numbers is taken as a header.
pub fn read_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file);
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("{}: row {}", path.display(), row + 1))?;
        ensure!(
            record.len() == 2,
            "{}: row {} has {} fields, expected t,value",
            path.display(),
            row + 1,
            record.len()
        );
        let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
        match parsed {
            (Ok(t), Ok(v)) => {
                ensure!(
                    t.is_finite() && v.is_finite(),
                    "{}: row {} is not finite",
                    path.display(),
                    row + 1
                );
                times.push(t);
                values.push(v);
            }
            _ if row == 0 => {}
            _ => bail!("{}: row {} is not numeric", path.display(), row + 1),
        }
    }
    ensure!(!times.is_empty(), "{}: no samples", path.display());
    Ok((times, values))
}

/// Writes `t,value` rows with 17 significant digits, to stdout for `None`.
pub fn write_csv(path: Option<&Path>, header: [&str; 2], a: &[f64], b: &[f64]) -> Result<()> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut writer = csv::Writer::from_writer(io::BufWriter::new(sink));
    writer.write_record(header)?;
    for (x, y) in a.iter().zip(b) {
        writer.write_record([format!("{x:.16e}"), format!("{y:.16e}")])?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads one channel of an integer PCM or float WAV file, scaled to `[-1, 1)`.
pub fn read_wav(path: &Path, channel: usize) -> Result<(f64, Vec<f64>)> {
    let mut reader =
        hound::WavReader::open(path).with_context(|| format!("opening {}", path.display()))?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    ensure!(
        channel < channels,
        "{}: channel {channel} requested, file has {channels}",
        path.display()
    );
    let samples: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, bits @ (8 | 16 | 24 | 32)) => {
            let scale = 1.0 / (1u64 << (bits - 1)) as f64;
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f64 * scale))
                .collect::<Result<_, _>>()?
        }
        (hound::SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>()?,
        (format, bits) => bail!("{}: unsupported {bits}-bit {format:?} WAV", path.display()),
    };
    let values: Vec<f64> = samples
        .into_iter()
        .skip(channel)
        .step_by(channels)
        .collect();
    ensure!(!values.is_empty(), "{}: no samples", path.display());
    Ok((f64::from(spec.sample_rate), values))
}
