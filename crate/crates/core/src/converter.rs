//! Parallel-form converter: offline batches and push/pull streaming.
//!
//! All sections of a [`ParallelForm`] are stepped with the same input slice
//! at every output instant and their outputs are summed. Streaming callers
//! push timestamped inputs and pull outputs; a pull certifies which inputs
//! precede the output instant only once an input beyond it has been pushed
//! or the input stream has been finished.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::filterdesign::ParallelForm;
use crate::grid::{Placement, SamplePoint, TimeGrid};
use crate::scalar::Real;
use crate::sections::{ComputeOrder, InputSample, OpCounts, SectionState};

#[derive(Clone, Debug, PartialEq)]
pub struct ConverterConfig<T> {
    pub order: ComputeOrder,
    /// Nominal output period used by [`Converter::pull_output`]. Without it
    /// pulled instants are treated as raw timestamps.
    pub output_period: Option<T>,
    /// Re-anchoring interval for rebased repeated-pole moments.
    pub reanchor_every: Option<usize>,
    /// Keep a per-output record of operation counts.
    pub record_steps: bool,
}

impl<T> Default for ConverterConfig<T> {
    fn default() -> Self {
        ConverterConfig {
            order: ComputeOrder::Rebased,
            output_period: None,
            reanchor_every: None,
            record_steps: true,
        }
    }
}

impl<T> ConverterConfig<T> {
    pub fn with_order(order: ComputeOrder) -> Self {
        ConverterConfig {
            order,
            ..Default::default()
        }
    }
}

/// Counts for one output sample, summed over sections.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub index: usize,
    pub time: f64,
    /// Inputs consumed by this output sample (`M_m`).
    pub new_terms: usize,
    /// Those of them off their nominal lattice point (`E_m`).
    pub off_grid_terms: usize,
    pub output_off_grid: bool,
    pub counts: OpCounts,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TermStats {
    pub min: usize,
    pub max: usize,
    pub mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConversionReport {
    pub order: ComputeOrder,
    pub sections: usize,
    pub outputs: usize,
    pub inputs_consumed: usize,
    pub totals: OpCounts,
    pub new_terms: TermStats,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<StepRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_relative_error: Option<f64>,
}

impl ConversionReport {
    /// Mean operation counts per output sample: (mults, adds, exps, transcendentals).
    pub fn per_output(&self) -> (f64, f64, f64, f64) {
        let n = self.outputs.max(1) as f64;
        (
            self.totals.mults as f64 / n,
            self.totals.adds as f64 / n,
            self.totals.exps as f64 / n,
            self.totals.transcendentals as f64 / n,
        )
    }
}

/// Streaming converter state.
#[derive(Clone, Debug)]
pub struct Converter<T: Real> {
    sections: Vec<SectionState<T>>,
    config: ConverterConfig<T>,
    pending: VecDeque<InputSample<T>>,
    pushed: usize,
    last_input_time: Option<T>,
    finished: bool,
    next_output: usize,
    last_output_time: Option<T>,
    consumed: usize,
    totals: OpCounts,
    steps: Vec<StepRecord>,
    term_min: usize,
    term_max: usize,
    term_sum: u64,
}

impl<T: Real> Converter<T> {
    pub fn new(form: &ParallelForm<T>, config: ConverterConfig<T>) -> Result<Self> {
        if let Some(p) = config.output_period {
            if !(p > T::zero()) || !p.is_finite() {
                return Err(Error::NonPositivePeriod(p.as_f64()));
            }
        }
        let sections = form
            .sections()
            .iter()
            .map(|&s| SectionState::new(s, config.order, config.reanchor_every))
            .collect::<Result<Vec<_>>>()?;
        Ok(Converter {
            sections,
            config,
            pending: VecDeque::new(),
            pushed: 0,
            last_input_time: None,
            finished: false,
            next_output: 0,
            last_output_time: None,
            consumed: 0,
            totals: OpCounts::default(),
            steps: Vec::new(),
            term_min: usize::MAX,
            term_max: 0,
            term_sum: 0,
        })
    }

    pub fn sections(&self) -> &[SectionState<T>] {
        &self.sections
    }

    pub fn config(&self) -> &ConverterConfig<T> {
        &self.config
    }

    /// Inputs pushed but not yet consumed.
    pub fn pending(&self) -> usize {
        self.pending.len()
    }

    /// Inputs consumed so far; also the index of the next input to consume.
    pub fn consumed(&self) -> usize {
        self.consumed
    }

    pub fn outputs(&self) -> usize {
        self.next_output
    }

    /// Buffers a sample carrying only its timestamp.
    pub fn push_input(&mut self, value: T, time: T) -> Result<()> {
        self.push_sample(value, SamplePoint::free(self.pushed, time))
    }

    /// Buffers a sample with full placement metadata. `point.index` must be
    /// the number of samples pushed so far.
    pub fn push_sample(&mut self, value: T, point: SamplePoint<T>) -> Result<()> {
        if self.finished {
            return Err(Error::StreamFinished);
        }
        if point.index != self.pushed {
            return Err(Error::OutOfOrderInput {
                expected: self.pushed,
                got: point.index,
            });
        }
        if !point.time.is_finite() {
            return Err(Error::NonIncreasingInput {
                prev: self.last_input_time.map_or(f64::NAN, T::as_f64),
                next: point.time.as_f64(),
            });
        }
        if let Some(prev) = self.last_input_time {
            if !(point.time > prev) {
                return Err(Error::NonIncreasingInput {
                    prev: prev.as_f64(),
                    next: point.time.as_f64(),
                });
            }
        }
        self.pending.push_back(InputSample { value, point });
        self.pushed += 1;
        self.last_input_time = Some(point.time);
        Ok(())
    }

    /// Declares that no further inputs will arrive.
    pub fn finish_input(&mut self) {
        self.finished = true;
    }

    /// Output at `time`. With a configured output period this is output
    /// `m = outputs()` of a grid `t_m = m·T_y·ε`; `epsilon = 1` marks an
    /// on-grid instant.
    pub fn pull_output(&mut self, time: T, epsilon: T) -> Result<T> {
        let point = SamplePoint {
            index: self.next_output,
            time,
            period: self.config.output_period,
            placement: match self.config.output_period {
                None => Placement::Free,
                Some(_) if epsilon == T::one() => Placement::Uniform,
                Some(_) => Placement::Scaled(epsilon),
            },
        };
        self.pull_point(point)
    }

    /// Output at a fully described output instant.
    pub fn pull_point(&mut self, point: SamplePoint<T>) -> Result<T> {
        if point.index != self.next_output {
            return Err(Error::OutOfOrderOutput {
                expected: self.next_output,
                got: point.index,
            });
        }
        if let Some(prev) = self.last_output_time {
            if !(point.time > prev) {
                return Err(Error::NonIncreasingOutput {
                    prev: prev.as_f64(),
                    next: point.time.as_f64(),
                });
            }
        }
        let certified = self.finished || self.last_input_time.is_some_and(|t| t > point.time);
        if !certified {
            return Err(Error::InputUnderrun(point.time.as_f64()));
        }

        let ready = self
            .pending
            .iter()
            .take_while(|s| s.point.time <= point.time)
            .count();
        let batch: Vec<InputSample<T>> = self.pending.iter().take(ready).copied().collect();
        for s in &self.sections {
            s.check_step(&batch, &point)?;
        }

        let mut y = T::zero();
        let mut step_counts = OpCounts::default();
        for s in &mut self.sections {
            y += s.step(&batch, &point)?;
            step_counts += s.last_counts();
        }
        self.pending.drain(..ready);
        self.consumed += ready;
        self.next_output += 1;
        self.last_output_time = Some(point.time);

        self.totals += step_counts;
        self.term_min = self.term_min.min(ready);
        self.term_max = self.term_max.max(ready);
        self.term_sum += ready as u64;
        if self.config.record_steps {
            self.steps.push(StepRecord {
                index: point.index,
                time: point.time.as_f64(),
                new_terms: ready,
                off_grid_terms: batch.iter().filter(|s| s.point.is_off_grid()).count(),
                output_off_grid: point.is_off_grid(),
                counts: step_counts,
            });
        }
        Ok(y)
    }

    /// Aggregated operation counts.
    pub fn report(&self) -> Result<ConversionReport> {
        if self.next_output == 0 {
            return Err(Error::NoOutput);
        }
        Ok(ConversionReport {
            order: self.config.order,
            sections: self.sections.len(),
            outputs: self.next_output,
            inputs_consumed: self.consumed,
            totals: self.totals,
            new_terms: TermStats {
                min: self.term_min,
                max: self.term_max,
                mean: self.term_sum as f64 / self.next_output as f64,
            },
            steps: self.steps.clone(),
            max_relative_error: None,
        })
    }
}

/// Converts `x`, sampled on `grid_in`, to every instant of `grid_out`.
///
/// Outputs before the first input instant are zero.
pub fn convert_offline<T: Real>(
    x: &[T],
    grid_in: &TimeGrid<T>,
    grid_out: &TimeGrid<T>,
    form: &ParallelForm<T>,
    config: ConverterConfig<T>,
) -> Result<(Vec<T>, ConversionReport)> {
    if x.len() != grid_in.len() {
        return Err(Error::LengthMismatch {
            values: x.len(),
            instants: grid_in.len(),
        });
    }
    let mut conv = Converter::new(form, config)?;
    for (&v, p) in x.iter().zip(grid_in.points()) {
        conv.push_sample(v, p)?;
    }
    conv.finish_input();
    let y = grid_out
        .points()
        .map(|p| conv.pull_point(p))
        .collect::<Result<Vec<_>>>()?;
    let report = match conv.report() {
        Ok(r) => r,
        Err(Error::NoOutput) => ConversionReport {
            order: conv.config.order,
            sections: conv.sections.len(),
            outputs: 0,
            inputs_consumed: 0,
            totals: OpCounts::default(),
            new_terms: TermStats {
                min: 0,
                max: 0,
                mean: 0.0,
            },
            steps: Vec::new(),
            max_relative_error: None,
        },
        Err(e) => return Err(e),
    };
    Ok((y, report))
}
