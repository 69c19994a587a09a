//! Per-section recursive conversion engines.
//!
//! A [`SectionState`] turns the input samples that arrived since the previous
//! output instant into one output sample of its section. Two orderings are
//! available:
//!
//! * [`ComputeOrder::Direct`] keeps explicit powers `c_y^m` and `c_x^n`
//!   anchored at index 0. The factors overflow and underflow once `α·t`
//!   reaches a few hundred, so this ordering suits short horizons and
//!   operation counting.
//! * [`ComputeOrder::Rebased`] decays the accumulator to the current output
//!   instant every step. Every stored factor stays bounded, which makes it
//!   the ordering for unbounded streams.
//!
//! Operation counts follow the per-section cost model of the separable
//! recursion (see [`OpCounts`]).

mod first_order;
pub mod power;
mod repeated_pole;
mod second_order;

use std::ops::{Add, AddAssign};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filterdesign::Section;
use crate::grid::SamplePoint;
use crate::scalar::Real;

use first_order::{FirstOrderDirect, FirstOrderRebased};
use repeated_pole::{RepeatedDirect, RepeatedRebased};
use second_order::{SecondOrderDirect, SecondOrderRebased};

pub use power::{update_power, Exponential, Phasor};

/// Arrangement of the recursion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComputeOrder {
    Direct,
    #[default]
    Rebased,
}

/// Arithmetic tally of one or more steps.
///
/// `mults` and `adds` are real operations; a complex product counts four
/// multiplications and two additions. Multiplying by one and raising to the
/// power zero or one are free. `exps` counts exponentiations needed by
/// off-grid instants in the direct ordering. `transcendentals` counts the
/// `exp` evaluations of the rebased ordering. `accumulator_adds` counts actual
/// updates of the running sums.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounts {
    pub mults: u64,
    pub adds: u64,
    pub exps: u64,
    pub transcendentals: u64,
    pub accumulator_adds: u64,
}

impl OpCounts {
    pub fn mul(&mut self, n: u64) {
        self.mults += n;
    }

    pub fn add(&mut self, n: u64) {
        self.adds += n;
    }

    pub fn exp(&mut self) {
        self.exps += 1;
    }

    pub fn transcendental(&mut self) {
        self.transcendentals += 1;
    }

    pub fn accumulator_add(&mut self) {
        self.accumulator_adds += 1;
    }
}

impl AddAssign for OpCounts {
    fn add_assign(&mut self, o: OpCounts) {
        self.mults += o.mults;
        self.adds += o.adds;
        self.exps += o.exps;
        self.transcendentals += o.transcendentals;
        self.accumulator_adds += o.accumulator_adds;
    }
}

impl Add for OpCounts {
    type Output = OpCounts;
    fn add(mut self, o: OpCounts) -> OpCounts {
        self += o;
        self
    }
}

/// Input sample value at its sampling instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InputSample<T> {
    pub value: T,
    pub point: SamplePoint<T>,
}

/// Snapshot of a section's running sums.
#[derive(Clone, Debug, PartialEq)]
pub enum Accumulator<T> {
    Real(T),
    Complex(Complex<T>),
    Moments { values: Vec<T>, origin: T },
}

#[derive(Clone, Debug)]
enum Kernel<T: Real> {
    FirstDirect(FirstOrderDirect<T>),
    FirstRebased(FirstOrderRebased<T>),
    SecondDirect(SecondOrderDirect<T>),
    SecondRebased(SecondOrderRebased<T>),
    RepeatedDirect(RepeatedDirect<T>),
    RepeatedRebased(RepeatedRebased<T>),
}

/// Mutable conversion state of one section.
#[derive(Clone, Debug)]
pub struct SectionState<T: Real> {
    section: Section<T>,
    order: ComputeOrder,
    kernel: Kernel<T>,
    next_output: usize,
    t_prev: Option<T>,
    lambda_prev: Option<usize>,
    last: OpCounts,
    total: OpCounts,
}

impl<T: Real> SectionState<T> {
    /// `reanchor_every` moves the time origin of rebased repeated-pole
    /// moments every that many outputs; other sections ignore it.
    pub fn new(
        section: Section<T>,
        order: ComputeOrder,
        reanchor_every: Option<usize>,
    ) -> Result<Self> {
        section.validate()?;
        let kernel = match (section, order) {
            (Section::FirstOrder { a, alpha }, ComputeOrder::Direct) => {
                Kernel::FirstDirect(FirstOrderDirect::new(a, alpha))
            }
            (Section::FirstOrder { a, alpha }, ComputeOrder::Rebased) => {
                Kernel::FirstRebased(FirstOrderRebased::new(a, alpha))
            }
            (
                Section::SecondOrder {
                    a,
                    alpha,
                    omega,
                    phi,
                },
                ComputeOrder::Direct,
            ) => Kernel::SecondDirect(SecondOrderDirect::new(a, alpha, omega, phi)),
            (
                Section::SecondOrder {
                    a,
                    alpha,
                    omega,
                    phi,
                },
                ComputeOrder::Rebased,
            ) => Kernel::SecondRebased(SecondOrderRebased::new(a, alpha, omega, phi)),
            (Section::RepeatedRealPole { a, alpha, degree }, ComputeOrder::Direct) => {
                Kernel::RepeatedDirect(RepeatedDirect::new(a, alpha, degree))
            }
            (Section::RepeatedRealPole { a, alpha, degree }, ComputeOrder::Rebased) => {
                Kernel::RepeatedRebased(RepeatedRebased::new(a, alpha, degree, reanchor_every))
            }
        };
        Ok(SectionState {
            section,
            order,
            kernel,
            next_output: 0,
            t_prev: None,
            lambda_prev: None,
            last: OpCounts::default(),
            total: OpCounts::default(),
        })
    }

    pub fn section(&self) -> &Section<T> {
        &self.section
    }

    pub fn order(&self) -> ComputeOrder {
        self.order
    }

    /// Index of the next output sample.
    pub fn next_output(&self) -> usize {
        self.next_output
    }

    /// Instant of the last output sample.
    pub fn t_prev(&self) -> Option<T> {
        self.t_prev
    }

    /// Index of the last consumed input sample.
    pub fn lambda_prev(&self) -> Option<usize> {
        self.lambda_prev
    }

    pub fn last_counts(&self) -> OpCounts {
        self.last
    }

    pub fn total_counts(&self) -> OpCounts {
        self.total
    }

    pub fn accumulator(&self) -> Accumulator<T> {
        match &self.kernel {
            Kernel::FirstDirect(k) => Accumulator::Real(k.accumulator()),
            Kernel::FirstRebased(k) => Accumulator::Real(k.accumulator()),
            Kernel::SecondDirect(k) => Accumulator::Complex(k.accumulator()),
            Kernel::SecondRebased(k) => Accumulator::Complex(k.accumulator()),
            Kernel::RepeatedDirect(k) => Accumulator::Moments {
                values: k.accumulator(),
                origin: T::zero(),
            },
            Kernel::RepeatedRebased(k) => Accumulator::Moments {
                values: k.accumulator(),
                origin: k.origin(),
            },
        }
    }

    /// Validates a step without changing any state.
    ///
    /// `inputs` must be the samples with `t_prev < τ_n ≤ t_m`, continuing
    /// the input index sequence.
    pub fn check_step(&self, inputs: &[InputSample<T>], output: &SamplePoint<T>) -> Result<()> {
        if output.index != self.next_output {
            return Err(Error::OutOfOrderOutput {
                expected: self.next_output,
                got: output.index,
            });
        }
        if let Some(tp) = self.t_prev {
            if !(output.time > tp) {
                return Err(Error::NonIncreasingOutput {
                    prev: tp.as_f64(),
                    next: output.time.as_f64(),
                });
            }
        }
        let first = self.lambda_prev.map_or(0, |l| l + 1);
        let after = self.t_prev.unwrap_or(T::neg_infinity());
        for (expected, s) in (first..).zip(inputs) {
            if s.point.index != expected {
                return Err(Error::OutOfOrderInput {
                    expected,
                    got: s.point.index,
                });
            }
            if !(s.point.time > after && s.point.time <= output.time) {
                return Err(Error::InputOutsideStep {
                    time: s.point.time.as_f64(),
                    after: after.as_f64(),
                    until: output.time.as_f64(),
                });
            }
        }
        if inputs
            .windows(2)
            .any(|w| !(w[1].point.time > w[0].point.time))
        {
            return Err(Error::NonIncreasingInput {
                prev: f64::NAN,
                next: f64::NAN,
            });
        }
        match &self.kernel {
            Kernel::FirstDirect(k) => k.check(inputs, output),
            Kernel::SecondDirect(k) => k.check(inputs, output),
            Kernel::RepeatedDirect(k) => k.check(inputs, output),
            _ => Ok(()),
        }
    }

    /// Consumes `inputs` and produces the section's output at `output`.
    pub fn step(&mut self, inputs: &[InputSample<T>], output: &SamplePoint<T>) -> Result<T> {
        self.check_step(inputs, output)?;
        let mut counts = OpCounts::default();
        let y = match &mut self.kernel {
            Kernel::FirstDirect(k) => k.advance(inputs, output, &mut counts),
            Kernel::FirstRebased(k) => k.advance(inputs, output, &mut counts),
            Kernel::SecondDirect(k) => k.advance(inputs, output, &mut counts),
            Kernel::SecondRebased(k) => k.advance(inputs, output, &mut counts),
            Kernel::RepeatedDirect(k) => k.advance(inputs, output, &mut counts),
            Kernel::RepeatedRebased(k) => k.advance(inputs, output, &mut counts),
        };
        if let Some(last) = inputs.last() {
            self.lambda_prev = Some(last.point.index);
        }
        self.t_prev = Some(output.time);
        self.next_output += 1;
        self.last = counts;
        self.total += counts;
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Placement, TimeGrid};

    fn run(
        state: &mut SectionState<f64>,
        x: &[f64],
        grid_in: &TimeGrid<f64>,
        grid_out: &TimeGrid<f64>,
    ) -> Vec<f64> {
        let mut next = 0;
        grid_out
            .points()
            .map(|out| {
                let mut batch = Vec::new();
                while next < grid_in.len() && grid_in.timestamps()[next] <= out.time {
                    batch.push(InputSample {
                        value: x[next],
                        point: grid_in.point(next),
                    });
                    next += 1;
                }
                state.step(&batch, &out).unwrap()
            })
            .collect()
    }

    fn impulse(n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        x[0] = 1.0;
        x
    }

    #[test]
    fn first_order_impulse_sampling() {
        let (alpha, t) = (0.3, 0.5);
        let g = TimeGrid::uniform(t, 40).unwrap();
        for order in [ComputeOrder::Direct, ComputeOrder::Rebased] {
            let mut s =
                SectionState::new(Section::FirstOrder { a: 1.0, alpha }, order, None).unwrap();
            let y = run(&mut s, &impulse(40), &g, &g);
            for (m, v) in y.iter().enumerate() {
                let e = (-alpha * m as f64 * t).exp();
                assert!((v - e).abs() < 1e-14, "{order:?} m={m}");
            }
        }
    }

    #[test]
    fn second_order_impulse_sampling() {
        let (alpha, omega, t) = (0.2, 1.7, 0.3);
        let g = TimeGrid::uniform(t, 60).unwrap();
        for order in [ComputeOrder::Direct, ComputeOrder::Rebased] {
            let sec = Section::SecondOrder {
                a: 1.0,
                alpha,
                omega,
                phi: 0.0,
            };
            let mut s = SectionState::new(sec, order, None).unwrap();
            let y = run(&mut s, &impulse(60), &g, &g);
            for (m, v) in y.iter().enumerate() {
                let tm = m as f64 * t;
                let e = (-alpha * tm).exp() * (omega * tm).sin();
                assert!((v - e).abs() < 1e-13, "{order:?} m={m}: {v} vs {e}");
            }
        }
    }

    #[test]
    fn repeated_pole_impulse_sampling() {
        let (alpha, ty) = (0.4, 0.25);
        let gi = TimeGrid::uniform(0.5, 30).unwrap();
        let go = TimeGrid::uniform(ty, 50).unwrap();
        for order in [ComputeOrder::Direct, ComputeOrder::Rebased] {
            let sec = Section::RepeatedRealPole {
                a: 1.0,
                alpha,
                degree: 1,
            };
            let mut s = SectionState::new(sec, order, None).unwrap();
            let y = run(&mut s, &impulse(30), &gi, &go);
            for (m, v) in y.iter().enumerate() {
                let tm = m as f64 * ty;
                let e = tm * (-alpha * tm).exp();
                assert!((v - e).abs() < 1e-14, "{order:?} m={m}: {v} vs {e}");
            }
        }
    }

    #[test]
    fn degree_zero_reduces_to_first_order() {
        let (a, alpha) = (1.3, 0.21);
        let gi =
            TimeGrid::from_offsets(0.7, (0..40).map(|n| 0.1 * (n % 3) as f64).collect()).unwrap();
        let go = TimeGrid::uniform(0.9, 30).unwrap();
        let x: Vec<f64> = (0..40).map(|n| ((n * 7) % 5) as f64 - 2.0).collect();
        let mut first = FirstOrderDirect::new(a, alpha);
        let mut rep = RepeatedDirect::new(a, alpha, 0);
        let mut next = 0;
        for out in go.points() {
            let mut batch = Vec::new();
            while next < gi.len() && gi.timestamps()[next] <= out.time {
                batch.push(InputSample {
                    value: x[next],
                    point: gi.point(next),
                });
                next += 1;
            }
            let (mut c1, mut c2) = (OpCounts::default(), OpCounts::default());
            let y1 = first.advance(&batch, &out, &mut c1);
            let y2 = rep.advance(&batch, &out, &mut c2);
            assert_eq!(y1.to_bits(), y2.to_bits());
        }
    }

    #[test]
    fn step_validation() {
        let mut s = SectionState::new(
            Section::FirstOrder { a: 1.0, alpha: 1.0 },
            ComputeOrder::Direct,
            None,
        )
        .unwrap();
        let out0 = SamplePoint {
            index: 0,
            time: 1.0,
            period: Some(1.0),
            placement: Placement::Uniform,
        };
        let bad_index = InputSample {
            value: 1.0,
            point: SamplePoint::free(3, 0.5),
        };
        assert!(matches!(
            s.step(&[bad_index], &out0),
            Err(Error::OutOfOrderInput {
                expected: 0,
                got: 3
            })
        ));
        let late = InputSample {
            value: 1.0,
            point: SamplePoint::free(0, 1.5),
        };
        assert!(matches!(
            s.step(&[late], &out0),
            Err(Error::InputOutsideStep { .. })
        ));
        s.step(&[], &out0).unwrap();
        let again = SamplePoint { index: 1, ..out0 };
        assert!(matches!(
            s.step(&[], &again),
            Err(Error::NonIncreasingOutput { .. })
        ));
        let skip = SamplePoint {
            index: 5,
            time: 2.0,
            ..out0
        };
        assert!(matches!(
            s.step(&[], &skip),
            Err(Error::OutOfOrderOutput {
                expected: 1,
                got: 5
            })
        ));
        assert_eq!(s.next_output(), 1);
    }

    #[test]
    fn uniform_repeated_moments_reject_off_grid_inputs() {
        let sec = Section::RepeatedRealPole {
            a: 1.0,
            alpha: 1.0,
            degree: 2,
        };
        let mut s = SectionState::new(sec, ComputeOrder::Direct, None).unwrap();
        let out = |m: usize| SamplePoint {
            index: m,
            time: m as f64,
            period: Some(1.0),
            placement: Placement::Uniform,
        };
        let on = InputSample {
            value: 1.0,
            point: out(0),
        };
        s.step(&[on], &out(0)).unwrap();
        let off = InputSample {
            value: 1.0,
            point: SamplePoint::free(1, 0.5),
        };
        assert_eq!(s.step(&[off], &out(1)), Err(Error::MixedInputGrid));
    }
}
