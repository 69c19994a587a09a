//! `a·e^{-αt}` sections.

use super::power::PowerTrack;
use super::{InputSample, OpCounts};
use crate::error::Result;
use crate::grid::SamplePoint;
use crate::scalar::Real;

/// `y[m] = a·c_y^m·g[m]`, `g[m] = g[m-1] + Σ x[n]·c_x^n` over the new inputs.
#[derive(Clone, Debug)]
pub(crate) struct FirstOrderDirect<T: Real> {
    a: T,
    input: PowerTrack<T, T>,
    output: PowerTrack<T, T>,
    g: T,
}

impl<T: Real> FirstOrderDirect<T> {
    pub(crate) fn new(a: T, alpha: T) -> Self {
        FirstOrderDirect {
            a,
            input: PowerTrack::new(alpha),
            output: PowerTrack::new(-alpha),
            g: T::zero(),
        }
    }

    pub(crate) fn check(&self, inputs: &[InputSample<T>], output: &SamplePoint<T>) -> Result<()> {
        for s in inputs {
            self.input.check(&s.point)?;
        }
        self.output.check(output)
    }

    pub(crate) fn advance(
        &mut self,
        inputs: &[InputSample<T>],
        output: &SamplePoint<T>,
        counts: &mut OpCounts,
    ) -> T {
        let mut q: Option<T> = None;
        for s in inputs {
            let cx = self.input.factor(&s.point, counts);
            let term = s.value * cx;
            counts.mul(1);
            q = Some(match q {
                None => term,
                Some(acc) => {
                    counts.add(1);
                    acc + term
                }
            });
        }
        if let Some(q) = q {
            self.g += q;
            counts.add(1);
            counts.accumulator_add();
        }
        let cy = self.output.factor(output, counts);
        counts.mul(2);
        self.a * cy * self.g
    }

    pub(crate) fn accumulator(&self) -> T {
        self.g
    }
}

/// `g ← e^{-α(t_m - t_prev)}·g + Σ x[n]·e^{-α(t_m - τ_n)}`, `y[m] = a·g`.
#[derive(Clone, Debug)]
pub(crate) struct FirstOrderRebased<T> {
    a: T,
    alpha: T,
    g: T,
    t_prev: Option<T>,
}

impl<T: Real> FirstOrderRebased<T> {
    pub(crate) fn new(a: T, alpha: T) -> Self {
        FirstOrderRebased {
            a,
            alpha,
            g: T::zero(),
            t_prev: None,
        }
    }

    pub(crate) fn advance(
        &mut self,
        inputs: &[InputSample<T>],
        output: &SamplePoint<T>,
        counts: &mut OpCounts,
    ) -> T {
        let t = output.time;
        if let Some(tp) = self.t_prev {
            let decay = (-self.alpha * (t - tp)).exp();
            counts.transcendental();
            self.g *= decay;
            counts.mul(1);
        }
        for s in inputs {
            let w = (-self.alpha * (t - s.point.time)).exp();
            counts.transcendental();
            self.g += s.value * w;
            counts.mul(1);
            counts.add(1);
            counts.accumulator_add();
        }
        self.t_prev = Some(t);
        counts.mul(1);
        self.a * self.g
    }

    pub(crate) fn accumulator(&self) -> T {
        self.g
    }
}
