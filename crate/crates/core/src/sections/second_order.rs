//! `a·e^{-αt}·sin(ωt + φ)` sections, run on the complex kernel
//! `e^{(-α+jω)t}` and reduced to the imaginary part at the output.

use num_complex::Complex;

use super::power::{Phasor, PowerTrack};
use super::{InputSample, OpCounts};
use crate::error::Result;
use crate::grid::SamplePoint;
use crate::scalar::Real;

/// `y[m] = Im(a·e^{jφ}·ĉ_y^m·ĝ[m])` with `ĉ_y = e^{(-α+jω)T_y}`,
/// `ĉ_x = e^{(α-jω)T_x}`.
#[derive(Clone, Debug)]
pub(crate) struct SecondOrderDirect<T: Real> {
    amplitude: Complex<T>,
    input: PowerTrack<T, Phasor<T>>,
    output: PowerTrack<T, Phasor<T>>,
    g: Complex<T>,
}

impl<T: Real> SecondOrderDirect<T> {
    pub(crate) fn new(a: T, alpha: T, omega: T, phi: T) -> Self {
        SecondOrderDirect {
            amplitude: Complex::from_polar(a, phi),
            input: PowerTrack::new(Complex::new(alpha, -omega)),
            output: PowerTrack::new(Complex::new(-alpha, omega)),
            g: Complex::new(T::zero(), T::zero()),
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
        let mut q: Option<Complex<T>> = None;
        for s in inputs {
            let cx = self.input.factor(&s.point, counts);
            // real sample times complex coefficient
            let term = cx.value.scale(s.value);
            counts.mul(2);
            // partial sums of q are folded into the accumulator update in
            // the published tally and are not charged separately
            q = Some(q.map_or(term, |acc| acc + term));
        }
        if let Some(q) = q {
            self.g += q;
            counts.add(2);
            counts.accumulator_add();
        }
        let cy = self.output.factor(output, counts);
        let p = cy.value * self.g;
        counts.mul(4);
        // only the imaginary part of amplitude·p is formed
        counts.mul(2);
        counts.add(1);
        self.amplitude.re * p.im + self.amplitude.im * p.re
    }

    pub(crate) fn accumulator(&self) -> Complex<T> {
        self.g
    }
}

/// Complex accumulator rebased to the latest output instant.
#[derive(Clone, Debug)]
pub(crate) struct SecondOrderRebased<T> {
    amplitude: Complex<T>,
    rate: Complex<T>,
    g: Complex<T>,
    t_prev: Option<T>,
}

impl<T: Real> SecondOrderRebased<T> {
    pub(crate) fn new(a: T, alpha: T, omega: T, phi: T) -> Self {
        SecondOrderRebased {
            amplitude: Complex::from_polar(a, phi),
            rate: Complex::new(-alpha, omega),
            g: Complex::new(T::zero(), T::zero()),
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
            let decay = (self.rate * (t - tp)).exp();
            counts.transcendental();
            self.g = decay * self.g;
            counts.mul(4);
            counts.add(2);
        }
        for s in inputs {
            let w = (self.rate * (t - s.point.time)).exp();
            counts.transcendental();
            self.g += w.scale(s.value);
            counts.mul(2);
            counts.add(2);
            counts.accumulator_add();
        }
        self.t_prev = Some(t);
        counts.mul(2);
        counts.add(1);
        self.amplitude.re * self.g.im + self.amplitude.im * self.g.re
    }

    pub(crate) fn accumulator(&self) -> Complex<T> {
        self.g
    }
}
