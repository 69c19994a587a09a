//! `a·t^N·e^{-αt}` sections.
//!
//! Both orderings expand `(t_m - τ_n)^N` binomially so that each term splits
//! into an output-instant factor and an input-instant moment.

use super::power::PowerTrack;
use super::{InputSample, OpCounts};
use crate::error::{Error, Result};
use crate::filterdesign::binomial;
use crate::grid::{Placement, SamplePoint};
use crate::scalar::Real;

/// `b^k` by `k - 1` repeated multiplications.
fn naive_power<T: Real>(b: T, k: u32, counts: &mut OpCounts) -> T {
    match k {
        0 => T::one(),
        1 => b,
        _ => {
            let mut p = b;
            for _ in 1..k {
                p *= b;
            }
            counts.mul(u64::from(k - 1));
            p
        }
    }
}

/// `[b^0, b^1, …, b^N]`, each power formed independently.
fn power_table<T: Real>(b: T, degree: u32, counts: &mut OpCounts) -> Vec<T> {
    (0..=degree).map(|k| naive_power(b, k, counts)).collect()
}

/// What the moment accumulators are measured in.
#[derive(Clone, Copy, Debug, PartialEq)]
enum MomentUnits<T> {
    /// `n^k` on a uniform input grid of the given period.
    Index { period: T },
    /// `(-τ_n)^k`.
    Time,
}

impl<T: Real> MomentUnits<T> {
    fn for_point(p: &SamplePoint<T>) -> Self {
        match (p.placement, p.period) {
            (Placement::Uniform, Some(period)) => MomentUnits::Index { period },
            _ => MomentUnits::Time,
        }
    }

    /// Factor turning moment `k` into `Σ x·c_x^n·(-τ_n)^k`.
    fn scale(&self, k: u32) -> T {
        match *self {
            MomentUnits::Index { period } => (-period).powi(k as i32),
            MomentUnits::Time => T::one(),
        }
    }
}

/// `y[m] = a·c_y^m·Σ_k β_k·m^{N-k}·g̃_k[m]` on uniform grids, with the
/// time-based moments and per-step coefficients otherwise.
#[derive(Clone, Debug)]
pub(crate) struct RepeatedDirect<T: Real> {
    a: T,
    degree: u32,
    binom: Vec<T>,
    input: PowerTrack<T, T>,
    output: PowerTrack<T, T>,
    moments: Vec<T>,
    units: Option<MomentUnits<T>>,
    /// β_k for uniform outputs, with the (output period, units) it was built for.
    beta: Option<(T, MomentUnits<T>, Vec<T>)>,
}

impl<T: Real> RepeatedDirect<T> {
    /// `degree = 0` is accepted here so the first-order reduction can be
    /// exercised; public construction goes through validated sections.
    pub(crate) fn new(a: T, alpha: T, degree: u32) -> Self {
        RepeatedDirect {
            a,
            degree,
            binom: (0..=degree).map(|k| binomial(degree, k)).collect(),
            input: PowerTrack::new(alpha),
            output: PowerTrack::new(-alpha),
            moments: vec![T::zero(); degree as usize + 1],
            units: None,
            beta: None,
        }
    }

    pub(crate) fn check(&self, inputs: &[InputSample<T>], output: &SamplePoint<T>) -> Result<()> {
        let mut units = self.units;
        for s in inputs {
            self.input.check(&s.point)?;
            match units {
                None => units = Some(MomentUnits::for_point(&s.point)),
                Some(MomentUnits::Index { .. })
                    if !matches!(s.point.placement, Placement::Uniform) =>
                {
                    return Err(Error::MixedInputGrid)
                }
                Some(_) => {}
            }
        }
        self.output.check(output)
    }

    pub(crate) fn advance(
        &mut self,
        inputs: &[InputSample<T>],
        output: &SamplePoint<T>,
        counts: &mut OpCounts,
    ) -> T {
        let n = self.degree;
        let mut q = vec![T::zero(); n as usize + 1];
        for (i, s) in inputs.iter().enumerate() {
            let cx = self.input.factor(&s.point, counts);
            let w = s.value * cx;
            counts.mul(1);
            let units = *self
                .units
                .get_or_insert_with(|| MomentUnits::for_point(&s.point));
            let b = match units {
                MomentUnits::Index { .. } => T::from_index(s.point.index),
                MomentUnits::Time => -s.point.time,
            };
            let powers = power_table(b, n, counts);
            // the per-moment products and sums ride along with the single
            // accumulation the cost model charges per new term
            for (qk, pk) in q.iter_mut().zip(&powers) {
                *qk += w * *pk;
            }
            if i >= 1 {
                counts.add(1);
            }
        }
        if !inputs.is_empty() {
            for (g, qk) in self.moments.iter_mut().zip(&q) {
                *g += *qk;
            }
            counts.accumulator_add();
        }
        // the repeated-pole cost model charges one accumulator refresh per
        // output sample, whether or not new terms arrived
        counts.add(1);

        // the output-factor recursion and the final a·c_y^m scaling are
        // outside the repeated-pole cost model; only exponentiations count
        let mut untallied = OpCounts::default();
        let cy = self.output.factor(output, &mut untallied);
        counts.exps += untallied.exps;

        let units = self.units.unwrap_or(MomentUnits::Time);
        let (coef, base) = match (output.placement, output.period) {
            (Placement::Uniform, Some(ty)) => {
                let fresh = !matches!(self.beta, Some((p, u, _)) if p == ty && u == units);
                if fresh {
                    let beta = (0..=n)
                        .map(|k| self.binom[k as usize] * ty.powi((n - k) as i32) * units.scale(k))
                        .collect();
                    self.beta = Some((ty, units, beta));
                }
                let beta = self
                    .beta
                    .as_ref()
                    .map(|(_, _, b)| b.clone())
                    .unwrap_or_default();
                (beta, T::from_index(output.index))
            }
            _ => {
                let beta = (0..=n)
                    .map(|k| self.binom[k as usize] * units.scale(k))
                    .collect();
                (beta, output.time)
            }
        };
        let powers = power_table(base, n, counts);
        let mut sum = T::zero();
        for k in 0..=n {
            let mut c = coef[k as usize];
            if n - k > 0 {
                c *= powers[(n - k) as usize];
                counts.mul(1);
            }
            let term = c * self.moments[k as usize];
            counts.mul(1);
            if k == 0 {
                sum = term;
            } else {
                sum += term;
                counts.add(1);
            }
        }
        self.a * cy * sum
    }

    pub(crate) fn accumulator(&self) -> Vec<T> {
        self.moments.clone()
    }
}

/// Moments `S_k = Σ x[n]·e^{-α(t_m - τ_n)}·(τ_n - origin)^k`, decayed to the
/// latest output instant at every step.
#[derive(Clone, Debug)]
pub(crate) struct RepeatedRebased<T> {
    a: T,
    alpha: T,
    degree: u32,
    binom: Vec<T>,
    moments: Vec<T>,
    origin: T,
    t_prev: Option<T>,
    reanchor_every: Option<usize>,
    since_anchor: usize,
}

impl<T: Real> RepeatedRebased<T> {
    pub(crate) fn new(a: T, alpha: T, degree: u32, reanchor_every: Option<usize>) -> Self {
        RepeatedRebased {
            a,
            alpha,
            degree,
            binom: (0..=degree).map(|k| binomial(degree, k)).collect(),
            moments: vec![T::zero(); degree as usize + 1],
            origin: T::zero(),
            t_prev: None,
            reanchor_every: reanchor_every.filter(|&r| r > 0),
            since_anchor: 0,
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
            for s in self.moments.iter_mut() {
                *s *= decay;
            }
            counts.mul(self.moments.len() as u64);
        }
        for s in inputs {
            let mut w = s.value * (-self.alpha * (t - s.point.time)).exp();
            counts.transcendental();
            counts.mul(1);
            let u = s.point.time - self.origin;
            for (k, m) in self.moments.iter_mut().enumerate() {
                if k > 0 {
                    w *= u;
                    counts.mul(1);
                }
                *m += w;
                counts.add(1);
            }
            counts.accumulator_add();
        }
        self.t_prev = Some(t);

        let v = t - self.origin;
        let n = self.degree;
        let mut sum = T::zero();
        let mut vp = T::one();
        // k runs downward so v^{N-k} grows incrementally
        for k in (0..=n).rev() {
            let mut term = self.binom[k as usize] * vp * self.moments[k as usize];
            if k % 2 == 1 {
                term = -term;
            }
            sum += term;
            counts.mul(2);
            counts.add(1);
            if k > 0 {
                vp *= v;
                counts.mul(1);
            }
        }
        let y = self.a * sum;
        counts.mul(1);

        self.since_anchor += 1;
        if let Some(r) = self.reanchor_every {
            if self.since_anchor >= r {
                self.reanchor(t);
            }
        }
        y
    }

    /// Moves the time origin to `new_origin` with the binomial shift
    /// `S'_k = Σ_j C(k, j)·(-Δ)^{k-j}·S_j`.
    fn reanchor(&mut self, new_origin: T) {
        let delta = new_origin - self.origin;
        let old = self.moments.clone();
        for k in 0..old.len() {
            self.moments[k] = (0..=k)
                .map(|j| binomial::<T>(k as u32, j as u32) * (-delta).powi((k - j) as i32) * old[j])
                .sum();
        }
        self.origin = new_origin;
        self.since_anchor = 0;
    }

    pub(crate) fn accumulator(&self) -> Vec<T> {
        self.moments.clone()
    }

    pub(crate) fn origin(&self) -> T {
        self.origin
    }
}
