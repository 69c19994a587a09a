//! Recursively updated exponential factors `e^{rate·t}`.

use std::fmt::Debug;

use num_complex::Complex;

use super::OpCounts;
use crate::error::{Error, Result};
use crate::grid::{Placement, SamplePoint};
use crate::scalar::Real;

/// Value of an exponential factor that can be advanced by multiplication and
/// raised to a real power.
pub trait Exponential<T: Real>: Copy + Debug {
    type Rate: Copy + Debug;
    /// Real multiplications in one product of two factors.
    const MUL_MULTS: u64;
    /// Real additions in one product of two factors.
    const MUL_ADDS: u64;

    /// `e^{rate·t}`.
    fn exp_of(rate: Self::Rate, t: T) -> Self;
    fn mul(self, rhs: Self) -> Self;
    /// `self^eps`, continuing the exponent the factor was built from.
    fn powf(self, eps: T) -> Self;
}

impl<T: Real> Exponential<T> for T {
    type Rate = T;
    const MUL_MULTS: u64 = 1;
    const MUL_ADDS: u64 = 0;

    fn exp_of(rate: T, t: T) -> T {
        (rate * t).exp()
    }

    fn mul(self, rhs: T) -> T {
        self * rhs
    }

    fn powf(self, eps: T) -> T {
        num_traits::Float::powf(self, eps)
    }
}

/// Complex exponential that remembers its unwrapped phase.
///
/// `(e^{(−α+jω)mT})^ε` must equal `e^{(−α+jω)mTε}`; a principal-branch
/// complex power would lose every full turn of `ωmT`, so the accumulated
/// angle travels with the value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Phasor<T> {
    pub value: Complex<T>,
    pub angle: T,
}

impl<T: Real> Exponential<T> for Phasor<T> {
    type Rate = Complex<T>;
    const MUL_MULTS: u64 = 4;
    const MUL_ADDS: u64 = 2;

    fn exp_of(rate: Complex<T>, t: T) -> Self {
        Phasor {
            value: (rate * t).exp(),
            angle: rate.im * t,
        }
    }

    fn mul(self, rhs: Self) -> Self {
        Phasor {
            value: self.value * rhs.value,
            angle: self.angle + rhs.angle,
        }
    }

    fn powf(self, eps: T) -> Self {
        // the tracked angle picks the branch; the value's own argument
        // fixes the phase, so rounding in the angle sum does not leak in
        let tau = T::TAU();
        let principal = self.value.arg();
        let turns = ((self.angle - principal) / tau).round();
        let angle = principal + turns * tau;
        Phasor {
            value: Complex::from_polar(self.value.norm().powf(eps), angle * eps),
            angle: angle * eps,
        }
    }
}

/// One step of the power recursion: from `prev = base^{i-1}` returns the
/// unadjusted `base^i` and the adjusted `(base^i)^eps`.
///
/// Costs one product, plus one exponentiation when `eps ≠ 1`.
pub fn update_power<T: Real, P: Exponential<T>>(
    prev: P,
    base: P,
    eps: T,
    counts: &mut OpCounts,
) -> (P, P) {
    let advanced = base.mul(prev);
    counts.mul(P::MUL_MULTS);
    counts.add(P::MUL_ADDS);
    if eps == T::one() {
        (advanced, advanced)
    } else {
        counts.exp();
        (advanced, advanced.powf(eps))
    }
}

/// Exponential factor `e^{rate·time}` for a sequence of sampling instants,
/// updated recursively along the nominal lattice.
#[derive(Clone, Debug)]
pub(crate) struct PowerTrack<T: Real, P: Exponential<T>> {
    rate: P::Rate,
    period: Option<T>,
    base: Option<P>,
    /// `base^{index}`; before the first point this holds `base^{-1}`.
    power: Option<P>,
    index: Option<usize>,
    shifts: Vec<Option<(T, P)>>,
}

impl<T: Real, P: Exponential<T>> PowerTrack<T, P> {
    pub(crate) fn new(rate: P::Rate) -> Self {
        PowerTrack {
            rate,
            period: None,
            base: None,
            power: None,
            index: None,
            shifts: Vec::new(),
        }
    }

    pub(crate) fn check(&self, point: &SamplePoint<T>) -> Result<()> {
        if matches!(point.placement, Placement::Free) {
            return Ok(());
        }
        let period = point.period.ok_or(Error::MissingPeriod)?;
        match self.period {
            Some(p) if p != period => Err(Error::PeriodMismatch {
                expected: p.as_f64(),
                got: period.as_f64(),
            }),
            _ => Ok(()),
        }
    }

    /// Factor for `point`; the point must have passed [`check`](Self::check).
    pub(crate) fn factor(&mut self, point: &SamplePoint<T>, counts: &mut OpCounts) -> P {
        let period = match (point.placement, point.period) {
            (Placement::Free, _) | (_, None) => {
                counts.exp();
                return P::exp_of(self.rate, point.time);
            }
            (_, Some(p)) => p,
        };
        let base = *self
            .base
            .get_or_insert_with(|| P::exp_of(self.rate, period));
        self.period = Some(period);

        let expected = self.index.map_or(0, |i| i + 1);
        let prev = match self.power {
            Some(p) if point.index == expected => p,
            Some(_) => {
                // lattice position jumped; restart the recursion there
                counts.exp();
                P::exp_of(self.rate, T::from_index(point.index) * period - period)
            }
            None => {
                let start = P::exp_of(self.rate, -period);
                if point.index == 0 {
                    start
                } else {
                    counts.exp();
                    P::exp_of(self.rate, T::from_index(point.index) * period - period)
                }
            }
        };

        let eps = match point.placement {
            Placement::Scaled(eps) => eps,
            _ => T::one(),
        };
        let (advanced, adjusted) = update_power(prev, base, eps, counts);
        self.power = Some(advanced);
        self.index = Some(point.index);

        match point.placement {
            Placement::Shifted { offset, phase } if offset != T::zero() => {
                let corr = self.shift_factor(offset, period, phase, counts);
                counts.mul(P::MUL_MULTS);
                counts.add(P::MUL_ADDS);
                adjusted.mul(corr)
            }
            _ => adjusted,
        }
    }

    fn shift_factor(
        &mut self,
        offset: T,
        period: T,
        phase: Option<usize>,
        counts: &mut OpCounts,
    ) -> P {
        let Some(slot) = phase else {
            counts.exp();
            return P::exp_of(self.rate, offset * period);
        };
        if self.shifts.len() <= slot {
            self.shifts.resize(slot + 1, None);
        }
        match self.shifts[slot] {
            Some((d, f)) if d == offset => f,
            _ => {
                counts.exp();
                let f = P::exp_of(self.rate, offset * period);
                self.shifts[slot] = Some((offset, f));
                f
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_update_is_one_multiplication() {
        let c = 0.5f64;
        let mut counts = OpCounts::default();
        let (adv, adj) = update_power(c.powi(4), c, 1.0, &mut counts);
        assert_eq!(adv, c.powi(5));
        assert_eq!(adj, adv);
        assert_eq!((counts.mults, counts.exps), (1, 0));
    }

    #[test]
    fn scaled_update_matches_direct_exponential() {
        let (alpha, t, eps) = (0.7f64, 0.01, 1.013);
        let mut counts = OpCounts::default();
        let mut prev = 1.0;
        let base = (-alpha * t).exp();
        for m in 1..=200 {
            let (adv, adj) = update_power(prev, base, eps, &mut counts);
            let direct = (-alpha * t * m as f64 * eps).exp();
            assert!((adj - direct).abs() <= 1e-13 * direct);
            prev = adv;
        }
        assert_eq!(counts.exps, 200);
        assert_eq!(counts.mults, 200);
    }

    #[test]
    fn complex_scaled_update_keeps_winding() {
        // ωT = 2.9 rad per step: the phase wraps many times
        let rate = Complex::new(-1e-4, 2.9);
        let eps = 0.9973;
        let base = Phasor::exp_of(rate, 1.0);
        let mut prev = Phasor::exp_of(rate, 0.0);
        let mut counts = OpCounts::default();
        for m in 1..=10_000usize {
            let (adv, adj) = update_power(prev, base, eps, &mut counts);
            let direct = (rate * (m as f64 * eps)).exp();
            let err = (adj.value - direct).norm() / direct.norm();
            // both sides carry phase rounding proportional to |ω·m|
            let bound = 8.0 * f64::EPSILON * (1.0 + 2.9 * m as f64);
            assert!(err < bound, "m={m}: rel err {err} > {bound}");
            prev = adv;
        }
        assert_eq!(counts.mults, 40_000);
        assert_eq!(counts.adds, 20_000);
        assert_eq!(counts.exps, 10_000);
    }

    #[test]
    fn complex_scaled_update_at_audio_rates() {
        // complex pole of the 3rd-order 20 kHz Butterworth, scaled by 1e-3 so
        // e^{-αmT} stays representable for m ≤ 10⁴ at 48 kHz
        let wc = 2.0 * std::f64::consts::PI * 20_000.0;
        let rate = Complex::new(-wc / 2.0, wc * 3f64.sqrt() / 2.0) * 1e-3;
        let t = 1.0 / 48_000.0;
        for &eps in &[1.0001, 0.9999, 1.0137] {
            let base = Phasor::exp_of(rate, t);
            let mut prev = Phasor::exp_of(rate, 0.0);
            let mut counts = OpCounts::default();
            let mut worst = 0.0f64;
            for m in 1..=10_000usize {
                let (adv, adj) = update_power(prev, base, eps, &mut counts);
                let direct = (rate * (t * m as f64 * eps)).exp();
                worst = worst.max((adj.value - direct).norm() / direct.norm());
                prev = adv;
            }
            assert!(worst < 1e-12, "eps={eps}: worst rel err {worst}");
        }
    }

    #[test]
    fn power_product_identity() {
        // c_y^m · c_x^n = e^{-α(mT_y - nT_x)}
        let (alpha, ty, tx) = (0.013f64, 1.1, 0.9);
        let cy = (-alpha * ty).exp();
        let cx = (alpha * tx).exp();
        let mut cym = 1.0f64;
        for m in 0..=1000 {
            if m > 0 {
                cym *= cy;
            }
            let mut cxn = 1.0f64;
            for n in 0..=1000 {
                if n > 0 {
                    cxn *= cx;
                }
                if (m + n) % 37 != 0 {
                    continue;
                }
                let direct = (-alpha * (m as f64 * ty - n as f64 * tx)).exp();
                assert!((cym * cxn - direct).abs() <= 1e-12 * direct, "m={m} n={n}");
            }
        }
    }

    #[test]
    fn track_periodic_shift_caches_corrections() {
        let mut track: PowerTrack<f64, f64> = PowerTrack::new(2.0);
        let mut counts = OpCounts::default();
        let period = 0.1;
        for n in 0..10 {
            let offset = if n % 2 == 0 { 0.25 } else { 0.2 };
            let p = SamplePoint {
                index: n,
                time: n as f64 * period + offset * period,
                period: Some(period),
                placement: Placement::Shifted {
                    offset,
                    phase: Some(n % 2),
                },
            };
            track.check(&p).unwrap();
            let f = track.factor(&p, &mut counts);
            assert!((f - (2.0 * p.time).exp()).abs() < 1e-13 * f);
        }
        assert_eq!(counts.exps, 2);
        assert_eq!(counts.mults, 20);
    }

    #[test]
    fn track_rejects_period_changes() {
        let mut track: PowerTrack<f64, f64> = PowerTrack::new(1.0);
        let mut counts = OpCounts::default();
        let p = SamplePoint {
            index: 0,
            time: 0.0,
            period: Some(1.0),
            placement: Placement::Uniform,
        };
        track.factor(&p, &mut counts);
        let q = SamplePoint {
            index: 1,
            time: 2.0,
            period: Some(2.0),
            placement: Placement::Uniform,
        };
        assert!(matches!(track.check(&q), Err(Error::PeriodMismatch { .. })));
        let r = SamplePoint { period: None, ..q };
        assert_eq!(track.check(&r), Err(Error::MissingPeriod));
        assert!(track.check(&SamplePoint::free(1, 3.0)).is_ok());
    }
}
