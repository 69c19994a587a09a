//! Scenario builders shared by the integration suites.
#![allow(dead_code)]

use num_complex::Complex;
use nusrc::{butterworth_lowpass, partial_fractions, ParallelForm, RationalTF, Section, TimeGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TX_48K: f64 = 1.0 / 48_000.0;
pub const TY_44K1: f64 = 1.0 / 44_100.0;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Offsets `1/4` on even and `1/5` on odd indices, in periods.
pub fn alternating_offsets(count: usize) -> Vec<f64> {
    (0..count)
        .map(|n| if n % 2 == 0 { 0.25 } else { 0.2 })
        .collect()
}

/// 48 kHz input with alternating offsets and 44.1 kHz uniform output,
/// with inputs reaching past the last output instant.
pub fn alternating_offset_grids(outputs: usize) -> (TimeGrid<f64>, TimeGrid<f64>) {
    let inputs = (outputs as f64 * 48.0 / 44.1).ceil() as usize + 2;
    (
        TimeGrid::from_offsets(TX_48K, alternating_offsets(inputs)).unwrap(),
        TimeGrid::uniform(TY_44K1, outputs).unwrap(),
    )
}

pub fn butterworth_form(order: usize, cutoff_hz: f64) -> ParallelForm<f64> {
    partial_fractions(&butterworth_lowpass(order, cutoff_hz).unwrap()).unwrap()
}

/// Third-order 20 kHz Butterworth in parallel form.
pub fn reference_form() -> ParallelForm<f64> {
    butterworth_form(3, 20_000.0)
}

/// Unit-DC-gain `1 / (s/α + 1)^{N+1}`, times `1 / (s/β + 1)` if `beta` is
/// given. Expands into repeated-pole sections up to degree `N` at `α`.
pub fn repeated_pole_form(alpha: f64, degree: u32, beta: Option<f64>) -> ParallelForm<f64> {
    let mut poles = vec![Complex::new(-alpha, 0.0); degree as usize + 1];
    let mut gain = alpha.powi(degree as i32 + 1);
    if let Some(b) = beta {
        poles.push(Complex::new(-b, 0.0));
        gain *= b;
    }
    partial_fractions(&RationalTF::new(gain, vec![], poles).unwrap()).unwrap()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridKind {
    Uniform,
    /// Constant rate error `ε = 1 + ppm·1e-6`.
    Drifted,
    /// Offsets drawn from `U(-j, j)` periods.
    Jittered,
    /// Alternating `1/4`, `1/5` offsets.
    Alternating,
}

pub const GRID_KINDS: [GridKind; 4] = [
    GridKind::Uniform,
    GridKind::Drifted,
    GridKind::Jittered,
    GridKind::Alternating,
];

/// Grid of `count` instants with nominal `period`.
pub fn make_grid(kind: GridKind, period: f64, count: usize, rng: &mut ChaCha8Rng) -> TimeGrid<f64> {
    match kind {
        GridKind::Uniform => TimeGrid::uniform(period, count).unwrap(),
        GridKind::Drifted => {
            let ppm: f64 = rng.gen_range(-500.0..500.0);
            TimeGrid::from_epsilons(period, vec![1.0 + ppm * 1e-6; count]).unwrap()
        }
        GridKind::Jittered => {
            let j: f64 = rng.gen_range(0.05..0.4);
            let offsets = (0..count).map(|_| rng.gen_range(-j..j)).collect();
            TimeGrid::from_offsets(period, offsets).unwrap()
        }
        GridKind::Alternating => {
            TimeGrid::from_offsets(period, alternating_offsets(count)).unwrap()
        }
    }
}

/// Number of instants of period `period` that fit before `span`.
pub fn count_within(span: f64, period: f64) -> usize {
    ((span / period).floor() as usize).max(1)
}

pub fn white_noise(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn rms(v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / v.len().max(1) as f64).sqrt()
}

/// `max |a - b| / rms(b)`.
pub fn max_error_rel_rms(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = rms(b);
    let worst = a
        .iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    if scale == 0.0 {
        worst
    } else {
        worst / scale
    }
}

/// Random section with decay rate in `alpha_range` and unit-scale amplitude.
pub fn random_section(rng: &mut ChaCha8Rng, alpha_range: std::ops::Range<f64>) -> Section<f64> {
    let alpha = rng.gen_range(alpha_range);
    let a = rng.gen_range(0.2..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    match rng.gen_range(0..3) {
        0 => Section::FirstOrder { a, alpha },
        1 => Section::SecondOrder {
            a,
            alpha,
            omega: rng.gen_range(0.05..3.0),
            phi: rng.gen_range(-3.0..3.0),
        },
        _ => Section::RepeatedRealPole {
            a,
            alpha,
            degree: rng.gen_range(1..=3),
        },
    }
}

pub fn random_form(
    rng: &mut ChaCha8Rng,
    sections: usize,
    alpha_range: std::ops::Range<f64>,
) -> ParallelForm<f64> {
    ParallelForm::new(
        (0..sections)
            .map(|_| random_section(rng, alpha_range.clone()))
            .collect(),
    )
    .unwrap()
}
