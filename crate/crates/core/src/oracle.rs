//! Direct-summation reference: `y[m] = Σ_{τ_n ≤ t_m} x[n]·h(t_m - τ_n)`.
//!
//! Shares nothing with the recursive sections beyond the impulse response
//! of the parallel form. Sums are compensated and output instants are
//! evaluated in parallel.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::filterdesign::ParallelForm;
use crate::grid::TimeGrid;
use crate::scalar::Real;

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        CompensatedSum {
            sum: T::zero(),
            carry: T::zero(),
        }
    }

    pub fn add(&mut self, v: T) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.carry
    }
}

impl<T: Real> FromIterator<T> for CompensatedSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for v in iter {
            s.add(v);
        }
        s
    }
}

/// Reference output at every instant of `grid_out`.
pub fn oracle_convert<T: Real>(
    x: &[T],
    grid_in: &TimeGrid<T>,
    grid_out: &TimeGrid<T>,
    form: &ParallelForm<T>,
) -> Result<Vec<T>> {
    if x.len() != grid_in.len() {
        return Err(Error::LengthMismatch {
            values: x.len(),
            instants: grid_in.len(),
        });
    }
    let taus = grid_in.timestamps();
    Ok(grid_out
        .timestamps()
        .par_iter()
        .map(|&t| {
            taus.iter()
                .zip(x)
                .take_while(|(&tau, _)| tau <= t)
                .map(|(&tau, &v)| v * form.eval_impulse(t - tau))
                .collect::<CompensatedSum<T>>()
                .value()
        })
        .collect())
}

/// `M_m`, the number of inputs in `(t_{m-1}, t_m]` (`(-∞, t_0]` for `m = 0`),
/// by scanning every input.
pub fn oracle_counts<T: Real>(grid_in: &TimeGrid<T>, grid_out: &TimeGrid<T>) -> Vec<usize> {
    let taus = grid_in.timestamps();
    let ts = grid_out.timestamps();
    (0..ts.len())
        .into_par_iter()
        .map(|m| {
            taus.iter()
                .filter(|&&tau| tau <= ts[m] && (m == 0 || tau > ts[m - 1]))
                .count()
        })
        .collect()
}
