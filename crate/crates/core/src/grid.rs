//! Sampling-instant sequences.
//!
//! A [`TimeGrid`] stores materialized timestamps together with the recipe that
//! produced them. Conversion engines use the recipe (the [`Placement`] of each
//! point) to decide how a coefficient can be updated cheaply; the timestamps
//! alone decide which inputs precede which outputs.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Longest offset pattern recognised as periodic.
pub const MAX_OFFSET_CYCLE: usize = 64;

/// How the timestamps of a grid were generated.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridOrigin<T> {
    /// `τ_l = l·T`.
    Uniform { period: T },
    /// `τ_l = l·T·ε_l`.
    Epsilon { period: T, factors: Vec<T> },
    /// `τ_l = l·T + δ_l·T`.
    Offset { period: T, offsets: Vec<T> },
    /// Arbitrary increasing timestamps, no nominal period.
    Timestamps,
}

impl<T> GridOrigin<T> {
    fn name(&self) -> &'static str {
        match self {
            GridOrigin::Uniform { .. } => "uniform",
            GridOrigin::Epsilon { .. } => "epsilon",
            GridOrigin::Offset { .. } => "offset",
            GridOrigin::Timestamps => "timestamps",
        }
    }
}

/// Relation of one sampling instant to its nominal lattice point `l·T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Placement<T> {
    /// Point of a uniform grid.
    Uniform,
    /// `l·T·ε`.
    Scaled(T),
    /// `l·T + δ·T`; `phase` identifies the slot of a periodic offset pattern.
    Shifted { offset: T, phase: Option<usize> },
    /// Raw timestamp without lattice information.
    Free,
}

/// One sampling instant with the metadata a section engine needs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplePoint<T> {
    pub index: usize,
    pub time: T,
    /// Nominal period `T`; `None` for [`Placement::Free`].
    pub period: Option<T>,
    pub placement: Placement<T>,
}

impl<T: Real> SamplePoint<T> {
    /// Point carrying only a timestamp.
    pub fn free(index: usize, time: T) -> Self {
        SamplePoint {
            index,
            time,
            period: None,
            placement: Placement::Free,
        }
    }

    /// True when the instant is off its nominal lattice point, i.e. when a
    /// coefficient update for it needs an exponentiation.
    pub fn is_off_grid(&self) -> bool {
        match self.placement {
            Placement::Uniform => false,
            Placement::Scaled(eps) => eps != T::one(),
            Placement::Shifted { offset, .. } => offset != T::zero(),
            Placement::Free => true,
        }
    }
}

/// Strictly increasing sequence of sampling instants in seconds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeGrid<T> {
    timestamps: Vec<T>,
    origin: GridOrigin<T>,
    #[serde(skip)]
    offset_cycle: Option<usize>,
}

fn check_period<T: Real>(period: T) -> Result<()> {
    if period > T::zero() && period.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositivePeriod(period.as_f64()))
    }
}

fn check_increasing<T: Real>(timestamps: &[T]) -> Result<()> {
    if let Some(i) = timestamps.iter().position(|t| !t.is_finite()) {
        return Err(Error::NonMonotone {
            index: i,
            prev: if i > 0 {
                timestamps[i - 1].as_f64()
            } else {
                f64::NAN
            },
            next: timestamps[i].as_f64(),
        });
    }
    match timestamps.windows(2).position(|w| w[1] <= w[0]) {
        Some(i) => Err(Error::NonMonotone {
            index: i + 1,
            prev: timestamps[i].as_f64(),
            next: timestamps[i + 1].as_f64(),
        }),
        None => Ok(()),
    }
}

/// Smallest `P` such that `offsets` repeats with period `P` over at least two
/// full cycles.
fn detect_cycle<T: PartialEq>(offsets: &[T]) -> Option<usize> {
    (1..=MAX_OFFSET_CYCLE)
        .filter(|&p| offsets.len() >= 2 * p)
        .find(|&p| (p..offsets.len()).all(|i| offsets[i] == offsets[i - p]))
}

impl<T: Real> TimeGrid<T> {
    /// `count` instants `l·T`.
    pub fn uniform(period: T, count: usize) -> Result<Self> {
        check_period(period)?;
        let timestamps = (0..count).map(|l| T::from_index(l) * period).collect();
        Ok(TimeGrid {
            timestamps,
            origin: GridOrigin::Uniform { period },
            offset_cycle: None,
        })
    }

    /// Instants `l·T + δ_l·T`.
    pub fn from_offsets(period: T, offsets: Vec<T>) -> Result<Self> {
        check_period(period)?;
        let timestamps: Vec<T> = offsets
            .iter()
            .enumerate()
            .map(|(l, &d)| T::from_index(l) * period + d * period)
            .collect();
        check_increasing(&timestamps)?;
        let offset_cycle = detect_cycle(&offsets);
        Ok(TimeGrid {
            timestamps,
            origin: GridOrigin::Offset { period, offsets },
            offset_cycle,
        })
    }

    /// Instants `l·T·ε_l`. The first instant is always 0.
    pub fn from_epsilons(period: T, factors: Vec<T>) -> Result<Self> {
        check_period(period)?;
        let timestamps: Vec<T> = factors
            .iter()
            .enumerate()
            .map(|(l, &e)| T::from_index(l) * period * e)
            .collect();
        check_increasing(&timestamps)?;
        Ok(TimeGrid {
            timestamps,
            origin: GridOrigin::Epsilon { period, factors },
            offset_cycle: None,
        })
    }

    /// Raw increasing timestamps.
    pub fn from_timestamps(timestamps: Vec<T>) -> Result<Self> {
        check_increasing(&timestamps)?;
        Ok(TimeGrid {
            timestamps,
            origin: GridOrigin::Timestamps,
            offset_cycle: None,
        })
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn timestamps(&self) -> &[T] {
        &self.timestamps
    }

    pub fn origin(&self) -> &GridOrigin<T> {
        &self.origin
    }

    pub fn period(&self) -> Option<T> {
        match self.origin {
            GridOrigin::Uniform { period }
            | GridOrigin::Epsilon { period, .. }
            | GridOrigin::Offset { period, .. } => Some(period),
            GridOrigin::Timestamps => None,
        }
    }

    /// Period of the offset pattern, when the grid is an offset grid whose
    /// offsets repeat.
    pub fn offset_cycle(&self) -> Option<usize> {
        self.offset_cycle
    }

    /// Scale factor `ε_l` such that `τ_l = l·T·ε_l`, where defined.
    ///
    /// Offset grids give `1 + δ_l/l`; index 0 has no well-defined factor
    /// unless `δ_0 = 0`.
    pub fn epsilon(&self, l: usize) -> Option<T> {
        match &self.origin {
            GridOrigin::Uniform { .. } if l < self.len() => Some(T::one()),
            GridOrigin::Epsilon { factors, .. } => factors.get(l).copied(),
            GridOrigin::Offset { offsets, .. } => {
                let d = *offsets.get(l)?;
                if d == T::zero() {
                    Some(T::one())
                } else if l == 0 {
                    None
                } else {
                    Some(T::one() + d / T::from_index(l))
                }
            }
            _ => None,
        }
    }

    /// Sampling instant `l` with its placement metadata.
    pub fn point(&self, l: usize) -> SamplePoint<T> {
        let time = self.timestamps[l];
        let placement = match &self.origin {
            GridOrigin::Uniform { .. } => Placement::Uniform,
            GridOrigin::Epsilon { factors, .. } => Placement::Scaled(factors[l]),
            GridOrigin::Offset { offsets, .. } => Placement::Shifted {
                offset: offsets[l],
                phase: self.offset_cycle.map(|p| l % p),
            },
            GridOrigin::Timestamps => Placement::Free,
        };
        SamplePoint {
            index: l,
            time,
            period: self.period(),
            placement,
        }
    }

    pub fn points(&self) -> impl Iterator<Item = SamplePoint<T>> + '_ {
        (0..self.len()).map(move |l| self.point(l))
    }

    /// Largest `n` with `τ_n ≤ t`, or `None` when every instant is after `t`.
    pub fn lambda_index(&self, t: T) -> Option<usize> {
        self.timestamps
            .partition_point(|&tau| tau <= t)
            .checked_sub(1)
    }

    /// Number of instants in `(t_prev, t_cur]`, given `λ_prev = lambda_index(t_prev)`.
    pub fn new_term_count(&self, t_prev: T, t_cur: T, lambda_prev: Option<usize>) -> Result<usize> {
        if !(t_prev < t_cur) {
            return Err(Error::NonIncreasingOutput {
                prev: t_prev.as_f64(),
                next: t_cur.as_f64(),
            });
        }
        let before = lambda_prev.map_or(0, |l| l + 1);
        let upto = self.lambda_index(t_cur).map_or(0, |l| l + 1);
        Ok(upto.saturating_sub(before))
    }

    /// Indices `l ≥ 1` where the sufficient monotonicity condition
    /// `ε_{l} > ε_{l-1}·(l-1)/l` fails. Empty for non-epsilon grids.
    ///
    /// The condition is sufficient only; a violation is a diagnostic, the
    /// grid itself was validated on its timestamps.
    pub fn epsilon_condition_violations(&self) -> Vec<usize> {
        match &self.origin {
            GridOrigin::Epsilon { factors, .. } => (1..factors.len())
                .filter(|&l| {
                    let prev = T::from_index(l - 1);
                    let cur = T::from_index(l);
                    !(factors[l] > factors[l - 1] * prev / cur)
                })
                .collect(),
            _ => Vec::new(),
        }
    }

    fn push_checked(&mut self, t: T) -> Result<()> {
        if let Some(&last) = self.timestamps.last() {
            if !(t > last) || !t.is_finite() {
                return Err(Error::NonMonotone {
                    index: self.timestamps.len(),
                    prev: last.as_f64(),
                    next: t.as_f64(),
                });
            }
        } else if !t.is_finite() {
            return Err(Error::NonMonotone {
                index: 0,
                prev: f64::NAN,
                next: t.as_f64(),
            });
        }
        self.timestamps.push(t);
        Ok(())
    }

    /// Appends `count` instants to a uniform grid.
    pub fn extend_uniform(&mut self, count: usize) -> Result<()> {
        let GridOrigin::Uniform { period } = self.origin else {
            return Err(Error::AppendKindMismatch {
                kind: self.origin.name(),
                attempted: "uniform",
            });
        };
        for _ in 0..count {
            let l = self.timestamps.len();
            self.timestamps.push(T::from_index(l) * period);
        }
        Ok(())
    }

    /// Appends one instant `l·T·ε` to an epsilon grid.
    pub fn append_epsilon(&mut self, factor: T) -> Result<()> {
        let l = self.timestamps.len();
        let GridOrigin::Epsilon { period, .. } = self.origin else {
            return Err(Error::AppendKindMismatch {
                kind: self.origin.name(),
                attempted: "epsilon",
            });
        };
        self.push_checked(T::from_index(l) * period * factor)?;
        if let GridOrigin::Epsilon { factors, .. } = &mut self.origin {
            factors.push(factor);
        }
        Ok(())
    }

    /// Appends one instant `l·T + δ·T` to an offset grid.
    pub fn append_offset(&mut self, offset: T) -> Result<()> {
        let l = self.timestamps.len();
        let GridOrigin::Offset { period, .. } = self.origin else {
            return Err(Error::AppendKindMismatch {
                kind: self.origin.name(),
                attempted: "offset",
            });
        };
        self.push_checked(T::from_index(l) * period + offset * period)?;
        if let GridOrigin::Offset { offsets, .. } = &mut self.origin {
            offsets.push(offset);
            self.offset_cycle = match self.offset_cycle {
                Some(p) if offsets[l] == offsets[l - p] => Some(p),
                Some(_) => None,
                None if offsets.len() <= 2 * MAX_OFFSET_CYCLE => detect_cycle(offsets),
                None => None,
            };
        }
        Ok(())
    }

    /// Appends a raw timestamp to a timestamp grid.
    pub fn append_timestamp(&mut self, t: T) -> Result<()> {
        if !matches!(self.origin, GridOrigin::Timestamps) {
            return Err(Error::AppendKindMismatch {
                kind: self.origin.name(),
                attempted: "timestamps",
            });
        }
        self.push_checked(t)
    }
}

/// Splits `T_y / T_x` into an integer part `l` and a fraction `r ∈ [0, 1)`.
pub fn ratio_decompose<T: Real>(output_period: T, input_period: T) -> Result<(u64, T)> {
    check_period(output_period)?;
    check_period(input_period)?;
    let ratio = output_period / input_period;
    let whole = ratio.floor();
    let frac = ratio - whole;
    let whole = whole
        .to_u64()
        .ok_or(Error::NonPositivePeriod(ratio.as_f64()))?;
    Ok((whole, frac))
}
