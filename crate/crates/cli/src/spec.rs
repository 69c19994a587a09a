//! JSON grid and filter specifications.

use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use num_complex::Complex;
use nusrc::{butterworth_lowpass, partial_fractions, ParallelForm, RationalTF, TimeGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

/// Reads a spec given inline (`{...}`) or as a path to a JSON file.
pub fn load_json<T: for<'de> Deserialize<'de>>(arg: &str, what: &str) -> Result<T> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_owned()
    } else {
        std::fs::read_to_string(Path::new(arg))
            .with_context(|| format!("reading {what} spec {arg}"))?
    };
    serde_json::from_str(&text).with_context(|| format!("parsing {what} spec"))
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Uniform,
    Epsilon,
    Offset,
    Timestamps,
}

/// `{"kind", "period_s", "values", "count", "drift_ppm", "jitter_frac", "seed"}`.
///
/// `values` holds rate factors (`epsilon`), offsets in periods (`offset`) or
/// seconds (`timestamps`). A uniform grid with `drift_ppm` becomes an
/// epsilon grid of constant factor `1 + ppm·1e-6`; with `jitter_frac` it
/// becomes an offset grid with offsets drawn from `U(-j, j)`; with both,
/// an offset grid `n·ppm·1e-6 + U(-j, j)`.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub kind: GridKind,
    pub period_s: Option<f64>,
    pub values: Option<Vec<f64>>,
    pub count: Option<usize>,
    pub drift_ppm: Option<f64>,
    pub jitter_frac: Option<f64>,
    pub seed: Option<u64>,
}

/// How many instants a grid should have.
#[derive(Clone, Copy, Debug)]
pub enum Extent {
    /// Exactly this many (input grids: one per sample).
    Exactly(usize),
    /// Every instant up to and including this time.
    Until(f64),
}

impl GridSpec {
    #[cfg(test)]
    pub fn uniform(period_s: f64) -> Self {
        GridSpec {
            kind: GridKind::Uniform,
            period_s: Some(period_s),
            values: None,
            count: None,
            drift_ppm: None,
            jitter_frac: None,
            seed: None,
        }
    }

    /// Nominal period, if the grid has one.
    pub fn nominal_period(&self) -> Option<f64> {
        match self.kind {
            GridKind::Timestamps => {
                let v = self.values.as_ref()?;
                (v.len() >= 2).then(|| (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64)
            }
            _ => self.period_s,
        }
    }

    pub fn build(&self, extent: Extent) -> Result<TimeGrid<f64>> {
        if self.kind != GridKind::Uniform {
            ensure!(
                self.drift_ppm.is_none() && self.jitter_frac.is_none(),
                "drift_ppm and jitter_frac apply to uniform grids only"
            );
        }
        let grid = match self.kind {
            GridKind::Uniform => self.build_uniform(extent)?,
            GridKind::Timestamps => TimeGrid::from_timestamps(self.explicit_values(extent)?)?,
            GridKind::Epsilon => {
                TimeGrid::from_epsilons(self.period()?, self.explicit_values(extent)?)?
            }
            GridKind::Offset => {
                TimeGrid::from_offsets(self.period()?, self.explicit_values(extent)?)?
            }
        };
        if let Extent::Exactly(n) = extent {
            ensure!(
                grid.len() == n,
                "grid has {} instants, expected {n}",
                grid.len()
            );
        }
        Ok(grid)
    }

    fn period(&self) -> Result<f64> {
        let p = self.period_s.context("grid spec needs period_s")?;
        ensure!(p > 0.0 && p.is_finite(), "period_s must be positive");
        Ok(p)
    }

    fn explicit_values(&self, extent: Extent) -> Result<Vec<f64>> {
        let mut values = self
            .values
            .clone()
            .with_context(|| format!("{:?} grid spec needs values", self.kind))?;
        if let Some(c) = self.count {
            ensure!(c <= values.len(), "count exceeds the number of values");
            values.truncate(c);
        }
        if let Extent::Exactly(n) = extent {
            ensure!(
                values.len() >= n,
                "grid spec lists {} instants, input has {n} samples",
                values.len()
            );
            values.truncate(n);
        }
        Ok(values)
    }

    fn build_uniform(&self, extent: Extent) -> Result<TimeGrid<f64>> {
        let period = self.period()?;
        ensure!(self.values.is_none(), "uniform grid spec takes no values");
        let drift = self.drift_ppm.unwrap_or(0.0) * 1e-6;
        ensure!(drift > -0.5, "drift_ppm out of range");
        let jitter = self.jitter_frac.unwrap_or(0.0);
        ensure!(
            (0.0..0.5).contains(&jitter),
            "jitter_frac must lie in [0, 0.5)"
        );
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed.unwrap_or(0));

        let count = match (extent, self.count) {
            (Extent::Exactly(n), Some(c)) if c != n => {
                bail!("grid spec count {c} differs from {n} input samples")
            }
            (Extent::Exactly(n), _) => n,
            (Extent::Until(_), Some(c)) => c,
            (Extent::Until(limit), None) => {
                ensure!(limit >= 0.0, "input ends before time 0");
                // one spare instant; trimmed below
                (limit / (period * (1.0 + drift.min(0.0)) * (1.0 - jitter))).floor() as usize + 2
            }
        };
        ensure!(count > 0, "grid would be empty");

        let grid = if self.jitter_frac.is_some() {
            let offsets = (0..count)
                .map(|n| {
                    let j = if jitter > 0.0 {
                        rng.gen_range(-jitter..jitter)
                    } else {
                        0.0
                    };
                    n as f64 * drift + j
                })
                .collect();
            TimeGrid::from_offsets(period, offsets)?
        } else if self.drift_ppm.is_some() {
            TimeGrid::from_epsilons(period, vec![1.0 + drift; count])?
        } else {
            TimeGrid::uniform(period, count)?
        };
        match (extent, self.count) {
            (Extent::Until(limit), None) => trim(grid, limit),
            _ => Ok(grid),
        }
    }
}

/// Drops instants after `limit`, keeping the grid's construction metadata.
fn trim(grid: TimeGrid<f64>, limit: f64) -> Result<TimeGrid<f64>> {
    let keep = grid.timestamps().partition_point(|&t| t <= limit);
    ensure!(keep > 0, "no output instant precedes the end of the input");
    Ok(match grid.origin().clone() {
        nusrc::GridOrigin::Uniform { period } => TimeGrid::uniform(period, keep)?,
        nusrc::GridOrigin::Epsilon {
            period,
            mut factors,
        } => {
            factors.truncate(keep);
            TimeGrid::from_epsilons(period, factors)?
        }
        nusrc::GridOrigin::Offset {
            period,
            mut offsets,
        } => {
            offsets.truncate(keep);
            TimeGrid::from_offsets(period, offsets)?
        }
        nusrc::GridOrigin::Timestamps => {
            TimeGrid::from_timestamps(grid.timestamps()[..keep].to_vec())?
        }
    })
}

/// `{"design": "butterworth", "order", "cutoff_hz"}` or
/// `{"gain", "poles": [[re, im], ...], "zeros": [...]}`.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum FilterSpec {
    Design {
        design: String,
        order: usize,
        cutoff_hz: f64,
    },
    Explicit {
        gain: f64,
        poles: Vec<[f64; 2]>,
        #[serde(default)]
        zeros: Vec<[f64; 2]>,
    },
}

impl FilterSpec {
    pub fn butterworth(order: usize, cutoff_hz: f64) -> Self {
        FilterSpec::Design {
            design: "butterworth".into(),
            order,
            cutoff_hz,
        }
    }

    pub fn transfer_function(&self) -> Result<RationalTF<f64>> {
        match self {
            FilterSpec::Design {
                design,
                order,
                cutoff_hz,
            } => {
                ensure!(
                    design.eq_ignore_ascii_case("butterworth"),
                    "unknown design {design:?}; only butterworth is supported"
                );
                Ok(butterworth_lowpass(*order, *cutoff_hz)?)
            }
            FilterSpec::Explicit { gain, poles, zeros } => {
                let c = |v: &[[f64; 2]]| v.iter().map(|&[re, im]| Complex::new(re, im)).collect();
                Ok(RationalTF::new(*gain, c(zeros), c(poles))?)
            }
        }
    }

    pub fn parallel_form(&self) -> Result<(RationalTF<f64>, ParallelForm<f64>)> {
        let tf = self.transfer_function()?;
        let form = partial_fractions(&tf)?;
        Ok((tf, form))
    }
}

/// Third-order Butterworth at `0.45·min(f_in, f_out)`.
pub fn default_filter(input_period: f64, output_period: f64) -> FilterSpec {
    FilterSpec::butterworth(3, 0.45 * (1.0 / input_period).min(1.0 / output_period))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(json: &str) -> GridSpec {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn drift_becomes_epsilon_grid() {
        let g = grid(r#"{"kind":"uniform","period_s":1.0,"drift_ppm":100}"#)
            .build(Extent::Exactly(4))
            .unwrap();
        assert_eq!(g.epsilon(3), Some(1.0001));
        assert!((g.timestamps()[3] - 3.0003).abs() < 1e-12);
    }

    #[test]
    fn jitter_is_seeded_and_bounded() {
        let spec = grid(r#"{"kind":"uniform","period_s":2.0,"jitter_frac":0.1,"seed":7}"#);
        let a = spec.build(Extent::Exactly(100)).unwrap();
        let b = spec.build(Extent::Exactly(100)).unwrap();
        assert_eq!(a.timestamps(), b.timestamps());
        for (n, &t) in a.timestamps().iter().enumerate() {
            assert!((t - 2.0 * n as f64).abs() <= 0.2);
        }
    }

    #[test]
    fn until_extent_stops_at_limit() {
        let g = GridSpec::uniform(0.3).build(Extent::Until(3.0)).unwrap();
        assert_eq!(g.len(), 11);
        let g = grid(r#"{"kind":"uniform","period_s":0.3,"drift_ppm":-2000,"jitter_frac":0.2}"#)
            .build(Extent::Until(3.0))
            .unwrap();
        assert!(*g.timestamps().last().unwrap() <= 3.0);
        assert!(g.len() >= 10);
    }

    #[test]
    fn explicit_grids() {
        let g = grid(r#"{"kind":"offset","period_s":1.0,"values":[0.25,0.2,0.25,0.2]}"#)
            .build(Extent::Until(f64::INFINITY))
            .unwrap();
        assert_eq!(g.timestamps(), &[0.25, 1.2, 2.25, 3.2]);
        assert!(grid(r#"{"kind":"timestamps","values":[0.0,1.0]}"#)
            .build(Extent::Exactly(3))
            .is_err());
        assert!(
            grid(r#"{"kind":"epsilon","period_s":1.0,"values":[1.0],"drift_ppm":3}"#)
                .build(Extent::Exactly(1))
                .is_err()
        );
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(serde_json::from_str::<GridSpec>(r#"{"kind":"uniform","period":1}"#).is_err());
    }

    #[test]
    fn filter_specs() {
        let f: FilterSpec =
            serde_json::from_str(r#"{"design":"butterworth","order":1,"cutoff_hz":10}"#).unwrap();
        let tf = f.transfer_function().unwrap();
        assert!((tf.poles()[0].re + 2.0 * std::f64::consts::PI * 10.0).abs() < 1e-12);
        let f: FilterSpec = serde_json::from_str(r#"{"gain":2,"poles":[[-1,0],[-2,0]]}"#).unwrap();
        assert_eq!(f.parallel_form().unwrap().1.sections().len(), 2);
        let f: FilterSpec =
            serde_json::from_str(r#"{"design":"chebyshev","order":1,"cutoff_hz":10}"#).unwrap();
        assert!(f.transfer_function().is_err());
    }
}
