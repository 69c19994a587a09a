//! Sampling-rate conversion between arbitrary, possibly nonuniform, time
//! grids by a continuous-time IIR filter in parallel form.
//!
//! Each section's impulse response separates into a product of an
//! output-instant factor and an input-instant factor, so every output sample
//! costs work proportional to the number of inputs that arrived since the
//! previous one. [`oracle`] provides the direct convolution it is checked
//! against.
//!
//! The core is generic over [`Real`] (`f32`, `f64`); `*64` and `*32`
//! aliases name the common instantiations.

// `!(a > b)` rejects NaN alongside the failing comparison.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod converter;
pub mod error;
pub mod filterdesign;
pub mod grid;
pub mod oracle;
pub mod scalar;
pub mod sections;

pub use converter::{
    convert_offline, ConversionReport, Converter, ConverterConfig, StepRecord, TermStats,
};
pub use error::{Error, Result};
pub use filterdesign::{butterworth_lowpass, partial_fractions, ParallelForm, RationalTF, Section};
pub use grid::{ratio_decompose, GridOrigin, Placement, SamplePoint, TimeGrid};
pub use oracle::{oracle_convert, oracle_counts, CompensatedSum};
pub use scalar::Real;
pub use sections::{Accumulator, ComputeOrder, InputSample, OpCounts, SectionState};

pub type TimeGrid64 = TimeGrid<f64>;
pub type TimeGrid32 = TimeGrid<f32>;
pub type RationalTF64 = RationalTF<f64>;
pub type RationalTF32 = RationalTF<f32>;
pub type Section64 = Section<f64>;
pub type Section32 = Section<f32>;
pub type ParallelForm64 = ParallelForm<f64>;
pub type ParallelForm32 = ParallelForm<f32>;
pub type Converter64 = Converter<f64>;
pub type Converter32 = Converter<f32>;
pub type ConverterConfig64 = ConverterConfig<f64>;
pub type ConverterConfig32 = ConverterConfig<f32>;
