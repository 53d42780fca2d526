//! Multiscale detrended cross-correlation analysis for long uniform-interval
//! return series.
//!
//! The crate covers the full numerical pipeline:
//!
//! - [`ingest`] — tick parsing, last-observation-carried-forward resampling
//!   onto a uniform grid, log-returns, cumulative returns, event windows.
//! - [`detrended`] — the mathematical core: per-box polynomial detrending,
//!   q-order fluctuation functions, the q-dependent detrended correlation
//!   coefficient rho_q(s) over a scale grid, and DFA scaling exponents.
//! - [`stats`] — Pearson baseline, correlation-strength labels, shuffled
//!   surrogates with significance bands, Jarque-Bera and ARCH LM diagnostics.
//! - [`rolling`] — time-resolved rho_q(s) over sliding calendar windows.
//! - [`synth`] — seeded generators with known correlation structure for
//!   estimator validation.
//!
//! Everything is `no_std` + `alloc`: pure functions over slices, transcendental
//! math through `libm` so results are bit-identical across platforms. IO, file
//! formats and the command-line front end live in the companion `rhoq-cli`
//! crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod detrended;
pub mod ingest;
mod polyfit;
pub mod rng;
pub mod rolling;
pub mod stats;
pub mod synth;
pub mod timebase;

pub use detrended::{
    default_scale_grid, dfa_exponent, fluctuation, layout_boxes, make_scale_grid, rho_q,
    BoxLayout, DetrendConfig, DetrendError, DfaFit, FluctuationSet, RhoSurface, ScaleFluctuations,
    ScaleGrid,
};
pub use ingest::{IngestError, PriceGrid, ReturnSeries, SessionCalendar, TickSeries};
pub use rng::Rng;
pub use rolling::{align, rolling_rho, windows, RollingError, RollingResult, RollingSpec};
pub use stats::{
    arch_lm, classify_strength, jarque_bera, pearson, pearson_matrix, shuffle, significance_band,
    ArchLm, JarqueBera, PearsonMatrix, ShuffleMode, StatsError, Strength, SurrogateBand,
    SurrogateSpec,
};
pub use synth::{Generated, GeneratorSpec, SynthError};
