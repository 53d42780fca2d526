//! Time-resolved rho_q(s): sliding calendar windows over aligned return
//! series.
//!
//! Windows are calendar-defined (duration and step in wall-clock time), so
//! sample counts vary over weekends and session breaks. A window slice is fed
//! through exactly the same per-scale fluctuation path as the static surface,
//! which makes a full-span window reproduce the static result bit for bit.

use alloc::vec::Vec;
use thiserror::Error;

use crate::detrended::{rho_q, DetrendConfig, DetrendError, ScaleGrid};
use crate::ingest::ReturnSeries;
use crate::timebase::MS_PER_DAY;

#[derive(Debug, Error, PartialEq)]
pub enum RollingError {
    #[error("window must be positive, got {0} ms")]
    InvalidWindow(i64),
    #[error("step must be positive and at most the window, got step {step} ms, window {window} ms")]
    InvalidStep { step: i64, window: i64 },
    #[error("no scales configured")]
    NoScales,
    #[error("series span {span} ms shorter than one window of {window} ms")]
    SpanTooShort { span: i64, window: i64 },
    #[error("series are not aligned: {0}")]
    Misaligned(&'static str),
    #[error("sampling intervals differ: {x} s vs {y} s")]
    DtMismatch { x: i64, y: i64 },
    #[error("series time spans do not overlap")]
    EmptyOverlap,
    #[error(transparent)]
    Detrend(#[from] DetrendError),
}

/// Rolling-window configuration: calendar window and step plus the scales to
/// evaluate in each window. q values come from the [`DetrendConfig`] handed to
/// [`rolling_rho`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RollingSpec {
    window_ms: i64,
    step_ms: i64,
    scales: Vec<usize>,
}

impl RollingSpec {
    pub fn new(window_ms: i64, step_ms: i64, scales: Vec<usize>) -> Result<Self, RollingError> {
        if window_ms <= 0 {
            return Err(RollingError::InvalidWindow(window_ms));
        }
        if step_ms <= 0 || step_ms > window_ms {
            return Err(RollingError::InvalidStep {
                step: step_ms,
                window: window_ms,
            });
        }
        if scales.is_empty() {
            return Err(RollingError::NoScales);
        }
        Ok(RollingSpec {
            window_ms,
            step_ms,
            scales,
        })
    }

    /// Five calendar days rolled by one day, evaluated at scales 12 and 360
    /// (2 minutes and 60 minutes at 10-second sampling).
    pub fn week_by_day() -> Self {
        RollingSpec::new(5 * MS_PER_DAY, MS_PER_DAY, alloc::vec![12, 360])
            .expect("static spec is valid")
    }

    pub fn window_ms(&self) -> i64 {
        self.window_ms
    }

    pub fn step_ms(&self) -> i64 {
        self.step_ms
    }

    pub fn scales(&self) -> &[usize] {
        &self.scales
    }

    pub fn max_scale(&self) -> usize {
        *self.scales.iter().max().expect("non-empty by construction")
    }
}

/// One calendar window resolved against a series.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowSlot {
    pub start_ms: i64,
    pub end_ms: i64,
    /// Half-open index range of returns whose interval start lies in the
    /// window.
    pub first_index: usize,
    pub last_index: usize,
    pub n_samples: usize,
    /// Fewer than 4 * max(scale) samples.
    pub short: bool,
}

/// Resolve the calendar windows of `spec` against a series.
///
/// Windows start at the series origin and advance by the step; the last
/// window is the last one that fits entirely inside the series span.
pub fn windows(series: &ReturnSeries, spec: &RollingSpec) -> Result<Vec<WindowSlot>, RollingError> {
    let span = series.end_ms() - series.t0();
    if span < spec.window_ms() {
        return Err(RollingError::SpanTooShort {
            span,
            window: spec.window_ms(),
        });
    }
    let count = ((span - spec.window_ms()) / spec.step_ms()) as usize + 1;
    let ts = series.timestamps();
    let min_samples = 4 * spec.max_scale();
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let start = series.t0() + k as i64 * spec.step_ms();
        let end = start + spec.window_ms();
        let first = ts.partition_point(|&t| t < start);
        let last = ts.partition_point(|&t| t < end);
        let n_samples = last - first;
        out.push(WindowSlot {
            start_ms: start,
            end_ms: end,
            first_index: first,
            last_index: last,
            n_samples,
            short: n_samples < min_samples,
        });
    }
    Ok(out)
}

/// Rolling rho_q(s) values.
///
/// `rho[w][qi][si]` is `None` when window `w` holds fewer than `4 * scale`
/// samples at that scale; absent entries are never fabricated as zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct RollingResult {
    pub window_ends: Vec<i64>,
    pub n_samples: Vec<usize>,
    pub q_values: Vec<f64>,
    pub scales: Vec<usize>,
    pub rho: Vec<Vec<Vec<Option<f64>>>>,
}

/// Evaluate rho_q per window for an aligned pair.
pub fn rolling_rho(
    x: &ReturnSeries,
    y: &ReturnSeries,
    spec: &RollingSpec,
    cfg: &DetrendConfig,
) -> Result<RollingResult, RollingError> {
    ensure_aligned(x, y)?;
    let slots = windows(x, spec)?;
    let n_q = cfg.q_values().len();
    let n_s = spec.scales().len();
    let mut result = RollingResult {
        window_ends: Vec::with_capacity(slots.len()),
        n_samples: Vec::with_capacity(slots.len()),
        q_values: cfg.q_values().to_vec(),
        scales: spec.scales().to_vec(),
        rho: Vec::with_capacity(slots.len()),
    };
    for slot in &slots {
        result.window_ends.push(slot.end_ms);
        result.n_samples.push(slot.n_samples);
        result
            .rho
            .push(window_rho(x, y, slot, spec.scales(), cfg, n_q, n_s)?);
    }
    Ok(result)
}

/// Compute one window's cells; shared by the sequential path above and any
/// parallel driver, so ordering and arithmetic are identical in both.
pub fn window_rho(
    x: &ReturnSeries,
    y: &ReturnSeries,
    slot: &WindowSlot,
    scales: &[usize],
    cfg: &DetrendConfig,
    n_q: usize,
    n_s: usize,
) -> Result<Vec<Vec<Option<f64>>>, RollingError> {
    let mut cells = alloc::vec![alloc::vec![None; n_s]; n_q];
    let xs = &x.returns()[slot.first_index..slot.last_index];
    let ys = &y.returns()[slot.first_index..slot.last_index];
    for (si, &scale) in scales.iter().enumerate() {
        if slot.n_samples < 4 * scale {
            continue;
        }
        let grid = ScaleGrid::from_scales(&[scale], xs.len(), cfg.order())?;
        let surface = rho_q(xs, ys, &grid, cfg)?;
        for (row, values) in cells.iter_mut().zip(&surface.rho) {
            row[si] = Some(values[0]);
        }
    }
    Ok(cells)
}

fn ensure_aligned(x: &ReturnSeries, y: &ReturnSeries) -> Result<(), RollingError> {
    if x.dt_s() != y.dt_s() {
        return Err(RollingError::DtMismatch {
            x: x.dt_s(),
            y: y.dt_s(),
        });
    }
    if x.len() != y.len() {
        return Err(RollingError::Misaligned("lengths differ"));
    }
    if x.t0() != y.t0() {
        return Err(RollingError::Misaligned("origins differ"));
    }
    if x.timestamps() != y.timestamps() {
        return Err(RollingError::Misaligned("grids differ"));
    }
    Ok(())
}

/// Trim two series to their common time grid.
pub fn align(
    x: &ReturnSeries,
    y: &ReturnSeries,
) -> Result<(ReturnSeries, ReturnSeries), RollingError> {
    if x.dt_s() != y.dt_s() {
        return Err(RollingError::DtMismatch {
            x: x.dt_s(),
            y: y.dt_s(),
        });
    }
    let start = x.t0().max(y.t0());
    let end = x.end_ms().min(y.end_ms());
    if start >= end {
        return Err(RollingError::EmptyOverlap);
    }
    let trim = |s: &ReturnSeries| -> ReturnSeries {
        let ts = s.timestamps();
        let first = ts.partition_point(|&t| t < start);
        let last = ts.partition_point(|&t| t < end);
        s.slice(first..last)
    };
    let tx = trim(x);
    let ty = trim(y);
    if tx.is_empty() || ty.is_empty() {
        return Err(RollingError::EmptyOverlap);
    }
    if tx.timestamps() != ty.timestamps() {
        return Err(RollingError::Misaligned("grids differ inside the overlap"));
    }
    Ok((tx, ty))
}
