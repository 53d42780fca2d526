//! Detrended fluctuation and cross-correlation analysis.
//!
//! Two equal-length series are tiled at each scale `s` into `2*M_s` boxes
//! (`M_s = floor(T/s)` from the front and the same number from the back).
//! Within every box the series is integrated, an order-`m` least-squares
//! polynomial is removed from the integrated profile, and box variances and
//! covariances of the residuals feed q-order fluctuation functions:
//!
//! - auto:  `F_zz(q, s)` = mean over boxes of `(f2_zz)^(q/2)`
//! - cross: `F_xy(q, s)` = mean over boxes of `sign(f2_xy) * |f2_xy|^(q/2)`
//!
//! The q-dependent detrended correlation coefficient is their ratio
//! `rho_q(s) = F_xy / sqrt(F_xx * F_yy)`, bounded by [-1, 1] for q > 0. The
//! parameter q acts as a filter: q < 2 weights boxes with small fluctuations
//! more, q > 2 boxes with large fluctuations.
//!
//! Box aggregation is a fixed-order sequential reduction (front tiling first,
//! then back tiling), so results do not depend on how callers parallelize
//! across scales, q values or windows.

use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

use crate::polyfit::PolyBasis;

/// Default smallest scale for the stock grid.
pub const DEFAULT_MIN_SCALE: usize = 12;
/// Default cap on the largest scale for the stock grid.
pub const DEFAULT_MAX_SCALE: usize = 32_000;
/// Default number of log-spaced grid points.
pub const DEFAULT_GRID_POINTS: usize = 24;
/// The largest default scale keeps at least this many boxes per tiling.
pub const MIN_BOXES_AT_MAX_SCALE: usize = 4;

#[derive(Debug, Error, PartialEq)]
pub enum DetrendError {
    #[error("scale {scale} exceeds series length {len}")]
    ScaleExceedsLength { scale: usize, len: usize },
    #[error("scale {scale} too small for polynomial order {order}: need at least {} points", order + 2)]
    ScaleBelowMinimum { scale: usize, order: usize },
    #[error("series lengths differ: {x} vs {y}")]
    LengthMismatch { x: usize, y: usize },
    #[error("zero-variance box {box_index} at scale {scale}")]
    DegenerateVariance { scale: usize, box_index: usize },
    #[error("fluctuation function is not positive at scale {scale}")]
    NonPositiveFluctuation { scale: usize },
    #[error("need at least {need} scales, have {have}")]
    InsufficientScales { have: usize, need: usize },
    #[error("q values must be finite and positive, got {0}")]
    InvalidQ(f64),
    #[error("at least one q value is required")]
    EmptyQ,
    #[error("invalid scale bounds: min {min}, max {max}")]
    InvalidBounds { min: usize, max: usize },
    #[error("scale grid needs at least one point")]
    EmptyGrid,
}

/// Detrending order and q values for the fluctuation family.
#[derive(Debug, Clone, PartialEq)]
pub struct DetrendConfig {
    order: usize,
    q_values: Vec<f64>,
}

impl DetrendConfig {
    /// `order` is the polynomial degree removed per box; every q must be
    /// finite and strictly positive (q = 0 needs a logarithmic-mean variant
    /// of the fluctuation function and is rejected).
    pub fn new(order: usize, q_values: Vec<f64>) -> Result<Self, DetrendError> {
        if q_values.is_empty() {
            return Err(DetrendError::EmptyQ);
        }
        for &q in &q_values {
            if !(q.is_finite() && q > 0.0) {
                return Err(DetrendError::InvalidQ(q));
            }
        }
        Ok(DetrendConfig { order, q_values })
    }

    /// Order 2 with q = 1, 2, 4.
    pub fn standard() -> Self {
        DetrendConfig {
            order: 2,
            q_values: vec![1.0, 2.0, 4.0],
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn q_values(&self) -> &[f64] {
        &self.q_values
    }

    /// Smallest scale this order can detrend: m + 2 points leave a residual.
    pub fn min_scale(&self) -> usize {
        self.order + 2
    }
}

/// Log-spaced integer scales, validated against a series length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaleGrid {
    scales: Vec<usize>,
    min_scale: usize,
    max_scale: usize,
    point_count: usize,
}

impl ScaleGrid {
    /// Wrap an explicit list of scales, validating order and bounds against a
    /// series length and detrending order.
    pub fn from_scales(
        scales: &[usize],
        series_len: usize,
        order: usize,
    ) -> Result<Self, DetrendError> {
        if scales.is_empty() {
            return Err(DetrendError::EmptyGrid);
        }
        for pair in scales.windows(2) {
            if pair[1] <= pair[0] {
                return Err(DetrendError::InvalidBounds {
                    min: pair[1],
                    max: pair[0],
                });
            }
        }
        let min_scale = scales[0];
        let max_scale = *scales.last().unwrap();
        if min_scale < order + 2 {
            return Err(DetrendError::ScaleBelowMinimum {
                scale: min_scale,
                order,
            });
        }
        if max_scale > series_len {
            return Err(DetrendError::ScaleExceedsLength {
                scale: max_scale,
                len: series_len,
            });
        }
        Ok(ScaleGrid {
            scales: scales.to_vec(),
            min_scale,
            max_scale,
            point_count: scales.len(),
        })
    }

    pub fn scales(&self) -> &[usize] {
        &self.scales
    }

    pub fn min_scale(&self) -> usize {
        self.min_scale
    }

    pub fn max_scale(&self) -> usize {
        self.max_scale
    }

    /// Requested point count; the realized grid may be shorter after
    /// deduplication of rounded scales.
    pub fn point_count(&self) -> usize {
        self.point_count
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }
}

/// Log-uniform integer scales in [min_scale, max_scale], endpoints included,
/// deduplicated after rounding.
pub fn make_scale_grid(
    min_scale: usize,
    max_scale: usize,
    n_points: usize,
    series_len: usize,
    order: usize,
) -> Result<ScaleGrid, DetrendError> {
    if n_points == 0 {
        return Err(DetrendError::EmptyGrid);
    }
    if min_scale < order + 2 {
        return Err(DetrendError::ScaleBelowMinimum {
            scale: min_scale,
            order,
        });
    }
    if min_scale > max_scale {
        return Err(DetrendError::InvalidBounds {
            min: min_scale,
            max: max_scale,
        });
    }
    if max_scale > series_len {
        return Err(DetrendError::ScaleExceedsLength {
            scale: max_scale,
            len: series_len,
        });
    }

    let mut scales = Vec::with_capacity(n_points);
    if n_points == 1 || min_scale == max_scale {
        scales.push(min_scale);
        if max_scale != min_scale {
            scales.push(max_scale);
        }
    } else {
        let log_min = libm::log(min_scale as f64);
        let log_max = libm::log(max_scale as f64);
        for k in 0..n_points {
            let frac = k as f64 / (n_points - 1) as f64;
            let s = libm::round(libm::exp(log_min + frac * (log_max - log_min))) as usize;
            scales.push(s.clamp(min_scale, max_scale));
        }
        scales[0] = min_scale;
        scales[n_points - 1] = max_scale;
    }
    scales.dedup();

    Ok(ScaleGrid {
        scales,
        min_scale,
        max_scale,
        point_count: n_points,
    })
}

/// The stock grid: 24 log-uniform points from 12 to min(32,000, T/4).
///
/// The T/4 cap keeps at least four boxes per tiling at the top scale.
pub fn default_scale_grid(series_len: usize, order: usize) -> Result<ScaleGrid, DetrendError> {
    let max_scale = DEFAULT_MAX_SCALE.min(series_len / MIN_BOXES_AT_MAX_SCALE);
    if max_scale < DEFAULT_MIN_SCALE {
        return Err(DetrendError::InvalidBounds {
            min: DEFAULT_MIN_SCALE,
            max: max_scale,
        });
    }
    make_scale_grid(DEFAULT_MIN_SCALE, max_scale, DEFAULT_GRID_POINTS, series_len, order)
}

/// Box tiling of a length-`series_len` series at one scale: `boxes_per_end`
/// boxes from the front and the same number from the back. When the length is
/// a multiple of the scale the two tilings coincide and the duplicates are
/// kept; the fluctuation functions normalize by the full `2 * M_s` count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxLayout {
    series_len: usize,
    scale: usize,
    boxes_per_end: usize,
    starts: Vec<usize>,
}

impl BoxLayout {
    pub fn series_len(&self) -> usize {
        self.series_len
    }

    pub fn scale(&self) -> usize {
        self.scale
    }

    /// M_s = floor(T / s).
    pub fn boxes_per_end(&self) -> usize {
        self.boxes_per_end
    }

    /// Start offsets in evaluation order: front tiling (0, s, 2s, ...) then
    /// back tiling (T-s, T-2s, ...).
    pub fn starts(&self) -> &[usize] {
        &self.starts
    }

    pub fn n_boxes(&self) -> usize {
        self.starts.len()
    }
}

/// Tile `series_len` points into boxes of length `scale` from both ends.
pub fn layout_boxes(series_len: usize, scale: usize) -> Result<BoxLayout, DetrendError> {
    if scale == 0 || scale > series_len {
        return Err(DetrendError::ScaleExceedsLength {
            scale,
            len: series_len,
        });
    }
    let m = series_len / scale;
    let mut starts = Vec::with_capacity(2 * m);
    for v in 0..m {
        starts.push(v * scale);
    }
    for v in 0..m {
        starts.push(series_len - (v + 1) * scale);
    }
    Ok(BoxLayout {
        series_len,
        scale,
        boxes_per_end: m,
        starts,
    })
}

/// Integrate one box and remove an order-`order` polynomial from the profile.
///
/// Returns the residual profile of length `scale`. The residual has zero
/// projection onto the fitted polynomial basis.
pub fn detrend_box(
    series: &[f64],
    start: usize,
    scale: usize,
    order: usize,
) -> Result<Vec<f64>, DetrendError> {
    if scale < order + 2 {
        return Err(DetrendError::ScaleBelowMinimum { scale, order });
    }
    if start + scale > series.len() {
        return Err(DetrendError::ScaleExceedsLength {
            scale: start + scale,
            len: series.len(),
        });
    }
    let basis = PolyBasis::new(scale, order);
    let mut buf = vec![0.0; scale];
    integrate_box(&series[start..start + scale], &mut buf);
    basis.detrend_in_place(&mut buf);
    Ok(buf)
}

/// Mean elementwise product of two residual profiles: the box covariance
/// `f2_xy`; with identical arguments, the box variance `f2_zz`.
pub fn box_cov(x_res: &[f64], y_res: &[f64]) -> f64 {
    assert_eq!(x_res.len(), y_res.len(), "residual profiles must match");
    let mut acc = 0.0;
    for (a, b) in x_res.iter().zip(y_res) {
        acc += a * b;
    }
    acc / x_res.len() as f64
}

#[inline]
fn integrate_box(src: &[f64], dst: &mut [f64]) {
    let mut acc = 0.0;
    for (d, &s) in dst.iter_mut().zip(src) {
        acc += s;
        *d = acc;
    }
}

/// Per-box variances and covariances at one scale, in evaluation order.
struct BoxMoments {
    xx: Vec<f64>,
    yy: Vec<f64>,
    xy: Vec<f64>,
}

/// A box is degenerate when its residual power is below this fraction of its
/// integrated-profile power: an exact polynomial detrends to rounding dust
/// (about 1e-16 of the profile), which squares to well under this bound.
const DEGENERATE_POWER_RATIO: f64 = 1e-26;

fn box_moments(
    x: &[f64],
    y: &[f64],
    layout: &BoxLayout,
    basis: &PolyBasis,
) -> Result<BoxMoments, DetrendError> {
    let s = layout.scale();
    let inv_s = 1.0 / s as f64;
    let n = layout.n_boxes();
    let mut moments = BoxMoments {
        xx: Vec::with_capacity(n),
        yy: Vec::with_capacity(n),
        xy: Vec::with_capacity(n),
    };
    let mut rx = vec![0.0; s];
    let mut ry = vec![0.0; s];
    for (box_index, &start) in layout.starts().iter().enumerate() {
        integrate_box(&x[start..start + s], &mut rx);
        let power_x = mean_square(&rx);
        basis.detrend_in_place(&mut rx);
        integrate_box(&y[start..start + s], &mut ry);
        let power_y = mean_square(&ry);
        basis.detrend_in_place(&mut ry);

        let mut f_xx = 0.0;
        let mut f_yy = 0.0;
        let mut f_xy = 0.0;
        for (a, b) in rx.iter().zip(&ry) {
            f_xx += a * a;
            f_yy += b * b;
            f_xy += a * b;
        }
        f_xx *= inv_s;
        f_yy *= inv_s;
        f_xy *= inv_s;
        // A zero-variance box would silently change the 2*M_s normalization
        // if skipped, so it is a hard error.
        if f_xx <= DEGENERATE_POWER_RATIO * power_x || f_yy <= DEGENERATE_POWER_RATIO * power_y {
            return Err(DetrendError::DegenerateVariance {
                scale: s,
                box_index,
            });
        }
        moments.xx.push(f_xx);
        moments.yy.push(f_yy);
        moments.xy.push(f_xy);
    }
    Ok(moments)
}

#[inline]
fn mean_square(values: &[f64]) -> f64 {
    let mut acc = 0.0;
    for v in values {
        acc += v * v;
    }
    acc / values.len() as f64
}

/// Fluctuation functions at a single scale, one entry per q.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleFluctuations {
    pub scale: usize,
    /// 2 * M_s.
    pub n_boxes: usize,
    pub f_xx: Vec<f64>,
    pub f_yy: Vec<f64>,
    pub f_xy: Vec<f64>,
}

/// Compute the q-order fluctuation functions of a pair at one scale.
pub fn fluctuation(
    x: &[f64],
    y: &[f64],
    scale: usize,
    cfg: &DetrendConfig,
) -> Result<ScaleFluctuations, DetrendError> {
    if x.len() != y.len() {
        return Err(DetrendError::LengthMismatch {
            x: x.len(),
            y: y.len(),
        });
    }
    if scale < cfg.min_scale() {
        return Err(DetrendError::ScaleBelowMinimum {
            scale,
            order: cfg.order(),
        });
    }
    let layout = layout_boxes(x.len(), scale)?;
    let basis = PolyBasis::new(scale, cfg.order());
    let moments = box_moments(x, y, &layout, &basis)?;
    Ok(reduce_moments(&moments, scale, cfg))
}

fn reduce_moments(moments: &BoxMoments, scale: usize, cfg: &DetrendConfig) -> ScaleFluctuations {
    let n_boxes = moments.xx.len();
    let inv_n = 1.0 / n_boxes as f64;
    let mut out = ScaleFluctuations {
        scale,
        n_boxes,
        f_xx: Vec::with_capacity(cfg.q_values().len()),
        f_yy: Vec::with_capacity(cfg.q_values().len()),
        f_xy: Vec::with_capacity(cfg.q_values().len()),
    };
    for &q in cfg.q_values() {
        let half_q = q / 2.0;
        let mut acc_xx = 0.0;
        let mut acc_yy = 0.0;
        let mut acc_xy = 0.0;
        for v in 0..n_boxes {
            acc_xx += libm::pow(moments.xx[v], half_q);
            acc_yy += libm::pow(moments.yy[v], half_q);
            let c = moments.xy[v];
            acc_xy += signum(c) * libm::pow(c.abs(), half_q);
        }
        out.f_xx.push(acc_xx * inv_n);
        out.f_yy.push(acc_yy * inv_n);
        out.f_xy.push(acc_xy * inv_n);
    }
    out
}

#[inline]
fn signum(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Fluctuation functions of a pair over a whole scale grid, indexed `[q][scale]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluctuationSet {
    pub q_values: Vec<f64>,
    pub scales: Vec<usize>,
    pub f_xx: Vec<Vec<f64>>,
    pub f_yy: Vec<Vec<f64>>,
    pub f_xy: Vec<Vec<f64>>,
    /// 2 * M_s per scale.
    pub box_counts: Vec<usize>,
}

pub fn fluctuation_set(
    x: &[f64],
    y: &[f64],
    grid: &ScaleGrid,
    cfg: &DetrendConfig,
) -> Result<FluctuationSet, DetrendError> {
    let n_q = cfg.q_values().len();
    let mut set = FluctuationSet {
        q_values: cfg.q_values().to_vec(),
        scales: grid.scales().to_vec(),
        f_xx: vec![Vec::with_capacity(grid.len()); n_q],
        f_yy: vec![Vec::with_capacity(grid.len()); n_q],
        f_xy: vec![Vec::with_capacity(grid.len()); n_q],
        box_counts: Vec::with_capacity(grid.len()),
    };
    for &scale in grid.scales() {
        let fl = fluctuation(x, y, scale, cfg)?;
        set.box_counts.push(fl.n_boxes);
        for qi in 0..n_q {
            set.f_xx[qi].push(fl.f_xx[qi]);
            set.f_yy[qi].push(fl.f_yy[qi]);
            set.f_xy[qi].push(fl.f_xy[qi]);
        }
    }
    Ok(set)
}

/// rho_q(s) over (q, scale) axes, with an optional surrogate band attached by
/// the significance machinery.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoSurface {
    pub q_values: Vec<f64>,
    pub scales: Vec<usize>,
    /// Indexed `[q][scale]`.
    pub rho: Vec<Vec<f64>>,
    /// Surrogate standard deviation per cell, same indexing.
    pub band_sigma: Option<Vec<Vec<f64>>>,
}

impl RhoSurface {
    pub fn cell(&self, qi: usize, si: usize) -> f64 {
        self.rho[qi][si]
    }

    /// Flatten in (q-major, scale-minor) order; the layout used whenever the
    /// surface is treated as a vector of statistic cells.
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.q_values.len() * self.scales.len());
        for row in &self.rho {
            out.extend_from_slice(row);
        }
        out
    }
}

/// The q-dependent detrended correlation coefficient over a scale grid.
///
/// Symmetric in (x, y); every value lies in [-1, 1] up to rounding for q > 0.
pub fn rho_q(
    x: &[f64],
    y: &[f64],
    grid: &ScaleGrid,
    cfg: &DetrendConfig,
) -> Result<RhoSurface, DetrendError> {
    let set = fluctuation_set(x, y, grid, cfg)?;
    rho_from_fluctuations(&set)
}

/// Form rho_q(s) from precomputed fluctuation functions.
pub fn rho_from_fluctuations(set: &FluctuationSet) -> Result<RhoSurface, DetrendError> {
    let mut rho = vec![Vec::with_capacity(set.scales.len()); set.q_values.len()];
    for (qi, row) in rho.iter_mut().enumerate() {
        for si in 0..set.scales.len() {
            let denom = libm::sqrt(set.f_xx[qi][si] * set.f_yy[qi][si]);
            if denom == 0.0 || !denom.is_finite() {
                return Err(DetrendError::NonPositiveFluctuation {
                    scale: set.scales[si],
                });
            }
            row.push(set.f_xy[qi][si] / denom);
        }
    }
    Ok(RhoSurface {
        q_values: set.q_values.clone(),
        scales: set.scales.clone(),
        rho,
        band_sigma: None,
    })
}

/// Result of a DFA log-log fit.
#[derive(Debug, Clone, PartialEq)]
pub struct DfaFit {
    /// Scaling exponent: the OLS slope in log-log coordinates.
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub log_scales: Vec<f64>,
    pub log_amplitudes: Vec<f64>,
}

/// Detrended fluctuation analysis scaling exponent of a single series.
///
/// Uses the order-m detrending from `cfg` and the q = 2 auto-fluctuation;
/// the fit runs on amplitudes `[F(2, s)]^(1/2)` against `s`, both in logs.
pub fn dfa_exponent(
    x: &[f64],
    grid: &ScaleGrid,
    cfg: &DetrendConfig,
) -> Result<DfaFit, DetrendError> {
    let q2 = DetrendConfig::new(cfg.order(), vec![2.0])?;
    let mut amplitudes = Vec::with_capacity(grid.len());
    for &scale in grid.scales() {
        let fl = fluctuation(x, x, scale, &q2)?;
        let f2 = fl.f_xx[0];
        if f2 <= 0.0 || !f2.is_finite() {
            return Err(DetrendError::NonPositiveFluctuation { scale });
        }
        amplitudes.push(libm::sqrt(f2));
    }
    dfa_fit_from_fluctuations(grid.scales(), &amplitudes)
}

/// Fit a scaling exponent to externally supplied fluctuation amplitudes.
pub fn dfa_fit_from_fluctuations(
    scales: &[usize],
    amplitudes: &[f64],
) -> Result<DfaFit, DetrendError> {
    if scales.len() < 3 {
        return Err(DetrendError::InsufficientScales {
            have: scales.len(),
            need: 3,
        });
    }
    if scales.len() != amplitudes.len() {
        return Err(DetrendError::LengthMismatch {
            x: scales.len(),
            y: amplitudes.len(),
        });
    }
    let mut log_s = Vec::with_capacity(scales.len());
    let mut log_f = Vec::with_capacity(scales.len());
    for (&s, &f) in scales.iter().zip(amplitudes) {
        if f <= 0.0 || !f.is_finite() {
            return Err(DetrendError::NonPositiveFluctuation { scale: s });
        }
        log_s.push(libm::log(s as f64));
        log_f.push(libm::log(f));
    }

    let n = log_s.len() as f64;
    let mean_x = log_s.iter().sum::<f64>() / n;
    let mean_y = log_f.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&xv, &yv) in log_s.iter().zip(&log_f) {
        cov += (xv - mean_x) * (yv - mean_y);
        var_x += (xv - mean_x) * (xv - mean_x);
        var_y += (yv - mean_y) * (yv - mean_y);
    }
    if var_x == 0.0 {
        return Err(DetrendError::InsufficientScales {
            have: 1,
            need: 3,
        });
    }
    let slope = cov / var_x;
    let intercept = mean_y - slope * mean_x;
    let ssr: f64 = log_s
        .iter()
        .zip(&log_f)
        .map(|(&xv, &yv)| {
            let e = yv - (intercept + slope * xv);
            e * e
        })
        .sum();
    let r_squared = if var_y > 0.0 { 1.0 - ssr / var_y } else { 1.0 };

    Ok(DfaFit {
        exponent: slope,
        intercept,
        r_squared,
        log_scales: log_s,
        log_amplitudes: log_f,
    })
}
