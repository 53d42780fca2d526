//! Deterministic parallel drivers.
//!
//! Work splits across scales, windows or surrogate realizations; each cell is
//! computed by the same sequential core routine the single-threaded path uses,
//! and results are assembled in index order. The worker count therefore never
//! changes a single output byte.

use rayon::prelude::*;
use rayon::ThreadPool;

use rhoq_core::detrended::{
    fluctuation, rho_from_fluctuations, DetrendConfig, DetrendError, FluctuationSet, RhoSurface,
    ScaleGrid,
};
use rhoq_core::ingest::ReturnSeries;
use rhoq_core::rolling::{window_rho, windows, RollingError, RollingResult, RollingSpec};
use rhoq_core::stats::{band_from_samples, surrogate_pair, StatsError, SurrogateBand, SurrogateSpec};

use crate::error::CliError;

/// Build a pool with `workers` threads; 0 means one per logical core.
pub fn pool(workers: usize) -> Result<ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::config(format!("cannot build worker pool: {e}")))
}

/// rho_q over a grid with scales evaluated in parallel. Matches
/// [`rhoq_core::detrended::rho_q`] bit for bit.
pub fn rho_surface(
    pool: &ThreadPool,
    x: &[f64],
    y: &[f64],
    grid: &ScaleGrid,
    cfg: &DetrendConfig,
) -> Result<RhoSurface, DetrendError> {
    let per_scale = pool.install(|| {
        grid.scales()
            .par_iter()
            .map(|&scale| fluctuation(x, y, scale, cfg))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let n_q = cfg.q_values().len();
    let mut set = FluctuationSet {
        q_values: cfg.q_values().to_vec(),
        scales: grid.scales().to_vec(),
        f_xx: vec![Vec::with_capacity(grid.len()); n_q],
        f_yy: vec![Vec::with_capacity(grid.len()); n_q],
        f_xy: vec![Vec::with_capacity(grid.len()); n_q],
        box_counts: Vec::with_capacity(grid.len()),
    };
    for fl in &per_scale {
        set.box_counts.push(fl.n_boxes);
        for qi in 0..n_q {
            set.f_xx[qi].push(fl.f_xx[qi]);
            set.f_yy[qi].push(fl.f_yy[qi]);
            set.f_xy[qi].push(fl.f_xy[qi]);
        }
    }
    rho_from_fluctuations(&set)
}

/// Surrogate band with realizations evaluated in parallel. Matches
/// [`rhoq_core::stats::significance_band`] bit for bit.
pub fn band<F>(
    pool: &ThreadPool,
    x: &[f64],
    y: &[f64],
    spec: &SurrogateSpec,
    stat: F,
) -> Result<SurrogateBand, StatsError>
where
    F: Fn(&[f64], &[f64]) -> Result<Vec<f64>, StatsError> + Sync,
{
    if spec.n_realizations < 2 {
        return Err(StatsError::TooFewRealizations(spec.n_realizations));
    }
    let samples = pool.install(|| {
        (0..spec.n_realizations)
            .into_par_iter()
            .map(|r| {
                let (sx, sy) = surrogate_pair(x, y, spec, r);
                stat(&sx, &sy)
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    band_from_samples(&samples)
}

/// Rolling rho with windows evaluated in parallel. Matches
/// [`rhoq_core::rolling::rolling_rho`] bit for bit.
pub fn rolling(
    pool: &ThreadPool,
    x: &ReturnSeries,
    y: &ReturnSeries,
    spec: &RollingSpec,
    cfg: &DetrendConfig,
) -> Result<RollingResult, RollingError> {
    // Alignment errors surface through the sequential path's checks.
    if x.timestamps() != y.timestamps() || x.dt_s() != y.dt_s() {
        // Delegate for the precise error.
        return rhoq_core::rolling::rolling_rho(x, y, spec, cfg);
    }
    let slots = windows(x, spec)?;
    let n_q = cfg.q_values().len();
    let n_s = spec.scales().len();
    let rho = pool.install(|| {
        slots
            .par_iter()
            .map(|slot| window_rho(x, y, slot, spec.scales(), cfg, n_q, n_s))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(RollingResult {
        window_ends: slots.iter().map(|s| s.end_ms).collect(),
        n_samples: slots.iter().map(|s| s.n_samples).collect(),
        q_values: cfg.q_values().to_vec(),
        scales: spec.scales().to_vec(),
        rho,
    })
}
