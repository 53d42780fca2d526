//! The six pipeline commands. Each is a deterministic function of
//! (input files, resolved config, seed): outputs embed the config echo and
//! tool version, and reruns are byte-identical at any worker count.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;

use rhoq_core::detrended::{
    make_scale_grid, DetrendConfig, ScaleGrid, DEFAULT_MAX_SCALE, MIN_BOXES_AT_MAX_SCALE,
};
use rhoq_core::ingest::{event_window, ReturnSeries};
use rhoq_core::rng::{substream_seed, ALGORITHM_ID};
use rhoq_core::rolling::{align, RollingSpec};
use rhoq_core::stats::{
    arch_lm, chi_squared_crit_1pct, classify_strength, jarque_bera, pearson_matrix, SurrogateSpec,
};
use rhoq_core::synth::{Generated, GeneratorSpec};
use rhoq_core::timebase;

use crate::config::{echo_flat, resolve_pairs, RunConfig};
use crate::error::CliError;
use crate::io::{align_all, load_all, to_json_string, write_output};
use crate::parallel;
use crate::{TOOL, VERSION};

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    rng_algorithm: &'static str,
    config: &'a RunConfig,
    #[serde(flatten)]
    body: T,
}

fn envelope<'a, T: Serialize>(command: &'static str, cfg: &'a RunConfig, body: T) -> Envelope<'a, T> {
    Envelope {
        tool: TOOL,
        version: VERSION,
        command,
        rng_algorithm: ALGORITHM_ID,
        config: cfg,
        body,
    }
}

fn csv_preamble(command: &str, cfg: &RunConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {TOOL} {VERSION} {command}");
    let _ = writeln!(out, "# rng = {ALGORITHM_ID}");
    for line in echo_flat(cfg).lines() {
        let _ = writeln!(out, "# {line}");
    }
    out
}

fn surrogate_spec(cfg: &RunConfig) -> Result<Option<SurrogateSpec>, CliError> {
    if cfg.surrogates == 0 {
        return Ok(None);
    }
    Ok(Some(
        SurrogateSpec::new(cfg.surrogates, cfg.seed)
            .map_err(|e| CliError::config(e.to_string()))?
            .with_mode(cfg.shuffle_mode)
            .with_band_k(cfg.band_k),
    ))
}

fn detrend_config(cfg: &RunConfig) -> Result<DetrendConfig, CliError> {
    DetrendConfig::new(cfg.order, cfg.q_values.clone()).map_err(CliError::from)
}

/// Scale grid for a series of length `len`: explicit bounds when configured,
/// otherwise 12 .. min(32000, len / 4).
fn grid_for(cfg: &RunConfig, len: usize) -> Result<ScaleGrid, CliError> {
    let smax = match cfg.smax {
        Some(s) => s,
        None => {
            let cap = DEFAULT_MAX_SCALE.min(len / MIN_BOXES_AT_MAX_SCALE);
            if cap < cfg.smin {
                return Err(CliError::data(format!(
                    "series too short for the default grid: length {len} caps the top scale at {cap}, below smin {}",
                    cfg.smin
                )));
            }
            cap
        }
    };
    make_scale_grid(cfg.smin, smax, cfg.spoints, len, cfg.order).map_err(CliError::from)
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => x.to_string(),
        None => String::new(),
    }
}

// --- pearson ---------------------------------------------------------------

#[derive(Serialize)]
struct PearsonBody {
    ids: Vec<String>,
    coefficients: Vec<Vec<f64>>,
    strength: Vec<Vec<String>>,
    sigma_shuffle: Option<Vec<Vec<f64>>>,
    significant: Option<Vec<Vec<bool>>>,
    n_samples: usize,
}

pub fn cmd_pearson(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let series = align_all(load_all(cfg)?)?;
    let ids: Vec<String> = cfg.instruments.iter().map(|(id, _)| id.clone()).collect();
    let data: Vec<Vec<f64>> = series.iter().map(|s| s.returns().to_vec()).collect();
    let n_samples = data.first().map(|d| d.len()).unwrap_or(0);
    let spec = surrogate_spec(cfg)?;
    let matrix = pearson_matrix(&ids, &data, spec.as_ref())?;

    let mut strength = Vec::with_capacity(ids.len());
    for row in &matrix.coefficients {
        let mut labels = Vec::with_capacity(row.len());
        for &c in row {
            labels.push(classify_strength(c)?.to_string());
        }
        strength.push(labels);
    }

    let mut written = Vec::new();
    if cfg.format.wants_csv() {
        let mut csv = csv_preamble("pearson", cfg);
        let _ = writeln!(csv, "id,{}", ids.join(","));
        for (i, id) in ids.iter().enumerate() {
            let row: Vec<String> = matrix.coefficients[i].iter().map(|v| v.to_string()).collect();
            let _ = writeln!(csv, "{id},{}", row.join(","));
        }
        written.push(write_output(&cfg.out_dir, "pearson.csv", &csv)?);
    }
    if cfg.format.wants_json() {
        let body = PearsonBody {
            ids: matrix.ids.clone(),
            coefficients: matrix.coefficients.clone(),
            strength,
            sigma_shuffle: matrix.sigma_shuffle.clone(),
            significant: matrix.significant.clone(),
            n_samples,
        };
        let json = to_json_string(&envelope("pearson", cfg, body))?;
        written.push(write_output(&cfg.out_dir, "pearson.json", &json)?);
    }
    Ok(written)
}

// --- rho ---------------------------------------------------------------------

#[derive(Serialize)]
struct SurfaceBody {
    pair: String,
    n_samples: usize,
    q_values: Vec<f64>,
    scales: Vec<usize>,
    /// Indexed [q][scale].
    rho: Vec<Vec<f64>>,
    band_sigma: Option<Vec<Vec<f64>>>,
}

#[derive(Serialize)]
struct RhoBody {
    surfaces: Vec<SurfaceBody>,
}

pub fn cmd_rho(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let series = load_all(cfg)?;
    let pair_indices = resolve_pairs(cfg)?;
    if pair_indices.is_empty() {
        return Err(CliError::config("need at least one pair; configure two instruments"));
    }
    let dcfg = detrend_config(cfg)?;
    let spec = surrogate_spec(cfg)?;
    let pool = parallel::pool(cfg.workers)?;

    let mut surfaces = Vec::with_capacity(pair_indices.len());
    for &(i, j) in &pair_indices {
        let (x, y) = align(&series[i], &series[j])?;
        let grid = grid_for(cfg, x.len())?;
        let mut surface = parallel::rho_surface(&pool, x.returns(), y.returns(), &grid, &dcfg)?;
        if let Some(base) = &spec {
            let pair_spec = SurrogateSpec {
                seed: substream_seed(base.seed, (i * series.len() + j) as u64),
                ..*base
            };
            let band = parallel::band(&pool, x.returns(), y.returns(), &pair_spec, |a, b| {
                rhoq_core::detrended::rho_q(a, b, &grid, &dcfg)
                    .map(|s| s.flat())
                    .map_err(|e| rhoq_core::stats::StatsError::StatisticFailed {
                        realization: 0,
                        message: e.to_string(),
                    })
            })?;
            let n_s = grid.len();
            let sigma: Vec<Vec<f64>> = (0..dcfg.q_values().len())
                .map(|qi| band.sigma[qi * n_s..(qi + 1) * n_s].to_vec())
                .collect();
            surface.band_sigma = Some(sigma);
        }
        surfaces.push(SurfaceBody {
            pair: format!("{}:{}", x.instrument_id(), y.instrument_id()),
            n_samples: x.len(),
            q_values: surface.q_values.clone(),
            scales: surface.scales.clone(),
            rho: surface.rho.clone(),
            band_sigma: surface.band_sigma.clone(),
        });
    }

    let mut written = Vec::new();
    if cfg.format.wants_csv() {
        let mut csv = csv_preamble("rho", cfg);
        let _ = writeln!(csv, "pair,q,s,rho,band_sigma");
        for s in &surfaces {
            for (qi, &q) in s.q_values.iter().enumerate() {
                for (si, &scale) in s.scales.iter().enumerate() {
                    let sigma = s.band_sigma.as_ref().map(|b| b[qi][si]);
                    let _ = writeln!(
                        csv,
                        "{},{},{},{},{}",
                        s.pair,
                        q,
                        scale,
                        s.rho[qi][si],
                        fmt_opt(sigma)
                    );
                }
            }
        }
        written.push(write_output(&cfg.out_dir, "rho.csv", &csv)?);
    }
    if cfg.format.wants_json() {
        let json = to_json_string(&envelope("rho", cfg, RhoBody { surfaces }))?;
        written.push(write_output(&cfg.out_dir, "rho.json", &json)?);
    }
    Ok(written)
}

// --- rolling -----------------------------------------------------------------

#[derive(Serialize)]
struct RollingPairBody {
    pair: String,
    window_ends: Vec<String>,
    n_samples: Vec<usize>,
    q_values: Vec<f64>,
    scales: Vec<usize>,
    /// Indexed [window][q][scale]; null for short windows.
    rho: Vec<Vec<Vec<Option<f64>>>>,
}

#[derive(Serialize)]
struct RollingBody {
    window_ms: i64,
    step_ms: i64,
    results: Vec<RollingPairBody>,
}

pub fn cmd_rolling(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let series = load_all(cfg)?;
    let pair_indices = resolve_pairs(cfg)?;
    if pair_indices.is_empty() {
        return Err(CliError::config("need at least one pair; configure two instruments"));
    }
    let dcfg = detrend_config(cfg)?;
    let spec = RollingSpec::new(cfg.window_ms, cfg.step_ms, cfg.rolling_scales.clone())?;
    let pool = parallel::pool(cfg.workers)?;

    let mut results = Vec::with_capacity(pair_indices.len());
    for &(i, j) in &pair_indices {
        let (x, y) = align(&series[i], &series[j])?;
        let rolled = parallel::rolling(&pool, &x, &y, &spec, &dcfg)?;
        results.push(RollingPairBody {
            pair: format!("{}:{}", x.instrument_id(), y.instrument_id()),
            window_ends: rolled
                .window_ends
                .iter()
                .map(|&t| timebase::format_timestamp(t))
                .collect(),
            n_samples: rolled.n_samples.clone(),
            q_values: rolled.q_values.clone(),
            scales: rolled.scales.clone(),
            rho: rolled.rho.clone(),
        });
    }

    let mut written = Vec::new();
    if cfg.format.wants_csv() {
        let mut csv = csv_preamble("rolling", cfg);
        let _ = writeln!(csv, "window_end,pair,q,s,rho,n_samples");
        for r in &results {
            for (w, end) in r.window_ends.iter().enumerate() {
                for (qi, &q) in r.q_values.iter().enumerate() {
                    for (si, &scale) in r.scales.iter().enumerate() {
                        let _ = writeln!(
                            csv,
                            "{},{},{},{},{},{}",
                            end,
                            r.pair,
                            q,
                            scale,
                            fmt_opt(r.rho[w][qi][si]),
                            r.n_samples[w]
                        );
                    }
                }
            }
        }
        written.push(write_output(&cfg.out_dir, "rolling.csv", &csv)?);
    }
    if cfg.format.wants_json() {
        let body = RollingBody {
            window_ms: cfg.window_ms,
            step_ms: cfg.step_ms,
            results,
        };
        let json = to_json_string(&envelope("rolling", cfg, body))?;
        written.push(write_output(&cfg.out_dir, "rolling.json", &json)?);
    }
    Ok(written)
}

// --- events --------------------------------------------------------------------

#[derive(Serialize)]
struct EventTraceBody {
    anchor: String,
    instrument: String,
    timestamps: Vec<String>,
    cumulative: Vec<f64>,
}

#[derive(Serialize)]
struct EventsBody {
    before_ms: i64,
    after_ms: i64,
    traces: Vec<EventTraceBody>,
}

pub fn cmd_events(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    if cfg.anchors.is_empty() {
        return Err(CliError::config("events needs at least one anchor"));
    }
    let series = load_all(cfg)?;

    let mut traces = Vec::new();
    for &anchor in &cfg.anchors {
        for s in &series {
            let window = event_window(s, anchor, cfg.before_ms, cfg.after_ms).map_err(|e| {
                CliError::data(format!(
                    "instrument `{}`, anchor {}: {e}",
                    s.instrument_id(),
                    timebase::format_timestamp(anchor)
                ))
            })?;
            traces.push(EventTraceBody {
                anchor: timebase::format_timestamp(anchor),
                instrument: s.instrument_id().to_string(),
                timestamps: window
                    .timestamps
                    .iter()
                    .map(|&t| timebase::format_timestamp(t))
                    .collect(),
                cumulative: window.cumulative,
            });
        }
    }

    let mut written = Vec::new();
    if cfg.format.wants_csv() {
        let mut csv = csv_preamble("events", cfg);
        let _ = writeln!(csv, "anchor,instrument,timestamp,cum_return");
        for t in &traces {
            for (ts, c) in t.timestamps.iter().zip(&t.cumulative) {
                let _ = writeln!(csv, "{},{},{},{}", t.anchor, t.instrument, ts, c);
            }
        }
        written.push(write_output(&cfg.out_dir, "events.csv", &csv)?);
    }
    if cfg.format.wants_json() {
        let body = EventsBody {
            before_ms: cfg.before_ms,
            after_ms: cfg.after_ms,
            traces,
        };
        let json = to_json_string(&envelope("events", cfg, body))?;
        written.push(write_output(&cfg.out_dir, "events.json", &json)?);
    }
    Ok(written)
}

// --- diag ------------------------------------------------------------------------

#[derive(Serialize)]
struct DiagRow {
    instrument: String,
    n: usize,
    jb: f64,
    skewness: f64,
    kurtosis: f64,
    jb_crit_1pct: f64,
    jb_reject: bool,
    arch_lm: f64,
    arch_r_squared: f64,
    arch_lags: usize,
    arch_crit_1pct: f64,
    arch_reject: bool,
}

#[derive(Serialize)]
struct DiagBody {
    rows: Vec<DiagRow>,
}

pub fn cmd_diag(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let series = load_all(cfg)?;
    let jb_crit = chi_squared_crit_1pct(2).expect("dof 2 tabulated");
    let arch_crit = chi_squared_crit_1pct(cfg.lags).ok_or_else(|| {
        CliError::config(format!(
            "no tabulated 1% critical value for {} lags (max 24)",
            cfg.lags
        ))
    })?;

    let mut rows = Vec::with_capacity(series.len());
    for s in &series {
        let jb = jarque_bera(s.returns())
            .map_err(|e| CliError::numeric(format!("JB on `{}`: {e}", s.instrument_id())))?;
        let arch = arch_lm(s.returns(), cfg.lags)
            .map_err(|e| CliError::numeric(format!("ARCH LM on `{}`: {e}", s.instrument_id())))?;
        rows.push(DiagRow {
            instrument: s.instrument_id().to_string(),
            n: s.len(),
            jb: jb.statistic,
            skewness: jb.skewness,
            kurtosis: jb.kurtosis,
            jb_crit_1pct: jb_crit,
            jb_reject: jb.statistic > jb_crit,
            arch_lm: arch.statistic,
            arch_r_squared: arch.r_squared,
            arch_lags: cfg.lags,
            arch_crit_1pct: arch_crit,
            arch_reject: arch.statistic > arch_crit,
        });
    }

    let mut written = Vec::new();
    if cfg.format.wants_csv() {
        let mut csv = csv_preamble("diag", cfg);
        let _ = writeln!(
            csv,
            "instrument,n,jb,skewness,kurtosis,jb_crit_1pct,jb_reject,arch_lm,arch_r_squared,arch_lags,arch_crit_1pct,arch_reject"
        );
        for r in &rows {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.instrument,
                r.n,
                r.jb,
                r.skewness,
                r.kurtosis,
                r.jb_crit_1pct,
                r.jb_reject,
                r.arch_lm,
                r.arch_r_squared,
                r.arch_lags,
                r.arch_crit_1pct,
                r.arch_reject
            );
        }
        written.push(write_output(&cfg.out_dir, "diag.csv", &csv)?);
    }
    if cfg.format.wants_json() {
        let json = to_json_string(&envelope("diag", cfg, DiagBody { rows }))?;
        written.push(write_output(&cfg.out_dir, "diag.json", &json)?);
    }
    Ok(written)
}

// --- synth ---------------------------------------------------------------------

/// Parameters for the synth command, resolved from its flags.
#[derive(Debug, Clone, Serialize)]
pub struct SynthRequest {
    pub kind: String,
    pub len: usize,
    pub seed: u64,
    pub rho0: Option<f64>,
    pub phi: Option<f64>,
    pub dof: Option<f64>,
    pub omega: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub split: Option<usize>,
    pub ids: Vec<String>,
    pub dt_s: i64,
    pub t0_ms: i64,
    pub out_dir: PathBuf,
}

#[derive(Serialize)]
struct SynthManifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    rng_algorithm: &'static str,
    request: &'a SynthRequest,
    files: Vec<String>,
}

impl SynthRequest {
    fn generator(&self) -> Result<GeneratorSpec, CliError> {
        let need = |opt: Option<f64>, name: &str| {
            opt.ok_or_else(|| CliError::config(format!("synth kind `{}` needs --{name}", self.kind)))
        };
        Ok(match self.kind.as_str() {
            "gaussian_pair" => GeneratorSpec::GaussianPair {
                rho0: need(self.rho0, "rho0")?,
                len: self.len,
                seed: self.seed,
            },
            "ar1" => GeneratorSpec::Ar1 {
                phi: need(self.phi, "phi")?,
                len: self.len,
                seed: self.seed,
            },
            "student_t" => GeneratorSpec::StudentT {
                dof: need(self.dof, "dof")?,
                len: self.len,
                seed: self.seed,
            },
            "garch_like" => GeneratorSpec::GarchLike {
                omega: self.omega.unwrap_or(0.1),
                alpha: self.alpha.unwrap_or(0.2),
                beta: self.beta.unwrap_or(0.7),
                len: self.len,
                seed: self.seed,
            },
            "two_regime_pair" => GeneratorSpec::TwoRegimePair {
                len: self.len,
                split: self.split.unwrap_or(self.len / 2),
                seed: self.seed,
            },
            other => {
                return Err(CliError::config(format!(
                    "unknown synth kind `{other}` (expected gaussian_pair, ar1, student_t, garch_like or two_regime_pair)"
                )))
            }
        })
    }
}

pub fn cmd_synth(request: &SynthRequest) -> Result<Vec<PathBuf>, CliError> {
    let generated = request.generator()?.generate()?;
    let series_list: Vec<Vec<f64>> = match generated {
        Generated::Series(v) => vec![v],
        Generated::Pair(a, b) => vec![a, b],
    };
    if request.ids.len() < series_list.len() {
        return Err(CliError::config(format!(
            "synth kind `{}` produces {} series but only {} ids given",
            request.kind,
            series_list.len(),
            request.ids.len()
        )));
    }

    let mut written = Vec::new();
    let mut files = Vec::new();
    for (values, id) in series_list.into_iter().zip(&request.ids) {
        let n = values.len();
        let series = ReturnSeries::from_parts(id, request.t0_ms, request.dt_s, values, vec![false; n])
            .map_err(CliError::from)?;
        let name = format!("{id}.csv");
        written.push(write_output(&request.out_dir, &name, &series.to_csv())?);
        files.push(name);
    }
    let manifest = SynthManifest {
        tool: TOOL,
        version: VERSION,
        command: "synth",
        rng_algorithm: ALGORITHM_ID,
        request,
        files,
    };
    written.push(write_output(
        &request.out_dir,
        "synth_manifest.json",
        &to_json_string(&manifest)?,
    )?);
    Ok(written)
}
