//! Run configuration: a flat key = value file, command-line overrides and the
//! resolved settings echoed into every output.
//!
//! File schema (one `key = value` per line, `#` comments, keys repeatable
//! where noted):
//!
//! ```text
//! instrument = BTC data/btc.csv    # repeatable: id, whitespace, path
//! pairs      = BTC:NQ100,ETH:NQ100 # optional; default all instrument pairs
//! dt         = 10s                 # sampling interval
//! calendar   = standard            # standard | 24x7
//! drop_breaks = false              # drop returns spanning session breaks
//! m          = 2                   # detrending order
//! q          = 1,2,4
//! smin       = 12
//! smax       = 32000               # default min(32000, T/4)
//! spoints    = 24
//! surrogates = 100                 # 0 disables bands
//! band_k     = 1
//! shuffle    = both                # both | first
//! seed       = 42
//! workers    = 0                   # 0 = all cores
//! window     = 5d
//! step       = 1d
//! rolling_scales = 12,360
//! anchor     = 2022-10-13T12:30:00Z  # repeatable
//! before     = 60s
//! after      = 300s
//! lags       = 5
//! out        = out
//! format     = both                # csv | json | both
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use rhoq_core::ingest::SessionCalendar;
use rhoq_core::stats::ShuffleMode;
use rhoq_core::timebase;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

impl OutputFormat {
    pub fn wants_csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    pub fn wants_json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CalendarChoice {
    #[serde(rename = "standard")]
    Standard,
    #[serde(rename = "24x7")]
    AlwaysOpen,
}

impl CalendarChoice {
    pub fn build(self) -> SessionCalendar {
        match self {
            CalendarChoice::Standard => SessionCalendar::standard_week(),
            CalendarChoice::AlwaysOpen => SessionCalendar::always_open(),
        }
    }
}

/// Fully resolved run configuration. Serialized verbatim into every output as
/// the config echo; feeding the echo back as a config file reproduces the run.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    /// (instrument id, input path) in listing order.
    pub instruments: Vec<(String, PathBuf)>,
    /// Explicit pair selection; all unordered pairs when absent.
    pub pairs: Option<Vec<(String, String)>>,
    pub dt_s: i64,
    pub calendar: CalendarChoice,
    pub drop_breaks: bool,
    pub order: usize,
    pub q_values: Vec<f64>,
    pub smin: usize,
    pub smax: Option<usize>,
    pub spoints: usize,
    pub surrogates: usize,
    pub band_k: f64,
    #[serde(serialize_with = "serialize_shuffle")]
    pub shuffle_mode: ShuffleMode,
    pub seed: u64,
    /// Worker threads; affects wall time only, so it is excluded from the
    /// config echo to keep outputs byte-identical at any worker count.
    #[serde(skip)]
    pub workers: usize,
    pub window_ms: i64,
    pub step_ms: i64,
    pub rolling_scales: Vec<usize>,
    /// Event anchors, epoch ms UTC.
    pub anchors: Vec<i64>,
    pub before_ms: i64,
    pub after_ms: i64,
    pub lags: usize,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
}

fn serialize_shuffle<S: serde::Serializer>(m: &ShuffleMode, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(match m {
        ShuffleMode::Both => "both",
        ShuffleMode::FirstOnly => "first",
    })
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            instruments: Vec::new(),
            pairs: None,
            dt_s: 10,
            calendar: CalendarChoice::Standard,
            drop_breaks: false,
            order: 2,
            q_values: vec![1.0, 2.0, 4.0],
            smin: 12,
            smax: None,
            spoints: 24,
            surrogates: 100,
            band_k: 1.0,
            shuffle_mode: ShuffleMode::Both,
            seed: 0,
            workers: 0,
            window_ms: 5 * timebase::MS_PER_DAY,
            step_ms: timebase::MS_PER_DAY,
            rolling_scales: vec![12, 360],
            anchors: Vec::new(),
            before_ms: 60 * timebase::MS_PER_SEC,
            after_ms: 300 * timebase::MS_PER_SEC,
            lags: 5,
            out_dir: PathBuf::from("out"),
            format: OutputFormat::Both,
        }
    }
}

/// Raw assignments from a config file or command line, before resolution.
#[derive(Debug, Clone, Default)]
pub struct ConfigDraft {
    pub values: BTreeMap<String, String>,
    pub instruments: Vec<String>,
    pub anchors: Vec<String>,
}

const KNOWN_KEYS: &[&str] = &[
    "after", "band_k", "before", "calendar", "drop_breaks", "dt", "format", "lags", "m", "out",
    "pairs", "q", "rolling_scales", "seed", "shuffle", "smax", "smin", "spoints", "step",
    "surrogates", "window", "workers",
];

impl ConfigDraft {
    /// Parse the flat key = value format.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut draft = ConfigDraft::default();
        for (index, raw) in text.lines().enumerate() {
            let line_no = index + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("line {line_no}: expected key = value")))?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if value.is_empty() {
                return Err(CliError::config(format!("line {line_no}: empty value for {key}")));
            }
            match key.as_str() {
                "instrument" => draft.instruments.push(value),
                "anchor" => draft.anchors.push(value),
                k if KNOWN_KEYS.contains(&k) => {
                    draft.values.insert(key, value);
                }
                other => {
                    return Err(CliError::config(format!(
                        "line {line_no}: unknown key `{other}`"
                    )))
                }
            }
        }
        Ok(draft)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        ConfigDraft::parse(&text)
    }

    /// Later assignments win; instruments and anchors append.
    pub fn merge(&mut self, other: ConfigDraft) {
        for (k, v) in other.values {
            self.values.insert(k, v);
        }
        self.instruments.extend(other.instruments);
        self.anchors.extend(other.anchors);
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    /// Validate every assignment and produce the resolved configuration.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        for spec in &self.instruments {
            let (id, path) = spec
                .split_once(char::is_whitespace)
                .or_else(|| spec.split_once('='))
                .ok_or_else(|| {
                    CliError::config(format!("instrument `{spec}`: expected `ID PATH`"))
                })?;
            let id = id.trim();
            let path = path.trim();
            if id.is_empty() || path.is_empty() {
                return Err(CliError::config(format!("instrument `{spec}`: expected `ID PATH`")));
            }
            if cfg.instruments.iter().any(|(existing, _)| existing == id) {
                return Err(CliError::config(format!("duplicate instrument id `{id}`")));
            }
            cfg.instruments.push((id.to_string(), PathBuf::from(path)));
        }
        for anchor in &self.anchors {
            let ts = timebase::parse_timestamp(anchor)
                .ok_or_else(|| CliError::config(format!("unparseable anchor `{anchor}`")))?;
            cfg.anchors.push(ts);
        }
        for (key, value) in &self.values {
            apply_value(&mut cfg, key, value)?;
        }
        validate(&cfg)?;
        Ok(cfg)
    }
}

fn apply_value(cfg: &mut RunConfig, key: &str, value: &str) -> Result<(), CliError> {
    let bad = |what: &str| CliError::config(format!("{key} = {value}: {what}"));
    match key {
        "dt" => {
            let ms = parse_duration_ms(value).ok_or_else(|| bad("expected a duration"))?;
            if ms <= 0 || ms % 1000 != 0 {
                return Err(bad("dt must be a positive whole number of seconds"));
            }
            cfg.dt_s = ms / 1000;
        }
        "calendar" => {
            cfg.calendar = match value {
                "standard" => CalendarChoice::Standard,
                "24x7" | "always" => CalendarChoice::AlwaysOpen,
                _ => return Err(bad("expected standard or 24x7")),
            }
        }
        "drop_breaks" => cfg.drop_breaks = parse_bool(value).ok_or_else(|| bad("expected true/false"))?,
        "m" => cfg.order = value.parse().map_err(|_| bad("expected a non-negative integer"))?,
        "q" => {
            cfg.q_values = parse_f64_list(value).ok_or_else(|| bad("expected comma-separated numbers"))?;
        }
        "smin" => cfg.smin = value.parse().map_err(|_| bad("expected an integer"))?,
        "smax" => cfg.smax = Some(value.parse().map_err(|_| bad("expected an integer"))?),
        "spoints" => cfg.spoints = value.parse().map_err(|_| bad("expected an integer"))?,
        "surrogates" => cfg.surrogates = value.parse().map_err(|_| bad("expected an integer"))?,
        "band_k" => cfg.band_k = value.parse().map_err(|_| bad("expected a number"))?,
        "shuffle" => {
            cfg.shuffle_mode = match value {
                "both" => ShuffleMode::Both,
                "first" => ShuffleMode::FirstOnly,
                _ => return Err(bad("expected both or first")),
            }
        }
        "seed" => cfg.seed = value.parse().map_err(|_| bad("expected a 64-bit unsigned integer"))?,
        "workers" => cfg.workers = value.parse().map_err(|_| bad("expected an integer"))?,
        "window" => {
            cfg.window_ms = parse_duration_ms(value).ok_or_else(|| bad("expected a duration"))?
        }
        "step" => cfg.step_ms = parse_duration_ms(value).ok_or_else(|| bad("expected a duration"))?,
        "rolling_scales" => {
            cfg.rolling_scales =
                parse_usize_list(value).ok_or_else(|| bad("expected comma-separated integers"))?;
        }
        "before" => {
            cfg.before_ms = parse_duration_ms(value).ok_or_else(|| bad("expected a duration"))?
        }
        "after" => {
            cfg.after_ms = parse_duration_ms(value).ok_or_else(|| bad("expected a duration"))?
        }
        "lags" => cfg.lags = value.parse().map_err(|_| bad("expected an integer"))?,
        "out" => cfg.out_dir = PathBuf::from(value),
        "format" => {
            cfg.format = match value {
                "csv" => OutputFormat::Csv,
                "json" => OutputFormat::Json,
                "both" => OutputFormat::Both,
                _ => return Err(bad("expected csv, json or both")),
            }
        }
        "pairs" => {
            let mut pairs = Vec::new();
            for part in value.split(',') {
                let (a, b) = part
                    .split_once(':')
                    .ok_or_else(|| bad("expected ID:ID pairs"))?;
                pairs.push((a.trim().to_string(), b.trim().to_string()));
            }
            cfg.pairs = Some(pairs);
        }
        other => return Err(CliError::config(format!("unknown key `{other}`"))),
    }
    Ok(())
}

/// Configuration checks that do not need the data; enumerated before any
/// computation starts.
fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.q_values.is_empty() {
        return Err(CliError::config("q list must not be empty"));
    }
    for &q in &cfg.q_values {
        if !(q.is_finite() && q > 0.0) {
            return Err(CliError::config(format!("q values must be positive, got {q}")));
        }
    }
    if cfg.smin < cfg.order + 2 {
        return Err(CliError::config(format!(
            "smin {} below the minimum {} for order {}",
            cfg.smin,
            cfg.order + 2,
            cfg.order
        )));
    }
    if let Some(smax) = cfg.smax {
        if smax < cfg.smin {
            return Err(CliError::config(format!("smax {smax} below smin {}", cfg.smin)));
        }
    }
    if cfg.spoints == 0 {
        return Err(CliError::config("spoints must be at least 1"));
    }
    if cfg.surrogates == 1 {
        return Err(CliError::config("surrogates must be 0 (off) or at least 2"));
    }
    if !(cfg.band_k.is_finite() && cfg.band_k > 0.0) {
        return Err(CliError::config("band_k must be positive"));
    }
    if cfg.window_ms <= 0 || cfg.step_ms <= 0 || cfg.step_ms > cfg.window_ms {
        return Err(CliError::config(
            "window and step must be positive with step <= window",
        ));
    }
    if cfg.rolling_scales.is_empty() {
        return Err(CliError::config("rolling_scales must not be empty"));
    }
    if cfg.before_ms < 0 || cfg.after_ms < 0 {
        return Err(CliError::config("before/after must be non-negative"));
    }
    if cfg.lags == 0 {
        return Err(CliError::config("lags must be at least 1"));
    }
    Ok(())
}

/// Echo the resolved config in the flat file format; parsing the echo back
/// reproduces the configuration.
pub fn echo_flat(cfg: &RunConfig) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    for (id, path) in &cfg.instruments {
        let _ = writeln!(out, "instrument = {} {}", id, path.display());
    }
    if let Some(pairs) = &cfg.pairs {
        let joined: Vec<String> = pairs.iter().map(|(a, b)| format!("{a}:{b}")).collect();
        let _ = writeln!(out, "pairs = {}", joined.join(","));
    }
    let _ = writeln!(out, "dt = {}s", cfg.dt_s);
    let _ = writeln!(
        out,
        "calendar = {}",
        match cfg.calendar {
            CalendarChoice::Standard => "standard",
            CalendarChoice::AlwaysOpen => "24x7",
        }
    );
    let _ = writeln!(out, "drop_breaks = {}", cfg.drop_breaks);
    let _ = writeln!(out, "m = {}", cfg.order);
    let q: Vec<String> = cfg.q_values.iter().map(|v| v.to_string()).collect();
    let _ = writeln!(out, "q = {}", q.join(","));
    let _ = writeln!(out, "smin = {}", cfg.smin);
    if let Some(smax) = cfg.smax {
        let _ = writeln!(out, "smax = {smax}");
    }
    let _ = writeln!(out, "spoints = {}", cfg.spoints);
    let _ = writeln!(out, "surrogates = {}", cfg.surrogates);
    let _ = writeln!(out, "band_k = {}", cfg.band_k);
    let _ = writeln!(
        out,
        "shuffle = {}",
        match cfg.shuffle_mode {
            ShuffleMode::Both => "both",
            ShuffleMode::FirstOnly => "first",
        }
    );
    let _ = writeln!(out, "seed = {}", cfg.seed);
    let _ = writeln!(out, "window = {}ms", cfg.window_ms);
    let _ = writeln!(out, "step = {}ms", cfg.step_ms);
    let scales: Vec<String> = cfg.rolling_scales.iter().map(|v| v.to_string()).collect();
    let _ = writeln!(out, "rolling_scales = {}", scales.join(","));
    for anchor in &cfg.anchors {
        let _ = writeln!(out, "anchor = {}", timebase::format_timestamp(*anchor));
    }
    let _ = writeln!(out, "before = {}ms", cfg.before_ms);
    let _ = writeln!(out, "after = {}ms", cfg.after_ms);
    let _ = writeln!(out, "lags = {}", cfg.lags);
    let _ = writeln!(out, "out = {}", cfg.out_dir.display());
    let _ = writeln!(
        out,
        "format = {}",
        match cfg.format {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::Both => "both",
        }
    );
    out
}

/// Parse `500ms`, `10s`, `5m`, `2h`, `5d` or bare seconds into milliseconds.
pub fn parse_duration_ms(text: &str) -> Option<i64> {
    let text = text.trim();
    let (digits, unit) = match text.find(|c: char| !c.is_ascii_digit()) {
        Some(pos) => text.split_at(pos),
        None => (text, "s"),
    };
    let value: i64 = digits.parse().ok()?;
    let factor = match unit.trim() {
        "ms" => 1,
        "s" | "" => timebase::MS_PER_SEC,
        "m" => timebase::MS_PER_MIN,
        "h" => timebase::MS_PER_HOUR,
        "d" => timebase::MS_PER_DAY,
        _ => return None,
    };
    Some(value * factor)
}

fn parse_bool(text: &str) -> Option<bool> {
    match text {
        "true" | "yes" | "1" => Some(true),
        "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

fn parse_f64_list(text: &str) -> Option<Vec<f64>> {
    text.split(',')
        .map(|p| p.trim().parse::<f64>().ok())
        .collect()
}

fn parse_usize_list(text: &str) -> Option<Vec<usize>> {
    text.split(',')
        .map(|p| p.trim().parse::<usize>().ok())
        .collect()
}

/// Expand the configured pair selection against the instrument list.
pub fn resolve_pairs(cfg: &RunConfig) -> Result<Vec<(usize, usize)>, CliError> {
    let index_of = |id: &str| {
        cfg.instruments
            .iter()
            .position(|(known, _)| known == id)
            .ok_or_else(|| CliError::config(format!("pair references unknown instrument `{id}`")))
    };
    match &cfg.pairs {
        Some(pairs) => pairs
            .iter()
            .map(|(a, b)| {
                let (i, j) = (index_of(a)?, index_of(b)?);
                if i == j {
                    return Err(CliError::config(format!("pair `{a}:{b}` repeats an instrument")));
                }
                Ok((i, j))
            })
            .collect(),
        None => {
            let k = cfg.instruments.len();
            let mut out = Vec::with_capacity(k * (k - 1) / 2);
            for i in 0..k {
                for j in i + 1..k {
                    out.push((i, j));
                }
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_durations() {
        assert_eq!(parse_duration_ms("10s"), Some(10_000));
        assert_eq!(parse_duration_ms("10"), Some(10_000));
        assert_eq!(parse_duration_ms("5d"), Some(5 * 86_400_000));
        assert_eq!(parse_duration_ms("1d"), Some(86_400_000));
        assert_eq!(parse_duration_ms("60m"), Some(3_600_000));
        assert_eq!(parse_duration_ms("500ms"), Some(500));
        assert_eq!(parse_duration_ms("abc"), None);
        assert_eq!(parse_duration_ms("10x"), None);
    }

    #[test]
    fn parse_and_resolve_file() {
        let text = "\
            # comment\n\
            instrument = BTC data/btc.csv\n\
            instrument = NQ100 data/nq.csv\n\
            dt = 10s\n\
            q = 1,2,4\n\
            smin = 12\n\
            smax = 320\n\
            seed = 7\n\
            anchor = 2022-10-13T12:30:00Z\n\
            window = 5d\n";
        let cfg = ConfigDraft::parse(text).unwrap().resolve().unwrap();
        assert_eq!(cfg.instruments.len(), 2);
        assert_eq!(cfg.instruments[0].0, "BTC");
        assert_eq!(cfg.dt_s, 10);
        assert_eq!(cfg.q_values, vec![1.0, 2.0, 4.0]);
        assert_eq!(cfg.smax, Some(320));
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.anchors.len(), 1);
        assert_eq!(cfg.window_ms, 5 * 86_400_000);
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(ConfigDraft::parse("bogus = 1\n").is_err());
    }

    #[test]
    fn invalid_q_rejected() {
        let text = "q = 0,1\n";
        assert!(ConfigDraft::parse(text).unwrap().resolve().is_err());
        let neg = "q = -2\n";
        assert!(ConfigDraft::parse(neg).unwrap().resolve().is_err());
    }

    #[test]
    fn smin_respects_order() {
        let text = "m = 2\nsmin = 3\n";
        assert!(ConfigDraft::parse(text).unwrap().resolve().is_err());
    }

    #[test]
    fn duplicate_instrument_rejected() {
        let text = "instrument = A a.csv\ninstrument = A b.csv\n";
        assert!(ConfigDraft::parse(text).unwrap().resolve().is_err());
    }

    #[test]
    fn overrides_win() {
        let mut base = ConfigDraft::parse("seed = 1\ndt = 10s\n").unwrap();
        let over = ConfigDraft::parse("seed = 99\n").unwrap();
        base.merge(over);
        let cfg = base.resolve().unwrap();
        assert_eq!(cfg.seed, 99);
        assert_eq!(cfg.dt_s, 10);
    }

    #[test]
    fn echo_round_trips() {
        let text = "\
            instrument = BTC data/btc.csv\n\
            instrument = ETH data/eth.csv\n\
            pairs = BTC:ETH\n\
            dt = 60s\n\
            calendar = 24x7\n\
            q = 0.5,2\n\
            smin = 12\n\
            smax = 512\n\
            spoints = 8\n\
            surrogates = 50\n\
            band_k = 3\n\
            seed = 11\n\
            window = 2d\n\
            step = 1d\n\
            rolling_scales = 12,24\n\
            anchor = 2022-07-13T12:30:00Z\n\
            before = 60s\n\
            after = 5m\n\
            lags = 4\n\
            out = results\n\
            format = csv\n";
        let cfg = ConfigDraft::parse(text).unwrap().resolve().unwrap();
        let echoed = echo_flat(&cfg);
        let again = ConfigDraft::parse(&echoed).unwrap().resolve().unwrap();
        assert_eq!(format!("{cfg:?}"), format!("{again:?}"));
    }

    #[test]
    fn all_pairs_expansion() {
        let text = "\
            instrument = A a.csv\n\
            instrument = B b.csv\n\
            instrument = C c.csv\n";
        let cfg = ConfigDraft::parse(text).unwrap().resolve().unwrap();
        assert_eq!(resolve_pairs(&cfg).unwrap(), vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn named_pairs_validated() {
        let text = "\
            instrument = A a.csv\n\
            instrument = B b.csv\n\
            pairs = A:Z\n";
        let cfg = ConfigDraft::parse(text).unwrap().resolve().unwrap();
        assert!(resolve_pairs(&cfg).is_err());
    }
}
