//! Tick ingestion: parsing, session calendars, last-observation-carried-forward
//! resampling onto a uniform grid, log-returns and event windows.
//!
//! Resampling uses LOCF rather than interpolation so every grid price is a
//! realized quote. Returns that span a session break are flagged, not dropped;
//! [`drop_break_returns`] removes them explicitly when a gap-free series is
//! wanted, keeping the choice auditable.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use thiserror::Error;

use crate::timebase::{self, MS_PER_DAY, MS_PER_HOUR, MS_PER_MIN, MS_PER_SEC, MS_PER_WEEK};

#[derive(Debug, Error, PartialEq)]
pub enum IngestError {
    #[error("line {line}: malformed row: {message}")]
    MalformedRow { line: usize, message: String },
    #[error("line {line}: price must be positive")]
    NonPositivePrice { line: usize },
    #[error("line {line}: timestamp not strictly increasing")]
    NonMonotoneTimestamp { line: usize },
    #[error("missing header line: {expected}")]
    MissingHeader { expected: &'static str },
    #[error("tick series is empty")]
    EmptyTicks,
    #[error("sampling interval must be positive, got {0} s")]
    InvalidInterval(i64),
    #[error("no grid points inside the session calendar")]
    EmptyGrid,
    #[error("no tick at or before the first grid point")]
    NoTickBeforeGrid,
    #[error("need at least {need} grid points, got {have}")]
    TooFewPoints { have: usize, need: usize },
    #[error("event window does not intersect the series")]
    EmptyWindow,
    #[error("invalid calendar: {0}")]
    InvalidCalendar(&'static str),
    #[error("return {index} is not finite")]
    NonFiniteReturn { index: usize },
    #[error("break flags length {flags} does not match returns length {returns}")]
    FlagLengthMismatch { flags: usize, returns: usize },
}

/// Irregular timestamped price quotes for one instrument.
///
/// Timestamps are UTC epoch milliseconds, strictly increasing; prices are
/// positive and finite.
#[derive(Debug, Clone, PartialEq)]
pub struct TickSeries {
    instrument_id: String,
    ticks: Vec<(i64, f64)>,
}

impl TickSeries {
    pub fn new(instrument_id: &str, ticks: Vec<(i64, f64)>) -> Result<Self, IngestError> {
        for (i, window) in ticks.windows(2).enumerate() {
            if window[1].0 <= window[0].0 {
                return Err(IngestError::NonMonotoneTimestamp { line: i + 2 });
            }
        }
        for (i, &(_, price)) in ticks.iter().enumerate() {
            if !(price.is_finite() && price > 0.0) {
                return Err(IngestError::NonPositivePrice { line: i + 2 });
            }
        }
        Ok(TickSeries {
            instrument_id: instrument_id.to_string(),
            ticks,
        })
    }

    pub fn instrument_id(&self) -> &str {
        &self.instrument_id
    }

    pub fn ticks(&self) -> &[(i64, f64)] {
        &self.ticks
    }

    pub fn len(&self) -> usize {
        self.ticks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ticks.is_empty()
    }
}

pub const TICK_CSV_HEADER: &str = "timestamp,price";

/// Parse the tick CSV format: a `timestamp,price` header, then one quote per
/// line with an RFC 3339 UTC or epoch-millisecond timestamp and a decimal
/// price. An empty input yields an empty series.
pub fn parse_ticks(text: &str, instrument_id: &str) -> Result<TickSeries, IngestError> {
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            None => return TickSeries::new(instrument_id, Vec::new()),
            Some((_, line)) if line.trim().is_empty() => continue,
            Some((_, line)) => break line,
        }
    };
    if header.trim() != TICK_CSV_HEADER {
        return Err(IngestError::MissingHeader {
            expected: TICK_CSV_HEADER,
        });
    }
    let mut ticks = Vec::new();
    let mut prev_ts = i64::MIN;
    for (index, raw) in lines {
        let line_no = index + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (ts_text, price_text) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(IngestError::MalformedRow {
                    line: line_no,
                    message: "expected exactly 2 comma-separated fields".to_string(),
                })
            }
        };
        let ts = timebase::parse_timestamp(ts_text).ok_or_else(|| IngestError::MalformedRow {
            line: line_no,
            message: "unparseable timestamp".to_string(),
        })?;
        let price: f64 = price_text
            .trim()
            .parse()
            .map_err(|_| IngestError::MalformedRow {
                line: line_no,
                message: "unparseable price".to_string(),
            })?;
        if !(price.is_finite() && price > 0.0) {
            return Err(IngestError::NonPositivePrice { line: line_no });
        }
        if ts <= prev_ts {
            return Err(IngestError::NonMonotoneTimestamp { line: line_no });
        }
        prev_ts = ts;
        ticks.push((ts, price));
    }
    TickSeries::new(instrument_id, ticks)
}

/// Weekly trading-session rules evaluated in UTC: one open span per week
/// (possibly wrapping the weekend) plus daily break intervals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionCalendar {
    /// Millisecond of week (Monday 00:00 = 0) when the session opens.
    week_open: i64,
    /// Millisecond of week when the session closes.
    week_close: i64,
    /// Half-open [start, end) daily break intervals in milliseconds of day.
    daily_breaks: Vec<(i64, i64)>,
}

impl SessionCalendar {
    /// `week_open`/`week_close` in milliseconds of week (Monday 00:00 = 0).
    /// Opens at the open instant, closes just before the close instant; a
    /// session may wrap past the end of the week.
    pub fn new(
        week_open: i64,
        week_close: i64,
        mut daily_breaks: Vec<(i64, i64)>,
    ) -> Result<Self, IngestError> {
        if !(0..MS_PER_WEEK).contains(&week_open) || !(0..MS_PER_WEEK).contains(&week_close) {
            return Err(IngestError::InvalidCalendar("open/close outside the week"));
        }
        daily_breaks.sort_unstable();
        for b in &daily_breaks {
            if !(0 <= b.0 && b.0 < b.1 && b.1 <= MS_PER_DAY) {
                return Err(IngestError::InvalidCalendar("break interval outside a day"));
            }
        }
        for pair in daily_breaks.windows(2) {
            if pair[1].0 < pair[0].1 {
                return Err(IngestError::InvalidCalendar("break intervals overlap"));
            }
        }
        Ok(SessionCalendar {
            week_open,
            week_close,
            daily_breaks,
        })
    }

    /// 24/7 session with no breaks.
    pub fn always_open() -> Self {
        SessionCalendar {
            week_open: 0,
            week_close: 0,
            daily_breaks: Vec::new(),
        }
    }

    /// The CFD-venue week: Sunday 22:00 UTC open to Friday 20:15 UTC close,
    /// with a 20:15-22:00 UTC break on each trading day.
    pub fn standard_week() -> Self {
        let sunday_2200 = 6 * MS_PER_DAY + 22 * MS_PER_HOUR;
        let friday_2015 = 4 * MS_PER_DAY + 20 * MS_PER_HOUR + 15 * MS_PER_MIN;
        SessionCalendar::new(
            sunday_2200,
            friday_2015,
            alloc::vec![(
                20 * MS_PER_HOUR + 15 * MS_PER_MIN,
                22 * MS_PER_HOUR
            )],
        )
        .expect("static calendar is valid")
    }

    /// Whether the instant falls inside the trading session.
    pub fn is_open(&self, ts_ms: i64) -> bool {
        let week = timebase::ms_of_week(ts_ms);
        let in_week = if self.week_open == self.week_close {
            true // degenerate spec means always within the weekly span
        } else if self.week_open < self.week_close {
            (self.week_open..self.week_close).contains(&week)
        } else {
            week >= self.week_open || week < self.week_close
        };
        if !in_week {
            return false;
        }
        let day = ts_ms.rem_euclid(MS_PER_DAY);
        !self
            .daily_breaks
            .iter()
            .any(|&(start, end)| (start..end).contains(&day))
    }
}

/// Uniform-interval LOCF prices: the output of [`resample`].
#[derive(Debug, Clone, PartialEq)]
pub struct PriceGrid {
    pub instrument_id: String,
    /// Sampling interval in seconds.
    pub dt_s: i64,
    /// Grid timestamps (epoch ms), strictly increasing, in-session only.
    pub timestamps: Vec<i64>,
    pub prices: Vec<f64>,
}

impl PriceGrid {
    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }
}

/// Sample ticks onto a uniform `dt_s`-second grid with the last observation
/// carried forward.
///
/// The grid runs over multiples of `dt_s` from the first tick rounded up to
/// the last tick rounded up; grid points outside the session calendar are
/// skipped. Each grid point carries the last tick price at or before it.
pub fn resample(
    ticks: &TickSeries,
    dt_s: i64,
    calendar: &SessionCalendar,
) -> Result<PriceGrid, IngestError> {
    if ticks.is_empty() {
        return Err(IngestError::EmptyTicks);
    }
    if dt_s <= 0 {
        return Err(IngestError::InvalidInterval(dt_s));
    }
    let dt_ms = dt_s * MS_PER_SEC;
    let quotes = ticks.ticks();
    let first = quotes[0].0;
    let last = quotes[quotes.len() - 1].0;
    let start = first.div_euclid(dt_ms) * dt_ms + if first.rem_euclid(dt_ms) == 0 { 0 } else { dt_ms };
    let end = last.div_euclid(dt_ms) * dt_ms + if last.rem_euclid(dt_ms) == 0 { 0 } else { dt_ms };

    let mut timestamps = Vec::new();
    let mut prices = Vec::new();
    let mut cursor = 0usize; // index of the next tick strictly after the grid point
    let mut t = start;
    while t <= end {
        if calendar.is_open(t) {
            while cursor < quotes.len() && quotes[cursor].0 <= t {
                cursor += 1;
            }
            if cursor == 0 {
                return Err(IngestError::NoTickBeforeGrid);
            }
            timestamps.push(t);
            prices.push(quotes[cursor - 1].1);
        }
        t += dt_ms;
    }
    if timestamps.is_empty() {
        return Err(IngestError::EmptyGrid);
    }
    Ok(PriceGrid {
        instrument_id: ticks.instrument_id().to_string(),
        dt_s,
        timestamps,
        prices,
    })
}

/// Uniform-interval log returns with session-boundary metadata.
///
/// `returns[m] = ln(price[m+1]) - ln(price[m])`; each return is timestamped at
/// the start of its interval and flagged when the interval spans a calendar
/// gap (i.e. the two grid points are more than one step apart).
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    instrument_id: String,
    t0: i64,
    dt_s: i64,
    /// Interval-start timestamp of every return (epoch ms).
    timestamps: Vec<i64>,
    returns: Vec<f64>,
    break_flags: Vec<bool>,
}

impl ReturnSeries {
    /// Build a gap-free series on the grid `t0 + m * dt`; flags mark returns
    /// that spanned a session break in the source data.
    pub fn from_parts(
        instrument_id: &str,
        t0: i64,
        dt_s: i64,
        returns: Vec<f64>,
        break_flags: Vec<bool>,
    ) -> Result<Self, IngestError> {
        if dt_s <= 0 {
            return Err(IngestError::InvalidInterval(dt_s));
        }
        if break_flags.len() != returns.len() {
            return Err(IngestError::FlagLengthMismatch {
                flags: break_flags.len(),
                returns: returns.len(),
            });
        }
        for (index, r) in returns.iter().enumerate() {
            if !r.is_finite() {
                return Err(IngestError::NonFiniteReturn { index });
            }
        }
        let dt_ms = dt_s * MS_PER_SEC;
        let timestamps = (0..returns.len() as i64).map(|m| t0 + m * dt_ms).collect();
        Ok(ReturnSeries {
            instrument_id: instrument_id.to_string(),
            t0,
            dt_s,
            timestamps,
            returns,
            break_flags,
        })
    }

    pub(crate) fn from_raw(
        instrument_id: String,
        dt_s: i64,
        timestamps: Vec<i64>,
        returns: Vec<f64>,
        break_flags: Vec<bool>,
    ) -> Self {
        let t0 = timestamps.first().copied().unwrap_or(0);
        ReturnSeries {
            instrument_id,
            t0,
            dt_s,
            timestamps,
            returns,
            break_flags,
        }
    }

    pub fn instrument_id(&self) -> &str {
        &self.instrument_id
    }

    pub fn t0(&self) -> i64 {
        self.t0
    }

    pub fn dt_s(&self) -> i64 {
        self.dt_s
    }

    pub fn dt_ms(&self) -> i64 {
        self.dt_s * MS_PER_SEC
    }

    pub fn timestamps(&self) -> &[i64] {
        &self.timestamps
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    pub fn break_flags(&self) -> &[bool] {
        &self.break_flags
    }

    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }

    /// End of the last return interval (epoch ms); `t0` for an empty series.
    pub fn end_ms(&self) -> i64 {
        match self.timestamps.last() {
            Some(&t) => t + self.dt_ms(),
            None => self.t0,
        }
    }

    /// Copy of the returns in `range`, re-anchored at the first kept sample.
    pub fn slice(&self, range: core::ops::Range<usize>) -> ReturnSeries {
        ReturnSeries::from_raw(
            self.instrument_id.clone(),
            self.dt_s,
            self.timestamps[range.clone()].to_vec(),
            self.returns[range.clone()].to_vec(),
            self.break_flags[range].to_vec(),
        )
    }

    /// Serialize to the return-series CSV format:
    ///
    /// ```text
    /// t0,dt
    /// <RFC 3339 timestamp>,<seconds>
    /// return,break_flag
    /// <value>,<0|1>
    /// ```
    pub fn to_csv(&self) -> String {
        use core::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(out, "t0,dt");
        let _ = writeln!(out, "{},{}", timebase::format_timestamp(self.t0), self.dt_s);
        let _ = writeln!(out, "return,break_flag");
        for (r, f) in self.returns.iter().zip(&self.break_flags) {
            let _ = writeln!(out, "{},{}", r, u8::from(*f));
        }
        out
    }

    /// Parse the return-series CSV format. The wall-clock grid is
    /// reconstructed as `t0 + m * dt`; gap durations are not stored in the
    /// format, so deserialized series are gap-free in wall-clock terms with
    /// break positions preserved via the flags.
    pub fn from_csv(text: &str, instrument_id: &str) -> Result<Self, IngestError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(IngestError::MissingHeader { expected: "t0,dt" })?;
        if header.trim() != "t0,dt" {
            return Err(IngestError::MissingHeader { expected: "t0,dt" });
        }
        let (line_no, values) = lines.next().ok_or(IngestError::MissingHeader { expected: "t0,dt values" })?;
        let mut fields = values.trim().split(',');
        let (t0_text, dt_text) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(IngestError::MalformedRow {
                    line: line_no + 1,
                    message: "expected t0,dt values".to_string(),
                })
            }
        };
        let t0 = timebase::parse_timestamp(t0_text).ok_or_else(|| IngestError::MalformedRow {
            line: line_no + 1,
            message: "unparseable t0".to_string(),
        })?;
        let dt_s: i64 = dt_text.trim().parse().map_err(|_| IngestError::MalformedRow {
            line: line_no + 1,
            message: "unparseable dt".to_string(),
        })?;
        let (_, columns) = lines.next().ok_or(IngestError::MissingHeader {
            expected: "return,break_flag",
        })?;
        if columns.trim() != "return,break_flag" {
            return Err(IngestError::MissingHeader {
                expected: "return,break_flag",
            });
        }
        let mut returns = Vec::new();
        let mut flags = Vec::new();
        for (index, raw) in lines {
            let line_no = index + 1;
            let mut fields = raw.trim().split(',');
            let (r_text, f_text) = match (fields.next(), fields.next(), fields.next()) {
                (Some(a), Some(b), None) => (a, b),
                _ => {
                    return Err(IngestError::MalformedRow {
                        line: line_no,
                        message: "expected return,break_flag".to_string(),
                    })
                }
            };
            let r: f64 = r_text.trim().parse().map_err(|_| IngestError::MalformedRow {
                line: line_no,
                message: "unparseable return".to_string(),
            })?;
            let f = match f_text.trim() {
                "0" => false,
                "1" => true,
                _ => {
                    return Err(IngestError::MalformedRow {
                        line: line_no,
                        message: "break flag must be 0 or 1".to_string(),
                    })
                }
            };
            returns.push(r);
            flags.push(f);
        }
        ReturnSeries::from_parts(instrument_id, t0, dt_s, returns, flags)
    }
}

/// Log returns of a uniform price grid.
pub fn log_returns(grid: &PriceGrid) -> Result<ReturnSeries, IngestError> {
    if grid.len() < 2 {
        return Err(IngestError::TooFewPoints {
            have: grid.len(),
            need: 2,
        });
    }
    let dt_ms = grid.dt_s * MS_PER_SEC;
    let n = grid.len() - 1;
    let mut returns = Vec::with_capacity(n);
    let mut flags = Vec::with_capacity(n);
    let mut timestamps = Vec::with_capacity(n);
    for m in 0..n {
        returns.push(libm::log(grid.prices[m + 1]) - libm::log(grid.prices[m]));
        flags.push(grid.timestamps[m + 1] - grid.timestamps[m] > dt_ms);
        timestamps.push(grid.timestamps[m]);
    }
    Ok(ReturnSeries::from_raw(
        grid.instrument_id.clone(),
        grid.dt_s,
        timestamps,
        returns,
        flags,
    ))
}

/// Running sums of the returns; same length as the input.
pub fn cumulative_returns(series: &ReturnSeries) -> Vec<f64> {
    let mut out = Vec::with_capacity(series.len());
    let mut acc = 0.0;
    for r in series.returns() {
        acc += r;
        out.push(acc);
    }
    out
}

/// Cumulative returns in a window around an anchor, re-based to zero at the
/// window start.
#[derive(Debug, Clone, PartialEq)]
pub struct EventWindow {
    /// First entry is the window base point with value 0; entry k > 0 is the
    /// end instant of the k-th selected return.
    pub timestamps: Vec<i64>,
    pub cumulative: Vec<f64>,
}

/// Select the returns whose whole interval lies inside
/// `[anchor - before, anchor + after]` and cumulate them from zero.
pub fn event_window(
    series: &ReturnSeries,
    anchor_ms: i64,
    before_ms: i64,
    after_ms: i64,
) -> Result<EventWindow, IngestError> {
    let lo = anchor_ms - before_ms;
    let hi = anchor_ms + after_ms;
    let ts = series.timestamps();
    let n = series.len();
    let interval_end = |m: usize| -> i64 {
        if m + 1 < n {
            ts[m + 1]
        } else {
            ts[m] + series.dt_ms()
        }
    };
    let first = ts.partition_point(|&t| t < lo);
    let mut last = first;
    while last < n && interval_end(last) <= hi {
        last += 1;
    }
    if first >= last {
        return Err(IngestError::EmptyWindow);
    }
    let mut timestamps = Vec::with_capacity(last - first + 1);
    let mut cumulative = Vec::with_capacity(last - first + 1);
    timestamps.push(ts[first]);
    cumulative.push(0.0);
    let mut acc = 0.0;
    for m in first..last {
        acc += series.returns()[m];
        timestamps.push(interval_end(m));
        cumulative.push(acc);
    }
    Ok(EventWindow {
        timestamps,
        cumulative,
    })
}

/// Remove flagged returns, re-index the remainder and report the count.
pub fn drop_break_returns(series: &ReturnSeries) -> (ReturnSeries, usize) {
    let mut timestamps = Vec::new();
    let mut returns = Vec::new();
    let mut dropped = 0usize;
    for m in 0..series.len() {
        if series.break_flags()[m] {
            dropped += 1;
        } else {
            timestamps.push(series.timestamps()[m]);
            returns.push(series.returns()[m]);
        }
    }
    let flags = alloc::vec![false; returns.len()];
    (
        ReturnSeries::from_raw(
            series.instrument_id().to_string(),
            series.dt_s(),
            timestamps,
            returns,
            flags,
        ),
        dropped,
    )
}
