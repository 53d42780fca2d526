//! Epoch-millisecond time arithmetic and RFC 3339 parsing/formatting.
//!
//! All timestamps in this crate are UTC epoch milliseconds (`i64`).
//! Deterministic, no wall clock, no timezone database; civil-date conversion
//! uses Howard Hinnant's algorithms.

use alloc::format;
use alloc::string::String;

pub const MS_PER_SEC: i64 = 1_000;
pub const MS_PER_MIN: i64 = 60 * MS_PER_SEC;
pub const MS_PER_HOUR: i64 = 60 * MS_PER_MIN;
pub const MS_PER_DAY: i64 = 24 * MS_PER_HOUR;
pub const MS_PER_WEEK: i64 = 7 * MS_PER_DAY;

/// Day of week for an epoch-ms timestamp, 0 = Monday .. 6 = Sunday.
///
/// 1970-01-01 was a Thursday (3 in this numbering).
pub fn weekday(ts_ms: i64) -> i64 {
    (ts_ms.div_euclid(MS_PER_DAY) + 3).rem_euclid(7)
}

/// Milliseconds since the most recent Monday 00:00:00 UTC.
pub fn ms_of_week(ts_ms: i64) -> i64 {
    weekday(ts_ms) * MS_PER_DAY + ts_ms.rem_euclid(MS_PER_DAY)
}

/// Convert days since 1970-01-01 to (year, month, day).
pub fn days_to_civil(days: i64) -> (i64, u32, u32) {
    let z = days + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z.rem_euclid(146_097);
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = doy - (153 * mp + 2) / 5 + 1;
    let m = if mp < 10 { mp + 3 } else { mp - 9 };
    (if m <= 2 { y + 1 } else { y }, m as u32, d as u32)
}

/// Convert (year, month, day) to days since 1970-01-01.
pub fn civil_to_days(y: i64, m: u32, d: u32) -> i64 {
    let y = if m <= 2 { y - 1 } else { y };
    let era = y.div_euclid(400);
    let yoe = y.rem_euclid(400);
    let mp = if m > 2 { m as i64 - 3 } else { m as i64 + 9 };
    let doy = (153 * mp + 2) / 5 + d as i64 - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}

/// Parse a UTC timestamp: RFC 3339 (`2022-01-03T14:00:00.250Z`, fractional
/// seconds and the `.fff` part optional) or plain integer epoch milliseconds.
pub fn parse_timestamp(text: &str) -> Option<i64> {
    let text = text.trim();
    if !text.is_empty() && text.bytes().all(|b| b.is_ascii_digit() || b == b'-') {
        return text.parse::<i64>().ok();
    }
    parse_rfc3339(text)
}

fn parse_rfc3339(text: &str) -> Option<i64> {
    let b = text.as_bytes();
    // Minimal form: YYYY-MM-DDTHH:MM:SSZ (20 bytes).
    if b.len() < 20 {
        return None;
    }
    let num = |range: core::ops::Range<usize>| -> Option<i64> {
        let s = text.get(range)?;
        if s.bytes().all(|c| c.is_ascii_digit()) {
            s.parse::<i64>().ok()
        } else {
            None
        }
    };
    if b[4] != b'-' || b[7] != b'-' || (b[10] != b'T' && b[10] != b' ') || b[13] != b':' || b[16] != b':'
    {
        return None;
    }
    let year = num(0..4)?;
    let month = num(5..7)?;
    let day = num(8..10)?;
    let hour = num(11..13)?;
    let minute = num(14..16)?;
    let second = num(17..19)?;
    if !(1..=12).contains(&month) || !(1..=31).contains(&day) {
        return None;
    }
    if hour > 23 || minute > 59 || second > 60 {
        return None;
    }
    let (millis, rest) = if b[19] == b'.' {
        // Up to millisecond precision; extra digits are truncated.
        let frac_end = 20 + text[20..].bytes().take_while(|c| c.is_ascii_digit()).count();
        if frac_end == 20 {
            return None;
        }
        let digits = &text[20..frac_end];
        let mut ms = 0i64;
        for (i, c) in digits.bytes().take(3).enumerate() {
            ms += (c - b'0') as i64 * [100, 10, 1][i];
        }
        (ms, &text[frac_end..])
    } else {
        (0, &text[19..])
    };
    if rest != "Z" && rest != "z" && rest != "+00:00" {
        return None;
    }
    let days = civil_to_days(year, month as u32, day as u32);
    Some(days * MS_PER_DAY + hour * MS_PER_HOUR + minute * MS_PER_MIN + second * MS_PER_SEC + millis)
}

/// Format epoch milliseconds as RFC 3339 with millisecond precision.
pub fn format_timestamp(ts_ms: i64) -> String {
    let days = ts_ms.div_euclid(MS_PER_DAY);
    let rem = ts_ms.rem_euclid(MS_PER_DAY);
    let (y, m, d) = days_to_civil(days);
    let hour = rem / MS_PER_HOUR;
    let minute = rem % MS_PER_HOUR / MS_PER_MIN;
    let second = rem % MS_PER_MIN / MS_PER_SEC;
    let ms = rem % MS_PER_SEC;
    format!("{y:04}-{m:02}-{d:02}T{hour:02}:{minute:02}:{second:02}.{ms:03}Z")
}

/// Parse `HH:MM` or `HH:MM:SS` as milliseconds from midnight.
pub fn parse_time_of_day(text: &str) -> Option<i64> {
    let mut parts = text.split(':');
    let h: i64 = parts.next()?.parse().ok()?;
    let m: i64 = parts.next()?.parse().ok()?;
    let s: i64 = match parts.next() {
        Some(p) => p.parse().ok()?,
        None => 0,
    };
    if parts.next().is_some() || h > 23 || !(0..60).contains(&m) || !(0..60).contains(&s) {
        return None;
    }
    Some(h * MS_PER_HOUR + m * MS_PER_MIN + s * MS_PER_SEC)
}
