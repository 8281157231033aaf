//! Axis labels to axis kind and scale.

use chrono::{Datelike, NaiveDate};

use crate::model::{AxisKind, CategoryEntry, ScaleSpec, Tick, ValueKind};

/// Parses numbers such as `1,250`, `-3.5`, `45%` or `$12`.
pub fn parse_numeric(label: &str) -> Option<f64> {
    let s = label.trim();
    let s = s.strip_suffix('%').unwrap_or(s).trim();
    let s = s.strip_prefix('$').unwrap_or(s);
    let cleaned: String = s.chars().filter(|c| *c != ',' && *c != '\u{2009}').collect();
    let cleaned = cleaned.replace('\u{2212}', "-");
    if cleaned.is_empty() {
        return None;
    }
    cleaned.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid epoch")
}

fn days(date: NaiveDate) -> f64 {
    (date - epoch()).num_days() as f64
}

/// ISO-8601 dates (optionally with a time) as days since 1970-01-01.
fn parse_iso(label: &str) -> Option<f64> {
    let s = label.trim();
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Some(days(d));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M:%S"] {
        if let Ok(dt) = chrono::NaiveDateTime::parse_from_str(s, fmt) {
            let secs = (dt - epoch().and_hms_opt(0, 0, 0).expect("midnight")).num_seconds();
            return Some(secs as f64 / 86_400.0);
        }
    }
    None
}

/// "Jun 12", "June 12" or "Jun 12, 2024" as (month, day, optional year).
fn parse_month_day(label: &str) -> Option<(u32, u32, Option<i32>)> {
    let s = label.trim().replace(',', " ");
    let mut parts = s.split_whitespace();
    let month_name = parts.next()?;
    let day: u32 = parts.next()?.parse().ok()?;
    let year: Option<i32> = match parts.next() {
        Some(y) => Some(y.parse().ok()?),
        None => None,
    };
    if parts.next().is_some() {
        return None;
    }
    // Leap reference year so Feb 29 parses.
    let probe = format!("{month_name} {day} 2000");
    let date = NaiveDate::parse_from_str(&probe, "%b %d %Y")
        .or_else(|_| NaiveDate::parse_from_str(&probe, "%B %d %Y"))
        .ok()?;
    Some((date.month(), date.day(), year))
}

/// Temporal values for labels in positional order; month-day labels without
/// a year roll forward a year whenever the calendar wraps.
pub fn parse_temporal(labels: &[&str]) -> Option<Vec<f64>> {
    if let Some(values) = labels.iter().map(|l| parse_iso(l)).collect::<Option<Vec<f64>>>() {
        return Some(values);
    }
    let parsed: Vec<(u32, u32, Option<i32>)> = labels.iter().map(|l| parse_month_day(l)).collect::<Option<_>>()?;
    let mut year = 2000;
    let mut previous: Option<NaiveDate> = None;
    let mut out = Vec::with_capacity(parsed.len());
    for (month, day, explicit) in parsed {
        let mut date = NaiveDate::from_ymd_opt(explicit.unwrap_or(year), month, day)?;
        if explicit.is_none() {
            if let Some(prev) = previous {
                if date < prev {
                    year += 1;
                    date = NaiveDate::from_ymd_opt(year, month, day)?;
                }
            }
        } else {
            year = date.year();
        }
        previous = Some(date);
        out.push(days(date));
    }
    Some(out)
}

/// Least-squares `px = slope * value + intercept`.
pub fn fit_linear(values: &[f64], positions: &[f64]) -> Option<(f64, f64)> {
    let n = values.len() as f64;
    if values.len() < 2 {
        return None;
    }
    let mv = values.iter().sum::<f64>() / n;
    let mp = positions.iter().sum::<f64>() / n;
    let sxx: f64 = values.iter().map(|v| (v - mv) * (v - mv)).sum();
    let sxy: f64 = values.iter().zip(positions).map(|(v, p)| (v - mv) * (p - mp)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    if slope == 0.0 || !slope.is_finite() {
        return None;
    }
    Some((slope, mp - slope * mv))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxisClassification {
    pub kind: AxisKind,
    pub scale: ScaleSpec,
    pub ticks: Vec<Tick>,
}

/// Decides between a continuous (numeric or temporal) and a discrete axis
/// from `(position, label)` pairs, which must already be in positional order.
pub fn classify_axis(labelled: &[(f64, String)]) -> AxisClassification {
    let positions: Vec<f64> = labelled.iter().map(|(p, _)| *p).collect();
    let labels: Vec<&str> = labelled.iter().map(|(_, l)| l.as_str()).collect();

    let numeric: Option<Vec<f64>> = labels.iter().map(|l| parse_numeric(l)).collect();
    let candidates = [
        numeric.map(|v| (v, ValueKind::Numeric)),
        parse_temporal(&labels).map(|v| (v, ValueKind::Temporal)),
    ];
    for (values, value_kind) in candidates.into_iter().flatten() {
        if let Some((slope, intercept)) = fit_linear(&values, &positions) {
            let ticks = labelled
                .iter()
                .zip(&values)
                .map(|((p, l), v)| Tick { position: *p, label: l.clone(), value: Some(*v) })
                .collect();
            return AxisClassification {
                kind: AxisKind::Continuous,
                scale: ScaleSpec::Linear { slope, intercept, value_kind },
                ticks,
            };
        }
    }
    AxisClassification {
        kind: AxisKind::Discrete,
        scale: ScaleSpec::Categorical {
            categories: labelled.iter().map(|(p, l)| CategoryEntry { label: l.clone(), position: *p }).collect(),
        },
        ticks: labelled.iter().map(|(p, l)| Tick { position: *p, label: l.clone(), value: None }).collect(),
    }
}
