//! Deterministic synthetic charts with ground-truth metadata.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ChartType {
    SimpleBar,
    StackedBar,
    GroupedBar,
    SimpleArea,
    StackedArea,
    Line,
    Scatter,
    Bubble,
}

impl ChartType {
    pub const ALL: [ChartType; 8] = [
        ChartType::SimpleBar,
        ChartType::StackedBar,
        ChartType::GroupedBar,
        ChartType::SimpleArea,
        ChartType::StackedArea,
        ChartType::Line,
        ChartType::Scatter,
        ChartType::Bubble,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct FixtureSpec {
    #[serde(rename = "type")]
    pub chart: ChartType,
    #[serde(default)]
    pub ticks: Option<usize>,
    #[serde(default)]
    pub series: Option<usize>,
    /// Mark count for scatter and bubble charts.
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub width: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl FixtureSpec {
    pub fn new(chart: ChartType) -> Self {
        Self { chart, ticks: None, series: None, count: None, width: None, seed: 0 }
    }

    pub fn ticks(mut self, n: usize) -> Self {
        self.ticks = Some(n);
        self
    }

    pub fn series(mut self, n: usize) -> Self {
        self.series = Some(n);
        self
    }

    pub fn count(mut self, n: usize) -> Self {
        self.count = Some(n);
        self
    }

    pub fn width(mut self, w: f64) -> Self {
        self.width = Some(w);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FixtureError {
    #[error("invalid fixture spec: {0}")]
    Spec(String),
    #[error("could not place {placed} of {wanted} circles")]
    Placement { placed: usize, wanted: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TickTruth {
    pub position: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MarkTruth {
    pub series: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tick: Option<usize>,
    pub value: f64,
    pub color: String,
    /// Geometry exactly as written to the document.
    pub points: Vec<(f64, f64)>,
    #[serde(default)]
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FixtureMetadata {
    pub chart: ChartType,
    pub width: f64,
    pub height: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<f64>,
    pub category_ticks: Vec<TickTruth>,
    pub value_ticks: Vec<TickTruth>,
    pub marks: Vec<MarkTruth>,
    /// Axis lines plus tick marks.
    pub furniture_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub svg: String,
    pub metadata: FixtureMetadata,
}

pub const HEIGHT: f64 = 400.0;
pub const PLOT_LEFT: f64 = 60.0;
pub const PLOT_TOP: f64 = 30.0;
pub const BASELINE: f64 = 360.0;
pub const DEFAULT_WIDTH: f64 = 640.0;
pub const GROUP_PADDING: f64 = 2.0;
pub const PALETTE: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

/// Rounds to the precision written into documents.
pub fn q(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

fn num(v: f64) -> String {
    let r = q(v);
    if r == 0.0 {
        "0".to_string()
    } else {
        format!("{r}")
    }
}

fn category_label(i: usize) -> String {
    let letter = (b'A' + (i % 26) as u8) as char;
    if i < 26 {
        letter.to_string()
    } else {
        format!("{letter}{}", i / 26)
    }
}

pub(crate) fn nice_step(raw: f64) -> f64 {
    let mag = 10f64.powf(raw.log10().floor());
    let f = raw / mag;
    let nice = if f <= 1.0 {
        1.0
    } else if f <= 2.0 {
        2.0
    } else if f <= 2.5 {
        2.5
    } else if f <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

struct Doc {
    body: String,
    furniture: usize,
    width: f64,
}

impl Doc {
    fn new(width: f64) -> Self {
        Self { body: String::new(), furniture: 0, width }
    }

    fn plot_right(&self) -> f64 {
        self.width - 20.0
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64) {
        self.furniture += 1;
        let _ = writeln!(
            self.body,
            r##"  <line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#333333" stroke-width="1"/>"##,
            num(x1),
            num(y1),
            num(x2),
            num(y2)
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, label: &str) {
        let _ = writeln!(
            self.body,
            r##"  <text x="{}" y="{}" text-anchor="{anchor}" font-size="11" fill="#333333">{label}</text>"##,
            num(x),
            num(y)
        );
    }

    fn frame(&mut self) {
        let right = self.plot_right();
        self.line(PLOT_LEFT, BASELINE, right, BASELINE);
        self.line(PLOT_LEFT, PLOT_TOP, PLOT_LEFT, BASELINE);
    }

    fn x_ticks(&mut self, ticks: &[TickTruth]) {
        for t in ticks {
            self.line(t.position, BASELINE, t.position, BASELINE + 6.0);
            self.text(t.position, BASELINE + 20.0, "middle", &t.label);
        }
    }

    fn y_ticks(&mut self, ticks: &[TickTruth]) {
        for t in ticks {
            self.line(PLOT_LEFT - 6.0, t.position, PLOT_LEFT, t.position);
            self.text(PLOT_LEFT - 10.0, t.position + 4.0, "end", &t.label);
        }
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n{}</svg>\n",
            num(self.width),
            num(HEIGHT),
            num(self.width),
            num(HEIGHT),
            self.body
        )
    }
}

/// Value axis from zero to a round maximum, returning (ticks, px per unit).
fn value_axis(max_value: f64) -> (Vec<TickTruth>, f64) {
    let step = nice_step(max_value / 5.0);
    let top = step * (max_value / step).ceil();
    let scale = (BASELINE - PLOT_TOP) / top;
    let count = (top / step).round() as usize;
    let ticks = (0..=count)
        .map(|i| {
            let v = step * i as f64;
            TickTruth { position: q(BASELINE - v * scale), label: format_value(v) }
        })
        .collect();
    (ticks, scale)
}

pub(crate) fn format_value(v: f64) -> String {
    if (v - v.round()).abs() < 1e-9 {
        format!("{}", v.round() as i64)
    } else {
        format!("{v}")
    }
}

fn path_d(points: &[(f64, f64)], closed: bool) -> String {
    let mut d = String::new();
    for (i, (x, y)) in points.iter().enumerate() {
        let _ = write!(d, "{}{} {}", if i == 0 { "M" } else { " L" }, num(*x), num(*y));
    }
    if closed {
        d.push_str(" Z");
    }
    d
}

pub fn generate_fixture(spec: &FixtureSpec) -> Result<Fixture, FixtureError> {
    let width = spec.width.unwrap_or(DEFAULT_WIDTH);
    if !(width >= 200.0) {
        return Err(FixtureError::Spec(format!("width {width} is below 200")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut doc = Doc::new(width);
    let meta = match spec.chart {
        ChartType::SimpleBar | ChartType::StackedBar | ChartType::GroupedBar => bars(spec, &mut rng, &mut doc)?,
        ChartType::SimpleArea | ChartType::StackedArea => areas(spec, &mut rng, &mut doc)?,
        ChartType::Line => lines(spec, &mut rng, &mut doc)?,
        ChartType::Scatter => scatter(spec, &mut rng, &mut doc)?,
        ChartType::Bubble => bubbles(spec, &mut rng, &mut doc)?,
    };
    let (category_ticks, value_ticks, marks, baseline) = meta;
    let metadata = FixtureMetadata {
        chart: spec.chart,
        width,
        height: HEIGHT,
        baseline,
        category_ticks,
        value_ticks,
        marks,
        furniture_count: doc.furniture,
    };
    Ok(Fixture { svg: doc.finish(), metadata })
}

type Parts = (Vec<TickTruth>, Vec<TickTruth>, Vec<MarkTruth>, Option<f64>);

fn need(value: Option<usize>, default: usize, min: usize, what: &str) -> Result<usize, FixtureError> {
    let v = value.unwrap_or(default);
    if v < min {
        return Err(FixtureError::Spec(format!("{what} must be at least {min}, got {v}")));
    }
    Ok(v)
}

fn bars(spec: &FixtureSpec, rng: &mut ChaCha8Rng, doc: &mut Doc) -> Result<Parts, FixtureError> {
    let n = need(spec.ticks, 5, 1, "ticks")?;
    let s = match spec.chart {
        ChartType::SimpleBar => 1,
        _ => need(spec.series, 2, 1, "series")?,
    };
    let stacked = spec.chart == ChartType::StackedBar;
    let values: Vec<Vec<f64>> = (0..n).map(|_| (0..s).map(|_| rng.gen_range(5..=50) as f64).collect()).collect();
    let max = values
        .iter()
        .map(|row| if stacked { row.iter().sum() } else { row.iter().copied().fold(0.0, f64::max) })
        .fold(0.0, f64::max);
    let (value_ticks, scale) = value_axis(max);
    let band = (doc.plot_right() - PLOT_LEFT) / n as f64;
    let ticks: Vec<TickTruth> = (0..n)
        .map(|i| TickTruth { position: q(PLOT_LEFT + band * (i as f64 + 0.5)), label: category_label(i) })
        .collect();

    doc.frame();
    doc.x_ticks(&ticks);
    doc.y_ticks(&value_ticks);

    let mut marks = Vec::new();
    for (i, row) in values.iter().enumerate() {
        let centre = ticks[i].position;
        let mut bottom = BASELINE;
        for (k, &v) in row.iter().enumerate() {
            let h = q(v * scale);
            let (x, w, y) = if spec.chart == ChartType::GroupedBar {
                let w = q((band * 0.8 - GROUP_PADDING * (s - 1) as f64) / s as f64);
                let group = w * s as f64 + GROUP_PADDING * (s - 1) as f64;
                (q(centre - group / 2.0 + k as f64 * (w + GROUP_PADDING)), w, q(BASELINE - h))
            } else {
                let w = q(band * 0.6);
                let top = q(bottom - h);
                let r = (q(centre - w / 2.0), w, top);
                bottom = top;
                r
            };
            let color = PALETTE[k % PALETTE.len()];
            let _ = writeln!(
                doc.body,
                r#"  <rect x="{}" y="{}" width="{}" height="{}" fill="{color}"/>"#,
                num(x),
                num(y),
                num(w),
                num(h)
            );
            let (x1, y1) = (q(x + w), q(y + h));
            marks.push(MarkTruth {
                series: k,
                tick: Some(i),
                value: v,
                color: color.to_string(),
                points: vec![(x, y), (x1, y), (x1, y1), (x, y1)],
                radius: 0.0,
            });
        }
    }
    Ok((ticks, value_ticks, marks, Some(BASELINE)))
}

fn areas(spec: &FixtureSpec, rng: &mut ChaCha8Rng, doc: &mut Doc) -> Result<Parts, FixtureError> {
    let n = need(spec.ticks, 8, 4, "ticks")?;
    let s = match spec.chart {
        ChartType::SimpleArea => 1,
        _ => need(spec.series, 3, 1, "series")?,
    };
    let values: Vec<Vec<f64>> = (0..s).map(|_| (0..n).map(|_| rng.gen_range(5..=40) as f64).collect()).collect();
    let max = (0..n).map(|j| values.iter().map(|row| row[j]).sum::<f64>()).fold(0.0, f64::max);
    let (value_ticks, scale) = value_axis(max);
    let step = (doc.plot_right() - PLOT_LEFT) / (n - 1) as f64;
    let ticks: Vec<TickTruth> =
        (0..n).map(|j| TickTruth { position: q(PLOT_LEFT + step * j as f64), label: category_label(j) }).collect();

    doc.frame();
    doc.x_ticks(&ticks);
    doc.y_ticks(&value_ticks);

    let mut marks = Vec::new();
    let mut bottoms = vec![BASELINE; n];
    for (k, row) in values.iter().enumerate() {
        let tops: Vec<f64> = (0..n).map(|j| q(bottoms[j] - row[j] * scale)).collect();
        let mut pts: Vec<(f64, f64)> = (0..n).map(|j| (ticks[j].position, tops[j])).collect();
        pts.extend((0..n).rev().map(|j| (ticks[j].position, bottoms[j])));
        let color = PALETTE[k % PALETTE.len()];
        let _ = writeln!(doc.body, r#"  <path d="{}" fill="{color}"/>"#, path_d(&pts, true));
        marks.push(MarkTruth {
            series: k,
            tick: None,
            value: row.iter().sum(),
            color: color.to_string(),
            points: pts,
            radius: 0.0,
        });
        bottoms = tops;
    }
    Ok((ticks, value_ticks, marks, Some(BASELINE)))
}

const MONTHS: [(&str, u32); 12] = [
    ("Jan", 31),
    ("Feb", 28),
    ("Mar", 31),
    ("Apr", 30),
    ("May", 31),
    ("Jun", 30),
    ("Jul", 31),
    ("Aug", 31),
    ("Sep", 30),
    ("Oct", 31),
    ("Nov", 30),
    ("Dec", 31),
];

/// Weekly "Mon D" labels starting at June 5th.
fn weekly_label(week: usize) -> String {
    let mut month = 5;
    let mut day = 5 + 7 * week as u32;
    while day > MONTHS[month].1 {
        day -= MONTHS[month].1;
        month = (month + 1) % 12;
    }
    format!("{} {}", MONTHS[month].0, day)
}

fn lines(spec: &FixtureSpec, rng: &mut ChaCha8Rng, doc: &mut Doc) -> Result<Parts, FixtureError> {
    let n = need(spec.ticks, 12, 2, "ticks")?;
    let s = need(spec.series, 1, 1, "series")?;
    let values: Vec<Vec<f64>> = (0..s).map(|_| (0..n).map(|_| rng.gen_range(20..=90) as f64).collect()).collect();
    let (value_ticks, scale) = value_axis(100.0);
    let step = (doc.plot_right() - PLOT_LEFT) / n as f64;
    let ticks: Vec<TickTruth> =
        (0..n).map(|j| TickTruth { position: q(PLOT_LEFT + step * (j as f64 + 0.5)), label: weekly_label(j) }).collect();

    doc.frame();
    doc.x_ticks(&ticks);
    doc.y_ticks(&value_ticks);

    let mut marks = Vec::new();
    for (k, row) in values.iter().enumerate() {
        let pts: Vec<(f64, f64)> = (0..n).map(|j| (ticks[j].position, q(BASELINE - row[j] * scale))).collect();
        let color = PALETTE[k % PALETTE.len()];
        let _ = writeln!(
            doc.body,
            r#"  <path d="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            path_d(&pts, false)
        );
        marks.push(MarkTruth { series: k, tick: None, value: row.iter().sum(), color: color.to_string(), points: pts, radius: 0.0 });
    }
    Ok((ticks, value_ticks, marks, None))
}

fn numeric_ticks(lo: f64, hi: f64, px_lo: f64, px_hi: f64) -> Vec<TickTruth> {
    let step = nice_step((hi - lo) / 5.0);
    let mut out = Vec::new();
    let mut v = (lo / step).ceil() * step;
    while v <= hi + 1e-9 {
        let pos = px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
        out.push(TickTruth { position: q(pos), label: format_value(v) });
        v += step;
    }
    out
}

fn scatter(spec: &FixtureSpec, rng: &mut ChaCha8Rng, doc: &mut Doc) -> Result<Parts, FixtureError> {
    let n = need(spec.count, 50, 1, "count")?;
    let r = 4.0;
    let min_slack = 20.0;
    let right = doc.plot_right();
    let x_ticks = numeric_ticks(0.0, 100.0, PLOT_LEFT, right);
    let (value_ticks, _) = value_axis(100.0);

    doc.frame();
    doc.x_ticks(&x_ticks);
    doc.y_ticks(&value_ticks);

    let mut placed: Vec<(f64, f64)> = Vec::new();
    let mut attempts = 0;
    while placed.len() < n {
        attempts += 1;
        if attempts > 200_000 {
            return Err(FixtureError::Placement { placed: placed.len(), wanted: n });
        }
        let x = q(rng.gen_range(PLOT_LEFT + 15.0..right - 15.0));
        let y = q(rng.gen_range(PLOT_TOP + 15.0..BASELINE - 15.0));
        if placed.iter().all(|&(px, py)| (px - x).hypot(py - y) - 2.0 * r > min_slack + 0.5) {
            placed.push((x, y));
        }
    }
    let mut marks = Vec::new();
    for &(x, y) in &placed {
        let color = PALETTE[0];
        let _ = writeln!(doc.body, r#"  <circle cx="{}" cy="{}" r="{}" fill="{color}"/>"#, num(x), num(y), num(r));
        marks.push(MarkTruth { series: 0, tick: None, value: x, color: color.to_string(), points: vec![(x, y)], radius: r });
    }
    Ok((x_ticks, value_ticks, marks, None))
}

fn bubbles(spec: &FixtureSpec, rng: &mut ChaCha8Rng, doc: &mut Doc) -> Result<Parts, FixtureError> {
    let n = need(spec.count, 200, 1, "count")?;
    let groups = need(spec.series, 4, 1, "series")?;
    let right = doc.plot_right();
    let centre = (0.5 * (PLOT_LEFT + right), 0.5 * (PLOT_TOP + BASELINE));
    let bounds_ok = |x: f64, y: f64, r: f64| x - r >= PLOT_LEFT + 2.0 && x + r <= right - 2.0 && y - r >= PLOT_TOP + 2.0 && y + r <= BASELINE - 2.0;

    let mut placed: Vec<(f64, f64, f64)> = Vec::new();
    let mut attempts = 0;
    while placed.len() < n {
        attempts += 1;
        if attempts > 500_000 {
            return Err(FixtureError::Placement { placed: placed.len(), wanted: n });
        }
        let r = 4.0 + 0.5 * rng.gen_range(0..=20) as f64;
        let (x, y) = if placed.is_empty() {
            (q(centre.0), q(centre.1))
        } else {
            // Snap tangent to a random existing circle, with a hair of slack
            // so rounding to document precision cannot create overlap.
            let &(ax, ay, ar) = &placed[rng.gen_range(0..placed.len())];
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            let dist = ar + r + 0.01;
            (q(ax + dist * angle.cos()), q(ay + dist * angle.sin()))
        };
        if !bounds_ok(x, y, r) {
            continue;
        }
        if placed.iter().all(|&(px, py, pr)| (px - x).hypot(py - y) >= pr + r + 0.005) {
            placed.push((x, y, r));
        }
    }
    let (value_ticks, _) = value_axis(100.0);
    let x_ticks = numeric_ticks(0.0, 100.0, PLOT_LEFT, right);
    doc.frame();
    doc.x_ticks(&x_ticks);
    doc.y_ticks(&value_ticks);

    let mut marks = Vec::new();
    for &(x, y, r) in &placed {
        let k = rng.gen_range(0..groups);
        let color = PALETTE[k % PALETTE.len()];
        let _ = writeln!(doc.body, r#"  <circle cx="{}" cy="{}" r="{}" fill="{color}"/>"#, num(x), num(y), num(r));
        marks.push(MarkTruth { series: k, tick: None, value: r, color: color.to_string(), points: vec![(x, y)], radius: r });
    }
    Ok((x_ticks, value_ticks, marks, None))
}
