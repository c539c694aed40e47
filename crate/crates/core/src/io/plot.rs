//! Standalone SVG line charts from a trace, a metrics.csv or an aggregate.csv.
//! Output depends only on the input values, so identical inputs give
//! identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::report::{metric_rows, METRICS_HEADER};
use super::{read_text, write_text, IoError};

/// Metrics a trace or metrics.csv can be plotted by.
pub const TRACE_METRICS: [&str; 8] = [
    "fci",
    "share_mass",
    "ideal_mass",
    "reshare_entropy",
    "engagement_entropy",
    "exposure_alignment",
    "dissent_exposure",
    "amplification",
];

const AGGREGATE_TEXT_COLUMNS: [&str; 4] = ["run", "seed", "status", "error"];

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("unknown metric {metric:?} (known: {})", known.join(", "))]
    UnknownMetric { metric: String, known: Vec<String> },
    #[error("no data for metric {0:?}")]
    NoData(String),
    #[error(transparent)]
    Io(#[from] IoError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub series: Vec<Series>,
}

fn series_label(metric: &str, key: &str) -> String {
    let what = match metric {
        "fci" | "share_mass" | "ideal_mass" => "type",
        "exposure_alignment" | "dissent_exposure" => "player",
        "amplification" => "content",
        _ => return metric.to_string(),
    };
    format!("{what} {key}")
}

/// Groups long-format rows into one series per key, ordered by key.
pub fn series_from_rows<'a>(
    rows: impl IntoIterator<Item = (u32, &'a str, &'a str, f64)>,
    metric: &str,
) -> Result<Vec<Series>, PlotError> {
    if !TRACE_METRICS.contains(&metric) {
        return Err(unknown(metric, TRACE_METRICS.iter().map(|s| s.to_string()).collect()));
    }
    let mut grouped: BTreeMap<(u64, String), Vec<(f64, f64)>> = BTreeMap::new();
    for (round, m, key, value) in rows {
        if m != metric {
            continue;
        }
        let order = key.parse::<u64>().unwrap_or(u64::MAX);
        grouped
            .entry((order, key.to_string()))
            .or_default()
            .push((f64::from(round), value));
    }
    if grouped.is_empty() {
        return Err(PlotError::NoData(metric.to_string()));
    }
    Ok(grouped
        .into_iter()
        .map(|((_, key), mut points)| {
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            Series { label: series_label(metric, &key), points }
        })
        .collect())
}

fn unknown(metric: &str, known: Vec<String>) -> PlotError {
    PlotError::UnknownMetric { metric: metric.to_string(), known }
}

fn csv_error(path: &Path, e: csv::Error) -> PlotError {
    PlotError::Io(IoError::parse(path, e))
}

fn chart_from_trace_text(path: &Path, text: &str, metric: &str) -> Result<Chart, PlotError> {
    let trace = super::trace::from_jsonl(text).map_err(|e| match e {
        IoError::Format(m) => IoError::parse(path, m),
        other => other,
    })?;
    let block = if trace.metrics.rounds.is_empty() && !trace.rounds.is_empty() {
        crate::metrics::compute(&trace)
    } else {
        trace.metrics.clone()
    };
    let rows = metric_rows(&block);
    let series = series_from_rows(rows.iter().map(|(r, m, k, v)| (*r, *m, k.as_str(), *v)), metric)?;
    Ok(Chart { title: metric.to_string(), x_label: "round".into(), series })
}

fn chart_from_csv(path: &Path, text: &str, metric: &str) -> Result<Chart, PlotError> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(String::from)
        .collect();
    let records: Vec<csv::StringRecord> = reader
        .records()
        .collect::<Result<_, _>>()
        .map_err(|e| csv_error(path, e))?;

    if header == METRICS_HEADER {
        let mut rows = Vec::with_capacity(records.len());
        for rec in &records {
            let round: u32 = rec[0].parse().map_err(|_| IoError::parse(path, format!("bad round {:?}", &rec[0])))?;
            let value: f64 = rec[3].parse().map_err(|_| IoError::parse(path, format!("bad value {:?}", &rec[3])))?;
            rows.push((round, rec[1].to_string(), rec[2].to_string(), value));
        }
        let series = series_from_rows(rows.iter().map(|(r, m, k, v)| (*r, m.as_str(), k.as_str(), *v)), metric)?;
        return Ok(Chart { title: metric.to_string(), x_label: "round".into(), series });
    }

    // aggregate.csv: one point per run, in file order
    let numeric: Vec<String> = header
        .iter()
        .filter(|h| !AGGREGATE_TEXT_COLUMNS.contains(&h.as_str()))
        .cloned()
        .collect();
    let Some(column) = header.iter().position(|h| h == metric).filter(|_| numeric.iter().any(|h| h == metric)) else {
        return Err(unknown(metric, numeric));
    };
    let points: Vec<(f64, f64)> = records
        .iter()
        .enumerate()
        .filter_map(|(i, rec)| rec.get(column)?.parse::<f64>().ok().map(|v| (i as f64, v)))
        .collect();
    if points.is_empty() {
        return Err(PlotError::NoData(metric.to_string()));
    }
    Ok(Chart {
        title: metric.to_string(),
        x_label: "run".into(),
        series: vec![Series { label: metric.to_string(), points }],
    })
}

/// Reads a chart from a run directory, trace.jsonl, metrics.csv or
/// aggregate.csv.
pub fn load_chart(input: &Path, metric: &str) -> Result<Chart, PlotError> {
    let path: PathBuf = if input.is_dir() { input.join("trace.jsonl") } else { input.to_path_buf() };
    let text = read_text(&path)?;
    let is_csv = path.extension().is_some_and(|e| e == "csv");
    if text.trim().is_empty() {
        if !is_csv && !TRACE_METRICS.contains(&metric) {
            return Err(unknown(metric, TRACE_METRICS.iter().map(|s| s.to_string()).collect()));
        }
        return Err(PlotError::NoData(metric.to_string()));
    }
    if is_csv || !text.trim_start().starts_with('{') {
        chart_from_csv(&path, &text, metric)
    } else {
        chart_from_trace_text(&path, &text, metric)
    }
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const LEGEND_ROWS: usize = 20;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Renders `chart` as a self-contained SVG document.
pub fn render_svg(chart: &Chart) -> String {
    let points = || chart.series.iter().flat_map(|s| s.points.iter());
    let (x0, x1) = bounds(points().map(|p| p.0));
    let (y0, y1) = bounds(points().map(|p| p.1).filter(|v| v.is_finite()));
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| TOP + plot_h - (y - y0) / (y1 - y0) * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(&chart.title)
    );
    let _ = writeln!(
        out,
        r#"<path d="M{LEFT:.2},{TOP:.2}V{:.2}H{:.2}" fill="none" stroke="black"/>"#,
        TOP + plot_h,
        LEFT + plot_w
    );
    for i in 0..=4 {
        let t = f64::from(i) / 4.0;
        let yv = y0 + t * (y1 - y0);
        let y = sy(yv);
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{yv:.3}</text>"##,
            LEFT - 4.0,
            LEFT - 6.0,
            y + 4.0
        );
        let xv = x0 + t * (x1 - x0);
        let x = sx(xv);
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{xv:.2}</text>"##,
            TOP + plot_h,
            TOP + plot_h + 4.0,
            TOP + plot_h + 18.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 10.0,
        escape(&chart.x_label)
    );
    for (i, s) in chart.series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = s
            .points
            .iter()
            .filter(|p| p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline data-series="{}" fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            escape(&s.label),
            coords.join(" ")
        );
    }
    for (i, s) in chart.series.iter().take(LEGEND_ROWS).enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let y = TOP + 14.0 * i as f64 + 6.0;
        let x = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{colour}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            x + 16.0,
            x + 20.0,
            y + 4.0,
            escape(&s.label)
        );
    }
    if chart.series.len() > LEGEND_ROWS {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}">+{} more</text>"#,
            WIDTH - RIGHT + 12.0,
            TOP + 14.0 * LEGEND_ROWS as f64 + 10.0,
            chart.series.len() - LEGEND_ROWS
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Loads `metric` from `input` and writes the chart to `out`.
pub fn plot(input: &Path, metric: &str, out: &Path) -> Result<Chart, PlotError> {
    let chart = load_chart(input, metric)?;
    write_text(out, &render_svg(&chart))?;
    Ok(chart)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run_game;
    use crate::io::trace::to_jsonl;
    use crate::scenarios;

    fn fci_chart() -> Chart {
        let trace = run_game(&scenarios::false_consensus(2)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.jsonl");
        std::fs::write(&path, to_jsonl(&trace)).unwrap();
        load_chart(&path, "fci").unwrap()
    }

    #[test]
    fn one_polyline_per_type() {
        let chart = fci_chart();
        assert_eq!(chart.series.len(), 3);
        let svg = render_svg(&chart);
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert_eq!(svg, render_svg(&fci_chart()));
    }

    #[test]
    fn unknown_and_empty() {
        let dir = tempfile::tempdir().unwrap();
        let empty = dir.path().join("empty.jsonl");
        std::fs::write(&empty, "").unwrap();
        assert!(matches!(load_chart(&empty, "fci"), Err(PlotError::NoData(_))));
        assert!(matches!(load_chart(&empty, "bogus"), Err(PlotError::UnknownMetric { .. })));
        let trace = run_game(&scenarios::two_player_idealist()).unwrap();
        let path = dir.path().join("t.jsonl");
        std::fs::write(&path, to_jsonl(&trace)).unwrap();
        assert!(matches!(load_chart(&path, "bogus"), Err(PlotError::UnknownMetric { .. })));
    }

    #[test]
    fn metrics_csv_matches_trace() {
        let trace = run_game(&scenarios::echo_chamber(1)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        crate::io::report::write_run(dir.path(), &trace).unwrap();
        for metric in ["exposure_alignment", "amplification", "reshare_entropy"] {
            let a = load_chart(&dir.path().join("metrics.csv"), metric).unwrap();
            let b = load_chart(dir.path(), metric).unwrap();
            assert_eq!(a, b, "{metric}");
        }
    }
}
