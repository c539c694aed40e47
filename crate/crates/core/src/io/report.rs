//! metrics.csv (long format) and summary.json.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{fmt_f64, to_pretty_json, write_text, IoError};
use crate::engine::RunTrace;
use crate::metrics::MetricsBlock;
use crate::model::{PlayerId, Round, SCHEMA_VERSION};

pub const METRICS_HEADER: [&str; 4] = ["round", "metric", "key", "value"];

/// Long-format rows `(round, metric, key, value)` in a fixed order.
pub fn metric_rows(block: &MetricsBlock) -> Vec<(Round, &'static str, String, f64)> {
    let mut rows = Vec::new();
    for (t, m) in block.ideal_mass.iter().enumerate() {
        rows.push((0, "ideal_mass", t.to_string(), *m));
    }
    for r in &block.rounds {
        for (t, v) in r.fci.iter().enumerate() {
            rows.push((r.round, "fci", t.to_string(), *v));
        }
        for (t, v) in r.share_mass.iter().enumerate() {
            rows.push((r.round, "share_mass", t.to_string(), *v));
        }
        rows.push((r.round, "reshare_entropy", String::new(), r.reshare_entropy));
        rows.push((r.round, "engagement_entropy", String::new(), r.engagement_entropy));
        for (p, v) in r.exposure_alignment.iter().enumerate() {
            rows.push((r.round, "exposure_alignment", p.to_string(), *v));
        }
        for (p, v) in r.dissent_exposure.iter().enumerate() {
            rows.push((r.round, "dissent_exposure", p.to_string(), *v));
        }
        for p in &r.empty_visibility {
            rows.push((r.round, "empty_visibility", p.0.to_string(), 1.0));
        }
    }
    for curve in &block.amplification {
        for (round, v) in curve.values.iter().enumerate() {
            rows.push((round as Round, "amplification", curve.content.0.to_string(), *v));
        }
    }
    rows
}

pub fn metrics_csv(block: &MetricsBlock) -> Result<String, IoError> {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let fail = |e: csv::Error| IoError::Format(e.to_string());
    writer.write_record(METRICS_HEADER).map_err(fail)?;
    for (round, metric, key, value) in metric_rows(block) {
        writer
            .write_record([round.to_string(), metric.to_string(), key, fmt_f64(value)])
            .map_err(fail)?;
    }
    let bytes = writer.into_inner().map_err(|e| IoError::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| IoError::Format(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalMetrics {
    pub round: Round,
    pub fci: Vec<f64>,
    pub reshare_entropy: f64,
    pub engagement_entropy: f64,
    pub mean_alignment: f64,
    pub mean_dissent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub seed: u64,
    pub n_players: usize,
    pub horizon: Round,
    pub rounds_played: usize,
    pub payoffs: Vec<f64>,
    pub total_likes: u64,
    pub total_reshares: u64,
    pub ideal_mass: Vec<f64>,
    pub final_metrics: Option<FinalMetrics>,
    pub annotations: usize,
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

pub fn summarize(trace: &RunTrace) -> Summary {
    let count = |kind| trace.history().filter(|a| a.kind == kind).count() as u64;
    let final_metrics = trace.metrics.final_round().map(|r| FinalMetrics {
        round: r.round,
        fci: r.fci.clone(),
        reshare_entropy: r.reshare_entropy,
        engagement_entropy: r.engagement_entropy,
        mean_alignment: mean(&r.exposure_alignment),
        mean_dissent: mean(&r.dissent_exposure),
    });
    Summary {
        schema_version: SCHEMA_VERSION,
        seed: trace.seed,
        n_players: trace.config.players.len(),
        horizon: trace.config.horizon,
        rounds_played: trace.rounds.len(),
        payoffs: trace.config.player_ids().map(|p: PlayerId| trace.payoff(p)).collect(),
        total_likes: count(crate::model::ActionKind::Like),
        total_reshares: count(crate::model::ActionKind::Reshare),
        ideal_mass: trace.metrics.ideal_mass.clone(),
        final_metrics,
        annotations: trace.rounds.iter().map(|r| r.notes.len()).sum(),
    }
}

pub fn summary_json(trace: &RunTrace) -> String {
    to_pretty_json(&summarize(trace))
}

/// Writes trace.jsonl, metrics.csv and summary.json into `dir`.
pub fn write_run(dir: &Path, trace: &RunTrace) -> Result<(), IoError> {
    super::trace::write_trace(&dir.join("trace.jsonl"), trace)?;
    write_text(&dir.join("metrics.csv"), &metrics_csv(&trace.metrics)?)?;
    write_text(&dir.join("summary.json"), &summary_json(trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run_game;
    use crate::metrics;
    use crate::scenarios;

    #[test]
    fn csv_has_header_and_lf() {
        let trace = run_game(&scenarios::two_player_quid_pro_quo(2, false)).unwrap();
        let text = metrics_csv(&trace.metrics).unwrap();
        assert!(text.starts_with("round,metric,key,value\n"));
        assert!(!text.contains('\r'));
        assert!(text.contains("\n2,amplification,"));
    }

    #[test]
    fn summary_matches_recomputed_metrics() {
        let trace = run_game(&scenarios::false_consensus(4)).unwrap();
        let text = crate::io::trace::to_jsonl(&trace);
        let mut back = crate::io::trace::from_jsonl(&text).unwrap();
        back.metrics = metrics::compute(&back);
        assert_eq!(summary_json(&back), summary_json(&trace));
    }
}
