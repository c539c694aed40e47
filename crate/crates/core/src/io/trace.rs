//! trace.jsonl: one JSON object per line, tagged by `type`. The header comes
//! first, then cheap talk (if any), then per round the visibility sets, the
//! actions, any annotations and the utilities; the metrics block closes the
//! file.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_text, write_text, IoError};
use crate::engine::{Annotation, CheapTalkRecord, RoundRecord, RunTrace};
use crate::metrics::MetricsBlock;
use crate::model::{ActionRecord, GameConfig, PlayerId, Round, SharedPair};
use crate::utility::UtilityBreakdown;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TraceLine {
    Header { schema_version: u32, seed: u64, config: GameConfig },
    CheapTalk(CheapTalkRecord),
    Visibility { round: Round, player: PlayerId, pairs: Vec<SharedPair> },
    Action(ActionRecord),
    Annotation { round: Round, player: PlayerId, note: String },
    Utility { player: PlayerId, round: Round, personal: f64, social: f64, combined: f64 },
    Metrics(MetricsBlock),
}

pub fn trace_lines(trace: &RunTrace) -> Vec<TraceLine> {
    let mut out = vec![TraceLine::Header {
        schema_version: trace.config.schema_version,
        seed: trace.seed,
        config: trace.config.clone(),
    }];
    if let Some(ct) = &trace.cheap_talk {
        out.push(TraceLine::CheapTalk(ct.clone()));
    }
    for record in &trace.rounds {
        for (i, pairs) in record.visibility.iter().enumerate() {
            out.push(TraceLine::Visibility { round: record.round, player: PlayerId(i as u32), pairs: pairs.clone() });
        }
        out.extend(record.actions.iter().cloned().map(TraceLine::Action));
        for note in &record.notes {
            out.push(TraceLine::Annotation { round: record.round, player: note.player, note: note.note.clone() });
        }
        for (i, u) in record.utilities.iter().enumerate() {
            out.push(TraceLine::Utility {
                player: PlayerId(i as u32),
                round: u.round,
                personal: u.personal,
                social: u.social,
                combined: u.combined,
            });
        }
    }
    out.push(TraceLine::Metrics(trace.metrics.clone()));
    out
}

pub fn to_jsonl(trace: &RunTrace) -> String {
    let mut out = String::new();
    for line in trace_lines(trace) {
        out.push_str(&serde_json::to_string(&line).expect("trace lines serialize"));
        out.push('\n');
    }
    out
}

pub fn write_trace(path: &Path, trace: &RunTrace) -> Result<(), IoError> {
    write_text(path, &to_jsonl(trace))
}

fn round_entry(rounds: &mut BTreeMap<Round, RoundRecord>, round: Round, n: usize) -> &mut RoundRecord {
    rounds.entry(round).or_insert_with(|| RoundRecord {
        round,
        visibility: vec![Vec::new(); n],
        actions: Vec::new(),
        utilities: Vec::new(),
        notes: Vec::new(),
    })
}

pub fn from_jsonl(text: &str) -> Result<RunTrace, IoError> {
    let mut header: Option<(u64, GameConfig)> = None;
    let mut cheap_talk = None;
    let mut rounds: BTreeMap<Round, RoundRecord> = BTreeMap::new();
    let mut metrics = None;
    for (no, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let line: TraceLine =
            serde_json::from_str(raw).map_err(|e| IoError::Format(format!("trace line {}: {e}", no + 1)))?;
        let n = header.as_ref().map_or(0, |(_, c)| c.players.len());
        match line {
            TraceLine::Header { seed, config, .. } => header = Some((seed, config)),
            TraceLine::CheapTalk(ct) => cheap_talk = Some(ct),
            TraceLine::Visibility { round, player, pairs } => {
                let entry = round_entry(&mut rounds, round, n);
                if player.index() >= entry.visibility.len() {
                    entry.visibility.resize(player.index() + 1, Vec::new());
                }
                entry.visibility[player.index()] = pairs;
            }
            TraceLine::Action(a) => round_entry(&mut rounds, a.round, n).actions.push(a),
            TraceLine::Annotation { round, player, note } => {
                round_entry(&mut rounds, round, n).notes.push(Annotation { player, note })
            }
            TraceLine::Utility { round, personal, social, combined, .. } => round_entry(&mut rounds, round, n)
                .utilities
                .push(UtilityBreakdown { round, personal, social, combined }),
            TraceLine::Metrics(m) => metrics = Some(m),
        }
    }
    let (seed, config) = header.ok_or_else(|| IoError::Format("trace has no header line".into()))?;
    Ok(RunTrace {
        config,
        seed,
        cheap_talk,
        rounds: rounds.into_values().collect(),
        metrics: metrics.unwrap_or_default(),
    })
}

pub fn read_trace(path: &Path) -> Result<RunTrace, IoError> {
    from_jsonl(&read_text(path)?).map_err(|e| match e {
        IoError::Format(m) => IoError::parse(path, m),
        other => other,
    })
}
