//! Trace-level observables: false-consensus index, engagement concentration,
//! exposure alignment and amplification curves. Every function here is a pure
//! function of a [`RunTrace`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::RunTrace;
use crate::model::{normalized_distance, ActionKind, ActionRecord, ContentId, GameConfig, PlayerId, Round};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("unknown type {0}")]
    UnknownType(usize),
    #[error("unknown content {0}")]
    UnknownContent(ContentId),
    #[error("unknown player {0}")]
    UnknownPlayer(PlayerId),
    #[error("round {0} not in trace")]
    UnknownRound(Round),
}

/// Nearest-centroid content typing; ties go to the lowest centroid index.
#[derive(Debug, Clone, PartialEq)]
pub struct ContentTyping {
    centroids: Vec<Vec<f64>>,
}

impl ContentTyping {
    /// Uses the configured centroids, or a single type at the origin.
    pub fn from_config(config: &GameConfig) -> Self {
        match &config.type_centroids {
            Some(cs) if !cs.is_empty() => Self { centroids: cs.clone() },
            _ => Self { centroids: vec![vec![0.0; config.k_dims]] },
        }
    }

    pub fn new(centroids: Vec<Vec<f64>>) -> Option<Self> {
        (!centroids.is_empty()).then_some(Self { centroids })
    }

    pub fn len(&self) -> usize {
        self.centroids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centroids.is_empty()
    }

    pub fn assign(&self, v: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, c) in self.centroids.iter().enumerate() {
            let d = normalized_distance(v, c);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RoundMetrics {
    pub round: Round,
    pub fci: Vec<f64>,
    pub share_mass: Vec<f64>,
    pub reshare_entropy: f64,
    pub engagement_entropy: f64,
    pub exposure_alignment: Vec<f64>,
    pub dissent_exposure: Vec<f64>,
    /// Players whose visible set was empty; their alignment is 0 by convention.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub empty_visibility: Vec<PlayerId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplificationCurve {
    pub content: ContentId,
    /// Cumulative weighted engagement, one value per round starting at 0.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsBlock {
    pub ideal_mass: Vec<f64>,
    pub rounds: Vec<RoundMetrics>,
    pub amplification: Vec<AmplificationCurve>,
}

impl MetricsBlock {
    pub fn final_round(&self) -> Option<&RoundMetrics> {
        self.rounds.last()
    }
}

fn content_types(config: &GameConfig, typing: &ContentTyping) -> BTreeMap<ContentId, usize> {
    config
        .initial_content_pool
        .iter()
        .flatten()
        .map(|item| (item.id, typing.assign(&item.vector)))
        .collect()
}

/// Fraction of players whose ideal point is assigned to each type.
pub fn ideal_mass(config: &GameConfig, typing: &ContentTyping) -> Vec<f64> {
    let mut mass = vec![0.0; typing.len()];
    if config.players.is_empty() {
        return mass;
    }
    for p in &config.players {
        mass[typing.assign(&p.ideal)] += 1.0;
    }
    let n = config.players.len() as f64;
    mass.iter_mut().for_each(|m| *m /= n);
    mass
}

/// Fraction of all reshares through `round` on content of each type. All
/// zeros when nobody has reshared.
pub fn share_mass<'a>(
    history: impl IntoIterator<Item = &'a ActionRecord>,
    types: &BTreeMap<ContentId, usize>,
    n_types: usize,
    round: Round,
) -> Vec<f64> {
    let mut counts = vec![0u64; n_types];
    for a in history {
        if a.kind == ActionKind::Reshare && a.round <= round {
            if let Some(t) = a.content.and_then(|c| types.get(&c)) {
                counts[*t] += 1;
            }
        }
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return vec![0.0; n_types];
    }
    counts.into_iter().map(|c| c as f64 / total as f64).collect()
}

/// `share_mass(t, r) - ideal_mass(t)`, or 0 when there are no reshares by `r`.
pub fn false_consensus_index(
    trace: &RunTrace,
    typing: &ContentTyping,
    t: usize,
    round: Round,
) -> Result<f64, MetricsError> {
    if t >= typing.len() {
        return Err(MetricsError::UnknownType(t));
    }
    let types = content_types(&trace.config, typing);
    let mass = share_mass(trace.history(), &types, typing.len(), round);
    if mass.iter().all(|&m| m == 0.0) {
        return Ok(0.0);
    }
    Ok(mass[t] - ideal_mass(&trace.config, typing)[t])
}

/// Shannon entropy (natural log) of a non-negative weight vector.
pub fn entropy(weights: impl IntoIterator<Item = f64>) -> f64 {
    let weights: Vec<f64> = weights.into_iter().filter(|w| *w > 0.0).collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let h: f64 = weights
        .iter()
        .map(|w| {
            let p = w / total;
            -p * p.ln()
        })
        .sum();
    h.max(0.0)
}

fn cumulative_engagement(history: &[ActionRecord], config: &GameConfig, round: Round) -> BTreeMap<ContentId, f64> {
    let mut out = BTreeMap::new();
    for a in history.iter().filter(|a| a.is_engagement() && a.round <= round) {
        if let Some(c) = a.content {
            *out.entry(c).or_insert(0.0) += config.weight_of(a.kind);
        }
    }
    out
}

/// Entropy of cumulative weighted engagement across content items at `round`.
pub fn engagement_concentration(trace: &RunTrace, round: Round) -> f64 {
    let history: Vec<ActionRecord> = trace.history().cloned().collect();
    entropy(cumulative_engagement(&history, &trace.config, round).into_values())
}

/// Share of `player`'s visible pairs at `round` within normalized distance
/// `radius` of their ideal. The flag is set when the visible set is empty.
pub fn exposure_alignment(
    trace: &RunTrace,
    player: PlayerId,
    round: Round,
    radius: f64,
) -> Result<(f64, bool), MetricsError> {
    let spec = trace.config.player(player).ok_or(MetricsError::UnknownPlayer(player))?;
    let record = trace
        .rounds
        .iter()
        .find(|r| r.round == round)
        .ok_or(MetricsError::UnknownRound(round))?;
    let visible = record.visibility.get(player.index()).map(Vec::as_slice).unwrap_or(&[]);
    Ok(alignment_of(visible.iter().map(|p| p.content), &spec.ideal, radius, &trace.config))
}

fn alignment_of(
    visible: impl Iterator<Item = ContentId>,
    ideal: &[f64],
    radius: f64,
    config: &GameConfig,
) -> (f64, bool) {
    let mut total = 0usize;
    let mut near = 0usize;
    for c in visible {
        total += 1;
        if let Some(item) = config.content(c) {
            if normalized_distance(&item.vector, ideal) <= radius {
                near += 1;
            }
        }
    }
    if total == 0 {
        (0.0, true)
    } else {
        (near as f64 / total as f64, false)
    }
}

/// Cumulative `w_like * likes + w_share * reshares` on `content`, all sharers
/// aggregated, one point per round of the trace.
pub fn amplification_curve(trace: &RunTrace, content: ContentId) -> Result<Vec<(Round, f64)>, MetricsError> {
    trace.config.content(content).ok_or(MetricsError::UnknownContent(content))?;
    // integer counts so the curve does not depend on summation order
    let (mut likes, mut reshares) = (0u64, 0u64);
    Ok(trace
        .rounds
        .iter()
        .map(|r| {
            for a in r.actions.iter().filter(|a| a.content == Some(content)) {
                match a.kind {
                    ActionKind::Like => likes += 1,
                    ActionKind::Reshare => reshares += 1,
                    _ => {}
                }
            }
            let value = trace.config.like_weight * likes as f64 + trace.config.reshare_weight * reshares as f64;
            (r.round, value)
        })
        .collect())
}

/// Full metrics block for a trace.
pub fn compute(trace: &RunTrace) -> MetricsBlock {
    let config = &trace.config;
    let typing = ContentTyping::from_config(config);
    let types = content_types(config, &typing);
    let ideal = ideal_mass(config, &typing);
    let history: Vec<ActionRecord> = trace.history().cloned().collect();
    let index = config.content_index();

    let rounds = trace
        .rounds
        .iter()
        .map(|record| {
            let r = record.round;
            let mass = share_mass(&history, &types, typing.len(), r);
            let any = mass.iter().any(|&m| m > 0.0);
            let fci = mass
                .iter()
                .zip(&ideal)
                .map(|(s, i)| if any { s - i } else { 0.0 })
                .collect();
            let reshares_by_type = {
                let mut counts = vec![0.0; typing.len()];
                for a in history.iter().filter(|a| a.kind == ActionKind::Reshare && a.round <= r) {
                    if let Some(t) = a.content.and_then(|c| types.get(&c)) {
                        counts[*t] += 1.0;
                    }
                }
                counts
            };
            let mut alignment = Vec::with_capacity(config.players.len());
            let mut empty = Vec::new();
            for p in &config.players {
                let visible = record.visibility.get(p.id.index()).map(Vec::as_slice).unwrap_or(&[]);
                let (a, flagged) = alignment_of(
                    visible.iter().map(|pair| pair.content),
                    &p.ideal,
                    config.alignment_radius,
                    config,
                );
                if flagged {
                    empty.push(p.id);
                }
                alignment.push(a);
            }
            RoundMetrics {
                round: r,
                fci,
                share_mass: mass,
                reshare_entropy: entropy(reshares_by_type),
                engagement_entropy: entropy(cumulative_engagement(&history, config, r).into_values()),
                dissent_exposure: alignment.iter().map(|a| 1.0 - a).collect(),
                exposure_alignment: alignment,
                empty_visibility: empty,
            }
        })
        .collect();

    let amplification = index
        .keys()
        .map(|&c| AmplificationCurve {
            content: c,
            values: amplification_curve(trace, c)
                .map(|series| series.into_iter().map(|(_, v)| v).collect())
                .unwrap_or_default(),
        })
        .collect();

    MetricsBlock { ideal_mass: ideal, rounds, amplification }
}
