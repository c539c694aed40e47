use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ActionKind, ActionRecord, ContentId, GameConfig, PlayerId, Round, SharedPair};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngagementEvent {
    pub round: Round,
    pub actor: PlayerId,
    pub kind: ActionKind,
    pub multiplier: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub first_shared: Round,
    pub likes_by_round: BTreeMap<Round, u32>,
    pub reshares_by_round: BTreeMap<Round, u32>,
    pub events: Vec<EngagementEvent>,
}

impl PairRecord {
    fn new(first_shared: Round) -> Self {
        Self {
            first_shared,
            likes_by_round: BTreeMap::new(),
            reshares_by_round: BTreeMap::new(),
            events: Vec::new(),
        }
    }

    pub fn likes_in(&self, round: Round) -> u32 {
        self.likes_by_round.get(&round).copied().unwrap_or(0)
    }

    pub fn reshares_in(&self, round: Round) -> u32 {
        self.reshares_by_round.get(&round).copied().unwrap_or(0)
    }

    pub fn likes_through(&self, round: Round) -> u32 {
        self.likes_by_round.range(..=round).map(|(_, n)| n).sum()
    }

    pub fn reshares_through(&self, round: Round) -> u32 {
        self.reshares_by_round.range(..=round).map(|(_, n)| n).sum()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LedgerError {
    #[error("{action} engages a pair nobody has shared")]
    UnknownPair { action: ActionRecord },
    #[error("{action} is missing its content or source")]
    Incomplete { action: ActionRecord },
}

/// Per (content, sharer) engagement counts, aggregated from the action history.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EngagementLedger {
    authors: BTreeMap<ContentId, PlayerId>,
    pairs: BTreeMap<SharedPair, PairRecord>,
}

impl EngagementLedger {
    /// Rebuilds a ledger from scratch by replaying `history`.
    pub fn from_history(history: &[ActionRecord], config: &GameConfig) -> Result<Self, LedgerError> {
        let mut ledger = Self::default();
        for action in history {
            let multiplier = config
                .player(action.actor)
                .map(|p| p.audience_multiplier)
                .unwrap_or(1.0);
            ledger.apply(action, multiplier)?;
        }
        Ok(ledger)
    }

    pub fn apply(&mut self, action: &ActionRecord, multiplier: f64) -> Result<(), LedgerError> {
        let incomplete = || LedgerError::Incomplete { action: action.clone() };
        match action.kind {
            ActionKind::Noop => {}
            ActionKind::Share => {
                let content = action.content.ok_or_else(incomplete)?;
                self.authors.entry(content).or_insert(action.actor);
                self.pairs
                    .entry(SharedPair::new(content, action.actor))
                    .or_insert_with(|| PairRecord::new(action.round));
            }
            ActionKind::Like | ActionKind::Reshare => {
                let pair = action.pair().ok_or_else(incomplete)?;
                let record = self
                    .pairs
                    .get_mut(&pair)
                    .ok_or_else(|| LedgerError::UnknownPair { action: action.clone() })?;
                let counts = if action.kind == ActionKind::Like {
                    &mut record.likes_by_round
                } else {
                    &mut record.reshares_by_round
                };
                *counts.entry(action.round).or_insert(0) += 1;
                record.events.push(EngagementEvent {
                    round: action.round,
                    actor: action.actor,
                    kind: action.kind,
                    multiplier,
                });
                if action.kind == ActionKind::Reshare {
                    self.pairs
                        .entry(SharedPair::new(pair.content, action.actor))
                        .or_insert_with(|| PairRecord::new(action.round));
                }
            }
        }
        Ok(())
    }

    pub fn author(&self, content: ContentId) -> Option<PlayerId> {
        self.authors.get(&content).copied()
    }

    pub fn authors(&self) -> &BTreeMap<ContentId, PlayerId> {
        &self.authors
    }

    pub fn record(&self, pair: SharedPair) -> Option<&PairRecord> {
        self.pairs.get(&pair)
    }

    pub fn first_shared(&self, pair: SharedPair) -> Option<Round> {
        self.pairs.get(&pair).map(|r| r.first_shared)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&SharedPair, &PairRecord)> {
        self.pairs.iter()
    }

    /// Pairs that existed strictly before `round`.
    pub fn pairs_before(&self, round: Round) -> impl Iterator<Item = SharedPair> + '_ {
        self.pairs
            .iter()
            .filter(move |(_, r)| r.first_shared < round)
            .map(|(p, _)| *p)
    }

    pub fn pairs_shared_by(&self, sharer: PlayerId) -> impl Iterator<Item = (&SharedPair, &PairRecord)> {
        self.pairs.iter().filter(move |(p, _)| p.sharer == sharer)
    }

    /// (likes, reshares) credited to `player` in `round`.
    pub fn received_in(&self, player: PlayerId, round: Round) -> (u32, u32) {
        self.pairs_shared_by(player).fold((0, 0), |(l, s), (_, r)| {
            (l + r.likes_in(round), s + r.reshares_in(round))
        })
    }

    /// Engagement-weighted, audience-scaled attention on `content` from
    /// engagements in rounds strictly before `before`, summed over sharers.
    pub fn content_attention(&self, content: ContentId, before: Round, config: &GameConfig) -> f64 {
        self.pairs
            .iter()
            .filter(|(p, _)| p.content == content)
            .flat_map(|(_, r)| r.events.iter())
            .filter(|e| e.round < before)
            .map(|e| config.weight_of(e.kind) * e.multiplier)
            .sum()
    }

    /// [`EngagementLedger::content_attention`] for every content with a pair
    /// shared before `before`, in one pass. Terms are added in the same order
    /// as the per-content sum.
    pub fn attention_by_content(&self, before: Round, config: &GameConfig) -> BTreeMap<ContentId, f64> {
        let mut out: BTreeMap<ContentId, f64> = BTreeMap::new();
        for (pair, rec) in &self.pairs {
            if rec.first_shared >= before {
                continue;
            }
            let e = out.entry(pair.content).or_insert(0.0);
            for ev in rec.events.iter().filter(|e| e.round < before) {
                *e += config.weight_of(ev.kind) * ev.multiplier;
            }
        }
        out
    }

    /// w_like * likes + w_share * reshares on `content` through `round`,
    /// all sharers aggregated.
    pub fn content_engagement_through(&self, content: ContentId, round: Round, config: &GameConfig) -> f64 {
        self.pairs
            .iter()
            .filter(|(p, _)| p.content == content)
            .map(|(_, r)| {
                config.like_weight * f64::from(r.likes_through(round))
                    + config.reshare_weight * f64::from(r.reshares_through(round))
            })
            .sum()
    }

    pub fn total_likes(&self) -> u64 {
        self.pairs
            .values()
            .flat_map(|r| r.likes_by_round.values())
            .map(|&n| u64::from(n))
            .sum()
    }

    pub fn total_reshares(&self) -> u64 {
        self.pairs
            .values()
            .flat_map(|r| r.reshares_by_round.values())
            .map(|&n| u64::from(n))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;

    #[test]
    fn reshare_creates_a_new_sharer() {
        let config = scenarios::two_player_quid_pro_quo(2, false);
        let c0 = config.pool(PlayerId(0))[0].id;
        let history = vec![
            ActionRecord::share(0, PlayerId(0), c0),
            ActionRecord::reshare(1, PlayerId(1), SharedPair::new(c0, PlayerId(0))),
        ];
        let ledger = EngagementLedger::from_history(&history, &config).unwrap();
        assert_eq!(ledger.first_shared(SharedPair::new(c0, PlayerId(1))), Some(1));
        assert_eq!(ledger.received_in(PlayerId(0), 1), (0, 1));
        assert_eq!(ledger.total_reshares(), 1);
        assert_eq!(ledger.author(c0), Some(PlayerId(0)));
    }

    #[test]
    fn engaging_an_unshared_pair_fails() {
        let config = scenarios::two_player_quid_pro_quo(2, false);
        let bogus = ActionRecord::like(1, PlayerId(1), SharedPair::new(ContentId(99), PlayerId(0)));
        assert!(matches!(
            EngagementLedger::from_history(&[bogus], &config),
            Err(LedgerError::UnknownPair { .. })
        ));
    }
}
