//! Runs the repeated game.
//!
//! A run is strictly sequential and draws from one ChaCha8 stream seeded with
//! `rng_seed`. Consumption order is fixed:
//!
//! 1. cheap talk (no draws; display rules are deterministic),
//! 2. round 0 policy draws, players in id order,
//! 3. each later round: visibility draws (imperfect mode only; players in id
//!    order, pairs in (content, sharer) order, one uniform per pair whose
//!    probability is below 1), then policy draws in player id order.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ledger::{EngagementLedger, LedgerError};
use crate::metrics::{self, MetricsBlock};
use crate::model::{
    is_legal, legal_actions, mean_vector, validate_config, ActionRecord, BeliefState, ContentId, GameConfig,
    GameState, InfoMode, ModelError, PlayerId, Round, SharedPair, ValidationReport,
};
use crate::policies::{self, PolicyContext, PolicyError};
use crate::utility::{combined_utility, UtilityBreakdown, UtilityError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibilityModel {
    pub mode: InfoMode,
    pub floor: f64,
}

impl VisibilityModel {
    pub fn from_config(config: &GameConfig) -> Self {
        Self { mode: config.info_mode, floor: config.visibility_floor }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Display {
    pub player: PlayerId,
    pub content: ContentId,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheapTalkRecord {
    pub displays: Vec<Display>,
    pub beliefs: Vec<BeliefState>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub player: PlayerId,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: Round,
    /// Per player, the pairs available to engage at the start of the round.
    pub visibility: Vec<Vec<SharedPair>>,
    pub actions: Vec<ActionRecord>,
    pub utilities: Vec<UtilityBreakdown>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<Annotation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub config: GameConfig,
    pub seed: u64,
    pub cheap_talk: Option<CheapTalkRecord>,
    pub rounds: Vec<RoundRecord>,
    pub metrics: MetricsBlock,
}

impl RunTrace {
    pub fn history(&self) -> impl Iterator<Item = &ActionRecord> {
        self.rounds.iter().flat_map(|r| r.actions.iter())
    }

    pub fn history_through(&self, round: Round) -> Vec<ActionRecord> {
        self.history().filter(|a| a.round <= round).cloned().collect()
    }

    /// Horizon-total combined utility of `player`.
    pub fn payoff(&self, player: PlayerId) -> f64 {
        self.rounds
            .iter()
            .filter_map(|r| r.utilities.get(player.index()))
            .map(|u| u.combined)
            .sum()
    }

    pub fn last_round(&self) -> Round {
        self.rounds.last().map(|r| r.round).unwrap_or(0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("config has fatal violations:\n{0}")]
    FatalConfig(ValidationReport),
    #[error("illegal action by {actor} in round {round}: {action} ({reason})")]
    IllegalAction { actor: PlayerId, round: Round, action: ActionRecord, reason: String },
    #[error("round {round}: {reason}")]
    BadRoundInput { round: Round, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("policy failed for {actor} in round {round}: {source}")]
    Policy { actor: PlayerId, round: Round, source: PolicyError },
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Utility(#[from] UtilityError),
}

/// SplitMix64 step used to derive independent per-run seeds.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Probability that any pair carrying `content` is visible in `round`:
/// `floor + (1 - floor) * E(c) / max E`, with E the audience-weighted
/// engagement before `round`. Perfect information always yields 1.
pub fn visibility_probability(ledger: &EngagementLedger, content: ContentId, round: Round, config: &GameConfig) -> f64 {
    if config.info_mode == InfoMode::Perfect {
        return 1.0;
    }
    let attention = content_attention_map(ledger, round, config);
    probability_from(&attention, content, config.visibility_floor)
}

fn content_attention_map(ledger: &EngagementLedger, round: Round, config: &GameConfig) -> BTreeMap<ContentId, f64> {
    ledger.attention_by_content(round, config)
}

fn probability_from(attention: &BTreeMap<ContentId, f64>, content: ContentId, floor: f64) -> f64 {
    let max = attention.values().copied().fold(0.0, f64::max);
    scaled_probability(attention.get(&content).copied().unwrap_or(0.0), max, floor)
}

fn scaled_probability(e: f64, max: f64, floor: f64) -> f64 {
    if max <= 0.0 {
        return floor;
    }
    if e >= max {
        return 1.0;
    }
    (floor + (1.0 - floor) * e / max).min(1.0)
}

/// Draws each player's visible set for the current round of `state`.
pub fn sample_visibility<R: Rng + ?Sized>(
    state: &GameState,
    model: VisibilityModel,
    config: &GameConfig,
    rng: &mut R,
) -> Vec<BTreeSet<SharedPair>> {
    let n = config.players.len();
    if model.mode == InfoMode::Perfect {
        return state.full_catalogs(n);
    }
    let attention = content_attention_map(&state.ledger, state.round, config);
    let max = attention.values().copied().fold(0.0, f64::max);
    let entries: Vec<(SharedPair, Option<PlayerId>, f64)> = state
        .ledger
        .pairs_before(state.round)
        .map(|pair| {
            let e = attention.get(&pair.content).copied().unwrap_or(0.0);
            (pair, state.ledger.author(pair.content), scaled_probability(e, max, model.floor))
        })
        .collect();
    (0..n)
        .map(|i| {
            let player = PlayerId(i as u32);
            entries
                .iter()
                .filter(|(pair, author, _)| pair.sharer != player && *author != Some(player))
                .filter(|(_, _, p)| *p >= 1.0 || rng.gen::<f64>() < *p)
                .map(|(pair, _, _)| *pair)
                .collect()
        })
        .collect()
}

/// Pre-game display round. Each player shows one pool item; beliefs about the
/// majority are the mean of the other players' displays, and the level-2
/// estimate is the mean of the other players' level-1 estimates.
pub fn cheap_talk(config: &GameConfig) -> CheapTalkRecord {
    let displays: Vec<Display> = config
        .players
        .iter()
        .filter_map(|p| {
            policies::display_item(p, config).map(|item| Display {
                player: p.id,
                content: item.id,
                vector: item.vector.clone(),
            })
        })
        .collect();
    let k = config.k_dims;
    let level_one: Vec<Option<Vec<f64>>> = config
        .players
        .iter()
        .map(|p| {
            mean_vector(
                displays.iter().filter(|d| d.player != p.id).map(|d| d.vector.as_slice()),
                k,
            )
        })
        .collect();
    let beliefs = config
        .players
        .iter()
        .map(|p| {
            let level_two = mean_vector(
                level_one
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != p.id.index())
                    .filter_map(|(_, est)| est.as_deref()),
                k,
            );
            let mine = level_one[p.id.index()].clone();
            BeliefState {
                majority_centroid_of_centroid_estimate: mine.as_ref().and(level_two),
                majority_centroid_estimate: mine,
                gamma_type_beliefs: p.belief.gamma_type_beliefs.clone(),
            }
        })
        .collect();
    CheapTalkRecord { displays, beliefs }
}

/// Applies one simultaneous round of actions.
///
/// Legality is checked against the pre-round state. Afterwards the history
/// and ledger include the round, the round counter advances, and every
/// visible set holds the full catalog; imperfect-information runs thin it
/// with [`sample_visibility`] before the next moves.
pub fn step_round(state: &GameState, chosen: &[ActionRecord], config: &GameConfig) -> Result<GameState, EngineError> {
    let round = state.round;
    if chosen.len() != config.players.len() {
        return Err(EngineError::BadRoundInput {
            round,
            reason: format!("expected {} actions, got {}", config.players.len(), chosen.len()),
        });
    }
    for (idx, action) in chosen.iter().enumerate() {
        if action.actor.index() != idx {
            return Err(EngineError::BadRoundInput {
                round,
                reason: format!("action {idx} belongs to {}", action.actor),
            });
        }
        check_legal(state, action, config)?;
    }

    let mut next = GameState {
        round: state.round,
        history: state.history.clone(),
        ledger: state.ledger.clone(),
        visible_sets: Vec::new(),
        beliefs: state.beliefs.clone(),
        performed: state.performed.clone(),
        shared: state.shared.clone(),
    };
    for action in chosen {
        let multiplier = config
            .player(action.actor)
            .map(|p| p.audience_multiplier)
            .unwrap_or(1.0);
        next.ledger.apply(action, multiplier)?;
        next.record(action);
    }
    next.round = round + 1;
    next.visible_sets = next.full_catalogs(config.players.len());
    Ok(next)
}

fn check_legal(state: &GameState, action: &ActionRecord, config: &GameConfig) -> Result<(), EngineError> {
    let illegal = |reason: &str| EngineError::IllegalAction {
        actor: action.actor,
        round: state.round,
        action: action.clone(),
        reason: reason.to_string(),
    };
    if action.round != state.round {
        return Err(illegal("wrong round"));
    }
    if is_legal(state, action, config)? {
        Ok(())
    } else {
        Err(illegal("not in the legal set"))
    }
}

/// Runs a full game from its config.
pub fn run_game(config: &GameConfig) -> Result<RunTrace, EngineError> {
    let report = validate_config(config);
    if !report.is_runnable() {
        return Err(EngineError::FatalConfig(report));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let model = VisibilityModel::from_config(config);
    let mut state = GameState::initial(config);

    let cheap = config.cheap_talk.then(|| cheap_talk(config));
    if let Some(ct) = &cheap {
        state.beliefs = ct.beliefs.clone();
    }

    let mut rounds = Vec::with_capacity(config.horizon as usize + 1);
    for round in 0..=config.horizon {
        if round >= 1 && model.mode == InfoMode::Imperfect {
            state.visible_sets = sample_visibility(&state, model, config, &mut rng);
        }
        let visibility: Vec<Vec<SharedPair>> = state
            .visible_sets
            .iter()
            .map(|s| s.iter().copied().collect())
            .collect();

        let mut actions = Vec::with_capacity(config.players.len());
        let mut notes = Vec::new();
        for player in &config.players {
            let legal = legal_actions(&state, player.id, config)?;
            let ctx = PolicyContext { player, state: &state, legal: &legal, config };
            let decision = policies::choose(&ctx, &mut rng)
                .map_err(|source| EngineError::Policy { actor: player.id, round, source })?;
            if !legal.contains(&decision.action) {
                return Err(EngineError::IllegalAction {
                    actor: player.id,
                    round,
                    action: decision.action,
                    reason: format!("policy {} chose outside the legal set", player.policy.label()),
                });
            }
            if let Some(note) = decision.note {
                notes.push(Annotation { player: player.id, note });
            }
            actions.push(decision.action);
        }

        state = step_round(&state, &actions, config)?;
        let utilities = config
            .players
            .iter()
            .map(|p| combined_utility(p, &state, config))
            .collect::<Result<Vec<_>, _>>()?;
        rounds.push(RoundRecord { round, visibility, actions, utilities, notes });
    }

    let mut trace = RunTrace {
        config: config.clone(),
        seed: config.rng_seed,
        cheap_talk: cheap,
        rounds,
        metrics: MetricsBlock::default(),
    };
    trace.metrics = metrics::compute(&trace);
    Ok(trace)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    pub final_state: GameState,
    pub rounds_checked: usize,
}

/// Re-applies a trace's actions round by round against its recorded visible
/// sets, checking legality and that the incremental ledger matches a recount
/// from history after every round.
pub fn replay(trace: &RunTrace) -> Result<ReplayReport, EngineError> {
    let config = &trace.config;
    let mut state = GameState::initial(config);
    if let Some(ct) = &trace.cheap_talk {
        state.beliefs = ct.beliefs.clone();
    }
    for record in &trace.rounds {
        if record.round != state.round {
            return Err(EngineError::BadRoundInput {
                round: state.round,
                reason: format!("trace skips to round {}", record.round),
            });
        }
        if record.round >= 1 {
            state.visible_sets = record
                .visibility
                .iter()
                .map(|v| v.iter().copied().collect())
                .collect();
        }
        state = step_round(&state, &record.actions, config)?;
        let recount = EngagementLedger::from_history(&state.history, config)?;
        if recount != state.ledger {
            return Err(EngineError::BadRoundInput {
                round: record.round,
                reason: "ledger recount differs from incremental ledger".into(),
            });
        }
    }
    Ok(ReplayReport { final_state: state, rounds_checked: trace.rounds.len() })
}
