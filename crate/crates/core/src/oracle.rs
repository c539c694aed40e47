//! Exact small-instance solver. Builds the normal form of a game over finite
//! per-player strategy menus by running the engine once per profile, then
//! answers best-response, pure-Nash and weak-dominance queries.
//!
//! Equilibrium statements are relative to the supplied menus. Menus are either
//! policies or open-loop scripts; [`contingent_plans`] enumerates the full
//! history-contingent plan space for horizons of at most two rounds.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{run_game, step_round, EngineError, RunTrace};
use crate::model::{
    legal_actions, ActionKind, ActionRecord, GameConfig, GameState, InfoMode, ModelError, PlannedMove, PlayerId,
    PolicyId,
};
use crate::par::{self, Execution};
use crate::policies::history_key;

pub const DEFAULT_PROFILE_CAP: usize = 1_000_000;
pub const DEFAULT_PLAN_CAP: usize = 100_000;
/// Payoff gaps at or below this are treated as ties.
pub const EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    pub label: String,
    pub policy: PolicyId,
}

impl Strategy {
    pub fn new(label: impl Into<String>, policy: PolicyId) -> Self {
        Self { label: label.into(), policy }
    }

    pub fn open_loop(label: impl Into<String>, moves: Vec<PlannedMove>) -> Self {
        Self::new(label, PolicyId::Scripted { moves })
    }
}

/// Which rounds count toward the payoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayoffScope {
    /// Combined utility at round 0 only.
    RoundZero,
    /// Combined utility summed over rounds 0..=horizon.
    #[default]
    FullHorizon,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub cap: usize,
    pub scope: PayoffScope,
    pub execution: Execution,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { cap: DEFAULT_PROFILE_CAP, scope: PayoffScope::FullHorizon, execution: Execution::Parallel }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("{profiles} profiles exceed the cap of {cap}")]
    CapExceeded { profiles: u128, cap: usize },
    #[error("stochastic strategy in exact oracle: {label}")]
    Stochastic { label: String },
    #[error("exact oracle requires perfect information")]
    ImperfectInformation,
    #[error("expected {expected} menus, got {found}")]
    MenuCount { expected: usize, found: usize },
    #[error("empty menu for {0}")]
    EmptyMenu(PlayerId),
    #[error("unknown player index {0}")]
    UnknownPlayerIndex(usize),
    #[error("unknown strategy {strategy} for {player}")]
    UnknownStrategy { player: PlayerId, strategy: usize },
    #[error("contingent plans need a horizon of at most 2, got {0}")]
    HorizonTooLong(u32),
    #[error("profile {profile:?}: {source}")]
    Engine { profile: Vec<usize>, source: EngineError },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Step(#[from] EngineError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormGame {
    pub config: GameConfig,
    pub menus: Vec<Vec<Strategy>>,
    pub scope: PayoffScope,
    /// Profile-major: `payoffs[index * n + player]`.
    payoffs: Vec<f64>,
}

impl NormalFormGame {
    pub fn n_players(&self) -> usize {
        self.menus.len()
    }

    pub fn profile_count(&self) -> usize {
        self.menus.iter().map(Vec::len).product()
    }

    /// Mixed-radix index with player 0 as the most significant digit.
    pub fn index_of(&self, profile: &[usize]) -> usize {
        profile
            .iter()
            .zip(&self.menus)
            .fold(0, |acc, (&s, menu)| acc * menu.len() + s)
    }

    pub fn profile_of(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.menus.len()];
        for (slot, menu) in out.iter_mut().zip(&self.menus).rev() {
            *slot = index % menu.len();
            index /= menu.len();
        }
        out
    }

    pub fn payoff(&self, profile: &[usize], player: usize) -> f64 {
        self.payoffs[self.index_of(profile) * self.n_players() + player]
    }

    pub fn payoffs(&self, profile: &[usize]) -> &[f64] {
        let n = self.n_players();
        let start = self.index_of(profile) * n;
        &self.payoffs[start..start + n]
    }

    pub fn profiles(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.profile_count()).map(|i| self.profile_of(i))
    }

    /// The config with each player's policy replaced by its profile strategy.
    pub fn config_for(&self, profile: &[usize]) -> GameConfig {
        config_for(&self.config, &self.menus, profile)
    }

    pub fn labels(&self, profile: &[usize]) -> Vec<&str> {
        profile
            .iter()
            .zip(&self.menus)
            .map(|(&s, menu)| menu[s].label.as_str())
            .collect()
    }

    /// Index of `label` in `player`'s menu.
    pub fn strategy_index(&self, player: usize, label: &str) -> Option<usize> {
        self.menus.get(player)?.iter().position(|s| s.label == label)
    }

    /// Builds a game straight from a payoff table; used for testing queries.
    pub fn from_payoffs(config: GameConfig, menus: Vec<Vec<Strategy>>, payoffs: Vec<f64>) -> Self {
        Self { config, menus, scope: PayoffScope::FullHorizon, payoffs }
    }
}

fn config_for(base: &GameConfig, menus: &[Vec<Strategy>], profile: &[usize]) -> GameConfig {
    let mut config = base.clone();
    for ((player, menu), &s) in config.players.iter_mut().zip(menus).zip(profile) {
        player.policy = menu[s].policy.clone();
    }
    config
}

pub fn scoped_payoff(trace: &RunTrace, player: PlayerId, scope: PayoffScope) -> f64 {
    match scope {
        PayoffScope::FullHorizon => trace.payoff(player),
        PayoffScope::RoundZero => trace
            .rounds
            .first()
            .and_then(|r| r.utilities.get(player.index()))
            .map_or(0.0, |u| u.combined),
    }
}

pub fn build_normal_form(config: &GameConfig, menus: Vec<Vec<Strategy>>) -> Result<NormalFormGame, OracleError> {
    build_normal_form_with(config, menus, OracleOptions::default())
}

pub fn build_normal_form_with(
    config: &GameConfig,
    menus: Vec<Vec<Strategy>>,
    options: OracleOptions,
) -> Result<NormalFormGame, OracleError> {
    if config.info_mode != InfoMode::Perfect {
        return Err(OracleError::ImperfectInformation);
    }
    if menus.len() != config.players.len() {
        return Err(OracleError::MenuCount { expected: config.players.len(), found: menus.len() });
    }
    let mut profiles: u128 = 1;
    for (i, menu) in menus.iter().enumerate() {
        if menu.is_empty() {
            return Err(OracleError::EmptyMenu(PlayerId(i as u32)));
        }
        if let Some(s) = menu.iter().find(|s| s.policy.is_stochastic()) {
            return Err(OracleError::Stochastic { label: s.label.clone() });
        }
        profiles = profiles.saturating_mul(menu.len() as u128);
    }
    if profiles > options.cap as u128 {
        return Err(OracleError::CapExceeded { profiles, cap: options.cap });
    }

    let mut game = NormalFormGame { config: config.clone(), menus, scope: options.scope, payoffs: Vec::new() };
    let n = game.n_players();
    let rows = par::map_range(profiles as usize, options.execution, |index| {
        let profile = game.profile_of(index);
        let trace = run_game(&game.config_for(&profile))
            .map_err(|source| OracleError::Engine { profile: profile.clone(), source })?;
        Ok::<_, OracleError>((0..n).map(|p| scoped_payoff(&trace, PlayerId(p as u32), options.scope)).collect::<Vec<_>>())
    });
    let mut payoffs = Vec::with_capacity(profiles as usize * n);
    for row in rows {
        payoffs.extend(row?);
    }
    game.payoffs = payoffs;
    Ok(game)
}

/// Strategies maximizing `player`'s payoff with the other entries of
/// `profile` held fixed; ties are all included.
pub fn best_responses(game: &NormalFormGame, profile: &[usize], player: usize) -> Vec<usize> {
    let mut probe = profile.to_vec();
    let values: Vec<f64> = (0..game.menus[player].len())
        .map(|s| {
            probe[player] = s;
            game.payoff(&probe, player)
        })
        .collect();
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v >= best - EPS)
        .map(|(s, _)| s)
        .collect()
}

/// Profiles in which no player has a strictly improving unilateral deviation.
pub fn find_pure_nash(game: &NormalFormGame) -> Vec<Vec<usize>> {
    game.profiles()
        .filter(|profile| is_pure_nash(game, profile))
        .collect()
}

pub fn is_pure_nash(game: &NormalFormGame, profile: &[usize]) -> bool {
    let mut probe = profile.to_vec();
    (0..game.n_players()).all(|p| {
        let current = game.payoff(profile, p);
        let ok = (0..game.menus[p].len()).all(|s| {
            probe[p] = s;
            game.payoff(&probe, p) <= current + EPS
        });
        probe[p] = profile[p];
        ok
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    StrictlyDominates,
    WeaklyDominates,
    Incomparable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceRelation {
    pub player: usize,
    pub a: usize,
    pub b: usize,
    pub verdict: Verdict,
    /// Full profiles (with `a` in the player's slot) where a's payoff is at
    /// least b's.
    pub weak_witnesses: Vec<Vec<usize>>,
    /// Profiles where a's payoff strictly exceeds b's.
    pub strict_witnesses: Vec<Vec<usize>>,
    /// Profiles where b does strictly better.
    pub counter_witnesses: Vec<Vec<usize>>,
}

pub fn weak_dominance(game: &NormalFormGame, player: usize, a: usize, b: usize) -> Result<DominanceRelation, OracleError> {
    let menu = game.menus.get(player).ok_or(OracleError::UnknownPlayerIndex(player))?;
    for s in [a, b] {
        if s >= menu.len() {
            return Err(OracleError::UnknownStrategy { player: PlayerId(player as u32), strategy: s });
        }
    }
    let mut relation = DominanceRelation {
        player,
        a,
        b,
        verdict: Verdict::Incomparable,
        weak_witnesses: Vec::new(),
        strict_witnesses: Vec::new(),
        counter_witnesses: Vec::new(),
    };
    let mut opponents = 0usize;
    for profile in game.profiles().filter(|p| p[player] == a) {
        opponents += 1;
        let mut other = profile.clone();
        other[player] = b;
        let gap = game.payoff(&profile, player) - game.payoff(&other, player);
        if gap >= -EPS {
            relation.weak_witnesses.push(profile.clone());
        } else {
            relation.counter_witnesses.push(profile.clone());
        }
        if gap > EPS {
            relation.strict_witnesses.push(profile);
        }
    }
    relation.verdict = if relation.strict_witnesses.len() == opponents {
        Verdict::StrictlyDominates
    } else if relation.counter_witnesses.is_empty() && !relation.strict_witnesses.is_empty() {
        Verdict::WeaklyDominates
    } else {
        Verdict::Incomparable
    };
    Ok(relation)
}

/// Planned moves available to `player` given its legal actions.
fn planned_options(legal: &[ActionRecord]) -> Vec<PlannedMove> {
    let mut out = BTreeMap::new();
    for a in legal {
        let planned = match a.kind {
            ActionKind::Noop => PlannedMove::Noop,
            ActionKind::Share => match a.content {
                Some(content) => PlannedMove::Share { content },
                None => continue,
            },
            ActionKind::Like => match a.source {
                Some(source) => PlannedMove::Like { source },
                None => continue,
            },
            ActionKind::Reshare => match a.source {
                Some(source) => PlannedMove::Reshare { source },
                None => continue,
            },
        };
        out.insert(planned_key(&planned), planned);
    }
    out.into_values().collect()
}

fn planned_key(m: &PlannedMove) -> (u8, u32) {
    match m {
        PlannedMove::Noop => (0, 0),
        PlannedMove::ShareClosest => (1, 0),
        PlannedMove::Share { content } => (2, content.0),
        PlannedMove::Like { source } => (3, source.0),
        PlannedMove::Reshare { source } => (4, source.0),
    }
}

/// Every decision node of `player` reachable under any joint play, with the
/// planned moves available there. Perfect information only.
fn decision_nodes(
    config: &GameConfig,
    player: PlayerId,
    cap: usize,
) -> Result<Vec<(String, Vec<PlannedMove>)>, OracleError> {
    let mut nodes = BTreeMap::new();
    let mut frontier = vec![GameState::initial(config)];
    for _ in 0..=config.horizon {
        let mut next = Vec::new();
        for state in &frontier {
            let legal = legal_actions(state, player, config)?;
            nodes.insert(history_key(&state.history), planned_options(&legal));
            if state.round == config.horizon {
                continue;
            }
            let menus: Vec<Vec<ActionRecord>> = config
                .player_ids()
                .map(|p| legal_actions(state, p, config))
                .collect::<Result<_, _>>()?;
            let total: usize = menus.iter().map(Vec::len).product();
            if next.len() + total > cap {
                return Err(OracleError::CapExceeded { profiles: (next.len() + total) as u128, cap });
            }
            for index in 0..total {
                let mut rest = index;
                let mut joint = Vec::with_capacity(menus.len());
                for menu in menus.iter().rev() {
                    joint.push(menu[rest % menu.len()].clone());
                    rest /= menu.len();
                }
                joint.reverse();
                next.push(step_round(state, &joint, config)?);
            }
        }
        frontier = next;
    }
    Ok(nodes.into_iter().collect())
}

/// The full space of history-contingent plans for `player`, one strategy per
/// plan. Horizon at most 2; fails once the plan or node count passes `cap`.
pub fn contingent_plans(config: &GameConfig, player: PlayerId, cap: usize) -> Result<Vec<Strategy>, OracleError> {
    if config.horizon > 2 {
        return Err(OracleError::HorizonTooLong(config.horizon));
    }
    if config.info_mode != InfoMode::Perfect {
        return Err(OracleError::ImperfectInformation);
    }
    let nodes = decision_nodes(config, player, cap)?;
    let mut count: u128 = 1;
    for (_, options) in &nodes {
        count = count.saturating_mul(options.len().max(1) as u128);
    }
    if count > cap as u128 {
        return Err(OracleError::CapExceeded { profiles: count, cap });
    }
    let mut plans = Vec::with_capacity(count as usize);
    for index in 0..count as usize {
        let mut rest = index;
        let mut plan = BTreeMap::new();
        let mut label = String::from("plan");
        for (key, options) in nodes.iter().rev() {
            if options.is_empty() {
                continue;
            }
            let choice = rest % options.len();
            rest /= options.len();
            label.push_str(&format!("-{choice}"));
            plan.insert(key.clone(), options[choice].clone());
        }
        plans.push(Strategy::new(label, PolicyId::Contingent { plan }));
    }
    Ok(plans)
}
