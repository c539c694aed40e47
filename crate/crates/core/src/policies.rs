//! Strategy library. Each policy maps a player's view of the game to one of
//! its legal actions. Ties break toward the lowest content id, then the lowest
//! player id.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use thiserror::Error;

use crate::model::{
    distance, normalized_distance, ActionKind, ActionRecord, ContentItem, GameConfig, GameState,
    PlannedMove, PlayerId, PlayerSpec, PolicyId, Round, SharedPair,
};
use crate::utility::{personal_utility_of, shared_content};

pub struct PolicyContext<'a> {
    pub player: &'a PlayerSpec,
    pub state: &'a GameState,
    pub legal: &'a [ActionRecord],
    pub config: &'a GameConfig,
}

impl PolicyContext<'_> {
    fn round(&self) -> Round {
        self.state.round
    }

    fn me(&self) -> PlayerId {
        self.player.id
    }

    fn noop(&self) -> ActionRecord {
        ActionRecord::noop(self.round(), self.me())
    }

    fn vector_of(&self, action: &ActionRecord) -> Option<&[f64]> {
        action
            .content
            .and_then(|c| self.config.content(c))
            .map(|item| item.vector.as_slice())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub action: ActionRecord,
    pub note: Option<String>,
}

impl Decision {
    fn plain(action: ActionRecord) -> Self {
        Self { action, note: None }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error("no legal action available")]
    NoLegalAction,
    #[error("unknown influencer target {0}")]
    UnknownTarget(PlayerId),
    #[error("planned move {planned:?} has no legal counterpart")]
    Unresolvable { planned: PlannedMove },
    #[error("contingent plan has no entry for history {key:?}")]
    MissingPlan { key: String },
}

pub fn choose<R: Rng + ?Sized>(ctx: &PolicyContext<'_>, rng: &mut R) -> Result<Decision, PolicyError> {
    if ctx.legal.is_empty() {
        return Err(PolicyError::NoLegalAction);
    }
    match &ctx.player.policy {
        PolicyId::Idealist => Ok(Decision::plain(idealist_choice(ctx))),
        PolicyId::QuidProQuo { grim } => Ok(Decision::plain(quid_pro_quo_choice(ctx, *grim))),
        PolicyId::UniformMixer => Ok(Decision::plain(uniform_mixer_choice(ctx, rng))),
        PolicyId::LevelK { depth } => Ok(level_k_choice(ctx, *depth)),
        PolicyId::InfluencerSeeker { target } => influencer_seeker_choice(ctx, *target).map(Decision::plain),
        PolicyId::InfluencerReposter { radius } => Ok(Decision::plain(influencer_reposter_choice(ctx, *radius))),
        PolicyId::Reactor { center, radius, follows } => {
            Ok(Decision::plain(reactor_choice(ctx, center.as_deref(), *radius, *follows)))
        }
        PolicyId::Scripted { moves } => {
            let planned = moves.get(ctx.round() as usize).cloned().unwrap_or(PlannedMove::Noop);
            resolve_planned(ctx, &planned).map(Decision::plain)
        }
        PolicyId::Contingent { plan } => {
            let key = history_key(&ctx.state.history);
            let planned = plan.get(&key).ok_or(PolicyError::MissingPlan { key })?;
            resolve_planned(ctx, planned).map(Decision::plain)
        }
    }
}

/// Pool item a player shows during cheap talk. Idealists (and level-0
/// reasoners, reposters and scripted players) show what they like best;
/// reactors show what sits nearest their reaction center; every other
/// engagement seeker shows the item nearest the salient type when one is
/// configured.
pub fn display_item<'a>(player: &PlayerSpec, config: &'a GameConfig) -> Option<&'a ContentItem> {
    let pool = config.pool(player.id);
    let target: &[f64] = match &player.policy {
        PolicyId::Idealist
        | PolicyId::LevelK { depth: 0 }
        | PolicyId::InfluencerReposter { .. }
        | PolicyId::Scripted { .. }
        | PolicyId::Contingent { .. } => &player.ideal,
        PolicyId::Reactor { center, .. } => center.as_deref().unwrap_or(&player.ideal),
        PolicyId::QuidProQuo { .. }
        | PolicyId::UniformMixer
        | PolicyId::LevelK { .. }
        | PolicyId::InfluencerSeeker { .. } => config.salient_centroid().unwrap_or(&player.ideal),
    };
    closest_item(pool.iter(), target)
}

fn closest_item<'a>(items: impl Iterator<Item = &'a ContentItem>, target: &[f64]) -> Option<&'a ContentItem> {
    items.min_by(|a, b| by_distance_then_id(distance(&a.vector, target), a.id, distance(&b.vector, target), b.id))
}

fn by_distance_then_id<T: Ord>(da: f64, ia: T, db: f64, ib: T) -> Ordering {
    da.total_cmp(&db).then(ia.cmp(&ib))
}

/// Legal `Share` whose content lies closest to `target`.
fn closest_share(ctx: &PolicyContext<'_>, target: &[f64]) -> Option<ActionRecord> {
    ctx.legal
        .iter()
        .filter(|a| a.kind == ActionKind::Share)
        .filter_map(|a| ctx.vector_of(a).map(|v| (distance(v, target), a)))
        .min_by(|(da, a), (db, b)| by_distance_then_id(*da, a.content, *db, b.content))
        .map(|(_, a)| a.clone())
}

/// Legal engagement of `kind` whose content lies closest to `target`.
fn closest_engagement(ctx: &PolicyContext<'_>, kind: ActionKind, target: &[f64], radius: Option<f64>) -> Option<ActionRecord> {
    ctx.legal
        .iter()
        .filter(|a| a.kind == kind)
        .filter_map(|a| ctx.vector_of(a).map(|v| (normalized_distance(v, target), a)))
        .filter(|(d, _)| radius.is_none_or(|r| *d <= r))
        .min_by(|(da, a), (db, b)| da.total_cmp(db).then(a.content.cmp(&b.content)).then(a.source.cmp(&b.source)))
        .map(|(_, a)| a.clone())
}

pub fn idealist_choice(ctx: &PolicyContext<'_>) -> ActionRecord {
    let ideal = &ctx.player.ideal;
    if ctx.round() == 0 {
        return closest_share(ctx, ideal).unwrap_or_else(|| ctx.legal[0].clone());
    }
    // Only new content changes the player's own utility; engagement credits
    // the source, so it ties with Noop.
    let index = ctx.config.content_index();
    let current: Vec<&[f64]> = shared_content(ctx.state)
        .into_iter()
        .filter_map(|c| index.get(&c).map(|i| i.vector.as_slice()))
        .collect();
    let baseline = personal_utility_of(ideal, current.iter().copied()).unwrap_or(0.0);
    let mut best: Option<(f64, &ActionRecord)> = None;
    for action in ctx.legal.iter().filter(|a| a.kind == ActionKind::Share) {
        let Some(v) = ctx.vector_of(action) else { continue };
        let with = personal_utility_of(ideal, current.iter().copied().chain([v])).unwrap_or(0.0);
        let gain = ctx.player.gamma * (with - baseline);
        if gain > 0.0 && best.is_none_or(|(g, b)| gain > g || (gain == g && action.content < b.content)) {
            best = Some((gain, action));
        }
    }
    best.map(|(_, a)| a.clone()).unwrap_or_else(|| ctx.noop())
}

/// Players whose engagement with `me` in `round`, weighted by action weight.
fn engagers_in(ctx: &PolicyContext<'_>, round: Round) -> Vec<(PlayerId, f64)> {
    let mut weight: BTreeMap<PlayerId, f64> = BTreeMap::new();
    for a in ctx.state.actions_in_round(round) {
        if a.is_engagement() && a.source == Some(ctx.me()) && a.actor != ctx.me() {
            *weight.entry(a.actor).or_insert(0.0) += ctx.config.weight_of(a.kind);
        }
    }
    let mut out: Vec<(PlayerId, f64)> = weight.into_iter().collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    out
}

/// Partners who left one of `me`'s engagements unanswered the next round.
fn failed_partners(ctx: &PolicyContext<'_>) -> BTreeSet<PlayerId> {
    let me = ctx.me();
    let mut failed = BTreeSet::new();
    let last_done = ctx.round().saturating_sub(1);
    for mine in ctx.state.history.iter().filter(|a| a.actor == me && a.is_engagement()) {
        let Some(partner) = mine.source else { continue };
        if mine.round + 1 > last_done {
            continue;
        }
        let answered = ctx
            .state
            .actions_in_round(mine.round + 1)
            .any(|a| a.actor == partner && a.is_engagement() && a.source == Some(me));
        if !answered {
            failed.insert(partner);
        }
    }
    failed
}

/// Cheapest unplayed engagement (Like before Reshare) on `partner`'s most
/// recently shared pair that is still open to `me`.
fn cheapest_on_latest(ctx: &PolicyContext<'_>, partner: PlayerId) -> Option<ActionRecord> {
    let open: Vec<&ActionRecord> = ctx
        .legal
        .iter()
        .filter(|a| a.is_engagement() && a.source == Some(partner))
        .collect();
    let latest = open
        .iter()
        .filter_map(|a| a.pair())
        .max_by(|a, b| {
            let ra = ctx.state.ledger.first_shared(*a);
            let rb = ctx.state.ledger.first_shared(*b);
            ra.cmp(&rb).then(b.content.cmp(&a.content))
        })?;
    [ActionKind::Like, ActionKind::Reshare].into_iter().find_map(|kind| {
        open.iter()
            .find(|a| a.kind == kind && a.pair() == Some(latest))
            .map(|a| (*a).clone())
    })
}

pub fn quid_pro_quo_choice(ctx: &PolicyContext<'_>, grim: bool) -> ActionRecord {
    let round = ctx.round();
    let ideal = &ctx.player.ideal;
    if round == 0 {
        return closest_share(ctx, ideal).unwrap_or_else(|| ctx.legal[0].clone());
    }
    let cycling = ctx.config.allow_new_content;
    if cycling && round >= 3 && round.is_multiple_of(3) {
        if let Some(fresh) = closest_share(ctx, ideal) {
            return fresh;
        }
    }
    let excluded = if grim { failed_partners(ctx) } else { BTreeSet::new() };

    for (partner, _) in engagers_in(ctx, round - 1) {
        if excluded.contains(&partner) {
            continue;
        }
        if let Some(action) = cheapest_on_latest(ctx, partner) {
            return action;
        }
    }

    let opening = round == 1 || (cycling && round >= 4 && round % 3 == 1);
    if opening {
        for partner in ctx.config.player_ids().filter(|&p| p != ctx.me() && !excluded.contains(&p)) {
            if let Some(action) = cheapest_on_latest(ctx, partner) {
                return action;
            }
        }
    }
    ctx.noop()
}

pub fn uniform_mixer_choice<R: Rng + ?Sized>(ctx: &PolicyContext<'_>, rng: &mut R) -> ActionRecord {
    ctx.legal[rng.gen_range(0..ctx.legal.len())].clone()
}

pub fn level_k_choice(ctx: &PolicyContext<'_>, depth: u8) -> Decision {
    let belief = &ctx.state.beliefs[ctx.me().index()];
    let mut note = None;
    let mut depth = depth.min(2);
    let target = loop {
        let estimate = match depth {
            0 => break None,
            1 => belief.majority_centroid_estimate.as_deref(),
            _ => belief.majority_centroid_of_centroid_estimate.as_deref(),
        };
        match estimate {
            Some(t) => break Some(t),
            None => {
                note = Some(format!("level-{depth} estimate missing; fell back to level {}", depth - 1));
                depth -= 1;
            }
        }
    };
    let Some(target) = target else {
        return Decision { action: idealist_choice(ctx), note };
    };
    let action = if ctx.round() == 0 {
        closest_share(ctx, target).unwrap_or_else(|| ctx.legal[0].clone())
    } else {
        closest_engagement(ctx, ActionKind::Reshare, target, None)
            .or_else(|| closest_engagement(ctx, ActionKind::Like, target, None))
            .unwrap_or_else(|| ctx.noop())
    };
    Decision { action, note }
}

pub fn influencer_seeker_choice(ctx: &PolicyContext<'_>, target: PlayerId) -> Result<ActionRecord, PolicyError> {
    let influencer = ctx.config.player(target).ok_or(PolicyError::UnknownTarget(target))?;
    if ctx.round() == 0 {
        return Ok(closest_share(ctx, &influencer.ideal).unwrap_or_else(|| ctx.legal[0].clone()));
    }
    let on_target = |kind: ActionKind| {
        ctx.legal
            .iter()
            .filter(|a| a.kind == kind && a.source == Some(target))
            .filter_map(|a| a.pair().map(|p| (p, a)))
            .max_by(|(pa, _), (pb, _)| {
                let ra = ctx.state.ledger.first_shared(*pa);
                let rb = ctx.state.ledger.first_shared(*pb);
                ra.cmp(&rb).then(pb.content.cmp(&pa.content))
            })
            .map(|(_, a)| a.clone())
    };
    Ok(on_target(ActionKind::Like)
        .or_else(|| on_target(ActionKind::Reshare))
        .unwrap_or_else(|| ctx.noop()))
}

pub fn influencer_reposter_choice(ctx: &PolicyContext<'_>, radius: f64) -> ActionRecord {
    let ideal = &ctx.player.ideal;
    if ctx.round() == 0 {
        return closest_share(ctx, ideal).unwrap_or_else(|| ctx.legal[0].clone());
    }
    let tagged: BTreeSet<PlayerId> = ctx
        .state
        .history
        .iter()
        .filter(|a| a.is_engagement() && a.source == Some(ctx.me()))
        .map(|a| a.actor)
        .collect();
    ctx.legal
        .iter()
        .filter(|a| a.kind == ActionKind::Reshare)
        .filter_map(|a| ctx.vector_of(a).map(|v| (normalized_distance(v, ideal), a)))
        .filter(|(d, _)| *d <= radius)
        .min_by(|(da, a), (db, b)| {
            let ta = !a.content.and_then(|c| ctx.state.ledger.author(c)).is_some_and(|p| tagged.contains(&p));
            let tb = !b.content.and_then(|c| ctx.state.ledger.author(c)).is_some_and(|p| tagged.contains(&p));
            ta.cmp(&tb)
                .then(da.total_cmp(db))
                .then(a.content.cmp(&b.content))
                .then(a.source.cmp(&b.source))
        })
        .map(|(_, a)| a.clone())
        .unwrap_or_else(|| ctx.noop())
}

pub fn reactor_choice(
    ctx: &PolicyContext<'_>,
    center: Option<&[f64]>,
    radius: Option<f64>,
    follows: Option<PlayerId>,
) -> ActionRecord {
    let center = center.unwrap_or(&ctx.player.ideal);
    if ctx.round() == 0 {
        return closest_share(ctx, center).unwrap_or_else(|| ctx.legal[0].clone());
    }
    let followed: Vec<ActionRecord>;
    let ctx = match follows {
        Some(f) => {
            followed = ctx.legal.iter().filter(|a| a.source == Some(f)).cloned().collect();
            &PolicyContext { legal: &followed, ..*ctx }
        }
        None => ctx,
    };
    match radius {
        Some(r) => closest_engagement(ctx, ActionKind::Like, center, Some(r)),
        None => ctx
            .legal
            .iter()
            .filter(|a| a.kind == ActionKind::Like)
            .min_by(|a, b| a.source.cmp(&b.source).then(a.content.cmp(&b.content)))
            .cloned(),
    }
    .unwrap_or_else(|| ctx.noop())
}

fn resolve_planned(ctx: &PolicyContext<'_>, planned: &PlannedMove) -> Result<ActionRecord, PolicyError> {
    let unresolved = || PolicyError::Unresolvable { planned: planned.clone() };
    match planned {
        PlannedMove::Noop => {
            let noop = ctx.noop();
            ctx.legal.contains(&noop).then_some(noop).ok_or_else(unresolved)
        }
        PlannedMove::ShareClosest => closest_share(ctx, &ctx.player.ideal).ok_or_else(unresolved),
        PlannedMove::Share { content } => {
            let share = ActionRecord::share(ctx.round(), ctx.me(), *content);
            ctx.legal.contains(&share).then_some(share).ok_or_else(unresolved)
        }
        PlannedMove::Like { source } | PlannedMove::Reshare { source } => {
            let kind = if matches!(planned, PlannedMove::Like { .. }) { ActionKind::Like } else { ActionKind::Reshare };
            ctx.legal
                .iter()
                .filter(|a| a.kind == kind && a.source == Some(*source))
                .filter_map(|a| a.pair().map(|p| (p, a)))
                .max_by(|(pa, _), (pb, _)| {
                    let ra = ctx.state.ledger.first_shared(*pa);
                    let rb = ctx.state.ledger.first_shared(*pb);
                    ra.cmp(&rb).then(pb.content.cmp(&pa.content))
                })
                .map(|(_, a)| a.clone())
                .ok_or_else(unresolved)
        }
    }
}

/// Canonical encoding of the public history, used to key contingent plans.
pub fn history_key(history: &[ActionRecord]) -> String {
    let mut out = String::new();
    for a in history {
        if !out.is_empty() {
            out.push(';');
        }
        let kind = match a.kind {
            ActionKind::Share => 'S',
            ActionKind::Reshare => 'R',
            ActionKind::Like => 'L',
            ActionKind::Noop => 'N',
        };
        out.push_str(&format!("{}.{}.{}", a.round, a.actor.0, kind));
        if let Some(c) = a.content {
            out.push_str(&format!(".{}", c.0));
        }
        if let Some(s) = a.source {
            out.push_str(&format!(".{}", s.0));
        }
    }
    out
}

/// The pair a planned engagement toward `source` would resolve to, if any.
pub fn latest_pair_of(state: &GameState, legal: &[ActionRecord], source: PlayerId) -> Option<SharedPair> {
    legal
        .iter()
        .filter(|a| a.is_engagement() && a.source == Some(source))
        .filter_map(|a| a.pair())
        .max_by(|a, b| {
            state
                .ledger
                .first_shared(*a)
                .cmp(&state.ledger.first_shared(*b))
                .then(b.content.cmp(&a.content))
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_game, step_round};
    use crate::model::{legal_actions, BeliefState, ContentId};
    use crate::scenarios;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ctx_choose(config: &GameConfig, state: &GameState, player: PlayerId) -> Decision {
        let legal = legal_actions(state, player, config).unwrap();
        let spec = config.player(player).unwrap();
        let ctx = PolicyContext { player: spec, state, legal: &legal, config };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        choose(&ctx, &mut rng).unwrap()
    }

    fn item(id: u32, author: u32, v: &[f64]) -> ContentItem {
        ContentItem { id: ContentId(id), vector: v.to_vec(), author: PlayerId(author), round_introduced: 0 }
    }

    #[test]
    fn idealist_shares_nearest_item() {
        let mut config = scenarios::two_player_idealist();
        config.players[0].ideal = vec![0.0, 0.0];
        config.initial_content_pool[0] = vec![item(0, 0, &[0.7, 0.0]), item(1, 0, &[0.1, 0.0])];
        let state = GameState::initial(&config);
        let d = ctx_choose(&config, &state, PlayerId(0));
        assert_eq!(d.action.content, Some(ContentId(1)));
    }

    #[test]
    fn idealist_tie_goes_to_lowest_id() {
        let mut config = scenarios::two_player_idealist();
        config.players[0].ideal = vec![0.0, 0.0];
        config.initial_content_pool[0] = vec![item(5, 0, &[0.3, 0.0]), item(2, 0, &[-0.3, 0.0])];
        let state = GameState::initial(&config);
        assert_eq!(ctx_choose(&config, &state, PlayerId(0)).action.content, Some(ContentId(2)));
    }

    #[test]
    fn idealist_ignores_beliefs() {
        let config = scenarios::two_player_idealist();
        let mut state = GameState::initial(&config);
        let base = ctx_choose(&config, &state, PlayerId(0));
        state.beliefs[0] = BeliefState {
            majority_centroid_estimate: Some(vec![-1.0, -1.0]),
            majority_centroid_of_centroid_estimate: Some(vec![1.0, -1.0]),
            gamma_type_beliefs: Some(vec![0.5, 0.9]),
        };
        assert_eq!(ctx_choose(&config, &state, PlayerId(0)), base);
    }

    #[test]
    fn quid_pro_quo_retaliates_after_noop() {
        let mut config = scenarios::two_player_quid_pro_quo(2, false);
        config.players[1].policy = PolicyId::Scripted { moves: vec![PlannedMove::ShareClosest] };
        let trace = run_game(&config).unwrap();
        assert_eq!(trace.rounds[1].actions[0].kind, ActionKind::Like);
        assert_eq!(trace.rounds[2].actions[0].kind, ActionKind::Noop);
    }

    #[test]
    fn quid_pro_quo_targets_the_unique_engager() {
        let config = scenarios::three_player_reciprocity();
        let mut state = GameState::initial(&config);
        let shares: Vec<_> = config
            .players
            .iter()
            .map(|p| ActionRecord::share(0, p.id, config.pool(p.id)[0].id))
            .collect();
        state = step_round(&state, &shares, &config).unwrap();
        let c0 = SharedPair::new(config.pool(PlayerId(0))[0].id, PlayerId(0));
        let c1 = SharedPair::new(config.pool(PlayerId(1))[0].id, PlayerId(1));
        // player 2 likes player 0; player 1 likes someone else
        let moves = vec![
            ActionRecord::noop(1, PlayerId(0)),
            ActionRecord::noop(1, PlayerId(1)),
            ActionRecord::like(1, PlayerId(2), c0),
        ];
        state = step_round(&state, &moves, &config).unwrap();
        let d = ctx_choose(&config, &state, PlayerId(0));
        assert_eq!(d.action.source, Some(PlayerId(2)));
        assert_eq!(d.action.kind, ActionKind::Like);
        let _ = c1;
    }

    #[test]
    fn grim_never_forgives() {
        let mut config = scenarios::two_player_quid_pro_quo(4, false);
        config.players[0].policy = PolicyId::QuidProQuo { grim: true };
        // opponent ignores the opening at round 1 and only likes at round 3
        config.players[1].policy = PolicyId::Scripted {
            moves: vec![
                PlannedMove::ShareClosest,
                PlannedMove::Noop,
                PlannedMove::Noop,
                PlannedMove::Like { source: PlayerId(0) },
            ],
        };
        let trace = run_game(&config).unwrap();
        assert_eq!(trace.rounds[1].actions[0].kind, ActionKind::Like);
        for r in 2..=4 {
            assert_eq!(trace.rounds[r].actions[0].kind, ActionKind::Noop, "round {r}");
        }
        // the forgiving variant answers the round-3 like
        config.players[0].policy = PolicyId::QuidProQuo { grim: false };
        let trace = run_game(&config).unwrap();
        assert_eq!(trace.rounds[4].actions[0].kind, ActionKind::Reshare);
    }

    #[test]
    fn mixer_singleton_pool() {
        let mut config = scenarios::two_player_idealist();
        config.players[0].policy = PolicyId::UniformMixer;
        config.initial_content_pool[0].truncate(1);
        let only = config.initial_content_pool[0][0].id;
        for seed in 0..20 {
            config.rng_seed = seed;
            let trace = run_game(&config).unwrap();
            assert_eq!(trace.rounds[0].actions[0].content, Some(only));
        }
    }

    #[test]
    fn level_zero_matches_idealist() {
        let mut config = scenarios::false_consensus(4);
        config.cheap_talk = true;
        let ct = crate::engine::cheap_talk(&config);
        let mut state = GameState::initial(&config);
        state.beliefs = ct.beliefs;
        for p in config.player_ids() {
            let legal = legal_actions(&state, p, &config).unwrap();
            let spec = config.player(p).unwrap();
            let ctx = PolicyContext { player: spec, state: &state, legal: &legal, config: &config };
            assert_eq!(level_k_choice(&ctx, 0).action, idealist_choice(&ctx));
        }
    }

    #[test]
    fn level_one_follows_the_majority() {
        let mut config = scenarios::two_player_idealist();
        config.players[0].gamma = 0.0;
        config.players[0].ideal = vec![1.0, 1.0];
        config.players[0].policy = PolicyId::LevelK { depth: 1 };
        config.players[0].belief.majority_centroid_estimate = Some(vec![-1.0, -1.0]);
        config.initial_content_pool[0] = vec![item(0, 0, &[1.0, 1.0]), item(1, 0, &[-1.0, -1.0])];
        let state = GameState::initial(&config);
        assert_eq!(ctx_choose(&config, &state, PlayerId(0)).action.content, Some(ContentId(1)));
    }

    #[test]
    fn level_two_falls_back_with_note() {
        let mut config = scenarios::two_player_idealist();
        config.players[0].policy = PolicyId::LevelK { depth: 2 };
        let state = GameState::initial(&config);
        let d = ctx_choose(&config, &state, PlayerId(0));
        assert!(d.note.unwrap().contains("fell back"));
        let legal = legal_actions(&state, PlayerId(0), &config).unwrap();
        let ctx = PolicyContext { player: &config.players[0], state: &state, legal: &legal, config: &config };
        assert_eq!(d.action, idealist_choice(&ctx));
    }

    #[test]
    fn identical_displays_make_depths_agree() {
        let mut config = scenarios::false_consensus(9);
        let v = vec![0.2, 0.2];
        for pool in &mut config.initial_content_pool {
            pool[0].vector = v.clone();
        }
        for p in &mut config.players {
            p.policy = PolicyId::LevelK { depth: 1 };
        }
        // every display is the same point
        config.salient_type = None;
        for p in &mut config.players {
            p.ideal = v.clone();
        }
        let ct = crate::engine::cheap_talk(&config);
        let mut state = GameState::initial(&config);
        state.beliefs = ct.beliefs;
        for p in config.player_ids() {
            let legal = legal_actions(&state, p, &config).unwrap();
            let spec = config.player(p).unwrap();
            let ctx = PolicyContext { player: spec, state: &state, legal: &legal, config: &config };
            assert_eq!(level_k_choice(&ctx, 1).action, level_k_choice(&ctx, 2).action);
        }
    }

    #[test]
    fn seeker_aims_at_influencer_taste() {
        let mut config = scenarios::two_player_idealist();
        config.players[1].audience_multiplier = 10.0;
        config.players[1].ideal = vec![0.5, 0.5];
        config.players[0].policy = PolicyId::InfluencerSeeker { target: PlayerId(1) };
        config.players[0].ideal = vec![-1.0, -1.0];
        config.initial_content_pool[0] = vec![item(0, 0, &[-1.0, -1.0]), item(1, 0, &[0.4, 0.5])];
        let state = GameState::initial(&config);
        assert_eq!(ctx_choose(&config, &state, PlayerId(0)).action.content, Some(ContentId(1)));
    }

    #[test]
    fn unknown_seeker_target_is_an_error() {
        let mut config = scenarios::two_player_idealist();
        config.players[0].policy = PolicyId::InfluencerSeeker { target: PlayerId(5) };
        let state = GameState::initial(&config);
        let legal = legal_actions(&state, PlayerId(0), &config).unwrap();
        let ctx = PolicyContext { player: &config.players[0], state: &state, legal: &legal, config: &config };
        assert_eq!(influencer_seeker_choice(&ctx, PlayerId(5)), Err(PolicyError::UnknownTarget(PlayerId(5))));
    }

    #[test]
    fn reposter_reshares_within_radius() {
        let mut config = scenarios::two_player_idealist();
        config.players[1].policy = PolicyId::InfluencerReposter { radius: 0.3 };
        config.players[1].ideal = vec![0.0, 0.0];
        let dmax = crate::model::max_distance(2);
        config.initial_content_pool[0] = vec![item(0, 0, &[0.2 * dmax, 0.0])];
        let mut state = GameState::initial(&config);
        let shares = vec![
            ActionRecord::share(0, PlayerId(0), ContentId(0)),
            ActionRecord::share(0, PlayerId(1), config.pool(PlayerId(1))[0].id),
        ];
        state = step_round(&state, &shares, &config).unwrap();
        let d = ctx_choose(&config, &state, PlayerId(1));
        assert_eq!(d.action.kind, ActionKind::Reshare);
        assert_eq!(d.action.content, Some(ContentId(0)));
        // outside the radius: nothing
        config.players[1].policy = PolicyId::InfluencerReposter { radius: 0.1 };
        assert_eq!(ctx_choose(&config, &state, PlayerId(1)).action.kind, ActionKind::Noop);
    }

    #[test]
    fn history_keys_are_distinct_per_history() {
        let a = vec![ActionRecord::share(0, PlayerId(0), ContentId(1))];
        let b = vec![ActionRecord::share(0, PlayerId(0), ContentId(2))];
        assert_ne!(history_key(&a), history_key(&b));
        assert_eq!(history_key(&[]), "");
    }
}
