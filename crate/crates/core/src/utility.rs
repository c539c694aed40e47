//! Personal, social and combined utility.
//!
//! Personal utility is the mean proximity of the shared community content to
//! a player's ideal point. Social utility accrues weighted likes and reshares
//! received, `S(r) = discount * S(r-1) + gain(r)`, and is normalized by the
//! largest accrual other players could feasibly have produced by round `r`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::ledger::{EngagementEvent, EngagementLedger, PairRecord};
use crate::model::{
    max_distance, ContentId, GameConfig, GameState, PlayerId, PlayerSpec, Round,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilityBreakdown {
    pub round: Round,
    pub personal: f64,
    pub social: f64,
    pub combined: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PersonalMode {
    #[default]
    Static,
    /// Experimental: weight each item by its cumulative visibility.
    ExposureWeighted,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UtilityError {
    #[error("no content has been shared yet")]
    EmptySharedContent,
    #[error("unknown content id {0}")]
    UnknownContent(ContentId),
}

/// `gamma * personal + (1 - gamma) * social`, kept inside the closed interval
/// spanned by the two components.
pub fn combine(gamma: f64, personal: f64, social: f64) -> f64 {
    let raw = gamma * personal + (1.0 - gamma) * social;
    raw.clamp(personal.min(social), personal.max(social))
}

/// Proximity of one point to an ideal, 1 at the ideal and 0 at the diameter.
pub fn proximity(ideal: &[f64], point: &[f64]) -> f64 {
    1.0 - crate::model::distance(ideal, point) / max_distance(ideal.len().max(1))
}

/// Content ids shared with `Share` actions so far, in id order.
pub fn shared_content(state: &GameState) -> Vec<ContentId> {
    state.shared.iter().copied().collect()
}

pub fn personal_utility(
    player: &PlayerSpec,
    state: &GameState,
    config: &GameConfig,
    mode: PersonalMode,
) -> Result<f64, UtilityError> {
    if state.shared.is_empty() {
        return Err(UtilityError::EmptySharedContent);
    }
    let mut weighted = 0.0;
    let mut total_weight = 0.0;
    let last_round = state.round.saturating_sub(1);
    for &id in &state.shared {
        let item = config.content(id).ok_or(UtilityError::UnknownContent(id))?;
        let weight = match mode {
            PersonalMode::Static => 1.0,
            PersonalMode::ExposureWeighted => {
                1.0 + (1..=last_round)
                    .map(|r| crate::engine::visibility_probability(&state.ledger, id, r, config))
                    .sum::<f64>()
            }
        };
        weighted += weight * proximity(&player.ideal, &item.vector);
        total_weight += weight;
    }
    Ok(weighted / total_weight)
}

/// Personal utility of an explicit content set, used for one-step lookahead.
pub fn personal_utility_of<'a>(ideal: &[f64], vectors: impl IntoIterator<Item = &'a [f64]>) -> Option<f64> {
    let (sum, n) = vectors
        .into_iter()
        .fold((0.0, 0usize), |(s, n), v| (s + proximity(ideal, v), n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Weighted likes and reshares credited to `player` in `round`.
pub fn social_gain(player: PlayerId, round: Round, ledger: &EngagementLedger, config: &GameConfig) -> f64 {
    let (likes, reshares) = ledger.received_in(player, round);
    config.like_weight * f64::from(likes) + config.reshare_weight * f64::from(reshares)
}

/// Accrued social value `S(r)`, with `S(0) = 0`.
pub fn social_accrual(player: PlayerId, round: Round, ledger: &EngagementLedger, config: &GameConfig) -> f64 {
    let own: Vec<_> = ledger.pairs_shared_by(player).map(|(_, rec)| rec).collect();
    (1..=round).fold(0.0, |acc, r| {
        let (likes, reshares) = own
            .iter()
            .fold((0u32, 0u32), |(l, s), rec| (l + rec.likes_in(r), s + rec.reshares_in(r)));
        config.discount * acc + (config.like_weight * f64::from(likes) + config.reshare_weight * f64::from(reshares))
    })
}

/// Largest `S(round)` the other players could have produced, given the pairs
/// `player` had shared. Each other player acts once per round and may like and
/// reshare each pair once, never on content they authored.
pub fn social_max(player: PlayerId, round: Round, ledger: &EngagementLedger, config: &GameConfig) -> f64 {
    if round == 0 {
        return 0.0;
    }
    let own: Vec<(ContentId, Round)> = ledger
        .pairs_shared_by(player)
        .filter(|(_, rec)| rec.first_shared < round)
        .map(|(pair, rec)| (pair.content, rec.first_shared))
        .collect();
    if own.is_empty() {
        return 0.0;
    }

    // Other players only differ by which of the pairs they authored, so
    // group them by that exclusion mask. Players who authored none of them
    // share the all-false mask.
    let authors: BTreeSet<PlayerId> = own
        .iter()
        .filter_map(|(c, _)| ledger.author(*c))
        .filter(|&a| a != player && config.player(a).is_some())
        .collect();
    let mut groups: BTreeMap<Vec<bool>, usize> = BTreeMap::new();
    for &other in &authors {
        let mask: Vec<bool> = own.iter().map(|(c, _)| ledger.author(*c) == Some(other)).collect();
        *groups.entry(mask).or_insert(0) += 1;
    }
    let rest = config.player_ids().filter(|&id| id != player && !authors.contains(&id)).count();
    if rest > 0 {
        *groups.entry(vec![false; own.len()]).or_insert(0) += rest;
    }

    groups
        .into_iter()
        .map(|(mask, count)| {
            let jobs: Vec<(f64, Round)> = own
                .iter()
                .zip(&mask)
                .filter(|(_, excluded)| !**excluded)
                .flat_map(|((_, shared_at), _)| {
                    [(config.like_weight, shared_at + 1), (config.reshare_weight, shared_at + 1)]
                })
                .collect();
            count as f64 * best_schedule(&jobs, round, config.discount)
        })
        .sum()
}

/// Max of `sum w * discount^(horizon - t)` over schedules placing at most one
/// job per round `t in 1..=horizon`, each job no earlier than its release.
fn best_schedule(jobs: &[(f64, Round)], horizon: Round, discount: f64) -> f64 {
    if jobs.is_empty() {
        return 0.0;
    }
    let rounds: Vec<Round> = (1..=horizon).collect();
    let value = |t: Round, job: &(f64, Round)| {
        if job.1 <= t {
            job.0 * discount.powi((horizon - t) as i32)
        } else {
            0.0
        }
    };
    let matrix: Vec<Vec<f64>> = if rounds.len() <= jobs.len() {
        rounds.iter().map(|&t| jobs.iter().map(|j| value(t, j)).collect()).collect()
    } else {
        jobs.iter().map(|j| rounds.iter().map(|&t| value(t, j)).collect()).collect()
    };
    max_weight_assignment(&matrix)
}

/// Hungarian method on a rows <= cols value matrix; returns the best total.
fn max_weight_assignment(value: &[Vec<f64>]) -> f64 {
    let n = value.len();
    if n == 0 {
        return 0.0;
    }
    let m = value[0].len();
    debug_assert!(n <= m);
    let cost = |i: usize, j: usize| -value[i - 1][j - 1];
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=m).filter(|&j| p[j] != 0).map(|j| value[p[j] - 1][j - 1]).sum()
}

/// `S(r) / S_max(r)`, or 0 when nothing could have been received.
pub fn social_utility(player: PlayerId, round: Round, ledger: &EngagementLedger, config: &GameConfig) -> f64 {
    let max = social_max(player, round, ledger, config);
    if max <= 0.0 {
        return 0.0;
    }
    (social_accrual(player, round, ledger, config) / max).clamp(0.0, 1.0)
}

/// Utility of `player` at the last completed round of `state`.
pub fn combined_utility(
    player: &PlayerSpec,
    state: &GameState,
    config: &GameConfig,
) -> Result<UtilityBreakdown, UtilityError> {
    combined_utility_with(player, state, config, PersonalMode::Static)
}

pub fn combined_utility_with(
    player: &PlayerSpec,
    state: &GameState,
    config: &GameConfig,
    mode: PersonalMode,
) -> Result<UtilityBreakdown, UtilityError> {
    let round = state.round.saturating_sub(1);
    let personal = personal_utility(player, state, config, mode)?;
    let social = social_utility(player.id, round, &state.ledger, config);
    Ok(UtilityBreakdown {
        round,
        personal,
        social,
        combined: combine(player.gamma, personal, social),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::step_round;
    use crate::model::{ActionRecord, SharedPair};
    use crate::scenarios;
    use proptest::prelude::*;

    fn two_player_after_shares() -> (GameConfig, GameState, SharedPair, SharedPair) {
        let mut config = scenarios::two_player_quid_pro_quo(4, false);
        config.like_weight = 1.0;
        config.reshare_weight = 2.0;
        let c0 = config.pool(PlayerId(0))[0].id;
        let c1 = config.pool(PlayerId(1))[0].id;
        let state = GameState::initial(&config);
        let state = step_round(
            &state,
            &[ActionRecord::share(0, PlayerId(0), c0), ActionRecord::share(0, PlayerId(1), c1)],
            &config,
        )
        .unwrap();
        (config, state, SharedPair::new(c0, PlayerId(0)), SharedPair::new(c1, PlayerId(1)))
    }

    #[test]
    fn item_at_ideal_is_worth_one() {
        assert_eq!(personal_utility_of(&[0.2, -0.4], [&[0.2, -0.4][..]]), Some(1.0));
    }

    #[test]
    fn items_at_zero_and_full_distance_average_to_half() {
        let ideal = [1.0, 1.0];
        let got = personal_utility_of(&ideal, [&[1.0, 1.0][..], &[-1.0, -1.0][..]]);
        assert_eq!(got, Some(0.5));
    }

    #[test]
    fn empty_shared_set_is_an_error() {
        let config = scenarios::two_player_idealist();
        let state = GameState::initial(&config);
        assert_eq!(
            personal_utility(&config.players[0], &state, &config, PersonalMode::Static),
            Err(UtilityError::EmptySharedContent)
        );
    }

    #[test]
    fn social_gain_arithmetic() {
        let (config, state, _p0, p1) = two_player_after_shares();
        assert_eq!(social_gain(PlayerId(0), 1, &state.ledger, &config), 0.0);
        // j likes c_i at round 1 -> i gains w_like, j gains nothing
        let p0 = SharedPair::new(config.pool(PlayerId(0))[0].id, PlayerId(0));
        let state = step_round(
            &state,
            &[ActionRecord::noop(1, PlayerId(0)), ActionRecord::like(1, PlayerId(1), p0)],
            &config,
        )
        .unwrap();
        assert_eq!(social_gain(PlayerId(0), 1, &state.ledger, &config), 1.0);
        assert_eq!(social_gain(PlayerId(1), 1, &state.ledger, &config), 0.0);
        let _ = p1;
    }

    #[test]
    fn three_likes_and_a_reshare() {
        let config = scenarios::false_consensus(1);
        let c0 = config.pool(PlayerId(0))[0].id;
        let pair = SharedPair::new(c0, PlayerId(0));
        let mut history = vec![ActionRecord::share(0, PlayerId(0), c0)];
        for p in 1..=3 {
            history.push(ActionRecord::like(1, PlayerId(p), pair));
        }
        history.push(ActionRecord::reshare(1, PlayerId(4), pair));
        let ledger = EngagementLedger::from_history(&history, &config).unwrap();
        let mut config = config;
        config.like_weight = 1.0;
        config.reshare_weight = 2.0;
        assert_eq!(social_gain(PlayerId(0), 1, &ledger, &config), 5.0);
    }

    #[test]
    fn round_zero_social_is_zero() {
        let (config, state, ..) = two_player_after_shares();
        for p in config.player_ids() {
            assert_eq!(social_utility(p, 0, &state.ledger, &config), 0.0);
        }
    }

    #[test]
    fn like_then_reshare_reaches_the_maximum() {
        let (config, state, p0, _) = two_player_after_shares();
        let state = step_round(
            &state,
            &[ActionRecord::noop(1, PlayerId(0)), ActionRecord::like(1, PlayerId(1), p0)],
            &config,
        )
        .unwrap();
        let state = step_round(
            &state,
            &[ActionRecord::noop(2, PlayerId(0)), ActionRecord::reshare(2, PlayerId(1), p0)],
            &config,
        )
        .unwrap();
        assert_eq!(social_accrual(PlayerId(0), 2, &state.ledger, &config), 3.0);
        assert_eq!(social_max(PlayerId(0), 2, &state.ledger, &config), 3.0);
        assert_eq!(social_utility(PlayerId(0), 2, &state.ledger, &config), 1.0);
        // at round 1 only one action fits; the best would have been a reshare
        assert_eq!(social_max(PlayerId(0), 1, &state.ledger, &config), 2.0);
    }

    /// Exhaustive search over one other player's per-round choices.
    fn brute_force_single(jobs: &[(f64, Round)], horizon: Round, discount: f64) -> f64 {
        fn go(jobs: &[(f64, Round)], used: &mut Vec<bool>, t: Round, horizon: Round, discount: f64) -> f64 {
            if t > horizon {
                return 0.0;
            }
            let mut best = go(jobs, used, t + 1, horizon, discount);
            for i in 0..jobs.len() {
                if !used[i] && jobs[i].1 <= t {
                    used[i] = true;
                    let here = jobs[i].0 * discount.powi((horizon - t) as i32);
                    best = best.max(here + go(jobs, used, t + 1, horizon, discount));
                    used[i] = false;
                }
            }
            best
        }
        go(jobs, &mut vec![false; jobs.len()], 1, horizon, discount)
    }

    #[test]
    fn schedule_counterexample_to_latest_first_greedy() {
        // heavy job early, light job late: both should be scheduled when the
        // discount is mild
        let jobs = [(2.0, 1), (1.0, 2)];
        let best = best_schedule(&jobs, 2, 0.9);
        assert!((best - (2.0 * 0.9 + 1.0)).abs() < 1e-12);
        assert!((best - brute_force_single(&jobs, 2, 0.9)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn schedule_matches_brute_force(
            releases in prop::collection::vec(1u32..5, 1..4),
            horizon in 1u32..5,
            like in 0.0f64..3.0,
            share in 0.0f64..3.0,
            discount in 0.0f64..=1.0,
        ) {
            let jobs: Vec<(f64, Round)> = releases
                .iter()
                .flat_map(|&r| [(like, r), (share, r)])
                .collect();
            let fast = best_schedule(&jobs, horizon, discount);
            let slow = brute_force_single(&jobs, horizon, discount);
            prop_assert!((fast - slow).abs() < 1e-9, "fast {fast} slow {slow}");
        }

        #[test]
        fn combine_stays_between_components(gamma in 0.0f64..=1.0, p in 0.0f64..=1.0, s in 0.0f64..=1.0) {
            let u = combine(gamma, p, s);
            prop_assert!(p.min(s) <= u && u <= p.max(s));
        }

        #[test]
        fn personal_utility_is_translation_invariant(
            ideal in prop::collection::vec(-0.5f64..0.5, 2),
            points in prop::collection::vec(prop::collection::vec(-0.5f64..0.5, 2), 1..5),
            shift in prop::collection::vec(-0.5f64..0.5, 2),
        ) {
            let base = personal_utility_of(&ideal, points.iter().map(Vec::as_slice)).unwrap();
            let moved_ideal: Vec<f64> = ideal.iter().zip(&shift).map(|(a, b)| a + b).collect();
            let moved: Vec<Vec<f64>> = points
                .iter()
                .map(|p| p.iter().zip(&shift).map(|(a, b)| a + b).collect())
                .collect();
            let after = personal_utility_of(&moved_ideal, moved.iter().map(Vec::as_slice)).unwrap();
            prop_assert!((base - after).abs() < 1e-12);
        }
    }

    #[test]
    fn endpoints_are_exact() {
        for &(p, s) in &[(0.3, 0.7), (0.123456789, 0.987654321), (1.0, 0.0)] {
            assert_eq!(combine(1.0, p, s), p);
            assert_eq!(combine(0.0, p, s), s);
        }
        assert!((combine(0.5, 0.8, 0.4) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn exposure_weighting_matches_static_under_perfect_visibility() {
        let (mut config, state, ..) = two_player_after_shares();
        config.visibility_floor = 1.0;
        let p = &config.players[0];
        let a = personal_utility(p, &state, &config, PersonalMode::Static).unwrap();
        let b = personal_utility(p, &state, &config, PersonalMode::ExposureWeighted).unwrap();
        assert!((a - b).abs() < 1e-12);
    }
}
