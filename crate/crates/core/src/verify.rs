//! Built-in claim checks behind `likegame verify`. Each claim runs the engine
//! or the exact oracle on canned instances and reports pass or fail with a
//! short detail. [`Hooks`] lets tests swap in broken components to confirm a
//! claim can fail.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{run_game, step_round, RunTrace};
use crate::ledger::EngagementLedger;
use crate::model::{
    legal_actions, ActionKind, ActionRecord, BeliefState, GameConfig, GameState, ModelError, PlayerId,
};
use crate::oracle::{
    build_normal_form, build_normal_form_with, is_pure_nash, weak_dominance, OracleOptions, PayoffScope, Verdict,
};
use crate::policies::{self, PolicyContext};
use crate::scenarios;
use crate::utility;

pub type CombineFn = fn(f64, f64, f64) -> f64;
pub type LegalFn = fn(&GameState, PlayerId, &GameConfig) -> Result<Vec<ActionRecord>, ModelError>;

/// Components the claims are checked against.
#[derive(Clone, Copy)]
pub struct Hooks {
    pub combine: CombineFn,
    pub legal: LegalFn,
}

impl Default for Hooks {
    fn default() -> Self {
        Self { combine: utility::combine, legal: legal_actions }
    }
}

/// Broken components for mutation checks.
pub mod mutants {
    use super::*;

    /// Combine with the two weights exchanged.
    pub fn swapped_combine(gamma: f64, personal: f64, social: f64) -> f64 {
        (1.0 - gamma) * personal + gamma * social
    }

    /// Legal set that also offers likes on the player's own shares.
    pub fn self_engagement_legal(
        state: &GameState,
        player: PlayerId,
        config: &GameConfig,
    ) -> Result<Vec<ActionRecord>, ModelError> {
        let mut out = legal_actions(state, player, config)?;
        if state.round >= 1 {
            for pair in state.ledger.pairs_before(state.round).collect::<Vec<_>>() {
                if pair.sharer == player && !out.contains(&ActionRecord::like(state.round, player, pair)) {
                    out.push(ActionRecord::like(state.round, player, pair));
                }
            }
        }
        out.sort();
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClaimResult {
    pub id: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

type Outcome = Result<String, String>;

fn timed(id: &'static str, f: impl FnOnce() -> Outcome) -> ClaimResult {
    let start = Instant::now();
    let outcome = f();
    let elapsed = start.elapsed();
    match outcome {
        Ok(detail) => ClaimResult { id, passed: true, detail, elapsed },
        Err(detail) => ClaimResult { id, passed: false, detail, elapsed },
    }
}

pub const CLAIM_IDS: [&str; 6] =
    ["endpoints", "idealist_nash", "belief_invariance", "quid_pro_quo", "weak_dominance", "legality"];

pub fn run_claims(hooks: Hooks) -> Vec<ClaimResult> {
    vec![
        timed("endpoints", || endpoints(hooks.combine, 1000)),
        timed("idealist_nash", idealist_nash),
        timed("belief_invariance", || belief_invariance(100)),
        timed("quid_pro_quo", quid_pro_quo),
        timed("weak_dominance", dominance),
        timed("legality", || legality(hooks.legal)),
    ]
}

pub fn render_table(results: &[ClaimResult]) -> String {
    let width = results.iter().map(|r| r.id.len()).max().unwrap_or(5).max(5);
    let mut out = format!("{:<width$}  {:<6}  {:>9}  detail\n", "claim", "result", "ms");
    for r in results {
        let _ = writeln!(
            out,
            "{:<width$}  {:<6}  {:>9.1}  {}",
            r.id,
            if r.passed { "pass" } else { "FAIL" },
            r.elapsed.as_secs_f64() * 1000.0,
            r.detail
        );
    }
    out
}

/// One sampled utility record: the player's gamma, its two components and
/// the combined value the engine recorded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilitySample {
    pub gamma: f64,
    pub personal: f64,
    pub social: f64,
    pub combined: f64,
}

pub fn utility_samples(count: usize) -> Vec<UtilitySample> {
    let mut out = Vec::with_capacity(count);
    let mut seed = 0;
    while out.len() < count {
        let config = scenarios::random_game(seed);
        seed += 1;
        let trace = run_game(&config).expect("random games are valid");
        for record in &trace.rounds {
            for (p, u) in config.players.iter().zip(&record.utilities) {
                out.push(UtilitySample { gamma: p.gamma, personal: u.personal, social: u.social, combined: u.combined });
            }
        }
    }
    out.truncate(count);
    out
}

/// Endpoint reductions and convex bounds of the combine rule, plus agreement
/// with what the engine recorded.
pub fn endpoints(combine: CombineFn, count: usize) -> Outcome {
    let samples = utility_samples(count);
    for (i, s) in samples.iter().enumerate() {
        if combine(1.0, s.personal, s.social) != s.personal {
            return Err(format!("state {i}: gamma=1 gives {} not personal {}", combine(1.0, s.personal, s.social), s.personal));
        }
        if combine(0.0, s.personal, s.social) != s.social {
            return Err(format!("state {i}: gamma=0 gives {} not social {}", combine(0.0, s.personal, s.social), s.social));
        }
        if combine(s.gamma, s.personal, s.social) != s.combined {
            return Err(format!("state {i}: engine recorded {} for gamma {}", s.combined, s.gamma));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0B1);
    for _ in 0..count {
        let gamma: f64 = rng.gen();
        let s = samples[rng.gen_range(0..samples.len())];
        let v = combine(gamma, s.personal, s.social);
        if v < s.personal.min(s.social) || v > s.personal.max(s.social) {
            return Err(format!("gamma {gamma}: {v} outside [{}, {}]", s.personal.min(s.social), s.personal.max(s.social)));
        }
    }
    let distinct = samples.iter().filter(|s| s.personal != s.social).count();
    Ok(format!("{} states ({distinct} with P != S), {count} random gammas", samples.len()))
}

/// All-idealist is a pure equilibrium of every content-only instance for
/// round-0 payoffs, and for whole-game payoffs when content can only be
/// introduced at round 0.
pub fn idealist_nash() -> Outcome {
    let instances = scenarios::idealist_instances();
    let mut games = 0;
    for (i, config) in instances.iter().enumerate() {
        let mut scopes = vec![PayoffScope::RoundZero];
        if !config.allow_new_content {
            scopes.push(PayoffScope::FullHorizon);
        }
        for scope in scopes {
            let menus = config.player_ids().map(|p| scenarios::idealist_menu(config, p)).collect();
            let options = OracleOptions { scope, ..OracleOptions::default() };
            let game = build_normal_form_with(config, menus, options).map_err(|e| format!("instance {i}: {e}"))?;
            games += 1;
            if !is_pure_nash(&game, &vec![0; game.n_players()]) {
                return Err(format!("instance {i} ({scope:?}): all-idealist is not an equilibrium"));
            }
        }
    }
    Ok(format!("{} instances, {games} games", instances.len()))
}

fn random_belief(rng: &mut ChaCha8Rng, k: usize, n: usize) -> BeliefState {
    let mut point = || Some((0..k).map(|_| rng.gen_range(-1.0..=1.0)).collect::<Vec<f64>>());
    let a = point();
    let b = point();
    BeliefState {
        majority_centroid_estimate: a,
        majority_centroid_of_centroid_estimate: b,
        gamma_type_beliefs: Some((0..n).map(|_| rng.gen()).collect()),
    }
}

fn round_zero_choices(config: &GameConfig, state: &GameState) -> Result<Vec<ActionRecord>, String> {
    // the idealist draws nothing, so a fixed generator is fine
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    config
        .players
        .iter()
        .map(|player| {
            let legal = legal_actions(state, player.id, config).map_err(|e| e.to_string())?;
            let ctx = PolicyContext { player, state, legal: &legal, config };
            policies::choose(&ctx, &mut rng).map(|d| d.action).map_err(|e| e.to_string())
        })
        .collect()
}

/// The idealist's round-0 choice ignores its beliefs.
pub fn belief_invariance(perturbations: usize) -> Outcome {
    let instances = scenarios::idealist_instances();
    let mut rng = ChaCha8Rng::seed_from_u64(0xBE11EF);
    for (i, config) in instances.iter().enumerate() {
        let baseline = round_zero_choices(config, &GameState::initial(config))?;
        for trial in 0..perturbations {
            let mut perturbed = config.clone();
            for p in &mut perturbed.players {
                p.belief = random_belief(&mut rng, config.k_dims, config.players.len());
            }
            let state = GameState::initial(&perturbed);
            let choices = round_zero_choices(&perturbed, &state)?;
            if choices != baseline {
                return Err(format!("instance {i}, perturbation {trial}: {choices:?} vs {baseline:?}"));
            }
        }
    }
    Ok(format!("{} instances x {perturbations} perturbations", instances.len()))
}

fn kinds(trace: &RunTrace, round: usize) -> Vec<ActionKind> {
    trace.rounds.get(round).map_or_else(Vec::new, |r| r.actions.iter().map(|a| a.kind).collect())
}

/// Mutual quid pro quo beats unilateral deviation, and the engine plays the
/// like-then-reshare cycle.
pub fn quid_pro_quo() -> Outcome {
    let mut details = Vec::new();
    for (horizon, allow_new) in [(2, false), (3, true)] {
        let config = scenarios::two_player_quid_pro_quo(horizon, allow_new);
        let game = build_normal_form(&config, scenarios::quid_pro_quo_menus(&config)).map_err(|e| e.to_string())?;
        let mutual = game.payoffs(&[0, 0]).to_vec();
        let deviate = [game.payoff(&[1, 0], 0), game.payoff(&[0, 1], 1)];
        for p in 0..2 {
            if mutual[p] <= deviate[p] {
                return Err(format!("horizon {horizon}: player {p} mutual {} <= deviation {}", mutual[p], deviate[p]));
            }
        }
        let trace = run_game(&config).map_err(|e| e.to_string())?;
        if kinds(&trace, 1) != [ActionKind::Like; 2] || kinds(&trace, 2) != [ActionKind::Reshare; 2] {
            return Err(format!("horizon {horizon}: rounds 1-2 played {:?} {:?}", kinds(&trace, 1), kinds(&trace, 2)));
        }
        details.push(format!("h{horizon}: {:.3} vs {:.3}", mutual[0], deviate[0]));
    }
    Ok(details.join(", "))
}

/// Majority-aligned display weakly dominates own-ideal display against
/// preference-sensitive reactors, and not against blind ones.
pub fn dominance() -> Outcome {
    let run = |blind: bool| {
        let config = scenarios::dominance_instance(blind);
        let game = build_normal_form(&config, scenarios::dominance_menus(&config)).map_err(|e| e.to_string())?;
        weak_dominance(&game, 0, 0, 1).map_err(|e| e.to_string())
    };
    let sighted = run(false)?;
    if sighted.verdict != Verdict::WeaklyDominates || sighted.strict_witnesses.is_empty() {
        return Err(format!(
            "sighted reactors: {:?} with {} strict witnesses",
            sighted.verdict,
            sighted.strict_witnesses.len()
        ));
    }
    let blind = run(true)?;
    if blind.verdict != Verdict::Incomparable {
        return Err(format!("blind reactors: {:?}", blind.verdict));
    }
    Ok(format!("strict witness {:?}; blind: incomparable", sighted.strict_witnesses[0]))
}

fn legality_traces() -> Vec<RunTrace> {
    let mut configs = vec![
        scenarios::two_player_quid_pro_quo(3, true),
        scenarios::three_player_reciprocity(),
        scenarios::false_consensus(1),
        scenarios::echo_chamber(1),
        scenarios::dominance_instance(false),
    ];
    configs.extend((0..20).map(scenarios::random_game));
    configs.iter().map(|c| run_game(c).expect("canned configs run")).collect()
}

/// Replays traces: every action is in the legal set, no legal set offers
/// engagement with one's own shares or content, and the ledger always
/// matches a recount from history.
pub fn legality(legal_fn: LegalFn) -> Outcome {
    let traces = legality_traces();
    let mut checked = 0usize;
    for (t, trace) in traces.iter().enumerate() {
        let config = &trace.config;
        let mut state = GameState::initial(config);
        if let Some(ct) = &trace.cheap_talk {
            state.beliefs = ct.beliefs.clone();
        }
        for record in &trace.rounds {
            if record.round >= 1 {
                state.visible_sets = record.visibility.iter().map(|v| v.iter().copied().collect()).collect();
            }
            for action in &record.actions {
                let legal = legal_fn(&state, action.actor, config).map_err(|e| format!("trace {t}: {e}"))?;
                if !legal.contains(action) {
                    return Err(format!("trace {t} round {}: {action:?} not legal", record.round));
                }
                if let Some(bad) = legal.iter().find(|a| {
                    a.pair().is_some_and(|pair| {
                        pair.sharer == a.actor || state.ledger.author(pair.content) == Some(a.actor)
                    })
                }) {
                    return Err(format!("trace {t} round {}: self-engagement offered: {bad:?}", record.round));
                }
                checked += 1;
            }
            state = step_round(&state, &record.actions, config).map_err(|e| format!("trace {t}: {e}"))?;
            let recount = EngagementLedger::from_history(&state.history, config).map_err(|e| e.to_string())?;
            if recount != state.ledger {
                return Err(format!("trace {t} round {}: ledger recount differs", record.round));
            }
        }
    }
    Ok(format!("{} traces, {checked} actions", traces.len()))
}
