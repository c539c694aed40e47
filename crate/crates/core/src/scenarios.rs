//! Canned configurations used by the tests, the verification suite and the
//! sample configs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{
    BeliefState, ContentId, ContentItem, GameConfig, InfoMode, PlannedMove, PlayerId, PlayerSpec, PolicyId,
    SCHEMA_VERSION,
};
use crate::oracle::Strategy;

fn player(id: u32, gamma: f64, ideal: &[f64], policy: PolicyId) -> PlayerSpec {
    PlayerSpec {
        id: PlayerId(id),
        gamma,
        ideal: ideal.to_vec(),
        policy,
        audience_multiplier: 1.0,
        belief: BeliefState::default(),
    }
}

/// Assembles a config; pool item ids are assigned in order across players.
fn assemble(players: Vec<PlayerSpec>, pools: Vec<Vec<Vec<f64>>>, k_dims: usize, horizon: u32) -> GameConfig {
    let mut next = 0u32;
    let initial_content_pool = pools
        .into_iter()
        .enumerate()
        .map(|(i, pool)| {
            pool.into_iter()
                .map(|vector| {
                    let id = ContentId(next);
                    next += 1;
                    ContentItem { id, vector, author: PlayerId(i as u32), round_introduced: 0 }
                })
                .collect()
        })
        .collect();
    GameConfig {
        schema_version: SCHEMA_VERSION,
        n_players: players.len(),
        k_dims,
        horizon,
        players,
        initial_content_pool,
        allow_new_content: false,
        info_mode: InfoMode::Perfect,
        visibility_floor: 0.2,
        like_weight: 1.0,
        reshare_weight: 2.0,
        discount: 1.0,
        cheap_talk: false,
        type_centroids: None,
        salient_type: None,
        alignment_radius: 0.25,
        rng_seed: 0,
        content_cache: Default::default(),
    }
}

fn two_player_pools() -> Vec<Vec<Vec<f64>>> {
    vec![
        vec![vec![0.6, 0.4], vec![-0.8, 0.9], vec![0.1, -0.7]],
        vec![vec![0.9, -0.9], vec![-0.4, 0.3], vec![0.0, 0.0]],
    ]
}

/// Two content-only players (gamma = 1) with three pool items each.
pub fn two_player_idealist() -> GameConfig {
    let players = vec![
        player(0, 1.0, &[0.5, 0.5], PolicyId::Idealist),
        player(1, 1.0, &[-0.5, 0.2], PolicyId::Idealist),
    ];
    assemble(players, two_player_pools(), 2, 2)
}

/// Two engagement-only players (gamma = 0) running quid pro quo.
pub fn two_player_quid_pro_quo(horizon: u32, allow_new_content: bool) -> GameConfig {
    let qpq = PolicyId::QuidProQuo { grim: false };
    let players = vec![
        player(0, 0.0, &[0.5, 0.5], qpq.clone()),
        player(1, 0.0, &[-0.5, 0.2], qpq),
    ];
    let mut config = assemble(players, two_player_pools(), 2, horizon);
    config.allow_new_content = allow_new_content;
    config
}

pub fn three_player_reciprocity() -> GameConfig {
    let qpq = PolicyId::QuidProQuo { grim: false };
    let players = vec![
        player(0, 0.0, &[0.5, 0.5], qpq.clone()),
        player(1, 0.0, &[-0.5, 0.2], qpq.clone()),
        player(2, 0.0, &[0.0, -0.6], qpq),
    ];
    let pools = vec![
        vec![vec![0.6, 0.4], vec![-0.8, 0.9]],
        vec![vec![0.9, -0.9], vec![-0.4, 0.3]],
        vec![vec![0.1, -0.5], vec![0.3, 0.3]],
    ];
    assemble(players, pools, 2, 3)
}

/// Open-loop strategy that shares `content` at round 0 and then does
/// nothing.
pub fn share_then_noop(label: &str, content: ContentId) -> Strategy {
    Strategy::new(label, PolicyId::Scripted { moves: vec![PlannedMove::Share { content }] })
}

pub fn all_noop() -> Strategy {
    Strategy::new("all_noop", PolicyId::Scripted { moves: vec![PlannedMove::ShareClosest] })
}

/// Menus for the reciprocity payoff check: quid pro quo or share-and-ignore.
pub fn quid_pro_quo_menus(config: &GameConfig) -> Vec<Vec<Strategy>> {
    config
        .players
        .iter()
        .map(|_| vec![Strategy::new("quid_pro_quo", PolicyId::QuidProQuo { grim: false }), all_noop()])
        .collect()
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(-1.0..=1.0)
}

fn jitter(rng: &mut ChaCha8Rng, around: &[f64], spread: f64) -> Vec<f64> {
    around
        .iter()
        .map(|x| (x + rng.gen_range(-spread..=spread)).clamp(-1.0, 1.0))
        .collect()
}

/// Content-only instances with up to three players, three pool items each and
/// horizon two, drawn from a fixed generator so the family is stable.
pub fn idealist_instances() -> Vec<GameConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1DEA_1157);
    let mut out = Vec::new();
    for n in 1..=3u32 {
        for pool_size in 1..=3usize {
            for horizon in 1..=2u32 {
                for allow_new in [false, true] {
                    for k_dims in [1usize, 2] {
                        let players = (0..n)
                            .map(|i| {
                                let ideal: Vec<f64> = (0..k_dims).map(|_| unit(&mut rng)).collect();
                                player(i, 1.0, &ideal, PolicyId::Idealist)
                            })
                            .collect();
                        let pools = (0..n)
                            .map(|_| (0..pool_size).map(|_| (0..k_dims).map(|_| unit(&mut rng)).collect()).collect())
                            .collect();
                        let mut config = assemble(players, pools, k_dims, horizon);
                        config.allow_new_content = allow_new;
                        config.rng_seed = rng.gen();
                        out.push(config);
                    }
                }
            }
        }
    }
    out
}

/// Canned menu for a content-only player: the idealist policy, every
/// share-one-item-then-stop sequence, a second share when new content is
/// allowed, quid pro quo, and a preference-blind reactor.
pub fn idealist_menu(config: &GameConfig, id: PlayerId) -> Vec<Strategy> {
    let mut menu = vec![Strategy::new("idealist", PolicyId::Idealist)];
    let pool = config.pool(id);
    for item in pool {
        menu.push(share_then_noop(&format!("share_{}", item.id), item.id));
    }
    if config.allow_new_content {
        for (a, b) in pool.iter().zip(pool.iter().skip(1)) {
            menu.push(Strategy::new(
                format!("share_{}_then_{}", a.id, b.id),
                PolicyId::Scripted {
                    moves: vec![PlannedMove::Share { content: a.id }, PlannedMove::Share { content: b.id }],
                },
            ));
        }
    }
    menu.push(Strategy::new("quid_pro_quo", PolicyId::QuidProQuo { grim: false }));
    menu.push(Strategy::new("reactor_blind", PolicyId::Reactor { center: None, radius: None, follows: None }));
    menu
}

/// Small random game of uniform mixers, so states carry a spread of personal
/// and social values. Gammas are 0, 1 or uniform.
pub fn random_game(seed: u64) -> GameConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=4u32);
    let k_dims = rng.gen_range(1..=3usize);
    let mut players = Vec::new();
    let mut pools = Vec::new();
    for i in 0..n {
        let gamma = match rng.gen_range(0..4) {
            0 => 0.0,
            1 => 1.0,
            _ => rng.gen(),
        };
        let ideal: Vec<f64> = (0..k_dims).map(|_| unit(&mut rng)).collect();
        players.push(player(i, gamma, &ideal, PolicyId::UniformMixer));
        let size = rng.gen_range(1..=3);
        pools.push((0..size).map(|_| (0..k_dims).map(|_| unit(&mut rng)).collect()).collect());
    }
    let mut config = assemble(players, pools, k_dims, rng.gen_range(1..=4));
    config.allow_new_content = rng.gen();
    config.discount = rng.gen_range(0.5..=1.0);
    config.rng_seed = rng.gen();
    config
}

pub const FALSE_CONSENSUS_PLAYERS: usize = 20;

/// Cat-pictures scenario: twenty engagement-only players, a salient content
/// type that few of them actually prefer, cheap talk, and engagement-driven
/// visibility.
pub fn false_consensus(seed: u64) -> GameConfig {
    let centroids = vec![vec![0.75, 0.75], vec![-0.7, 0.45], vec![0.1, -0.75]];
    let mut rng = ChaCha8Rng::seed_from_u64(0xCA75);
    let mut players = Vec::new();
    let mut pools = Vec::new();
    for i in 0..FALSE_CONSENSUS_PLAYERS as u32 {
        let own = match i % 10 {
            0 => 0,
            1 | 3 | 5 | 7 | 9 => 1,
            _ => 2,
        };
        let ideal = jitter(&mut rng, &centroids[own], 0.2);
        let policy = if i % 10 == 9 { PolicyId::UniformMixer } else { PolicyId::LevelK { depth: 1 } };
        players.push(player(i, 0.0, &ideal, policy));
        let other = if own == 1 { 2 } else { 1 };
        let third = if i % 2 == 0 { 0 } else { own };
        pools.push(vec![
            jitter(&mut rng, &ideal, 0.1),
            jitter(&mut rng, &centroids[other], 0.2),
            jitter(&mut rng, &centroids[third], 0.2),
        ]);
    }
    let mut config = assemble(players, pools, 2, 10);
    config.cheap_talk = true;
    config.type_centroids = Some(centroids);
    config.salient_type = Some(0);
    config.info_mode = InfoMode::Imperfect;
    config.visibility_floor = 0.2;
    config.rng_seed = seed;
    config
}

/// Same population with a narrow visibility floor, where the majority prefers
/// the salient type.
pub fn echo_chamber(seed: u64) -> GameConfig {
    let mut config = false_consensus(seed);
    config.visibility_floor = 0.05;
    let salient = config.type_centroids.as_ref().unwrap()[0].clone();
    let mut rng = ChaCha8Rng::seed_from_u64(0xEC40);
    for p in config.players.iter_mut().filter(|p| p.id.0 % 3 != 2) {
        p.ideal = jitter(&mut rng, &salient, 0.15);
    }
    config
}

/// Shape of the influencer scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostingParams {
    pub followers: u32,
    pub background: u32,
    pub floor: f64,
    pub horizon: u32,
}

impl Default for BoostingParams {
    fn default() -> Self {
        Self { followers: 200, background: 16, floor: 0.45, horizon: 6 }
    }
}

/// Influencer scenario: player 0 has audience multiplier `multiplier` and
/// reshares content near its taste; player 1 seeks a reshare from player 0.
/// Followers like what player 0 shares near their taste. Player 2 posts a hub
/// item liked by a background of high-audience accounts, so the hub, not the
/// target, is the most engaged item unless the influencer's reshare carries
/// weight. Likes are weighted lightly, so follower likes barely move the
/// target's visibility.
pub fn signal_boosting(seed: u64, multiplier: f64) -> GameConfig {
    signal_boosting_with(seed, multiplier, BoostingParams::default())
}

pub fn signal_boosting_with(seed: u64, multiplier: f64, params: BoostingParams) -> GameConfig {
    let taste = [0.6, 0.6];
    let hub = [-0.6, -0.3];
    let far = [0.9, -0.9];
    let mut rng = ChaCha8Rng::seed_from_u64(0xB005);
    let mut players = vec![
        player(0, 0.0, &taste, PolicyId::InfluencerReposter { radius: 0.15 }),
        player(1, 0.0, &[-0.5, 0.7], PolicyId::InfluencerSeeker { target: PlayerId(0) }),
        player(2, 0.0, &far, PolicyId::InfluencerReposter { radius: 0.0 }),
    ];
    players[0].audience_multiplier = multiplier;
    let mut pools = vec![vec![vec![0.2, 0.9]], vec![vec![-0.5, 0.7], vec![0.65, 0.55]], vec![hub.to_vec()]];
    let mut id = 3;
    for _ in 0..params.followers {
        let policy = PolicyId::Reactor { center: None, radius: Some(0.12), follows: Some(PlayerId(0)) };
        players.push(player(id, 0.0, &jitter(&mut rng, &taste, 0.05), policy));
        pools.push(vec![jitter(&mut rng, &far, 0.1)]);
        id += 1;
    }
    for _ in 0..params.background {
        let policy = PolicyId::Reactor { center: None, radius: Some(0.1), follows: None };
        let mut fan = player(id, 0.0, &jitter(&mut rng, &hub, 0.03), policy);
        fan.audience_multiplier = 200.0;
        players.push(fan);
        pools.push(vec![jitter(&mut rng, &far, 0.1)]);
        id += 1;
    }
    let mut config = assemble(players, pools, 2, params.horizon);
    config.info_mode = InfoMode::Imperfect;
    config.visibility_floor = params.floor;
    config.like_weight = 0.005;
    config.rng_seed = seed;
    config
}

/// Content the seeker hopes the influencer will reshare.
pub fn signal_boosting_target(config: &GameConfig) -> ContentId {
    config.pool(PlayerId(1))[1].id
}

/// Weak-dominance instance: an engagement-only focal player (id 0) choosing
/// between displays of its own taste and the displayed majority taste, facing
/// two reactors whose reaction centers are either at the focal player's
/// taste or opposite it. `blind` makes the reactors like everything. One
/// reaction round, so only the round-0 choice moves the focal payoff.
pub fn dominance_instance(blind: bool) -> GameConfig {
    let own = [1.0, 1.0];
    let majority = [-1.0, -1.0];
    let radius = if blind { None } else { Some(0.1) };
    let players = vec![
        player(0, 0.0, &own, PolicyId::LevelK { depth: 1 }),
        player(1, 0.0, &[0.0, 0.5], PolicyId::Reactor { center: Some(own.to_vec()), radius, follows: None }),
        player(2, 0.0, &[0.5, 0.0], PolicyId::Reactor { center: Some(own.to_vec()), radius, follows: None }),
    ];
    let pools = vec![
        vec![own.to_vec(), majority.to_vec()],
        vec![vec![0.9, 0.9], vec![-0.9, -0.9]],
        vec![vec![0.9, 0.9], vec![-0.9, -0.9]],
    ];
    let mut config = assemble(players, pools, 2, 1);
    config.cheap_talk = true;
    config
}

/// Menus for [`dominance_instance`]: majority-aligned (index 0) versus
/// own-ideal (index 1) for the focal player; reaction center at the focal
/// taste or at the majority taste for each reactor.
pub fn dominance_menus(config: &GameConfig) -> Vec<Vec<Strategy>> {
    let focal = vec![
        Strategy::new("majority_aligned", PolicyId::LevelK { depth: 1 }),
        Strategy::new("own_ideal", PolicyId::LevelK { depth: 0 }),
    ];
    let mut menus = vec![focal];
    for p in &config.players[1..] {
        let radius = match &p.policy {
            PolicyId::Reactor { radius, .. } => *radius,
            _ => None,
        };
        menus.push(vec![
            Strategy::new("center_focal", PolicyId::Reactor { center: Some(vec![1.0, 1.0]), radius, follows: None }),
            Strategy::new("center_majority", PolicyId::Reactor { center: Some(vec![-1.0, -1.0]), radius, follows: None }),
        ]);
    }
    menus
}
