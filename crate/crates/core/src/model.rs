//! Domain types for the game of like, plus configuration validation and the
//! per-round legality rules.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ledger::EngagementLedger;

pub const SCHEMA_VERSION: u32 = 1;

pub type Round = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlayerId(pub u32);

impl PlayerId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContentId(pub u32);

impl fmt::Display for ContentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

/// A (content, sharer) pair: the unit other players can like or reshare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SharedPair {
    pub content: ContentId,
    pub sharer: PlayerId,
}

impl SharedPair {
    pub fn new(content: ContentId, sharer: PlayerId) -> Self {
        Self { content, sharer }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContentItem {
    pub id: ContentId,
    pub vector: Vec<f64>,
    pub author: PlayerId,
    #[serde(default)]
    pub round_introduced: Round,
}

/// One move of an open-loop script. `Like`/`Reshare` resolve at run time to the
/// most recent pair the source shared that the actor may still engage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "move", rename_all = "snake_case")]
pub enum PlannedMove {
    ShareClosest,
    Share { content: ContentId },
    Noop,
    Like { source: PlayerId },
    Reshare { source: PlayerId },
}

/// Behaviour rule attached to a player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicyId {
    Idealist,
    QuidProQuo {
        /// Never reciprocate a partner once they failed to reciprocate.
        #[serde(default)]
        grim: bool,
    },
    UniformMixer,
    LevelK {
        depth: u8,
    },
    InfluencerSeeker {
        target: PlayerId,
    },
    InfluencerReposter {
        radius: f64,
    },
    /// Likes visible content within `radius` (normalized) of `center`, closest
    /// first. `radius: None` likes anything, in (source, content) id order.
    /// With `follows` set, only pairs shared by that player count.
    Reactor {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        follows: Option<PlayerId>,
    },
    /// Fixed open-loop action sequence; rounds past the script play Noop.
    Scripted {
        moves: Vec<PlannedMove>,
    },
    /// History-contingent plan, keyed by the encoded public history.
    Contingent {
        plan: BTreeMap<String, PlannedMove>,
    },
}

impl PolicyId {
    pub fn is_stochastic(&self) -> bool {
        matches!(self, PolicyId::UniformMixer)
    }

    pub fn label(&self) -> String {
        match self {
            PolicyId::Idealist => "idealist".into(),
            PolicyId::QuidProQuo { grim: false } => "quid_pro_quo".into(),
            PolicyId::QuidProQuo { grim: true } => "quid_pro_quo_grim".into(),
            PolicyId::UniformMixer => "uniform_mixer".into(),
            PolicyId::LevelK { depth } => format!("level_k{depth}"),
            PolicyId::InfluencerSeeker { target } => format!("seeker->{target}"),
            PolicyId::InfluencerReposter { radius } => format!("reposter(r={radius})"),
            PolicyId::Reactor { radius: None, .. } => "reactor(blind)".into(),
            PolicyId::Reactor { radius: Some(r), .. } => format!("reactor(r={r})"),
            PolicyId::Scripted { .. } => "scripted".into(),
            PolicyId::Contingent { plan } => format!("contingent({} nodes)", plan.len()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BeliefState {
    #[serde(default)]
    pub majority_centroid_estimate: Option<Vec<f64>>,
    #[serde(default)]
    pub majority_centroid_of_centroid_estimate: Option<Vec<f64>>,
    /// Per-player probability of being a gamma = 0 type.
    #[serde(default)]
    pub gamma_type_beliefs: Option<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerSpec {
    pub id: PlayerId,
    pub gamma: f64,
    pub ideal: Vec<f64>,
    pub policy: PolicyId,
    #[serde(default = "one")]
    pub audience_multiplier: f64,
    #[serde(default)]
    pub belief: BeliefState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfoMode {
    Perfect,
    Imperfect,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}
fn default_like_weight() -> f64 {
    1.0
}
fn default_reshare_weight() -> f64 {
    2.0
}
fn default_floor() -> f64 {
    0.2
}
fn default_alignment_radius() -> f64 {
    0.25
}
fn perfect() -> InfoMode {
    InfoMode::Perfect
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub n_players: usize,
    pub k_dims: usize,
    pub horizon: Round,
    pub players: Vec<PlayerSpec>,
    pub initial_content_pool: Vec<Vec<ContentItem>>,
    #[serde(default)]
    pub allow_new_content: bool,
    #[serde(default = "perfect")]
    pub info_mode: InfoMode,
    #[serde(default = "default_floor")]
    pub visibility_floor: f64,
    #[serde(default = "default_like_weight")]
    pub like_weight: f64,
    #[serde(default = "default_reshare_weight")]
    pub reshare_weight: f64,
    #[serde(default = "one")]
    pub discount: f64,
    #[serde(default)]
    pub cheap_talk: bool,
    #[serde(default)]
    pub type_centroids: Option<Vec<Vec<f64>>>,
    /// Index into `type_centroids` of the type engagement seekers display
    /// during cheap talk.
    #[serde(default)]
    pub salient_type: Option<usize>,
    #[serde(default = "default_alignment_radius")]
    pub alignment_radius: f64,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(skip)]
    pub content_cache: ContentCache,
}

/// Lazily built position index for [`GameConfig::content`]. Lookups verify
/// the id they land on, so a stale index only costs a linear scan. Never
/// affects equality.
#[derive(Debug, Clone, Default)]
pub struct ContentCache(OnceLock<BTreeMap<ContentId, (usize, usize)>>);

impl PartialEq for ContentCache {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl GameConfig {
    pub fn player(&self, id: PlayerId) -> Option<&PlayerSpec> {
        self.players.get(id.index()).filter(|p| p.id == id)
    }

    pub fn pool(&self, id: PlayerId) -> &[ContentItem] {
        self.initial_content_pool
            .get(id.index())
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn content(&self, id: ContentId) -> Option<&ContentItem> {
        let index = self.content_cache.0.get_or_init(|| {
            let mut map = BTreeMap::new();
            for (i, pool) in self.initial_content_pool.iter().enumerate() {
                for (j, item) in pool.iter().enumerate() {
                    map.entry(item.id).or_insert((i, j));
                }
            }
            map
        });
        let cached = index
            .get(&id)
            .and_then(|&(i, j)| self.initial_content_pool.get(i)?.get(j))
            .filter(|item| item.id == id);
        cached.or_else(|| self.initial_content_pool.iter().flatten().find(|item| item.id == id))
    }

    pub fn content_index(&self) -> BTreeMap<ContentId, &ContentItem> {
        self.initial_content_pool
            .iter()
            .flatten()
            .map(|item| (item.id, item))
            .collect()
    }

    pub fn salient_centroid(&self) -> Option<&[f64]> {
        let centroids = self.type_centroids.as_ref()?;
        centroids.get(self.salient_type?).map(Vec::as_slice)
    }

    pub fn weight_of(&self, kind: ActionKind) -> f64 {
        match kind {
            ActionKind::Like => self.like_weight,
            ActionKind::Reshare => self.reshare_weight,
            ActionKind::Share | ActionKind::Noop => 0.0,
        }
    }

    pub fn player_ids(&self) -> impl Iterator<Item = PlayerId> + '_ {
        self.players.iter().map(|p| p.id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Share,
    Reshare,
    Like,
    Noop,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ActionRecord {
    pub round: Round,
    pub actor: PlayerId,
    pub kind: ActionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content: Option<ContentId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<PlayerId>,
}

impl ActionRecord {
    pub fn noop(round: Round, actor: PlayerId) -> Self {
        Self { round, actor, kind: ActionKind::Noop, content: None, source: None }
    }

    pub fn share(round: Round, actor: PlayerId, content: ContentId) -> Self {
        Self { round, actor, kind: ActionKind::Share, content: Some(content), source: None }
    }

    pub fn like(round: Round, actor: PlayerId, pair: SharedPair) -> Self {
        Self {
            round,
            actor,
            kind: ActionKind::Like,
            content: Some(pair.content),
            source: Some(pair.sharer),
        }
    }

    pub fn reshare(round: Round, actor: PlayerId, pair: SharedPair) -> Self {
        Self {
            round,
            actor,
            kind: ActionKind::Reshare,
            content: Some(pair.content),
            source: Some(pair.sharer),
        }
    }

    /// The engaged pair for likes and reshares.
    pub fn pair(&self) -> Option<SharedPair> {
        match (self.kind, self.content, self.source) {
            (ActionKind::Like | ActionKind::Reshare, Some(c), Some(s)) => Some(SharedPair::new(c, s)),
            _ => None,
        }
    }

    pub fn is_engagement(&self) -> bool {
        matches!(self.kind, ActionKind::Like | ActionKind::Reshare)
    }
}

impl fmt::Display for ActionRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{} {} ", self.round, self.actor)?;
        match (self.kind, self.content, self.source) {
            (ActionKind::Noop, _, _) => write!(f, "noop"),
            (ActionKind::Share, Some(c), _) => write!(f, "share({c})"),
            (kind, Some(c), Some(s)) => write!(f, "{kind:?}({c}, {s})"),
            (kind, c, s) => write!(f, "{kind:?}({c:?}, {s:?})"),
        }
    }
}

/// Key used to enforce that each (actor, kind, content, source) happens once.
pub type EngagementKey = (PlayerId, ActionKind, ContentId, PlayerId);

#[derive(Debug, Clone, PartialEq)]
pub struct GameState {
    pub round: Round,
    pub history: Vec<ActionRecord>,
    pub ledger: EngagementLedger,
    pub visible_sets: Vec<BTreeSet<SharedPair>>,
    pub beliefs: Vec<BeliefState>,
    pub(crate) performed: BTreeSet<EngagementKey>,
    pub(crate) shared: BTreeSet<ContentId>,
}

impl GameState {
    pub fn initial(config: &GameConfig) -> Self {
        Self {
            round: 0,
            history: Vec::new(),
            ledger: EngagementLedger::default(),
            visible_sets: vec![BTreeSet::new(); config.players.len()],
            beliefs: config.players.iter().map(|p| p.belief.clone()).collect(),
            performed: BTreeSet::new(),
            shared: BTreeSet::new(),
        }
    }

    pub fn has_performed(&self, actor: PlayerId, kind: ActionKind, pair: SharedPair) -> bool {
        self.performed.contains(&(actor, kind, pair.content, pair.sharer))
    }

    pub fn is_shared(&self, content: ContentId) -> bool {
        self.shared.contains(&content)
    }

    pub fn actions_in_round(&self, round: Round) -> impl Iterator<Item = &ActionRecord> {
        self.history.iter().filter(move |a| a.round == round)
    }

    /// Every (content, sharer) pair `player` could see in a perfect-information
    /// game before the current round: all earlier pairs minus self-authored and
    /// self-shared ones.
    pub fn full_catalog_for(&self, player: PlayerId) -> BTreeSet<SharedPair> {
        self.ledger
            .pairs_before(self.round)
            .filter(|pair| pair.sharer != player && self.ledger.author(pair.content) != Some(player))
            .collect()
    }

    /// [`GameState::full_catalog_for`] for players `0..n`, sharing one pass
    /// over the ledger.
    pub fn full_catalogs(&self, n: usize) -> Vec<BTreeSet<SharedPair>> {
        let pairs: Vec<(SharedPair, Option<PlayerId>)> = self
            .ledger
            .pairs_before(self.round)
            .map(|pair| (pair, self.ledger.author(pair.content)))
            .collect();
        (0..n)
            .map(|i| {
                let player = PlayerId(i as u32);
                pairs
                    .iter()
                    .filter(|(pair, author)| pair.sharer != player && *author != Some(player))
                    .map(|(pair, _)| *pair)
                    .collect()
            })
            .collect()
    }

    pub(crate) fn record(&mut self, action: &ActionRecord) {
        if let Some(pair) = action.pair() {
            self.performed.insert((action.actor, action.kind, pair.content, pair.sharer));
        }
        if action.kind == ActionKind::Share {
            if let Some(c) = action.content {
                self.shared.insert(c);
            }
        }
        self.history.push(action.clone());
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("unknown player id {0}")]
    UnknownPlayer(PlayerId),
    #[error("round {round} is beyond the horizon {horizon}")]
    RoundBeyondHorizon { round: Round, horizon: Round },
}

/// Actions `player` may take in the current round of `state`.
///
/// Round 0 offers one `Share` per pool item. Later rounds offer `Noop`, a
/// `Like` and a `Reshare` for every visible pair not already engaged that way,
/// and, when new content is allowed, `Share` for each unshared pool item.
pub fn legal_actions(
    state: &GameState,
    player: PlayerId,
    config: &GameConfig,
) -> Result<Vec<ActionRecord>, ModelError> {
    config.player(player).ok_or(ModelError::UnknownPlayer(player))?;
    let round = state.round;
    if round > config.horizon {
        return Err(ModelError::RoundBeyondHorizon { round, horizon: config.horizon });
    }
    if round == 0 {
        return Ok(config
            .pool(player)
            .iter()
            .map(|item| ActionRecord::share(0, player, item.id))
            .collect());
    }

    let mut out = vec![ActionRecord::noop(round, player)];
    let visible = state.visible_sets.get(player.index());
    for pair in visible.into_iter().flatten() {
        if pair.sharer == player || state.ledger.author(pair.content) == Some(player) {
            continue;
        }
        match state.ledger.first_shared(*pair) {
            Some(r) if r < round => {}
            _ => continue,
        }
        if !state.has_performed(player, ActionKind::Like, *pair) {
            out.push(ActionRecord::like(round, player, *pair));
        }
        if !state.has_performed(player, ActionKind::Reshare, *pair) {
            out.push(ActionRecord::reshare(round, player, *pair));
        }
    }
    if config.allow_new_content {
        for item in config.pool(player) {
            if !state.is_shared(item.id) {
                out.push(ActionRecord::share(round, player, item.id));
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Membership test equivalent to `legal_actions(..).contains(action)`
/// without building the set.
pub fn is_legal(state: &GameState, action: &ActionRecord, config: &GameConfig) -> Result<bool, ModelError> {
    let player = action.actor;
    config.player(player).ok_or(ModelError::UnknownPlayer(player))?;
    let round = state.round;
    if round > config.horizon {
        return Err(ModelError::RoundBeyondHorizon { round, horizon: config.horizon });
    }
    if action.round != round {
        return Ok(false);
    }
    let own_item = |c: ContentId| config.pool(player).iter().any(|item| item.id == c);
    Ok(match (action.kind, action.content, action.source) {
        (ActionKind::Share, Some(c), None) if round == 0 => own_item(c),
        _ if round == 0 => false,
        (ActionKind::Noop, None, None) => true,
        (ActionKind::Share, Some(c), None) => config.allow_new_content && own_item(c) && !state.is_shared(c),
        (kind @ (ActionKind::Like | ActionKind::Reshare), Some(c), Some(sharer)) => {
            let pair = SharedPair::new(c, sharer);
            let visible = state.visible_sets.get(player.index()).is_some_and(|v| v.contains(&pair));
            visible
                && sharer != player
                && state.ledger.author(c) != Some(player)
                && state.ledger.first_shared(pair).is_some_and(|r| r < round)
                && !state.has_performed(player, kind, pair)
        }
        _ => false,
    })
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Diameter of `[-1, 1]^k`.
pub fn max_distance(k_dims: usize) -> f64 {
    2.0 * (k_dims as f64).sqrt()
}

pub fn normalized_distance(a: &[f64], b: &[f64]) -> f64 {
    distance(a, b) / max_distance(a.len().max(1))
}

pub fn mean_vector<'a>(vectors: impl IntoIterator<Item = &'a [f64]>, k_dims: usize) -> Option<Vec<f64>> {
    let mut sum = vec![0.0; k_dims];
    let mut count = 0usize;
    for v in vectors {
        for (s, x) in sum.iter_mut().zip(v) {
            *s += x;
        }
        count += 1;
    }
    if count == 0 {
        return None;
    }
    Some(sum.into_iter().map(|s| s / count as f64).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Fatal,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub severity: Severity,
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Fatal => "fatal",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}: {}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_runnable(&self) -> bool {
        !self.violations.iter().any(|v| v.severity == Severity::Fatal)
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn fatal(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.severity == Severity::Fatal)
    }

    pub fn contains(&self, needle: &str) -> bool {
        self.violations.iter().any(|v| v.message.contains(needle))
    }

    fn push(&mut self, severity: Severity, field: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation { severity, field: field.into(), message: message.into() });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

fn in_unit_box(v: &[f64]) -> bool {
    v.iter().all(|x| (-1.0..=1.0).contains(x))
}

fn check_vector(report: &mut ValidationReport, field: &str, v: &[f64], k: usize) {
    if v.len() != k {
        report.push(Severity::Fatal, field, format!("expected {k} coordinates, found {}", v.len()));
    } else if !in_unit_box(v) {
        report.push(Severity::Fatal, field, "coordinate out of [-1,1]");
    }
}

/// Checks every config invariant; an empty report means a clean config.
pub fn validate_config(config: &GameConfig) -> ValidationReport {
    use Severity::Fatal;
    let mut report = ValidationReport::default();
    let k = config.k_dims;

    if config.schema_version != SCHEMA_VERSION {
        report.push(Fatal, "schema_version", format!("unsupported schema version {}", config.schema_version));
    }
    if config.n_players == 0 {
        report.push(Fatal, "n_players", "n_players must be positive");
    }
    if k == 0 {
        report.push(Fatal, "k_dims", "k_dims must be positive");
    }
    if config.horizon == 0 {
        report.push(Fatal, "horizon", "horizon must be positive");
    }
    if config.players.len() != config.n_players {
        report.push(
            Fatal,
            "players",
            format!("player count {} does not match n_players {}", config.players.len(), config.n_players),
        );
    }
    if config.initial_content_pool.len() != config.players.len() {
        report.push(
            Fatal,
            "initial_content_pool",
            format!("expected one pool per player, found {}", config.initial_content_pool.len()),
        );
    }
    if !(config.like_weight >= 0.0) {
        report.push(Fatal, "like_weight", "like weight must be non-negative");
    }
    if !(config.reshare_weight >= 0.0) {
        report.push(Fatal, "reshare_weight", "reshare weight must be non-negative");
    }
    if !(config.like_weight + config.reshare_weight > 0.0) {
        report.push(Fatal, "like_weight", "degenerate engagement weights");
    }
    if !(0.0..=1.0).contains(&config.discount) {
        report.push(Fatal, "discount", "discount out of [0,1]");
    }
    if config.info_mode == InfoMode::Imperfect
        && !(config.visibility_floor > 0.0 && config.visibility_floor <= 1.0)
    {
        report.push(Fatal, "visibility_floor", "visibility floor out of (0,1]");
    }
    if !(0.0..=1.0).contains(&config.alignment_radius) {
        report.push(Fatal, "alignment_radius", "alignment radius out of [0,1]");
    }

    let centroid_count = match &config.type_centroids {
        Some(cs) => {
            if cs.is_empty() {
                report.push(Fatal, "type_centroids", "at least one centroid required");
            }
            for (i, c) in cs.iter().enumerate() {
                check_vector(&mut report, &format!("type_centroids[{i}]"), c, k);
            }
            cs.len()
        }
        None => 0,
    };
    if let Some(s) = config.salient_type {
        if s >= centroid_count {
            report.push(Fatal, "salient_type", format!("salient type {s} has no centroid"));
        }
    }

    for (idx, p) in config.players.iter().enumerate() {
        let field = format!("players[{idx}]");
        if p.id.index() != idx {
            report.push(Fatal, format!("{field}.id"), format!("player id {} must equal its position {idx}", p.id.0));
        }
        if !(0.0..=1.0).contains(&p.gamma) {
            report.push(Fatal, format!("{field}.gamma"), "gamma out of [0,1]");
        }
        if !(p.audience_multiplier >= 1.0) {
            report.push(Fatal, format!("{field}.audience_multiplier"), "audience multiplier below 1");
        }
        check_vector(&mut report, &format!("{field}.ideal"), &p.ideal, k);
        validate_belief(&mut report, &field, &p.belief, k, config.players.len());
        validate_policy(&mut report, &field, &p.policy, config);
    }

    let mut seen = BTreeSet::new();
    for (idx, pool) in config.initial_content_pool.iter().enumerate() {
        let field = format!("initial_content_pool[{idx}]");
        if pool.is_empty() {
            report.push(Fatal, field.clone(), "content pool is empty");
        }
        for item in pool {
            if !seen.insert(item.id) {
                report.push(Fatal, field.clone(), format!("duplicate content id {}", item.id));
            }
            if item.author.index() != idx {
                report.push(Fatal, field.clone(), format!("{} authored by {} sits in pool {idx}", item.id, item.author));
            }
            if item.round_introduced != 0 && !config.allow_new_content {
                report.push(Fatal, field.clone(), format!("{} introduced after round 0 without allow_new_content", item.id));
            }
            check_vector(&mut report, &format!("{field}.{}", item.id), &item.vector, k);
        }
    }
    report
}

fn validate_belief(report: &mut ValidationReport, field: &str, belief: &BeliefState, k: usize, n: usize) {
    if let Some(v) = &belief.majority_centroid_estimate {
        check_vector(report, &format!("{field}.belief.majority_centroid_estimate"), v, k);
    }
    if let Some(v) = &belief.majority_centroid_of_centroid_estimate {
        check_vector(report, &format!("{field}.belief.majority_centroid_of_centroid_estimate"), v, k);
        if belief.majority_centroid_estimate.is_none() {
            report.push(Severity::Fatal, format!("{field}.belief"), "level-2 estimate without level-1 estimate");
        }
    }
    if let Some(ps) = &belief.gamma_type_beliefs {
        if ps.len() != n {
            report.push(Severity::Fatal, format!("{field}.belief.gamma_type_beliefs"), "one probability per player required");
        }
        if ps.iter().any(|p| !(0.0..=1.0).contains(p)) {
            report.push(Severity::Fatal, format!("{field}.belief.gamma_type_beliefs"), "probability out of [0,1]");
        }
    }
}

fn validate_policy(report: &mut ValidationReport, field: &str, policy: &PolicyId, config: &GameConfig) {
    let field = format!("{field}.policy");
    match policy {
        PolicyId::LevelK { depth } if *depth > 2 => {
            report.push(Severity::Fatal, field, format!("level-k depth {depth} exceeds 2"));
        }
        PolicyId::InfluencerReposter { radius } if !(*radius >= 0.0) => {
            report.push(Severity::Fatal, field, "radius must be non-negative");
        }
        PolicyId::Reactor { center, radius, follows } => {
            if let Some(f) = follows {
                if config.player(*f).is_none() {
                    report.push(Severity::Fatal, field.clone(), format!("unknown followed player {f}"));
                }
            }
            if let Some(r) = radius {
                if !(*r >= 0.0) {
                    report.push(Severity::Fatal, field.clone(), "radius must be non-negative");
                }
            }
            if let Some(c) = center {
                check_vector(report, &format!("{field}.center"), c, config.k_dims);
            }
        }
        PolicyId::InfluencerSeeker { target } => match config.player(*target) {
            None => report.push(Severity::Fatal, field, format!("unknown influencer target {target}")),
            Some(t) if t.audience_multiplier <= 1.0 => report.push(
                Severity::Warning,
                field,
                format!("influencer target {target} has audience multiplier {}", t.audience_multiplier),
            ),
            Some(_) => {}
        },
        _ => {}
    }
}
