//! Rules of `Mines_m(p, q, k)`.
//!
//! Two players alternately mark one free cell or pass. Player one wins on
//! owning every cell of some `p`-level triangle, player two on a `q`-level
//! one; the win is stamped on the move that first completes the set. The
//! game is drawn when every cell is marked without a win, or when both
//! players pass back to back.
//!
//! The directional variant (`k = 1` only) looks for triangles in each of
//! the three 120° orientations of the board and awards the game to the
//! first player holding triangles in at least two of them.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::sync::{Arc, LazyLock, Mutex};

use serde::{Deserialize, Serialize};

use crate::bits::CellSet;
use crate::board::{Board, WinningSets};
use crate::tri::{bracket, TriangularSet};

/// Largest number of cells a board may have.
pub const MAX_CELLS: u64 = 4096;
/// Upper limit on the total size of the winning-set masks, in 64-bit words.
pub const MAX_MASK_WORDS: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MinesError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("the game is over")]
    GameOver,
    #[error("cell {0} is already marked")]
    CellOccupied(usize),
    #[error("cell {0} is not on the board")]
    NoSuchCell(usize),
    #[error("the game is not the directional variant")]
    NotDirectional,
    #[error("inconsistent game record: {0}")]
    BadRecord(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    Standard,
    Directional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GameConfig {
    pub m: u64,
    pub p: u64,
    pub q: u64,
    pub k: u64,
    #[serde(default)]
    pub variant: Variant,
}

impl GameConfig {
    pub fn new(m: u64, p: u64, q: u64, k: u64) -> Self {
        Self {
            m,
            p,
            q,
            k,
            variant: Variant::Standard,
        }
    }

    pub fn directional(m: u64, p: u64, q: u64) -> Self {
        Self {
            m,
            p,
            q,
            k: 1,
            variant: Variant::Directional,
        }
    }

    /// `Mines_3`: the 6-position board, triangles of two levels.
    pub fn mines3(variant: Variant) -> Self {
        Self {
            variant,
            ..Self::new(3, 2, 2, 1)
        }
    }

    pub fn validate(&self) -> Result<(), MinesError> {
        let GameConfig {
            m,
            p,
            q,
            k,
            variant,
        } = *self;
        let bad = |msg: String| Err(MinesError::InvalidConfig(msg));
        if k == 0 {
            return bad("k must be positive".into());
        }
        if !(k <= p && p <= m && k <= q && q <= m) {
            return bad(format!("need k <= p, q <= m (m={m} p={p} q={q} k={k})"));
        }
        if variant == Variant::Directional && k != 1 {
            return bad("the directional variant needs k = 1".into());
        }
        let cells = bracket(m, k).map_err(|e| MinesError::InvalidConfig(e.to_string()))?;
        if cells > MAX_CELLS.into() {
            return bad(format!("{cells} cells exceeds the limit of {MAX_CELLS}"));
        }
        let words = crate::bits::words_for(cells.try_into().unwrap()) as u64;
        let sets = bracket(m, p).unwrap() + bracket(m, q).unwrap();
        let dirs: u64 = if variant == Variant::Directional {
            3
        } else {
            1
        };
        if sets * words * dirs > MAX_MASK_WORDS.into() {
            return bad("too many winning sets for this board".into());
        }
        Ok(())
    }

    pub fn level_count(&self, player: Player) -> u64 {
        match player {
            Player::One => self.p,
            Player::Two => self.q,
        }
    }

    /// The same board with the roles of the players exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            p: self.q,
            q: self.p,
            ..*self
        }
    }
}

impl fmt::Display for GameConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mines_{}({},{},{})", self.m, self.p, self.q, self.k)?;
        if self.variant == Variant::Directional {
            write!(f, " directional")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    #[serde(rename = "P1")]
    One,
    #[serde(rename = "P2")]
    Two,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Player::One => 'X',
            Player::Two => 'Y',
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::One => "P1",
            Player::Two => "P2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Move {
    Mark(usize),
    Pass,
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Mark(c) => write!(f, "mark {c}"),
            Move::Pass => f.write_str("pass"),
        }
    }
}

/// One of the three board orientations, numbered 1 to 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Direction(u8);

impl Direction {
    pub const ALL: [Direction; 3] = [Direction(1), Direction(2), Direction(3)];

    pub fn new(index: u8) -> Option<Self> {
        (1..=3).contains(&index).then_some(Direction(index))
    }

    pub fn index(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for Direction {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        Direction::new(v).ok_or_else(|| format!("direction {v} is not 1, 2 or 3"))
    }
}

impl From<Direction> for u8 {
    fn from(d: Direction) -> u8 {
        d.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "camelCase")]
pub enum Status {
    Ongoing,
    #[serde(rename_all = "camelCase")]
    Won {
        player: Player,
        /// Positions of a completed triangle; for the directional variant,
        /// the one found in the lowest winning direction.
        witness: TriangularSet,
        /// 1-based number of the move that completed the win.
        move_number: usize,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        directions: Vec<Direction>,
    },
    #[serde(rename_all = "camelCase")]
    Draw {
        /// Ended by two passes in a row rather than a full board.
        by_double_pass: bool,
    },
}

impl Status {
    pub fn is_over(&self) -> bool {
        !matches!(self, Status::Ongoing)
    }

    pub fn winner(&self) -> Option<Player> {
        match self {
            Status::Won { player, .. } => Some(*player),
            _ => None,
        }
    }
}

/// Board, cells and winning sets for one configuration.
#[derive(Debug)]
pub struct Rules {
    config: GameConfig,
    board: Board,
    p1: Vec<WinningSets>,
    p2: Vec<WinningSets>,
}

static RULES_CACHE: LazyLock<Mutex<HashMap<GameConfig, Arc<Rules>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

impl Rules {
    /// Shared rules for `config`, built once per process.
    pub fn for_config(config: GameConfig) -> Result<Arc<Rules>, MinesError> {
        config.validate()?;
        if let Some(r) = RULES_CACHE.lock().unwrap().get(&config) {
            return Ok(r.clone());
        }
        let rules = Arc::new(Rules::build(config));
        let mut cache = RULES_CACHE.lock().unwrap();
        Ok(cache.entry(config).or_insert(rules).clone())
    }

    fn build(config: GameConfig) -> Rules {
        let board = Board::new(config.m, config.k);
        let directed = |level: u64| {
            let standard = board.winning_sets(level);
            match config.variant {
                Variant::Standard => vec![standard],
                Variant::Directional => (1..=3u8)
                    .map(|d| standard.for_direction(&board, d))
                    .collect(),
            }
        };
        let p1 = directed(config.p);
        let p2 = if config.q == config.p {
            p1.clone()
        } else {
            directed(config.q)
        };
        Rules {
            config,
            board,
            p1,
            p2,
        }
    }

    pub fn config(&self) -> GameConfig {
        self.config
    }

    pub fn board(&self) -> &Board {
        &self.board
    }

    pub fn cell_count(&self) -> usize {
        self.board.cell_count()
    }

    /// Winning sets of `player`, one entry per direction.
    pub fn sets(&self, player: Player) -> &[WinningSets] {
        match player {
            Player::One => &self.p1,
            Player::Two => &self.p2,
        }
    }

    /// A triangle in the standard orientation all of whose cells are owned.
    pub fn witness(&self, player: Player, owned: &CellSet) -> Option<TriangularSet> {
        let sets = &self.sets(player)[0];
        sets.find_inside(owned).map(|i| sets.witness(i))
    }

    /// Directions in which `owned` contains a triangle (directional only).
    pub fn directions(&self, player: Player, owned: &CellSet) -> Vec<Direction> {
        self.sets(player)
            .iter()
            .zip(Direction::ALL)
            .filter(|(s, _)| s.masks().any_inside(owned))
            .map(|(_, d)| d)
            .collect()
    }

    /// Whether `owned` wins for `player` under this variant, with the
    /// witness and the winning directions.
    pub fn win(&self, player: Player, owned: &CellSet) -> Option<(TriangularSet, Vec<Direction>)> {
        match self.config.variant {
            Variant::Standard => self.witness(player, owned).map(|w| (w, Vec::new())),
            Variant::Directional => {
                let dirs = self.directions(player, owned);
                if dirs.len() < 2 {
                    return None;
                }
                let sets = &self.sets(player)[dirs[0].index() as usize - 1];
                let i = sets.find_inside(owned).unwrap();
                Some((sets.witness(i), dirs))
            }
        }
    }
}

/// A position in a game of Mines. Immutable; moves produce new states.
#[derive(Debug, Clone)]
pub struct GameState {
    rules: Arc<Rules>,
    owned: [CellSet; 2],
    history: Vec<(Player, Move)>,
    to_move: Player,
    status: Status,
}

impl PartialEq for GameState {
    fn eq(&self, other: &Self) -> bool {
        self.config() == other.config()
            && self.history == other.history
            && self.owned == other.owned
            && self.status == other.status
    }
}

impl Eq for GameState {}

pub fn new_game(config: GameConfig) -> Result<GameState, MinesError> {
    GameState::new(config)
}

impl GameState {
    pub fn new(config: GameConfig) -> Result<Self, MinesError> {
        let rules = Rules::for_config(config)?;
        let n = rules.cell_count();
        Ok(Self {
            rules,
            owned: [CellSet::new(n), CellSet::new(n)],
            history: Vec::new(),
            to_move: Player::One,
            status: Status::Ongoing,
        })
    }

    pub fn config(&self) -> GameConfig {
        self.rules.config
    }

    pub fn rules(&self) -> &Arc<Rules> {
        &self.rules
    }

    pub fn cell_count(&self) -> usize {
        self.rules.cell_count()
    }

    pub fn owned(&self, player: Player) -> &CellSet {
        &self.owned[player as usize]
    }

    pub fn owner(&self, cell: usize) -> Option<Player> {
        if self.owned[0].contains(cell) {
            Some(Player::One)
        } else if self.owned[1].contains(cell) {
            Some(Player::Two)
        } else {
            None
        }
    }

    pub fn owners(&self) -> Vec<Option<Player>> {
        (0..self.cell_count()).map(|c| self.owner(c)).collect()
    }

    pub fn history(&self) -> &[(Player, Move)] {
        &self.history
    }

    pub fn to_move(&self) -> Player {
        self.to_move
    }

    pub fn status(&self) -> &Status {
        &self.status
    }

    pub fn turn(&self) -> usize {
        self.history.len()
    }

    /// Consecutive passes at the end of the history (0 or 1 while ongoing).
    pub fn pass_streak(&self) -> usize {
        self.history
            .iter()
            .rev()
            .take_while(|(_, m)| *m == Move::Pass)
            .count()
    }

    pub fn marked_count(&self) -> usize {
        self.owned[0].len() + self.owned[1].len()
    }

    pub fn is_full(&self) -> bool {
        self.marked_count() == self.cell_count()
    }

    pub fn empty_cells(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.cell_count()).filter(|&c| self.owner(c).is_none())
    }

    pub fn legal_moves(&self) -> Result<Vec<Move>, MinesError> {
        if self.status.is_over() {
            return Err(MinesError::GameOver);
        }
        let mut moves: Vec<Move> = self.empty_cells().map(Move::Mark).collect();
        moves.push(Move::Pass);
        Ok(moves)
    }

    pub fn apply(&self, mv: Move) -> Result<GameState, MinesError> {
        if self.status.is_over() {
            return Err(MinesError::GameOver);
        }
        let mut next = self.clone();
        let player = self.to_move;
        match mv {
            Move::Mark(cell) => {
                if cell >= self.cell_count() {
                    return Err(MinesError::NoSuchCell(cell));
                }
                if self.owner(cell).is_some() {
                    return Err(MinesError::CellOccupied(cell));
                }
                next.owned[player as usize].insert(cell);
                next.history.push((player, mv));
                if let Some((witness, directions)) =
                    self.rules.win(player, &next.owned[player as usize])
                {
                    next.status = Status::Won {
                        player,
                        witness,
                        move_number: next.history.len(),
                        directions,
                    };
                } else if next.is_full() {
                    next.status = Status::Draw {
                        by_double_pass: false,
                    };
                }
            }
            Move::Pass => {
                let streak = self.pass_streak();
                next.history.push((player, mv));
                if streak >= 1 {
                    next.status = Status::Draw {
                        by_double_pass: true,
                    };
                }
            }
        }
        next.to_move = player.other();
        Ok(next)
    }

    pub fn winning_witness(&self, player: Player) -> Option<TriangularSet> {
        self.rules.witness(player, self.owned(player))
    }

    pub fn directional_wins(&self, player: Player) -> Result<Vec<Direction>, MinesError> {
        if self.config().variant != Variant::Directional {
            return Err(MinesError::NotDirectional);
        }
        Ok(self.rules.directions(player, self.owned(player)))
    }

    /// Rebuilds a state by replaying `moves` from the start.
    pub fn replay(config: GameConfig, moves: &[Move]) -> Result<GameState, MinesError> {
        moves
            .iter()
            .try_fold(GameState::new(config)?, |s, &m| s.apply(m))
    }

    /// Board text: one row per line, `X`/`Y`/`.` per position (`k = 1`),
    /// otherwise one line per cell.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let cfg = self.config();
        if cfg.k == 1 {
            for row in 1..=cfg.m {
                let _ = write!(out, "{}", " ".repeat((cfg.m - row) as usize));
                let first = crate::tri::triangular_number(row - 1) as usize;
                for c in first..first + row as usize {
                    if c > first {
                        out.push(' ');
                    }
                    out.push(self.owner(c).map_or('.', Player::symbol));
                }
                out.push('\n');
            }
        } else {
            for c in 0..self.cell_count() {
                let _ = writeln!(
                    out,
                    "{c:>4} {} {}",
                    self.owner(c).map_or('.', Player::symbol),
                    self.rules.board().cell(c)
                );
            }
        }
        out
    }
}

pub fn legal_moves(state: &GameState) -> Result<Vec<Move>, MinesError> {
    state.legal_moves()
}

pub fn apply_move(state: &GameState, mv: Move) -> Result<GameState, MinesError> {
    state.apply(mv)
}

pub fn winning_witness(state: &GameState, player: Player) -> Option<TriangularSet> {
    state.winning_witness(player)
}

pub fn directional_wins(state: &GameState, player: Player) -> Result<Vec<Direction>, MinesError> {
    state.directional_wins(player)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HistoryEntry {
    pub player: Player,
    #[serde(rename = "move")]
    pub mv: Move,
}

/// Wire form of a [`GameState`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GameRecord {
    pub config: GameConfig,
    pub owner: Vec<Option<Player>>,
    pub history: Vec<HistoryEntry>,
    pub to_move: Player,
    pub status: Status,
    pub turn: usize,
}

impl From<&GameState> for GameRecord {
    fn from(s: &GameState) -> Self {
        GameRecord {
            config: s.config(),
            owner: s.owners(),
            history: s
                .history
                .iter()
                .map(|&(player, mv)| HistoryEntry { player, mv })
                .collect(),
            to_move: s.to_move,
            status: s.status.clone(),
            turn: s.turn(),
        }
    }
}

impl TryFrom<GameRecord> for GameState {
    type Error = MinesError;

    fn try_from(r: GameRecord) -> Result<Self, Self::Error> {
        let moves: Vec<Move> = r.history.iter().map(|h| h.mv).collect();
        let state = GameState::replay(r.config, &moves)?;
        let bad = |what: &str| Err(MinesError::BadRecord(what.to_string()));
        if state
            .history
            .iter()
            .zip(&r.history)
            .any(|((p, _), h)| *p != h.player)
        {
            return bad("players do not alternate from P1");
        }
        if state.owners() != r.owner {
            return bad("owner map disagrees with the history");
        }
        if state.to_move != r.to_move {
            return bad("wrong player to move");
        }
        if state.status != r.status {
            return bad("status disagrees with the history");
        }
        if state.turn() != r.turn {
            return bad("turn counter disagrees with the history");
        }
        Ok(state)
    }
}

impl Serialize for GameState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        GameRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for GameState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = GameRecord::deserialize(d)?;
        GameState::try_from(r).map_err(serde::de::Error::custom)
    }
}
