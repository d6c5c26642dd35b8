//! Exact game values for small Mines positions.
//!
//! Full-depth negamax over pairs of ownership words with a shared
//! transposition table. Boards must fit in one 64-bit word.
//!
//! States are reduced by symmetries of the win rule before lookup. For the
//! standard `k = 1` game a player's triangles depend only on how many cells
//! they own in each row, so any reordering inside rows is a symmetry. The
//! directional rule is preserved by the rotations and the reflection of the
//! board, which permute the three directions. Other boards are not reduced.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use dashmap::DashMap;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::board::{mirror_position, rotate_id, Position};
use crate::mines::{GameConfig, GameState, MinesError, Move, Player, Rules, Status, Variant};
use crate::tri::triangular_number;

pub const DEFAULT_NODE_BUDGET: u64 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error("node budget of {budget} exceeded")]
    BudgetExceeded { budget: u64 },
    #[error("the game is already over")]
    GameOver,
    #[error("{cells} cells is too large to solve")]
    TooLarge { cells: usize },
    #[error(transparent)]
    Rules(#[from] MinesError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    FirstPlayerWin,
    SecondPlayerWin,
    DrawValue,
}

impl Outcome {
    fn from_relative(v: i8, mover: Player) -> Outcome {
        match (v, mover) {
            (0, _) => Outcome::DrawValue,
            (1, Player::One) | (-1, Player::Two) => Outcome::FirstPlayerWin,
            _ => Outcome::SecondPlayerWin,
        }
    }

    fn relative_to(self, mover: Player) -> i8 {
        match (self, mover) {
            (Outcome::DrawValue, _) => 0,
            (Outcome::FirstPlayerWin, Player::One) | (Outcome::SecondPlayerWin, Player::Two) => 1,
            _ => -1,
        }
    }

    pub fn winner(self) -> Option<Player> {
        match self {
            Outcome::FirstPlayerWin => Some(Player::One),
            Outcome::SecondPlayerWin => Some(Player::Two),
            Outcome::DrawValue => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GameValue {
    pub outcome: Outcome,
    pub principal_move: Option<Move>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Key {
    own: [u64; 2],
    to_move: u8,
    pass_streak: u8,
}

#[derive(Debug, Clone)]
enum Symmetry {
    None,
    /// Row offsets and widths; canonical form packs each player's cells to
    /// the left of their row.
    Rows(Vec<(u32, u32)>),
    /// Cell permutations of the board's symmetry group, identity first.
    Perms(Vec<Vec<u8>>),
}

impl Symmetry {
    fn for_rules(rules: &Rules) -> Symmetry {
        let cfg = rules.config();
        if cfg.k != 1 {
            return Symmetry::None;
        }
        match cfg.variant {
            Variant::Standard => Symmetry::Rows(
                (1..=cfg.m)
                    .map(|r| (triangular_number(r - 1) as u32, r as u32))
                    .collect(),
            ),
            Variant::Directional => {
                let n = triangular_number(cfg.m);
                let rot = |id: u64| rotate_id(id, cfg.m);
                let mir = |id: u64| mirror_position(Position::from_id(id)).id();
                let perm = |f: &dyn Fn(u64) -> u64| -> Vec<u8> {
                    (1..=n).map(|id| (f(id) - 1) as u8).collect()
                };
                Symmetry::Perms(vec![
                    perm(&|i| i),
                    perm(&rot),
                    perm(&|i| rot(rot(i))),
                    perm(&mir),
                    perm(&|i| rot(mir(i))),
                    perm(&|i| rot(rot(mir(i)))),
                ])
            }
        }
    }

    fn canonical(&self, own: [u64; 2]) -> [u64; 2] {
        match self {
            Symmetry::None => own,
            Symmetry::Rows(rows) => {
                let mut out = [0u64; 2];
                for &(off, width) in rows {
                    let mask = (1u64 << width) - 1;
                    let a = (own[0] >> off) & mask;
                    let b = (own[1] >> off) & mask;
                    let ca = a.count_ones();
                    let cb = b.count_ones();
                    out[0] |= ((1u64 << ca) - 1) << off;
                    out[1] |= (((1u64 << cb) - 1) << ca) << off;
                }
                out
            }
            Symmetry::Perms(perms) => perms
                .iter()
                .map(|p| [permute(own[0], p), permute(own[1], p)])
                .min()
                .unwrap(),
        }
    }
}

fn permute(x: u64, perm: &[u8]) -> u64 {
    let mut out = 0u64;
    let mut w = x;
    while w != 0 {
        let i = w.trailing_zeros() as usize;
        w &= w - 1;
        out |= 1u64 << perm[i];
    }
    out
}

/// A solver for one configuration. The transposition table is kept across
/// calls, so repeated hints on the same game are cheap.
pub struct Solver {
    rules: Arc<Rules>,
    cells: u32,
    full: u64,
    /// Winning masks per player, one list per direction.
    masks: [Vec<Vec<u64>>; 2],
    needed_directions: usize,
    symmetry: Symmetry,
    table: DashMap<Key, i8>,
    nodes: AtomicU64,
    budget: u64,
    reduce: bool,
}

impl std::fmt::Debug for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Solver")
            .field("config", &self.rules.config())
            .field("entries", &self.table.len())
            .field("nodes", &self.nodes_explored())
            .finish()
    }
}

impl Solver {
    pub fn new(config: GameConfig, budget: u64) -> Result<Self, SolveError> {
        let rules = Rules::for_config(config)?;
        let cells = rules.cell_count();
        if cells > 64 {
            return Err(SolveError::TooLarge { cells });
        }
        let masks_of = |p: Player| -> Vec<Vec<u64>> {
            rules
                .sets(p)
                .iter()
                .map(|s| s.masks().as_u64().unwrap().to_vec())
                .collect()
        };
        let masks = [masks_of(Player::One), masks_of(Player::Two)];
        Ok(Self {
            cells: cells as u32,
            full: if cells == 64 {
                u64::MAX
            } else {
                (1u64 << cells) - 1
            },
            needed_directions: if config.variant == Variant::Directional {
                2
            } else {
                1
            },
            symmetry: Symmetry::for_rules(&rules),
            rules,
            masks,
            table: DashMap::new(),
            nodes: AtomicU64::new(0),
            budget,
            reduce: true,
        })
    }

    /// Turns symmetry reduction off; used to cross-check the reduction.
    pub fn without_symmetry(mut self) -> Self {
        self.reduce = false;
        self
    }

    pub fn config(&self) -> GameConfig {
        self.rules.config()
    }

    pub fn nodes_explored(&self) -> u64 {
        self.nodes.load(Ordering::Relaxed)
    }

    pub fn table_len(&self) -> usize {
        self.table.len()
    }

    fn wins(&self, player: usize, set: u64) -> bool {
        self.masks[player]
            .iter()
            .filter(|dir| dir.iter().any(|&m| m & !set == 0))
            .take(self.needed_directions)
            .count()
            == self.needed_directions
    }

    fn key(&self, own: [u64; 2], to_move: usize, pass_streak: u8) -> Key {
        let own = if self.reduce {
            self.symmetry.canonical(own)
        } else {
            own
        };
        Key {
            own,
            to_move: to_move as u8,
            pass_streak,
        }
    }

    /// Value for the player to move of marking `cell` (or passing when
    /// `None`), from relative value of the resulting position.
    fn move_value(
        &self,
        own: [u64; 2],
        me: usize,
        streak: u8,
        mv: Option<u32>,
    ) -> Result<i8, SolveError> {
        match mv {
            Some(c) => {
                let mut next = own;
                next[me] |= 1u64 << c;
                if self.wins(me, next[me]) {
                    Ok(1)
                } else if next[0] | next[1] == self.full {
                    Ok(0)
                } else {
                    Ok(-self.negamax(next, 1 - me, 0)?)
                }
            }
            None if streak >= 1 => Ok(0),
            None => Ok(-self.negamax(own, 1 - me, 1)?),
        }
    }

    fn negamax(&self, own: [u64; 2], me: usize, streak: u8) -> Result<i8, SolveError> {
        let key = self.key(own, me, streak);
        if let Some(v) = self.table.get(&key) {
            return Ok(*v);
        }
        if self.nodes.fetch_add(1, Ordering::Relaxed) >= self.budget {
            return Err(SolveError::BudgetExceeded {
                budget: self.budget,
            });
        }
        let mut best = -1i8;
        let mut free = !(own[0] | own[1]) & self.full;
        while free != 0 && best < 1 {
            let c = free.trailing_zeros();
            free &= free - 1;
            best = best.max(self.move_value(own, me, streak, Some(c))?);
        }
        if best < 1 {
            best = best.max(self.move_value(own, me, streak, None)?);
        }
        self.table.insert(key, best);
        Ok(best)
    }

    fn split(&self, state: &GameState) -> Result<([u64; 2], usize, u8), SolveError> {
        if state.config() != self.config() {
            return Err(
                MinesError::InvalidConfig("state belongs to a different game".into()).into(),
            );
        }
        if state.status().is_over() {
            return Err(SolveError::GameOver);
        }
        let word = |p: Player| state.owned(p).words()[0];
        Ok((
            [word(Player::One), word(Player::Two)],
            state.to_move() as usize,
            state.pass_streak().min(1) as u8,
        ))
    }

    /// The outcome after each legal move, in move order (cells ascending,
    /// pass last). Root moves run in parallel with the `parallel` feature.
    pub fn move_outcomes(&self, state: &GameState) -> Result<Vec<(Move, Outcome)>, SolveError> {
        let (own, me, streak) = self.split(state)?;
        let mut moves: Vec<Option<u32>> = (0..self.cells)
            .filter(|&c| (own[0] | own[1]) >> c & 1 == 0)
            .map(Some)
            .collect();
        moves.push(None);
        let mover = state.to_move();
        let eval = |&mv: &Option<u32>| {
            let v = self.move_value(own, me, streak, mv)?;
            let m = mv.map_or(Move::Pass, |c| Move::Mark(c as usize));
            Ok((m, Outcome::from_relative(v, mover)))
        };
        #[cfg(feature = "parallel")]
        return moves.par_iter().map(eval).collect();
        #[cfg(not(feature = "parallel"))]
        return moves.iter().map(eval).collect();
    }

    /// Outcome after playing `mv` in `state`.
    pub fn outcome_after(&self, state: &GameState, mv: Move) -> Result<Outcome, SolveError> {
        let next = state.apply(mv)?;
        Ok(self.solve(&next)?.outcome)
    }

    pub fn solve(&self, state: &GameState) -> Result<GameValue, SolveError> {
        if state.config() != self.config() {
            return Err(
                MinesError::InvalidConfig("state belongs to a different game".into()).into(),
            );
        }
        match state.status() {
            Status::Won { player, .. } => {
                return Ok(GameValue {
                    outcome: match player {
                        Player::One => Outcome::FirstPlayerWin,
                        Player::Two => Outcome::SecondPlayerWin,
                    },
                    principal_move: None,
                })
            }
            Status::Draw { .. } => {
                return Ok(GameValue {
                    outcome: Outcome::DrawValue,
                    principal_move: None,
                })
            }
            Status::Ongoing => {}
        }
        let mover = state.to_move();
        let outcomes = self.move_outcomes(state)?;
        let best = outcomes
            .iter()
            .map(|(_, o)| o.relative_to(mover))
            .max()
            .unwrap();
        let principal = outcomes
            .iter()
            .find(|(_, o)| o.relative_to(mover) == best)
            .map(|(m, _)| *m);
        Ok(GameValue {
            outcome: Outcome::from_relative(best, mover),
            principal_move: principal,
        })
    }

    /// A move achieving the position's value; lowest cell first, pass last.
    pub fn best_move(&self, state: &GameState) -> Result<Move, SolveError> {
        if state.status().is_over() {
            return Err(SolveError::GameOver);
        }
        Ok(self
            .solve(state)?
            .principal_move
            .expect("ongoing games have moves"))
    }
}

pub fn solve(state: &GameState) -> Result<GameValue, SolveError> {
    Solver::new(state.config(), DEFAULT_NODE_BUDGET)?.solve(state)
}

pub fn best_move(state: &GameState) -> Result<Move, SolveError> {
    Solver::new(state.config(), DEFAULT_NODE_BUDGET)?.best_move(state)
}

const CORNERS: [u64; 3] = [1, 4, 6];
const TOP: [u64; 3] = [1, 2, 3];

/// Player one's explicit `Mines_3` strategy, returning a position id.
///
/// Directional: take corners until two are held, turn the board so they sit
/// at 4 and 6, then take whichever of the turned `{1, 2, 3}` is free.
/// Standard: the same plan with the bottom row `{4, 5, 6}` in place of the
/// corners (preferring 4, then 6), with no turning.
fn strategy_move(state: &GameState) -> Option<u64> {
    let mine = |id: u64| state.owner(id as usize - 1) == Some(Player::One);
    let free = |id: u64| state.owner(id as usize - 1).is_none();
    match state.config().variant {
        Variant::Directional => {
            let held: Vec<u64> = CORNERS.iter().copied().filter(|&c| mine(c)).collect();
            if held.len() < 2 {
                return CORNERS.iter().copied().find(|&c| free(c));
            }
            // turns t with rot^t(held) ⊇ {4, 6}
            let turned = |id: u64, t: u32| (0..t).fold(id, |x, _| rotate_id(x, 3));
            let t = (0..3)
                .find(|&t| {
                    let img: Vec<u64> = held.iter().map(|&c| turned(c, t)).collect();
                    img.contains(&4) && img.contains(&6)
                })
                .unwrap();
            // positions that land on {1, 2, 3} after t turns
            TOP.iter()
                .map(|&target| (1..=6).find(|&id| turned(id, t) == target).unwrap())
                .find(|&id| free(id))
        }
        Variant::Standard => {
            let held = [4u64, 6, 5].iter().filter(|&&c| mine(c)).count();
            if held < 2 {
                return [4u64, 6, 5].into_iter().find(|&c| free(c));
            }
            TOP.into_iter().find(|&id| free(id))
        }
    }
}

/// Plays player one's explicit strategy on `Mines_3` against every possible
/// sequence of replies (passes included) and checks that each game ends in
/// a win for player one.
pub fn strategy_never_loses(variant: Variant) -> bool {
    fn explore(state: GameState) -> bool {
        match state.status() {
            Status::Won {
                player, directions, ..
            } => {
                return *player == Player::One
                    && (state.config().variant == Variant::Standard || directions.len() >= 2)
            }
            Status::Draw { .. } => return false,
            Status::Ongoing => {}
        }
        match state.to_move() {
            Player::One => {
                let Some(id) = strategy_move(&state) else {
                    return false;
                };
                match state.apply(Move::Mark(id as usize - 1)) {
                    Ok(next) => explore(next),
                    Err(_) => false,
                }
            }
            Player::Two => state
                .legal_moves()
                .unwrap()
                .into_iter()
                .all(|mv| explore(state.apply(mv).unwrap())),
        }
    }
    match GameState::new(GameConfig::mines3(variant)) {
        Ok(s) => explore(s),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::compute_r1;

    fn fresh(config: GameConfig) -> GameState {
        GameState::new(config).unwrap()
    }

    // Oracle: plain minimax over GameState with no table or symmetry.
    fn brute(state: &GameState) -> Outcome {
        match state.status() {
            Status::Won {
                player: Player::One,
                ..
            } => return Outcome::FirstPlayerWin,
            Status::Won { .. } => return Outcome::SecondPlayerWin,
            Status::Draw { .. } => return Outcome::DrawValue,
            Status::Ongoing => {}
        }
        let me = state.to_move();
        state
            .legal_moves()
            .unwrap()
            .into_iter()
            .map(|m| brute(&state.apply(m).unwrap()))
            .max_by_key(|o| o.relative_to(me))
            .unwrap()
    }

    #[test]
    fn mines3_values() {
        for v in [Variant::Standard, Variant::Directional] {
            let s = fresh(GameConfig::mines3(v));
            assert_eq!(solve(&s).unwrap().outcome, Outcome::FirstPlayerWin);
            assert_eq!(brute(&s), Outcome::FirstPlayerWin);
        }
        assert_eq!(
            solve(&fresh(GameConfig::new(2, 2, 2, 1))).unwrap().outcome,
            Outcome::DrawValue
        );
        assert_eq!(
            brute(&fresh(GameConfig::new(2, 2, 2, 1))),
            Outcome::DrawValue
        );
    }

    #[test]
    fn best_move_examples() {
        let s = fresh(GameConfig::mines3(Variant::Directional));
        assert_eq!(best_move(&s).unwrap(), Move::Mark(0));

        // P1 holds 1 and 4; P2 holds 2 and 3; marking 6 wins outright
        let s = GameState::replay(
            GameConfig::mines3(Variant::Standard),
            &[Move::Mark(0), Move::Mark(1), Move::Mark(3), Move::Mark(2)],
        )
        .unwrap();
        assert_eq!(best_move(&s).unwrap(), Move::Mark(4));
        let after = s.apply(Move::Mark(4)).unwrap();
        assert!(matches!(
            after.status(),
            Status::Won {
                player: Player::One,
                ..
            }
        ));

        let over = GameState::replay(GameConfig::new(1, 1, 1, 1), &[Move::Mark(0)]).unwrap();
        assert_eq!(best_move(&over), Err(SolveError::GameOver));
    }

    #[test]
    fn winning_first_moves_on_standard_board() {
        let s = fresh(GameConfig::mines3(Variant::Standard));
        let solver = Solver::new(s.config(), 1 << 20).unwrap();
        let winners: Vec<Move> = solver
            .move_outcomes(&s)
            .unwrap()
            .into_iter()
            .filter(|(_, o)| *o == Outcome::FirstPlayerWin)
            .map(|(m, _)| m)
            .collect();
        assert_eq!(winners, vec![Move::Mark(3), Move::Mark(4), Move::Mark(5)]);
    }

    #[test]
    fn symmetry_reduction_is_sound() {
        let configs = [
            GameConfig::mines3(Variant::Standard),
            GameConfig::mines3(Variant::Directional),
            GameConfig::new(4, 2, 2, 1),
            GameConfig::new(4, 2, 3, 1),
            GameConfig::new(4, 3, 3, 1),
            GameConfig::directional(4, 2, 2),
            GameConfig::directional(4, 3, 2),
        ];
        for config in configs {
            let s = fresh(config);
            let a = Solver::new(config, u64::MAX).unwrap();
            let b = Solver::new(config, u64::MAX).unwrap().without_symmetry();
            assert_eq!(
                a.move_outcomes(&s).unwrap(),
                b.move_outcomes(&s).unwrap(),
                "{config} {:?}",
                config.variant
            );
            assert!(a.table_len() <= b.table_len());
        }
    }

    #[test]
    fn matches_brute_force_on_tiny_boards() {
        for (m, p, q) in [
            (2u64, 1u64, 2u64),
            (2, 2, 1),
            (3, 2, 3),
            (3, 3, 2),
            (3, 1, 3),
            (3, 3, 3),
        ] {
            let s = fresh(GameConfig::new(m, p, q, 1));
            assert_eq!(solve(&s).unwrap().outcome, brute(&s), "m={m} p={p} q={q}");
        }
        let s = fresh(GameConfig::new(3, 2, 2, 2));
        assert_eq!(solve(&s).unwrap().outcome, brute(&s));
    }

    #[test]
    fn diagonal_games_never_favour_player_two() {
        for m in 1..=4u64 {
            for n in 1..=m {
                for variant in [Variant::Standard, Variant::Directional] {
                    let config = GameConfig {
                        variant,
                        ..GameConfig::new(m, n, n, 1)
                    };
                    let o = solve(&fresh(config)).unwrap().outcome;
                    assert_ne!(o, Outcome::SecondPlayerWin, "{config} {variant:?}");
                    let r1 = compute_r1(n, n, 1, m, 1 << 20).unwrap().exact();
                    if variant == Variant::Standard && r1.is_some_and(|r| m >= r) {
                        assert_eq!(o, Outcome::FirstPlayerWin, "{config}");
                    }
                }
            }
        }
    }

    #[test]
    fn colour_swap_flips_the_value() {
        // Swapping who owns what and who moves, on a symmetric game, mirrors
        // the outcome.
        let config = GameConfig::new(4, 2, 2, 1);
        let solver = Solver::new(config, u64::MAX).unwrap();
        let s = GameState::replay(config, &[Move::Mark(0), Move::Mark(6), Move::Mark(9)]).unwrap();
        let own = [
            s.owned(Player::One).words()[0],
            s.owned(Player::Two).words()[0],
        ];
        let a = solver.negamax(own, 1, 0).unwrap();
        let b = solver.negamax([own[1], own[0]], 0, 0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn best_move_is_consistent_with_value() {
        let config = GameConfig::new(4, 2, 2, 1);
        let solver = Solver::new(config, u64::MAX).unwrap();
        let mut s = fresh(config);
        while !s.status().is_over() {
            let v = solver.solve(&s).unwrap();
            let mv = solver.best_move(&s).unwrap();
            s = s.apply(mv).unwrap();
            assert_eq!(solver.solve(&s).unwrap().outcome, v.outcome);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let s = fresh(GameConfig::new(4, 3, 3, 1));
        let solver = Solver::new(s.config(), 10).unwrap();
        assert_eq!(
            solver.solve(&s),
            Err(SolveError::BudgetExceeded { budget: 10 })
        );
        let big = GameConfig::new(11, 3, 3, 1);
        assert!(matches!(
            Solver::new(big, 10),
            Err(SolveError::TooLarge { cells: 66 })
        ));
    }

    #[test]
    fn explicit_strategies_win() {
        assert!(strategy_never_loses(Variant::Directional));
        assert!(strategy_never_loses(Variant::Standard));
    }
}
