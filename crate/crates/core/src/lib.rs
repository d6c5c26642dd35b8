//! Triangular sets, the game of Mines, and triangular Ramsey numbers.
//!
//! The crate is organised bottom-up:
//!
//! * [`tri`] counts and enumerates triangular sets and evaluates the bracket
//!   coefficient `[n k]` (the number of `k`-level sub-triangles of an
//!   `n`-level triangle).
//! * [`bits`] and [`board`] turn a board into cell indices and bit masks.
//! * [`mines`] implements the rules of `Mines_m(p, q, k)`.
//! * [`search`] looks for draw colourings and computes triangular Ramsey
//!   numbers for small parameters.
//! * [`solver`] solves small positions exactly.
//! * [`bounds`] evaluates the probabilistic lower bounds and the symbolic
//!   upper bounds.
//! * [`cache`] persists brackets, Ramsey results and solved games as JSON.
//! * [`verify`] bundles the exhaustive checks into one report.

pub mod bits;
pub mod board;
pub mod bounds;
pub mod cache;
pub mod mines;
pub mod search;
pub mod solver;
pub mod tri;
pub mod verify;

pub use board::{mirror_position, rotate_position, Position};
pub use mines::{
    apply_move, directional_wins, legal_moves, new_game, winning_witness, Direction, GameConfig,
    GameState, MinesError, Move, Player, Status, Variant,
};
pub use search::{compute_r1, find_draw, is_draw_coloring, verify_no_double_win, Coloring};
pub use solver::{best_move, solve, strategy_never_loses, GameValue, Outcome};
pub use tri::{
    bracket, bracket_log2, bracket_sum, enumerate_subtriangles, leq, parse_triangular_set,
    triangular_number, BracketTable, TriError, TriangularSet,
};
