//! Browser bindings: play small Mines boards against the solver, evaluate
//! brackets and look up bounds on triangular Ramsey numbers.
//!
//! Every function returns a JSON string (or an error message) so the page
//! needs no generated glue beyond what `wasm-bindgen` emits.

use serde_json::json;
use triramsey::bounds::{self, ClassicalRamseyTable, ProbOptions};
use triramsey::solver::Solver;
use triramsey::{GameConfig, GameState, Move, Variant};
use wasm_bindgen::prelude::wasm_bindgen;

/// Node budget for each solver call; enough for every board up to `m = 4`.
pub const NODE_BUDGET: u64 = 20_000_000;
/// Largest board the demo will set up.
pub const MAX_SIDE: u32 = 4;
/// The lower-bound sweep in the page stops here.
pub const SWEEP_LIMIT: u64 = 5_000_000;

fn parse_move(cell: i32) -> Move {
    if cell < 0 {
        Move::Pass
    } else {
        Move::Mark(cell as usize)
    }
}

/// A game of Mines (`k = 1`) with the solver as an opponent and adviser.
#[wasm_bindgen]
pub struct Game {
    solver: Solver,
    state: GameState,
}

#[wasm_bindgen]
impl Game {
    #[wasm_bindgen(constructor)]
    pub fn new(m: u32, p: u32, q: u32, directional: bool) -> Result<Game, String> {
        if !(1..=MAX_SIDE).contains(&m) {
            return Err(format!("the demo supports sides 1 to {MAX_SIDE}"));
        }
        let mut config = GameConfig::new(m.into(), p.into(), q.into(), 1);
        if directional {
            config.variant = Variant::Directional;
        }
        let state = GameState::new(config).map_err(|e| e.to_string())?;
        let solver = Solver::new(config, NODE_BUDGET).map_err(|e| e.to_string())?;
        Ok(Game { solver, state })
    }

    /// The position as JSON: config, owners by cell, history and status.
    pub fn state(&self) -> String {
        serde_json::to_string(&self.state).expect("state serialises")
    }

    /// Plays a cell index, or a pass when `cell` is negative.
    pub fn play(&mut self, cell: i32) -> Result<String, String> {
        self.state = self
            .state
            .apply(parse_move(cell))
            .map_err(|e| e.to_string())?;
        Ok(self.state())
    }

    /// Lets the solver play its best move.
    pub fn engine_move(&mut self) -> Result<String, String> {
        let mv = self
            .solver
            .best_move(&self.state)
            .map_err(|e| e.to_string())?;
        self.state = self.state.apply(mv).map_err(|e| e.to_string())?;
        Ok(self.state())
    }

    /// The value of the position and a move that achieves it.
    pub fn hint(&self) -> Result<String, String> {
        let v = self.solver.solve(&self.state).map_err(|e| e.to_string())?;
        Ok(json!({"move": v.principal_move, "outcome": v.outcome}).to_string())
    }

    /// The value after each legal move, cells in order and then a pass.
    pub fn whatif(&self) -> Result<String, String> {
        let list = self
            .solver
            .move_outcomes(&self.state)
            .map_err(|e| e.to_string())?;
        let list: Vec<_> = list
            .into_iter()
            .map(|(mv, outcome)| json!({"move": mv, "resultingOutcome": outcome}))
            .collect();
        Ok(serde_json::Value::from(list).to_string())
    }

    pub fn undo(&mut self) -> Result<String, String> {
        let moves: Vec<Move> = self.state.history().iter().map(|&(_, mv)| mv).collect();
        let keep = moves.len().saturating_sub(1);
        self.state =
            GameState::replay(self.state.config(), &moves[..keep]).map_err(|e| e.to_string())?;
        Ok(self.state())
    }
}

/// `[n k]` as a decimal string.
#[wasm_bindgen]
pub fn bracket(n: u32, k: u32) -> Result<String, String> {
    if n > 2000 {
        return Err("n is limited to 2000 here".into());
    }
    triramsey::bracket(n.into(), k.into())
        .map(|v| v.to_string())
        .map_err(|e| e.to_string())
}

/// Bounds on `R1(p, q, k)` as a JSON table row.
#[wasm_bindgen]
pub fn bounds(p: u32, q: u32, k: u32) -> Result<String, String> {
    let (p, q, k) = (u64::from(p), u64::from(q), u64::from(k));
    let (lo, hi) = (p.min(q), p.max(q));
    if k == 0 || k > lo {
        return Err(format!("need 1 <= k <= p, q (p={p} q={q} k={k})"));
    }
    if k == 1 && lo + hi > 7 {
        return Err("k = 1 is searched exhaustively here, so p + q is limited to 7".into());
    }
    if k == lo && hi > 5 {
        return Err("p = k is searched exhaustively here, so q is limited to 5".into());
    }
    let opts = ProbOptions {
        m_limit: SWEEP_LIMIT,
        ..Default::default()
    };
    let row = bounds::table_row_with(p, q, k, &ClassicalRamseyTable::standard(), opts)
        .map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&row).expect("row serialises"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn value(s: &str) -> serde_json::Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn engine_wins_mines3_from_the_start() {
        for directional in [false, true] {
            let mut g = Game::new(3, 2, 2, directional).unwrap();
            assert_eq!(value(&g.hint().unwrap())["outcome"], "FirstPlayerWin");
            // engine as P1, P2 always takes the lowest free cell
            loop {
                let s = value(&g.engine_move().unwrap());
                if s["status"]["state"] != "ongoing" {
                    assert_eq!(s["status"]["player"], "P1");
                    break;
                }
                let free = s["owner"]
                    .as_array()
                    .unwrap()
                    .iter()
                    .position(|o| o.is_null())
                    .unwrap();
                let s = value(&g.play(free as i32).unwrap());
                assert_eq!(s["status"]["state"], "ongoing");
            }
        }
    }

    #[test]
    fn whatif_lists_every_legal_move() {
        let g = Game::new(3, 2, 2, false).unwrap();
        let list = value(&g.whatif().unwrap());
        let list = list.as_array().unwrap();
        assert_eq!(list.len(), 7);
        assert_eq!(list[6]["move"], "pass");
        let winning: Vec<_> = list
            .iter()
            .filter(|e| e["resultingOutcome"] == "FirstPlayerWin")
            .map(|e| e["move"]["mark"].as_u64().unwrap())
            .collect();
        assert_eq!(winning, [3, 4, 5]);
    }

    #[test]
    fn illegal_moves_and_undo() {
        let mut g = Game::new(3, 2, 2, false).unwrap();
        g.play(0).unwrap();
        assert!(g.play(0).is_err());
        assert!(g.play(6).is_err());
        let s = value(&g.undo().unwrap());
        assert_eq!(s["turn"], 0);
        assert!(Game::new(5, 2, 2, false).is_err());
        assert!(Game::new(3, 4, 2, false).is_err());
    }

    #[test]
    fn bracket_and_bounds() {
        assert_eq!(bracket(4, 3).unwrap(), "41");
        assert_eq!(bracket(3, 2).unwrap(), "10");
        assert!(bracket(5000, 2).is_err());
        let row = value(&bounds(3, 3, 2).unwrap());
        assert_eq!(row["lower"], 6);
        assert_eq!(row["upperExpr"], "R^{15}(3,2)");
        assert_eq!(value(&bounds(3, 3, 1).unwrap())["exact"], 5);
        assert!(bounds(4, 4, 1).is_err());
        assert!(bounds(2, 2, 3).is_err());
    }
}
