//! Draw colourings and triangular Ramsey numbers.
//!
//! A colouring hands every cell of the board to one of the two players. It
//! is a draw for `(p, q, k)` when player one owns no complete `p`-level
//! triangle and player two no complete `q`-level one. `R1(p, q, k)` is the
//! least board size `m` without draw colourings.
//!
//! Colourings are bit vectors over the cell index (bit set = player two).
//! Exhaustive sweeps walk the integers `0 .. 2^cells` in order, so the first
//! draw found is the numerically smallest one.

use std::sync::Arc;
use std::time::Duration;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{CellSet, MaskTable};
use crate::board::Board;
use crate::mines::{GameConfig, MinesError, Player, Rules};
use crate::tri::triangular_number;

/// Largest board an exhaustive sweep will take on, in cells.
pub const MAX_EXHAUSTIVE_CELLS: usize = 40;
const CHUNK_BITS: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SearchError {
    #[error("the budget must be positive")]
    BudgetInvalid,
    #[error("{cells} cells is too many to enumerate")]
    SpaceTooLarge { cells: usize },
    #[error(transparent)]
    Config(#[from] MinesError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Exhaustive,
    Backtracking,
    Randomized,
}

/// A total assignment of cells to players.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coloring {
    cells: usize,
    p2: CellSet,
}

impl Coloring {
    pub fn all(cells: usize, player: Player) -> Self {
        let none = CellSet::new(cells);
        let p2 = match player {
            Player::One => none,
            Player::Two => none.complement(cells),
        };
        Self { cells, p2 }
    }

    pub fn from_fn(cells: usize, f: impl Fn(usize) -> Player) -> Self {
        Self {
            cells,
            p2: CellSet::from_indices(cells, (0..cells).filter(|&c| f(c) == Player::Two)),
        }
    }

    /// From the player-two bit set.
    pub fn from_player_two(cells: usize, p2: CellSet) -> Self {
        Self { cells, p2 }
    }

    fn from_bits(cells: usize, bits: u64) -> Self {
        Self {
            cells,
            p2: CellSet::from_words(vec![bits]),
        }
    }

    pub fn cell_count(&self) -> usize {
        self.cells
    }

    pub fn owner(&self, cell: usize) -> Player {
        if self.p2.contains(cell) {
            Player::Two
        } else {
            Player::One
        }
    }

    pub fn owned(&self, player: Player) -> CellSet {
        match player {
            Player::One => self.p2.complement(self.cells),
            Player::Two => self.p2.clone(),
        }
    }

    pub fn swap_colors(&self) -> Coloring {
        Coloring {
            cells: self.cells,
            p2: self.p2.complement(self.cells),
        }
    }

    /// Lowercase hex of the player-two bit vector, most significant first.
    pub fn to_hex(&self) -> String {
        self.p2.to_hex(self.cells)
    }

    pub fn from_hex(s: &str, cells: usize) -> Option<Coloring> {
        CellSet::from_hex(s, cells).map(|p2| Coloring { cells, p2 })
    }

    /// The colouring seen on a smaller board made of the top rows of `big`.
    pub fn restrict(&self, big: &Board, small: &Board) -> Coloring {
        assert_eq!(big.k(), small.k());
        assert!(small.m() <= big.m());
        assert_eq!(self.cells, big.cell_count());
        Coloring::from_fn(small.cell_count(), |c| {
            let outer = big
                .cell_of(small.cell(c).elements())
                .expect("top rows are shared");
            self.owner(outer)
        })
    }
}

impl Serialize for Coloring {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            cells: usize,
            coloring: &'a str,
        }
        Wire {
            cells: self.cells,
            coloring: &self.to_hex(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Coloring {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            cells: usize,
            coloring: String,
        }
        let w = Wire::deserialize(d)?;
        Coloring::from_hex(&w.coloring, w.cells)
            .ok_or_else(|| serde::de::Error::custom("malformed coloring bitstring"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "camelCase")]
pub enum SearchResult {
    DrawFound { witness: Coloring },
    NoDrawExists,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchOutcome {
    #[serde(flatten)]
    pub result: SearchResult,
    pub nodes_explored: u64,
    pub elapsed: Duration,
}

impl SearchOutcome {
    pub fn witness(&self) -> Option<&Coloring> {
        match &self.result {
            SearchResult::DrawFound { witness } => Some(witness),
            _ => None,
        }
    }
}

/// Row counts for `k = 1` boards, where a `p`-level triangle of one colour
/// exists iff there are rows `r_1 < ... < r_p` holding at least `1, ..., p`
/// cells of that colour.
#[derive(Debug, Clone)]
struct RowProfile {
    rows: Vec<(u32, u64)>,
}

impl RowProfile {
    fn new(m: u64) -> Self {
        let rows = (1..=m)
            .map(|r| {
                let off = triangular_number(r - 1) as u32;
                (off, (1u64 << r) - 1)
            })
            .collect();
        Self { rows }
    }

    /// Does colour two (`bits`) or colour one (the rest) hold a triangle.
    #[inline]
    fn triangles(&self, bits: u64, p1_levels: u64, p2_levels: u64) -> (bool, bool) {
        let (mut need1, mut need2) = (1u64, 1u64);
        for (r, &(off, mask)) in self.rows.iter().enumerate() {
            let width = r as u64 + 1;
            let two = ((bits >> off) & mask).count_ones() as u64;
            if width - two >= need1 {
                need1 += 1;
            }
            if two >= need2 {
                need2 += 1;
            }
        }
        (need1 > p1_levels, need2 > p2_levels)
    }
}

/// Compiled check for one `(m, p, q, k)`.
struct DrawProblem {
    rules: Arc<Rules>,
    rows: Option<RowProfile>,
}

impl DrawProblem {
    fn new(config: GameConfig) -> Result<Self, SearchError> {
        let config = GameConfig {
            variant: Default::default(),
            ..config
        };
        let rules = Rules::for_config(config)?;
        let rows = (config.k == 1 && rules.cell_count() <= 64).then(|| RowProfile::new(config.m));
        Ok(Self { rules, rows })
    }

    fn cells(&self) -> usize {
        self.rules.cell_count()
    }

    fn config(&self) -> GameConfig {
        self.rules.config()
    }

    fn masks(&self, player: Player) -> &MaskTable {
        self.rules.sets(player)[0].masks()
    }

    fn wins(&self, c: &Coloring) -> (bool, bool) {
        (
            self.masks(Player::One).any_inside(&c.owned(Player::One)),
            self.masks(Player::Two).any_inside(&c.owned(Player::Two)),
        )
    }

    /// Both outcomes for a colouring packed in one word.
    #[inline]
    fn wins_bits(&self, bits: u64) -> (bool, bool) {
        let cfg = self.config();
        if let Some(rows) = &self.rows {
            return rows.triangles(bits, cfg.p, cfg.q);
        }
        let full = if self.cells() == 64 {
            u64::MAX
        } else {
            (1u64 << self.cells()) - 1
        };
        let one = !bits & full;
        let inside = |t: &MaskTable, set: u64| t.as_u64().unwrap().iter().any(|&m| m & !set == 0);
        (
            inside(self.masks(Player::One), one),
            inside(self.masks(Player::Two), bits),
        )
    }
}

/// Finds the first `x` in `0..limit` with `pred(x)`, walking chunks in
/// parallel but reporting the smallest hit.
fn sweep(limit: u64, pred: impl Fn(u64) -> bool + Sync) -> Option<u64> {
    let chunk = 1u64 << CHUNK_BITS;
    let chunks = limit.div_ceil(chunk);
    let scan = |ch: u64| {
        let lo = ch * chunk;
        let hi = (lo + chunk).min(limit);
        (lo..hi).find(|&x| pred(x))
    };
    #[cfg(feature = "parallel")]
    return (0..chunks).into_par_iter().find_map_first(scan);
    #[cfg(not(feature = "parallel"))]
    return (0..chunks).find_map(scan);
}

/// No `p`-level triangle in player one's cells and no `q`-level triangle in
/// player two's.
pub fn is_draw_coloring(c: &Coloring, config: GameConfig) -> Result<bool, SearchError> {
    let problem = DrawProblem::new(config)?;
    if c.cell_count() != problem.cells() {
        return Err(MinesError::InvalidConfig(format!(
            "coloring has {} cells, board has {}",
            c.cell_count(),
            problem.cells()
        ))
        .into());
    }
    Ok(problem.wins(c) == (false, false))
}

/// Wall-clock timer; reads zero on `wasm32`, which has no clock in `std`.
pub(crate) struct Stopwatch(#[cfg(not(target_arch = "wasm32"))] std::time::Instant);

impl Stopwatch {
    pub(crate) fn start() -> Self {
        Stopwatch(
            #[cfg(not(target_arch = "wasm32"))]
            std::time::Instant::now(),
        )
    }

    pub(crate) fn elapsed(&self) -> Duration {
        #[cfg(not(target_arch = "wasm32"))]
        return self.0.elapsed();
        #[cfg(target_arch = "wasm32")]
        Duration::ZERO
    }
}

pub fn find_draw(
    config: GameConfig,
    strategy: Strategy,
    budget: u64,
) -> Result<SearchOutcome, SearchError> {
    find_draw_seeded(config, strategy, budget, 0)
}

pub fn find_draw_seeded(
    config: GameConfig,
    strategy: Strategy,
    budget: u64,
    seed: u64,
) -> Result<SearchOutcome, SearchError> {
    if budget == 0 {
        return Err(SearchError::BudgetInvalid);
    }
    let problem = DrawProblem::new(config)?;
    let start = Stopwatch::start();
    let (result, nodes) = match strategy {
        Strategy::Exhaustive => exhaustive(&problem, budget),
        Strategy::Backtracking => Backtracker::new(&problem, budget).run(),
        Strategy::Randomized => randomized(&problem, budget, seed),
    };
    if let SearchResult::DrawFound { witness } = &result {
        debug_assert_eq!(problem.wins(witness), (false, false));
    }
    Ok(SearchOutcome {
        result,
        nodes_explored: nodes,
        elapsed: start.elapsed(),
    })
}

fn exhaustive(problem: &DrawProblem, budget: u64) -> (SearchResult, u64) {
    let cells = problem.cells();
    if cells > MAX_EXHAUSTIVE_CELLS {
        return (SearchResult::Inconclusive, 0);
    }
    let total = 1u64 << cells;
    let limit = total.min(budget);
    match sweep(limit, |x| problem.wins_bits(x) == (false, false)) {
        Some(x) => (
            SearchResult::DrawFound {
                witness: Coloring::from_bits(cells, x),
            },
            x + 1,
        ),
        None if limit == total => (SearchResult::NoDrawExists, total),
        None => (SearchResult::Inconclusive, limit),
    }
}

fn randomized(problem: &DrawProblem, budget: u64, seed: u64) -> (SearchResult, u64) {
    let cells = problem.cells();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words = crate::bits::words_for(cells);
    for trial in 0..budget {
        let raw: Vec<u64> = (0..words).map(|_| rng.next_u64()).collect();
        // keep only real cells
        let p2 = CellSet::from_words(raw).complement(cells).complement(cells);
        let c = Coloring::from_player_two(cells, p2);
        if problem.wins(&c) == (false, false) {
            return (SearchResult::DrawFound { witness: c }, trial + 1);
        }
    }
    (SearchResult::Inconclusive, budget)
}

/// Depth-first assignment, busiest cells first, cutting a branch as soon as
/// some winning set is complete in its owner's colour. Each cell first gets
/// the colour that adds less to the expected number of monochromatic
/// winning sets under a uniform colouring of the unassigned cells, so a
/// board where that expectation starts below one is coloured without
/// backtracking.
struct Backtracker<'a> {
    problem: &'a DrawProblem,
    order: Vec<usize>,
    by_cell: [Vec<Vec<u32>>; 2],
    size: [Vec<u32>; 2],
    /// Cells of each set held by its owner.
    filled: [Vec<u32>; 2],
    /// Cells of each set held by the opponent.
    blocked: [Vec<u32>; 2],
    assigned: [CellSet; 2],
    nodes: u64,
    budget: u64,
}

impl<'a> Backtracker<'a> {
    fn new(problem: &'a DrawProblem, budget: u64) -> Self {
        let cells = problem.cells();
        let mut by_cell = [vec![Vec::new(); cells], vec![Vec::new(); cells]];
        let mut size = [Vec::new(), Vec::new()];
        for (pi, player) in [Player::One, Player::Two].into_iter().enumerate() {
            for (i, mask) in problem.masks(player).iter().enumerate() {
                let set = CellSet::from_words(mask.to_vec());
                size[pi].push(set.len() as u32);
                for c in set.iter() {
                    by_cell[pi][c].push(i as u32);
                }
            }
        }
        let mut order: Vec<usize> = (0..cells).collect();
        order.sort_by_key(|&c| {
            (
                std::cmp::Reverse(by_cell[0][c].len() + by_cell[1][c].len()),
                c,
            )
        });
        let filled = [vec![0; size[0].len()], vec![0; size[1].len()]];
        let blocked = filled.clone();
        Self {
            problem,
            order,
            by_cell,
            size,
            filled,
            blocked,
            assigned: [CellSet::new(cells), CellSet::new(cells)],
            nodes: 0,
            budget,
        }
    }

    fn run(mut self) -> (SearchResult, u64) {
        let r = match self.dfs(0) {
            Some(true) => SearchResult::DrawFound {
                witness: Coloring::from_player_two(self.problem.cells(), self.assigned[1].clone()),
            },
            Some(false) => SearchResult::NoDrawExists,
            None => SearchResult::Inconclusive,
        };
        (r, self.nodes)
    }

    /// Expected number of `pi`'s sets through `cell` that end up complete.
    fn threat(&self, pi: usize, cell: usize) -> f64 {
        self.by_cell[pi][cell]
            .iter()
            .filter(|&&i| self.blocked[pi][i as usize] == 0)
            .map(|&i| {
                let i = i as usize;
                (-f64::from(self.size[pi][i] - self.filled[pi][i])).exp2()
            })
            .sum()
    }

    /// Colours `cell` for `pi`; true when that completes one of `pi`'s sets.
    fn assign(&mut self, pi: usize, cell: usize) -> bool {
        self.assigned[pi].insert(cell);
        let mut complete = false;
        for &i in &self.by_cell[pi][cell] {
            let i = i as usize;
            self.filled[pi][i] += 1;
            complete |= self.filled[pi][i] == self.size[pi][i];
        }
        for &i in &self.by_cell[1 - pi][cell] {
            self.blocked[1 - pi][i as usize] += 1;
        }
        complete
    }

    fn unassign(&mut self, pi: usize, cell: usize) {
        self.assigned[pi].remove(cell);
        for &i in &self.by_cell[pi][cell] {
            self.filled[pi][i as usize] -= 1;
        }
        for &i in &self.by_cell[1 - pi][cell] {
            self.blocked[1 - pi][i as usize] -= 1;
        }
    }

    // Some(true): draw found (assignment left in place); Some(false): subtree
    // exhausted; None: budget spent.
    fn dfs(&mut self, depth: usize) -> Option<bool> {
        if depth == self.order.len() {
            return Some(true);
        }
        let cell = self.order[depth];
        let first = if self.threat(1, cell) < self.threat(0, cell) {
            1
        } else {
            0
        };
        for pi in [first, 1 - first] {
            self.nodes += 1;
            if self.nodes > self.budget {
                return None;
            }
            let complete = self.assign(pi, cell);
            if !complete && self.dfs(depth + 1)? {
                return Some(true);
            }
            self.unassign(pi, cell);
        }
        Some(false)
    }
}

/// True when no colouring of the board gives both players a winning set.
/// Walks every colouring.
pub fn verify_no_double_win(m: u64, p: u64, q: u64, k: u64) -> Result<bool, SearchError> {
    let problem = DrawProblem::new(GameConfig::new(m, p, q, k))?;
    let cells = problem.cells();
    if cells > MAX_EXHAUSTIVE_CELLS {
        return Err(SearchError::SpaceTooLarge { cells });
    }
    Ok(sweep(1u64 << cells, |x| problem.wins_bits(x) == (true, true)).is_none())
}

/// Independent check of the same property: a double win exists iff some
/// player-one set and some player-two set share no cell.
pub fn disjoint_winning_pair(config: GameConfig) -> Result<Option<(usize, usize)>, SearchError> {
    let problem = DrawProblem::new(config)?;
    let a = problem.masks(Player::One);
    let b = problem.masks(Player::Two);
    for i in 0..a.len() {
        for j in 0..b.len() {
            if a.get(i).iter().zip(b.get(j)).all(|(x, y)| x & y == 0) {
                return Ok(Some((i, j)));
            }
        }
    }
    Ok(None)
}

/// How many players hold a winning set under the colouring.
pub fn winners(c: &Coloring, config: GameConfig) -> Result<(bool, bool), SearchError> {
    Ok(DrawProblem::new(config)?.wins(c))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "value", rename_all = "camelCase")]
pub enum R1Value {
    /// `R1` equals this value.
    Exact(u64),
    /// `R1` is at least this value.
    LowerBound(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct R1Step {
    pub m: u64,
    pub strategy: Strategy,
    pub outcome: SearchOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct R1Report {
    pub p: u64,
    pub q: u64,
    pub k: u64,
    pub value: R1Value,
    pub steps: Vec<R1Step>,
}

impl R1Report {
    pub fn exact(&self) -> Option<u64> {
        match self.value {
            R1Value::Exact(v) => Some(v),
            R1Value::LowerBound(_) => None,
        }
    }

    /// The largest board on which a draw was exhibited, with its colouring.
    pub fn best_witness(&self) -> Option<(u64, &Coloring)> {
        self.steps
            .iter()
            .rev()
            .find_map(|s| s.outcome.witness().map(|w| (s.m, w)))
    }
}

/// Scans `m = max(p, q), max(p, q) + 1, ...` for the first board without a
/// draw. A draw on `m` restricts to a draw on `m - 1`, so the scan can stop
/// at the first board where none exists. Each board gets an exhaustive sweep
/// when `2^cells <= budget`, otherwise a short randomised probe followed by
/// backtracking limited by `budget`. Gives up with a lower bound when
/// `m_max` is passed or a board is inconclusive.
pub fn compute_r1(
    p: u64,
    q: u64,
    k: u64,
    m_max: u64,
    budget: u64,
) -> Result<R1Report, SearchError> {
    if budget == 0 {
        return Err(SearchError::BudgetInvalid);
    }
    if k == 0 || k > p || k > q {
        return Err(
            MinesError::InvalidConfig(format!("need 1 <= k <= p, q (p={p} q={q} k={k})")).into(),
        );
    }
    let mut steps = Vec::new();
    let mut m = p.max(q);
    let value = loop {
        if m > m_max {
            break R1Value::LowerBound(m);
        }
        let config = GameConfig::new(m, p, q, k);
        config.validate()?;
        let cells = crate::tri::bracket_u64(m, k).unwrap_or(u64::MAX);
        let plan: Vec<(Strategy, u64)> =
            if cells <= MAX_EXHAUSTIVE_CELLS as u64 && (1u64 << cells) <= budget {
                vec![(Strategy::Exhaustive, budget)]
            } else {
                vec![
                    (Strategy::Randomized, budget.min(RANDOM_PROBE_TRIALS)),
                    (Strategy::Backtracking, budget),
                ]
            };
        let mut last = None;
        for (strategy, budget) in plan {
            let outcome = find_draw(config, strategy, budget)?;
            let settled = !matches!(outcome.result, SearchResult::Inconclusive);
            steps.push(R1Step {
                m,
                strategy,
                outcome,
            });
            if settled {
                last = Some(steps.last().unwrap().outcome.result.clone());
                break;
            }
        }
        match last {
            Some(SearchResult::DrawFound { .. }) => m += 1,
            Some(SearchResult::NoDrawExists) => break R1Value::Exact(m),
            _ => break R1Value::LowerBound(m),
        }
    };
    Ok(R1Report {
        p,
        q,
        k,
        value,
        steps,
    })
}

pub const DEFAULT_BUDGET: u64 = 1 << 30;
/// Random colourings tried on each board before backtracking.
pub const RANDOM_PROBE_TRIALS: u64 = 1 << 16;
