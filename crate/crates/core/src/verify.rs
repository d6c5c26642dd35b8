//! The exhaustive checks behind `triramsey verify`, as one report.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::bounds::{asymptotic_lower_bound, m_sequence_expr, prob_lower_bound, upper_bound_expr};
use crate::mines::{GameConfig, GameState, Variant};
use crate::search::{
    compute_r1, disjoint_winning_pair, verify_no_double_win, winners, Coloring, DEFAULT_BUDGET,
};
use crate::solver::{solve, strategy_never_loses, Outcome};
use crate::tri::{bracket, bracket_sum, enumerate_subtriangles, TriangularSet};

/// Lower bounds listed in the reference summary table.
pub const REFERENCE_LOWER_BOUNDS: [((u64, u64, u64), u64); 6] = [
    ((3, 3, 2), 6),
    ((3, 4, 2), 6),
    ((4, 4, 2), 25),
    ((4, 4, 3), 20),
    ((4, 5, 3), 20),
    ((5, 5, 4), 3425),
];

/// Closed-form bounds in the reference table, `(n, k) -> value`.
pub const REFERENCE_ASYMPTOTIC: [((u64, u64), f64); 3] =
    [((30, 20), 221.0), ((35, 20), 4.70e18), ((40, 20), 7.29e193)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    /// Skip the sweeps over `2^28` colourings and the long log-domain sweep.
    pub quick: bool,
}

fn run(name: &str, f: impl FnOnce() -> Result<String, String>) -> CheckResult {
    let start = crate::search::Stopwatch::start();
    let r = f();
    let elapsed = start.elapsed();
    let (passed, detail) = match r {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    log::info!(
        "{} {name} ({elapsed:.2?})",
        if passed { "PASS" } else { "FAIL" }
    );
    CheckResult {
        name: name.into(),
        passed,
        detail,
        elapsed,
    }
}

fn ensure(ok: bool, detail: String) -> Result<String, String> {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

pub fn check_bracket_examples() -> Result<String, String> {
    let a = bracket(3, 2).unwrap();
    let b = bracket(4, 3).unwrap();
    ensure(
        a == 10u32.into() && b == 41u32.into(),
        format!("[3 2] = {a}, [4 3] = {b}"),
    )
}

pub fn check_bracket_routes(max_n: u64) -> Result<String, String> {
    for n in 0..=max_n {
        let full = TriangularSet::full(n);
        for k in 0..=n {
            let rec = bracket(n, k).unwrap();
            let sum = bracket_sum(n, k).unwrap();
            let count = enumerate_subtriangles(&full, k).unwrap().len();
            if rec != sum || rec != count.into() {
                return Err(format!(
                    "n={n} k={k}: recursion {rec}, sum {sum}, enumeration {count}"
                ));
            }
        }
    }
    Ok(format!(
        "recursion, sum and enumeration agree for n <= {max_n}"
    ))
}

/// `R1(p, q, 1) = p + q - 1` for all `p <= q` with `p + q <= max_sum`.
pub fn check_r1_k1(max_sum: u64) -> Result<String, String> {
    let mut n = 0;
    for p in 1..max_sum {
        for q in p..=max_sum - p {
            let r = compute_r1(p, q, 1, p + q, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
            if r.exact() != Some(p + q - 1) {
                return Err(format!("R1({p},{q},1) gave {:?}", r.value));
            }
            n += 1;
        }
    }
    Ok(format!("{n} pairs with p + q <= {max_sum}"))
}

pub fn check_mines3_one_winner() -> Result<String, String> {
    let config = GameConfig::mines3(Variant::Standard);
    for x in 0u64..64 {
        let c = Coloring::from_fn(6, |i| {
            if x >> i & 1 == 1 {
                crate::Player::Two
            } else {
                crate::Player::One
            }
        });
        let (a, b) = winners(&c, config).map_err(|e| e.to_string())?;
        if a == b {
            return Err(format!("colouring {x:02x}: winners {a} {b}"));
        }
    }
    Ok("all 64 colourings have exactly one winner".into())
}

pub fn check_no_double_win(m: u64, n: u64) -> Result<String, String> {
    let ok = verify_no_double_win(m, n, n, 1).map_err(|e| e.to_string())?;
    let cells = crate::tri::triangular_number(m);
    ensure(
        ok,
        format!("Mines_{m}({n},1): {} colourings", 1u64 << cells),
    )
}

pub fn check_no_disjoint_pair(m: u64, n: u64) -> Result<String, String> {
    let pair = disjoint_winning_pair(GameConfig::new(m, n, n, 1)).map_err(|e| e.to_string())?;
    ensure(
        pair.is_none(),
        format!("Mines_{m}({n},1): disjoint winning sets {pair:?}"),
    )
}

pub fn check_mines3_values() -> Result<String, String> {
    let mut out = Vec::new();
    for v in [Variant::Standard, Variant::Directional] {
        let g =
            solve(&GameState::new(GameConfig::mines3(v)).unwrap()).map_err(|e| e.to_string())?;
        if g.outcome != Outcome::FirstPlayerWin {
            return Err(format!("{v:?}: {:?}", g.outcome));
        }
        out.push(format!("{v:?}: {:?}", g.outcome));
    }
    Ok(out.join(", "))
}

pub fn check_strategies() -> Result<String, String> {
    let d = strategy_never_loses(Variant::Directional);
    let s = strategy_never_loses(Variant::Standard);
    ensure(d && s, format!("directional {d}, standard {s}"))
}

/// The reference lower bounds against the first-moment sweep.
pub fn check_reference_lower_bounds(rows: &[((u64, u64, u64), u64)]) -> Result<String, String> {
    let mut bad = Vec::new();
    let mut good = Vec::new();
    for &((p, q, k), want) in rows {
        let got = prob_lower_bound(p, q, k).map_err(|e| e.to_string())?.bound;
        if got == want {
            good.push(format!("({p},{q},{k})->{got}"));
        } else {
            bad.push(format!("({p},{q},{k}): computed {got}, table {want}"));
        }
    }
    if bad.is_empty() {
        Ok(good.join(" "))
    } else {
        Err(bad.join("; "))
    }
}

/// The `(5,5,3)` entry, `9.39e7`, to three significant figures.
pub fn check_log_sweep_entry() -> Result<String, String> {
    let b = prob_lower_bound(5, 5, 3).map_err(|e| e.to_string())?;
    let rounded = format!("{:.2e}", b.bound as f64);
    ensure(
        rounded == "9.39e7",
        format!("bound {} ({rounded})", b.bound),
    )
}

pub fn check_asymptotic_entries() -> Result<String, String> {
    let mut out = Vec::new();
    for ((n, k), want) in REFERENCE_ASYMPTOTIC {
        let got = asymptotic_lower_bound(n, k).map_err(|e| e.to_string())?;
        let rel = (got.log10 - want.log10()).abs() * std::f64::consts::LN_10;
        if rel > 0.01 {
            return Err(format!("({n},{k}): {got} vs {want:e}"));
        }
        out.push(format!("({n},{k})->{got}"));
    }
    Ok(out.join(" "))
}

pub fn check_upper_bound_shapes() -> Result<String, String> {
    let u = upper_bound_expr(3, 3, 2)
        .map_err(|e| e.to_string())?
        .to_string();
    let m = m_sequence_expr(3, 2)
        .map_err(|e| e.to_string())?
        .to_string();
    ensure(
        u == "R^{15}(3,2)" && m == "R^{6}(3,2)",
        format!("upper {u}, M_3,2 = {m}"),
    )
}

pub fn verify_all(opts: VerifyOptions) -> VerifyReport {
    let mut checks = vec![
        run("bracket worked examples", check_bracket_examples),
        run("bracket recursion, sum and enumeration agree", || {
            check_bracket_routes(6)
        }),
        run("R1(p,q,1) = p+q-1", || {
            check_r1_k1(if opts.quick { 6 } else { 8 })
        }),
        run(
            "Mines_3 colourings have exactly one winner",
            check_mines3_one_winner,
        ),
        run("Mines_5(3,1) colourings never have two winners", || {
            check_no_double_win(5, 3)
        }),
        run("Mines_5(3,1) has no disjoint winning pair", || {
            check_no_disjoint_pair(5, 3)
        }),
    ];
    if !opts.quick {
        checks.push(run(
            "Mines_7(4,1) colourings never have two winners",
            || check_no_double_win(7, 4),
        ));
    }
    checks.extend([
        run(
            "Mines_3 is a first-player win in both variants",
            check_mines3_values,
        ),
        run("explicit Mines_3 strategies always win", check_strategies),
        run(
            "first-moment lower bounds match the reference table",
            || check_reference_lower_bounds(&REFERENCE_LOWER_BOUNDS),
        ),
        run(
            "closed-form lower bounds within 1%",
            check_asymptotic_entries,
        ),
        run("upper-bound expressions", check_upper_bound_shapes),
    ]);
    if !opts.quick {
        checks.push(run("log-domain sweep for (5,5,3)", check_log_sweep_entry));
    }
    VerifyReport { checks }
}
