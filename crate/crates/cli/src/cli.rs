//! Argument parsing and the subcommands of the `triramsey` binary.

use std::ffi::OsString;
use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use triramsey::bounds::{self, ClassicalRamseyTable, TableRow};
use triramsey::cache::Cache;
use triramsey::search::{self, SearchResult, Strategy};
use triramsey::solver::{Solver, DEFAULT_NODE_BUDGET};
use triramsey::tri::{self, for_each_subtriangle};
use triramsey::verify::{verify_all, VerifyOptions};
use triramsey::{Coloring, GameConfig, GameState, Move, Variant};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "triramsey",
    version,
    about = "Triangular Ramsey numbers and the game of Mines"
)]
pub struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    pub json: bool,
    /// Result cache file.
    #[arg(long, global = true, default_value = "triramsey-cache.json")]
    pub cache: PathBuf,
    /// Neither read nor write the cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    /// Exhaustive when the board has at most 30 cells, else backtracking.
    Auto,
    Exhaustive,
    Backtracking,
    Randomized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Standard,
    Directional,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Standard => Variant::Standard,
            VariantArg::Directional => Variant::Directional,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// The number of k-level sub-triangles of an n-level triangle.
    Bracket {
        n: u64,
        k: u64,
        /// Print log2 of the value instead.
        #[arg(long)]
        log2: bool,
    },
    /// List the k-level sub-triangles of {1, ..., T_m} in lexicographic order.
    Enumerate {
        m: u64,
        k: u64,
        #[arg(long, default_value_t = 100_000)]
        limit: u64,
    },
    /// Search for a draw colouring of Mines_m(p,q,k).
    DrawSearch {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        k: u64,
        #[arg(long, value_enum, default_value_t = StrategyArg::Auto)]
        strategy: StrategyArg,
        /// Colourings, search nodes or random trials, by strategy.
        #[arg(long, default_value_t = 1 << 30)]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compute R1(p,q,k) by scanning board sizes.
    R1 {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        k: u64,
        /// Largest board to try (default p + q).
        #[arg(long)]
        m_max: Option<u64>,
        #[arg(long, default_value_t = search::DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Lower and upper bounds for one (p,q,k), or the whole reference table.
    Bounds {
        #[arg(long)]
        p: Option<u64>,
        #[arg(long)]
        q: Option<u64>,
        #[arg(long)]
        k: Option<u64>,
        #[arg(long, conflicts_with_all = ["p", "q", "k"])]
        table: bool,
    },
    /// Solve a fresh game exactly.
    Solve {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        k: u64,
        #[arg(long, value_enum, default_value_t = VariantArg::Standard)]
        variant: VariantArg,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
    },
    /// Run every built-in check and report pass or fail for each.
    Verify {
        /// Skip the checks that take more than a few seconds.
        #[arg(long)]
        quick: bool,
    },
    /// Run the HTTP/JSON service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Node budget per solver request.
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }
}

fn usage(e: impl ToString) -> CliError {
    CliError::Usage(e.to_string())
}

fn failure(e: impl ToString) -> CliError {
    CliError::Failure(e.to_string())
}

struct Ctx<'a> {
    json: bool,
    cache: Option<Cache>,
    out: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn emit(&mut self, text: impl AsRef<str>, value: serde_json::Value) -> Result<(), CliError> {
        let r = if self.json {
            writeln!(self.out, "{value}")
        } else {
            writeln!(self.out, "{}", text.as_ref())
        };
        r.map_err(failure)
    }
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn run(
    args: impl IntoIterator<Item = impl Into<OsString> + Clone>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let (CliError::Usage(m) | CliError::Failure(m)) = &e;
            let _ = writeln!(err, "error: {m}");
            e.code()
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let cache = if cli.no_cache || matches!(cli.command, Command::Serve { .. }) {
        None
    } else {
        Some(Cache::load(&cli.cache).map_err(failure)?)
    };
    let mut ctx = Ctx {
        json: cli.json,
        cache,
        out,
    };
    let code = match cli.command {
        Command::Bracket { n, k, log2 } => bracket(&mut ctx, n, k, log2)?,
        Command::Enumerate { m, k, limit } => enumerate(&mut ctx, m, k, limit)?,
        Command::DrawSearch {
            m,
            p,
            q,
            k,
            strategy,
            budget,
            seed,
        } => draw_search(
            &mut ctx,
            GameConfig::new(m, p, q, k),
            strategy,
            budget,
            seed,
        )?,
        Command::R1 {
            p,
            q,
            k,
            m_max,
            budget,
        } => r1(&mut ctx, p, q, k, m_max.unwrap_or(p + q), budget)?,
        Command::Bounds { p, q, k, table } => bounds_cmd(&mut ctx, p, q, k, table)?,
        Command::Solve {
            m,
            p,
            q,
            k,
            variant,
            budget,
        } => solve(
            &mut ctx,
            GameConfig {
                variant: variant.into(),
                ..GameConfig::new(m, p, q, k)
            },
            budget,
        )?,
        Command::Verify { quick } => verify(&mut ctx, quick)?,
        Command::Serve { port, host, budget } => {
            let addr: SocketAddr = format!("{host}:{port}").parse().map_err(usage)?;
            let rt = tokio::runtime::Runtime::new().map_err(failure)?;
            rt.block_on(crate::service::serve(addr, budget))
                .map_err(failure)?;
            EXIT_OK
        }
    };
    if let Some(c) = ctx.cache.as_mut() {
        if c.is_dirty() {
            if let Err(e) = c.save() {
                log::warn!("could not write cache {}: {e}", c.path().display());
            }
        }
    }
    Ok(code)
}

fn bracket(ctx: &mut Ctx, n: u64, k: u64, log2: bool) -> Result<i32, CliError> {
    if k > n {
        return Err(usage(format!("k = {k} exceeds n = {n}")));
    }
    if log2 {
        let v = tri::bracket_log2(n, k).map_err(usage)?;
        ctx.emit(format!("{v:.6}"), json!({"n": n, "k": k, "log2": v}))?;
        return Ok(EXIT_OK);
    }
    let v = match ctx.cache.as_ref().and_then(|c| c.bracket(n, k)) {
        Some(v) => v,
        None => {
            let v = tri::bracket(n, k).map_err(usage)?;
            if let Some(c) = ctx.cache.as_mut() {
                c.record_bracket(n, k, &v);
            }
            v
        }
    };
    ctx.emit(
        v.to_string(),
        json!({"n": n, "k": k, "value": v.to_string()}),
    )?;
    Ok(EXIT_OK)
}

fn enumerate(ctx: &mut Ctx, m: u64, k: u64, limit: u64) -> Result<i32, CliError> {
    if k > m {
        return Err(usage(format!("k = {k} exceeds m = {m}")));
    }
    let total = tri::bracket(m, k).map_err(usage)?;
    if total > limit.into() {
        return Err(failure(format!(
            "{total} sub-triangles exceeds --limit {limit}"
        )));
    }
    let mut sets = Vec::new();
    for_each_subtriangle(m, k, |idx| {
        sets.push(idx.iter().map(|&i| i as u64 + 1).collect::<Vec<_>>())
    });
    if ctx.json {
        ctx.emit("", json!(sets))?;
    } else {
        for s in &sets {
            let t = tri::TriangularSet::new(s.iter().copied()).unwrap();
            writeln!(ctx.out, "{t}").map_err(failure)?;
        }
    }
    Ok(EXIT_OK)
}

/// Rows of `X` (player one) and `Y` (player two) for `k = 1` colourings.
pub fn render_coloring(c: &Coloring, m: u64) -> String {
    let mut s = String::new();
    for row in 1..=m {
        s.push_str(&" ".repeat((m - row) as usize));
        let first = tri::triangular_number(row - 1) as usize;
        let cells: Vec<String> = (first..first + row as usize)
            .map(|i| c.owner(i).symbol().to_string())
            .collect();
        s.push_str(&cells.join(" "));
        s.push('\n');
    }
    s
}

fn draw_search(
    ctx: &mut Ctx,
    config: GameConfig,
    strategy: StrategyArg,
    budget: u64,
    seed: u64,
) -> Result<i32, CliError> {
    config.validate().map_err(usage)?;
    let cells = tri::bracket_u64(config.m, config.k).unwrap_or(u64::MAX);
    let strategy = match strategy {
        StrategyArg::Auto if cells <= 30 => Strategy::Exhaustive,
        StrategyArg::Auto | StrategyArg::Backtracking => Strategy::Backtracking,
        StrategyArg::Exhaustive => Strategy::Exhaustive,
        StrategyArg::Randomized => Strategy::Randomized,
    };
    let out = search::find_draw_seeded(config, strategy, budget, seed).map_err(|e| match e {
        search::SearchError::BudgetInvalid => usage(e),
        other => failure(other),
    })?;
    let head = match &out.result {
        SearchResult::DrawFound { witness } => {
            let mut t = format!("draw found: {}", witness.to_hex());
            if config.k == 1 {
                t.push('\n');
                t.push_str(render_coloring(witness, config.m).trim_end());
            }
            t
        }
        SearchResult::NoDrawExists => "no draw exists".to_string(),
        SearchResult::Inconclusive => "inconclusive: budget spent".to_string(),
    };
    let text = format!(
        "{config}: {head}\n{} nodes, {:.3} s ({strategy:?})",
        out.nodes_explored,
        out.elapsed.as_secs_f64()
    );
    let mut v = serde_json::to_value(&out).map_err(failure)?;
    v["strategy"] = json!(strategy);
    ctx.emit(text, v)?;
    Ok(EXIT_OK)
}

fn r1(ctx: &mut Ctx, p: u64, q: u64, k: u64, m_max: u64, budget: u64) -> Result<i32, CliError> {
    if let Some(hit) = ctx.cache.as_ref().and_then(|c| c.r1(p, q, k)).cloned() {
        if hit.status == triramsey::cache::R1Status::Exact {
            ctx.emit(
                hit.value.to_string(),
                serde_json::to_value(&hit).map_err(failure)?,
            )?;
            return Ok(EXIT_OK);
        }
    }
    let report = search::compute_r1(p, q, k, m_max, budget).map_err(|e| match e {
        search::SearchError::Config(_) | search::SearchError::BudgetInvalid => usage(e),
        other => failure(other),
    })?;
    if let Some(c) = ctx.cache.as_mut() {
        c.record_r1(&report);
    }
    let text = match report.value {
        search::R1Value::Exact(v) => v.to_string(),
        search::R1Value::LowerBound(v) => format!(">= {v}"),
    };
    let entry = triramsey::cache::R1Entry::from_report(&report);
    ctx.emit(text, serde_json::to_value(&entry).map_err(failure)?)?;
    Ok(EXIT_OK)
}

fn row_text(r: &TableRow) -> [String; 6] {
    let dash = || "-".to_string();
    [
        r.p.to_string(),
        r.q.to_string(),
        r.k.to_string(),
        r.lower.as_ref().map_or_else(dash, |l| l.to_string()),
        r.exact.map_or_else(|| "?".into(), |e| e.to_string()),
        r.upper_expr.clone().unwrap_or_else(dash),
    ]
}

fn bounds_cmd(
    ctx: &mut Ctx,
    p: Option<u64>,
    q: Option<u64>,
    k: Option<u64>,
    table: bool,
) -> Result<i32, CliError> {
    let classical = ClassicalRamseyTable::standard();
    let rows = if table {
        bounds::reference_table(&classical).map_err(failure)?
    } else {
        let (Some(p), Some(q), Some(k)) = (p, q, k) else {
            return Err(usage("give --p, --q and --k, or --table"));
        };
        vec![bounds::table_row(p, q, k, &classical).map_err(|e| match e {
            bounds::BoundsError::InvalidParams(_) => usage(e),
            other => failure(other),
        })?]
    };
    if ctx.json {
        let v = if table { json!(rows) } else { json!(rows[0]) };
        ctx.emit("", v)?;
        return Ok(EXIT_OK);
    }
    let header = ["p", "q", "k", "lower", "R1", "upper"].map(String::from);
    let body: Vec<[String; 6]> = rows.iter().map(row_text).collect();
    let mut widths = header.clone().map(|h| h.len());
    for r in &body {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: &[String; 6], extra: &str| {
        let mut s = String::new();
        for (c, w) in cells.iter().zip(widths) {
            s.push_str(&format!("{c:<w$}  "));
        }
        s.push_str(extra);
        s.trim_end().to_string()
    };
    let mut text = vec![line(&header, "upper interval / source")];
    for (r, cells) in rows.iter().zip(&body) {
        let extra = match &r.upper_interval {
            Some(i) => format!("{i}  {}", r.source),
            None => r.source.clone(),
        };
        text.push(line(cells, &extra));
    }
    ctx.emit(text.join("\n"), json!(null))?;
    Ok(EXIT_OK)
}

fn describe_move(mv: Move, config: GameConfig) -> String {
    match mv {
        Move::Pass => "pass".into(),
        Move::Mark(c) if config.k == 1 => format!("mark cell {c} (position {})", c + 1),
        Move::Mark(c) => format!("mark cell {c}"),
    }
}

fn solve(ctx: &mut Ctx, config: GameConfig, budget: u64) -> Result<i32, CliError> {
    config.validate().map_err(usage)?;
    let solver = Solver::new(config, budget).map_err(|e| match e {
        triramsey::solver::SolveError::Rules(_) => usage(e),
        other => failure(other),
    })?;
    let state = GameState::new(config).map_err(usage)?;
    let value = solver.solve(&state).map_err(failure)?;
    if let Some(c) = ctx.cache.as_mut() {
        c.record_solved(config, value.outcome);
    }
    let best = value
        .principal_move
        .map(|m| describe_move(m, config))
        .unwrap_or_default();
    let text = format!(
        "{config}: {:?}, best first move: {best} ({} nodes)",
        value.outcome,
        solver.nodes_explored()
    );
    ctx.emit(
        text,
        json!({
            "config": config,
            "outcome": value.outcome,
            "principalMove": value.principal_move,
            "nodesExplored": solver.nodes_explored(),
        }),
    )?;
    Ok(EXIT_OK)
}

fn verify(ctx: &mut Ctx, quick: bool) -> Result<i32, CliError> {
    let report = verify_all(VerifyOptions { quick });
    let text: Vec<String> = report
        .checks
        .iter()
        .map(|c| {
            format!(
                "{} {} ({:.2} s): {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.elapsed.as_secs_f64(),
                c.detail
            )
        })
        .collect();
    ctx.emit(
        text.join("\n"),
        serde_json::to_value(&report).map_err(failure)?,
    )?;
    Ok(if report.all_passed() {
        EXIT_OK
    } else {
        EXIT_FAILURE
    })
}
