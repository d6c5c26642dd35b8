//! HTTP/JSON service: game sessions, solver hints and bound lookups.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use triramsey::bounds::{self, ClassicalRamseyTable};
use triramsey::solver::{SolveError, Solver};
use triramsey::tri;
use triramsey::{GameConfig, GameState, MinesError, Move};
use uuid::Uuid;

/// Largest board the bounds endpoint will sweep to.
pub const BOUNDS_M_LIMIT: u64 = 200_000_000;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl ToString) -> Self {
        Self {
            status,
            code,
            message: message.to_string(),
        }
    }

    fn not_found(id: &str) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            "unknown_game",
            format!("no game with id {id}"),
        )
    }

    fn invalid(message: impl ToString) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_request", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(json!({"error": self.message, "code": self.code})),
        )
            .into_response()
    }
}

impl From<MinesError> for ApiError {
    fn from(e: MinesError) -> Self {
        match e {
            MinesError::InvalidConfig(_) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_config", e)
            }
            MinesError::GameOver => ApiError::new(StatusCode::CONFLICT, "game_over", e),
            MinesError::CellOccupied(_) | MinesError::NoSuchCell(_) => {
                ApiError::new(StatusCode::CONFLICT, "illegal_move", e)
            }
            MinesError::NotDirectional | MinesError::BadRecord(_) => ApiError::invalid(e),
        }
    }
}

impl From<SolveError> for ApiError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::BudgetExceeded { .. } => {
                ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "budget_exceeded", e)
            }
            SolveError::TooLarge { .. } => {
                ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "too_large", e)
            }
            SolveError::GameOver => ApiError::new(StatusCode::CONFLICT, "game_over", e),
            SolveError::Rules(r) => r.into(),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::invalid(e.body_text())
    }
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

#[derive(Debug, Clone)]
struct Session {
    state: GameState,
    created_at: u64,
    updated_at: u64,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct SessionView<'a> {
    id: Uuid,
    state: &'a GameState,
    created_at: u64,
    updated_at: u64,
}

/// Shared service state.
pub struct AppState {
    games: RwLock<HashMap<Uuid, Session>>,
    solvers: Mutex<HashMap<GameConfig, Arc<Solver>>>,
    budget: u64,
}

impl AppState {
    pub fn new(budget: u64) -> Arc<Self> {
        Arc::new(Self {
            games: RwLock::new(HashMap::new()),
            solvers: Mutex::new(HashMap::new()),
            budget,
        })
    }

    fn solver(&self, config: GameConfig) -> Result<Arc<Solver>, ApiError> {
        let mut solvers = self.solvers.lock().unwrap();
        if let Some(s) = solvers.get(&config) {
            return Ok(s.clone());
        }
        let s = Arc::new(Solver::new(config, self.budget)?);
        solvers.insert(config, s.clone());
        Ok(s)
    }

    fn session(&self, id: &str) -> Result<(Uuid, Session), ApiError> {
        let uuid = Uuid::parse_str(id).map_err(|_| ApiError::not_found(id))?;
        let games = self.games.read().unwrap();
        let s = games.get(&uuid).ok_or_else(|| ApiError::not_found(id))?;
        Ok((uuid, s.clone()))
    }
}

fn view(id: Uuid, s: &Session) -> Json<serde_json::Value> {
    Json(
        serde_json::to_value(SessionView {
            id,
            state: &s.state,
            created_at: s.created_at,
            updated_at: s.updated_at,
        })
        .expect("game state serialises"),
    )
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/games", post(create_game))
        .route("/games/{id}", get(get_game))
        .route("/games/{id}/moves", post(play_move))
        .route("/games/{id}/hint", get(hint))
        .route("/games/{id}/whatif", get(whatif))
        .route("/bracket", get(bracket))
        .route("/bounds", get(bounds_query))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route") })
        .with_state(state)
}

pub async fn serve(addr: SocketAddr, budget: u64) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(AppState::new(budget)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

async fn create_game(
    State(app): State<Arc<AppState>>,
    body: Result<Json<GameConfig>, JsonRejection>,
) -> Result<(StatusCode, Json<serde_json::Value>), ApiError> {
    let Json(config) = body?;
    let state = tokio::task::spawn_blocking(move || GameState::new(config))
        .await
        .expect("rules builder panicked")?;
    let id = Uuid::new_v4();
    let t = now_ms();
    let session = Session {
        state,
        created_at: t,
        updated_at: t,
    };
    let body = view(id, &session);
    app.games.write().unwrap().insert(id, session);
    Ok((StatusCode::CREATED, body))
}

async fn get_game(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<serde_json::Value>, ApiError> {
    let (uuid, s) = app.session(&id)?;
    Ok(view(uuid, &s))
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct MoveRequest {
    #[serde(rename = "move")]
    mv: Move,
    /// The turn number the client last saw; a mismatch is rejected.
    expected_turn: Option<usize>,
}

async fn play_move(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Json<MoveRequest>, JsonRejection>,
) -> Result<Json<serde_json::Value>, ApiError> {
    let Json(req) = body?;
    let uuid = Uuid::parse_str(&id).map_err(|_| ApiError::not_found(&id))?;
    let mut games = app.games.write().unwrap();
    let session = games
        .get_mut(&uuid)
        .ok_or_else(|| ApiError::not_found(&id))?;
    if let Some(t) = req.expected_turn {
        if t != session.state.turn() {
            return Err(ApiError::new(
                StatusCode::CONFLICT,
                "stale_turn",
                format!(
                    "expected turn {t}, game is at turn {}",
                    session.state.turn()
                ),
            ));
        }
    }
    session.state = session.state.apply(req.mv)?;
    session.updated_at = now_ms();
    Ok(view(uuid, session))
}

async fn hint(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<serde_json::Value>, ApiError> {
    let (_, s) = app.session(&id)?;
    if s.state.status().is_over() {
        return Err(MinesError::GameOver.into());
    }
    let solver = app.solver(s.state.config())?;
    tokio::task::spawn_blocking(move || {
        let before = solver.nodes_explored();
        let value = solver.solve(&s.state)?;
        Ok(Json(json!({
            "move": value.principal_move,
            "outcome": value.outcome,
            "nodesExplored": solver.nodes_explored() - before,
        })))
    })
    .await
    .expect("solver panicked")
}

#[derive(Debug, Deserialize)]
struct WhatIfQuery {
    #[serde(rename = "move")]
    mv: String,
}

fn parse_move(s: &str) -> Result<Move, ApiError> {
    if s.eq_ignore_ascii_case("pass") {
        return Ok(Move::Pass);
    }
    s.parse::<usize>()
        .map(Move::Mark)
        .map_err(|_| ApiError::invalid(format!("move must be a cell index or \"pass\", got {s:?}")))
}

async fn whatif(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    query: Result<Query<WhatIfQuery>, axum::extract::rejection::QueryRejection>,
) -> Result<Json<serde_json::Value>, ApiError> {
    let Query(q) = query.map_err(|e| ApiError::invalid(e.body_text()))?;
    let mv = parse_move(&q.mv)?;
    let (_, s) = app.session(&id)?;
    let next = s.state.apply(mv)?;
    let solver = app.solver(s.state.config())?;
    tokio::task::spawn_blocking(move || {
        let value = solver.solve(&next)?;
        Ok(Json(json!({"move": mv, "resultingOutcome": value.outcome})))
    })
    .await
    .expect("solver panicked")
}

#[derive(Debug, Deserialize)]
struct BracketQuery {
    n: u64,
    k: u64,
}

async fn bracket(
    query: Result<Query<BracketQuery>, axum::extract::rejection::QueryRejection>,
) -> Result<Json<serde_json::Value>, ApiError> {
    let Query(BracketQuery { n, k }) = query.map_err(|e| ApiError::invalid(e.body_text()))?;
    if n > 100_000 {
        return Err(ApiError::invalid("n is limited to 100000"));
    }
    let v = tokio::task::spawn_blocking(move || tri::bracket(n, k))
        .await
        .expect("bracket panicked")
        .map_err(ApiError::invalid)?;
    Ok(Json(json!({"n": n, "k": k, "value": v.to_string()})))
}

#[derive(Debug, Deserialize)]
struct BoundsQuery {
    p: u64,
    q: u64,
    k: u64,
}

/// Rejects parameters whose exact value needs an expensive draw search.
pub fn check_bounds_params(p: u64, q: u64, k: u64) -> Result<(), String> {
    let (lo, hi) = (p.min(q), p.max(q));
    if k == 0 || k > lo {
        return Err(format!("need 1 <= k <= p, q (p={p} q={q} k={k})"));
    }
    if hi > 1000 {
        return Err("p and q are limited to 1000".into());
    }
    if k == 1 && lo + hi > 8 {
        return Err("k = 1 is searched exhaustively, so p + q is limited to 8".into());
    }
    if k == lo && hi > 6 {
        return Err("p = k is searched exhaustively, so q is limited to 6".into());
    }
    Ok(())
}

async fn bounds_query(
    query: Result<Query<BoundsQuery>, axum::extract::rejection::QueryRejection>,
) -> Result<Json<bounds::TableRow>, ApiError> {
    let Query(BoundsQuery { p, q, k }) = query.map_err(|e| ApiError::invalid(e.body_text()))?;
    check_bounds_params(p, q, k).map_err(ApiError::invalid)?;
    tokio::task::spawn_blocking(move || {
        let opts = bounds::ProbOptions {
            m_limit: BOUNDS_M_LIMIT,
            ..Default::default()
        };
        match bounds::table_row_with(p, q, k, &ClassicalRamseyTable::standard(), opts) {
            Ok(row) => Ok(Json(row)),
            Err(bounds::BoundsError::LimitReached(m)) => Err(ApiError::new(
                StatusCode::SERVICE_UNAVAILABLE,
                "budget_exceeded",
                format!("lower-bound sweep passed m = {m}"),
            )),
            Err(e) => Err(ApiError::invalid(e)),
        }
    })
    .await
    .expect("bounds panicked")
}
