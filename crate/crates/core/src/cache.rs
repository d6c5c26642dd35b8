//! JSON cache of brackets, Ramsey scans and solved games.
//!
//! Everything read back is checked again before use: brackets are
//! recomputed, draw witnesses re-verified and game values re-solved. Entries
//! that fail are dropped with a warning.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use log::warn;
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::mines::GameConfig;
use crate::search::{is_draw_coloring, Coloring, R1Report, R1Value};
use crate::solver::{Outcome, Solver};
use crate::tri::bracket;

pub const SCHEMA_VERSION: u32 = 1;
/// Node budget for re-solving a cached game on load.
pub const RESOLVE_BUDGET: u64 = 5_000_000;

#[derive(Debug, thiserror::Error)]
pub enum CacheError {
    #[error("cache i/o: {0}")]
    Io(#[from] io::Error),
    #[error("cache is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BracketEntry {
    pub n: u64,
    pub k: u64,
    pub value: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum R1Status {
    Exact,
    LowerBound,
}

/// A draw colouring of the largest board searched, as lowercase hex with
/// bit `i` set when player two owns cell `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DrawWitness {
    pub config: GameConfig,
    pub coloring: String,
    /// Unix seconds of the last successful verification.
    pub verified_at: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct R1Entry {
    pub p: u64,
    pub q: u64,
    pub k: u64,
    pub status: R1Status,
    pub value: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<DrawWitness>,
}

impl R1Entry {
    pub fn from_report(r: &R1Report) -> Self {
        let (status, value) = match r.value {
            R1Value::Exact(v) => (R1Status::Exact, v),
            R1Value::LowerBound(v) => (R1Status::LowerBound, v),
        };
        R1Entry {
            p: r.p,
            q: r.q,
            k: r.k,
            status,
            value,
            witness: r.best_witness().map(|(m, c)| DrawWitness {
                config: GameConfig::new(m, r.p, r.q, r.k),
                coloring: c.to_hex(),
                verified_at: unix_now(),
            }),
        }
    }

    fn check(&self) -> Result<(), String> {
        let Some(w) = &self.witness else {
            return Ok(());
        };
        let config = w.config;
        if (config.p, config.q, config.k) != (self.p, self.q, self.k) {
            return Err(format!("witness is for {config}"));
        }
        if config.m >= self.value {
            return Err(format!(
                "witness on m={} contradicts value {}",
                config.m, self.value
            ));
        }
        config.validate().map_err(|e| e.to_string())?;
        let cells = bracket(config.m, self.k).map_err(|e| e.to_string())?;
        let cells = usize::try_from(cells).map_err(|e| e.to_string())?;
        let c = Coloring::from_hex(&w.coloring, cells).ok_or("malformed coloring")?;
        match is_draw_coloring(&c, config) {
            Ok(true) => Ok(()),
            Ok(false) => Err("witness is not a draw".into()),
            Err(e) => Err(e.to_string()),
        }
    }
}

fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolvedGame {
    pub config: GameConfig,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CacheFile {
    pub schema_version: u32,
    #[serde(default)]
    pub brackets: Vec<BracketEntry>,
    #[serde(default)]
    pub r1_results: Vec<R1Entry>,
    #[serde(default)]
    pub solved_games: Vec<SolvedGame>,
}

impl Default for CacheFile {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            brackets: Vec::new(),
            r1_results: Vec::new(),
            solved_games: Vec::new(),
        }
    }
}

impl CacheFile {
    /// Drops every entry that fails re-verification. Returns how many went.
    pub fn verify(&mut self) -> usize {
        let before = self.brackets.len() + self.r1_results.len() + self.solved_games.len();
        self.brackets.retain(|b| {
            let ok = b
                .value
                .parse::<BigUint>()
                .ok()
                .is_some_and(|v| bracket(b.n, b.k).ok() == Some(v));
            if !ok {
                warn!("dropping cached bracket [{} {}] = {}", b.n, b.k, b.value);
            }
            ok
        });
        self.r1_results.retain(|r| match r.check() {
            Ok(()) => true,
            Err(e) => {
                warn!("dropping cached R1({},{},{}): {e}", r.p, r.q, r.k);
                false
            }
        });
        self.solved_games.retain(|g| {
            let fresh = Solver::new(g.config, RESOLVE_BUDGET)
                .and_then(|s| Ok(s.solve(&crate::mines::GameState::new(g.config)?)?.outcome));
            match fresh {
                Ok(o) if o == g.outcome => true,
                Ok(o) => {
                    warn!(
                        "dropping cached value of {}: stored {:?}, solved {:?}",
                        g.config, g.outcome, o
                    );
                    false
                }
                Err(e) => {
                    warn!("dropping cached value of {}: {e}", g.config);
                    false
                }
            }
        });
        before - (self.brackets.len() + self.r1_results.len() + self.solved_games.len())
    }
}

/// A cache bound to a file path.
#[derive(Debug, Clone)]
pub struct Cache {
    path: PathBuf,
    file: CacheFile,
    dirty: bool,
}

impl Cache {
    /// Reads and re-verifies the cache; a missing file or another schema
    /// version gives an empty cache.
    pub fn load(path: impl AsRef<Path>) -> Result<Cache, CacheError> {
        let path = path.as_ref().to_path_buf();
        let mut file = match fs::read_to_string(&path) {
            Ok(text) => {
                let file: CacheFile = serde_json::from_str(&text)?;
                if file.schema_version != SCHEMA_VERSION {
                    warn!(
                        "ignoring cache {} with schema version {}",
                        path.display(),
                        file.schema_version
                    );
                    CacheFile::default()
                } else {
                    file
                }
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => CacheFile::default(),
            Err(e) => return Err(e.into()),
        };
        let dropped = file.verify();
        let cache = Cache {
            path,
            file,
            dirty: dropped > 0,
        };
        for b in &cache.file.brackets {
            if let Ok(v) = b.value.parse() {
                let _ = crate::tri::global_brackets().insert_checked(b.n, b.k, v);
            }
        }
        Ok(cache)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn contents(&self) -> &CacheFile {
        &self.file
    }

    pub fn is_dirty(&self) -> bool {
        self.dirty
    }

    /// Writes through a temporary file and a rename.
    pub fn save(&mut self) -> Result<(), CacheError> {
        let tmp = self.path.with_extension("json.tmp");
        fs::write(&tmp, serde_json::to_string_pretty(&self.file)?)?;
        fs::rename(&tmp, &self.path)?;
        self.dirty = false;
        Ok(())
    }

    pub fn bracket(&self, n: u64, k: u64) -> Option<BigUint> {
        self.file
            .brackets
            .iter()
            .find(|b| b.n == n && b.k == k)
            .and_then(|b| b.value.parse().ok())
    }

    pub fn record_bracket(&mut self, n: u64, k: u64, value: &BigUint) {
        if self.bracket(n, k).is_none() {
            self.file.brackets.push(BracketEntry {
                n,
                k,
                value: value.to_string(),
            });
            self.dirty = true;
        }
    }

    pub fn r1(&self, p: u64, q: u64, k: u64) -> Option<&R1Entry> {
        self.file
            .r1_results
            .iter()
            .find(|r| (r.p, r.q, r.k) == (p, q, k))
    }

    /// Keeps the stronger of an existing and a new result.
    pub fn record_r1(&mut self, report: &R1Report) {
        let entry = R1Entry::from_report(report);
        let stronger = |old: &R1Entry| match (old.status, entry.status) {
            (R1Status::Exact, _) => false,
            (R1Status::LowerBound, R1Status::Exact) => true,
            (R1Status::LowerBound, R1Status::LowerBound) => entry.value > old.value,
        };
        match self
            .file
            .r1_results
            .iter_mut()
            .find(|r| (r.p, r.q, r.k) == (entry.p, entry.q, entry.k))
        {
            Some(old) if stronger(old) => *old = entry,
            Some(_) => return,
            None => self.file.r1_results.push(entry),
        }
        self.dirty = true;
    }

    pub fn solved(&self, config: GameConfig) -> Option<Outcome> {
        self.file
            .solved_games
            .iter()
            .find(|g| g.config == config)
            .map(|g| g.outcome)
    }

    pub fn record_solved(&mut self, config: GameConfig, outcome: Outcome) {
        if self.solved(config).is_none() {
            self.file.solved_games.push(SolvedGame { config, outcome });
            self.dirty = true;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mines::Variant;
    use crate::search::compute_r1;

    #[test]
    fn round_trip_and_reverify() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.json");
        let mut c = Cache::load(&path).unwrap();
        assert!(c.contents().brackets.is_empty());
        c.record_bracket(4, 3, &bracket(4, 3).unwrap());
        let r = compute_r1(3, 3, 1, 8, 1 << 20).unwrap();
        c.record_r1(&r);
        c.record_solved(
            GameConfig::mines3(Variant::Directional),
            Outcome::FirstPlayerWin,
        );
        c.save().unwrap();

        let back = Cache::load(&path).unwrap();
        assert_eq!(back.contents(), c.contents());
        assert_eq!(back.bracket(4, 3), Some(BigUint::from(41u32)));
        let e = back.r1(3, 3, 1).unwrap();
        assert_eq!((e.status, e.value), (R1Status::Exact, 5));
        assert_eq!(
            e.witness.as_ref().unwrap().config,
            GameConfig::new(4, 3, 3, 1)
        );
        assert!(!back.is_dirty());
    }

    #[test]
    fn bad_entries_are_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.json");
        let json = serde_json::json!({
            "schemaVersion": SCHEMA_VERSION,
            "brackets": [{"n": 3, "k": 2, "value": "10"}, {"n": 4, "k": 3, "value": "42"}],
            "r1Results": [
                {"p": 2, "q": 2, "k": 1, "status": "exact", "value": 3,
                 "witness": {"config": {"m": 2, "p": 2, "q": 2, "k": 1}, "coloring": "3", "verifiedAt": 0}},
                {"p": 2, "q": 2, "k": 1, "status": "exact", "value": 3,
                 "witness": {"config": {"m": 2, "p": 2, "q": 2, "k": 1}, "coloring": "7", "verifiedAt": 0}},
                {"p": 2, "q": 3, "k": 1, "status": "exact", "value": 4,
                 "witness": {"config": {"m": 2, "p": 2, "q": 2, "k": 1}, "coloring": "3", "verifiedAt": 0}}
            ],
            "solvedGames": [
                {"config": {"m": 3, "p": 2, "q": 2, "k": 1, "variant": "standard"}, "outcome": "FirstPlayerWin"},
                {"config": {"m": 2, "p": 2, "q": 2, "k": 1}, "outcome": "FirstPlayerWin"}
            ]
        });
        fs::write(&path, json.to_string()).unwrap();
        let c = Cache::load(&path).unwrap();
        assert_eq!(c.contents().brackets.len(), 1);
        assert_eq!(c.contents().r1_results.len(), 1);
        assert_eq!(c.contents().solved_games.len(), 1);
        assert!(c.is_dirty());
    }

    #[test]
    fn other_schema_versions_are_ignored() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.json");
        fs::write(
            &path,
            r#"{"schemaVersion": 99, "brackets": [{"n":3,"k":2,"value":"10"}]}"#,
        )
        .unwrap();
        assert!(Cache::load(&path).unwrap().contents().brackets.is_empty());
        fs::write(&path, "not json").unwrap();
        assert!(matches!(Cache::load(&path), Err(CacheError::Json(_))));
    }
}
