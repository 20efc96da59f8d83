//! Multi-step route search over a shared AND-OR graph.

mod document;
mod graph;
mod mcts;
mod retro_star;
mod routes;

pub use document::{ChemAttributes, GraphDocument, RxnAttributes, TreeNode};
pub use graph::{ChemNode, RxnNode, SearchGraph, Termination};
pub use mcts::mcts_search;
pub use retro_star::retro_star_search;
pub use routes::{enumerate_routes, Route, SearchResult, ENUMERATION_CAP};

use crate::banlist::BanList;
use crate::buyables::{BuyableView, DEFAULT_MAX_PRICE};
use crate::one_step::ExpansionStrategy;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("target is not valid SMILES: {0}")]
    TargetUnparsable(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid search config: {0}")]
    InvalidConfig(String),
    #[error("malformed graph document: {0}")]
    BadDocument(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    #[default]
    Mcts,
    RetroStar,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Mcts => "mcts",
            Algorithm::RetroStar => "retro_star",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub algorithm: Algorithm,
    pub max_depth: usize,
    pub max_branching: usize,
    pub max_chemicals: usize,
    pub max_price: f64,
    pub expansion_time_s: Option<f64>,
    pub exploration_c: f64,
    pub return_first: bool,
    pub max_routes: usize,
    pub random_seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            algorithm: Algorithm::Mcts,
            max_depth: 6,
            max_branching: 25,
            max_chemicals: 5000,
            max_price: DEFAULT_MAX_PRICE,
            expansion_time_s: None,
            exploration_c: 1.0,
            return_first: false,
            max_routes: 200,
            random_seed: 0,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: &str| Err(SearchError::InvalidConfig(m.to_string()));
        if self.max_depth == 0 {
            return bad("max_depth must be positive");
        }
        if self.max_branching == 0 {
            return bad("max_branching must be positive");
        }
        if self.max_chemicals == 0 {
            return bad("max_chemicals must be positive");
        }
        if self.max_routes == 0 {
            return bad("max_routes must be positive");
        }
        if !(self.max_price > 0.0 && self.max_price.is_finite()) {
            return bad("max_price must be positive");
        }
        if !(self.exploration_c >= 0.0 && self.exploration_c.is_finite()) {
            return bad("exploration_c must be non-negative");
        }
        if let Some(t) = self.expansion_time_s {
            if !(t > 0.0 && t.is_finite()) {
                return bad("expansion_time_s must be positive");
            }
        }
        Ok(())
    }
}

/// s·v/n + c·sqrt(ln N / n).
pub fn uct(s_r: f64, v_r: f64, n_r: u64, n_parent: u64, c: f64) -> Result<f64, SearchError> {
    if n_r < 1 || n_parent < 1 {
        return Err(SearchError::Domain(format!(
            "visit counts must be at least 1 (n_r={n_r}, N={n_parent})"
        )));
    }
    let n = n_r as f64;
    Ok(s_r * v_r / n + c * ((n_parent as f64).ln() / n).sqrt())
}

pub fn uct_score(r: &RxnNode, n_parent: u64, c: f64) -> Result<f64, SearchError> {
    uct(r.score, r.value, r.visit_count, n_parent, c)
}

/// Live counters a running search publishes; `cancel` asks it to stop.
#[derive(Debug, Default)]
pub struct Progress {
    pub chemicals: AtomicUsize,
    pub iterations: AtomicUsize,
    pub routes: AtomicUsize,
    pub cancel: AtomicBool,
}

impl Progress {
    pub fn snapshot(&self) -> ProgressSnapshot {
        ProgressSnapshot {
            chemicals: self.chemicals.load(Ordering::Relaxed),
            iterations: self.iterations.load(Ordering::Relaxed),
            routes: self.routes.load(Ordering::Relaxed),
        }
    }

    pub fn cancelled(&self) -> bool {
        self.cancel.load(Ordering::Relaxed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct ProgressSnapshot {
    pub chemicals: usize,
    pub iterations: usize,
    pub routes: usize,
}

/// What a search needs from the outside world.
#[derive(Clone, Copy)]
pub struct SearchContext<'a> {
    pub strategy: &'a dyn ExpansionStrategy,
    pub buyables: &'a dyn BuyableView,
    pub bans: Option<&'a BanList>,
    pub progress: Option<&'a Progress>,
}

impl<'a> SearchContext<'a> {
    pub fn new(strategy: &'a dyn ExpansionStrategy, buyables: &'a dyn BuyableView) -> Self {
        SearchContext {
            strategy,
            buyables,
            bans: None,
            progress: None,
        }
    }
}

/// Dispatch on `cfg.algorithm`.
pub fn search(target: &str, cfg: &SearchConfig, ctx: &SearchContext) -> Result<SearchGraph, SearchError> {
    match cfg.algorithm {
        Algorithm::Mcts => mcts_search(target, cfg, ctx),
        Algorithm::RetroStar => retro_star_search(target, cfg, ctx),
    }
}
