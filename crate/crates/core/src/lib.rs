//! Retrosynthesis planning on top of `retroplan-chem`: one-step expansion,
//! the building-block catalog, multi-step search and route analysis.

pub mod banlist;
pub mod buyables;
pub mod one_step;
pub mod pathway;
pub mod search;
pub mod settings;
pub mod store;

pub use banlist::{BanError, BanList};
pub use buyables::{BuyableView, Catalog, CatalogEntry, CatalogError, CatalogFormat, DEFAULT_MAX_PRICE};
pub use one_step::{ExpansionStrategy, OneStep, OneStepError, StrategyConfig, StrategyKind, Suggestion};
pub use pathway::{compute_metrics, filter_routes, sort_routes, PathwayError, RouteFilter, RouteMetrics};
pub use search::{
    enumerate_routes, mcts_search, retro_star_search, search, uct_score, Algorithm, Progress, Route, SearchConfig,
    SearchContext, SearchError, SearchGraph, SearchResult,
};
pub use settings::{Settings, SettingsError, Stores};
pub use store::{ReactionCorpus, StoreError, TemplateStore};
