//! Route metrics, ordering and filtering.

use crate::search::{Route, TreeNode};
use retroplan_chem::{canonicalize, molecular_weight, CanonicalSmiles};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct RouteMetrics {
    pub depth: usize,
    pub reaction_count: usize,
    pub longest_linear_sequence: usize,
    pub avg_plausibility: f64,
    pub avg_template_score: f64,
    /// MW(target) / sum of leaf MWs counted per use; absent when a weight
    /// is unknown.
    pub atom_economy: Option<f64>,
    /// Sum of leaf prices for one gram each.
    pub starting_material_cost: f64,
    /// Some leaf had no price and was charged at the cap.
    pub cost_is_lower_bound: bool,
}

#[derive(Default)]
struct Tally {
    reactions: usize,
    plausibility: f64,
    score: f64,
    leaf_mw: Option<f64>,
    cost: f64,
    lower_bound: bool,
}

fn walk(n: &TreeNode, max_price: f64, t: &mut Tally) -> usize {
    match n {
        TreeNode::Chemical {
            smiles,
            attributes,
            children,
        } => {
            if children.is_empty() {
                match attributes.price_per_g {
                    Some(p) => t.cost += p,
                    None => {
                        t.cost += max_price;
                        t.lower_bound = true;
                    }
                }
                let mw = molecular_weight(&smiles.to_mol()).ok();
                t.leaf_mw = match (t.leaf_mw, mw) {
                    (Some(a), Some(b)) => Some(a + b),
                    _ => None,
                };
                0
            } else {
                children.iter().map(|c| walk(c, max_price, t)).max().unwrap_or(0)
            }
        }
        TreeNode::Reaction {
            attributes, children, ..
        } => {
            t.reactions += 1;
            t.plausibility += attributes.plausibility;
            t.score += attributes.score;
            1 + children.iter().map(|c| walk(c, max_price, t)).max().unwrap_or(0)
        }
    }
}

/// Metrics of one route. Leaves without a price count at `max_price`.
/// A route with no reactions has averages of 1.
pub fn compute_metrics(tree: &TreeNode, max_price: f64) -> RouteMetrics {
    let mut t = Tally {
        leaf_mw: Some(0.0),
        ..Tally::default()
    };
    let lls = walk(tree, max_price, &mut t);
    let target_mw = tree.smiles().and_then(|s| molecular_weight(&s.to_mol()).ok());
    let atom_economy = match (target_mw, t.leaf_mw) {
        (Some(a), Some(b)) if b > 0.0 => Some(a / b),
        _ => None,
    };
    let avg = |sum: f64| if t.reactions == 0 { 1.0 } else { sum / t.reactions as f64 };
    RouteMetrics {
        depth: lls,
        reaction_count: t.reactions,
        longest_linear_sequence: lls,
        avg_plausibility: avg(t.plausibility),
        avg_template_score: avg(t.score),
        atom_economy,
        starting_material_cost: t.cost,
        cost_is_lower_bound: t.lower_bound,
    }
}

/// Fewest reactions first, then higher average plausibility, then higher
/// average template score. Stable.
pub fn sort_routes(mut routes: Vec<Route>) -> Vec<Route> {
    routes.sort_by(|a, b| {
        let (x, y) = (&a.metrics, &b.metrics);
        x.reaction_count
            .cmp(&y.reaction_count)
            .then(y.avg_plausibility.total_cmp(&x.avg_plausibility))
            .then(y.avg_template_score.total_cmp(&x.avg_template_score))
    });
    routes
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct RouteFilter {
    pub must_include: Vec<String>,
    pub must_exclude: Vec<String>,
    pub max_depth: Option<usize>,
    pub min_avg_plausibility: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathwayError {
    #[error("cannot parse {text:?}: {cause}")]
    Parse { text: String, cause: String },
}

fn canon_set(items: &[String]) -> Result<BTreeSet<CanonicalSmiles>, PathwayError> {
    items
        .iter()
        .map(|s| {
            canonicalize(s).map_err(|e| PathwayError::Parse {
                text: s.clone(),
                cause: e.to_string(),
            })
        })
        .collect()
}

/// Keep routes meeting every criterion. Order is preserved.
pub fn filter_routes(routes: Vec<Route>, criteria: &RouteFilter) -> Result<Vec<Route>, PathwayError> {
    let include = canon_set(&criteria.must_include)?;
    let exclude = canon_set(&criteria.must_exclude)?;
    Ok(routes
        .into_iter()
        .filter(|r| {
            let present: BTreeSet<&CanonicalSmiles> = r.chemicals().into_iter().collect();
            include.iter().all(|s| present.contains(s))
                && !exclude.iter().any(|s| present.contains(s))
                && criteria.max_depth.is_none_or(|d| r.metrics.depth <= d)
                && criteria.min_avg_plausibility.is_none_or(|p| r.metrics.avg_plausibility >= p)
        })
        .collect())
}
