use super::document::{chem_attributes, rxn_attributes, GraphDocument, TreeNode};
use super::graph::SearchGraph;
use super::SearchConfig;
use crate::pathway::{compute_metrics, sort_routes, RouteMetrics};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use std::sync::atomic::Ordering;

/// Upper bound on partial routes held for any one chemical during
/// enumeration. Reached only by graphs with combinatorially many proofs.
pub const ENUMERATION_CAP: usize = 50_000;

/// One synthesis tree from the target down to buyable leaves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Route {
    pub metrics: RouteMetrics,
    pub tree: TreeNode,
}

impl Route {
    pub fn from_tree(tree: TreeNode, max_price: f64) -> Self {
        Route {
            metrics: compute_metrics(&tree, max_price),
            tree,
        }
    }

    /// Every chemical in the route, root first, depth-first.
    pub fn chemicals(&self) -> Vec<&retroplan_chem::CanonicalSmiles> {
        fn walk<'a>(n: &'a TreeNode, out: &mut Vec<&'a retroplan_chem::CanonicalSmiles>) {
            if let Some(s) = n.smiles() {
                out.push(s);
            }
            for c in n.children() {
                walk(c, out);
            }
        }
        let mut out = Vec::new();
        walk(&self.tree, &mut out);
        out
    }

    /// Leaves are buyable, no chemical repeats on a root-to-leaf path, and
    /// no path has more than `max_depth` reactions.
    pub fn is_valid(&self, cfg: &SearchConfig) -> bool {
        fn check(n: &TreeNode, path: &mut Vec<String>, depth: usize, cfg: &SearchConfig) -> bool {
            match n {
                TreeNode::Chemical {
                    smiles,
                    attributes,
                    children,
                } => {
                    if path.iter().any(|p| p == smiles.as_str()) {
                        return false;
                    }
                    match children.as_slice() {
                        [] => attributes.buyable && attributes.price_per_g.is_some_and(|p| p <= cfg.max_price),
                        [rxn] => {
                            path.push(smiles.to_string());
                            let ok = depth < cfg.max_depth && check(rxn, path, depth + 1, cfg);
                            path.pop();
                            ok
                        }
                        _ => false,
                    }
                }
                TreeNode::Reaction { children, .. } => {
                    !children.is_empty() && children.iter().all(|c| check(c, path, depth, cfg))
                }
            }
        }
        check(&self.tree, &mut Vec::new(), 0, cfg)
    }
}

/// All proven, acyclic subtrees rooted at the target whose leaves are
/// buyable, sorted by the route ordering and cut at `max_routes`.
pub fn enumerate_routes(g: &SearchGraph, cfg: &SearchConfig) -> Vec<Route> {
    let mut on_path = vec![false; g.chemicals().len()];
    let trees = routes_from(g, 0, 0, cfg.max_depth, &mut on_path);
    let routes: Vec<Route> = trees.into_iter().map(|t| Route::from_tree(t, cfg.max_price)).collect();
    let mut routes = sort_routes(routes);
    routes.truncate(cfg.max_routes);
    routes
}

fn routes_from(g: &SearchGraph, x: usize, depth: usize, max_depth: usize, on_path: &mut [bool]) -> Vec<TreeNode> {
    let c = g.chemical(x);
    if c.buyable {
        return vec![TreeNode::Chemical {
            smiles: c.smiles.clone(),
            attributes: chem_attributes(c),
            children: Vec::new(),
        }];
    }
    match c.proof_height {
        Some(h) if depth + h <= max_depth => {}
        _ => return Vec::new(),
    }
    on_path[x] = true;
    let mut out = Vec::new();
    'rxn: for &r in &c.reactions {
        let rx = g.reaction(r);
        if rx.children.iter().any(|&y| on_path[y] || !g.chemical(y).proven()) {
            continue;
        }
        let mut combos: Vec<Vec<TreeNode>> = vec![Vec::new()];
        for &y in &rx.children {
            let sub = routes_from(g, y, depth + 1, max_depth, on_path);
            if sub.is_empty() {
                continue 'rxn;
            }
            let mut next = Vec::new();
            'outer: for prefix in &combos {
                for s in &sub {
                    if next.len() >= ENUMERATION_CAP {
                        break 'outer;
                    }
                    let mut p = prefix.clone();
                    p.push(s.clone());
                    next.push(p);
                }
            }
            combos = next;
        }
        for children in combos {
            if out.len() >= ENUMERATION_CAP {
                break 'rxn;
            }
            out.push(TreeNode::Chemical {
                smiles: c.smiles.clone(),
                attributes: chem_attributes(c),
                children: vec![TreeNode::Reaction {
                    id: rx.id.clone(),
                    attributes: rxn_attributes(rx),
                    children,
                }],
            });
        }
    }
    on_path[x] = false;
    out
}

/// A finished search: the whole graph plus its sorted routes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct SearchResult {
    pub graph: GraphDocument,
    pub routes: Vec<Route>,
}

impl SearchResult {
    pub fn new(g: &SearchGraph, progress: Option<&super::Progress>) -> Self {
        SearchResult {
            routes: g.routes(progress),
            graph: g.to_document(),
        }
    }
}

impl SearchGraph {
    /// Enumerate with this graph's own config and publish the count.
    pub fn routes(&self, progress: Option<&super::Progress>) -> Vec<Route> {
        let routes = enumerate_routes(self, self.config());
        if let Some(p) = progress {
            p.routes.store(routes.len(), Ordering::Relaxed);
        }
        routes
    }
}
