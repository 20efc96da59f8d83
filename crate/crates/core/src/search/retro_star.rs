use super::graph::{expand_node, start, Budget, SearchGraph, Termination};
use super::{SearchConfig, SearchContext, SearchError};
use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

/// Best-first proof search. Reaction cost is −ln s_r, buyable molecules cost
/// nothing and unexpanded molecules are estimated at zero. Each iteration
/// expands the frontier molecule on the cheapest estimated proof of the
/// target.
pub fn retro_star_search(target: &str, cfg: &SearchConfig, ctx: &SearchContext) -> Result<SearchGraph, SearchError> {
    let mut g = start(target, cfg, ctx)?;
    if g.termination() == Termination::TargetBuyable {
        return Ok(g);
    }
    let budget = Budget::new(cfg);
    loop {
        if let Some(t) = budget.stop(&g, ctx.progress) {
            g.termination = t;
            break;
        }
        let Some(next) = select(&g) else {
            g.termination = Termination::Exhausted;
            break;
        };
        let fits = expand_node(&mut g, next, ctx);
        g.visit(&[], next);
        if !fits {
            g.termination = Termination::ChemicalLimit;
            break;
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Cost(f64, usize);

impl Eq for Cost {}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

fn reaction_cost(g: &SearchGraph, r: usize) -> f64 {
    -g.reaction(r).score.ln()
}

/// Minimum proof cost of every chemical (Knuth's generalization of
/// Dijkstra to AND-OR graphs). Infinite when no proof can exist.
pub(crate) fn proof_costs(g: &SearchGraph) -> Vec<f64> {
    let n = g.chemicals().len();
    let mut cost = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut pending: Vec<usize> = g.reactions().iter().map(|r| r.children.len()).collect();
    let mut heap = BinaryHeap::new();
    for (i, c) in cost.iter_mut().enumerate() {
        if g.chemical(i).buyable || g.is_frontier(i) {
            *c = 0.0;
            heap.push(Reverse(Cost(0.0, i)));
        }
    }
    while let Some(Reverse(Cost(_, x))) = heap.pop() {
        if done[x] {
            continue;
        }
        done[x] = true;
        for &r in &g.chemical(x).parents {
            pending[r] -= 1;
            if pending[r] == 0 {
                let total = reaction_cost(g, r) + g.reaction(r).children.iter().map(|&y| cost[y]).sum::<f64>();
                let p = g.reaction(r).parent;
                if !done[p] && total < cost[p] {
                    cost[p] = total;
                    heap.push(Reverse(Cost(total, p)));
                }
            }
        }
    }
    cost
}

/// Frontier chemical with the smallest estimated total cost of a target
/// proof passing through it; lowest index on ties.
fn select(g: &SearchGraph) -> Option<usize> {
    let v = proof_costs(g);
    if !v[0].is_finite() {
        return None;
    }
    let n = g.chemicals().len();
    let mut through = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    through[0] = v[0];
    let mut heap = BinaryHeap::from([Reverse(Cost(v[0], 0))]);
    let mut best: Option<(f64, usize)> = None;
    while let Some(Reverse(Cost(t, x))) = heap.pop() {
        if done[x] || best.is_some_and(|(bt, _)| t > bt) {
            continue;
        }
        done[x] = true;
        if g.is_frontier(x) {
            if best.is_none_or(|(bt, bi)| t < bt || (t == bt && x < bi)) {
                best = Some((t, x));
            }
            continue;
        }
        for &r in &g.chemical(x).reactions {
            let rc = reaction_cost(g, r) + g.reaction(r).children.iter().map(|&y| v[y]).sum::<f64>();
            if !rc.is_finite() {
                continue;
            }
            let tr = t - v[x] + rc;
            for &y in &g.reaction(r).children {
                if !done[y] && tr < through[y] {
                    through[y] = tr;
                    heap.push(Reverse(Cost(tr, y)));
                }
            }
        }
    }
    best.map(|(_, i)| i)
}
