use super::graph::{expand_node, start, Budget, SearchGraph, Termination};
use super::{uct, SearchConfig, SearchContext, SearchError};

/// Select-expand-update without rollouts.
///
/// Selection descends from the root to the reaction child with the best UCT
/// score, then to its lowest-value unproven chemical child, skipping subtrees
/// with nothing left to expand. The first unexpanded chemical reached is
/// expanded; visit counts along the path are then incremented.
pub fn mcts_search(target: &str, cfg: &SearchConfig, ctx: &SearchContext) -> Result<SearchGraph, SearchError> {
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
        let Some((path, leaf)) = select(&g) else {
            g.termination = Termination::Exhausted;
            break;
        };
        let fits = expand_node(&mut g, leaf, ctx);
        g.visit(&path, leaf);
        debug_assert!(g.values_consistent());
        if !fits {
            g.termination = Termination::ChemicalLimit;
            break;
        }
    }
    Ok(g)
}

/// Chemicals from which some frontier chemical can still be reached.
fn open_set(g: &SearchGraph) -> Vec<bool> {
    let mut open = vec![false; g.chemicals().len()];
    let mut stack: Vec<usize> = (0..open.len()).filter(|&i| g.is_frontier(i)).collect();
    for &i in &stack {
        open[i] = true;
    }
    while let Some(x) = stack.pop() {
        for &r in &g.chemical(x).parents {
            let p = g.reaction(r).parent;
            if !open[p] {
                open[p] = true;
                stack.push(p);
            }
        }
    }
    open
}

type Path = Vec<(usize, usize)>;

fn select(g: &SearchGraph) -> Option<(Path, usize)> {
    let open = open_set(g);
    if !open[0] {
        return None;
    }
    let mut best_depth = vec![usize::MAX; g.chemicals().len()];
    let mut path = Vec::new();
    descend(g, &open, 0, 0, &mut best_depth, &mut path).map(|leaf| (path, leaf))
}

/// Depth-bounded search in UCT order. A chemical is revisited only when
/// reached at a shallower depth than before, so every frontier node within
/// the depth limit is found if selection keeps failing elsewhere.
fn descend(
    g: &SearchGraph,
    open: &[bool],
    x: usize,
    d: usize,
    best_depth: &mut [usize],
    path: &mut Path,
) -> Option<usize> {
    if g.is_frontier(x) {
        return Some(x);
    }
    if d >= best_depth[x] || d + 1 >= g.config().max_depth {
        return None;
    }
    best_depth[x] = d;
    let node = g.chemical(x);
    let n_parent = node.visit_count.max(1);
    let c = g.config().exploration_c;
    let mut rxns: Vec<(f64, usize)> = node
        .reactions
        .iter()
        .filter(|&&r| g.reaction(r).children.iter().any(|&y| open[y]))
        .map(|&r| {
            let rx = g.reaction(r);
            let score = uct(rx.score, rx.value, rx.visit_count, n_parent, c).expect("counts start at 1");
            (score, r)
        })
        .collect();
    rxns.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for (_, r) in rxns {
        let mut kids: Vec<usize> = g.reaction(r).children.iter().copied().filter(|&y| open[y]).collect();
        kids.sort_by(|&a, &b| {
            let (ca, cb) = (g.chemical(a), g.chemical(b));
            ca.proven()
                .cmp(&cb.proven())
                .then(ca.value.total_cmp(&cb.value))
                .then(a.cmp(&b))
        });
        for y in kids {
            path.push((x, r));
            if let Some(leaf) = descend(g, open, y, d + 1, best_depth, path) {
                return Some(leaf);
            }
            path.pop();
        }
    }
    None
}
