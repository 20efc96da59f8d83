use super::{Progress, SearchConfig, SearchContext, SearchError};
use crate::one_step::{StrategyKind, Suggestion};
use retroplan_chem::CanonicalSmiles;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::atomic::Ordering;
use std::time::Instant;

const VALUE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ChemNode {
    pub smiles: CanonicalSmiles,
    /// N when acting as a parent.
    pub visit_count: u64,
    pub buyable: bool,
    pub price: Option<f64>,
    /// Shallowest depth at which the node has been reached.
    pub depth: usize,
    pub expanded: bool,
    pub value: f64,
    /// Height of the shortest known proof; `Some` means proven.
    pub proof_height: Option<usize>,
    pub reactions: Vec<usize>,
    /// Reactions that list this chemical as a precursor.
    pub parents: Vec<usize>,
}

impl ChemNode {
    pub fn proven(&self) -> bool {
        self.proof_height.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RxnNode {
    /// Canonical `precursors>>product` key.
    pub id: String,
    pub parent: usize,
    pub children: Vec<usize>,
    /// s_r
    pub score: f64,
    /// n_r
    pub visit_count: u64,
    /// v_r, the mean of the children's values.
    pub value: f64,
    pub plausibility: f64,
    pub template_ids: BTreeSet<String>,
    pub strategy_provenance: BTreeSet<StrategyKind>,
    pub precedent_reaction_ids: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    #[default]
    Running,
    Exhausted,
    FirstRoute,
    ChemicalLimit,
    TimeLimit,
    Cancelled,
    TargetBuyable,
}

#[derive(Debug, Clone)]
pub struct SearchGraph {
    chemicals: Vec<ChemNode>,
    reactions: Vec<RxnNode>,
    index: HashMap<CanonicalSmiles, usize>,
    pub(crate) config: SearchConfig,
    pub(crate) iterations: usize,
    pub(crate) termination: Termination,
}

impl SearchGraph {
    pub(crate) fn new(root: CanonicalSmiles, price: Option<f64>, config: SearchConfig) -> Self {
        let mut g = SearchGraph {
            chemicals: Vec::new(),
            reactions: Vec::new(),
            index: HashMap::new(),
            config,
            iterations: 0,
            termination: Termination::Running,
        };
        g.push_chemical(root, price, 0);
        g
    }

    fn push_chemical(&mut self, smiles: CanonicalSmiles, price: Option<f64>, depth: usize) -> usize {
        let i = self.chemicals.len();
        let buyable = price.is_some();
        self.index.insert(smiles.clone(), i);
        self.chemicals.push(ChemNode {
            smiles,
            visit_count: 0,
            buyable,
            price,
            depth,
            expanded: false,
            value: if buyable { 1.0 } else { 0.0 },
            proof_height: if buyable { Some(0) } else { None },
            reactions: Vec::new(),
            parents: Vec::new(),
        });
        i
    }

    pub fn root(&self) -> &ChemNode {
        &self.chemicals[0]
    }

    pub fn chemicals(&self) -> &[ChemNode] {
        &self.chemicals
    }

    pub fn reactions(&self) -> &[RxnNode] {
        &self.reactions
    }

    pub fn chemical(&self, i: usize) -> &ChemNode {
        &self.chemicals[i]
    }

    pub fn reaction(&self, i: usize) -> &RxnNode {
        &self.reactions[i]
    }

    pub fn find(&self, smiles: &CanonicalSmiles) -> Option<usize> {
        self.index.get(smiles).copied()
    }

    pub fn config(&self) -> &SearchConfig {
        &self.config
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    /// The root has a proof that fits within the depth limit.
    pub fn solved(&self) -> bool {
        self.root().proof_height.is_some_and(|h| h <= self.config.max_depth)
    }

    /// Unexpanded, not buyable, and shallow enough to expand.
    pub fn is_frontier(&self, i: usize) -> bool {
        let c = &self.chemicals[i];
        !c.buyable && !c.expanded && c.depth < self.config.max_depth
    }

    pub(crate) fn from_parts(
        chemicals: Vec<ChemNode>,
        reactions: Vec<RxnNode>,
        config: SearchConfig,
        iterations: usize,
        termination: Termination,
    ) -> Self {
        let index = chemicals.iter().enumerate().map(|(i, c)| (c.smiles.clone(), i)).collect();
        let mut g = SearchGraph {
            chemicals,
            reactions,
            index,
            config,
            iterations,
            termination,
        };
        for i in 0..g.chemicals.len() {
            g.chemicals[i].proof_height = g.chemicals[i].buyable.then_some(0);
        }
        for i in 0..g.chemicals.len() {
            if g.chemicals[i].buyable {
                for k in 0..g.chemicals[i].parents.len() {
                    let p = g.reactions[g.chemicals[i].parents[k]].parent;
                    g.refresh_proofs(p);
                }
            }
        }
        g
    }

    /// Lower the recorded depth of `i` and everything below it.
    fn relax_depth(&mut self, i: usize, depth: usize) {
        let mut queue = VecDeque::from([(i, depth)]);
        while let Some((x, d)) = queue.pop_front() {
            if d >= self.chemicals[x].depth {
                continue;
            }
            self.chemicals[x].depth = d;
            for &r in &self.chemicals[x].reactions {
                for &y in &self.reactions[r].children {
                    queue.push_back((y, d + 1));
                }
            }
        }
    }

    /// Expand chemical `i` with ranked suggestions. Returns false when the
    /// chemical limit stopped the expansion early.
    pub(crate) fn expand(&mut self, i: usize, suggestions: Vec<Suggestion>, ctx: &SearchContext) -> bool {
        let cfg = self.config.clone();
        self.chemicals[i].expanded = true;
        let product = self.chemicals[i].smiles.clone();
        let depth = self.chemicals[i].depth;
        let mut fits = true;
        let mut seen: BTreeSet<String> = BTreeSet::new();
        let usable = suggestions.into_iter().filter(|s| {
            !s.precursors.is_empty()
                && !s.precursors.contains(&product)
                && ctx.bans.is_none_or(|b| b.allows(&product, s))
                && seen.insert(s.reaction_key(&product))
        });
        for s in usable.take(cfg.max_branching) {
            let new = s.precursors.iter().filter(|p| !self.index.contains_key(*p)).count();
            if self.chemicals.len() + new > cfg.max_chemicals {
                fits = false;
                break;
            }
            let r = self.reactions.len();
            let mut children = Vec::with_capacity(s.precursors.len());
            for p in &s.precursors {
                let c = match self.index.get(p) {
                    Some(&c) => {
                        self.relax_depth(c, depth + 1);
                        c
                    }
                    None => {
                        let price = ctx.buyables.buyable_price(p).filter(|x| *x <= cfg.max_price);
                        self.push_chemical(p.clone(), price, depth + 1)
                    }
                };
                self.chemicals[c].parents.push(r);
                children.push(c);
            }
            self.reactions.push(RxnNode {
                id: s.reaction_key(&product),
                parent: i,
                children,
                score: s.rank_score,
                visit_count: 1,
                value: 0.0,
                plausibility: s.plausibility,
                template_ids: s.template_ids,
                strategy_provenance: s.strategy_provenance,
                precedent_reaction_ids: s.precedent_reaction_ids,
            });
            self.chemicals[i].reactions.push(r);
        }
        self.refresh_values(i);
        self.refresh_proofs(i);
        if let Some(p) = ctx.progress {
            p.chemicals.store(self.chemicals.len(), Ordering::Relaxed);
        }
        fits
    }

    fn reaction_value(&self, r: usize) -> f64 {
        let ch = &self.reactions[r].children;
        ch.iter().map(|&c| self.chemicals[c].value).sum::<f64>() / ch.len() as f64
    }

    fn chemical_value(&self, i: usize) -> f64 {
        let c = &self.chemicals[i];
        if c.buyable {
            1.0
        } else {
            c.reactions
                .iter()
                .map(|&r| self.reactions[r].score * self.reactions[r].value)
                .fold(0.0, f64::max)
        }
    }

    /// Recompute v_r and chemical values from `start` upward until nothing
    /// changes.
    fn refresh_values(&mut self, start: usize) {
        let mut queue = VecDeque::from([start]);
        let mut first = true;
        while let Some(x) = queue.pop_front() {
            for k in 0..self.chemicals[x].reactions.len() {
                let r = self.chemicals[x].reactions[k];
                self.reactions[r].value = self.reaction_value(r);
            }
            let v = self.chemical_value(x);
            if first || (v - self.chemicals[x].value).abs() > VALUE_EPS {
                first = false;
                self.chemicals[x].value = v;
                for &r in &self.chemicals[x].parents {
                    queue.push_back(self.reactions[r].parent);
                }
            }
        }
    }

    fn reaction_height(&self, r: usize) -> Option<usize> {
        let mut h = 0;
        for &c in &self.reactions[r].children {
            h = h.max(self.chemicals[c].proof_height?);
        }
        Some(h + 1)
    }

    /// Propagate shorter proofs upward. Heights only ever decrease, so a
    /// proven node stays proven.
    fn refresh_proofs(&mut self, start: usize) {
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            if self.chemicals[x].buyable {
                continue;
            }
            let best = self.chemicals[x]
                .reactions
                .iter()
                .filter_map(|&r| self.reaction_height(r))
                .min();
            let old = self.chemicals[x].proof_height;
            if best.is_some() && (old.is_none() || best < old) {
                self.chemicals[x].proof_height = best;
                for &r in &self.chemicals[x].parents {
                    queue.push_back(self.reactions[r].parent);
                }
            }
        }
    }

    /// MCTS bookkeeping along a selected path.
    pub(crate) fn visit(&mut self, path: &[(usize, usize)], leaf: usize) {
        for &(c, r) in path {
            self.chemicals[c].visit_count += 1;
            self.reactions[r].visit_count += 1;
        }
        self.chemicals[leaf].visit_count += 1;
    }

    /// Check the stored values against a fresh recomputation.
    pub fn values_consistent(&self) -> bool {
        let rx = (0..self.reactions.len()).all(|r| (self.reactions[r].value - self.reaction_value(r)).abs() < 1e-9);
        let cx = (0..self.chemicals.len()).all(|i| {
            let c = &self.chemicals[i];
            let expect = if c.buyable || c.expanded { self.chemical_value(i) } else { 0.0 };
            (c.value - expect).abs() < 1e-9 && (0.0..=1.0).contains(&c.value)
        });
        rx && cx
    }
}

/// Shared driver state: clock, limits, cancellation.
pub(crate) struct Budget {
    started: Instant,
    limit: Option<f64>,
}

impl Budget {
    pub(crate) fn new(cfg: &SearchConfig) -> Self {
        Budget {
            started: Instant::now(),
            limit: cfg.expansion_time_s,
        }
    }

    /// Reason to stop before the next expansion, if any.
    pub(crate) fn stop(&self, g: &SearchGraph, progress: Option<&Progress>) -> Option<Termination> {
        if progress.is_some_and(|p| p.cancelled()) {
            return Some(Termination::Cancelled);
        }
        if g.config.return_first && g.solved() {
            return Some(Termination::FirstRoute);
        }
        if g.chemicals.len() >= g.config.max_chemicals {
            return Some(Termination::ChemicalLimit);
        }
        if self.limit.is_some_and(|l| self.started.elapsed().as_secs_f64() >= l) {
            return Some(Termination::TimeLimit);
        }
        None
    }
}

/// Parse the target and build the root, or report it as already solved.
pub(crate) fn start(target: &str, cfg: &SearchConfig, ctx: &SearchContext) -> Result<SearchGraph, SearchError> {
    cfg.validate()?;
    let root = CanonicalSmiles::new(target).map_err(|e| SearchError::TargetUnparsable(e.to_string()))?;
    let price = ctx.buyables.buyable_price(&root).filter(|p| *p <= cfg.max_price);
    let mut g = SearchGraph::new(root, price, cfg.clone());
    if price.is_some() {
        g.termination = Termination::TargetBuyable;
    }
    if let Some(p) = ctx.progress {
        p.chemicals.store(1, Ordering::Relaxed);
    }
    Ok(g)
}

/// Expand one chemical through the strategy; returns false if the chemical
/// limit was hit.
pub(crate) fn expand_node(g: &mut SearchGraph, i: usize, ctx: &SearchContext) -> bool {
    let suggestions = ctx.strategy.expand(&g.chemicals[i].smiles, ctx.buyables);
    g.iterations += 1;
    if let Some(p) = ctx.progress {
        p.iterations.store(g.iterations, Ordering::Relaxed);
    }
    g.expand(i, suggestions, ctx)
}
