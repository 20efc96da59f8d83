//! One-step retrosynthetic expansion: candidate generation from the template
//! prior and from similar precedents, plausibility scoring, merging and
//! reranking, clustering.

use crate::buyables::BuyableView;
use crate::store::{union_fingerprint, ReactionCorpus, TemplateStore};
use retroplan_chem::{complexity, default_fingerprint, tanimoto, CanonicalSmiles, Fingerprint, MolGraph};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    TemplateRelevance,
    Retrosim,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 2] = [StrategyKind::TemplateRelevance, StrategyKind::Retrosim];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::TemplateRelevance => "template_relevance",
            StrategyKind::Retrosim => "retrosim",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = OneStepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| OneStepError::UnknownStrategy(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OneStepError {
    #[error("retrosim needs a non-empty reaction corpus")]
    EmptyCorpus,
    #[error("template relevance needs a non-empty template store")]
    EmptyStore,
    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),
    #[error("reacting atoms unavailable for this suggestion")]
    Unavailable,
    #[error("invalid strategy config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct StrategyConfig {
    pub max_num_templates: usize,
    pub max_cum_prob: f64,
    pub retrosim_k: usize,
    pub filter_threshold: f64,
    pub top_n_returned: usize,
    pub cluster_cutoff: f64,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig {
            max_num_templates: 1000,
            max_cum_prob: 0.999,
            retrosim_k: 10,
            filter_threshold: 0.001,
            top_n_returned: 5,
            cluster_cutoff: 0.3,
        }
    }
}

impl StrategyConfig {
    pub fn validate(&self) -> Result<(), OneStepError> {
        let bad = |m: &str| Err(OneStepError::InvalidConfig(m.to_string()));
        if !(self.max_cum_prob > 0.0 && self.max_cum_prob <= 1.0) {
            return bad("max_cum_prob must be in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.filter_threshold) {
            return bad("filter_threshold must be in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.cluster_cutoff) {
            return bad("cluster_cutoff must be in [0, 1]");
        }
        if self.max_num_templates == 0 || self.retrosim_k == 0 || self.top_n_returned == 0 {
            return bad("counts must be positive");
        }
        Ok(())
    }
}

/// One proposed precursor set for a target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Suggestion {
    pub precursors: Vec<CanonicalSmiles>,
    pub rank_score: f64,
    pub strategy_provenance: BTreeSet<StrategyKind>,
    pub template_ids: BTreeSet<String>,
    pub precedent_reaction_ids: BTreeSet<String>,
    pub plausibility: f64,
    /// Product atoms matched by the template; absent for manual entries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reacting_atoms: Option<BTreeSet<usize>>,
    #[serde(default)]
    pub cluster_id: Option<usize>,
}

impl Suggestion {
    /// A user-supplied precursor set with no template behind it.
    pub fn manual(precursors: impl IntoIterator<Item = CanonicalSmiles>) -> Self {
        let set: BTreeSet<CanonicalSmiles> = precursors.into_iter().collect();
        Suggestion {
            precursors: set.into_iter().collect(),
            rank_score: 1.0,
            strategy_provenance: BTreeSet::new(),
            template_ids: BTreeSet::new(),
            precedent_reaction_ids: BTreeSet::new(),
            plausibility: 1.0,
            reacting_atoms: None,
            cluster_id: None,
        }
    }

    /// Dedup key: the sorted precursor set joined with '.'.
    pub fn key(&self) -> String {
        let parts: Vec<&str> = self.precursors.iter().map(|p| p.as_str()).collect();
        parts.join(".")
    }

    pub fn reaction_key(&self, product: &CanonicalSmiles) -> String {
        reaction_key(&self.precursors, product)
    }
}

pub fn reaction_key(precursors: &[CanonicalSmiles], product: &CanonicalSmiles) -> String {
    let mut parts: Vec<&str> = precursors.iter().map(|p| p.as_str()).collect();
    parts.sort_unstable();
    parts.dedup();
    format!("{}>>{}", parts.join("."), product)
}

/// Apply templates in order of descending prior until `max_num_templates`
/// have been tried or the tried priors sum past `max_cum_prob`.
pub fn expand_template_relevance(target: &MolGraph, cfg: &StrategyConfig, store: &TemplateStore) -> Vec<Suggestion> {
    let mut out = Vec::new();
    let mut cum = 0.0;
    for (applied, (t, prior)) in store.ranked().into_iter().enumerate() {
        if applied >= cfg.max_num_templates || cum > cfg.max_cum_prob {
            break;
        }
        cum += prior;
        for set in t.apply(target).sets {
            out.push(Suggestion {
                precursors: set.precursors,
                rank_score: prior,
                strategy_provenance: BTreeSet::from([StrategyKind::TemplateRelevance]),
                template_ids: BTreeSet::from([t.id.clone()]),
                precedent_reaction_ids: t.references.iter().cloned().collect(),
                plausibility: prior,
                reacting_atoms: Some(set.reacting_atoms.into_iter().collect()),
                cluster_id: None,
            });
        }
    }
    out
}

/// Reuse the templates of the `retrosim_k` most similar corpus products.
/// Score is product similarity times precursor/reactant similarity.
pub fn expand_retrosim(
    target: &MolGraph,
    cfg: &StrategyConfig,
    corpus: &ReactionCorpus,
    store: &TemplateStore,
) -> Result<Vec<Suggestion>, OneStepError> {
    if corpus.is_empty() {
        return Err(OneStepError::EmptyCorpus);
    }
    let fp = default_fingerprint(target);
    let mut neighbors: Vec<(usize, f64)> = corpus
        .records()
        .iter()
        .enumerate()
        .map(|(i, r)| (i, tanimoto(&fp, &r.product_fp).expect("default widths")))
        .collect();
    neighbors.sort_by(|a, b| b.1.total_cmp(&a.1));
    neighbors.truncate(cfg.retrosim_k);
    let mut out = Vec::new();
    for (i, sim) in neighbors {
        if sim <= 0.0 {
            continue;
        }
        let precedent = &corpus.records()[i];
        let Some(t) = store.get(&precedent.template_id) else {
            continue;
        };
        for set in t.apply(target).sets {
            let rsim = tanimoto(&union_fingerprint(&set.precursors), &precedent.reactants_fp).expect("default widths");
            let score = sim * rsim;
            if score <= 0.0 {
                continue;
            }
            out.push(Suggestion {
                precursors: set.precursors,
                rank_score: score,
                strategy_provenance: BTreeSet::from([StrategyKind::Retrosim]),
                template_ids: BTreeSet::from([t.id.clone()]),
                precedent_reaction_ids: BTreeSet::from([precedent.reaction_id.clone()]),
                plausibility: score,
                reacting_atoms: Some(set.reacting_atoms.into_iter().collect()),
                cluster_id: None,
            });
        }
    }
    out.sort_by(|a, b| b.rank_score.total_cmp(&a.rank_score));
    Ok(out)
}

/// Best analogy to any precedent of the suggestion's templates (or its own
/// precedents). Falls back to the template prior, then to the rank score.
pub fn score_plausibility(target: &MolGraph, s: &Suggestion, corpus: &ReactionCorpus, store: &TemplateStore) -> f64 {
    score_with_fp(&default_fingerprint(target), s, corpus, store)
}

fn score_with_fp(target_fp: &Fingerprint, s: &Suggestion, corpus: &ReactionCorpus, store: &TemplateStore) -> f64 {
    let mut ids: BTreeSet<&str> = s.precedent_reaction_ids.iter().map(String::as_str).collect();
    for t in s.template_ids.iter().filter_map(|id| store.get(id)) {
        ids.extend(t.references.iter().map(String::as_str));
    }
    let precedents: Vec<_> = ids.into_iter().filter_map(|id| corpus.get(id)).collect();
    if precedents.is_empty() {
        let prior = s
            .template_ids
            .iter()
            .filter_map(|id| store.prior(id))
            .reduce(f64::max);
        return prior.unwrap_or(s.rank_score);
    }
    let precursor_fp = union_fingerprint(&s.precursors);
    precedents
        .iter()
        .map(|r| {
            tanimoto(target_fp, &r.product_fp).expect("default widths")
                * tanimoto(&precursor_fp, &r.reactants_fp).expect("default widths")
        })
        .fold(0.0, f64::max)
}

/// Dedup by precursor set, union metadata, drop implausible entries, then
/// order by rank score, buyable fraction, complexity and first appearance.
pub fn merge_and_rerank(lists: &[Vec<Suggestion>], buyables: &dyn BuyableView, cfg: &StrategyConfig) -> Vec<Suggestion> {
    let mut merged: Vec<Suggestion> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for s in lists.iter().flatten() {
        match index.get(&s.key()) {
            Some(&i) => {
                let m = &mut merged[i];
                m.rank_score = m.rank_score.max(s.rank_score);
                m.plausibility = m.plausibility.max(s.plausibility);
                m.strategy_provenance.extend(s.strategy_provenance.iter().copied());
                m.template_ids.extend(s.template_ids.iter().cloned());
                m.precedent_reaction_ids.extend(s.precedent_reaction_ids.iter().cloned());
                if m.reacting_atoms.is_none() {
                    m.reacting_atoms = s.reacting_atoms.clone();
                }
            }
            None => {
                index.insert(s.key(), merged.len());
                let mut s = s.clone();
                s.cluster_id = None;
                merged.push(s);
            }
        }
    }
    merged.retain(|s| s.plausibility >= cfg.filter_threshold);
    let mut keyed: Vec<(f64, usize, Suggestion)> = merged
        .into_iter()
        .map(|s| {
            let buyable = s.precursors.iter().filter(|p| buyables.is_buyable(p)).count();
            let fraction = buyable as f64 / s.precursors.len() as f64;
            let cx = s.precursors.iter().map(|p| complexity(&p.to_mol())).sum();
            (fraction, cx, s)
        })
        .collect();
    keyed.sort_by(|a, b| {
        b.2.rank_score
            .total_cmp(&a.2.rank_score)
            .then(b.0.total_cmp(&a.0))
            .then(a.1.cmp(&b.1))
    });
    keyed.into_iter().map(|(_, _, s)| s).collect()
}

/// Single-linkage clusters over union fingerprints; two sets link when
/// their Tanimoto distance is at most `cutoff`. Clusters are numbered by
/// first appearance.
pub fn cluster_precursors(mut list: Vec<Suggestion>, cutoff: f64) -> Vec<Suggestion> {
    let fps: Vec<Fingerprint> = list.iter().map(|s| union_fingerprint(&s.precursors)).collect();
    let mut parent: Vec<usize> = (0..list.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..list.len() {
        for j in i + 1..list.len() {
            let d = 1.0 - tanimoto(&fps[i], &fps[j]).expect("default widths");
            if d <= cutoff {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut numbers: HashMap<usize, usize> = HashMap::new();
    for (i, s) in list.iter_mut().enumerate() {
        let root = find(&mut parent, i);
        let next = numbers.len();
        s.cluster_id = Some(*numbers.entry(root).or_insert(next));
    }
    list
}

/// The template match footprint recorded on the suggestion.
pub fn reacting_atoms(target: &MolGraph, s: &Suggestion) -> Result<BTreeSet<usize>, OneStepError> {
    match &s.reacting_atoms {
        Some(atoms) if atoms.iter().all(|&a| a < target.atom_count()) => Ok(atoms.clone()),
        _ => Err(OneStepError::Unavailable),
    }
}

/// Anything that proposes precursor sets for a molecule. The search only
/// sees this interface.
pub trait ExpansionStrategy: Send + Sync {
    fn expand(&self, target: &CanonicalSmiles, buyables: &dyn BuyableView) -> Vec<Suggestion>;
}

/// The configured strategies over shared read-only stores.
#[derive(Debug, Clone)]
pub struct OneStep {
    templates: Arc<TemplateStore>,
    corpus: Arc<ReactionCorpus>,
    strategies: Vec<StrategyKind>,
    config: StrategyConfig,
}

impl OneStep {
    pub fn new(
        templates: Arc<TemplateStore>,
        corpus: Arc<ReactionCorpus>,
        strategies: &[StrategyKind],
        config: StrategyConfig,
    ) -> Result<Self, OneStepError> {
        config.validate()?;
        let strategies: Vec<StrategyKind> = strategies
            .iter()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if strategies.contains(&StrategyKind::Retrosim) && corpus.is_empty() {
            return Err(OneStepError::EmptyCorpus);
        }
        if templates.is_empty() {
            return Err(OneStepError::EmptyStore);
        }
        Ok(OneStep {
            templates,
            corpus,
            strategies,
            config,
        })
    }

    pub fn config(&self) -> &StrategyConfig {
        &self.config
    }

    pub fn strategies(&self) -> &[StrategyKind] {
        &self.strategies
    }

    pub fn templates(&self) -> &TemplateStore {
        &self.templates
    }

    pub fn corpus(&self) -> &ReactionCorpus {
        &self.corpus
    }

    /// Same stores, different strategies or thresholds.
    pub fn with(&self, strategies: &[StrategyKind], config: StrategyConfig) -> Result<Self, OneStepError> {
        OneStep::new(self.templates.clone(), self.corpus.clone(), strategies, config)
    }

    /// Run every strategy, score plausibility, merge and rerank. Suggestions
    /// that list the target among their own precursors are discarded.
    pub fn suggest(&self, target: &MolGraph, buyables: &dyn BuyableView) -> Vec<Suggestion> {
        let fp = default_fingerprint(target);
        let own = CanonicalSmiles::from_mol(target);
        let mut lists = Vec::new();
        for kind in &self.strategies {
            let mut list = match kind {
                StrategyKind::TemplateRelevance => expand_template_relevance(target, &self.config, &self.templates),
                StrategyKind::Retrosim => {
                    expand_retrosim(target, &self.config, &self.corpus, &self.templates).expect("corpus checked in new")
                }
            };
            list.retain(|s| !s.precursors.contains(&own));
            for s in &mut list {
                s.plausibility = score_with_fp(&fp, s, &self.corpus, &self.templates);
            }
            lists.push(list);
        }
        merge_and_rerank(&lists, buyables, &self.config)
    }
}

impl ExpansionStrategy for OneStep {
    fn expand(&self, target: &CanonicalSmiles, buyables: &dyn BuyableView) -> Vec<Suggestion> {
        self.suggest(&target.to_mol(), buyables)
    }
}
