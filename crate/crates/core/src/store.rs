//! Template store and precedent reaction corpus, both loaded from JSON lines.

use retroplan_chem::fingerprint::{DEFAULT_RADIUS, DEFAULT_WIDTH};
use retroplan_chem::{
    canonicalize, default_fingerprint, CanonicalSmiles, Fingerprint, RetroTemplate, TemplateRecord,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreError {
    #[error("line {line}: {cause}")]
    BadLine { line: usize, cause: String },
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("reaction {reaction} cites unknown template {template}")]
    UnknownTemplate { reaction: String, template: String },
}

fn bad(line: usize, cause: impl ToString) -> StoreError {
    StoreError::BadLine {
        line,
        cause: cause.to_string(),
    }
}

/// Ingested templates with their popularity prior.
#[derive(Debug, Clone, Default)]
pub struct TemplateStore {
    templates: Vec<RetroTemplate>,
    index: HashMap<String, usize>,
    total_count: u64,
}

impl TemplateStore {
    pub fn new(templates: Vec<RetroTemplate>) -> Result<Self, StoreError> {
        let mut store = TemplateStore::default();
        for t in templates {
            store.insert(t)?;
        }
        Ok(store)
    }

    /// Parse JSON lines. Blank lines are skipped; any bad record fails the
    /// whole load with its 1-based line number.
    pub fn from_jsonl(text: &str) -> Result<Self, StoreError> {
        let mut store = TemplateStore::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: TemplateRecord = serde_json::from_str(line).map_err(|e| bad(i + 1, e))?;
            let t = RetroTemplate::from_record(&rec).map_err(|e| bad(i + 1, format!("{}: {e}", rec.id)))?;
            store.insert(t).map_err(|e| bad(i + 1, e))?;
        }
        Ok(store)
    }

    fn insert(&mut self, t: RetroTemplate) -> Result<(), StoreError> {
        if self.index.contains_key(&t.id) {
            return Err(StoreError::DuplicateId(t.id));
        }
        self.index.insert(t.id.clone(), self.templates.len());
        self.total_count += t.count;
        self.templates.push(t);
        Ok(())
    }

    /// Add or replace templates by id.
    pub fn merge(&mut self, other: TemplateStore) {
        for t in other.templates {
            match self.index.get(&t.id) {
                Some(&i) => {
                    self.total_count = self.total_count - self.templates[i].count + t.count;
                    self.templates[i] = t;
                }
                None => self.insert(t).expect("id checked"),
            }
        }
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for t in &self.templates {
            out.push_str(&serde_json::to_string(&t.to_record()).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn templates(&self) -> &[RetroTemplate] {
        &self.templates
    }

    pub fn get(&self, id: &str) -> Option<&RetroTemplate> {
        self.index.get(id).map(|&i| &self.templates[i])
    }

    /// count(t) / sum of all counts.
    pub fn prior(&self, id: &str) -> Option<f64> {
        let t = self.get(id)?;
        Some(t.count as f64 / self.total_count as f64)
    }

    /// Templates by descending prior, store order among equals.
    pub fn ranked(&self) -> Vec<(&RetroTemplate, f64)> {
        let mut out: Vec<(&RetroTemplate, f64)> = self
            .templates
            .iter()
            .map(|t| (t, t.count as f64 / self.total_count as f64))
            .collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1));
        out
    }
}

/// One line of the corpus file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusLine {
    pub reaction_id: String,
    pub rxn_smiles: String,
    pub template_id: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusReaction {
    pub reaction_id: String,
    pub reactants: Vec<CanonicalSmiles>,
    pub product: CanonicalSmiles,
    pub template_id: String,
    pub product_fp: Fingerprint,
    pub reactants_fp: Fingerprint,
}

impl CorpusReaction {
    pub fn new(
        reaction_id: &str,
        reactants: &[&str],
        product: &str,
        template_id: &str,
    ) -> Result<Self, String> {
        let product = canonicalize(product).map_err(|e| format!("product: {e}"))?;
        let reactants: BTreeSet<CanonicalSmiles> = reactants
            .iter()
            .map(|r| canonicalize(r).map_err(|e| format!("reactant {r}: {e}")))
            .collect::<Result<_, _>>()?;
        if reactants.is_empty() {
            return Err("no reactants".into());
        }
        let reactants: Vec<CanonicalSmiles> = reactants.into_iter().collect();
        Ok(CorpusReaction {
            reaction_id: reaction_id.to_string(),
            product_fp: default_fingerprint(&product.to_mol()),
            reactants_fp: union_fingerprint(&reactants),
            reactants,
            product,
            template_id: template_id.to_string(),
        })
    }

    pub fn to_line(&self) -> CorpusLine {
        let reactants: Vec<&str> = self.reactants.iter().map(|r| r.as_str()).collect();
        CorpusLine {
            reaction_id: self.reaction_id.clone(),
            rxn_smiles: format!("{}>>{}", reactants.join("."), self.product),
            template_id: self.template_id.clone(),
        }
    }
}

/// Bitwise OR of the default fingerprints of every member.
pub fn union_fingerprint(set: &[CanonicalSmiles]) -> Fingerprint {
    set.iter()
        .map(|s| default_fingerprint(&s.to_mol()))
        .reduce(|a, b| a.union(&b).expect("default widths agree"))
        .unwrap_or_else(|| Fingerprint::empty(DEFAULT_WIDTH, DEFAULT_RADIUS))
}

/// Precedent reactions with precomputed fingerprints.
#[derive(Debug, Clone, Default)]
pub struct ReactionCorpus {
    records: Vec<CorpusReaction>,
    index: HashMap<String, usize>,
}

impl ReactionCorpus {
    pub fn new(records: Vec<CorpusReaction>) -> Result<Self, StoreError> {
        let mut corpus = ReactionCorpus::default();
        for r in records {
            corpus.insert(r)?;
        }
        Ok(corpus)
    }

    pub fn from_jsonl(text: &str) -> Result<Self, StoreError> {
        let mut corpus = ReactionCorpus::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: CorpusLine = serde_json::from_str(line).map_err(|e| bad(i + 1, e))?;
            let (lhs, rhs) = rec
                .rxn_smiles
                .split_once(">>")
                .ok_or_else(|| bad(i + 1, "rxn_smiles lacks '>>'"))?;
            let reactants: Vec<&str> = lhs.split('.').filter(|s| !s.is_empty()).collect();
            let r = CorpusReaction::new(&rec.reaction_id, &reactants, rhs, &rec.template_id)
                .map_err(|e| bad(i + 1, format!("{}: {e}", rec.reaction_id)))?;
            corpus.insert(r).map_err(|e| bad(i + 1, e))?;
        }
        Ok(corpus)
    }

    fn insert(&mut self, r: CorpusReaction) -> Result<(), StoreError> {
        if self.index.contains_key(&r.reaction_id) {
            return Err(StoreError::DuplicateId(r.reaction_id));
        }
        self.index.insert(r.reaction_id.clone(), self.records.len());
        self.records.push(r);
        Ok(())
    }

    /// Add or replace reactions by id.
    pub fn merge(&mut self, other: ReactionCorpus) {
        for r in other.records {
            match self.index.get(&r.reaction_id) {
                Some(&i) => self.records[i] = r,
                None => self.insert(r).expect("id checked"),
            }
        }
    }

    /// Every template id must resolve in `store`.
    pub fn validate(&self, store: &TemplateStore) -> Result<(), StoreError> {
        for r in &self.records {
            if store.get(&r.template_id).is_none() {
                return Err(StoreError::UnknownTemplate {
                    reaction: r.reaction_id.clone(),
                    template: r.template_id.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(&r.to_line()).expect("line serializes"));
            out.push('\n');
        }
        out
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[CorpusReaction] {
        &self.records
    }

    pub fn get(&self, reaction_id: &str) -> Option<&CorpusReaction> {
        self.index.get(reaction_id).map(|&i| &self.records[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEMPLATES: &str = include_str!("../../../data/templates.jsonl");
    const CORPUS: &str = include_str!("../../../data/corpus.jsonl");

    #[test]
    fn bundled_data_loads_and_resolves() {
        let store = TemplateStore::from_jsonl(TEMPLATES).unwrap();
        let corpus = ReactionCorpus::from_jsonl(CORPUS).unwrap();
        assert_eq!(store.len(), 17);
        assert_eq!(corpus.len(), 75);
        corpus.validate(&store).unwrap();
        let total: f64 = store.ranked().iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bad_template_line_is_reported() {
        let text = format!("{}\n\n{{\"id\":\"x\",\"retro_smarts\":\"[C:1]C\",\"count\":1,\"references\":[]}}\n", TEMPLATES.lines().next().unwrap());
        match TemplateStore::from_jsonl(&text) {
            Err(StoreError::BadLine { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn corpus_round_trips_through_jsonl() {
        let corpus = ReactionCorpus::from_jsonl(CORPUS).unwrap();
        let again = ReactionCorpus::from_jsonl(&corpus.to_jsonl()).unwrap();
        assert_eq!(corpus.records(), again.records());
    }
}
