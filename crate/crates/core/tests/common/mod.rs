#![allow(dead_code)]

use retroplan_chem::CanonicalSmiles;
use retroplan_core::search::TreeNode;
use retroplan_core::{BuyableView, ExpansionStrategy, Suggestion};
use retroplan_oracles::synthetic::SyntheticStore;
use std::collections::BTreeMap;

pub fn cs(s: &str) -> CanonicalSmiles {
    CanonicalSmiles::new(s).unwrap()
}

/// Fixed expansion table keyed by canonical SMILES.
#[derive(Default)]
pub struct Table(pub BTreeMap<CanonicalSmiles, Vec<Suggestion>>);

impl Table {
    pub fn add(&mut self, product: &str, precursors: &[&str], score: f64) -> &mut Self {
        let mut s = Suggestion::manual(precursors.iter().map(|p| cs(p)));
        s.rank_score = score;
        s.plausibility = score;
        self.0.entry(cs(product)).or_default().push(s);
        self
    }

    pub fn from_synthetic(store: &SyntheticStore) -> Self {
        let mut t = Table::default();
        for (product, sets) in &store.table {
            for (set, score) in sets {
                let refs: Vec<&str> = set.iter().map(String::as_str).collect();
                t.add(product, &refs, *score);
            }
        }
        t
    }
}

impl ExpansionStrategy for Table {
    fn expand(&self, target: &CanonicalSmiles, _buyables: &dyn BuyableView) -> Vec<Suggestion> {
        self.0.get(target).cloned().unwrap_or_default()
    }
}

pub fn prices(items: &[(&str, f64)]) -> BTreeMap<CanonicalSmiles, f64> {
    items.iter().map(|(s, p)| (cs(s), *p)).collect()
}

/// Same signature format as the brute-force oracle.
pub fn signature(n: &TreeNode) -> String {
    match n {
        TreeNode::Chemical { smiles, children, .. } => match children.first() {
            None => smiles.to_string(),
            Some(rxn) => {
                let mut kids: Vec<String> = rxn.children().iter().map(signature).collect();
                kids.sort();
                format!("{smiles}<{}>", kids.join(","))
            }
        },
        TreeNode::Reaction { .. } => panic!("routes start at a chemical"),
    }
}
