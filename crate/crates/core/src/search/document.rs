//! Nested `{type, smiles|id, attributes, children}` documents for graphs and
//! routes.

use super::graph::{ChemNode, RxnNode, SearchGraph, Termination};
use super::{SearchConfig, SearchError};
use crate::one_step::StrategyKind;
use retroplan_chem::CanonicalSmiles;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct ChemAttributes {
    pub visit_count: u64,
    pub buyable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub price_per_g: Option<f64>,
    pub proven: bool,
    pub depth: usize,
    pub expanded: bool,
    pub value: f64,
    /// Set on every occurrence of a shared chemical after the first; its
    /// children are written only at the first occurrence.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub repeat: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct RxnAttributes {
    pub score: f64,
    pub visit_count: u64,
    pub value: f64,
    pub plausibility: f64,
    pub template_ids: BTreeSet<String>,
    pub strategy_provenance: BTreeSet<StrategyKind>,
    pub precedent_reaction_ids: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum TreeNode {
    Chemical {
        smiles: CanonicalSmiles,
        attributes: ChemAttributes,
        children: Vec<TreeNode>,
    },
    Reaction {
        id: String,
        attributes: RxnAttributes,
        children: Vec<TreeNode>,
    },
}

impl TreeNode {
    pub fn children(&self) -> &[TreeNode] {
        match self {
            TreeNode::Chemical { children, .. } | TreeNode::Reaction { children, .. } => children,
        }
    }

    pub fn smiles(&self) -> Option<&CanonicalSmiles> {
        match self {
            TreeNode::Chemical { smiles, .. } => Some(smiles),
            TreeNode::Reaction { .. } => None,
        }
    }
}

pub(crate) fn chem_attributes(c: &ChemNode) -> ChemAttributes {
    ChemAttributes {
        visit_count: c.visit_count,
        buyable: c.buyable,
        price_per_g: c.price,
        proven: c.proven(),
        depth: c.depth,
        expanded: c.expanded,
        value: c.value,
        repeat: false,
    }
}

pub(crate) fn rxn_attributes(r: &RxnNode) -> RxnAttributes {
    RxnAttributes {
        score: r.score,
        visit_count: r.visit_count,
        value: r.value,
        plausibility: r.plausibility,
        template_ids: r.template_ids.clone(),
        strategy_provenance: r.strategy_provenance.clone(),
        precedent_reaction_ids: r.precedent_reaction_ids.clone(),
    }
}

/// Whole-graph export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct GraphDocument {
    pub target: CanonicalSmiles,
    pub config: SearchConfig,
    pub termination: Termination,
    pub iterations: usize,
    pub solved: bool,
    pub chemical_count: usize,
    pub reaction_count: usize,
    pub tree: TreeNode,
}

impl SearchGraph {
    pub fn to_document(&self) -> GraphDocument {
        let mut written = vec![false; self.chemicals().len()];
        GraphDocument {
            target: self.root().smiles.clone(),
            config: self.config().clone(),
            termination: self.termination(),
            iterations: self.iterations(),
            solved: self.solved(),
            chemical_count: self.chemicals().len(),
            reaction_count: self.reactions().len(),
            tree: self.write_chem(0, &mut written),
        }
    }

    fn write_chem(&self, i: usize, written: &mut [bool]) -> TreeNode {
        let c = self.chemical(i);
        let mut attributes = chem_attributes(c);
        let mut children = Vec::new();
        if written[i] {
            attributes.repeat = true;
        } else {
            written[i] = true;
            for &r in &c.reactions {
                let rx = self.reaction(r);
                children.push(TreeNode::Reaction {
                    id: rx.id.clone(),
                    attributes: rxn_attributes(rx),
                    children: rx.children.iter().map(|&y| self.write_chem(y, written)).collect(),
                });
            }
        }
        TreeNode::Chemical {
            smiles: c.smiles.clone(),
            attributes,
            children,
        }
    }

    /// Rebuild a graph from its export.
    pub fn from_document(doc: &GraphDocument) -> Result<SearchGraph, SearchError> {
        let mut b = Builder::default();
        b.chem(&doc.tree, None)?;
        if b.chemicals.is_empty() || b.chemicals[0].smiles != doc.target {
            return Err(SearchError::BadDocument("root does not match target".into()));
        }
        Ok(SearchGraph::from_parts(
            b.chemicals,
            b.reactions,
            doc.config.clone(),
            doc.iterations,
            doc.termination,
        ))
    }
}

#[derive(Default)]
struct Builder {
    chemicals: Vec<ChemNode>,
    reactions: Vec<RxnNode>,
    index: HashMap<CanonicalSmiles, usize>,
}

impl Builder {
    fn chem(&mut self, node: &TreeNode, parent_rxn: Option<usize>) -> Result<usize, SearchError> {
        let TreeNode::Chemical {
            smiles,
            attributes: a,
            children,
        } = node
        else {
            return Err(SearchError::BadDocument("expected a chemical node".into()));
        };
        let i = match self.index.get(smiles) {
            Some(&i) => i,
            None => {
                if a.repeat {
                    return Err(SearchError::BadDocument(format!("repeat of unseen chemical {smiles}")));
                }
                let i = self.chemicals.len();
                self.index.insert(smiles.clone(), i);
                self.chemicals.push(ChemNode {
                    smiles: smiles.clone(),
                    visit_count: a.visit_count,
                    buyable: a.buyable,
                    price: a.price_per_g,
                    depth: a.depth,
                    expanded: a.expanded,
                    value: a.value,
                    proof_height: None,
                    reactions: Vec::new(),
                    parents: Vec::new(),
                });
                i
            }
        };
        if let Some(r) = parent_rxn {
            self.chemicals[i].parents.push(r);
        }
        if !a.repeat {
            for child in children {
                let TreeNode::Reaction {
                    id,
                    attributes: ra,
                    children: kids,
                } = child
                else {
                    return Err(SearchError::BadDocument("expected a reaction node".into()));
                };
                let r = self.reactions.len();
                self.reactions.push(RxnNode {
                    id: id.clone(),
                    parent: i,
                    children: Vec::new(),
                    score: ra.score,
                    visit_count: ra.visit_count,
                    value: ra.value,
                    plausibility: ra.plausibility,
                    template_ids: ra.template_ids.clone(),
                    strategy_provenance: ra.strategy_provenance.clone(),
                    precedent_reaction_ids: ra.precedent_reaction_ids.clone(),
                });
                self.chemicals[i].reactions.push(r);
                for k in kids {
                    let y = self.chem(k, Some(r))?;
                    self.reactions[r].children.push(y);
                }
            }
        }
        Ok(i)
    }
}
