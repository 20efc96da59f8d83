//! Chemicals and reactions a user never wants to see suggested.

use crate::one_step::{reaction_key, Suggestion};
use retroplan_chem::{canonicalize, CanonicalSmiles};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BanError {
    #[error("cannot parse {text:?}: {cause}")]
    Unparsable { text: String, cause: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct BanList {
    pub user_id: String,
    pub banned_chemicals: BTreeSet<CanonicalSmiles>,
    /// Canonical `precursors>>product` keys.
    pub banned_reactions: BTreeSet<String>,
}

fn canon(text: &str) -> Result<CanonicalSmiles, BanError> {
    canonicalize(text.trim()).map_err(|e| BanError::Unparsable {
        text: text.to_string(),
        cause: e.to_string(),
    })
}

/// Canonical key for `a.b>>p`. Precursors are sorted and deduplicated.
pub fn canonical_reaction_key(text: &str) -> Result<String, BanError> {
    let (lhs, rhs) = text.split_once(">>").ok_or_else(|| BanError::Unparsable {
        text: text.to_string(),
        cause: "expected precursors>>product".into(),
    })?;
    let precursors: Vec<CanonicalSmiles> = lhs
        .split('.')
        .filter(|s| !s.trim().is_empty())
        .map(canon)
        .collect::<Result<_, _>>()?;
    if precursors.is_empty() {
        return Err(BanError::Unparsable {
            text: text.to_string(),
            cause: "no precursors".into(),
        });
    }
    Ok(reaction_key(&precursors, &canon(rhs)?))
}

impl BanList {
    pub fn new(user_id: &str) -> Self {
        BanList {
            user_id: user_id.to_string(),
            ..BanList::default()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.banned_chemicals.is_empty() && self.banned_reactions.is_empty()
    }

    /// Returns the canonical entry.
    pub fn ban_chemical(&mut self, smiles: &str) -> Result<CanonicalSmiles, BanError> {
        let c = canon(smiles)?;
        self.banned_chemicals.insert(c.clone());
        Ok(c)
    }

    /// Returns whether an entry was removed.
    pub fn unban_chemical(&mut self, smiles: &str) -> Result<bool, BanError> {
        Ok(self.banned_chemicals.remove(&canon(smiles)?))
    }

    pub fn ban_reaction(&mut self, rxn: &str) -> Result<String, BanError> {
        let k = canonical_reaction_key(rxn)?;
        self.banned_reactions.insert(k.clone());
        Ok(k)
    }

    pub fn unban_reaction(&mut self, rxn: &str) -> Result<bool, BanError> {
        Ok(self.banned_reactions.remove(&canonical_reaction_key(rxn)?))
    }

    pub fn is_chemical_banned(&self, smiles: &CanonicalSmiles) -> bool {
        self.banned_chemicals.contains(smiles)
    }

    /// Whether `s` may be offered as a way to make `product`.
    pub fn allows(&self, product: &CanonicalSmiles, s: &Suggestion) -> bool {
        !s.precursors.iter().any(|p| self.banned_chemicals.contains(p))
            && !self.banned_reactions.contains(&s.reaction_key(product))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spellings_collapse() {
        let mut b = BanList::new("u");
        b.ban_chemical("OCC").unwrap();
        b.ban_chemical("CCO").unwrap();
        assert_eq!(b.banned_chemicals.len(), 1);
        b.ban_reaction("OCC.CC(O)=O>>CCOC(C)=O").unwrap();
        b.ban_reaction("CC(=O)O.CCO>>CC(=O)OCC").unwrap();
        assert_eq!(b.banned_reactions.len(), 1);
        assert!(b.unban_chemical("C(C)O").unwrap());
        assert!(b.banned_chemicals.is_empty());
    }

    #[test]
    fn bad_entries_are_rejected() {
        let mut b = BanList::new("u");
        assert!(b.ban_chemical("C1CC").is_err());
        assert!(b.ban_reaction("CCO").is_err());
        assert!(b.is_empty());
    }

    #[test]
    fn allows_checks_both_lists() {
        let p = CanonicalSmiles::new("CCOC(C)=O").unwrap();
        let s = Suggestion::manual([CanonicalSmiles::new("CCO").unwrap(), CanonicalSmiles::new("CC(=O)O").unwrap()]);
        let mut b = BanList::new("u");
        assert!(b.allows(&p, &s));
        b.ban_reaction("CCO.CC(=O)O>>CCOC(C)=O").unwrap();
        assert!(!b.allows(&p, &s));
        let mut b = BanList::new("u");
        b.ban_chemical("OCC").unwrap();
        assert!(!b.allows(&p, &s));
    }
}
