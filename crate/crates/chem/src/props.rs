//! Size and weight descriptors.

use crate::element::Element;
use crate::mol::MolGraph;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PropertyError {
    #[error("no atomic weight for element {0}")]
    UnknownAtomicWeight(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MolProperties {
    pub heavy_atom_count: usize,
    pub ring_count: usize,
    /// g/mol, implicit hydrogens included.
    pub molecular_weight: f64,
}

pub fn molecular_weight(mol: &MolGraph) -> Result<f64, PropertyError> {
    let h = Element::H.atomic_weight().unwrap();
    let mut total = 0.0;
    for atom in mol.atoms() {
        let w = atom
            .element
            .atomic_weight()
            .ok_or_else(|| PropertyError::UnknownAtomicWeight(atom.element.symbol().to_string()))?;
        total += w + h * f64::from(atom.hydrogens);
    }
    Ok(total)
}

pub fn mol_properties(mol: &MolGraph) -> Result<MolProperties, PropertyError> {
    Ok(MolProperties {
        heavy_atom_count: mol.heavy_atom_count(),
        ring_count: mol.ring_count(),
        molecular_weight: molecular_weight(mol)?,
    })
}

/// Heavy atoms plus rings; the size term used when reranking precursors.
pub fn complexity(mol: &MolGraph) -> usize {
    mol.heavy_atom_count() + mol.ring_count()
}
