//! Default-valence hydrogen model shared by the SMILES parser, the writer
//! and template rewriting.

use crate::element::Element;

/// Hydrogen count implied for an unbracketed atom with the given bond
/// valence. Aromatic atoms reserve one unit for the ring π system, using the
/// lowest normal valence (so `c` in benzene gets one H, `n` in pyridine none).
/// `None` means the bond valence exceeds every allowed valence.
pub fn implied_hydrogens(element: Element, charge: i8, aromatic: bool, bond_valence: u8) -> Option<u8> {
    let Some(valences) = element.valences(charge) else {
        return Some(0);
    };
    let max = *valences.last().expect("non-empty valence list");
    if bond_valence > max {
        return None;
    }
    if aromatic {
        let lowest = valences[0];
        return Some(lowest.saturating_sub(bond_valence + 1));
    }
    valences
        .iter()
        .find(|v| **v >= bond_valence)
        .map(|v| v - bond_valence)
}

/// Whether bonds plus hydrogens fit within the largest allowed valence.
/// Element/charge combinations outside the table always pass.
pub fn valence_ok(element: Element, charge: i8, bond_valence: u8, hydrogens: u8) -> bool {
    match element.valences(charge) {
        Some(v) => u16::from(bond_valence) + u16::from(hydrogens) <= u16::from(*v.last().unwrap()),
        None => true,
    }
}

/// Lowest allowed valence, used when hydrogens are rebalanced after a
/// charge change.
pub fn default_valence(element: Element, charge: i8) -> Option<u8> {
    element.valences(charge).map(|v| v[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aliphatic_hydrogens() {
        assert_eq!(implied_hydrogens(Element::C, 0, false, 0), Some(4));
        assert_eq!(implied_hydrogens(Element::C, 0, false, 3), Some(1));
        assert_eq!(implied_hydrogens(Element::C, 0, false, 5), None);
        assert_eq!(implied_hydrogens(Element::N, 0, false, 4), Some(1));
        assert_eq!(implied_hydrogens(Element::S, 0, false, 3), Some(1));
        assert_eq!(implied_hydrogens(Element::N, 1, false, 3), Some(1));
        assert_eq!(implied_hydrogens(Element::O, -1, false, 1), Some(0));
    }

    #[test]
    fn aromatic_hydrogens() {
        assert_eq!(implied_hydrogens(Element::C, 0, true, 2), Some(1));
        assert_eq!(implied_hydrogens(Element::C, 0, true, 3), Some(0));
        assert_eq!(implied_hydrogens(Element::N, 0, true, 2), Some(0));
        assert_eq!(implied_hydrogens(Element::S, 0, true, 2), Some(0));
        assert_eq!(implied_hydrogens(Element::C, 0, true, 4), Some(0));
    }

    #[test]
    fn unknown_combinations_are_unchecked() {
        let na = Element::from_symbol("Na").unwrap();
        assert_eq!(implied_hydrogens(na, 1, false, 0), Some(0));
        assert!(valence_ok(na, 1, 6, 0));
        assert!(!valence_ok(Element::C, 0, 4, 1));
    }
}
