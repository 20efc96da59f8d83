//! Circular (Morgan-style) fingerprints and Tanimoto similarity.
//!
//! Environment identifiers are built with 64-bit FNV-1a over little-endian
//! words, so bit positions are identical on every platform and process.

use crate::element::Element;
use crate::mol::MolGraph;
use std::collections::BTreeSet;
use thiserror::Error;

pub const DEFAULT_RADIUS: u32 = 2;
pub const DEFAULT_WIDTH: u32 = 2048;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FingerprintError {
    #[error("fingerprint widths differ ({0} vs {1})")]
    WidthMismatch(u32, u32),
}

#[derive(Debug, Clone, Copy)]
struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(FNV_OFFSET)
    }

    fn word(mut self, w: u64) -> Self {
        for byte in w.to_le_bytes() {
            self.0 ^= u64::from(byte);
            self.0 = self.0.wrapping_mul(FNV_PRIME);
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    words: Vec<u64>,
    radius: u32,
    width: u32,
}

impl Fingerprint {
    /// Empty fingerprint. `width` must be a power of two no smaller than 64.
    pub fn empty(width: u32, radius: u32) -> Self {
        assert!(
            width >= 64 && width.is_power_of_two(),
            "fingerprint width must be a power of two >= 64, got {width}"
        );
        Fingerprint {
            words: vec![0; width as usize / 64],
            radius,
            width,
        }
    }

    pub fn from_positions(width: u32, radius: u32, positions: impl IntoIterator<Item = u32>) -> Self {
        let mut fp = Fingerprint::empty(width, radius);
        for p in positions {
            fp.set(p);
        }
        fp
    }

    pub fn set(&mut self, bit: u32) {
        assert!(bit < self.width);
        self.words[(bit / 64) as usize] |= 1 << (bit % 64);
    }

    pub fn contains(&self, bit: u32) -> bool {
        bit < self.width && self.words[(bit / 64) as usize] & (1 << (bit % 64)) != 0
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn positions(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.width).filter(|b| self.contains(*b))
    }

    /// Bitwise OR.
    pub fn union(&self, other: &Fingerprint) -> Result<Fingerprint, FingerprintError> {
        self.check_width(other)?;
        Ok(Fingerprint {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect(),
            radius: self.radius.max(other.radius),
            width: self.width,
        })
    }

    fn check_width(&self, other: &Fingerprint) -> Result<(), FingerprintError> {
        if self.width == other.width {
            Ok(())
        } else {
            Err(FingerprintError::WidthMismatch(self.width, other.width))
        }
    }
}

/// |a∩b| / |a∪b|, and 1.0 when both are empty.
pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<f64, FingerprintError> {
    a.check_width(b)?;
    let (mut inter, mut union) = (0u32, 0u32);
    for (x, y) in a.words.iter().zip(&b.words) {
        inter += (x & y).count_ones();
        union += (x | y).count_ones();
    }
    Ok(if union == 0 {
        1.0
    } else {
        f64::from(inter) / f64::from(union)
    })
}

/// Unfolded environment identifiers for every heavy atom at radius
/// `0..=radius`.
pub fn morgan_environment_ids(mol: &MolGraph, radius: u32) -> BTreeSet<u64> {
    let heavy: Vec<bool> = mol.atoms().iter().map(|a| a.element != Element::H).collect();
    let mut ids: Vec<u64> = (0..mol.atom_count())
        .map(|i| {
            let a = mol.atom(i);
            let explicit_h = mol
                .neighbors(i)
                .iter()
                .filter(|(n, _)| !heavy[*n])
                .count() as u64;
            Fnv::new()
                .word(u64::from(a.element.atomic_number()))
                .word((mol.degree(i) as u64) - explicit_h)
                .word(u64::from(a.hydrogens) + explicit_h)
                .word(a.charge as i64 as u64)
                .word(u64::from(a.isotope.unwrap_or(0)))
                .word(u64::from(a.aromatic))
                .word(u64::from(mol.is_ring_atom(i)))
                .0
        })
        .collect();
    let mut out: BTreeSet<u64> = (0..mol.atom_count()).filter(|i| heavy[*i]).map(|i| ids[i]).collect();
    for r in 1..=radius {
        let next: Vec<u64> = (0..mol.atom_count())
            .map(|i| {
                let mut env: Vec<(u64, u64)> = mol
                    .neighbors(i)
                    .iter()
                    .filter(|(n, _)| heavy[*n])
                    .map(|&(n, b)| (u64::from(mol.bond(b).kind.code()), ids[n]))
                    .collect();
                env.sort_unstable();
                let mut h = Fnv::new().word(u64::from(r)).word(ids[i]);
                for (code, id) in env {
                    h = h.word(code).word(id);
                }
                h.0
            })
            .collect();
        ids = next;
        out.extend((0..mol.atom_count()).filter(|i| heavy[*i]).map(|i| ids[i]));
    }
    out
}

pub fn morgan_fingerprint(mol: &MolGraph, radius: u32, width: u32) -> Fingerprint {
    let mut fp = Fingerprint::empty(width, radius);
    for id in morgan_environment_ids(mol, radius) {
        fp.set((id & u64::from(width - 1)) as u32);
    }
    fp
}

/// Fingerprint with the default radius and width.
pub fn default_fingerprint(mol: &MolGraph) -> Fingerprint {
    morgan_fingerprint(mol, DEFAULT_RADIUS, DEFAULT_WIDTH)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse_smiles;

    fn fp(s: &str) -> Fingerprint {
        default_fingerprint(&parse_smiles(s).unwrap())
    }

    #[test]
    fn spelling_does_not_matter() {
        assert_eq!(fp("OCC"), fp("CCO"));
    }

    #[test]
    fn ethanol_radius_zero_has_three_environments() {
        assert_eq!(morgan_environment_ids(&parse_smiles("CCO").unwrap(), 0).len(), 3);
    }

    #[test]
    fn carbon_and_nitrogen_are_disjoint() {
        let (c, n) = (
            morgan_fingerprint(&parse_smiles("C").unwrap(), 0, 2048),
            morgan_fingerprint(&parse_smiles("N").unwrap(), 0, 2048),
        );
        assert_eq!(tanimoto(&c, &n).unwrap(), 0.0);
        assert!(!c.is_empty() && !n.is_empty());
    }

    #[test]
    fn tanimoto_arithmetic() {
        let a = Fingerprint::from_positions(64, 0, [1, 2, 3]);
        let b = Fingerprint::from_positions(64, 0, [2, 3, 4]);
        assert_eq!(tanimoto(&a, &b).unwrap(), 0.5);
        assert_eq!(tanimoto(&a, &a).unwrap(), 1.0);
        let e = Fingerprint::empty(64, 0);
        assert_eq!(tanimoto(&e, &e).unwrap(), 1.0);
        assert_eq!(
            tanimoto(&a, &Fingerprint::empty(128, 0)),
            Err(FingerprintError::WidthMismatch(64, 128))
        );
    }

    #[test]
    fn known_bits_are_stable() {
        // Pinned so an accidental hash change shows up as a test failure.
        let ids: Vec<u64> = morgan_environment_ids(&parse_smiles("C").unwrap(), 0).into_iter().collect();
        assert_eq!(ids.len(), 1);
        assert_eq!(ids[0], 14997193027947895367);
    }
}
