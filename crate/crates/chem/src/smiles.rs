//! SMILES reader.
//!
//! Supports the organic subset, bracket atoms (isotope, chirality, hydrogen
//! count, charge, atom class), ring closures including `%nn`, branches,
//! disconnected components and directional bonds. Lowercase atoms are
//! trusted as aromatic; no perception or kekulization is performed. An
//! implicit bond between two aromatic atoms is aromatic when it lies in a
//! ring and single otherwise.

use crate::element::Element;
use crate::mol::{Atom, Bond, BondKind, DoubleBondStereo, MolGraph, StereoNeighbor, Tetrahedral};
use crate::valence::{implied_hydrogens, valence_ok};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmilesError {
    #[error("empty SMILES")]
    Empty,
    #[error("ring bond {label} opened at offset {offset} is never closed")]
    UnclosedRing { label: u32, offset: usize },
    #[error("unbalanced parenthesis at offset {offset}")]
    UnbalancedParenthesis { offset: usize },
    #[error("unknown element at offset {offset}")]
    UnknownElement { offset: usize },
    #[error("valence violation on atom at offset {offset}")]
    ValenceViolation { offset: usize },
    #[error("unexpected character {found:?} at offset {offset}")]
    UnexpectedChar { found: char, offset: usize },
    #[error("unexpected end of input at offset {offset}")]
    UnexpectedEnd { offset: usize },
    #[error("invalid bond at offset {offset}: {reason}")]
    InvalidBond { offset: usize, reason: &'static str },
}

impl SmilesError {
    /// Byte offset into the input where the problem was detected.
    pub fn offset(&self) -> usize {
        match self {
            SmilesError::Empty => 0,
            SmilesError::UnclosedRing { offset, .. }
            | SmilesError::UnbalancedParenthesis { offset }
            | SmilesError::UnknownElement { offset }
            | SmilesError::ValenceViolation { offset }
            | SmilesError::UnexpectedChar { offset, .. }
            | SmilesError::UnexpectedEnd { offset }
            | SmilesError::InvalidBond { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BondSym {
    Single,
    Double,
    Triple,
    Aromatic,
    Up,
    Down,
}

impl BondSym {
    fn from_byte(b: u8) -> Option<BondSym> {
        Some(match b {
            b'-' => BondSym::Single,
            b'=' => BondSym::Double,
            b'#' => BondSym::Triple,
            b':' => BondSym::Aromatic,
            b'/' => BondSym::Up,
            b'\\' => BondSym::Down,
            _ => return None,
        })
    }

    fn is_directional(self) -> bool {
        matches!(self, BondSym::Up | BondSym::Down)
    }
}

struct RawBond {
    a: usize,
    b: usize,
    sym: Option<BondSym>,
    /// `/` written in the a→b direction.
    up_from_a: Option<bool>,
    offset: usize,
}

struct OpenRing {
    atom: usize,
    sym: Option<BondSym>,
    slot: usize,
    offset: usize,
}

struct RawAtom {
    atom: Atom,
    bracket: bool,
    offset: usize,
    chiral: Option<bool>,
    order: Vec<Option<StereoNeighbor>>,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    atoms: Vec<RawAtom>,
    bonds: Vec<RawBond>,
    rings: BTreeMap<u32, OpenRing>,
}

/// Parse a SMILES string into a [`MolGraph`].
pub fn parse_smiles(text: &str) -> Result<MolGraph, SmilesError> {
    if text.trim().is_empty() {
        return Err(SmilesError::Empty);
    }
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        atoms: Vec::new(),
        bonds: Vec::new(),
        rings: BTreeMap::new(),
    };
    p.run()?;
    p.finish()
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn unexpected(&self, at: usize) -> SmilesError {
        match self.src.get(at) {
            Some(&c) => SmilesError::UnexpectedChar {
                found: c as char,
                offset: at,
            },
            None => SmilesError::UnexpectedEnd { offset: at },
        }
    }

    fn run(&mut self) -> Result<(), SmilesError> {
        let mut prev: Option<usize> = None;
        let mut pending: Option<(BondSym, usize)> = None;
        let mut branches: Vec<(usize, usize)> = Vec::new();

        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                b'(' => {
                    let Some(p) = prev else {
                        return Err(SmilesError::UnbalancedParenthesis { offset: start });
                    };
                    if pending.is_some() {
                        return Err(self.unexpected(start));
                    }
                    branches.push((p, start));
                    self.pos += 1;
                }
                b')' => {
                    if pending.is_some() {
                        return Err(self.unexpected(start));
                    }
                    let Some((p, _)) = branches.pop() else {
                        return Err(SmilesError::UnbalancedParenthesis { offset: start });
                    };
                    prev = Some(p);
                    self.pos += 1;
                }
                b'.' => {
                    if pending.is_some() {
                        return Err(self.unexpected(start));
                    }
                    prev = None;
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => {
                    let Some(p) = prev else {
                        return Err(self.unexpected(start));
                    };
                    let label = self.ring_label()?;
                    self.ring_bond(p, label, pending.take(), start)?;
                }
                _ if BondSym::from_byte(c).is_some() => {
                    if pending.is_some() || prev.is_none() {
                        return Err(self.unexpected(start));
                    }
                    pending = Some((BondSym::from_byte(c).unwrap(), start));
                    self.pos += 1;
                }
                _ => {
                    let idx = if c == b'[' {
                        self.bracket_atom(prev)?
                    } else {
                        self.organic_atom(prev)?
                    };
                    if let Some(p) = prev {
                        let (sym, offset) = match pending.take() {
                            Some((s, o)) => (Some(s), o),
                            None => (None, start),
                        };
                        self.push_bond(p, idx, sym, offset);
                        self.atoms[p].order.push(Some(StereoNeighbor::Atom(idx)));
                    } else if let Some((_, o)) = pending {
                        return Err(self.unexpected(o));
                    }
                    prev = Some(idx);
                }
            }
        }
        if let Some((_, offset)) = pending {
            return Err(SmilesError::UnexpectedEnd { offset: offset + 1 });
        }
        if let Some((_, offset)) = branches.first() {
            return Err(SmilesError::UnbalancedParenthesis { offset: *offset });
        }
        if let Some((label, ring)) = self.rings.iter().next() {
            return Err(SmilesError::UnclosedRing {
                label: *label,
                offset: ring.offset,
            });
        }
        Ok(())
    }

    fn push_bond(&mut self, a: usize, b: usize, sym: Option<BondSym>, offset: usize) {
        let up_from_a = sym.filter(|s| s.is_directional()).map(|s| s == BondSym::Up);
        self.bonds.push(RawBond {
            a,
            b,
            sym,
            up_from_a,
            offset,
        });
    }

    fn ring_label(&mut self) -> Result<u32, SmilesError> {
        let c = self.src[self.pos];
        if c == b'%' {
            let digits = self.src.get(self.pos + 1..self.pos + 3);
            match digits {
                Some(d) if d.iter().all(u8::is_ascii_digit) => {
                    self.pos += 3;
                    Ok(u32::from(d[0] - b'0') * 10 + u32::from(d[1] - b'0'))
                }
                _ => Err(self.unexpected(self.pos + 1)),
            }
        } else {
            self.pos += 1;
            Ok(u32::from(c - b'0'))
        }
    }

    fn ring_bond(
        &mut self,
        atom: usize,
        label: u32,
        pending: Option<(BondSym, usize)>,
        offset: usize,
    ) -> Result<(), SmilesError> {
        let sym = pending.map(|(s, _)| s);
        match self.rings.remove(&label) {
            None => {
                let slot = self.atoms[atom].order.len();
                self.atoms[atom].order.push(None);
                self.rings.insert(
                    label,
                    OpenRing {
                        atom,
                        sym,
                        slot,
                        offset,
                    },
                );
            }
            Some(open) => {
                if open.atom == atom {
                    return Err(SmilesError::InvalidBond {
                        offset,
                        reason: "ring closure onto the same atom",
                    });
                }
                if self
                    .bonds
                    .iter()
                    .any(|b| (b.a == atom && b.b == open.atom) || (b.b == atom && b.a == open.atom))
                {
                    return Err(SmilesError::InvalidBond {
                        offset,
                        reason: "ring closure duplicates an existing bond",
                    });
                }
                let plain = |s: Option<BondSym>| s.filter(|s| !s.is_directional());
                let (s_open, s_close) = (plain(open.sym), plain(sym));
                if let (Some(x), Some(y)) = (s_open, s_close) {
                    if x != y {
                        return Err(SmilesError::InvalidBond {
                            offset,
                            reason: "conflicting ring closure bond symbols",
                        });
                    }
                }
                let up_from_open = match (open.sym, sym) {
                    (Some(s), _) if s.is_directional() => Some(s == BondSym::Up),
                    (_, Some(s)) if s.is_directional() => Some(s != BondSym::Up),
                    _ => None,
                };
                let merged = s_open.or(s_close).or(up_from_open.map(|_| BondSym::Up));
                self.bonds.push(RawBond {
                    a: open.atom,
                    b: atom,
                    sym: merged,
                    up_from_a: up_from_open,
                    offset: open.offset,
                });
                self.atoms[open.atom].order[open.slot] = Some(StereoNeighbor::Atom(atom));
                self.atoms[atom].order.push(Some(StereoNeighbor::Atom(open.atom)));
            }
        }
        Ok(())
    }

    fn new_atom(&mut self, atom: Atom, bracket: bool, offset: usize, chiral: Option<bool>, prev: Option<usize>) -> usize {
        let mut order = Vec::new();
        if let Some(p) = prev {
            order.push(Some(StereoNeighbor::Atom(p)));
        }
        if chiral.is_some() && atom.hydrogens == 1 {
            order.push(Some(StereoNeighbor::ImplicitH));
        }
        self.atoms.push(RawAtom {
            atom,
            bracket,
            offset,
            chiral,
            order,
        });
        self.atoms.len() - 1
    }

    fn organic_atom(&mut self, prev: Option<usize>) -> Result<usize, SmilesError> {
        let start = self.pos;
        let c = self.src[self.pos];
        let next = self.src.get(self.pos + 1).copied();
        let (element, aromatic, len) = match (c, next) {
            (b'C', Some(b'l')) => (Element::CL, false, 2),
            (b'B', Some(b'r')) => (Element::BR, false, 2),
            (b'B', _) => (Element::B, false, 1),
            (b'C', _) => (Element::C, false, 1),
            (b'N', _) => (Element::N, false, 1),
            (b'O', _) => (Element::O, false, 1),
            (b'P', _) => (Element::P, false, 1),
            (b'S', _) => (Element::S, false, 1),
            (b'F', _) => (Element::F, false, 1),
            (b'I', _) => (Element::I, false, 1),
            (b'b', _) => (Element::B, true, 1),
            (b'c', _) => (Element::C, true, 1),
            (b'n', _) => (Element::N, true, 1),
            (b'o', _) => (Element::O, true, 1),
            (b'p', _) => (Element::P, true, 1),
            (b's', _) => (Element::S, true, 1),
            (b'*', _) => (Element::WILDCARD, false, 1),
            _ if c.is_ascii_alphabetic() => return Err(SmilesError::UnknownElement { offset: start }),
            _ => return Err(self.unexpected(start)),
        };
        self.pos += len;
        let mut atom = Atom::new(element);
        atom.aromatic = aromatic;
        Ok(self.new_atom(atom, false, start, None, prev))
    }

    fn digits(&mut self) -> Option<u32> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        (self.pos > start).then(|| {
            std::str::from_utf8(&self.src[start..self.pos])
                .unwrap()
                .parse()
                .unwrap_or(u32::MAX)
        })
    }

    fn bracket_atom(&mut self, prev: Option<usize>) -> Result<usize, SmilesError> {
        let start = self.pos;
        self.pos += 1;
        let isotope = match self.digits() {
            Some(v) if v > u32::from(u16::MAX) => return Err(self.unexpected(start + 1)),
            v => v.map(|v| v as u16),
        };
        let sym_at = self.pos;
        let (element, aromatic) = self.bracket_symbol()?;
        let mut chiral = None;
        if self.peek() == Some(b'@') {
            self.pos += 1;
            if self.peek() == Some(b'@') {
                self.pos += 1;
                chiral = Some(true);
            } else {
                chiral = Some(false);
            }
            if self.peek().is_some_and(|c| c.is_ascii_uppercase() && c != b'H') {
                return Err(self.unexpected(self.pos));
            }
        }
        let mut hydrogens = 0u8;
        if self.peek() == Some(b'H') {
            self.pos += 1;
            hydrogens = match self.digits() {
                Some(v) if v > 9 => return Err(self.unexpected(self.pos - 1)),
                Some(v) => v as u8,
                None => 1,
            };
        }
        let mut charge: i32 = 0;
        if let Some(c @ (b'+' | b'-')) = self.peek() {
            let sign = if c == b'+' { 1 } else { -1 };
            self.pos += 1;
            match self.digits() {
                Some(v) => charge = sign * v.min(15) as i32,
                None => {
                    charge = sign;
                    while self.peek() == Some(c) {
                        self.pos += 1;
                        charge += sign;
                    }
                }
            }
        }
        if self.peek() == Some(b':') {
            self.pos += 1;
            if self.digits().is_none() {
                return Err(self.unexpected(self.pos));
            }
        }
        match self.peek() {
            Some(b']') => self.pos += 1,
            _ => return Err(self.unexpected(self.pos)),
        }
        if !(-15..=15).contains(&charge) {
            return Err(self.unexpected(sym_at));
        }
        let mut atom = Atom::new(element);
        atom.aromatic = aromatic;
        atom.isotope = isotope;
        atom.hydrogens = hydrogens;
        atom.charge = charge as i8;
        let chiral = chiral.filter(|_| hydrogens <= 1);
        Ok(self.new_atom(atom, true, start, chiral, prev))
    }

    fn bracket_symbol(&mut self) -> Result<(Element, bool), SmilesError> {
        let start = self.pos;
        let rest = &self.src[self.pos..];
        let Some(&first) = rest.first() else {
            return Err(SmilesError::UnexpectedEnd { offset: start });
        };
        if first == b'*' {
            self.pos += 1;
            return Ok((Element::WILDCARD, false));
        }
        if first.is_ascii_lowercase() {
            for (text, element) in [("se", Element::SE), ("as", Element::from_symbol("As").unwrap())] {
                if rest.starts_with(text.as_bytes()) {
                    self.pos += 2;
                    return Ok((element, true));
                }
            }
            let element = match first {
                b'b' => Element::B,
                b'c' => Element::C,
                b'n' => Element::N,
                b'o' => Element::O,
                b'p' => Element::P,
                b's' => Element::S,
                _ => return Err(SmilesError::UnknownElement { offset: start }),
            };
            self.pos += 1;
            return Ok((element, true));
        }
        if !first.is_ascii_uppercase() {
            return Err(SmilesError::UnknownElement { offset: start });
        }
        if let Some(&second) = rest.get(1) {
            if second.is_ascii_lowercase() {
                let two = std::str::from_utf8(&rest[..2]).unwrap();
                if let Some(e) = Element::from_symbol(two) {
                    self.pos += 2;
                    return Ok((e, false));
                }
            }
        }
        let one = std::str::from_utf8(&rest[..1]).unwrap();
        match Element::from_symbol(one) {
            Some(e) => {
                self.pos += 1;
                Ok((e, false))
            }
            None => Err(SmilesError::UnknownElement { offset: start }),
        }
    }

    fn finish(self) -> Result<MolGraph, SmilesError> {
        let Parser { atoms: raw, bonds: raw_bonds, .. } = self;

        // First pass: tentative kinds, implicit aromatic bonds assumed aromatic.
        let mut implicit_aromatic = Vec::with_capacity(raw_bonds.len());
        let mut bonds = Vec::with_capacity(raw_bonds.len());
        for rb in &raw_bonds {
            let both_aromatic = raw[rb.a].atom.aromatic && raw[rb.b].atom.aromatic;
            let kind = match rb.sym {
                None => {
                    implicit_aromatic.push(both_aromatic);
                    if both_aromatic {
                        BondKind::Aromatic
                    } else {
                        BondKind::Single
                    }
                }
                Some(s) => {
                    implicit_aromatic.push(false);
                    match s {
                        BondSym::Single | BondSym::Up | BondSym::Down => BondKind::Single,
                        BondSym::Double => BondKind::Double,
                        BondSym::Triple => BondKind::Triple,
                        BondSym::Aromatic => {
                            if !both_aromatic {
                                return Err(SmilesError::InvalidBond {
                                    offset: rb.offset,
                                    reason: "aromatic bond between non-aromatic atoms",
                                });
                            }
                            BondKind::Aromatic
                        }
                    }
                }
            };
            bonds.push(Bond::new(rb.a, rb.b, kind));
        }
        let atoms: Vec<Atom> = raw.iter().map(|r| r.atom.clone()).collect();
        let tentative = MolGraph::new(atoms.clone(), bonds.clone()).map_err(|_| SmilesError::InvalidBond {
            offset: 0,
            reason: "malformed bond table",
        })?;
        for (i, bond) in bonds.iter_mut().enumerate() {
            if implicit_aromatic[i] && !tentative.is_ring_bond(i) {
                bond.kind = BondKind::Single;
            }
        }

        assign_double_bond_stereo(&mut bonds, &raw_bonds);

        let mut atoms = atoms;
        let mut bond_valence = vec![0u8; atoms.len()];
        for b in &bonds {
            bond_valence[b.a] += b.kind.valence_contribution();
            bond_valence[b.b] += b.kind.valence_contribution();
        }
        for (i, r) in raw.iter().enumerate() {
            let atom = &mut atoms[i];
            if r.bracket {
                if !valence_ok(atom.element, atom.charge, bond_valence[i], atom.hydrogens) {
                    return Err(SmilesError::ValenceViolation { offset: r.offset });
                }
            } else {
                atom.hydrogens = implied_hydrogens(atom.element, atom.charge, atom.aromatic, bond_valence[i])
                    .ok_or(SmilesError::ValenceViolation { offset: r.offset })?;
            }
            if let Some(clockwise) = r.chiral {
                let neighbors: Option<Vec<StereoNeighbor>> = r.order.iter().copied().collect();
                if let Some(neighbors) = neighbors.filter(|n| n.len() >= 3) {
                    atom.chirality = Some(Tetrahedral { clockwise, neighbors });
                }
            }
        }
        MolGraph::new(atoms, bonds).map_err(|_| SmilesError::InvalidBond {
            offset: 0,
            reason: "malformed bond table",
        })
    }
}

/// Outward direction of the mark on `bond` seen from `from`: `true` means
/// the bond would be written `/` going from `from` to the other atom.
fn outward_up(rb: &RawBond, from: usize) -> Option<bool> {
    rb.up_from_a.map(|up| if rb.a == from { up } else { !up })
}

fn assign_double_bond_stereo(bonds: &mut [Bond], raw: &[RawBond]) {
    for i in 0..bonds.len() {
        if bonds[i].kind != BondKind::Double {
            continue;
        }
        let (a, b) = (bonds[i].a, bonds[i].b);
        let marked = |end: usize, other: usize| {
            raw.iter().enumerate().find_map(|(j, rb)| {
                let touches = (rb.a == end && rb.b != other) || (rb.b == end && rb.a != other);
                if j != i && touches && bonds[j].kind == BondKind::Single {
                    outward_up(rb, end).map(|up| (if rb.a == end { rb.b } else { rb.a }, up))
                } else {
                    None
                }
            })
        };
        if let (Some((ref_a, up_a)), Some((ref_b, up_b))) = (marked(a, b), marked(b, a)) {
            bonds[i].stereo = Some(DoubleBondStereo {
                ref_a,
                ref_b,
                cis: up_a == up_b,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn methane_has_four_hydrogens() {
        let m = parse_smiles("C").unwrap();
        assert_eq!(m.atom_count(), 1);
        assert_eq!(m.bond_count(), 0);
        assert_eq!(m.atom(0).hydrogens, 4);
    }

    #[test]
    fn cenobamate_counts() {
        let m = parse_smiles("NC(=O)OC(Cn1ncnn1)c1ccccc1Cl").unwrap();
        assert_eq!(m.heavy_atom_count(), 18);
        assert_eq!(m.bond_count(), 19);
        assert_eq!(m.ring_count(), 2);
    }

    #[test]
    fn unclosed_ring_reports_digit_offset() {
        assert_eq!(
            parse_smiles("C1CC"),
            Err(SmilesError::UnclosedRing { label: 1, offset: 1 })
        );
    }

    #[test]
    fn parenthesis_errors() {
        assert_eq!(
            parse_smiles("CC(C"),
            Err(SmilesError::UnbalancedParenthesis { offset: 2 })
        );
        assert_eq!(
            parse_smiles("CC)C"),
            Err(SmilesError::UnbalancedParenthesis { offset: 2 })
        );
    }

    #[test]
    fn unknown_element_and_valence() {
        assert_eq!(parse_smiles("CXC"), Err(SmilesError::UnknownElement { offset: 1 }));
        assert_eq!(parse_smiles("C[Xx]"), Err(SmilesError::UnknownElement { offset: 2 }));
        assert_eq!(
            parse_smiles("CC(C)(C)(C)C"),
            Err(SmilesError::ValenceViolation { offset: 1 })
        );
        assert_eq!(parse_smiles("[CH4+0]C"), Err(SmilesError::ValenceViolation { offset: 0 }));
    }

    #[test]
    fn aromatic_hydrogens_and_biaryl_bond() {
        let m = parse_smiles("c1ccccc1c1ccccc1").unwrap();
        assert_eq!(m.ring_count(), 2);
        let inter = m.bond_between(5, 6).unwrap();
        assert_eq!(m.bond(inter).kind, BondKind::Single);
        assert_eq!(m.atom(0).hydrogens, 1);
        assert_eq!(m.atom(5).hydrogens, 0);
        let pyrrole = parse_smiles("c1cc[nH]c1").unwrap();
        assert_eq!(pyrrole.atom(3).hydrogens, 1);
    }

    #[test]
    fn bracket_fields() {
        let m = parse_smiles("[13CH3][NH3+].[O-]C(=O)C").unwrap();
        assert_eq!(m.atom(0).isotope, Some(13));
        assert_eq!(m.atom(0).hydrogens, 3);
        assert_eq!(m.atom(1).charge, 1);
        assert_eq!(m.atom(2).charge, -1);
        assert_eq!(m.component_count(), 2);
    }

    #[test]
    fn percent_ring_labels() {
        let m = parse_smiles("C%10CC%10").unwrap();
        assert_eq!(m.ring_count(), 1);
    }

    #[test]
    fn tetrahedral_order_is_recorded() {
        let m = parse_smiles("N[C@@H](C)C(=O)O").unwrap();
        let t = m.atom(1).chirality.as_ref().unwrap();
        assert!(t.clockwise);
        assert_eq!(
            t.neighbors,
            vec![
                StereoNeighbor::Atom(0),
                StereoNeighbor::ImplicitH,
                StereoNeighbor::Atom(2),
                StereoNeighbor::Atom(3)
            ]
        );
    }

    #[test]
    fn double_bond_stereo() {
        let trans = parse_smiles("F/C=C/F").unwrap();
        let cis = parse_smiles("F/C=C\\F").unwrap();
        let branch = parse_smiles("C(\\F)=C/F").unwrap();
        let st = |m: &MolGraph| m.bonds().iter().find_map(|b| b.stereo).unwrap().cis;
        assert!(!st(&trans));
        assert!(st(&cis));
        assert!(!st(&branch));
    }
}
