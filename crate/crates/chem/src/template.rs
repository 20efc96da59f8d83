//! Retrosynthetic templates: parsing and application to a product.
//!
//! A template reads `product_pattern>>reactant_pattern(.reactant_pattern)*`.
//! Application matches the product pattern, deletes matched atoms that do
//! not reappear on the reactant side, rewires bonds among mapped atoms as
//! the reactant patterns say, adds template-introduced atoms, rebalances
//! hydrogens and splits the result into canonical precursor molecules.

use crate::canon::CanonicalSmiles;
use crate::element::Element;
use crate::matcher::match_pattern;
use crate::mol::{Atom, Bond, BondKind, DoubleBondStereo, MolGraph, StereoNeighbor, Tetrahedral};
use crate::pattern::{parse_pattern_at, PatternError, PatternGraph};
use crate::valence::{default_valence, implied_hydrogens, valence_ok};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("template has no '>>'")]
    MissingArrow,
    #[error("bad pattern at offset {0}")]
    BadPattern(usize),
    #[error("atom map {0} used more than once on one side")]
    DuplicateAtomMap(u32),
    #[error("template count must be at least 1")]
    ZeroCount,
}

impl From<PatternError> for TemplateError {
    fn from(e: PatternError) -> Self {
        match e {
            PatternError::BadPattern { offset, .. } => TemplateError::BadPattern(offset),
            PatternError::DuplicateAtomMap(m) => TemplateError::DuplicateAtomMap(m),
        }
    }
}

/// One line of a template file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateRecord {
    pub id: String,
    pub retro_smarts: String,
    pub count: u64,
    #[serde(default)]
    pub references: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RetroTemplate {
    pub id: String,
    pub smarts: String,
    pub product: PatternGraph,
    pub reactants: Vec<PatternGraph>,
    pub count: u64,
    pub references: Vec<String>,
}

impl RetroTemplate {
    pub fn from_record(rec: &TemplateRecord) -> Result<Self, TemplateError> {
        if rec.count == 0 {
            return Err(TemplateError::ZeroCount);
        }
        let mut t = parse_retro_template(&rec.retro_smarts)?;
        t.id = rec.id.clone();
        t.count = rec.count;
        t.references = rec.references.clone();
        Ok(t)
    }

    pub fn to_record(&self) -> TemplateRecord {
        TemplateRecord {
            id: self.id.clone(),
            retro_smarts: self.smarts.clone(),
            count: self.count,
            references: self.references.clone(),
        }
    }

    /// Atom maps present on the product side.
    pub fn product_maps(&self) -> BTreeSet<u32> {
        self.product.maps().collect()
    }

    pub fn apply(&self, product: &MolGraph) -> Application {
        apply_retro_template(self, product)
    }
}

/// Parse template text. The result has an empty id and a count of 1.
pub fn parse_retro_template(text: &str) -> Result<RetroTemplate, TemplateError> {
    let arrow = text.find(">>").ok_or(TemplateError::MissingArrow)?;
    let (lhs, rhs) = (&text[..arrow], &text[arrow + 2..]);
    if let Some(extra) = rhs.find('>') {
        return Err(TemplateError::BadPattern(arrow + 2 + extra));
    }
    let product = parse_pattern_at(lhs, 0)?;
    let mut reactants = Vec::new();
    let mut base = arrow + 2;
    for part in rhs.split('.') {
        reactants.push(parse_pattern_at(part, base)?);
        base += part.len() + 1;
    }
    let mut seen = HashSet::new();
    for m in reactants.iter().flat_map(|r| r.maps()) {
        if !seen.insert(m) {
            return Err(TemplateError::DuplicateAtomMap(m));
        }
    }
    let product_maps: HashSet<u32> = product.maps().collect();
    for r in &reactants {
        for a in r.atoms() {
            let introduced = a.map.is_none_or(|m| !product_maps.contains(&m));
            if introduced && a.spec().element.is_none_or(|e| e == Element::WILDCARD) {
                return Err(TemplateError::BadPattern(a.offset));
            }
        }
    }
    Ok(RetroTemplate {
        id: String::new(),
        smarts: text.to_string(),
        product,
        reactants,
        count: 1,
        references: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecursorSet {
    /// Sorted, deduplicated canonical precursors.
    pub precursors: Vec<CanonicalSmiles>,
    /// Product atoms matched by the template, ascending.
    pub reacting_atoms: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Application {
    pub sets: Vec<PrecursorSet>,
    /// Rewrites discarded because the result failed valence or aromaticity
    /// checks.
    pub dropped: usize,
}

pub fn apply_retro_template(t: &RetroTemplate, product: &MolGraph) -> Application {
    let mut out = Application::default();
    let mut seen = HashSet::new();
    for m in match_pattern(&t.product, product) {
        match rewrite(t, product, &m) {
            Some(precursors) if !precursors.is_empty() => {
                if seen.insert(precursors.clone()) {
                    let mut reacting_atoms = m.clone();
                    reacting_atoms.sort_unstable();
                    out.sets.push(PrecursorSet {
                        precursors,
                        reacting_atoms,
                    });
                }
            }
            Some(_) => {}
            None => out.dropped += 1,
        }
    }
    out
}

type BondTable = BTreeMap<(usize, usize), BondKind>;

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn valence_sum(table: &BondTable, atom: usize) -> u8 {
    table
        .iter()
        .filter(|((a, b), _)| *a == atom || *b == atom)
        .map(|(_, k)| k.valence_contribution())
        .sum()
}

fn neighbor_set(table: &BondTable, atom: usize) -> BTreeSet<usize> {
    table
        .keys()
        .filter_map(|&(a, b)| {
            if a == atom {
                Some(b)
            } else if b == atom {
                Some(a)
            } else {
                None
            }
        })
        .collect()
}

/// Apply one match. `None` means the rewrite failed sanitization.
fn rewrite(t: &RetroTemplate, product: &MolGraph, m: &[usize]) -> Option<Vec<CanonicalSmiles>> {
    let n = product.atom_count();
    let reactant_maps: HashSet<u32> = t.reactants.iter().flat_map(|r| r.maps()).collect();
    let mut map_target = BTreeMap::new();
    let mut deleted = vec![false; n];
    for (q, atom) in t.product.atoms().iter().enumerate() {
        match atom.map.filter(|mp| reactant_maps.contains(mp)) {
            Some(mp) => {
                map_target.insert(mp, m[q]);
            }
            None => deleted[m[q]] = true,
        }
    }

    let old: BondTable = product
        .bonds()
        .iter()
        .map(|b| (key(b.a, b.b), b.kind))
        .collect();
    let mut new: BondTable = old
        .iter()
        .filter(|((a, b), _)| !deleted[*a] && !deleted[*b])
        .map(|(k, v)| (*k, *v))
        .collect();
    for qb in t.product.bonds() {
        new.remove(&key(m[qb.a], m[qb.b]));
    }

    // Working atoms: product atoms first, then introduced atoms.
    let mut atoms: Vec<Atom> = product.atoms().to_vec();
    let mut template_atoms = BTreeSet::new();
    let mut h_override: BTreeMap<usize, u8> = BTreeMap::new();
    let mut slot: Vec<Vec<usize>> = Vec::new();
    for r in &t.reactants {
        let mut idx = Vec::with_capacity(r.atom_count());
        for qa in r.atoms() {
            let spec = qa.spec();
            let i = match qa.map.and_then(|mp| map_target.get(&mp)) {
                Some(&i) => {
                    let a = &mut atoms[i];
                    if let Some(e) = spec.element.filter(|e| *e != Element::WILDCARD) {
                        a.element = e;
                    }
                    if let Some(ar) = spec.aromatic {
                        a.aromatic = ar;
                    }
                    if let Some(c) = spec.charge {
                        a.charge = c;
                    }
                    i
                }
                None => {
                    let mut a = Atom::new(spec.element?);
                    a.aromatic = spec.aromatic.unwrap_or(false);
                    a.charge = spec.charge.unwrap_or(0);
                    atoms.push(a);
                    atoms.len() - 1
                }
            };
            if let Some(h) = spec.hydrogens {
                h_override.insert(i, h);
            }
            template_atoms.insert(i);
            idx.push(i);
        }
        slot.push(idx);
    }
    let introduced_from = n;

    for (r, pat) in t.reactants.iter().enumerate() {
        for qb in pat.bonds() {
            let (a, b) = (slot[r][qb.a], slot[r][qb.b]);
            let kind = qb.kind().or_else(|| old.get(&key(a, b)).copied()).unwrap_or(
                if atoms[a].aromatic && atoms[b].aromatic {
                    BondKind::Aromatic
                } else {
                    BondKind::Single
                },
            );
            new.insert(key(a, b), kind);
        }
    }

    // Hydrogens.
    for &i in &template_atoms {
        let sum_new = valence_sum(&new, i);
        let h = if let Some(h) = h_override.get(&i) {
            i64::from(*h)
        } else if i >= introduced_from {
            let a = &atoms[i];
            i64::from(implied_hydrogens(a.element, a.charge, a.aromatic, sum_new)?)
        } else {
            let (before, after) = (product.atom(i), &atoms[i]);
            let dv = match (
                default_valence(after.element, after.charge),
                default_valence(before.element, before.charge),
            ) {
                (Some(x), Some(y)) => i64::from(x) - i64::from(y),
                _ => 0,
            };
            i64::from(before.hydrogens) + i64::from(valence_sum(&old, i)) - i64::from(sum_new) + dv
        };
        atoms[i].hydrogens = u8::try_from(h).ok()?;
    }

    // Stereo survives only where the local environment is untouched.
    let changed: Vec<bool> = (0..atoms.len())
        .map(|i| {
            i >= introduced_from
                || deleted[i]
                || neighbor_set(&old, i) != neighbor_set(&new, i)
                || atoms[i].hydrogens != product.atom(i).hydrogens
        })
        .collect();
    for (i, a) in atoms.iter_mut().enumerate() {
        if changed[i] {
            a.chirality = None;
        }
    }

    let mut remap = vec![usize::MAX; atoms.len()];
    let mut kept = Vec::new();
    for i in 0..atoms.len() {
        if i >= introduced_from || !deleted[i] {
            remap[i] = kept.len();
            kept.push(i);
        }
    }
    let final_atoms: Vec<Atom> = kept
        .iter()
        .map(|&i| {
            let mut a = atoms[i].clone();
            a.chirality = a.chirality.and_then(|c| remap_chirality(&c, &remap));
            a
        })
        .collect();
    let final_bonds: Vec<Bond> = new
        .iter()
        .map(|(&(a, b), &kind)| {
            let mut bond = Bond::new(remap[a], remap[b], kind);
            let original = if a < n && b < n { product.bond_between(a, b) } else { None };
            if let Some(pb) = original {
                let orig = product.bond(pb);
                if orig.kind == kind && !changed[a] && !changed[b] {
                    bond.stereo = orig.stereo.and_then(|s| {
                        let (ra, rb) = if orig.a == a { (s.ref_a, s.ref_b) } else { (s.ref_b, s.ref_a) };
                        let (ra, rb) = (remap[ra], remap[rb]);
                        (ra != usize::MAX && rb != usize::MAX).then_some(DoubleBondStereo {
                            ref_a: ra,
                            ref_b: rb,
                            cis: s.cis,
                        })
                    });
                }
            }
            bond
        })
        .collect();
    let mol = MolGraph::new(final_atoms, final_bonds).ok()?;
    if !sane(&mol) {
        return None;
    }

    let template_final: HashSet<usize> = template_atoms.iter().map(|i| remap[*i]).collect();
    let mut out: Vec<CanonicalSmiles> = mol
        .component_atoms()
        .into_iter()
        .filter(|atoms| atoms.iter().any(|a| template_final.contains(a)))
        .map(|atoms| CanonicalSmiles::from_mol(&mol.subgraph(&atoms)))
        .collect();
    out.sort();
    out.dedup();
    Some(out)
}

fn remap_chirality(t: &Tetrahedral, remap: &[usize]) -> Option<Tetrahedral> {
    let neighbors = t
        .neighbors
        .iter()
        .map(|n| match n {
            StereoNeighbor::Atom(i) => (remap[*i] != usize::MAX).then(|| StereoNeighbor::Atom(remap[*i])),
            StereoNeighbor::ImplicitH => Some(StereoNeighbor::ImplicitH),
        })
        .collect::<Option<Vec<_>>>()?;
    Some(Tetrahedral {
        clockwise: t.clockwise,
        neighbors,
    })
}

/// Valence limits hold everywhere; aromatic atoms sit on at least two
/// aromatic bonds and every aromatic bond is in a ring.
fn sane(mol: &MolGraph) -> bool {
    for (i, a) in mol.atoms().iter().enumerate() {
        if !valence_ok(a.element, a.charge, mol.bond_valence(i), a.hydrogens) {
            return false;
        }
        if a.aromatic {
            let aromatic_bonds = mol
                .neighbors(i)
                .iter()
                .filter(|(_, k)| mol.bond(*k).kind == BondKind::Aromatic)
                .count();
            if aromatic_bonds < 2 {
                return false;
            }
        }
    }
    mol.bonds()
        .iter()
        .enumerate()
        .all(|(k, b)| b.kind != BondKind::Aromatic || mol.is_ring_bond(k))
}
