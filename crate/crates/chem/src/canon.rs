//! Canonical atom ranking and the canonical SMILES writer.
//!
//! Atoms are colored by local invariants and refined by neighbor colors
//! until stable. Remaining ties are broken by individualizing each member of
//! the first tied class in turn; every completed ordering is written out and
//! the lexicographically smallest string wins. Stereo descriptors are
//! recomputed for the output order, so stereoisomers stay distinct while
//! input atom order never leaks into the result.

use crate::mol::{BondKind, MolGraph, StereoNeighbor};
use crate::smiles::{parse_smiles, SmilesError};
use crate::valence::implied_hydrogens;
use schemars::JsonSchema;
use serde::{Deserialize, Deserializer, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::fmt;

/// Upper bound on complete orderings written per component. Only highly
/// symmetric molecules get near it.
const LEAF_BUDGET: usize = 4096;

/// A SMILES string known to be in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, JsonSchema)]
#[serde(transparent)]
pub struct CanonicalSmiles(String);

impl CanonicalSmiles {
    /// Parse and canonicalize.
    pub fn new(smiles: &str) -> Result<Self, SmilesError> {
        canonicalize(smiles)
    }

    pub fn from_mol(mol: &MolGraph) -> Self {
        CanonicalSmiles(canonical_smiles(mol))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }

    /// Re-parse into a graph. Canonical strings always parse.
    pub fn to_mol(&self) -> MolGraph {
        parse_smiles(&self.0).expect("canonical SMILES parses")
    }
}

impl fmt::Display for CanonicalSmiles {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for CanonicalSmiles {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl<'de> Deserialize<'de> for CanonicalSmiles {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        canonicalize(&s).map_err(serde::de::Error::custom)
    }
}

/// Parse `smiles` and return its canonical form.
pub fn canonicalize(smiles: &str) -> Result<CanonicalSmiles, SmilesError> {
    let mol = parse_smiles(smiles)?;
    Ok(CanonicalSmiles::from_mol(&mol))
}

/// Canonical SMILES of a graph. Components are written separately, sorted
/// and joined with `.`.
pub fn canonical_smiles(mol: &MolGraph) -> String {
    let groups = mol.component_atoms();
    let mut parts: Vec<String> = if groups.len() == 1 {
        vec![canonical_component(mol).0]
    } else {
        groups
            .iter()
            .map(|atoms| canonical_component(&mol.subgraph(atoms)).0)
            .collect()
    };
    parts.sort();
    parts.join(".")
}

/// Canonical rank of every atom (0 = written first within its component).
/// Ranks are only comparable inside one connected component.
pub fn canonical_ranks(mol: &MolGraph) -> Vec<u32> {
    let mut ranks = vec![0; mol.atom_count()];
    for atoms in mol.component_atoms() {
        let sub = mol.subgraph(&atoms);
        let (_, sub_ranks) = canonical_component(&sub);
        for (i, atom) in atoms.iter().enumerate() {
            ranks[*atom] = sub_ranks[i];
        }
    }
    ranks
}

fn canonical_component(mol: &MolGraph) -> (String, Vec<u32>) {
    if mol.atom_count() == 0 {
        return (String::new(), Vec::new());
    }
    let mut search = Search {
        mol,
        leaves: 0,
        best: None,
    };
    search.explore(initial_colors(mol));
    search.best.expect("at least one leaf")
}

fn initial_colors(mol: &MolGraph) -> Vec<u32> {
    let keys: Vec<_> = (0..mol.atom_count())
        .map(|i| {
            let a = mol.atom(i);
            (
                mol.degree(i),
                a.element.atomic_number(),
                a.isotope.unwrap_or(0),
                a.charge,
                a.aromatic,
                a.hydrogens,
                mol.is_ring_atom(i),
            )
        })
        .collect();
    dense_ranks(&keys)
}

fn dense_ranks<K: Ord>(keys: &[K]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|a, b| keys[*a].cmp(&keys[*b]));
    let mut ranks = vec![0u32; keys.len()];
    let mut current = 0u32;
    for w in 0..order.len() {
        if w > 0 && keys[order[w]] != keys[order[w - 1]] {
            current += 1;
        }
        ranks[order[w]] = current;
    }
    ranks
}

fn class_count(colors: &[u32]) -> usize {
    colors.iter().copied().max().map_or(0, |m| m as usize + 1)
}

fn refine(mol: &MolGraph, colors: &mut Vec<u32>) {
    loop {
        let before = class_count(colors);
        let keys: Vec<(u32, Vec<(u32, u8)>)> = (0..mol.atom_count())
            .map(|i| {
                let mut nbrs: Vec<(u32, u8)> = mol
                    .neighbors(i)
                    .iter()
                    .map(|&(j, b)| (colors[j], mol.bond(b).kind.code()))
                    .collect();
                nbrs.sort_unstable();
                (colors[i], nbrs)
            })
            .collect();
        *colors = dense_ranks(&keys);
        if class_count(colors) == before {
            return;
        }
    }
}

fn individualize(colors: &[u32], v: usize) -> Vec<u32> {
    let keys: Vec<u32> = colors
        .iter()
        .enumerate()
        .map(|(i, c)| c * 2 + u32::from(i != v))
        .collect();
    dense_ranks(&keys)
}

struct Search<'a> {
    mol: &'a MolGraph,
    leaves: usize,
    best: Option<(String, Vec<u32>)>,
}

impl Search<'_> {
    fn explore(&mut self, mut colors: Vec<u32>) {
        refine(self.mol, &mut colors);
        let n = colors.len();
        let mut counts = vec![0usize; n];
        for c in &colors {
            counts[*c as usize] += 1;
        }
        match (0..n).find(|c| counts[*c] > 1) {
            None => {
                self.leaves += 1;
                let s = Writer::new(self.mol, &colors).write();
                if self.best.as_ref().is_none_or(|(b, _)| s < *b) {
                    self.best = Some((s, colors));
                }
            }
            Some(tied) => {
                let members: Vec<usize> = (0..n).filter(|i| colors[*i] as usize == tied).collect();
                for v in members {
                    if self.leaves >= LEAF_BUDGET && self.best.is_some() {
                        break;
                    }
                    self.explore(individualize(&colors, v));
                }
            }
        }
    }
}

/// Union-find with parity over bond indices, used to assign `/` and `\`
/// marks that reproduce every double-bond configuration.
struct Directions {
    marked: Vec<bool>,
    parent: Vec<usize>,
    parity: Vec<bool>,
    assigned: Vec<Option<bool>>,
}

impl Directions {
    fn new(mol: &MolGraph) -> Self {
        let n = mol.bond_count();
        let mut d = Directions {
            marked: vec![false; n],
            parent: (0..n).collect(),
            parity: vec![false; n],
            assigned: vec![None; n],
        };
        for bond in mol.bonds() {
            if bond.kind != BondKind::Double {
                continue;
            }
            let Some(st) = bond.stereo else { continue };
            let (a, b) = (bond.a, bond.b);
            let single_subs = |end: usize, other: usize| -> Vec<(usize, usize)> {
                mol.neighbors(end)
                    .iter()
                    .copied()
                    .filter(|&(n, k)| n != other && mol.bond(k).kind == BondKind::Single)
                    .collect()
            };
            let (subs_a, subs_b) = (single_subs(a, b), single_subs(b, a));
            let (Some(&(_, ka)), Some(&(_, kb))) = (
                subs_a.iter().find(|(n, _)| *n == st.ref_a),
                subs_b.iter().find(|(n, _)| *n == st.ref_b),
            ) else {
                continue;
            };
            // outward(end, k) = v_k ^ flip(end, k)
            let flip = |end: usize, k: usize| mol.bond(k).a != end;
            let mut constraints = Vec::new();
            for &(_, k) in &subs_a {
                if k != ka {
                    constraints.push((k, ka, true ^ flip(a, k) ^ flip(a, ka)));
                }
            }
            for &(_, k) in &subs_b {
                if k != kb {
                    constraints.push((k, kb, true ^ flip(b, k) ^ flip(b, kb)));
                }
            }
            constraints.push((ka, kb, !st.cis ^ flip(a, ka) ^ flip(b, kb)));
            let (saved_parent, saved_parity) = (d.parent.clone(), d.parity.clone());
            if constraints.iter().all(|&(x, y, p)| d.union(x, y, p)) {
                for &(_, k) in subs_a.iter().chain(subs_b.iter()) {
                    d.marked[k] = true;
                }
            } else {
                d.parent = saved_parent;
                d.parity = saved_parity;
            }
        }
        d
    }

    fn find(&mut self, x: usize) -> (usize, bool) {
        let p = self.parent[x];
        if p == x {
            return (x, false);
        }
        let (root, pp) = self.find(p);
        self.parent[x] = root;
        self.parity[x] ^= pp;
        (root, self.parity[x])
    }

    fn union(&mut self, x: usize, y: usize, p: bool) -> bool {
        let (rx, px) = self.find(x);
        let (ry, py) = self.find(y);
        if rx == ry {
            return px ^ py == p;
        }
        self.parent[rx] = ry;
        self.parity[rx] = px ^ py ^ p;
        true
    }

    /// Whether bond `k`, written starting at atom `from`, gets `/` (true)
    /// or `\` (false). `None` for unmarked bonds. The first mark written in
    /// each constraint class is always `/`.
    fn mark(&mut self, mol: &MolGraph, k: usize, from: usize) -> Option<bool> {
        if !self.marked[k] {
            return None;
        }
        let forward = mol.bond(k).a == from;
        let (root, p) = self.find(k);
        let root_value = *self.assigned[root].get_or_insert(forward ^ p);
        let v = root_value ^ p;
        Some(if forward { v } else { !v })
    }
}

struct Writer<'a> {
    mol: &'a MolGraph,
    rank: &'a [u32],
    visited: Vec<bool>,
    bond_used: Vec<bool>,
    children: Vec<Vec<(usize, usize)>>,
    ring_open: Vec<Vec<(usize, usize)>>,
    ring_close: Vec<Vec<(usize, usize)>>,
    digits: HashMap<usize, u32>,
    open_digits: BTreeSet<u32>,
    directions: Directions,
    out: String,
}

impl<'a> Writer<'a> {
    fn new(mol: &'a MolGraph, rank: &'a [u32]) -> Self {
        let n = mol.atom_count();
        Writer {
            mol,
            rank,
            visited: vec![false; n],
            bond_used: vec![false; mol.bond_count()],
            children: vec![Vec::new(); n],
            ring_open: vec![Vec::new(); n],
            ring_close: vec![Vec::new(); n],
            digits: HashMap::new(),
            open_digits: BTreeSet::new(),
            directions: Directions::new(mol),
            out: String::new(),
        }
    }

    /// Write one connected component.
    fn write(mut self) -> String {
        let start = (0..self.mol.atom_count())
            .min_by_key(|i| self.rank[*i])
            .expect("non-empty component");
        self.build_tree(start);
        self.emit(start, None);
        self.out
    }

    fn sorted_neighbors(&self, u: usize) -> Vec<(usize, usize)> {
        let mut nbrs = self.mol.neighbors(u).to_vec();
        nbrs.sort_by_key(|(n, _)| self.rank[*n]);
        nbrs
    }

    fn build_tree(&mut self, start: usize) {
        // (atom, parent bond, sorted neighbors, cursor)
        let mut stack = vec![(start, usize::MAX, self.sorted_neighbors(start), 0usize)];
        self.visited[start] = true;
        while let Some((u, parent_bond, nbrs, cursor)) = stack.last_mut() {
            let u = *u;
            if *cursor == nbrs.len() {
                stack.pop();
                continue;
            }
            let (w, b) = nbrs[*cursor];
            *cursor += 1;
            if b == *parent_bond || self.bond_used[b] {
                continue;
            }
            self.bond_used[b] = true;
            if self.visited[w] {
                self.ring_open[w].push((u, b));
                self.ring_close[u].push((w, b));
            } else {
                self.visited[w] = true;
                self.children[u].push((w, b));
                let wn = self.sorted_neighbors(w);
                stack.push((w, b, wn, 0));
            }
        }
    }

    fn bond_text(&mut self, k: usize, from: usize, to: usize) -> &'static str {
        let bond = self.mol.bond(k);
        match bond.kind {
            BondKind::Single => match self.directions.mark(self.mol, k, from) {
                Some(true) => "/",
                Some(false) => "\\",
                None if self.mol.atom(from).aromatic && self.mol.atom(to).aromatic => "-",
                None => "",
            },
            BondKind::Double => "=",
            BondKind::Triple => "#",
            BondKind::Aromatic if self.mol.is_ring_bond(k) => "",
            BondKind::Aromatic => ":",
        }
    }

    fn emit(&mut self, u: usize, from: Option<(usize, usize)>) {
        // Explicit stack of pending text so deep chains do not recurse.
        enum Step {
            Visit(usize, Option<(usize, usize)>),
            Text(&'static str),
        }
        let mut steps = vec![Step::Visit(u, from)];
        while let Some(step) = steps.pop() {
            match step {
                Step::Text(t) => self.out.push_str(t),
                Step::Visit(u, from) => {
                    if let Some((p, k)) = from {
                        let t = self.bond_text(k, p, u);
                        self.out.push_str(t);
                    }
                    let mut order: Vec<StereoNeighbor> = Vec::new();
                    if let Some((p, _)) = from {
                        order.push(StereoNeighbor::Atom(p));
                    }
                    if self.mol.atom(u).hydrogens == 1 {
                        order.push(StereoNeighbor::ImplicitH);
                    }
                    let mut ring_text = String::new();
                    let mut released = Vec::new();
                    for (w, k) in self.ring_close[u].clone() {
                        let d = self.digits[&k];
                        push_digit(&mut ring_text, d);
                        released.push(d);
                        order.push(StereoNeighbor::Atom(w));
                    }
                    for (w, k) in self.ring_open[u].clone() {
                        let d = (1..).find(|d| !self.open_digits.contains(d)).unwrap();
                        self.open_digits.insert(d);
                        self.digits.insert(k, d);
                        ring_text.push_str(self.bond_text(k, u, w));
                        push_digit(&mut ring_text, d);
                        order.push(StereoNeighbor::Atom(w));
                    }
                    for d in released {
                        self.open_digits.remove(&d);
                    }
                    let children = self.children[u].clone();
                    order.extend(children.iter().map(|(c, _)| StereoNeighbor::Atom(*c)));
                    let chiral = output_chirality(self.mol, u, &order);
                    self.out.push_str(&atom_text(self.mol, u, chiral));
                    self.out.push_str(&ring_text);
                    let last = children.len().saturating_sub(1);
                    for (i, (c, k)) in children.iter().enumerate().rev() {
                        if i < last {
                            steps.push(Step::Text(")"));
                            steps.push(Step::Visit(*c, Some((u, *k))));
                            steps.push(Step::Text("("));
                        } else {
                            steps.push(Step::Visit(*c, Some((u, *k))));
                        }
                    }
                }
            }
        }
    }
}

fn push_digit(out: &mut String, d: u32) {
    if d < 10 {
        out.push(char::from_digit(d, 10).unwrap());
    } else {
        out.push_str(&format!("%{d:02}"));
    }
}

/// Clockwise flag for the written neighbor order, or `None` when the atom
/// has no usable tetrahedral descriptor.
fn output_chirality(mol: &MolGraph, u: usize, order: &[StereoNeighbor]) -> Option<bool> {
    let t = mol.atom(u).chirality.as_ref()?;
    if t.neighbors.len() != order.len() || order.len() < 3 {
        return None;
    }
    let perm: Vec<usize> = order
        .iter()
        .map(|n| t.neighbors.iter().position(|m| m == n))
        .collect::<Option<_>>()?;
    let mut inversions = 0;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] == perm[j] {
                return None;
            }
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    Some(t.clockwise ^ (inversions % 2 == 1))
}

fn atom_text(mol: &MolGraph, u: usize, chiral: Option<bool>) -> String {
    let atom = mol.atom(u);
    let symbol = if atom.aromatic {
        atom.element.symbol().to_ascii_lowercase()
    } else {
        atom.element.symbol().to_string()
    };
    let organic = atom.element.is_organic_subset()
        && (!atom.aromatic || matches!(symbol.as_str(), "b" | "c" | "n" | "o" | "p" | "s"));
    let bare = chiral.is_none()
        && atom.charge == 0
        && atom.isotope.is_none()
        && organic
        && implied_hydrogens(atom.element, 0, atom.aromatic, mol.bond_valence(u)) == Some(atom.hydrogens);
    if bare {
        return symbol;
    }
    let mut s = String::from("[");
    if let Some(iso) = atom.isotope {
        s.push_str(&iso.to_string());
    }
    s.push_str(&symbol);
    match chiral {
        Some(true) => s.push_str("@@"),
        Some(false) => s.push('@'),
        None => {}
    }
    match atom.hydrogens {
        0 => {}
        1 => s.push('H'),
        h => s.push_str(&format!("H{h}")),
    }
    match atom.charge {
        0 => {}
        1 => s.push('+'),
        -1 => s.push('-'),
        c if c > 0 => s.push_str(&format!("+{c}")),
        c => s.push_str(&format!("-{}", -c)),
    }
    s.push(']');
    s
}
