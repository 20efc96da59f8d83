//! The attributed molecular graph shared by every other module.

use crate::element::Element;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BondKind {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondKind {
    /// Bond order used by the valence model; aromatic bonds count as one.
    pub fn valence_contribution(self) -> u8 {
        match self {
            BondKind::Single | BondKind::Aromatic => 1,
            BondKind::Double => 2,
            BondKind::Triple => 3,
        }
    }

    pub fn is_aromatic(self) -> bool {
        self == BondKind::Aromatic
    }

    /// Small integer code used in invariants and hashes.
    pub fn code(self) -> u8 {
        match self {
            BondKind::Single => 1,
            BondKind::Double => 2,
            BondKind::Triple => 3,
            BondKind::Aromatic => 4,
        }
    }
}

/// Entry in the neighbor ordering that defines a tetrahedral parity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StereoNeighbor {
    Atom(usize),
    ImplicitH,
}

/// `@` (anticlockwise) or `@@` (clockwise) looking from the first neighbor,
/// relative to the recorded neighbor order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tetrahedral {
    pub clockwise: bool,
    pub neighbors: Vec<StereoNeighbor>,
}

/// Cis/trans configuration of a double bond, relative to one chosen
/// substituent on each end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DoubleBondStereo {
    /// Neighbor of the bond's first atom.
    pub ref_a: usize,
    /// Neighbor of the bond's second atom.
    pub ref_b: usize,
    pub cis: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub element: Element,
    pub charge: i8,
    pub aromatic: bool,
    /// Total attached hydrogens that are not explicit graph nodes.
    pub hydrogens: u8,
    pub isotope: Option<u16>,
    pub chirality: Option<Tetrahedral>,
}

impl Atom {
    pub fn new(element: Element) -> Self {
        Atom {
            element,
            charge: 0,
            aromatic: false,
            hydrogens: 0,
            isotope: None,
            chirality: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub kind: BondKind,
    pub stereo: Option<DoubleBondStereo>,
}

impl Bond {
    pub fn new(a: usize, b: usize, kind: BondKind) -> Self {
        Bond {
            a,
            b,
            kind,
            stereo: None,
        }
    }

    pub fn other(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("bond {bond} references atom {atom} which does not exist")]
    DanglingBond { bond: usize, atom: usize },
    #[error("bond {bond} is a self-loop on atom {atom}")]
    SelfLoop { bond: usize, atom: usize },
    #[error("atoms {a} and {b} are bonded more than once")]
    DuplicateBond { a: usize, b: usize },
    #[error("aromatic bond {bond} joins a non-aromatic atom")]
    AromaticBondOnAliphaticAtom { bond: usize },
}

/// Immutable molecular graph. Construct through [`MolGraph::new`], which
/// validates the structural invariants and precomputes adjacency, ring
/// membership and connected components.
#[derive(Debug, Clone, PartialEq)]
pub struct MolGraph {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    adjacency: Vec<Vec<(usize, usize)>>,
    ring_bond: Vec<bool>,
    component_of: Vec<usize>,
    components: usize,
}

impl MolGraph {
    pub fn new(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Result<Self, GraphError> {
        let n = atoms.len();
        let mut adjacency = vec![Vec::new(); n];
        let mut seen = std::collections::HashSet::new();
        for (i, bond) in bonds.iter().enumerate() {
            for atom in [bond.a, bond.b] {
                if atom >= n {
                    return Err(GraphError::DanglingBond { bond: i, atom });
                }
            }
            if bond.a == bond.b {
                return Err(GraphError::SelfLoop {
                    bond: i,
                    atom: bond.a,
                });
            }
            let key = (bond.a.min(bond.b), bond.a.max(bond.b));
            if !seen.insert(key) {
                return Err(GraphError::DuplicateBond { a: key.0, b: key.1 });
            }
            if bond.kind.is_aromatic() && !(atoms[bond.a].aromatic && atoms[bond.b].aromatic) {
                return Err(GraphError::AromaticBondOnAliphaticAtom { bond: i });
            }
            adjacency[bond.a].push((bond.b, i));
            adjacency[bond.b].push((bond.a, i));
        }
        let (component_of, components) = label_components(n, &adjacency);
        let ring_bond = find_ring_bonds(n, &bonds, &adjacency);
        Ok(MolGraph {
            atoms,
            bonds,
            adjacency,
            ring_bond,
            component_of,
            components,
        })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn bond(&self, i: usize) -> &Bond {
        &self.bonds[i]
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    /// `(neighbor, bond index)` pairs in bond insertion order.
    pub fn neighbors(&self, atom: usize) -> &[(usize, usize)] {
        &self.adjacency[atom]
    }

    pub fn degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a]
            .iter()
            .find(|(n, _)| *n == b)
            .map(|(_, bond)| *bond)
    }

    pub fn is_ring_bond(&self, bond: usize) -> bool {
        self.ring_bond[bond]
    }

    pub fn is_ring_atom(&self, atom: usize) -> bool {
        self.adjacency[atom].iter().any(|(_, b)| self.ring_bond[*b])
    }

    pub fn component_count(&self) -> usize {
        self.components
    }

    pub fn component_of(&self, atom: usize) -> usize {
        self.component_of[atom]
    }

    /// Circuit rank: bonds − atoms + components.
    pub fn ring_count(&self) -> usize {
        self.bonds.len() + self.components - self.atoms.len()
    }

    /// Sum of bond valence contributions at `atom`.
    pub fn bond_valence(&self, atom: usize) -> u8 {
        self.adjacency[atom]
            .iter()
            .map(|(_, b)| self.bonds[*b].kind.valence_contribution())
            .sum()
    }

    pub fn heavy_atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.element != Element::H).count()
    }

    pub fn into_parts(self) -> (Vec<Atom>, Vec<Bond>) {
        (self.atoms, self.bonds)
    }

    /// Atom indices grouped by connected component, each group ascending.
    pub fn component_atoms(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.components];
        for (i, c) in self.component_of.iter().enumerate() {
            groups[*c].push(i);
        }
        groups
    }

    /// Extract the subgraph induced by `atoms` (ascending order preserved).
    /// Stereo references to atoms outside the subset are dropped.
    pub fn subgraph(&self, atoms: &[usize]) -> MolGraph {
        let mut remap = vec![usize::MAX; self.atoms.len()];
        for (new, old) in atoms.iter().enumerate() {
            remap[*old] = new;
        }
        let new_atoms = atoms
            .iter()
            .map(|&i| {
                let mut atom = self.atoms[i].clone();
                atom.chirality = atom.chirality.and_then(|t| remap_tetrahedral(&t, &remap));
                atom
            })
            .collect();
        let new_bonds = self
            .bonds
            .iter()
            .filter(|b| remap[b.a] != usize::MAX && remap[b.b] != usize::MAX)
            .map(|b| Bond {
                a: remap[b.a],
                b: remap[b.b],
                kind: b.kind,
                stereo: b.stereo.and_then(|s| {
                    let (ra, rb) = (remap[s.ref_a], remap[s.ref_b]);
                    (ra != usize::MAX && rb != usize::MAX).then_some(DoubleBondStereo {
                        ref_a: ra,
                        ref_b: rb,
                        cis: s.cis,
                    })
                }),
            })
            .collect();
        MolGraph::new(new_atoms, new_bonds).expect("induced subgraph of a valid graph is valid")
    }

    /// Renumber atoms so that old atom `i` becomes `order.position(i)`.
    /// `order` must be a permutation of `0..atom_count`.
    pub fn permuted(&self, order: &[usize]) -> MolGraph {
        assert_eq!(order.len(), self.atoms.len());
        let mut remap = vec![0; order.len()];
        for (new, old) in order.iter().enumerate() {
            remap[*old] = new;
        }
        let atoms = order
            .iter()
            .map(|&old| {
                let mut atom = self.atoms[old].clone();
                atom.chirality = atom.chirality.and_then(|t| remap_tetrahedral(&t, &remap));
                atom
            })
            .collect();
        let bonds = self
            .bonds
            .iter()
            .map(|b| Bond {
                a: remap[b.a],
                b: remap[b.b],
                kind: b.kind,
                stereo: b.stereo.map(|s| DoubleBondStereo {
                    ref_a: remap[s.ref_a],
                    ref_b: remap[s.ref_b],
                    cis: s.cis,
                }),
            })
            .collect();
        MolGraph::new(atoms, bonds).expect("permutation preserves validity")
    }
}

pub(crate) fn remap_tetrahedral(t: &Tetrahedral, remap: &[usize]) -> Option<Tetrahedral> {
    let neighbors = t
        .neighbors
        .iter()
        .map(|n| match n {
            StereoNeighbor::ImplicitH => Some(StereoNeighbor::ImplicitH),
            StereoNeighbor::Atom(i) => {
                let j = remap[*i];
                (j != usize::MAX).then_some(StereoNeighbor::Atom(j))
            }
        })
        .collect::<Option<Vec<_>>>()?;
    Some(Tetrahedral {
        clockwise: t.clockwise,
        neighbors,
    })
}

fn label_components(n: usize, adjacency: &[Vec<(usize, usize)>]) -> (Vec<usize>, usize) {
    let mut label = vec![usize::MAX; n];
    let mut count = 0;
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        label[start] = count;
        while let Some(u) = stack.pop() {
            for &(v, _) in &adjacency[u] {
                if label[v] == usize::MAX {
                    label[v] = count;
                    stack.push(v);
                }
            }
        }
        count += 1;
    }
    (label, count)
}

/// A bond is a ring bond iff it is not a bridge. Iterative Tarjan lowlink.
fn find_ring_bonds(n: usize, bonds: &[Bond], adjacency: &[Vec<(usize, usize)>]) -> Vec<bool> {
    let mut ring = vec![true; bonds.len()];
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut time = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // (node, parent bond, next neighbor cursor)
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = time;
        low[root] = time;
        time += 1;
        while let Some(&mut (u, parent_bond, ref mut cursor)) = stack.last_mut() {
            if *cursor < adjacency[u].len() {
                let (v, bond) = adjacency[u][*cursor];
                *cursor += 1;
                if bond == parent_bond {
                    continue;
                }
                if disc[v] == usize::MAX {
                    disc[v] = time;
                    low[v] = time;
                    time += 1;
                    stack.push((v, bond, 0));
                } else {
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[u]);
                    if low[u] > disc[p] {
                        ring[parent_bond] = false;
                    }
                }
            }
        }
    }
    ring
}
