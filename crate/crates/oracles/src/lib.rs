//! Slow, obviously-correct reference implementations for tests.
//!
//! Nothing here is tuned; every function enumerates candidates directly and
//! is only meant for small inputs.

use retroplan_chem::{MolGraph, StereoNeighbor};

pub mod generate;
pub mod matching;
pub mod synthetic;

/// Full graph isomorphism, stereo included: atoms must agree on element,
/// charge, aromaticity, hydrogens and isotope; bonds on kind; tetrahedral
/// centers on parity; double bonds on cis/trans.
pub fn isomorphic(a: &MolGraph, b: &MolGraph) -> bool {
    if a.atom_count() != b.atom_count() || a.bond_count() != b.bond_count() {
        return false;
    }
    let mut map = vec![usize::MAX; a.atom_count()];
    let mut used = vec![false; b.atom_count()];
    extend(a, b, 0, &mut map, &mut used)
}

fn same_label(a: &MolGraph, i: usize, b: &MolGraph, j: usize) -> bool {
    let (x, y) = (a.atom(i), b.atom(j));
    x.element == y.element
        && x.charge == y.charge
        && x.aromatic == y.aromatic
        && x.hydrogens == y.hydrogens
        && x.isotope == y.isotope
        && x.chirality.is_some() == y.chirality.is_some()
        && a.degree(i) == b.degree(j)
}

fn extend(a: &MolGraph, b: &MolGraph, i: usize, map: &mut [usize], used: &mut [bool]) -> bool {
    if i == a.atom_count() {
        return double_bonds_agree(a, b, map);
    }
    for j in 0..b.atom_count() {
        if used[j] || !same_label(a, i, b, j) {
            continue;
        }
        let consistent = a.neighbors(i).iter().all(|&(n, k)| {
            n > i || match b.bond_between(j, map[n]) {
                Some(l) => b.bond(l).kind == a.bond(k).kind,
                None => false,
            }
        });
        if !consistent {
            continue;
        }
        map[i] = j;
        used[j] = true;
        // Check every center whose neighborhood just became fully mapped.
        let ready = std::iter::once(i)
            .chain(a.neighbors(i).iter().map(|(n, _)| *n))
            .filter(|&c| c <= i && a.neighbors(c).iter().all(|(n, _)| *n <= i));
        let ok = ready.into_iter().all(|c| tetrahedral_agrees(a, b, c, map));
        if ok && extend(a, b, i + 1, map, used) {
            return true;
        }
        used[j] = false;
        map[i] = usize::MAX;
    }
    false
}

fn tetrahedral_agrees(a: &MolGraph, b: &MolGraph, c: usize, map: &[usize]) -> bool {
    let (Some(ta), Some(tb)) = (&a.atom(c).chirality, &b.atom(map[c]).chirality) else {
        return true;
    };
    let mapped: Vec<StereoNeighbor> = ta
        .neighbors
        .iter()
        .map(|n| match n {
            StereoNeighbor::Atom(x) => StereoNeighbor::Atom(map[*x]),
            h => *h,
        })
        .collect();
    if mapped.len() != tb.neighbors.len() {
        return false;
    }
    let Some(perm) = mapped
        .iter()
        .map(|n| tb.neighbors.iter().position(|m| m == n))
        .collect::<Option<Vec<_>>>()
    else {
        return false;
    };
    let mut odd = false;
    for x in 0..perm.len() {
        for y in x + 1..perm.len() {
            if perm[x] > perm[y] {
                odd = !odd;
            }
        }
    }
    ta.clockwise == (tb.clockwise ^ odd)
}

fn double_bonds_agree(a: &MolGraph, b: &MolGraph, map: &[usize]) -> bool {
    for bond in a.bonds() {
        let l = b.bond_between(map[bond.a], map[bond.b]).unwrap();
        let other = b.bond(l);
        match (bond.stereo, other.stereo) {
            (None, None) => {}
            (Some(s), Some(t)) => {
                // Orient the other bond's refs to match this bond's ends.
                let (ta, tb) = if other.a == map[bond.a] {
                    (t.ref_a, t.ref_b)
                } else {
                    (t.ref_b, t.ref_a)
                };
                let mut cis = s.cis;
                if map[s.ref_a] != ta {
                    cis = !cis;
                }
                if map[s.ref_b] != tb {
                    cis = !cis;
                }
                if cis != t.cis {
                    return false;
                }
            }
            _ => return false,
        }
    }
    true
}
