//! Brute-force substructure matching: try every injection.

use retroplan_chem::pattern::{AtomPrimitive, BondPrimitive, Expr, PatternGraph};
use retroplan_chem::{BondKind, Element, MolGraph};

fn eval<P: Copy>(e: &Expr<P>, f: &dyn Fn(P) -> bool) -> bool {
    match e {
        Expr::Prim(p) => f(*p),
        Expr::Not(x) => !eval(x, f),
        Expr::And(xs) => xs.iter().all(|x| eval(x, f)),
        Expr::Or(xs) => xs.iter().any(|x| eval(x, f)),
    }
}

fn in_ring_atom(mol: &MolGraph, i: usize) -> bool {
    mol.neighbors(i).iter().any(|(_, k)| in_ring_bond(mol, *k))
}

/// A bond is in a ring iff its endpoints stay connected without it.
fn in_ring_bond(mol: &MolGraph, k: usize) -> bool {
    let (src, dst) = (mol.bond(k).a, mol.bond(k).b);
    let mut seen = vec![false; mol.atom_count()];
    let mut stack = vec![src];
    seen[src] = true;
    while let Some(u) = stack.pop() {
        for &(v, b) in mol.neighbors(u) {
            if b != k && !seen[v] {
                if v == dst {
                    return true;
                }
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    false
}

fn atom_ok(p: AtomPrimitive, mol: &MolGraph, i: usize) -> bool {
    let a = mol.atom(i);
    match p {
        AtomPrimitive::Any => true,
        AtomPrimitive::Aromatic => a.aromatic,
        AtomPrimitive::Aliphatic => !a.aromatic,
        AtomPrimitive::Element { element, aromatic } => a.element == element && a.aromatic == aromatic,
        AtomPrimitive::AtomicNumber(n) => a.element.atomic_number() == n,
        AtomPrimitive::TotalHydrogens(h) => {
            let explicit = mol
                .neighbors(i)
                .iter()
                .filter(|(n, _)| mol.atom(*n).element == Element::H)
                .count();
            a.hydrogens as usize + explicit == h as usize
        }
        AtomPrimitive::Degree(d) => mol.neighbors(i).len() == d as usize,
        AtomPrimitive::InRing(r) => in_ring_atom(mol, i) == r,
        AtomPrimitive::Charge(c) => a.charge == c,
    }
}

fn bond_ok(p: BondPrimitive, mol: &MolGraph, k: usize) -> bool {
    let kind = mol.bond(k).kind;
    match p {
        BondPrimitive::Single => kind == BondKind::Single,
        BondPrimitive::Double => kind == BondKind::Double,
        BondPrimitive::Triple => kind == BondKind::Triple,
        BondPrimitive::Aromatic => kind == BondKind::Aromatic,
        BondPrimitive::Any => true,
        BondPrimitive::InRing => in_ring_bond(mol, k),
        BondPrimitive::Implicit => kind == BondKind::Single || kind == BondKind::Aromatic,
    }
}

/// Whether `map` (pattern atom -> target atom) satisfies every constraint.
pub fn map_is_valid(p: &PatternGraph, mol: &MolGraph, map: &[usize]) -> bool {
    if map.len() != p.atom_count() {
        return false;
    }
    for i in 0..map.len() {
        for j in i + 1..map.len() {
            if map[i] == map[j] {
                return false;
            }
        }
    }
    let atoms_ok = p
        .atoms()
        .iter()
        .enumerate()
        .all(|(q, qa)| eval(&qa.expr, &|prim| atom_ok(prim, mol, map[q])));
    atoms_ok
        && p.bonds().iter().all(|qb| {
            let found = mol
                .bonds()
                .iter()
                .position(|b| (b.a == map[qb.a] && b.b == map[qb.b]) || (b.b == map[qb.a] && b.a == map[qb.b]));
            match found {
                Some(k) => eval(&qb.expr, &|prim| bond_ok(prim, mol, k)),
                None => false,
            }
        })
}

/// Every valid map, by exhaustive enumeration of injections, in
/// lexicographic order.
pub fn all_matches(p: &PatternGraph, mol: &MolGraph) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    enumerate(p, mol, &mut current, &mut out);
    out
}

fn enumerate(p: &PatternGraph, mol: &MolGraph, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if current.len() == p.atom_count() {
        if map_is_valid(p, mol, current) {
            out.push(current.clone());
        }
        return;
    }
    for t in 0..mol.atom_count() {
        if !current.contains(&t) {
            current.push(t);
            enumerate(p, mol, current, out);
            current.pop();
        }
    }
}
