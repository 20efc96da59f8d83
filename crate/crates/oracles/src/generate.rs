//! Seeded generators for small random molecules and patterns.

use rand::rngs::StdRng;
use rand::Rng;
use retroplan_chem::pattern::{AtomPrimitive, BondPrimitive, Expr, QueryAtom, QueryBond};
use retroplan_chem::valence::implied_hydrogens;
use retroplan_chem::{Atom, Bond, BondKind, Element, MolGraph, PatternGraph};

/// Random small molecule: optional benzene core, then a random tree of
/// aliphatic atoms with a couple of extra ring bonds.
pub fn random_mol(rng: &mut StdRng) -> MolGraph {
    let mut atoms = Vec::new();
    let mut bonds = Vec::new();
    if rng.gen_bool(0.4) {
        for i in 0..6 {
            let mut a = Atom::new(if i == 0 && rng.gen_bool(0.3) { Element::N } else { Element::C });
            a.aromatic = true;
            atoms.push(a);
            bonds.push(Bond::new(i, (i + 1) % 6, BondKind::Aromatic));
        }
    }
    let target = rng.gen_range(atoms.len().max(2)..=12);
    let elements = [Element::C, Element::C, Element::C, Element::N, Element::O, Element::S];
    let mut valence = vec![0u8; atoms.len()];
    for b in &bonds {
        valence[b.a] += 1;
        valence[b.b] += 1;
    }
    let max_valence = |a: &Atom| if a.aromatic { 3 } else { a.element.valences(0).unwrap()[0] };
    while atoms.len() < target {
        let mut a = Atom::new(elements[rng.gen_range(0..elements.len())]);
        if a.element == Element::N && rng.gen_bool(0.15) {
            a.charge = 1;
        }
        let new = atoms.len();
        atoms.push(a);
        valence.push(0);
        if new == 0 {
            continue;
        }
        let open: Vec<usize> = (0..new).filter(|i| valence[*i] < max_valence(&atoms[*i])).collect();
        let Some(&parent) = open.get(rng.gen_range(0..open.len().max(1))) else {
            continue;
        };
        let room = (max_valence(&atoms[parent]) - valence[parent]).min(4 - 1);
        let order = if room >= 2 && rng.gen_bool(0.2) { 2 } else { 1 };
        let kind = if order == 2 { BondKind::Double } else { BondKind::Single };
        bonds.push(Bond::new(parent, new, kind));
        valence[parent] += order;
        valence[new] += order;
    }
    for _ in 0..rng.gen_range(0..3) {
        let (x, y) = (rng.gen_range(0..atoms.len()), rng.gen_range(0..atoms.len()));
        let exists = bonds.iter().any(|b| (b.a, b.b) == (x, y) || (b.a, b.b) == (y, x));
        if x != y
            && !exists
            && valence[x] < max_valence(&atoms[x])
            && valence[y] < max_valence(&atoms[y])
            && !(atoms[x].aromatic && atoms[y].aromatic)
        {
            bonds.push(Bond::new(x, y, BondKind::Single));
            valence[x] += 1;
            valence[y] += 1;
        }
    }
    for (i, a) in atoms.iter_mut().enumerate() {
        a.hydrogens = implied_hydrogens(a.element, a.charge, a.aromatic, valence[i]).unwrap_or(0);
    }
    MolGraph::new(atoms, bonds).unwrap()
}

fn random_atom_expr(rng: &mut StdRng, mol: &MolGraph, i: usize) -> Expr<AtomPrimitive> {
    let a = mol.atom(i);
    let exact = AtomPrimitive::Element {
        element: a.element,
        aromatic: a.aromatic,
    };
    match rng.gen_range(0..8) {
        0 => Expr::Prim(AtomPrimitive::Any),
        1 => Expr::Prim(AtomPrimitive::AtomicNumber(a.element.atomic_number())),
        2 => Expr::Or(vec![
            Expr::Prim(exact),
            Expr::Prim(AtomPrimitive::Element {
                element: Element::O,
                aromatic: false,
            }),
        ]),
        3 => Expr::Not(Box::new(Expr::Prim(AtomPrimitive::Element {
            element: Element::N,
            aromatic: false,
        }))),
        4 => Expr::And(vec![
            Expr::Prim(exact),
            Expr::Prim(AtomPrimitive::TotalHydrogens(a.hydrogens)),
        ]),
        5 => Expr::Prim(AtomPrimitive::InRing(rng.gen_bool(0.5))),
        6 => Expr::And(vec![
            Expr::Prim(AtomPrimitive::Aliphatic),
            Expr::Prim(AtomPrimitive::Charge(0)),
        ]),
        _ => Expr::Prim(exact),
    }
}

fn random_bond_expr(rng: &mut StdRng, kind: BondKind) -> Expr<BondPrimitive> {
    let exact = match kind {
        BondKind::Single => BondPrimitive::Single,
        BondKind::Double => BondPrimitive::Double,
        BondKind::Triple => BondPrimitive::Triple,
        BondKind::Aromatic => BondPrimitive::Aromatic,
    };
    match rng.gen_range(0..5) {
        0 => Expr::Prim(BondPrimitive::Any),
        1 => Expr::Prim(BondPrimitive::Implicit),
        2 => Expr::And(vec![
            Expr::Prim(exact),
            Expr::Not(Box::new(Expr::Prim(BondPrimitive::InRing))),
        ]),
        _ => Expr::Prim(exact),
    }
}

/// Pattern built from a random connected piece of `source`.
pub fn random_pattern(rng: &mut StdRng, source: &MolGraph) -> PatternGraph {
    let size = rng.gen_range(1..=4.min(source.atom_count()));
    let mut chosen = vec![rng.gen_range(0..source.atom_count())];
    while chosen.len() < size {
        let frontier: Vec<usize> = chosen
            .iter()
            .flat_map(|&c| source.neighbors(c).iter().map(|(n, _)| *n))
            .filter(|n| !chosen.contains(n))
            .collect();
        if frontier.is_empty() {
            break;
        }
        chosen.push(frontier[rng.gen_range(0..frontier.len())]);
    }
    let atoms: Vec<QueryAtom> = chosen
        .iter()
        .map(|&i| QueryAtom {
            expr: random_atom_expr(rng, source, i),
            map: None,
            offset: 0,
        })
        .collect();
    let mut bonds = Vec::new();
    for x in 0..chosen.len() {
        for y in x + 1..chosen.len() {
            if let Some(k) = source.bond_between(chosen[x], chosen[y]) {
                bonds.push(QueryBond {
                    a: x,
                    b: y,
                    expr: random_bond_expr(rng, source.bond(k).kind),
                });
            }
        }
    }
    PatternGraph::new(atoms, bonds).unwrap()
}
