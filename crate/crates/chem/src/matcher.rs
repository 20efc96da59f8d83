//! Backtracking substructure search.

use crate::mol::MolGraph;
use crate::pattern::{atom_matches, bond_matches, PatternGraph};

/// Every injective map from pattern atoms to target atoms that satisfies
/// all atom and bond queries. `map[i]` is the target atom for pattern atom
/// `i`; results are sorted lexicographically. Stereo is ignored.
pub fn match_pattern(p: &PatternGraph, mol: &MolGraph) -> Vec<Vec<usize>> {
    let n = p.atom_count();
    if n == 0 || n > mol.atom_count() {
        return Vec::new();
    }
    let order = search_order(p);
    let mut state = State {
        p,
        mol,
        order: &order,
        map: vec![usize::MAX; n],
        used: vec![false; mol.atom_count()],
        out: Vec::new(),
    };
    state.extend(0);
    let mut out = state.out;
    out.sort();
    out
}

/// Whether at least one match exists.
pub fn has_match(p: &PatternGraph, mol: &MolGraph) -> bool {
    !match_pattern(p, mol).is_empty()
}

/// Pattern atoms in breadth-first order per component, each paired with an
/// earlier neighbor (if any) whose image constrains the candidates.
fn search_order(p: &PatternGraph) -> Vec<(usize, Option<usize>)> {
    let n = p.atom_count();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = std::collections::VecDeque::from([(root, None)]);
        while let Some((u, anchor)) = queue.pop_front() {
            order.push((u, anchor));
            for &(v, _) in p.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back((v, Some(u)));
                }
            }
        }
    }
    order
}

struct State<'a> {
    p: &'a PatternGraph,
    mol: &'a MolGraph,
    order: &'a [(usize, Option<usize>)],
    map: Vec<usize>,
    used: Vec<bool>,
    out: Vec<Vec<usize>>,
}

impl State<'_> {
    fn extend(&mut self, depth: usize) {
        if depth == self.order.len() {
            self.out.push(self.map.clone());
            return;
        }
        let (q, anchor) = self.order[depth];
        let candidates: Vec<usize> = match anchor {
            Some(a) => self.mol.neighbors(self.map[a]).iter().map(|(n, _)| *n).collect(),
            None => (0..self.mol.atom_count()).collect(),
        };
        for t in candidates {
            if self.used[t] || !self.feasible(q, t) {
                continue;
            }
            self.map[q] = t;
            self.used[t] = true;
            self.extend(depth + 1);
            self.used[t] = false;
            self.map[q] = usize::MAX;
        }
    }

    fn feasible(&self, q: usize, t: usize) -> bool {
        if !atom_matches(self.p.atom(q), self.mol, t) {
            return false;
        }
        self.p.neighbors(q).iter().all(|&(qn, qb)| {
            let tn = self.map[qn];
            if tn == usize::MAX {
                return true;
            }
            match self.mol.bond_between(t, tn) {
                Some(tb) => bond_matches(self.p.bond(qb), self.mol, tb),
                None => false,
            }
        })
    }
}
