//! Random expansion tables over small alkanes, and a brute-force route
//! enumerator to check searches against.

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use retroplan_chem::canonicalize;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone)]
pub struct SyntheticStore {
    pub target: String,
    pub molecules: Vec<String>,
    /// Product to (precursor set, score). Sets never contain their product
    /// and are distinct per product.
    pub table: BTreeMap<String, Vec<(Vec<String>, f64)>>,
    pub buyable: BTreeSet<String>,
}

fn alkane(n: usize) -> String {
    canonicalize(&"C".repeat(n)).expect("alkane").to_string()
}

impl SyntheticStore {
    /// `size` molecules (at most 30), the first being the target.
    pub fn random(seed: u64, size: usize) -> Self {
        let mut rng = StdRng::seed_from_u64(seed);
        let size = size.clamp(2, 30);
        let molecules: Vec<String> = (1..=size).map(alkane).collect();
        let buyable: BTreeSet<String> = molecules[1..]
            .iter()
            .filter(|_| rng.gen_bool(0.35))
            .cloned()
            .collect();
        let mut table = BTreeMap::new();
        for (i, m) in molecules.iter().enumerate() {
            if buyable.contains(m) {
                continue;
            }
            let others: Vec<&String> = molecules.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, x)| x).collect();
            let mut sets: Vec<(Vec<String>, f64)> = Vec::new();
            for _ in 0..rng.gen_range(0..=3) {
                let k = rng.gen_range(1..=3).min(others.len());
                let mut set: Vec<String> = others.choose_multiple(&mut rng, k).map(|s| (*s).clone()).collect();
                set.sort();
                if sets.iter().any(|(s, _)| *s == set) {
                    continue;
                }
                sets.push((set, rng.gen_range(0.05..1.0)));
            }
            table.insert(m.clone(), sets);
        }
        SyntheticStore {
            target: molecules[0].clone(),
            molecules,
            table,
            buyable,
        }
    }

    /// Every route from the target with at most `max_depth` reactions on
    /// any path and no chemical repeated on a path, as signatures.
    pub fn routes(&self, max_depth: usize) -> BTreeSet<String> {
        self.routes_from(&self.target, 0, max_depth, &mut Vec::new())
            .into_iter()
            .collect()
    }

    fn routes_from(&self, x: &str, depth: usize, max_depth: usize, path: &mut Vec<String>) -> Vec<String> {
        if self.buyable.contains(x) {
            return vec![x.to_string()];
        }
        if depth >= max_depth {
            return Vec::new();
        }
        let mut out = Vec::new();
        path.push(x.to_string());
        for (set, _) in self.table.get(x).into_iter().flatten() {
            if set.iter().any(|c| path.contains(c)) {
                continue;
            }
            let mut combos: Vec<Vec<String>> = vec![Vec::new()];
            for c in set {
                let subs = self.routes_from(c, depth + 1, max_depth, path);
                combos = combos
                    .iter()
                    .flat_map(|p| {
                        subs.iter().map(move |s| {
                            let mut p = p.clone();
                            p.push(s.clone());
                            p
                        })
                    })
                    .collect();
            }
            for mut kids in combos {
                kids.sort();
                out.push(format!("{x}<{}>", kids.join(",")));
            }
        }
        path.pop();
        out
    }
}

/// The selection score written out term by term.
pub fn uct_reference(s: f64, v: f64, n_r: u64, n_parent: u64, c: f64) -> f64 {
    let exploit = (s * v) / (n_r as f64);
    let ln_n = (n_parent as f64).log2() * std::f64::consts::LN_2;
    exploit + c * (ln_n / n_r as f64).sqrt()
}
