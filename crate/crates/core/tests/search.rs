mod common;

use common::{cs, prices, signature, Table};
use retroplan_core::search::{Termination, TreeNode};
use retroplan_core::{
    enumerate_routes, search, uct_score, Algorithm, Progress, SearchConfig, SearchContext, SearchError, SearchGraph,
};
use retroplan_oracles::synthetic::{uct_reference, SyntheticStore};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::Ordering;

fn cfg(algorithm: Algorithm, max_depth: usize) -> SearchConfig {
    SearchConfig {
        algorithm,
        max_depth,
        max_routes: 1_000_000,
        ..SearchConfig::default()
    }
}

fn run(target: &str, table: &Table, buy: &BTreeMap<retroplan_chem::CanonicalSmiles, f64>, c: &SearchConfig) -> SearchGraph {
    search(target, c, &SearchContext::new(table, buy)).unwrap()
}

fn route_set(g: &SearchGraph) -> BTreeSet<String> {
    enumerate_routes(g, g.config()).iter().map(|r| signature(&r.tree)).collect()
}

#[test]
fn both_searches_match_brute_force_routes() {
    for seed in 0..20 {
        let store = SyntheticStore::random(seed, 8 + (seed as usize * 7) % 23);
        let table = Table::from_synthetic(&store);
        let buy: BTreeMap<_, _> = store.buyable.iter().map(|s| (cs(s), 1.0)).collect();
        let expected = store.routes(3);
        for alg in [Algorithm::Mcts, Algorithm::RetroStar] {
            let g = run(&store.target, &table, &buy, &cfg(alg, 3));
            assert_eq!(g.termination(), Termination::Exhausted, "seed {seed} {alg}");
            assert_eq!(route_set(&g), expected, "seed {seed} {alg}");
            assert_eq!(g.solved(), !expected.is_empty(), "seed {seed} {alg}");
            assert!(g.values_consistent());
            for r in enumerate_routes(&g, g.config()) {
                assert!(r.is_valid(g.config()));
            }
        }
    }
}

#[test]
fn documents_are_deterministic_and_round_trip() {
    let store = SyntheticStore::random(7, 25);
    let table = Table::from_synthetic(&store);
    let buy: BTreeMap<_, _> = store.buyable.iter().map(|s| (cs(s), 2.5)).collect();
    for alg in [Algorithm::Mcts, Algorithm::RetroStar] {
        let a = serde_json::to_string(&run(&store.target, &table, &buy, &cfg(alg, 4)).to_document()).unwrap();
        let b = serde_json::to_string(&run(&store.target, &table, &buy, &cfg(alg, 4)).to_document()).unwrap();
        assert_eq!(a, b);
        let doc = serde_json::from_str(&a).unwrap();
        let back = SearchGraph::from_document(&doc).unwrap();
        assert_eq!(serde_json::to_string(&back.to_document()).unwrap(), a);
        assert!(back.values_consistent());
    }
}

#[test]
fn single_step_solution() {
    let mut t = Table::default();
    t.add("CCO", &["C", "CO"], 0.8);
    let buy = prices(&[("C", 1.0), ("CO", 3.0)]);
    for alg in [Algorithm::Mcts, Algorithm::RetroStar] {
        let g = run("OCC", &t, &buy, &cfg(alg, 6));
        assert!(g.solved());
        let routes = g.routes(None);
        assert_eq!(routes.len(), 1);
        assert_eq!(routes[0].metrics.reaction_count, 1);
        assert_eq!(routes[0].metrics.starting_material_cost, 4.0);
    }
}

#[test]
fn target_already_buyable() {
    let g = run("CCO", &Table::default(), &prices(&[("CCO", 1.0)]), &cfg(Algorithm::Mcts, 6));
    assert_eq!(g.termination(), Termination::TargetBuyable);
    assert!(g.solved());
    assert_eq!(g.routes(None).len(), 1);
}

#[test]
fn expensive_leaves_are_not_buyable() {
    let mut t = Table::default();
    t.add("CCO", &["C", "CO"], 0.8);
    let buy = prices(&[("C", 1.0), ("CO", 150.0)]);
    let g = run("CCO", &t, &buy, &cfg(Algorithm::Mcts, 6));
    assert!(!g.solved());
    let dear = SearchConfig {
        max_price: 200.0,
        ..cfg(Algorithm::Mcts, 6)
    };
    assert!(run("CCO", &t, &buy, &dear).solved());
}

#[test]
fn one_chemical_budget_leaves_root_unproven() {
    let mut t = Table::default();
    t.add("CCO", &["C", "CO"], 0.8);
    let buy = prices(&[("C", 1.0), ("CO", 1.0)]);
    for alg in [Algorithm::Mcts, Algorithm::RetroStar] {
        let c = SearchConfig {
            max_chemicals: 1,
            ..cfg(alg, 6)
        };
        let g = run("CCO", &t, &buy, &c);
        assert_eq!(g.termination(), Termination::ChemicalLimit);
        assert_eq!(g.chemicals().len(), 1);
        assert!(!g.solved());
        assert!(g.routes(None).is_empty());
    }
}

#[test]
fn chemical_limit_is_never_exceeded() {
    for seed in 0..10 {
        let store = SyntheticStore::random(100 + seed, 30);
        let table = Table::from_synthetic(&store);
        let buy: BTreeMap<_, _> = store.buyable.iter().map(|s| (cs(s), 1.0)).collect();
        for alg in [Algorithm::Mcts, Algorithm::RetroStar] {
            for limit in [2, 5, 9] {
                let c = SearchConfig {
                    max_chemicals: limit,
                    ..cfg(alg, 5)
                };
                let g = run(&store.target, &table, &buy, &c);
                assert!(g.chemicals().len() <= limit);
                for r in g.reactions() {
                    assert!(g.chemical(r.parent).depth < 5);
                }
            }
        }
    }
}

#[test]
fn branching_limit_keeps_best_ranked() {
    let mut t = Table::default();
    for (i, s) in ["CC", "CCC", "CCCC", "CCCCC"].iter().enumerate() {
        t.add("CCO", &[s, "O"], 0.9 - i as f64 * 0.1);
    }
    let c = SearchConfig {
        max_branching: 2,
        ..cfg(Algorithm::Mcts, 6)
    };
    let g = run("CCO", &t, &prices(&[]), &c);
    let ids: Vec<&str> = g.reactions().iter().map(|r| r.id.as_str()).collect();
    assert_eq!(ids, ["CC.O>>CCO", "CCC.O>>CCO"]);
}

#[test]
fn retro_star_prefers_the_cheaper_reaction() {
    let mut t = Table::default();
    t.add("CCCO", &["CC", "CO"], 0.2);
    t.add("CCCO", &["CCC", "O"], 0.9);
    t.add("CC", &["C"], 0.9);
    t.add("CO", &["C", "O"], 0.9);
    t.add("CCC", &["CC", "C"], 0.9);
    let buy = prices(&[("C", 1.0), ("O", 1.0)]);
    let c = SearchConfig {
        return_first: true,
        ..cfg(Algorithm::RetroStar, 6)
    };
    let g = run("CCCO", &t, &buy, &c);
    assert_eq!(g.termination(), Termination::FirstRoute);
    let expanded: Vec<&str> = g.chemicals().iter().filter(|c| c.expanded).map(|c| c.smiles.as_str()).collect();
    assert_eq!(expanded, ["CCCO", "CC", "CCC"]);
    assert!(!g.chemical(g.find(&cs("CO")).unwrap()).expanded);
    assert_eq!(g.iterations(), 3);
    let routes = g.routes(None);
    assert_eq!(routes.len(), 1);
    assert_eq!(signature(&routes[0].tree), "CCCO<CCC<C,CC<C>>,O>");
}

#[test]
fn shared_intermediate_gives_two_routes() {
    // target -> A + B, A and B both made from the shared intermediate I,
    // which has two ways in.
    let mut t = Table::default();
    t.add("CCCCCO", &["CCO", "CCCO"], 0.9);
    t.add("CCO", &["CCCCO"], 0.9);
    t.add("CCCO", &["CCCCO"], 0.9);
    t.add("CCCCO", &["C", "CO"], 0.7);
    let buy = prices(&[("C", 1.0), ("CO", 1.0)]);
    let g = run("CCCCCO", &t, &buy, &cfg(Algorithm::Mcts, 6));
    assert_eq!(g.routes(None).len(), 1);
    let doc = serde_json::to_value(g.to_document()).unwrap();
    let text = doc.to_string();
    assert_eq!(text.matches("\"repeat\":true").count(), 1);

    let mut t2 = Table::default();
    t2.add("CCCO", &["CCO"], 0.9);
    t2.add("CCO", &["CO"], 0.9);
    t2.add("CCO", &["C"], 0.5);
    let g2 = run("CCCO", &t2, &prices(&[("C", 1.0), ("CO", 1.0)]), &cfg(Algorithm::Mcts, 6));
    let sigs: Vec<String> = g2.routes(None).iter().map(|r| signature(&r.tree)).collect();
    assert_eq!(sigs, ["CCCO<CCO<CO>>", "CCCO<CCO<C>>"]);
}

#[test]
fn route_count_is_capped() {
    // 300 single-step proofs of the target.
    let mut t = Table::default();
    let mut buy = Vec::new();
    let names: Vec<String> = (1..=300).map(|i| format!("{}O", "C".repeat(i))).collect();
    for (i, n) in names.iter().enumerate() {
        t.add("OCCO", &[n], 0.5 + (i % 7) as f64 * 0.01);
        buy.push((n.as_str(), 1.0));
    }
    let c = SearchConfig {
        max_branching: 300,
        ..SearchConfig::default()
    };
    let g = run("OCCO", &t, &prices(&buy), &c);
    let routes = g.routes(None);
    assert_eq!(routes.len(), 200);
    for w in routes.windows(2) {
        assert!(w[0].metrics.avg_plausibility >= w[1].metrics.avg_plausibility);
    }
}

#[test]
fn cycles_do_not_form_routes() {
    let mut t = Table::default();
    t.add("CCO", &["CCCO"], 0.9);
    t.add("CCCO", &["CCO"], 0.9);
    let g = run("CCO", &t, &prices(&[]), &cfg(Algorithm::Mcts, 6));
    assert_eq!(g.termination(), Termination::Exhausted);
    assert!(!g.solved());
    assert!(g.routes(None).is_empty());
}

#[test]
fn depth_limit_is_respected() {
    let mut t = Table::default();
    t.add("CCCCO", &["CCCO"], 0.9);
    t.add("CCCO", &["CCO"], 0.9);
    t.add("CCO", &["CO"], 0.9);
    let buy = prices(&[("CO", 1.0)]);
    for alg in [Algorithm::Mcts, Algorithm::RetroStar] {
        assert!(!run("CCCCO", &t, &buy, &cfg(alg, 2)).solved());
        let g = run("CCCCO", &t, &buy, &cfg(alg, 3));
        assert!(g.solved());
        assert_eq!(g.routes(None)[0].metrics.depth, 3);
    }
}

#[test]
fn cancel_and_progress() {
    let store = SyntheticStore::random(3, 30);
    let table = Table::from_synthetic(&store);
    let buy: BTreeMap<_, _> = store.buyable.iter().map(|s| (cs(s), 1.0)).collect();
    let p = Progress::default();
    p.cancel.store(true, Ordering::Relaxed);
    let mut ctx = SearchContext::new(&table, &buy);
    ctx.progress = Some(&p);
    let g = search(&store.target, &cfg(Algorithm::Mcts, 4), &ctx).unwrap();
    assert_eq!(g.termination(), Termination::Cancelled);
    assert_eq!(g.iterations(), 0);

    let p = Progress::default();
    ctx.progress = Some(&p);
    let g = search(&store.target, &cfg(Algorithm::Mcts, 4), &ctx).unwrap();
    let routes = g.routes(Some(&p));
    let snap = p.snapshot();
    assert_eq!((snap.chemicals, snap.iterations, snap.routes), (g.chemicals().len(), g.iterations(), routes.len()));
}

#[test]
fn time_limit_stops_search() {
    struct Slow(Table);
    impl retroplan_core::ExpansionStrategy for Slow {
        fn expand(
            &self,
            t: &retroplan_chem::CanonicalSmiles,
            b: &dyn retroplan_core::BuyableView,
        ) -> Vec<retroplan_core::Suggestion> {
            std::thread::sleep(std::time::Duration::from_millis(30));
            self.0.expand(t, b)
        }
    }
    let store = SyntheticStore::random(11, 30);
    let slow = Slow(Table::from_synthetic(&store));
    let buy: BTreeMap<_, _> = BTreeMap::new();
    let c = SearchConfig {
        expansion_time_s: Some(0.05),
        ..cfg(Algorithm::Mcts, 6)
    };
    let g = search(&store.target, &c, &SearchContext::new(&slow, &buy)).unwrap();
    assert!(matches!(g.termination(), Termination::TimeLimit | Termination::Exhausted));
    assert!(g.iterations() <= 3);
}

#[test]
fn unparsable_target_and_bad_config() {
    let t = Table::default();
    let buy = prices(&[]);
    let ctx = SearchContext::new(&t, &buy);
    assert!(matches!(
        search("C1CC", &SearchConfig::default(), &ctx),
        Err(SearchError::TargetUnparsable(_))
    ));
    let bad = SearchConfig {
        max_branching: 0,
        ..SearchConfig::default()
    };
    assert!(matches!(search("CCO", &bad, &ctx), Err(SearchError::InvalidConfig(_))));
}

#[test]
fn uct_matches_reference_on_random_inputs() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(42);
    let mut t = Table::default();
    t.add("CCO", &["C"], 0.5);
    let g = run("CCO", &t, &prices(&[]), &cfg(Algorithm::Mcts, 2));
    let mut r = g.reaction(0).clone();
    for _ in 0..10_000 {
        r.score = rng.gen_range(0.0..=1.0);
        r.value = rng.gen_range(0.0..=1.0);
        r.visit_count = rng.gen_range(1..1000);
        let n = rng.gen_range(1..100_000);
        let c = rng.gen_range(0.0..4.0);
        let got = uct_score(&r, n, c).unwrap();
        let want = uct_reference(r.score, r.value, r.visit_count, n, c);
        assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "{got} vs {want}");
    }
    r.visit_count = 0;
    assert!(matches!(uct_score(&r, 5, 1.0), Err(SearchError::Domain(_))));
}

#[test]
fn route_documents_are_trees() {
    let store = SyntheticStore::random(5, 20);
    let table = Table::from_synthetic(&store);
    let buy: BTreeMap<_, _> = store.buyable.iter().map(|s| (cs(s), 1.0)).collect();
    let g = run(&store.target, &table, &buy, &cfg(Algorithm::Mcts, 4));
    for r in g.routes(None) {
        fn check(n: &TreeNode) {
            match n {
                TreeNode::Chemical { children, attributes, .. } => {
                    assert!(children.len() <= 1);
                    assert!(!attributes.repeat);
                    if children.is_empty() {
                        assert!(attributes.buyable);
                    }
                    children.iter().for_each(check);
                }
                TreeNode::Reaction { children, .. } => {
                    assert!(!children.is_empty());
                    children.iter().for_each(check);
                }
            }
        }
        check(&r.tree);
    }
}
