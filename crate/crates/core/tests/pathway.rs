mod common;

use common::{prices, Table};
use retroplan_core::search::TreeNode;
use retroplan_core::{compute_metrics, filter_routes, search, sort_routes, Route, RouteFilter, SearchConfig, SearchContext};
use serde_json::json;

// Average atomic weights, written out independently of the toolkit.
fn mw(c: f64, h: f64, o: f64) -> f64 {
    c * 12.011 + h * 1.008 + o * 15.999
}

fn routes(t: &Table, buy: &[(&str, f64)]) -> Vec<Route> {
    let b = prices(buy);
    let g = search("CCCCCO", &SearchConfig::default(), &SearchContext::new(t, &b)).unwrap();
    g.routes(None)
}

#[test]
fn linear_route_metrics() {
    let mut t = Table::default();
    t.add("CCCCCO", &["CCCCO", "C"], 0.8);
    t.add("CCCCO", &["CCCO", "C"], 0.6);
    t.add("CCCO", &["CCO", "C"], 0.4);
    let r = routes(&t, &[("C", 2.0), ("CCO", 5.0)]);
    assert_eq!(r.len(), 1);
    let m = &r[0].metrics;
    assert_eq!((m.depth, m.reaction_count, m.longest_linear_sequence), (3, 3, 3));
    assert!((m.avg_plausibility - 0.6).abs() < 1e-12);
    assert!((m.avg_template_score - 0.6).abs() < 1e-12);
    assert_eq!(m.starting_material_cost, 11.0);
    assert!(!m.cost_is_lower_bound);
    let ae = mw(5.0, 12.0, 1.0) / (3.0 * mw(1.0, 4.0, 0.0) + mw(2.0, 6.0, 1.0));
    assert!((m.atom_economy.unwrap() - ae).abs() < 1e-3, "{:?} {ae}", m.atom_economy);
}

#[test]
fn convergent_route_metrics() {
    let mut t = Table::default();
    t.add("CCCCCO", &["CCO", "CCCC"], 0.9);
    t.add("CCO", &["C", "CO"], 0.5);
    t.add("CCCC", &["CC"], 0.7);
    let r = routes(&t, &[("C", 1.0), ("CO", 1.5), ("CC", 4.0)]);
    assert_eq!(r.len(), 1);
    let m = &r[0].metrics;
    assert_eq!((m.depth, m.reaction_count, m.longest_linear_sequence), (2, 3, 2));
    assert!((m.avg_plausibility - 0.7).abs() < 1e-12);
    assert_eq!(m.starting_material_cost, 6.5);
    let ae = mw(5.0, 12.0, 1.0) / (mw(1.0, 4.0, 0.0) + mw(1.0, 4.0, 1.0) + mw(2.0, 6.0, 0.0));
    assert!((m.atom_economy.unwrap() - ae).abs() < 1e-3);
}

fn leaf(smiles: &str, price: Option<f64>) -> serde_json::Value {
    let mut attrs = json!({"visit_count": 0, "buyable": true, "proven": true, "depth": 1,
        "expanded": false, "value": 1.0});
    if let Some(p) = price {
        attrs["price_per_g"] = json!(p);
    }
    json!({"type": "chemical", "smiles": smiles, "attributes": attrs, "children": []})
}

fn one_step(target: &str, leaves: Vec<serde_json::Value>, plaus: f64, score: f64) -> TreeNode {
    serde_json::from_value(json!({
        "type": "chemical", "smiles": target,
        "attributes": {"visit_count": 1, "buyable": false, "proven": true, "depth": 0, "expanded": true, "value": 1.0},
        "children": [{
            "type": "reaction", "id": "x",
            "attributes": {"score": score, "visit_count": 1, "value": 1.0, "plausibility": plaus,
                "template_ids": [], "strategy_provenance": [], "precedent_reaction_ids": []},
            "children": leaves
        }]
    }))
    .unwrap()
}

#[test]
fn missing_price_is_charged_at_cap() {
    let tree = one_step("CCO", vec![leaf("C", Some(3.0)), leaf("CO", None)], 1.0, 1.0);
    let m = compute_metrics(&tree, 100.0);
    assert_eq!(m.starting_material_cost, 103.0);
    assert!(m.cost_is_lower_bound);
}

#[test]
fn bare_target_route() {
    let m = compute_metrics(&serde_json::from_value(leaf("CCO", Some(1.0))).unwrap(), 100.0);
    assert_eq!((m.depth, m.reaction_count), (0, 0));
    assert_eq!((m.avg_plausibility, m.avg_template_score), (1.0, 1.0));
    assert!((m.atom_economy.unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn sort_order_and_stability() {
    let mk = |target: &str, plaus: f64, score: f64, n: usize| {
        let leaves = (0..n).map(|i| leaf(&"C".repeat(i + 1), Some(1.0))).collect();
        Route::from_tree(one_step(target, leaves, plaus, score), 100.0)
    };
    let two_step = Route::from_tree(
        serde_json::from_value(json!({
            "type": "chemical", "smiles": "CCCO",
            "attributes": {"visit_count": 1, "buyable": false, "proven": true, "depth": 0, "expanded": true, "value": 1.0},
            "children": [{"type": "reaction", "id": "a",
                "attributes": {"score": 1.0, "visit_count": 1, "value": 1.0, "plausibility": 1.0,
                    "template_ids": [], "strategy_provenance": [], "precedent_reaction_ids": []},
                "children": [serde_json::to_value(one_step("CCO", vec![leaf("C", Some(1.0))], 1.0, 1.0)).unwrap()]}]
        }))
        .unwrap(),
        100.0,
    );
    let input = vec![
        two_step,
        mk("CCO", 0.5, 0.9, 1),
        mk("CCCO", 0.5, 0.9, 2),
        mk("CCCCO", 0.9, 0.1, 1),
        mk("OCCO", 0.5, 0.95, 1),
    ];
    let sorted = sort_routes(input);
    let order: Vec<String> = sorted.iter().map(|r| r.tree.smiles().unwrap().to_string()).collect();
    assert_eq!(order, ["CCCCO", "OCCO", "CCO", "CCCO", "CCCO"]);
    assert_eq!(sorted[4].metrics.reaction_count, 2);
}

#[test]
fn filters() {
    let mut t = Table::default();
    t.add("CCCCCO", &["CCCCO", "C"], 0.8);
    t.add("CCCCCO", &["CCCO", "CC"], 0.3);
    t.add("CCCCO", &["CCCO", "C"], 0.6);
    let all = routes(&t, &[("C", 1.0), ("CC", 1.0), ("CCCO", 1.0)]);
    assert_eq!(all.len(), 2);
    let by = |f: RouteFilter| filter_routes(all.clone(), &f).unwrap().len();
    assert_eq!(by(RouteFilter::default()), 2);
    assert_eq!(by(RouteFilter { must_include: vec!["OCCCC".into()], ..Default::default() }), 1);
    assert_eq!(by(RouteFilter { must_exclude: vec!["CC".into()], ..Default::default() }), 1);
    assert_eq!(by(RouteFilter { max_depth: Some(1), ..Default::default() }), 1);
    assert_eq!(by(RouteFilter { min_avg_plausibility: Some(0.5), ..Default::default() }), 1);
    assert_eq!(by(RouteFilter { min_avg_plausibility: Some(0.9), ..Default::default() }), 0);
    assert!(filter_routes(all, &RouteFilter { must_include: vec!["C1C".into()], ..Default::default() }).is_err());
}
