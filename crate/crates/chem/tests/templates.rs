use retroplan_chem::{canonicalize, parse_smiles, RetroTemplate, TemplateRecord};
use std::collections::HashMap;

const TEMPLATES: &str = include_str!("../../../data/templates.jsonl");
const CORPUS: &str = include_str!("../../../data/corpus.jsonl");

fn templates() -> HashMap<String, RetroTemplate> {
    TEMPLATES
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let rec: TemplateRecord = serde_json::from_str(l).unwrap();
            let t = RetroTemplate::from_record(&rec).unwrap_or_else(|e| panic!("{}: {e}", rec.id));
            (rec.id.clone(), t)
        })
        .collect()
}

#[test]
fn every_curated_reaction_is_reproduced() {
    let templates = templates();
    let mut checked = 0;
    for line in CORPUS.lines().filter(|l| !l.trim().is_empty()) {
        let rec: serde_json::Value = serde_json::from_str(line).unwrap();
        let id = rec["reaction_id"].as_str().unwrap();
        let t = &templates[rec["template_id"].as_str().unwrap()];
        let (reactants, product) = rec["rxn_smiles"].as_str().unwrap().split_once(">>").unwrap();
        let product = parse_smiles(product).unwrap();
        let mut expected: Vec<String> = reactants
            .split('.')
            .map(|s| canonicalize(s).unwrap().into_string())
            .collect();
        expected.sort();
        expected.dedup();
        let app = t.apply(&product);
        let produced: Vec<Vec<String>> = app
            .sets
            .iter()
            .map(|s| s.precursors.iter().map(|c| c.to_string()).collect())
            .collect();
        assert!(
            produced.contains(&expected),
            "{id}: expected {expected:?}, got {produced:?}"
        );
        checked += 1;
    }
    assert_eq!(checked, 75);
}

#[test]
fn template_references_resolve_to_corpus_reactions() {
    let ids: Vec<String> = CORPUS
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["reaction_id"].as_str().unwrap().to_string())
        .collect();
    for t in templates().values() {
        assert!(t.count >= 1);
        for r in &t.references {
            assert!(ids.contains(r), "{} cites unknown {r}", t.id);
        }
    }
}
