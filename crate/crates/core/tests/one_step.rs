mod common;

use common::cs;
use retroplan_chem::parse_smiles;
use retroplan_core::one_step::{reacting_atoms, StrategyConfig, StrategyKind};
use retroplan_core::settings::{load_corpus, load_templates};
use retroplan_core::{OneStep, OneStepError};
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

fn bundled() -> OneStep {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let templates = load_templates(&data.join("templates.jsonl")).unwrap();
    let corpus = load_corpus(&data.join("corpus.jsonl")).unwrap();
    corpus.validate(&templates).unwrap();
    OneStep::new(Arc::new(templates), Arc::new(corpus), &StrategyKind::ALL, StrategyConfig::default()).unwrap()
}

fn keys(list: &[retroplan_core::Suggestion]) -> Vec<String> {
    list.iter().map(|s| s.key()).collect()
}

#[test]
fn ester_disconnection() {
    let os = bundled();
    let target = parse_smiles("CCOC(=O)c1ccccc1").unwrap();
    let list = os.suggest(&target, &BTreeMap::new());
    let k = keys(&list);
    let acid = format!("{}.{}", cs("CCO"), cs("O=C(O)c1ccccc1"));
    let pos = k.iter().position(|x| *x == acid).unwrap_or_else(|| panic!("{k:?}"));
    let s = &list[pos];
    assert!(s.template_ids.contains("ester_acid"));
    assert!(s.strategy_provenance.contains(&StrategyKind::TemplateRelevance));
    assert_eq!(reacting_atoms(&target, s).unwrap().len(), 4);
    for w in list.windows(2) {
        assert!(w[0].rank_score >= w[1].rank_score);
    }
    for s in &list {
        assert!(s.plausibility >= os.config().filter_threshold);
        assert!((0.0..=1.0).contains(&s.rank_score));
    }
}

#[test]
fn strategies_can_be_toggled() {
    let os = bundled();
    let target = parse_smiles("CC(=O)Nc1ccccc1").unwrap();
    for kind in StrategyKind::ALL {
        let one = os.with(&[kind], StrategyConfig::default()).unwrap();
        let list = one.suggest(&target, &BTreeMap::new());
        assert!(!list.is_empty(), "{kind:?}");
        assert!(list.iter().all(|s| s.strategy_provenance == [kind].into()));
    }
    let both = os.suggest(&target, &BTreeMap::new());
    assert!(both.iter().any(|s| s.strategy_provenance.len() == 2));
}

#[test]
fn buyable_precursors_break_ties() {
    let os = bundled();
    let target = parse_smiles("c1ccc(-c2ccncc2)cc1").unwrap();
    let cfg = StrategyConfig {
        top_n_returned: 50,
        ..StrategyConfig::default()
    };
    let tr = os.with(&[StrategyKind::TemplateRelevance], cfg).unwrap();
    let none = tr.suggest(&target, &BTreeMap::new());
    let suzuki: Vec<&str> = none
        .iter()
        .filter(|s| s.template_ids.contains("suzuki"))
        .map(|s| s.precursors[0].as_str())
        .collect();
    assert_eq!(suzuki.len(), 2);
    let buy: BTreeMap<_, _> = [(cs("Brc1ccncc1"), 1.0), (cs("OB(O)c1ccccc1"), 1.0)].into();
    let with = tr.suggest(&target, &buy);
    let first = with.iter().find(|s| s.template_ids.contains("suzuki")).unwrap();
    assert_eq!(first.key(), format!("{}.{}", cs("Brc1ccncc1"), cs("OB(O)c1ccccc1")));
}

#[test]
fn no_match_gives_nothing() {
    let os = bundled();
    assert!(os.suggest(&parse_smiles("C1CCC2(CC1)CCCC2").unwrap(), &BTreeMap::new()).is_empty());
}

#[test]
fn retrosim_needs_a_corpus() {
    let os = bundled();
    let err = OneStep::new(
        Arc::new(os.templates().clone()),
        Arc::new(Default::default()),
        &[StrategyKind::Retrosim],
        StrategyConfig::default(),
    )
    .unwrap_err();
    assert!(matches!(err, OneStepError::EmptyCorpus));
    let bad = StrategyConfig {
        max_cum_prob: 1.5,
        ..StrategyConfig::default()
    };
    assert!(os.with(&StrategyKind::ALL, bad).is_err());
}
