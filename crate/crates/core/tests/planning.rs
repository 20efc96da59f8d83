use retroplan_core::{search, SearchContext, Settings};
use std::path::Path;

fn data() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

#[test]
fn bundled_targets() {
    let mut settings = Settings::load(&data().join("retroplan.toml")).unwrap();
    settings.data_dir = tempfile::tempdir().unwrap().path().to_path_buf();
    let stores = settings.load_stores().unwrap();
    let os = stores.one_step(&settings).unwrap();
    let view = stores.catalog.view(settings.search.max_price);
    let targets = std::fs::read_to_string(data().join("targets.txt")).unwrap();
    let mut solved = Vec::new();
    for t in targets.lines().filter(|l| !l.trim().is_empty()) {
        let g = search(t, &settings.search, &SearchContext::new(&os, &view)).unwrap();
        assert!(g.values_consistent());
        let routes = g.routes(None);
        assert_eq!(g.solved(), !routes.is_empty(), "{t}");
        for r in &routes {
            assert!(r.is_valid(&settings.search));
        }
        solved.push(g.solved());
    }
    assert_eq!(solved, [true, true, true, true, true, true, true, true, true, false]);
}
