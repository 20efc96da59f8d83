//! Release gate: one PASS/FAIL line per headline requirement.
//!
//! Every check compares against an independent reference (brute force,
//! closed form or hand-computed fixture) rather than against the code's
//! own output. A failing check prints its reason and the binary exits 1.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use common::{cs, signature, Table};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use retroplan_chem::{canonical_smiles, match_pattern, parse_smiles, CanonicalSmiles};
use retroplan_core::search::{Termination, TreeNode};
use retroplan_core::{
    enumerate_routes, search, sort_routes, uct_score, Algorithm, BuyableView, ExpansionStrategy, Route, SearchConfig,
    SearchContext, SearchGraph, Settings, Suggestion, DEFAULT_MAX_PRICE,
};
use retroplan_gateway::{serve_on, AppState};
use retroplan_oracles::generate::{random_mol, random_pattern};
use retroplan_oracles::matching::all_matches;
use retroplan_oracles::synthetic::{uct_reference, SyntheticStore};
use retroplan_oracles::isomorphic;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::panic::AssertUnwindSafe;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").canonicalize().unwrap()
}

// Parser

const DRUGLIKE: &str = include_str!("../../chem/tests/data/druglike.tsv");

/// Approved-drug targets that must stay in the corpus.
const FIGURE_TARGETS: &[&str] = &[
    "CCCS(=O)(=O)NC1CC(N(C)c2ncnc3[nH]ccc23)C1",
    "O=C(Nc1ccc(OC(F)(F)Cl)cc1)c1cnc(N2CC[C@@H](O)C2)c(-c2ccn[nH]2)c1",
    "CC1(C)CC(=O)N(CCCCN2CCN(c3ncccn3)CC2)C(=O)C1",
    "CC(C)Nc1nc2cc(Cl)c(Cl)cc2n1[C@H]1O[C@@H](CO)[C@H](O)[C@@H]1O",
    "CCOC(=O)[C@H](Cc1ccc(F)cc1)NC(=O)[C@@H](N)Cc1ccc(N(CCCl)CCCl)cc1",
    "C[C@H](Nc1ccc(C#N)n(C)c1=O)c1cc2cc(Cl)ccc2[nH]c1=O",
    "CC(C)OC(=O)CNc1cccc(CN(Cc2ccc(-n3cccn3)cc2)S(=O)(=O)c2cccnc2)n1",
    "CC1(C)CCC(C)(C)c2cc(Cn3cccn3)c(/C=C/c3ccc(C(=O)O)cc3)cc21",
    "CCCN=C1S/C(=C\\c2ccc(OC[C@H](O)CO)c(Cl)c2)C(=O)N1c1ccccc1C",
    "Cc1cc(C[C@@H](NC(=O)N2CCC(c3cc4ccccc4[nH]c3=O)CC2)C(=O)N2CCN(C3CCN(C)CC3)CC2)cc2cn[nH]c12",
    "Cc1cc(C2=NO[C@@](c3cc(Cl)c(Cl)c(Cl)c3)(C(F)(F)F)C2)sc1C(=O)NCC(=O)NCC(F)(F)F",
    "CCN1C(=O)N(c2c(F)c(OC)cc(OC)c2F)Cc2cnc3[nH]c(CN4CCOCC4)cc3c21",
    "O=C(O)C[C@H]1CCc2c1[nH]c1ccc(OCc3ccc(C4CCCC4)c(C(F)(F)F)c3)cc21",
    "COC1(C(=O)N[C@@H](C)c2ccc(-n3cc(F)cn3)nc2)CCC(c2nc(C)cc(Nc3cc(C)[nH]n3)n2)CC1",
    "CN(C)P(=O)(OC[C@@H]1CNC[C@H](n2ccc(N)nc2=O)O1)N1CCN(C(=O)OCCOCCOCCO)CC1",
    "CCNCCc1ccc(CN(CC)c2cc(OC)ccc2[C@@H]2CCc3cc(O)ccc3C2)cc1",
    "Cc1ncc(OC[C@@]2(c3cccc(F)c3)C[C@H]2C(=O)Nc2ccc(F)cn2)c(C)n1",
    "COC(=O)[C@H](c1ccccc1)[C@H]1CCCCN1C(=O)OC[n+]1cccc(C(=O)N[C@@H](CO)C(=O)[O-])c1",
    "C[C@@H]1[C@H](c2ccccc2)C[C@H](NC(=O)c2cnc3c(c2)C[C@@]2(C3)C(=O)Nc3ncccc32)C(=O)N1CC(F)(F)F",
];

fn parser_suite() -> Outcome {
    let start = Instant::now();
    let corpus: Vec<&str> = DRUGLIKE
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.split('\t').next().unwrap())
        .collect();
    ensure!(corpus.len() >= 200, "corpus has only {} molecules", corpus.len());
    for t in FIGURE_TARGETS {
        ensure!(corpus.contains(t), "corpus lacks drug target {t}");
    }
    let mut mols = Vec::new();
    for s in &corpus {
        let m = parse_smiles(s).map_err(|e| format!("{s}: {e}"))?;
        let c = canonical_smiles(&m);
        let back = parse_smiles(&c).map_err(|e| format!("{s} -> {c}: {e}"))?;
        ensure!(isomorphic(&m, &back), "{s} -> {c} is not isomorphic");
        ensure!(canonical_smiles(&back) == c, "{s}: canonical form is not a fixed point");
        mols.push((m, c));
    }
    let mut rng = StdRng::seed_from_u64(2024);
    let mut permutations = 0;
    for (m, c) in mols.iter().cycle().take(1200) {
        let mut order: Vec<usize> = (0..m.atom_count()).collect();
        order.shuffle(&mut rng);
        ensure!(canonical_smiles(&m.permuted(&order)) == *c, "{c} changes under {order:?}");
        permutations += 1;
    }
    let ceno = parse_smiles("NC(=O)OC(Cn1ncnn1)c1ccccc1Cl").map_err(|e| e.to_string())?;
    ensure!(
        (ceno.atom_count(), ceno.ring_count()) == (18, 2),
        "cenobamate gave {} atoms and {} rings",
        ceno.atom_count(),
        ceno.ring_count()
    );
    let t = start.elapsed();
    ensure!(t < Duration::from_secs(10), "took {t:?}");
    Ok(format!("{} molecules, {permutations} permutations, {t:.2?}", corpus.len()))
}

// Matcher

fn matcher_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(99);
    let mut hits = 0;
    for i in 0..500 {
        let target = random_mol(&mut rng);
        let source = if rng.gen_bool(0.5) { target.clone() } else { random_mol(&mut rng) };
        let pattern = random_pattern(&mut rng, &source);
        ensure!(target.atom_count() <= 12 && pattern.atom_count() <= 12, "pair {i} is too large");
        let fast = match_pattern(&pattern, &target);
        ensure!(fast == all_matches(&pattern, &target), "pair {i} disagrees");
        hits += usize::from(!fast.is_empty());
    }
    let t = start.elapsed();
    ensure!(t < Duration::from_secs(60), "took {t:?}");
    Ok(format!("500 pairs ({hits} with matches), {t:.2?}"))
}

// Templates

fn template_validation() -> Outcome {
    let templates: BTreeMap<String, retroplan_chem::RetroTemplate> =
        retroplan_core::settings::load_templates(&data().join("templates.jsonl"))
            .map_err(|e| e.to_string())?
            .templates()
            .iter()
            .map(|t| (t.id.clone(), t.clone()))
            .collect();
    let corpus = std::fs::read_to_string(data().join("corpus.jsonl")).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for line in corpus.lines().filter(|l| !l.trim().is_empty()) {
        let rec: Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let id = rec["reaction_id"].as_str().unwrap_or("?");
        let t = templates
            .get(rec["template_id"].as_str().unwrap_or(""))
            .ok_or(format!("{id}: unknown template"))?;
        let (reactants, product) = rec["rxn_smiles"].as_str().unwrap().split_once(">>").unwrap();
        let mut want: Vec<String> = reactants
            .split('.')
            .map(|s| retroplan_chem::canonicalize(s).unwrap().into_string())
            .collect();
        want.sort();
        want.dedup();
        let product = parse_smiles(product).map_err(|e| e.to_string())?;
        let app = retroplan_chem::apply_retro_template(t, &product);
        let found = app
            .sets
            .iter()
            .any(|s| s.precursors.iter().map(|c| c.to_string()).collect::<Vec<_>>() == want);
        ensure!(found, "{id} not reproduced");
        checked += 1;
    }
    ensure!(checked >= 50, "only {checked} curated reactions");
    Ok(format!("{checked}/{checked} reactions reproduced"))
}

// UCT

fn uct() -> Outcome {
    let mut t = Table::default();
    t.add("CCO", &["C"], 0.5);
    let buy = BTreeMap::new();
    let g = search("CCO", &SearchConfig::default(), &SearchContext::new(&t, &buy)).map_err(|e| e.to_string())?;
    let mut r = g.reaction(0).clone();
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        r.score = rng.gen_range(0.0..=1.0);
        r.value = rng.gen_range(0.0..=1.0);
        r.visit_count = rng.gen_range(1..10_000);
        let n = rng.gen_range(1..1_000_000);
        let c = rng.gen_range(0.0..5.0);
        let got = uct_score(&r, n, c).map_err(|e| e.to_string())?;
        let want = uct_reference(r.score, r.value, r.visit_count, n, c);
        let err = (got - want).abs();
        ensure!(err <= 1e-9, "{got} vs {want}");
        worst = worst.max(err);
    }
    r.score = 0.5;
    r.value = 1.0;
    r.visit_count = 2;
    let v = uct_score(&r, 8, 1.0).map_err(|e| e.to_string())?;
    ensure!((v - 1.2697).abs() < 1e-4, "worked example gave {v}");
    Ok(format!("10000 inputs, max error {worst:.1e}, worked example {v:.4}"))
}

// Search

fn search_oracle() -> Outcome {
    let start = Instant::now();
    let mut total_routes = 0;
    let mut stores = 0;
    // Unsolvable stores make for a vacuous comparison, so draw until 20
    // have at least one route.
    for seed in 0.. {
        if stores == 20 {
            break;
        }
        let store = SyntheticStore::random(1000 + seed, 10 + (seed as usize * 5) % 21);
        let want = store.routes(3);
        if want.is_empty() {
            continue;
        }
        stores += 1;
        let table = Table::from_synthetic(&store);
        let buy: BTreeMap<_, _> = store.buyable.iter().map(|s| (cs(s), 1.0)).collect();
        for alg in [Algorithm::Mcts, Algorithm::RetroStar] {
            let cfg = SearchConfig {
                algorithm: alg,
                max_depth: 3,
                max_routes: usize::MAX,
                ..SearchConfig::default()
            };
            let g = search(&store.target, &cfg, &SearchContext::new(&table, &buy)).map_err(|e| e.to_string())?;
            let got: std::collections::BTreeSet<String> =
                enumerate_routes(&g, g.config()).iter().map(|r| signature(&r.tree)).collect();
            ensure!(got == want, "seed {seed} {alg}: {} routes, oracle {}", got.len(), want.len());
        }
        total_routes += want.len();
    }
    let t = start.elapsed();
    ensure!(t < Duration::from_secs(120), "took {t:?}");
    Ok(format!("20 stores, {total_routes} oracle routes, {t:.2?}"))
}

// Limits

/// Offers 40 fresh two-molecule disconnections for any molecule, so every
/// search runs into its chemical budget.
struct Endless(AtomicU64);

fn fresh(id: u64) -> CanonicalSmiles {
    let chain: String = format!("{id:b}").chars().map(|b| if b == '1' { 'N' } else { 'C' }).collect();
    cs(&format!("O{chain}"))
}

impl ExpansionStrategy for Endless {
    fn expand(&self, _target: &CanonicalSmiles, _b: &dyn BuyableView) -> Vec<Suggestion> {
        (0..40)
            .map(|i| {
                let a = self.0.fetch_add(2, Ordering::Relaxed);
                let mut s = Suggestion::manual([fresh(a), fresh(a + 1)]);
                s.rank_score = 0.99 - i as f64 * 0.01;
                s.plausibility = s.rank_score;
                s
            })
            .collect()
    }
}

/// Price by nitrogen count: a third of molecules at $50/g, a third at
/// $150/g, the rest absent.
struct NitrogenPrices;

fn nitrogen_price(s: &CanonicalSmiles) -> Option<f64> {
    match s.as_str().matches('N').count() % 3 {
        0 => Some(50.0),
        1 => Some(150.0),
        _ => None,
    }
}

impl BuyableView for NitrogenPrices {
    fn buyable_price(&self, s: &CanonicalSmiles) -> Option<f64> {
        nitrogen_price(s)
    }
}

fn check_limits(g: &SearchGraph, routes: &[Route]) -> Outcome {
    let c = g.config();
    ensure!(g.chemicals().len() <= c.max_chemicals, "{} chemicals", g.chemicals().len());
    let widest = g.chemicals().iter().map(|x| x.reactions.len()).max().unwrap_or(0);
    ensure!(widest <= c.max_branching, "a chemical has {widest} reactions");
    ensure!(g.chemicals().iter().all(|x| x.depth <= c.max_depth), "depth above {}", c.max_depth);
    ensure!(
        g.reactions().iter().all(|r| g.chemical(r.parent).depth < c.max_depth),
        "expansion at the depth limit"
    );
    ensure!(routes.len() <= c.max_routes, "{} routes", routes.len());
    for x in g.chemicals() {
        let gated = nitrogen_price(&x.smiles).filter(|p| *p <= DEFAULT_MAX_PRICE);
        ensure!(x.buyable == gated.is_some(), "{} buyable={} at {:?}", x.smiles, x.buyable, x.price);
    }
    for r in routes {
        ensure!(r.metrics.depth <= c.max_depth, "route of depth {}", r.metrics.depth);
        fn leaves_ok(n: &TreeNode) -> bool {
            match n {
                TreeNode::Chemical { children, attributes, .. } if children.is_empty() => {
                    attributes.buyable && attributes.price_per_g.is_some_and(|p| p <= DEFAULT_MAX_PRICE)
                }
                _ => n.children().iter().all(leaves_ok),
            }
        }
        ensure!(leaves_ok(&r.tree), "route with an unbuyable leaf");
    }
    Ok(format!("{} chemicals, widest {widest}, {} routes", g.chemicals().len(), routes.len()))
}

fn limits() -> Outcome {
    let d = SearchConfig::default();
    ensure!(
        (d.max_chemicals, d.max_branching, d.max_depth, d.max_routes, d.max_price) == (5000, 25, 6, 200, 100.0),
        "defaults are {d:?}"
    );
    let shipped = Settings::load(&data().join("retroplan.toml")).map_err(|e| e.to_string())?;
    ensure!(shipped.search == d, "bundled settings differ from the defaults");
    let mut notes = Vec::new();
    for alg in [Algorithm::Mcts, Algorithm::RetroStar] {
        let cfg = SearchConfig { algorithm: alg, ..d.clone() };
        let strategy = Endless(AtomicU64::new(1));
        let g = search("OCCCCCCCCN", &cfg, &SearchContext::new(&strategy, &NitrogenPrices)).map_err(|e| e.to_string())?;
        let routes = g.routes(None);
        let note = check_limits(&g, &routes).map_err(|e| format!("{alg}: {e}"))?;
        ensure!(g.termination() == Termination::ChemicalLimit, "{alg}: ended with {:?} ({note})", g.termination());
        ensure!(routes.len() == 200, "{alg}: route cap never reached ({note})");
        notes.push(format!("{alg} {note}"));
    }
    Ok(notes.join("; "))
}

// Sorting

/// Linear route of `n` steps whose reactions all share `plaus` and `score`.
fn chain(target: &str, n: usize, plaus: f64, score: f64) -> Route {
    let leaf = json!({"type": "chemical", "smiles": "C",
        "attributes": {"visit_count": 0, "buyable": true, "price_per_g": 1.0, "proven": true,
            "depth": n, "expanded": false, "value": 1.0},
        "children": []});
    let mut node = leaf;
    for step in (0..n).rev() {
        let smiles = if step == 0 { target.to_string() } else { "CC".repeat(step) };
        node = json!({"type": "chemical", "smiles": smiles,
            "attributes": {"visit_count": 1, "buyable": false, "proven": true, "depth": step,
                "expanded": true, "value": 1.0},
            "children": [{"type": "reaction", "id": format!("{target}-{step}"),
                "attributes": {"score": score, "visit_count": 1, "value": 1.0, "plausibility": plaus,
                    "template_ids": [], "strategy_provenance": [], "precedent_reaction_ids": []},
                "children": [node]}]});
    }
    Route::from_tree(serde_json::from_value(node).unwrap(), DEFAULT_MAX_PRICE)
}

fn sorting() -> Outcome {
    let mut rng = StdRng::seed_from_u64(5);
    let mut fixtures = 0;
    for _ in 0..50 {
        // Few distinct values so that ties are common at every level.
        let keys: Vec<(usize, f64, f64)> = (0..12)
            .map(|_| {
                (
                    rng.gen_range(1..=3),
                    *[0.5, 0.75, 1.0].choose(&mut rng).unwrap(),
                    *[0.25, 0.5].choose(&mut rng).unwrap(),
                )
            })
            .collect();
        let routes: Vec<Route> = keys
            .iter()
            .enumerate()
            .map(|(i, &(n, p, s))| chain(&format!("{}O", "C".repeat(i + 1)), n, p, s))
            .collect();
        // Reference: stable insertion sort on (steps asc, plausibility desc,
        // score desc).
        let mut want: Vec<usize> = Vec::new();
        for i in 0..keys.len() {
            let before = |j: usize| {
                let (a, b) = (keys[j], keys[i]);
                a.0 < b.0 || (a.0 == b.0 && (a.1 > b.1 || (a.1 == b.1 && a.2 >= b.2)))
            };
            let at = want.iter().position(|&j| !before(j)).unwrap_or(want.len());
            want.insert(at, i);
        }
        let want: Vec<String> = want.iter().map(|&i| format!("{}O", "C".repeat(i + 1))).collect();
        let got: Vec<String> = sort_routes(routes).iter().map(|r| r.tree.smiles().unwrap().to_string()).collect();
        ensure!(got == want, "order {got:?}, expected {want:?}");
        fixtures += 1;
    }
    Ok(format!("{fixtures} fixtures of 12 routes"))
}

// Batch planning

fn batch_plan() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let shipped = std::fs::read_to_string(data().join("retroplan.toml")).map_err(|e| e.to_string())?;
    let d = data();
    let text = shipped
        .lines()
        .map(|l| match l.split_once(" = ") {
            Some(("data_dir", _)) => format!("data_dir = \"{}\"", dir.path().join("state").display()),
            Some((k @ ("templates" | "corpus" | "buyables"), v)) => {
                format!("{k} = \"{}\"", d.join(v.trim_matches('"')).display())
            }
            _ => l.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n");
    let cfg = dir.path().join("retroplan.toml");
    std::fs::write(&cfg, text).map_err(|e| e.to_string())?;
    let targets = d.join("targets.txt");
    let n = std::fs::read_to_string(&targets).unwrap().lines().filter(|l| !l.trim().is_empty()).count();
    let run = |out: &str, jobs: &str| {
        let start = Instant::now();
        let o = Command::new(env!("CARGO_BIN_EXE_retroplan"))
            .env_remove("RETROPLAN_PORT")
            .env_remove("RETROPLAN_DATA_DIR")
            .args(["plan", "--targets"])
            .arg(&targets)
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path().join(out))
            .args(["--jobs", jobs])
            .output()
            .map_err(|e| e.to_string())?;
        if !o.status.success() {
            return Err(String::from_utf8_lossy(&o.stderr).into_owned());
        }
        Ok((start.elapsed(), String::from_utf8_lossy(&o.stdout).into_owned()))
    };
    // One at a time, so the wall clock bounds every single target.
    let (serial, stdout) = run("a", "1")?;
    ensure!(serial < Duration::from_secs(60), "{n} targets took {serial:?}");
    run("b", "4")?;
    let mut files = 0;
    for i in 1..=n {
        let name = format!("target_{i:04}.json");
        let a = std::fs::read(dir.path().join("a").join(&name)).map_err(|e| format!("{name}: {e}"))?;
        let b = std::fs::read(dir.path().join("b").join(&name)).map_err(|e| format!("{name}: {e}"))?;
        ensure!(a == b, "{name} differs between runs");
        files += 1;
    }
    let summary = stdout.lines().last().unwrap_or("").to_string();
    Ok(format!("{summary}, {files} identical files, {serial:.2?} for all targets serially"))
}

// Gateway

async fn call(http: &reqwest::Client, req: reqwest::RequestBuilder, want: u16) -> Result<Value, String> {
    let r = req.send().await.map_err(|e| e.to_string())?;
    let status = r.status().as_u16();
    let body = r.text().await.map_err(|e| e.to_string())?;
    let _ = http;
    ensure!(status == want, "got {status}, wanted {want}: {body}");
    serde_json::from_str(&body).map_err(|e| format!("{e}: {body}"))
}

async fn gateway_run(dir: &Path) -> Outcome {
    let mut settings = Settings::load(&data().join("retroplan.toml")).map_err(|e| e.to_string())?;
    settings.data_dir = dir.to_path_buf();
    let state = AppState::new(settings).map_err(|e| e.to_string())?;
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.map_err(|e| e.to_string())?;
    let base = format!("http://{}", listener.local_addr().unwrap());
    let (stop, stopped) = tokio::sync::oneshot::channel::<()>();
    let server = tokio::spawn(serve_on(listener, state.clone(), async {
        stopped.await.ok();
    }));
    let http = reqwest::Client::new();
    let url = |p: &str| format!("{base}{p}");
    let target = "CC(=O)Nc1ccccc1";

    let exp = call(&http, http.post(url("/api/retro/expand")).json(&json!({"target": target})), 200).await?;
    let first = exp["suggestions"].as_array().ok_or("no suggestions")?.len();
    ensure!(first > 0, "empty expansion");

    let hold = state.hold().await;
    let job = call(
        &http,
        http.post(url("/api/tree-search/call-async")).json(&json!({"target": target})),
        202,
    )
    .await?;
    ensure!(job["status"] == "started", "submitted job is {}", job["status"]);
    let id = job["job_id"].as_str().ok_or("no job id")?.to_string();
    let now = call(&http, http.get(url(&format!("/api/results/{id}"))), 200).await?;
    ensure!(now["job"]["status"] == "started", "queued job is {}", now["job"]["status"]);
    drop(hold);
    let mut done = Value::Null;
    for _ in 0..3000 {
        done = call(&http, http.get(url(&format!("/api/results/{id}"))), 200).await?;
        if done["job"]["status"] != "started" {
            break;
        }
        tokio::time::sleep(Duration::from_millis(10)).await;
    }
    ensure!(done["job"]["status"] == "completed", "job ended as {}", done["job"]["status"]);
    let routes = done["result"]["routes"].as_array().map_or(0, Vec::len);
    ensure!(routes > 0, "completed job has no routes");

    call(&http, http.get(url("/api/results/nope")), 404).await?;
    call(&http, http.get(url("/api/no-such-endpoint")), 404).await?;
    call(&http, http.get(url("/api/banlist/people")), 404).await?;

    let aniline = retroplan_chem::canonicalize("Nc1ccccc1").unwrap().into_string();
    let uses = |v: &Value| {
        v["suggestions"]
            .as_array()
            .into_iter()
            .flatten()
            .any(|s| s["precursors"].as_array().into_iter().flatten().any(|p| p == aniline.as_str()))
    };
    ensure!(uses(&exp), "aniline is not suggested before the ban");
    call(&http, http.post(url("/api/banlist/chemicals")).json(&json!({"entries": ["Nc1ccccc1"]})), 200).await?;
    let banned = call(&http, http.post(url("/api/retro/expand")).json(&json!({"target": target})), 200).await?;
    ensure!(!uses(&banned), "banned aniline still suggested");

    let csv = "smiles,price_per_g\nCCCCCCO,3.5\nCCCCCCN,2.0\nCCCCCCCl,1.0\n";
    let up = call(&http, http.post(url("/api/buyables")).query(&[("format", "csv")]).body(csv), 200).await?;
    ensure!(up["count"] == 3, "upload stored {}", up["count"]);
    let found = call(&http, http.get(url("/api/buyables")).query(&[("q", "NCCCCCC")]), 200).await?;
    ensure!(found["count"] == 1, "uploaded entry not found");

    stop.send(()).ok();
    server.await.map_err(|e| e.to_string())?.map_err(|e| e.to_string())?;
    Ok(format!("{first} suggestions, job {id} with {routes} routes"))
}

fn gateway() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| e.to_string())?;
    rt.block_on(gateway_run(dir.path()))
}

fn main() {
    let checks: [Check; 9] = [
        ("parser suite", parser_suite),
        ("matcher oracle", matcher_oracle),
        ("template forward validation", template_validation),
        ("uct", uct),
        ("search oracle", search_oracle),
        ("limits", limits),
        ("sorting", sorting),
        ("batch plan", batch_plan),
        ("gateway contract", gateway),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in checks {
        let outcome = std::panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| {
                let msg = p.downcast_ref::<String>().cloned();
                Err(msg.or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or("panicked".into()))
            });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
