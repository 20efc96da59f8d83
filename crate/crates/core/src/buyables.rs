//! Building-block catalog keyed by canonical SMILES.

use retroplan_chem::{canonicalize, has_match, CanonicalSmiles, MolGraph, PatternGraph, SmilesError};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;
use thiserror::Error;

/// Default buyability gate in $/g.
pub const DEFAULT_MAX_PRICE: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct CatalogEntry {
    pub smiles: CanonicalSmiles,
    pub price_per_g: f64,
    #[serde(default)]
    pub source: String,
    #[serde(default)]
    pub lead_time_days: Option<u32>,
    #[serde(default = "yes")]
    pub available: bool,
    #[serde(default)]
    pub url: Option<String>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("line {line}: {cause}")]
    BadRow { line: usize, cause: String },
    #[error("cannot read {path}: {cause}")]
    Io { path: String, cause: String },
    #[error("unknown catalog format {0:?} (expected csv or jsonl)")]
    UnknownFormat(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CatalogFormat {
    Csv,
    Jsonl,
}

impl CatalogFormat {
    pub fn from_path(path: &Path) -> Result<Self, CatalogError> {
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        ext.parse()
    }
}

impl std::str::FromStr for CatalogFormat {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(CatalogFormat::Csv),
            "jsonl" | "ndjson" => Ok(CatalogFormat::Jsonl),
            other => Err(CatalogError::UnknownFormat(other.to_string())),
        }
    }
}

/// Row as written in either ingest format; smiles is not yet canonical.
#[derive(Debug, Deserialize)]
struct RawRow {
    smiles: String,
    price_per_g: f64,
    #[serde(default)]
    source: String,
    #[serde(default)]
    lead_time_days: Option<u32>,
    #[serde(default)]
    available: Option<bool>,
    #[serde(default)]
    url: Option<String>,
}

#[derive(Debug, Clone)]
struct Stored {
    entry: CatalogEntry,
    mol: MolGraph,
}

#[derive(Debug, Clone, Default)]
pub struct Catalog {
    entries: BTreeMap<CanonicalSmiles, Stored>,
}

fn build_entry(line: usize, row: RawRow) -> Result<CatalogEntry, CatalogError> {
    let smiles = canonicalize(row.smiles.trim()).map_err(|e| CatalogError::BadRow {
        line,
        cause: format!("smiles: {e}"),
    })?;
    let price = row.price_per_g;
    if !(price > 0.0 && price.is_finite()) {
        return Err(CatalogError::BadRow {
            line,
            cause: format!("price_per_g must be positive, got {price}"),
        });
    }
    Ok(CatalogEntry {
        smiles,
        price_per_g: price,
        source: row.source,
        lead_time_days: row.lead_time_days,
        available: row.available.unwrap_or(true),
        url: row.url.filter(|u| !u.is_empty()),
    })
}

/// Parse CSV text (header required). Line numbers count the header as 1.
pub fn parse_csv(reader: impl Read) -> Result<Vec<CatalogEntry>, CatalogError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| CatalogError::BadRow {
            line: 1,
            cause: e.to_string(),
        })?
        .clone();
    if !headers.iter().any(|h| h == "smiles") || !headers.iter().any(|h| h == "price_per_g") {
        return Err(CatalogError::BadRow {
            line: 1,
            cause: "header must name smiles and price_per_g".into(),
        });
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CatalogError::BadRow {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            cause: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let row: RawRow = rec.deserialize(Some(&headers)).map_err(|e| CatalogError::BadRow {
            line,
            cause: e.to_string(),
        })?;
        out.push(build_entry(line, row)?);
    }
    Ok(out)
}

pub fn parse_jsonl(text: &str) -> Result<Vec<CatalogEntry>, CatalogError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: RawRow = serde_json::from_str(line).map_err(|e| CatalogError::BadRow {
            line: i + 1,
            cause: e.to_string(),
        })?;
        out.push(build_entry(i + 1, row)?);
    }
    Ok(out)
}

pub fn parse_catalog(text: &str, format: CatalogFormat) -> Result<Vec<CatalogEntry>, CatalogError> {
    match format {
        CatalogFormat::Csv => parse_csv(text.as_bytes()),
        CatalogFormat::Jsonl => parse_jsonl(text),
    }
}

impl Catalog {
    pub fn new() -> Self {
        Catalog::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Merge entries, keeping the cheaper one on a canonical collision.
    pub fn insert(&mut self, entry: CatalogEntry) {
        if let Some(old) = self.entries.get(&entry.smiles) {
            if old.entry.price_per_g <= entry.price_per_g {
                return;
            }
        }
        let mol = entry.smiles.to_mol();
        self.entries.insert(entry.smiles.clone(), Stored { entry, mol });
    }

    /// Parse everything first, so a bad row leaves the catalog untouched.
    /// Returns the number of rows ingested.
    pub fn import_str(&mut self, text: &str, format: CatalogFormat) -> Result<usize, CatalogError> {
        let rows = parse_catalog(text, format)?;
        let n = rows.len();
        for e in rows {
            self.insert(e);
        }
        Ok(n)
    }

    pub fn import_path(&mut self, path: &Path) -> Result<usize, CatalogError> {
        let format = CatalogFormat::from_path(path)?;
        let text = std::fs::read_to_string(path).map_err(|e| CatalogError::Io {
            path: path.display().to_string(),
            cause: e.to_string(),
        })?;
        self.import_str(&text, format)
    }

    pub fn from_path(path: &Path) -> Result<Self, CatalogError> {
        let mut c = Catalog::new();
        c.import_path(path)?;
        Ok(c)
    }

    /// Snapshot as JSON lines, ordered by SMILES.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for s in self.entries.values() {
            out.push_str(&serde_json::to_string(&s.entry).expect("entry serializes"));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let tmp = path.with_extension("jsonl.tmp");
        std::fs::write(&tmp, self.to_jsonl())?;
        std::fs::rename(tmp, path)
    }

    pub fn entries(&self) -> impl Iterator<Item = &CatalogEntry> {
        self.entries.values().map(|s| &s.entry)
    }

    /// Exact lookup of an already canonical key. Entries above `max_price`
    /// are treated as absent.
    pub fn get(&self, smiles: &CanonicalSmiles, max_price: f64) -> Option<&CatalogEntry> {
        self.entries
            .get(smiles)
            .map(|s| &s.entry)
            .filter(|e| e.price_per_g <= max_price)
    }

    pub fn lookup(&self, smiles: &str, max_price: f64) -> Result<Option<&CatalogEntry>, SmilesError> {
        let key = canonicalize(smiles)?;
        Ok(self.get(&key, max_price))
    }

    /// Entries containing at least one match, by canonical SMILES, at most
    /// `limit` of them.
    pub fn substructure_search(&self, pattern: &PatternGraph, limit: usize) -> Vec<&CatalogEntry> {
        self.entries
            .values()
            .filter(|s| has_match(pattern, &s.mol))
            .map(|s| &s.entry)
            .take(limit)
            .collect()
    }

    /// View used by search and reranking: available and at most `max_price`.
    pub fn view(&self, max_price: f64) -> CatalogView<'_> {
        CatalogView {
            catalog: self,
            max_price,
        }
    }
}

/// Buyability as seen by expansion and search.
pub trait BuyableView {
    /// Price per gram when buyable, `None` otherwise.
    fn buyable_price(&self, smiles: &CanonicalSmiles) -> Option<f64>;

    fn is_buyable(&self, smiles: &CanonicalSmiles) -> bool {
        self.buyable_price(smiles).is_some()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CatalogView<'a> {
    catalog: &'a Catalog,
    max_price: f64,
}

impl BuyableView for CatalogView<'_> {
    fn buyable_price(&self, smiles: &CanonicalSmiles) -> Option<f64> {
        self.catalog
            .get(smiles, self.max_price)
            .filter(|e| e.available)
            .map(|e| e.price_per_g)
    }
}

impl BuyableView for BTreeMap<CanonicalSmiles, f64> {
    fn buyable_price(&self, smiles: &CanonicalSmiles) -> Option<f64> {
        self.get(smiles).copied()
    }
}
