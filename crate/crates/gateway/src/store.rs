//! File-backed job records, results and ban lists under the data directory.

use chrono::{DateTime, Utc};
use retroplan_core::search::ProgressSnapshot;
use retroplan_core::{BanList, Progress, SearchConfig, SearchResult};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum JobStatus {
    Started,
    Completed,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum JobKind {
    TreeSearch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct JobRecord {
    pub job_id: String,
    pub kind: JobKind,
    pub status: JobStatus,
    pub user_id: String,
    pub target: String,
    /// The search settings as submitted. Never changed afterwards.
    pub settings: SearchConfig,
    pub created_at: DateTime<Utc>,
    #[serde(default)]
    pub finished_at: Option<DateTime<Utc>>,
    /// Path of the result file relative to the data directory.
    #[serde(default)]
    pub result_ref: Option<String>,
    #[serde(default)]
    pub solved: Option<bool>,
    #[serde(default)]
    pub error: Option<String>,
    /// Live counters while the job runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub progress: Option<ProgressSnapshot>,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}

fn to_json<T: Serialize>(v: &T) -> io::Result<Vec<u8>> {
    serde_json::to_vec_pretty(v).map_err(io::Error::other)
}

fn read_dir_json<T: for<'de> Deserialize<'de>>(dir: &Path) -> io::Result<Vec<T>> {
    let mut out = Vec::new();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    for p in paths {
        let text = std::fs::read(&p)?;
        match serde_json::from_slice(&text) {
            Ok(v) => out.push(v),
            Err(e) => tracing::warn!("skipping {}: {e}", p.display()),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct JobCounts {
    pub started: usize,
    pub completed: usize,
    pub failed: usize,
}

pub const INTERRUPTED: &str = "interrupted: the service stopped before the job finished";

/// Job records in memory and on disk. All writes go through one lock.
pub struct JobStore {
    root: PathBuf,
    records: Mutex<BTreeMap<String, JobRecord>>,
    live: Mutex<HashMap<String, Arc<Progress>>>,
}

impl JobStore {
    /// Load existing records. Jobs left running by a previous process are
    /// marked failed.
    pub fn open(data_dir: &Path) -> io::Result<Self> {
        std::fs::create_dir_all(data_dir.join("jobs"))?;
        std::fs::create_dir_all(data_dir.join("results"))?;
        let store = JobStore {
            root: data_dir.to_path_buf(),
            records: Mutex::new(BTreeMap::new()),
            live: Mutex::new(HashMap::new()),
        };
        let mut records = store.records.lock().unwrap();
        for mut rec in read_dir_json::<JobRecord>(&data_dir.join("jobs"))? {
            if rec.status == JobStatus::Started {
                rec.status = JobStatus::Failed;
                rec.finished_at = Some(Utc::now());
                rec.error = Some(INTERRUPTED.into());
                store.persist(&rec)?;
            }
            records.insert(rec.job_id.clone(), rec);
        }
        drop(records);
        Ok(store)
    }

    fn persist(&self, rec: &JobRecord) -> io::Result<()> {
        write_atomic(&self.root.join("jobs").join(format!("{}.json", rec.job_id)), &to_json(rec)?)
    }

    pub fn insert(&self, rec: JobRecord, progress: Arc<Progress>) -> io::Result<()> {
        let mut records = self.records.lock().unwrap();
        self.persist(&rec)?;
        self.live.lock().unwrap().insert(rec.job_id.clone(), progress);
        records.insert(rec.job_id.clone(), rec);
        Ok(())
    }

    /// Move a started job to completed or failed. Results are written once.
    pub fn finish(&self, id: &str, outcome: Result<SearchResult, String>) -> io::Result<()> {
        let mut records = self.records.lock().unwrap();
        self.live.lock().unwrap().remove(id);
        let Some(rec) = records.get(id) else {
            return Ok(());
        };
        if rec.status != JobStatus::Started {
            return Ok(());
        }
        let mut rec = rec.clone();
        rec.finished_at = Some(Utc::now());
        match outcome {
            Ok(result) => {
                let rel = format!("results/{id}.json");
                let path = self.root.join(&rel);
                let mut f = std::fs::OpenOptions::new().write(true).create_new(true).open(&path)?;
                io::Write::write_all(&mut f, &to_json(&result)?)?;
                f.sync_all()?;
                rec.status = JobStatus::Completed;
                rec.solved = Some(result.graph.solved);
                rec.result_ref = Some(rel);
            }
            Err(e) => {
                rec.status = JobStatus::Failed;
                rec.error = Some(e);
            }
        }
        self.persist(&rec)?;
        records.insert(id.to_string(), rec);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<JobRecord> {
        let mut rec = self.records.lock().unwrap().get(id).cloned()?;
        rec.progress = self.live.lock().unwrap().get(id).map(|p| p.snapshot());
        Some(rec)
    }

    pub fn list(&self, user: &str) -> Vec<JobRecord> {
        let records = self.records.lock().unwrap();
        let mut out: Vec<JobRecord> = records.values().filter(|r| r.user_id == user).cloned().collect();
        out.sort_by(|a, b| a.created_at.cmp(&b.created_at).then(a.job_id.cmp(&b.job_id)));
        out
    }

    pub fn result(&self, rec: &JobRecord) -> io::Result<Option<SearchResult>> {
        let Some(rel) = &rec.result_ref else {
            return Ok(None);
        };
        let bytes = std::fs::read(self.root.join(rel))?;
        serde_json::from_slice(&bytes).map(Some).map_err(io::Error::other)
    }

    pub fn counts(&self) -> JobCounts {
        let mut c = JobCounts::default();
        for r in self.records.lock().unwrap().values() {
            match r.status {
                JobStatus::Started => c.started += 1,
                JobStatus::Completed => c.completed += 1,
                JobStatus::Failed => c.failed += 1,
            }
        }
        c
    }

    /// Ask every running search to stop.
    pub fn cancel_all(&self) {
        for p in self.live.lock().unwrap().values() {
            p.cancel.store(true, std::sync::atomic::Ordering::Relaxed);
        }
    }
}

/// Per-user ban lists, one file each.
pub struct BanStore {
    dir: PathBuf,
    lists: Mutex<BTreeMap<String, BanList>>,
}

impl BanStore {
    pub fn open(data_dir: &Path) -> io::Result<Self> {
        let dir = data_dir.join("banlists");
        std::fs::create_dir_all(&dir)?;
        let lists = read_dir_json::<BanList>(&dir)?
            .into_iter()
            .map(|b| (b.user_id.clone(), b))
            .collect();
        Ok(BanStore {
            dir,
            lists: Mutex::new(lists),
        })
    }

    pub fn get(&self, user: &str) -> BanList {
        self.lists
            .lock()
            .unwrap()
            .get(user)
            .cloned()
            .unwrap_or_else(|| BanList::new(user))
    }

    /// Apply `f` to the user's list and save it if `f` succeeds.
    pub fn update<R, E>(&self, user: &str, f: impl FnOnce(&mut BanList) -> Result<R, E>) -> Result<Result<R, E>, io::Error> {
        let mut lists = self.lists.lock().unwrap();
        let mut list = lists.get(user).cloned().unwrap_or_else(|| BanList::new(user));
        let r = match f(&mut list) {
            Ok(r) => r,
            Err(e) => return Ok(Err(e)),
        };
        let name = format!("{}.json", sanitize(user));
        write_atomic(&self.dir.join(name), &to_json(&list)?)?;
        lists.insert(user.to_string(), list);
        Ok(Ok(r))
    }
}

fn sanitize(user: &str) -> String {
    user.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}
