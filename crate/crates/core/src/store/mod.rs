//! Persistent corpus, favorites and artifact log.
//!
//! A data directory holds `corpus.jsonl`, `favorites.jsonl`,
//! `artifacts.jsonl` and a `lock` file. Each document starts with a header
//! line and is replaced atomically (temp file then rename) on every mutation,
//! so after a crash a change is visible iff its call returned `Ok`. The lock
//! admits a single writer process.

mod jsonl;

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions, TryLockError};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::narrative::NarrativeArtifact;
use crate::schema::CostumeRecord;

use jsonl::Header;

pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const FAVORITES_FILE: &str = "favorites.jsonl";
pub const ARTIFACTS_FILE: &str = "artifacts.jsonl";
pub const LOCK_FILE: &str = "lock";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: malformed document: {message}")]
    Malformed { path: PathBuf, line: usize, message: String },
    #[error("{path}: unsupported format `{found}`")]
    UnsupportedFormat { path: PathBuf, found: String },
    #[error("data directory {0} is locked by another process")]
    LockHeld(PathBuf),
    #[error("costume id `{0}` already exists")]
    DuplicateId(String),
    #[error("unknown costume `{0}`")]
    UnknownCostume(String),
    #[error("user id must be non-empty")]
    EmptyUserId,
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl StoreError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        StoreError::Io { path: path.to_path_buf(), source }
    }
}

/// All costume records keyed by id, with a mutation counter.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    records: BTreeMap<String, CostumeRecord>,
    version: u64,
}

impl Corpus {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build a corpus in one mutation.
    pub fn from_records(records: impl IntoIterator<Item = CostumeRecord>) -> Result<Self, StoreError> {
        let mut map = BTreeMap::new();
        for record in records {
            if map.contains_key(&record.id) {
                return Err(StoreError::DuplicateId(record.id));
            }
            map.insert(record.id.clone(), record);
        }
        Ok(Corpus { records: map, version: 1 })
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.records.contains_key(id)
    }

    pub fn get(&self, id: &str) -> Option<&CostumeRecord> {
        self.records.get(id)
    }

    /// Records in ascending id order.
    pub fn records(&self) -> impl Iterator<Item = &CostumeRecord> {
        self.records.values()
    }

    pub fn insert(&mut self, record: CostumeRecord) -> Result<(), StoreError> {
        if self.records.contains_key(&record.id) {
            return Err(StoreError::DuplicateId(record.id));
        }
        self.records.insert(record.id.clone(), record);
        self.version += 1;
        Ok(())
    }

    pub fn remove(&mut self, id: &str) -> Option<CostumeRecord> {
        let removed = self.records.remove(id);
        if removed.is_some() {
            self.version += 1;
        }
        removed
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, StoreError> {
        let records: Vec<&CostumeRecord> = self.records.values().collect();
        jsonl::render(&Header::new("corpus", self.version, records.len()), &records)
    }

    pub fn save(&self, path: &Path) -> Result<(), StoreError> {
        jsonl::write_atomic(path, &self.to_bytes()?)
    }

    /// Load a corpus document; a missing file is an empty corpus.
    pub fn load(path: &Path) -> Result<Self, StoreError> {
        let Some((header, records)) = jsonl::read::<CostumeRecord>(path, "corpus")? else {
            return Ok(Corpus::default());
        };
        let mut map = BTreeMap::new();
        for (i, record) in records.into_iter().enumerate() {
            if map.contains_key(&record.id) {
                return Err(StoreError::Malformed {
                    path: path.to_path_buf(),
                    line: i + 2,
                    message: format!("duplicate id `{}`", record.id),
                });
            }
            map.insert(record.id.clone(), record);
        }
        Ok(Corpus { records: map, version: header.version })
    }
}

/// One user's favorites in insertion order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FavoriteSet {
    pub user_id: String,
    pub costume_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Favorites {
    by_user: BTreeMap<String, Vec<String>>,
    version: u64,
}

/// A favorite whose costume no longer exists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DanglingFavorite {
    pub user_id: String,
    pub costume_id: String,
}

impl Favorites {
    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn list(&self, user_id: &str) -> Vec<String> {
        self.by_user.get(user_id).cloned().unwrap_or_default()
    }

    /// Returns the user's list; adding a present id changes nothing.
    pub fn add(&mut self, corpus: &Corpus, user_id: &str, costume_id: &str) -> Result<Vec<String>, StoreError> {
        if user_id.is_empty() {
            return Err(StoreError::EmptyUserId);
        }
        if !corpus.contains(costume_id) {
            return Err(StoreError::UnknownCostume(costume_id.to_string()));
        }
        let ids = self.by_user.entry(user_id.to_string()).or_default();
        if !ids.iter().any(|id| id == costume_id) {
            ids.push(costume_id.to_string());
            self.version += 1;
        }
        Ok(ids.clone())
    }

    /// Returns the user's list; removing an absent id changes nothing.
    pub fn remove(&mut self, user_id: &str, costume_id: &str) -> Vec<String> {
        let Some(ids) = self.by_user.get_mut(user_id) else {
            return Vec::new();
        };
        if let Some(pos) = ids.iter().position(|id| id == costume_id) {
            ids.remove(pos);
            self.version += 1;
        }
        let out = ids.clone();
        if out.is_empty() {
            self.by_user.remove(user_id);
        }
        out
    }

    /// Repair pass: favorites pointing at costumes missing from `corpus`.
    /// They are reported, never dropped.
    pub fn dangling(&self, corpus: &Corpus) -> Vec<DanglingFavorite> {
        self.by_user
            .iter()
            .flat_map(|(user, ids)| {
                ids.iter()
                    .filter(|id| !corpus.contains(id))
                    .map(move |id| DanglingFavorite { user_id: user.clone(), costume_id: id.clone() })
            })
            .collect()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, StoreError> {
        let sets: Vec<FavoriteSet> = self
            .by_user
            .iter()
            .map(|(user_id, ids)| FavoriteSet { user_id: user_id.clone(), costume_ids: ids.clone() })
            .collect();
        jsonl::render(&Header::new("favorites", self.version, sets.len()), &sets)
    }

    pub fn save(&self, path: &Path) -> Result<(), StoreError> {
        jsonl::write_atomic(path, &self.to_bytes()?)
    }

    pub fn load(path: &Path) -> Result<Self, StoreError> {
        let Some((header, sets)) = jsonl::read::<FavoriteSet>(path, "favorites")? else {
            return Ok(Favorites::default());
        };
        let by_user = sets.into_iter().map(|s| (s.user_id, s.costume_ids)).collect();
        Ok(Favorites { by_user, version: header.version })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArtifactEntry {
    pub id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user_id: Option<String>,
    pub artifact: NarrativeArtifact,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactFilter {
    pub costume_id: Option<String>,
    pub user_id: Option<String>,
}

/// Append-only log; ids start at 1 and are dense.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ArtifactLog {
    entries: Vec<ArtifactEntry>,
}

impl ArtifactLog {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn next_id(&self) -> u64 {
        self.entries.len() as u64 + 1
    }

    pub fn append(&mut self, artifact: NarrativeArtifact, user_id: Option<String>) -> u64 {
        let id = self.next_id();
        self.entries.push(ArtifactEntry { id, user_id, artifact });
        id
    }

    pub fn get(&self, id: u64) -> Option<&ArtifactEntry> {
        id.checked_sub(1).and_then(|i| self.entries.get(i as usize))
    }

    /// Entries in id order matching every given filter field.
    pub fn list(&self, filter: &ArtifactFilter) -> Vec<&ArtifactEntry> {
        self.entries
            .iter()
            .filter(|e| filter.costume_id.as_ref().is_none_or(|c| &e.artifact.request.costume_id == c))
            .filter(|e| filter.user_id.as_ref().is_none_or(|u| e.user_id.as_ref() == Some(u)))
            .collect()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, StoreError> {
        jsonl::render(&Header::new("artifacts", self.entries.len() as u64, self.entries.len()), &self.entries)
    }

    pub fn save(&self, path: &Path) -> Result<(), StoreError> {
        jsonl::write_atomic(path, &self.to_bytes()?)
    }

    pub fn load(path: &Path) -> Result<Self, StoreError> {
        let Some((_, entries)) = jsonl::read::<ArtifactEntry>(path, "artifacts")? else {
            return Ok(ArtifactLog::default());
        };
        for (i, entry) in entries.iter().enumerate() {
            if entry.id != i as u64 + 1 {
                return Err(StoreError::Malformed {
                    path: path.to_path_buf(),
                    line: i + 2,
                    message: format!("artifact id {} out of sequence", entry.id),
                });
            }
        }
        Ok(ArtifactLog { entries })
    }
}

/// Read-only view of a data directory, loaded without taking the lock.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Snapshot {
    pub corpus: Corpus,
    pub favorites: Favorites,
    pub artifacts: ArtifactLog,
}

impl Snapshot {
    pub fn load(dir: &Path) -> Result<Self, StoreError> {
        Ok(Snapshot {
            corpus: Corpus::load(&dir.join(CORPUS_FILE))?,
            favorites: Favorites::load(&dir.join(FAVORITES_FILE))?,
            artifacts: ArtifactLog::load(&dir.join(ARTIFACTS_FILE))?,
        })
    }
}

/// Exclusive, writable handle on a data directory.
#[derive(Debug)]
pub struct Store {
    dir: PathBuf,
    state: Snapshot,
    _lock: File,
}

impl Store {
    /// Create the directory if needed, take the lock, and load all documents.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, StoreError> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir).map_err(|e| StoreError::io(&dir, e))?;
        let lock_path = dir.join(LOCK_FILE);
        let mut lock = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&lock_path)
            .map_err(|e| StoreError::io(&lock_path, e))?;
        match lock.try_lock() {
            Ok(()) => {}
            Err(TryLockError::WouldBlock) => return Err(StoreError::LockHeld(dir)),
            Err(TryLockError::Error(e)) => return Err(StoreError::io(&lock_path, e)),
        }
        lock.set_len(0).map_err(|e| StoreError::io(&lock_path, e))?;
        writeln!(lock, "{}", std::process::id()).map_err(|e| StoreError::io(&lock_path, e))?;

        let state = Snapshot::load(&dir)?;
        Ok(Store { dir, state, _lock: lock })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn corpus(&self) -> &Corpus {
        &self.state.corpus
    }

    pub fn favorites(&self) -> &Favorites {
        &self.state.favorites
    }

    pub fn artifacts(&self) -> &ArtifactLog {
        &self.state.artifacts
    }

    pub fn snapshot(&self) -> &Snapshot {
        &self.state
    }

    fn path(&self, file: &str) -> PathBuf {
        self.dir.join(file)
    }

    /// Apply `f` to a copy of the corpus and persist it; memory is updated
    /// only after the write succeeds.
    fn mutate_corpus<T>(&mut self, f: impl FnOnce(&mut Corpus) -> Result<T, StoreError>) -> Result<T, StoreError> {
        let mut next = self.state.corpus.clone();
        let out = f(&mut next)?;
        next.save(&self.path(CORPUS_FILE))?;
        self.state.corpus = next;
        Ok(out)
    }

    pub fn insert_record(&mut self, record: CostumeRecord) -> Result<(), StoreError> {
        self.mutate_corpus(|c| c.insert(record))
    }

    pub fn remove_record(&mut self, id: &str) -> Result<CostumeRecord, StoreError> {
        self.mutate_corpus(|c| c.remove(id).ok_or_else(|| StoreError::UnknownCostume(id.to_string())))
    }

    /// Replace every document with a fresh corpus and empty favorites and log.
    pub fn reset(&mut self, corpus: Corpus) -> Result<(), StoreError> {
        let favorites = Favorites::default();
        let artifacts = ArtifactLog::default();
        favorites.save(&self.path(FAVORITES_FILE))?;
        artifacts.save(&self.path(ARTIFACTS_FILE))?;
        corpus.save(&self.path(CORPUS_FILE))?;
        self.state = Snapshot { corpus, favorites, artifacts };
        Ok(())
    }

    pub fn add_favorite(&mut self, user_id: &str, costume_id: &str) -> Result<Vec<String>, StoreError> {
        let mut next = self.state.favorites.clone();
        let ids = next.add(&self.state.corpus, user_id, costume_id)?;
        if next != self.state.favorites {
            next.save(&self.path(FAVORITES_FILE))?;
            self.state.favorites = next;
        }
        Ok(ids)
    }

    pub fn remove_favorite(&mut self, user_id: &str, costume_id: &str) -> Result<Vec<String>, StoreError> {
        let mut next = self.state.favorites.clone();
        let ids = next.remove(user_id, costume_id);
        if next != self.state.favorites {
            next.save(&self.path(FAVORITES_FILE))?;
            self.state.favorites = next;
        }
        Ok(ids)
    }

    pub fn list_favorites(&self, user_id: &str) -> Vec<String> {
        self.state.favorites.list(user_id)
    }

    pub fn append_artifact(&mut self, artifact: NarrativeArtifact, user_id: Option<String>) -> Result<u64, StoreError> {
        let mut next = self.state.artifacts.clone();
        let id = next.append(artifact, user_id);
        next.save(&self.path(ARTIFACTS_FILE))?;
        self.state.artifacts = next;
        Ok(id)
    }

    pub fn list_artifacts(&self, filter: &ArtifactFilter) -> Vec<&ArtifactEntry> {
        self.state.artifacts.list(filter)
    }
}
