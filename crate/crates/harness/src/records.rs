//! Append-only JSON-lines record store.

use std::collections::BTreeSet;
use std::fs::{File, OpenOptions, TryLockError};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use anneal_core::{DriverKind, RunRecord};

use crate::error::{HarnessError, Result};

/// Identity of a record for deduplication.
pub type RecordKey = (usize, u64, DriverKind);

pub fn record_key(r: &RunRecord) -> RecordKey {
    (r.n, r.seed, r.driver)
}

/// Reads every complete record. A final line without a terminating newline
/// is the remains of an interrupted append and is ignored.
pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut records = Vec::new();
    let mut line = String::new();
    let mut number = 0;
    loop {
        line.clear();
        let read = reader.read_line(&mut line).map_err(|e| HarnessError::io(path, e))?;
        if read == 0 || !line.ends_with('\n') {
            break;
        }
        number += 1;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| HarnessError::Records {
            path: path.to_path_buf(),
            line: number,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Sorts by (n, seed, driver).
pub fn canonical_sort(records: &mut [RunRecord]) {
    records.sort_by_key(record_key);
}

pub fn to_jsonl(records: &[RunRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("records serialize") + "\n")
        .collect()
}

pub struct RecordStore {
    path: PathBuf,
    file: File,
    keys: BTreeSet<RecordKey>,
}

impl RecordStore {
    /// Opens or creates the store, dropping a torn final line left by an
    /// interrupted append. The file stays exclusively locked while the store
    /// is alive, so two runs never append to the same file.
    pub fn open(path: &Path) -> Result<(Self, Vec<RunRecord>)> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| HarnessError::io(path, e))?;
        file.try_lock().map_err(|e| match e {
            TryLockError::WouldBlock => HarnessError::io(
                path,
                std::io::Error::new(std::io::ErrorKind::WouldBlock, "record file is in use by another run"),
            ),
            TryLockError::Error(e) => HarnessError::io(path, e),
        })?;
        let existing = read_records(path)?;
        let text = std::fs::read(path).map_err(|e| HarnessError::io(path, e))?;
        let complete = text.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
        if complete < text.len() {
            file.set_len(complete as u64).map_err(|e| HarnessError::io(path, e))?;
        }
        let keys = existing.iter().map(record_key).collect();
        Ok((
            Self {
                path: path.to_path_buf(),
                file,
                keys,
            },
            existing,
        ))
    }

    pub fn contains(&self, key: &RecordKey) -> bool {
        self.keys.contains(key)
    }

    /// Appends one record; records already present are skipped, never
    /// overwritten. Returns whether the record was written.
    pub fn append(&mut self, record: &RunRecord) -> Result<bool> {
        if !self.keys.insert(record_key(record)) {
            return Ok(false);
        }
        let line = serde_json::to_string(record).expect("records serialize") + "\n";
        self.file
            .write_all(line.as_bytes())
            .and_then(|_| self.file.flush())
            .map_err(|e| HarnessError::io(&self.path, e))?;
        Ok(true)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}
