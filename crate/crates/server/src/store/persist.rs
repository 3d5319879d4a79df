//! Durable storage for the event stream.
//!
//! A data directory holds three files:
//!
//! * `journal.jsonl`: one JSON object per committed mutation,
//!   `{"seq": N, "at": "<rfc3339>", "events": [<event>, ...]}`.
//! * `snapshot.jsonl`: a header line
//!   `{"format": "mylibrary-snapshot", "version": 1, "seq": N, "next_id": M}`
//!   followed by one event per line that rebuilds the state as of `seq`.
//! * `LOCK`: held exclusively while a process has the directory open.
//!
//! Loading replays the snapshot, then every journal record with a larger
//! `seq`. A torn final journal line (crash mid-append) is dropped.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use tracing::warn;

use super::state::{Event, State};
use crate::error::{Error, Result};

const SNAPSHOT_FORMAT: &str = "mylibrary-snapshot";
const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JournalRecord {
    pub seq: u64,
    pub at: DateTime<Utc>,
    pub events: Vec<Event>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SnapshotHeader {
    format: String,
    version: u32,
    seq: u64,
    next_id: u64,
}

pub trait Persistence: Send + Sync {
    /// Rebuilds the state; returns it with the last committed sequence number.
    fn load(&mut self) -> Result<(State, u64)>;
    fn append(&mut self, record: &JournalRecord) -> Result<()>;
    /// Called after every append; implementations decide when to compact.
    fn maybe_snapshot(&mut self, _state: &State, _seq: u64) -> Result<()> {
        Ok(())
    }
}

/// Keeps nothing; state lives only as long as the process.
#[derive(Debug, Default)]
pub struct MemoryPersistence;

impl Persistence for MemoryPersistence {
    fn load(&mut self) -> Result<(State, u64)> {
        Ok((State::default(), 0))
    }

    fn append(&mut self, _record: &JournalRecord) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug)]
pub struct FileJournal {
    dir: PathBuf,
    journal: Option<File>,
    _lock: File,
    snapshot_every: u64,
    since_snapshot: u64,
    fsync: bool,
}

fn storage_err(path: &Path, what: impl std::fmt::Display) -> Error {
    Error::Storage(format!("{}: {what}", path.display()))
}

impl FileJournal {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let lock = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(dir.join("LOCK"))?;
        lock.try_lock()
            .map_err(|_| storage_err(&dir, "data directory is in use by another process"))?;
        Ok(Self {
            dir,
            journal: None,
            _lock: lock,
            snapshot_every: 1000,
            since_snapshot: 0,
            fsync: true,
        })
    }

    pub fn snapshot_every(mut self, records: u64) -> Self {
        self.snapshot_every = records.max(1);
        self
    }

    pub fn fsync(mut self, enabled: bool) -> Self {
        self.fsync = enabled;
        self
    }

    fn journal_path(&self) -> PathBuf {
        self.dir.join("journal.jsonl")
    }

    fn snapshot_path(&self) -> PathBuf {
        self.dir.join("snapshot.jsonl")
    }

    fn journal(&mut self) -> Result<&mut File> {
        if self.journal.is_none() {
            let file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(self.journal_path())?;
            self.journal = Some(file);
        }
        Ok(self.journal.as_mut().expect("just opened"))
    }

    fn load_snapshot(&self, state: &mut State) -> Result<u64> {
        let path = self.snapshot_path();
        let file = match File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(0),
            Err(e) => return Err(e.into()),
        };
        let mut lines = BufReader::new(file).lines();
        let header: SnapshotHeader = match lines.next() {
            Some(line) => serde_json::from_str(&line?).map_err(|e| storage_err(&path, e))?,
            None => return Ok(0),
        };
        if header.format != SNAPSHOT_FORMAT || header.version != SNAPSHOT_VERSION {
            return Err(storage_err(&path, "unsupported snapshot format"));
        }
        for (n, line) in lines.enumerate() {
            let event: Event = serde_json::from_str(&line?)
                .map_err(|e| storage_err(&path, format!("line {}: {e}", n + 2)))?;
            state.apply(event);
        }
        state.next_id = state.next_id.max(header.next_id);
        Ok(header.seq)
    }

    fn write_snapshot(&mut self, state: &State, seq: u64) -> Result<()> {
        let tmp = self.dir.join("snapshot.jsonl.tmp");
        {
            let mut out = BufWriter::new(File::create(&tmp)?);
            let header = SnapshotHeader {
                format: SNAPSHOT_FORMAT.into(),
                version: SNAPSHOT_VERSION,
                seq,
                next_id: state.next_id,
            };
            serde_json::to_writer(&mut out, &header).map_err(|e| storage_err(&tmp, e))?;
            out.write_all(b"\n")?;
            for event in state.to_events() {
                serde_json::to_writer(&mut out, &event).map_err(|e| storage_err(&tmp, e))?;
                out.write_all(b"\n")?;
            }
            let file = out.into_inner().map_err(|e| e.into_error())?;
            file.sync_all()?;
        }
        fs::rename(&tmp, self.snapshot_path())?;
        // Records up to `seq` are now covered by the snapshot.
        self.journal = None;
        File::create(self.journal_path())?;
        self.since_snapshot = 0;
        Ok(())
    }
}

impl Persistence for FileJournal {
    fn load(&mut self) -> Result<(State, u64)> {
        let mut state = State::default();
        let mut seq = self.load_snapshot(&mut state)?;
        let path = self.journal_path();
        let text = match fs::read_to_string(&path) {
            Ok(text) => text,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
            Err(e) => return Err(e.into()),
        };
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        for (i, line) in lines.iter().enumerate() {
            let record: JournalRecord = match serde_json::from_str(line) {
                Ok(r) => r,
                Err(e) if i + 1 == lines.len() && !text.ends_with('\n') => {
                    warn!(error = %e, "dropping torn final journal record");
                    break;
                }
                Err(e) => return Err(storage_err(&path, format!("record {}: {e}", i + 1))),
            };
            if record.seq <= seq {
                continue;
            }
            seq = record.seq;
            self.since_snapshot += 1;
            for event in record.events {
                state.apply(event);
            }
        }
        if !text.is_empty() && !text.ends_with('\n') {
            // Rewrite without the torn tail so later appends start on a fresh line.
            self.write_snapshot(&state, seq)?;
        }
        Ok((state, seq))
    }

    fn append(&mut self, record: &JournalRecord) -> Result<()> {
        let mut line = serde_json::to_vec(record).map_err(|e| Error::Storage(e.to_string()))?;
        line.push(b'\n');
        let fsync = self.fsync;
        let file = self.journal()?;
        file.write_all(&line)?;
        if fsync {
            file.sync_data()?;
        }
        self.since_snapshot += 1;
        Ok(())
    }

    fn maybe_snapshot(&mut self, state: &State, seq: u64) -> Result<()> {
        if self.since_snapshot >= self.snapshot_every {
            self.write_snapshot(state, seq)?;
        }
        Ok(())
    }
}
