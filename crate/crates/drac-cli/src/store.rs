//! Line-delimited order store. One record per line as
//! `<fnv64-of-json, 16 hex digits><TAB><json>`, so every line carries its
//! own checksum and a truncated or edited file is caught at the exact line.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use drac_core::engine::order::OrderRecord;
use drac_core::pricing::fnv64;

#[derive(Debug)]
pub enum StoreError {
    Io(std::io::Error),
    Corrupt { line_number: usize, reason: String },
}

impl fmt::Display for StoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StoreError::Io(e) => write!(f, "store io error: {e}"),
            StoreError::Corrupt {
                line_number,
                reason,
            } => write!(f, "store corrupt at line {line_number}: {reason}"),
        }
    }
}

impl std::error::Error for StoreError {}

impl From<std::io::Error> for StoreError {
    fn from(e: std::io::Error) -> Self {
        StoreError::Io(e)
    }
}

pub struct RecordingStore {
    path: PathBuf,
}

impl RecordingStore {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        RecordingStore { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn encode(record: &OrderRecord) -> Result<String, StoreError> {
        let json = serde_json::to_string(record).map_err(|e| StoreError::Corrupt {
            line_number: 0,
            reason: format!("encode failed: {e}"),
        })?;
        Ok(format!("{:016x}\t{json}", fnv64(json.as_bytes())))
    }

    fn decode(line: &str, line_number: usize) -> Result<OrderRecord, StoreError> {
        let corrupt = |reason: String| StoreError::Corrupt {
            line_number,
            reason,
        };
        let (sum_text, json) = line
            .split_once('\t')
            .ok_or_else(|| corrupt("missing checksum field".to_string()))?;
        let stored = u64::from_str_radix(sum_text, 16)
            .map_err(|_| corrupt(format!("bad checksum field `{sum_text}`")))?;
        let actual = fnv64(json.as_bytes());
        if stored != actual {
            return Err(corrupt(format!(
                "checksum mismatch: line says {stored:016x}, content hashes to {actual:016x}"
            )));
        }
        serde_json::from_str(json).map_err(|e| corrupt(format!("bad record json: {e}")))
    }

    /// All records in file order. A missing file is an empty store.
    pub fn load(&self) -> Result<Vec<OrderRecord>, StoreError> {
        let text = match fs::read_to_string(&self.path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e.into()),
        };
        let mut records = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            records.push(Self::decode(line, idx + 1)?);
        }
        Ok(records)
    }

    pub fn append(&self, record: &OrderRecord) -> Result<(), StoreError> {
        let mut file = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)?;
        writeln!(file, "{}", Self::encode(record)?)?;
        Ok(())
    }

    /// Rewrite the whole store atomically (temp file, then rename).
    pub fn save_all(&self, records: &[OrderRecord]) -> Result<(), StoreError> {
        let tmp = self.path.with_extension("tmp");
        {
            let mut file = fs::File::create(&tmp)?;
            for record in records {
                writeln!(file, "{}", Self::encode(record)?)?;
            }
            file.sync_all()?;
        }
        fs::rename(&tmp, &self.path)?;
        Ok(())
    }

    /// Recordings for one phone number, newest first (later lines are newer).
    pub fn find_by_phone(&self, phone: &str) -> Result<Vec<OrderRecord>, StoreError> {
        let mut hits: Vec<OrderRecord> = self
            .load()?
            .into_iter()
            .filter(|r| r.customer.phone == phone)
            .collect();
        hits.reverse();
        Ok(hits)
    }
}
