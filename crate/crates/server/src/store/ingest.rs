//! Acquisition feed: tab-separated rows of
//! `call_number  author  title  record_url  accession_date (YYYY-MM-DD)`.
//! Blank lines and lines starting with `#` are ignored.

use chrono::NaiveDate;
use mylibrary_core::callno::CallNumber;
use mylibrary_core::sdi::Acquisition;
use serde::{Deserialize, Serialize};

use super::state::QuarantinedRecord;

/// One unvalidated feed row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcquisitionRecord {
    #[serde(default)]
    pub line: Option<usize>,
    pub call_number: String,
    pub author: String,
    pub title: String,
    pub record_url: String,
    pub accession_date: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub accepted: usize,
    pub duplicates: usize,
    pub quarantined: usize,
    pub reasons: Vec<QuarantinedRecord>,
}

impl AcquisitionRecord {
    fn text(&self) -> String {
        [
            self.call_number.as_str(),
            &self.author,
            &self.title,
            &self.record_url,
            &self.accession_date,
        ]
        .join("\t")
    }

    pub fn parse(&self) -> Result<Acquisition, QuarantinedRecord> {
        let reject = |reason: String| QuarantinedRecord {
            line: self.line,
            text: self.text(),
            reason,
        };
        let call_number = CallNumber::parse(&self.call_number)
            .map_err(|e| reject(format!("call number: {e}")))?;
        let accession_date = NaiveDate::parse_from_str(self.accession_date.trim(), "%Y-%m-%d")
            .map_err(|e| reject(format!("accession date: {e}")))?;
        if self.title.trim().is_empty() {
            return Err(reject("title is empty".into()));
        }
        Ok(Acquisition {
            call_number,
            author: self.author.trim().to_string(),
            title: self.title.trim().to_string(),
            record_url: self.record_url.trim().to_string(),
            accession_date,
        })
    }
}

/// Splits a feed into rows; rows with the wrong column count are rejected
/// immediately.
pub fn parse_acquisitions_tsv(text: &str) -> (Vec<AcquisitionRecord>, Vec<QuarantinedRecord>) {
    let mut rows = Vec::new();
    let mut rejected = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if let [call_number, author, title, record_url, accession_date] = fields[..] {
            rows.push(AcquisitionRecord {
                line: Some(line_no),
                call_number: call_number.to_string(),
                author: author.to_string(),
                title: title.to_string(),
                record_url: record_url.to_string(),
                accession_date: accession_date.to_string(),
            });
        } else {
            rejected.push(QuarantinedRecord {
                line: Some(line_no),
                text: line.to_string(),
                reason: format!("expected 5 tab-separated fields, found {}", fields.len()),
            });
        }
    }
    (rows, rejected)
}

impl super::Store {
    pub fn ingest_tsv(&self, text: &str) -> crate::error::Result<IngestReport> {
        let (rows, rejected) = parse_acquisitions_tsv(text);
        self.record_ingest(rows, rejected)
    }
}
