//! Usage reports computed from access-log lines.
//!
//! Requests are bucketed into route keys: `page`, `customize.<section>`,
//! `personal-links`, `quick-search`, `current-awareness.<action>`,
//! `admin.<entity>`, or the first path segment for anything else (`root`
//! for `/`). Quick-search hits are additionally counted per engine id and
//! customize hits per section.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::clf::{parse_line, LogEntry};

/// Inclusive date interval, compared against each line's local date.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Period {
    pub from: NaiveDate,
    pub to: NaiveDate,
}

impl Period {
    pub fn contains(&self, date: NaiveDate) -> bool {
        self.from <= date && date <= self.to
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageReport {
    pub period: Option<Period>,
    /// Well-formed requests inside the period.
    pub requests: u64,
    pub counters: BTreeMap<String, u64>,
    pub sections: BTreeMap<String, u64>,
    pub engines: BTreeMap<String, u64>,
    pub distinct_users: u64,
    pub malformed: u64,
    pub out_of_period: u64,
}

pub fn route_key(path: &str) -> String {
    let mut segments = path.trim_matches('/').split('/').filter(|s| !s.is_empty());
    match (segments.next(), segments.next()) {
        (None, _) => "root".to_string(),
        (Some(head @ ("customize" | "admin" | "current-awareness")), Some(next)) => {
            format!("{head}.{next}")
        }
        (Some(head), _) => head.to_string(),
    }
}

fn query_param<'a>(query: &'a str, name: &str) -> Option<&'a str> {
    query
        .split('&')
        .filter_map(|pair| pair.split_once('='))
        .find(|(k, _)| *k == name)
        .map(|(_, v)| v)
}

/// Tallies `lines`, optionally restricted to `period`. Blank lines are
/// ignored; unparseable lines only bump `malformed`.
pub fn usage_report<'a, I>(lines: I, period: Option<Period>) -> UsageReport
where
    I: IntoIterator<Item = &'a str>,
{
    let mut report = UsageReport {
        period,
        ..UsageReport::default()
    };
    let mut users = BTreeSet::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let entry = match parse_line(line) {
            Ok(entry) => entry,
            Err(_) => {
                report.malformed += 1;
                continue;
            }
        };
        if let Some(p) = &period {
            if !p.contains(entry.timestamp.date_naive()) {
                report.out_of_period += 1;
                continue;
            }
        }
        tally(&mut report, &mut users, entry);
    }
    report.distinct_users = users.len() as u64;
    report
}

fn tally(report: &mut UsageReport, users: &mut BTreeSet<String>, entry: LogEntry) {
    report.requests += 1;
    let key = route_key(entry.path());
    if let Some(section) = key.strip_prefix("customize.") {
        *report.sections.entry(section.to_string()).or_default() += 1;
    }
    if key == "quick-search" {
        if let Some(engine) = entry.query().and_then(|q| query_param(q, "engine")) {
            *report.engines.entry(engine.to_string()).or_default() += 1;
        }
    }
    *report.counters.entry(key).or_default() += 1;
    if let Some(user) = entry.authuser {
        users.insert(user);
    }
}
