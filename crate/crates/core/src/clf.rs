//! NCSA Common Log Format.
//!
//! ```text
//! 127.0.0.1 - frank [10/Oct/2000:13:55:36 -0700] "GET /index.html HTTP/1.0" 200 2326
//! ```

use alloc::string::{String, ToString};
use core::fmt;

use chrono::{DateTime, FixedOffset};

pub const TIMESTAMP_FORMAT: &str = "%d/%b/%Y:%H:%M:%S %z";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEntry {
    pub host: String,
    pub ident: Option<String>,
    pub authuser: Option<String>,
    pub timestamp: DateTime<FixedOffset>,
    pub method: String,
    pub target: String,
    pub protocol: String,
    pub status: u16,
    pub bytes: Option<u64>,
}

impl LogEntry {
    /// Path component of the request target, without the query string.
    pub fn path(&self) -> &str {
        self.target.split_once('?').map_or(&self.target, |(p, _)| p)
    }

    pub fn query(&self) -> Option<&str> {
        self.target.split_once('?').map(|(_, q)| q)
    }
}

fn dash(field: &Option<String>) -> &str {
    field.as_deref().unwrap_or("-")
}

impl fmt::Display for LogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} [{}] \"{} {} {}\" {} ",
            self.host,
            dash(&self.ident),
            dash(&self.authuser),
            self.timestamp.format(TIMESTAMP_FORMAT),
            self.method,
            self.target,
            self.protocol,
            self.status
        )?;
        match self.bytes {
            Some(n) => write!(f, "{n}"),
            None => f.write_str("-"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogParseError {
    MissingField(&'static str),
    BadTimestamp,
    BadRequest,
    BadStatus,
    BadBytes,
    TrailingData,
}

impl fmt::Display for LogParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogParseError::MissingField(name) => write!(f, "missing {name}"),
            LogParseError::BadTimestamp => f.write_str("bad timestamp"),
            LogParseError::BadRequest => f.write_str("bad request line"),
            LogParseError::BadStatus => f.write_str("bad status code"),
            LogParseError::BadBytes => f.write_str("bad byte count"),
            LogParseError::TrailingData => f.write_str("trailing data"),
        }
    }
}

fn word<'a>(rest: &mut &'a str, name: &'static str) -> Result<&'a str, LogParseError> {
    let s = rest.trim_start_matches(' ');
    let end = s.find(' ').unwrap_or(s.len());
    if end == 0 {
        return Err(LogParseError::MissingField(name));
    }
    *rest = &s[end..];
    Ok(&s[..end])
}

fn optional(value: &str) -> Option<String> {
    (value != "-").then(|| value.to_string())
}

pub fn parse_line(line: &str) -> Result<LogEntry, LogParseError> {
    let mut rest = line.trim();
    let host = word(&mut rest, "host")?;
    let ident = word(&mut rest, "ident")?;
    let authuser = word(&mut rest, "authuser")?;

    let s = rest.trim_start_matches(' ');
    let s = s.strip_prefix('[').ok_or(LogParseError::MissingField("timestamp"))?;
    let close = s.find(']').ok_or(LogParseError::BadTimestamp)?;
    let timestamp = DateTime::parse_from_str(&s[..close], TIMESTAMP_FORMAT)
        .map_err(|_| LogParseError::BadTimestamp)?;

    let s = s[close + 1..].trim_start_matches(' ');
    let s = s.strip_prefix('"').ok_or(LogParseError::MissingField("request"))?;
    let close = s.rfind('"').ok_or(LogParseError::BadRequest)?;
    let mut parts = s[..close].split(' ');
    let (Some(method), Some(target), Some(protocol), None) =
        (parts.next(), parts.next(), parts.next(), parts.next())
    else {
        return Err(LogParseError::BadRequest);
    };
    if method.is_empty() || !target.starts_with('/') || !protocol.starts_with("HTTP/") {
        return Err(LogParseError::BadRequest);
    }

    rest = &s[close + 1..];
    let status = word(&mut rest, "status")?;
    let status: u16 = status.parse().map_err(|_| LogParseError::BadStatus)?;
    if !(100..=599).contains(&status) {
        return Err(LogParseError::BadStatus);
    }
    let bytes = match word(&mut rest, "bytes")? {
        "-" => None,
        n => Some(n.parse().map_err(|_| LogParseError::BadBytes)?),
    };
    if !rest.trim().is_empty() {
        return Err(LogParseError::TrailingData);
    }

    Ok(LogEntry {
        host: host.to_string(),
        ident: optional(ident),
        authuser: optional(authuser),
        timestamp,
        method: method.to_string(),
        target: target.to_string(),
        protocol: protocol.to_string(),
        status,
        bytes,
    })
}
