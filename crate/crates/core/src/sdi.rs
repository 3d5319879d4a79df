//! Current-awareness (selective dissemination of information) values and
//! the plain-text digest sent for email-delivery profiles.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::callno::{CallNumber, RangeList};
use crate::model::{ProfileId, UserId};
use crate::window::{DateRange, TimeWindow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Delivery {
    Screen,
    Email,
}

/// A saved range profile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaProfile {
    pub id: ProfileId,
    pub user_id: UserId,
    pub ranges: RangeList,
    pub delivery: Delivery,
}

/// A newly catalogued item with a parsed call number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Acquisition {
    pub call_number: CallNumber,
    pub author: String,
    pub title: String,
    pub record_url: String,
    pub accession_date: NaiveDate,
}

impl Acquisition {
    pub fn item(&self) -> AlertItem {
        AlertItem {
            call_number: format!("{}", self.call_number),
            author: self.author.clone(),
            title: self.title.clone(),
            record_url: self.record_url.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlertItem {
    pub call_number: String,
    pub author: String,
    pub title: String,
    pub record_url: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlertResult {
    pub profile_id: ProfileId,
    pub window: TimeWindow,
    pub dates: DateRange,
    /// Sorted by shelf order of the call number.
    pub items: Vec<AlertItem>,
}

/// Whether an acquisition belongs in a window query for `ranges`.
pub fn matches(ranges: &RangeList, dates: &DateRange, acquisition: &Acquisition) -> bool {
    dates.contains(acquisition.accession_date) && ranges.contains(&acquisition.call_number)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Digest {
    pub subject: String,
    pub body: String,
}

/// Plain-text digest for a non-empty result; `None` when there is nothing
/// to send.
pub fn format_digest(
    result: &AlertResult,
    ranges: &RangeList,
    week_label: &str,
    recipient_name: &str,
) -> Option<Digest> {
    if result.items.is_empty() {
        return None;
    }
    let last_day: NaiveDate = result.dates.end - Days::new(1);
    let subject = format!("New acquisitions {week_label}: {ranges}");

    let mut body = String::new();
    let greeting = if recipient_name.trim().is_empty() {
        String::from("Hello,")
    } else {
        format!("Dear {recipient_name},")
    };
    // Infallible: writing into a String.
    let _ = writeln!(body, "{greeting}");
    let _ = writeln!(body);
    let _ = writeln!(
        body,
        "Items catalogued {} through {} in call number ranges {}:",
        result.dates.start, last_day, ranges
    );
    let _ = writeln!(body);
    for item in &result.items {
        let _ = writeln!(body, "{} | {} | {}", item.call_number, item.author, item.title);
        let _ = writeln!(body, "{}", item.record_url);
    }
    Some(Digest { subject, body })
}
