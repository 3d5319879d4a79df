//! Week-granular search windows ("from 2 weeks ago to this week").
//!
//! Weeks are ISO-8601 weeks starting Monday 00:00 in the evaluating
//! timezone. Week `k` ago spans `[monday - 7k days, monday - 7k + 7 days)`
//! where `monday` starts the current week; the current week (`k = 0`) is
//! cut off at the evaluation date.

use alloc::format;
use alloc::string::String;
use core::fmt;

use chrono::{Datelike, Days, NaiveDate};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InvertedWindow {
    pub from_weeks_ago: u32,
    pub to_weeks_ago: u32,
}

impl fmt::Display for InvertedWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "window starts {} weeks ago but ends {} weeks ago",
            self.from_weeks_ago, self.to_weeks_ago
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "WindowRepr", into = "WindowRepr")]
pub struct TimeWindow {
    from_weeks_ago: u32,
    to_weeks_ago: u32,
}

#[derive(Serialize, Deserialize)]
struct WindowRepr {
    from_weeks_ago: u32,
    to_weeks_ago: u32,
}

impl TryFrom<WindowRepr> for TimeWindow {
    type Error = InvertedWindow;

    fn try_from(r: WindowRepr) -> Result<Self, Self::Error> {
        TimeWindow::new(r.from_weeks_ago, r.to_weeks_ago)
    }
}

impl From<TimeWindow> for WindowRepr {
    fn from(w: TimeWindow) -> Self {
        WindowRepr {
            from_weeks_ago: w.from_weeks_ago,
            to_weeks_ago: w.to_weeks_ago,
        }
    }
}

/// Half-open date interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DateRange {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateRange {
    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date < self.end
    }
}

impl TimeWindow {
    pub fn new(from_weeks_ago: u32, to_weeks_ago: u32) -> Result<Self, InvertedWindow> {
        if from_weeks_ago < to_weeks_ago {
            return Err(InvertedWindow {
                from_weeks_ago,
                to_weeks_ago,
            });
        }
        Ok(Self {
            from_weeks_ago,
            to_weeks_ago,
        })
    }

    /// The last complete week before `today`'s week.
    pub fn previous_week() -> Self {
        Self {
            from_weeks_ago: 1,
            to_weeks_ago: 1,
        }
    }

    pub fn from_weeks_ago(&self) -> u32 {
        self.from_weeks_ago
    }

    pub fn to_weeks_ago(&self) -> u32 {
        self.to_weeks_ago
    }

    pub fn resolve(&self, today: NaiveDate) -> DateRange {
        let monday = week_start(today);
        let start = monday - Days::new(7 * u64::from(self.from_weeks_ago));
        let end = if self.to_weeks_ago == 0 {
            today + Days::new(1)
        } else {
            monday - Days::new(7 * u64::from(self.to_weeks_ago - 1))
        };
        DateRange { start, end }
    }
}

/// Monday of the ISO week containing `date`.
pub fn week_start(date: NaiveDate) -> NaiveDate {
    date - Days::new(u64::from(date.weekday().num_days_from_monday()))
}

/// ISO week label such as `2026-W07`.
pub fn iso_week_label(date: NaiveDate) -> String {
    let week = date.iso_week();
    format!("{:04}-W{:02}", week.year(), week.week())
}
