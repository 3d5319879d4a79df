//! Core vocabulary and pure algorithms for the MyLibrary portal.
//!
//! Everything here is allocation-only and free of IO so it can be embedded
//! anywhere. The `mylibrary` crate layers storage, HTTP and mail on top.
//!
//! * [`model`]: domain types, the fixed page-section taxonomy and the
//!   interactive-assistance classification of every service.
//! * [`callno`]: Library of Congress call-number parsing, total order,
//!   sort keys and class-letter ranges.
//! * [`window`]: ISO-week time windows for current-awareness searches.
//! * [`sdi`]: acquisition matching and digest formatting.
//! * [`quicksearch`]: URL-template expansion for quick-search engines.
//! * [`clf`] and [`usage`]: Common Log Format parsing and usage reports.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod callno;
pub mod clf;
pub mod model;
pub mod quicksearch;
pub mod sdi;
pub mod usage;
pub mod window;

pub use callno::{CallNumber, CallNumberRange, ClassLetters, ParseError, RangeList, SortKey};
pub use model::{Section, ServiceClassification};
