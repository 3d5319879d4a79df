//! Quick-search URL construction.

use alloc::string::String;
use core::fmt;

use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};

use crate::model::QUERY_PLACEHOLDER;

/// Everything except RFC 3986 unreserved characters gets encoded.
const QUERY_COMPONENT: &AsciiSet = &NON_ALPHANUMERIC
    .remove(b'-')
    .remove(b'.')
    .remove(b'_')
    .remove(b'~');

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QuickSearchError {
    EmptyQuery,
    BadTemplate { placeholders: usize },
}

impl fmt::Display for QuickSearchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuickSearchError::EmptyQuery => f.write_str("query must not be empty"),
            QuickSearchError::BadTemplate { placeholders } => write!(
                f,
                "template must contain exactly one {QUERY_PLACEHOLDER}, found {placeholders}"
            ),
        }
    }
}

pub fn encode_query(query: &str) -> String {
    utf8_percent_encode(query, QUERY_COMPONENT).collect()
}

/// Substitutes the percent-encoded `query` into `template`.
pub fn expand(template: &str, query: &str) -> Result<String, QuickSearchError> {
    if query.trim().is_empty() {
        return Err(QuickSearchError::EmptyQuery);
    }
    let placeholders = template.matches(QUERY_PLACEHOLDER).count();
    if placeholders != 1 {
        return Err(QuickSearchError::BadTemplate { placeholders });
    }
    Ok(template.replacen(QUERY_PLACEHOLDER, &encode_query(query), 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    const DICT: &str = "https://example.test/dict?q={query}";

    #[test]
    fn substitutes_plain_query() {
        assert_eq!(expand(DICT, "hegel").unwrap(), "https://example.test/dict?q=hegel");
    }

    #[test]
    fn encodes_spaces_and_reserved() {
        assert_eq!(
            expand(DICT, "free will").unwrap(),
            "https://example.test/dict?q=free%20will"
        );
        assert_eq!(encode_query("a&b=c/d?#%+"), "a%26b%3Dc%2Fd%3F%23%25%2B");
        assert_eq!(encode_query("naïve"), "na%C3%AFve");
        assert_eq!(encode_query("A-z_0.9~"), "A-z_0.9~");
    }

    #[test]
    fn rejects_empty_query_and_bad_template() {
        assert_eq!(expand(DICT, ""), Err(QuickSearchError::EmptyQuery));
        assert_eq!(expand(DICT, "   "), Err(QuickSearchError::EmptyQuery));
        assert_eq!(
            expand("https://example.test/", "x"),
            Err(QuickSearchError::BadTemplate { placeholders: 0 })
        );
    }
}
