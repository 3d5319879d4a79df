//! Library of Congress call numbers.
//!
//! Accepted grammar (case-insensitive, canonical form uppercase):
//!
//! ```text
//! CLASS [NUMBER[.DECIMAL]] [[.]CUTTER]* [YEAR]
//! CLASS  = 1-3 letters
//! CUTTER = letter digit+
//! YEAR   = 4 digits, whitespace-separated, last token
//! ```
//!
//! Shelf order compares class letters left to right with a shorter prefix
//! first, then the class number numerically, then cutters token by token
//! (letter, then digits read as a decimal fraction), then the year.
//! Decimal parts and cutter digits are normalized by dropping trailing
//! zeros, so structural equality and shelf order agree.

use alloc::borrow::ToOwned;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

const MAX_CLASS_LETTERS: usize = 3;
const MAX_NUMBER_DIGITS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Empty,
    NonAscii,
    ExpectedClass,
    ClassTooLong,
    NumberTooLong,
    ExpectedDigits,
    ExpectedCutter,
    InvalidYear,
    Unexpected(char),
    /// Range list had an empty element or a side was not 1-3 letters.
    MalformedRange,
    /// Range lower bound sorts after its upper bound.
    InvertedRange,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Empty => f.write_str("empty input"),
            ParseErrorKind::NonAscii => f.write_str("non-ASCII character"),
            ParseErrorKind::ExpectedClass => f.write_str("expected class letters"),
            ParseErrorKind::ClassTooLong => f.write_str("class has more than three letters"),
            ParseErrorKind::NumberTooLong => f.write_str("class number has too many digits"),
            ParseErrorKind::ExpectedDigits => f.write_str("expected digits"),
            ParseErrorKind::ExpectedCutter => f.write_str("expected a cutter (letter and digits)"),
            ParseErrorKind::InvalidYear => f.write_str("year must be exactly four digits"),
            ParseErrorKind::Unexpected(c) => write!(f, "unexpected character {c:?}"),
            ParseErrorKind::MalformedRange => f.write_str("malformed range"),
            ParseErrorKind::InvertedRange => f.write_str("range lower bound is above upper bound"),
        }
    }
}

/// Parse failure with the byte offset where it was detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn at(offset: usize, kind: ParseErrorKind) -> Self {
        Self { offset, kind }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at offset {}", self.kind, self.offset)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ParseError {}

/// One to three uppercase class letters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassLetters(String);

impl ClassLetters {
    pub fn new(text: &str) -> Result<Self, ParseError> {
        if text.is_empty() {
            return Err(ParseError::at(0, ParseErrorKind::ExpectedClass));
        }
        for (i, c) in text.char_indices() {
            if !c.is_ascii_alphabetic() {
                return Err(ParseError::at(i, ParseErrorKind::ExpectedClass));
            }
            if i >= MAX_CLASS_LETTERS {
                return Err(ParseError::at(i, ParseErrorKind::ClassTooLong));
            }
        }
        Ok(Self(text.to_ascii_uppercase()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn starts_with(&self, prefix: &ClassLetters) -> bool {
        self.0.starts_with(prefix.as_str())
    }
}

impl fmt::Display for ClassLetters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for ClassLetters {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::new(s)
    }
}

/// Integer part plus normalized decimal digits (empty when absent).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassNumber {
    integer: u32,
    decimal: String,
}

impl ClassNumber {
    pub fn integer(&self) -> u32 {
        self.integer
    }

    /// Digits after the decimal point, trailing zeros removed.
    pub fn decimal(&self) -> Option<&str> {
        (!self.decimal.is_empty()).then_some(self.decimal.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cutter {
    letter: u8,
    digits: String,
}

impl Cutter {
    pub fn letter(&self) -> char {
        self.letter as char
    }

    pub fn digits(&self) -> &str {
        &self.digits
    }
}

impl fmt::Display for Cutter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.letter as char, self.digits)
    }
}

/// A parsed call number. Equality ignores the original text.
#[derive(Debug, Clone)]
pub struct CallNumber {
    class: ClassLetters,
    number: Option<ClassNumber>,
    cutters: Vec<Cutter>,
    year: Option<u16>,
    raw: String,
}

impl CallNumber {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        Parser::new(text).call_number()
    }

    pub fn class(&self) -> &ClassLetters {
        &self.class
    }

    pub fn number(&self) -> Option<&ClassNumber> {
        self.number.as_ref()
    }

    pub fn cutters(&self) -> &[Cutter] {
        &self.cutters
    }

    pub fn year(&self) -> Option<u16> {
        self.year
    }

    /// The text this call number was parsed from, verbatim.
    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn sort_key(&self) -> SortKey {
        let mut key = Vec::with_capacity(24);
        key.extend_from_slice(self.class.as_str().as_bytes());
        key.push(0x00);
        match &self.number {
            None => key.push(0x01),
            Some(n) => {
                key.push(0x02);
                let digits = n.integer.to_string();
                key.push(digits.len() as u8);
                key.extend_from_slice(digits.as_bytes());
                key.extend_from_slice(n.decimal.as_bytes());
                key.push(0x00);
            }
        }
        for cutter in &self.cutters {
            key.push(0x02);
            key.push(cutter.letter);
            key.extend_from_slice(cutter.digits.as_bytes());
            key.push(0x00);
        }
        key.push(0x01);
        match self.year {
            None => key.push(0x01),
            Some(year) => {
                key.push(0x02);
                key.extend_from_slice(year.to_be_bytes().as_slice());
            }
        }
        SortKey(key)
    }
}

impl PartialEq for CallNumber {
    fn eq(&self, other: &Self) -> bool {
        self.class == other.class
            && self.number == other.number
            && self.cutters == other.cutters
            && self.year == other.year
    }
}

impl Eq for CallNumber {}

impl PartialOrd for CallNumber {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CallNumber {
    fn cmp(&self, other: &Self) -> Ordering {
        compare(self, other)
    }
}

/// Shelf order of two call numbers.
pub fn compare(a: &CallNumber, b: &CallNumber) -> Ordering {
    a.class
        .cmp(&b.class)
        .then_with(|| match (&a.number, &b.number) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
            (Some(x), Some(y)) => x
                .integer
                .cmp(&y.integer)
                .then_with(|| cmp_fraction(&x.decimal, &y.decimal)),
        })
        .then_with(|| {
            for (x, y) in a.cutters.iter().zip(&b.cutters) {
                let ord = x
                    .letter
                    .cmp(&y.letter)
                    .then_with(|| cmp_fraction(&x.digits, &y.digits));
                if ord != Ordering::Equal {
                    return ord;
                }
            }
            a.cutters.len().cmp(&b.cutters.len())
        })
        .then_with(|| a.year.cmp(&b.year))
}

// Digit strings read as ".digits"; callers guarantee no trailing zeros
// except a lone "0", under which plain byte order is numeric order.
fn cmp_fraction(a: &str, b: &str) -> Ordering {
    a.as_bytes().cmp(b.as_bytes())
}

impl fmt::Display for CallNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.class.as_str())?;
        if let Some(n) = &self.number {
            write!(f, "{}", n.integer)?;
            if !n.decimal.is_empty() {
                write!(f, ".{}", n.decimal)?;
            }
        }
        for (i, cutter) in self.cutters.iter().enumerate() {
            if i == 0 {
                write!(f, " .{cutter}")?;
            } else {
                write!(f, " {cutter}")?;
            }
        }
        if let Some(year) = self.year {
            write!(f, " {year:04}")?;
        }
        Ok(())
    }
}

impl FromStr for CallNumber {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl Serialize for CallNumber {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CallNumber {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        CallNumber::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Byte string whose lexicographic order is shelf order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SortKey(Vec<u8>);

impl SortKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }
}

fn trim_fraction(mut digits: String, keep_one: bool) -> String {
    let min = usize::from(keep_one);
    while digits.len() > min && digits.ends_with('0') {
        digits.pop();
    }
    digits
}

struct Parser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            text,
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn peek_at(&self, ahead: usize) -> Option<u8> {
        self.bytes.get(self.pos + ahead).copied()
    }

    fn skip_ws(&mut self) -> bool {
        let start = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
        self.pos > start
    }

    fn digits(&mut self) -> &'a str {
        let start = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
            self.pos += 1;
        }
        &self.text[start..self.pos]
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError::at(self.pos, kind)
    }

    fn unexpected(&self) -> ParseError {
        match self.text[self.pos..].chars().next() {
            Some(c) if !c.is_ascii() => self.error(ParseErrorKind::NonAscii),
            Some(c) => self.error(ParseErrorKind::Unexpected(c)),
            None => self.error(ParseErrorKind::ExpectedCutter),
        }
    }

    fn call_number(mut self) -> Result<CallNumber, ParseError> {
        if self.text.trim().is_empty() {
            return Err(self.error(ParseErrorKind::Empty));
        }
        self.skip_ws();

        let start = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_alphabetic()) {
            if self.pos - start == MAX_CLASS_LETTERS {
                return Err(self.error(ParseErrorKind::ClassTooLong));
            }
            self.pos += 1;
        }
        if self.pos == start {
            return Err(match self.peek() {
                Some(b) if !b.is_ascii() => self.error(ParseErrorKind::NonAscii),
                _ => self.error(ParseErrorKind::ExpectedClass),
            });
        }
        let class = ClassLetters(self.text[start..self.pos].to_ascii_uppercase());

        self.skip_ws();
        let number = match self.peek() {
            Some(b) if b.is_ascii_digit() => Some(self.class_number()?),
            _ => None,
        };

        let mut cutters = Vec::new();
        let mut year = None;
        loop {
            let spaced = self.skip_ws();
            let Some(b) = self.peek() else { break };
            match b {
                b'.' => {
                    self.pos += 1;
                    cutters.push(self.cutter()?);
                }
                b if b.is_ascii_alphabetic() => cutters.push(self.cutter()?),
                b if b.is_ascii_digit() && spaced && (number.is_some() || !cutters.is_empty()) => {
                    let at = self.pos;
                    let digits = self.digits();
                    if digits.len() != 4 {
                        return Err(ParseError::at(at, ParseErrorKind::InvalidYear));
                    }
                    year = Some(digits.parse::<u16>().expect("four ascii digits"));
                    self.skip_ws();
                    if self.peek().is_some() {
                        return Err(self.unexpected());
                    }
                    break;
                }
                _ => return Err(self.unexpected()),
            }
        }

        Ok(CallNumber {
            class,
            number,
            cutters,
            year,
            raw: self.text.to_owned(),
        })
    }

    fn class_number(&mut self) -> Result<ClassNumber, ParseError> {
        let start = self.pos;
        let digits = self.digits();
        let significant = digits.trim_start_matches('0');
        if significant.len() > MAX_NUMBER_DIGITS {
            return Err(ParseError::at(start, ParseErrorKind::NumberTooLong));
        }
        let integer = if significant.is_empty() {
            0
        } else {
            significant.parse().expect("at most nine ascii digits")
        };
        let mut decimal = String::new();
        if self.peek() == Some(b'.') && matches!(self.peek_at(1), Some(b) if b.is_ascii_digit()) {
            self.pos += 1;
            decimal = trim_fraction(self.digits().to_owned(), false);
        }
        Ok(ClassNumber { integer, decimal })
    }

    fn cutter(&mut self) -> Result<Cutter, ParseError> {
        let letter = match self.peek() {
            Some(b) if b.is_ascii_alphabetic() => b.to_ascii_uppercase(),
            Some(b) if !b.is_ascii() => return Err(self.error(ParseErrorKind::NonAscii)),
            _ => return Err(self.error(ParseErrorKind::ExpectedCutter)),
        };
        self.pos += 1;
        let digits = self.digits();
        if digits.is_empty() {
            return Err(self.error(ParseErrorKind::ExpectedDigits));
        }
        Ok(Cutter {
            letter,
            digits: trim_fraction(digits.to_owned(), true),
        })
    }
}

/// Inclusive class-letter range; the upper bound also admits any class
/// that starts with it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RangeRepr", into = "RangeRepr")]
pub struct CallNumberRange {
    lo: ClassLetters,
    hi: ClassLetters,
}

#[derive(Serialize, Deserialize)]
struct RangeRepr {
    lo: String,
    hi: String,
}

impl TryFrom<RangeRepr> for CallNumberRange {
    type Error = ParseError;

    fn try_from(repr: RangeRepr) -> Result<Self, Self::Error> {
        CallNumberRange::new(ClassLetters::new(&repr.lo)?, ClassLetters::new(&repr.hi)?)
    }
}

impl From<CallNumberRange> for RangeRepr {
    fn from(range: CallNumberRange) -> Self {
        RangeRepr {
            lo: range.lo.0,
            hi: range.hi.0,
        }
    }
}

impl CallNumberRange {
    pub fn new(lo: ClassLetters, hi: ClassLetters) -> Result<Self, ParseError> {
        if lo > hi {
            return Err(ParseError::at(0, ParseErrorKind::InvertedRange));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> &ClassLetters {
        &self.lo
    }

    pub fn hi(&self) -> &ClassLetters {
        &self.hi
    }

    pub fn contains_class(&self, class: &ClassLetters) -> bool {
        *class >= self.lo && (*class <= self.hi || class.starts_with(&self.hi))
    }

    pub fn contains(&self, call_number: &CallNumber) -> bool {
        self.contains_class(&call_number.class)
    }

    /// Half-open `[start, end)` bounds on [`SortKey`] bytes covering exactly
    /// the call numbers in this range.
    pub fn key_bounds(&self) -> (Vec<u8>, Vec<u8>) {
        let start = self.lo.as_str().as_bytes().to_vec();
        let mut end = self.hi.as_str().as_bytes().to_vec();
        // Class letters are A-Z, so bumping the last byte cannot overflow.
        *end.last_mut().expect("class letters are non-empty") += 1;
        (start, end)
    }
}

impl fmt::Display for CallNumberRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{} - {}", self.lo, self.hi)
        }
    }
}

/// Membership of `call_number` in `range`.
pub fn in_range(call_number: &CallNumber, range: &CallNumberRange) -> bool {
    range.contains(call_number)
}

/// Non-empty list of ranges as saved in a current-awareness profile.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<CallNumberRange>", into = "Vec<CallNumberRange>")]
pub struct RangeList(Vec<CallNumberRange>);

impl RangeList {
    /// Parses `lo - hi` pairs separated by commas; a lone class `x` means
    /// `x - x`.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        if text.trim().is_empty() {
            return Err(ParseError::at(0, ParseErrorKind::Empty));
        }
        let mut ranges = Vec::new();
        let mut offset = 0;
        for item in text.split(',') {
            ranges.push(parse_range_item(item, offset)?);
            offset += item.len() + 1;
        }
        Ok(Self(ranges))
    }

    pub fn ranges(&self) -> &[CallNumberRange] {
        &self.0
    }

    pub fn contains(&self, call_number: &CallNumber) -> bool {
        self.0.iter().any(|r| r.contains(call_number))
    }
}

impl TryFrom<Vec<CallNumberRange>> for RangeList {
    type Error = ParseError;

    fn try_from(ranges: Vec<CallNumberRange>) -> Result<Self, Self::Error> {
        if ranges.is_empty() {
            return Err(ParseError::at(0, ParseErrorKind::Empty));
        }
        Ok(Self(ranges))
    }
}

impl From<RangeList> for Vec<CallNumberRange> {
    fn from(list: RangeList) -> Self {
        list.0
    }
}

impl fmt::Display for RangeList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, range) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{range}")?;
        }
        Ok(())
    }
}

impl FromStr for RangeList {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

fn parse_range_item(item: &str, offset: usize) -> Result<CallNumberRange, ParseError> {
    let malformed = |at: usize| ParseError::at(offset + at, ParseErrorKind::MalformedRange);
    let side = |part: &str, at: usize| {
        let lead = part.len() - part.trim_start().len();
        ClassLetters::new(part.trim()).map_err(|_| malformed(at + lead))
    };

    if item.trim().is_empty() {
        return Err(malformed(0));
    }
    let (lo, hi) = match item.split_once('-') {
        None => {
            let class = side(item, 0)?;
            (class.clone(), class)
        }
        Some((lo, hi)) => {
            if hi.contains('-') {
                return Err(malformed(lo.len() + 1 + hi.find('-').unwrap_or(0)));
            }
            (side(lo, 0)?, side(hi, lo.len() + 1)?)
        }
    };
    CallNumberRange::new(lo, hi).map_err(|_| {
        let lead = item.len() - item.trim_start().len();
        ParseError::at(offset + lead, ParseErrorKind::InvertedRange)
    })
}
