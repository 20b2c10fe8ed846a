use serde::{Deserialize, Serialize};

/// Half-open byte range `[start, end)` into a UTF-8 string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    /// Returns the slice of `text` covered by this span, or `None` when the
    /// span is out of bounds or does not fall on character boundaries.
    pub fn slice<'a>(&self, text: &'a str) -> Option<&'a str> {
        text.get(self.start..self.end)
    }
}

/// Checks that `spans` are ordered, non-overlapping, non-empty and lie on
/// character boundaries of `text`.
pub(crate) fn spans_well_formed(text: &str, spans: &[Span]) -> bool {
    let mut cursor = 0;
    for span in spans {
        if span.start < cursor || span.is_empty() || span.slice(text).is_none() {
            return false;
        }
        cursor = span.end;
    }
    true
}
