//! Unicode KD normalization of all strings entering the matcher.
//!
//! Both the XML text and the extracted page text are normalized to NFKD so
//! that compatibility characters (ligatures, full-width forms, superscripts)
//! compare equal, then whitespace is canonicalized: any run of Unicode
//! whitespace becomes a single ASCII space and the ends are trimmed.

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

/// A string guaranteed to be a fixed point of [`normalize_kd`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NormString(String);

impl NormString {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Length in characters, the unit the match budget is expressed in.
    pub fn char_len(&self) -> usize {
        self.0.chars().count()
    }
}

impl Deref for NormString {
    type Target = str;

    fn deref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NormString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<&str> for NormString {
    fn from(s: &str) -> Self {
        normalize_kd(s)
    }
}

/// NFKD transform followed by whitespace canonicalization.
pub fn normalize_kd(s: &str) -> NormString {
    let decomposed: String = s.nfkd().collect();
    let mut out = String::with_capacity(decomposed.len());
    let mut pending_space = false;
    for c in decomposed.chars() {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
        } else {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.push(c);
        }
    }
    NormString(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ascii_is_untouched() {
        assert_eq!(normalize_kd("Table 1").as_str(), "Table 1");
    }

    #[test]
    fn ligature_decomposes() {
        assert_eq!(normalize_kd("\u{FB01}gure").as_str(), "figure");
    }

    #[test]
    fn nbsp_collapses_with_neighbors() {
        assert_eq!(normalize_kd("a\u{00A0} b").as_str(), "a b");
    }

    #[test]
    fn trims_both_ends() {
        assert_eq!(normalize_kd("  x  y\t\n").as_str(), "x y");
    }

    #[test]
    fn case_preserved() {
        assert_eq!(normalize_kd("Abstract").as_str(), "Abstract");
    }

    proptest! {
        #[test]
        fn idempotent(s in "\\PC*") {
            let once = normalize_kd(&s);
            let twice = normalize_kd(once.as_str());
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn no_double_spaces_or_edge_whitespace(s in "\\PC*") {
            let n = normalize_kd(&s);
            prop_assert!(!n.as_str().contains("  "));
            prop_assert!(n.as_str().trim() == n.as_str());
        }
    }
}
