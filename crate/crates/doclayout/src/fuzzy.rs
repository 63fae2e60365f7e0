//! Bounded approximate substring search under Levenshtein distance.
//!
//! The matcher looks for the closest occurrence of a target string inside a
//! source string. The allowed distance adapts to the target length: 20% of
//! the length for short targets, 15% up to 40 characters, 10% beyond that,
//! floored to an integer.

use crate::error::{Error, Result};
use crate::textnorm::NormString;

/// Distance budget for one fuzzy query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchBudget {
    pub target_len: usize,
    pub d_max: usize,
}

impl MatchBudget {
    pub fn for_len(target_len: usize) -> Self {
        MatchBudget {
            target_len,
            d_max: max_distance(target_len),
        }
    }
}

/// A located approximate occurrence: `source[start..end]` (character
/// offsets, half-open) is within `dist` edits of the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpanMatch {
    pub start: usize,
    pub end: usize,
    pub dist: usize,
}

/// Adaptive distance budget, piecewise in target length and floored.
pub fn max_distance(target_len: usize) -> usize {
    let l = target_len as f64;
    let d = if target_len <= 20 {
        0.2 * l
    } else if target_len <= 40 {
        0.15 * l
    } else {
        0.1 * l
    };
    d.floor() as usize
}

/// Unit-cost edit distance between two strings, over characters.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, &ca) in a.iter().enumerate() {
        let mut prev = row[0];
        row[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev + usize::from(ca != cb);
            prev = row[j + 1];
            row[j + 1] = sub.min(prev + 1).min(row[j] + 1);
        }
    }
    row[b.len()]
}

/// Finds the minimum-distance occurrence of `target` inside `source`, if
/// any substring comes within `budget.d_max` edits.
///
/// Ties are broken by the smallest start offset, then the smallest end
/// offset. Runs in O(|source| * |target|) using three passes of the
/// free-endpoint DP.
pub fn find_near_match(
    target: &NormString,
    source: &NormString,
    budget: MatchBudget,
) -> Option<SpanMatch> {
    let t: Vec<char> = target.chars().collect();
    let s: Vec<char> = source.chars().collect();
    if t.is_empty() {
        return Some(SpanMatch { start: 0, end: 0, dist: 0 });
    }

    // pass 1: best distance over all substrings (free start and end)
    let best = free_end_min(&t, &s);
    if best > budget.d_max {
        return None;
    }

    // pass 2: smallest start achieving the optimum. Matching target in
    // reversed source with a free start is matching a suffix-anchored span;
    // column j of the reversed problem corresponds to start s.len()-j.
    let t_rev: Vec<char> = t.iter().rev().copied().collect();
    let s_rev: Vec<char> = s.iter().rev().copied().collect();
    let from_start = free_end_profile(&t_rev, &s_rev);
    let start = (0..=s.len())
        .find(|&i| from_start[s.len() - i] == best)
        .expect("pass 1 found a match");

    // pass 3: smallest end from that start
    let anchored = free_end_profile_anchored(&t, &s[start..]);
    let end_off = (0..=s.len() - start)
        .find(|&j| anchored[j] == best)
        .expect("start was chosen to achieve best");

    Some(SpanMatch { start, end: start + end_off, dist: best })
}

/// dp over `s` with free start and free end: minimum distance of `t` to
/// any substring of `s`.
fn free_end_min(t: &[char], s: &[char]) -> usize {
    *free_end_profile(t, s).iter().min().unwrap()
}

/// Final DP row with a free start: entry `j` is the minimum distance of
/// `t` to any substring of `s` ending at `j`.
fn free_end_profile(t: &[char], s: &[char]) -> Vec<usize> {
    let mut row: Vec<usize> = vec![0; s.len() + 1];
    fill_rows(t, s, &mut row);
    row
}

/// Same, but the substring must start at position 0 of `s`.
fn free_end_profile_anchored(t: &[char], s: &[char]) -> Vec<usize> {
    let mut row: Vec<usize> = (0..=s.len()).collect();
    fill_rows(t, s, &mut row);
    row
}

fn fill_rows(t: &[char], s: &[char], row: &mut [usize]) {
    for (i, &tc) in t.iter().enumerate() {
        let mut prev = row[0];
        row[0] = i + 1;
        for (j, &sc) in s.iter().enumerate() {
            let sub = prev + usize::from(tc != sc);
            prev = row[j + 1];
            row[j + 1] = sub.min(prev + 1).min(row[j] + 1);
        }
    }
}

/// Convenience wrapper: budget derived from the target's own length.
pub fn find_adaptive(target: &NormString, source: &NormString) -> Option<SpanMatch> {
    find_near_match(target, source, MatchBudget::for_len(target.char_len()))
}

/// Rejects negative lengths at the API boundary of untrusted callers.
pub fn max_distance_checked(target_len: i64) -> Result<usize> {
    if target_len < 0 {
        return Err(Error::Validation(format!(
            "negative target length {target_len}"
        )));
    }
    Ok(max_distance(target_len as usize))
}
