//! Failure-less parallel scan.
//!
//! Every text position starts its own walk from the root and stops at the
//! first missing transition. Positions are handed out to workers in
//! contiguous chunks; since each walk is independent, a pattern straddling a
//! chunk boundary is found by the walk that starts before the boundary.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::thread;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::prefix;
use crate::trie::Trie;

/// One occurrence: `text[start..start + length]` is pattern `pattern_id`.
/// Ordering is by `(start, length, pattern_id)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct MatchResult {
    pub start: usize,
    pub length: usize,
    pub pattern_id: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ScanConfig {
    pub workers: usize,
    /// Starting positions per work unit.
    pub chunk: usize,
}

impl ScanConfig {
    pub const DEFAULT_CHUNK: usize = 4096;

    pub fn new(workers: usize, chunk: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::InvalidParameter("workers must be at least 1".into()));
        }
        if chunk == 0 {
            return Err(Error::InvalidParameter("chunk must be at least 1".into()));
        }
        Ok(Self { workers, chunk })
    }

    pub fn single_threaded() -> Self {
        Self {
            workers: 1,
            chunk: Self::DEFAULT_CHUNK,
        }
    }
}

impl Default for ScanConfig {
    fn default() -> Self {
        let workers = thread::available_parallelism().map_or(1, |n| n.get());
        Self {
            workers,
            chunk: Self::DEFAULT_CHUNK,
        }
    }
}

/// Walks from the root along `text[start..]`, calling `on_terminal` with the
/// depth of every terminal node crossed.
#[inline]
pub(crate) fn walk(trie: &Trie, text: &[u8], start: usize, mut on_terminal: impl FnMut(usize)) {
    let mut node = 0usize;
    for (i, &byte) in text[start..].iter().enumerate() {
        match trie.transition(node, byte) {
            Some(next) => {
                node = next;
                if trie.is_terminal(node) {
                    on_terminal(i + 1);
                }
            }
            None => break,
        }
    }
}

#[inline]
fn scan_from_into(trie: &Trie, text: &[u8], start: usize, out: &mut Vec<MatchResult>) {
    match trie.prefix_index() {
        Some(index) => walk(trie, text, start, |depth| {
            prefix::verify_prefix(trie.dictionary(), index, text, start, depth, out);
        }),
        None => walk(trie, text, start, |depth| {
            let id = trie.dictionary().id_of(&text[start..start + depth]);
            debug_assert!(id.is_some(), "terminal path is not a pattern");
            if let Some(pattern_id) = id {
                out.push(MatchResult {
                    start,
                    length: depth,
                    pattern_id,
                });
            }
        }),
    }
}

/// All matches whose walk starts at `start`, shortest first.
pub fn scan_from(trie: &Trie, text: &[u8], start: usize) -> Vec<MatchResult> {
    let mut out = Vec::new();
    if start < text.len() {
        scan_from_into(trie, text, start, &mut out);
    }
    out
}

#[derive(Clone, Debug)]
pub struct ScanOutcome {
    pub matches: Vec<MatchResult>,
    /// Wall time until every worker finished its walks.
    pub scan_seconds: f64,
    /// Wall time spent concatenating per-chunk buffers.
    pub merge_seconds: f64,
}

pub fn scan_timed(trie: &Trie, text: &[u8], config: &ScanConfig) -> ScanOutcome {
    let chunk = config.chunk.max(1);
    let chunks = text.len().div_ceil(chunk);
    let workers = config.workers.max(1).min(chunks.max(1));
    let started = Instant::now();
    if workers == 1 {
        let mut matches = Vec::new();
        for start in 0..text.len() {
            scan_from_into(trie, text, start, &mut matches);
        }
        return ScanOutcome {
            matches,
            scan_seconds: started.elapsed().as_secs_f64(),
            merge_seconds: 0.0,
        };
    }
    let next = AtomicUsize::new(0);
    let mut parts: Vec<(usize, Vec<MatchResult>)> = thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                s.spawn(|| {
                    let mut local = Vec::new();
                    loop {
                        let c = next.fetch_add(1, Ordering::Relaxed);
                        if c >= chunks {
                            break;
                        }
                        let lo = c * chunk;
                        let hi = (lo + chunk).min(text.len());
                        let mut buf = Vec::new();
                        for start in lo..hi {
                            scan_from_into(trie, text, start, &mut buf);
                        }
                        if !buf.is_empty() {
                            local.push((c, buf));
                        }
                    }
                    local
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("scan worker panicked"))
            .collect()
    });
    let scan_seconds = started.elapsed().as_secs_f64();
    let merge_started = Instant::now();
    parts.sort_unstable_by_key(|(c, _)| *c);
    let total = parts.iter().map(|(_, b)| b.len()).sum();
    let mut matches = Vec::with_capacity(total);
    for (_, buf) in parts {
        matches.extend(buf);
    }
    debug_assert!(matches.windows(2).all(|w| w[0] < w[1]));
    ScanOutcome {
        matches,
        scan_seconds,
        merge_seconds: merge_started.elapsed().as_secs_f64(),
    }
}

/// Every match in `text`, sorted by `(start, length, pattern_id)`. The result
/// does not depend on `config`.
pub fn scan(trie: &Trie, text: &[u8], config: &ScanConfig) -> Vec<MatchResult> {
    scan_timed(trie, text, config).matches
}

/// Scan with a depth-truncated trie; candidate hits are verified against the
/// full patterns.
pub fn scan_two_stage(prefix_trie: &Trie, text: &[u8], config: &ScanConfig) -> Result<Vec<MatchResult>> {
    if prefix_trie.depth_limit().is_none() || prefix_trie.prefix_index().is_none() {
        return Err(Error::NotTruncated);
    }
    Ok(scan(prefix_trie, text, config))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use crate::compression::compress;

    fn ascii() -> Alphabet {
        Alphabet::bytes()
    }

    #[test]
    fn direct_walk() {
        let t = Trie::build(&["AB"], &ascii()).unwrap();
        assert_eq!(
            scan_from(&t, b"XABY", 1),
            vec![MatchResult {
                start: 1,
                length: 2,
                pattern_id: 0
            }]
        );
        assert!(scan_from(&t, b"XABY", 0).is_empty());
        assert!(scan_from(&t, b"XABY", 9).is_empty());
    }

    #[test]
    fn early_termination_after_one_step() {
        let t = Trie::build(&["AB", "CD"], &ascii()).unwrap();
        let mut steps = 0;
        let text = b"ZZZZ";
        let mut node = 0;
        for &b in text {
            steps += 1;
            match t.transition(node, b) {
                Some(n) => node = n,
                None => break,
            }
        }
        assert_eq!(steps, 1);
        assert!(scan_from(&t, text, 0).is_empty());
    }

    #[test]
    fn nested_terminals_both_reported() {
        let t = Trie::build(&["AB", "ABC"], &ascii()).unwrap();
        assert_eq!(
            scan_from(&t, b"ABC", 0),
            vec![
                MatchResult {
                    start: 0,
                    length: 2,
                    pattern_id: 0
                },
                MatchResult {
                    start: 0,
                    length: 3,
                    pattern_id: 1
                },
            ]
        );
    }

    #[test]
    fn overlapping_and_sorted() {
        let t = Trie::build(&["he", "she", "his", "hers"], &ascii()).unwrap();
        let m = scan(&t, b"ushers", &ScanConfig::single_threaded());
        let got: Vec<_> = m.iter().map(|r| (r.start, r.length, r.pattern_id)).collect();
        assert_eq!(got, vec![(1, 3, 1), (2, 2, 0), (2, 4, 3)]);
    }

    #[test]
    fn chunk_boundaries_do_not_lose_matches() {
        let t = Trie::build(&["ABCDE"], &ascii()).unwrap();
        let mut text = vec![b'z'; 64];
        for at in [6, 14, 29] {
            text[at..at + 5].copy_from_slice(b"ABCDE");
        }
        let single = scan(&t, &text, &ScanConfig::single_threaded());
        assert_eq!(single.len(), 3);
        for chunk in 1..12 {
            for workers in [2, 3, 5] {
                let cfg = ScanConfig::new(workers, chunk).unwrap();
                assert_eq!(scan(&t, &text, &cfg), single, "chunk {chunk} workers {workers}");
            }
        }
    }

    #[test]
    fn compressed_trie_reports_same_matches() {
        let pats = ["ABCXYZ", "DEFXYZ", "XY", "GOOGLE", "PEOPLE"];
        let t = Trie::build(&pats, &ascii()).unwrap();
        let (c, _) = compress(&t).unwrap();
        let text = b"..ABCXYZ DEFXYZGOOGLEPEOPLE GOOPLE XYZ";
        let cfg = ScanConfig::single_threaded();
        assert_eq!(scan(&t, text, &cfg), scan(&c, text, &cfg));
    }

    #[test]
    fn empty_hits() {
        let t = Trie::build(&["AB"], &ascii()).unwrap();
        assert!(scan(&t, b"zzzzzz", &ScanConfig::default()).is_empty());
        assert!(scan(&t, b"", &ScanConfig::default()).is_empty());
    }

    #[test]
    fn config_validation() {
        assert!(ScanConfig::new(0, 10).is_err());
        assert!(ScanConfig::new(1, 0).is_err());
        assert!(ScanConfig::default().workers >= 1);
    }

    #[test]
    fn two_stage_requires_truncated_trie() {
        let t = Trie::build(&["AB"], &ascii()).unwrap();
        assert!(matches!(
            scan_two_stage(&t, b"AB", &ScanConfig::single_threaded()),
            Err(Error::NotTruncated)
        ));
    }
}
