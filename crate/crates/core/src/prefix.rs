//! Prefix-truncated matching and prefix-length analysis.
//!
//! A truncated trie keeps only the first `depth` levels. Its terminals mark
//! candidate starts; each candidate is confirmed by comparing the full bytes
//! of the patterns that share the walked prefix.

use std::collections::HashMap;

use serde::Serialize;

use crate::compression::merge_final_nodes;
use crate::corpus;
use crate::engine::{self, MatchResult};
use crate::error::{Error, Result};
use crate::patterns::{Dictionary, PatternSet};
use crate::trie::{build_arrays, sorted_keys, Stage, Trie};

/// Pattern ids bucketed by their first `depth` bytes (whole pattern when
/// shorter), shortest pattern first within a bucket.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PrefixIndex {
    depth: usize,
    buckets: HashMap<Vec<u8>, Vec<u32>>,
}

impl PrefixIndex {
    pub(crate) fn new(dictionary: &Dictionary, depth: usize) -> Self {
        let mut buckets: HashMap<Vec<u8>, Vec<u32>> = HashMap::new();
        for (id, p) in dictionary.patterns().iter().enumerate() {
            let key = p[..p.len().min(depth)].to_vec();
            buckets.entry(key).or_default().push(id as u32);
        }
        for ids in buckets.values_mut() {
            ids.sort_by_key(|&id| dictionary.patterns()[id as usize].len());
        }
        Self { depth, buckets }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn candidates(&self, prefix: &[u8]) -> &[u32] {
        self.buckets.get(prefix).map_or(&[], Vec::as_slice)
    }
}

/// Confirms the patterns bucketed under `text[start..start + prefix_len]`.
/// Returns how many matched.
#[inline]
pub(crate) fn verify_prefix(
    dictionary: &Dictionary,
    index: &PrefixIndex,
    text: &[u8],
    start: usize,
    prefix_len: usize,
    out: &mut Vec<MatchResult>,
) -> usize {
    let rest = &text[start..];
    let mut found = 0;
    for &id in index.candidates(&rest[..prefix_len]) {
        let pattern = dictionary.patterns()[id as usize].as_slice();
        if rest.starts_with(pattern) {
            out.push(MatchResult {
                start,
                length: pattern.len(),
                pattern_id: id,
            });
            found += 1;
        }
    }
    found
}

/// Exact matches at a candidate start of a truncated trie.
pub fn verify_candidate(trie: &Trie, text: &[u8], start: usize) -> Result<Vec<MatchResult>> {
    let index = trie.prefix_index().ok_or(Error::NotTruncated)?;
    let mut out = Vec::new();
    if start >= text.len() {
        return Ok(out);
    }
    let longest = index.depth().min(text.len() - start);
    for k in 1..=longest {
        verify_prefix(trie.dictionary(), index, text, start, k, &mut out);
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct Truncation {
    pub trie: Trie,
    /// False when `depth` reached the longest pattern and nothing was cut.
    pub applied: bool,
}

/// Drops every level below `depth`. Nodes left at `depth` become candidate
/// terminals. A final-node-merged input is merged again after truncation.
pub fn truncate(trie: &Trie, depth: usize) -> Result<Truncation> {
    if depth == 0 {
        return Err(Error::InvalidParameter("truncation depth must be at least 1".into()));
    }
    if trie.stage() == Stage::TailMerged {
        return Err(Error::WrongStage {
            expected: "an uncompressed or final-node-merged trie",
            found: trie.stage().name(),
        });
    }
    if depth >= trie.dictionary().max_len() {
        return Ok(Truncation {
            trie: trie.clone(),
            applied: false,
        });
    }
    let keys = sorted_keys(trie.dictionary().patterns(), trie.alphabet(), depth);
    let (bitmaps, links) = build_arrays(&keys, trie.words)?;
    let cut = Trie {
        alphabet: trie.alphabet.clone(),
        words: trie.words,
        uncompressed_nodes: links.len(),
        bitmaps,
        links,
        dictionary: trie.dictionary.clone(),
        depth_limit: Some(depth),
        stage: Stage::Uncompressed,
        prefix_index: Some(PrefixIndex::new(trie.dictionary(), depth)),
    };
    let cut = match trie.stage() {
        Stage::FinalMerged => merge_final_nodes(&cut)?.0,
        _ => cut,
    };
    Ok(Truncation {
        trie: cut,
        applied: true,
    })
}

/// Smallest `d` at which the length-`d` prefixes (whole pattern when
/// shorter) are pairwise distinct.
pub fn minimal_unique_prefix<P: AsRef<[u8]>>(patterns: &[P]) -> usize {
    let mut sorted: Vec<&[u8]> = patterns.iter().map(AsRef::as_ref).collect();
    sorted.sort_unstable();
    sorted
        .windows(2)
        .map(|w| w[0].iter().zip(w[1]).take_while(|(a, b)| a == b).count() + 1)
        .max()
        .unwrap_or(1)
}

/// Truncation depth used by the benchmark pipeline: 5 above 52 symbols,
/// otherwise the set's minimal unique prefix, capped at the shortest pattern.
pub fn choose_depth(dictionary: &Dictionary, sigma: usize) -> usize {
    let depth = if sigma > 52 {
        5
    } else {
        minimal_unique_prefix(dictionary.patterns())
    };
    depth.min(dictionary.min_len()).max(1)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrefixAnalysis {
    pub sigma: usize,
    pub pattern_count: usize,
    /// Smallest per-set value seen across trials.
    pub min_unique_depth: usize,
    pub max_unique_depth: usize,
    pub mean_depth_over_trials: f64,
    pub std_error: f64,
    pub trials: usize,
}

/// Mean minimal unique prefix of random pattern sets, per alphabet size.
/// Trial `t` draws its set with seed `seed + t` for every alphabet size.
pub fn analyze_prefix_vs_alphabet(
    sigma_list: &[usize],
    pattern_count: usize,
    pattern_length: usize,
    trials: usize,
    seed: u32,
) -> Result<Vec<PrefixAnalysis>> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    sigma_list
        .iter()
        .map(|&sigma| {
            let mut depths = Vec::with_capacity(trials);
            for t in 0..trials {
                let set = corpus::gen_patterns(seed.wrapping_add(t as u32), sigma, pattern_count, pattern_length)?;
                depths.push(minimal_unique_prefix(set.patterns()));
            }
            let n = trials as f64;
            let mean = depths.iter().sum::<usize>() as f64 / n;
            let var = if trials > 1 {
                depths.iter().map(|&d| (d as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            Ok(PrefixAnalysis {
                sigma,
                pattern_count,
                min_unique_depth: *depths.iter().min().expect("trials >= 1"),
                max_unique_depth: *depths.iter().max().expect("trials >= 1"),
                mean_depth_over_trials: mean,
                std_error: (var / n).sqrt(),
                trials,
            })
        })
        .collect()
}

/// CSV with columns `sigma,mean_depth,trials`.
pub fn analysis_csv(rows: &[PrefixAnalysis]) -> String {
    let mut out = String::from("sigma,mean_depth,trials\n");
    for r in rows {
        out.push_str(&format!("{},{:.4},{}\n", r.sigma, r.mean_depth_over_trials, r.trials));
    }
    out
}

/// Candidate counts from a truncated scan.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CandidateCounts {
    pub candidates: u64,
    pub false_candidates: u64,
    pub matches: u64,
}

/// Counts candidate hits of a truncated trie and how many fail verification.
pub fn count_candidates(prefix_trie: &Trie, text: &[u8]) -> Result<CandidateCounts> {
    let index = prefix_trie.prefix_index().ok_or(Error::NotTruncated)?;
    let dictionary = prefix_trie.dictionary();
    let mut counts = CandidateCounts::default();
    let mut scratch = Vec::new();
    for start in 0..text.len() {
        engine::walk(prefix_trie, text, start, |depth| {
            scratch.clear();
            let found = verify_prefix(dictionary, index, text, start, depth, &mut scratch);
            counts.candidates += 1;
            counts.matches += found as u64;
            if found == 0 {
                counts.false_candidates += 1;
            }
        });
    }
    Ok(counts)
}

/// Candidate hits at `depth` that fail full verification, per scanned byte.
pub fn false_positive_rate(patterns: &PatternSet, depth: usize, corpus: &[u8]) -> Result<f64> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let trie = patterns.build_trie()?;
    let cut = truncate(&trie, depth)?;
    if !cut.applied {
        return Ok(0.0);
    }
    let counts = count_candidates(&cut.trie, corpus)?;
    Ok(counts.false_candidates as f64 / corpus.len() as f64)
}
