//! Multi-pattern matching with a bitmapped, memory-compressed, failure-less
//! Aho-Corasick trie.
//!
//! The trie lives in one contiguous node array. A node is a child bitmap plus
//! the index of its first child; the child for a symbol is found by counting
//! the set bits below it. Scanning starts an independent root walk at every
//! text position, so the work splits across threads without overlap between
//! chunks.
//!
//! ```
//! use hepfac::{scan, Alphabet, ScanConfig, Trie};
//!
//! let trie = Trie::build(&["he", "she", "hers"], &Alphabet::bytes()).unwrap();
//! let hits = scan(&trie, b"ushers", &ScanConfig::single_threaded());
//! let found: Vec<_> = hits.iter().map(|m| (m.start, m.length, m.pattern_id)).collect();
//! assert_eq!(found, vec![(1, 3, 1), (2, 2, 0), (2, 4, 2)]);
//! ```

pub mod alphabet;
pub mod bench;
pub mod compression;
pub mod corpus;
pub mod engine;
mod error;
mod layout;
pub mod mt;
pub mod patterns;
pub mod prefix;
pub mod serial;
pub mod trie;

pub use alphabet::Alphabet;
pub use compression::{
    compress, expected_reduced_length_formula, expected_reduced_length_oracle, expected_suffix_space,
    merge_final_nodes, merge_tail_chains, CompressionStats, EstimateMethod, ReductionEstimate,
};
pub use corpus::{dataset_digest, gen_corpus, gen_patterns};
pub use engine::{scan, scan_from, scan_two_stage, MatchResult, ScanConfig};
pub use error::{Error, Result};
pub use mt::Mt19937;
pub use patterns::{Dictionary, PatternSet};
pub use prefix::{
    analyze_prefix_vs_alphabet, false_positive_rate, minimal_unique_prefix, truncate, verify_candidate, PrefixAnalysis,
    Truncation,
};
pub use trie::{bitmap_rank, MemoryReport, Stage, Trie, TrieNode};
