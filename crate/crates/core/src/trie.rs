//! The bitmapped, contiguous-memory, failure-less trie.
//!
//! Every node is a child bitmap of `ceil(Σ/32)` 32-bit words plus one 32-bit
//! link word. The low 31 bits of the link hold the index of the node's first
//! child (0 for a childless node) and the top bit marks a terminal node.
//! Children of a node sit in consecutive slots ordered by symbol, so the
//! child for symbol `s` is `offset + rank(bitmap, s)` where `rank` counts the
//! set bits below `s`.
//!
//! Compressed tries end with one shared terminal node. A node whose children
//! were all childless terminals points its offset at that shared node, and a
//! transition whose offset lands on the last slot returns the slot itself.
//! In a plain breadth-first trie the only block reaching the last slot has a
//! single child, so the rule is the same lookup there.

use serde::Serialize;

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::patterns::{self, Dictionary};
use crate::prefix::PrefixIndex;

pub(crate) const TERMINAL: u32 = 1 << 31;
const OFFSET_MASK: u32 = !TERMINAL;

/// Largest node count representable once the terminal flag takes the top
/// bit of the link word.
pub const MAX_NODES: usize = (1 << 31) - 1;

/// Which compression stages have been applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Uncompressed,
    /// Childless terminal nodes merged into one shared terminal.
    FinalMerged,
    /// Identical unary tail chains merged on top of `FinalMerged`.
    TailMerged,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Uncompressed => "an uncompressed trie",
            Stage::FinalMerged => "a final-node-merged trie",
            Stage::TailMerged => "a tail-merged trie",
        }
    }
}

/// Read-only view of one node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrieNode<'a> {
    pub bitmap: &'a [u32],
    pub offset: u32,
    pub terminal: bool,
}

impl TrieNode<'_> {
    pub fn child_count(&self) -> u32 {
        self.bitmap.iter().map(|w| w.count_ones()).sum()
    }

    pub fn has_child(&self, symbol: usize) -> bool {
        self.bitmap
            .get(symbol >> 5)
            .is_some_and(|w| (w >> (symbol & 31)) & 1 == 1)
    }
}

/// Number of set bits strictly below `symbol`.
pub fn bitmap_rank(bitmap: &[u32], symbol: usize) -> Result<usize> {
    let width = bitmap.len() * 32;
    if symbol >= width {
        return Err(Error::SymbolOutOfRange { symbol, width });
    }
    Ok(rank(bitmap, symbol))
}

#[inline]
pub(crate) fn rank(bitmap: &[u32], symbol: usize) -> usize {
    let word = symbol >> 5;
    let below = bitmap[..word].iter().map(|w| w.count_ones() as usize).sum::<usize>();
    below + (bitmap[word] & ((1u32 << (symbol & 31)) - 1)).count_ones() as usize
}

/// Bytes per node: the bitmap words plus the link word.
pub fn bytes_per_node(sigma: usize) -> usize {
    4 * sigma.div_ceil(32) + 4
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MemoryReport {
    pub node_count: usize,
    pub bytes_per_node: usize,
    pub total_bytes: usize,
    pub sigma: usize,
}

impl MemoryReport {
    pub fn new(node_count: usize, sigma: usize) -> Self {
        let bytes_per_node = bytes_per_node(sigma);
        Self {
            node_count,
            bytes_per_node,
            total_bytes: node_count * bytes_per_node,
            sigma,
        }
    }

    pub fn mib(&self) -> f64 {
        self.total_bytes as f64 / (1u64 << 20) as f64
    }

    /// Total in MiB, truncated (not rounded) to one decimal.
    pub fn mib_display(&self) -> String {
        let tenths = (self.total_bytes as u128 * 10) >> 20;
        format!("{}.{}", tenths / 10, tenths % 10)
    }
}

#[derive(Clone, Debug)]
pub struct Trie {
    pub(crate) alphabet: Alphabet,
    pub(crate) words: usize,
    pub(crate) bitmaps: Vec<u32>,
    pub(crate) links: Vec<u32>,
    pub(crate) dictionary: Dictionary,
    pub(crate) depth_limit: Option<usize>,
    pub(crate) stage: Stage,
    pub(crate) prefix_index: Option<PrefixIndex>,
    pub(crate) uncompressed_nodes: usize,
}

impl Trie {
    /// Builds the breadth-first trie. Pattern ids follow input order.
    pub fn build<P: AsRef<[u8]>>(patterns: &[P], alphabet: &Alphabet) -> Result<Self> {
        patterns::validate(patterns, alphabet)?;
        let owned: Vec<Vec<u8>> = patterns.iter().map(|p| p.as_ref().to_vec()).collect();
        let keys = sorted_keys(&owned, alphabet, usize::MAX);
        let (bitmaps, links) = build_arrays(&keys, alphabet.words_per_bitmap())?;
        let nodes = links.len();
        Ok(Self {
            alphabet: alphabet.clone(),
            words: alphabet.words_per_bitmap(),
            bitmaps,
            links,
            dictionary: Dictionary::new(owned),
            depth_limit: None,
            stage: Stage::Uncompressed,
            prefix_index: None,
            uncompressed_nodes: nodes,
        })
    }

    pub fn node_count(&self) -> usize {
        self.links.len()
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dictionary
    }

    pub fn depth_limit(&self) -> Option<usize> {
        self.depth_limit
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn words_per_bitmap(&self) -> usize {
        self.words
    }

    /// Node count of the trie this one was derived from, before any compression.
    pub fn uncompressed_node_count(&self) -> usize {
        self.uncompressed_nodes
    }

    pub fn node(&self, index: usize) -> TrieNode<'_> {
        let link = self.links[index];
        TrieNode {
            bitmap: self.bitmap(index),
            offset: link & OFFSET_MASK,
            terminal: link & TERMINAL != 0,
        }
    }

    #[inline]
    pub(crate) fn bitmap(&self, index: usize) -> &[u32] {
        &self.bitmaps[index * self.words..(index + 1) * self.words]
    }

    #[inline]
    pub(crate) fn is_terminal(&self, index: usize) -> bool {
        self.links[index] & TERMINAL != 0
    }

    /// Follows the edge labelled `byte`, or `None` when there is no such
    /// child or the byte is outside the alphabet.
    #[inline]
    pub fn transition(&self, node: usize, byte: u8) -> Option<usize> {
        let symbol = self.alphabet.to_symbol(byte)?;
        self.step(node, symbol)
    }

    /// Same as [`Trie::transition`] but takes a symbol index.
    #[inline]
    pub fn step(&self, node: usize, symbol: usize) -> Option<usize> {
        let bitmap = self.bitmap(node);
        if (bitmap[symbol >> 5] >> (symbol & 31)) & 1 == 0 {
            return None;
        }
        let offset = (self.links[node] & OFFSET_MASK) as usize;
        if offset + 1 == self.links.len() {
            return Some(offset);
        }
        Some(offset + rank(bitmap, symbol))
    }

    /// `(symbol, child)` pairs of a node in ascending symbol order.
    pub fn children(&self, node: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let bitmap = self.bitmap(node);
        (0..self.alphabet.size())
            .filter(move |&s| (bitmap[s >> 5] >> (s & 31)) & 1 == 1)
            .map(move |s| (s, self.step(node, s).expect("bit is set")))
    }

    /// Node reached by walking `bytes` from the root.
    pub fn walk(&self, bytes: &[u8]) -> Option<usize> {
        bytes.iter().try_fold(0usize, |node, &b| self.transition(node, b))
    }

    /// Whether `bytes` spells a root-to-terminal path.
    pub fn accepts(&self, bytes: &[u8]) -> bool {
        self.walk(bytes).is_some_and(|n| self.is_terminal(n))
    }

    pub fn memory_report(&self) -> MemoryReport {
        MemoryReport::new(self.node_count(), self.alphabet.size())
    }

    pub fn prefix_index(&self) -> Option<&PrefixIndex> {
        self.prefix_index.as_ref()
    }
}

/// Patterns as symbol strings truncated to `limit`, sorted by symbol order,
/// deduplicated.
pub(crate) fn sorted_keys(patterns: &[Vec<u8>], alphabet: &Alphabet, limit: usize) -> Vec<Vec<u16>> {
    let mut keys: Vec<Vec<u16>> = patterns
        .iter()
        .map(|p| {
            let p = &p[..p.len().min(limit)];
            alphabet.encode(p).expect("validated pattern")
        })
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys
}

/// Breadth-first construction over sorted keys. Each queued node is the range
/// of keys sharing its prefix; children are the runs of equal symbols at the
/// next position.
pub(crate) fn build_arrays(keys: &[Vec<u16>], words: usize) -> Result<(Vec<u32>, Vec<u32>)> {
    let mut ranges: Vec<(u32, u32, u32)> = vec![(0, keys.len() as u32, 0)];
    let mut bitmaps: Vec<u32> = Vec::new();
    let mut links: Vec<u32> = Vec::new();
    let mut i = 0;
    while i < ranges.len() {
        let (lo, hi, depth) = ranges[i];
        let (lo, hi, depth) = (lo as usize, hi as usize, depth as usize);
        let base = bitmaps.len();
        bitmaps.resize(base + words, 0);
        let mut link = 0u32;
        let mut j = lo;
        // A key ending here sorts first within its range.
        if j < hi && keys[j].len() == depth {
            link |= TERMINAL;
            j += 1;
        }
        let first_child = ranges.len();
        while j < hi {
            let symbol = keys[j][depth];
            let mut k = j + 1;
            while k < hi && keys[k][depth] == symbol {
                k += 1;
            }
            bitmaps[base + (symbol as usize >> 5)] |= 1 << (symbol & 31);
            ranges.push((j as u32, k as u32, depth as u32 + 1));
            j = k;
        }
        if ranges.len() > MAX_NODES {
            return Err(Error::TooManyNodes { max: MAX_NODES });
        }
        if ranges.len() > first_child {
            link |= first_child as u32;
        }
        links.push(link);
        i += 1;
    }
    Ok((bitmaps, links))
}
