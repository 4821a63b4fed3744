//! Pattern sets and the pattern dictionary carried by every trie.

use std::collections::HashMap;

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::trie::Trie;

/// Duplicate-free list of nonempty patterns over one alphabet. Pattern ids
/// are positions in this list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternSet {
    patterns: Vec<Vec<u8>>,
    alphabet: Alphabet,
}

impl PatternSet {
    pub fn new(patterns: Vec<Vec<u8>>, alphabet: Alphabet) -> Result<Self> {
        validate(&patterns, &alphabet)?;
        Ok(Self { patterns, alphabet })
    }

    pub fn patterns(&self) -> &[Vec<u8>] {
        &self.patterns
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn into_patterns(self) -> Vec<Vec<u8>> {
        self.patterns
    }

    pub fn build_trie(&self) -> Result<Trie> {
        Trie::build(&self.patterns, &self.alphabet)
    }
}

pub(crate) fn validate<P: AsRef<[u8]>>(patterns: &[P], alphabet: &Alphabet) -> Result<()> {
    if patterns.is_empty() {
        return Err(Error::EmptyPatternSet);
    }
    let mut seen: HashMap<&[u8], usize> = HashMap::with_capacity(patterns.len());
    for (index, p) in patterns.iter().enumerate() {
        let p = p.as_ref();
        if p.is_empty() {
            return Err(Error::EmptyPattern(index));
        }
        if p.len() > u16::MAX as usize {
            return Err(Error::PatternTooLong { index, len: p.len() });
        }
        if let Some(&byte) = p.iter().find(|&&b| !alphabet.contains(b)) {
            return Err(Error::ByteOutsideAlphabet { index, byte });
        }
        if let Some(&first) = seen.get(p) {
            return Err(Error::DuplicatePattern { index, first });
        }
        seen.insert(p, index);
    }
    Ok(())
}

/// Pattern bytes by id, plus the reverse lookup used to name a match from the
/// matched text.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Dictionary {
    patterns: Vec<Vec<u8>>,
    ids: HashMap<Vec<u8>, u32>,
}

impl Dictionary {
    pub(crate) fn new(patterns: Vec<Vec<u8>>) -> Self {
        let ids = patterns
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i as u32))
            .collect();
        Self { patterns, ids }
    }

    #[inline]
    pub fn id_of(&self, pattern: &[u8]) -> Option<u32> {
        self.ids.get(pattern).copied()
    }

    pub fn pattern(&self, id: u32) -> Option<&[u8]> {
        self.patterns.get(id as usize).map(Vec::as_slice)
    }

    pub fn patterns(&self) -> &[Vec<u8>] {
        &self.patterns
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn max_len(&self) -> usize {
        self.patterns.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn min_len(&self) -> usize {
        self.patterns.iter().map(Vec::len).min().unwrap_or(0)
    }
}
