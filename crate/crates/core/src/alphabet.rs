//! Byte to symbol-index mapping.

use crate::error::{Error, Result};

const UNMAPPED: u16 = u16::MAX;

const LETTERS: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";

/// An ordered set of `size` distinct bytes. The i-th byte maps to symbol index `i`.
#[derive(Clone, PartialEq, Eq)]
pub struct Alphabet {
    to_symbol: [u16; 256],
    from_symbol: Vec<u8>,
}

impl std::fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Alphabet")
            .field("size", &self.size())
            .field("symbols", &String::from_utf8_lossy(&self.from_symbol))
            .finish()
    }
}

impl Alphabet {
    pub fn new(symbols: &[u8]) -> Result<Self> {
        if !(2..=256).contains(&symbols.len()) {
            return Err(Error::AlphabetSize(symbols.len()));
        }
        let mut to_symbol = [UNMAPPED; 256];
        for (i, &b) in symbols.iter().enumerate() {
            if to_symbol[b as usize] != UNMAPPED {
                return Err(Error::DuplicateSymbol(b));
            }
            to_symbol[b as usize] = i as u16;
        }
        Ok(Self {
            to_symbol,
            from_symbol: symbols.to_vec(),
        })
    }

    /// The alphabet used by generated data sets of size `sigma`.
    ///
    /// `4` is `ACGT`; up to 52 takes a prefix of `a..z A..Z`; larger sizes
    /// append digits and then the remaining byte values in ascending order.
    /// `256` is the full byte range in letter-first order.
    pub fn standard(sigma: usize) -> Result<Self> {
        if !(2..=256).contains(&sigma) {
            return Err(Error::AlphabetSize(sigma));
        }
        if sigma == 4 {
            return Self::new(b"ACGT");
        }
        let mut order: Vec<u8> = LETTERS.to_vec();
        order.extend(b'0'..=b'9');
        let mut seen = [false; 256];
        for &b in &order {
            seen[b as usize] = true;
        }
        order.extend((0..=255u8).filter(|&b| !seen[b as usize]));
        order.truncate(sigma);
        Self::new(&order)
    }

    /// Identity mapping over all 256 byte values.
    pub fn bytes() -> Self {
        let all: Vec<u8> = (0..=255).collect();
        Self::new(&all).expect("256 distinct bytes")
    }

    pub fn size(&self) -> usize {
        self.from_symbol.len()
    }

    #[inline]
    pub fn to_symbol(&self, byte: u8) -> Option<usize> {
        match self.to_symbol[byte as usize] {
            UNMAPPED => None,
            s => Some(s as usize),
        }
    }

    pub fn from_symbol(&self, symbol: usize) -> Option<u8> {
        self.from_symbol.get(symbol).copied()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.from_symbol
    }

    pub fn contains(&self, byte: u8) -> bool {
        self.to_symbol[byte as usize] != UNMAPPED
    }

    /// Number of 32-bit words in a child bitmap for this alphabet.
    pub fn words_per_bitmap(&self) -> usize {
        self.size().div_ceil(32)
    }

    pub(crate) fn encode(&self, bytes: &[u8]) -> Option<Vec<u16>> {
        bytes
            .iter()
            .map(|&b| match self.to_symbol[b as usize] {
                UNMAPPED => None,
                s => Some(s),
            })
            .collect()
    }
}
