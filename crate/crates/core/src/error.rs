use thiserror::Error;

/// Errors produced while building, transforming, loading, or scanning tries.
#[derive(Debug, Error)]
pub enum Error {
    #[error("alphabet size {0} is outside 2..=256")]
    AlphabetSize(usize),
    #[error("byte 0x{0:02x} appears twice in the alphabet")]
    DuplicateSymbol(u8),
    #[error("symbol index {symbol} is out of range for a bitmap of {width} bits")]
    SymbolOutOfRange { symbol: usize, width: usize },
    #[error("pattern set is empty")]
    EmptyPatternSet,
    #[error("pattern {0} is empty")]
    EmptyPattern(usize),
    #[error("pattern {index} contains byte 0x{byte:02x}, which is not in the alphabet")]
    ByteOutsideAlphabet { index: usize, byte: u8 },
    #[error("pattern {index} duplicates pattern {first}")]
    DuplicatePattern { index: usize, first: usize },
    #[error("pattern {index} is {len} bytes long; the maximum is 65535")]
    PatternTooLong { index: usize, len: usize },
    #[error("trie would need more than {max} nodes")]
    TooManyNodes { max: usize },
    #[error("trie is already compressed")]
    AlreadyCompressed,
    #[error("operation requires {expected}, found {found}")]
    WrongStage {
        expected: &'static str,
        found: &'static str,
    },
    #[error("trie has no depth limit; truncate it before a two-stage scan")]
    NotTruncated,
    #[error("cannot draw {count} distinct patterns of length {length} over {sigma} symbols")]
    InfeasiblePatterns { sigma: usize, count: usize, length: usize },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("cannot lay out trie: {0}")]
    Layout(String),
    #[error("malformed trie file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
