//! Synthetic data sets: MT19937-driven patterns and corpora, SHA-256 digests,
//! and the on-disk formats for both.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::mt::Mt19937;
use crate::patterns::PatternSet;

/// `count` distinct patterns of `length` uniform symbols over the standard
/// alphabet of size `sigma`. Duplicates are redrawn.
pub fn gen_patterns(seed: u32, sigma: usize, count: usize, length: usize) -> Result<PatternSet> {
    let alphabet = Alphabet::standard(sigma)?;
    if count == 0 || length == 0 {
        return Err(Error::InvalidParameter(
            "pattern count and length must be at least 1".into(),
        ));
    }
    let capacity = (length as f64) * (sigma as f64).log2();
    if capacity < 64.0 && (sigma as u128).pow(length as u32) < count as u128 {
        return Err(Error::InfeasiblePatterns { sigma, count, length });
    }
    let mut mt = Mt19937::new(seed);
    let mut seen: HashSet<Vec<u8>> = HashSet::with_capacity(count);
    let mut patterns = Vec::with_capacity(count);
    while patterns.len() < count {
        let p: Vec<u8> = (0..length)
            .map(|_| alphabet.symbols()[mt.below(sigma as u32) as usize])
            .collect();
        if seen.insert(p.clone()) {
            patterns.push(p);
        }
    }
    PatternSet::new(patterns, alphabet)
}

/// `bytes` uniform symbols over the standard alphabet of size `sigma`.
pub fn gen_corpus(seed: u32, sigma: usize, bytes: usize) -> Result<Vec<u8>> {
    let alphabet = Alphabet::standard(sigma)?;
    if bytes == 0 {
        return Err(Error::EmptyCorpus);
    }
    let mut mt = Mt19937::new(seed);
    Ok((0..bytes)
        .map(|_| alphabet.symbols()[mt.below(sigma as u32) as usize])
        .collect())
}

/// Overwrites `k` random positions of `corpus` with random patterns from
/// `set`. Returns the `(offset, pattern_id)` pairs written.
pub fn plant(corpus: &mut [u8], set: &PatternSet, k: usize, seed: u32) -> Vec<(usize, u32)> {
    let mut mt = Mt19937::new(seed);
    let mut placed = Vec::with_capacity(k);
    for _ in 0..k {
        let id = mt.below(set.len() as u32);
        let p = &set.patterns()[id as usize];
        if p.len() > corpus.len() {
            continue;
        }
        let room = (corpus.len() - p.len() + 1) as u32;
        let at = mt.below(room) as usize;
        corpus[at..at + p.len()].copy_from_slice(p);
        placed.push((at, id));
    }
    placed
}

/// Lower-case hex SHA-256 of `text`.
pub fn dataset_digest(text: &[u8]) -> String {
    hex::encode(Sha256::digest(text))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub file: String,
    pub seed: u32,
    pub sigma: usize,
    pub bytes: usize,
    pub sha256: String,
}

const HEX_MARKER: &str = "#hex";

/// One pattern per line. When any pattern holds a line break or could be
/// read back as the marker, the file starts with `#hex` and every line is
/// hex-encoded.
pub fn write_patterns<W: Write>(set: &PatternSet, mut out: W) -> Result<()> {
    let needs_hex = set.alphabet().contains(b'\n')
        || set.alphabet().contains(b'\r')
        || set.patterns().iter().any(|p| p.first() == Some(&b'#'));
    if needs_hex {
        writeln!(out, "{HEX_MARKER}")?;
        for p in set.patterns() {
            writeln!(out, "{}", hex::encode(p))?;
        }
    } else {
        for p in set.patterns() {
            out.write_all(p)?;
            out.write_all(b"\n")?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_patterns<R: BufRead>(input: R) -> Result<Vec<Vec<u8>>> {
    let mut lines = input.split(b'\n');
    let mut out = Vec::new();
    let first = match lines.next() {
        Some(line) => line?,
        None => return Ok(out),
    };
    if first == HEX_MARKER.as_bytes() {
        for line in lines {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let text =
                std::str::from_utf8(&line).map_err(|_| Error::InvalidParameter("pattern file is not hex".into()))?;
            out.push(hex::decode(text.trim()).map_err(|e| Error::InvalidParameter(format!("bad hex pattern: {e}")))?);
        }
    } else {
        for line in std::iter::once(Ok(first)).chain(lines) {
            let line = line?;
            if !line.is_empty() {
                out.push(line);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_vectors() {
        assert_eq!(
            dataset_digest(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        assert_eq!(
            dataset_digest(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn dna_patterns() {
        let set = gen_patterns(42, 4, 1000, 20).unwrap();
        assert_eq!(set.len(), 1000);
        assert!(set
            .patterns()
            .iter()
            .all(|p| p.len() == 20 && p.iter().all(|b| b"ACGT".contains(b))));
        let single = gen_patterns(1, 4, 1, 20).unwrap();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn exhaustive_binary_set() {
        let set = gen_patterns(3, 2, 8, 3).unwrap();
        let mut got = set.patterns().to_vec();
        got.sort();
        let mut want: Vec<Vec<u8>> = (0..8u8)
            .map(|v| {
                (0..3)
                    .rev()
                    .map(|b| if v >> b & 1 == 1 { b'b' } else { b'a' })
                    .collect()
            })
            .collect();
        want.sort();
        assert_eq!(got, want);
        assert!(matches!(
            gen_patterns(3, 2, 9, 3),
            Err(Error::InfeasiblePatterns { .. })
        ));
    }

    #[test]
    fn corpus_is_deterministic_and_seed_sensitive() {
        let a = gen_corpus(1, 52, 10_000).unwrap();
        let b = gen_corpus(1, 52, 10_000).unwrap();
        let c = gen_corpus(2, 52, 10_000).unwrap();
        assert_eq!(dataset_digest(&a), dataset_digest(&b));
        assert_ne!(dataset_digest(&a), dataset_digest(&c));
        assert!(gen_corpus(1, 4, 0).is_err());
    }

    #[test]
    fn symbol_histogram_is_uniform() {
        // Each count is Binomial(n, 1/Σ); allow four standard deviations.
        let sigma = 52usize;
        let n = 10 * (1 << 20);
        let text = gen_corpus(7, sigma, n).unwrap();
        let alphabet = Alphabet::standard(sigma).unwrap();
        let mut counts = vec![0usize; sigma];
        for &b in &text {
            counts[alphabet.to_symbol(b).unwrap()] += 1;
        }
        let p = 1.0 / sigma as f64;
        let mean = n as f64 * p;
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        for (s, &c) in counts.iter().enumerate() {
            assert!((c as f64 - mean).abs() <= 4.0 * sd, "symbol {s}: {c} vs {mean}");
        }
    }

    #[test]
    fn planting_writes_patterns() {
        let set = gen_patterns(5, 52, 10, 12).unwrap();
        let mut text = gen_corpus(6, 52, 5_000).unwrap();
        let placed = plant(&mut text, &set, 20, 9);
        assert_eq!(placed.len(), 20);
        // Later plants may overwrite earlier ones; the last one always survives.
        let &(at, id) = placed.last().unwrap();
        assert!(text[at..].starts_with(&set.patterns()[id as usize]));
    }

    #[test]
    fn pattern_file_round_trip() {
        let set = gen_patterns(8, 52, 50, 9).unwrap();
        let mut buf = Vec::new();
        write_patterns(&set, &mut buf).unwrap();
        assert_eq!(read_patterns(&buf[..]).unwrap(), set.patterns());

        let raw = PatternSet::new(vec![b"a\nb".to_vec(), b"#x".to_vec()], Alphabet::bytes()).unwrap();
        let mut buf = Vec::new();
        write_patterns(&raw, &mut buf).unwrap();
        assert!(buf.starts_with(b"#hex\n"));
        assert_eq!(read_patterns(&buf[..]).unwrap(), raw.patterns());
    }
}
