//! Binary trie file format.
//!
//! ```text
//! header      "HTRI" | version u16 | sigma u16 | node_count u32 | words_per_bitmap u16
//! nodes       node_count x (words_per_bitmap x u32 bitmap, u32 offset | terminal << 31)
//! dictionary  count u32, then count x (len u16, len bytes, id u32)
//! trailer     sigma bytes of alphabet in symbol order, then a stage byte (optional)
//! ```
//!
//! All integers are little-endian. Without the trailer the alphabet is the
//! standard one and the compression stage is inferred from the node graph.
//! A compression pass that merged nothing leaves a graph identical to its
//! input, so only the trailer can tell them apart. The truncation depth is
//! always recovered from the dictionary.

use std::io::Write;

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::patterns::{self, Dictionary};
use crate::prefix::PrefixIndex;
use crate::trie::{Stage, Trie};

pub const MAGIC: &[u8; 4] = b"HTRI";
pub const VERSION: u16 = 1;

impl Trie {
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(&self.to_bytes())?;
        out.flush()?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let sigma = self.alphabet.size();
        let mut buf = Vec::with_capacity(16 + self.node_count() * (4 * self.words + 4));
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&(sigma as u16).to_le_bytes());
        buf.extend_from_slice(&(self.node_count() as u32).to_le_bytes());
        buf.extend_from_slice(&(self.words as u16).to_le_bytes());
        for i in 0..self.node_count() {
            for w in self.bitmap(i) {
                buf.extend_from_slice(&w.to_le_bytes());
            }
            buf.extend_from_slice(&self.links[i].to_le_bytes());
        }
        let dict = self.dictionary.patterns();
        buf.extend_from_slice(&(dict.len() as u32).to_le_bytes());
        for (id, p) in dict.iter().enumerate() {
            buf.extend_from_slice(&(p.len() as u16).to_le_bytes());
            buf.extend_from_slice(p);
            buf.extend_from_slice(&(id as u32).to_le_bytes());
        }
        buf.extend_from_slice(self.alphabet.symbols());
        buf.push(stage_code(self.stage));
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = r.u16()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let sigma = r.u16()? as usize;
        let node_count = r.u32()? as usize;
        let words = r.u16()? as usize;
        if !(2..=256).contains(&sigma) {
            return Err(Error::Format(format!("alphabet size {sigma}")));
        }
        if words != sigma.div_ceil(32) {
            return Err(Error::Format(format!("{words} bitmap words for alphabet size {sigma}")));
        }
        if node_count == 0 {
            return Err(Error::Format("no nodes".into()));
        }
        let node_bytes = node_count
            .checked_mul(4 * words + 4)
            .ok_or_else(|| Error::Format("node count overflows".into()))?;
        if r.remaining() < node_bytes {
            return Err(Error::Format("truncated node array".into()));
        }
        let mut bitmaps = Vec::with_capacity(node_count * words);
        let mut links = Vec::with_capacity(node_count);
        for i in 0..node_count {
            for w in 0..words {
                let word = r.u32()?;
                let valid_bits = (sigma - 32 * w).min(32);
                if valid_bits < 32 && word >> valid_bits != 0 {
                    return Err(Error::Format(format!("node {i} sets bits beyond the alphabet")));
                }
                bitmaps.push(word);
            }
            let link = r.u32()?;
            let offset = (link & !crate::trie::TERMINAL) as usize;
            let has_children = bitmaps[i * words..].iter().any(|&w| w != 0);
            if has_children != (offset != 0) || offset >= node_count {
                return Err(Error::Format(format!("node {i} has an invalid offset {offset}")));
            }
            links.push(link);
        }

        let count = r.u32()? as usize;
        let mut slots: Vec<Option<Vec<u8>>> = vec![None; count];
        for _ in 0..count {
            let len = r.u16()? as usize;
            let pattern = r.take(len)?.to_vec();
            let id = r.u32()? as usize;
            match slots.get_mut(id) {
                Some(slot @ None) => *slot = Some(pattern),
                _ => return Err(Error::Format(format!("bad or repeated pattern id {id}"))),
            }
        }
        let dict: Vec<Vec<u8>> = slots.into_iter().map(|p| p.expect("every id filled")).collect();

        let (alphabet, stored_stage) = match r.remaining() {
            0 => (Alphabet::standard(sigma)?, None),
            n if n == sigma => (Alphabet::new(r.take(sigma)?)?, None),
            n if n == sigma + 1 => {
                let alphabet = Alphabet::new(r.take(sigma)?)?;
                let code = r.take(1)?[0];
                let stage = [Stage::Uncompressed, Stage::FinalMerged, Stage::TailMerged]
                    .into_iter()
                    .find(|&s| stage_code(s) == code)
                    .ok_or_else(|| Error::Format(format!("unknown stage {code}")))?;
                (alphabet, Some(stage))
            }
            n => return Err(Error::Format(format!("{n} trailing bytes"))),
        };
        patterns::validate(&dict, &alphabet).map_err(|e| Error::Format(e.to_string()))?;

        let mut trie = Trie {
            alphabet,
            words,
            bitmaps,
            links,
            dictionary: Dictionary::new(dict),
            depth_limit: None,
            stage: Stage::Uncompressed,
            prefix_index: None,
            uncompressed_nodes: node_count,
        };
        // Every offset has to address a whole child block.
        for i in 0..node_count {
            let node = trie.node(i);
            let kids = node.child_count() as usize;
            if kids > 0 && node.offset as usize + 1 != node_count && node.offset as usize + kids > node_count {
                return Err(Error::Format(format!("node {i} child block runs past the end")));
            }
        }
        let inferred = infer_stage(&trie);
        trie.stage = match stored_stage {
            Some(stage) if stage_code(stage) < stage_code(inferred) => {
                return Err(Error::Format(format!(
                    "stage {} contradicts the node graph ({})",
                    stage.name(),
                    inferred.name()
                )))
            }
            Some(stage) => stage,
            None => inferred,
        };
        trie.depth_limit = infer_depth_limit(&trie)?;
        if let Some(depth) = trie.depth_limit {
            trie.prefix_index = Some(PrefixIndex::new(&trie.dictionary, depth));
        }
        Ok(trie)
    }
}

fn stage_code(stage: Stage) -> u8 {
    match stage {
        Stage::Uncompressed => 0,
        Stage::FinalMerged => 1,
        Stage::TailMerged => 2,
    }
}

fn infer_stage(trie: &Trie) -> Stage {
    let n = trie.node_count();
    let mut indegree = vec![0u32; n];
    for i in 0..n {
        for (_, c) in trie.children(i) {
            indegree[c] += 1;
        }
    }
    if indegree[..n - 1].iter().any(|&d| d > 1) {
        Stage::TailMerged
    } else if indegree[n - 1] > 1 {
        Stage::FinalMerged
    } else {
        Stage::Uncompressed
    }
}

/// A truncated trie accepts the first `depth` bytes of long patterns but not
/// the patterns themselves.
fn infer_depth_limit(trie: &Trie) -> Result<Option<usize>> {
    let mut depth = None;
    for p in trie.dictionary.patterns() {
        if trie.accepts(p) {
            continue;
        }
        let walked = (1..p.len()).rev().find(|&k| trie.accepts(&p[..k]));
        match (walked, depth) {
            (Some(k), None) => depth = Some(k),
            (Some(k), Some(d)) if k == d => {}
            _ => return Err(Error::Format("dictionary does not match the node array".into())),
        }
    }
    if let Some(d) = depth {
        let consistent = trie
            .dictionary
            .patterns()
            .iter()
            .all(|p| p.len() <= d && trie.accepts(p) || p.len() > d && trie.accepts(&p[..d]));
        if !consistent {
            return Err(Error::Format("dictionary does not match the node array".into()));
        }
    }
    Ok(depth)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.remaining() < n {
            return Err(Error::Format("unexpected end of file".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compression::{compress, merge_final_nodes};
    use crate::prefix::truncate;

    #[test]
    fn header_layout() {
        let t = Trie::build(&["AB", "AD"], &Alphabet::bytes()).unwrap();
        let b = t.to_bytes();
        assert_eq!(&b[..4], b"HTRI");
        assert_eq!(u16::from_le_bytes([b[4], b[5]]), 1);
        assert_eq!(u16::from_le_bytes([b[6], b[7]]), 256);
        assert_eq!(u32::from_le_bytes([b[8], b[9], b[10], b[11]]), 4);
        assert_eq!(u16::from_le_bytes([b[12], b[13]]), 8);
        // Node 1 ('A'): bitmap words then offset 2.
        let node1 = 14 + 36;
        let word2 = u32::from_le_bytes(b[node1 + 8..node1 + 12].try_into().unwrap());
        assert_eq!(word2, (1 << (66 - 64)) | (1 << (68 - 64)));
        assert_eq!(u32::from_le_bytes(b[node1 + 32..node1 + 36].try_into().unwrap()), 2);
        // Node 2 ('B'): terminal bit only.
        let node2 = 14 + 72;
        assert_eq!(
            u32::from_le_bytes(b[node2 + 32..node2 + 36].try_into().unwrap()),
            1 << 31
        );
        let dict = 14 + 4 * 36;
        assert_eq!(u32::from_le_bytes(b[dict..dict + 4].try_into().unwrap()), 2);
        assert_eq!(&b[dict + 4..dict + 6], &[2, 0]);
        assert_eq!(&b[dict + 6..dict + 8], b"AB");
        assert_eq!(b.len(), dict + 4 + 2 * (2 + 2 + 4) + 256 + 1);
        assert_eq!(b[b.len() - 1], 0);
    }

    #[test]
    fn stage_and_depth_are_recovered() {
        let set = crate::corpus::gen_patterns(3, 4, 60, 9).unwrap();
        let t = set.build_trie().unwrap();
        let s1 = merge_final_nodes(&t).unwrap().0;
        let s2 = compress(&t).unwrap().0;
        let cut = truncate(&s1, 4).unwrap().trie;
        for (trie, stage) in [
            (&t, Stage::Uncompressed),
            (&s1, Stage::FinalMerged),
            (&s2, Stage::TailMerged),
            (&cut, Stage::FinalMerged),
        ] {
            let back = Trie::from_bytes(&trie.to_bytes()).unwrap();
            assert_eq!(back.stage(), stage);
            assert_eq!(back.depth_limit(), trie.depth_limit());
            assert_eq!(back.to_bytes(), trie.to_bytes());
        }
    }

    #[test]
    fn missing_trailer_means_standard_alphabet_and_inferred_stage() {
        let set = crate::corpus::gen_patterns(1, 52, 10, 5).unwrap();
        let t = merge_final_nodes(&set.build_trie().unwrap()).unwrap().0;
        let mut b = t.to_bytes();
        b.truncate(b.len() - 53);
        let back = Trie::from_bytes(&b).unwrap();
        assert_eq!(back.alphabet(), t.alphabet());
        assert_eq!(back.stage(), Stage::FinalMerged);
    }

    #[test]
    fn stored_stage_survives_a_no_op_merge() {
        let t = Trie::build(&["A"], &Alphabet::bytes()).unwrap();
        let s2 = compress(&t).unwrap().0;
        assert_eq!(s2.node_count(), t.node_count());
        assert_eq!(Trie::from_bytes(&s2.to_bytes()).unwrap().stage(), Stage::TailMerged);
        // A stage weaker than the graph shows is rejected.
        let s1 = merge_final_nodes(&Trie::build(&["AB", "CD"], &Alphabet::bytes()).unwrap())
            .unwrap()
            .0;
        let mut b = s1.to_bytes();
        *b.last_mut().unwrap() = 0;
        assert!(Trie::from_bytes(&b).is_err());
    }

    #[test]
    fn rejects_corruption() {
        let t = Trie::build(&["AB", "AD"], &Alphabet::bytes()).unwrap();
        let b = t.to_bytes();
        let mut bad = b.clone();
        bad[0] = b'X';
        assert!(Trie::from_bytes(&bad).is_err());
        assert!(Trie::from_bytes(&b[..20]).is_err());
        let mut bad = b.clone();
        bad[4] = 9;
        assert!(Trie::from_bytes(&bad).is_err());
        let mut bad = b.clone();
        bad.push(0);
        assert!(Trie::from_bytes(&bad).is_err());
        let mut bad = b.clone();
        // Point node 1 past the end.
        bad[14 + 36 + 32] = 200;
        assert!(Trie::from_bytes(&bad).is_err());
    }
}
