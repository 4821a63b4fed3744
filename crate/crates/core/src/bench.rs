//! Measurement harness: throughput runs, footprint models, and the data
//! tables behind the trie-size and scaling experiments.

use serde::Serialize;

use crate::compression::{merge_final_nodes, merge_tail_chains};
use crate::corpus;
use crate::engine::{scan_timed, ScanConfig};
use crate::error::{Error, Result};
use crate::prefix::{choose_depth, truncate};
use crate::trie::{bytes_per_node, MemoryReport, Trie};

/// Per-node cost of the PFAC state table.
pub const PFAC_BYTES_PER_NODE: usize = 15;
/// Per-node cost of the Aho-Corasick/Commentz-Walter trie.
pub const ACCW_BYTES_PER_NODE: usize = 10;
/// GrAVity's 256-entry table of 4-byte states.
pub const GRAVITY_BYTES_PER_NODE: usize = 1024;

/// Gigabits of input per second.
pub fn gbps(bytes: usize, seconds: f64) -> f64 {
    bytes as f64 * 8.0 / seconds / 1e9
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThroughputReport {
    pub bytes: usize,
    /// Mean scan wall time over the timed runs.
    pub seconds: f64,
    /// Mean time spent merging per-chunk results, not included in `seconds`.
    pub merge_seconds: f64,
    pub gbps: f64,
    pub workers: usize,
    pub runs: usize,
    pub run_seconds: Vec<f64>,
    pub matches: usize,
}

/// Scans `corpus` once untimed, then `runs` timed times.
pub fn run_throughput(trie: &Trie, corpus: &[u8], config: &ScanConfig, runs: usize) -> Result<ThroughputReport> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be at least 1".into()));
    }
    let warm = scan_timed(trie, corpus, config);
    let matches = warm.matches.len();
    drop(warm);
    let mut run_seconds = Vec::with_capacity(runs);
    let mut merge_total = 0.0;
    for _ in 0..runs {
        let outcome = scan_timed(trie, corpus, config);
        debug_assert_eq!(outcome.matches.len(), matches);
        run_seconds.push(outcome.scan_seconds);
        merge_total += outcome.merge_seconds;
    }
    let seconds = run_seconds.iter().sum::<f64>() / runs as f64;
    Ok(ThroughputReport {
        bytes: corpus.len(),
        seconds,
        merge_seconds: merge_total / runs as f64,
        gbps: gbps(corpus.len(), seconds),
        workers: config.workers,
        runs,
        run_seconds,
        matches,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub node_count: usize,
    pub sigma: usize,
    pub ours_bytes: usize,
    pub pfac_bytes: usize,
    pub accw_bytes: usize,
    pub gravity_bytes: usize,
}

impl ComparisonReport {
    pub fn pfac_ratio(&self) -> f64 {
        self.pfac_bytes as f64 / self.ours_bytes as f64
    }

    pub fn accw_ratio(&self) -> f64 {
        self.accw_bytes as f64 / self.ours_bytes as f64
    }

    pub fn gravity_ratio(&self) -> f64 {
        self.gravity_bytes as f64 / self.ours_bytes as f64
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mib = |b: usize| b as f64 / (1u64 << 20) as f64;
        serde_json::json!({
            "node_count": self.node_count,
            "sigma": self.sigma,
            "ours_bytes": self.ours_bytes,
            "pfac_bytes": self.pfac_bytes,
            "accw_bytes": self.accw_bytes,
            "gravity_bytes": self.gravity_bytes,
            "ours_mib": mib(self.ours_bytes),
            "pfac_mib": mib(self.pfac_bytes),
            "accw_mib": mib(self.accw_bytes),
            "gravity_mib": mib(self.gravity_bytes),
            "pfac_ratio": self.pfac_ratio(),
            "accw_ratio": self.accw_ratio(),
            "gravity_ratio": self.gravity_ratio(),
        })
    }
}

/// Our footprint against the published per-node costs of other layouts.
pub fn compare_footprint(node_count: usize, sigma: usize) -> Result<ComparisonReport> {
    if node_count == 0 {
        return Err(Error::InvalidParameter("node count must be at least 1".into()));
    }
    if !(2..=256).contains(&sigma) {
        return Err(Error::AlphabetSize(sigma));
    }
    Ok(ComparisonReport {
        node_count,
        sigma,
        ours_bytes: MemoryReport::new(node_count, sigma).total_bytes,
        pfac_bytes: PFAC_BYTES_PER_NODE * node_count,
        accw_bytes: ACCW_BYTES_PER_NODE * node_count,
        gravity_bytes: GRAVITY_BYTES_PER_NODE * node_count,
    })
}

/// Nodes of a binary trie over the patterns written as
/// `ceil(log2 Σ)`-bit codes: one plus the number of distinct bit prefixes.
pub fn binary_trie_nodes(patterns: &[Vec<u8>], alphabet: &crate::Alphabet) -> usize {
    let bits = (usize::BITS - (alphabet.size() - 1).leading_zeros()) as usize;
    let mut codes: Vec<Vec<u8>> = patterns
        .iter()
        .map(|p| {
            p.iter()
                .flat_map(|&b| {
                    let s = alphabet.to_symbol(b).expect("pattern byte in alphabet");
                    (0..bits).rev().map(move |k| (s >> k & 1) as u8)
                })
                .collect()
        })
        .collect();
    codes.sort_unstable();
    let total: usize = codes.iter().map(Vec::len).sum();
    let shared: usize = codes
        .windows(2)
        .map(|w| w[0].iter().zip(&w[1]).take_while(|(a, b)| a == b).count())
        .sum();
    1 + total - shared
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrieSizeRow {
    pub patterns: usize,
    pub nodes: usize,
    pub stage1_nodes: usize,
    pub reduced_nodes: usize,
    pub binary_nodes: usize,
    /// Σ 4-byte child slots per node.
    pub array_bytes: usize,
    /// Two 4-byte links per binary node.
    pub binary_bytes: usize,
    pub bitmapped_bytes: usize,
    pub reduced_bytes: usize,
    pub reduction_percent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrieSizeCurve {
    pub sigma: usize,
    pub pattern_length: usize,
    pub seed: u32,
    pub rows: Vec<TrieSizeRow>,
}

impl TrieSizeCurve {
    pub fn mean_reduction_percent(&self) -> f64 {
        self.rows.iter().map(|r| r.reduction_percent).sum::<f64>() / self.rows.len().max(1) as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# trie size curve sigma={} pattern_length={} seed={}\n\
             # array_bytes = nodes * 4 * sigma; binary_bytes = binary_nodes * 8; \
             bitmapped_bytes = nodes * {bpn}; reduced_bytes = reduced_nodes * {bpn}\n\
             patterns,nodes,stage1_nodes,reduced_nodes,binary_nodes,array_bytes,binary_bytes,bitmapped_bytes,reduced_bytes,reduction_percent\n",
            self.sigma,
            self.pattern_length,
            self.seed,
            bpn = bytes_per_node(self.sigma)
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{:.4}\n",
                r.patterns,
                r.nodes,
                r.stage1_nodes,
                r.reduced_nodes,
                r.binary_nodes,
                r.array_bytes,
                r.binary_bytes,
                r.bitmapped_bytes,
                r.reduced_bytes,
                r.reduction_percent
            ));
        }
        out
    }

    /// Internal consistency problems; empty when the table is sound.
    pub fn check(&self) -> Vec<String> {
        let bpn = bytes_per_node(self.sigma);
        let mut problems = Vec::new();
        for r in &self.rows {
            if r.bitmapped_bytes != r.nodes * bpn || r.reduced_bytes != r.reduced_nodes * bpn {
                problems.push(format!("n={}: byte totals disagree with node counts", r.patterns));
            }
            if !(r.reduced_nodes <= r.stage1_nodes && r.stage1_nodes <= r.nodes) {
                problems.push(format!("n={}: compression increased the node count", r.patterns));
            }
        }
        problems
    }
}

/// Sizes of the array, binary, bitmapped, and reduced bitmapped tries for
/// each pattern count. The set for `n` patterns is the first `n` patterns of
/// the seeded stream, so larger sets contain smaller ones.
pub fn run_trie_size_curve(
    sigma: usize,
    pattern_counts: &[usize],
    pattern_length: usize,
    seed: u32,
) -> Result<TrieSizeCurve> {
    let rows = pattern_counts
        .iter()
        .map(|&n| {
            let set = corpus::gen_patterns(seed, sigma, n, pattern_length)?;
            let trie = set.build_trie()?;
            let (stage1, _) = merge_final_nodes(&trie)?;
            let (reduced, _) = merge_tail_chains(&stage1)?;
            let nodes = trie.node_count();
            let binary_nodes = binary_trie_nodes(set.patterns(), set.alphabet());
            let bitmapped_bytes = trie.memory_report().total_bytes;
            let reduced_bytes = reduced.memory_report().total_bytes;
            Ok(TrieSizeRow {
                patterns: n,
                nodes,
                stage1_nodes: stage1.node_count(),
                reduced_nodes: reduced.node_count(),
                binary_nodes,
                array_bytes: nodes * 4 * sigma,
                binary_bytes: binary_nodes * 8,
                bitmapped_bytes,
                reduced_bytes,
                reduction_percent: 100.0 * (bitmapped_bytes - reduced_bytes) as f64 / bitmapped_bytes as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrieSizeCurve {
        sigma,
        pattern_length,
        seed,
        rows,
    })
}

/// The trie the scaling runs scan: final-node merged, then truncated at
/// [`choose_depth`]. Returns the trie and the depth used (`None` when the
/// depth covers whole patterns).
pub fn scan_trie(trie: &Trie) -> Result<(Trie, Option<usize>)> {
    let (stage1, _) = merge_final_nodes(trie)?;
    let depth = choose_depth(trie.dictionary(), trie.alphabet().size());
    let cut = truncate(&stage1, depth)?;
    let used = cut.applied.then_some(depth);
    Ok((cut.trie, used))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingRow {
    pub sigma: usize,
    pub patterns: usize,
    pub prefix_depth: Option<usize>,
    pub trie_nodes: usize,
    pub trie_bytes: usize,
    pub matches: usize,
    pub seconds: f64,
    pub gbps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingTable {
    pub pattern_length: usize,
    pub corpus_bytes: usize,
    pub seed: u32,
    pub workers: usize,
    pub runs: usize,
    pub rows: Vec<ScalingRow>,
}

impl ScalingTable {
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# throughput scaling pattern_length={} corpus_bytes={} seed={} workers={} runs={}\n\
             sigma,patterns,prefix_depth,trie_nodes,trie_bytes,matches,seconds,gbps\n",
            self.pattern_length, self.corpus_bytes, self.seed, self.workers, self.runs
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{:.6},{:.4}\n",
                r.sigma,
                r.patterns,
                r.prefix_depth.map_or_else(|| "full".to_string(), |d| d.to_string()),
                r.trie_nodes,
                r.trie_bytes,
                r.matches,
                r.seconds,
                r.gbps
            ));
        }
        out
    }

    pub fn check(&self) -> Vec<String> {
        self.rows
            .iter()
            .filter(|r| r.trie_bytes != MemoryReport::new(r.trie_nodes, r.sigma).total_bytes)
            .map(|r| {
                format!(
                    "sigma={} n={}: trie bytes disagree with the memory report",
                    r.sigma, r.patterns
                )
            })
            .collect()
    }
}

/// Throughput over a grid of alphabet sizes and pattern counts. Patterns use
/// `seed`; the corpus for each alphabet uses `seed + 1`.
pub fn run_scaling(
    sigma_list: &[usize],
    pattern_counts: &[usize],
    pattern_length: usize,
    corpus_bytes: usize,
    seed: u32,
    config: &ScanConfig,
    runs: usize,
) -> Result<ScalingTable> {
    let mut rows = Vec::new();
    for &sigma in sigma_list {
        let text = corpus::gen_corpus(seed.wrapping_add(1), sigma, corpus_bytes)?;
        for &n in pattern_counts {
            let set = corpus::gen_patterns(seed, sigma, n, pattern_length)?;
            let trie = set.build_trie()?;
            let (scanned, depth) = scan_trie(&trie)?;
            let report = run_throughput(&scanned, &text, config, runs)?;
            rows.push(ScalingRow {
                sigma,
                patterns: n,
                prefix_depth: depth,
                trie_nodes: scanned.node_count(),
                trie_bytes: scanned.memory_report().total_bytes,
                matches: report.matches,
                seconds: report.seconds,
                gbps: report.gbps,
            });
        }
    }
    Ok(ScalingTable {
        pattern_length,
        corpus_bytes,
        seed,
        workers: config.workers,
        runs,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Alphabet;

    #[test]
    fn footprint_ratios() {
        let r = compare_footprint(1_703_023, 32).unwrap();
        assert_eq!(r.ours_bytes, 13_624_184);
        assert!((r.pfac_ratio() - 1.875).abs() < 1e-12);
        let g = compare_footprint(352_921, 256).unwrap();
        assert_eq!(g.gravity_bytes, 361_391_104);
        assert!((g.gravity_ratio() - 1024.0 / 36.0).abs() < 1e-12);
        let one = compare_footprint(1, 4).unwrap();
        assert_eq!(one.ours_bytes, 8);
        assert!((one.pfac_ratio() - 15.0 / 8.0).abs() < 1e-12);
        assert!(compare_footprint(0, 4).is_err());
    }

    #[test]
    fn gbps_formula() {
        assert_eq!(gbps(1_000_000_000, 8.0), 1.0);
        assert_eq!(gbps(125, 1e-6), 1.0);
    }

    #[test]
    fn throughput_single_run_is_its_own_mean() {
        let set = corpus::gen_patterns(1, 52, 10, 8).unwrap();
        let trie = set.build_trie().unwrap();
        let text = corpus::gen_corpus(2, 52, 50_000).unwrap();
        let r = run_throughput(&trie, &text, &ScanConfig::single_threaded(), 1).unwrap();
        assert_eq!(r.runs, 1);
        assert_eq!(r.seconds, r.run_seconds[0]);
        assert_eq!(r.gbps, gbps(r.bytes, r.seconds));
        assert!(run_throughput(&trie, &[], &ScanConfig::single_threaded(), 1).is_err());
        assert!(run_throughput(&trie, &text, &ScanConfig::single_threaded(), 0).is_err());
    }

    #[test]
    fn binary_nodes_by_hand() {
        // Codes over {a, b}: one bit each.
        let a = Alphabet::new(b"ab").unwrap();
        assert_eq!(binary_trie_nodes(&[b"ab".to_vec(), b"aa".to_vec()], &a), 4);
        // Two-bit codes: "A" = 00, "C" = 01.
        let dna = Alphabet::new(b"ACGT").unwrap();
        assert_eq!(binary_trie_nodes(&[b"A".to_vec(), b"C".to_vec()], &dna), 4);
    }

    #[test]
    fn single_pattern_curve_has_no_reduction() {
        let c = run_trie_size_curve(4, &[1], 20, 3).unwrap();
        assert_eq!(c.rows[0].bitmapped_bytes, c.rows[0].reduced_bytes);
        assert!(c.check().is_empty());
        assert!(c.to_csv().lines().any(|l| l.starts_with("1,21,21,21,")));
    }

    #[test]
    fn scaling_table_is_consistent() {
        let t = run_scaling(&[4, 52], &[1, 10], 20, 20_000, 5, &ScanConfig::single_threaded(), 1).unwrap();
        assert_eq!(t.rows.len(), 4);
        assert!(t.check().is_empty());
        assert!(t.to_csv().starts_with("# throughput scaling"));
    }
}
