//! Two-step trie reduction and the tail-length estimators.
//!
//! Step one replaces every childless terminal node by a single shared
//! terminal. A node whose children were all such leaves keeps its bitmap and
//! points its offset at the shared node. Leaves whose siblings have children
//! keep their own slot: a contiguous child block cannot hold the one shared
//! slot at several different positions.
//!
//! Step two merges unary tail chains. For a pattern ending `..a b c`, the
//! node entered by `a` (whose only continuation is `b c`) and the node
//! entered by `b` form a chain that ends in the shared terminal. Chains at the
//! same depth with the same `(b, c)` collapse to one copy, so the last three
//! levels hold at most two nodes per distinct 2-symbol tail.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::layout::{Graph, GraphNode};
use crate::mt::Mt19937;
use crate::trie::{Stage, Trie};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompressionStats {
    pub nodes_before: usize,
    pub nodes_after_stage1: usize,
    pub nodes_after_stage2: usize,
    pub pattern_count: usize,
    pub reduction_percent: f64,
}

impl CompressionStats {
    fn new(before: usize, stage1: usize, stage2: usize, patterns: usize) -> Self {
        Self {
            nodes_before: before,
            nodes_after_stage1: stage1,
            nodes_after_stage2: stage2,
            pattern_count: patterns,
            reduction_percent: 100.0 * (before - stage2) as f64 / before as f64,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain struct")
    }
}

fn rebuild(trie: &Trie, graph: &Graph, stage: Stage) -> Result<Trie> {
    let (bitmaps, links) = graph.layout(trie.words)?;
    Ok(Trie {
        alphabet: trie.alphabet.clone(),
        words: trie.words,
        bitmaps,
        links,
        dictionary: trie.dictionary.clone(),
        depth_limit: trie.depth_limit,
        stage,
        prefix_index: trie.prefix_index.clone(),
        uncompressed_nodes: trie.uncompressed_nodes,
    })
}

/// Merges all childless terminal nodes into one shared terminal node.
///
/// For a prefix-free pattern set whose leaves never share a parent with an
/// inner node (every equal-length set, for instance) the result has exactly
/// `Q - (|P| - 1)` nodes.
pub fn merge_final_nodes(trie: &Trie) -> Result<(Trie, CompressionStats)> {
    if trie.stage != Stage::Uncompressed {
        return Err(Error::AlreadyCompressed);
    }
    let mut graph = Graph::from_trie(trie);
    let fin = graph.nodes.len();
    graph.nodes.push(GraphNode {
        children: Vec::new(),
        terminal: true,
    });
    graph.shared_final = Some(fin);
    for u in 0..fin {
        let all_leaves = {
            let kids = &graph.nodes[u].children;
            !kids.is_empty() && kids.iter().all(|&(_, c)| graph.is_leaf(c))
        };
        if all_leaves {
            for edge in &mut graph.nodes[u].children {
                edge.1 = fin;
            }
        }
    }
    let out = rebuild(trie, &graph, Stage::FinalMerged)?;
    let stats = CompressionStats::new(
        trie.uncompressed_nodes,
        out.node_count(),
        out.node_count(),
        trie.dictionary.len(),
    );
    Ok((out, stats))
}

struct ChainClass {
    head: usize,
    /// The one parent with several children whose block holds `head`.
    anchor: Option<usize>,
}

/// Merges identical unary tail chains. An uncompressed input goes through
/// [`merge_final_nodes`] first.
pub fn merge_tail_chains(trie: &Trie) -> Result<(Trie, CompressionStats)> {
    let stage1;
    let input = match trie.stage {
        Stage::Uncompressed => {
            stage1 = merge_final_nodes(trie)?.0;
            &stage1
        }
        Stage::FinalMerged => trie,
        Stage::TailMerged => return Err(Error::AlreadyCompressed),
    };
    let mut graph = Graph::from_trie(input);
    let fin = graph.shared_final.expect("stage-1 trie has a shared final node");
    let n = graph.nodes.len();

    // Outside the shared final node the stage-1 graph is a tree.
    let mut parent = vec![usize::MAX; n];
    let mut depth = vec![0usize; n];
    for u in 0..n {
        for &(_, c) in &graph.nodes[u].children {
            if c != fin {
                parent[c] = u;
                depth[c] = depth[u] + 1;
            }
        }
    }

    let mut classes: HashMap<(usize, u16, u16), Vec<ChainClass>> = HashMap::new();
    for head in 1..n {
        if head == fin || depth[head] < 2 {
            continue;
        }
        let h = &graph.nodes[head];
        if h.terminal || h.children.len() != 1 {
            continue;
        }
        let (b, tail) = h.children[0];
        let t = &graph.nodes[tail];
        if tail == fin || t.terminal || t.children.len() != 1 || t.children[0].1 != fin {
            continue;
        }
        let c = t.children[0].0;
        let p = parent[head];
        let unary = graph.nodes[p].children.len() == 1;
        let list = classes.entry((depth[head], b, c)).or_default();
        let target = if unary {
            list.first_mut()
        } else {
            list.iter_mut().find(|k| k.anchor.is_none())
        };
        match target {
            Some(class) => {
                if !unary {
                    class.anchor = Some(p);
                }
                let rep = class.head;
                for edge in &mut graph.nodes[p].children {
                    if edge.1 == head {
                        edge.1 = rep;
                    }
                }
            }
            None => list.push(ChainClass {
                head,
                anchor: (!unary).then_some(p),
            }),
        }
    }

    let out = rebuild(input, &graph, Stage::TailMerged)?;
    let stats = CompressionStats::new(
        trie.uncompressed_nodes,
        input.node_count(),
        out.node_count(),
        trie.dictionary.len(),
    );
    Ok((out, stats))
}

/// Both steps in order.
pub fn compress(trie: &Trie) -> Result<(Trie, CompressionStats)> {
    merge_tail_chains(trie)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMethod {
    Formula,
    MonteCarlo,
}

/// Expected number of nodes left in the merged tail levels.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReductionEstimate {
    /// Number of distinct 2-symbol chains, `Σ²`.
    pub r: u64,
    pub n: u64,
    pub expected_length: f64,
    /// Standard error of the mean; zero for the closed formula.
    pub std_error: f64,
    pub method: EstimateMethod,
    pub trials: u64,
}

/// Number of distinct 2-symbol tail chains over `sigma` symbols.
pub fn expected_suffix_space(sigma: u64) -> u64 {
    sigma * sigma
}

/// The tail-length formula evaluated as printed.
///
/// Each double-bracketed term `((a b))` is read as the multiset coefficient
/// `C(a + b - 1, b)`, so the summand for `i` distinct chains is
/// `C(r, i) * C(n - 1, i) / C(n + r - 1, r) * 2i`, summed for
/// `i = 1..=min(r, n)`. Terms are evaluated in log space; a coefficient with
/// an out-of-range argument contributes zero.
pub fn expected_reduced_length_formula(sigma: u64, n: u64) -> f64 {
    use statrs::function::factorial::ln_binomial;
    let r = expected_suffix_space(sigma);
    if n == 0 {
        return 0.0;
    }
    let ln_multiset = |a: u64, b: u64| -> f64 {
        match (a + b).checked_sub(1) {
            Some(top) => ln_binomial(top, b),
            None => f64::NEG_INFINITY,
        }
    };
    let denom = ln_multiset(n, r);
    (1..=r.min(n))
        .map(|i| {
            let ln_term = ln_binomial(r, i) + ln_multiset(n - i, i) - denom;
            ln_term.exp() * 2.0 * i as f64
        })
        .filter(|v| v.is_finite())
        .sum()
}

/// Monte-Carlo estimate of twice the number of distinct 2-symbol tails among
/// `n` uniform draws.
pub fn expected_reduced_length_oracle(sigma: u64, n: u64, trials: u64, seed: u32) -> Result<ReductionEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if !(2..=256).contains(&sigma) {
        return Err(Error::AlphabetSize(sigma as usize));
    }
    let r = expected_suffix_space(sigma);
    let mut mt = Mt19937::new(seed);
    let mut seen = vec![false; r as usize];
    let mut touched: Vec<usize> = Vec::with_capacity(n as usize);
    let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
    for _ in 0..trials {
        for _ in 0..n {
            let a = mt.below(sigma as u32) as usize;
            let b = mt.below(sigma as u32) as usize;
            let idx = a * sigma as usize + b;
            if !seen[idx] {
                seen[idx] = true;
                touched.push(idx);
            }
        }
        let value = 2.0 * touched.len() as f64;
        sum += value;
        sum_sq += value * value;
        for idx in touched.drain(..) {
            seen[idx] = false;
        }
    }
    let t = trials as f64;
    let mean = sum / t;
    let var = if trials > 1 {
        ((sum_sq - sum * sum / t) / (t - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(ReductionEstimate {
        r,
        n,
        expected_length: mean,
        std_error: (var / t).sqrt(),
        method: EstimateMethod::MonteCarlo,
        trials,
    })
}
