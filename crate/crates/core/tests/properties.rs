use std::collections::HashSet;

use hepfac::prefix::count_candidates;
use hepfac::{
    compress, false_positive_rate, gen_corpus, gen_patterns, merge_final_nodes, scan, scan_two_stage, truncate,
    Alphabet, MatchResult, ScanConfig, Stage, Trie,
};
use proptest::prelude::*;

fn naive(patterns: &[Vec<u8>], text: &[u8]) -> Vec<MatchResult> {
    let mut out = Vec::new();
    for start in 0..text.len() {
        for (id, p) in patterns.iter().enumerate() {
            if text[start..].starts_with(p) {
                out.push(MatchResult {
                    start,
                    length: p.len(),
                    pattern_id: id as u32,
                });
            }
        }
    }
    out.sort();
    out
}

/// Distinct patterns and a text over the symbols `b'a'..b'a' + sigma`.
fn case(max_sigma: u8) -> impl Strategy<Value = (u8, Vec<Vec<u8>>, Vec<u8>)> {
    (2u8..=max_sigma).prop_flat_map(|sigma| {
        let sym = 0..sigma;
        let patterns = prop::collection::vec(prop::collection::vec(sym.clone(), 1..8), 1..30).prop_map(|ps| {
            let mut seen = HashSet::new();
            ps.into_iter()
                .map(|p| p.into_iter().map(|s| b'a' + s).collect::<Vec<u8>>())
                .filter(|p| seen.insert(p.clone()))
                .collect::<Vec<_>>()
        });
        let text = prop::collection::vec(sym.prop_map(|s| b'a' + s), 0..600);
        (Just(sigma), patterns, text)
    })
}

fn alphabet(sigma: u8) -> Alphabet {
    Alphabet::new(&(b'a'..b'a' + sigma).collect::<Vec<_>>()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn scan_matches_naive_search((sigma, patterns, text) in case(26), workers in 1usize..5, chunk in 1usize..64) {
        let trie = Trie::build(&patterns, &alphabet(sigma)).unwrap();
        let config = ScanConfig::new(workers, chunk).unwrap();
        let want = naive(&patterns, &text);
        prop_assert_eq!(scan(&trie, &text, &config), want.clone());
        let (stage1, _) = merge_final_nodes(&trie).unwrap();
        prop_assert_eq!(scan(&stage1, &text, &config), want.clone());
        let (reduced, _) = compress(&trie).unwrap();
        prop_assert_eq!(scan(&reduced, &text, &config), want);
    }

    #[test]
    fn compression_never_grows_the_trie((sigma, patterns, _text) in case(8)) {
        let trie = Trie::build(&patterns, &alphabet(sigma)).unwrap();
        let (reduced, stats) = compress(&trie).unwrap();
        prop_assert!(stats.nodes_after_stage2 <= stats.nodes_after_stage1);
        prop_assert!(stats.nodes_after_stage1 <= stats.nodes_before);
        prop_assert_eq!(reduced.node_count(), stats.nodes_after_stage2);
        prop_assert_eq!(reduced.stage(), Stage::TailMerged);
        for p in &patterns {
            prop_assert!(reduced.accepts(p));
        }
    }

    #[test]
    fn two_stage_equals_full_scan((sigma, patterns, text) in case(6), depth in 1usize..9, merged in any::<bool>()) {
        let trie = Trie::build(&patterns, &alphabet(sigma)).unwrap();
        let base = if merged { merge_final_nodes(&trie).unwrap().0 } else { trie.clone() };
        let config = ScanConfig::new(3, 17).unwrap();
        let want = scan(&trie, &text, &config);
        let cut = truncate(&base, depth).unwrap();
        let got = if cut.applied {
            scan_two_stage(&cut.trie, &text, &config).unwrap()
        } else {
            scan(&cut.trie, &text, &config)
        };
        prop_assert_eq!(got, want);
    }

    #[test]
    fn truncated_size_grows_with_depth((sigma, patterns, _text) in case(6)) {
        let trie = Trie::build(&patterns, &alphabet(sigma)).unwrap();
        let sizes: Vec<usize> = (1..9).map(|d| truncate(&trie, d).unwrap().trie.node_count()).collect();
        prop_assert!(sizes.windows(2).all(|w| w[0] <= w[1]), "{:?}", sizes);
    }

    #[test]
    fn serialization_round_trips((sigma, patterns, text) in case(26), stage in 0u8..3) {
        let trie = Trie::build(&patterns, &alphabet(sigma)).unwrap();
        let trie = match stage {
            0 => trie,
            1 => merge_final_nodes(&trie).unwrap().0,
            _ => compress(&trie).unwrap().0,
        };
        let back = Trie::from_bytes(&trie.to_bytes()).unwrap();
        prop_assert_eq!(back.node_count(), trie.node_count());
        prop_assert_eq!(back.stage(), trie.stage());
        let config = ScanConfig::single_threaded();
        prop_assert_eq!(scan(&back, &text, &config), scan(&trie, &text, &config));
    }
}

#[test]
fn false_positive_rate_falls_with_depth() {
    let set = gen_patterns(31, 4, 100, 12).unwrap();
    let text = gen_corpus(32, 4, 200_000).unwrap();
    let rates: Vec<f64> = (1..=12).map(|d| false_positive_rate(&set, d, &text).unwrap()).collect();
    assert!(rates.windows(2).all(|w| w[1] <= w[0]), "{rates:?}");
    assert_eq!(rates[11], 0.0);
}

#[test]
fn two_prefix_false_positives_match_direct_count() {
    let set = gen_patterns(33, 4, 100, 10).unwrap();
    let text = gen_corpus(34, 4, 100_000).unwrap();
    let prefixes: HashSet<&[u8]> = set.patterns().iter().map(|p| &p[..2]).collect();
    let mut want = 0u64;
    for start in 0..text.len().saturating_sub(1) {
        let window = &text[start..start + 2];
        if prefixes.contains(window) && !set.patterns().iter().any(|p| text[start..].starts_with(p)) {
            want += 1;
        }
    }
    let rate = false_positive_rate(&set, 2, &text).unwrap();
    assert_eq!(rate, want as f64 / text.len() as f64);
    let cut = truncate(&set.build_trie().unwrap(), 2).unwrap().trie;
    assert_eq!(count_candidates(&cut, &text).unwrap().false_candidates, want);
}

#[test]
fn byte_alphabet_false_positives_are_rare() {
    // Uniform bytes make an 8-byte prefix hit about 100 / 2^64 per position.
    let set = gen_patterns(35, 256, 100, 20).unwrap();
    let text = gen_corpus(36, 256, 8 << 20).unwrap();
    assert!(false_positive_rate(&set, 8, &text).unwrap() < 1e-6);
}

#[test]
fn truncated_size_matches_distinct_prefixes() {
    let set = gen_patterns(37, 52, 100, 20).unwrap();
    let trie = set.build_trie().unwrap();
    let cut = truncate(&trie, 5).unwrap().trie;
    let mut prefixes = HashSet::new();
    for p in set.patterns() {
        for k in 0..=5 {
            prefixes.insert(&p[..k]);
        }
    }
    assert_eq!(cut.node_count(), prefixes.len());
}
