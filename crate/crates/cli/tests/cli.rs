use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hepfac::bench::run_trie_size_curve;
use hepfac::{scan, ScanConfig, Trie};

fn hepfac(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hepfac"))
        .args(args)
        .current_dir(dir)
        .env_remove("HEPFAC_WORKERS")
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn gen_writes_distinct_corpora_and_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "gen",
        "--sigma",
        "4",
        "--patterns",
        "1000",
        "--len",
        "20",
        "--bytes",
        "65536",
        "--seed",
        "42",
        "--out",
        "d",
    ];
    ok(&hepfac(&args, dir.path()));
    let d = dir.path().join("d");
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(d.join("manifest.json")).unwrap()).unwrap();
    let corpora = manifest["corpora"].as_array().unwrap();
    assert_eq!(corpora.len(), 5);
    for c in corpora {
        let text = fs::read(d.join(c["file"].as_str().unwrap())).unwrap();
        assert_eq!(text.len(), 65536);
        assert!(text.iter().all(|b| b"ACGT".contains(b)));
        assert_eq!(hepfac::dataset_digest(&text), c["sha256"].as_str().unwrap());
    }
    let patterns = fs::read_to_string(d.join("patterns.txt")).unwrap();
    assert_eq!(patterns.lines().count(), 1000);

    // Same argv, same bytes.
    let again = tempfile::tempdir().unwrap();
    ok(&hepfac(&args, again.path()));
    for name in ["manifest.json", "patterns.txt", "corpus_1.bin", "corpus_5.bin"] {
        assert_eq!(
            fs::read(d.join(name)).unwrap(),
            fs::read(again.path().join("d").join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn build_compress_match_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(&hepfac(
        &[
            "gen",
            "--sigma",
            "4",
            "--patterns",
            "50",
            "--len",
            "6",
            "--bytes",
            "30000",
            "--files",
            "1",
            "--plant",
            "40",
        ],
        p,
    ));
    let built = ok(&hepfac(
        &["build", "--patterns", "patterns.txt", "--sigma", "4", "--out", "t.htri"],
        p,
    ));
    let report: serde_json::Value = serde_json::from_str(&built).unwrap();
    assert_eq!(report["memory"]["bytes_per_node"], 8);
    let stats = ok(&hepfac(&["compress", "--trie", "t.htri", "--out", "c.htri"], p));
    let stats: serde_json::Value = serde_json::from_str(&stats).unwrap();
    assert!(stats["nodes_after_stage2"].as_u64() <= stats["nodes_before"].as_u64());
    ok(&hepfac(
        &[
            "build",
            "--patterns",
            "patterns.txt",
            "--sigma",
            "4",
            "--depth",
            "3",
            "--out",
            "p.htri",
        ],
        p,
    ));

    let trie = Trie::from_bytes(&fs::read(p.join("t.htri")).unwrap()).unwrap();
    let text = fs::read(p.join("corpus_1.bin")).unwrap();
    let want: String = scan(&trie, &text, &ScanConfig::single_threaded())
        .iter()
        .map(|m| format!("{}\t{}\t{}\n", m.start, m.length, m.pattern_id))
        .collect();
    assert!(!want.is_empty());
    for (file, workers) in [("t.htri", "1"), ("c.htri", "3"), ("p.htri", "2")] {
        let out = ok(&hepfac(
            &[
                "match",
                "--trie",
                file,
                "--input",
                "corpus_1.bin",
                "--workers",
                workers,
                "--chunk",
                "777",
            ],
            p,
        ));
        assert_eq!(out, want, "{file}");
    }
}

#[test]
fn figure4_matches_the_library_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&hepfac(
        &["bench", "figure4", "--seed", "7", "--counts", "10,100,1000"],
        dir.path(),
    ));
    let (header, body) = out.split_once('\n').unwrap();
    assert!(header.starts_with("# figure4 "));
    assert!(header.contains("\"sigma\":4"));
    assert_eq!(body, run_trie_size_curve(4, &[10, 100, 1000], 20, 7).unwrap().to_csv());
}

#[test]
fn stats_reports_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&hepfac(&["stats", "--nodes", "352921", "--sigma", "256"], dir.path()));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["ours_bytes"], 12_705_156);
    assert_eq!(v["gravity_bytes"], 361_391_104);
}

#[test]
fn workers_come_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_hepfac"))
        .args(["bench", "figure8", "--sizes", "5000", "--runs", "1", "--patterns", "5"])
        .current_dir(dir.path())
        .env("HEPFAC_WORKERS", "3")
        .output()
        .unwrap();
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(out.status.success(), "{stderr}");
    assert!(stderr.lines().next().unwrap().contains("\"workers\":3"), "{stderr}");
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("5000,3,")));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let unknown = hepfac(&["build", "--bogus"], p);
    assert_eq!(unknown.status.code(), Some(1));
    assert_eq!(String::from_utf8_lossy(&unknown.stderr).lines().count(), 1);

    let missing = hepfac(&["match", "--trie", "nope.htri", "--input", "nope.bin"], p);
    assert_eq!(missing.status.code(), Some(2));

    fs::write(p.join("pats.txt"), "ab\n").unwrap();
    let bad_sigma = hepfac(
        &["build", "--patterns", "pats.txt", "--sigma", "1", "--out", "x.htri"],
        p,
    );
    assert_eq!(bad_sigma.status.code(), Some(1));

    fs::write(p.join("junk.htri"), "not a trie").unwrap();
    let junk = hepfac(&["stats", "--trie", "junk.htri"], p);
    assert_eq!(junk.status.code(), Some(1));

    assert_eq!(hepfac(&["--help"], p).status.code(), Some(0));
}
