use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hepfac::bench::{self, compare_footprint, run_scaling, run_throughput, run_trie_size_curve};
use hepfac::corpus::{plant, read_patterns, write_patterns, DatasetManifest};
use hepfac::prefix::{analysis_csv, choose_depth};
use hepfac::{
    analyze_prefix_vs_alphabet, compress, dataset_digest, gen_corpus, gen_patterns, merge_final_nodes, scan_two_stage,
    truncate, Alphabet, PatternSet, ScanConfig, Trie,
};
use serde::Serialize;

const MIB: usize = 1 << 20;

#[derive(Parser, Serialize)]
#[command(name = "hepfac", version, about = "Bitmapped failure-less Aho-Corasick matching")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Generate a pattern file, corpus files, and a manifest.
    Gen(GenArgs),
    /// Build a trie from a pattern file.
    Build(BuildArgs),
    /// Apply final-node and tail-chain merging to a trie file.
    Compress(CompressArgs),
    /// Compare the footprint of a trie against other node layouts.
    Stats(StatsArgs),
    /// Scan a file and list every match.
    Match(MatchArgs),
    /// Mean minimal unique prefix over alphabet sizes.
    Prefix(PrefixArgs),
    /// Reproduce the measurement tables.
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Args, Serialize)]
struct GenArgs {
    #[arg(long)]
    sigma: usize,
    #[arg(long, default_value_t = 100)]
    patterns: usize,
    #[arg(long, default_value_t = 20)]
    len: usize,
    /// Bytes per corpus file [default: 1048576]
    #[arg(long, conflicts_with = "paper_scale")]
    bytes: Option<usize>,
    /// 100 MiB per corpus file.
    #[arg(long)]
    paper_scale: bool,
    #[arg(long, default_value_t = 5)]
    files: usize,
    /// Overwrite this many random positions of each corpus file with patterns.
    #[arg(long, default_value_t = 0)]
    plant: usize,
    #[arg(long, default_value_t = 1)]
    seed: u32,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct BuildArgs {
    #[arg(long)]
    patterns: PathBuf,
    /// Standard alphabet size; 4 is ACGT, 256 is every byte.
    #[arg(long, default_value_t = 256)]
    sigma: usize,
    /// Truncate to this depth; matches are then verified against whole patterns.
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct CompressArgs {
    #[arg(long)]
    trie: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// 1 merges final nodes only; 2 also merges tail chains.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    stage: u8,
}

#[derive(Args, Serialize)]
struct StatsArgs {
    #[arg(long, conflicts_with_all = ["nodes", "sigma"], required_unless_present = "nodes")]
    trie: Option<PathBuf>,
    #[arg(long, requires = "sigma")]
    nodes: Option<usize>,
    #[arg(long, requires = "nodes")]
    sigma: Option<usize>,
}

#[derive(Args, Serialize)]
struct WorkerArgs {
    /// Scan threads [default: available cores]
    #[arg(long, env = "HEPFAC_WORKERS")]
    workers: Option<usize>,
    /// Starting positions per work unit.
    #[arg(long, default_value_t = ScanConfig::DEFAULT_CHUNK)]
    chunk: usize,
}

impl WorkerArgs {
    fn resolve(&mut self) -> Result<()> {
        let workers = *self.workers.get_or_insert_with(|| ScanConfig::default().workers);
        ScanConfig::new(workers, self.chunk)?;
        Ok(())
    }

    fn config(&self) -> ScanConfig {
        ScanConfig::new(self.workers.expect("resolved"), self.chunk).expect("validated")
    }
}

#[derive(Args, Serialize)]
struct MatchArgs {
    #[arg(long)]
    trie: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    scan: WorkerArgs,
    /// Write match lines here instead of stdout.
    #[arg(long)]
    matches: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct PrefixArgs {
    #[arg(long, value_delimiter = ',', default_value = "4,8,12,16,20,24,28,32,36,40,44,48,52")]
    sigmas: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    patterns: usize,
    #[arg(long, default_value_t = 20)]
    len: usize,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "figure", rename_all = "kebab-case")]
enum BenchCommand {
    /// Prefix depth against alphabet size.
    Figure3(PrefixArgs),
    /// Trie sizes over 4 symbols.
    Figure4(SizeArgs),
    /// Trie sizes over 52 symbols.
    Figure5(SizeArgs),
    /// Throughput over small alphabets.
    Figure6(ScalingArgs),
    /// Throughput over large alphabets.
    Figure7(ScalingArgs),
    /// Single worker against all workers at two corpus sizes.
    Figure8(SpeedupArgs),
    /// Full, reduced, and prefix-truncated trie sizes.
    PrefixTrie(PrefixTrieArgs),
}

#[derive(Args, Serialize)]
struct SizeArgs {
    /// [default: 4 for figure4, 52 for figure5]
    #[arg(long)]
    sigma: Option<usize>,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "10,20,50,100,200,500,1000,2000,5000,10000"
    )]
    counts: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    len: usize,
    #[arg(long, default_value_t = 1)]
    seed: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ScalingArgs {
    /// [default: 4..52 step 4 for figure6, 52..256 for figure7]
    #[arg(long, value_delimiter = ',')]
    sigmas: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', default_value = "1,10,100,1000")]
    counts: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    len: usize,
    /// Corpus bytes [default: 1048576]
    #[arg(long, conflicts_with = "paper_scale")]
    bytes: Option<usize>,
    /// 100 MiB corpus.
    #[arg(long)]
    paper_scale: bool,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[command(flatten)]
    scan: WorkerArgs,
    #[arg(long, default_value_t = 1)]
    seed: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SpeedupArgs {
    #[arg(long, default_value_t = 52)]
    sigma: usize,
    #[arg(long, default_value_t = 100)]
    patterns: usize,
    #[arg(long, default_value_t = 20)]
    len: usize,
    /// Corpus sizes in bytes [default: 1 MiB and 2 MiB]
    #[arg(long, value_delimiter = ',', conflicts_with = "paper_scale")]
    sizes: Option<Vec<usize>>,
    /// 100 MiB and 200 MiB corpora.
    #[arg(long)]
    paper_scale: bool,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[command(flatten)]
    scan: WorkerArgs,
    #[arg(long, default_value_t = 1)]
    seed: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct PrefixTrieArgs {
    #[arg(long, default_value_t = 52)]
    sigma: usize,
    #[arg(long, value_delimiter = ',', default_value = "10,100")]
    counts: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    len: usize,
    #[arg(long, default_value_t = 1)]
    seed: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let mut cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.render().to_string();
            eprintln!(
                "error: {}",
                text.lines()
                    .next()
                    .unwrap_or("invalid arguments")
                    .trim_start_matches("error: ")
            );
            return ExitCode::from(1);
        }
    };
    if let Err(e) = cli.command.resolve() {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    eprintln!("config: {}", serde_json::to_string(&cli).expect("plain config"));
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

impl Command {
    /// Fills in defaults that depend on the host or the subcommand so the
    /// echoed config is the one actually used.
    fn resolve(&mut self) -> Result<()> {
        match self {
            Command::Gen(a) => {
                a.bytes = Some(if a.paper_scale {
                    100 * MIB
                } else {
                    a.bytes.unwrap_or(MIB)
                });
            }
            Command::Match(a) => a.scan.resolve()?,
            Command::Bench(BenchCommand::Figure4(a)) => {
                a.sigma.get_or_insert(4);
            }
            Command::Bench(BenchCommand::Figure5(a)) => {
                a.sigma.get_or_insert(52);
            }
            Command::Bench(BenchCommand::Figure6(a)) => a.resolve(&(1..=13).map(|k| 4 * k).collect::<Vec<_>>())?,
            Command::Bench(BenchCommand::Figure7(a)) => a.resolve(&[52, 64, 96, 128, 160, 192, 224, 256])?,
            Command::Bench(BenchCommand::Figure8(a)) => {
                a.scan.resolve()?;
                let sizes = if a.paper_scale {
                    vec![100 * MIB, 200 * MIB]
                } else {
                    vec![MIB, 2 * MIB]
                };
                a.sizes.get_or_insert(sizes);
            }
            _ => {}
        }
        Ok(())
    }
}

impl ScalingArgs {
    fn resolve(&mut self, default_sigmas: &[usize]) -> Result<()> {
        self.scan.resolve()?;
        self.sigmas.get_or_insert_with(|| default_sigmas.to_vec());
        self.bytes = Some(if self.paper_scale {
            100 * MIB
        } else {
            self.bytes.unwrap_or(MIB)
        });
        Ok(())
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let io = err.chain().any(|cause| {
        cause.is::<io::Error>() || matches!(cause.downcast_ref::<hepfac::Error>(), Some(hepfac::Error::Io(_)))
    });
    if io {
        2
    } else {
        1
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Gen(args) => gen(args),
        Command::Build(args) => build(args),
        Command::Compress(args) => compress_cmd(args),
        Command::Stats(args) => stats(args),
        Command::Match(args) => match_cmd(args),
        Command::Prefix(args) => prefix(&args, "prefix"),
        Command::Bench(b) => match b {
            BenchCommand::Figure3(args) => prefix(&args, "figure3"),
            BenchCommand::Figure4(args) => trie_sizes(args, "figure4"),
            BenchCommand::Figure5(args) => trie_sizes(args, "figure5"),
            BenchCommand::Figure6(args) => scaling(args, "figure6"),
            BenchCommand::Figure7(args) => scaling(args, "figure7"),
            BenchCommand::Figure8(args) => speedup(args),
            BenchCommand::PrefixTrie(args) => prefix_trie(args),
        },
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn load_trie(path: &Path) -> Result<Trie> {
    Trie::from_bytes(&read(path)?).with_context(|| format!("loading trie {}", path.display()))
}

/// Writes `text` to `out`, or to stdout when there is no path.
fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write(path, text.as_bytes()),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn config_header<T: Serialize>(name: &str, args: &T) -> String {
    format!("# {name} {}\n", serde_json::to_string(args).expect("plain config"))
}

fn summary(value: serde_json::Value) {
    eprintln!("summary: {value}");
}

fn gen(args: GenArgs) -> Result<()> {
    let bytes = args.bytes.expect("resolved");
    if args.files == 0 {
        bail!("--files must be at least 1");
    }
    let set = gen_patterns(args.seed, args.sigma, args.patterns, args.len)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let pattern_path = args.out.join("patterns.txt");
    let mut pattern_bytes = Vec::new();
    write_patterns(&set, &mut pattern_bytes)?;
    write(&pattern_path, &pattern_bytes)?;

    let mut corpora = Vec::with_capacity(args.files);
    for i in 1..=args.files as u32 {
        let seed = args.seed.wrapping_add(i);
        let mut text = gen_corpus(seed, args.sigma, bytes)?;
        if args.plant > 0 {
            plant(&mut text, &set, args.plant, seed.wrapping_add(args.files as u32));
        }
        let file = format!("corpus_{i}.bin");
        write(&args.out.join(&file), &text)?;
        corpora.push(DatasetManifest {
            file,
            seed,
            sigma: args.sigma,
            bytes,
            sha256: dataset_digest(&text),
        });
    }
    let mut digests: Vec<&str> = corpora.iter().map(|c| c.sha256.as_str()).collect();
    digests.sort_unstable();
    digests.dedup();
    if digests.len() != corpora.len() {
        bail!("generated corpus files are not pairwise distinct");
    }
    let manifest = serde_json::json!({
        "patterns": {
            "file": "patterns.txt",
            "seed": args.seed,
            "sigma": args.sigma,
            "count": args.patterns,
            "length": args.len,
            "sha256": dataset_digest(&pattern_bytes),
        },
        "planted_per_file": args.plant,
        "corpora": corpora,
    });
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    write(&args.out.join("manifest.json"), text.as_bytes())?;
    print!("{text}");
    Ok(())
}

fn build(args: BuildArgs) -> Result<()> {
    let file = File::open(&args.patterns).with_context(|| format!("reading {}", args.patterns.display()))?;
    let patterns =
        read_patterns(BufReader::new(file)).with_context(|| format!("reading {}", args.patterns.display()))?;
    let set = PatternSet::new(patterns, Alphabet::standard(args.sigma)?)?;
    let mut trie = set.build_trie()?;
    if let Some(depth) = args.depth {
        trie = truncate(&trie, depth)?.trie;
    }
    write_trie(&trie, &args.out)?;
    let report = serde_json::json!({
        "patterns": set.len(),
        "stage": trie.stage(),
        "depth_limit": trie.depth_limit(),
        "memory": trie.memory_report(),
        "mib": trie.memory_report().mib_display(),
    });
    println!("{report}");
    Ok(())
}

fn write_trie(trie: &Trie, path: &Path) -> Result<()> {
    let file = File::create(path).with_context(|| format!("writing {}", path.display()))?;
    trie.write_to(BufWriter::new(file))
        .with_context(|| format!("writing {}", path.display()))
}

fn compress_cmd(args: CompressArgs) -> Result<()> {
    let trie = load_trie(&args.trie)?;
    let (out, stats) = if args.stage == 1 {
        merge_final_nodes(&trie)?
    } else {
        compress(&trie)?
    };
    write_trie(&out, &args.out)?;
    println!("{}", stats.to_json());
    Ok(())
}

fn stats(args: StatsArgs) -> Result<()> {
    let (nodes, sigma) = match (&args.trie, args.nodes, args.sigma) {
        (Some(path), _, _) => {
            let trie = load_trie(path)?;
            (trie.node_count(), trie.alphabet().size())
        }
        (None, Some(n), Some(s)) => (n, s),
        _ => bail!("pass --trie or both --nodes and --sigma"),
    };
    println!("{}", compare_footprint(nodes, sigma)?.to_json());
    Ok(())
}

fn match_cmd(args: MatchArgs) -> Result<()> {
    let config = args.scan.config();
    let trie = load_trie(&args.trie)?;
    let text = read(&args.input)?;
    let start = std::time::Instant::now();
    let found = match trie.depth_limit() {
        Some(_) => scan_two_stage(&trie, &text, &config)?,
        None => hepfac::scan(&trie, &text, &config),
    };
    let seconds = start.elapsed().as_secs_f64();

    let mut lines = String::with_capacity(found.len() * 16);
    for m in &found {
        lines.push_str(&format!("{}\t{}\t{}\n", m.start, m.length, m.pattern_id));
    }
    emit(args.matches.as_deref(), &lines)?;
    let report = serde_json::json!({
        "bytes": text.len(),
        "matches": found.len(),
        "workers": config.workers,
        "depth_limit": trie.depth_limit(),
        "stage": trie.stage(),
        "seconds": seconds,
        "gbps": if text.is_empty() { 0.0 } else { bench::gbps(text.len(), seconds) },
    });
    match args.matches {
        Some(_) => println!("{report}"),
        None => summary(report),
    }
    Ok(())
}

fn prefix(args: &PrefixArgs, name: &str) -> Result<()> {
    let rows = analyze_prefix_vs_alphabet(&args.sigmas, args.patterns, args.len, args.trials, args.seed)?;
    let csv = config_header(name, args) + &analysis_csv(&rows);
    emit(args.out.as_deref(), &csv)?;
    summary(serde_json::to_value(&rows)?);
    Ok(())
}

fn trie_sizes(args: SizeArgs, name: &str) -> Result<()> {
    let sigma = args.sigma.expect("resolved");
    let curve = run_trie_size_curve(sigma, &args.counts, args.len, args.seed)?;
    emit(args.out.as_deref(), &(config_header(name, &args) + &curve.to_csv()))?;
    summary(serde_json::json!({ "mean_reduction_percent": curve.mean_reduction_percent() }));
    checked(curve.check())
}

fn checked(problems: Vec<String>) -> Result<()> {
    if problems.is_empty() {
        Ok(())
    } else {
        bail!("consistency check failed: {}", problems.join("; "))
    }
}

fn scaling(args: ScalingArgs, name: &str) -> Result<()> {
    let config = args.scan.config();
    let sigmas = args.sigmas.as_deref().expect("resolved");
    let bytes = args.bytes.expect("resolved");
    let table = run_scaling(sigmas, &args.counts, args.len, bytes, args.seed, &config, args.runs)?;
    emit(args.out.as_deref(), &(config_header(name, &args) + &table.to_csv()))?;
    summary(serde_json::json!({ "cells": table.rows.len(), "workers": config.workers }));
    checked(table.check())
}

#[derive(Serialize)]
struct SpeedupRow {
    corpus_bytes: usize,
    workers: usize,
    matches: usize,
    seconds: f64,
    gbps: f64,
}

fn speedup(args: SpeedupArgs) -> Result<()> {
    let all = args.scan.config();
    let sizes = args.sizes.as_deref().expect("resolved");
    let set = gen_patterns(args.seed, args.sigma, args.patterns, args.len)?;
    let (trie, _) = bench::scan_trie(&set.build_trie()?)?;
    let single = ScanConfig::new(1, all.chunk)?;
    let mut rows = Vec::new();
    let mut problems = Vec::new();
    for &size in sizes {
        let text = gen_corpus(args.seed.wrapping_add(1), args.sigma, size)?;
        let a = run_throughput(&trie, &text, &single, args.runs)?;
        let b = run_throughput(&trie, &text, &all, args.runs)?;
        if a.matches != b.matches {
            problems.push(format!("{size} bytes: match counts differ across worker counts"));
        }
        for r in [a, b] {
            rows.push(SpeedupRow {
                corpus_bytes: size,
                workers: r.workers,
                matches: r.matches,
                seconds: r.seconds,
                gbps: r.gbps,
            });
        }
    }
    let mut csv = config_header("figure8", &args) + "corpus_bytes,workers,matches,seconds,gbps\n";
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{:.6},{:.4}\n",
            r.corpus_bytes, r.workers, r.matches, r.seconds, r.gbps
        ));
    }
    emit(args.out.as_deref(), &csv)?;
    summary(serde_json::to_value(&rows)?);
    checked(problems)
}

fn prefix_trie(args: PrefixTrieArgs) -> Result<()> {
    let mut csv = config_header("prefix-trie", &args) + "patterns,depth,bitmapped_bytes,reduced_bytes,prefix_bytes\n";
    for &n in &args.counts {
        let set = gen_patterns(args.seed, args.sigma, n, args.len)?;
        let trie = set.build_trie()?;
        let (reduced, _) = compress(&trie)?;
        let depth = choose_depth(trie.dictionary(), args.sigma);
        let cut = truncate(&merge_final_nodes(&trie)?.0, depth)?.trie;
        csv.push_str(&format!(
            "{n},{depth},{},{},{}\n",
            trie.memory_report().total_bytes,
            reduced.memory_report().total_bytes,
            cut.memory_report().total_bytes
        ));
    }
    emit(args.out.as_deref(), &csv)
}
