use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use codec_core::context::{
    extract_context, parse_source, print_source, read_jsonl, records_from_units, write_jsonl, ClassUnit,
    ContextBundle, CorpusRecord,
};
use codec_core::eval::{gen_synthetic_corpus, is_eligible, jaccard_top_k, make_tasks, run_eval};
use codec_core::index::{build_index_from_records, save_index, shard, Index, IndexShard};
use codec_core::model::{dataset_from_records, encode_evidence, load_checkpoint, save_checkpoint, train, ModelParams};
use codec_core::search::{
    bench_scan, search, search_gaussian, search_mc_prepared, with_threads, BenchOptions, McCorpus, SearchResult,
};
use codec_core::sketch::{parse_sketch, serialize_sketch};
use serde::Serialize;

use crate::{
    BenchArgs, ColorMode, Command, Common, EvalArgs, Format, GenArgs, IndexArgs, IngestArgs, OracleArgs, RunConfig,
    ScanArgs, SearchArgs, StatsArgs, TrainArgs, UsageError,
};

type Overrides = Vec<(&'static str, Option<String>)>;

fn opt<T: ToString>(v: &Option<T>) -> Option<String> {
    v.as_ref().map(ToString::to_string)
}

fn path(v: &Option<PathBuf>) -> Option<String> {
    v.as_ref().map(|p| p.display().to_string())
}

/// Config file, then `--seed`, then command flags; validated before use.
fn resolve(common: &Common, overrides: Overrides) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    for (key, v) in overrides {
        if let Some(v) = v {
            cfg.set(key, &v)?;
        }
    }
    cfg.validate()?;
    if let Some(out) = &common.save_config {
        std::fs::write(out, cfg.to_text()).with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(cfg)
}

fn scan_overrides(s: &ScanArgs) -> Overrides {
    vec![
        ("index", path(&s.index)),
        ("checkpoint", path(&s.checkpoint)),
        ("shards", opt(&s.shards)),
        ("threads", opt(&s.threads)),
    ]
}

fn cores() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

pub(crate) fn dispatch(cmd: Command, color: ColorMode) -> Result<()> {
    match cmd {
        Command::Ingest(a) => ingest(a),
        Command::Train(a) => train_cmd(a),
        Command::Index(a) => index(a),
        Command::Search(a) => search_cmd(a, color),
        Command::Eval(a) => eval(a),
        Command::OracleCheck(a) => oracle_check(a),
        Command::Bench(a) => bench(a),
        Command::Stats(a) => stats(a, color),
        Command::GenSynthetic(a) => gen_synthetic(a),
    }
}

fn mj_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let p = e?.path();
        if p.extension().is_some_and(|x| x == "mj") {
            out.push(p);
        }
    }
    out.sort();
    if out.is_empty() {
        bail!(UsageError(format!("no .mj files in {}", dir.display())));
    }
    Ok(out)
}

/// Classes from a .mj file or every .mj file of a directory, in path order.
fn read_units(p: &Path) -> Result<Vec<ClassUnit>> {
    let files = if p.is_dir() { mj_files(p)? } else { vec![p.to_path_buf()] };
    let mut units = Vec::new();
    for f in files {
        let text = std::fs::read_to_string(&f).with_context(|| format!("reading {}", f.display()))?;
        units.extend(parse_source(&text).with_context(|| format!("parsing {}", f.display()))?);
    }
    Ok(units)
}

fn read_records(p: &Path) -> Result<Vec<CorpusRecord>> {
    let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
    read_jsonl(BufReader::new(f)).with_context(|| format!("reading {}", p.display()))
}

fn create(p: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?))
}

/// Writes to `out`, or stdout when `None`.
fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut s = std::io::stdout().lock();
            s.write_all(text.as_bytes())?;
            s.flush()?;
            Ok(())
        }
    }
}

fn ingest(a: IngestArgs) -> Result<()> {
    resolve(&a.common, vec![])?;
    let is_jsonl = a.input.is_file() && a.input.extension().is_some_and(|x| x == "jsonl");
    let records = if is_jsonl {
        let mut recs = read_records(&a.input)?;
        for r in &mut recs {
            r.sketch = serialize_sketch(&parse_sketch(&r.sketch).with_context(|| format!("record {}", r.id))?);
        }
        recs
    } else {
        records_from_units(&read_units(&a.input)?, a.first_id, a.with_body)?
    };
    let mut buf = Vec::new();
    write_jsonl(&records, &mut buf)?;
    emit(a.out.as_deref(), std::str::from_utf8(&buf)?)?;
    eprintln!("ingested {} records", records.len());
    Ok(())
}

fn train_cmd(a: TrainArgs) -> Result<()> {
    let cfg = resolve(
        &a.common,
        vec![
            ("corpus", path(&a.corpus)),
            ("checkpoint", path(&a.checkpoint)),
            ("latent_dim", opt(&a.latent_dim)),
            ("learning_rate", opt(&a.learning_rate)),
            ("steps", opt(&a.steps)),
            ("batch_size", opt(&a.batch_size)),
            ("z_samples", opt(&a.z_samples)),
            ("optimizer", a.optimizer.clone()),
            ("clip_norm", opt(&a.clip_norm)),
            ("threads", opt(&a.threads)),
        ],
    )?;
    let corpus = cfg.require("corpus")?;
    let out = cfg.require("checkpoint")?;
    let data = dataset_from_records(&read_records(&corpus)?)?;
    let tc = cfg.train_config();
    let outcome = with_threads(cfg.threads_or(1), || train(&data, &tc))??;

    let every = a.log_every.max(1);
    let last = outcome.trace.len().saturating_sub(1);
    for (i, v) in outcome.trace.iter().enumerate() {
        if i % every == 0 || i == last {
            eprintln!("step {i:>6}  objective {v:.6}");
        }
    }
    if let Some(m) = &a.metrics {
        let mut w = create(m)?;
        writeln!(w, "step,objective")?;
        for (i, v) in outcome.trace.iter().enumerate() {
            writeln!(w, "{i},{v:?}")?;
        }
        w.flush()?;
    }
    save_checkpoint(&outcome.params, &out)?;
    eprintln!("trained on {} examples, wrote {}", data.len(), out.display());
    Ok(())
}

fn index(a: IndexArgs) -> Result<()> {
    let cfg = resolve(
        &a.common,
        vec![
            ("corpus", path(&a.corpus)),
            ("checkpoint", path(&a.checkpoint)),
            ("index", path(&a.index)),
            ("index_mc_samples", opt(&a.mc_samples)),
            ("threads", opt(&a.threads)),
        ],
    )?;
    let records = read_records(&cfg.require("corpus")?)?;
    let p = load_checkpoint(cfg.require("checkpoint")?)?;
    let out = cfg.require("index")?;
    let entries = with_threads(cfg.threads_or(cores()), || {
        build_index_from_records(&p, &records, cfg.index_mc_samples, cfg.seed)
    })??;
    save_index(&entries, &out)?;
    let s = Index::open(&out)?.stats();
    eprintln!("indexed {} entries (d = {}) into {}, sha256 {}", s.count, s.d, out.display(), s.checksum);
    Ok(())
}

struct Scan {
    shards: Vec<IndexShard>,
    params: ModelParams,
    threads: usize,
}

fn open_scan(cfg: &RunConfig) -> Result<Scan> {
    let idx = Index::open(cfg.require("index")?)?;
    let params = load_checkpoint(cfg.require("checkpoint")?)?;
    if idx.d() != params.d() {
        bail!(codec_core::Error::DimensionMismatch {
            expected: params.d(),
            got: idx.d(),
        });
    }
    let threads = cfg.threads_or(cores());
    Ok(Scan {
        shards: shard(&idx, cfg.shards_for(threads))?,
        params,
        threads,
    })
}

/// The context of the single hole in `path`.
fn hole_query(path: &Path) -> Result<ContextBundle> {
    let units = read_units(path)?;
    let holes: Vec<(usize, usize)> = units
        .iter()
        .enumerate()
        .flat_map(|(u, c)| c.methods.iter().enumerate().filter(|(_, m)| m.is_hole()).map(move |(i, _)| (u, i)))
        .collect();
    if holes.len() != 1 {
        return Err(codec_core::Error::AmbiguousQuery(holes.len())).with_context(|| path.display().to_string());
    }
    let (u, m) = holes[0];
    Ok(extract_context(&units[u], m)?)
}

/// Classes with one hole are used as they are; hole-free classes yield
/// sampled tasks (`n = 0` takes every eligible class).
fn load_queries(path: &Path, n: usize, seed: u64) -> Result<Vec<(String, ContextBundle)>> {
    let mut queries = Vec::new();
    let mut pool = Vec::new();
    for u in read_units(path)? {
        let holes: Vec<usize> = (0..u.methods.len()).filter(|&i| u.methods[i].is_hole()).collect();
        match holes.len() {
            0 => pool.push(u),
            1 => queries.push((u.name.clone(), extract_context(&u, holes[0])?)),
            k => return Err(codec_core::Error::AmbiguousQuery(k)).with_context(|| u.name.clone()),
        }
    }
    let eligible = pool.iter().filter(|u| is_eligible(u)).count();
    let n = if n == 0 { eligible } else { n };
    if n > 0 {
        for t in make_tasks(&pool, n, seed)? {
            let name = format!(
                "{}.{}",
                pool[t.class_index].name,
                t.truth_method.name.as_deref().unwrap_or("?")
            );
            queries.push((name, t.query));
        }
    }
    if queries.is_empty() {
        bail!(UsageError(format!("no queries in {}", path.display())));
    }
    Ok(queries)
}

/// Signature line of a result, for the table view.
fn headline(r: &SearchResult) -> String {
    let line = r
        .source_text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with("/*") && !l.starts_with('*'))
        .unwrap_or_else(|| r.sketch_text.lines().next().unwrap_or(""));
    let line = line.trim_end_matches('{').trim_end();
    if line.chars().count() > 72 {
        format!("{}...", line.chars().take(69).collect::<String>())
    } else {
        line.to_owned()
    }
}

fn search_cmd(a: SearchArgs, color: ColorMode) -> Result<()> {
    let mut ov = scan_overrides(&a.scan);
    ov.push(("k", opt(&a.k)));
    let cfg = resolve(&a.common, ov)?;
    let query = hole_query(&a.query)?;
    let scan = open_scan(&cfg)?;
    let out = with_threads(scan.threads, || search(&scan.shards, &scan.params, &query, cfg.k))??;
    for e in &out.excluded {
        eprintln!("excluded entry {}: {}", e.id, e.reason);
    }
    let mut text = String::new();
    match a.format {
        Format::Json => {
            for r in &out.results {
                text.push_str(&serde_json::to_string(r)?);
                text.push('\n');
            }
        }
        Format::Table => {
            text.push_str(&color.bold(&format!("{:>4}  {:>14}  {:>8}  {}", "rank", "score", "id", "method")));
            text.push('\n');
            for r in &out.results {
                text.push_str(&format!("{:>4}  {:>14.4}  {:>8}  {}\n", r.rank, r.score, r.id, headline(r)));
            }
        }
    }
    emit(None, &text)
}

fn eval(a: EvalArgs) -> Result<()> {
    let mut ov = scan_overrides(&a.scan);
    ov.extend([("queries", path(&a.queries)), ("tasks", opt(&a.tasks)), ("depth", opt(&a.depth))]);
    let cfg = resolve(&a.common, ov)?;
    let units = read_units(&cfg.require("queries")?)?;
    let n = match cfg.tasks {
        0 => units.iter().filter(|u| is_eligible(u)).count(),
        n => n,
    };
    let tasks = make_tasks(&units, n, cfg.seed)?;
    let scan = open_scan(&cfg)?;
    let report = with_threads(scan.threads, || run_eval(&scan.shards, &scan.params, &tasks, cfg.depth))??;
    if let Some(c) = &a.csv {
        emit(Some(c), &report.to_csv())?;
    }
    emit(a.json.as_deref(), &report.to_json()?)
}

#[derive(Serialize)]
struct OracleRow {
    query: String,
    jaccard: f64,
    /// Ids in both top lists.
    common: usize,
    mean_abs_delta: f64,
    max_abs_delta: f64,
}

#[derive(Serialize)]
struct OracleReport {
    mc_samples: usize,
    depth: usize,
    seed: u64,
    mean_jaccard: f64,
    min_jaccard: f64,
    queries: Vec<OracleRow>,
}

fn oracle_check(a: OracleArgs) -> Result<()> {
    let mut ov = scan_overrides(&a.scan);
    ov.extend([
        ("queries", path(&a.queries)),
        ("tasks", opt(&a.tasks)),
        ("oracle_mc_samples", opt(&a.mc_samples)),
        ("depth", opt(&a.depth)),
    ]);
    let cfg = resolve(&a.common, ov)?;
    let queries = load_queries(&cfg.require("queries")?, cfg.tasks, cfg.seed)?;
    let scan = open_scan(&cfg)?;
    let (n, depth) = (cfg.oracle_mc_samples, cfg.depth);
    let rows = with_threads(scan.threads, || -> Result<Vec<OracleRow>> {
        let mc = McCorpus::prepare(&scan.shards, &scan.params)?;
        let mut rows = Vec::new();
        for (name, x) in &queries {
            let gx = encode_evidence(&scan.params, x);
            let exact = search_gaussian(&scan.shards, &gx, depth)?.results;
            let sampled = search_mc_prepared(&scan.shards, &mc, &scan.params, &gx, depth, n, cfg.seed)?.results;
            let deltas: Vec<f64> = exact
                .iter()
                .filter_map(|e| sampled.iter().find(|s| s.id == e.id).map(|s| (e.score - s.score).abs()))
                .collect();
            rows.push(OracleRow {
                query: name.clone(),
                jaccard: jaccard_top_k(&exact, &sampled, depth)?,
                common: deltas.len(),
                mean_abs_delta: deltas.iter().sum::<f64>() / deltas.len().max(1) as f64,
                max_abs_delta: deltas.iter().copied().fold(0.0, f64::max),
            });
        }
        Ok(rows)
    })??;
    let js: Vec<f64> = rows.iter().map(|r| r.jaccard).collect();
    let report = OracleReport {
        mc_samples: n,
        depth,
        seed: cfg.seed,
        mean_jaccard: js.iter().sum::<f64>() / js.len() as f64,
        min_jaccard: js.iter().copied().fold(f64::INFINITY, f64::min),
        queries: rows,
    };
    emit(None, &(serde_json::to_string_pretty(&report)? + "\n"))
}

fn bench(a: BenchArgs) -> Result<()> {
    let mut ov = scan_overrides(&a.scan);
    ov.extend([
        ("queries", path(&a.queries)),
        ("oracle_mc_samples", opt(&a.mc_samples)),
        ("k", opt(&a.k)),
    ]);
    let cfg = resolve(&a.common, ov)?;
    let (_, query) = load_queries(&cfg.require("queries")?, 0, cfg.seed)?.swap_remove(0);
    let scan = open_scan(&cfg)?;
    let opts = BenchOptions {
        repeats: a.repeats.max(1),
        k: cfg.k,
        mc_samples: cfg.oracle_mc_samples,
        mc_entries: a.mc_entries.max(1),
        seed: cfg.seed,
    };
    let report = with_threads(scan.threads, || bench_scan(&scan.shards, &scan.params, &query, &opts))??;
    emit(None, &(serde_json::to_string_pretty(&report)? + "\n"))
}

fn stats(a: StatsArgs, color: ColorMode) -> Result<()> {
    let cfg = resolve(&a.common, vec![("index", path(&a.index))])?;
    let s = Index::open(cfg.require("index")?)?.stats();
    let text = match a.format {
        Format::Json => serde_json::to_string(&s)? + "\n",
        Format::Table => format!(
            "{} {}\n{} {}\n{} {}\n{} {}\n",
            color.bold("count   "),
            s.count,
            color.bold("d       "),
            s.d,
            color.bold("bytes   "),
            s.bytes,
            color.bold("checksum"),
            s.checksum
        ),
    };
    emit(None, &text)
}

fn gen_synthetic(a: GenArgs) -> Result<()> {
    let cfg = resolve(&a.common, vec![])?;
    let c = gen_synthetic_corpus(a.families, a.per_family, a.noise, cfg.seed)?;
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    emit(Some(&a.out.join("train.mj")), &print_source(&c.classes))?;
    emit(Some(&a.out.join("held_out.mj")), &print_source(&c.held_out))?;
    eprintln!(
        "wrote {} training and {} held-out classes to {}",
        c.classes.len(),
        c.held_out.len(),
        a.out.display()
    );
    Ok(())
}
