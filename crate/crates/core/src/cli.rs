//! The `subseq` command line: `build`, `query`, `bench` and `selftest`.
//!
//! Exit codes: 0 success, 1 query without results, 2 validation failure, 3 I/O or parse error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::baselines::{compare_pruning, space_matched_k, write_pruning_csv, BaselineError, MvIndex};
use crate::distance::{
    check_consistency, check_metric_axioms, search_triangle_violation, DistanceError, DistanceKind, DistanceSpec,
    Violation,
};
use crate::matching::{
    brute_force_oracle, build_index, candidate_pairs, dataset_windows, query_type1, query_type2, query_type3,
    write_pairs_csv, MatchError, OracleAnswer, OracleQuery, SubseqIndex, SubsequencePair, Type3Options,
    PAIRS_CSV_HEADER,
};
use crate::refnet::{NetConfig, NetError, ObjectId, ReferenceNet};
use crate::segment::{SegmentationError, SegmentationParams};
use crate::sequence::{
    parse_string_dataset, parse_timeseries_dataset, Alphabet, Dataset, Element, Point, Sequence, SequenceError,
};
use crate::synth::{random_elements, random_excerpt, random_strings};

const INDEX_HEADER: &str = "subseq-index 1";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: SequenceError },
    #[error("{0}")]
    Config(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Index { path: PathBuf, source: NetError },
    #[error("{path} line {line}: {message}")]
    IndexFormat { path: PathBuf, line: usize, message: String },
    #[error("request does not match the index: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("selftest failed: {0} check(s)")]
    SelftestFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Config(_) | CliError::IndexFormat { .. } => 3,
            CliError::Csv(_) => 3,
            CliError::Index { source, .. } => match source {
                NetError::Format { .. } | NetError::Io(_) => 3,
                _ => 2,
            },
            _ => 2,
        }
    }
}

impl From<SegmentationError> for CliError {
    fn from(e: SegmentationError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<NetError> for CliError {
    fn from(e: NetError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<DistanceError> for CliError {
    fn from(e: DistanceError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// How a dataset file is laid out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DataFormat {
    Strings,
    Series(usize),
}

impl DataFormat {
    pub fn alphabet(self) -> Alphabet {
        match self {
            DataFormat::Strings => Alphabet::Symbols,
            DataFormat::Series(d) => Alphabet::Vectors(d as u8),
        }
    }

    fn describe(self) -> String {
        match self {
            DataFormat::Strings => "strings".into(),
            DataFormat::Series(d) => format!("series {d}"),
        }
    }

    fn parse_described(s: &str) -> Option<Self> {
        match s.split_once(' ') {
            None if s == "strings" => Some(DataFormat::Strings),
            Some(("series", d)) => d.parse().ok().map(DataFormat::Series),
            _ => None,
        }
    }
}

pub fn load_dataset(path: &Path, format: DataFormat) -> Result<Dataset, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_dataset(&text, format).map_err(|source| CliError::Parse { path: path.to_path_buf(), source })
}

fn parse_dataset(text: &str, format: DataFormat) -> Result<Dataset, SequenceError> {
    match format {
        DataFormat::Strings => parse_string_dataset(text),
        DataFormat::Series(d) => parse_timeseries_dataset(text, d),
    }
}

/// Settings gathered from a key=value file and command-line flags; flags win.
#[derive(Args, Clone, Debug, Default)]
pub struct ConfigArgs {
    /// key=value file with any of the settings below (keys use underscores)
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// `strings` (FASTA or one per line) or `series` (id,v1[,v2[,v3]] rows)
    #[arg(long)]
    pub format: Option<String>,
    /// Coordinates per element for `series`
    #[arg(long)]
    pub dims: Option<usize>,
    /// euclidean, hamming, levenshtein, erp, dfd or dtw
    #[arg(long)]
    pub distance: Option<String>,
    /// ERP gap element: one character, or comma-separated coordinates
    #[arg(long)]
    pub gap: Option<String>,
    #[arg(long)]
    pub lambda: Option<usize>,
    #[arg(long)]
    pub lambda0: Option<usize>,
    #[arg(long)]
    pub base_radius: Option<f64>,
    /// Parent cap, or `unlimited`
    #[arg(long)]
    pub num_max: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

impl ConfigArgs {
    /// Merges the config file (if any) under the flags.
    fn merged(&self) -> Result<ConfigArgs, CliError> {
        let Some(path) = &self.config else {
            return Ok(self.clone());
        };
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let mut file = ConfigArgs::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |m: &str| CliError::Config(format!("{} line {}: {m}", path.display(), i + 1));
            let (k, v) = line.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            let (k, v) = (k.trim(), v.trim().to_string());
            let num = |v: &str| v.parse::<usize>().map_err(|_| bad("expected a non-negative integer"));
            match k {
                "dataset" => file.dataset = Some(PathBuf::from(v)),
                "format" => file.format = Some(v),
                "dims" => file.dims = Some(num(&v)?),
                "distance" => file.distance = Some(v),
                "gap" => file.gap = Some(v),
                "lambda" => file.lambda = Some(num(&v)?),
                "lambda0" => file.lambda0 = Some(num(&v)?),
                "base_radius" => file.base_radius = Some(v.parse().map_err(|_| bad("expected a number"))?),
                "num_max" => file.num_max = Some(v),
                "seed" => file.seed = Some(v.parse().map_err(|_| bad("expected an integer"))?),
                "out_dir" => file.out_dir = Some(PathBuf::from(v)),
                _ => return Err(bad(&format!("unknown key {k:?}"))),
            }
        }
        Ok(ConfigArgs {
            config: None,
            dataset: self.dataset.clone().or(file.dataset),
            format: self.format.clone().or(file.format),
            dims: self.dims.or(file.dims),
            distance: self.distance.clone().or(file.distance),
            gap: self.gap.clone().or(file.gap),
            lambda: self.lambda.or(file.lambda),
            lambda0: self.lambda0.or(file.lambda0),
            base_radius: self.base_radius.or(file.base_radius),
            num_max: self.num_max.clone().or(file.num_max),
            seed: self.seed.or(file.seed),
            out_dir: self.out_dir.clone().or(file.out_dir),
        })
    }
}

/// Fully resolved and validated settings.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub dataset: Option<PathBuf>,
    pub format: DataFormat,
    pub distance: DistanceSpec,
    pub params: SegmentationParams,
    pub net: NetConfig,
    pub seed: u64,
    pub out_dir: PathBuf,
}

fn parse_gap(s: &str, alphabet: Alphabet) -> Result<Element, CliError> {
    let bad = || CliError::Config(format!("bad gap element {s:?} for {alphabet}"));
    match alphabet {
        Alphabet::Symbols => {
            let mut chars = s.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => Ok(Element::Symbol(c)),
                _ => Err(bad()),
            }
        }
        Alphabet::Vectors(d) => {
            let coords: Vec<f64> = s.split(',').map(|c| c.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
            if coords.len() != d as usize {
                return Err(bad());
            }
            Point::new(&coords).map(Element::Vector).map_err(|_| bad())
        }
    }
}

impl RunConfig {
    pub fn resolve(args: &ConfigArgs) -> Result<RunConfig, CliError> {
        let a = args.merged()?;
        let format = match a.format.as_deref().unwrap_or("strings") {
            "strings" => DataFormat::Strings,
            "series" => DataFormat::Series(a.dims.unwrap_or(1)),
            other => return Err(CliError::Config(format!("unknown format {other:?}"))),
        };
        if let DataFormat::Series(d) = format {
            if !(1..=3).contains(&d) {
                return Err(CliError::Invalid(format!("dims must be 1, 2 or 3, got {d}")));
            }
        }
        let kind: DistanceKind = a
            .distance
            .as_deref()
            .unwrap_or("levenshtein")
            .parse()
            .map_err(|e: DistanceError| CliError::Config(e.to_string()))?;
        let mut distance = DistanceSpec::new(kind, format.alphabet());
        if let Some(g) = &a.gap {
            distance = distance.with_gap(parse_gap(g, format.alphabet())?);
        }
        let params = SegmentationParams::new(a.lambda.unwrap_or(20), a.lambda0.unwrap_or(0))?;
        let num_max = match a.num_max.as_deref() {
            None => Some(5),
            Some("unlimited") => None,
            Some(n) => Some(n.parse().map_err(|_| CliError::Config(format!("bad num_max {n:?}")))?),
        };
        let net = NetConfig::new(a.base_radius.unwrap_or(1.0), num_max)?;
        Ok(RunConfig {
            dataset: a.dataset,
            format,
            distance,
            params,
            net,
            seed: a.seed.unwrap_or(0),
            out_dir: a.out_dir.unwrap_or_else(|| PathBuf::from(".")),
        })
    }

    /// Canonical `key=value` listing, used for hashing.
    pub fn canonical(&self) -> String {
        let mut m = BTreeMap::new();
        m.insert("dataset", self.dataset.as_ref().map_or(String::new(), |p| p.display().to_string()));
        m.insert("format", self.format.describe());
        m.insert("distance", self.distance.kind().to_string());
        m.insert("gap", self.distance.gap().to_string());
        m.insert("lambda", self.params.lambda().to_string());
        m.insert("lambda0", self.params.lambda0().to_string());
        m.insert("base_radius", self.net.base_radius().to_string());
        m.insert("num_max", self.net.num_max().map_or("unlimited".into(), |n| n.to_string()));
        m.insert("seed", self.seed.to_string());
        m.into_iter().fold(String::new(), |mut s, (k, v)| {
            let _ = writeln!(s, "{k}={v}");
            s
        })
    }

    pub fn hash(&self, extra: &str) -> String {
        sha256_hex(format!("{}{extra}", self.canonical()).as_bytes())
    }

    fn dataset_path(&self) -> Result<&Path, CliError> {
        self.dataset.as_deref().ok_or_else(|| CliError::Config("no dataset given (--dataset)".into()))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Writes an index file: a header naming the dataset and segmentation, then the net with
/// payloads left in the dataset.
pub fn write_index(path: &Path, dataset_path: &Path, format: DataFormat, idx: &SubseqIndex) -> Result<(), CliError> {
    let data = fs::read(dataset_path).map_err(io_err(dataset_path))?;
    let mut out = Vec::new();
    let abs = fs::canonicalize(dataset_path).map_err(io_err(dataset_path))?;
    let header = format!(
        "{INDEX_HEADER}\ndataset {}\ndataset_sha256 {}\nformat {}\nlambda {}\nlambda0 {}\n",
        abs.display(),
        sha256_hex(&data),
        format.describe(),
        idx.params().lambda(),
        idx.params().lambda0()
    );
    out.extend_from_slice(header.as_bytes());
    idx.net().write_to(&mut out, Some("dataset")).map_err(|source| CliError::Index { path: path.into(), source })?;
    fs::write(path, out).map_err(io_err(path))
}

/// Reads an index file, reloading and checking its dataset.
pub fn read_index(path: &Path) -> Result<(SubseqIndex, DataFormat), CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let fail = |line: usize, message: &str| CliError::IndexFormat { path: path.into(), line, message: message.into() };
    let mut lines = text.splitn(7, '\n');
    let mut field = |no: usize, key: &str| -> Result<String, CliError> {
        let line = lines.next().ok_or_else(|| fail(no, "truncated header"))?;
        if key.is_empty() {
            return Ok(line.to_string());
        }
        line.strip_prefix(key)
            .and_then(|r| r.strip_prefix(' '))
            .map(str::to_string)
            .ok_or_else(|| fail(no, &format!("expected `{key}`")))
    };
    if field(1, "")? != INDEX_HEADER {
        return Err(fail(1, "not a subseq index"));
    }
    let dataset_path = PathBuf::from(field(2, "dataset")?);
    let digest = field(3, "dataset_sha256")?;
    let format = DataFormat::parse_described(&field(4, "format")?).ok_or_else(|| fail(4, "unknown format"))?;
    let lambda: usize = field(5, "lambda")?.parse().map_err(|_| fail(5, "bad lambda"))?;
    let lambda0: usize = field(6, "lambda0")?.parse().map_err(|_| fail(6, "bad lambda0"))?;
    let net_text = lines.next().unwrap_or("");

    let data = fs::read(&dataset_path).map_err(io_err(&dataset_path))?;
    if sha256_hex(&data) != digest {
        return Err(CliError::Mismatch(format!("{} changed since the index was built", dataset_path.display())));
    }
    let dataset = load_dataset(&dataset_path, format)?;
    let params = SegmentationParams::new(lambda, lambda0)?;
    let windows = dataset_windows(&dataset, &params);
    let lookup = |id: ObjectId| -> Option<Vec<Element>> {
        let w = windows.get(id as usize)?;
        Some(dataset.sequences()[w.seq as usize].slice(w.span()).to_vec())
    };
    let (net, _) = ReferenceNet::read_from(net_text, Some(&lookup)).map_err(|source| match source {
        NetError::Format { line, message } => fail(line + 6, &message),
        source => CliError::Index { path: path.into(), source },
    })?;
    let idx = SubseqIndex::from_parts(dataset, params, net)?;
    Ok((idx, format))
}

#[derive(Parser, Debug)]
#[command(name = "subseq", version, about = "Subsequence search over strings and time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Index every window of a dataset and write the index file
    Build {
        #[command(flatten)]
        config: ConfigArgs,
        /// Index file to write
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Run Type I, II or III queries against an index
    Query(QueryArgs),
    /// Pruning, distance-histogram and consecutive-window statistics as CSV
    Bench(BenchArgs),
    /// Property checks on the configured distance and index
    Selftest {
        #[command(flatten)]
        config: ConfigArgs,
        /// Also load and validate this index file
        #[arg(long)]
        index: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct QueryArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    index: PathBuf,
    /// Query sequences, in the index's dataset format
    #[arg(long)]
    queries: PathBuf,
    /// 1: all pairs within eps, 2: longest pair, 3: closest pair
    #[arg(long = "type", value_parser = clap::value_parser!(u8).range(1..=3))]
    query_type: u8,
    #[arg(long)]
    eps: Option<f64>,
    /// Type III tier step
    #[arg(long)]
    eps_inc: Option<f64>,
    /// Type III search upper bound
    #[arg(long)]
    eps_hint: Option<f64>,
    /// CSV output file (stdout when absent)
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Use this index instead of building one from the configured dataset
    #[arg(long)]
    index: Option<PathBuf>,
    /// Comma-separated radii (default: fractions of the sampled maximum distance)
    #[arg(long, value_delimiter = ',')]
    radii: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    queries: usize,
    /// Comma-separated MV reference counts (default: space-matched to the net)
    #[arg(long, value_delimiter = ',')]
    mv_k: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 20)]
    bins: usize,
    #[arg(long, default_value_t = 5)]
    consecutive_queries: usize,
    /// Length of consecutive-window queries (default 4 * lambda)
    #[arg(long)]
    query_len: Option<usize>,
}

/// Parses `args` (program name first) and runs the command, writing reports to `out` and
/// diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
                return 2;
            }
            let _ = write!(out, "{text}");
            return 0;
        }
    };
    let result = match cli.command {
        Command::Build { config, output } => cmd_build(&config, &output, out),
        Command::Query(q) => cmd_query(&q, out, err),
        Command::Bench(b) => cmd_bench(&b, out),
        Command::Selftest { config, index } => cmd_selftest(&config, index.as_deref(), out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn cmd_build(args: &ConfigArgs, output: &Path, out: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = RunConfig::resolve(args)?;
    if !cfg.distance.declared_metric() {
        return Err(CliError::Invalid(format!(
            "{} violates the triangle inequality, so index pruning would lose results; use erp or dfd instead",
            cfg.distance.kind()
        )));
    }
    let path = cfg.dataset_path()?;
    let dataset = load_dataset(path, cfg.format)?;
    let idx = build_index(dataset, cfg.params, cfg.distance, cfg.net)?;
    write_index(output, path, cfg.format, &idx)?;
    let s = idx.net().stats();
    let report = format!(
        "windows,levels,nodes,lists,entries,avg_parents,avg_list_size,estimated_bytes,build_computations\n\
         {},{},{},{},{},{:.4},{:.4},{},{}\n",
        idx.windows().len(),
        s.levels,
        s.nodes,
        s.lists,
        s.entries,
        s.avg_parents,
        s.avg_list_size,
        s.estimated_bytes,
        idx.build_computations()
    );
    out.write_all(report.as_bytes()).map_err(io_err(output))?;
    Ok(0)
}

fn check_request(args: &ConfigArgs, idx: &SubseqIndex, format: DataFormat) -> Result<(), CliError> {
    let a = args.merged()?;
    let d = idx.distance();
    if let Some(l) = a.lambda {
        if l != idx.params().lambda() {
            return Err(CliError::Mismatch(format!("lambda {l} requested, index uses {}", idx.params().lambda())));
        }
    }
    if let Some(k) = &a.distance {
        let k: DistanceKind = k.parse().map_err(|e: DistanceError| CliError::Config(e.to_string()))?;
        if k != d.kind() {
            return Err(CliError::Mismatch(format!("{k} requested, index uses {}", d.kind())));
        }
    }
    if let Some(g) = &a.gap {
        if parse_gap(g, format.alphabet())? != d.gap() {
            return Err(CliError::Mismatch(format!("gap {g} requested, index uses {}", d.gap())));
        }
    }
    if let Some(f) = &a.format {
        let requested = if f == "series" { DataFormat::Series(a.dims.unwrap_or(1)) } else { DataFormat::Strings };
        if requested != format {
            return Err(CliError::Mismatch(format!("{f} requested, index holds {}", format.describe())));
        }
    }
    Ok(())
}

fn cmd_query(q: &QueryArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let (idx, format) = read_index(&q.index)?;
    check_request(&q.config, &idx, format)?;
    let lambda0 = q.config.merged()?.lambda0.unwrap_or(idx.params().lambda0());
    let queries = load_dataset(&q.queries, format)?;
    let eps = || q.eps.ok_or_else(|| CliError::Config("--eps is required for Type I and II queries".into()));

    let mut csv_out = csv::Writer::from_writer(Vec::new());
    csv_out.write_record(PAIRS_CSV_HEADER)?;
    let mut found = 0;
    for query in queries.sequences() {
        let pairs: Vec<SubsequencePair> = match q.query_type {
            1 => query_type1(&idx, query.elements(), eps()?, lambda0)?.result,
            2 => query_type2(&idx, query.elements(), eps()?, lambda0)?.result.into_iter().collect(),
            _ => {
                let options = Type3Options { increment: q.eps_inc, hint: q.eps_hint, seed: q.config.seed.unwrap_or(0) };
                match query_type3(&idx, query.elements(), lambda0, options) {
                    Ok(r) => {
                        let _ = writeln!(err, "query {}: tier {} (increment {})", query.id(), r.tier, r.increment);
                        vec![r.pair]
                    }
                    Err(MatchError::NoPair) => Vec::new(),
                    Err(e) => return Err(e.into()),
                }
            }
        };
        found += pairs.len();
        write_pairs_csv(&mut csv_out, query.id(), idx.dataset(), &pairs)?;
    }
    let bytes = csv_out.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))?;
    match &q.output {
        Some(p) => fs::write(p, bytes).map_err(io_err(p))?,
        None => out.write_all(&bytes).map_err(io_err(Path::new("<stdout>")))?,
    }
    Ok(if found == 0 { 1 } else { 0 })
}

/// One row of the consecutive-window statistic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConsecutiveRow {
    pub epsilon: f64,
    /// Windows matched by at least one segment, over all windows.
    pub unique_fraction: f64,
    /// Windows in runs of at least two adjacent matched windows, over all windows.
    pub consecutive_fraction: f64,
}

/// Fractions of matched windows and of windows in runs of two or more, averaged over queries.
pub fn consecutive_stats(idx: &SubseqIndex, queries: &[Vec<Element>], radii: &[f64]) -> Result<Vec<ConsecutiveRow>, MatchError> {
    let total = idx.windows().len().max(1) as f64;
    let l = idx.params().window();
    let mut rows = Vec::new();
    for &eps in radii {
        let (mut unique, mut consecutive) = (0.0, 0.0);
        for q in queries {
            let (matches, _) = candidate_pairs(idx, q, idx.params().lambda0(), eps)?;
            let mut hit: Vec<(u32, usize)> =
                matches.iter().map(|m| (m.window.seq, (m.window.start as usize - 1) / l)).collect();
            hit.sort_unstable();
            hit.dedup();
            let mut in_runs = 0;
            let mut i = 0;
            while i < hit.len() {
                let mut j = i + 1;
                while j < hit.len() && hit[j].0 == hit[i].0 && hit[j].1 == hit[j - 1].1 + 1 {
                    j += 1;
                }
                if j - i >= 2 {
                    in_runs += j - i;
                }
                i = j;
            }
            unique += hit.len() as f64 / total;
            consecutive += in_runs as f64 / total;
        }
        let n = queries.len().max(1) as f64;
        rows.push(ConsecutiveRow { epsilon: eps, unique_fraction: unique / n, consecutive_fraction: consecutive / n });
    }
    Ok(rows)
}

/// Largest distance between any segment of the queries and any window.
pub fn max_segment_window_distance(idx: &SubseqIndex, queries: &[Vec<Element>]) -> f64 {
    let params = idx.params();
    let d = idx.distance();
    let (lo, hi) = if d.kind().requires_equal_length() { (params.window(), params.window()) } else { params.segment_lengths() };
    let mut max = 0.0f64;
    for q in queries {
        for len in lo..=hi.min(q.len()) {
            for seg in q.windows(len) {
                for id in 0..idx.windows().len() {
                    let w = idx.net().payload(id as ObjectId).expect("window payload");
                    max = max.max(d.eval(seg, w).unwrap_or(0.0));
                }
            }
        }
    }
    max
}

fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Histogram of distances between `samples` random pairs of windows, as
/// `(bin_start, bin_end, count)` over `bins` equal bins from zero to the sampled maximum.
pub fn distance_histogram(idx: &SubseqIndex, samples: usize, bins: usize, seed: u64) -> Vec<(f64, f64, usize)> {
    let n = idx.windows().len();
    if n < 2 || bins == 0 {
        return Vec::new();
    }
    let mut rng = rng_stream(seed, 1);
    let d = idx.distance();
    let values: Vec<f64> = (0..samples)
        .map(|_| {
            let pick = rand::seq::index::sample(&mut rng, n, 2);
            let a = idx.net().payload(pick.index(0) as ObjectId).expect("window payload");
            let b = idx.net().payload(pick.index(1) as ObjectId).expect("window payload");
            d.eval(a, b).unwrap_or(0.0)
        })
        .collect();
    let max = values.iter().copied().fold(0.0f64, f64::max);
    let width = if max > 0.0 { max / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for v in values {
        counts[((v / width) as usize).min(bins - 1)] += 1;
    }
    counts.into_iter().enumerate().map(|(i, c)| (i as f64 * width, (i + 1) as f64 * width, c)).collect()
}

fn write_with_hash(path: &Path, hash: &str, body: Vec<u8>) -> Result<(), CliError> {
    let mut bytes = format!("# config_hash={hash}\n").into_bytes();
    bytes.extend(body);
    fs::write(path, bytes).map_err(io_err(path))
}

fn cmd_bench(b: &BenchArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = RunConfig::resolve(&b.config)?;
    let idx = match &b.index {
        Some(p) => read_index(p)?.0,
        None => {
            if !cfg.distance.declared_metric() {
                return Err(CliError::Invalid(format!("{} cannot back an index", cfg.distance.kind())));
            }
            let path = cfg.dataset_path()?;
            build_index(load_dataset(path, cfg.format)?, cfg.params, cfg.distance, cfg.net)?
        }
    };
    let extra = format!("radii={:?}\nqueries={}\nmv_k={:?}\nsamples={}\nbins={}\nconsecutive_queries={}\nquery_len={:?}\n",
        b.radii, b.queries, b.mv_k, b.samples, b.bins, b.consecutive_queries, b.query_len);
    let hash = cfg.hash(&extra);
    fs::create_dir_all(&cfg.out_dir).map_err(io_err(&cfg.out_dir))?;

    let histogram = distance_histogram(&idx, b.samples, b.bins, cfg.seed);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["bin_start", "bin_end", "count"])?;
    for (lo, hi, c) in &histogram {
        w.write_record([lo.to_string(), hi.to_string(), c.to_string()])?;
    }
    let hist_path = cfg.out_dir.join("histogram.csv");
    write_with_hash(&hist_path, &hash, w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))?)?;

    let sampled_max = histogram.last().map_or(0.0, |h| h.1);
    let radii: Vec<f64> = if b.radii.is_empty() {
        [0.0, 0.05, 0.1, 0.2, 0.3, 0.5, 1.0].iter().map(|f| f * sampled_max).collect()
    } else {
        b.radii.clone()
    };

    let objects: Vec<Vec<Element>> =
        (0..idx.windows().len()).map(|i| idx.net().payload(i as ObjectId).expect("window payload").to_vec()).collect();
    let mut rng = rng_stream(cfg.seed, 2);
    let l = idx.params().window();
    let queries: Vec<Vec<Element>> =
        (0..b.queries).filter_map(|_| random_excerpt(idx.dataset(), l, &mut rng)).collect();
    let ks = if b.mv_k.is_empty() { vec![space_matched_k(idx.net())] } else { b.mv_k.clone() };
    let mvs = ks
        .iter()
        .filter(|&&k| k <= objects.len())
        .map(|&k| MvIndex::build(&objects, k, 1000, cfg.seed, *idx.distance()))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = compare_pruning(&objects, &queries, &radii, idx.net(), &mvs)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    write_pruning_csv(&mut w, &rows)?;
    let pruning_path = cfg.out_dir.join("pruning.csv");
    write_with_hash(&pruning_path, &hash, w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))?)?;

    let qlen = b.query_len.unwrap_or(4 * idx.params().lambda());
    let mut rng = rng_stream(cfg.seed, 3);
    let long_queries: Vec<Vec<Element>> =
        (0..b.consecutive_queries).filter_map(|_| random_excerpt(idx.dataset(), qlen, &mut rng)).collect();
    let mut eps_list = radii.clone();
    eps_list.push(max_segment_window_distance(&idx, &long_queries));
    let rows = consecutive_stats(&idx, &long_queries, &eps_list)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["epsilon", "unique_fraction", "consecutive_fraction"])?;
    for r in &rows {
        w.write_record([r.epsilon.to_string(), r.unique_fraction.to_string(), r.consecutive_fraction.to_string()])?;
    }
    let cons_path = cfg.out_dir.join("consecutive.csv");
    write_with_hash(&cons_path, &hash, w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))?)?;

    for p in [&pruning_path, &hist_path, &cons_path] {
        writeln!(out, "{}", p.display()).map_err(io_err(p))?;
    }
    Ok(0)
}

fn show(seq: &[Element]) -> String {
    match seq.first() {
        Some(Element::Symbol(_)) => seq.iter().map(|e| e.to_string()).collect(),
        _ => seq.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" "),
    }
}

fn describe(v: &Violation) -> String {
    let w: Vec<String> = v.witnesses.iter().map(|s| format!("[{}]", show(s))).collect();
    format!("{:?} witnesses={} values={:?}", v.kind, w.join(" "), v.values)
}

/// Outcome of one selftest check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Not applicable to the configured distance.
    Skip,
}

impl CheckStatus {
    pub fn label(self) -> &'static str {
        match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skip => "SKIP",
        }
    }
}

/// Runs the desk-scale property suite for a configuration.
pub fn selftest(cfg: &RunConfig, index: Option<&Path>) -> Vec<CheckOutcome> {
    let mut results = Vec::new();
    let mut push = |name: &'static str, r: Result<String, String>| {
        let (status, detail) = match r {
            Ok(d) => (CheckStatus::Pass, d),
            Err(d) => (CheckStatus::Fail, d),
        };
        results.push(CheckOutcome { name, status, detail });
    };
    let d = cfg.distance;
    let kind = d.kind();
    let alphabet = cfg.format.alphabet();
    let mut rng = rng_stream(cfg.seed, 4);
    let sample = |rng: &mut ChaCha8Rng, len: usize| random_elements(rng, alphabet, len, 3);
    let len_for = |rng: &mut ChaCha8Rng, fixed: usize| {
        use rand::Rng;
        if kind.requires_equal_length() {
            fixed
        } else {
            rng.gen_range(1..=6)
        }
    };

    let consistency = (|| -> Result<String, String> {
        for _ in 0..100 {
            use rand::Rng;
            let fixed = rng.gen_range(1..=6);
            let (lq, lx) = (len_for(&mut rng, fixed), len_for(&mut rng, fixed));
            let (q, x) = (sample(&mut rng, lq), sample(&mut rng, lx));
            let found = check_consistency(&d, &q, &x).map_err(|e| e.to_string())?;
            if let Some(v) = found.first() {
                return Err(describe(v));
            }
        }
        Ok("100 pairs".into())
    })();
    push("consistency", consistency);

    let mut triples = Vec::new();
    for _ in 0..1000 {
        use rand::Rng;
        let fixed = rng.gen_range(1..=6);
        let lens = [len_for(&mut rng, fixed), len_for(&mut rng, fixed), len_for(&mut rng, fixed)];
        triples.push(lens.map(|l| sample(&mut rng, l)));
    }
    let axioms = check_metric_axioms(&d, triples.iter().map(|[a, b, c]| (a.as_slice(), b.as_slice(), c.as_slice())));
    let search_spec = DistanceSpec::new(kind, Alphabet::Vectors(1));
    let found = search_triangle_violation(&search_spec, &mut rng, 20_000, 4, 3);
    push(
        "metric axioms",
        match (axioms, found) {
            (Ok(v), _) if !v.is_empty() => Err(describe(&v[0])),
            (Ok(_), Some(v)) => Err(describe(&v)),
            (Ok(_), None) => Ok("1000 triples, 20000 random integer triples".into()),
            (Err(e), _) => Err(e.to_string()),
        },
    );

    if !d.declared_metric() {
        for name in ["reference net", "type I vs brute force"] {
            results.push(CheckOutcome {
                name,
                status: CheckStatus::Skip,
                detail: format!("{kind} cannot back an index"),
            });
        }
        return results;
    }

    let net_check = (|| -> Result<String, String> {
        let mut net = ReferenceNet::new(d, cfg.net).map_err(|e| e.to_string())?;
        let objects: Vec<Vec<Element>> = (0..300).map(|_| sample(&mut rng, 6)).collect();
        for (i, o) in objects.iter().enumerate() {
            net.insert(i as ObjectId, o.clone()).map_err(|e| e.to_string())?;
        }
        let report = net.validate();
        if !report.is_clean() {
            return Err(report.to_string());
        }
        for (qi, q) in objects.iter().enumerate().step_by(10) {
            for eps in [0.0, 1.0, 2.5, 4.0] {
                let truth: Vec<ObjectId> = objects
                    .iter()
                    .enumerate()
                    .filter(|(_, o)| d.eval(q, o).is_ok_and(|v| v <= eps))
                    .map(|(i, _)| i as ObjectId)
                    .collect();
                if net.range_query(q, eps).ids() != truth {
                    return Err(format!("range query {qi} at radius {eps} differs from a linear scan"));
                }
            }
        }
        for id in (0..300).step_by(3) {
            net.delete(id).map_err(|e| e.to_string())?;
        }
        let report = net.validate();
        if !report.is_clean() {
            return Err(format!("after deletions: {report}"));
        }
        Ok("300 inserts, 120 range queries, 100 deletes".into())
    })();
    push("reference net", net_check);

    let oracle_check = (|| -> Result<String, String> {
        let params = SegmentationParams::new(8, 1).map_err(|e| e.to_string())?;
        for trial in 0..3 {
            let ds = match alphabet {
                Alphabet::Symbols => random_strings(&mut rng, 2, 16..=24, 3),
                _ => {
                    let seqs = (0..2)
                        .map(|i| Sequence::new(i.to_string(), alphabet, sample(&mut rng, 20)).expect("generated"))
                        .collect();
                    Dataset::new(alphabet, seqs).expect("generated")
                }
            };
            let q = sample(&mut rng, 16);
            let idx = build_index(ds.clone(), params, d, cfg.net).map_err(|e| e.to_string())?;
            let eps = 2.0;
            let got = query_type1(&idx, &q, eps, 1).map_err(|e| e.to_string())?.result;
            let want = brute_force_oracle(&ds, &q, &d, 8, 1, OracleQuery::All { eps }).map_err(|e| e.to_string())?;
            if OracleAnswer::All(got.clone()) != want {
                return Err(format!("trial {trial}: Type I returned {} pairs, brute force disagrees", got.len()));
            }
        }
        Ok("3 random instances".into())
    })();
    push("type I vs brute force", oracle_check);

    if let Some(path) = index {
        push(
            "index file",
            read_index(path).map(|(idx, _)| format!("{} windows", idx.windows().len())).map_err(|e| e.to_string()),
        );
    }
    results
}

fn cmd_selftest(args: &ConfigArgs, index: Option<&Path>, out: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = RunConfig::resolve(args)?;
    let results = selftest(&cfg, index);
    let mut failed = 0;
    for r in &results {
        failed += usize::from(r.status == CheckStatus::Fail);
        writeln!(out, "{} {}: {}", r.status.label(), r.name, r.detail).map_err(io_err(Path::new("<stdout>")))?;
    }
    if failed > 0 {
        return Err(CliError::SelftestFailed(failed));
    }
    Ok(0)
}
