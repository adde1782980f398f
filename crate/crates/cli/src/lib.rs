//! Command-line front end for markushkit. Corpus data is read and written
//! as JSONL; record order in every output follows the input order no matter
//! how many worker threads run.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use markushkit::augment::{augment, AugmentConfig, Feature, Skip};
use markushkit::canon::{equivalent_with, feature_equivalent, structural_key_with, ExternalKeyTool, KeyFlags};
use markushkit::convert::{ConversionReport, ConvertConfig, Converter};
use markushkit::metrics::{
    aggregate, dataset_stats, ocr_match, pair_records, prf, score_sample, EvalOptions, OcrCell,
    Record, StatsRecord, TableGranularity,
};
use markushkit::molfile::{decode_text, parse_molfile_with, ParseOptions};
use markushkit::notation::parse_cxsmiles_with_warnings;
use markushkit::{write_cxsmiles, MolGraph};

pub const ABBREV_DICT_ENV: &str = "MARKUSHKIT_ABBREV_DICT";

#[derive(Debug, Parser)]
#[command(name = "markushkit", version, about = "Markush structure toolkit")]
pub struct Cli {
    /// TOML file with optional [convert], [augment] and [eval] tables.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Treat recoverable input problems as errors.
    #[arg(long, global = true)]
    pub strict: bool,
    #[arg(long, global = true)]
    pub iou_threshold: Option<f64>,
    /// Compare stereochemistry when checking backbones.
    #[arg(long, global = true)]
    pub with_stereo: bool,
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Program that prints a structure key for a SMILES read from stdin.
    #[arg(long, global = true)]
    pub inchi_tool: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a directory of MOL V2000 files to CXSMILES JSONL.
    Convert {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Defaults to <output>.manifest.json.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Score predictions against ground truth.
    Eval {
        pred: PathBuf,
        gt: PathBuf,
        /// Write report.json, report.txt, samples.jsonl and manifest.json here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, value_parser = ["cell", "row"])]
        table_granularity: Option<String>,
        /// Print the text table instead of JSON.
        #[arg(long)]
        text: bool,
    },
    /// Score OCR cells only, optionally over several IoU thresholds.
    EvalOcr {
        pred: PathBuf,
        gt: PathBuf,
        #[arg(long, value_delimiter = ',')]
        sweep: Vec<f64>,
    },
    /// Feature statistics of a CXSMILES corpus.
    Stats {
        corpus: PathBuf,
        #[arg(long, default_value = "Dataset")]
        title: String,
        #[arg(long)]
        json: bool,
    },
    /// Parse a CXSMILES (or, with --mol, a MOL file) and print the graph.
    Parse {
        input: String,
        #[arg(long)]
        mol: bool,
    },
    /// Structural key of one structure, or equivalence of two.
    Canon {
        first: String,
        second: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Inject Markush features into SMILES read one per line.
    Augment {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub iou_threshold: Option<f64>,
    pub with_stereo: bool,
    pub table_granularity: TableGranularity,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub convert: ConvertConfig,
    pub augment: AugmentConfig,
    pub eval: EvalConfig,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub inputs: Vec<String>,
    pub total: usize,
    pub ok: usize,
    pub failed: usize,
    pub skipped: usize,
    pub failures: Vec<Failure>,
    pub started_unix: u64,
    pub wall_time_s: f64,
    pub version: String,
}

struct Clock {
    started_unix: u64,
    start: Instant,
}

impl Clock {
    fn start() -> Self {
        Clock {
            started_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            start: Instant::now(),
        }
    }

    fn manifest(
        &self,
        command: &str,
        config: &impl Serialize,
        inputs: &[&Path],
        ok: usize,
        skipped: usize,
        failures: Vec<Failure>,
    ) -> RunManifest {
        RunManifest {
            command: command.into(),
            config: serde_json::to_value(config).unwrap_or(serde_json::Value::Null),
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            total: ok + skipped + failures.len(),
            ok,
            failed: failures.len(),
            skipped,
            failures,
            started_unix: self.started_unix,
            wall_time_s: self.start.elapsed().as_secs_f64(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or configuration; exit code 1.
    Usage(String),
    /// Unreadable or invalid data; exit code 2.
    Data(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Data(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Data(e.into())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

/// Parse `args` (program name first), run, and return the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("error: {m}"),
                CliError::Data(err) => eprintln!("error: {err:#}"),
            }
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    if let Some(p) = std::env::var_os(ABBREV_DICT_ENV).filter(|v| !v.is_empty()) {
        cfg.convert.abbreviation_dictionary_path = Some(PathBuf::from(p));
    }
    if cli.strict {
        cfg.convert.strict = true;
    }
    if let Some(t) = cli.iou_threshold {
        cfg.eval.iou_threshold = Some(t);
    }
    if cli.with_stereo {
        cfg.eval.with_stereo = true;
    }
    if let Some(t) = cfg.eval.iou_threshold {
        if !(0.0..=1.0).contains(&t) {
            return Err(CliError::Usage(format!("iou threshold {t} is not in [0, 1]")));
        }
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let tool = cli.inchi_tool.as_ref().map(ExternalKeyTool::new);
    let ctx = Ctx { cfg, pool, tool };
    match &cli.command {
        Command::Convert { input, output, manifest } => ctx.convert(input, output, manifest.as_deref(), out),
        Command::Eval { pred, gt, out_dir, table_granularity, text } => {
            let mut cfg = ctx.cfg.eval.clone();
            if let Some(g) = table_granularity {
                cfg.table_granularity = if g == "row" { TableGranularity::Row } else { TableGranularity::Cell };
            }
            ctx.eval(pred, gt, &cfg, out_dir.as_deref(), *text, out)
        }
        Command::EvalOcr { pred, gt, sweep } => ctx.eval_ocr(pred, gt, sweep, out),
        Command::Stats { corpus, title, json } => ctx.stats(corpus, title, *json, out),
        Command::Parse { input, mol } => ctx.parse(input, *mol, out),
        Command::Canon { first, second, json } => ctx.canon(first, second.as_deref(), *json, out),
        Command::Augment { input, output, seed, manifest } => {
            ctx.augment(input, output.as_deref(), *seed, manifest.as_deref(), out)
        }
    }
}

struct Ctx {
    cfg: FileConfig,
    pool: rayon::ThreadPool,
    tool: Option<ExternalKeyTool>,
}

/// Records of a JSONL file; blank lines are skipped.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> anyhow::Result<Vec<T>> {
    let file = fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.with_context(|| format!("{}: read failed", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line)
            .with_context(|| format!("{}:{}: invalid record", path.display(), n + 1))?;
        out.push(rec);
    }
    Ok(out)
}

fn write_jsonl<T: Serialize>(w: &mut dyn Write, records: &[T]) -> anyhow::Result<()> {
    for r in records {
        serde_json::to_writer(&mut *w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn manifest_path(output: &Path, explicit: Option<&Path>) -> PathBuf {
    explicit.map(Path::to_path_buf).unwrap_or_else(|| {
        let mut name = output.file_name().map(OsString::from).unwrap_or_default();
        name.push(".manifest.json");
        output.with_file_name(name)
    })
}

/// `*.mol` files directly inside `dir`, sorted by name.
pub fn list_mol_files(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("cannot read directory {}", dir.display()))? {
        let path = entry?.path();
        let is_mol = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("mol"));
        if is_mol && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

#[derive(Serialize)]
struct ConvertRecord<'a> {
    id: &'a str,
    cxsmiles: &'a str,
    report: &'a ConversionReport,
}

#[derive(Serialize)]
struct AugmentRecord<'a> {
    line: usize,
    smiles: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    cxsmiles: Option<&'a str>,
    applied: &'a [Feature],
    skipped: &'a [Skip],
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Deserialize)]
struct OcrRecord {
    id: String,
    #[serde(default, alias = "pred_ocr", alias = "gt_ocr", alias = "cells")]
    ocr: Option<Vec<OcrCell>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OcrScore {
    pub iou_threshold: f64,
    pub p: f64,
    pub r: f64,
    pub f1: f64,
    pub image_a: f64,
}

#[derive(Serialize)]
struct OcrReport {
    samples: usize,
    excluded: Vec<String>,
    unmatched_predictions: Vec<String>,
    scores: Vec<OcrScore>,
}

#[derive(Serialize)]
struct ParseOutput<'a> {
    cxsmiles: String,
    formula: String,
    atom_count: usize,
    bond_count: usize,
    graph: &'a MolGraph,
    warnings: Vec<String>,
}

impl Ctx {
    fn flags(&self) -> KeyFlags {
        if self.cfg.eval.with_stereo {
            KeyFlags::with_stereo()
        } else {
            KeyFlags::default()
        }
    }

    fn convert(&self, input: &Path, output: &Path, manifest: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
        let clock = Clock::start();
        let converter =
            Converter::new(self.cfg.convert.clone()).map_err(|e| CliError::Usage(e.to_string()))?;
        let files = list_mol_files(input)?;
        let results: Vec<(String, Result<(String, ConversionReport), String>)> = self.pool.install(|| {
            files
                .par_iter()
                .map(|p| {
                    let id = p
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_default();
                    let r = fs::read(p)
                        .map_err(|e| e.to_string())
                        .and_then(|bytes| {
                            converter
                                .convert_text(&decode_text(&bytes))
                                .map(|(cx, rep)| (cx.text, rep))
                                .map_err(|e| e.to_string())
                        });
                    (id, r)
                })
                .collect()
        });
        let mut buf = Vec::new();
        let mut failures = Vec::new();
        let mut ok = 0;
        for (id, r) in &results {
            match r {
                Ok((cx, report)) => {
                    ok += 1;
                    serde_json::to_writer(&mut buf, &ConvertRecord { id, cxsmiles: cx, report })
                        .map_err(anyhow::Error::from)?;
                    buf.push(b'\n');
                }
                Err(e) => {
                    log::warn!("{id}: {e}");
                    failures.push(Failure { id: id.clone(), error: e.clone() });
                }
            }
        }
        fs::write(output, &buf).with_context(|| format!("cannot write {}", output.display()))?;
        let failed = failures.len();
        let m = clock.manifest("convert", &self.cfg.convert, &[input], ok, 0, failures);
        write_json(&manifest_path(output, manifest), &m)?;
        writeln!(out, "converted {ok} of {} files, {failed} failed", files.len())?;
        if failed > 0 && (self.cfg.convert.strict || ok == 0) {
            return Err(CliError::Data(anyhow!("{failed} of {} files failed to convert", files.len())));
        }
        Ok(())
    }

    fn eval(
        &self,
        pred: &Path,
        gt: &Path,
        cfg: &EvalConfig,
        out_dir: Option<&Path>,
        text: bool,
        out: &mut dyn Write,
    ) -> Result<(), CliError> {
        let clock = Clock::start();
        let preds: Vec<Record> = read_jsonl(pred)?;
        let gts: Vec<Record> = read_jsonl(gt)?;
        let (samples, orphans) = pair_records(&preds, &gts);
        let missing = samples.iter().filter(|s| s.pred_cxsmiles.is_none()).count();
        if missing > 0 {
            log::warn!("{missing} ground-truth ids have no prediction; scored as wrong");
        }
        if !orphans.is_empty() {
            log::warn!("{} predictions have no ground truth", orphans.len());
        }
        let opts = EvalOptions {
            flags: if cfg.with_stereo { KeyFlags::with_stereo() } else { KeyFlags::default() },
            iou_threshold: cfg.iou_threshold.unwrap_or(0.5),
            table_granularity: cfg.table_granularity,
            key_tool: self.tool.clone(),
        };
        let results = self
            .pool
            .install(|| samples.par_iter().map(|s| score_sample(s, &opts)).collect::<Vec<_>>());
        let report = aggregate(&results, &opts, orphans);
        if let Some(dir) = out_dir {
            fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
            write_json(&dir.join("report.json"), &report)?;
            fs::write(dir.join("report.txt"), report.to_text())?;
            let mut side = Vec::new();
            write_jsonl(&mut side, &results)?;
            fs::write(dir.join("samples.jsonl"), side)?;
            let m = clock.manifest("eval", cfg, &[pred, gt], results.len(), 0, Vec::new());
            write_json(&dir.join("manifest.json"), &m)?;
        }
        if text {
            write!(out, "{}", report.to_text())?;
        } else {
            writeln!(out, "{}", serde_json::to_string_pretty(&report).map_err(anyhow::Error::from)?)?;
        }
        Ok(())
    }

    fn eval_ocr(&self, pred: &Path, gt: &Path, sweep: &[f64], out: &mut dyn Write) -> Result<(), CliError> {
        let preds: Vec<OcrRecord> = read_jsonl(pred)?;
        let gts: Vec<OcrRecord> = read_jsonl(gt)?;
        let thresholds: Vec<f64> = if sweep.is_empty() {
            vec![self.cfg.eval.iou_threshold.unwrap_or(0.5)]
        } else {
            sweep.to_vec()
        };
        if let Some(t) = thresholds.iter().find(|t| !(0.0..=1.0).contains(*t)) {
            return Err(CliError::Usage(format!("iou threshold {t} is not in [0, 1]")));
        }
        let mut by_id: BTreeMap<&str, &[OcrCell]> = BTreeMap::new();
        for p in &preds {
            by_id.entry(p.id.as_str()).or_insert(p.ocr.as_deref().unwrap_or(&[]));
        }
        let gt_ids: std::collections::BTreeSet<&str> = gts.iter().map(|g| g.id.as_str()).collect();
        let mut excluded = Vec::new();
        let mut pairs: Vec<(&[OcrCell], &[OcrCell])> = Vec::new();
        for g in &gts {
            match &g.ocr {
                Some(cells) => pairs.push((by_id.get(g.id.as_str()).copied().unwrap_or(&[]), cells)),
                None => excluded.push(g.id.clone()),
            }
        }
        let scores = thresholds
            .iter()
            .map(|&t| {
                let matched: Vec<_> = self
                    .pool
                    .install(|| pairs.par_iter().map(|(p, g)| ocr_match(p, g, t)).collect());
                let (m, np, ng) = matched
                    .iter()
                    .fold((0, 0, 0), |(a, b, c), x| (a + x.matches(), b + x.n_pred, c + x.n_gt));
                let (p, r, f1) = prf(m, np, ng);
                let perfect = matched.iter().filter(|x| x.is_perfect()).count();
                OcrScore {
                    iou_threshold: t,
                    p,
                    r,
                    f1,
                    image_a: if matched.is_empty() { 0.0 } else { 100.0 * perfect as f64 / matched.len() as f64 },
                }
            })
            .collect();
        let report = OcrReport {
            samples: pairs.len(),
            excluded,
            unmatched_predictions: preds
                .iter()
                .filter(|p| !gt_ids.contains(p.id.as_str()))
                .map(|p| p.id.clone())
                .collect(),
            scores,
        };
        writeln!(out, "{}", serde_json::to_string_pretty(&report).map_err(anyhow::Error::from)?)?;
        Ok(())
    }

    fn stats(&self, corpus: &Path, title: &str, json: bool, out: &mut dyn Write) -> Result<(), CliError> {
        let records: Vec<StatsRecord> = read_jsonl(corpus)?;
        let table = dataset_stats(&records);
        if json {
            writeln!(out, "{}", serde_json::to_string_pretty(&table).map_err(anyhow::Error::from)?)?;
        } else {
            write!(out, "{}", table.to_text(title))?;
        }
        Ok(())
    }

    fn parse(&self, input: &str, mol: bool, out: &mut dyn Write) -> Result<(), CliError> {
        let (g, warnings) = if mol {
            let bytes = fs::read(input).with_context(|| format!("cannot read {input}"))?;
            let converter =
                Converter::new(self.cfg.convert.clone()).map_err(|e| CliError::Usage(e.to_string()))?;
            let doc = parse_molfile_with(&decode_text(&bytes), ParseOptions { strict: self.cfg.convert.strict })
                .map_err(|e| anyhow!("{input}: {e}"))?;
            let (g, report) = converter.build(&doc).map_err(|e| anyhow!("{input}: {e}"))?;
            (g, report.warnings)
        } else {
            parse_cxsmiles_with_warnings(input).map_err(|e| anyhow!("{e}"))?
        };
        let o = ParseOutput {
            cxsmiles: write_cxsmiles(&g).text,
            formula: g.formula(),
            atom_count: g.atom_count(),
            bond_count: g.bonds().len(),
            graph: &g,
            warnings,
        };
        writeln!(out, "{}", serde_json::to_string_pretty(&o).map_err(anyhow::Error::from)?)?;
        Ok(())
    }

    fn canon(&self, first: &str, second: Option<&str>, json: bool, out: &mut dyn Write) -> Result<(), CliError> {
        let parse = |s: &str| -> anyhow::Result<MolGraph> {
            parse_cxsmiles_with_warnings(s).map(|(g, _)| g).map_err(|e| anyhow!("{s}: {e}"))
        };
        let flags = self.flags();
        let tool = self.tool.as_ref();
        let g1 = parse(first)?;
        let k1 = structural_key_with(tool, &g1, flags);
        let mut fields: Vec<(&str, serde_json::Value)> = vec![
            ("cxsmiles", write_cxsmiles(&g1).text.into()),
            ("key", k1.key.into()),
        ];
        if let Some(s) = second {
            let g2 = parse(s)?;
            let k2 = structural_key_with(tool, &g2, flags);
            fields = vec![
                ("cxsmiles_1", write_cxsmiles(&g1).text.into()),
                ("cxsmiles_2", write_cxsmiles(&g2).text.into()),
                ("key_1", fields[1].1.clone()),
                ("key_2", k2.key.into()),
                ("equivalent", equivalent_with(tool, &g1, &g2, flags).equivalent.into()),
                ("feature_equivalent", feature_equivalent(&g1, &g2, flags).equivalent.into()),
            ];
        }
        if json {
            let map: serde_json::Map<String, serde_json::Value> =
                fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
            writeln!(out, "{}", serde_json::Value::Object(map))?;
        } else {
            for (k, v) in fields {
                match v {
                    serde_json::Value::String(s) => writeln!(out, "{k}: {s}")?,
                    other => writeln!(out, "{k}: {other}")?,
                }
            }
        }
        Ok(())
    }

    fn augment(
        &self,
        input: &Path,
        output: Option<&Path>,
        seed: Option<u64>,
        manifest: Option<&Path>,
        out: &mut dyn Write,
    ) -> Result<(), CliError> {
        let clock = Clock::start();
        let mut cfg = self.cfg.augment.clone();
        if let Some(s) = seed {
            cfg.seed = s;
        }
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        let text = fs::read_to_string(input).with_context(|| format!("cannot read {}", input.display()))?;
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        let results: Vec<_> = self.pool.install(|| {
            lines
                .par_iter()
                .enumerate()
                .map(|(k, &(line, smiles))| {
                    let per = cfg.clone().with_seed(cfg.seed ^ k as u64);
                    (line, smiles, augment(smiles, &per))
                })
                .collect()
        });
        let mut buf = Vec::new();
        let mut failures = Vec::new();
        for (line, smiles, r) in &results {
            let rec = match r {
                Ok(a) => AugmentRecord {
                    line: *line,
                    smiles,
                    cxsmiles: Some(a.cxsmiles.as_str()),
                    applied: &a.applied,
                    skipped: &a.skipped,
                    error: None,
                },
                Err(e) => {
                    failures.push(Failure { id: format!("line {line}"), error: e.to_string() });
                    AugmentRecord {
                        line: *line,
                        smiles,
                        cxsmiles: None,
                        applied: &[],
                        skipped: &[],
                        error: Some(e.to_string()),
                    }
                }
            };
            serde_json::to_writer(&mut buf, &rec).map_err(anyhow::Error::from)?;
            buf.push(b'\n');
        }
        let failed = failures.len();
        match output {
            Some(path) => {
                fs::write(path, &buf).with_context(|| format!("cannot write {}", path.display()))?;
                let m = clock.manifest("augment", &cfg, &[input], results.len() - failed, 0, failures);
                write_json(&manifest_path(path, manifest), &m)?;
            }
            None => out.write_all(&buf)?,
        }
        if failed > 0 && self.cfg.convert.strict {
            return Err(CliError::Data(anyhow!("{failed} inputs failed to augment")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_sits_next_to_output() {
        assert_eq!(
            manifest_path(Path::new("out/data.jsonl"), None),
            PathBuf::from("out/data.jsonl.manifest.json")
        );
        assert_eq!(
            manifest_path(Path::new("out/data.jsonl"), Some(Path::new("m.json"))),
            PathBuf::from("m.json")
        );
    }

    #[test]
    fn partial_config_keeps_defaults() {
        let cfg: FileConfig = toml::from_str("[augment]\nseed = 9\n[eval]\nwith_stereo = true\n").unwrap();
        assert_eq!(cfg.augment.seed, 9);
        assert_eq!(cfg.augment.p_m_section, AugmentConfig::default().p_m_section);
        assert!(cfg.eval.with_stereo);
        assert_eq!(cfg.convert, ConvertConfig::default());
        assert!(toml::from_str::<FileConfig>("[eval]\niou = 0.5\n").is_err());
    }
}
