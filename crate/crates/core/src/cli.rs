//! The `csm` command line: argument parsing, run manifests and the six
//! subcommands. Every subcommand delegates to the library.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::corpus::{generate_synthetic, read_corpus, serialize_corpus, CooccurrenceProfile, Corpus, TagSchema};
use crate::error::{Error, Result};
use crate::eval::{crossval, evaluate, sensitivity_sweep, EvalReport, Supervision, SweepRow};
use crate::hin::{build_hin, MetaPathMatrix};
use crate::ncsl::{CrossSupervision, MatrixMode};
use crate::tagger::{read_checkpoint, train, write_checkpoint, Checkpoint, LossRecord, TrainConfig};

pub const SEED_ENV: &str = "CSM_SEED";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "csm", version, about = "Joint entity and trigger tagging with cross-supervision")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a tagger and write checkpoint, manifest and loss log.
    Train(TrainArgs),
    /// Score a checkpoint on an annotated corpus.
    Eval(EvalArgs),
    /// k-fold cross-validation.
    Crossval(CrossvalArgs),
    /// Export the co-occurrence network and its matrices.
    Hin(HinArgs),
    /// Mean F1 over a grid of meta-path lengths and fold counts.
    Sweep(SweepArgs),
    /// Write a seeded synthetic corpus.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct Experiment {
    /// Training config JSON; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    /// Overrides the config's alpha.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Overrides the config's matrix mode.
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<MatrixMode>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub experiment: Experiment,
    /// Train on the sequence loss only, without building the network.
    #[arg(long)]
    pub tagger_only: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Report CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CrossvalArgs {
    #[command(flatten)]
    pub experiment: Experiment,
    /// Overrides the config's fold count.
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub tagger_only: bool,
    /// Folds trained in parallel.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Report CSV; stdout when omitted. A manifest is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HinArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    /// Meta-path length (odd).
    #[arg(long = "l", default_value_t = 3)]
    pub length: usize,
    /// Meta-path matrix CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Direct co-occurrence matrix CSV.
    #[arg(long)]
    pub direct: Option<PathBuf>,
    /// Edge list CSV.
    #[arg(long)]
    pub edges: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub experiment: Experiment,
    /// Comma-separated odd meta-path lengths.
    #[arg(long = "l", value_delimiter = ',', default_values_t = [1, 3, 5])]
    pub lengths: Vec<usize>,
    /// Comma-separated fold counts.
    #[arg(long, value_delimiter = ',', default_values_t = [5, 6, 7, 8, 9, 10])]
    pub folds: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Sweep CSV; stdout when omitted. A manifest is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub schema: PathBuf,
    #[arg(long)]
    pub sentences: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON object mapping each trigger type to weights over entity types;
    /// the block-structured profile when omitted.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Corpus file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_mode(s: &str) -> std::result::Result<MatrixMode, String> {
    match s {
        "direct" => Ok(MatrixMode::Direct),
        "metapath" => Ok(MatrixMode::Metapath),
        _ => Err(format!("expected direct or metapath, got {s:?}")),
    }
}

/// Everything needed to repeat a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub command: String,
    pub config: TrainConfig,
    pub supervision: String,
    pub schema_hash: String,
    pub corpus: PathBuf,
    pub schema: PathBuf,
    pub out: PathBuf,
    pub tool_version: String,
    pub seed: u64,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_file(path, text.as_bytes()),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e)),
    }
}

pub fn load_schema(path: &Path) -> Result<TagSchema> {
    TagSchema::from_json(&read_text(path)?)
}

/// Config file (or defaults), then flag overrides, then `CSM_SEED`.
pub fn resolve_config(path: Option<&Path>, alpha: Option<f64>, mode: Option<MatrixMode>) -> Result<TrainConfig> {
    let mut config = match path {
        Some(p) => TrainConfig::from_json(&read_text(p)?)?,
        None => TrainConfig::default(),
    };
    if let Some(a) = alpha {
        config.alpha = a;
    }
    if let Some(m) = mode {
        config.matrix_mode = m;
    }
    if let Ok(seed) = std::env::var(SEED_ENV) {
        config.seed = seed
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{SEED_ENV}={seed:?} is not an unsigned integer")))?;
    }
    config.validate()?;
    Ok(config)
}

struct Loaded {
    config: TrainConfig,
    schema: TagSchema,
    corpus: Corpus,
}

fn load_experiment(e: &Experiment) -> Result<Loaded> {
    let config = resolve_config(e.config.as_deref(), e.alpha, e.mode)?;
    let schema = load_schema(&e.schema)?;
    let corpus = read_corpus(&e.corpus, &schema)?;
    Ok(Loaded { config, schema, corpus })
}

fn manifest(command: &str, e: &Experiment, loaded: &Loaded, supervision: Supervision, out: &Path) -> RunManifest {
    RunManifest {
        command: command.to_string(),
        config: loaded.config.clone(),
        supervision: match supervision {
            Supervision::TaggerOnly => "none".to_string(),
            Supervision::Hin(m) => m.as_str().to_string(),
        },
        schema_hash: loaded.schema.hash(),
        corpus: e.corpus.clone(),
        schema: e.schema.clone(),
        out: out.to_path_buf(),
        tool_version: VERSION.to_string(),
        seed: loaded.config.seed,
    }
}

fn supervision(tagger_only: bool, config: &TrainConfig) -> Supervision {
    if tagger_only {
        Supervision::TaggerOnly
    } else {
        Supervision::Hin(config.matrix_mode)
    }
}

fn sibling_manifest(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

pub fn cmd_train(args: &TrainArgs) -> Result<()> {
    let loaded = load_experiment(&args.experiment)?;
    let sup = supervision(args.tagger_only, &loaded.config);
    fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let m = manifest("train", &args.experiment, &loaded, sup, &args.out);
    write_file(&args.out.join("manifest.json"), m.to_json().as_bytes())?;

    let cross = match sup {
        Supervision::TaggerOnly => None,
        Supervision::Hin(mode) => {
            let matrix = MetaPathMatrix::build(&build_hin(&loaded.corpus), &loaded.schema, loaded.config.meta_path_length)?;
            Some(CrossSupervision::new(&matrix, mode))
        }
    };
    let log_path = args.out.join("losses.csv");
    let mut log = BufWriter::new(File::create(&log_path).map_err(|e| Error::io(&log_path, e))?);
    let mut log_err = None;
    writeln!(log, "{}", LossRecord::CSV_HEADER).map_err(|e| Error::io(&log_path, e))?;
    let params = train(&loaded.corpus, &loaded.config, cross.as_ref(), |r| {
        if log_err.is_none() {
            log_err = writeln!(log, "{}", r.csv_row()).err();
        }
    });
    if let Some(e) = log_err {
        return Err(Error::io(&log_path, e));
    }
    log.flush().map_err(|e| Error::io(&log_path, e))?;
    let params = params?;

    let ckpt = Checkpoint {
        schema: loaded.schema,
        vocab: loaded.corpus.vocab,
        config: loaded.config,
        params,
    };
    let path = args.out.join("checkpoint");
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = BufWriter::new(file);
    write_checkpoint(&ckpt, &mut w)?;
    w.flush().map_err(|e| Error::io(&path, e))
}

pub fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let file = File::open(&args.checkpoint).map_err(|e| Error::io(&args.checkpoint, e))?;
    let ckpt = read_checkpoint(io::BufReader::new(file))?;
    let corpus = read_corpus(&args.corpus, &ckpt.schema)?;
    let corpus = Corpus::with_vocab(ckpt.schema.clone(), corpus.sentences, ckpt.vocab.clone());
    let report = EvalReport::new(vec![evaluate(&ckpt.params, &corpus)?]);
    emit(args.out.as_deref(), &report.to_csv())
}

pub fn cmd_crossval(args: &CrossvalArgs) -> Result<()> {
    let mut loaded = load_experiment(&args.experiment)?;
    if let Some(k) = args.folds {
        loaded.config.folds = k;
        loaded.config.validate()?;
    }
    let sup = supervision(args.tagger_only, &loaded.config);
    if let Some(out) = &args.out {
        let m = manifest("crossval", &args.experiment, &loaded, sup, out);
        write_file(&sibling_manifest(out), m.to_json().as_bytes())?;
    }
    let report = crossval(&loaded.corpus, &loaded.config, sup, args.jobs)?;
    emit(args.out.as_deref(), &report.to_csv())
}

pub fn cmd_hin(args: &HinArgs) -> Result<()> {
    let schema = load_schema(&args.schema)?;
    let corpus = read_corpus(&args.corpus, &schema)?;
    let hin = build_hin(&corpus);
    let matrix = MetaPathMatrix::build(&hin, &schema, args.length)?;
    let mut meta = Vec::new();
    matrix.write_meta_csv(&schema, &mut meta)?;
    write_file(&args.out, &meta)?;
    if let Some(path) = &args.direct {
        let mut direct = Vec::new();
        matrix.write_direct_csv(&schema, &mut direct)?;
        write_file(path, &direct)?;
    }
    if let Some(path) = &args.edges {
        let mut edges = Vec::new();
        hin.write_edge_csv(&mut edges)?;
        write_file(path, &edges)?;
    }
    Ok(())
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let loaded = load_experiment(&args.experiment)?;
    if let Some(out) = &args.out {
        let m = manifest("sweep", &args.experiment, &loaded, Supervision::Hin(loaded.config.matrix_mode), out);
        write_file(&sibling_manifest(out), m.to_json().as_bytes())?;
    }
    let rows = sensitivity_sweep(&loaded.corpus, &loaded.config, &args.lengths, &args.folds, args.jobs)?;
    emit(args.out.as_deref(), &SweepRow::to_csv(&rows))
}

pub fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let schema = load_schema(&args.schema)?;
    let profile = match &args.profile {
        Some(path) => {
            let rows: std::collections::BTreeMap<String, std::collections::BTreeMap<String, f64>> =
                serde_json::from_str(&read_text(path)?)?;
            let mut pairs = Vec::new();
            for (trigger, weights) in &rows {
                let mut row = vec![0.0; schema.entity_types().len()];
                for (entity, &w) in weights {
                    let i = schema
                        .type_index(crate::corpus::Role::Entity, entity)
                        .ok_or_else(|| Error::Config(format!("unknown entity type {entity:?} in profile")))?;
                    row[i] = w;
                }
                pairs.push((trigger.as_str(), row));
            }
            CooccurrenceProfile::from_pairs(&schema, pairs)?
        }
        None => CooccurrenceProfile::structured(&schema),
    };
    let corpus = generate_synthetic(&schema, args.sentences, args.seed, &profile)?;
    emit(args.out.as_deref(), &serialize_corpus(&corpus))
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Crossval(a) => cmd_crossval(a),
        Command::Hin(a) => cmd_hin(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Synth(a) => cmd_synth(a),
    }
}

/// Exit status for an error: 2 for numerical aborts, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        2
    } else {
        1
    }
}

/// Parses `args` and runs; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
