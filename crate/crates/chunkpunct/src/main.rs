//! Command-line front end: each pipeline stage as a subcommand, composable
//! through files, plus the one-shot `restore` mode.

use std::fs;
use std::io::{self, Read, Write};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use chunkpunct::chunker::{self, Chunk, ChunkConfig};
use chunkpunct::codec::{LabeledSequence, TextFormat};
use chunkpunct::corpus::{self, CleanOptions};
use chunkpunct::eval::{self, ConfusionMatrix, MetricsReport};
use chunkpunct::merger::{self, MergeConfig, MergeError};
use chunkpunct::models::{train_baseline, BaselineTable, ExternalModel, ModelError, RestorerSpec};
use chunkpunct::pipeline::{restore_document, PipelineConfig, PipelineError};

#[derive(Parser)]
#[command(
    name = "chunkpunct",
    version,
    about = "Restore punctuation and capitalization in long ASR transcripts",
    long_about = "Restore punctuation and capitalization in long ASR transcripts.\n\
                  Documents are split into overlapped chunks, restored per chunk by a\n\
                  pluggable model, and merged back with the min_words_cut rule.\n\
                  Paths given as '-' mean standard input/output."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clean a raw text corpus into aligned (input, target) chunk pairs
    Prepare(PrepareArgs),
    /// Split a document into overlapped chunks plus a sidecar index
    Split(SplitArgs),
    /// Run the full pipeline: split, restore per chunk, merge
    Restore(RestoreArgs),
    /// Merge restored chunk lines back into a document
    Merge(MergeArgs),
    /// Score a hypothesis file against a reference file
    Evaluate(EvaluateArgs),
    /// Evaluate a model across a range of min_words_cut values
    Sweep(SweepArgs),
    /// Train the frequency baseline from prepared pairs
    TrainBaseline(TrainBaselineArgs),
    /// Show per-class metric deltas between two JSON reports
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Plain,
    Encoded,
}

impl From<FormatArg> for TextFormat {
    fn from(f: FormatArg) -> TextFormat {
        match f {
            FormatArg::Plain => TextFormat::Plain,
            FormatArg::Encoded => TextFormat::Encoded,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportArg {
    Json,
    Tsv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    /// Reference labels themselves (requires --reference)
    Oracle,
    /// Oracle corrupted near chunk edges (requires --reference)
    BoundaryNoise,
    /// Frequency baseline (requires --table)
    Baseline,
    /// Line-protocol subprocess (requires --model-cmd)
    External,
}

/// Chunk geometry shared by every stage.
#[derive(Args)]
struct GeometryArgs {
    /// Chunk size in words
    #[arg(long, default_value_t = 30)]
    chunk_size: usize,
    /// Words shared by consecutive chunks [default: half the chunk size]
    #[arg(long)]
    overlap: Option<usize>,
}

impl GeometryArgs {
    fn config(&self) -> Result<ChunkConfig, CliError> {
        let overlap = self.overlap.unwrap_or(self.chunk_size / 2);
        ChunkConfig::new(self.chunk_size, overlap).map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Args)]
struct ModelArgs {
    /// Restoration model
    #[arg(long, value_enum)]
    model: ModelArg,
    /// Reference documents (plain restored text, one per input line) for
    /// the oracle and boundary-noise models
    #[arg(long)]
    reference: Option<String>,
    /// Boundary width in words for boundary-noise
    #[arg(long, default_value_t = 3)]
    boundary: usize,
    /// Corruption probability for boundary-noise
    #[arg(long, default_value_t = 1.0)]
    prob: f64,
    /// Seed for boundary-noise
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trained baseline table path
    #[arg(long)]
    table: Option<String>,
    /// External model command line, e.g. "python3 serve.py --beam 4"
    /// (single and double quotes group arguments); the subprocess reads
    /// one chunk per line and must answer one line per chunk
    #[arg(long)]
    model_cmd: Option<String>,
    /// Chunks per external-model request
    #[arg(long, default_value_t = 16)]
    batch_size: usize,
    /// Per-request timeout for the external model, in seconds
    #[arg(long, default_value_t = 60.0)]
    timeout_secs: f64,
}

impl ModelArgs {
    fn needs_reference(&self) -> bool {
        matches!(self.model, ModelArg::Oracle | ModelArg::BoundaryNoise)
    }

    /// Builds the model spec. Reference documents, where needed, are bound
    /// later per document.
    fn build(&self, format: TextFormat) -> Result<RestorerSpec, CliError> {
        match self.model {
            ModelArg::Oracle => Ok(RestorerSpec::Oracle),
            ModelArg::BoundaryNoise => {
                if !(0.0..=1.0).contains(&self.prob) {
                    return Err(CliError::Config(format!(
                        "--prob {} is outside [0, 1]",
                        self.prob
                    )));
                }
                Ok(RestorerSpec::BoundaryNoise {
                    boundary: self.boundary,
                    prob: self.prob,
                    seed: self.seed,
                })
            }
            ModelArg::Baseline => {
                let path = self.table.as_ref().ok_or_else(|| {
                    CliError::Config("--model baseline requires --table".into())
                })?;
                let data = read_input(path)?;
                let table = BaselineTable::load(data.as_bytes()).map_err(map_model_error)?;
                Ok(RestorerSpec::Baseline(Arc::new(table)))
            }
            ModelArg::External => {
                let raw = self.model_cmd.as_ref().ok_or_else(|| {
                    CliError::Config("--model external requires --model-cmd".into())
                })?;
                let argv = split_command(raw).ok_or_else(|| {
                    CliError::Config(format!("bad --model-cmd {raw:?}"))
                })?;
                let model = ExternalModel::spawn(
                    &argv,
                    format,
                    self.batch_size,
                    Duration::from_secs_f64(self.timeout_secs),
                )
                .map_err(map_model_error)?;
                Ok(RestorerSpec::External(Arc::new(model)))
            }
        }
    }

    /// Parses the reference file into one labeled document per line.
    fn load_references(&self, expected_docs: usize) -> Result<Vec<LabeledSequence>, CliError> {
        let Some(path) = &self.reference else {
            return Ok(Vec::new());
        };
        let docs = parse_plain_documents(path)?;
        if self.needs_reference() && docs.len() != expected_docs {
            return Err(CliError::Io(format!(
                "{path}: reference has {} lines but the input has {expected_docs}",
                docs.len()
            )));
        }
        Ok(docs)
    }
}

#[derive(Args)]
struct PrepareArgs {
    /// Raw UTF-8 corpus text
    #[arg(long)]
    input: String,
    /// Output TSV of `input<TAB>target` chunk pairs
    #[arg(long)]
    output: String,
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Target side format
    #[arg(long, value_enum, default_value_t = FormatArg::Plain)]
    format: FormatArg,
    /// Keep ASCII letters only
    #[arg(long)]
    ascii_only: bool,
}

#[derive(Args)]
struct SplitArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Document to split (the whole file is one word stream)
    #[arg(long)]
    input: String,
    /// Output file, one chunk per line
    #[arg(long)]
    output: String,
    /// Sidecar TSV `index<TAB>start<TAB>len` [default: <output>.idx]
    #[arg(long)]
    index: Option<String>,
}

#[derive(Args)]
struct RestoreArgs {
    /// Input documents, one per line, lowercase unpunctuated words
    #[arg(long)]
    input: String,
    /// Restored output, one line per input line
    #[arg(long)]
    output: String,
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Words in the overlap taken from the later chunk
    /// [default: half the overlap]
    #[arg(long)]
    min_words_cut: Option<usize>,
    /// Worker threads for chunk restoration
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Output format, and the format expected from an external model
    #[arg(long, value_enum, default_value_t = FormatArg::Plain)]
    format: FormatArg,
    #[command(flatten)]
    model: ModelArgs,
    /// Score the restored output against this plain-text reference
    #[arg(long)]
    eval_ref: Option<String>,
    /// Report format for --eval-ref
    #[arg(long, value_enum, default_value_t = ReportArg::Json)]
    report: ReportArg,
    /// Where the --eval-ref report goes [default: standard error]
    #[arg(long)]
    report_file: Option<String>,
}

#[derive(Args)]
struct MergeArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Words in the overlap taken from the later chunk
    #[arg(long)]
    min_words_cut: usize,
    /// Restored chunk lines, one per chunk
    #[arg(long)]
    chunks: String,
    /// Sidecar TSV written by `split`
    #[arg(long)]
    index: String,
    #[arg(long)]
    output: String,
    /// Format of the chunk lines and of the output
    #[arg(long, value_enum, default_value_t = FormatArg::Plain)]
    format: FormatArg,
    /// Original input chunk lines; required for encoded chunks, and used
    /// to realign plain chunks whose word count drifted
    #[arg(long)]
    words: Option<String>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Reference file, one document per line
    #[arg(long = "ref")]
    reference: String,
    /// Hypothesis file, line-aligned with the reference
    #[arg(long)]
    hyp: String,
    #[arg(long, value_enum, default_value_t = FormatArg::Plain)]
    format: FormatArg,
    #[arg(long, value_enum, default_value_t = ReportArg::Json)]
    report: ReportArg,
    /// Report destination
    #[arg(long, default_value = "-")]
    output: String,
}

#[derive(Args)]
struct SweepArgs {
    /// Reference documents (plain restored text, one per line); their
    /// lowercased words are the pipeline input
    #[arg(long)]
    input: String,
    #[command(flatten)]
    geometry: GeometryArgs,
    /// min_words_cut values: an inclusive range `A..B` or a comma list
    /// `0,4,7` [default: 0..overlap]
    #[arg(long)]
    min_words_cut: Option<String>,
    /// Output TSV with columns m, class, precision, recall, f1
    #[arg(long)]
    output: String,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct TrainBaselineArgs {
    /// TSV pairs from `prepare --format plain`
    #[arg(long)]
    pairs: String,
    /// Where the trained table goes
    #[arg(long)]
    output: String,
}

#[derive(Args)]
struct CompareArgs {
    /// First JSON report (the new system)
    #[arg(long)]
    a: String,
    /// Second JSON report (the baseline)
    #[arg(long)]
    b: String,
    /// Also show the L and $ rows
    #[arg(long)]
    all_classes: bool,
    #[arg(long, default_value = "-")]
    output: String,
}

/// Error categories mapped to exit codes: config 2, I/O 3, model 4,
/// evaluation mismatch 5.
#[derive(Debug)]
enum CliError {
    Config(String),
    Io(String),
    Model(String),
    Eval(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Model(_) => 4,
            CliError::Eval(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Io(m) | CliError::Model(m) | CliError::Eval(m) => m,
        }
    }
}

fn map_model_error(e: ModelError) -> CliError {
    match e {
        ModelError::ReferenceRequired | ModelError::InvalidProbability(_) => {
            CliError::Config(e.to_string())
        }
        ModelError::TableFormat { .. } => CliError::Io(e.to_string()),
        _ => CliError::Model(e.to_string()),
    }
}

fn map_pipeline_error(e: PipelineError) -> CliError {
    match e {
        PipelineError::Chunk(ref inner) => CliError::Config(inner.to_string()),
        PipelineError::Model(inner) => map_model_error(inner),
        PipelineError::Merge(MergeError::CutExceedsOverlap {
            min_words_cut,
            overlap,
        }) => CliError::Config(format!(
            "min_words_cut {min_words_cut} exceeds the overlap {overlap}"
        )),
        PipelineError::Merge(inner) => CliError::Model(inner.to_string()),
    }
}

fn read_input(path: &str) -> Result<String, CliError> {
    if path == "-" {
        let mut buffer = String::new();
        io::stdin()
            .read_to_string(&mut buffer)
            .map_err(|e| CliError::Io(format!("stdin: {e}")))?;
        Ok(buffer)
    } else {
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))
    }
}

fn write_output(path: &str, content: &str) -> Result<(), CliError> {
    if path == "-" {
        io::stdout()
            .write_all(content.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}")))
    } else {
        fs::write(path, content).map_err(|e| CliError::Io(format!("{path}: {e}")))
    }
}

fn input_lines(path: &str) -> Result<Vec<String>, CliError> {
    Ok(read_input(path)?.lines().map(str::to_string).collect())
}

fn parse_plain_documents(path: &str) -> Result<Vec<LabeledSequence>, CliError> {
    input_lines(path)?
        .iter()
        .enumerate()
        .map(|(i, line)| {
            LabeledSequence::parse_plain(line)
                .map_err(|e| CliError::Io(format!("{path}:{}: {e}", i + 1)))
        })
        .collect()
}

/// Splits a command line into argv, grouping with single or double quotes.
fn split_command(raw: &str) -> Option<Vec<String>> {
    let mut argv = Vec::new();
    let mut current = String::new();
    let mut in_word = false;
    let mut chars = raw.chars();
    while let Some(c) = chars.next() {
        match c {
            '\'' | '"' => {
                in_word = true;
                loop {
                    match chars.next() {
                        Some(end) if end == c => break,
                        Some(inner) => current.push(inner),
                        None => return None, // unterminated quote
                    }
                }
            }
            c if c.is_whitespace() => {
                if in_word {
                    argv.push(std::mem::take(&mut current));
                    in_word = false;
                }
            }
            c => {
                in_word = true;
                current.push(c);
            }
        }
    }
    if in_word {
        argv.push(current);
    }
    (!argv.is_empty()).then_some(argv)
}

/// min_words_cut default of half the overlap, the stable middle of the
/// useful range.
fn default_cut(cfg: &ChunkConfig) -> usize {
    cfg.overlap() / 2
}

fn validate_cut(min_words_cut: usize, cfg: &ChunkConfig) -> Result<(), CliError> {
    if min_words_cut > cfg.overlap() {
        return Err(CliError::Config(format!(
            "min_words_cut {min_words_cut} exceeds the overlap {}",
            cfg.overlap()
        )));
    }
    Ok(())
}

fn run_prepare(args: &PrepareArgs) -> Result<(), CliError> {
    let cfg = args.geometry.config()?;
    let raw = read_input(&args.input)?;
    let sentences = corpus::clean_text_opts(
        &raw,
        CleanOptions {
            ascii_only: args.ascii_only,
        },
    );
    let pairs = corpus::make_pairs(&sentences, &cfg, args.format.into());
    let mut out = String::new();
    for (input, target) in pairs {
        out.push_str(&input);
        out.push('\t');
        out.push_str(&target);
        out.push('\n');
    }
    write_output(&args.output, &out)
}

fn run_split(args: &SplitArgs) -> Result<(), CliError> {
    let cfg = args.geometry.config()?;
    let text = read_input(&args.input)?;
    let words: Vec<&str> = text.split_whitespace().collect();
    let chunks = chunker::split(&words, &cfg);

    let mut lines = String::new();
    let mut sidecar = String::new();
    for chunk in &chunks {
        lines.push_str(&chunk.words.join(" "));
        lines.push('\n');
        sidecar.push_str(&format!(
            "{}\t{}\t{}\n",
            chunk.index,
            chunk.start,
            chunk.words.len()
        ));
    }
    write_output(&args.output, &lines)?;
    match (&args.index, args.output.as_str()) {
        (Some(index), _) => write_output(index, &sidecar),
        (None, "-") => Ok(()), // no sidecar when streaming without --index
        (None, output) => write_output(&format!("{output}.idx"), &sidecar),
    }
}

fn run_restore(args: &RestoreArgs) -> Result<(), CliError> {
    let cfg = args.geometry.config()?;
    let min_words_cut = args.min_words_cut.unwrap_or_else(|| default_cut(&cfg));
    validate_cut(min_words_cut, &cfg)?;
    if args.workers == 0 {
        return Err(CliError::Config("--workers must be at least 1".into()));
    }
    if args.model.needs_reference() && args.model.reference.is_none() {
        return Err(CliError::Config(
            "this model needs --reference (plain restored text, one line per input line)".into(),
        ));
    }
    let format: TextFormat = args.format.into();
    let spec = args.model.build(format)?;

    let documents = input_lines(&args.input)?;
    let references = args.model.load_references(documents.len())?;
    let pipeline_cfg = PipelineConfig {
        chunking: cfg,
        min_words_cut,
        workers: args.workers,
    };

    let mut out = String::new();
    let mut restored_docs = Vec::with_capacity(documents.len());
    for (i, line) in documents.iter().enumerate() {
        let words: Vec<String> = line
            .split_whitespace()
            .map(|w| w.to_lowercase())
            .collect();
        let model = spec
            .for_document(references.get(i), &cfg)
            .map_err(map_model_error)?;
        let restored =
            restore_document(&words, model.as_ref(), &pipeline_cfg).map_err(map_pipeline_error)?;
        out.push_str(&match format {
            TextFormat::Plain => restored.render_plain(),
            TextFormat::Encoded => restored.encode(),
        });
        out.push('\n');
        restored_docs.push(restored);
    }
    write_output(&args.output, &out)?;

    if let Some(eval_ref) = &args.eval_ref {
        let refs = parse_plain_documents(eval_ref)?;
        if refs.len() != restored_docs.len() {
            return Err(CliError::Eval(format!(
                "{eval_ref}: reference has {} lines but the output has {}",
                refs.len(),
                restored_docs.len()
            )));
        }
        let mut pooled = ConfusionMatrix::new();
        for (reference, hypothesis) in refs.iter().zip(&restored_docs) {
            let matrix = eval::confusion(reference, hypothesis)
                .map_err(|e| CliError::Eval(e.to_string()))?;
            pooled.merge(&matrix);
        }
        let report = MetricsReport::from_confusion(&pooled);
        let rendered = render_report(&report, &pooled, args.report);
        match &args.report_file {
            Some(path) => write_output(path, &rendered)?,
            None => eprint!("{rendered}"),
        }
    }
    Ok(())
}

fn run_merge(args: &MergeArgs) -> Result<(), CliError> {
    let cfg = args.geometry.config()?;
    validate_cut(args.min_words_cut, &cfg)?;
    let format: TextFormat = args.format.into();

    let chunk_lines = input_lines(&args.chunks)?;
    let index_lines = input_lines(&args.index)?;
    if chunk_lines.len() != index_lines.len() {
        return Err(CliError::Io(format!(
            "{}: {} chunk lines but {} index rows",
            args.chunks,
            chunk_lines.len(),
            index_lines.len()
        )));
    }
    let word_lines = match &args.words {
        Some(path) => {
            let lines = input_lines(path)?;
            if lines.len() != chunk_lines.len() {
                return Err(CliError::Io(format!(
                    "{path}: {} word lines but {} chunk lines",
                    lines.len(),
                    chunk_lines.len()
                )));
            }
            Some(lines)
        }
        None => {
            if format == TextFormat::Encoded {
                return Err(CliError::Config(
                    "--format encoded requires --words (encoded lines carry no words)".into(),
                ));
            }
            None
        }
    };

    let mut items: Vec<(Chunk, LabeledSequence)> = Vec::with_capacity(chunk_lines.len());
    for (row, (line, index_line)) in chunk_lines.iter().zip(&index_lines).enumerate() {
        let fields: Vec<&str> = index_line.split('\t').collect();
        let parsed: Option<(usize, usize, usize)> = match fields.as_slice() {
            [i, s, l] => i
                .parse()
                .ok()
                .zip(s.parse().ok())
                .zip(l.parse().ok())
                .map(|((i, s), l)| (i, s, l)),
            _ => None,
        };
        let Some((index, start, len)) = parsed else {
            return Err(CliError::Io(format!(
                "{}:{}: bad index row (want index<TAB>start<TAB>len)",
                args.index,
                row + 1
            )));
        };
        let bad_line =
            |e: &dyn std::fmt::Display| CliError::Io(format!("{}:{}: {e}", args.chunks, row + 1));
        let (words, seq) = match (&word_lines, format) {
            (Some(lines), TextFormat::Encoded) => {
                let words: Vec<String> =
                    lines[row].split_whitespace().map(str::to_string).collect();
                let seq = LabeledSequence::decode(line, &words)
                    .map_err(|e| CliError::Model(format!("chunk {index}: {e}")))?;
                (words, seq)
            }
            (Some(lines), TextFormat::Plain) => {
                let words: Vec<String> =
                    lines[row].split_whitespace().map(str::to_string).collect();
                let parsed = LabeledSequence::parse_plain(line).map_err(|e| bad_line(&e))?;
                let aligned = merger::align(&words, &parsed);
                (words, aligned)
            }
            (None, _) => {
                let seq = LabeledSequence::parse_plain(line).map_err(|e| bad_line(&e))?;
                (seq.words(), seq)
            }
        };
        if words.len() != len {
            return Err(CliError::Model(format!(
                "chunk {index}: {} words but the index row says {len}; \
                 pass --words to realign drifting model output",
                words.len()
            )));
        }
        items.push((
            Chunk {
                index,
                start,
                words,
            },
            seq,
        ));
    }

    let total_words = items.last().map_or(0, |(c, _)| c.end());
    let chunks_only: Vec<Chunk> = items.iter().map(|(c, _)| c.clone()).collect();
    chunker::coverage_check(&chunks_only, total_words, &cfg)
        .map_err(|e| CliError::Io(format!("inconsistent chunks: {e}")))?;

    let merged =
        merger::merge(&items, &cfg, &MergeConfig::new(args.min_words_cut)).map_err(|e| match e {
            MergeError::CutExceedsOverlap { .. } => CliError::Config(e.to_string()),
            other => CliError::Model(other.to_string()),
        })?;
    let mut rendered = match format {
        TextFormat::Plain => merged.render_plain(),
        TextFormat::Encoded => merged.encode(),
    };
    rendered.push('\n');
    write_output(&args.output, &rendered)
}

fn run_evaluate(args: &EvaluateArgs) -> Result<(), CliError> {
    let ref_lines = input_lines(&args.reference)?;
    let hyp_lines = input_lines(&args.hyp)?;
    if ref_lines.len() != hyp_lines.len() {
        return Err(CliError::Eval(format!(
            "reference has {} lines but the hypothesis has {}",
            ref_lines.len(),
            hyp_lines.len()
        )));
    }
    let mut pooled = ConfusionMatrix::new();
    for (row, (ref_line, hyp_line)) in ref_lines.iter().zip(&hyp_lines).enumerate() {
        let matrix = match args.format {
            FormatArg::Plain => {
                let reference = LabeledSequence::parse_plain(ref_line)
                    .map_err(|e| CliError::Io(format!("{}:{}: {e}", args.reference, row + 1)))?;
                let hypothesis = LabeledSequence::parse_plain(hyp_line)
                    .map_err(|e| CliError::Io(format!("{}:{}: {e}", args.hyp, row + 1)))?;
                eval::confusion(&reference, &hypothesis)
            }
            FormatArg::Encoded => {
                let reference = chunkpunct::codec::parse_encoded(ref_line)
                    .map_err(|e| CliError::Io(format!("{}:{}: {e}", args.reference, row + 1)))?;
                let hypothesis = chunkpunct::codec::parse_encoded(hyp_line)
                    .map_err(|e| CliError::Io(format!("{}:{}: {e}", args.hyp, row + 1)))?;
                eval::confusion_of_labels(&reference, &hypothesis)
            }
        }
        .map_err(|e| CliError::Eval(format!("line {}: {e}", row + 1)))?;
        pooled.merge(&matrix);
    }
    let report = MetricsReport::from_confusion(&pooled);
    write_output(&args.output, &render_report(&report, &pooled, args.report))
}

fn parse_cut_values(spec: &str) -> Option<Vec<usize>> {
    if let Some((from, to)) = spec.split_once("..") {
        let from: usize = from.trim().parse().ok()?;
        let to: usize = to.trim().trim_start_matches('=').parse().ok()?;
        Some((from..=to).collect())
    } else {
        spec.split(',')
            .map(|v| v.trim().parse().ok())
            .collect::<Option<Vec<usize>>>()
    }
}

fn run_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let cfg = args.geometry.config()?;
    let cut_values = match &args.min_words_cut {
        Some(spec) => parse_cut_values(spec).ok_or_else(|| {
            CliError::Config(format!(
                "bad --min-words-cut {spec:?}: want an inclusive range A..B or a comma list"
            ))
        })?,
        None => (0..=cfg.overlap()).collect(),
    };
    for &m in &cut_values {
        validate_cut(m, &cfg)?;
    }
    if args.model.needs_reference() && args.model.reference.is_some() {
        return Err(CliError::Config(
            "sweep reads references from --input; drop --reference".into(),
        ));
    }
    let spec = args.model.build(TextFormat::Plain)?;
    let documents = parse_plain_documents(&args.input)?;

    let report =
        eval::sweep(&documents, &spec, &cfg, &cut_values, args.workers).map_err(|e| match e {
            eval::SweepError::CutOutOfRange { .. } => CliError::Config(e.to_string()),
            eval::SweepError::Pipeline { source, .. } => map_pipeline_error(source),
            eval::SweepError::Score { .. } => CliError::Eval(e.to_string()),
        })?;

    let mut out = String::from("m\tclass\tprecision\trecall\tf1\n");
    for entry in &report.entries {
        for symbol in eval::SlotSymbol::ALL {
            let c = entry.report.class(symbol);
            out.push_str(&format!(
                "{}\t{}\t{:.6}\t{:.6}\t{:.6}\n",
                entry.min_words_cut,
                symbol.name(),
                c.precision,
                c.recall,
                c.f1
            ));
        }
    }
    write_output(&args.output, &out)
}

fn run_train_baseline(args: &TrainBaselineArgs) -> Result<(), CliError> {
    let lines = input_lines(&args.pairs)?;
    let mut pairs = Vec::with_capacity(lines.len());
    for (row, line) in lines.iter().enumerate() {
        let Some((input, target)) = line.split_once('\t') else {
            return Err(CliError::Io(format!(
                "{}:{}: expected input<TAB>target",
                args.pairs,
                row + 1
            )));
        };
        pairs.push((input.to_string(), target.to_string()));
    }
    let table =
        train_baseline(pairs).map_err(|e| CliError::Io(format!("{}: {e}", args.pairs)))?;
    let mut buffer = Vec::new();
    table
        .save(&mut buffer)
        .map_err(|e| CliError::Io(e.to_string()))?;
    write_output(&args.output, &String::from_utf8_lossy(&buffer))
}

fn run_compare(args: &CompareArgs) -> Result<(), CliError> {
    let load = |path: &str| -> Result<MetricsReport, CliError> {
        let text = read_input(path)?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
        eval::report_from_json(&value)
            .ok_or_else(|| CliError::Io(format!("{path}: not a metrics report")))
    };
    let a = load(&args.a)?;
    let b = load(&args.b)?;
    let table = eval::compare(&a, &b, args.all_classes);
    write_output(&args.output, &table.to_string())
}

fn render_report(report: &MetricsReport, matrix: &ConfusionMatrix, format: ReportArg) -> String {
    match format {
        ReportArg::Json => {
            let mut json = eval::report_to_json(report, matrix).to_string();
            json.push('\n');
            json
        }
        ReportArg::Tsv => eval::report_to_tsv(report),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Prepare(args) => run_prepare(args),
        Command::Split(args) => run_split(args),
        Command::Restore(args) => run_restore(args),
        Command::Merge(args) => run_merge(args),
        Command::Evaluate(args) => run_evaluate(args),
        Command::Sweep(args) => run_sweep(args),
        Command::TrainBaseline(args) => run_train_baseline(args),
        Command::Compare(args) => run_compare(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("chunkpunct: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
