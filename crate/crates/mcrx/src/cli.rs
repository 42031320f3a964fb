//! Command-line interface.
//!
//! Exit codes: 0 success, 2 usage error (argument parsing/validation),
//! 3 data error (unparsable input, bad index file, unknown ids),
//! 1 internal error. Results go to stdout, diagnostics to stderr.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mcrx_core::{
    brute_knn, compute_means, knn_encoded, predict_item_based, predict_user_based, Field,
    IndexMode, KnnConfig, PredictionSource, RatingScale, ScorerConfig, ScorerKind,
};

use crate::eval::{
    emit_report, emit_report_to_path, mode_name, run_experiment, ExperimentConfig,
    ReportFormat, Rounding, Similarity,
};
use crate::ingest::{load_ratings, RatingsFormat};
use crate::store::{load_index, save_index};
use crate::{build_mode_index, EvalError, IngestError};

#[derive(Parser)]
#[command(
    name = "mcrx",
    version,
    about = "Collaborative filtering over a two-field inverted index of mean-centered rates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an index from a rating file and persist it.
    Index(IndexArgs),
    /// Print the top-k neighbors of a document stored in an index.
    Knn(KnnArgs),
    /// Predict a single rating.
    Predict(PredictArgs),
    /// Run the MAE evaluation sweep and emit a report.
    Evaluate(EvaluateArgs),
    /// Print index statistics.
    Inspect(InspectArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Ml100k,
    #[value(name = "ml1m_10m", alias = "ml1m-10m")]
    Ml1m10m,
    Csv,
}

impl From<FormatArg> for RatingsFormat {
    fn from(value: FormatArg) -> Self {
        match value {
            FormatArg::Ml100k => RatingsFormat::Ml100k,
            FormatArg::Ml1m10m => RatingsFormat::Ml1m10m,
            FormatArg::Csv => RatingsFormat::Csv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    User,
    Item,
}

impl From<ModeArg> for IndexMode {
    fn from(value: ModeArg) -> Self {
        match value {
            ModeArg::User => IndexMode::UserBased,
            ModeArg::Item => IndexMode::ItemBased,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScorerArg {
    Tf,
    Tfidf,
    Bm25,
    Dirichlet,
    #[value(name = "jelinek_mercer", alias = "jelinek-mercer")]
    JelinekMercer,
}

impl From<ScorerArg> for ScorerKind {
    fn from(value: ScorerArg) -> Self {
        match value {
            ScorerArg::Tf => ScorerKind::Tf,
            ScorerArg::Tfidf => ScorerKind::TfIdf,
            ScorerArg::Bm25 => ScorerKind::Bm25,
            ScorerArg::Dirichlet => ScorerKind::Dirichlet,
            ScorerArg::JelinekMercer => ScorerKind::JelinekMercer,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SimilarityArg {
    Tf,
    Tfidf,
    Bm25,
    Dirichlet,
    #[value(name = "jelinek_mercer", alias = "jelinek-mercer")]
    JelinekMercer,
    Acs,
    Wacs,
    Pearson,
}

impl From<SimilarityArg> for Similarity {
    fn from(value: SimilarityArg) -> Self {
        match value {
            SimilarityArg::Tf => Similarity::Tf,
            SimilarityArg::Tfidf => Similarity::TfIdf,
            SimilarityArg::Bm25 => Similarity::Bm25,
            SimilarityArg::Dirichlet => Similarity::Dirichlet,
            SimilarityArg::JelinekMercer => Similarity::JelinekMercer,
            SimilarityArg::Acs => Similarity::Acs,
            SimilarityArg::Wacs => Similarity::Wacs,
            SimilarityArg::Pearson => Similarity::Pearson,
        }
    }
}

/// Rating-file selection shared by the commands that ingest data.
#[derive(Args)]
struct DatasetArgs {
    /// Rating file to load.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    format: FormatArg,
    /// Scale minimum; required for --format csv.
    #[arg(long)]
    scale_min: Option<f64>,
    /// Scale maximum; required for --format csv.
    #[arg(long)]
    scale_max: Option<f64>,
    /// Scale step; required for --format csv.
    #[arg(long)]
    scale_step: Option<f64>,
}

impl DatasetArgs {
    fn csv_scale(&self) -> Result<Option<RatingScale>, CliError> {
        match (self.scale_min, self.scale_max, self.scale_step) {
            (None, None, None) => Ok(None),
            (Some(min), Some(max), Some(step)) => RatingScale::new(min, max, step)
                .map(Some)
                .map_err(|e| CliError::Usage(e.to_string())),
            _ => Err(CliError::Usage(
                "--scale-min, --scale-max, and --scale-step must be given together".into(),
            )),
        }
    }

    fn load(&self) -> Result<mcrx_core::RatingsDataset, CliError> {
        let scale = self.csv_scale()?;
        if matches!(self.format, FormatArg::Csv) && scale.is_none() {
            return Err(CliError::Usage(
                "--format csv requires --scale-min/--scale-max/--scale-step".into(),
            ));
        }
        Ok(load_ratings(&self.input, self.format.into(), scale)?)
    }
}

#[derive(Args)]
struct ScorerParams {
    /// BM25 term-frequency saturation.
    #[arg(long = "bm25-k1", default_value_t = 1.2)]
    bm25_k1: f64,
    /// BM25 length normalization in [0, 1].
    #[arg(long = "bm25-b", default_value_t = 0.75)]
    bm25_b: f64,
    /// Dirichlet smoothing prior.
    #[arg(long, default_value_t = 2000.0)]
    mu: f64,
    /// Jelinek-Mercer interpolation weight in (0, 1).
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
}

impl ScorerParams {
    fn config(&self, kind: ScorerKind) -> Result<ScorerConfig, CliError> {
        if !(self.mu > 0.0) {
            return Err(CliError::Usage("--mu must be positive".into()));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(CliError::Usage("--lambda must lie strictly in (0, 1)".into()));
        }
        Ok(ScorerConfig {
            kind,
            bm25_k1: self.bm25_k1,
            bm25_b: self.bm25_b,
            dirichlet_mu: self.mu,
            jm_lambda: self.lambda,
        })
    }
}

#[derive(Args)]
struct IndexArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    /// Whether documents are user profiles or item profiles.
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Integer factor applied to mean-centered rates before truncation.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(1..))]
    scale_factor: u32,
    /// Output index file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct KnnArgs {
    #[arg(long)]
    index: PathBuf,
    /// Document whose neighbors to retrieve (a user id in a user-based
    /// index, an item id in an item-based one).
    #[arg(long)]
    query_id: u64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    /// Expansion factor: each field search requests k*m hits.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    m: u64,
    #[arg(long, value_enum, default_value = "tf")]
    similarity: ScorerArg,
    #[command(flatten)]
    scorer: ScorerParams,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    index: PathBuf,
    /// Training rating file (must be the data the index was built from).
    #[arg(long)]
    train: PathBuf,
    #[arg(long, value_enum)]
    format: FormatArg,
    #[arg(long)]
    scale_min: Option<f64>,
    #[arg(long)]
    scale_max: Option<f64>,
    #[arg(long)]
    scale_step: Option<f64>,
    #[arg(long)]
    user: u64,
    #[arg(long)]
    item: u64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    m: u64,
    #[arg(long, value_enum, default_value = "tf")]
    similarity: SimilarityArg,
    #[command(flatten)]
    scorer: ScorerParams,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    /// Comma-separated subset of {user, item}.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "user,item")]
    modes: Vec<ModeArg>,
    /// Comma-separated subset of the eight similarities.
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "tf,tfidf,bm25,dirichlet,jelinek_mercer,acs,wacs,pearson"
    )]
    similarities: Vec<SimilarityArg>,
    /// Comma-separated neighborhood sizes, ascending.
    #[arg(long = "k-list", value_delimiter = ',', default_value = "10,40,160")]
    k_list: Vec<u64>,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    m: u64,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(1..))]
    scale_factor: u32,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    splits: u64,
    #[arg(long, default_value_t = 0.8)]
    train_fraction: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Report file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit tab-separated instead of comma-separated values.
    #[arg(long)]
    tsv: bool,
    /// Score clamped raw predictions instead of rounded ones.
    #[arg(long)]
    raw: bool,
    #[command(flatten)]
    scorer: ScorerParams,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long)]
    index: PathBuf,
    /// Also print one document's stored statistics and terms.
    #[arg(long)]
    doc_id: Option<u64>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Data(_) => ExitCode::from(3),
            CliError::Internal(_) => ExitCode::from(1),
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Internal(m) => m,
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::MissingScale => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<crate::StoreError> for CliError {
    fn from(e: crate::StoreError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Io(_) => CliError::Internal(e.to_string()),
            EvalError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

pub fn run() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Index(args) => cmd_index(args),
        Command::Knn(args) => cmd_knn(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Inspect(args) => cmd_inspect(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            err.exit_code()
        }
    }
}

fn cmd_index(args: IndexArgs) -> Result<(), CliError> {
    let dataset = args.dataset.load()?;
    let means = compute_means(&dataset);
    let mode: IndexMode = args.mode.into();
    let index = build_mode_index(&dataset, &means, mode, args.scale_factor);
    save_index(&index, &args.out)?;
    eprintln!(
        "indexed {} documents ({} ratings, {} mode, scale factor {}) -> {}",
        index.doc_count(),
        dataset.len(),
        mode_name(mode),
        args.scale_factor,
        args.out.display()
    );
    Ok(())
}

fn cmd_knn(args: KnnArgs) -> Result<(), CliError> {
    let index = load_index(&args.index)?;
    let query = index
        .document_terms(Field::Prate, args.query_id)
        .ok_or_else(|| CliError::Data(format!("unknown query id {}", args.query_id)))?;
    let scorer = args.scorer.config(args.similarity.into())?;
    let config = KnnConfig::new(args.k as usize, args.m as usize);
    let neighbors = knn_encoded(&index, &query, &config, &scorer, Some(args.query_id));
    let mut stdout = String::new();
    for n in &neighbors {
        stdout.push_str(&format!("{}\t{:.8e}\n", n.neighbor_id, n.similarity));
    }
    print!("{stdout}");
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<(), CliError> {
    let index = load_index(&args.index)?;
    let dataset_args = DatasetArgs {
        input: args.train.clone(),
        format: args.format,
        scale_min: args.scale_min,
        scale_max: args.scale_max,
        scale_step: args.scale_step,
    };
    let train = dataset_args.load()?;
    let means = compute_means(&train);
    let mode = index.mode();
    let (query_id, profile, computed_mean) = match mode {
        IndexMode::UserBased => (
            args.user,
            train.user_profile(args.user),
            means.user_mean.get(&args.user).copied(),
        ),
        IndexMode::ItemBased => (
            args.item,
            train.item_profile(args.item),
            means.item_mean.get(&args.item).copied(),
        ),
    };

    let similarity: Similarity = args.similarity.into();
    let k = args.k as usize;
    let neighbors = if let Some(kind) = similarity.scorer_kind() {
        let scorer = args.scorer.config(kind)?;
        let config = KnnConfig::new(k, args.m as usize);
        match (profile, computed_mean) {
            (Some(profile), Some(_)) => {
                // The index carries the precomputed profile mean, so query
                // encoding needs no second pass over the training data.
                let stored_mean = index
                    .doc_record(query_id)
                    .map(|d| d.stored_mean)
                    .or(computed_mean)
                    .unwrap_or(means.global_mean);
                mcrx_core::knn(&index, profile, stored_mean, &config, &scorer, Some(query_id))
            }
            _ => Vec::new(),
        }
    } else {
        let baseline = similarity.baseline_kind().expect("non-index similarity");
        brute_knn(&train, &means, query_id, mode, k, baseline)
    };

    let prediction = match mode {
        IndexMode::UserBased => {
            predict_user_based(args.user, args.item, &neighbors, &train, &means)
        }
        IndexMode::ItemBased => {
            predict_item_based(args.user, args.item, &neighbors, &train, &means)
        }
    };
    println!("value\t{:.4}", prediction.value);
    println!("rounded\t{}", prediction.rounded);
    println!(
        "source\t{}",
        match prediction.source {
            PredictionSource::Full => "full",
            PredictionSource::BaseOnly => "base_only",
        }
    );
    println!("neighbors_used\t{}", prediction.neighbor_count_used);
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let dataset = args.dataset.load()?;
    let mut k_values: Vec<usize> = args.k_list.iter().map(|&k| k as usize).collect();
    k_values.sort_unstable();
    k_values.dedup();
    if k_values.first() == Some(&0) {
        return Err(CliError::Usage("k values must be positive".into()));
    }
    let config = ExperimentConfig {
        modes: args.modes.iter().map(|&m| m.into()).collect(),
        similarities: args.similarities.iter().map(|&s| s.into()).collect(),
        k_values,
        expansion_factor: args.m as usize,
        scale_factor: args.scale_factor,
        split_count: args.splits as usize,
        train_fraction: args.train_fraction,
        base_seed: args.seed,
        rounding: if args.raw { Rounding::Raw } else { Rounding::Rounded },
        scorer_params: args.scorer.config(ScorerKind::Tf)?,
    };
    let report = run_experiment(&dataset, &config)?;
    for baseline in &report.mean_baselines {
        eprintln!(
            "mean-only baseline {}: mae {:.6} (std {:.6})",
            mode_name(baseline.mode),
            baseline.mae_mean,
            baseline.mae_std
        );
    }
    let format = if args.tsv { ReportFormat::Tsv } else { ReportFormat::Csv };
    match &args.out {
        Some(path) => {
            emit_report_to_path(&report, path, format)?;
            eprintln!("wrote {} rows to {}", report.rows.len(), path.display());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            emit_report(&report, &mut stdout, format)?;
        }
    }
    Ok(())
}

fn cmd_inspect(args: InspectArgs) -> Result<(), CliError> {
    let index = load_index(&args.index)?;
    println!("mode\t{}", mode_name(index.mode()));
    println!("scale_factor\t{}", index.scale_factor());
    println!("documents\t{}", index.doc_count());
    println!("prate_terms\t{}", index.vocab_len(Field::Prate));
    println!("nrate_terms\t{}", index.vocab_len(Field::Nrate));
    println!("total_term_occurrences\t{}", index.field_total_terms(Field::Prate));
    println!("avg_doc_length\t{:.6}", index.avg_doc_length(Field::Prate));
    if let Some(doc_id) = args.doc_id {
        let record = index
            .doc_record(doc_id)
            .ok_or_else(|| CliError::Data(format!("unknown document id {doc_id}")))?;
        println!("doc_id\t{doc_id}");
        println!("stored_mean\t{:.6}", record.stored_mean);
        println!("norm\t{:.6}", record.norm);
        println!("doc_length\t{}", record.doc_length);
        let terms = index
            .document_terms(Field::Prate, doc_id)
            .expect("doc id resolved above");
        let rendered: Vec<String> =
            terms.iter().map(|(t, f)| format!("{t}:{f}")).collect();
        println!("prate\t{}", rendered.join(" "));
    }
    Ok(())
}
