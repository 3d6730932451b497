use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use vizlearn::analysis::{self, AnalysisContext, StudyOptions};
use vizlearn::apt::default_apt_pairs;
use vizlearn::corpus::{parse_corpus_str, serialize_corpus, RankedPair, StudyCorpus};
use vizlearn::learn::{self, train, TrainConfig, WeightModel};
use vizlearn::recommend::{self, bundled_schema, bundled_schemas, DatasetSchema, Query};
use vizlearn::report::RunManifest;
use vizlearn::rules::{parse_rules, shipped_rules_source, ConstraintSet};
use vizlearn::spec::Task;

#[derive(Parser)]
#[command(name = "vizlearn", version, about = "Learn chart-design rule weights from ranked pairs and analyse study corpora")]
struct Cli {
    /// Worker threads for batch studies (default: logical CPUs).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Log more (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a corpus file and summarize its papers.
    Ingest {
        #[arg(long)]
        corpus: PathBuf,
        /// Write the validated corpus here in canonical form.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Learn weights from ranked pairs.
    Train(TrainArgs),
    /// Rank designs for a field query.
    Recommend(RecommendArgs),
    /// Run one named analysis.
    Analyze {
        /// coverage | shifts | influence | recshift | mini
        name: String,
        #[command(flatten)]
        args: AnalyzeArgs,
    },
    /// Run every analysis into one directory.
    Report(AnalyzeArgs),
    /// List registered trainers and analyses.
    List,
}

#[derive(Args)]
struct RulesArg {
    /// Rule file (default: the shipped rules).
    #[arg(long)]
    rules: Option<PathBuf>,
}

#[derive(Args)]
struct TrainFlags {
    /// TOML file with `[train]` and `[analysis]` tables.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    trainer: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    regularization: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long)]
    learning_rate: Option<f64>,
}

#[derive(Args)]
struct TrainArgs {
    /// Corpus whose significant pairs are trained on (repeatable).
    #[arg(long)]
    corpus: Vec<PathBuf>,
    /// Built-in baseline pairs to include; `apt` is the only one.
    #[arg(long)]
    baseline: Option<String>,
    #[command(flatten)]
    rules: RulesArg,
    #[command(flatten)]
    flags: TrainFlags,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RecommendArgs {
    /// Bundled schema name (cars, movies, weather) or a schema JSON file.
    #[arg(long)]
    schema: String,
    /// Comma-separated field names.
    #[arg(long, value_delimiter = ',', required = true)]
    fields: Vec<String>,
    #[arg(long, default_value = "value")]
    task: String,
    /// Weight model JSON (default: the rule file's default weights).
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[command(flatten)]
    rules: RulesArg,
    /// Write JSON lines here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Study corpus (required by every analysis except `mini`).
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[command(flatten)]
    rules: RulesArg,
    #[command(flatten)]
    flags: TrainFlags,
    /// Directory for report files.
    #[arg(long)]
    out_dir: PathBuf,
    /// Candidates per query for `recshift`.
    #[arg(long)]
    k: Option<usize>,
    /// Largest field subset per query for `recshift`.
    #[arg(long)]
    max_fields: Option<usize>,
    /// Extra schema JSON files for `recshift` (default: the bundled three).
    #[arg(long)]
    schema: Vec<PathBuf>,
    /// Model that picks `recshift` candidates (default: rule weights).
    #[arg(long)]
    default_model: Option<PathBuf>,
    /// Flat-cluster counts to cut dendrograms at.
    #[arg(long, value_delimiter = ',')]
    cuts: Option<Vec<usize>>,
    /// Sign clustering keeps rules shifted by at least this many papers.
    #[arg(long)]
    min_papers_shifted: Option<usize>,
    /// Record the wall-clock time in manifests (breaks byte-identical output).
    #[arg(long)]
    timestamp: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    train: Option<TrainConfig>,
    #[serde(default)]
    analysis: AnalysisSettings,
}

#[derive(Debug, Clone, PartialEq, Deserialize, serde::Serialize)]
#[serde(default, deny_unknown_fields)]
struct AnalysisSettings {
    k: usize,
    max_fields: usize,
    cuts: Vec<usize>,
    min_papers_shifted: usize,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        AnalysisSettings {
            k: 100,
            max_fields: 2,
            cuts: vec![2, 3, 7],
            min_papers_shifted: StudyOptions::default().min_papers_shifted,
        }
    }
}

/// Input problems: exit code 1.
#[derive(Debug)]
struct Invalid(String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Invalid(msg.into()).into()
}

fn is_validation(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        e.is::<Invalid>()
            || e.downcast_ref::<vizlearn::Error>().is_some_and(|v| v.is_validation())
            || e.is::<vizlearn::error::CorpusError>()
            || e.is::<vizlearn::error::RuleErrors>()
            || e.is::<vizlearn::error::LearnError>()
            || e.is::<vizlearn::error::RecommendError>()
            || e.is::<vizlearn::error::AnalysisError>()
            || e.is::<vizlearn::error::LayoutError>()
            || e.is::<serde_json::Error>()
            || e.is::<toml::de::Error>()
    })
}

fn read_input(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))
}

fn write_output(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn load_rules(arg: &RulesArg, manifest: RunManifest) -> Result<(ConstraintSet, RunManifest)> {
    let (text, label) = match &arg.rules {
        Some(p) => (read_input(p)?, p.display().to_string()),
        None => (shipped_rules_source().to_string(), "<shipped>".to_string()),
    };
    let set = parse_rules(&text).with_context(|| format!("rule file {label}"))?;
    Ok((set, manifest.input("rules", &label, text.as_bytes())))
}

fn load_corpus(path: &Path, manifest: RunManifest) -> Result<(StudyCorpus, RunManifest)> {
    let text = read_input(path)?;
    let corpus = parse_corpus_str(&text).with_context(|| format!("corpus {}", path.display()))?;
    Ok((corpus, manifest.input("corpus", &path.display().to_string(), text.as_bytes())))
}

fn load_config(path: Option<&Path>) -> Result<ConfigFile> {
    match path {
        Some(p) => {
            let text = read_input(p)?;
            toml::from_str(&text).with_context(|| format!("config {}", p.display()))
        }
        None => Ok(ConfigFile::default()),
    }
}

fn train_config(file: &ConfigFile, flags: &TrainFlags) -> Result<TrainConfig> {
    let mut cfg = file.train.clone().unwrap_or_default();
    if let Some(t) = &flags.trainer {
        cfg.trainer = t.clone();
    }
    if let Some(s) = flags.seed {
        cfg.seed = s;
    }
    if let Some(r) = flags.regularization {
        cfg.regularization = r;
    }
    if let Some(e) = flags.epochs {
        cfg.epochs = e;
    }
    if let Some(m) = flags.margin {
        cfg.margin = m;
    }
    if let Some(l) = flags.learning_rate {
        cfg.learning_rate = l;
    }
    cfg.validate()?;
    learn::trainer(&cfg.trainer)?;
    Ok(cfg)
}

fn load_model(path: &Path, set: &ConstraintSet) -> Result<WeightModel> {
    let text = read_input(path)?;
    let model = WeightModel::from_json(&text).with_context(|| format!("model {}", path.display()))?;
    model
        .check_layout(set)
        .with_context(|| format!("model {} does not match the rules", path.display()))?;
    Ok(model)
}

fn load_schema(name: &str) -> Result<DatasetSchema> {
    if let Some(s) = bundled_schema(name) {
        return Ok(s);
    }
    let path = Path::new(name);
    if !path.exists() {
        return Err(invalid(format!(
            "schema {name:?} is neither a bundled schema (cars, movies, weather) nor a file"
        )));
    }
    Ok(DatasetSchema::from_json(&read_input(path)?)?)
}

fn cmd_ingest(corpus: &Path, out: Option<&Path>) -> Result<()> {
    let text = read_input(corpus)?;
    let parsed = parse_corpus_str(&text).with_context(|| format!("corpus {}", corpus.display()))?;
    let summary = parsed.summary();
    println!("{:<32} {:>6} {:>12} {:>9}", "paper", "pairs", "significant", "excluded");
    for s in &summary {
        println!(
            "{:<32} {:>6} {:>12} {:>9}",
            s.paper_id, s.pairs, s.significant, s.excluded
        );
    }
    let excluded: usize = summary.iter().map(|s| s.excluded).sum();
    println!(
        "{} papers, {} pairs, {} excluded as not significant",
        summary.len(),
        summary.iter().map(|s| s.pairs).sum::<usize>(),
        excluded
    );
    if let Some(out) = out {
        write_output(out, &serialize_corpus(&parsed))?;
    }
    Ok(())
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let mut manifest = RunManifest::new("train");
    let (set, m) = load_rules(&args.rules, manifest)?;
    manifest = m;
    let file = load_config(args.flags.config.as_deref())?;
    let cfg = train_config(&file, &args.flags)?;
    let mut pairs: Vec<RankedPair> = Vec::new();
    match args.baseline.as_deref() {
        Some("apt") => pairs.extend(default_apt_pairs()),
        Some(other) => return Err(invalid(format!("unknown baseline {other:?} (expected apt)"))),
        None => {}
    }
    for path in &args.corpus {
        let (corpus, m) = load_corpus(path, manifest)?;
        manifest = m;
        for id in corpus.paper_ids() {
            pairs.extend(corpus.significant_pairs(id));
        }
    }
    if pairs.is_empty() {
        return Err(invalid("no training pairs: pass --corpus and/or --baseline apt"));
    }
    let model = train(&pairs, &set, &cfg)?;
    let agree = learn::agreement_rate(&pairs, &model, &set)?;
    write_output(&args.out, &model.to_json())?;
    eprintln!(
        "trained {} weights on {} pairs with {} (agreement {:.3}); inputs {}",
        model.len(),
        pairs.len(),
        cfg.trainer,
        agree,
        manifest
            .inputs
            .iter()
            .map(|i| format!("{}={}", i.role, &i.sha256[..12]))
            .collect::<Vec<_>>()
            .join(" ")
    );
    Ok(())
}

fn cmd_recommend(args: &RecommendArgs) -> Result<()> {
    let (set, _) = load_rules(&args.rules, RunManifest::new("recommend"))?;
    let schema = load_schema(&args.schema)?;
    let task: Task = args
        .task
        .parse()
        .map_err(|e| invalid(format!("--task: {e}")))?;
    let model = match &args.model {
        Some(p) => load_model(p, &set)?,
        None => WeightModel::defaults(&set),
    };
    let query = Query {
        fields: args.fields.clone(),
        task,
    };
    let recs = recommend::recommend(&query, &schema, &set, &model, args.k)?;
    let text = recommend::to_json_lines(&recs);
    match &args.out {
        Some(p) => write_output(p, &text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn build_context(name: &str, args: &AnalyzeArgs, needs_corpus: bool) -> Result<AnalysisContext> {
    let mut manifest = RunManifest::new(name);
    let (set, m) = load_rules(&args.rules, manifest)?;
    manifest = m;
    let file = load_config(args.flags.config.as_deref())?;
    let cfg = train_config(&file, &args.flags)?;
    let mut settings = file.analysis.clone();
    if let Some(k) = args.k {
        settings.k = k;
    }
    if let Some(n) = args.max_fields {
        settings.max_fields = n;
    }
    if let Some(c) = &args.cuts {
        settings.cuts = c.clone();
    }
    if let Some(n) = args.min_papers_shifted {
        settings.min_papers_shifted = n;
    }

    let corpus = match &args.corpus {
        Some(p) => {
            let (c, m) = load_corpus(p, manifest)?;
            manifest = m;
            c
        }
        None if needs_corpus => {
            return Err(invalid(format!("analysis {name} needs --corpus")));
        }
        None => StudyCorpus::new(),
    };
    let mut schemas = bundled_schemas();
    for p in &args.schema {
        let text = read_input(p)?;
        schemas.push(DatasetSchema::from_json(&text)?);
        manifest = manifest.input("schema", &p.display().to_string(), text.as_bytes());
    }
    let default_model = match &args.default_model {
        Some(p) => {
            let model = load_model(p, &set)?;
            manifest = manifest.input("default_model", &p.display().to_string(), model.to_json().as_bytes());
            model
        }
        None => WeightModel::defaults(&set),
    };
    manifest = manifest.with_config(&serde_json::json!({ "train": cfg, "analysis": settings }));
    if args.timestamp {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        manifest.timestamp = Some(format!("unix:{secs}"));
    }
    Ok(AnalysisContext {
        corpus,
        baseline_pairs: default_apt_pairs(),
        set,
        cfg,
        options: StudyOptions {
            min_papers_shifted: settings.min_papers_shifted,
        },
        cuts: settings.cuts,
        k: settings.k,
        max_fields: settings.max_fields,
        schemas,
        default_model,
        manifest,
    })
}

fn run_analyses(names: &[&str], args: &AnalyzeArgs, command: &str) -> Result<bool> {
    let needs_corpus = names.iter().any(|n| *n != "mini");
    let ctx = build_context(command, args, needs_corpus)?;
    let mut all_passed = true;
    for name in names {
        let a = analysis::analysis(name)?;
        let out = a.run(&ctx)?;
        for f in &out.files {
            write_output(&args.out_dir.join(&f.name), &f.contents)?;
        }
        println!("[{}] {}", a.name(), out.summary);
        all_passed &= out.passed;
    }
    Ok(all_passed)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(invalid("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    match &cli.command {
        Command::Ingest { corpus, out } => cmd_ingest(corpus, out.as_deref()),
        Command::Train(args) => cmd_train(args),
        Command::Recommend(args) => cmd_recommend(args),
        Command::Analyze { name, args } => {
            // reject unknown names before touching any input
            analysis::analysis(name)?;
            if !run_analyses(&[name.as_str()], args, &format!("analyze {name}"))? {
                return Err(invalid(format!("analysis {name} reported failed checks")));
            }
            Ok(())
        }
        Command::Report(args) => {
            let names: Vec<&'static str> = analysis::analyses().iter().map(|a| a.name()).collect();
            if !run_analyses(&names, args, "report")? {
                return Err(invalid("some analyses reported failed checks"));
            }
            Ok(())
        }
        Command::List => {
            println!("trainers:");
            for t in learn::trainers() {
                println!("  {:<12} {}", t.name(), t.description());
            }
            println!("analyses:");
            for a in analysis::analyses() {
                println!("  {:<12} {}", a.name(), a.description());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::new()
        .filter_level(match cli.verbose {
            0 => log::LevelFilter::Warn,
            1 => log::LevelFilter::Info,
            _ => log::LevelFilter::Debug,
        })
        .parse_default_env()
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_validation(&e) {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
