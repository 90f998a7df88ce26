use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use titleqa::analysis::STOPWORDS;
use titleqa::corpus::IngestOptions;
use titleqa::eval::render_table;
use titleqa::pipeline::answer_question;
use titleqa::{
    analyze, collect_training_data, fit_model, ingest_corpus_with, load_pageviews, load_questions,
    run_eval, write_feature_dump, EngineId, Error, InvertedIndex, Model, Question, Resources,
    RunConfig, WebMock,
};

// Like println!, but a closed stdout (e.g. piped into `head`) is not fatal.
macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

const STORE_FILE: &str = "store.tqa";
const INDEX_FILE: &str = "index.tqa";

#[derive(Parser, Debug)]
#[command(
    name = "titleqa",
    version,
    about = "Answer trivia questions with encyclopedia titles"
)]
struct Cli {
    /// Print the analyzed tokens of TEXT, one per line, and exit.
    #[arg(long, value_name = "TEXT", global = true)]
    show_analysis: Option<String>,

    /// Print the stopword list and exit.
    #[arg(long, global = true)]
    show_stopwords: bool,

    /// Flat `key = value` config file.
    #[arg(long, value_name = "FILE", global = true)]
    config: Option<PathBuf>,

    /// Override one config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,

    /// Enable the canned web engine backed by this fixture.
    #[arg(long, value_name = "FIXTURE", global = true)]
    webmock: Option<PathBuf>,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build an index directory from a JSON Lines dump.
    Index {
        corpus: PathBuf,
        #[arg(long)]
        pageviews: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Answer one question and print the top answers.
    Ask {
        question: String,
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        top: usize,
    },
    /// Fit a confidence model on labelled questions.
    Train {
        questions: PathBuf,
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the training matrix as TSV.
        #[arg(long, value_name = "PATH")]
        dump_features: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Measure recall and MRR on labelled questions.
    Eval {
        questions: PathBuf,
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Also write the report as JSON.
        #[arg(long, value_name = "PATH")]
        report_out: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    workers: Option<usize>,
}

/// Failures split by exit code.
enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Usage(e.to_string()),
            other => Failure::Data(other.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn resolve_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply_file(path).map_err(|e| match e {
            Error::Io { .. } => Failure::Data(e.to_string()),
            other => Failure::Usage(other.to_string()),
        })?;
    }
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k, v)?;
    }
    if let Some(w) = &cli.webmock {
        cfg.webmock = Some(w.clone());
        if !cfg.pipeline.engines.contains(&EngineId::Webmock) {
            cfg.pipeline.engines.push(EngineId::Webmock);
        }
    }
    match &cli.command {
        Some(Command::Index {
            corpus,
            pageviews,
            out,
        }) => {
            cfg.corpus = Some(corpus.clone());
            if pageviews.is_some() {
                cfg.pageviews = pageviews.clone();
            }
            cfg.index = Some(out.clone());
        }
        Some(Command::Ask { index, model, .. }) => {
            cfg.index = Some(index.clone());
            if model.is_some() {
                cfg.model = model.clone();
            }
        }
        Some(Command::Train {
            index, out, run, ..
        }) => {
            cfg.index = Some(index.clone());
            cfg.model = Some(out.clone());
            if let Some(w) = run.workers {
                cfg.workers = w;
            }
        }
        Some(Command::Eval {
            index, model, run, ..
        }) => {
            cfg.index = Some(index.clone());
            cfg.model = Some(model.clone());
            if let Some(w) = run.workers {
                cfg.workers = w;
            }
        }
        None => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_index(dir: &Path) -> Result<InvertedIndex, Failure> {
    let path = dir.join(INDEX_FILE);
    if !path.is_file() {
        return Err(Failure::Data(format!(
            "no index at {} (build one with `titleqa index`)",
            dir.display()
        )));
    }
    Ok(InvertedIndex::load(&path)?)
}

fn load_webmock(cfg: &RunConfig) -> Result<Option<WebMock>, Failure> {
    if !cfg.pipeline.engines.contains(&EngineId::Webmock) {
        return Ok(None);
    }
    match &cfg.webmock {
        Some(p) => Ok(Some(WebMock::load(p)?)),
        None => Err(Failure::Usage(
            "webmock engine enabled without a fixture".into(),
        )),
    }
}

fn print_config(cfg: &RunConfig) {
    say!("config:");
    for (k, v) in cfg.resolved() {
        say!("  {k} = {v}");
    }
}

fn snippet(text: &str, max_chars: usize) -> String {
    let flat = text.split_whitespace().collect::<Vec<_>>().join(" ");
    if flat.chars().count() <= max_chars {
        flat
    } else {
        let cut: String = flat.chars().take(max_chars).collect();
        format!("{cut}...")
    }
}

fn cmd_index(cfg: &RunConfig, corpus: &Path, out: &Path) -> Outcome {
    let opts = IngestOptions {
        fold_redirects: cfg.redirects,
    };
    let mut store = ingest_corpus_with(corpus, opts)?;
    for w in store.warnings() {
        log::warn!("{w}");
    }
    if let Some(p) = &cfg.pageviews {
        let views = load_pageviews(p)?;
        for w in views.warnings() {
            log::warn!("{w}");
        }
        store.apply_pageviews(&views);
    }
    let index = InvertedIndex::build(&store)?;
    fs::create_dir_all(out).map_err(|e| Failure::Data(format!("{}: {e}", out.display())))?;
    store.save(&out.join(STORE_FILE))?;
    index.save(&out.join(INDEX_FILE))?;
    let stats = store.stats();
    say!(
        "indexed {} documents ({} tokens, {} passages, {} synonyms) into {}",
        stats.documents,
        stats.tokens,
        index.passages().len(),
        store.synonym_map().len(),
        out.display()
    );
    print_config(cfg);
    Ok(())
}

fn cmd_ask(cfg: &RunConfig, question: &str, index_dir: &Path, top: usize) -> Outcome {
    let index = load_index(index_dir)?;
    let webmock = load_webmock(cfg)?;
    let model = match &cfg.model {
        Some(p) => Model::load(p)?,
        None => Model::Uniform,
    };
    let res = Resources {
        index: &index,
        webmock: webmock.as_ref(),
    };
    let q = Question::new(question, None);
    let ranked = answer_question(&q, &res, &model, &cfg.pipeline)?;
    say!("question: {question}");
    say!("category: {}", q.category.name());
    say!("model: {}", model.name());
    if ranked.is_empty() {
        say!("no candidate answers");
    } else {
        let shown = &ranked[..ranked.len().min(top)];
        let width = shown
            .iter()
            .map(|c| c.answer_text.chars().count())
            .max()
            .unwrap_or(6)
            .max(6);
        say!(
            "{:>4}  {:>10}  {:<width$}  evidence",
            "rank",
            "confidence",
            "answer"
        );
        for c in shown {
            let ev = c
                .best_evidence()
                .map(|e| snippet(&e.result.text, 80))
                .unwrap_or_default();
            say!(
                "{:>4}  {:>10.4}  {:<width$}  {ev}",
                c.final_rank,
                c.confidence,
                c.answer_text
            );
        }
        say!("{} candidates in total", ranked.len());
    }
    Ok(())
}

fn cmd_train(
    cfg: &RunConfig,
    questions: &Path,
    index_dir: &Path,
    out: &Path,
    dump: Option<&Path>,
) -> Outcome {
    let index = load_index(index_dir)?;
    let webmock = load_webmock(cfg)?;
    let qs = load_questions(questions)?;
    let res = Resources {
        index: &index,
        webmock: webmock.as_ref(),
    };
    let data = collect_training_data(&qs, &res, &cfg.pipeline, cfg.workers)?;
    if let Some(p) = dump {
        write_feature_dump(p, &data)?;
    }
    let model = fit_model(&data, &cfg.learner, &cfg.training)?;
    model.save(out)?;
    say!(
        "trained {} model on {} candidates ({} correct) from {} questions; wrote {}",
        model.name(),
        data.matrix.len(),
        data.matrix.positives(),
        qs.len(),
        out.display()
    );
    print_config(cfg);
    Ok(())
}

fn cmd_eval(
    cfg: &RunConfig,
    questions: &Path,
    index_dir: &Path,
    model_path: &Path,
    report_out: Option<&Path>,
) -> Outcome {
    let index = load_index(index_dir)?;
    let webmock = load_webmock(cfg)?;
    let qs = load_questions(questions)?;
    let model = Model::load(model_path)?;
    let res = Resources {
        index: &index,
        webmock: webmock.as_ref(),
    };
    let mut report = run_eval(&qs, &res, &model, &cfg.pipeline, cfg.workers)?;
    report.config = cfg.resolved();
    let _ = write!(std::io::stdout(), "{}", render_table(&report));
    if let Some(p) = report_out {
        let json = serde_json::to_string_pretty(&report)
            .map_err(|e| Failure::Data(format!("serializing report: {e}")))?;
        fs::write(p, json + "\n").map_err(|e| Failure::Data(format!("{}: {e}", p.display())))?;
        info!("report written to {}", p.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    if let Some(text) = &cli.show_analysis {
        for t in analyze(text).tokens() {
            say!("{t}");
        }
        return Ok(());
    }
    if cli.show_stopwords {
        for w in STOPWORDS {
            say!("{w}");
        }
        return Ok(());
    }
    let cfg = resolve_config(&cli)?;
    match &cli.command {
        None => Err(Failure::Usage(
            "a subcommand is required (see --help)".into(),
        )),
        Some(Command::Index { corpus, out, .. }) => cmd_index(&cfg, corpus, out),
        Some(Command::Ask {
            question,
            index,
            top,
            ..
        }) => cmd_ask(&cfg, question, index, *top),
        Some(Command::Train {
            questions,
            index,
            out,
            dump_features,
            ..
        }) => cmd_train(&cfg, questions, index, out, dump_features.as_deref()),
        Some(Command::Eval {
            questions,
            index,
            model,
            report_out,
            ..
        }) => cmd_eval(&cfg, questions, index, model, report_out.as_deref()),
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
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::new()
        .parse_filters(level)
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
