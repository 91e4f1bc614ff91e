//! `groupsim`: score sentence pairs, run STS-style evaluations, rank models
//! on a corpus, and emit TIC penalty curves.

mod config;

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use groupsim::baselines::FrequencyTable;
use groupsim::compare::write_penalty_csv;
use groupsim::eval::{format_table, Scorer};
use groupsim::{
    corpus_model_selection, evaluate, load_embeddings, load_pairs, penalty_curve, EmbeddingStore,
    EvalOptions, Method, SimilarityScore,
};

use config::{CommonArgs, RunConfig, UsageError};

#[derive(Debug, Parser)]
#[command(name = "groupsim", version, about = "Similarity of embedding groups by penalised likelihood ratios")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score one pair of sentences
    Score { sentence_a: String, sentence_b: String },
    /// Spearman correlation against gold scores on pair files
    Eval {
        #[arg(required = true)]
        datasets: Vec<PathBuf>,
    },
    /// Rank candidate models by mean information criterion over a corpus
    Modelsel {
        /// One sentence per line
        corpus: PathBuf,
    },
    /// TIC penalty mean and spread on synthetic samples, as CSV
    PenaltyCurve {
        /// Dimension of the synthetic samples
        #[arg(long)]
        dim: usize,
        /// Comma-separated sample sizes
        #[arg(long, value_delimiter = ',', default_value = "10,20,50,100,200,500,1000")]
        sizes: Vec<usize>,
        /// Samples per size
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
}

fn eval_options(cfg: &RunConfig) -> Result<EvalOptions> {
    let mut opts = EvalOptions {
        pad_token: cfg.pad_token.clone(),
        sif_a: cfg.sif_a,
        prior_kappa0: cfg.prior_kappa0,
        prior_nu0: cfg.prior_nu0,
        workers: cfg.workers,
        ..EvalOptions::default()
    };
    opts.pca.seed = cfg.seed;
    if let Some(path) = &cfg.freq_file {
        opts.freqs = FrequencyTable::load(path)?;
        opts.freq_source = Some(path.display().to_string());
    }
    Ok(opts)
}

fn load_store(cfg: &RunConfig, path: &Path) -> Result<EmbeddingStore> {
    let store = load_embeddings(path, cfg.header, cfg.normalize)
        .with_context(|| format!("loading embeddings from {}", path.display()))?;
    log::info!("loaded {} vectors of dimension {}", store.len(), store.dim());
    if store.duplicates() > 0 {
        log::warn!("{} duplicate tokens ignored (first occurrence kept)", store.duplicates());
    }
    Ok(store)
}

/// Writes to `--out` when given, standard output otherwise.
fn output(cfg: &RunConfig) -> Result<Box<dyn Write>> {
    Ok(match &cfg.out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn print_score(out: &mut dyn Write, score: &SimilarityScore, labelled: bool, verbose: bool) -> io::Result<()> {
    if labelled {
        writeln!(out, "{}\t{}", score.method, score.value)?;
    } else {
        writeln!(out, "{}", score.value)?;
    }
    if verbose {
        if let Some(b) = &score.breakdown {
            writeln!(out, "  loglik_joint  {}", b.loglik_joint)?;
            writeln!(out, "  loglik_1      {}", b.loglik_1)?;
            writeln!(out, "  loglik_2      {}", b.loglik_2)?;
            writeln!(out, "  penalty_joint {}", b.penalty_joint)?;
            writeln!(out, "  penalty_1     {}", b.penalty_1)?;
            writeln!(out, "  penalty_2     {}", b.penalty_2)?;
            writeln!(out, "  scale         {}", b.scale)?;
        }
        writeln!(out, "  degenerate    {}", score.flags.degenerate)?;
        writeln!(out, "  fallback      {}", score.flags.fallback)?;
    }
    Ok(())
}

fn cmd_score(cfg: &RunConfig, methods: &[Method], a: &str, b: &str) -> Result<()> {
    let store = load_store(cfg, cfg.require_embeddings()?)?;
    let opts = eval_options(cfg)?;
    let scorer = Scorer::new(&store, &opts)?;
    for (label, text) in [("A", a), ("B", b)] {
        if store.known_tokens(text).is_empty() {
            log::warn!(
                "sentence {label} has no known tokens; it is scored on the pad token {:?} alone",
                scorer.pad_token()
            );
        }
    }
    let mut out = output(cfg)?;
    for &m in methods {
        let score = scorer.score(m, a, b)?;
        print_score(&mut out, &score, methods.len() > 1, cfg.verbose)?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_eval(cfg: &RunConfig, methods: &[Method], paths: &[PathBuf]) -> Result<()> {
    let store = load_store(cfg, cfg.require_embeddings()?)?;
    let opts = eval_options(cfg)?;
    let sets = paths
        .iter()
        .map(|p| load_pairs(p).with_context(|| format!("reading pairs from {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let mut reports = Vec::with_capacity(methods.len());
    for &m in methods {
        log::info!("evaluating {m}");
        reports.push(evaluate(m, &sets, &store, &opts)?);
    }
    if let Some(path) = &cfg.out {
        let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
        for r in &reports {
            r.write_jsonl(&mut w)?;
        }
        w.flush()?;
    }
    print!("{}", format_table(&reports));
    Ok(())
}

fn cmd_modelsel(cfg: &RunConfig, corpus: &Path) -> Result<()> {
    let candidates = cfg.candidates()?;
    let store = load_store(cfg, cfg.require_embeddings()?)?;
    let opts = eval_options(cfg)?;
    let scorer = Scorer::new(&store, &opts)?;
    let file = File::open(corpus).with_context(|| format!("opening {}", corpus.display()))?;
    let lines: Vec<String> = BufReader::new(file)
        .lines()
        .collect::<io::Result<Vec<_>>>()
        .with_context(|| format!("reading {}", corpus.display()))?
        .into_iter()
        .filter(|l| !l.trim().is_empty())
        .collect();
    if lines.is_empty() {
        anyhow::bail!("corpus {} has no sentences", corpus.display());
    }
    let pad_only = lines.iter().filter(|l| store.known_tokens(l).is_empty()).count();
    if pad_only > 0 {
        log::warn!("{pad_only} of {} sentences have no known tokens and are scored on padding alone", lines.len());
    }

    let mut rows = Vec::new();
    for &(model, criterion) in &candidates {
        let method = Method::from_parts(model, criterion);
        let samples = lines
            .iter()
            .map(|l| scorer.sample(method, l))
            .collect::<groupsim::Result<Vec<_>>>()?;
        rows.extend(corpus_model_selection(&samples, &[(model, criterion)], &opts.scoring)?);
    }
    rows.sort_by(|a, b| a.mean_ic.total_cmp(&b.mean_ic));

    let mut out = output(cfg)?;
    writeln!(out, "{:<4} {:<10} {:<4} {:>16} {:>9} {:>6} {:>8}", "rank", "model", "ic", "mean_ic", "sentences", "degen", "fallback")?;
    for (i, r) in rows.iter().enumerate() {
        writeln!(
            out,
            "{:<4} {:<10} {:<4} {:>16.4} {:>9} {:>6} {:>8}",
            i + 1,
            r.model.as_str(),
            r.criterion.as_str(),
            r.mean_ic,
            r.sentences,
            r.degenerate,
            r.fallback
        )?;
    }
    writeln!(out, "padding-only sentences: {pad_only}")?;
    out.flush()?;
    Ok(())
}

fn cmd_penalty_curve(cfg: &RunConfig, dim: usize, sizes: &[usize], trials: usize) -> Result<()> {
    let model = cfg.curve_model()?;
    let rows = penalty_curve(model, dim, sizes, trials, cfg.seed)?;
    let mut out = output(cfg)?;
    write_penalty_csv(&rows, &mut out)?;
    out.flush()?;
    Ok(())
}

fn run(cli: &Cli, cfg: &RunConfig) -> Result<()> {
    if let Some(w) = cfg.workers {
        // a second initialisation only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    match &cli.command {
        Command::Score { sentence_a, sentence_b } => {
            let methods = cfg.scoring_methods()?;
            cmd_score(cfg, &methods, sentence_a, sentence_b)
        }
        Command::Eval { datasets } => {
            let methods = cfg.scoring_methods()?;
            cmd_eval(cfg, &methods, datasets)
        }
        Command::Modelsel { corpus } => cmd_modelsel(cfg, corpus),
        Command::PenaltyCurve { dim, sizes, trials } => cmd_penalty_curve(cfg, *dim, sizes, *trials),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let cfg = match RunConfig::resolve(&cli.common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let level = if cfg.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(&cli, &cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
