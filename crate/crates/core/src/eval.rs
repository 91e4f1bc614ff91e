//! STS-style evaluation: score sentence pairs, correlate with gold scores.
//!
//! Pair files are tab-separated, `sentence_a<TAB>sentence_b<TAB>score`, one
//! pair per line. Lines without exactly three fields or with an unparsable
//! or non-finite score are skipped and counted.
//!
//! Reports are written as JSON lines, one object per dataset:
//!
//! ```text
//! {"method":"diag_aic","dataset":"sts12","count":3108,"spearman":0.61,"weighted_average":0.65,"degenerate_count":4}
//! ```
//!
//! `spearman` is `null` when the correlation is undefined (constant scores
//! or gold values); such datasets are left out of `weighted_average`, which
//! weights by pair count. A `freq_file` field appears when SIF weights came
//! from a frequency file.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{
    cosine, mwv_similarity, remove_first_pc, sif_embed, FrequencyTable, PowerIterationOptions,
    DEFAULT_SIF_A,
};
use crate::compare::{
    bayes_factor_similarity, similarity_ic, Method, NormalWishartPrior, ScoreFlags,
    ScoringOptions, SimilarityScore, TicFallback,
};
use crate::embedding::EmbeddingStore;
use crate::error::{Error, Result};
use crate::sample::SentenceSample;

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPair {
    pub a: String,
    pub b: String,
    pub gold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPairSet {
    pub name: String,
    pub pairs: Vec<ScoredPair>,
    /// Lines dropped while parsing.
    pub skipped: usize,
}

impl ScoredPairSet {
    pub fn count(&self) -> usize {
        self.pairs.len()
    }
}

/// Parses a pair file from a reader.
pub fn read_pairs<R: BufRead>(name: &str, reader: R) -> Result<ScoredPairSet> {
    let mut pairs = Vec::new();
    let mut skipped = 0;
    for line in reader.lines() {
        let line = line.map_err(|source| Error::Io {
            path: name.into(),
            source,
        })?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let gold = match fields.as_slice() {
            [_, _, score] => score.trim().parse::<f64>().ok().filter(|g| g.is_finite()),
            _ => None,
        };
        match gold {
            Some(gold) => pairs.push(ScoredPair {
                a: fields[0].to_owned(),
                b: fields[1].to_owned(),
                gold,
            }),
            None => skipped += 1,
        }
    }
    if skipped > 0 {
        log::warn!("{name}: skipped {skipped} malformed lines");
    }
    if pairs.is_empty() {
        return Err(Error::Empty(format!("{name}: no usable sentence pairs")));
    }
    Ok(ScoredPairSet {
        name: name.to_owned(),
        pairs,
        skipped,
    })
}

/// Loads a pair file; the dataset is named after the file stem.
pub fn load_pairs(path: impl AsRef<Path>) -> Result<ScoredPairSet> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    read_pairs(&name, BufReader::new(file))
}

/// 1-based ranks, ties sharing the mean rank of their block.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank correlation; `Ok(None)` when either side is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<Option<f64>> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::InvalidInput("Spearman needs at least two points".into()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("Spearman input contains non-finite values".into()));
    }
    Ok(pearson(&average_ranks(xs), &average_ranks(ys)))
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub scoring: ScoringOptions,
    /// Pad token; `None` picks the store's default.
    pub pad_token: Option<String>,
    pub sif_a: f64,
    /// Empty means every token gets SIF weight 1.
    pub freqs: FrequencyTable,
    /// Recorded in reports.
    pub freq_source: Option<String>,
    pub prior_kappa0: f64,
    /// `None` means `d + 2`.
    pub prior_nu0: Option<f64>,
    pub pca: PowerIterationOptions,
    /// Worker threads for pair scoring; `None` uses rayon's default.
    pub workers: Option<usize>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            scoring: ScoringOptions {
                refine_kappa: false,
                tic_fallback: TicFallback::Aic,
            },
            pad_token: None,
            sif_a: DEFAULT_SIF_A,
            freqs: FrequencyTable::default(),
            freq_source: None,
            prior_kappa0: 1.0,
            prior_nu0: None,
            pca: PowerIterationOptions::default(),
            workers: None,
        }
    }
}

/// Scores raw sentence pairs against one embedding store.
#[derive(Debug)]
pub struct Scorer<'a> {
    store: &'a EmbeddingStore,
    opts: &'a EvalOptions,
    pad: String,
    prior: NormalWishartPrior,
}

fn baseline_score(method: Method, value: Option<f64>) -> SimilarityScore {
    SimilarityScore {
        value: value.unwrap_or(0.0),
        method,
        breakdown: None,
        flags: ScoreFlags {
            degenerate: value.is_none(),
            fallback: false,
        },
    }
}

impl<'a> Scorer<'a> {
    pub fn new(store: &'a EmbeddingStore, opts: &'a EvalOptions) -> Result<Self> {
        let pad = match &opts.pad_token {
            Some(p) if store.contains(p) => p.clone(),
            Some(p) => return Err(Error::PadTokenMissing(p.clone())),
            None => store.default_pad_token().to_owned(),
        };
        let d = store.dim();
        let prior = NormalWishartPrior::isotropic(
            d,
            opts.prior_kappa0,
            opts.prior_nu0.unwrap_or(d as f64 + 2.0),
        )?;
        Ok(Self {
            store,
            opts,
            pad,
            prior,
        })
    }

    pub fn pad_token(&self) -> &str {
        &self.pad
    }

    /// The padded sample for `text`, unit-normalised when `method` needs it.
    pub fn sample(&self, method: Method, text: &str) -> Result<SentenceSample> {
        let s = self.store.lookup_sentence(text, &self.pad)?;
        if method.needs_unit_norm() && !self.store.normalized() {
            s.normalized()
        } else {
            Ok(s)
        }
    }

    fn sif_vector(&self, text: &str) -> Option<Vec<f64>> {
        let tokens = self.store.known_tokens(text);
        sif_embed(&tokens, self.store, &self.opts.freqs, self.opts.sif_a).ok()
    }

    /// Scores one pair. SIF+PCA uses the pair itself as its corpus.
    ///
    /// Baselines that are undefined for the pair score 0 with the
    /// degenerate flag set.
    pub fn score(&self, method: Method, a: &str, b: &str) -> Result<SimilarityScore> {
        match method {
            Method::Mwv => {
                let value = mwv_similarity(&self.sample(method, a)?, &self.sample(method, b)?).ok();
                Ok(baseline_score(method, value))
            }
            Method::Sif => {
                let value = match (self.sif_vector(a), self.sif_vector(b)) {
                    (Some(x), Some(y)) => cosine(&x, &y),
                    _ => None,
                };
                Ok(baseline_score(method, value))
            }
            Method::SifPca => {
                let pair = [ScoredPair {
                    a: a.to_owned(),
                    b: b.to_owned(),
                    gold: 0.0,
                }];
                Ok(self.sif_pca_scores(&pair)?.remove(0))
            }
            Method::BayesFactor => {
                let s1 = self.sample(method, a)?;
                let s2 = self.sample(method, b)?;
                let mut score = bayes_factor_similarity(&s1, &s2, &self.prior)?;
                score.flags.degenerate = s1.is_pad_only() || s2.is_pad_only();
                Ok(score)
            }
            _ => {
                let (model, criterion) = method.parts().expect("IC method");
                let s1 = self.sample(method, a)?;
                let s2 = self.sample(method, b)?;
                let mut score = similarity_ic(&s1, &s2, model, criterion, &self.opts.scoring)?;
                score.flags.degenerate |= s1.is_pad_only() || s2.is_pad_only();
                Ok(score)
            }
        }
    }

    /// SIF+PCA over a whole set: the first principal direction is estimated
    /// from every defined sentence vector in `pairs`.
    pub fn sif_pca_scores(&self, pairs: &[ScoredPair]) -> Result<Vec<SimilarityScore>> {
        let vectors: Vec<Option<Vec<f64>>> = pairs
            .iter()
            .flat_map(|p| [self.sif_vector(&p.a), self.sif_vector(&p.b)])
            .collect();
        let defined: Vec<Vec<f64>> = vectors.iter().flatten().cloned().collect();
        if defined.len() < 2 {
            return Ok(pairs
                .iter()
                .map(|_| baseline_score(Method::SifPca, None))
                .collect());
        }
        let removal = remove_first_pc(&defined, &self.opts.pca)?;
        let mut deflated = removal.rows.into_iter();
        let projected: Vec<Option<Vec<f64>>> = vectors
            .iter()
            .map(|v| v.as_ref().map(|_| deflated.next().expect("one row per vector")))
            .collect();
        Ok(projected
            .chunks_exact(2)
            .map(|ab| {
                let value = match (&ab[0], &ab[1]) {
                    (Some(x), Some(y)) => cosine(x, y),
                    _ => None,
                };
                baseline_score(Method::SifPca, value)
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRow {
    pub dataset: String,
    pub count: usize,
    /// `None` when undefined; excluded from the weighted average.
    pub spearman: Option<f64>,
    pub degenerate_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub method: Method,
    pub rows: Vec<EvalRow>,
    /// Pair-count-weighted mean over rows with a defined correlation.
    pub weighted_average: Option<f64>,
    pub degenerate_pair_count: usize,
    pub freq_source: Option<String>,
}

#[derive(Serialize)]
struct ReportLine<'a> {
    method: &'a str,
    dataset: &'a str,
    count: usize,
    spearman: Option<f64>,
    weighted_average: Option<f64>,
    degenerate_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    freq_file: Option<&'a str>,
}

impl EvalReport {
    /// `sum(count * rho) / sum(count)` over defined rows.
    pub fn weighted(rows: &[EvalRow]) -> Option<f64> {
        let (num, den) = rows
            .iter()
            .filter_map(|r| r.spearman.map(|s| (s * r.count as f64, r.count as f64)))
            .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        (den > 0.0).then(|| num / den)
    }

    /// One JSON object per dataset row.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for row in &self.rows {
            let line = ReportLine {
                method: self.method.as_str(),
                dataset: &row.dataset,
                count: row.count,
                spearman: row.spearman,
                weighted_average: self.weighted_average,
                degenerate_count: row.degenerate_count,
                freq_file: self.freq_source.as_deref(),
            };
            serde_json::to_writer(&mut out, &line)?;
            writeln!(out)?;
        }
        Ok(())
    }
}

fn fmt_corr(v: Option<f64>) -> String {
    v.map_or_else(|| "undef".to_owned(), |s| format!("{s:.4}"))
}

/// Plain-text summary table of several reports.
pub fn format_table(reports: &[EvalReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<14} {:<20} {:>7} {:>9} {:>6}",
        "method", "dataset", "pairs", "spearman", "degen"
    );
    for r in reports {
        for row in &r.rows {
            let _ = writeln!(
                out,
                "{:<14} {:<20} {:>7} {:>9} {:>6}",
                r.method.as_str(),
                row.dataset,
                row.count,
                fmt_corr(row.spearman),
                row.degenerate_count
            );
        }
        let _ = writeln!(
            out,
            "{:<14} {:<20} {:>7} {:>9} {:>6}",
            r.method.as_str(),
            "weighted",
            r.rows.iter().map(|x| x.count).sum::<usize>(),
            fmt_corr(r.weighted_average),
            r.degenerate_pair_count
        );
    }
    out
}

/// Scores every pair of every dataset with `method` and correlates with gold.
///
/// Pair scores are computed in parallel but collected in input order, so the
/// report does not depend on the worker count.
pub fn evaluate(
    method: Method,
    datasets: &[ScoredPairSet],
    store: &EmbeddingStore,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    let scorer = Scorer::new(store, opts)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = opts.workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;

    let mut rows = Vec::with_capacity(datasets.len());
    for set in datasets {
        let scores: Vec<SimilarityScore> = if method == Method::SifPca {
            scorer.sif_pca_scores(&set.pairs)?
        } else {
            pool.install(|| {
                set.pairs
                    .par_iter()
                    .map(|p| scorer.score(method, &p.a, &p.b))
                    .collect::<Result<Vec<_>>>()
            })?
        };
        let values: Vec<f64> = scores.iter().map(|s| s.value).collect();
        let gold: Vec<f64> = set.pairs.iter().map(|p| p.gold).collect();
        let rho = if values.len() < 2 {
            None
        } else {
            spearman(&values, &gold)?
        };
        if rho.is_none() {
            log::warn!(
                "{}: Spearman correlation undefined for {}; excluded from the average",
                set.name,
                method
            );
        }
        rows.push(EvalRow {
            dataset: set.name.clone(),
            count: set.count(),
            spearman: rho,
            degenerate_count: scores
                .iter()
                .filter(|s| s.flags.degenerate || s.flags.fallback)
                .count(),
        });
    }
    Ok(EvalReport {
        method,
        weighted_average: EvalReport::weighted(&rows),
        degenerate_pair_count: rows.iter().map(|r| r.degenerate_count).sum(),
        rows,
        freq_source: opts.freq_source.clone(),
    })
}
