//! Reference scores: mean-word-vector cosine, SIF weighting and SIF with
//! removal of the corpus' first principal direction.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::embedding::EmbeddingStore;
use crate::error::{Error, Result};
use crate::sample::SentenceSample;

/// Default SIF smoothing constant.
pub const DEFAULT_SIF_A: f64 = 1e-3;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine similarity, `None` when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

fn mean_vector(s: &SentenceSample) -> Vec<f64> {
    let mut m = vec![0.0; s.dim()];
    for row in s.rows() {
        m.iter_mut().zip(row).for_each(|(a, x)| *a += x);
    }
    let n = s.n() as f64;
    m.iter_mut().for_each(|a| *a /= n);
    m
}

/// Cosine of the two group means.
pub fn mwv_similarity(d1: &SentenceSample, d2: &SentenceSample) -> Result<f64> {
    if d1.dim() != d2.dim() {
        return Err(Error::DimensionMismatch {
            expected: d1.dim(),
            found: d2.dim(),
        });
    }
    cosine(&mean_vector(d1), &mean_vector(d2))
        .ok_or_else(|| Error::Domain("mean word vector has zero norm".into()))
}

/// Unigram counts for SIF weights. The default table is empty and gives
/// every token weight 1.
#[derive(Debug, Clone, Default)]
pub struct FrequencyTable {
    counts: HashMap<String, u64>,
    total: u64,
}

impl FrequencyTable {
    /// Builds a table; repeated tokens have their counts added.
    pub fn from_counts<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut table = FrequencyTable::default();
        for (token, count) in entries {
            let token = token.into();
            if count == 0 {
                return Err(Error::InvalidInput(format!("token {token:?} has count 0")));
            }
            *table.counts.entry(token).or_insert(0) += count;
            table.total += count;
        }
        if table.total == 0 {
            return Err(Error::Empty("frequency table is empty".into()));
        }
        Ok(table)
    }

    /// Parses `<token> <count>` lines.
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|source| Error::Io {
                path: Default::default(),
                source,
            })?;
            let mut fields = line.split_whitespace();
            let (Some(token), Some(count), None) = (fields.next(), fields.next(), fields.next())
            else {
                if line.trim().is_empty() {
                    continue;
                }
                return Err(Error::Parse {
                    line: i + 1,
                    msg: "expected `<token> <count>`".into(),
                });
            };
            let count = count.parse::<u64>().map_err(|_| Error::Parse {
                line: i + 1,
                msg: format!("cannot parse count {count:?}"),
            })?;
            entries.push((token.to_owned(), count));
        }
        Self::from_counts(entries)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read(BufReader::new(file))
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, token: &str) -> u64 {
        self.counts.get(token).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// `count / total`, 0 for unseen tokens and for an empty table.
    pub fn probability(&self, token: &str) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.count(token) as f64 / self.total as f64
    }
}

/// `a / (a + p)`.
pub fn sif_weight(p: f64, a: f64) -> f64 {
    a / (a + p)
}

/// SIF sentence vector: the mean over in-vocabulary tokens of
/// `a / (a + p(w)) * v_w`. Tokens missing from `freqs` get weight 1.
pub fn sif_embed<S: AsRef<str>>(
    tokens: &[S],
    store: &EmbeddingStore,
    freqs: &FrequencyTable,
    a: f64,
) -> Result<Vec<f64>> {
    if a.is_nan() || a <= 0.0 {
        return Err(Error::InvalidInput(format!("SIF parameter a = {a} must be positive")));
    }
    let mut acc = vec![0.0; store.dim()];
    let mut kept = 0usize;
    for t in tokens {
        let t = t.as_ref();
        if let Some(v) = store.get(t) {
            let w = sif_weight(freqs.probability(t), a);
            acc.iter_mut().zip(v).for_each(|(s, x)| *s += w * x);
            kept += 1;
        }
    }
    if kept == 0 {
        return Err(Error::Empty("no in-vocabulary tokens for SIF".into()));
    }
    acc.iter_mut().for_each(|s| *s /= kept as f64);
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIterationOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Estimate the direction from mean-centred rows.
    pub center: bool,
}

impl Default for PowerIterationOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 1000,
            seed: 0,
            center: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcRemoval {
    /// Input rows with their component along `direction` removed.
    pub rows: Vec<Vec<f64>>,
    /// Unit first right-singular direction.
    pub direction: Vec<f64>,
    pub iterations: usize,
    /// False when `max_iter` ran out; `rows` then use the last iterate.
    pub converged: bool,
}

/// `v - (u^T v) u` for every row `v`; `u` must be a unit vector.
pub fn project_out(rows: &[Vec<f64>], u: &[f64]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| {
            let c = dot(r, u);
            r.iter().zip(u).map(|(x, ui)| x - c * ui).collect()
        })
        .collect()
}

/// Projects every row off the first right-singular direction of the matrix,
/// found by power iteration on `X^T X`.
pub fn remove_first_pc(rows: &[Vec<f64>], opts: &PowerIterationOptions) -> Result<PcRemoval> {
    if rows.len() < 2 {
        return Err(Error::InvalidInput("first-PC removal needs at least two rows".into()));
    }
    let d = rows[0].len();
    if let Some(bad) = rows.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: bad.len(),
        });
    }
    let basis: Vec<Vec<f64>> = if opts.center {
        let mut mean = vec![0.0; d];
        for r in rows {
            mean.iter_mut().zip(r).for_each(|(m, x)| *m += x);
        }
        mean.iter_mut().for_each(|m| *m /= rows.len() as f64);
        rows.iter()
            .map(|r| r.iter().zip(&mean).map(|(x, m)| x - m).collect())
            .collect()
    } else {
        rows.to_vec()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let n0 = norm(&v);
    v.iter_mut().for_each(|x| *x /= n0);

    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let mut next = vec![0.0; d];
        for r in &basis {
            let c = dot(r, &v);
            next.iter_mut().zip(r).for_each(|(s, x)| *s += c * x);
        }
        let nn = norm(&next);
        if nn == 0.0 {
            converged = true;
            break;
        }
        next.iter_mut().for_each(|x| *x /= nn);
        let sign = if dot(&next, &v) < 0.0 { -1.0 } else { 1.0 };
        let delta = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - sign * b).powi(2))
            .sum::<f64>()
            .sqrt();
        v = next;
        if delta < opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("power iteration did not converge in {} iterations", opts.max_iter);
    }
    Ok(PcRemoval {
        rows: project_out(rows, &v),
        direction: v,
        iterations,
        converged,
    })
}
