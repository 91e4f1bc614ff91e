//! Run configuration: command-line flags layered over an optional TOML file.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use groupsim::{Criterion, HeaderMode, Method, ModelKind};
use serde::Deserialize;

/// A configuration problem detected before any work starts (exit code 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Header {
    Auto,
    Yes,
    No,
}

impl From<Header> for HeaderMode {
    fn from(h: Header) -> Self {
        match h {
            Header::Auto => HeaderMode::Auto,
            Header::Yes => HeaderMode::Yes,
            Header::No => HeaderMode::No,
        }
    }
}

/// Options shared by every subcommand. Each can also come from `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML file with defaults for any of these options
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Word-vector file in GloVe/word2vec text format
    #[arg(long, global = true)]
    pub embeddings: Option<PathBuf>,
    /// Scale every word vector to unit length on load
    #[arg(long, global = true)]
    pub normalize: bool,
    /// Whether the embedding file starts with a `<count> <dim>` line
    #[arg(long, global = true, value_enum)]
    pub header: Option<Header>,
    /// Method id (e.g. diag_aic, bayes_factor, sif), model family
    /// (vmf, diag, spherical) or `all`
    #[arg(long, global = true)]
    pub method: Option<String>,
    /// Information criterion for a model family: tic, aic or bic
    #[arg(long, global = true)]
    pub ic: Option<String>,
    /// Token appended to every sentence
    #[arg(long, global = true)]
    pub pad_token: Option<String>,
    /// SIF smoothing constant
    #[arg(long, global = true)]
    pub sif_a: Option<f64>,
    /// Word counts for SIF, one `<token> <count>` per line
    #[arg(long, global = true)]
    pub freq_file: Option<PathBuf>,
    /// Normal-Wishart prior strength on the mean
    #[arg(long, global = true)]
    pub prior_kappa0: Option<f64>,
    /// Normal-Wishart degrees of freedom (default d + 2)
    #[arg(long, global = true)]
    pub prior_nu0: Option<f64>,
    /// Output file
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for every random choice
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Print score breakdowns and progress
    #[arg(short, long, global = true)]
    pub verbose: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    embeddings: Option<PathBuf>,
    normalize: Option<bool>,
    header: Option<Header>,
    method: Option<String>,
    ic: Option<String>,
    pad_token: Option<String>,
    sif_a: Option<f64>,
    freq_file: Option<PathBuf>,
    prior_kappa0: Option<f64>,
    prior_nu0: Option<f64>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    workers: Option<usize>,
    verbose: Option<bool>,
}

/// Fully resolved settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub embeddings: Option<PathBuf>,
    pub normalize: bool,
    pub header: HeaderMode,
    pub method: Option<String>,
    pub ic: Option<Criterion>,
    pub pad_token: Option<String>,
    pub sif_a: f64,
    pub freq_file: Option<PathBuf>,
    pub prior_kappa0: f64,
    pub prior_nu0: Option<f64>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub workers: Option<usize>,
    pub verbose: bool,
}

fn read_file_config(path: &Path) -> Result<FileConfig, UsageError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| usage(format!("invalid config {}: {e}", path.display())))
}

fn positive(name: &str, v: f64) -> Result<f64, UsageError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(usage(format!("--{name} must be a positive number, got {v}")))
    }
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> Result<Self, UsageError> {
        let file = match &args.config {
            Some(p) => read_file_config(p)?,
            None => FileConfig::default(),
        };
        let ic = match args.ic.clone().or(file.ic) {
            Some(s) => Some(s.parse::<Criterion>().map_err(|_| usage(format!("unknown --ic {s:?}; expected tic, aic or bic")))?),
            None => None,
        };
        let workers = args.workers.or(file.workers);
        if workers == Some(0) {
            return Err(usage("--workers must be at least 1"));
        }
        let prior_nu0 = args.prior_nu0.or(file.prior_nu0);
        if let Some(v) = prior_nu0 {
            positive("prior-nu0", v)?;
        }
        Ok(Self {
            embeddings: args.embeddings.clone().or(file.embeddings),
            normalize: args.normalize || file.normalize.unwrap_or(false),
            header: args.header.or(file.header).map_or(HeaderMode::Auto, Into::into),
            method: args.method.clone().or(file.method),
            ic,
            pad_token: args.pad_token.clone().or(file.pad_token),
            sif_a: positive("sif-a", args.sif_a.or(file.sif_a).unwrap_or(groupsim::baselines::DEFAULT_SIF_A))?,
            freq_file: args.freq_file.clone().or(file.freq_file),
            prior_kappa0: positive("prior-kappa0", args.prior_kappa0.or(file.prior_kappa0).unwrap_or(1.0))?,
            prior_nu0,
            out: args.out.clone().or(file.out),
            seed: args.seed.or(file.seed).unwrap_or(0),
            workers,
            verbose: args.verbose || file.verbose.unwrap_or(false),
        })
    }

    /// Methods for `score` and `eval`; defaults to `diag_aic`.
    pub fn scoring_methods(&self) -> Result<Vec<Method>, UsageError> {
        let Some(name) = self.method.as_deref() else {
            let ic = self.ic.unwrap_or(Criterion::Aic);
            return Ok(vec![Method::from_parts(ModelKind::Diagonal, ic)]);
        };
        if name == "all" {
            if self.ic.is_some() {
                return Err(usage("--ic cannot be combined with --method all"));
            }
            return Ok(Method::ALL.to_vec());
        }
        if let Ok(family) = name.parse::<ModelKind>() {
            return Ok(vec![Method::from_parts(family, self.ic.unwrap_or(Criterion::Aic))]);
        }
        let method = name
            .parse::<Method>()
            .map_err(|_| usage(format!("unknown --method {name:?}")))?;
        match (method.parts(), self.ic) {
            (_, None) => Ok(vec![method]),
            (Some((_, c)), Some(ic)) if c == ic => Ok(vec![method]),
            (Some(_), Some(ic)) => Err(usage(format!("--method {method} conflicts with --ic {}", ic.as_str()))),
            (None, Some(_)) => Err(usage(format!("--ic does not apply to --method {method}"))),
        }
    }

    /// Candidate models for `modelsel`; defaults to every model and criterion.
    pub fn candidates(&self) -> Result<Vec<(ModelKind, Criterion)>, UsageError> {
        const MODELS: [ModelKind; 3] = [ModelKind::Vmf, ModelKind::Diagonal, ModelKind::Spherical];
        const CRITERIA: [Criterion; 3] = [Criterion::Tic, Criterion::Aic, Criterion::Bic];
        let criteria: Vec<Criterion> = self.ic.map_or(CRITERIA.to_vec(), |c| vec![c]);
        let models: Vec<ModelKind> = match self.method.as_deref() {
            None => MODELS.to_vec(),
            Some("all") if self.ic.is_some() => return Err(usage("--ic cannot be combined with --method all")),
            Some("all") => MODELS.to_vec(),
            Some(name) => {
                if let Ok(family) = name.parse::<ModelKind>() {
                    vec![family]
                } else {
                    let m = name
                        .parse::<Method>()
                        .map_err(|_| usage(format!("unknown --method {name:?}")))?;
                    let (model, c) = m
                        .parts()
                        .ok_or_else(|| usage(format!("--method {m} has no information criterion to rank")))?;
                    if self.ic.is_some_and(|ic| ic != c) {
                        return Err(usage(format!("--method {m} conflicts with --ic")));
                    }
                    return Ok(vec![(model, c)]);
                }
            }
        };
        Ok(models
            .iter()
            .flat_map(|&m| criteria.iter().map(move |&c| (m, c)))
            .collect())
    }

    /// Model family for `penalty-curve`; TIC is implied.
    pub fn curve_model(&self) -> Result<ModelKind, UsageError> {
        if self.ic.is_some_and(|c| c != Criterion::Tic) {
            return Err(usage("penalty curves are TIC penalties; --ic must be tic or omitted"));
        }
        let Some(name) = self.method.as_deref() else {
            return Ok(ModelKind::Diagonal);
        };
        if let Ok(family) = name.parse::<ModelKind>() {
            return Ok(family);
        }
        match name.parse::<Method>().ok().and_then(Method::parts) {
            Some((model, Criterion::Tic)) => Ok(model),
            _ => Err(usage(format!("--method {name:?} has no TIC penalty curve; use vmf, diag or spherical"))),
        }
    }

    pub fn require_embeddings(&self) -> Result<&Path, UsageError> {
        self.embeddings
            .as_deref()
            .ok_or_else(|| usage("--embeddings is required for this command"))
    }
}
