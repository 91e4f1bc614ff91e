//! Similarity of embedding groups by penalised likelihood-ratio model
//! comparison.
//!
//! Two groups of vectors (typically the word vectors of two sentences) are
//! scored by how much better a single shared distribution explains their
//! union than two independent distributions do, corrected by an information
//! criterion (TIC, AIC, BIC) or computed as a Bayes factor.

pub mod baselines;
pub mod compare;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod gaussian;
pub mod hypersphere;
pub mod sample;
pub mod special;
pub mod synth;
pub mod vmf;

pub use compare::{
    bayes_factor_similarity, corpus_model_selection, penalty_curve, similarity_bic,
    similarity_closed_gaussian, similarity_closed_vmf, similarity_ic, Criterion, Method,
    ModelKind, NormalWishartPrior, ScoringOptions, SimilarityScore, TicFallback,
};
pub use embedding::{load_embeddings, EmbeddingStore, HeaderMode};
pub use error::{Error, Result};
pub use eval::{evaluate, load_pairs, spearman, EvalOptions, EvalReport, ScoredPairSet};
pub use gaussian::{fit_gaussian, gaussian_loglik, gaussian_tic_penalty, GaussianFit, GaussianKind};
pub use sample::SentenceSample;
pub use vmf::{fit_vmf, vmf_loglik, vmf_tic_penalty, VmfFit};
