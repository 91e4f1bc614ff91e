//! Word-embedding lexicon loaded from the GloVe/word2vec text format.
//!
//! Each line is `<token> <v1> ... <vd>`. An optional first line holding
//! exactly two integers (`<count> <dim>`) is a header.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sample::SentenceSample;

/// How to treat the first line of an embedding file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeaderMode {
    /// A first line of exactly two integers is a header.
    #[default]
    Auto,
    Yes,
    No,
}

/// Immutable token → vector map.
#[derive(Debug, Clone)]
pub struct EmbeddingStore {
    dim: usize,
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
    normalized: bool,
    duplicates: usize,
}

/// Reads an embedding file from disk.
pub fn load_embeddings(
    path: impl AsRef<Path>,
    header: HeaderMode,
    normalize: bool,
) -> Result<EmbeddingStore> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    EmbeddingStore::read(BufReader::new(file), header, normalize).map_err(|e| match e {
        Error::Io { source, .. } => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

fn is_header(line: &str) -> bool {
    let fields: Vec<&str> = line.split_whitespace().collect();
    fields.len() == 2 && fields.iter().all(|f| f.parse::<u64>().is_ok())
}

/// Lowercases `text` and splits it on runs of non-alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

impl EmbeddingStore {
    pub fn read<R: BufRead>(reader: R, header: HeaderMode, normalize: bool) -> Result<Self> {
        let mut builder = Builder::new(normalize);
        let mut first = true;
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|source| Error::Io {
                path: Default::default(),
                source,
            })?;
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            if first {
                first = false;
                match header {
                    HeaderMode::Yes => {
                        if !is_header(&line) {
                            return Err(Error::Parse {
                                line: lineno,
                                msg: "expected a `<count> <dim>` header".into(),
                            });
                        }
                        let dim: usize = line.split_whitespace().nth(1).unwrap().parse().unwrap();
                        builder.dim = Some(dim);
                        continue;
                    }
                    HeaderMode::Auto if is_header(&line) => {
                        let dim: usize = line.split_whitespace().nth(1).unwrap().parse().unwrap();
                        builder.dim = Some(dim);
                        continue;
                    }
                    _ => {}
                }
            }
            builder.push_line(&line, lineno)?;
        }
        builder.finish()
    }

    /// Builds a store from in-memory `(token, vector)` pairs.
    pub fn from_entries<I, S>(entries: I, normalize: bool) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut builder = Builder::new(normalize);
        for (i, (token, v)) in entries.into_iter().enumerate() {
            builder.push(token.into(), v, i + 1)?;
        }
        builder.finish()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn normalized(&self) -> bool {
        self.normalized
    }

    /// Duplicate lines that were ignored while loading.
    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.index
            .get(token)
            .map(|&i| &self.data[i * self.dim..(i + 1) * self.dim])
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// `"."`, then `"the"`, then the first vocabulary entry.
    pub fn default_pad_token(&self) -> &str {
        [".", "the"]
            .into_iter()
            .find(|t| self.contains(t))
            .unwrap_or(&self.tokens[0])
    }

    /// Embeds `text` as a bag of in-vocabulary word vectors plus padding.
    ///
    /// Out-of-vocabulary tokens are dropped. The pad vector is appended once
    /// to every sentence, twice when no token survived, so `n >= 2`.
    pub fn lookup_sentence(&self, text: &str, pad_token: &str) -> Result<SentenceSample> {
        let pad = self
            .get(pad_token)
            .ok_or_else(|| Error::PadTokenMissing(pad_token.to_owned()))?;
        let mut data = Vec::new();
        let mut kept = 0;
        let mut oov = 0;
        for token in tokenize(text) {
            match self.get(&token) {
                Some(v) => {
                    data.extend_from_slice(v);
                    kept += 1;
                }
                None => oov += 1,
            }
        }
        data.extend_from_slice(pad);
        if kept == 0 {
            data.extend_from_slice(pad);
        }
        SentenceSample::padded_from(self.dim, data, kept, oov)
    }

    /// Retained in-vocabulary tokens of `text`, in order.
    pub fn known_tokens(&self, text: &str) -> Vec<String> {
        tokenize(text)
            .into_iter()
            .filter(|t| self.contains(t))
            .collect()
    }
}

struct Builder {
    dim: Option<usize>,
    normalize: bool,
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
    duplicates: usize,
}

impl Builder {
    fn new(normalize: bool) -> Self {
        Self {
            dim: None,
            normalize,
            tokens: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
            duplicates: 0,
        }
    }

    fn push_line(&mut self, line: &str, lineno: usize) -> Result<()> {
        let mut fields = line.split_whitespace();
        let token = fields.next().unwrap_or_default().to_owned();
        let values = fields
            .map(|f| {
                f.parse::<f64>().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("cannot parse {f:?} as a number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        self.push(token, values, lineno)
    }

    fn push(&mut self, token: String, mut values: Vec<f64>, lineno: usize) -> Result<()> {
        let dim = *self.dim.get_or_insert(values.len());
        if dim == 0 || values.len() != dim {
            return Err(Error::RaggedLine {
                line: lineno,
                expected: dim,
                found: values.len(),
            });
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::Parse {
                line: lineno,
                msg: "non-finite component".into(),
            });
        }
        if self.index.contains_key(&token) {
            self.duplicates += 1;
            return Ok(());
        }
        if self.normalize {
            let norm = values.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::ZeroNorm(token));
            }
            values.iter_mut().for_each(|x| *x /= norm);
        }
        self.index.insert(token.clone(), self.tokens.len());
        self.tokens.push(token);
        self.data.extend_from_slice(&values);
        Ok(())
    }

    fn finish(self) -> Result<EmbeddingStore> {
        if self.tokens.is_empty() {
            return Err(Error::EmptyVocab);
        }
        if self.duplicates > 0 {
            log::warn!("ignored {} duplicate embedding entries", self.duplicates);
        }
        Ok(EmbeddingStore {
            dim: self.dim.unwrap_or_default(),
            tokens: self.tokens,
            index: self.index,
            data: self.data,
            normalized: self.normalize,
            duplicates: self.duplicates,
        })
    }
}
