use crate::error::{Error, Result};

/// An ordered bag of `n >= 2` embedding vectors sharing one dimension.
///
/// Stored row-major in a single buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceSample {
    dim: usize,
    data: Vec<f64>,
    token_count_before_padding: usize,
    oov_count: usize,
    padded: bool,
}

impl SentenceSample {
    /// Builds a sample from a row-major buffer.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        Self::check(dim, &data)?;
        let n = data.len() / dim;
        Ok(Self {
            dim,
            data,
            token_count_before_padding: n,
            oov_count: 0,
            padded: false,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(dim * rows.len());
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(dim, data)
    }

    pub(crate) fn padded_from(
        dim: usize,
        data: Vec<f64>,
        token_count_before_padding: usize,
        oov_count: usize,
    ) -> Result<Self> {
        Self::check(dim, &data)?;
        Ok(Self {
            dim,
            data,
            token_count_before_padding,
            oov_count,
            padded: true,
        })
    }

    fn check(dim: usize, data: &[f64]) -> Result<()> {
        if dim == 0 {
            return Err(Error::InvalidInput("sample dimension must be positive".into()));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::InvalidInput(format!(
                "buffer of {} values is not a multiple of dimension {dim}",
                data.len()
            )));
        }
        if data.len() / dim < 2 {
            return Err(Error::InvalidInput("a sample needs at least two vectors".into()));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("sample contains non-finite values".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of vectors.
    pub fn n(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn token_count_before_padding(&self) -> usize {
        self.token_count_before_padding
    }

    pub fn oov_count(&self) -> usize {
        self.oov_count
    }

    pub fn padded(&self) -> bool {
        self.padded
    }

    /// True when the sample holds nothing but padding.
    pub fn is_pad_only(&self) -> bool {
        self.padded && self.token_count_before_padding == 0
    }

    /// `self ⊕ other`.
    pub fn concat(&self, other: &SentenceSample) -> Result<SentenceSample> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut data = Vec::with_capacity(self.data.len() + other.data.len());
        data.extend_from_slice(&self.data);
        data.extend_from_slice(&other.data);
        Ok(SentenceSample {
            dim: self.dim,
            data,
            token_count_before_padding: self.token_count_before_padding
                + other.token_count_before_padding,
            oov_count: self.oov_count + other.oov_count,
            padded: self.padded || other.padded,
        })
    }

    /// Copy with every row scaled to unit length.
    pub fn normalized(&self) -> Result<SentenceSample> {
        let mut out = self.clone();
        for row in out.data.chunks_exact_mut(self.dim) {
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::InvalidInput("cannot normalize a zero vector".into()));
            }
            row.iter_mut().for_each(|x| *x /= norm);
        }
        Ok(out)
    }

    pub fn is_unit_norm(&self, tol: f64) -> bool {
        self.rows()
            .all(|r| (r.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() <= tol)
    }

    /// Same vectors, rows reordered by `perm`.
    pub fn permuted(&self, perm: &[usize]) -> Result<SentenceSample> {
        if perm.len() != self.n() {
            return Err(Error::InvalidInput("permutation length differs from n".into()));
        }
        let mut data = Vec::with_capacity(self.data.len());
        for &i in perm {
            data.extend_from_slice(self.row(i));
        }
        Ok(SentenceSample { data, ..self.clone() })
    }
}
