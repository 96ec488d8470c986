//! Observed or simulated series and the single-column CSV format used to
//! exchange them (header `x`, one value per line).

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Shortest series accepted by the estimators.
pub const MIN_ESTIMATION_LEN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Centering {
    /// `mean` is the arithmetic mean of `x`.
    SampleMean,
    /// `mean` is a known process mean `μ₀` supplied by the caller.
    Known,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesProvenance {
    Observed,
    Simulated { seed: u64 },
}

/// A real series together with the mean used to center it.
#[derive(Debug, Clone)]
pub struct SeriesSample<T> {
    x: Vec<T>,
    mean: T,
    centering: Centering,
    provenance: SeriesProvenance,
}

impl<T: Scalar> SeriesSample<T> {
    /// Observed series centered at its sample mean.
    pub fn observed(x: Vec<T>) -> Result<Self> {
        Self::with_provenance(x, SeriesProvenance::Observed)
    }

    pub fn simulated(x: Vec<T>, seed: u64) -> Result<Self> {
        Self::with_provenance(x, SeriesProvenance::Simulated { seed })
    }

    fn with_provenance(x: Vec<T>, provenance: SeriesProvenance) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::InvalidInput("empty series".into()));
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite value at index {i}")));
        }
        let mean = sample_mean(&x);
        Ok(Self { x, mean, centering: Centering::SampleMean, provenance })
    }

    /// Replaces the plug-in mean by a known `μ₀`.
    pub fn with_known_mean(mut self, mu0: T) -> Self {
        self.mean = mu0;
        self.centering = Centering::Known;
        self
    }

    pub fn values(&self) -> &[T] {
        &self.x
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn mean(&self) -> T {
        self.mean
    }

    pub fn centering(&self) -> Centering {
        self.centering
    }

    pub fn provenance(&self) -> SeriesProvenance {
        self.provenance
    }

    /// `x_t − μ̂`.
    pub fn centered(&self) -> Vec<T> {
        self.x.iter().map(|&v| v - self.mean).collect()
    }

    /// Multiplies every observation (and the mean) by `c`.
    pub fn scaled(&self, c: T) -> Self {
        Self {
            x: self.x.iter().map(|&v| v * c).collect(),
            mean: match self.centering {
                Centering::SampleMean => sample_mean(&self.x.iter().map(|&v| v * c).collect::<Vec<_>>()),
                Centering::Known => self.mean * c,
            },
            centering: self.centering,
            provenance: self.provenance,
        }
    }

    pub(crate) fn require_estimable(&self) -> Result<()> {
        if self.len() < MIN_ESTIMATION_LEN {
            return Err(Error::InvalidInput(format!(
                "series of length {} is below the estimation floor {MIN_ESTIMATION_LEN}",
                self.len()
            )));
        }
        Ok(())
    }
}

pub(crate) fn sample_mean<T: Scalar>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |a, &b| a + b) / T::from_usize_lossy(x.len())
}

/// Reads a single-column CSV with header `x`.
pub fn read_series_csv<R: Read>(reader: R) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.len() != 1 || &headers[0] != "x" {
        return Err(Error::InvalidInput(format!(
            "series CSV must have the single header `x`, found {:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = rec.get(0).unwrap_or("");
        let v: f64 = field.parse().map_err(|_| {
            Error::InvalidInput(format!("row {}: cannot parse {field:?} as a number", line + 2))
        })?;
        out.push(v);
    }
    Ok(out)
}

pub fn write_series_csv<W: Write>(writer: W, x: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["x"])?;
    for v in x {
        w.write_record([fmt_f64(*v)])?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest decimal representation that round-trips.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}
