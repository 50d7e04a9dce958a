//! Sample containers shared by the Ising and Gaussian models.

use crate::error::{Error, Result};

/// One +/-1 spin configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidSpin);
        }
        Ok(SpinConfig(spins))
    }

    /// Decode the configuration whose bit k selects the sign of spin k
    /// (set bit = +1).
    pub fn from_bits(bits: usize, p: usize) -> Self {
        SpinConfig(
            (0..p)
                .map(|k| if bits >> k & 1 == 1 { 1 } else { -1 })
                .collect(),
        )
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Where a sample set came from; carried along so experiment outputs can be
/// traced back to (model, seed).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub seed: u64,
    pub model_id: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Data {
    Spin(Vec<i8>),
    Real(Vec<f64>),
}

/// An n x p matrix of observations, row-major, either +/-1 spins or reals.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    n: usize,
    p: usize,
    data: Data,
    provenance: Provenance,
}

impl SampleSet {
    pub fn from_spins(n: usize, p: usize, data: Vec<i8>, provenance: Provenance) -> Result<Self> {
        if data.len() != n * p {
            return Err(Error::DimensionMismatch {
                expected: n * p,
                got: data.len(),
            });
        }
        if data.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidSpin);
        }
        Ok(SampleSet {
            n,
            p,
            data: Data::Spin(data),
            provenance,
        })
    }

    pub fn from_reals(n: usize, p: usize, data: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if data.len() != n * p {
            return Err(Error::DimensionMismatch {
                expected: n * p,
                got: data.len(),
            });
        }
        Ok(SampleSet {
            n,
            p,
            data: Data::Real(data),
            provenance,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn is_spin(&self) -> bool {
        matches!(self.data, Data::Spin(_))
    }

    /// Row t as spins; errors on real-valued data.
    pub fn spin_row(&self, t: usize) -> Result<&[i8]> {
        match &self.data {
            Data::Spin(v) => Ok(&v[t * self.p..(t + 1) * self.p]),
            Data::Real(_) => Err(Error::WrongSampleKind { expected: "spin" }),
        }
    }

    /// Row t as reals; errors on spin-valued data.
    pub fn real_row(&self, t: usize) -> Result<&[f64]> {
        match &self.data {
            Data::Real(v) => Ok(&v[t * self.p..(t + 1) * self.p]),
            Data::Spin(_) => Err(Error::WrongSampleKind { expected: "real" }),
        }
    }

    pub fn spin_rows(&self) -> Result<impl Iterator<Item = &[i8]>> {
        match &self.data {
            Data::Spin(v) => Ok(v.chunks_exact(self.p)),
            Data::Real(_) => Err(Error::WrongSampleKind { expected: "spin" }),
        }
    }

    pub fn real_rows(&self) -> Result<impl Iterator<Item = &[f64]>> {
        match &self.data {
            Data::Real(v) => Ok(v.chunks_exact(self.p)),
            Data::Spin(_) => Err(Error::WrongSampleKind { expected: "real" }),
        }
    }

    /// CSV export: one row per sample. Spins print as +/-1 integers, reals
    /// with 17 significant digits so parsing recovers the exact f64.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for t in 0..self.n {
            let row: Vec<String> = match &self.data {
                Data::Spin(v) => v[t * self.p..(t + 1) * self.p]
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
                Data::Real(v) => v[t * self.p..(t + 1) * self.p]
                    .iter()
                    .map(|x| format!("{x:.16e}"))
                    .collect(),
            };
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}
