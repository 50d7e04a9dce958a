//! Zero-mean Gaussian Markov random fields parameterised by their precision
//! matrix, plus the closed-form determinants for one- and two-edge
//! perturbations of the identity.

use nalgebra::DMatrix;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::{Provenance, SampleSet};
use crate::seeding::rng_from;

const SYMMETRY_TOL: f64 = 1e-12;
/// A Cholesky pivot below this is treated as a positive-definiteness failure.
const PIVOT_TOL: f64 = 1e-12;

#[derive(Serialize, Deserialize)]
struct GaussianWire {
    p: usize,
    precision: Vec<f64>,
}

impl From<GaussianModel> for GaussianWire {
    fn from(m: GaussianModel) -> Self {
        let p = m.p();
        GaussianWire {
            p,
            precision: (0..p)
                .flat_map(|i| (0..p).map(move |j| (i, j)))
                .map(|(i, j)| m.precision[(i, j)])
                .collect(),
        }
    }
}

impl TryFrom<GaussianWire> for GaussianModel {
    type Error = Error;
    fn try_from(w: GaussianWire) -> Result<Self> {
        GaussianModel::from_row_major(w.p, &w.precision)
    }
}

/// A Gaussian MRF with symmetric positive-definite precision matrix A.
///
/// Density is sqrt(det A / (2 pi)^p) exp(-x' A x / 2). The Cholesky factor
/// is computed at construction; failure to factor is a typed error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "GaussianWire", try_from = "GaussianWire")]
pub struct GaussianModel {
    precision: DMatrix<f64>,
    chol_l: DMatrix<f64>,
}

impl GaussianModel {
    pub fn new(precision: DMatrix<f64>) -> Result<Self> {
        let p = precision.nrows();
        if p == 0 || precision.ncols() != p {
            return Err(Error::InvalidParameter(
                "precision matrix must be square and non-empty".into(),
            ));
        }
        let mut asym = 0.0f64;
        for i in 0..p {
            for j in (i + 1)..p {
                asym = asym.max((precision[(i, j)] - precision[(j, i)]).abs());
            }
        }
        if asym > SYMMETRY_TOL {
            return Err(Error::NotSymmetric(asym));
        }
        let chol = precision
            .clone()
            .cholesky()
            .ok_or(Error::NotPositiveDefinite)?;
        let chol_l: DMatrix<f64> = chol.l();
        if (0..p).any(|i| chol_l[(i, i)] * chol_l[(i, i)] <= PIVOT_TOL) {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(GaussianModel { precision, chol_l })
    }

    pub fn from_row_major(p: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != p * p {
            return Err(Error::DimensionMismatch {
                expected: p * p,
                got: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(p, p, entries))
    }

    /// Identity precision on p nodes.
    pub fn identity(p: usize) -> Result<Self> {
        Self::new(DMatrix::identity(p, p))
    }

    /// Identity plus lambda at (i, j) and (j, i); 1-based, i < j <= p.
    /// Positive definite iff |lambda| < 1.
    pub fn single_edge(p: usize, i: usize, j: usize, lambda: f64) -> Result<Self> {
        if i == 0 || j == 0 || i >= j || j > p {
            return Err(Error::InvalidEdge { i, j, p });
        }
        if lambda.abs() >= 1.0 {
            return Err(Error::NotPositiveDefinite);
        }
        let mut a = DMatrix::identity(p, p);
        a[(i - 1, j - 1)] = lambda;
        a[(j - 1, i - 1)] = lambda;
        Self::new(a)
    }

    pub fn p(&self) -> usize {
        self.precision.nrows()
    }

    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }

    /// log det A from the Cholesky factor.
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.p()).map(|i| self.chol_l[(i, i)].ln()).sum::<f64>()
    }

    /// (1/2) log det A - (p/2) log 2 pi - x' A x / 2.
    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        let p = self.p();
        if x.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: x.len(),
            });
        }
        let mut quad = 0.0;
        for i in 0..p {
            for j in 0..p {
                quad += x[i] * self.precision[(i, j)] * x[j];
            }
        }
        Ok(0.5 * self.log_det() - 0.5 * p as f64 * (2.0 * std::f64::consts::PI).ln() - 0.5 * quad)
    }

    /// i.i.d. zero-mean samples with covariance A^{-1}: draw w ~ N(0, I) and
    /// solve L' x = w against the Cholesky factor. Deterministic in seed.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleSet> {
        let p = self.p();
        let lt = self.chol_l.transpose();
        let mut rng = rng_from(seed);
        let mut data = Vec::with_capacity(n * p);
        for _ in 0..n {
            let w =
                nalgebra::DVector::from_iterator(p, (0..p).map(|_| rng.sample(StandardNormal)));
            let x = lt
                .clone()
                .solve_upper_triangular(&w)
                .expect("positive pivots guaranteed at construction");
            data.extend(x.iter());
        }
        SampleSet::from_reals(
            n,
            p,
            data,
            Provenance {
                seed,
                model_id: self.model_id(),
            },
        )
    }

    /// Smallest normalized off-diagonal magnitude min |A_ij| / sqrt(A_ii A_jj)
    /// over non-zero off-diagonals; `None` when the model has no edges.
    pub fn gamma_of(&self) -> Option<f64> {
        let p = self.p();
        let mut best: Option<f64> = None;
        for i in 0..p {
            for j in (i + 1)..p {
                let a = self.precision[(i, j)];
                if a != 0.0 {
                    let g = a.abs() / (self.precision[(i, i)] * self.precision[(j, j)]).sqrt();
                    best = Some(best.map_or(g, |b: f64| b.min(g)));
                }
            }
        }
        best
    }

    /// Pairs (i, j), 1-based i < j, with non-zero precision entry.
    pub fn graph_edges(&self) -> Vec<(usize, usize)> {
        let p = self.p();
        let mut out = Vec::new();
        for i in 0..p {
            for j in (i + 1)..p {
                if self.precision[(i, j)] != 0.0 {
                    out.push((i + 1, j + 1));
                }
            }
        }
        out
    }

    pub fn model_id(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for v in self.precision.iter() {
            for b in v.to_bits().to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x1000_0000_01b3);
            }
        }
        format!("gaussian(p={},id={:016x})", self.p(), h)
    }
}

/// Closed-form det(I_p + Delta_pair1 + Delta_pair2) where Delta_pair puts
/// lambda symmetrically on one pair. Dispatches on the overlap of the pairs:
/// identical -> 1 - 4 lambda^2, one shared node -> 1 - 2 lambda^2,
/// disjoint -> (1 - lambda^2)^2. Errors when the stated determinant is not
/// positive (the perturbed matrix would not be positive definite).
pub fn pairwise_delta_det(
    p: usize,
    pair1: (usize, usize),
    pair2: (usize, usize),
    lambda: f64,
) -> Result<f64> {
    for &(i, j) in [&pair1, &pair2] {
        if i == 0 || j == 0 || i >= j || j > p {
            return Err(Error::InvalidEdge { i, j, p });
        }
    }
    let overlap = [pair1.0, pair1.1]
        .iter()
        .filter(|&&v| v == pair2.0 || v == pair2.1)
        .count();
    let det = match overlap {
        2 => 1.0 - 4.0 * lambda * lambda,
        1 => 1.0 - 2.0 * lambda * lambda,
        _ => (1.0 - lambda * lambda) * (1.0 - lambda * lambda),
    };
    if det <= 0.0 || lambda.abs() >= 1.0 {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(det)
}
