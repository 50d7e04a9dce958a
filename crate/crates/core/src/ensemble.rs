//! Change-detection ensembles: a null model P plus a finite family of
//! structurally different alternatives Q, with the uniform prior implied.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::GaussianModel;
use crate::ising::IsingModel;

/// Either model family, so one ensemble type covers both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Model {
    Ising(IsingModel),
    Gaussian(GaussianModel),
}

impl Model {
    pub fn p(&self) -> usize {
        match self {
            Model::Ising(m) => m.p(),
            Model::Gaussian(m) => m.p(),
        }
    }

    pub fn model_id(&self) -> String {
        match self {
            Model::Ising(m) => m.model_id(),
            Model::Gaussian(m) => m.model_id(),
        }
    }

    /// Edge set of the structure graph, 1-based pairs.
    pub fn edge_set(&self) -> BTreeSet<(usize, usize)> {
        match self {
            Model::Ising(m) => m.graph_edges().into_iter().collect(),
            Model::Gaussian(m) => m.graph_edges().into_iter().collect(),
        }
    }

    pub fn as_ising(&self) -> Result<&IsingModel> {
        match self {
            Model::Ising(m) => Ok(m),
            Model::Gaussian(_) => Err(Error::WrongSampleKind { expected: "ising" }),
        }
    }

    pub fn as_gaussian(&self) -> Result<&GaussianModel> {
        match self {
            Model::Gaussian(m) => Ok(m),
            Model::Ising(_) => Err(Error::WrongSampleKind {
                expected: "gaussian",
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleKind {
    IsingSingleEdge,
    IsingClique,
    GaussianSingleEdge,
}

impl EnsembleKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EnsembleKind::IsingSingleEdge => "ising-single-edge",
            EnsembleKind::IsingClique => "ising-clique",
            EnsembleKind::GaussianSingleEdge => "gaussian-single-edge",
        }
    }
}

/// Construction parameters carried along for reports and dispatch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub p: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub d: Option<usize>,
    pub lambda: f64,
    /// Number of cliques for the lifted ensemble.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub r: Option<usize>,
}

/// The pair (P, Q): null model plus alternatives, all of one kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangeEnsemble {
    pub kind: EnsembleKind,
    pub params: EnsembleParams,
    null_model: Model,
    alternatives: Vec<Model>,
}

impl ChangeEnsemble {
    /// Hand-assembly escape hatch; the named constructors below are the
    /// normal entry points.
    pub fn from_parts(
        kind: EnsembleKind,
        params: EnsembleParams,
        null_model: Model,
        alternatives: Vec<Model>,
    ) -> Result<Self> {
        if alternatives.is_empty() {
            return Err(Error::InvalidParameter(
                "ensemble needs at least one alternative".into(),
            ));
        }
        let p = null_model.p();
        if params.p != p || alternatives.iter().any(|a| a.p() != p) {
            return Err(Error::InvalidParameter(
                "all ensemble members must share the node count".into(),
            ));
        }
        Ok(ChangeEnsemble {
            kind,
            params,
            null_model,
            alternatives,
        })
    }

    pub fn null_model(&self) -> &Model {
        &self.null_model
    }

    pub fn alternatives(&self) -> &[Model] {
        &self.alternatives
    }

    pub fn p(&self) -> usize {
        self.params.p
    }

    /// For the clique kind: the pair clipped by alternative mu (0-based),
    /// i.e. the first two nodes of clique mu.
    pub fn clipped_pair(&self, mu: usize) -> Result<(usize, usize)> {
        if self.kind != EnsembleKind::IsingClique {
            return Err(Error::KindMismatch {
                expected: "ising-clique",
                got: self.kind.as_str(),
            });
        }
        let d = self.params.d.expect("clique ensembles carry d");
        let base = mu * (d + 1);
        Ok((base + 1, base + 2))
    }

    pub fn describe(&self) -> String {
        format!(
            "{}(p={},d={:?},lambda={},r={:?})",
            self.kind.as_str(),
            self.params.p,
            self.params.d,
            self.params.lambda,
            self.params.r
        )
    }
}

/// Null: no edges on p nodes. Alternatives: every single-edge model with
/// weight lambda, in lexicographic pair order.
pub fn ising_single_edge_ensemble(p: usize, lambda: f64) -> Result<ChangeEnsemble> {
    if p < 2 {
        return Err(Error::InvalidParameter(
            "single-edge ensemble needs p >= 2".into(),
        ));
    }
    if lambda == 0.0 {
        return Err(Error::InvalidParameter(
            "single-edge ensemble needs lambda != 0".into(),
        ));
    }
    let null_model = Model::Ising(IsingModel::new(p)?);
    let mut alternatives = Vec::with_capacity(p * (p - 1) / 2);
    for i in 1..=p {
        for j in (i + 1)..=p {
            alternatives.push(Model::Ising(IsingModel::single_edge(p, i, j, lambda)?));
        }
    }
    ChangeEnsemble::from_parts(
        EnsembleKind::IsingSingleEdge,
        EnsembleParams {
            p,
            d: None,
            lambda,
            r: None,
        },
        null_model,
        alternatives,
    )
}

/// Null: r = floor(p/(d+1)) disjoint complete (d+1)-cliques with uniform
/// weight lambda on nodes 1..r(d+1), remaining nodes isolated. Alternative
/// mu deletes the edge between the first two nodes of clique mu.
pub fn ising_clique_ensemble(p: usize, d: usize, lambda: f64) -> Result<ChangeEnsemble> {
    if d < 1 {
        return Err(Error::InvalidParameter("clique ensemble needs d >= 1".into()));
    }
    if p < d + 1 {
        return Err(Error::InvalidParameter(
            "clique ensemble needs p >= d + 1".into(),
        ));
    }
    let r = p / (d + 1);
    let mut base_edges = Vec::new();
    for mu in 0..r {
        let offset = mu * (d + 1);
        for i in 1..=(d + 1) {
            for j in (i + 1)..=(d + 1) {
                base_edges.push((offset + i, offset + j, lambda));
            }
        }
    }
    let null_model = Model::Ising(IsingModel::with_edges(p, &base_edges)?);
    let mut alternatives = Vec::with_capacity(r);
    for mu in 0..r {
        let offset = mu * (d + 1);
        let mut m = IsingModel::with_edges(p, &base_edges)?;
        m.set_edge(offset + 1, offset + 2, 0.0)?;
        alternatives.push(Model::Ising(m));
    }
    ChangeEnsemble::from_parts(
        EnsembleKind::IsingClique,
        EnsembleParams {
            p,
            d: Some(d),
            lambda,
            r: Some(r),
        },
        null_model,
        alternatives,
    )
}

/// Null: identity precision. Alternatives: I_p + Delta_ij for every pair.
/// Requires 0 < |lambda| < 1/2 so every second-moment determinant stays
/// positive.
pub fn gaussian_single_edge_ensemble(p: usize, lambda: f64) -> Result<ChangeEnsemble> {
    if p < 2 {
        return Err(Error::InvalidParameter(
            "single-edge ensemble needs p >= 2".into(),
        ));
    }
    if lambda == 0.0 || lambda.abs() >= 0.5 {
        return Err(Error::InvalidParameter(
            "gaussian single-edge ensemble needs 0 < |lambda| < 1/2".into(),
        ));
    }
    let null_model = Model::Gaussian(GaussianModel::identity(p)?);
    let mut alternatives = Vec::with_capacity(p * (p - 1) / 2);
    for i in 1..=p {
        for j in (i + 1)..=p {
            alternatives.push(Model::Gaussian(GaussianModel::single_edge(p, i, j, lambda)?));
        }
    }
    ChangeEnsemble::from_parts(
        EnsembleKind::GaussianSingleEdge,
        EnsembleParams {
            p,
            d: None,
            lambda,
            r: None,
        },
        null_model,
        alternatives,
    )
}

/// True iff every alternative's structure graph differs from the null's.
pub fn verify_structural_difference(e: &ChangeEnsemble) -> bool {
    let null_edges = e.null_model().edge_set();
    e.alternatives().iter().all(|a| a.edge_set() != null_edges)
}
