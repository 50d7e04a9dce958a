//! Zero-field Ising models with exact enumeration, deterministic sampling,
//! and the closed-form clique partition functions.
//!
//! Probability of a configuration x in {-1,+1}^p is
//! exp(sum_{i<j} theta_ij x_i x_j) / Z(theta). Everything that needs Z
//! enumerates spin configurations, but does so per connected component:
//! components of a pairwise MRF with no external field are independent, so a
//! model built from many small blocks (the lifted clique ensembles) stays
//! tractable at large p. The enumeration cap applies to each component.

use std::collections::BTreeMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{ln_binomial, log_sum_exp};
use crate::sample::{Provenance, SampleSet, SpinConfig};
use crate::seeding::rng_from;

/// Largest connected component that enumeration-based operations accept.
pub const ENUMERATION_CAP: usize = 25;

#[derive(Serialize, Deserialize)]
struct IsingWire {
    p: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl From<IsingModel> for IsingWire {
    fn from(m: IsingModel) -> Self {
        IsingWire {
            p: m.p,
            edges: m.edges.iter().map(|(&(i, j), &w)| (i, j, w)).collect(),
        }
    }
}

impl TryFrom<IsingWire> for IsingModel {
    type Error = Error;
    fn try_from(w: IsingWire) -> Result<Self> {
        IsingModel::with_edges(w.p, &w.edges)
    }
}

/// An Ising model: node count plus pairwise edge weights.
///
/// Nodes are 1-based, matching the serialized form. Pairs are stored with
/// i < j; an absent pair has weight zero. The structure graph G(theta) is the
/// set of pairs with non-zero weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "IsingWire", try_from = "IsingWire")]
pub struct IsingModel {
    p: usize,
    edges: BTreeMap<(usize, usize), f64>,
}

impl IsingModel {
    /// Edge-free model on p nodes.
    pub fn new(p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidParameter("node count must be positive".into()));
        }
        Ok(IsingModel {
            p,
            edges: BTreeMap::new(),
        })
    }

    pub fn with_edges(p: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut m = IsingModel::new(p)?;
        for &(i, j, w) in edges {
            m.set_edge(i, j, w)?;
        }
        Ok(m)
    }

    /// Complete graph on p nodes with uniform weight.
    pub fn complete(p: usize, weight: f64) -> Result<Self> {
        let mut m = IsingModel::new(p)?;
        for i in 1..=p {
            for j in (i + 1)..=p {
                m.set_edge(i, j, weight)?;
            }
        }
        Ok(m)
    }

    /// p-node model whose only edge is (i, j).
    pub fn single_edge(p: usize, i: usize, j: usize, weight: f64) -> Result<Self> {
        let mut m = IsingModel::new(p)?;
        m.set_edge(i, j, weight)?;
        Ok(m)
    }

    /// Set the weight of pair {i, j}; accepts either order, rejects
    /// self-pairs and out-of-range nodes.
    pub fn set_edge(&mut self, i: usize, j: usize, w: f64) -> Result<()> {
        if i == j || i == 0 || j == 0 || i > self.p || j > self.p {
            return Err(Error::InvalidEdge { i, j, p: self.p });
        }
        let key = (i.min(j), i.max(j));
        self.edges.insert(key, w);
        Ok(())
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Weight of pair {i, j} (zero when absent).
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let key = (i.min(j), i.max(j));
        self.edges.get(&key).copied().unwrap_or(0.0)
    }

    /// All stored edges, including any explicit zeros.
    pub fn edge_weights(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.edges.iter().map(|(&k, &w)| (k, w))
    }

    /// Edges of the structure graph G(theta): pairs with non-zero weight.
    pub fn graph_edges(&self) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .filter(|(_, &w)| w != 0.0)
            .map(|(&k, _)| k)
            .collect()
    }

    pub fn max_degree(&self) -> usize {
        let mut deg = vec![0usize; self.p + 1];
        for (i, j) in self.graph_edges() {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg.into_iter().max().unwrap_or(0)
    }

    /// sum_{i<j} theta_ij x_i x_j.
    pub fn energy(&self, x: &[i8]) -> Result<f64> {
        if x.len() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                got: x.len(),
            });
        }
        Ok(self
            .edges
            .iter()
            .map(|(&(i, j), &w)| w * f64::from(x[i - 1]) * f64::from(x[j - 1]))
            .sum())
    }

    /// Connected components of G(theta), each sorted, ordered by smallest
    /// node. Isolated nodes come out as singletons.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..=self.p).collect();
        fn find(parent: &mut [usize], mut a: usize) -> usize {
            while parent[a] != a {
                parent[a] = parent[parent[a]];
                a = parent[a];
            }
            a
        }
        for (i, j) in self.graph_edges() {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 1..=self.p {
            groups.entry(find(&mut parent, v)).or_default().push(v);
        }
        groups.into_values().collect()
    }

    fn component_blocks(&self) -> Result<Vec<ComponentBlock>> {
        self.connected_components()
            .into_iter()
            .map(|nodes| {
                if nodes.len() > ENUMERATION_CAP {
                    return Err(Error::EnumerationCap {
                        size: nodes.len(),
                        cap: ENUMERATION_CAP,
                    });
                }
                let local: BTreeMap<usize, usize> =
                    nodes.iter().enumerate().map(|(k, &v)| (v, k)).collect();
                let edges = self
                    .edges
                    .iter()
                    .filter(|((i, j), _)| local.contains_key(i) && local.contains_key(j))
                    .map(|(&(i, j), &w)| (local[&i], local[&j], w))
                    .collect();
                Ok(ComponentBlock { nodes, edges })
            })
            .collect()
    }

    /// log Z(theta), by per-component enumeration.
    pub fn log_partition(&self) -> Result<f64> {
        Ok(self
            .component_blocks()?
            .iter()
            .map(|b| b.log_partition())
            .sum())
    }

    /// log P(X = x) = energy(x) - log Z.
    pub fn log_prob(&self, x: &SpinConfig) -> Result<f64> {
        Ok(self.energy(x.spins())? - self.log_partition()?)
    }

    /// True iff the model lies in the degree-bounded class on p nodes with
    /// every non-zero weight w satisfying alpha <= |w| <= beta and max
    /// degree <= d.
    pub fn class_membership(&self, p: usize, d: usize, alpha: f64, beta: f64) -> Result<bool> {
        if !(alpha > 0.0) || alpha > beta {
            return Err(Error::InvalidParameter(
                "class bounds require 0 < alpha <= beta".into(),
            ));
        }
        if self.p != p || self.max_degree() > d {
            return Ok(false);
        }
        Ok(self
            .edges
            .values()
            .filter(|&&w| w != 0.0)
            .all(|&w| alpha <= w.abs() && w.abs() <= beta))
    }

    /// Exact i.i.d. sampling by cumulative-probability inversion over the
    /// enumerated state table of each component. Deterministic in
    /// (seed, model, n).
    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleSet> {
        let blocks = self.component_blocks()?;
        let tables: Vec<CumulativeTable> = blocks.iter().map(|b| b.cumulative_table()).collect();
        let mut rng = rng_from(seed);
        let mut data = vec![0i8; n * self.p];
        for t in 0..n {
            let row = &mut data[t * self.p..(t + 1) * self.p];
            for (block, table) in blocks.iter().zip(&tables) {
                let state = table.draw(rng.random::<f64>());
                for (k, &node) in block.nodes.iter().enumerate() {
                    row[node - 1] = if state >> k & 1 == 1 { 1 } else { -1 };
                }
            }
        }
        SampleSet::from_spins(
            n,
            self.p,
            data,
            Provenance {
                seed,
                model_id: self.model_id(),
            },
        )
    }

    /// Short stable identifier for provenance records.
    pub fn model_id(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut mix = |bytes: &[u8]| {
            for &b in bytes {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x1000_0000_01b3);
            }
        };
        mix(&self.p.to_le_bytes());
        for (&(i, j), &w) in &self.edges {
            mix(&i.to_le_bytes());
            mix(&j.to_le_bytes());
            mix(&w.to_bits().to_le_bytes());
        }
        format!("ising(p={},edges={},id={:016x})", self.p, self.edges.len(), h)
    }
}

struct ComponentBlock {
    nodes: Vec<usize>,
    /// (local i, local j, weight)
    edges: Vec<(usize, usize, f64)>,
}

impl ComponentBlock {
    fn state_energy(&self, state: usize) -> f64 {
        self.edges
            .iter()
            .map(|&(i, j, w)| {
                let same = (state >> i ^ state >> j) & 1 == 0;
                if same {
                    w
                } else {
                    -w
                }
            })
            .sum()
    }

    fn log_partition(&self) -> f64 {
        let k = self.nodes.len();
        log_sum_exp(&(0..1usize << k).map(|s| self.state_energy(s)).collect::<Vec<_>>())
    }

    fn cumulative_table(&self) -> CumulativeTable {
        let k = self.nodes.len();
        let energies: Vec<f64> = (0..1usize << k).map(|s| self.state_energy(s)).collect();
        let m = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut cumulative = Vec::with_capacity(energies.len());
        let mut acc = 0.0;
        for e in &energies {
            acc += (e - m).exp();
            cumulative.push(acc);
        }
        CumulativeTable { cumulative }
    }
}

struct CumulativeTable {
    cumulative: Vec<f64>,
}

impl CumulativeTable {
    /// Map a uniform draw in [0, 1) to a state index.
    fn draw(&self, u: f64) -> usize {
        let total = *self.cumulative.last().expect("non-empty table");
        let target = u * total;
        let idx = self.cumulative.partition_point(|&c| c <= target);
        idx.min(self.cumulative.len() - 1)
    }
}

/// log Z of the complete graph on d+1 nodes with uniform weight lambda,
/// by the exact series over the number of -1 spins:
/// Z = sum_{j=0}^{d+1} C(d+1, j) exp((lambda/2)((d+1-2j)^2 - (d+1))).
pub fn clique_log_partition(d: usize, lambda: f64) -> Result<f64> {
    if d < 1 {
        return Err(Error::InvalidParameter("clique series needs d >= 1".into()));
    }
    let k = d + 1;
    let terms: Vec<f64> = (0..=k)
        .map(|j| {
            let s = k as f64 - 2.0 * j as f64;
            ln_binomial(k, j) + 0.5 * lambda * (s * s - k as f64)
        })
        .collect();
    Ok(log_sum_exp(&terms))
}

/// log Z' of the complete graph on d+1 nodes minus the edge (1,2), uniform
/// weight lambda. The series runs over the d-1 free spins (sigma is their
/// sum) and the four values of (x1, x2):
/// Z' = sum_j C(d-1, j) sum_{x1,x2} exp((lambda/2)((sigma+x1+x2)^2 - 2 x1 x2 - (d+1))).
pub fn clipped_clique_log_partition(d: usize, lambda: f64) -> Result<f64> {
    if d < 1 {
        return Err(Error::InvalidParameter("clique series needs d >= 1".into()));
    }
    let k = d + 1;
    let mut terms = Vec::with_capacity(4 * d);
    for j in 0..d {
        let sigma = (d - 1) as f64 - 2.0 * j as f64;
        let lc = ln_binomial(d - 1, j);
        for (x1, x2) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            let s = sigma + x1 + x2;
            terms.push(lc + 0.5 * lambda * (s * s - 2.0 * x1 * x2 - k as f64));
        }
    }
    Ok(log_sum_exp(&terms))
}

/// Cap for the 2^(d+1)-state enumeration behind [`lemma2_exact_v`].
pub const LEMMA2_ENUM_CAP: usize = 20;

/// Exact V(d, lambda) = (Z/Z')^2 E_P[exp(-2 lambda X1 X2)], where P is the
/// uniform-weight complete graph on d+1 nodes and Z' belongs to the model
/// with edge (1,2) removed. All three factors by enumeration, in log space.
pub fn lemma2_exact_v(d: usize, lambda: f64) -> Result<f64> {
    if d < 1 {
        return Err(Error::InvalidParameter("lemma2 V needs d >= 1".into()));
    }
    if d > LEMMA2_ENUM_CAP {
        return Err(Error::EnumerationCap {
            size: d + 1,
            cap: LEMMA2_ENUM_CAP + 1,
        });
    }
    let k = d + 1;
    let states = 1usize << k;
    let mut log_z_terms = Vec::with_capacity(states);
    let mut log_zp_terms = Vec::with_capacity(states);
    let mut log_s_terms = Vec::with_capacity(states);
    for state in 0..states {
        let plus = state.count_ones() as f64;
        let total_spin = 2.0 * plus - k as f64;
        let energy = 0.5 * lambda * (total_spin * total_spin - k as f64);
        let x1x2 = if (state ^ state >> 1) & 1 == 0 { 1.0 } else { -1.0 };
        log_z_terms.push(energy);
        log_zp_terms.push(energy - lambda * x1x2);
        log_s_terms.push(energy - 2.0 * lambda * x1x2);
    }
    let log_z = log_sum_exp(&log_z_terms);
    let log_zp = log_sum_exp(&log_zp_terms);
    let log_s = log_sum_exp(&log_s_terms);
    Ok((log_z + log_s - 2.0 * log_zp).exp())
}

/// Closed-form upper bound on V(d, lambda): 1 + 8(e^{4 lambda} + d) e^{-2 lambda d}.
///
/// Only proven for d >= 4 with lambda (d-3) >= ln d; anything else is
/// rejected as not applicable.
pub fn lemma2_bound(d: usize, lambda: f64) -> Result<f64> {
    if d < 4 {
        return Err(Error::BoundNotApplicable(format!(
            "requires d >= 4, got d = {d}"
        )));
    }
    if lambda * (d as f64 - 3.0) < (d as f64).ln() {
        return Err(Error::BoundNotApplicable(format!(
            "requires lambda (d-3) >= ln d; lambda = {lambda}, d = {d}"
        )));
    }
    let df = d as f64;
    Ok(1.0 + 8.0 * ((4.0 * lambda).exp() + df) * (-2.0 * lambda * df).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::mean_and_se;

    const LN2: f64 = std::f64::consts::LN_2;

    /// Independent brute-force log Z: direct product iteration, no component
    /// decomposition, no log-sum-exp.
    fn naive_log_z(m: &IsingModel) -> f64 {
        let p = m.p();
        let mut total = 0.0f64;
        for bits in 0..1usize << p {
            let x = SpinConfig::from_bits(bits, p);
            total += m.energy(x.spins()).unwrap().exp();
        }
        total.ln()
    }

    #[test]
    fn log_prob_uniform_cases() {
        let m = IsingModel::new(1).unwrap();
        let x = SpinConfig::new(vec![1]).unwrap();
        assert!((m.log_prob(&x).unwrap() - (0.5f64).ln()).abs() < 1e-12);

        let m = IsingModel::with_edges(2, &[(1, 2, 0.0)]).unwrap();
        let x = SpinConfig::new(vec![1, -1]).unwrap();
        assert!((m.log_prob(&x).unwrap() - (0.25f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn log_prob_triangle_matches_enumeration() {
        let m = IsingModel::with_edges(3, &[(1, 2, 0.5), (1, 3, 0.5), (2, 3, 0.5)]).unwrap();
        let x = SpinConfig::new(vec![1, 1, 1]).unwrap();
        let expected = 1.5 - naive_log_z(&m);
        assert!((m.log_prob(&x).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn log_prob_normalizes() {
        let models = [
            IsingModel::with_edges(3, &[(1, 2, 0.7), (2, 3, -1.1)]).unwrap(),
            IsingModel::with_edges(5, &[(1, 2, 0.4), (3, 4, 1.3), (4, 5, -0.6), (1, 5, 0.2)])
                .unwrap(),
            IsingModel::complete(6, 0.3).unwrap(),
        ];
        for m in &models {
            let mut total = 0.0;
            for bits in 0..1usize << m.p() {
                let x = SpinConfig::from_bits(bits, m.p());
                total += m.log_prob(&x).unwrap().exp();
            }
            assert!((total - 1.0).abs() < 1e-10, "sum = {total}");
        }
    }

    #[test]
    fn log_prob_dimension_mismatch() {
        let m = IsingModel::new(3).unwrap();
        let x = SpinConfig::new(vec![1, 1]).unwrap();
        assert!(matches!(
            m.log_prob(&x),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn component_cap_enforced() {
        let m = IsingModel::complete(26, 0.1);
        assert!(matches!(
            m.unwrap().log_partition(),
            Err(Error::EnumerationCap { .. })
        ));
        // 30 isolated nodes factor into singletons and stay tractable.
        let free = IsingModel::new(30).unwrap();
        assert!((free.log_partition().unwrap() - 30.0 * LN2).abs() < 1e-9);
    }

    #[test]
    fn log_partition_examples() {
        let m = IsingModel::with_edges(2, &[(1, 2, 0.0)]).unwrap();
        assert!((m.log_partition().unwrap() - 4.0f64.ln()).abs() < 1e-12);

        for lambda in [0.3, 1.7] {
            let m = IsingModel::single_edge(2, 1, 2, lambda).unwrap();
            let expected = (2.0 * lambda.exp() + 2.0 * (-lambda).exp()).ln();
            assert!((m.log_partition().unwrap() - expected).abs() < 1e-12);
        }

        let m = IsingModel::complete(5, 0.4).unwrap();
        let series = clique_log_partition(4, 0.4).unwrap();
        assert!((m.log_partition().unwrap() - series).abs() < 1e-12);
    }

    #[test]
    fn clique_series_examples() {
        assert!((clique_log_partition(1, 0.0).unwrap() - 4.0f64.ln()).abs() < 1e-12);
        let expected = (2.0 * 3.0f64.exp() + 6.0 * (-1.0f64).exp()).ln();
        assert!((clique_log_partition(2, 1.0).unwrap() - expected).abs() < 1e-12);

        let m = IsingModel::complete(9, 0.6).unwrap();
        assert!((clique_log_partition(8, 0.6).unwrap() - naive_log_z(&m)).abs() < 1e-12);
    }

    #[test]
    fn clipped_series_examples() {
        // K_2 minus its only edge: two free spins.
        assert!((clipped_clique_log_partition(1, 0.7).unwrap() - 4.0f64.ln()).abs() < 1e-12);

        let mut m = IsingModel::complete(5, 0.5).unwrap();
        m.set_edge(1, 2, 0.0).unwrap();
        assert!((clipped_clique_log_partition(4, 0.5).unwrap() - naive_log_z(&m)).abs() < 1e-12);
    }

    #[test]
    fn clipped_partition_dominates_discounted_full() {
        for d in 1..=10 {
            for k in 0..=15 {
                let lambda = 0.2 * k as f64;
                let lz = clique_log_partition(d, lambda).unwrap();
                let lzp = clipped_clique_log_partition(d, lambda).unwrap();
                assert!(
                    lzp >= lz - lambda - 1e-10,
                    "d={d} lambda={lambda}: {lzp} < {lz} - {lambda}"
                );
            }
        }
    }

    #[test]
    fn sampler_matches_pair_marginal() {
        let m = IsingModel::with_edges(2, &[(1, 2, 0.0)]).unwrap();
        let xs = m.sample(100_000, 7).unwrap();
        let agree = xs
            .spin_rows()
            .unwrap()
            .filter(|r| r[0] == r[1])
            .count() as f64
            / 100_000.0;
        let se = (0.25f64 / 100_000.0).sqrt();
        assert!((agree - 0.5).abs() < 4.0 * se, "agree = {agree}");

        let m = IsingModel::single_edge(3, 1, 2, 2.0).unwrap();
        let xs = m.sample(100_000, 11).unwrap();
        let agree = xs
            .spin_rows()
            .unwrap()
            .filter(|r| r[0] == r[1])
            .count() as f64
            / 100_000.0;
        let e2 = 2.0f64.exp();
        let expected = e2 / (e2 + (-2.0f64).exp());
        let se = (expected * (1.0 - expected) / 100_000.0).sqrt();
        assert!((agree - expected).abs() < 4.0 * se, "agree = {agree}");
    }

    #[test]
    fn sampler_is_deterministic() {
        let m = IsingModel::with_edges(4, &[(1, 2, 0.8), (3, 4, -0.5)]).unwrap();
        assert_eq!(m.sample(50, 123).unwrap(), m.sample(50, 123).unwrap());
        assert_ne!(m.sample(50, 123).unwrap(), m.sample(50, 124).unwrap());
    }

    #[test]
    fn sampler_goodness_of_fit() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        // chi^2 GOF against exact state probabilities at significance 1e-3.
        let models = [
            IsingModel::with_edges(2, &[(1, 2, 0.9)]).unwrap(),
            IsingModel::with_edges(3, &[(1, 2, 0.5), (2, 3, -0.7)]).unwrap(),
            IsingModel::with_edges(4, &[(1, 2, 1.2), (1, 3, -0.4), (3, 4, 0.6)]).unwrap(),
        ];
        for (k, m) in models.iter().enumerate() {
            let n = 100_000usize;
            let xs = m.sample(n, 1000 + k as u64).unwrap();
            let p = m.p();
            let mut counts = vec![0usize; 1 << p];
            for row in xs.spin_rows().unwrap() {
                let mut bits = 0usize;
                for (i, &s) in row.iter().enumerate() {
                    if s == 1 {
                        bits |= 1 << i;
                    }
                }
                counts[bits] += 1;
            }
            let mut stat = 0.0;
            for bits in 0..1usize << p {
                let x = SpinConfig::from_bits(bits, p);
                let expect = m.log_prob(&x).unwrap().exp() * n as f64;
                let diff = counts[bits] as f64 - expect;
                stat += diff * diff / expect;
            }
            let df = (1u64 << p) - 1;
            let crit = ChiSquared::new(df as f64).unwrap().inverse_cdf(0.999);
            assert!(stat < crit, "model {k}: chi2 stat {stat} >= {crit}");
        }
    }

    #[test]
    fn lemma2_exact_v_at_zero_is_one() {
        for d in [1, 4, 6, 12] {
            assert!((lemma2_exact_v(d, 0.0).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lemma2_exact_v_below_bound_at_gate() {
        let d = 6;
        let lambda = 6.0f64.ln() / 3.0;
        let v = lemma2_exact_v(d, lambda).unwrap();
        let b = lemma2_bound(d, lambda).unwrap();
        assert!(v <= b, "V = {v}, bound = {b}");
        assert!(v >= 1.0);
    }

    #[test]
    fn lemma2_exact_v_matches_monte_carlo() {
        // MC estimate of E_P[exp(-2 lambda X1 X2)] on K_5, scaled by the
        // series-route (Z/Z')^2, cross-checks the enumeration route.
        let (d, lambda) = (4usize, 1.0f64);
        let m = IsingModel::complete(d + 1, lambda).unwrap();
        let xs = m.sample(100_000, 99).unwrap();
        let w: Vec<f64> = xs
            .spin_rows()
            .unwrap()
            .map(|r| (-2.0 * lambda * f64::from(r[0]) * f64::from(r[1])).exp())
            .collect();
        let (mean, se) = mean_and_se(&w);
        let ratio2 = (2.0
            * (clique_log_partition(d, lambda).unwrap()
                - clipped_clique_log_partition(d, lambda).unwrap()))
        .exp();
        let v = lemma2_exact_v(d, lambda).unwrap();
        assert!(
            (v - ratio2 * mean).abs() < 4.0 * ratio2 * se,
            "V = {v}, MC = {}",
            ratio2 * mean
        );
    }

    #[test]
    fn lemma2_bound_examples() {
        let b = lemma2_bound(4, 4.0f64.ln()).unwrap();
        assert!((b - (1.0 + 2080.0 / 65536.0)).abs() < 1e-12);
        assert!(matches!(
            lemma2_bound(4, 0.1),
            Err(Error::BoundNotApplicable(_))
        ));
        assert!(matches!(
            lemma2_bound(3, 5.0),
            Err(Error::BoundNotApplicable(_))
        ));
        // d=10, lambda=0.4 passes the gate and dominates the exact value.
        let b = lemma2_bound(10, 0.4).unwrap();
        let v = lemma2_exact_v(10, 0.4).unwrap();
        assert!(b >= v);
    }

    #[test]
    fn class_membership_examples() {
        let empty = IsingModel::new(4).unwrap();
        assert!(empty.class_membership(4, 2, 0.5, 1.0).unwrap());

        let weak = IsingModel::single_edge(3, 1, 2, 0.3).unwrap();
        assert!(!weak.class_membership(3, 2, 0.5, 1.0).unwrap());

        let k5 = IsingModel::complete(5, 1.0).unwrap();
        assert!(k5.class_membership(5, 4, 0.5, 1.0).unwrap());
        assert!(!k5.class_membership(5, 3, 0.5, 1.0).unwrap());

        assert!(matches!(
            empty.class_membership(4, 2, 0.0, 1.0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn serde_round_trip() {
        let m = IsingModel::with_edges(4, &[(1, 2, 0.5), (2, 4, -1.25)]).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.contains("\"edges\""));
        let back: IsingModel = serde_json::from_str(&json).unwrap();
        assert_eq!(m, back);

        let bad = r#"{"p":2,"edges":[[1,1,0.5]]}"#;
        assert!(serde_json::from_str::<IsingModel>(bad).is_err());
    }
}
