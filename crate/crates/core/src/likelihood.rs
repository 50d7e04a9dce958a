//! Mixture likelihood ratios L_n and the Neyman-Pearson threshold test.
//!
//! L_n(X^n) = (1/|Q|) sum_{Q in alternatives} prod_t dQ/dP(X^(t)). The
//! product over samples shrinks exponentially in n, so every path works in
//! natural-log space and the mixture is a single log-sum-exp.

use crate::ensemble::{ChangeEnsemble, EnsembleKind, Model};
use crate::error::{Error, Result};
use crate::ising::{clipped_clique_log_partition, clique_log_partition};
use crate::numeric::log_sum_exp;
use crate::sample::SampleSet;

/// A log-scale likelihood ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLr {
    pub value: f64,
}

impl LogLr {
    pub fn new(value: f64) -> Self {
        LogLr { value }
    }
}

/// Mixture likelihood ratio straight from the definition: per-alternative
/// log densities minus null log densities, summed over samples, combined by
/// log-sum-exp under the uniform prior.
///
/// Each model's log-partition (Ising) is computed once per call.
pub fn log_lr_generic(e: &ChangeEnsemble, xs: &SampleSet) -> Result<LogLr> {
    if xs.p() != e.p() {
        return Err(Error::DimensionMismatch {
            expected: e.p(),
            got: xs.p(),
        });
    }
    let alts = e.alternatives();
    let mut terms = Vec::with_capacity(alts.len());
    match e.null_model() {
        Model::Ising(null) => {
            let null_log_z = null.log_partition()?;
            for alt in alts {
                let alt = alt.as_ising()?;
                let alt_log_z = alt.log_partition()?;
                let mut acc = 0.0;
                for row in xs.spin_rows()? {
                    acc += alt.energy(row)? - null.energy(row)?;
                }
                acc += xs.n() as f64 * (null_log_z - alt_log_z);
                terms.push(acc);
            }
        }
        Model::Gaussian(null) => {
            for alt in alts {
                let alt = alt.as_gaussian()?;
                let mut acc = 0.0;
                for row in xs.real_rows()? {
                    acc += alt.log_density(row)? - null.log_density(row)?;
                }
                terms.push(acc);
            }
        }
    }
    Ok(LogLr::new(log_sum_exp(&terms) - (alts.len() as f64).ln()))
}

/// Closed form for the single-edge Ising ensemble. With
/// eta = e^{-lambda} / (e^{lambda} + e^{-lambda}), each pair contributes
/// prod_t 2 (eta + (1 - 2 eta) 1{X_i = X_j}), which collapses to a function
/// of the agreement count.
pub fn log_lr_ising_single_edge(p: usize, lambda: f64, xs: &SampleSet) -> Result<LogLr> {
    if xs.p() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: xs.p(),
        });
    }
    if p < 2 {
        return Err(Error::InvalidParameter("needs p >= 2".into()));
    }
    let n = xs.n();
    let eta = (-lambda).exp() / (lambda.exp() + (-lambda).exp());
    // 2(1-eta) = factor on agreement, 2 eta = factor on disagreement.
    let ln_agree = (2.0 * (1.0 - eta)).ln();
    let ln_disagree = (2.0 * eta).ln();
    let mut terms = Vec::with_capacity(p * (p - 1) / 2);
    let rows: Vec<&[i8]> = xs.spin_rows()?.collect();
    for i in 0..p {
        for j in (i + 1)..p {
            let agree = rows.iter().filter(|r| r[i] == r[j]).count();
            terms.push(agree as f64 * ln_agree + (n - agree) as f64 * ln_disagree);
        }
    }
    Ok(LogLr::new(log_sum_exp(&terms) - ((p * (p - 1) / 2) as f64).ln()))
}

/// Closed form for the lifted clique ensemble: alternative mu contributes
/// n (log Z - log Z') - lambda sum_t X_a X_b for its clipped pair (a, b).
pub fn log_lr_ising_clique(e: &ChangeEnsemble, xs: &SampleSet) -> Result<LogLr> {
    if e.kind != EnsembleKind::IsingClique {
        return Err(Error::KindMismatch {
            expected: "ising-clique",
            got: e.kind.as_str(),
        });
    }
    if xs.p() != e.p() {
        return Err(Error::DimensionMismatch {
            expected: e.p(),
            got: xs.p(),
        });
    }
    let d = e.params.d.expect("clique ensembles carry d");
    let r = e.alternatives().len();
    let lambda = e.params.lambda;
    let log_z = clique_log_partition(d, lambda)?;
    let log_zp = clipped_clique_log_partition(d, lambda)?;
    let rows: Vec<&[i8]> = xs.spin_rows()?.collect();
    let mut terms = Vec::with_capacity(r);
    for mu in 0..r {
        let (a, b) = e.clipped_pair(mu)?;
        let pair_sum: f64 = rows
            .iter()
            .map(|row| f64::from(row[a - 1]) * f64::from(row[b - 1]))
            .sum();
        terms.push(xs.n() as f64 * (log_z - log_zp) - lambda * pair_sum);
    }
    Ok(LogLr::new(log_sum_exp(&terms) - (r as f64).ln()))
}

/// Closed form for the Gaussian single-edge ensemble:
/// (n/2) log(1 - lambda^2) + logsumexp_{i<j}(-lambda sum_t X_i X_j) - log C(p,2).
pub fn log_lr_gaussian_single_edge(p: usize, lambda: f64, xs: &SampleSet) -> Result<LogLr> {
    if xs.p() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: xs.p(),
        });
    }
    if p < 2 {
        return Err(Error::InvalidParameter("needs p >= 2".into()));
    }
    if lambda.abs() >= 1.0 {
        return Err(Error::NotPositiveDefinite);
    }
    let n = xs.n();
    let rows: Vec<&[f64]> = xs.real_rows()?.collect();
    let mut terms = Vec::with_capacity(p * (p - 1) / 2);
    for i in 0..p {
        for j in (i + 1)..p {
            let s: f64 = rows.iter().map(|r| r[i] * r[j]).sum();
            terms.push(-lambda * s);
        }
    }
    Ok(LogLr::new(
        0.5 * n as f64 * (1.0 - lambda * lambda).ln() + log_sum_exp(&terms)
            - ((p * (p - 1) / 2) as f64).ln(),
    ))
}

/// Dispatch to the closed form matching the ensemble kind. This is what the
/// Monte Carlo estimators use; the generic path stays available as the
/// cross-check oracle.
pub fn log_lr(e: &ChangeEnsemble, xs: &SampleSet) -> Result<LogLr> {
    match e.kind {
        EnsembleKind::IsingSingleEdge => log_lr_ising_single_edge(e.p(), e.params.lambda, xs),
        EnsembleKind::IsingClique => log_lr_ising_clique(e, xs),
        EnsembleKind::GaussianSingleEdge => log_lr_gaussian_single_edge(e.p(), e.params.lambda, xs),
    }
}

/// Neyman-Pearson threshold test: declare a change (1) iff the log ratio
/// reaches log tau. Ties reject the null.
pub fn np_test(lr: LogLr, log_tau: f64) -> u8 {
    u8::from(lr.value >= log_tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{
        gaussian_single_edge_ensemble, ising_clique_ensemble, ising_single_edge_ensemble,
        ChangeEnsemble, EnsembleParams,
    };
    use crate::ising::IsingModel;
    use crate::sample::{Provenance, SampleSet};

    fn prov() -> Provenance {
        Provenance {
            seed: 0,
            model_id: "test".into(),
        }
    }

    fn spin_set(n: usize, p: usize, data: Vec<i8>) -> SampleSet {
        SampleSet::from_spins(n, p, data, prov()).unwrap()
    }

    #[test]
    fn degenerate_mixture_is_exactly_zero() {
        let m = Model::Ising(IsingModel::single_edge(3, 1, 2, 0.9).unwrap());
        let e = ChangeEnsemble::from_parts(
            EnsembleKind::IsingSingleEdge,
            EnsembleParams {
                p: 3,
                d: None,
                lambda: 0.9,
                r: None,
            },
            m.clone(),
            vec![m],
        )
        .unwrap();
        let xs = spin_set(2, 3, vec![1, -1, 1, 1, 1, -1]);
        assert_eq!(log_lr_generic(&e, &xs).unwrap().value, 0.0);
    }

    #[test]
    fn single_edge_closed_form_matches_generic() {
        let e = ising_single_edge_ensemble(3, 0.5).unwrap();
        let xs = e.null_model().as_ising().unwrap().sample(5, 21).unwrap();
        let generic = log_lr_generic(&e, &xs).unwrap().value;
        let closed = log_lr_ising_single_edge(3, 0.5, &xs).unwrap().value;
        assert!((generic - closed).abs() < 1e-10);

        // Also under an alternative's law, and at other sizes.
        let alt = e.alternatives()[1].as_ising().unwrap();
        let xs = alt.sample(4, 22).unwrap();
        let generic = log_lr_generic(&e, &xs).unwrap().value;
        let closed = log_lr_ising_single_edge(3, 0.5, &xs).unwrap().value;
        assert!((generic - closed).abs() < 1e-10);

        let e = ising_single_edge_ensemble(5, 0.8).unwrap();
        let xs = e.null_model().as_ising().unwrap().sample(3, 23).unwrap();
        let generic = log_lr_generic(&e, &xs).unwrap().value;
        let closed = log_lr_ising_single_edge(5, 0.8, &xs).unwrap().value;
        assert!((generic - closed).abs() < 1e-10);
    }

    #[test]
    fn single_edge_zero_lambda_is_zero() {
        let xs = spin_set(3, 4, vec![1, 1, -1, 1, -1, -1, 1, 1, 1, -1, 1, -1]);
        assert_eq!(log_lr_ising_single_edge(4, 0.0, &xs).unwrap().value, 0.0);
    }

    #[test]
    fn single_edge_two_node_value() {
        // tanh(lambda) = 0.5 makes the agreement factor 2(eta + (1-2eta)) = 1.5.
        let lambda = 0.5f64.atanh();
        let xs = spin_set(1, 2, vec![1, 1]);
        let lr = log_lr_ising_single_edge(2, lambda, &xs).unwrap().value;
        assert!((lr - 1.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn clique_closed_form_matches_generic() {
        let e = ising_clique_ensemble(5, 4, 0.6).unwrap();
        for seed in [1, 2, 3] {
            let xs = e.null_model().as_ising().unwrap().sample(3, seed).unwrap();
            let generic = log_lr_generic(&e, &xs).unwrap().value;
            let closed = log_lr_ising_clique(&e, &xs).unwrap().value;
            assert!((generic - closed).abs() < 1e-10, "seed {seed}");
        }

        let e = ising_clique_ensemble(7, 2, 1.1).unwrap();
        let xs = e.alternatives()[1].as_ising().unwrap().sample(4, 9).unwrap();
        let generic = log_lr_generic(&e, &xs).unwrap().value;
        let closed = log_lr_ising_clique(&e, &xs).unwrap().value;
        assert!((generic - closed).abs() < 1e-10);
    }

    #[test]
    fn clique_zero_lambda_is_zero() {
        let e = ising_clique_ensemble(6, 2, 0.0).unwrap();
        let xs = spin_set(2, 6, vec![1, -1, 1, 1, 1, -1, -1, -1, 1, -1, 1, 1]);
        assert!(log_lr_ising_clique(&e, &xs).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn clique_reads_only_clipped_pairs() {
        let e = ising_clique_ensemble(10, 4, 0.7).unwrap();
        let base = e.null_model().as_ising().unwrap().sample(3, 4).unwrap();
        let lr = log_lr_ising_clique(&e, &base).unwrap().value;
        // Flip every coordinate outside the clipped pairs {1,2} and {6,7}.
        let mut flipped = Vec::new();
        for row in base.spin_rows().unwrap() {
            for (idx, &s) in row.iter().enumerate() {
                let keep = matches!(idx, 0 | 1 | 5 | 6);
                flipped.push(if keep { s } else { -s });
            }
        }
        let xs = spin_set(3, 10, flipped);
        assert_eq!(log_lr_ising_clique(&e, &xs).unwrap().value, lr);
    }

    #[test]
    fn clique_kind_mismatch_rejected() {
        let e = ising_single_edge_ensemble(3, 0.5).unwrap();
        let xs = spin_set(1, 3, vec![1, 1, 1]);
        assert!(matches!(
            log_lr_ising_clique(&e, &xs),
            Err(Error::KindMismatch { .. })
        ));
    }

    #[test]
    fn gaussian_closed_form_matches_generic() {
        for (p, n, lambda, seed) in [(3, 4, 0.2, 31u64), (4, 3, 0.35, 32), (5, 2, 0.1, 33)] {
            let e = gaussian_single_edge_ensemble(p, lambda).unwrap();
            let xs = e.null_model().as_gaussian().unwrap().sample(n, seed).unwrap();
            let generic = log_lr_generic(&e, &xs).unwrap().value;
            let closed = log_lr_gaussian_single_edge(p, lambda, &xs).unwrap().value;
            assert!((generic - closed).abs() < 1e-10, "p={p} n={n}");
        }
    }

    #[test]
    fn gaussian_closed_form_values() {
        let xs = SampleSet::from_reals(1, 2, vec![1.0, 1.0], prov()).unwrap();
        let lr = log_lr_gaussian_single_edge(2, 0.2, &xs).unwrap().value;
        assert!((lr - (0.5 * 0.96f64.ln() - 0.2)).abs() < 1e-12);

        let lr = log_lr_gaussian_single_edge(2, 0.0, &xs).unwrap().value;
        assert_eq!(lr, 0.0);

        assert!(log_lr_gaussian_single_edge(2, 1.0, &xs).is_err());
    }

    #[test]
    fn null_expectation_is_one_by_enumeration() {
        // sum over all n-sample spin datasets of P(dataset) L(dataset) = 1.
        for e in [
            ising_single_edge_ensemble(3, 0.8).unwrap(),
            ising_clique_ensemble(3, 2, 1.0).unwrap(),
        ] {
            let p = e.p();
            let n = 2usize;
            let null = e.null_model().as_ising().unwrap();
            let mut total = 0.0;
            for joint in 0..1usize << (p * n) {
                let mut data = Vec::with_capacity(n * p);
                for t in 0..n {
                    let bits = joint >> (t * p) & ((1 << p) - 1);
                    for k in 0..p {
                        data.push(if bits >> k & 1 == 1 { 1 } else { -1 });
                    }
                }
                let xs = spin_set(n, p, data);
                let mut log_p = 0.0;
                for row in xs.spin_rows().unwrap() {
                    log_p += null.energy(row).unwrap();
                }
                log_p -= n as f64 * null.log_partition().unwrap();
                let lr = log_lr_generic(&e, &xs).unwrap().value;
                total += (log_p + lr).exp();
            }
            assert!((total - 1.0).abs() < 1e-10, "{}: {total}", e.describe());
        }
    }

    #[test]
    fn null_expectation_is_one_by_monte_carlo_gaussian() {
        use crate::numeric::mean_and_se;
        let e = gaussian_single_edge_ensemble(4, 0.25).unwrap();
        let null = e.null_model().as_gaussian().unwrap();
        let w: Vec<f64> = (0..40_000)
            .map(|t| {
                let xs = null.sample(3, crate::seeding::derive_seed(77, t)).unwrap();
                log_lr_gaussian_single_edge(4, 0.25, &xs).unwrap().value.exp()
            })
            .collect();
        let (mean, se) = mean_and_se(&w);
        assert!((mean - 1.0).abs() < 4.0 * se, "mean = {mean} +- {se}");
    }

    #[test]
    fn np_test_tie_breaks_toward_rejection() {
        assert_eq!(np_test(LogLr::new(0.0), 0.0), 1);
        assert_eq!(np_test(LogLr::new(-1.0), 0.0), 0);
        assert_eq!(np_test(LogLr::new(0.1), 0.0), 1);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            /// Relabeling nodes leaves the single-edge mixtures unchanged:
            /// the alternative family is permutation-closed.
            #[test]
            fn permutation_equivariance_ising(
                seed in 0u64..1000,
                perm_seed in 0u64..1000,
                p in 3usize..6,
                n in 1usize..4,
                lambda in 0.1f64..1.5,
            ) {
                use rand::seq::SliceRandom;
                let e = ising_single_edge_ensemble(p, lambda).unwrap();
                let xs = e.null_model().as_ising().unwrap().sample(n, seed).unwrap();
                let mut perm: Vec<usize> = (0..p).collect();
                perm.shuffle(&mut crate::seeding::rng_from(perm_seed));
                let mut permuted = Vec::with_capacity(n * p);
                for row in xs.spin_rows().unwrap() {
                    for k in 0..p {
                        permuted.push(row[perm[k]]);
                    }
                }
                let ys = SampleSet::from_spins(n, p, permuted, prov()).unwrap();
                let a = log_lr_generic(&e, &xs).unwrap().value;
                let b = log_lr_generic(&e, &ys).unwrap().value;
                prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }

            #[test]
            fn permutation_equivariance_gaussian(
                seed in 0u64..1000,
                perm_seed in 0u64..1000,
                p in 3usize..6,
                n in 1usize..4,
                lambda in 0.05f64..0.45,
            ) {
                use rand::seq::SliceRandom;
                let e = gaussian_single_edge_ensemble(p, lambda).unwrap();
                let xs = e.null_model().as_gaussian().unwrap().sample(n, seed).unwrap();
                let mut perm: Vec<usize> = (0..p).collect();
                perm.shuffle(&mut crate::seeding::rng_from(perm_seed));
                let mut permuted = Vec::with_capacity(n * p);
                for row in xs.real_rows().unwrap() {
                    for k in 0..p {
                        permuted.push(row[perm[k]]);
                    }
                }
                let ys = SampleSet::from_reals(n, p, permuted, prov()).unwrap();
                let a = log_lr_generic(&e, &xs).unwrap().value;
                let b = log_lr_generic(&e, &ys).unwrap().value;
                prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
    }
}
