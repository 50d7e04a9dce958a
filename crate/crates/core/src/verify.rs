//! Named verification suites: each one pits a closed form against an
//! independent route (enumeration, a generic determinant, a direct grid
//! scan) over a fixed parameter grid. The CLI exposes them via `verify`;
//! the test suites call them too, so the names double as a coverage index.

use nalgebra::DMatrix;

use crate::ensemble::{ising_clique_ensemble, ising_single_edge_ensemble};
use crate::error::{Error, Result};
use crate::gaussian::pairwise_delta_det;
use crate::ising::{
    clipped_clique_log_partition, clique_log_partition, lemma2_bound, lemma2_exact_v, IsingModel,
};
use crate::lecam::{
    chi2_exact, chi2_gaussian_single_edge_bound, chi2_gaussian_single_edge_exact,
    chi2_ising_single_edge, chi2_lift, risk_lower_bound, tv_exact,
};

/// One named check with its outcome.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Outcome of one suite.
#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

pub const SUITE_NAMES: [&str; 6] = [
    "lemma1-chain",
    "lemma2",
    "appendix-sandwich",
    "det-identities",
    "chi2-oracles",
    "footnote-039",
];

pub fn run_suite(name: &str) -> Result<SuiteOutcome> {
    let checks = match name {
        "lemma1-chain" => lemma1_chain(),
        "lemma2" => lemma2(),
        "appendix-sandwich" => appendix_sandwich(),
        "det-identities" => det_identities(),
        "chi2-oracles" => chi2_oracles(),
        "footnote-039" => footnote_039(),
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown suite {other:?}; expected one of {SUITE_NAMES:?}"
            )))
        }
    }?;
    Ok(SuiteOutcome {
        suite: name.to_string(),
        checks,
    })
}

pub fn run_all() -> Result<Vec<SuiteOutcome>> {
    SUITE_NAMES.iter().map(|n| run_suite(n)).collect()
}

/// 1 - TV(P^n, mixture) >= 1 - (1/2) sqrt(E[L_n^2] - 1) on every enumerable
/// instance of the grid.
fn lemma1_chain() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let single_edge_grid: &[(usize, &[usize])] = &[
        (2, &[1, 3, 6]),
        (3, &[1, 2, 4]),
        (4, &[1, 2, 3]),
        (6, &[1, 2, 3]),
    ];
    for &(p, ns) in single_edge_grid {
        for &n in ns {
            for lambda in [0.5, 1.2] {
                let e = ising_single_edge_ensemble(p, lambda)?;
                let tv = tv_exact(&e, n)?;
                let bound = risk_lower_bound(chi2_exact(&e, n)?)?;
                let ok = 1.0 - tv >= bound - 1e-10;
                checks.push(Check::new(
                    format!("chain single-edge p={p} n={n} lambda={lambda}"),
                    ok,
                    format!("1-tv = {:.12}, bound = {bound:.12}", 1.0 - tv),
                ));
            }
        }
    }
    for (p, d, n) in [(3usize, 2usize, 1usize), (3, 2, 2), (7, 2, 2), (5, 4, 1), (5, 4, 2)] {
        let lambda = 0.8;
        let e = ising_clique_ensemble(p, d, lambda)?;
        let tv = tv_exact(&e, n)?;
        let bound = risk_lower_bound(chi2_exact(&e, n)?)?;
        let ok = 1.0 - tv >= bound - 1e-10;
        checks.push(Check::new(
            format!("chain clique p={p} d={d} n={n}"),
            ok,
            format!("1-tv = {:.12}, bound = {bound:.12}", 1.0 - tv),
        ));
    }
    Ok(checks)
}

/// Exact V stays within [1, closed-form bound] on the gated grid, and V = 1
/// exactly at lambda = 0.
fn lemma2() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for d in 4..=14usize {
        let base = (d as f64).ln() / (d as f64 - 3.0);
        for mult in [1.0, 1.25, 1.5, 2.0] {
            let lambda = base * mult;
            let v = lemma2_exact_v(d, lambda)?;
            let b = lemma2_bound(d, lambda)?;
            checks.push(Check::new(
                format!("V <= bound d={d} lambda={lambda:.4}"),
                v <= b && v >= 1.0 - 1e-12,
                format!("V = {v:.10}, bound = {b:.10}"),
            ));
        }
    }
    for d in [1usize, 4, 9, 14] {
        let v = lemma2_exact_v(d, 0.0)?;
        checks.push(Check::new(
            format!("V(d={d}, 0) = 1"),
            (v - 1.0).abs() < 1e-12,
            format!("V = {v}"),
        ));
    }
    Ok(checks)
}

/// Partition-function checks: series vs enumeration, the two-sided sandwich
/// around the dominant term, and Z' >= e^{-lambda} Z.
fn appendix_sandwich() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for d in 1..=14usize {
        for lambda in [0.1, 0.5, 1.0, 2.0] {
            let full = IsingModel::complete(d + 1, lambda)?;
            let series = clique_log_partition(d, lambda)?;
            let enumerated = full.log_partition()?;
            checks.push(Check::new(
                format!("series Z d={d} lambda={lambda}"),
                (series - enumerated).abs() < 1e-12,
                format!("series = {series:.14}, enum = {enumerated:.14}"),
            ));

            let mut clipped = IsingModel::complete(d + 1, lambda)?;
            clipped.set_edge(1, 2, 0.0)?;
            let series_p = clipped_clique_log_partition(d, lambda)?;
            let enumerated_p = clipped.log_partition()?;
            checks.push(Check::new(
                format!("series Z' d={d} lambda={lambda}"),
                (series_p - enumerated_p).abs() < 1e-12,
                format!("series = {series_p:.14}, enum = {enumerated_p:.14}"),
            ));
        }
    }

    for d in 4..=14usize {
        let gate = ((d + 1) as f64).ln() / (d as f64 - 2.0);
        for mult in [1.0, 1.5, 2.0, 3.0] {
            let lambda = gate * mult;
            let log_z = clique_log_partition(d, lambda)?;
            let k = (d + 1) as f64;
            let log_t0 = 0.5 * lambda * (k * k - k);
            let ratio = (log_z - std::f64::consts::LN_2 - log_t0).exp();
            let ub = 1.0 + 3.0 * d as f64 * (-2.0 * lambda * d as f64).exp();
            checks.push(Check::new(
                format!("sandwich d={d} lambda={lambda:.4}"),
                (1.0 - 1e-12..=ub + 1e-12).contains(&ratio),
                format!("ratio = {ratio:.12}, ub = {ub:.12}"),
            ));
        }
    }

    for d in 1..=14usize {
        let mut worst: f64 = 0.0;
        for k in 0..=30 {
            let lambda = 0.1 * k as f64;
            let log_z = clique_log_partition(d, lambda)?;
            let log_zp = clipped_clique_log_partition(d, lambda)?;
            worst = worst.max(-lambda + log_z - log_zp);
        }
        checks.push(Check::new(
            format!("Z' >= exp(-lambda) Z, d={d}"),
            worst <= 1e-10,
            format!("max violation = {worst:.2e}"),
        ));
    }
    Ok(checks)
}

/// Closed-form two-delta determinants against the generic LU determinant.
fn det_identities() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for p in 4..=8usize {
        for lambda in [0.05, 0.1, 0.2, 0.35] {
            for (label, pair1, pair2) in [
                ("identical", (1usize, 2usize), (1usize, 2usize)),
                ("shared-node", (1, 2), (2, 3)),
                ("disjoint", (1, 2), (3, 4)),
            ] {
                let mut a: DMatrix<f64> = DMatrix::identity(p, p);
                for &(i, j) in [&pair1, &pair2] {
                    a[(i - 1, j - 1)] += lambda;
                    a[(j - 1, i - 1)] += lambda;
                }
                let generic = a.determinant();
                let closed = pairwise_delta_det(p, pair1, pair2, lambda)?;
                checks.push(Check::new(
                    format!("det {label} p={p} lambda={lambda}"),
                    (generic - closed).abs() < 1e-12,
                    format!("generic = {generic:.15}, closed = {closed:.15}"),
                ));
            }
        }
    }
    Ok(checks)
}

/// Exact-enumeration second moments against every closed form, and the
/// Gaussian exact-vs-bound ordering.
fn chi2_oracles() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for p in [2usize, 3, 4] {
        for n in [1usize, 2, 3] {
            for lambda in [0.3, 0.8, 1.5] {
                let e = ising_single_edge_ensemble(p, lambda)?;
                let exact = chi2_exact(&e, n)?;
                let closed = chi2_ising_single_edge(n, p, lambda)?;
                checks.push(Check::new(
                    format!("chi2 single-edge p={p} n={n} lambda={lambda}"),
                    (exact - closed).abs() < 1e-10,
                    format!("exact = {exact:.12}, closed = {closed:.12}"),
                ));
            }
        }
    }

    for (p, n) in [(3usize, 1usize), (3, 2), (6, 1), (7, 1), (6, 2)] {
        for lambda in [0.6, 1.0] {
            let e = ising_clique_ensemble(p, 2, lambda)?;
            let exact = chi2_exact(&e, n)?;
            let lifted = chi2_lift(lemma2_exact_v(2, lambda)?.powi(n as i32), p, 2)?;
            checks.push(Check::new(
                format!("chi2 lifted-clique p={p} n={n} lambda={lambda}"),
                (exact - lifted).abs() < 1e-10,
                format!("exact = {exact:.12}, lifted = {lifted:.12}"),
            ));
        }
    }

    for p in [2usize, 4, 6, 8] {
        for n in [0usize, 1, 3, 6] {
            for lambda in [0.05, 0.2, 0.35, 0.45] {
                let exact = chi2_gaussian_single_edge_exact(n, p, lambda)?;
                let bound = chi2_gaussian_single_edge_bound(n, p, lambda)?;
                checks.push(Check::new(
                    format!("gaussian chi2 order p={p} n={n} lambda={lambda}"),
                    exact <= bound + 1e-12 && exact >= 1.0 - 1e-12,
                    format!("exact = {exact:.12}, bound = {bound:.12}"),
                ));
            }
        }
    }
    Ok(checks)
}

/// ln(1 - lambda^2) - (1/2) ln(1 - 4 lambda^2) <= 2 lambda^2 on
/// lambda in [0, 0.39] step 0.001.
fn footnote_039() -> Result<Vec<Check>> {
    let mut worst = f64::NEG_INFINITY;
    let mut worst_lambda = 0.0;
    for k in 0..=390usize {
        let lambda = k as f64 / 1000.0;
        let l2 = lambda * lambda;
        let lhs = (1.0 - l2).ln() - 0.5 * (1.0 - 4.0 * l2).ln();
        let slack = lhs - 2.0 * l2;
        if slack > worst {
            worst = slack;
            worst_lambda = lambda;
        }
    }
    Ok(vec![Check::new(
        "log-ratio rate dominated by 2 lambda^2 on [0, 0.39]",
        worst <= 1e-15,
        format!("max lhs - rhs = {worst:.3e} at lambda = {worst_lambda}"),
    )])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_passes() {
        for name in SUITE_NAMES {
            let outcome = run_suite(name).unwrap();
            let failures: Vec<_> = outcome.failures().collect();
            assert!(
                outcome.passed(),
                "suite {name} failed: {:?}",
                failures
                    .iter()
                    .map(|c| format!("{}: {}", c.name, c.detail))
                    .collect::<Vec<_>>()
            );
            assert!(!outcome.checks.is_empty());
        }
    }

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(matches!(
            run_suite("nope"),
            Err(Error::InvalidParameter(_))
        ));
    }
}
