//! Second moments of the mixture likelihood ratio, the risk lower bound they
//! imply, the clique-lifting transform, and the theorem-level sample
//! thresholds — together with exact-enumeration and Monte Carlo oracles for
//! every closed form.
//!
//! The chain: a detector with risk <= delta forces
//! E[L_n^2] >= 1 + 4 (1 - delta)^2, and 1 - TV(P^n, mixture) lower-bounds the
//! optimal average risk by risk >= 1 - (1/2) sqrt(E[L_n^2] - 1). The closed
//! forms below evaluate E[L_n^2] (or an upper bound on it) for each ensemble;
//! inverting them in n yields the thresholds.

use rayon::prelude::*;

use crate::ensemble::{ChangeEnsemble, Model};
use crate::error::{Error, Result};
use crate::ising::{lemma2_bound, lemma2_exact_v};
use crate::likelihood::log_lr;
use crate::numeric::{log_sum_exp, mean_and_se, pairs, KahanSum};
use crate::report::{BoundReport, ExtReal};
use crate::sample::SampleSet;
use crate::seeding::{derive_seed, rng_from};

/// Exact E[L_n^2] for the single-edge Ising ensemble:
/// 1 + ((1 + tanh^2 lambda)^n - 1) / C(p, 2).
pub fn chi2_ising_single_edge(n: usize, p: usize, lambda: f64) -> Result<f64> {
    if p < 2 {
        return Err(Error::InvalidParameter("needs p >= 2".into()));
    }
    let t = lambda.tanh();
    Ok(1.0 + ((1.0 + t * t).powi(n as i32) - 1.0) / pairs(p))
}

fn gaussian_chi2_guard(p: usize, lambda: f64) -> Result<()> {
    if p < 2 {
        return Err(Error::InvalidParameter("needs p >= 2".into()));
    }
    if lambda.abs() >= 0.5 {
        return Err(Error::InvalidParameter(
            "gaussian chi2 needs |lambda| < 1/2".into(),
        ));
    }
    Ok(())
}

/// Upper bound on E[L_n^2] for the Gaussian single-edge ensemble:
/// ((2p - 3) a^n + C(p-2, 2)) / C(p, 2) with a = (1 - lambda^2) / sqrt(1 - 4 lambda^2).
pub fn chi2_gaussian_single_edge_bound(n: usize, p: usize, lambda: f64) -> Result<f64> {
    gaussian_chi2_guard(p, lambda)?;
    let l2 = lambda * lambda;
    let a = (1.0 - l2) / (1.0 - 4.0 * l2).sqrt();
    Ok(((2.0 * p as f64 - 3.0) * a.powi(n as i32) + pairs(p.saturating_sub(2))) / pairs(p))
}

/// Exact three-term E[L_n^2] for the Gaussian single-edge ensemble, from the
/// pair-overlap counting: identical pairs contribute a^n, pairs sharing one
/// node ((1 - lambda^2)/sqrt(1 - 2 lambda^2))^n, disjoint pairs 1.
pub fn chi2_gaussian_single_edge_exact(n: usize, p: usize, lambda: f64) -> Result<f64> {
    gaussian_chi2_guard(p, lambda)?;
    let l2 = lambda * lambda;
    let a = (1.0 - l2) / (1.0 - 4.0 * l2).sqrt();
    let b = (1.0 - l2) / (1.0 - 2.0 * l2).sqrt();
    let cp2 = pairs(p);
    let an = a.powi(n as i32);
    let bn = b.powi(n as i32);
    Ok(
        (cp2 * pairs(p.saturating_sub(2)) + 2.0 * cp2 * (p as f64 - 2.0) * bn + cp2 * an)
            / (cp2 * cp2),
    )
}

/// Lift a (d+1)-node second moment h to the p-node replicated ensemble:
/// 1 + (h - 1) / floor(p / (d+1)).
pub fn chi2_lift(h: f64, p: usize, d: usize) -> Result<f64> {
    if h < 1.0 {
        return Err(Error::InvalidParameter("lift needs h >= 1".into()));
    }
    if p < d + 1 {
        return Err(Error::InvalidParameter("lift needs p >= d + 1".into()));
    }
    let r = (p / (d + 1)) as f64;
    Ok(1.0 + (h - 1.0) / r)
}

/// Upper bound V(d, lambda)^n on the clique-pair second moment, gated like
/// the closed-form V bound.
pub fn chi2_ising_clique_bound(n: usize, d: usize, lambda: f64) -> Result<f64> {
    Ok(lemma2_bound(d, lambda)?.powi(n as i32))
}

/// Exact companion V(d, lambda)^n with V by enumeration; the single-clique
/// second moment factorises exactly across samples.
pub fn chi2_ising_clique_exact(n: usize, d: usize, lambda: f64) -> Result<f64> {
    Ok(lemma2_exact_v(d, lambda)?.powi(n as i32))
}

/// Le Cam: optimal average risk >= 1 - (1/2) sqrt(chi2 - 1). Returns the raw
/// value (possibly negative); reports floor it at zero.
pub fn risk_lower_bound(chi2: f64) -> Result<f64> {
    if chi2 < 1.0 - 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "second moment below one: {chi2}"
        )));
    }
    Ok(1.0 - 0.5 * (chi2 - 1.0).max(0.0).sqrt())
}

/// Which theorem's threshold to evaluate, with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdKind {
    /// Single-edge Ising ensemble at weight alpha.
    IsingEasy { p: usize, alpha: f64 },
    /// Lifted clique Ising ensemble at weight beta.
    IsingClique { p: usize, d: usize, beta: f64 },
    /// Single-edge Gaussian ensemble at normalized weight gamma.
    Gaussian { p: usize, gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionMode {
    ChangeDetection,
    /// Same bound read as a structure-learning bound: evaluate at 2 delta.
    StructureLearning,
}

impl DetectionMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DetectionMode::ChangeDetection => "change-detection",
            DetectionMode::StructureLearning => "structure-learning",
        }
    }
}

/// Theorem threshold on min(n1, n2) below which no detector reaches risk
/// delta. Returns +inf when the rate term vanishes (alpha = 0 or gamma = 0).
pub fn sample_threshold(kind: &ThresholdKind, delta: f64, mode: DetectionMode) -> Result<f64> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in [0, 1], got {delta}"
        )));
    }
    let delta = match mode {
        DetectionMode::ChangeDetection => delta,
        DetectionMode::StructureLearning => {
            if 2.0 * delta > 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "structure-learning mode needs 2 delta <= 1, got delta = {delta}"
                )));
            }
            2.0 * delta
        }
    };
    let gap = 1.0 - delta;
    match *kind {
        ThresholdKind::IsingEasy { p, alpha } => {
            if p < 2 {
                return Err(Error::InvalidParameter("needs p >= 2".into()));
            }
            if alpha < 0.0 {
                return Err(Error::InvalidParameter("alpha must be >= 0".into()));
            }
            if alpha == 0.0 {
                return Ok(f64::INFINITY);
            }
            let t = alpha.tanh();
            Ok((1.0 + 4.0 * gap * gap * pairs(p)).ln() / (1.0 + t * t).ln())
        }
        ThresholdKind::IsingClique { p, d, beta } => {
            // Same applicability gate as the V bound it inverts.
            lemma2_bound(d, beta)?;
            if p < d + 1 {
                return Err(Error::InvalidParameter("needs p >= d + 1".into()));
            }
            let r = (p / (d + 1)) as f64;
            let df = d as f64;
            Ok((2.0 * beta * df).exp() * (1.0 + 4.0 * gap * gap * r).ln()
                / (8.0 * ((4.0 * beta).exp() + df)))
        }
        ThresholdKind::Gaussian { p, gamma } => {
            if gamma < 0.0 {
                return Err(Error::InvalidParameter("gamma must be >= 0".into()));
            }
            if gamma > 0.39 {
                return Err(Error::BoundNotApplicable(
                    "gaussian threshold proven for gamma <= 0.39".into(),
                ));
            }
            if gamma == 0.0 {
                return Ok(f64::INFINITY);
            }
            Ok((1.0 + gap * gap * p as f64).ln() / (2.0 * gamma * gamma))
        }
    }
}

/// Assemble the full bound chain into a report. When `n` is not supplied the
/// chi-square line is evaluated at ceil(threshold) (or 0 when the threshold
/// is infinite).
pub fn evaluate_bound(
    kind: &ThresholdKind,
    delta: f64,
    mode: DetectionMode,
    n: Option<usize>,
) -> Result<BoundReport> {
    let threshold = sample_threshold(kind, delta, mode)?;
    let n = n.unwrap_or(if threshold.is_finite() {
        threshold.ceil() as usize
    } else {
        0
    });
    let (kind_str, p, d, alpha, beta, gamma, chi2) = match *kind {
        ThresholdKind::IsingEasy { p, alpha } => (
            "ising-easy",
            p,
            None,
            Some(alpha),
            None,
            None,
            chi2_ising_single_edge(n, p, alpha)?,
        ),
        ThresholdKind::IsingClique { p, d, beta } => (
            "ising-clique",
            p,
            Some(d),
            None,
            Some(beta),
            None,
            chi2_lift(chi2_ising_clique_bound(n, d, beta)?, p, d)?,
        ),
        ThresholdKind::Gaussian { p, gamma } => (
            "gaussian",
            p,
            None,
            None,
            None,
            Some(gamma),
            chi2_gaussian_single_edge_bound(n, p, gamma)?,
        ),
    };
    let raw = risk_lower_bound(chi2)?;
    Ok(BoundReport {
        kind: kind_str.to_string(),
        p,
        d,
        alpha,
        beta,
        gamma,
        delta,
        mode: mode.as_str().to_string(),
        n,
        chi2,
        risk_lower_bound: raw.max(0.0),
        risk_lower_bound_raw: raw,
        n_threshold: ExtReal(threshold),
    })
}

/// Largest p*n for the joint-outcome enumerations below.
pub const JOINT_ENUM_CAP: usize = 18;

/// Per-state log probabilities of the null and every alternative of an
/// Ising ensemble; shared by the exact oracles.
struct StateTables {
    p: usize,
    log_null: Vec<f64>,
    log_alts: Vec<Vec<f64>>,
}

fn state_tables(e: &ChangeEnsemble) -> Result<StateTables> {
    let null = match e.null_model() {
        Model::Ising(m) => m,
        Model::Gaussian(_) => return Err(Error::UnsupportedKind("gaussian")),
    };
    let p = e.p();
    let states = 1usize << p;
    let table = |m: &crate::ising::IsingModel| -> Result<Vec<f64>> {
        let log_z = m.log_partition()?;
        (0..states)
            .map(|bits| {
                let x = crate::sample::SpinConfig::from_bits(bits, p);
                Ok(m.energy(x.spins())? - log_z)
            })
            .collect()
    };
    Ok(StateTables {
        p,
        log_null: table(null)?,
        log_alts: e
            .alternatives()
            .iter()
            .map(|a| table(a.as_ising()?))
            .collect::<Result<_>>()?,
    })
}

fn joint_enumeration<F: FnMut(f64, f64)>(t: &StateTables, n: usize, mut visit: F) -> Result<()> {
    let bits = t.p * n;
    if bits > JOINT_ENUM_CAP {
        return Err(Error::JointEnumerationCap {
            bits,
            cap: JOINT_ENUM_CAP,
        });
    }
    let mask = (1usize << t.p) - 1;
    let k = t.log_alts.len();
    let ln_k = (k as f64).ln();
    let mut alt_acc = vec![0.0f64; k];
    for joint in 0..1usize << bits {
        let mut log_p = 0.0;
        alt_acc.fill(0.0);
        for sample in 0..n {
            let state = joint >> (sample * t.p) & mask;
            log_p += t.log_null[state];
            for (j, alt) in t.log_alts.iter().enumerate() {
                alt_acc[j] += alt[state];
            }
        }
        let log_mix = log_sum_exp(&alt_acc) - ln_k;
        visit(log_p, log_mix);
    }
    Ok(())
}

/// Exact E[L_n^2] by summation over every joint n-sample outcome.
/// Ising kinds only; requires p * n <= 18.
pub fn chi2_exact(e: &ChangeEnsemble, n: usize) -> Result<f64> {
    if n == 0 {
        return Ok(1.0);
    }
    let tables = state_tables(e)?;
    let mut acc = KahanSum::default();
    joint_enumeration(&tables, n, |log_p, log_mix| {
        acc.add((2.0 * log_mix - log_p).exp());
    })?;
    Ok(acc.value())
}

/// Exact total variation distance between the n-fold null and the uniform
/// mixture of n-fold alternatives. Same enumeration domain as [`chi2_exact`].
pub fn tv_exact(e: &ChangeEnsemble, n: usize) -> Result<f64> {
    if n == 0 {
        return Ok(0.0);
    }
    let tables = state_tables(e)?;
    let mut acc = KahanSum::default();
    joint_enumeration(&tables, n, |log_p, log_mix| {
        acc.add((log_mix.exp() - log_p.exp()).abs());
    })?;
    Ok(0.5 * acc.value())
}

/// Monte Carlo estimate of E[L_n^2] under the null: mean and standard error
/// of exp(2 log L) over `trials` independent datasets. Trials derive their
/// seeds from (seed, trial index), so the estimate does not depend on the
/// number of worker threads.
pub fn chi2_monte_carlo(
    e: &ChangeEnsemble,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if trials < 2 {
        return Err(Error::InvalidParameter("needs at least 2 trials".into()));
    }
    let weights: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<f64> {
            let xs = sample_model(e.null_model(), n, derive_seed(seed, t as u64))?;
            Ok((2.0 * log_lr(e, &xs)?.value).exp())
        })
        .collect::<Result<_>>()?;
    Ok(mean_and_se(&weights))
}

pub(crate) fn sample_model(m: &Model, n: usize, seed: u64) -> Result<SampleSet> {
    match m {
        Model::Ising(m) => m.sample(n, seed),
        Model::Gaussian(m) => m.sample(n, seed),
    }
}

/// Draw one alternative index and a sampling seed for it; used by the risk
/// simulator's H1 arm.
pub(crate) fn pick_alternative(e: &ChangeEnsemble, trial_seed: u64) -> (usize, u64) {
    use rand::Rng as _;
    let mut rng = rng_from(trial_seed);
    let k = rng.random_range(0..e.alternatives().len());
    (k, rng.random::<u64>())
}
