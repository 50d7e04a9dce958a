//! Two-sample structural change detection in Markov random fields: ensembles,
//! likelihood-ratio tests, and minimax risk lower bounds.
//!
//! The library is organised around the question "how many samples does any
//! detector need before it can tell that the dependency graph of a Markov
//! random field has changed?" It provides:
//!
//! - exact Ising and Gaussian MRF models with enumeration-based evaluation
//!   and deterministic samplers ([`ising`], [`gaussian`]),
//! - the change-detection ensembles used to prove sample-complexity lower
//!   bounds ([`ensemble`]),
//! - mixture likelihood ratios and the Neyman-Pearson test ([`likelihood`]),
//! - closed-form second moments E[L_n^2], total-variation oracles, and the
//!   theorem-level sample thresholds ([`lecam`]),
//! - Monte Carlo estimation of the optimal average test risk ([`risk`]),
//! - named verification suites that cross-check every closed form against an
//!   independent oracle ([`verify`]).
//!
//! All probability arithmetic is carried out in natural-log space with
//! log-sum-exp reductions, and every randomised routine takes an explicit
//! seed so results are bit-reproducible regardless of thread count.

pub mod ensemble;
pub mod error;
pub mod gaussian;
pub mod ising;
pub mod lecam;
pub mod likelihood;
pub mod numeric;
pub mod report;
pub mod risk;
pub mod sample;
pub mod seeding;
pub mod verify;

pub use ensemble::{ChangeEnsemble, EnsembleKind, EnsembleParams, Model};
pub use error::{Error, Result};
pub use gaussian::GaussianModel;
pub use ising::IsingModel;
pub use lecam::{DetectionMode, ThresholdKind};
pub use likelihood::LogLr;
pub use report::{BoundReport, RiskReport};
pub use sample::{SampleSet, SpinConfig};
