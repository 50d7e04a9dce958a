//! One flat experiment configuration shared by every subcommand. Flags fill
//! the same structure a JSON config file does; explicit flags win over file
//! fields.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n_list: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub suite: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub input: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub out: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub format: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub threads: Option<usize>,
}

macro_rules! take_first {
    ($hi:expr, $lo:expr, $($field:ident),+ $(,)?) => {
        ExperimentConfig {
            $($field: $hi.$field.or($lo.$field),)+
        }
    };
}

impl ExperimentConfig {
    /// Overlay `self` (flags) on `base` (config file); set fields of `self`
    /// win.
    pub fn merge_over(self, base: ExperimentConfig) -> ExperimentConfig {
        take_first!(
            self, base, command, kind, p, d, alpha, beta, gamma, lambda, delta, mode, n, n_list,
            trials, seed, suite, input, out, format, threads
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_config() {
        let cfg = ExperimentConfig {
            command: Some("simulate".into()),
            kind: Some("ising-clique".into()),
            p: Some(10),
            d: Some(4),
            beta: Some(0.9),
            n: Some(20),
            trials: Some(1000),
            seed: Some(42),
            out: Some("r.csv".into()),
            ..Default::default()
        };
        let json = serde_json::to_string(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn flags_override_file_fields() {
        let file = ExperimentConfig {
            command: Some("simulate".into()),
            p: Some(5),
            seed: Some(1),
            trials: Some(100),
            ..Default::default()
        };
        let flags = ExperimentConfig {
            seed: Some(9),
            ..Default::default()
        };
        let merged = flags.merge_over(file);
        assert_eq!(merged.seed, Some(9));
        assert_eq!(merged.p, Some(5));
        assert_eq!(merged.trials, Some(100));
    }
}
