//! Serializable experiment outputs: theoretical bound evaluations and
//! empirical risk reports, as JSON objects and fixed-schema CSV rows.
//!
//! CSV reals are printed with 17 significant digits so a parse recovers the
//! exact f64; `inf` round-trips through the standard float parser.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An extended real that serializes infinities as strings in JSON
/// (serde_json would otherwise flatten them to null).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtReal(pub f64);

impl Serialize for ExtReal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(ExtReal(v)),
            Raw::Str(s) => s
                .parse::<f64>()
                .map(ExtReal)
                .map_err(|_| serde::de::Error::custom("not an extended real")),
        }
    }
}

fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn fmt_opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

fn parse_f64(tok: &str, field: &str) -> Result<f64> {
    tok.parse()
        .map_err(|_| Error::InvalidParameter(format!("bad {field} field: {tok:?}")))
}

fn parse_usize(tok: &str, field: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| Error::InvalidParameter(format!("bad {field} field: {tok:?}")))
}

fn parse_opt<T: std::str::FromStr>(tok: &str, field: &str) -> Result<Option<T>> {
    if tok.is_empty() {
        return Ok(None);
    }
    tok.parse()
        .map(Some)
        .map_err(|_| Error::InvalidParameter(format!("bad {field} field: {tok:?}")))
}

fn split_row<'a>(line: &'a str, expected: usize, what: &str) -> Result<Vec<&'a str>> {
    let toks: Vec<&str> = line.split(',').collect();
    if toks.len() != expected {
        return Err(Error::InvalidParameter(format!(
            "{what} row has {} fields, expected {expected}",
            toks.len()
        )));
    }
    Ok(toks)
}

/// Evaluation of a theorem-level sample threshold plus the chi-square /
/// risk-bound chain at a concrete n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: String,
    pub p: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gamma: Option<f64>,
    pub delta: f64,
    pub mode: String,
    /// Sample size the chi2 / risk bound line is evaluated at.
    pub n: usize,
    pub chi2: f64,
    /// Le Cam risk lower bound, floored at zero.
    pub risk_lower_bound: f64,
    /// The same quantity before flooring.
    pub risk_lower_bound_raw: f64,
    /// Theorem threshold on min(n1, n2); infinite when the rate vanishes.
    pub n_threshold: ExtReal,
}

impl BoundReport {
    pub const CSV_HEADER: &'static str =
        "kind,p,d,alpha,beta,gamma,delta,mode,n,chi2,risk_lower_bound,risk_lower_bound_raw,n_threshold";

    pub fn to_csv_row(&self) -> String {
        [
            self.kind.clone(),
            self.p.to_string(),
            fmt_opt(&self.d),
            fmt_opt(&self.alpha.map(fmt_f64)),
            fmt_opt(&self.beta.map(fmt_f64)),
            fmt_opt(&self.gamma.map(fmt_f64)),
            fmt_f64(self.delta),
            self.mode.clone(),
            self.n.to_string(),
            fmt_f64(self.chi2),
            fmt_f64(self.risk_lower_bound),
            fmt_f64(self.risk_lower_bound_raw),
            fmt_f64(self.n_threshold.0),
        ]
        .join(",")
    }

    pub fn from_csv_row(line: &str) -> Result<Self> {
        let t = split_row(line, 13, "bound")?;
        Ok(BoundReport {
            kind: t[0].to_string(),
            p: parse_usize(t[1], "p")?,
            d: parse_opt(t[2], "d")?,
            alpha: parse_opt(t[3], "alpha")?,
            beta: parse_opt(t[4], "beta")?,
            gamma: parse_opt(t[5], "gamma")?,
            delta: parse_f64(t[6], "delta")?,
            mode: t[7].to_string(),
            n: parse_usize(t[8], "n")?,
            chi2: parse_f64(t[9], "chi2")?,
            risk_lower_bound: parse_f64(t[10], "risk_lower_bound")?,
            risk_lower_bound_raw: parse_f64(t[11], "risk_lower_bound_raw")?,
            n_threshold: ExtReal(parse_f64(t[12], "n_threshold")?),
        })
    }

    pub fn to_csv(reports: &[BoundReport]) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in reports {
            out.push_str(&r.to_csv_row());
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Vec<Self>> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h == Self::CSV_HEADER => {}
            _ => return Err(Error::InvalidParameter("missing bound CSV header".into())),
        }
        lines.map(Self::from_csv_row).collect()
    }
}

/// One point of the swept threshold curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub log_tau: ExtReal,
    pub type_i: f64,
    pub type_ii: f64,
}

/// Empirical optimal average risk of the threshold test on an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub kind: String,
    pub p: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub d: Option<usize>,
    pub lambda: f64,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// min over swept thresholds of (empirical type I + type II).
    pub empirical_optimal_risk: f64,
    pub mc_std_error: f64,
    pub theoretical_lower_bound: f64,
    pub log_tau_opt: ExtReal,
    /// Full swept curve; omitted from the CSV row form.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub curve: Vec<CurvePoint>,
    /// The optimum is selected on the same trials that score it, which
    /// biases it downward by roughly sqrt(log(trials)/trials).
    pub sweep_bias_note: String,
}

pub const SWEEP_BIAS_NOTE: &str =
    "threshold swept on the scoring trials; optimum biased downward by O(sqrt(log(trials)/trials))";

impl RiskReport {
    pub const CSV_HEADER: &'static str =
        "kind,p,d,lambda,n,trials,seed,risk,se,lower_bound,log_tau_opt";

    pub fn to_csv_row(&self) -> String {
        [
            self.kind.clone(),
            self.p.to_string(),
            fmt_opt(&self.d),
            fmt_f64(self.lambda),
            self.n.to_string(),
            self.trials.to_string(),
            self.seed.to_string(),
            fmt_f64(self.empirical_optimal_risk),
            fmt_f64(self.mc_std_error),
            fmt_f64(self.theoretical_lower_bound),
            fmt_f64(self.log_tau_opt.0),
        ]
        .join(",")
    }

    pub fn from_csv_row(line: &str) -> Result<Self> {
        let t = split_row(line, 11, "risk")?;
        Ok(RiskReport {
            kind: t[0].to_string(),
            p: parse_usize(t[1], "p")?,
            d: parse_opt(t[2], "d")?,
            lambda: parse_f64(t[3], "lambda")?,
            n: parse_usize(t[4], "n")?,
            trials: parse_usize(t[5], "trials")?,
            seed: t[6]
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad seed field: {:?}", t[6])))?,
            empirical_optimal_risk: parse_f64(t[7], "risk")?,
            mc_std_error: parse_f64(t[8], "se")?,
            theoretical_lower_bound: parse_f64(t[9], "lower_bound")?,
            log_tau_opt: ExtReal(parse_f64(t[10], "log_tau_opt")?),
            curve: Vec::new(),
            sweep_bias_note: SWEEP_BIAS_NOTE.to_string(),
        })
    }

    pub fn to_csv(reports: &[RiskReport]) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in reports {
            out.push_str(&r.to_csv_row());
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Vec<Self>> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h == Self::CSV_HEADER => {}
            _ => return Err(Error::InvalidParameter("missing risk CSV header".into())),
        }
        lines.map(Self::from_csv_row).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_bound() -> BoundReport {
        BoundReport {
            kind: "ising-easy".into(),
            p: 10,
            d: None,
            alpha: Some(0.5),
            beta: None,
            gamma: None,
            delta: 0.5,
            mode: "change-detection".into(),
            n: 20,
            chi2: 1.25,
            risk_lower_bound: 0.75,
            risk_lower_bound_raw: 0.75,
            n_threshold: ExtReal(19.780963384418622),
        }
    }

    #[test]
    fn bound_csv_round_trip_is_lossless() {
        let r = sample_bound();
        let row = r.to_csv_row();
        let back = BoundReport::from_csv_row(&row).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_csv_row(), row);
    }

    #[test]
    fn bound_csv_handles_infinity() {
        let mut r = sample_bound();
        r.n_threshold = ExtReal(f64::INFINITY);
        let back = BoundReport::from_csv_row(&r.to_csv_row()).unwrap();
        assert_eq!(back.n_threshold.0, f64::INFINITY);
    }

    #[test]
    fn ext_real_json() {
        assert_eq!(serde_json::to_string(&ExtReal(2.5)).unwrap(), "2.5");
        assert_eq!(
            serde_json::to_string(&ExtReal(f64::INFINITY)).unwrap(),
            "\"inf\""
        );
        let v: ExtReal = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(v.0, f64::INFINITY);
        let v: ExtReal = serde_json::from_str("3.25").unwrap();
        assert_eq!(v.0, 3.25);
    }

    #[test]
    fn risk_csv_round_trip_is_lossless() {
        let r = RiskReport {
            kind: "ising-single-edge".into(),
            p: 4,
            d: None,
            lambda: 1.0 / 3.0,
            n: 7,
            trials: 1000,
            seed: 42,
            empirical_optimal_risk: 0.123456789012345678,
            mc_std_error: 0.01,
            theoretical_lower_bound: 0.1,
            log_tau_opt: ExtReal(-2.75),
            curve: Vec::new(),
            sweep_bias_note: SWEEP_BIAS_NOTE.to_string(),
        };
        let row = r.to_csv_row();
        let back = RiskReport::from_csv_row(&row).unwrap();
        assert_eq!(back.to_csv_row(), row);
        assert_eq!(back.lambda, r.lambda);
    }

    #[test]
    fn malformed_rows_are_rejected() {
        assert!(RiskReport::from_csv_row("a,b").is_err());
        assert!(BoundReport::from_csv("no-header\n").is_err());
    }
}
