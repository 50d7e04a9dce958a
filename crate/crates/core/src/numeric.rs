//! Log-space reductions and small combinatorial helpers.

/// log(sum_i exp(v_i)) with max-subtraction.
///
/// Empty input and all-(-inf) input both return -inf.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Streaming variant for cases where materialising the term vector is wasteful:
/// two passes over an indexed term function.
pub fn log_sum_exp_fn(count: usize, term: impl Fn(usize) -> f64) -> f64 {
    let mut m = f64::NEG_INFINITY;
    for k in 0..count {
        m = m.max(term(k));
    }
    if !m.is_finite() {
        return m;
    }
    let mut s = 0.0;
    for k in 0..count {
        s += (term(k) - m).exp();
    }
    m + s.ln()
}

/// Binomial coefficient as f64, exact through u128 arithmetic.
///
/// Panics for n > 128; nothing in this crate enumerates that far.
pub fn binomial(n: usize, k: usize) -> f64 {
    assert!(n <= 128, "binomial({n},{k}) out of supported range");
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as f64
}

/// ln C(n, k); -inf when k > n.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    binomial(n, k).ln()
}

/// Number of unordered pairs C(n, 2) as f64.
pub fn pairs(n: usize) -> f64 {
    (n * n.saturating_sub(1) / 2) as f64
}

/// Compensated (Kahan) summation; used by the exact oracles where plain
/// accumulation over 2^18 terms would eat into the 1e-10 agreement budget.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Mean and standard error of a sample (ddof = 1).
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mut m = KahanSum::default();
    for &v in values {
        m.add(v);
    }
    let mean = m.value() / n as f64;
    if n == 1 {
        return (mean, f64::NAN);
    }
    let mut sq = KahanSum::default();
    for &v in values {
        sq.add((v - mean) * (v - mean));
    }
    let var = sq.value() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}
