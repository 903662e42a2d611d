//! Small numerical helpers shared by the exact routines.

/// Neumaier's compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<CompensatedSum>().value()
}

/// Table of `ln k!` for `k = 0..=max`.
#[derive(Debug, Clone)]
pub struct LnFactorial {
    table: Vec<f64>,
}

impl LnFactorial {
    pub fn new(max: usize) -> Self {
        let mut table = Vec::with_capacity(max + 1);
        let mut acc = CompensatedSum::new();
        table.push(0.0);
        for k in 1..=max {
            acc.add((k as f64).ln());
            table.push(acc.value());
        }
        Self { table }
    }

    /// `ln k!`; panics if `k` exceeds the table size.
    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        self.table[k]
    }

    /// `ln C(n, k)`, or `-inf` when `k > n`.
    pub fn ln_binomial(&self, n: usize, k: usize) -> f64 {
        if k > n {
            f64::NEG_INFINITY
        } else {
            self.table[n] - self.table[k] - self.table[n - k]
        }
    }
}

/// `exponent * ln(base)` with the convention `0^0 = 1`.
#[inline]
pub fn ln_pow(base: f64, exponent: usize) -> f64 {
    if exponent == 0 {
        0.0
    } else if base == 0.0 {
        f64::NEG_INFINITY
    } else {
        exponent as f64 * base.ln()
    }
}

/// `ln Σ exp(v)`; `-inf` for an empty or all-`-inf` input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s = compensated_sum(values.iter().map(|v| (v - max).exp()));
    max + s.ln()
}

/// Weighted ratio `Σ w_i exp(l_i) / Σ exp(l_i)` evaluated with a shared
/// max-log shift, together with `ln Σ exp(l_i)`.
///
/// Returns `None` when every log-weight is `-inf`.
pub fn weighted_log_ratio(terms: &[(f64, f64)]) -> Option<(f64, f64)> {
    let max = terms
        .iter()
        .map(|&(l, _)| l)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return None;
    }
    let mut num = CompensatedSum::new();
    let mut den = CompensatedSum::new();
    for &(l, w) in terms {
        let e = (l - max).exp();
        num.add(w * e);
        den.add(e);
    }
    Some((num.value() / den.value(), max + den.value().ln()))
}

/// Exact binomial coefficient in integer arithmetic; `0` when `k > n`.
pub fn binomial_u128(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc
}
