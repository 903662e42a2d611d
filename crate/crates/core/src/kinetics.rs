//! The two-state free/adsorbed chain and the occupation-time law.
//!
//! A particle is free (`f`) or adsorbed (`a`) during each unit time step.
//! It leaves the free state with probability `a` and is released with
//! probability `b`. `K_n`, the number of free steps among the first `n`,
//! follows a Markov binomial distribution `f_n(k) = P(K_n = k)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

/// Law of the state during the first step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialDistribution {
    Stationary,
    Free,
    Adsorbed,
    /// Probability of starting free.
    Custom(f64),
}

impl std::str::FromStr for InitialDistribution {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "stationary" => Ok(Self::Stationary),
            "free" => Ok(Self::Free),
            "adsorbed" => Ok(Self::Adsorbed),
            _ => match s.strip_prefix("custom:") {
                Some(v) => v
                    .parse::<f64>()
                    .map(Self::Custom)
                    .map_err(|e| format!("bad custom initial probability `{v}`: {e}")),
                None => Err(format!(
                    "unknown initial distribution `{s}` (expected stationary|free|adsorbed|custom:<pf>)"
                )),
            },
        }
    }
}

impl std::fmt::Display for InitialDistribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Stationary => f.write_str("stationary"),
            Self::Free => f.write_str("free"),
            Self::Adsorbed => f.write_str("adsorbed"),
            Self::Custom(p) => write!(f, "custom:{p}"),
        }
    }
}

/// Parameters of the adsorption chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KineticsParams {
    a: f64,
    b: f64,
    init: InitialDistribution,
}

fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidProbability { name, value })
    }
}

impl KineticsParams {
    pub fn new(a: f64, b: f64, init: InitialDistribution) -> Result<Self> {
        check_probability("a", a)?;
        check_probability("b", b)?;
        if a + b <= 0.0 {
            return Err(Error::DegenerateChain);
        }
        if let InitialDistribution::Custom(pf) = init {
            check_probability("pi_f", pf)?;
        }
        Ok(Self { a, b, init })
    }

    /// Stationary initial distribution.
    pub fn stationary(a: f64, b: f64) -> Result<Self> {
        Self::new(a, b, InitialDistribution::Stationary)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn init(&self) -> InitialDistribution {
        self.init
    }

    /// `(ϱ_f, ϱ_a) = (b/(a+b), a/(a+b))`.
    pub fn stationary_distribution(&self) -> (f64, f64) {
        let s = self.a + self.b;
        (self.b / s, self.a / s)
    }

    /// The resolved initial pair `(π_f, π_a)`.
    pub fn initial(&self) -> (f64, f64) {
        match self.init {
            InitialDistribution::Stationary => self.stationary_distribution(),
            InitialDistribution::Free => (1.0, 0.0),
            InitialDistribution::Adsorbed => (0.0, 1.0),
            InitialDistribution::Custom(pf) => (pf, 1.0 - pf),
        }
    }

    pub fn occupation_pmf(&self, n: usize) -> Result<OccupationPmf> {
        occupation_pmf(self, n)
    }
}

/// Stationary distribution `(ϱ_f, ϱ_a)` for raw transition probabilities.
pub fn stationary(a: f64, b: f64) -> Result<(f64, f64)> {
    check_probability("a", a)?;
    check_probability("b", b)?;
    if a + b <= 0.0 {
        return Err(Error::DegenerateChain);
    }
    Ok((b / (a + b), a / (a + b)))
}

/// `f_n(k) = P(K_n = k)` for `k = 0..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationPmf {
    n: usize,
    probs: Vec<f64>,
}

impl OccupationPmf {
    /// Wraps an explicit probability vector of length `n + 1`.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::ZeroSteps);
        }
        for &p in &probs {
            check_probability("f_n(k)", p)?;
        }
        Ok(Self {
            n: probs.len() - 1,
            probs,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, k: usize) -> f64 {
        self.probs.get(k).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        compensated_sum(self.probs.iter().copied())
    }

    /// `E[K_n] = Σ k f_n(k)`.
    pub fn mean(&self) -> f64 {
        compensated_sum(self.probs.iter().enumerate().map(|(k, p)| k as f64 * p))
    }

    pub fn modes(&self) -> Modes {
        count_modes(&self.probs)
    }
}

/// Computes `f_n` with the second-order recurrence
/// `f_{m}(k) = (1-b) f_{m-1}(k) + (1-a) f_{m-1}(k-1) - (1-a-b) f_{m-2}(k-1)`
/// for `k >= 1`, and `f_m(0) = (1-b) f_{m-1}(0)`.
pub fn occupation_pmf(params: &KineticsParams, n: usize) -> Result<OccupationPmf> {
    if n == 0 {
        return Err(Error::ZeroSteps);
    }
    let (a, b) = (params.a, params.b);
    let (pf, pa) = params.initial();
    let f1 = vec![pa, pf];
    if n == 1 {
        return Ok(OccupationPmf { n, probs: f1 });
    }
    let f2 = vec![pa * (1.0 - b), pa * b + pf * a, pf * (1.0 - a)];
    let (mut prev, mut cur) = (f1, f2);
    let c = 1.0 - a - b;
    for m in 3..=n {
        let mut next = vec![0.0; m + 1];
        next[0] = (1.0 - b) * cur[0];
        for k in 1..=m {
            let stay = cur.get(k).copied().unwrap_or(0.0);
            let back = prev.get(k - 1).copied().unwrap_or(0.0);
            let v = (1.0 - b) * stay + (1.0 - a) * cur[k - 1] - c * back;
            // the recurrence can leave -1e-17 style residue on exact zeros
            next[k] = v.max(0.0);
        }
        prev = cur;
        cur = next;
    }
    Ok(OccupationPmf { n, probs: cur })
}

/// A local maximum of a sequence, possibly spread over a plateau.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub first: usize,
    pub last: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Modes {
    pub modes: Vec<Mode>,
}

impl Modes {
    pub fn count(&self) -> usize {
        self.modes.len()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.modes.iter().any(|m| m.first <= k && k <= m.last)
    }
}

pub const MODE_TOLERANCE: f64 = 1e-12;

/// Plateau-aware local maxima: consecutive values within [`MODE_TOLERANCE`]
/// form one run, and a run is a mode when both neighbouring runs (if any)
/// are lower.
pub fn count_modes(values: &[f64]) -> Modes {
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match runs.last_mut() {
            Some((_, last)) if (values[*last] - v).abs() <= MODE_TOLERANCE => *last = i,
            _ => runs.push((i, i)),
        }
    }
    let modes = runs
        .iter()
        .enumerate()
        .filter(|&(r, &(first, last))| {
            let left_lower = r == 0 || values[runs[r - 1].1] < values[first];
            let right_lower = r + 1 == runs.len() || values[runs[r + 1].0] < values[last];
            left_lower && right_lower
        })
        .map(|(_, &(first, last))| Mode {
            first,
            last,
            value: values[first..=last].iter().copied().fold(f64::MIN, f64::max),
        })
        .collect();
    Modes { modes }
}
