//! The planar nearest-neighbour walk with arbitrary step probabilities and
//! the reflection identity
//! `P(S1 = x, S2 = y) P(S1 = -x) = P(S1 = -x, S2 = y) P(S1 = x)`.

use serde::{Deserialize, Serialize};

use super::{LatticePmf, Point};
use crate::convolution::{convolve_powers, StepDistribution};
use crate::error::{Error, Result};
use crate::numeric::{ln_pow, CompensatedSum, LnFactorial};

/// Probabilities of the steps `(1,0)`, `(-1,0)`, `(0,1)`, `(0,-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymmetricWalkParams {
    omega: f64,
    epsilon: f64,
    gamma: f64,
    delta: f64,
}

impl AsymmetricWalkParams {
    pub fn new(omega: f64, epsilon: f64, gamma: f64, delta: f64) -> Result<Self> {
        for (name, v) in [
            ("omega", omega),
            ("epsilon", epsilon),
            ("gamma", gamma),
            ("delta", delta),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidProbability { name, value: v });
            }
        }
        let total = omega + epsilon + gamma + delta;
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidProbability {
                name: "omega + epsilon + gamma + delta",
                value: total,
            });
        }
        Ok(Self {
            omega,
            epsilon,
            gamma,
            delta,
        })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn step_distribution(&self) -> Result<StepDistribution> {
        StepDistribution::new(vec![
            (1, 0, self.omega),
            (-1, 0, self.epsilon),
            (0, 1, self.gamma),
            (0, -1, self.delta),
        ])
    }
}

/// How [`asym_joint_pmf`] evaluates the law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AsymRoute {
    #[default]
    ClosedForm,
    Convolution,
}

pub fn asym_joint_pmf(walk: &AsymmetricWalkParams, n: usize, route: AsymRoute) -> Result<LatticePmf> {
    match route {
        AsymRoute::ClosedForm => Ok(closed_form(walk, n)),
        AsymRoute::Convolution => {
            let table = convolve_powers(&walk.step_distribution()?, n)?;
            Ok(table.layer(n).clone())
        }
    }
}

fn closed_form(walk: &AsymmetricWalkParams, n: usize) -> LatticePmf {
    let lf = LnFactorial::new(n);
    let ni = n as i64;
    let mut pmf = LatticePmf::new(n);
    for ax in 0..=ni {
        let rest = ni - ax;
        for y in (-rest..=rest).step_by(2) {
            let up_total = (rest + y) / 2;
            let down_total = (rest - y) / 2;
            let mut right = CompensatedSum::new();
            let mut left = CompensatedSum::new();
            for j in 0..=up_total.min(down_total) {
                let base = lf.get(n)
                    - lf.get(j as usize)
                    - lf.get((j + ax) as usize)
                    - lf.get((up_total - j) as usize)
                    - lf.get((down_total - j) as usize)
                    + ln_pow(walk.gamma, (up_total - j) as usize)
                    + ln_pow(walk.delta, (down_total - j) as usize);
                let (j, jx) = (j as usize, (j + ax) as usize);
                right.add((base + ln_pow(walk.omega, jx) + ln_pow(walk.epsilon, j)).exp());
                left.add((base + ln_pow(walk.omega, j) + ln_pow(walk.epsilon, jx)).exp());
            }
            pmf.insert(Point::new(ax, y), right.value());
            if ax > 0 {
                pmf.insert(Point::new(-ax, y), left.value());
            }
        }
    }
    pmf
}

/// `P(S1_n = x)` in closed form, for any `x` in `-n..=n`.
pub fn asym_marginal(walk: &AsymmetricWalkParams, n: usize, x: i64) -> f64 {
    let ax = x.unsigned_abs() as usize;
    if ax > n {
        return 0.0;
    }
    let lf = LnFactorial::new(n);
    let (toward, away) = if x >= 0 {
        (walk.omega, walk.epsilon)
    } else {
        (walk.epsilon, walk.omega)
    };
    let vertical = walk.gamma + walk.delta;
    (0..=(n - ax) / 2)
        .map(|i| {
            (lf.get(n) - lf.get(i) - lf.get(i + ax) - lf.get(n - ax - 2 * i)
                + ln_pow(toward, i + ax)
                + ln_pow(away, i)
                + ln_pow(vertical, n - 2 * i - ax))
                .exp()
        })
        .collect::<CompensatedSum>()
        .value()
}

/// `max |P(x,y) P(S1=-x) - P(-x,y) P(S1=x)|` over `x = 0..=n` and all `y`.
///
/// The closed-form route pairs the closed-form joint law with the
/// closed-form marginals; the convolution route uses the engine's law and
/// its column sums.
pub fn check_conditional_symmetry(
    walk: &AsymmetricWalkParams,
    n: usize,
    route: AsymRoute,
) -> Result<f64> {
    let pmf = asym_joint_pmf(walk, n, route)?;
    let columns = pmf.marginal_x();
    let marginal = |x: i64| match route {
        AsymRoute::ClosedForm => asym_marginal(walk, n, x),
        AsymRoute::Convolution => columns.get(&x).copied().unwrap_or(0.0),
    };
    let ni = n as i64;
    let mut worst: f64 = 0.0;
    for x in 0..=ni {
        let (px, pmx) = (marginal(x), marginal(-x));
        for y in -ni..=ni {
            let d = pmf.get(x, y) * pmx - pmf.get(-x, y) * px;
            worst = worst.max(d.abs());
        }
    }
    Ok(worst)
}
