//! Lattice dispersion models: closed-form joint pmfs and lateral
//! conditional-variance curves.

mod asymmetric;
mod forty_five;
mod nearest;
mod pmf;
mod simple;

use serde::{Deserialize, Serialize};

use crate::convolution::StepDistribution;
use crate::error::{Error, Result};
use crate::kinetics::KineticsParams;

pub use asymmetric::{
    asym_joint_pmf, asym_marginal, check_conditional_symmetry, AsymRoute, AsymmetricWalkParams,
};
pub use forty_five::{condvar_45, joint_pmf_45};
pub use nearest::{condvar_nn, joint_pmf_nn};
pub use pmf::{CondVarCurve, CondVarEntry, LatticePmf, Point, DEFAULT_MASS_THRESHOLD};
pub use simple::{condvar_simple, joint_pmf_simple};

const DISPERSION_TOLERANCE: f64 = 1e-12;

/// Law of the dispersion part of a free step.
///
/// Every free step additionally moves the particle one unit in `+x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DispersionModel {
    /// `(±1, 0)` with probability `alpha` each, `(0, ±1)` with `beta` each.
    SimpleRw { alpha: f64, beta: f64 },
    /// `(1, ±1)` with probability `alpha` each, `(-1, ±1)` with `beta` each.
    FortyFive { alpha: f64, beta: f64 },
    /// `(±1, ±1)` with probability `xi` each, `(±1, 0)` with `1/2 - 2 xi` each.
    NearestNeighbor { xi: f64 },
}

pub(crate) fn check_dispersion(alpha: f64, beta: f64) -> Result<()> {
    let ok = alpha >= 0.0
        && beta >= 0.0
        && (alpha + beta - 0.5).abs() <= DISPERSION_TOLERANCE;
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidDispersion { alpha, beta })
    }
}

pub(crate) fn check_xi(xi: f64) -> Result<()> {
    if xi > 0.0 && xi < 0.25 {
        Ok(())
    } else {
        Err(Error::InvalidXi(xi))
    }
}

impl DispersionModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::SimpleRw { alpha, beta } | Self::FortyFive { alpha, beta } => {
                check_dispersion(alpha, beta)
            }
            Self::NearestNeighbor { xi } => check_xi(xi),
        }
    }

    /// Law of one advected free step.
    pub fn step_distribution(&self) -> Result<StepDistribution> {
        self.validate()?;
        let support = match *self {
            Self::SimpleRw { alpha, beta } => vec![
                (2, 0, alpha),
                (0, 0, alpha),
                (1, 1, beta),
                (1, -1, beta),
            ],
            Self::FortyFive { alpha, beta } => vec![
                (2, 1, alpha),
                (2, -1, alpha),
                (0, 1, beta),
                (0, -1, beta),
            ],
            Self::NearestNeighbor { xi } => {
                let flat = 0.5 - 2.0 * xi;
                vec![
                    (2, 1, xi),
                    (2, -1, xi),
                    (0, 1, xi),
                    (0, -1, xi),
                    (2, 0, flat),
                    (0, 0, flat),
                ]
            }
        };
        StepDistribution::new(support)
    }

    /// Variance of the vertical component of one step.
    pub fn vertical_step_variance(&self) -> f64 {
        match *self {
            Self::SimpleRw { beta, .. } => 2.0 * beta,
            Self::FortyFive { .. } => 1.0,
            Self::NearestNeighbor { xi } => 4.0 * xi,
        }
    }

    pub fn joint_pmf(&self, kinetics: &KineticsParams, n: usize) -> Result<LatticePmf> {
        match *self {
            Self::SimpleRw { alpha, beta } => joint_pmf_simple(kinetics, alpha, beta, n),
            Self::FortyFive { alpha, beta } => joint_pmf_45(kinetics, alpha, beta, n),
            Self::NearestNeighbor { xi } => joint_pmf_nn(kinetics, xi, n),
        }
    }

    pub fn condvar(&self, kinetics: &KineticsParams, n: usize) -> Result<CondVarCurve> {
        match *self {
            Self::SimpleRw { alpha, beta } => condvar_simple(kinetics, alpha, beta, n),
            Self::FortyFive { alpha, beta } => condvar_45(kinetics, alpha, beta, n),
            Self::NearestNeighbor { xi } => condvar_nn(kinetics, xi, n),
        }
    }
}
