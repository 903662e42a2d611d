//! Exact law of `Σ_{k=1}^{K_n} step_k` for any finite-support step law, by
//! iterated convolution followed by mixing over the occupation law.
//!
//! The closed forms in [`crate::lattice`] are checked against this engine,
//! and the nearest-neighbour model is evaluated with it directly.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::kinetics::OccupationPmf;
use crate::lattice::{CondVarCurve, LatticePmf, Point, DEFAULT_MASS_THRESHOLD};
use crate::numeric::CompensatedSum;

/// Largest number of stored points (summed over layers) by default.
pub const DEFAULT_POINT_BUDGET: u64 = 10_000_000;

/// Finite-support law of a single step, sorted by point with duplicates
/// merged.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDistribution {
    support: Vec<(Point, f64)>,
}

impl StepDistribution {
    pub fn new(support: Vec<(i64, i64, f64)>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidStepDistribution("empty support".into()));
        }
        let mut merged: BTreeMap<Point, f64> = BTreeMap::new();
        for (dx, dy, p) in support {
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::InvalidStepDistribution(format!(
                    "probability {p} at ({dx}, {dy})"
                )));
            }
            *merged.entry(Point::new(dx, dy)).or_insert(0.0) += p;
        }
        let total: f64 = merged.values().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidStepDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self {
            support: merged.into_iter().collect(),
        })
    }

    pub fn point_mass(at: Point) -> Self {
        Self {
            support: vec![(at, 1.0)],
        }
    }

    pub fn support(&self) -> &[(Point, f64)] {
        &self.support
    }

    fn extent(&self) -> (i64, i64) {
        let (mut x0, mut x1, mut y0, mut y1) = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
        for (p, _) in &self.support {
            x0 = x0.min(p.x);
            x1 = x1.max(p.x);
            y0 = y0.min(p.y);
            y1 = y1.max(p.y);
        }
        (x1 - x0, y1 - y0)
    }

    /// Upper bound on the number of points stored by a table of depth `n`,
    /// from the bounding box of the k-fold Minkowski sum of the support.
    pub fn support_bound(&self, n: usize) -> u64 {
        let (wx, wy) = self.extent();
        let (wx, wy) = (wx as u64, wy as u64);
        let mut total: u64 = 0;
        for k in 0..=n as u64 {
            let layer = (k.saturating_mul(wx).saturating_add(1))
                .saturating_mul(k.saturating_mul(wy).saturating_add(1));
            total = total.saturating_add(layer);
        }
        total
    }
}

/// Layer `k` is the law of the sum of `k` independent steps.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionTable {
    layers: Vec<LatticePmf>,
}

impl ConvolutionTable {
    /// Number of steps covered, i.e. the index of the last layer.
    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn layer(&self, k: usize) -> &LatticePmf {
        &self.layers[k]
    }

    pub fn layers(&self) -> &[LatticePmf] {
        &self.layers
    }
}

pub fn convolve_powers(step: &StepDistribution, n: usize) -> Result<ConvolutionTable> {
    convolve_powers_with_budget(step, n, DEFAULT_POINT_BUDGET)
}

pub fn convolve_powers_with_budget(
    step: &StepDistribution,
    n: usize,
    budget: u64,
) -> Result<ConvolutionTable> {
    let needed = step.support_bound(n);
    if needed > budget {
        return Err(Error::SupportOverflow { needed, budget });
    }
    let mut layers = Vec::with_capacity(n + 1);
    layers.push(LatticePmf::point_mass(0, Point::ORIGIN));
    for k in 1..=n {
        let prev: &LatticePmf = &layers[k - 1];
        let mut next: BTreeMap<Point, f64> = BTreeMap::new();
        for (at, p) in prev.iter() {
            for &(s, q) in &step.support {
                *next.entry(at + s).or_insert(0.0) += p * q;
            }
        }
        layers.push(LatticePmf::from_map(k, next));
    }
    Ok(ConvolutionTable { layers })
}

/// `Σ_k f_n(k) · layer_k`.
pub fn mixture_pmf(table: &ConvolutionTable, occupation: &OccupationPmf) -> Result<LatticePmf> {
    let n = occupation.n();
    if table.depth() < n {
        return Err(Error::TableTooShallow {
            depth: table.depth(),
            needed: n,
        });
    }
    let mut acc: BTreeMap<Point, CompensatedSum> = BTreeMap::new();
    for (k, &w) in occupation.probs().iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (at, p) in table.layer(k).iter() {
            acc.entry(at).or_default().add(w * p);
        }
    }
    Ok(LatticePmf::from_map(
        n,
        acc.into_iter().map(|(pt, s)| (pt, s.value())).collect(),
    ))
}

/// Column-wise conditional moments with the default mass threshold.
pub fn condvar_from_pmf(pmf: &LatticePmf) -> CondVarCurve {
    pmf.condvar_curve(DEFAULT_MASS_THRESHOLD)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::{InitialDistribution, KineticsParams};
    use crate::lattice::{joint_pmf_simple, DispersionModel};
    use approx::assert_abs_diff_eq;

    #[test]
    fn deterministic_step() {
        let step = StepDistribution::point_mass(Point::new(1, 0));
        let t = convolve_powers(&step, 3).unwrap();
        assert_eq!(t.layer(3), &LatticePmf::point_mass(3, Point::new(3, 0)));
    }

    #[test]
    fn zero_depth_is_origin() {
        let step = DispersionModel::NearestNeighbor { xi: 0.1 }
            .step_distribution()
            .unwrap();
        let t = convolve_powers(&step, 0).unwrap();
        assert_eq!(t.depth(), 0);
        assert_eq!(t.layer(0), &LatticePmf::point_mass(0, Point::ORIGIN));
    }

    #[test]
    fn two_fold_simple_walk() {
        let step = DispersionModel::SimpleRw { alpha: 0.25, beta: 0.25 }
            .step_distribution()
            .unwrap();
        let t = convolve_powers(&step, 2).unwrap();
        assert_abs_diff_eq!(t.layer(2).get(4, 0), 1.0 / 16.0, epsilon = 1e-16);
        for layer in t.layers() {
            assert_abs_diff_eq!(layer.total_mass(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn invalid_step_laws() {
        assert!(StepDistribution::new(vec![]).is_err());
        assert!(StepDistribution::new(vec![(0, 0, 0.5)]).is_err());
        assert!(StepDistribution::new(vec![(0, 0, 1.5), (1, 0, -0.5)]).is_err());
        let merged = StepDistribution::new(vec![(0, 0, 0.5), (0, 0, 0.5)]).unwrap();
        assert_eq!(merged.support().len(), 1);
    }

    #[test]
    fn budget_is_enforced() {
        let step = DispersionModel::SimpleRw { alpha: 0.25, beta: 0.25 }
            .step_distribution()
            .unwrap();
        assert!(matches!(
            convolve_powers_with_budget(&step, 50, 1000),
            Err(Error::SupportOverflow { budget: 1000, .. })
        ));
        assert!(convolve_powers(&step, 50).is_ok());
    }

    #[test]
    fn mixture_edge_cases() {
        let step = DispersionModel::FortyFive { alpha: 0.1, beta: 0.4 }
            .step_distribution()
            .unwrap();
        let t = convolve_powers(&step, 4).unwrap();

        let point = OccupationPmf::from_probs(vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let m = mixture_pmf(&t, &point).unwrap();
        assert!(m.max_abs_diff(t.layer(3)) == 0.0);

        let k = KineticsParams::new(0.3, 0.3, InitialDistribution::Custom(0.6)).unwrap();
        let f1 = k.occupation_pmf(1).unwrap();
        let m = mixture_pmf(&t, &f1).unwrap();
        assert_abs_diff_eq!(m.get(0, 0), 0.4, epsilon = 1e-15);
        for &(pt, p) in step.support() {
            assert_abs_diff_eq!(m.get(pt.x, pt.y), 0.6 * p, epsilon = 1e-15);
        }

        let deep = k.occupation_pmf(5).unwrap();
        assert_eq!(
            mixture_pmf(&t, &deep),
            Err(Error::TableTooShallow { depth: 4, needed: 5 })
        );
    }

    #[test]
    fn mixture_matches_closed_form() {
        let k = KineticsParams::stationary(0.5, 0.5).unwrap();
        let step = DispersionModel::SimpleRw { alpha: 0.25, beta: 0.25 }
            .step_distribution()
            .unwrap();
        let m = mixture_pmf(&convolve_powers(&step, 2).unwrap(), &k.occupation_pmf(2).unwrap())
            .unwrap();
        assert_abs_diff_eq!(m.get(4, 0), 1.0 / 64.0, epsilon = 1e-16);

        let k = KineticsParams::stationary(0.2, 0.35).unwrap();
        let m = mixture_pmf(&convolve_powers(&step, 6).unwrap(), &k.occupation_pmf(6).unwrap())
            .unwrap();
        let closed = joint_pmf_simple(&k, 0.25, 0.25, 6).unwrap();
        assert!(m.max_abs_diff(&closed) < 1e-14);
        let a = condvar_from_pmf(&m);
        let b = crate::lattice::condvar_simple(&k, 0.25, 0.25, 6).unwrap();
        assert!(a.max_var_diff(&b).unwrap() < 1e-12);
    }
}
