//! Gaussian dispersion: `X_k ~ N(0, 2α)`, `Y_k ~ N(0, 2β)` independent.
//!
//! The position law is `f_n(0) δ_(0,0) + (1 - f_n(0)) μ̃_n` where `μ̃_n`
//! has the mixture density
//! `f̃(x, y) = (1 - f_n(0))^{-1} Σ_{k≥1} f_n(k) / (4πk√(αβ)) exp(-(x-k)²/(4kα) - y²/(4kβ))`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kinetics::{KineticsParams, OccupationPmf};
use crate::numeric::{log_sum_exp, weighted_log_ratio};
use crate::quadrature::{integrate_with_breakpoints, Tolerance};

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianModel {
    kinetics: KineticsParams,
    alpha: f64,
    beta: f64,
    occupation: OccupationPmf,
    ln_f: Vec<f64>,
}

impl GaussianModel {
    pub fn new(kinetics: KineticsParams, alpha: f64, beta: f64, n: usize) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidGaussian { alpha, beta });
        }
        let occupation = kinetics.occupation_pmf(n)?;
        let ln_f = occupation.probs().iter().map(|p| p.ln()).collect();
        Ok(Self {
            kinetics,
            alpha,
            beta,
            occupation,
            ln_f,
        })
    }

    pub fn kinetics(&self) -> &KineticsParams {
        &self.kinetics
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn n(&self) -> usize {
        self.occupation.n()
    }

    pub fn occupation(&self) -> &OccupationPmf {
        &self.occupation
    }

    /// Mass of the atom at the origin, `f_n(0)`.
    pub fn atom_mass(&self) -> f64 {
        self.occupation.get(0)
    }

    fn continuous_weight(&self) -> f64 {
        1.0 - self.atom_mass()
    }

    /// Density `f̃(x, y)` of the continuous part (integrates to 1). Zero
    /// when the law is entirely atomic.
    pub fn density(&self, x: f64, y: f64) -> f64 {
        let w = self.continuous_weight();
        if w <= 0.0 {
            return 0.0;
        }
        let ln_norm = (4.0 * PI * (self.alpha * self.beta).sqrt()).ln();
        let terms: Vec<f64> = (1..=self.n())
            .map(|k| {
                let kf = k as f64;
                self.ln_f[k] - ln_norm - kf.ln()
                    - (x - kf).powi(2) / (4.0 * kf * self.alpha)
                    - y * y / (4.0 * kf * self.beta)
            })
            .collect();
        log_sum_exp(&terms).exp() / w
    }

    /// Density `f̃_X(x)` of the horizontal coordinate of the continuous part.
    pub fn marginal_density(&self, x: f64) -> f64 {
        let w = self.continuous_weight();
        if w <= 0.0 {
            return 0.0;
        }
        let terms: Vec<f64> = (1..=self.n())
            .map(|k| {
                let kf = k as f64;
                self.ln_f[k]
                    - (2.0 * (PI * kf * self.alpha).sqrt()).ln()
                    - (x - kf).powi(2) / (4.0 * kf * self.alpha)
            })
            .collect();
        log_sum_exp(&terms).exp() / w
    }

    /// `Σ_k exp(-(x-k)²/(4kα)) f_n(k) √k / Σ_k exp(-(x-k)²/(4kα)) f_n(k) / √k`.
    fn occupation_ratio(&self, x: f64) -> Result<f64> {
        let terms: Vec<(f64, f64)> = (1..=self.n())
            .map(|k| {
                let kf = k as f64;
                (
                    self.ln_f[k] - (x - kf).powi(2) / (4.0 * kf * self.alpha) - 0.5 * kf.ln(),
                    kf,
                )
            })
            .collect();
        weighted_log_ratio(&terms)
            .map(|(r, _)| r)
            .ok_or(Error::AllMassAtomic)
    }

    /// The lateral conditional variance in the published closed form, which
    /// carries the prefactor `1 - f_n(0)`:
    /// `2β (1 - f_n(0)) Σ e_k f_n(k) √k / Σ e_k f_n(k) / √k`.
    pub fn condvar(&self, x: f64) -> Result<f64> {
        Ok(self.continuous_weight() * self.condvar_continuous(x)?)
    }

    /// `Var(S_Y(n) | S_X(n) = x)` for the continuous part of the law, i.e.
    /// [`Self::condvar`] without the `1 - f_n(0)` prefactor. This is what a
    /// particle simulation binned around `x ≠ 0` estimates.
    pub fn condvar_continuous(&self, x: f64) -> Result<f64> {
        Ok(2.0 * self.beta * self.occupation_ratio(x)?)
    }

    /// `[-4√(2nα), n + 4√(2nα)]`.
    pub fn default_domain(&self) -> (f64, f64) {
        let n = self.n() as f64;
        let spread = 4.0 * (2.0 * n * self.alpha).sqrt();
        (-spread, n + spread)
    }

    /// Evenly spaced abscissae `start + i step` up to and including `end`.
    pub fn grid(start: f64, end: f64, step: f64) -> Vec<f64> {
        assert!(step > 0.0 && end >= start);
        let count = ((end - start) / step + 1e-9).floor() as usize;
        (0..=count).map(|i| start + i as f64 * step).collect()
    }

    /// Initial quadrature segments covering ±8σ of every component, split
    /// at the component centres in `x` and at multiples of the narrowest
    /// component's σ in `y`.
    fn breakpoints(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n() as f64;
        let x_lo = 1.0 - 8.0 * (2.0 * self.alpha).sqrt();
        let x_hi = n + 8.0 * (2.0 * n * self.alpha).sqrt();
        let mut xs = vec![x_lo];
        xs.extend((1..=self.n()).map(|k| k as f64));
        xs.push(x_hi);

        let y_max = 8.0 * (2.0 * n * self.beta).sqrt();
        let sigma = (2.0 * self.beta).sqrt();
        let mut ys: Vec<f64> = [1.0, 2.0, 4.0, 8.0]
            .iter()
            .map(|m| m * sigma)
            .filter(|&v| v < y_max)
            .collect();
        let mut both: Vec<f64> = ys.iter().rev().map(|v| -v).collect();
        both.insert(0, -y_max);
        both.push(0.0);
        both.append(&mut ys);
        both.push(y_max);
        (xs, both)
    }

    /// `∫ f̃(x, y) dy` by adaptive quadrature over the ±8σ band.
    pub fn marginal_by_quadrature(&self, x: f64) -> f64 {
        let (_, ys) = self.breakpoints();
        let tol = Tolerance {
            abs: 1e-14,
            rel: 1e-11,
            ..Tolerance::default()
        };
        integrate_with_breakpoints(|y| self.density(x, y), &ys, tol).value
    }

    /// `f_n(0) + (1 - f_n(0)) ∫∫ f̃` with nested adaptive quadrature over
    /// the ±8σ bounding box.
    pub fn total_mass_by_quadrature(&self) -> f64 {
        let (xs, ys) = self.breakpoints();
        let inner = Tolerance {
            abs: 1e-13,
            rel: 1e-10,
            ..Tolerance::default()
        };
        let outer = Tolerance {
            abs: 1e-12,
            rel: 1e-9,
            ..Tolerance::default()
        };
        let continuous = integrate_with_breakpoints(
            |x| integrate_with_breakpoints(|y| self.density(x, y), &ys, inner).value,
            &xs,
            outer,
        )
        .value;
        self.atom_mass() + self.continuous_weight() * continuous
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::InitialDistribution;
    use approx::assert_abs_diff_eq;

    fn always_free() -> KineticsParams {
        KineticsParams::new(0.0, 0.5, InitialDistribution::Free).unwrap()
    }

    #[test]
    fn single_component_peak() {
        let m = GaussianModel::new(always_free(), 0.25, 0.25, 1).unwrap();
        assert_abs_diff_eq!(m.density(1.0, 0.0), 1.0 / PI, epsilon = 1e-15);
        assert_eq!(m.atom_mass(), 0.0);
    }

    #[test]
    fn density_matches_direct_summation() {
        let k = KineticsParams::stationary(0.1, 0.1).unwrap();
        let m = GaussianModel::new(k, 0.25, 0.25, 10).unwrap();
        let f = k.occupation_pmf(10).unwrap();
        let (x, y) = (5.0, 0.0);
        let direct: f64 = (1..=10)
            .map(|k| {
                let kf = k as f64;
                f.get(k) / (4.0 * PI * kf * 0.25)
                    * (-(x - kf).powi(2) / (4.0 * kf * 0.25) - y * y / (4.0 * kf * 0.25)).exp()
            })
            .sum::<f64>()
            / (1.0 - f.get(0));
        assert_abs_diff_eq!(m.density(x, y), direct, epsilon = 1e-14);
    }

    #[test]
    fn density_even_in_y() {
        let m = GaussianModel::new(KineticsParams::stationary(0.3, 0.2).unwrap(), 0.4, 0.1, 12)
            .unwrap();
        for (x, y) in [(0.3, 1.7), (5.0, -2.0), (-1.0, 0.25), (11.5, 3.3)] {
            assert_eq!(m.density(x, y), m.density(x, -y));
        }
    }

    #[test]
    fn atom_examples() {
        let m = GaussianModel::new(always_free(), 0.25, 0.25, 5).unwrap();
        assert_eq!(m.atom_mass(), 0.0);
        let k = KineticsParams::stationary(0.5, 0.5).unwrap();
        let m = GaussianModel::new(k, 0.25, 0.25, 3).unwrap();
        assert_abs_diff_eq!(m.atom_mass(), 0.125, epsilon = 1e-15);
        let stuck = KineticsParams::new(0.5, 0.0, InitialDistribution::Adsorbed).unwrap();
        let m = GaussianModel::new(stuck, 0.25, 0.25, 4).unwrap();
        assert_eq!(m.atom_mass(), 1.0);
        assert_eq!(m.condvar(3.0), Err(Error::AllMassAtomic));
        assert_eq!(m.density(0.0, 0.0), 0.0);
    }

    #[test]
    fn deterministic_occupation_condvar() {
        for beta in [0.1, 0.25, 0.7] {
            let m = GaussianModel::new(always_free(), 0.3, beta, 7).unwrap();
            for x in [-3.0, 0.0, 2.5, 7.0, 20.0] {
                assert_abs_diff_eq!(m.condvar(x).unwrap(), 2.0 * beta * 7.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn prefactor_relation() {
        let k = KineticsParams::stationary(0.1, 0.1).unwrap();
        let m = GaussianModel::new(k, 0.25, 0.25, 10).unwrap();
        let w = 1.0 - m.atom_mass();
        for x in [1.0, 4.0, 10.0] {
            assert_abs_diff_eq!(
                m.condvar(x).unwrap(),
                w * m.condvar_continuous(x).unwrap(),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn rejects_nonpositive_variances() {
        let k = KineticsParams::stationary(0.1, 0.1).unwrap();
        assert!(GaussianModel::new(k, 0.0, 0.25, 3).is_err());
        assert!(GaussianModel::new(k, 0.25, -1.0, 3).is_err());
    }

    #[test]
    fn far_tail_stays_finite() {
        let m = GaussianModel::new(KineticsParams::stationary(0.01, 0.01).unwrap(), 0.25, 0.25, 50)
            .unwrap();
        let v = m.condvar(400.0).unwrap();
        assert!(v.is_finite() && v > 0.0);
        assert!(m.density(400.0, 0.0) >= 0.0);
    }

    #[test]
    fn marginal_is_integral_of_density() {
        let m = GaussianModel::new(KineticsParams::stationary(0.1, 0.1).unwrap(), 0.25, 0.25, 10)
            .unwrap();
        for x in [-1.0, 0.5, 5.0, 9.3] {
            assert_abs_diff_eq!(m.marginal_by_quadrature(x), m.marginal_density(x), epsilon = 1e-8);
        }
    }
}
