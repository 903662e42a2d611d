//! Nearest-neighbour dispersion with independent horizontal and vertical
//! components. No closed form is used; both the pmf and the curve come from
//! the convolution engine.

use super::{check_xi, CondVarCurve, DispersionModel, LatticePmf, DEFAULT_MASS_THRESHOLD};
use crate::convolution::{convolve_powers, mixture_pmf};
use crate::error::Result;
use crate::kinetics::KineticsParams;

pub fn joint_pmf_nn(kinetics: &KineticsParams, xi: f64, n: usize) -> Result<LatticePmf> {
    check_xi(xi)?;
    let step = DispersionModel::NearestNeighbor { xi }.step_distribution()?;
    let occupation = kinetics.occupation_pmf(n)?;
    let table = convolve_powers(&step, n)?;
    mixture_pmf(&table, &occupation)
}

pub fn condvar_nn(kinetics: &KineticsParams, xi: f64, n: usize) -> Result<CondVarCurve> {
    Ok(joint_pmf_nn(kinetics, xi, n)?.condvar_curve(DEFAULT_MASS_THRESHOLD))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::kinetics::InitialDistribution;
    use crate::lattice::condvar_45;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_free_step() {
        let k = KineticsParams::new(0.0, 0.5, InitialDistribution::Free).unwrap();
        let pmf = joint_pmf_nn(&k, 0.2, 1).unwrap();
        assert_abs_diff_eq!(pmf.get(2, 1), 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(pmf.get(0, 0), 0.1, epsilon = 1e-15);
    }

    #[test]
    fn rejects_out_of_range_xi() {
        let k = KineticsParams::stationary(0.1, 0.1).unwrap();
        assert_eq!(joint_pmf_nn(&k, 0.25, 3), Err(Error::InvalidXi(0.25)));
        assert_eq!(condvar_nn(&k, 0.0, 3).unwrap_err(), Error::InvalidXi(0.0));
    }

    #[test]
    fn normalized_with_slow_exchange() {
        let k = KineticsParams::stationary(0.01, 0.01).unwrap();
        let pmf = joint_pmf_nn(&k, 0.2, 25).unwrap();
        assert_abs_diff_eq!(pmf.total_mass(), 1.0, epsilon = 1e-10);
        assert!(pmf.points().all(|p| p.x % 2 == 0));
    }

    #[test]
    fn variance_is_scaled_conditional_occupation() {
        // X and Y of a step are independent and X is a fair ±1, so
        // Var(S_Y | S_X) = 4ξ E[K_n | S_X], the same E[K_n | S_X] as the
        // forty-five degree model with α = β = 1/4
        let k = KineticsParams::stationary(0.01, 0.01).unwrap();
        let xi = 0.2;
        let nn = condvar_nn(&k, xi, 25).unwrap();
        let ff = condvar_45(&k, 0.25, 0.25, 25).unwrap();
        assert_eq!(nn.len(), ff.len());
        for (a, b) in nn.entries().iter().zip(ff.entries()) {
            assert_eq!(a.x, b.x);
            assert_abs_diff_eq!(a.cond_var, 4.0 * xi * b.cond_var, epsilon = 1e-10);
            assert_abs_diff_eq!(a.marginal, b.marginal, epsilon = 1e-12);
        }
    }
}
