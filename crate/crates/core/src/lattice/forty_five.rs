//! Forty-five degree dispersion: free steps `(1, ±1)` with probability
//! `alpha` each and `(-1, ±1)` with probability `beta` each. With advection
//! the horizontal position is always even, and given `K_n = k` the
//! horizontal and vertical step counts are independent binomials.

use rayon::prelude::*;

use super::{check_dispersion, CondVarCurve, CondVarEntry, LatticePmf, Point, DEFAULT_MASS_THRESHOLD};
use crate::error::Result;
use crate::kinetics::KineticsParams;
use crate::numeric::{ln_pow, weighted_log_ratio, CompensatedSum, LnFactorial};

/// `P(S(n) = (2x, y)) = Σ_{k≥x} f_n(k) C(k,x) C(k,(k+y)/2) α^x β^{k-x}`.
pub fn joint_pmf_45(
    kinetics: &KineticsParams,
    alpha: f64,
    beta: f64,
    n: usize,
) -> Result<LatticePmf> {
    check_dispersion(alpha, beta)?;
    let f = kinetics.occupation_pmf(n)?;
    let ln_f: Vec<f64> = f.probs().iter().map(|p| p.ln()).collect();
    let lf = LnFactorial::new(n);
    let columns: Vec<Vec<(Point, f64)>> = (0..=n)
        .into_par_iter()
        .map(|x| {
            let ni = n as i64;
            let mut out = Vec::new();
            for y in -ni..=ni {
                let mut sum = CompensatedSum::new();
                let mut any = false;
                for k in x..=n {
                    let ki = k as i64;
                    if y.abs() > ki || (ki + y) % 2 != 0 {
                        continue;
                    }
                    any = true;
                    if ln_f[k] == f64::NEG_INFINITY {
                        continue;
                    }
                    let up = ((ki + y) / 2) as usize;
                    let t = ln_f[k]
                        + lf.ln_binomial(k, x)
                        + lf.ln_binomial(k, up)
                        + ln_pow(alpha, x)
                        + ln_pow(beta, k - x);
                    sum.add(t.exp());
                }
                if any {
                    out.push((Point::new(2 * x as i64, y), sum.value()));
                }
            }
            out
        })
        .collect();
    let mut pmf = LatticePmf::new(n);
    for (pt, p) in columns.into_iter().flatten() {
        pmf.insert(pt, p);
    }
    Ok(pmf)
}

/// `Var(S_Y(n) | S_X(n) = 2x) = E[K_n | S_X(n) = 2x]`, i.e.
/// `Σ k f_n(k) C(k,x) (2α)^x (2β)^{k-x} / Σ f_n(k) C(k,x) (2α)^x (2β)^{k-x}`.
/// Entries are keyed by the actual horizontal position `2x`.
pub fn condvar_45(
    kinetics: &KineticsParams,
    alpha: f64,
    beta: f64,
    n: usize,
) -> Result<CondVarCurve> {
    check_dispersion(alpha, beta)?;
    let f = kinetics.occupation_pmf(n)?;
    let ln_f: Vec<f64> = f.probs().iter().map(|p| p.ln()).collect();
    let lf = LnFactorial::new(n);
    let ln_threshold = DEFAULT_MASS_THRESHOLD.ln();
    let entries: Vec<Option<CondVarEntry>> = (0..=n)
        .into_par_iter()
        .map(|x| {
            let terms: Vec<(f64, f64)> = (x..=n)
                .map(|k| {
                    let t = ln_f[k]
                        + lf.ln_binomial(k, x)
                        + ln_pow(2.0 * alpha, x)
                        + ln_pow(2.0 * beta, k - x);
                    (t, k as f64)
                })
                .collect();
            let (var, ln_mass) = weighted_log_ratio(&terms)?;
            (ln_mass >= ln_threshold).then(|| CondVarEntry {
                x: 2 * x as i64,
                marginal: ln_mass.exp(),
                cond_mean: 0.0,
                cond_var: var,
            })
        })
        .collect();
    Ok(CondVarCurve::new(entries.into_iter().flatten().collect()))
}
