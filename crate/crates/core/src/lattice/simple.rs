//! Simple random walk dispersion: each free step moves `(±1, 0)` with
//! probability `alpha` or `(0, ±1)` with probability `beta`, plus one unit
//! of advection in `x`.
//!
//! Conditioned on `K_n = k`, a position `(x, y)` needs `j` right steps,
//! `j + k - x` left steps, `(x + y)/2 - j` up steps and `(x - y)/2 - j` down
//! steps, which gives the multinomial double sums below.

use rayon::prelude::*;

use super::{check_dispersion, CondVarCurve, CondVarEntry, LatticePmf, Point, DEFAULT_MASS_THRESHOLD};
use crate::error::Result;
use crate::kinetics::KineticsParams;
use crate::numeric::{ln_pow, weighted_log_ratio, CompensatedSum, LnFactorial};

struct Prep {
    n: usize,
    ln_f: Vec<f64>,
    lnfact: LnFactorial,
}

fn prepare(kinetics: &KineticsParams, alpha: f64, beta: f64, n: usize) -> Result<Prep> {
    check_dispersion(alpha, beta)?;
    let f = kinetics.occupation_pmf(n)?;
    Ok(Prep {
        n,
        ln_f: f.probs().iter().map(|p| p.ln()).collect(),
        lnfact: LnFactorial::new(n),
    })
}

/// `P(S(n) = (x, y))` on every reachable point.
pub fn joint_pmf_simple(
    kinetics: &KineticsParams,
    alpha: f64,
    beta: f64,
    n: usize,
) -> Result<LatticePmf> {
    let prep = prepare(kinetics, alpha, beta, n)?;
    let columns: Vec<Vec<(Point, f64)>> = (0..=2 * n as i64)
        .into_par_iter()
        .map(|x| joint_column(&prep, alpha, beta, x))
        .collect();
    let mut pmf = LatticePmf::new(n);
    for (pt, p) in columns.into_iter().flatten() {
        pmf.insert(pt, p);
    }
    Ok(pmf)
}

fn joint_column(prep: &Prep, alpha: f64, beta: f64, x: i64) -> Vec<(Point, f64)> {
    let n = prep.n as i64;
    let lf = &prep.lnfact;
    let ymax = x.min(2 * n - x);
    let mut out = Vec::new();
    for y in (-ymax..=ymax).step_by(2) {
        let mut sum = CompensatedSum::new();
        let mut any = false;
        let k_min = (x + 1) / 2;
        for k in k_min..=n {
            let ln_fk = prep.ln_f[k as usize];
            let j_lo = (x - k).max(0);
            let j_hi = ((x + y) / 2).min((x - y) / 2);
            for j in j_lo..=j_hi {
                any = true;
                if ln_fk == f64::NEG_INFINITY {
                    continue;
                }
                let left = j + k - x;
                let up = (x + y) / 2 - j;
                let down = (x - y) / 2 - j;
                let t = ln_fk + lf.get(k as usize)
                    - lf.get(j as usize)
                    - lf.get(left as usize)
                    - lf.get(up as usize)
                    - lf.get(down as usize)
                    + ln_pow(alpha, (2 * j + k - x) as usize)
                    + ln_pow(beta, (x - 2 * j) as usize);
                sum.add(t.exp());
            }
        }
        if any {
            out.push((Point::new(x, y), sum.value()));
        }
    }
    out
}

/// `Var(S_Y(n) | S_X(n) = x)` for `x = 0..=2n`, using the trinomial ratio
/// `Σ (x-2j) T / Σ T` with `T = f_n(k) (k; j, j+k-x, x-2j) α^{2j+k-x} (2β)^{x-2j}`.
pub fn condvar_simple(
    kinetics: &KineticsParams,
    alpha: f64,
    beta: f64,
    n: usize,
) -> Result<CondVarCurve> {
    let prep = prepare(kinetics, alpha, beta, n)?;
    let ln_threshold = DEFAULT_MASS_THRESHOLD.ln();
    let entries: Vec<Option<CondVarEntry>> = (0..=2 * n as i64)
        .into_par_iter()
        .map(|x| {
            let terms = marginal_terms(&prep, alpha, beta, x);
            let (var, ln_mass) = weighted_log_ratio(&terms)?;
            (ln_mass >= ln_threshold).then(|| CondVarEntry {
                x,
                marginal: ln_mass.exp(),
                cond_mean: 0.0,
                cond_var: var,
            })
        })
        .collect();
    Ok(CondVarCurve::new(entries.into_iter().flatten().collect()))
}

/// Log-weights of `P(S_X = x)` split by `(k, j)`, each tagged with the
/// number of vertical steps `x - 2j`.
fn marginal_terms(prep: &Prep, alpha: f64, beta: f64, x: i64) -> Vec<(f64, f64)> {
    let n = prep.n as i64;
    let lf = &prep.lnfact;
    let mut terms = Vec::new();
    for k in (x + 1) / 2..=n {
        let ln_fk = prep.ln_f[k as usize];
        if ln_fk == f64::NEG_INFINITY {
            continue;
        }
        for j in (x - k).max(0)..=x / 2 {
            let vertical = x - 2 * j;
            let t = ln_fk + lf.get(k as usize)
                - lf.get(j as usize)
                - lf.get((j + k - x) as usize)
                - lf.get(vertical as usize)
                + ln_pow(alpha, (2 * j + k - x) as usize)
                + ln_pow(2.0 * beta, vertical as usize);
            terms.push((t, vertical as f64));
        }
    }
    terms
}
