//! The `verify` suite: every check recomputes a result two ways, or
//! against a brute-force oracle, and compares at a fixed tolerance.

use std::fmt::Write as _;

use anyhow::{bail, Result};
use serde_json::json;

use kplume::convolution::{convolve_powers, mixture_pmf};
use kplume::gaussian::GaussianModel;
use kplume::kinetics::count_modes;
use kplume::lattice::{
    check_conditional_symmetry, condvar_45, condvar_nn, AsymRoute, AsymmetricWalkParams,
};
use kplume::montecarlo::{simulate, total_variation, SimModel, SimulationConfig, DEFAULT_BIN_WIDTH};
use kplume::oracle::enumerate_occupation;
use kplume::{DispersionModel, InitialDistribution, KineticsParams, LatticePmf, Point};

use crate::args::VerifyArgs;
use crate::commands::{recorded_args, Status};
use crate::output::Writer;

pub const CHECKS: &[&str] = &[
    "occupation-oracle",
    "normalization",
    "engine-agreement",
    "symmetry",
    "asym-symmetry",
    "ff45-monotone",
    "gauss-monotone",
    "simple-dip",
    "double-peak",
    "total-variance",
    "nn-identity",
    "mc-concordance",
];

/// `(a, b)` pairs used by most checks: a + b = 1, a = b, and slow exchange.
const REFERENCE_RATES: [(f64, f64); 3] = [(0.1, 0.9), (0.1, 0.1), (0.01, 0.01)];
const FAULT: f64 = 1e-6;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: String) -> Self {
        Self { passed, detail }
    }
}

struct Context {
    a: f64,
    b: f64,
    inject_fault: bool,
    particles: u64,
    seed: u64,
}

impl Context {
    fn perturb(&self, pmf: &mut LatticePmf) {
        if self.inject_fault {
            pmf.add(Point::ORIGIN, FAULT);
        }
    }
}

/// Deterministic low-discrepancy values in `(0, 1)`.
fn quasi(i: usize, dim: usize) -> f64 {
    const STEPS: [f64; 4] = [
        0.618_033_988_749_894_8,
        0.414_213_562_373_095_1,
        0.732_050_807_568_877_2,
        0.236_067_977_499_789_7,
    ];
    ((i + 1) as f64 * STEPS[dim % 4]).fract()
}

/// A rate in `[0.05, 0.95]`.
fn rate(i: usize, dim: usize) -> f64 {
    0.05 + 0.9 * quasi(i, dim)
}

fn stationary(a: f64, b: f64) -> Result<KineticsParams> {
    Ok(KineticsParams::stationary(a, b)?)
}

fn simple_quarter() -> DispersionModel {
    DispersionModel::SimpleRw {
        alpha: 0.25,
        beta: 0.25,
    }
}

fn ff_quarter() -> DispersionModel {
    DispersionModel::FortyFive {
        alpha: 0.25,
        beta: 0.25,
    }
}

fn occupation_oracle(_: &Context) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let inits = [
        InitialDistribution::Stationary,
        InitialDistribution::Free,
        InitialDistribution::Adsorbed,
    ];
    for a in [0.1, 0.5, 0.9] {
        for b in [0.1, 0.5, 0.9] {
            for init in inits {
                let params = KineticsParams::new(a, b, init)?;
                for n in 1..=10 {
                    let fast = params.occupation_pmf(n)?;
                    let slow = enumerate_occupation(&params, n);
                    for (p, q) in fast.probs().iter().zip(&slow) {
                        worst = worst.max((p - q).abs());
                    }
                }
            }
        }
    }
    Ok(Outcome::new(worst <= 1e-13, format!("max |recurrence - enumeration| = {worst:.3e}")))
}

fn normalization(ctx: &Context) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for (a, b) in REFERENCE_RATES {
        let k = stationary(a, b)?;
        for model in [simple_quarter(), ff_quarter()] {
            let mut pmf = model.joint_pmf(&k, 50)?;
            ctx.perturb(&mut pmf);
            worst = worst.max((pmf.total_mass() - 1.0).abs());
        }
    }
    let k = stationary(0.01, 0.01)?;
    let nn = DispersionModel::NearestNeighbor { xi: 0.2 }.joint_pmf(&k, 25)?;
    worst = worst.max((nn.total_mass() - 1.0).abs());
    let lattice_ok = worst <= 1e-10;

    let mut gauss_worst: f64 = 0.0;
    for (a, b) in REFERENCE_RATES {
        let g = GaussianModel::new(stationary(a, b)?, 0.25, 0.25, 50)?;
        gauss_worst = gauss_worst.max((g.total_mass_by_quadrature() - 1.0).abs());
    }
    Ok(Outcome::new(
        lattice_ok && gauss_worst <= 1e-6,
        format!("lattice |mass - 1| = {worst:.3e}, gaussian |mass - 1| = {gauss_worst:.3e}"),
    ))
}

fn engine_agreement(ctx: &Context) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for i in 0..6 {
        let k = KineticsParams::stationary(rate(i, 0), rate(i, 1))?;
        let alpha = 0.5 * quasi(i, 2);
        let beta = 0.5 - alpha;
        let n = 5 + 5 * i;
        for model in [
            DispersionModel::SimpleRw { alpha, beta },
            DispersionModel::FortyFive { alpha, beta },
        ] {
            let mut closed = model.joint_pmf(&k, n)?;
            ctx.perturb(&mut closed);
            let table = convolve_powers(&model.step_distribution()?, n)?;
            let engine = mixture_pmf(&table, &k.occupation_pmf(n)?)?;
            worst = worst.max(closed.max_abs_diff(&engine));
        }
    }
    Ok(Outcome::new(worst <= 1e-10, format!("max |closed form - convolution| = {worst:.3e}")))
}

fn symmetry(ctx: &Context) -> Result<Outcome> {
    if ((ctx.a + ctx.b) - 1.0).abs() > 1e-12 {
        bail!(kplume::Error::InvalidConfig(format!(
            "the symmetry check needs a + b = 1, got a = {}, b = {}",
            ctx.a, ctx.b
        )));
    }
    let n = 50;
    let curve = simple_quarter().condvar(&stationary(ctx.a, ctx.b)?, n)?;
    let dev = curve.reflection_deviation(n as i64);
    let complete = (0..=2 * n as i64).all(|x| curve.get(x).is_some());
    Ok(Outcome::new(
        dev <= 1e-9 && complete,
        format!("max |Var(n+x) - Var(n-x)| = {dev:.3e} (a = {}, b = {})", ctx.a, ctx.b),
    ))
}

fn asym_symmetry(_: &Context) -> Result<Outcome> {
    let mut worst = [0.0f64; 2];
    for i in 0..20 {
        let w: Vec<f64> = (0..4).map(|d| 0.05 + quasi(i, d)).collect();
        let s: f64 = w.iter().sum();
        let walk = AsymmetricWalkParams::new(w[0] / s, w[1] / s, w[2] / s, 1.0 - (w[0] + w[1] + w[2]) / s)?;
        let n = 1 + i % 15;
        for (slot, route) in [AsymRoute::ClosedForm, AsymRoute::Convolution].into_iter().enumerate() {
            worst[slot] = worst[slot].max(check_conditional_symmetry(&walk, n, route)?);
        }
    }
    Ok(Outcome::new(
        worst[0] <= 1e-12 && worst[1] <= 1e-12,
        format!("closed form {:.3e}, convolution {:.3e}", worst[0], worst[1]),
    ))
}

fn ff45_monotone(_: &Context) -> Result<Outcome> {
    let mut worst = f64::INFINITY;
    for (a, b) in REFERENCE_RATES {
        let curve = condvar_45(&stationary(a, b)?, 0.25, 0.25, 50)?;
        worst = worst.min(curve.min_increment().unwrap_or(0.0));
    }
    for i in 0..10 {
        let alpha = 0.05 + 0.4 * quasi(i, 3);
        let k = KineticsParams::stationary(rate(i, 1), rate(i, 2))?;
        let curve = condvar_45(&k, alpha, 0.5 - alpha, 15 + 5 * (i % 10))?;
        worst = worst.min(curve.min_increment().unwrap_or(0.0));
    }
    Ok(Outcome::new(worst >= -1e-10, format!("smallest increment = {worst:.3e}")))
}

fn gauss_monotone(_: &Context) -> Result<Outcome> {
    let mut worst = f64::INFINITY;
    for (a, b) in REFERENCE_RATES {
        let g = GaussianModel::new(stationary(a, b)?, 0.25, 0.25, 50)?;
        let (_, hi) = g.default_domain();
        let mut prev = None;
        for x in GaussianModel::grid(0.0, hi, 0.01) {
            let v = g.condvar(x)?;
            if let Some(p) = prev {
                worst = worst.min(v - p);
            }
            prev = Some(v);
        }
    }
    Ok(Outcome::new(worst >= -1e-9, format!("smallest increment on x >= 0 = {worst:.3e}")))
}

fn simple_dip(_: &Context) -> Result<Outcome> {
    let curve = simple_quarter().condvar(&stationary(0.01, 0.01)?, 50)?;
    Ok(match curve.find_decrease(1e-6) {
        Some((x1, x2)) => Outcome::new(
            true,
            format!(
                "Var({x2}) = {:.6} < Var({x1}) = {:.6}",
                curve.variance(x2).unwrap_or(f64::NAN),
                curve.variance(x1).unwrap_or(f64::NAN)
            ),
        ),
        None => Outcome::new(false, "curve is nondecreasing".into()),
    })
}

fn double_peak(_: &Context) -> Result<Outcome> {
    let k = stationary(0.01, 0.01)?;
    let occupation = k.occupation_pmf(50)?.modes().count();
    let marginal: Vec<f64> = simple_quarter().joint_pmf(&k, 50)?.marginal_x().into_values().collect();
    let peaks = count_modes(&marginal).count();
    Ok(Outcome::new(
        occupation >= 2 && peaks >= 2,
        format!("modes of f_50: {occupation}, peaks of the x-marginal: {peaks}"),
    ))
}

fn total_variance(ctx: &Context) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let models = [simple_quarter(), ff_quarter(), DispersionModel::NearestNeighbor { xi: 0.2 }];
    for (a, b) in REFERENCE_RATES {
        let k = stationary(a, b)?;
        for model in &models {
            for n in [1, 7, 25, 50] {
                let mut pmf = model.joint_pmf(&k, n)?;
                ctx.perturb(&mut pmf);
                let expected = model.vertical_step_variance() * k.occupation_pmf(n)?.mean();
                worst = worst.max((pmf.second_moment_y() - expected).abs());
            }
        }
    }
    Ok(Outcome::new(worst <= 1e-10, format!("max |E[S_Y^2] - Var(Y_1) E[K_n]| = {worst:.3e}")))
}

fn nn_identity(_: &Context) -> Result<Outcome> {
    let xi = 0.2;
    let mut worst: f64 = 0.0;
    for (a, b) in REFERENCE_RATES {
        let k = stationary(a, b)?;
        let nn = condvar_nn(&k, xi, 25)?;
        let ff = condvar_45(&k, 0.25, 0.25, 25)?;
        if nn.len() != ff.len() {
            return Ok(Outcome::new(false, "column sets differ".into()));
        }
        for (p, q) in nn.entries().iter().zip(ff.entries()) {
            if p.x != q.x {
                return Ok(Outcome::new(false, "column sets differ".into()));
            }
            worst = worst.max((p.cond_var - 4.0 * xi * q.cond_var).abs());
        }
    }
    let dip = condvar_nn(&stationary(0.01, 0.01)?, xi, 25)?.find_decrease(1e-6);
    Ok(Outcome::new(
        worst <= 1e-10,
        format!(
            "max |Var_nn - 4 xi Var_45| = {worst:.3e}; decrease in the nearest-neighbour curve: {}",
            if dip.is_some() { "yes" } else { "none" }
        ),
    ))
}

fn mc_concordance(ctx: &Context) -> Result<Outcome> {
    let mut worst_tv: f64 = 0.0;
    let mut worst_z: f64 = 0.0;
    for (a, b) in REFERENCE_RATES {
        let k = stationary(a, b)?;
        let exact = simple_quarter().joint_pmf(&k, 50)?;
        let config = SimulationConfig {
            model: SimModel::Lattice {
                dispersion: simple_quarter(),
            },
            kinetics: k,
            n: 50,
            particles: ctx.particles,
            seed: ctx.seed,
            bin_width: DEFAULT_BIN_WIDTH,
        };
        let summary = simulate(&config)?;
        worst_tv = worst_tv.max(total_variation(&summary, &exact));
        for (&x, stats) in &summary.columns {
            if stats.count < 1000 {
                continue;
            }
            let (mut m0, mut m2, mut m4) = (0.0, 0.0, 0.0);
            for (pt, p) in exact.iter().filter(|(pt, _)| pt.x == x) {
                let y2 = (pt.y * pt.y) as f64;
                m0 += p;
                m2 += p * y2;
                m4 += p * y2 * y2;
            }
            if m0 <= 0.0 {
                worst_z = f64::INFINITY;
                continue;
            }
            let z = variance_z_score(stats.variance(), stats.count, m2 / m0, m4 / m0);
            worst_z = worst_z.max(z);
        }
    }
    Ok(Outcome::new(
        worst_tv <= 0.02 && worst_z <= 4.0,
        format!("max TV = {worst_tv:.4}, max |variance error| / SE = {worst_z:.2}"),
    ))
}

/// Standardised error of a column's sample variance. `population` is the
/// biased (divide by `count`) estimate; the exact conditional moments give
/// the finite-sample variance of the unbiased estimator for a zero-mean
/// column: `mu4 / N - sigma^4 (N - 3) / (N (N - 1))`.
pub fn variance_z_score(population: f64, count: u64, var: f64, mu4: f64) -> f64 {
    let n = count as f64;
    let unbiased = population * n / (n - 1.0);
    let spread = (mu4 / n - var * var * (n - 3.0) / (n * (n - 1.0))).max(0.0).sqrt();
    let err = (unbiased - var).abs();
    if spread > 0.0 {
        err / spread
    } else if err <= 1e-12 * var.max(1.0) {
        0.0
    } else {
        f64::INFINITY
    }
}

fn dispatch(name: &str, ctx: &Context) -> Result<Outcome> {
    match name {
        "occupation-oracle" => occupation_oracle(ctx),
        "normalization" => normalization(ctx),
        "engine-agreement" => engine_agreement(ctx),
        "symmetry" => symmetry(ctx),
        "asym-symmetry" => asym_symmetry(ctx),
        "ff45-monotone" => ff45_monotone(ctx),
        "gauss-monotone" => gauss_monotone(ctx),
        "simple-dip" => simple_dip(ctx),
        "double-peak" => double_peak(ctx),
        "total-variance" => total_variance(ctx),
        "nn-identity" => nn_identity(ctx),
        "mc-concordance" => mc_concordance(ctx),
        other => unreachable!("unknown check {other}"),
    }
}

pub fn run(args: &VerifyArgs) -> Result<Status> {
    for name in &args.only {
        if !CHECKS.contains(&name.as_str()) {
            bail!(kplume::Error::InvalidConfig(format!(
                "unknown check `{name}` (available: {})",
                CHECKS.join(", ")
            )));
        }
    }
    let selected: Vec<&str> = CHECKS
        .iter()
        .copied()
        .filter(|c| args.only.is_empty() || args.only.iter().any(|o| o == c))
        .collect();
    let ctx = Context {
        a: args.a,
        b: args.b,
        inject_fault: args.inject_fault,
        particles: args.particles,
        seed: args.seed,
    };

    let mut report = String::new();
    let mut failures = 0;
    for name in &selected {
        let outcome = dispatch(name, &ctx)?;
        if !outcome.passed {
            failures += 1;
        }
        let line = format!(
            "{} {name}: {}",
            if outcome.passed { "PASS" } else { "FAIL" },
            outcome.detail
        );
        println!("{line}");
        let _ = writeln!(report, "{line}");
    }
    let summary = format!("{} of {} checks passed", selected.len() - failures, selected.len());
    println!("{summary}");
    let _ = writeln!(report, "{summary}");

    if let Some(dir) = &args.out {
        let mut w = Writer::new(dir, Default::default())?;
        w.raw("verify_report.txt", &report)?;
        let cmd = crate::args::Command::Verify(args.clone());
        w.finish(
            "verify",
            recorded_args(&cmd)?,
            json!({ "checks": selected }),
            Some(args.seed),
        )?;
    }
    Ok(if failures == 0 { 0 } else { 1 })
}
