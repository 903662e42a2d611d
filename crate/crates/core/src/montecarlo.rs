//! Seeded particle simulation, used as a stochastic oracle for every model.
//!
//! Particle `i` draws from ChaCha8 keyed by `seed` on stream `i`, so each
//! particle's path is fixed by `(seed, i)` alone. Particles are processed in
//! fixed-size chunks whose partial results are merged in chunk order, which
//! makes the summary bitwise independent of the worker count.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinetics::KineticsParams;
use crate::lattice::{DispersionModel, LatticePmf, Point};
use crate::numeric::CompensatedSum;

pub const DEFAULT_BIN_WIDTH: f64 = 0.1;
const CHUNK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SimModel {
    Lattice { dispersion: DispersionModel },
    Gaussian { alpha: f64, beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub model: SimModel,
    pub kinetics: KineticsParams,
    pub n: usize,
    pub particles: u64,
    pub seed: u64,
    /// Width of the `x` bins (and `y` bins of the histogram) for the
    /// Gaussian model; ignored on the lattice.
    pub bin_width: f64,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.particles == 0 {
            return Err(Error::InvalidConfig("particles must be at least 1".into()));
        }
        if self.n == 0 {
            return Err(Error::ZeroSteps);
        }
        match self.model {
            SimModel::Lattice { dispersion } => dispersion.validate(),
            SimModel::Gaussian { alpha, beta } => {
                if !(alpha > 0.0 && beta > 0.0) {
                    return Err(Error::InvalidGaussian { alpha, beta });
                }
                if !(self.bin_width > 0.0 && self.bin_width.is_finite()) {
                    return Err(Error::InvalidConfig(format!(
                        "bin width must be positive, got {}",
                        self.bin_width
                    )));
                }
                Ok(())
            }
        }
    }

    fn is_gaussian(&self) -> bool {
        matches!(self.model, SimModel::Gaussian { .. })
    }
}

/// Streaming count, mean and centred second moment of `y`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ColumnStats {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl ColumnStats {
    pub fn push(&mut self, y: f64) {
        self.count += 1;
        let d = y - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (y - self.mean);
    }

    pub fn merge(&mut self, other: &ColumnStats) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        self.mean += d * other.count as f64 / n;
        self.m2 += other.m2 + d * d * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    /// Population variance `m2 / count`.
    pub fn variance(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.m2 / self.count as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSummary {
    pub config: SimulationConfig,
    /// Lattice: exact end points. Gaussian: `(⌊x/w⌋, ⌊y/w⌋)` bin indices.
    /// Counts sum to the number of particles.
    pub histogram: BTreeMap<Point, u64>,
    /// Conditional `y` statistics per column (lattice) or per `x` bin
    /// (Gaussian; particles sitting on the atom are excluded).
    pub columns: BTreeMap<i64, ColumnStats>,
    /// Particles that were never free.
    pub atom_count: u64,
}

impl EmpiricalSummary {
    pub fn particles(&self) -> u64 {
        self.config.particles
    }

    /// Empirical `P(S_X = x)` (lattice) or bin frequency (Gaussian).
    pub fn marginal(&self) -> BTreeMap<i64, f64> {
        let n = self.particles() as f64;
        self.columns
            .iter()
            .map(|(&x, s)| (x, s.count as f64 / n))
            .collect()
    }

    /// Relative frequencies as a pmf.
    pub fn empirical_pmf(&self) -> LatticePmf {
        let n = self.particles() as f64;
        LatticePmf::from_map(
            self.config.n,
            self.histogram
                .iter()
                .map(|(&pt, &c)| (pt, c as f64 / n))
                .collect(),
        )
    }

    /// Lower and upper edge of Gaussian bin `index`.
    pub fn bin_bounds(&self, index: i64) -> (f64, f64) {
        let w = self.config.bin_width;
        (index as f64 * w, (index as f64 + 1.0) * w)
    }
}

#[derive(Default)]
struct Partial {
    histogram: BTreeMap<Point, u64>,
    columns: BTreeMap<i64, ColumnStats>,
    atom_count: u64,
}

impl Partial {
    fn merge(&mut self, other: Partial) {
        for (pt, c) in other.histogram {
            *self.histogram.entry(pt).or_insert(0) += c;
        }
        for (x, s) in other.columns {
            self.columns.entry(x).or_default().merge(&s);
        }
        self.atom_count += other.atom_count;
    }
}

enum Sampler {
    Lattice { points: Vec<Point>, cumulative: Vec<f64> },
    Gaussian { x: Normal<f64>, y: Normal<f64> },
}

impl Sampler {
    fn new(model: &SimModel) -> Result<Self> {
        Ok(match *model {
            SimModel::Lattice { dispersion } => {
                let step = dispersion.step_distribution()?;
                let mut acc = 0.0;
                let (points, cumulative) = step
                    .support()
                    .iter()
                    .map(|&(pt, p)| {
                        acc += p;
                        (pt, acc)
                    })
                    .unzip();
                Self::Lattice { points, cumulative }
            }
            SimModel::Gaussian { alpha, beta } => {
                let bad = |_| Error::InvalidGaussian { alpha, beta };
                Self::Gaussian {
                    x: Normal::new(0.0, (2.0 * alpha).sqrt()).map_err(bad)?,
                    y: Normal::new(0.0, (2.0 * beta).sqrt()).map_err(bad)?,
                }
            }
        })
    }
}

/// Runs one particle, returning its end position and number of free steps.
fn run_particle<R: Rng>(
    rng: &mut R,
    kinetics: &KineticsParams,
    sampler: &Sampler,
    n: usize,
) -> ((f64, f64), (i64, i64), usize) {
    let (pf, _) = kinetics.initial();
    let (a, b) = (kinetics.a(), kinetics.b());
    let mut free = rng.random::<f64>() < pf;
    let (mut xr, mut yr) = (0.0f64, 0.0f64);
    let (mut xi, mut yi) = (0i64, 0i64);
    let mut free_steps = 0;
    for t in 0..n {
        if free {
            free_steps += 1;
            match sampler {
                Sampler::Lattice { points, cumulative } => {
                    let u = rng.random::<f64>();
                    let idx = cumulative
                        .iter()
                        .position(|&c| u < c)
                        .unwrap_or(points.len() - 1);
                    xi += points[idx].x;
                    yi += points[idx].y;
                }
                Sampler::Gaussian { x, y } => {
                    xr += 1.0 + x.sample(rng);
                    yr += y.sample(rng);
                }
            }
        }
        if t + 1 < n {
            let u = rng.random::<f64>();
            free = if free { u >= a } else { u < b };
        }
    }
    ((xr, yr), (xi, yi), free_steps)
}

pub fn simulate(config: &SimulationConfig) -> Result<EmpiricalSummary> {
    config.validate()?;
    let sampler = Sampler::new(&config.model)?;
    let base = ChaCha8Rng::seed_from_u64(config.seed);
    let chunks = config.particles.div_ceil(CHUNK);
    let gaussian = config.is_gaussian();
    let w = config.bin_width;

    let partials: Vec<Partial> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut part = Partial::default();
            let end = ((c + 1) * CHUNK).min(config.particles);
            for i in c * CHUNK..end {
                let mut rng = base.clone();
                rng.set_stream(i);
                let ((xr, yr), (xi, yi), free_steps) =
                    run_particle(&mut rng, &config.kinetics, &sampler, config.n);
                let atom = free_steps == 0;
                if atom {
                    part.atom_count += 1;
                }
                if gaussian {
                    let bx = (xr / w).floor() as i64;
                    let by = (yr / w).floor() as i64;
                    *part.histogram.entry(Point::new(bx, by)).or_insert(0) += 1;
                    if !atom {
                        part.columns.entry(bx).or_default().push(yr);
                    }
                } else {
                    *part.histogram.entry(Point::new(xi, yi)).or_insert(0) += 1;
                    part.columns.entry(xi).or_default().push(yi as f64);
                }
            }
            part
        })
        .collect();

    let mut total = Partial::default();
    for p in partials {
        total.merge(p);
    }
    Ok(EmpiricalSummary {
        config: *config,
        histogram: total.histogram,
        columns: total.columns,
        atom_count: total.atom_count,
    })
}

/// `½ Σ |p̂ - p|` over the union of both supports.
pub fn total_variation(empirical: &EmpiricalSummary, exact: &LatticePmf) -> f64 {
    let n = empirical.particles() as f64;
    let mut acc = CompensatedSum::new();
    for (pt, p) in exact.iter() {
        let c = empirical.histogram.get(&pt).copied().unwrap_or(0);
        acc.add((c as f64 / n - p).abs());
    }
    for (pt, &c) in &empirical.histogram {
        if !exact.contains(*pt) {
            acc.add(c as f64 / n);
        }
    }
    0.5 * acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::InitialDistribution;
    use crate::lattice::joint_pmf_simple;

    fn config(model: SimModel, kinetics: KineticsParams, n: usize, particles: u64) -> SimulationConfig {
        SimulationConfig {
            model,
            kinetics,
            n,
            particles,
            seed: 42,
            bin_width: DEFAULT_BIN_WIDTH,
        }
    }

    #[test]
    fn permanently_adsorbed_particles_stay_home() {
        let k = KineticsParams::new(0.3, 0.0, InitialDistribution::Adsorbed).unwrap();
        for model in [
            SimModel::Lattice { dispersion: DispersionModel::SimpleRw { alpha: 0.25, beta: 0.25 } },
            SimModel::Lattice { dispersion: DispersionModel::NearestNeighbor { xi: 0.1 } },
            SimModel::Gaussian { alpha: 0.25, beta: 0.25 },
        ] {
            let s = simulate(&config(model, k, 10, 1000)).unwrap();
            assert_eq!(s.histogram.len(), 1);
            assert_eq!(s.histogram[&Point::ORIGIN], 1000);
            assert_eq!(s.atom_count, 1000);
        }
    }

    #[test]
    fn histogram_counts_every_particle() {
        let k = KineticsParams::stationary(0.2, 0.3).unwrap();
        for model in [
            SimModel::Lattice { dispersion: DispersionModel::FortyFive { alpha: 0.2, beta: 0.3 } },
            SimModel::Gaussian { alpha: 0.25, beta: 0.5 },
        ] {
            let s = simulate(&config(model, k, 7, 10_001)).unwrap();
            assert_eq!(s.histogram.values().sum::<u64>(), 10_001);
        }
    }

    #[test]
    fn same_seed_same_summary_regardless_of_threads() {
        let k = KineticsParams::stationary(0.1, 0.1).unwrap();
        let cfg = config(SimModel::Gaussian { alpha: 0.25, beta: 0.25 }, k, 10, 20_000);
        let a = simulate(&cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| simulate(&cfg).unwrap());
        assert_eq!(a, b);
        let mut other = cfg;
        other.seed += 1;
        assert_ne!(simulate(&other).unwrap(), a);
    }

    #[test]
    fn total_variation_range() {
        let k = KineticsParams::stationary(0.01, 0.01).unwrap();
        let exact = joint_pmf_simple(&k, 0.25, 0.25, 50).unwrap();
        let model = SimModel::Lattice { dispersion: DispersionModel::SimpleRw { alpha: 0.25, beta: 0.25 } };
        let s = simulate(&config(model, k, 50, 10)).unwrap();
        let tv = total_variation(&s, &exact);
        assert!((0.0..=1.0).contains(&tv));
    }

    #[test]
    fn exact_summary_has_zero_distance() {
        // a summary whose frequencies equal the exact pmf
        let exact = LatticePmf::from_map(
            1,
            [(Point::new(0, 0), 0.25), (Point::new(2, 0), 0.75)].into_iter().collect(),
        );
        let k = KineticsParams::stationary(0.5, 0.5).unwrap();
        let model = SimModel::Lattice { dispersion: DispersionModel::SimpleRw { alpha: 0.5, beta: 0.0 } };
        let summary = EmpiricalSummary {
            config: config(model, k, 1, 4),
            histogram: [(Point::new(0, 0), 1), (Point::new(2, 0), 3)].into_iter().collect(),
            columns: BTreeMap::new(),
            atom_count: 0,
        };
        assert_eq!(total_variation(&summary, &exact), 0.0);
    }

    #[test]
    fn welford_merge_matches_single_pass() {
        let ys: Vec<f64> = (0..100).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let mut whole = ColumnStats::default();
        ys.iter().for_each(|&y| whole.push(y));
        let (mut l, mut r) = (ColumnStats::default(), ColumnStats::default());
        ys[..40].iter().for_each(|&y| l.push(y));
        ys[40..].iter().for_each(|&y| r.push(y));
        l.merge(&r);
        assert_eq!(l.count, whole.count);
        assert!((l.mean - whole.mean).abs() < 1e-12);
        assert!((l.variance() - whole.variance()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_configs() {
        let k = KineticsParams::stationary(0.1, 0.1).unwrap();
        let g = SimModel::Gaussian { alpha: 0.25, beta: 0.25 };
        assert!(simulate(&config(g, k, 5, 0)).is_err());
        let mut c = config(g, k, 5, 10);
        c.bin_width = 0.0;
        assert!(simulate(&c).is_err());
    }
}
