use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::numeric::CompensatedSum;

/// Columns whose marginal mass falls below this are left out of curves.
pub const DEFAULT_MASS_THRESHOLD: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }
}

impl std::ops::Add for Point {
    type Output = Point;

    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

/// Sparse probability mass function on integer points, at time `n`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LatticePmf {
    n: usize,
    mass: BTreeMap<Point, f64>,
}

impl LatticePmf {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            mass: BTreeMap::new(),
        }
    }

    pub fn point_mass(n: usize, at: Point) -> Self {
        let mut pmf = Self::new(n);
        pmf.mass.insert(at, 1.0);
        pmf
    }

    pub fn from_map(n: usize, mass: BTreeMap<Point, f64>) -> Self {
        Self { n, mass }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn get(&self, x: i64, y: i64) -> f64 {
        self.mass.get(&Point::new(x, y)).copied().unwrap_or(0.0)
    }

    pub fn contains(&self, at: Point) -> bool {
        self.mass.contains_key(&at)
    }

    pub fn insert(&mut self, at: Point, p: f64) {
        self.mass.insert(at, p);
    }

    pub fn add(&mut self, at: Point, p: f64) {
        *self.mass.entry(at).or_insert(0.0) += p;
    }

    /// Points in `(x, y)` order.
    pub fn iter(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        self.mass.iter().map(|(&pt, &p)| (pt, p))
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.mass.keys().copied()
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.values().copied().collect::<CompensatedSum>().value()
    }

    /// `P(S_X = x)` for every occupied column.
    pub fn marginal_x(&self) -> BTreeMap<i64, f64> {
        let mut acc: BTreeMap<i64, CompensatedSum> = BTreeMap::new();
        for (pt, p) in self.iter() {
            acc.entry(pt.x).or_default().add(p);
        }
        acc.into_iter().map(|(x, s)| (x, s.value())).collect()
    }

    /// `Σ y² P(x, y)`.
    pub fn second_moment_y(&self) -> f64 {
        self.iter()
            .map(|(pt, p)| (pt.y * pt.y) as f64 * p)
            .collect::<CompensatedSum>()
            .value()
    }

    pub fn min_mass(&self) -> f64 {
        self.mass.values().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest pointwise difference over the union of both supports.
    pub fn max_abs_diff(&self, other: &LatticePmf) -> f64 {
        let mut worst: f64 = 0.0;
        for (pt, p) in self.iter() {
            worst = worst.max((p - other.get(pt.x, pt.y)).abs());
        }
        for (pt, q) in other.iter() {
            if !self.mass.contains_key(&pt) {
                worst = worst.max(q.abs());
            }
        }
        worst
    }

    /// Column-wise conditional mean and variance of `y`.
    pub fn condvar_curve(&self, threshold: f64) -> CondVarCurve {
        let mut columns: BTreeMap<i64, Vec<(i64, f64)>> = BTreeMap::new();
        for (pt, p) in self.iter() {
            columns.entry(pt.x).or_default().push((pt.y, p));
        }
        let entries = columns
            .into_iter()
            .filter_map(|(x, cells)| {
                let mass = cells.iter().map(|c| c.1).collect::<CompensatedSum>().value();
                if !(mass > 0.0) || mass < threshold {
                    return None;
                }
                let mean = cells
                    .iter()
                    .map(|&(y, p)| y as f64 * p)
                    .collect::<CompensatedSum>()
                    .value()
                    / mass;
                let var = cells
                    .iter()
                    .map(|&(y, p)| (y as f64 - mean).powi(2) * p)
                    .collect::<CompensatedSum>()
                    .value()
                    / mass;
                Some(CondVarEntry {
                    x,
                    marginal: mass,
                    cond_mean: mean,
                    cond_var: var,
                })
            })
            .collect();
        CondVarCurve::new(entries)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CondVarEntry {
    pub x: i64,
    pub marginal: f64,
    pub cond_mean: f64,
    pub cond_var: f64,
}

/// `x ↦ (P(S_X = x), E[S_Y | S_X = x], Var(S_Y | S_X = x))` over the
/// columns with non-negligible mass, in increasing `x`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CondVarCurve {
    entries: Vec<CondVarEntry>,
}

impl CondVarCurve {
    pub fn new(mut entries: Vec<CondVarEntry>) -> Self {
        entries.sort_by_key(|e| e.x);
        Self { entries }
    }

    pub fn entries(&self) -> &[CondVarEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, x: i64) -> Option<&CondVarEntry> {
        self.entries
            .binary_search_by_key(&x, |e| e.x)
            .ok()
            .map(|i| &self.entries[i])
    }

    pub fn variance(&self, x: i64) -> Option<f64> {
        self.get(x).map(|e| e.cond_var)
    }

    pub fn total_marginal(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.marginal)
            .collect::<CompensatedSum>()
            .value()
    }

    /// Smallest `Var(x_{i+1}) - Var(x_i)` over consecutive entries.
    pub fn min_increment(&self) -> Option<f64> {
        self.entries
            .windows(2)
            .map(|w| w[1].cond_var - w[0].cond_var)
            .reduce(f64::min)
    }

    pub fn is_nondecreasing(&self, slack: f64) -> bool {
        self.min_increment().is_none_or(|d| d >= -slack)
    }

    /// A pair `x1 < x2` with `Var(x2) < Var(x1) - gap`, if one exists. The
    /// returned `x1` is the running maximiser, so the drop is the largest
    /// one ending at `x2`.
    pub fn find_decrease(&self, gap: f64) -> Option<(i64, i64)> {
        let mut best: Option<&CondVarEntry> = None;
        for e in &self.entries {
            if let Some(b) = best {
                if e.cond_var < b.cond_var - gap {
                    return Some((b.x, e.x));
                }
            }
            if best.is_none_or(|b| e.cond_var > b.cond_var) {
                best = Some(e);
            }
        }
        None
    }

    /// `max_d |Var(center + d) - Var(center - d)|` over all `d` where both
    /// sides are present.
    pub fn reflection_deviation(&self, center: i64) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.x >= center)
            .filter_map(|e| {
                let mirror = self.variance(2 * center - e.x)?;
                Some((e.cond_var - mirror).abs())
            })
            .fold(0.0, f64::max)
    }

    pub fn max_abs_mean(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.cond_mean.abs())
            .fold(0.0, f64::max)
    }

    /// Largest variance difference, or `None` if the curves cover different
    /// columns.
    pub fn max_var_diff(&self, other: &CondVarCurve) -> Option<f64> {
        if self.entries.len() != other.entries.len() {
            return None;
        }
        let mut worst: f64 = 0.0;
        for (a, b) in self.entries.iter().zip(&other.entries) {
            if a.x != b.x {
                return None;
            }
            worst = worst.max((a.cond_var - b.cond_var).abs());
        }
        Some(worst)
    }
}
