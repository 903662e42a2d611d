//! Brute-force reference computations.
//!
//! Everything here enumerates individual sample paths and multiplies their
//! probabilities, sharing no code with the recurrences, closed forms or the
//! convolution engine. Costs grow exponentially; keep `n` small.

use std::collections::BTreeMap;

use crate::kinetics::KineticsParams;
use crate::lattice::AsymmetricWalkParams;

/// `P(K_n = k)` by enumerating all `2^n` free/adsorbed paths.
pub fn enumerate_occupation(params: &KineticsParams, n: usize) -> Vec<f64> {
    assert!((1..=24).contains(&n), "path enumeration needs 1 <= n <= 24");
    let (pf, pa) = params.initial();
    let (a, b) = (params.a(), params.b());
    let mut out = vec![0.0; n + 1];
    for mask in 0u32..(1u32 << n) {
        // bit t set means free at step t
        let free = |t: usize| mask >> t & 1 == 1;
        let mut p = if free(0) { pf } else { pa };
        for t in 1..n {
            p *= match (free(t - 1), free(t)) {
                (true, true) => 1.0 - a,
                (true, false) => a,
                (false, true) => b,
                (false, false) => 1.0 - b,
            };
        }
        out[mask.count_ones() as usize] += p;
    }
    out
}

/// Law of the position after `n` steps by enumerating every chain path and
/// every sequence of free-step outcomes. `steps` holds the (already
/// advected) displacement of a free step with its probability.
pub fn enumerate_plume(
    params: &KineticsParams,
    steps: &[(i64, i64, f64)],
    n: usize,
) -> BTreeMap<(i64, i64), f64> {
    fn walk(
        params: &KineticsParams,
        steps: &[(i64, i64, f64)],
        remaining: usize,
        free: bool,
        pos: (i64, i64),
        p: f64,
        out: &mut BTreeMap<(i64, i64), f64>,
    ) {
        let mut branches: Vec<((i64, i64), f64)> = Vec::new();
        if free {
            for &(dx, dy, q) in steps {
                branches.push(((pos.0 + dx, pos.1 + dy), p * q));
            }
        } else {
            branches.push((pos, p));
        }
        for (next, q) in branches {
            if remaining == 1 {
                *out.entry(next).or_insert(0.0) += q;
                continue;
            }
            let (stay, leave) = if free {
                (1.0 - params.a(), params.a())
            } else {
                (1.0 - params.b(), params.b())
            };
            walk(params, steps, remaining - 1, free, next, q * stay, out);
            walk(params, steps, remaining - 1, !free, next, q * leave, out);
        }
    }

    assert!(n >= 1);
    let (pf, pa) = params.initial();
    let mut out = BTreeMap::new();
    walk(params, steps, n, true, (0, 0), pf, &mut out);
    walk(params, steps, n, false, (0, 0), pa, &mut out);
    out
}

/// `E[K_n | S_X(n) = x]` by the same exhaustive enumeration as
/// [`enumerate_plume`], keyed by `x`.
pub fn enumerate_conditional_occupation(
    params: &KineticsParams,
    steps: &[(i64, i64, f64)],
    n: usize,
) -> BTreeMap<i64, f64> {
    // track (x, k) jointly
    let mut joint: BTreeMap<(i64, usize), f64> = BTreeMap::new();
    let (pf, pa) = params.initial();
    let mut frontier: Vec<(bool, i64, usize, f64)> = vec![(true, 0, 0, pf), (false, 0, 0, pa)];
    for t in 0..n {
        let mut next = Vec::new();
        for (free, x, k, p) in frontier {
            let moved: Vec<(i64, usize, f64)> = if free {
                steps.iter().map(|&(dx, _, q)| (x + dx, k + 1, p * q)).collect()
            } else {
                vec![(x, k, p)]
            };
            for (x2, k2, q) in moved {
                if t + 1 == n {
                    *joint.entry((x2, k2)).or_insert(0.0) += q;
                } else {
                    let (stay, leave) = if free {
                        (1.0 - params.a(), params.a())
                    } else {
                        (1.0 - params.b(), params.b())
                    };
                    next.push((free, x2, k2, q * stay));
                    next.push((!free, x2, k2, q * leave));
                }
            }
        }
        frontier = next;
    }
    let mut num: BTreeMap<i64, f64> = BTreeMap::new();
    let mut den: BTreeMap<i64, f64> = BTreeMap::new();
    for ((x, k), p) in joint {
        *num.entry(x).or_insert(0.0) += k as f64 * p;
        *den.entry(x).or_insert(0.0) += p;
    }
    num.into_iter()
        .filter(|(x, _)| den[x] > 0.0)
        .map(|(x, v)| (x, v / den[&x]))
        .collect()
}

/// Law of the planar asymmetric walk after `n` steps by enumerating all
/// `4^n` step sequences.
pub fn enumerate_asymmetric(walk: &AsymmetricWalkParams, n: usize) -> BTreeMap<(i64, i64), f64> {
    assert!(n <= 12, "4^n enumeration needs n <= 12");
    let steps = [
        ((1, 0), walk.omega()),
        ((-1, 0), walk.epsilon()),
        ((0, 1), walk.gamma()),
        ((0, -1), walk.delta()),
    ];
    let mut out = BTreeMap::new();
    for code in 0u64..(1u64 << (2 * n)) {
        let (mut x, mut y, mut p) = (0i64, 0i64, 1.0f64);
        for t in 0..n {
            let ((dx, dy), q) = steps[(code >> (2 * t) & 3) as usize];
            x += dx;
            y += dy;
            p *= q;
        }
        *out.entry((x, y)).or_insert(0.0) += p;
    }
    out
}
