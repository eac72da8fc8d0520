//! Commutators with Lipschitz functions and the `Commut(L, ε)` bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::function::ScalarFunction;
use super::propagation::{eps_propagation, EpsMode};
use super::LpOperator;
use crate::approx::band_decompose;
use crate::space::Subset;

const SEARCH_TOL: f64 = 1e-9;
/// Heaviest entries whose endpoints seed tent candidates.
const PAIR_SEEDS: usize = 4;

/// Two-sided information about `sup_f ‖[b, f]‖` over real `L`-Lipschitz
/// contractions `f`.
///
/// Complex-valued contractions can raise the supremum by at most a factor 2;
/// the band certificate below holds for them unchanged.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutBound {
    pub lipschitz: f64,
    /// Certified bound, present for band inputs.
    pub upper: Option<f64>,
    /// Attained by `witness`.
    pub lower: f64,
    pub witness: Option<ScalarFunction>,
    /// Number of partial translations used by the certificate.
    pub parts: usize,
}

/// `[f, b] = fb − bf`, with blocks `(f(x) − f(y))·b_{xy}`. The reverse order
/// is `[b, f] = −[f, b]`; both have the same norm.
pub fn commutator(b: &LpOperator, f: &ScalarFunction) -> LpOperator {
    let v = f.values();
    b.schur(|x, y| v[x] - v[y])
}

/// Certified `sup_f ‖[b, f]‖ ≤ L·Σ_k μ_k·r_k` for band `b`.
///
/// Writes `b = Σ_k f_k V_k` with partial translations `V_k` of displacement
/// `r_k` and block multipliers of norm `μ_k`. Each `[f, V_k]` is a weighted
/// partial translation with weights `|f(t(y)) − f(y)| ≤ L·r_k`, and a
/// weighted partial translation has norm equal to its largest weight on
/// every ℓ^p. The sum is at most `K·μ·L·R` with `K` the number of parts.
pub fn commut_bound_band(b: &LpOperator, lipschitz: f64) -> CommutBound {
    let dec = band_decompose(b);
    let total: f64 = dec
        .parts
        .iter()
        .map(|part| {
            let mu = part.multiplier.iter().map(|(_, block)| b.block_norm(block)).fold(0.0, f64::max);
            mu * part.translation.displacement()
        })
        .sum();
    CommutBound { lipschitz, upper: Some(lipschitz * total), lower: 0.0, witness: None, parts: dec.parts.len() }
}

/// `Σ_k μ_k·r_k` from the band decomposition: the certificate per unit `L`.
pub fn commut_weight(b: &LpOperator) -> f64 {
    let bound = commut_bound_band(b, 1.0);
    bound.upper.unwrap_or(0.0)
}

/// Adversarial lower bound for `sup_f ‖[b, f]‖` over `L`-Lipschitz `f` with
/// values in `[0, 1]`.
///
/// Tents `clamp(1 − L·d(·, S))` are tried over seeded candidate sets, then
/// the best one is refined by coordinate moves that keep `f` inside the
/// interval its neighbours allow. `budget` counts norm evaluations.
pub fn commut_search(b: &LpOperator, lipschitz: f64, budget: usize, seed: u64) -> CommutBound {
    let space = b.space().clone();
    let n = space.len();
    let zero_f = ScalarFunction::constant(n, 0.0);
    if lipschitz <= 0.0 || b.is_zero() || budget == 0 {
        return CommutBound { lipschitz, upper: None, lower: 0.0, witness: Some(zero_f), parts: 0 };
    }
    let value = |f: &ScalarFunction| commutator(b, f).opnorm(SEARCH_TOL).lower;
    let mut spent = 0usize;

    let mut candidates: Vec<Subset> = Vec::new();
    let mut weighted: Vec<(f64, usize, usize)> = b
        .blocks()
        .iter()
        .filter(|((x, y), _)| x != y)
        .map(|(&(x, y), block)| (b.block_norm(block) * (lipschitz * space.dist(x, y)).min(1.0), x, y))
        .collect();
    weighted.sort_by(|a, c| c.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(c.1, c.2))));
    for &(_, x, y) in weighted.iter().take(PAIR_SEEDS) {
        candidates.push(Subset::singleton(y));
        candidates.push(Subset::singleton(x));
    }
    if let Ok(e) = eps_propagation(b, 0.0, EpsMode::Bounds, SEARCH_TOL) {
        if !e.cols.is_empty() {
            candidates.push(e.cols);
        }
        if !e.rows.is_empty() {
            candidates.push(e.rows);
        }
    }
    candidates.extend(space.greedy_net((1.0 / lipschitz).max(1.0)).iter().map(Subset::singleton));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..budget {
        candidates.push(Subset::singleton(rng.random_range(0..n)));
    }

    let tent_budget = budget.div_ceil(2);
    let mut best_f = zero_f;
    let mut best = 0.0;
    for set in candidates.iter().take(tent_budget) {
        let f = ScalarFunction::tent(&space, set, lipschitz);
        let v = value(&f);
        spent += 1;
        if v > best {
            best = v;
            best_f = f;
        }
    }

    // Coordinate refinement over points touched by off-diagonal blocks.
    let mut active: Vec<usize> = weighted.iter().flat_map(|&(_, x, y)| [x, y]).collect();
    active.sort_unstable();
    active.dedup();
    'outer: while spent < budget {
        let mut improved = false;
        for &x in &active {
            let (lo, hi) = admissible_interval(&space, &best_f, x, lipschitz);
            for target in [lo, hi] {
                if spent >= budget {
                    break 'outer;
                }
                if (target - best_f.values()[x]).abs() < 1e-15 {
                    continue;
                }
                let mut f = best_f.clone();
                f.values_mut()[x] = target;
                let v = value(&f);
                spent += 1;
                if v > best * (1.0 + 1e-12) {
                    best = v;
                    best_f = f;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    CommutBound { lipschitz, upper: None, lower: best, witness: Some(best_f), parts: 0 }
}

/// Values `f(x)` may take without breaking the `L`-Lipschitz condition
/// against the other points, intersected with `[0, 1]`.
fn admissible_interval(space: &crate::space::MetricSpace, f: &ScalarFunction, x: usize, lipschitz: f64) -> (f64, f64) {
    let v = f.values();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for y in 0..space.len() {
        if y == x {
            continue;
        }
        let slack = lipschitz * space.dist(x, y);
        lo = lo.max(v[y] - slack);
        hi = hi.min(v[y] + slack);
    }
    (lo, hi.max(lo))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::exponent::Exponent;
    use crate::linalg::C64;
    use crate::space::{MetricSpace, SpaceSpec};

    fn path(n: usize) -> Arc<MetricSpace> {
        Arc::new(MetricSpace::build(&SpaceSpec::Path { n }).unwrap())
    }

    fn c(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    #[test]
    fn trivial_commutators() {
        let s = path(6);
        let b = LpOperator::random_band(s.clone(), Exponent::TWO, 1, 2.0, 1.0, 1.0, 1).unwrap();
        assert!(commutator(&b, &ScalarFunction::constant(6, 0.4)).is_zero());
        let d = b.band_truncate(0.0);
        assert!(commutator(&d, &ScalarFunction::new(vec![0.0, 0.1, 0.5, 0.2, 1.0, 0.3])).is_zero());
        assert_eq!(commut_bound_band(&d, 0.5).upper, Some(0.0));
    }

    #[test]
    fn single_entry_commutator() {
        let s = path(4);
        let b = LpOperator::from_blocks(s.clone(), Exponent::TWO, 1, [(0, 3, vec![C64::new(0.0, 2.0)])]).unwrap();
        let f = ScalarFunction::new((0..4).map(|x| (x as f64 / 3.0).min(1.0)).collect());
        let cm = commutator(&b, &f);
        assert!((cm.matrix().get(0, 3).norm() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn translation_certificate() {
        let s = path(20);
        let b = LpOperator::from_blocks(s, Exponent::TWO, 1, (0..17).map(|x| (x + 3, x, vec![c(1.0)]))).unwrap();
        let bound = commut_bound_band(&b, 0.1);
        assert_eq!(bound.parts, 1);
        assert!((bound.upper.unwrap() - 0.3).abs() < 1e-15);
        let found = commut_search(&b, 0.1, 40, 0);
        assert!(found.lower <= bound.upper.unwrap() + 1e-12);
    }

    #[test]
    fn tridiagonal_certificate() {
        let s = path(100);
        let b = LpOperator::from_blocks(
            s,
            Exponent::TWO,
            1,
            (0..100).flat_map(|x| {
                let mut v = vec![(x, x, vec![c(1.0)])];
                if x + 1 < 100 {
                    v.push((x, x + 1, vec![c(1.0)]));
                    v.push((x + 1, x, vec![c(1.0)]));
                }
                v
            }),
        )
        .unwrap();
        let bound = commut_bound_band(&b, 0.01);
        // The diagonal part has zero displacement, so the refined sum is 2·L.
        assert!((bound.upper.unwrap() - 0.02).abs() < 1e-15);
        assert!(bound.upper.unwrap() <= 3.0 * 1.0 * 0.01 * 1.0);
        let found = commut_search(&b, 0.01, 60, 5);
        assert!(found.lower <= bound.upper.unwrap() + 1e-12);
        let f = found.witness.unwrap();
        assert!(f.lipschitz_constant(b.space()) <= 0.01 + 1e-12);
    }

    #[test]
    fn tent_attains_single_entry() {
        let s = path(12);
        let b = LpOperator::from_blocks(s.clone(), Exponent::ONE, 1, [(1, 9, vec![c(1.0)])]).unwrap();
        let found = commut_search(&b, 0.1, 20, 3);
        assert!(found.lower >= 0.8 - 1e-12, "{}", found.lower);
        assert_eq!(commut_search(&b, 0.0, 20, 3).lower, 0.0);
    }
}
