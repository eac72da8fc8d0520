//! The profile `ν(R) = sup { ‖χ_A b χ_B‖ : d(A,B) > R }`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::LpOperator;
use crate::error::{Error, Result};
use crate::linalg::{self, SparseMatrix, C64};
use crate::space::Subset;

/// Largest space for exhaustive enumeration of column sets.
pub const EXACT_LIMIT: usize = 20;
/// Local set moves for general p are attempted up to this many points.
const LOCAL_MOVE_LIMIT: usize = 64;
const LOCAL_MOVE_PASSES: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsMode {
    /// Enumerate every column set `B` (n ≤ 20).
    ExactSmall,
    /// Exact for p ∈ {1, ∞}; certified interval otherwise.
    Bounds,
}

/// Which side of a reported interval is certified.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundTag {
    Exact,
    Lower,
    Upper,
}

impl BoundTag {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundTag::Exact => "exact",
            BoundTag::Lower => "lower",
            BoundTag::Upper => "upper",
        }
    }
}

/// Value of `ν(R)` with the corner `(A, B)` attaining `lower`.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsPropagation {
    pub radius: f64,
    pub lower: f64,
    pub upper: f64,
    pub tag: BoundTag,
    pub rows: Subset,
    pub cols: Subset,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub radius: f64,
    pub lower: f64,
    pub upper: f64,
    pub tag: BoundTag,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QuasiLocalityProfile {
    pub entries: Vec<ProfileEntry>,
}

impl QuasiLocalityProfile {
    /// Smallest sampled radius whose certified value is at most `eps`.
    pub fn eps_propagation(&self, eps: f64) -> Option<f64> {
        self.entries.iter().find(|e| e.upper <= eps).map(|e| e.radius)
    }
}

/// Computes `ν(radius)` for `b`.
///
/// For a fixed column set `B` the best row set is the maximal one,
/// `A = {x : d(x,B) > R}`, because enlarging the row set never decreases an
/// induced norm. Exact mode therefore enumerates only `B`.
pub fn eps_propagation(b: &LpOperator, radius: f64, mode: EpsMode, tol: f64) -> Result<EpsPropagation> {
    if !(radius >= 0.0) {
        return Err(Error::Parameter(format!("radius must be non-negative, got {radius}")));
    }
    match mode {
        EpsMode::ExactSmall => exact_small(b, radius),
        EpsMode::Bounds => bounds(b, radius, tol),
    }
}

/// Rows admissible against `cols`: `{x : d(x, cols) > radius}`.
fn far_rows(b: &LpOperator, cols: &Subset, radius: f64) -> Subset {
    let s = b.space();
    Subset::new((0..s.len()).filter(|&x| cols.iter().all(|y| s.dist(x, y) > radius)).collect())
}

fn zero_result(radius: f64) -> EpsPropagation {
    EpsPropagation { radius, lower: 0.0, upper: 0.0, tag: BoundTag::Exact, rows: Subset::default(), cols: Subset::default() }
}

fn exact_small(b: &LpOperator, radius: f64) -> Result<EpsPropagation> {
    let n = b.space().len();
    if n > EXACT_LIMIT {
        return Err(Error::TooLarge { n, limit: EXACT_LIMIT });
    }
    let k = b.k();
    let p = b.p();
    let dense = b.to_dense();
    let space = b.space();
    let mut best = zero_result(radius);
    let exact = p.is_one() || p.is_infinite() || p.is_two();
    best.tag = if exact { BoundTag::Exact } else { BoundTag::Upper };

    for mask in 1u32..(1u32 << n) {
        let cols: Vec<usize> = (0..n).filter(|&y| mask & (1 << y) != 0).collect();
        let rows: Vec<usize> = (0..n).filter(|&x| cols.iter().all(|&y| space.dist(x, y) > radius)).collect();
        if rows.is_empty() {
            continue;
        }
        let sub = DMatrix::from_fn(rows.len() * k, cols.len() * k, |i, j| {
            dense[(rows[i / k] * k + i % k, cols[j / k] * k + j % k)]
        });
        let (lo, hi) = if sub.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            (0.0, 0.0)
        } else if p.is_two() {
            let s = sub.svd(false, false).singular_values.iter().copied().fold(0.0, f64::max);
            (s, s)
        } else {
            let est = linalg::operator_norm(&SparseMatrix::from_dense(&sub), p, 1e-12);
            (est.lower, est.upper)
        };
        if lo > best.lower {
            best.lower = lo;
            best.rows = Subset::new(rows);
            best.cols = Subset::new(cols);
        }
        best.upper = best.upper.max(hi);
    }
    Ok(best)
}

fn bounds(b: &LpOperator, radius: f64, tol: f64) -> Result<EpsPropagation> {
    let p = b.p();
    let k = b.k();
    let space = b.space().clone();
    let masked = b.off_band(radius);
    if masked.is_zero() {
        return Ok(zero_result(radius));
    }
    let m = masked.matrix();

    // Column witness: B = {y}, rows maximal.
    let col_sums = m.column_abs_sums();
    let (j1, _) = argmax(&col_sums);
    let col_seed = Subset::singleton(j1 / k);
    // Row witness: A = {x}, columns maximal.
    let row_sums = m.row_abs_sums();
    let (i1, _) = argmax(&row_sums);
    let x1 = i1 / k;
    let row_seed = Subset::new((0..space.len()).filter(|&y| space.dist(x1, y) > radius).collect());

    if p.is_one() || p.is_infinite() {
        let (rows, cols) = if p.is_one() {
            (far_rows(b, &col_seed, radius), col_seed)
        } else {
            (Subset::singleton(x1), row_seed)
        };
        let value = if p.is_one() { m.norm_one() } else { m.norm_inf() };
        return Ok(EpsPropagation { radius, lower: value, upper: value, tag: BoundTag::Exact, rows, cols });
    }

    let mut upper = linalg::interpolation_bound(m, p);
    if p.is_two() {
        upper = upper.min(masked.opnorm(tol).upper);
    }

    let evaluate = |cols: &Subset| -> (f64, Subset) {
        if cols.is_empty() {
            return (0.0, Subset::default());
        }
        let rows = far_rows(b, cols, radius);
        if rows.is_empty() {
            return (0.0, rows);
        }
        (b.restrict(&rows, cols).opnorm(tol).lower, rows)
    };

    let mut best_cols = col_seed;
    let (mut best, mut best_rows) = evaluate(&best_cols);
    let (v, r) = evaluate(&row_seed);
    if v > best {
        best = v;
        best_rows = r;
        best_cols = row_seed;
    }

    let n = space.len();
    if n <= LOCAL_MOVE_LIMIT {
        for _ in 0..LOCAL_MOVE_PASSES {
            let mut improved = false;
            for z in 0..n {
                let trial = if best_cols.contains(z) {
                    Subset::new(best_cols.iter().filter(|&y| y != z).collect())
                } else {
                    let mut pts = best_cols.points().to_vec();
                    pts.push(z);
                    Subset::new(pts)
                };
                let (v, r) = evaluate(&trial);
                if v > best {
                    best = v;
                    best_rows = r;
                    best_cols = trial;
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
    }
    Ok(EpsPropagation {
        radius,
        lower: best.min(upper),
        upper,
        tag: BoundTag::Upper,
        rows: best_rows,
        cols: best_cols,
    })
}

fn argmax(values: &[f64]) -> (usize, f64) {
    values.iter().enumerate().fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
}

/// `ν` sampled on a sorted grid of radii.
///
/// Certified values must be non-increasing in the radius; a violation
/// beyond the norm tolerance is reported as an error, never clipped.
pub fn ql_profile(b: &LpOperator, radii: &[f64], mode: EpsMode, tol: f64) -> Result<QuasiLocalityProfile> {
    if radii.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Parameter("radius grid must be sorted ascending".into()));
    }
    let mut entries: Vec<ProfileEntry> = Vec::with_capacity(radii.len());
    for &r in radii {
        let e = eps_propagation(b, r, mode, tol)?;
        if let Some(prev) = entries.last() {
            if e.upper > prev.upper + tol {
                return Err(Error::Invariant(format!(
                    "profile increases from {} at R={} to {} at R={}",
                    prev.upper, prev.radius, e.upper, r
                )));
            }
        }
        entries.push(ProfileEntry { radius: r, lower: e.lower, upper: e.upper, tag: e.tag });
    }
    Ok(QuasiLocalityProfile { entries })
}
