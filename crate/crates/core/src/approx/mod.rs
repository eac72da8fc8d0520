//! Finite-propagation approximants built from partitions of unity.
//!
//! Every approximant here is a Schur multiplier on the blocks of `b`: with
//! multiplication operators `φ, ψ`, `(φ b ψ)_{xy} = φ(x) b_{xy} ψ(y)`, so a
//! sum `Σ_i φ_i b ψ_i` rescales block `(x,y)` by `Σ_i φ_i(x) ψ_i(y)`.

mod curve;
mod decompose;
mod pipeline;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp_op::{commut_bound_band, commutator, LpOperator, ScalarFunction};
use crate::pou::{by_point, DualFamily, LocalFunction, PartitionOfUnity};

pub use curve::{roe_curve, ApproximationCurve, CurveMethod, CurveRow, RoeLadder};
pub use decompose::{band_decompose, BandDecomposition, BandPart, PartialTranslation};
pub use pipeline::{pipeline_schedule, run_pipeline, PipelineReport, PipelineSchedule};

/// Tolerance used for the p = 2 norms inside certificates.
pub const NORM_TOL: f64 = 1e-9;

fn check_family(family: &[ScalarFunction], n: usize) -> Result<()> {
    for (i, e) in family.iter().enumerate() {
        if e.len() != n {
            return Err(Error::Shape { expected: n, got: e.len() });
        }
        if let Some(v) = e.values().iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Parameter(format!("family member {i} takes value {v} outside [0, 1]")));
        }
    }
    Ok(())
}

/// Owner of each point among disjointly supported functions.
fn owners(family: &[ScalarFunction], n: usize) -> Result<Vec<Option<usize>>> {
    let mut owner: Vec<Option<usize>> = vec![None; n];
    for (i, e) in family.iter().enumerate() {
        for x in e.support().iter() {
            if let Some(j) = owner[x] {
                return Err(Error::Overlap { first: j, second: i, reason: format!("both contain point {x}") });
            }
            owner[x] = Some(i);
        }
    }
    Ok(owner)
}

/// Block cutdown `Σ_j e_j b e_j` for disjointly supported `e_j` in `[0, 1]`.
pub fn block_cutdown(b: &LpOperator, family: &[ScalarFunction]) -> Result<LpOperator> {
    let n = b.space().len();
    check_family(family, n)?;
    let owner = owners(family, n)?;
    Ok(b.schur(|x, y| match (owner[x], owner[y]) {
        (Some(i), Some(j)) if i == j => family[i].values()[x] * family[i].values()[y],
        _ => 0.0,
    }))
}

/// `Σ_i φ_i(x)·g(i, y)` via the per-point member lists.
fn kernel(row_members: &[(usize, f64)], col_members: &[(usize, f64)]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut s = 0.0;
    while i < row_members.len() && j < col_members.len() {
        let (a, va) = row_members[i];
        let (c, vc) = col_members[j];
        match a.cmp(&c) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                s += va * vc;
                i += 1;
                j += 1;
            }
        }
    }
    s
}

fn check_dual(pou: &PartitionOfUnity, dual: &DualFamily) -> Result<()> {
    if dual.functions.len() != pou.len() {
        return Err(Error::Shape { expected: pou.len(), got: dual.functions.len() });
    }
    Ok(())
}

/// End-point approximant: `Σ φ_i b ψ_i` for p = ∞ and `Σ ψ_i b φ_i` for p = 1.
pub fn approximant_end(b: &LpOperator, pou: &PartitionOfUnity, dual: &DualFamily) -> Result<LpOperator> {
    let p = b.p();
    if !p.is_endpoint() {
        return Err(Error::UnsupportedExponent { p: p.to_string(), what: "the end-point approximant; use approximant_mid" });
    }
    if !pou.p().is_endpoint() {
        return Err(Error::ExponentMismatch { partition: pou.p().to_string(), operator: p.to_string() });
    }
    check_dual(pou, dual)?;
    let n = b.space().len();
    let phi = pou.by_point();
    let psi = by_point(n, &dual.functions);
    Ok(if p.is_infinite() {
        b.schur(|x, y| kernel(&phi[x], &psi[y]))
    } else {
        b.schur(|x, y| kernel(&psi[x], &phi[y]))
    })
}

/// Measured end-point defect and the certificate bounding it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndCertificate {
    /// `‖b − b_ε‖`, exact at the end-points.
    pub defect: f64,
    /// `max_i ‖[ψ_i, b]‖`.
    pub bound: f64,
    /// Index attaining `bound`.
    pub worst_member: usize,
}

/// `‖b − b_ε‖ ≤ max_i ‖[ψ_i, b]‖`, checked.
///
/// At p = ∞ the defect is `Σ φ_i [ψ_i, b]`, whose rows are convex
/// combinations of rows of the commutators; p = 1 is the column version.
pub fn defect_certificate_end(b: &LpOperator, pou: &PartitionOfUnity, dual: &DualFamily) -> Result<EndCertificate> {
    let approx = approximant_end(b, pou, dual)?;
    let defect = b.sub(&approx)?.opnorm(NORM_TOL).upper;
    let n = b.space().len();
    let mut bound = 0.0;
    let mut worst_member = 0;
    for (i, psi) in dual.functions.iter().enumerate() {
        let f = ScalarFunction::new(psi.dense(n));
        let c = commutator(b, &f).opnorm(NORM_TOL).upper;
        if c > bound {
            bound = c;
            worst_member = i;
        }
    }
    if defect > bound * (1.0 + 1e-12) + 1e-14 {
        return Err(Error::Invariant(format!("end-point defect {defect} exceeds commutator certificate {bound}")));
    }
    Ok(EndCertificate { defect, bound, worst_member })
}

/// Interior approximant `Σ_i φ_i^{p/q} b φ_i` for a p-partition.
pub fn approximant_mid(b: &LpOperator, pou: &PartitionOfUnity) -> Result<LpOperator> {
    let p = b.p();
    if p.is_endpoint() {
        return Err(Error::UnsupportedExponent { p: p.to_string(), what: "the interior approximant; use approximant_end" });
    }
    if pou.p() != p {
        return Err(Error::ExponentMismatch { partition: pou.p().to_string(), operator: p.to_string() });
    }
    let power = p.value() - 1.0;
    let cols = pou.by_point();
    let rows: Vec<Vec<(usize, f64)>> =
        cols.iter().map(|list| list.iter().map(|&(i, v)| (i, v.powf(power))).collect()).collect();
    Ok(b.schur(|x, y| kernel(&rows[x], &cols[y])))
}

/// Both sides of `‖ebe − Σ e_i b e_i‖ ≤ sup_f ‖[b, f]‖` for families with
/// supports more than `2/L` apart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HaloCheck {
    pub lhs_lower: f64,
    pub lhs_upper: f64,
    /// Band certificate `L·Σ μ_k r_k`.
    pub rhs: f64,
    /// `N·μ·L·R` with `N = geometry_profile(R)`.
    pub rhs_profile: f64,
}

pub fn halo_estimate_check(b: &LpOperator, family: &[ScalarFunction], lipschitz: f64) -> Result<HaloCheck> {
    let space = b.space().clone();
    let n = space.len();
    check_family(family, n)?;
    let supports: Vec<_> = family.iter().map(ScalarFunction::support).collect();
    let gap = 2.0 / lipschitz;
    for i in 0..supports.len() {
        for j in i + 1..supports.len() {
            if supports[i].is_empty() || supports[j].is_empty() {
                continue;
            }
            let d = space.set_distance(&supports[i], &supports[j])?;
            if d <= gap {
                return Err(Error::Overlap { first: i, second: j, reason: format!("are {d} apart, not more than 2/L = {gap}") });
            }
        }
    }
    let owner = owners(family, n)?;
    // Entry weight e(x)e(y) − Σ_i e_i(x)e_i(y): nonzero only across members.
    let cross = b.schur(|x, y| match (owner[x], owner[y]) {
        (Some(i), Some(j)) if i != j => family[i].values()[x] * family[j].values()[y],
        _ => 0.0,
    });
    let est = cross.opnorm(NORM_TOL);
    let rhs = commut_bound_band(b, lipschitz).upper.unwrap_or(f64::INFINITY);
    let r = b.propagation();
    let mu = b.max_block_norm();
    let count = space.geometry_profile(&[r])[0] as f64;
    let rhs_profile = count * mu * lipschitz * r;
    if !b.p().is_infinite() && est.lower > rhs * (1.0 + 1e-12) + 1e-14 {
        return Err(Error::Invariant(format!("cross-block norm {} exceeds commutator certificate {rhs}", est.lower)));
    }
    Ok(HaloCheck { lhs_lower: est.lower, lhs_upper: est.upper, rhs, rhs_profile })
}

/// Characteristic functions of the members of a partition of unity.
pub fn indicator_family(n: usize, functions: &[LocalFunction]) -> Vec<ScalarFunction> {
    functions.iter().map(|f| ScalarFunction::indicator(n, &f.support_set())).collect()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::exponent::Exponent;
    use crate::linalg::dense_spectral_norm;
    use crate::pou::{dual_family, grid_block_cover, pou_from_cover};
    use crate::space::{MetricSpace, SpaceSpec, Subset};

    fn path(n: usize) -> Arc<MetricSpace> {
        Arc::new(MetricSpace::build(&SpaceSpec::Path { n }).unwrap())
    }

    #[test]
    fn cutdown_basics() {
        let s = path(6);
        let b = LpOperator::random_band(s.clone(), Exponent::TWO, 1, 5.0, 1.0, 1.0, 4).unwrap();
        let full = block_cutdown(&b, &[ScalarFunction::constant(6, 1.0)]).unwrap();
        assert_eq!(full.matrix(), b.matrix());

        let diag = b.band_truncate(0.0);
        let e = vec![ScalarFunction::new(vec![0.5, 0.2, 0.0, 0.0, 0.0, 0.0]), ScalarFunction::new(vec![0.0, 0.0, 1.0, 0.3, 0.0, 0.0])];
        let cut = block_cutdown(&diag, &e).unwrap();
        assert_eq!(cut.propagation(), 0.0);
        let expected = diag.schur(|x, _| [0.25, 0.04, 1.0, 0.09, 0.0, 0.0][x]);
        assert!(cut.sub(&expected).unwrap().matrix().max_abs() < 1e-15);

        let overlapping = vec![ScalarFunction::indicator(6, &Subset::new(vec![0, 1])), ScalarFunction::indicator(6, &Subset::new(vec![1, 2]))];
        assert!(matches!(block_cutdown(&b, &overlapping), Err(Error::Overlap { first: 0, second: 1, .. })));
    }

    #[test]
    fn cutdown_norm_is_max_block_norm() {
        let s = path(6);
        let b = LpOperator::random_band(s.clone(), Exponent::TWO, 1, 5.0, 1.0, 1.0, 8).unwrap();
        let a = Subset::new(vec![0, 1, 2]);
        let c = Subset::new(vec![3, 4, 5]);
        let cut = block_cutdown(&b, &[ScalarFunction::indicator(6, &a), ScalarFunction::indicator(6, &c)]).unwrap();
        let expected = dense_spectral_norm(b.restrict(&a, &a).matrix()).max(dense_spectral_norm(b.restrict(&c, &c).matrix()));
        let est = cut.opnorm(1e-12);
        assert!(est.lower <= expected + 1e-12 && expected <= est.upper + 1e-12);
    }

    #[test]
    fn end_approximant_trivial_cases() {
        let s = path(20);
        let b = LpOperator::random_band(s.clone(), Exponent::INFINITY, 1, 2.0, 1.0, 1.0, 2).unwrap();
        let cover = crate::pou::disjoint_cover(&s, 100.0);
        let pou = pou_from_cover(&s, &cover, Exponent::INFINITY, 1.0).unwrap();
        let dual = dual_family(&s, &pou, 0.1).unwrap();
        assert_eq!(approximant_end(&b, &pou, &dual).unwrap().matrix(), b.matrix());

        // At p = ∞ with indicator partitions the defect kernel is 1 − ψ_i(y),
        // entrywise smaller for smaller L, so the row-sum norm decreases.
        let pou = pou_from_cover(&s, &grid_block_cover(&s, 5).unwrap(), Exponent::INFINITY, 1.0).unwrap();
        let dual = dual_family(&s, &pou, 1.0 / 3.0).unwrap();
        let wide = defect_certificate_end(&b, &pou, &dual).unwrap();
        let dual = dual_family(&s, &pou, 0.5).unwrap();
        let cert = defect_certificate_end(&b, &pou, &dual).unwrap();
        assert!(cert.defect > 0.0 && cert.defect <= cert.bound);
        assert!(wide.defect <= cert.defect && wide.defect <= wide.bound);
        assert!(approximant_end(&b.with_exponent(Exponent::TWO), &pou, &dual).is_err());
    }

    #[test]
    fn mid_approximant_with_indicators_is_cutdown() {
        let s = path(12);
        let p = Exponent::new(3.0).unwrap();
        let b = LpOperator::random_band(s.clone(), p, 1, 3.0, 1.0, 1.0, 6).unwrap();
        let pou = pou_from_cover(&s, &grid_block_cover(&s, 4).unwrap(), p, 1.0).unwrap();
        let mid = approximant_mid(&b, &pou).unwrap();
        let cut = block_cutdown(&b, &indicator_family(12, pou.functions())).unwrap();
        assert_eq!(mid.matrix(), cut.matrix());
        let single = pou_from_cover(&s, &crate::pou::disjoint_cover(&s, 50.0), p, 1.0).unwrap();
        assert_eq!(approximant_mid(&b, &single).unwrap().matrix(), b.matrix());
        let wrong = pou_from_cover(&s, &grid_block_cover(&s, 4).unwrap(), Exponent::TWO, 1.0).unwrap();
        assert!(matches!(approximant_mid(&b, &wrong), Err(Error::ExponentMismatch { .. })));
    }

    #[test]
    fn halo_check_cases() {
        let s = path(200);
        let b = LpOperator::random_band(s.clone(), Exponent::TWO, 1, 3.0, 1.0, 1.0, 3).unwrap();
        let one = vec![ScalarFunction::indicator(200, &Subset::new((10..40).collect()))];
        assert_eq!(halo_estimate_check(&b, &one, 0.05).unwrap().lhs_upper, 0.0);
        let far = vec![
            ScalarFunction::indicator(200, &Subset::new((10..40).collect())),
            ScalarFunction::indicator(200, &Subset::new((100..140).collect())),
        ];
        let check = halo_estimate_check(&b, &far, 0.05).unwrap();
        assert!(check.lhs_lower <= check.rhs && check.rhs <= check.rhs_profile + 1e-12);
        assert!(halo_estimate_check(&b, &far, 0.02).is_err());
    }
}
