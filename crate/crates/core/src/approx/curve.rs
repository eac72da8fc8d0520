//! Approximation curves `ε ↦ R(ε)`: the finite-scale content of Roe-algebra
//! membership.

use serde::{Deserialize, Serialize};

use super::{approximant_end, approximant_mid, NORM_TOL};
use crate::error::{Error, Result};
use crate::lp_op::LpOperator;
use crate::pou::{disjoint_cover, dual_family, grid_folner_pou, pou_from_cover};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveMethod {
    /// `band_truncate(b, R)`.
    Truncate,
    /// End-point approximant over Voronoi covers, `L = 1/r`.
    PouEnd,
    /// Interior approximant over Følner boxes (grids) or bump partitions.
    PouMid,
}

impl CurveMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveMethod::Truncate => "truncate",
            CurveMethod::PouEnd => "pou_end",
            CurveMethod::PouMid => "pou_mid",
        }
    }
}

/// Parameters swept by [`roe_curve`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoeLadder {
    /// Truncation radii; `None` means every integer up to the propagation.
    pub radii: Option<Vec<f64>>,
    /// Cover radii (end-point and bump partitions) or box sides (Følner).
    pub scales: Vec<f64>,
}

impl Default for RoeLadder {
    fn default() -> Self {
        RoeLadder { radii: None, scales: vec![1.0, 2.0, 4.0, 8.0, 16.0] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub eps: f64,
    pub method: CurveMethod,
    /// Propagation of the chosen approximant; `None` if no candidate reached `eps`.
    pub radius: Option<f64>,
    pub defect_lower: f64,
    pub defect_upper: f64,
    /// Ladder parameter of the chosen candidate (radius, cover radius or box side).
    pub parameter: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ApproximationCurve {
    pub rows: Vec<CurveRow>,
}

#[derive(Clone, Copy)]
struct Candidate {
    radius: f64,
    lower: f64,
    upper: f64,
    parameter: f64,
}

/// For each `ε` (descending) and method, the smallest propagation among the
/// ladder candidates whose certified defect `‖b − approximant‖` is at most `ε`.
///
/// The zero operator (propagation 0, defect `‖b‖`) is always a candidate.
/// For truncation the defect is replaced by its tail envelope
/// `max_{R' ≥ R} defect(R')` so the reported radius is one from which every
/// larger ladder radius also meets `ε`.
pub fn roe_curve(b: &LpOperator, eps_grid: &[f64], methods: &[CurveMethod], ladder: &RoeLadder) -> Result<ApproximationCurve> {
    if eps_grid.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::Parameter("epsilon grid must be sorted descending".into()));
    }
    let norm = b.opnorm(NORM_TOL);
    let zero = Candidate { radius: 0.0, lower: norm.lower, upper: norm.upper, parameter: 0.0 };
    let mut rows = Vec::new();
    for &method in methods {
        let mut candidates = match method {
            CurveMethod::Truncate => truncate_candidates(b, ladder),
            CurveMethod::PouEnd => end_candidates(b, ladder)?,
            CurveMethod::PouMid => mid_candidates(b, ladder)?,
        };
        candidates.push(zero);
        for &eps in eps_grid {
            let best = candidates
                .iter()
                .filter(|c| c.upper <= eps)
                .min_by(|a, c| a.radius.total_cmp(&c.radius).then(a.upper.total_cmp(&c.upper)));
            rows.push(match best {
                Some(c) => CurveRow {
                    eps,
                    method,
                    radius: Some(c.radius),
                    defect_lower: c.lower,
                    defect_upper: c.upper,
                    parameter: c.parameter,
                },
                None => CurveRow { eps, method, radius: None, defect_lower: f64::NAN, defect_upper: f64::NAN, parameter: f64::NAN },
            });
        }
    }
    Ok(ApproximationCurve { rows })
}

fn truncate_candidates(b: &LpOperator, ladder: &RoeLadder) -> Vec<Candidate> {
    let radii = ladder.radii.clone().unwrap_or_else(|| (0..=b.propagation().ceil() as usize).map(|r| r as f64).collect());
    let mut out: Vec<Candidate> = radii
        .iter()
        .map(|&r| {
            let est = b.off_band(r).opnorm(NORM_TOL);
            Candidate { radius: r, lower: est.lower, upper: est.upper, parameter: r }
        })
        .collect();
    out.sort_by(|a, c| a.radius.total_cmp(&c.radius));
    let mut envelope = 0.0f64;
    for c in out.iter_mut().rev() {
        envelope = envelope.max(c.upper);
        c.upper = envelope;
    }
    out
}

fn end_candidates(b: &LpOperator, ladder: &RoeLadder) -> Result<Vec<Candidate>> {
    if !b.p().is_endpoint() {
        return Ok(Vec::new());
    }
    let space = b.space();
    let mut out = Vec::new();
    for &r in &ladder.scales {
        let pou = pou_from_cover(space, &disjoint_cover(space, r), b.p(), 1.0)?;
        let dual = dual_family(space, &pou, 1.0 / r.max(1.0))?;
        let approx = approximant_end(b, &pou, &dual)?;
        let est = b.sub(&approx)?.opnorm(NORM_TOL);
        out.push(Candidate { radius: approx.propagation(), lower: est.lower, upper: est.upper, parameter: r });
    }
    Ok(out)
}

fn mid_candidates(b: &LpOperator, ladder: &RoeLadder) -> Result<Vec<Candidate>> {
    if b.p().is_endpoint() {
        return Ok(Vec::new());
    }
    let space = b.space();
    let mut out = Vec::new();
    for &scale in &ladder.scales {
        let pou = if space.grid_shape().is_some() {
            grid_folner_pou(space, scale.max(1.0).round() as usize, b.p())?
        } else {
            pou_from_cover(space, &disjoint_cover(space, scale), b.p(), scale.max(1.0))?
        };
        let approx = approximant_mid(b, &pou)?;
        let est = b.sub(&approx)?.opnorm(NORM_TOL);
        out.push(Candidate { radius: approx.propagation(), lower: est.lower, upper: est.upper, parameter: scale });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::exponent::Exponent;
    use crate::space::{MetricSpace, SpaceSpec};

    #[test]
    fn band_operator_reaches_zero_at_propagation() {
        let s = Arc::new(MetricSpace::build(&SpaceSpec::Path { n: 30 }).unwrap());
        let b = LpOperator::random_band(s, Exponent::ONE, 1, 3.0, 1.0, 1.0, 1).unwrap();
        let prop = b.propagation();
        let curve = roe_curve(&b, &[1e-3, 1e-6, 0.0], &[CurveMethod::Truncate], &RoeLadder::default()).unwrap();
        for row in &curve.rows {
            assert!(row.radius.unwrap() <= prop);
        }
        assert_eq!(curve.rows[2].radius, Some(prop));
        assert_eq!(curve.rows[2].defect_upper, 0.0);
    }

    #[test]
    fn large_eps_admits_zero_operator() {
        let s = Arc::new(MetricSpace::build(&SpaceSpec::Path { n: 10 }).unwrap());
        let b = LpOperator::random_band(s, Exponent::INFINITY, 1, 2.0, 1.0, 1.0, 2).unwrap();
        let big = b.opnorm(1e-9).upper * 1.01;
        let curve =
            roe_curve(&b, &[big], &[CurveMethod::Truncate, CurveMethod::PouEnd], &RoeLadder::default()).unwrap();
        assert!(curve.rows.iter().all(|r| r.radius == Some(0.0)));
        assert!(roe_curve(&b, &[0.1, 0.2], &[CurveMethod::Truncate], &RoeLadder::default()).is_err());
    }
}
