//! The full interior-exponent approximation: from a commutator certificate
//! to a Følner partition whose interior approximant is within `ε` of `b`.
//!
//! The constants follow one fixed schedule. With `M = upper(‖b‖)`:
//! `ε' = ε / max(4M, 24)`, `L = ε' / Σ_k μ_k r_k`, the localisation step
//! is run at `(ε/12, L, 2M)` which fixes the support diameter `s`,
//! `K = geometry_profile(s + 1/L)`, and the partition must have
//! `(s + 2/L, ε/(4MK))`-variation.

use serde::{Deserialize, Serialize};

use super::approximant_mid;
use crate::error::{Error, Result};
use crate::linalg::NormEstimate;
use crate::locality::grid_schedule;
use crate::lp_op::{commut_bound_band, commut_search, commut_weight, commutator, LpOperator, ScalarFunction};
use crate::pou::{grid_folner_pou, variation, variation_capped};
use crate::space::Subset;

/// Random candidates tried when searching for a large commutator of `b − b′`.
const WITNESS_BUDGET: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineSchedule {
    pub eps: f64,
    /// `M`, certified upper bound for `‖b‖`.
    pub norm_bound: f64,
    /// `ε / max(4M, 24)`.
    pub commut_eps: f64,
    /// `Σ_k μ_k r_k` from the band decomposition.
    pub commut_weight: f64,
    pub lipschitz: f64,
    /// Certified `sup_f ‖[b, f]‖` at `lipschitz`.
    pub commut_upper: f64,
    /// Mass fraction `c` required by the localisation step.
    pub localise_fraction: f64,
    /// Separation `4/L` required by the localisation step.
    pub localise_separation: f64,
    /// Support diameter `s` of localised vectors.
    pub support_diameter: f64,
    /// `K = geometry_profile(s + 1/L)`.
    pub ball_bound: usize,
    /// `s + 2/L`.
    pub variation_radius: f64,
    /// `ε / (4MK)`.
    pub variation_target: f64,
    /// Følner box side meeting the target.
    pub box_side: usize,
    /// Measured variation of the chosen partition at `variation_radius`.
    pub variation: f64,
}

#[derive(Clone, Debug)]
pub struct PipelineReport {
    pub schedule: PipelineSchedule,
    pub approximant: LpOperator,
    /// `‖b − b′‖`.
    pub defect: NormEstimate,
    pub norm: NormEstimate,
    pub approximant_norm: NormEstimate,
    /// Largest `upper(‖[b − b′, f]‖)` over the witness pool.
    pub transfer_commut: f64,
    /// `2 · commut_upper`.
    pub transfer_bound: f64,
    pub within_eps: bool,
    pub transfer_holds: bool,
}

/// Computes every constant of the schedule for `b` on a grid.
pub fn pipeline_schedule(b: &LpOperator, eps: f64, tol: f64) -> Result<PipelineSchedule> {
    let p = b.p();
    if p.is_endpoint() {
        return Err(Error::UnsupportedExponent { p: p.to_string(), what: "the interior pipeline (needs 1 < p < ∞)" });
    }
    if !(eps > 0.0) {
        return Err(Error::Parameter(format!("ε must be positive, got {eps}")));
    }
    let space = b.space();
    let (dim, side) = space.grid_shape().ok_or(Error::NotGrid)?;
    let norm_bound = b.opnorm(tol).upper;
    let commut_eps = eps / (4.0 * norm_bound).max(24.0);
    let weight = commut_weight(b);
    let lipschitz = if weight > 0.0 { commut_eps / weight } else { 1.0 };
    let commut_upper = commut_bound_band(b, lipschitz).upper.unwrap_or(f64::INFINITY);

    let localise_eps = eps / 12.0;
    let localise_norm = 2.0 * norm_bound;
    let localise_fraction =
        if localise_norm > 0.0 { 1.0 - (localise_eps / localise_norm).powf(p.value()) / 2.0 } else { 1.0 };
    let localise_separation = 4.0 / lipschitz;
    let support_diameter = grid_schedule(dim, side, localise_separation, localise_fraction)
        .diameter_bound
        .min(space.diameter());

    let ball_bound = space.geometry_profile(&[support_diameter + 1.0 / lipschitz])[0];
    let variation_radius = support_diameter + 2.0 / lipschitz;
    let variation_target =
        if norm_bound > 0.0 { eps / (4.0 * norm_bound * ball_bound as f64) } else { f64::INFINITY };

    let mut ladder: Vec<usize> = std::iter::successors(Some(2usize), |s| Some(s * 2)).take_while(|&s| s < side).collect();
    ladder.push(side);
    let mut chosen = None;
    for s in ladder {
        let pou = grid_folner_pou(space, s, p)?;
        let v = variation_capped(space, &pou, variation_radius, variation_target);
        if v <= variation_target {
            chosen = Some((s, variation(space, &pou, variation_radius)));
            break;
        }
    }
    let (box_side, variation) = chosen.expect("a single box has zero variation");
    Ok(PipelineSchedule {
        eps,
        norm_bound,
        commut_eps,
        commut_weight: weight,
        lipschitz,
        commut_upper,
        localise_fraction,
        localise_separation,
        support_diameter,
        ball_bound,
        variation_radius,
        variation_target,
        box_side,
        variation,
    })
}

/// Runs the schedule, builds `b′ = Σ φ_i^{p/q} b φ_i`, and measures the
/// defect and the commutator transfer `‖[b − b′, f]‖ ≤ 2·sup_f ‖[b, f]‖`
/// over a pool of `L`-Lipschitz contractions.
pub fn run_pipeline(b: &LpOperator, eps: f64, seed: u64, tol: f64) -> Result<PipelineReport> {
    let schedule = pipeline_schedule(b, eps, tol)?;
    let space = b.space();
    let pou = grid_folner_pou(space, schedule.box_side, b.p())?;
    let approximant = approximant_mid(b, &pou)?;
    let diff = b.sub(&approximant)?;
    let defect = diff.opnorm(tol);
    let norm = b.opnorm(tol);
    let approximant_norm = approximant.opnorm(tol);

    let l = schedule.lipschitz;
    let mut pool: Vec<ScalarFunction> = space
        .greedy_net(space.diameter() / 4.0)
        .iter()
        .map(|x| ScalarFunction::tent(space, &Subset::singleton(x), l))
        .collect();
    if let Some(f) = commut_search(b, l, WITNESS_BUDGET, seed).witness {
        pool.push(f);
    }
    if let Some(f) = commut_search(&diff, l, WITNESS_BUDGET, seed).witness {
        pool.push(f);
    }
    let transfer_commut = pool.iter().map(|f| commutator(&diff, f).opnorm(tol).upper).fold(0.0, f64::max);
    let transfer_bound = 2.0 * schedule.commut_upper;

    if defect.lower > eps {
        return Err(Error::Invariant(format!("pipeline defect {} exceeds ε = {eps}", defect.lower)));
    }
    Ok(PipelineReport {
        within_eps: defect.upper <= eps,
        transfer_holds: transfer_commut <= transfer_bound,
        schedule,
        approximant,
        defect,
        norm,
        approximant_norm,
        transfer_commut,
        transfer_bound,
    })
}
