//! Metric sparsification, operator norm localisation, and the
//! inverse-closedness experiment.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::approx::{roe_curve, ApproximationCurve, CurveMethod, RoeLadder, NORM_TOL};
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::linalg::{self, vector_norm, SparseMatrix, C64};
use crate::lp_op::{commut_bound_band, commut_weight, ql_profile, EpsMode, LpOperator, QuasiLocalityProfile};
use crate::pou::{disjoint_cover, grid_folner_pou, pou_from_cover, variation};
use crate::space::{MetricSpace, SpaceSpec, Subset};

/// Slack on `fraction ≥ c` for rounding in the mass sums.
const FRACTION_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "strategy")]
pub enum SparsifyStrategy {
    /// Boxes separated by corridors, best of all shifts (grids only).
    GridShift,
    /// Components grown from the heaviest points with the given diameter cap.
    Greedy { diameter: f64 },
}

/// Box side and guarantee of the corridor schedule on a grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSchedule {
    /// Points per axis in a box.
    pub box_side: usize,
    /// Skipped coordinates between boxes, `⌊m⌋`; boxes end up `⌊m⌋ + 1 > m` apart.
    pub corridor: usize,
    /// `(f/(f+⌊m⌋))^N`, or 1 when one box covers the grid.
    pub guaranteed_fraction: f64,
    /// ℓ¹ diameter of a box, `N·(f − 1)`.
    pub diameter_bound: f64,
}

/// Smallest box side `f` with `(f/(f+⌊m⌋))^N ≥ c`, capped at the grid side.
pub fn grid_schedule(dim: usize, side: usize, m: f64, c: f64) -> GridSchedule {
    let corridor = m.max(0.0).floor() as usize;
    let ratio = |f: usize| (f as f64 / (f + corridor) as f64).powi(dim as i32);
    let box_side = (1..side).find(|&f| ratio(f) >= c).unwrap_or(side);
    let guaranteed_fraction = if box_side >= side { 1.0 } else { ratio(box_side) };
    GridSchedule { box_side, corridor, guaranteed_fraction, diameter_bound: (dim * (box_side - 1)) as f64 }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparsificationResult {
    pub components: Vec<Subset>,
    /// Required separation `m`.
    pub separation: f64,
    /// Smallest distance actually achieved between two components.
    pub achieved_separation: f64,
    /// Diameter bound `f(m)` promised by the strategy.
    pub diameter_bound: f64,
    pub achieved_diameter: f64,
    pub fraction: f64,
    pub total_mass: f64,
    pub target: f64,
    pub success: bool,
    pub schedule: Option<GridSchedule>,
}

/// Captures a `c`-fraction of the mass in components more than `m` apart.
pub fn sparsify(space: &MetricSpace, weights: &[f64], m: f64, c: f64, strategy: SparsifyStrategy) -> Result<SparsificationResult> {
    if weights.len() != space.len() {
        return Err(Error::Shape { expected: space.len(), got: weights.len() });
    }
    if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
        return Err(Error::Parameter(format!("weights must be finite and non-negative, found {w}")));
    }
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::Parameter(format!("mass fraction must lie in (0, 1], got {c}")));
    }
    if !(m >= 1.0) {
        return Err(Error::Parameter(format!("separation must be at least 1, got {m}")));
    }
    let (components, diameter_bound, schedule) = match strategy {
        SparsifyStrategy::GridShift => {
            let (dim, side) = space.grid_shape().ok_or(Error::NotGrid)?;
            let schedule = grid_schedule(dim, side, m, c);
            (grid_shift(space, weights, dim, side, &schedule), schedule.diameter_bound, Some(schedule))
        }
        SparsifyStrategy::Greedy { diameter } => (greedy(space, weights, m, diameter), diameter, None),
    };
    let total_mass: f64 = weights.iter().sum();
    let captured: f64 = components.iter().flat_map(|s| s.iter()).map(|x| weights[x]).sum();
    let fraction = if total_mass > 0.0 { captured / total_mass } else { 1.0 };

    let mut label = vec![usize::MAX; space.len()];
    for (i, s) in components.iter().enumerate() {
        for x in s.iter() {
            label[x] = i;
        }
    }
    let mut achieved_separation = f64::INFINITY;
    let covered: Vec<usize> = (0..space.len()).filter(|&x| label[x] != usize::MAX).collect();
    for (a, &x) in covered.iter().enumerate() {
        for &y in &covered[a + 1..] {
            if label[x] != label[y] {
                achieved_separation = achieved_separation.min(space.dist(x, y));
            }
        }
    }
    let achieved_diameter = components.iter().map(|s| space.subset_diameter(s)).fold(0.0, f64::max);
    if components.len() > 1 && achieved_separation <= m {
        return Err(Error::Invariant(format!("components only {achieved_separation} apart, need more than {m}")));
    }
    if achieved_diameter > diameter_bound {
        return Err(Error::Invariant(format!("component diameter {achieved_diameter} exceeds bound {diameter_bound}")));
    }
    Ok(SparsificationResult {
        components,
        separation: m,
        achieved_separation,
        diameter_bound,
        achieved_diameter,
        fraction,
        total_mass,
        target: c,
        success: fraction >= c - FRACTION_SLACK,
        schedule,
    })
}

/// Best shift of the box-and-corridor tiling; ties go to the lowest shift.
fn grid_shift(space: &MetricSpace, weights: &[f64], dim: usize, side: usize, schedule: &GridSchedule) -> Vec<Subset> {
    let period = schedule.box_side + schedule.corridor;
    // Box index of a coordinate under one axis offset, None in a corridor.
    let slot = |coord: usize, offset: usize| -> Option<usize> {
        let t = coord + offset;
        (t % period < schedule.box_side).then_some(t / period)
    };
    // Offsets giving identical coverage patterns on a short axis are redundant.
    let mut offsets: Vec<usize> = Vec::new();
    let mut seen: Vec<Vec<Option<usize>>> = Vec::new();
    for o in 0..period {
        let pattern: Vec<Option<usize>> = (0..side).map(|c| slot(c, o).map(|_| 0)).collect();
        if !seen.contains(&pattern) {
            seen.push(pattern);
            offsets.push(o);
        }
    }
    let coords: Vec<Vec<usize>> = (0..space.len()).map(|x| space.grid_coords(x).expect("grid point")).collect();
    let shifts = offsets.len().pow(dim as u32);
    let decode = |t: usize| -> Vec<usize> {
        let mut rem = t;
        let mut out = vec![0; dim];
        for axis in (0..dim).rev() {
            out[axis] = offsets[rem % offsets.len()];
            rem /= offsets.len();
        }
        out
    };
    let mut best = (0usize, f64::NEG_INFINITY);
    for t in 0..shifts {
        let shift = decode(t);
        let mass: f64 = (0..space.len())
            .filter(|&x| coords[x].iter().zip(&shift).all(|(&c, &o)| slot(c, o).is_some()))
            .map(|x| weights[x])
            .sum();
        if mass > best.1 {
            best = (t, mass);
        }
    }
    let shift = decode(best.0);
    let mut boxes: std::collections::BTreeMap<Vec<usize>, Vec<usize>> = std::collections::BTreeMap::new();
    for x in 0..space.len() {
        let key: Option<Vec<usize>> = coords[x].iter().zip(&shift).map(|(&c, &o)| slot(c, o)).collect();
        if let Some(key) = key {
            boxes.entry(key).or_default().push(x);
        }
    }
    boxes.into_values().map(Subset::new).collect()
}

/// Greedy components: from the heaviest unblocked point `x`, take the
/// unblocked part of `B(x, D/2)`, then block its `m`-neighbourhood.
fn greedy(space: &MetricSpace, weights: &[f64], m: f64, diameter: f64) -> Vec<Subset> {
    let n = space.len();
    let mut order: Vec<usize> = (0..n).filter(|&x| weights[x] > 0.0).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    let mut blocked = vec![false; n];
    let mut components = Vec::new();
    for x in order {
        if blocked[x] {
            continue;
        }
        let comp: Vec<usize> = space.ball(x, diameter / 2.0).iter().filter(|&y| !blocked[y]).collect();
        let comp = Subset::new(comp);
        for y in space.neighborhood(&comp, m).iter() {
            blocked[y] = true;
        }
        components.push(comp);
    }
    components
}

/// A localised unit vector and how much of `‖b‖` it sees.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalisationResult {
    pub vector: Vec<C64>,
    pub support: Subset,
    pub support_diameter: f64,
    /// `‖b v‖_p`, recomputed from `vector`.
    pub value: f64,
    /// Certified lower bound for `‖b‖`.
    pub reference_lower: f64,
    pub reference_upper: f64,
    /// Window centre or component index that produced `vector`.
    pub origin: usize,
}

impl LocalisationResult {
    fn from_vector(b: &LpOperator, mut v: Vec<C64>, origin: usize, reference: &linalg::NormEstimate) -> Self {
        let p = b.p();
        let norm = vector_norm(&v, p);
        if norm > 0.0 {
            for z in v.iter_mut() {
                *z /= norm;
            }
        }
        let k = b.k();
        let support = Subset::new((0..v.len()).filter(|&i| v[i] != C64::new(0.0, 0.0)).map(|i| i / k).collect());
        let support_diameter = b.space().subset_diameter(&support);
        let value = vector_norm(&b.matrix().matvec(&v), p);
        LocalisationResult {
            vector: v,
            support,
            support_diameter,
            value,
            reference_lower: reference.lower,
            reference_upper: reference.upper,
            origin,
        }
    }

    /// `value / reference_lower`, 1 for the zero operator.
    pub fn ratio(&self) -> f64 {
        if self.reference_lower > 0.0 {
            self.value / self.reference_lower
        } else {
            1.0
        }
    }
}

/// Best localised vector over all ball windows `B(x, S/2)`.
pub fn onl_search(b: &LpOperator, window: f64, tol: f64) -> Result<LocalisationResult> {
    if !(window >= 0.0) {
        return Err(Error::Parameter(format!("window size must be non-negative, got {window}")));
    }
    let space = b.space();
    let reference = b.opnorm(tol);
    let mut best: Option<(f64, usize, Vec<C64>)> = None;
    let mut tried: std::collections::HashSet<Subset> = std::collections::HashSet::new();
    for x in 0..space.len() {
        let w = space.ball(x, window / 2.0);
        if !tried.insert(w.clone()) {
            continue;
        }
        let restricted = b.restrict(&Subset::full(space.len()), &w);
        let est = restricted.opnorm(tol);
        if best.as_ref().is_none_or(|(v, _, _)| est.lower > *v) {
            let mut witness = est.witness;
            if restricted.is_zero() {
                // Any unit vector in the window attains 0.
                witness = vec![C64::new(0.0, 0.0); b.dim()];
                witness[x * b.k()] = C64::new(1.0, 0.0);
            }
            best = Some((est.lower, x, witness));
        }
    }
    let (_, origin, v) = best.ok_or(Error::EmptySubset)?;
    Ok(LocalisationResult::from_vector(b, v, origin, &reference))
}

/// Outcome of the constructive localisation for quasi-local operators.
#[derive(Clone, Debug, PartialEq)]
pub struct QlLocalisation {
    pub result: LocalisationResult,
    pub sparsification: SparsificationResult,
    pub lipschitz: f64,
    pub eps: f64,
    /// `M = upper(‖b‖)`.
    pub norm_bound: f64,
    /// Band certificate for `sup_f ‖[b, f]‖`.
    pub commut_upper: f64,
    /// Whether the certificate places `b` in `Commut(L, ε)`.
    pub certified: bool,
    /// `lower(‖b‖) − 6ε`.
    pub threshold: f64,
    /// Conclusion `‖bv‖ ≥ threshold` holds.
    pub conclusion: bool,
}

/// Localises the opnorm witness `w` onto one component of a sparsification
/// of `μ({x}) = ‖w(x)‖^p` with separation `4/L`.
///
/// When sparsification succeeds and the commutator certificate is at most
/// `ε`, the conclusion `‖bv‖ ≥ lower(‖b‖) − 6ε` is asserted.
pub fn ql_localise(b: &LpOperator, lipschitz: f64, eps: f64, strategy: SparsifyStrategy, tol: f64) -> Result<QlLocalisation> {
    let p = b.p();
    if p.is_infinite() {
        return Err(Error::UnsupportedExponent { p: p.to_string(), what: "localisation (needs a finite exponent)" });
    }
    if !(lipschitz > 0.0 && eps > 0.0) {
        return Err(Error::Parameter(format!("L and ε must be positive, got L = {lipschitz}, ε = {eps}")));
    }
    let space = b.space().clone();
    let k = b.k();
    let est = b.opnorm(tol);
    let big_m = est.upper;
    let w = est.witness.clone();
    let weights: Vec<f64> =
        (0..space.len()).map(|x| (0..k).map(|a| w[x * k + a].norm().powf(p.value())).sum()).collect();
    let c = if big_m > 0.0 { (1.0 - (eps / big_m).powf(p.value()) / 2.0).max(1e-3) } else { 1.0 };
    let m = 4.0 / lipschitz;
    let sparsification = sparsify(&space, &weights, m, c, strategy)?;

    let mut best: Option<(f64, usize, Vec<C64>)> = None;
    for (i, comp) in sparsification.components.iter().enumerate() {
        let mask = comp.mask(space.len());
        let v: Vec<C64> = (0..w.len()).map(|j| if mask[j / k] { w[j] } else { C64::new(0.0, 0.0) }).collect();
        let norm = vector_norm(&v, p);
        if norm == 0.0 {
            continue;
        }
        let ratio = vector_norm(&b.matrix().matvec(&v), p) / norm;
        if best.as_ref().is_none_or(|(r, _, _)| ratio > *r) {
            best = Some((ratio, i, v));
        }
    }
    let (origin, v) = match best {
        Some((_, i, v)) => (i, v),
        None => (0, w),
    };
    let result = LocalisationResult::from_vector(b, v, origin, &est);
    let commut_upper = commut_bound_band(b, lipschitz).upper.unwrap_or(f64::INFINITY);
    let certified = commut_upper <= eps * (1.0 + 1e-12);
    let threshold = est.lower - 6.0 * eps;
    let conclusion = result.value >= threshold;
    if sparsification.success && certified && !conclusion {
        return Err(Error::Invariant(format!(
            "localised value {} is below ‖b‖ − 6ε = {threshold} on a certified instance",
            result.value
        )));
    }
    Ok(QlLocalisation {
        result,
        sparsification,
        lipschitz,
        eps,
        norm_bound: big_m,
        commut_upper,
        certified,
        threshold,
        conclusion,
    })
}

/// `L = ε / Σ_k μ_k r_k`, the largest Lipschitz constant the band
/// certificate places in `Commut(L, ε)`. Diagonal operators get `L = 1`.
pub fn lipschitz_for(b: &LpOperator, eps: f64) -> f64 {
    let weight = commut_weight(b);
    if weight > 0.0 {
        eps / weight
    } else {
        1.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InverseRow {
    pub radius: f64,
    pub nu_lower: f64,
    pub nu_upper: f64,
    /// `(δ‖a‖)^{⌈R/prop(a)⌉} / (1 − δ‖a‖)`.
    pub envelope: f64,
    /// `‖b − band_truncate(b, R)‖`, certified upper bound.
    pub truncation_defect: f64,
}

#[derive(Clone, Debug)]
pub struct InverseReport {
    pub inverse: LpOperator,
    pub residual: f64,
    pub contraction: f64,
    pub rows: Vec<InverseRow>,
    pub profile: QuasiLocalityProfile,
    pub curve: ApproximationCurve,
    /// `exp` of the least-squares slope of `log ν` over the positive samples.
    pub decay_rate: Option<f64>,
    /// Every sampled certified `ν` lies below the envelope.
    pub within_envelope: bool,
    /// `defect(R) ≥ lower(ν(R))` at every sample.
    pub defect_dominates: bool,
}

/// Residual bound for the dense inverse.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Solves `b = (Id − δa)⁻¹` densely and measures its quasi-locality.
pub fn inverse_experiment(a: &LpOperator, delta: f64, radii: &[f64], eps_grid: &[f64], tol: f64) -> Result<InverseReport> {
    let norm = a.opnorm(tol).upper;
    let contraction = delta.abs() * norm;
    if contraction >= 1.0 {
        return Err(Error::NotContraction { factor: delta, norm, product: contraction });
    }
    let id = LpOperator::identity(a.space().clone(), a.p(), a.k());
    let lhs = id.add(a, C64::new(1.0, 0.0), C64::new(-delta, 0.0))?;
    let solved = linalg::dense_solve(lhs.matrix(), &SparseMatrix::identity(a.dim())).ok_or(Error::Singular)?;
    let inverse = a.with_matrix(solved);
    // max(‖·‖₁, ‖·‖∞) bounds every ℓᵖ norm and is exact to rounding
    let defect = lhs.compose(&inverse)?.sub(&id)?;
    let residual = defect.matrix().norm_one().max(defect.matrix().norm_inf());
    if residual > RESIDUAL_TOL {
        return Err(Error::Invariant(format!("inverse residual {residual} exceeds {RESIDUAL_TOL}")));
    }
    let profile = ql_profile(&inverse, radii, EpsMode::Bounds, tol)?;
    let prop = a.propagation();
    let mut rows = Vec::with_capacity(radii.len());
    for e in &profile.entries {
        let steps = if prop > 0.0 { (e.radius / prop).ceil() } else { f64::INFINITY };
        let envelope = contraction.powf(steps) / (1.0 - contraction);
        let truncation_defect = inverse.off_band(e.radius).opnorm(tol).upper;
        rows.push(InverseRow { radius: e.radius, nu_lower: e.lower, nu_upper: e.upper, envelope, truncation_defect });
    }
    let within_envelope = rows.iter().all(|r| r.nu_upper <= r.envelope * (1.0 + 1e-9) + 1e-14);
    let defect_dominates = rows.iter().all(|r| r.truncation_defect >= r.nu_lower * (1.0 - 1e-12));
    let curve = roe_curve(&inverse, eps_grid, &[CurveMethod::Truncate], &RoeLadder { radii: Some(radii.to_vec()), scales: Vec::new() })?;
    let decay_rate = fit_decay(&rows);
    Ok(InverseReport { inverse, residual, contraction, rows, profile, curve, decay_rate, within_envelope, defect_dominates })
}

fn fit_decay(rows: &[InverseRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.nu_upper > 1e-13).map(|r| (r.radius, r.nu_upper.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some((sxy / sxx).exp())
}

/// One measured quantity of the descriptive sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyARow {
    /// `variation`, `onl_ratio`, `sparsification_fraction` or `localise_success`.
    pub quantity: String,
    pub r: f64,
    pub scale: f64,
    pub value: f64,
}

/// Desk-scale sweep of the quantities tied to Property A: partition
/// variation against support size, best window-localisation ratio for a
/// seeded band operator, sparsification fractions, and whether the
/// localisation conclusion held. No verdict is drawn.
pub fn property_a_report(space: Arc<MetricSpace>, p: Exponent, r_grid: &[f64], s_grid: &[f64], seed: u64) -> Result<Vec<PropertyARow>> {
    let mut rows = Vec::new();
    let n = space.len();
    let grid = space.grid_shape().is_some();
    let row = |quantity: &str, r: f64, scale: f64, value: f64| PropertyARow { quantity: quantity.to_string(), r, scale, value };

    for &scale in s_grid {
        let pou = if grid {
            grid_folner_pou(&space, scale.max(1.0).round() as usize, p)?
        } else {
            pou_from_cover(&space, &disjoint_cover(&space, scale), p, scale.max(1.0))?
        };
        for &r in r_grid {
            rows.push(row("variation", r, scale, variation(&space, &pou, r)));
        }
    }

    let b = LpOperator::random_band(space.clone(), p, 1, 1.0, 1.0, 1.0, seed)?;
    let norm = b.opnorm(NORM_TOL).upper;
    let b = if norm > 0.0 { b.scale(C64::new(1.0 / norm, 0.0)) } else { b };
    for &scale in s_grid {
        let found = onl_search(&b, scale, NORM_TOL)?;
        rows.push(row("onl_ratio", 0.0, scale, found.ratio()));
    }

    let uniform = vec![1.0; n];
    for &r in r_grid {
        for &scale in s_grid {
            let strategy = if grid { SparsifyStrategy::GridShift } else { SparsifyStrategy::Greedy { diameter: scale } };
            let c = 0.8;
            let res = sparsify(&space, &uniform, r, c, strategy)?;
            rows.push(row("sparsification_fraction", r, scale, res.fraction));
            if grid {
                break;
            }
        }
    }

    if !p.is_infinite() {
        for &r in r_grid {
            let eps = 0.05;
            let lipschitz = lipschitz_for(&b, eps).min(1.0 / r.max(1.0));
            let strategy = if grid { SparsifyStrategy::GridShift } else { SparsifyStrategy::Greedy { diameter: 2.0 * 4.0 / lipschitz } };
            let res = ql_localise(&b, lipschitz, eps, strategy, NORM_TOL)?;
            rows.push(row("localise_success", r, 4.0 / lipschitz, if res.conclusion { 1.0 } else { 0.0 }));
        }
    }
    Ok(rows)
}

/// `grid(dim, side)` as an `Arc`, for call sites building many operators.
pub fn grid_space(dim: usize, side: usize) -> Result<Arc<MetricSpace>> {
    Ok(Arc::new(MetricSpace::build(&SpaceSpec::Grid { dim, side })?))
}
