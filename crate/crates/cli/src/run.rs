//! Experiment orchestration: parameter cells run in parallel, rows are
//! collected in cell order.

use std::sync::Arc;

use coarse_op::approx::{
    defect_certificate_end, roe_curve, run_pipeline, CurveMethod, RoeLadder, NORM_TOL,
};
use coarse_op::locality::{inverse_experiment, lipschitz_for, onl_search, property_a_report, ql_localise, sparsify, SparsifyStrategy};
use coarse_op::lp_op::{ql_profile, EpsMode};
use coarse_op::pou::{disjoint_cover, dual_family, grid_folner_pou, pou_from_cover, PartitionOfUnity};
use coarse_op::{Exponent, LpOperator, MetricSpace};
use rand::Rng;
use rayon::prelude::*;

use crate::config::{ApproxMethod, Diagnostic, ExperimentConfig, ExperimentKind, PartitionMethod, ProfileMode, StrategyKind, WeightSpec};
use crate::report::{Check, Row, Table};
use crate::seeds;

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("invalid configuration:\n{}", .0.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n"))]
    Config(Vec<Diagnostic>),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("assertion failed: {0}")]
    Assertion(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) | Failure::Precondition(_) => 2,
            Failure::Assertion(_) => 3,
            Failure::Io(_) => 1,
        }
    }
}

impl From<coarse_op::Error> for Failure {
    fn from(e: coarse_op::Error) -> Self {
        match e {
            coarse_op::Error::Invariant(msg) => Failure::Assertion(msg),
            other => Failure::Precondition(other.to_string()),
        }
    }
}

#[derive(Debug, Default)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
}

impl RunOutput {
    pub fn failed(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

/// Rows (tagged with their table) and checks of one parameter cell.
#[derive(Default)]
struct CellOut {
    rows: Vec<(&'static str, Row)>,
    checks: Vec<Check>,
}

impl CellOut {
    fn row(&mut self, table: &'static str, row: Row) {
        self.rows.push((table, row));
    }

    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check { name: name.to_string(), passed, detail });
    }
}

/// Runs `f` over `cells` on the current pool; the first error in cell
/// order wins, so failures are reported identically for any worker count.
fn run_cells<C: Sync>(cells: &[C], f: impl Fn(usize, &C) -> Result<CellOut, Failure> + Sync) -> Result<Vec<CellOut>, Failure> {
    cells.par_iter().enumerate().map(|(i, c)| f(i, c)).collect::<Vec<_>>().into_iter().collect()
}

fn assemble(outs: Vec<CellOut>) -> RunOutput {
    let mut out = RunOutput::default();
    for cell in outs {
        for (name, row) in cell.rows {
            let idx = match out.tables.iter().position(|t| t.name == name) {
                Some(i) => i,
                None => {
                    out.tables.push(Table::new(name));
                    out.tables.len() - 1
                }
            };
            out.tables[idx].push(row);
        }
        out.checks.extend(cell.checks);
    }
    for t in &out.tables {
        for (r, stem) in t.inverted_bounds() {
            out.checks.push(Check {
                name: "bounds_ordered".into(),
                passed: false,
                detail: format!("{}.csv row {r}: {stem}_lower exceeds {stem}_upper", t.name),
            });
        }
    }
    out
}

fn base_row(kind: ExperimentKind, cell: usize) -> Row {
    Row::new().param_text("experiment", kind.as_str()).param_int("cell", cell)
}

/// Executes a validated configuration on a pool of `jobs` workers.
pub fn run(cfg: &ExperimentConfig, jobs: usize) -> Result<RunOutput, Failure> {
    let diags = cfg.validate();
    if !diags.is_empty() {
        return Err(Failure::Config(diags));
    }
    let space = cfg.resolve_space().map_err(|d| Failure::Config(vec![d]))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Failure::Io(std::io::Error::other(e)))?;
    pool.install(|| {
        let outs = match cfg.kind {
            ExperimentKind::Norms => norms(cfg, &space)?,
            ExperimentKind::Approx => approx(cfg, &space)?,
            ExperimentKind::Onl => onl(cfg, &space)?,
            ExperimentKind::Qlocalise => qlocalise(cfg, &space)?,
            ExperimentKind::Sparsify => sparsify_cells(cfg, &space)?,
            ExperimentKind::Inverse => inverse(cfg, &space)?,
            ExperimentKind::PropertyASweep => property_a(cfg, &space)?,
        };
        Ok(assemble(outs))
    })
}

/// One operator per instance, seeded from the `operator` stream.
fn operators(cfg: &ExperimentConfig, space: &Arc<MetricSpace>) -> Result<Vec<LpOperator>, Failure> {
    let spec = cfg.operator.as_ref().expect("validated");
    (0..cfg.instances)
        .into_par_iter()
        .map(|i| spec.build(space.clone(), seeds::derive(cfg.seed, "operator", i as u64)).map_err(Failure::from))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

fn exponents(cfg: &ExperimentConfig, ops: &[LpOperator]) -> Vec<Exponent> {
    if cfg.grid.p.is_empty() {
        vec![ops[0].p()]
    } else {
        cfg.grid.p.clone()
    }
}

fn or_default(v: &[f64], default: &[f64]) -> Vec<f64> {
    if v.is_empty() {
        default.to_vec()
    } else {
        v.to_vec()
    }
}

fn descending(v: &[f64]) -> Vec<f64> {
    let mut v = v.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v.dedup();
    v
}

/// (instance, exponent) pairs crossed with a parameter list.
fn cross<T: Clone>(instances: usize, ps: &[Exponent], params: &[T]) -> Vec<(usize, Exponent, T)> {
    let mut out = Vec::new();
    for i in 0..instances {
        for &p in ps {
            for t in params {
                out.push((i, p, t.clone()));
            }
        }
    }
    out
}

fn norms(cfg: &ExperimentConfig, space: &Arc<MetricSpace>) -> Result<Vec<CellOut>, Failure> {
    let ops = operators(cfg, space)?;
    let cells = cross(cfg.instances, &exponents(cfg, &ops), &[()]);
    let mode = match cfg.profile_mode {
        ProfileMode::ExactSmall => EpsMode::ExactSmall,
        ProfileMode::Bounds => EpsMode::Bounds,
    };
    run_cells(&cells, |cell, &(i, p, ())| {
        let b = ops[i].with_exponent(p);
        let est = b.opnorm(NORM_TOL);
        let mut out = CellOut::default();
        out.row(
            "norms",
            base_row(cfg.kind, cell)
                .param_int("instance", i)
                .param_text("p", p.to_string())
                .count("points", space.len())
                .count("nnz", b.nnz())
                .exact("propagation", b.propagation())
                .bounds("norm", est.lower, est.upper)
                .text("method", format!("{:?}", est.method).to_lowercase())
                .flag("converged", est.converged),
        );
        if !cfg.grid.radii.is_empty() {
            let prof = ql_profile(&b, &cfg.grid.radii, mode, NORM_TOL)?;
            for e in prof.entries {
                out.row(
                    "profile",
                    base_row(cfg.kind, cell)
                        .param_int("instance", i)
                        .param_text("p", p.to_string())
                        .param("radius", e.radius)
                        .bounds("nu", e.lower, e.upper)
                        .text("tag", e.tag.as_str()),
                );
            }
        }
        Ok(out)
    })
}

fn partition(space: &MetricSpace, method: PartitionMethod, p: Exponent, scale: f64) -> coarse_op::Result<PartitionOfUnity> {
    match method {
        PartitionMethod::Disjoint => pou_from_cover(space, &disjoint_cover(space, scale), p, 1.0),
        PartitionMethod::Bump => pou_from_cover(space, &disjoint_cover(space, scale), p, scale.max(1.0)),
        PartitionMethod::Folner => grid_folner_pou(space, scale.max(1.0).round() as usize, p),
    }
}

fn approx(cfg: &ExperimentConfig, space: &Arc<MetricSpace>) -> Result<Vec<CellOut>, Failure> {
    let ops = operators(cfg, space)?;
    let cells = cross(cfg.instances, &exponents(cfg, &ops), &cfg.methods);
    let eps = descending(&or_default(&cfg.grid.eps, &[0.1, 0.01]));
    let ladder = RoeLadder {
        radii: (!cfg.grid.radii.is_empty()).then(|| cfg.grid.radii.clone()),
        scales: or_default(&cfg.grid.scales, &RoeLadder::default().scales),
    };
    run_cells(&cells, |cell, &(i, p, method)| {
        let b = ops[i].with_exponent(p);
        let mut out = CellOut::default();
        let row = || base_row(cfg.kind, cell).param_int("instance", i).param_text("p", p.to_string());
        let curve_method = match method {
            ApproxMethod::Truncate => Some(CurveMethod::Truncate),
            ApproxMethod::End => Some(CurveMethod::PouEnd),
            ApproxMethod::Mid => Some(CurveMethod::PouMid),
            _ => None,
        };
        if let Some(m) = curve_method {
            for r in roe_curve(&b, &eps, &[m], &ladder)?.rows {
                out.row(
                    "approx_curve",
                    row()
                        .param_text("method", m.as_str())
                        .param("eps", r.eps)
                        .optional("radius", crate::report::Tag::Exact, r.radius)
                        .bounds("defect", r.defect_lower, r.defect_upper)
                        .optional("ladder_parameter", crate::report::Tag::Param, r.radius.map(|_| r.parameter)),
                );
            }
        }
        if method == ApproxMethod::Certificate {
            let pmethod = cfg.partition.as_ref().map_or(PartitionMethod::Disjoint, |s| s.method);
            let ls = or_default(&cfg.grid.lipschitz, &[0.5, 0.2, 0.1]);
            for &scale in &ladder.scales {
                let pou = partition(space, pmethod, p, scale)?;
                for &l in &ls {
                    let dual = dual_family(space, &pou, l)?;
                    let cert = defect_certificate_end(&b, &pou, &dual)?;
                    out.row(
                        "approx_certificate",
                        row()
                            .param("scale", scale)
                            .param("lipschitz", l)
                            .exact("defect", cert.defect)
                            .exact("bound", cert.bound)
                            .count("worst_member", cert.worst_member),
                    );
                }
            }
        }
        if method == ApproxMethod::Pipeline {
            for &e in &eps {
                let rep = run_pipeline(&b, e, seeds::derive(cfg.seed, "witness", cell as u64), NORM_TOL)?;
                let s = &rep.schedule;
                out.row(
                    "approx_pipeline",
                    row()
                        .param("eps", e)
                        .upper("norm_bound", s.norm_bound)
                        .exact("commut_eps", s.commut_eps)
                        .exact("commut_weight", s.commut_weight)
                        .exact("lipschitz", s.lipschitz)
                        .upper("commut_upper", s.commut_upper)
                        .exact("localise_fraction", s.localise_fraction)
                        .exact("localise_separation", s.localise_separation)
                        .exact("support_diameter", s.support_diameter)
                        .count("ball_bound", s.ball_bound)
                        .exact("variation_radius", s.variation_radius)
                        .exact("variation_target", s.variation_target)
                        .count("box_side", s.box_side)
                        .exact("variation", s.variation)
                        .bounds("defect", rep.defect.lower, rep.defect.upper)
                        .bounds("approximant_norm", rep.approximant_norm.lower, rep.approximant_norm.upper)
                        .upper("transfer_commut", rep.transfer_commut)
                        .upper("transfer_bound", rep.transfer_bound),
                );
                out.check("pipeline_defect", rep.within_eps, format!("cell {cell}: ‖b − b′‖ ≤ {} vs ε = {e}", rep.defect.upper));
                out.check(
                    "pipeline_transfer",
                    rep.transfer_holds,
                    format!("cell {cell}: ‖[b − b′, f]‖ ≤ {} vs {}", rep.transfer_commut, rep.transfer_bound),
                );
            }
        }
        Ok(out)
    })
}

fn onl(cfg: &ExperimentConfig, space: &Arc<MetricSpace>) -> Result<Vec<CellOut>, Failure> {
    let ops = operators(cfg, space)?;
    let cells = cross(cfg.instances, &exponents(cfg, &ops), &or_default(&cfg.grid.scales, &[0.0, 2.0, 4.0, 8.0]));
    run_cells(&cells, |cell, &(i, p, window)| {
        let b = ops[i].with_exponent(p);
        let res = onl_search(&b, window, NORM_TOL)?;
        let mut out = CellOut::default();
        out.row(
            "onl",
            base_row(cfg.kind, cell)
                .param_int("instance", i)
                .param_text("p", p.to_string())
                .param("window", window)
                .count("center", res.origin)
                .exact("value", res.value)
                .bounds("norm", res.reference_lower, res.reference_upper)
                .measured("ratio", res.ratio())
                .exact("support_diameter", res.support_diameter),
        );
        out.check(
            "onl_value_below_norm",
            res.value <= res.reference_upper * (1.0 + 1e-9) + 1e-12,
            format!("cell {cell}: ‖bv‖ = {} vs upper {}", res.value, res.reference_upper),
        );
        Ok(out)
    })
}

fn strategy(cfg: &ExperimentConfig, space: &MetricSpace, m: f64) -> SparsifyStrategy {
    let kind = cfg.strategy.unwrap_or(if space.grid_shape().is_some() { StrategyKind::GridShift } else { StrategyKind::Greedy });
    match kind {
        StrategyKind::GridShift => SparsifyStrategy::GridShift,
        StrategyKind::Greedy => SparsifyStrategy::Greedy { diameter: cfg.grid.scales.first().copied().unwrap_or(2.0 * m) },
    }
}

fn qlocalise(cfg: &ExperimentConfig, space: &Arc<MetricSpace>) -> Result<Vec<CellOut>, Failure> {
    let ops = operators(cfg, space)?;
    let eps = or_default(&cfg.grid.eps, &[0.05]);
    let ls: Vec<Option<f64>> = if cfg.grid.lipschitz.is_empty() { vec![None] } else { cfg.grid.lipschitz.iter().map(|&l| Some(l)).collect() };
    let params: Vec<(f64, Option<f64>)> = eps.iter().flat_map(|&e| ls.iter().map(move |&l| (e, l))).collect();
    let cells = cross(cfg.instances, &exponents(cfg, &ops), &params);
    run_cells(&cells, |cell, &(i, p, (e, l))| {
        let b = ops[i].with_exponent(p);
        let l = l.unwrap_or_else(|| lipschitz_for(&b, e));
        let res = ql_localise(&b, l, e, strategy(cfg, space, 4.0 / l), NORM_TOL)?;
        let sp = &res.sparsification;
        let mut out = CellOut::default();
        out.row(
            "qlocalise",
            base_row(cfg.kind, cell)
                .param_int("instance", i)
                .param_text("p", p.to_string())
                .param("eps", e)
                .param("lipschitz", l)
                .exact("separation", sp.separation)
                .exact("mass_target", sp.target)
                .exact("fraction", sp.fraction)
                .flag("sparsified", sp.success)
                .exact("diameter_bound", sp.diameter_bound)
                .exact("support_diameter", res.result.support_diameter)
                .exact("value", res.result.value)
                .bounds("norm", res.result.reference_lower, res.result.reference_upper)
                .upper("commut_upper", res.commut_upper)
                .flag("certified", res.certified)
                .exact("threshold", res.threshold)
                .flag("conclusion", res.conclusion),
        );
        if sp.success && res.certified {
            out.check("localisation", res.conclusion, format!("cell {cell}: ‖bv‖ = {} vs {}", res.result.value, res.threshold));
        }
        Ok(out)
    })
}

fn weights(cfg: &ExperimentConfig, n: usize, instance: usize) -> Result<Vec<f64>, Failure> {
    Ok(match &cfg.weights {
        WeightSpec::Uniform => vec![1.0; n],
        WeightSpec::Random => {
            let mut rng = seeds::rng(cfg.seed, "weights", instance as u64);
            (0..n).map(|_| rng.random::<f64>()).collect()
        }
        WeightSpec::Atom(x) => (0..n).map(|y| if y == *x { 1.0 } else { 0.0 }).collect(),
        WeightSpec::File(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str(&text).map_err(|e| Failure::Precondition(format!("weights file {}: {e}", path.display())))?
        }
    })
}

fn sparsify_cells(cfg: &ExperimentConfig, space: &Arc<MetricSpace>) -> Result<Vec<CellOut>, Failure> {
    let ms = or_default(&cfg.grid.m, &[2.0]);
    let cs = or_default(&cfg.grid.c, &[0.8]);
    let mut cells = Vec::new();
    for i in 0..cfg.instances {
        for &m in &ms {
            for &c in &cs {
                cells.push((i, m, c));
            }
        }
    }
    run_cells(&cells, |cell, &(i, m, c)| {
        let w = weights(cfg, space.len(), i)?;
        let strat = strategy(cfg, space, m);
        let res = sparsify(space, &w, m, c, strat)?;
        let guaranteed = res.schedule.map(|s| s.guaranteed_fraction);
        let mut out = CellOut::default();
        out.row(
            "sparsify",
            base_row(cfg.kind, cell)
                .param_int("instance", i)
                .param("m", m)
                .param("c", c)
                .param_text("strategy", if matches!(strat, SparsifyStrategy::GridShift) { "grid_shift" } else { "greedy" })
                .count("components", res.components.len())
                .count("box_side", res.schedule.map_or(0, |s| s.box_side))
                .optional("guaranteed_fraction", crate::report::Tag::Exact, guaranteed)
                .exact("fraction", res.fraction)
                .exact("total_mass", res.total_mass)
                .flag("success", res.success)
                .exact("achieved_separation", res.achieved_separation)
                .exact("diameter_bound", res.diameter_bound)
                .exact("achieved_diameter", res.achieved_diameter),
        );
        if let Some(g) = guaranteed {
            out.check("averaging_bound", res.fraction >= g - 1e-12, format!("cell {cell}: fraction {} vs {g}", res.fraction));
        }
        Ok(out)
    })
}

fn inverse(cfg: &ExperimentConfig, space: &Arc<MetricSpace>) -> Result<Vec<CellOut>, Failure> {
    let ops = operators(cfg, space)?;
    let cells = cross(cfg.instances, &exponents(cfg, &ops), &cfg.grid.delta);
    let radii = or_default(&cfg.grid.radii, &(1..=20).map(f64::from).collect::<Vec<_>>());
    let eps = descending(&or_default(&cfg.grid.eps, &[0.1, 0.01, 0.001]));
    run_cells(&cells, |cell, &(i, p, delta)| {
        let a = ops[i].with_exponent(p);
        let rep = inverse_experiment(&a, delta, &radii, &eps, NORM_TOL)?;
        let mut out = CellOut::default();
        let row = || base_row(cfg.kind, cell).param_int("instance", i).param_text("p", p.to_string()).param("delta", delta);
        out.row(
            "inverse",
            row()
                .upper("contraction", rep.contraction)
                .upper("residual", rep.residual)
                .optional("decay_rate", crate::report::Tag::Measured, rep.decay_rate)
                .flag("within_envelope", rep.within_envelope)
                .flag("defect_dominates", rep.defect_dominates),
        );
        for r in &rep.rows {
            out.row(
                "inverse_profile",
                row()
                    .param("radius", r.radius)
                    .bounds("nu", r.nu_lower, r.nu_upper)
                    .exact("envelope", r.envelope)
                    .upper("truncation_defect", r.truncation_defect),
            );
        }
        for r in &rep.curve.rows {
            out.row(
                "inverse_curve",
                row()
                    .param("eps", r.eps)
                    .optional("radius", crate::report::Tag::Exact, r.radius)
                    .bounds("defect", r.defect_lower, r.defect_upper),
            );
        }
        // The envelope bounds the true profile; only end-point profiles are exact.
        if p.is_endpoint() {
            out.check("neumann_envelope", rep.within_envelope, format!("cell {cell}: δ = {delta}"));
        }
        out.check("defect_dominates_profile", rep.defect_dominates, format!("cell {cell}: δ = {delta}"));
        Ok(out)
    })
}

fn property_a(cfg: &ExperimentConfig, space: &Arc<MetricSpace>) -> Result<Vec<CellOut>, Failure> {
    let ps = if cfg.grid.p.is_empty() { vec![Exponent::TWO] } else { cfg.grid.p.clone() };
    let radii = or_default(&cfg.grid.radii, &[1.0, 2.0, 4.0]);
    let scales = or_default(&cfg.grid.scales, &[2.0, 4.0, 8.0, 16.0]);
    let seed = seeds::derive(cfg.seed, "operator", 0);
    run_cells(&ps, |cell, &p| {
        let mut out = CellOut::default();
        for r in property_a_report(space.clone(), p, &radii, &scales, seed)? {
            out.row(
                "property_a",
                base_row(cfg.kind, cell)
                    .param_text("p", p.to_string())
                    .param_text("quantity", r.quantity)
                    .param("r", r.r)
                    .param("scale", r.scale)
                    .measured("value", r.value),
            );
        }
        Ok(out)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::OperatorSpec;
    use coarse_op::SpaceSpec;

    #[test]
    fn minimal_norms_config_gives_one_row() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Norms);
        cfg.space = Some(SpaceSpec::Path { n: 10 });
        cfg.operator = Some(OperatorSpec::Diagonal { p: Exponent::TWO, k: 1, values: None });
        let out = run(&cfg, 1).unwrap();
        assert_eq!(out.tables.len(), 1);
        assert_eq!(out.tables[0].rows.len(), 1);
        assert!(out.failed().is_empty());
    }

    #[test]
    fn contraction_violation_is_a_precondition() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Inverse);
        cfg.space = Some(SpaceSpec::Path { n: 10 });
        cfg.operator = Some(OperatorSpec::Shift { p: Exponent::ONE });
        cfg.grid.delta = vec![1.5];
        let err = run(&cfg, 1).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("contraction"), "{err}");
    }
}
