//! Experiment configuration files and their validation.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use coarse_op::lp_op::OperatorFile;
use coarse_op::{Exponent, LpOperator, MetricSpace, SpaceSpec, C64};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const KINDS: [&str; 7] = ["approx", "onl", "qlocalise", "sparsify", "inverse", "property-a-sweep", "norms"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Approx,
    Onl,
    Qlocalise,
    Sparsify,
    Inverse,
    PropertyASweep,
    Norms,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Approx => "approx",
            ExperimentKind::Onl => "onl",
            ExperimentKind::Qlocalise => "qlocalise",
            ExperimentKind::Sparsify => "sparsify",
            ExperimentKind::Inverse => "inverse",
            ExperimentKind::PropertyASweep => "property-a-sweep",
            ExperimentKind::Norms => "norms",
        }
    }

    fn needs_operator(self) -> bool {
        !matches!(self, ExperimentKind::Sparsify | ExperimentKind::PropertyASweep)
    }
}

/// How to obtain the operator of an experiment. Seeded variants draw their
/// seed from the `operator` stream, one per instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    Band {
        p: Exponent,
        #[serde(default = "one")]
        k: usize,
        radius: f64,
        #[serde(default = "unit")]
        density: f64,
        #[serde(default = "unit")]
        magnitude: f64,
        /// Rescale to `upper(‖b‖) = 1`.
        #[serde(default)]
        normalize: bool,
    },
    Diagonal {
        p: Exponent,
        #[serde(default = "one")]
        k: usize,
        /// One value per point; all ones when absent.
        #[serde(default)]
        values: Option<Vec<f64>>,
    },
    /// `S e_y = e_{y+1}` along the point order.
    Shift {
        p: Exponent,
    },
    /// `½(S + S*)`.
    SymmetricShift {
        p: Exponent,
    },
    /// `Σ_j λ^j a^j` for the inner operator `a`.
    Neumann {
        lambda: f64,
        #[serde(default = "tail")]
        tail_tol: f64,
        base: Box<OperatorSpec>,
    },
    File {
        path: PathBuf,
    },
}

fn one() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

fn tail() -> f64 {
    1e-13
}

impl OperatorSpec {
    pub fn exponent(&self) -> Option<Exponent> {
        match self {
            OperatorSpec::Band { p, .. }
            | OperatorSpec::Diagonal { p, .. }
            | OperatorSpec::Shift { p }
            | OperatorSpec::SymmetricShift { p } => Some(*p),
            OperatorSpec::Neumann { base, .. } => base.exponent(),
            OperatorSpec::File { .. } => None,
        }
    }

    pub fn build(&self, space: Arc<MetricSpace>, seed: u64) -> coarse_op::Result<LpOperator> {
        let n = space.len();
        let shift = |space: Arc<MetricSpace>, p| {
            LpOperator::from_blocks(space, p, 1, (1..n).map(|y| (y, y - 1, vec![C64::new(1.0, 0.0)])))
        };
        match self {
            OperatorSpec::Band { p, k, radius, density, magnitude, normalize } => {
                let b = LpOperator::random_band(space, *p, *k, *radius, *density, *magnitude, seed)?;
                let norm = b.opnorm(coarse_op::approx::NORM_TOL).upper;
                Ok(if *normalize && norm > 0.0 { b.scale(C64::new(1.0 / norm, 0.0)) } else { b })
            }
            OperatorSpec::Diagonal { p, k, values } => {
                let values = values.clone().unwrap_or_else(|| vec![1.0; n]);
                LpOperator::multiplication(space, *p, *k, &values)
            }
            OperatorSpec::Shift { p } => shift(space, *p),
            OperatorSpec::SymmetricShift { p } => {
                let s = shift(space.clone(), *p)?;
                let adjoint = LpOperator::new(space, *p, 1, s.matrix().adjoint())?;
                s.add(&adjoint, C64::new(0.5, 0.0), C64::new(0.5, 0.0))
            }
            OperatorSpec::Neumann { lambda, tail_tol, base } => {
                let a = base.build(space, seed)?;
                LpOperator::neumann_quasilocal(&a, *lambda, *tail_tol)
            }
            OperatorSpec::File { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| coarse_op::Error::Parameter(format!("cannot read {}: {e}", path.display())))?;
                OperatorFile::from_json(&text)?.into_operator_on(space)
            }
        }
    }

    /// The space recorded in an operator file, if this spec is one.
    pub fn file_space(&self) -> Option<Result<SpaceSpec, String>> {
        match self {
            OperatorSpec::File { path } => Some(
                std::fs::read_to_string(path)
                    .map_err(|e| format!("cannot read {}: {e}", path.display()))
                    .and_then(|t| OperatorFile::from_json(&t).map_err(|e| e.to_string()))
                    .map(|f| f.space),
            ),
            OperatorSpec::Neumann { base, .. } => base.file_space(),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionMethod {
    /// Characteristic functions of a Voronoi cover at radius `scale`.
    Disjoint,
    /// Bump functions of width `scale` over the same cover.
    Bump,
    /// Følner boxes of side `scale` (grids).
    Folner,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSpec {
    pub method: PartitionMethod,
    pub p: Exponent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightSpec {
    Uniform,
    /// Independent uniform weights on `[0, 1)`, one draw per point.
    Random,
    /// All mass on one point.
    Atom(usize),
    /// JSON array of per-point weights.
    File(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    GridShift,
    Greedy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApproxMethod {
    Truncate,
    End,
    Mid,
    /// End-point defect against its certificate for every (scale, L) cell.
    Certificate,
    /// The full interior schedule on a grid.
    Pipeline,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileMode {
    ExactSmall,
    #[default]
    Bounds,
}

/// Parameter grids; empty lists fall back to per-experiment defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParameterGrid {
    pub eps: Vec<f64>,
    pub radii: Vec<f64>,
    /// Window sizes, cover radii or box sides.
    pub scales: Vec<f64>,
    pub lipschitz: Vec<f64>,
    pub m: Vec<f64>,
    pub c: Vec<f64>,
    pub p: Vec<Exponent>,
    pub delta: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Optional when the operator comes from a file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionSpec>,
    #[serde(default)]
    pub grid: ParameterGrid,
    #[serde(default = "default_methods")]
    pub methods: Vec<ApproxMethod>,
    #[serde(default = "default_weights")]
    pub weights: WeightSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<StrategyKind>,
    #[serde(default)]
    pub profile_mode: ProfileMode,
    /// Seeded operator draws per parameter cell.
    #[serde(default = "one")]
    pub instances: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn default_methods() -> Vec<ApproxMethod> {
    vec![ApproxMethod::Truncate]
}

fn default_weights() -> WeightSpec {
    WeightSpec::Uniform
}

/// A problem with one field of a configuration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn diag(field: &str, message: impl Into<String>) -> Diagnostic {
    Diagnostic { field: field.to_string(), message: message.into() }
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            space: None,
            operator: None,
            partition: None,
            grid: ParameterGrid::default(),
            methods: default_methods(),
            weights: default_weights(),
            strategy: None,
            profile_mode: ProfileMode::default(),
            instances: 1,
            seed: 0,
            out: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, Vec<Diagnostic>> {
        let value: Value = serde_json::from_str(text).map_err(|e| vec![diag("config", e.to_string())])?;
        let shape = validate_value(&value);
        if !shape.is_empty() {
            return Err(shape);
        }
        serde_json::from_value(value).map_err(|e| vec![diag("config", e.to_string())])
    }

    pub fn load(path: &Path) -> Result<Self, Vec<Diagnostic>> {
        let text = std::fs::read_to_string(path).map_err(|e| vec![diag("config", format!("cannot read {}: {e}", path.display()))])?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// The space, read from the operator file when not given inline.
    pub fn resolve_space(&self) -> Result<Arc<MetricSpace>, Diagnostic> {
        let spec = match (&self.space, self.operator.as_ref().and_then(|o| o.file_space())) {
            (Some(s), _) => s.clone(),
            (None, Some(Ok(s))) => s,
            (None, Some(Err(e))) => return Err(diag("operator.path", e)),
            (None, None) => return Err(diag("space", "missing; give a space or an operator file")),
        };
        MetricSpace::build(&spec).map(Arc::new).map_err(|e| diag("space", e.to_string()))
    }

    /// Cross-field checks that need no computation beyond building the space.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let space = match self.resolve_space() {
            Ok(s) => Some(s),
            Err(d) => {
                out.push(d);
                None
            }
        };
        if self.kind.needs_operator() && self.operator.is_none() {
            out.push(diag("operator", format!("required for {} experiments", self.kind.as_str())));
        }
        if self.instances == 0 {
            out.push(diag("instances", "must be at least 1"));
        }
        let op_p = self.operator.as_ref().and_then(|o| o.exponent());
        if let (Some(part), Some(p)) = (&self.partition, op_p) {
            if self.grid.p.is_empty() && part.p != p {
                out.push(diag("partition.p", format!("partition exponent {} differs from operator exponent {p}", part.p)));
            }
        }
        if let Some(OperatorSpec::Diagonal { values: Some(v), .. }) = &self.operator {
            if let Some(s) = &space {
                if v.len() != s.len() {
                    out.push(diag("operator.values", format!("expected {} values, got {}", s.len(), v.len())));
                }
            }
        }
        if let Some(OperatorSpec::Neumann { lambda, .. }) = &self.operator {
            if !(lambda.is_finite() && *lambda >= 0.0) {
                out.push(diag("operator.lambda", "must be finite and non-negative"));
            }
        }
        let g = &self.grid;
        let positive = |name: &str, v: &[f64], out: &mut Vec<Diagnostic>| {
            if let Some(x) = v.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
                out.push(diag(&format!("grid.{name}"), format!("entries must be positive, found {x}")));
            }
        };
        positive("eps", &g.eps, &mut out);
        positive("lipschitz", &g.lipschitz, &mut out);
        if matches!(self.kind, ExperimentKind::Onl) {
            if let Some(x) = g.scales.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
                out.push(diag("grid.scales", format!("window diameters must be non-negative, found {x}")));
            }
        } else {
            positive("scales", &g.scales, &mut out);
        }
        if let Some(x) = g.radii.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            out.push(diag("grid.radii", format!("entries must be non-negative, found {x}")));
        }
        if let Some(x) = g.m.iter().find(|x| !(**x >= 1.0)) {
            out.push(diag("grid.m", format!("separations must be at least 1, found {x}")));
        }
        if let Some(x) = g.c.iter().find(|x| !(**x > 0.0 && **x <= 1.0)) {
            out.push(diag("grid.c", format!("mass fractions must lie in (0, 1], found {x}")));
        }
        if let Some(x) = g.delta.iter().find(|x| !x.is_finite()) {
            out.push(diag("grid.delta", format!("must be finite, found {x}")));
        }
        match self.kind {
            ExperimentKind::Inverse if g.delta.is_empty() => out.push(diag("grid.delta", "inverse experiments need at least one δ")),
            ExperimentKind::Approx if self.methods.is_empty() => out.push(diag("methods", "at least one method is required")),
            ExperimentKind::Sparsify => {
                if let (Some(StrategyKind::GridShift), Some(s)) = (self.strategy, &space) {
                    if s.grid_shape().is_none() {
                        out.push(diag("strategy", "grid_shift needs a grid or path space"));
                    }
                }
                if let (WeightSpec::Atom(x), Some(s)) = (&self.weights, &space) {
                    if *x >= s.len() {
                        out.push(diag("weights.atom", format!("point {x} outside a space of {} points", s.len())));
                    }
                }
            }
            _ => {}
        }
        out
    }
}

/// Shape checks on raw JSON, so an unknown kind yields one readable diagnostic.
pub fn validate_value(value: &Value) -> Vec<Diagnostic> {
    let Some(obj) = value.as_object() else {
        return vec![diag("config", "expected a JSON object")];
    };
    match obj.get("kind").and_then(Value::as_str) {
        None => vec![diag("kind", format!("missing; expected one of {}", KINDS.join(", ")))],
        Some(k) if !KINDS.contains(&k) => {
            vec![diag("kind", format!("unknown experiment kind '{k}'; expected one of {}", KINDS.join(", ")))]
        }
        Some(_) => match serde_json::from_value::<ExperimentConfig>(value.clone()) {
            Ok(_) => Vec::new(),
            Err(e) => vec![diag("config", e.to_string())],
        },
    }
}

/// Parses and validates a configuration text; empty means runnable.
pub fn diagnostics(text: &str) -> Vec<Diagnostic> {
    match ExperimentConfig::from_json(text) {
        Ok(cfg) => cfg.validate(),
        Err(d) => d,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Norms);
        cfg.space = Some(SpaceSpec::Path { n: 10 });
        cfg.operator = Some(OperatorSpec::Diagonal { p: Exponent::TWO, k: 1, values: None });
        cfg
    }

    #[test]
    fn round_trip() {
        let mut cfg = minimal();
        cfg.grid.eps = vec![0.1, 0.01];
        cfg.grid.p = vec![Exponent::INFINITY, Exponent::new(1.5).unwrap()];
        cfg.partition = Some(PartitionSpec { method: PartitionMethod::Folner, p: Exponent::TWO });
        cfg.operator = Some(OperatorSpec::Neumann {
            lambda: 0.3,
            tail_tol: 1e-12,
            base: Box::new(OperatorSpec::Band { p: Exponent::TWO, k: 2, radius: 1.0, density: 0.5, magnitude: 1.0, normalize: true }),
        });
        cfg.weights = WeightSpec::Atom(3);
        let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn well_formed_has_no_diagnostics() {
        assert!(minimal().validate().is_empty());
    }

    #[test]
    fn exponent_mismatch_is_one_diagnostic() {
        let mut cfg = minimal();
        cfg.partition = Some(PartitionSpec { method: PartitionMethod::Disjoint, p: Exponent::ONE });
        let d = cfg.validate();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].field, "partition.p");
    }

    #[test]
    fn unknown_kind_lists_allowed() {
        let d = diagnostics(r#"{"kind": "frobnicate", "space": {"type": "path", "params": {"n": 3}}}"#);
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("property-a-sweep"));
    }
}
