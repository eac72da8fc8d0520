use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::LpOperator;
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::linalg::C64;
use crate::space::{MetricSpace, SpaceSpec};

/// JSON form of an operator:
/// `{"p": 2 | "inf", "k": 1, "space": {...}, "entries": [[x, y, [[re, im], ...]], ...]}`
/// with each block listed row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorFile {
    pub p: Exponent,
    pub k: usize,
    pub space: SpaceSpec,
    pub entries: Vec<(usize, usize, Vec<[f64; 2]>)>,
}

impl OperatorFile {
    pub fn from_operator(b: &LpOperator) -> Self {
        let entries = b
            .blocks()
            .into_iter()
            .map(|((x, y), block)| (x, y, block.iter().map(|z| [z.re, z.im]).collect()))
            .collect();
        OperatorFile { p: b.p(), k: b.k(), space: b.space().spec().clone(), entries }
    }

    /// Builds the operator, constructing its space from the embedded spec.
    pub fn into_operator(self) -> Result<LpOperator> {
        let space = Arc::new(MetricSpace::build(&self.space)?);
        self.into_operator_on(space)
    }

    /// Builds the operator on an already constructed space, which must match
    /// the embedded spec.
    pub fn into_operator_on(self, space: Arc<MetricSpace>) -> Result<LpOperator> {
        if *space.spec() != self.space {
            return Err(Error::Incompatible("operator file refers to a different space".into()));
        }
        let blocks = self
            .entries
            .into_iter()
            .map(|(x, y, block)| (x, y, block.into_iter().map(|[re, im]| C64::new(re, im)).collect()));
        LpOperator::from_blocks(space, self.p, self.k, blocks)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
