//! Band operators as sums of block multipliers times partial translations.
//!
//! The block support of `b` is a bipartite graph between row points and
//! column points. A proper edge colouring with Δ colours (Δ the maximum
//! degree) splits it into Δ matchings; each matching is a partial
//! translation. Colouring uses alternating-path recolouring, which always
//! succeeds with Δ colours on bipartite graphs.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::linalg::C64;
use crate::lp_op::LpOperator;
use crate::space::MetricSpace;

/// A partial injection `t` stored as `(y, t(y))` pairs, sorted by `y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialTranslation {
    pairs: Vec<(usize, usize)>,
    displacement: f64,
}

impl PartialTranslation {
    /// Checks injectivity and records `max d(y, t(y))`.
    pub fn new(space: &MetricSpace, mut pairs: Vec<(usize, usize)>) -> Result<Self> {
        let n = space.len();
        pairs.sort_unstable();
        let mut seen_target = vec![false; n];
        for (i, &(y, x)) in pairs.iter().enumerate() {
            for idx in [y, x] {
                if idx >= n {
                    return Err(Error::OutOfRange { index: idx, n });
                }
            }
            if i > 0 && pairs[i - 1].0 == y {
                return Err(Error::Invariant(format!("point {y} has two images")));
            }
            if std::mem::replace(&mut seen_target[x], true) {
                return Err(Error::Invariant(format!("point {x} has two preimages")));
            }
        }
        let displacement = pairs.iter().map(|&(y, x)| space.dist(x, y)).fold(0.0, f64::max);
        Ok(PartialTranslation { pairs, displacement })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn displacement(&self) -> f64 {
        self.displacement
    }

    /// The operator `V e_y = e_{t(y)}` with identity blocks.
    pub fn operator(&self, space: Arc<MetricSpace>, p: Exponent, k: usize) -> Result<LpOperator> {
        let block: Vec<C64> = (0..k * k).map(|e| C64::new(if e / k == e % k { 1.0 } else { 0.0 }, 0.0)).collect();
        LpOperator::from_blocks(space, p, k, self.pairs.iter().map(|&(y, x)| (x, y, block.clone())))
    }
}

/// One term `f_k V_k`: the multiplier block at each target point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandPart {
    pub multiplier: Vec<(usize, Vec<C64>)>,
    pub translation: PartialTranslation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandDecomposition {
    pub parts: Vec<BandPart>,
}

impl BandDecomposition {
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// `Σ_k f_k V_k` on the space, exponent and fiber of `template`.
    pub fn reconstruct(&self, template: &LpOperator) -> Result<LpOperator> {
        let mut blocks = Vec::new();
        for part in &self.parts {
            let source: std::collections::HashMap<usize, usize> =
                part.translation.pairs().iter().map(|&(y, x)| (x, y)).collect();
            for (x, block) in &part.multiplier {
                let y = *source
                    .get(x)
                    .ok_or_else(|| Error::Invariant(format!("multiplier at {x} outside the translation range")))?;
                blocks.push((*x, y, block.clone()));
            }
        }
        LpOperator::from_blocks(template.space().clone(), template.p(), template.k(), blocks)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Proper edge colouring of a bipartite graph with `max degree` colours.
/// Returns one colour per edge, in input order.
fn bipartite_edge_coloring(n: usize, edges: &[(usize, usize)]) -> (usize, Vec<usize>) {
    let mut degree_left = vec![0usize; n];
    let mut degree_right = vec![0usize; n];
    for &(x, y) in edges {
        degree_left[x] += 1;
        degree_right[y] += 1;
    }
    let delta = degree_left.iter().chain(&degree_right).copied().max().unwrap_or(0);
    // at[side][vertex][colour] = neighbour on the other side.
    let mut at: [Vec<Vec<Option<usize>>>; 2] = [vec![vec![None; delta]; n], vec![vec![None; delta]; n]];
    for &(x, y) in edges {
        let a = (0..delta).find(|&c| at[0][x][c].is_none()).expect("degree bound");
        let b = (0..delta).find(|&c| at[1][y][c].is_none()).expect("degree bound");
        if at[1][y][a].is_some() {
            // Walk the a/b alternating path from y and swap its colours;
            // in a bipartite graph it cannot end at x, so a becomes free at y.
            let mut path: Vec<(usize, usize, usize)> = Vec::new(); // (left, right, colour)
            let (mut side, mut v, mut colour) = (1usize, y, a);
            while let Some(u) = at[side][v][colour] {
                let (left, right) = if side == 0 { (v, u) } else { (u, v) };
                path.push((left, right, colour));
                side = 1 - side;
                v = u;
                colour = if colour == a { b } else { a };
            }
            for &(l, r, c) in &path {
                at[0][l][c] = None;
                at[1][r][c] = None;
            }
            for &(l, r, c) in &path {
                let swapped = if c == a { b } else { a };
                at[0][l][swapped] = Some(r);
                at[1][r][swapped] = Some(l);
            }
        }
        at[0][x][a] = Some(y);
        at[1][y][a] = Some(x);
    }
    let colours = edges
        .iter()
        .map(|&(x, y)| (0..delta).find(|&c| at[0][x][c] == Some(y)).expect("every edge is coloured"))
        .collect();
    (delta, colours)
}

/// `b = Σ_k f_k V_k` with `V_k` partial translations and `f_k(x) = b_{x, t_k⁻¹(x)}`.
///
/// The number of parts equals the maximum number of blocks in a row or
/// column, which is at most `geometry_profile(propagation(b))`.
pub fn band_decompose(b: &LpOperator) -> BandDecomposition {
    let blocks = b.blocks();
    let edges: Vec<(usize, usize)> = blocks.keys().copied().collect();
    let n = b.space().len();
    let (delta, colours) = bipartite_edge_coloring(n, &edges);
    let mut grouped: Vec<(Vec<(usize, usize)>, Vec<(usize, Vec<C64>)>)> = vec![(Vec::new(), Vec::new()); delta];
    for ((&(x, y), block), &c) in blocks.iter().zip(&colours) {
        grouped[c].0.push((y, x));
        grouped[c].1.push((x, block.clone()));
    }
    let parts = grouped
        .into_iter()
        .map(|(pairs, mut multiplier)| {
            multiplier.sort_by_key(|e| e.0);
            BandPart {
                multiplier,
                translation: PartialTranslation::new(b.space(), pairs).expect("colour classes are matchings"),
            }
        })
        .collect();
    BandDecomposition { parts }
}
