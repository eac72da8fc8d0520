//! Finite metric spaces with bounded geometry.
//!
//! Every space produced here is uniformly discrete (distinct points are at
//! distance at least 1), connected, and carries exact integer or rational
//! distances so that metric checks need no tolerance. Paths, cycles and
//! grids keep their metric in closed form; everything else stores the full
//! distance matrix.

use std::collections::{BinaryHeap, VecDeque};
use std::cmp::Reverse;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Above this size the triangle inequality is checked on sampled triples.
const EXHAUSTIVE_TRIANGLE_LIMIT: usize = 200;
const SAMPLED_TRIPLES: usize = 1_000_000;

/// Generator descriptor for a [`MetricSpace`].
///
/// On disk this is `{"type": "...", "params": {...}}`, except for explicit
/// matrices which use `{"type": "explicit", "matrix": [[...]]}`.
#[derive(Clone, Debug, PartialEq)]
pub enum SpaceSpec {
    Path { n: usize },
    Cycle { n: usize },
    /// `side^dim` lattice points with the ℓ¹ word metric.
    Grid { dim: usize, side: usize },
    /// Uniform points in the unit cube joined when closer than `radius`;
    /// hop-count metric.
    RandomGeometric { n: usize, radius: f64, dim: usize, seed: u64 },
    /// Complete rooted tree; `depth` levels below the root.
    Tree { branching: usize, depth: usize },
    Explicit { matrix: Vec<Vec<f64>> },
    /// Weighted undirected graph, weights at least 1, shortest-path metric.
    Graph { n: usize, edges: Vec<(usize, usize, f64)> },
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    #[serde(rename = "type")]
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Serialize, Deserialize)]
struct NParams {
    n: usize,
}

#[derive(Serialize, Deserialize)]
struct GridParams {
    dim: usize,
    side: usize,
}

#[derive(Serialize, Deserialize)]
struct GeometricParams {
    n: usize,
    radius: f64,
    #[serde(default = "default_dim")]
    dim: usize,
    #[serde(default)]
    seed: u64,
}

fn default_dim() -> usize {
    2
}

#[derive(Serialize, Deserialize)]
struct TreeParams {
    branching: usize,
    depth: usize,
}

#[derive(Serialize, Deserialize)]
struct GraphParams {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl Serialize for SpaceSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::Error as _;
        let to = |v: std::result::Result<Value, serde_json::Error>| v.map_err(S::Error::custom);
        let (kind, params, matrix) = match self {
            SpaceSpec::Path { n } => ("path", Some(to(serde_json::to_value(NParams { n: *n }))?), None),
            SpaceSpec::Cycle { n } => ("cycle", Some(to(serde_json::to_value(NParams { n: *n }))?), None),
            SpaceSpec::Grid { dim, side } => (
                "grid",
                Some(to(serde_json::to_value(GridParams { dim: *dim, side: *side }))?),
                None,
            ),
            SpaceSpec::RandomGeometric { n, radius, dim, seed } => (
                "random_geometric",
                Some(to(serde_json::to_value(GeometricParams {
                    n: *n,
                    radius: *radius,
                    dim: *dim,
                    seed: *seed,
                }))?),
                None,
            ),
            SpaceSpec::Tree { branching, depth } => (
                "tree",
                Some(to(serde_json::to_value(TreeParams { branching: *branching, depth: *depth }))?),
                None,
            ),
            SpaceSpec::Explicit { matrix } => ("explicit", None, Some(matrix.clone())),
            SpaceSpec::Graph { n, edges } => (
                "graph",
                Some(to(serde_json::to_value(GraphParams { n: *n, edges: edges.clone() }))?),
                None,
            ),
        };
        RawSpec { kind: kind.to_string(), params, matrix }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SpaceSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawSpec::deserialize(deserializer)?;
        let params = || raw.params.clone().ok_or_else(|| D::Error::missing_field("params"));
        Ok(match raw.kind.as_str() {
            "path" => {
                let p: NParams = serde_json::from_value(params()?).map_err(D::Error::custom)?;
                SpaceSpec::Path { n: p.n }
            }
            "cycle" => {
                let p: NParams = serde_json::from_value(params()?).map_err(D::Error::custom)?;
                SpaceSpec::Cycle { n: p.n }
            }
            "grid" => {
                let p: GridParams = serde_json::from_value(params()?).map_err(D::Error::custom)?;
                SpaceSpec::Grid { dim: p.dim, side: p.side }
            }
            "random_geometric" => {
                let p: GeometricParams = serde_json::from_value(params()?).map_err(D::Error::custom)?;
                SpaceSpec::RandomGeometric { n: p.n, radius: p.radius, dim: p.dim, seed: p.seed }
            }
            "tree" => {
                let p: TreeParams = serde_json::from_value(params()?).map_err(D::Error::custom)?;
                SpaceSpec::Tree { branching: p.branching, depth: p.depth }
            }
            "graph" => {
                let p: GraphParams = serde_json::from_value(params()?).map_err(D::Error::custom)?;
                SpaceSpec::Graph { n: p.n, edges: p.edges }
            }
            "explicit" => {
                let matrix = match (&raw.matrix, &raw.params) {
                    (Some(m), _) => m.clone(),
                    (None, Some(Value::Object(map))) if map.contains_key("matrix") => {
                        serde_json::from_value(map["matrix"].clone()).map_err(D::Error::custom)?
                    }
                    _ => return Err(D::Error::missing_field("matrix")),
                };
                SpaceSpec::Explicit { matrix }
            }
            other => {
                return Err(D::Error::unknown_variant(
                    other,
                    &["path", "cycle", "grid", "random_geometric", "tree", "explicit", "graph"],
                ))
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Metric {
    Path,
    Cycle,
    Grid { dim: usize, side: usize },
    Dense(Vec<f64>),
}

/// A finite, uniformly discrete, connected metric space.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricSpace {
    n: usize,
    metric: Metric,
    spec: SpaceSpec,
}

/// Sorted list of point indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Subset(Vec<usize>);

impl Subset {
    /// Sorts and deduplicates.
    pub fn new(mut points: Vec<usize>) -> Self {
        points.sort_unstable();
        points.dedup();
        Subset(points)
    }

    pub fn singleton(x: usize) -> Self {
        Subset(vec![x])
    }

    pub fn full(n: usize) -> Self {
        Subset((0..n).collect())
    }

    pub fn points(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset_of(&self, other: &Subset) -> bool {
        self.0.iter().all(|&x| other.contains(x))
    }

    pub fn intersects(&self, other: &Subset) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    pub fn union(&self, other: &Subset) -> Subset {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Subset::new(v)
    }

    /// Indicator vector of length `n`.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &x in &self.0 {
            m[x] = true;
        }
        m
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

impl FromIterator<usize> for Subset {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Subset::new(iter.into_iter().collect())
    }
}

impl MetricSpace {
    pub fn build(spec: &SpaceSpec) -> Result<Self> {
        match spec {
            SpaceSpec::Path { n } => {
                check_positive(*n, "path length")?;
                Ok(Self::closed(*n, Metric::Path, spec))
            }
            SpaceSpec::Cycle { n } => {
                check_positive(*n, "cycle length")?;
                Ok(Self::closed(*n, Metric::Cycle, spec))
            }
            SpaceSpec::Grid { dim, side } => {
                check_positive(*dim, "grid dimension")?;
                check_positive(*side, "grid side")?;
                let n = side
                    .checked_pow(*dim as u32)
                    .ok_or_else(|| Error::Generator("grid too large".into()))?;
                Ok(Self::closed(n, Metric::Grid { dim: *dim, side: *side }, spec))
            }
            SpaceSpec::RandomGeometric { n, radius, dim, seed } => {
                check_positive(*n, "point count")?;
                check_positive(*dim, "ambient dimension")?;
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::Generator(format!("radius must be positive, got {radius}")));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let coords: Vec<Vec<f64>> =
                    (0..*n).map(|_| (0..*dim).map(|_| rng.random::<f64>()).collect()).collect();
                let r2 = radius * radius;
                let mut adj = vec![Vec::new(); *n];
                for i in 0..*n {
                    for j in (i + 1)..*n {
                        let d2: f64 = coords[i].iter().zip(&coords[j]).map(|(a, b)| (a - b) * (a - b)).sum();
                        if d2 <= r2 {
                            adj[i].push(j);
                            adj[j].push(i);
                        }
                    }
                }
                let dist = hop_distances(&adj)?;
                Ok(Self::dense(*n, dist, spec))
            }
            SpaceSpec::Tree { branching, depth } => {
                check_positive(*branching, "branching")?;
                let mut adj: Vec<Vec<usize>> = vec![Vec::new()];
                let mut level = vec![0usize];
                for _ in 0..*depth {
                    let mut next = Vec::with_capacity(level.len() * branching);
                    for &parent in &level {
                        for _ in 0..*branching {
                            let child = adj.len();
                            adj.push(vec![parent]);
                            adj[parent].push(child);
                            next.push(child);
                        }
                    }
                    level = next;
                }
                let n = adj.len();
                let dist = hop_distances(&adj)?;
                Ok(Self::dense(n, dist, spec))
            }
            SpaceSpec::Explicit { matrix } => {
                let n = matrix.len();
                check_positive(n, "matrix size")?;
                let mut dist = Vec::with_capacity(n * n);
                for (row, r) in matrix.iter().enumerate() {
                    if r.len() != n {
                        return Err(Error::NotSquare { row, len: r.len(), n });
                    }
                    dist.extend_from_slice(r);
                }
                let space = Self::dense(n, dist, spec);
                space.validate()?;
                Ok(space)
            }
            SpaceSpec::Graph { n, edges } => {
                check_positive(*n, "vertex count")?;
                let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); *n];
                for &(a, b, w) in edges {
                    if a >= *n || b >= *n {
                        return Err(Error::OutOfRange { index: a.max(b), n: *n });
                    }
                    if !(w.is_finite() && w >= 1.0) {
                        return Err(Error::Generator(format!("edge ({a},{b}) has weight {w}; weights must be >= 1")));
                    }
                    if a != b {
                        adj[a].push((b, w));
                        adj[b].push((a, w));
                    }
                }
                let dist = weighted_distances(&adj)?;
                Ok(Self::dense(*n, dist, spec))
            }
        }
    }

    fn closed(n: usize, metric: Metric, spec: &SpaceSpec) -> Self {
        MetricSpace { n, metric, spec: spec.clone() }
    }

    fn dense(n: usize, dist: Vec<f64>, spec: &SpaceSpec) -> Self {
        MetricSpace { n, metric: Metric::Dense(dist), spec: spec.clone() }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// The generator descriptor this space was built from.
    pub fn spec(&self) -> &SpaceSpec {
        &self.spec
    }

    /// `(dim, side)` when the space is a grid.
    pub fn grid_shape(&self) -> Option<(usize, usize)> {
        match self.metric {
            Metric::Grid { dim, side } => Some((dim, side)),
            Metric::Path => Some((1, self.n)),
            _ => None,
        }
    }

    /// Lattice coordinates of a grid point (last coordinate fastest).
    pub fn grid_coords(&self, x: usize) -> Option<Vec<usize>> {
        let (dim, side) = self.grid_shape()?;
        let mut c = vec![0; dim];
        let mut r = x;
        for i in (0..dim).rev() {
            c[i] = r % side;
            r /= side;
        }
        Some(c)
    }

    /// Inverse of [`grid_coords`](Self::grid_coords).
    pub fn grid_index(&self, coords: &[usize]) -> Option<usize> {
        let (_, side) = self.grid_shape()?;
        Some(coords.iter().fold(0, |acc, &c| acc * side + c))
    }

    #[inline]
    pub fn dist(&self, x: usize, y: usize) -> f64 {
        match &self.metric {
            Metric::Path => x.abs_diff(y) as f64,
            Metric::Cycle => {
                let d = x.abs_diff(y);
                d.min(self.n - d) as f64
            }
            Metric::Grid { dim, side } => {
                let (mut a, mut b, mut total) = (x, y, 0usize);
                for _ in 0..*dim {
                    total += (a % side).abs_diff(b % side);
                    a /= side;
                    b /= side;
                }
                total as f64
            }
            Metric::Dense(d) => d[x * self.n + y],
        }
    }

    /// Closed ball `{y : d(x,y) <= radius}`.
    pub fn ball(&self, x: usize, radius: f64) -> Subset {
        Subset((0..self.n).filter(|&y| self.dist(x, y) <= radius).collect())
    }

    /// Minimum distance between two non-empty sets.
    pub fn set_distance(&self, a: &Subset, b: &Subset) -> Result<f64> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::EmptySubset);
        }
        let mut best = f64::INFINITY;
        for x in a.iter() {
            for y in b.iter() {
                best = best.min(self.dist(x, y));
            }
        }
        Ok(best)
    }

    /// Distance from a point to a non-empty set.
    pub fn point_set_distance(&self, x: usize, a: &Subset) -> f64 {
        a.iter().map(|y| self.dist(x, y)).fold(f64::INFINITY, f64::min)
    }

    /// `{x : d(x, A) <= radius}`.
    pub fn neighborhood(&self, a: &Subset, radius: f64) -> Subset {
        if a.is_empty() {
            return Subset::default();
        }
        Subset((0..self.n).filter(|&x| a.iter().any(|y| self.dist(x, y) <= radius)).collect())
    }

    /// `sup_x #B(x, R)` for each radius in `radii` (expected sorted).
    pub fn geometry_profile(&self, radii: &[f64]) -> Vec<usize> {
        let mut out = vec![0usize; radii.len()];
        let mut row = vec![0.0; self.n];
        for x in 0..self.n {
            for (y, d) in row.iter_mut().enumerate() {
                *d = self.dist(x, y);
            }
            row.sort_by(f64::total_cmp);
            for (slot, &r) in out.iter_mut().zip(radii) {
                let count = row.partition_point(|&d| d <= r);
                *slot = (*slot).max(count);
            }
        }
        out
    }

    pub fn diameter(&self) -> f64 {
        match &self.metric {
            Metric::Path => self.n.saturating_sub(1) as f64,
            Metric::Cycle => (self.n / 2) as f64,
            Metric::Grid { dim, side } => (dim * (side - 1)) as f64,
            Metric::Dense(d) => d.iter().copied().fold(0.0, f64::max),
        }
    }

    /// Diameter of a subset; 0 for empty or singleton sets.
    pub fn subset_diameter(&self, a: &Subset) -> f64 {
        let pts = a.points();
        let mut best = 0.0f64;
        for (i, &x) in pts.iter().enumerate() {
            for &y in &pts[i + 1..] {
                best = best.max(self.dist(x, y));
            }
        }
        best
    }

    /// Greedy `r`-net in index order: pairwise distances exceed `r` and
    /// every point is within `r` of the net.
    pub fn greedy_net(&self, r: f64) -> Subset {
        let mut net: Vec<usize> = Vec::new();
        for x in 0..self.n {
            if net.iter().all(|&c| self.dist(x, c) > r) {
                net.push(x);
            }
        }
        Subset(net)
    }

    /// Checks every metric invariant, reporting the first violation.
    ///
    /// Triangle inequality is exhaustive up to 200 points and sampled on
    /// 10⁶ deterministic triples above.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        for x in 0..n {
            let d = self.dist(x, x);
            if d != 0.0 {
                return Err(Error::NonzeroDiagonal { x, value: d });
            }
        }
        for x in 0..n {
            for y in (x + 1)..n {
                let (dxy, dyx) = (self.dist(x, y), self.dist(y, x));
                if !dxy.is_finite() || dxy < 0.0 {
                    return Err(Error::InvalidDistance { x, y, value: dxy });
                }
                if dxy != dyx {
                    return Err(Error::Asymmetric { x, y, dxy, dyx });
                }
                if dxy < 1.0 {
                    return Err(Error::NotDiscrete { x, y, value: dxy });
                }
            }
        }
        let check = |x: usize, y: usize, z: usize| -> Result<()> {
            let dxy = self.dist(x, y);
            let via = self.dist(x, z) + self.dist(z, y);
            if dxy > via {
                return Err(Error::Triangle { x, y, z, dxy, via });
            }
            Ok(())
        };
        if n <= EXHAUSTIVE_TRIANGLE_LIMIT {
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        check(x, y, z)?;
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x7472_6961_6e67_6c65);
            for _ in 0..SAMPLED_TRIPLES {
                let (x, y, z) = (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n));
                check(x, y, z)?;
            }
        }
        Ok(())
    }
}

fn check_positive(v: usize, what: &str) -> Result<()> {
    if v == 0 {
        return Err(Error::Generator(format!("{what} must be positive")));
    }
    Ok(())
}

fn hop_distances(adj: &[Vec<usize>]) -> Result<Vec<f64>> {
    let n = adj.len();
    let mut dist = vec![f64::INFINITY; n * n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        let row = &mut dist[s * n..(s + 1) * n];
        row[s] = 0.0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            let du = row[u];
            for &v in &adj[u] {
                if row[v].is_infinite() {
                    row[v] = du + 1.0;
                    queue.push_back(v);
                }
            }
        }
        if let Some(point) = row.iter().position(|d| d.is_infinite()) {
            return Err(Error::Disconnected { point });
        }
    }
    Ok(dist)
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

fn weighted_distances(adj: &[Vec<(usize, f64)>]) -> Result<Vec<f64>> {
    let n = adj.len();
    let mut dist = vec![f64::INFINITY; n * n];
    let mut heap = BinaryHeap::new();
    for s in 0..n {
        let row = &mut dist[s * n..(s + 1) * n];
        row[s] = 0.0;
        heap.push(Reverse(Entry(0.0, s)));
        while let Some(Reverse(Entry(d, u))) = heap.pop() {
            if d > row[u] {
                continue;
            }
            for &(v, w) in &adj[u] {
                let nd = d + w;
                if nd < row[v] {
                    row[v] = nd;
                    heap.push(Reverse(Entry(nd, v)));
                }
            }
        }
        if let Some(point) = row.iter().position(|d| d.is_infinite()) {
            return Err(Error::Disconnected { point });
        }
    }
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> MetricSpace {
        MetricSpace::build(&SpaceSpec::Path { n }).unwrap()
    }

    fn grid(dim: usize, side: usize) -> MetricSpace {
        MetricSpace::build(&SpaceSpec::Grid { dim, side }).unwrap()
    }

    #[test]
    fn path_distances() {
        assert_eq!(path(4).dist(0, 3), 3.0);
    }

    #[test]
    fn grid_profile_center() {
        let g = grid(2, 3);
        assert_eq!(g.len(), 9);
        assert_eq!(g.geometry_profile(&[1.0]), vec![5]);
    }

    #[test]
    fn explicit_asymmetric_rejected() {
        let err = MetricSpace::build(&SpaceSpec::Explicit { matrix: vec![vec![0.0, 1.0], vec![2.0, 0.0]] })
            .unwrap_err();
        assert!(matches!(err, Error::Asymmetric { x: 0, y: 1, .. }), "{err}");
    }

    #[test]
    fn explicit_triangle_violation_named() {
        let m = vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]];
        let err = MetricSpace::build(&SpaceSpec::Explicit { matrix: m }).unwrap_err();
        assert!(matches!(err, Error::Triangle { x: 0, y: 2, z: 1, .. }), "{err}");
    }

    #[test]
    fn explicit_subunit_distance_rejected() {
        let m = vec![vec![0.0, 0.5], vec![0.5, 0.0]];
        assert!(matches!(
            MetricSpace::build(&SpaceSpec::Explicit { matrix: m }),
            Err(Error::NotDiscrete { .. })
        ));
    }

    #[test]
    fn disconnected_graph_rejected() {
        let spec = SpaceSpec::Graph { n: 3, edges: vec![(0, 1, 1.0)] };
        assert!(matches!(MetricSpace::build(&spec), Err(Error::Disconnected { point: 2 })));
    }

    #[test]
    fn balls() {
        let p = path(5);
        assert_eq!(p.ball(2, 1.0).points(), &[1, 2, 3]);
        for x in 0..5 {
            assert_eq!(p.ball(x, 0.0).points(), &[x]);
        }
        // ℓ¹ ball of radius 2 in the plane: 1 + 4 + 8 points.
        let g = grid(2, 5);
        let center = g.grid_index(&[2, 2]).unwrap();
        assert_eq!(g.ball(center, 2.0).len(), 13);
    }

    #[test]
    fn set_distances() {
        let p = path(10);
        assert_eq!(p.set_distance(&Subset::singleton(0), &Subset::singleton(5)).unwrap(), 5.0);
        assert_eq!(p.set_distance(&Subset::new(vec![1, 2]), &Subset::new(vec![2, 7])).unwrap(), 0.0);
        assert_eq!(p.set_distance(&Subset::new(vec![0, 1]), &Subset::new(vec![4, 9])).unwrap(), 3.0);
        assert!(matches!(p.set_distance(&Subset::default(), &Subset::singleton(1)), Err(Error::EmptySubset)));
    }

    #[test]
    fn neighborhoods() {
        let p = path(5);
        let a = Subset::singleton(2);
        assert_eq!(p.neighborhood(&a, 0.0), a);
        assert_eq!(p.neighborhood(&a, 1.0).points(), &[1, 2, 3]);
        // On grids, iterated neighbourhoods compose exactly.
        let g = grid(2, 7);
        let a = Subset::new(vec![0, 24]);
        for (j, k) in [(1.0, 1.0), (1.0, 2.0), (2.0, 3.0)] {
            assert_eq!(g.neighborhood(&g.neighborhood(&a, j), k), g.neighborhood(&a, j + k));
        }
    }

    #[test]
    fn profiles() {
        assert_eq!(path(7).geometry_profile(&[1.0]), vec![3]);
        assert_eq!(grid(1, 100).geometry_profile(&[2.0]), vec![5]);
        let rg = MetricSpace::build(&SpaceSpec::RandomGeometric { n: 60, radius: 0.3, dim: 2, seed: 3 }).unwrap();
        let radii = [0.0, 1.0, 2.0, 3.0, rg.diameter()];
        let prof = rg.geometry_profile(&radii);
        for (i, &r) in radii.iter().enumerate() {
            let brute = (0..rg.len()).map(|x| rg.ball(x, r).len()).max().unwrap();
            assert_eq!(prof[i], brute);
        }
        assert!(prof.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(*prof.last().unwrap(), rg.len());
    }

    #[test]
    fn nets() {
        let p = path(10);
        assert_eq!(p.greedy_net(2.0).points(), &[0, 3, 6, 9]);
        assert_eq!(p.greedy_net(0.5), Subset::full(10));
    }

    #[test]
    fn generators_satisfy_metric_invariants() {
        let specs = [
            SpaceSpec::Path { n: 12 },
            SpaceSpec::Cycle { n: 9 },
            SpaceSpec::Grid { dim: 2, side: 6 },
            SpaceSpec::Grid { dim: 3, side: 3 },
            SpaceSpec::RandomGeometric { n: 80, radius: 0.25, dim: 2, seed: 11 },
            SpaceSpec::Tree { branching: 2, depth: 4 },
            SpaceSpec::Graph { n: 4, edges: vec![(0, 1, 1.0), (1, 2, 2.5), (2, 3, 1.0), (0, 3, 7.0)] },
        ];
        for spec in &specs {
            let s = MetricSpace::build(spec).unwrap();
            s.validate().unwrap();
            let diam = s.diameter();
            let brute = (0..s.len())
                .flat_map(|x| (0..s.len()).map(move |y| (x, y)))
                .map(|(x, y)| s.dist(x, y))
                .fold(0.0, f64::max);
            assert_eq!(diam, brute, "{spec:?}");
            assert_eq!(s.geometry_profile(&[diam]), vec![s.len()]);
        }
    }

    #[test]
    fn spec_json_shapes() {
        let s: SpaceSpec = serde_json::from_str(r#"{"type":"grid","params":{"dim":2,"side":3}}"#).unwrap();
        assert_eq!(s, SpaceSpec::Grid { dim: 2, side: 3 });
        let e: SpaceSpec = serde_json::from_str(r#"{"type":"explicit","matrix":[[0,1],[1,0]]}"#).unwrap();
        assert_eq!(e, SpaceSpec::Explicit { matrix: vec![vec![0.0, 1.0], vec![1.0, 0.0]] });
        let back: SpaceSpec = serde_json::from_str(&serde_json::to_string(&e).unwrap()).unwrap();
        assert_eq!(back, e);
        assert!(serde_json::from_str::<SpaceSpec>(r#"{"type":"torus","params":{}}"#).is_err());
    }
}
