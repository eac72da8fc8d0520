//! Covers, metric p-partitions of unity, dual families and cover colourings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::space::{MetricSpace, Subset};

/// Tolerance for the partition identity `Σ φ_i(x)^p = 1`.
pub const PARTITION_TOL: f64 = 1e-10;

/// A finite cover of X by non-empty subsets.
#[derive(Clone, Debug, PartialEq)]
pub struct Cover {
    sets: Vec<Subset>,
    diameter_bound: f64,
    multiplicity: usize,
}

impl Cover {
    /// Checks that `sets` cover every point and records diameter and multiplicity.
    pub fn new(space: &MetricSpace, sets: Vec<Subset>) -> Result<Self> {
        let n = space.len();
        let mut count = vec![0usize; n];
        for set in &sets {
            if set.is_empty() {
                return Err(Error::EmptySubset);
            }
            for x in set.iter() {
                if x >= n {
                    return Err(Error::OutOfRange { index: x, n });
                }
                count[x] += 1;
            }
        }
        if let Some(x) = count.iter().position(|&c| c == 0) {
            return Err(Error::Parameter(format!("point {x} is not covered")));
        }
        let diameter_bound = sets.iter().map(|s| space.subset_diameter(s)).fold(0.0, f64::max);
        let multiplicity = count.into_iter().max().unwrap_or(0);
        Ok(Cover { sets, diameter_bound, multiplicity })
    }

    pub fn sets(&self) -> &[Subset] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn diameter_bound(&self) -> f64 {
        self.diameter_bound
    }

    pub fn multiplicity(&self) -> usize {
        self.multiplicity
    }
}

/// Voronoi cells of `greedy_net(r)`, ties broken towards the lower net index.
pub fn disjoint_cover(space: &MetricSpace, r: f64) -> Cover {
    let net = space.greedy_net(r);
    let centers = net.points();
    let mut cells: Vec<Vec<usize>> = vec![Vec::new(); centers.len()];
    for x in 0..space.len() {
        let (best, _) = centers.iter().enumerate().fold((0, f64::INFINITY), |(bi, bd), (i, &c)| {
            let d = space.dist(x, c);
            if d < bd {
                (i, d)
            } else {
                (bi, bd)
            }
        });
        cells[best].push(x);
    }
    Cover::new(space, cells.into_iter().map(Subset::new).collect()).expect("Voronoi cells of a net cover the space")
}

/// Aligned boxes of `side` points per axis on a grid; intervals on a path.
pub fn grid_block_cover(space: &MetricSpace, side: usize) -> Result<Cover> {
    let (dim, grid_side) = space.grid_shape().ok_or(Error::NotGrid)?;
    if side == 0 {
        return Err(Error::Parameter("block side must be at least 1".into()));
    }
    let per_axis = grid_side.div_ceil(side);
    let mut cells: Vec<Vec<usize>> = vec![Vec::new(); per_axis.pow(dim as u32)];
    for x in 0..space.len() {
        let coords = space.grid_coords(x).ok_or(Error::NotGrid)?;
        let cell = coords.iter().fold(0, |acc, &c| acc * per_axis + c / side);
        cells[cell].push(x);
    }
    Cover::new(space, cells.into_iter().map(Subset::new).collect())
}

/// Non-negative function stored on its support.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LocalFunction {
    pub support: Vec<usize>,
    pub values: Vec<f64>,
}

impl LocalFunction {
    /// Keeps the strictly positive entries; `entries` must be sorted by point.
    pub fn from_entries(entries: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let (support, values) = entries.into_iter().filter(|&(_, v)| v > 0.0).unzip();
        LocalFunction { support, values }
    }

    pub fn value(&self, x: usize) -> f64 {
        match self.support.binary_search(&x) {
            Ok(i) => self.values[i],
            Err(_) => 0.0,
        }
    }

    pub fn support_set(&self) -> Subset {
        Subset::new(self.support.clone())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.support.iter().copied().zip(self.values.iter().copied())
    }

    pub fn dense(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (x, v) in self.iter() {
            out[x] = v;
        }
        out
    }
}

/// Exponent used by the normalisation: 1-partitions at the end-points.
fn summation_exponent(p: Exponent) -> f64 {
    if p.is_endpoint() {
        1.0
    } else {
        p.value()
    }
}

/// A metric p-partition of unity: `Σ φ_i^p ≡ 1` for `p ∈ (1,∞)`, and
/// `Σ φ_i ≡ 1` for `p ∈ {1, ∞}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionOfUnity {
    p: Exponent,
    n: usize,
    functions: Vec<LocalFunction>,
    diameter_bound: f64,
    multiplicity: usize,
}

/// JSON form: `{"p": ..., "functions": [{"support": [...], "values": [...]}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionFile {
    pub p: Exponent,
    pub functions: Vec<LocalFunction>,
}

impl PartitionOfUnity {
    /// Validates the partition identity and records support data.
    pub fn new(space: &MetricSpace, p: Exponent, functions: Vec<LocalFunction>) -> Result<Self> {
        let n = space.len();
        let e = summation_exponent(p);
        let mut sums = vec![0.0; n];
        let mut count = vec![0usize; n];
        for f in &functions {
            if f.support.len() != f.values.len() || f.support.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Parameter("local function support must be strictly increasing".into()));
            }
            for (x, v) in f.iter() {
                if x >= n {
                    return Err(Error::OutOfRange { index: x, n });
                }
                if !(0.0..=1.0 + PARTITION_TOL).contains(&v) {
                    return Err(Error::Invariant(format!("partition value {v} at point {x} outside [0, 1]")));
                }
                sums[x] += v.powf(e);
                count[x] += 1;
            }
        }
        if let Some(x) = (0..n).find(|&x| (sums[x] - 1.0).abs() > PARTITION_TOL) {
            return Err(Error::Invariant(format!("partition sum at point {x} is {}", sums[x])));
        }
        let diameter_bound = functions.iter().map(|f| space.subset_diameter(&f.support_set())).fold(0.0, f64::max);
        let multiplicity = count.into_iter().max().unwrap_or(0);
        Ok(PartitionOfUnity { p, n, functions, diameter_bound, multiplicity })
    }

    pub fn from_file(space: &MetricSpace, file: PartitionFile) -> Result<Self> {
        Self::new(space, file.p, file.functions)
    }

    pub fn to_file(&self) -> PartitionFile {
        PartitionFile { p: self.p, functions: self.functions.clone() }
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn functions(&self) -> &[LocalFunction] {
        &self.functions
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn diameter_bound(&self) -> f64 {
        self.diameter_bound
    }

    pub fn multiplicity(&self) -> usize {
        self.multiplicity
    }

    /// `max_x |Σ_i φ_i(x)^p − 1|` (or the plain sum at the end-points).
    pub fn max_sum_deviation(&self) -> f64 {
        let e = summation_exponent(self.p);
        let mut sums = vec![0.0; self.n];
        for f in &self.functions {
            for (x, v) in f.iter() {
                sums[x] += v.powf(e);
            }
        }
        sums.iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max)
    }

    /// For each point, the members that are positive there with their values.
    pub fn by_point(&self) -> Vec<Vec<(usize, f64)>> {
        by_point(self.n, &self.functions)
    }

    pub fn supports(&self) -> Vec<Subset> {
        self.functions.iter().map(LocalFunction::support_set).collect()
    }
}

pub(crate) fn by_point(n: usize, functions: &[LocalFunction]) -> Vec<Vec<(usize, f64)>> {
    let mut out: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, f) in functions.iter().enumerate() {
        for (x, v) in f.iter() {
            out[x].push((i, v));
        }
    }
    out
}

/// Normalised distance bumps over a cover.
///
/// `g_i(x) = max(0, 1 − d(x, U_i)/width)` and `φ_i = g_i / (Σ_j g_j^p)^{1/p}`
/// (plain sum for p ∈ {1, ∞}). With `width = 1` on a disjoint cover this is
/// the family of characteristic functions.
pub fn pou_from_cover(space: &MetricSpace, cover: &Cover, p: Exponent, width: f64) -> Result<PartitionOfUnity> {
    if !(width > 0.0) {
        return Err(Error::Parameter(format!("bump width must be positive, got {width}")));
    }
    let n = space.len();
    let e = summation_exponent(p);
    let bumps: Vec<Vec<(usize, f64)>> = cover
        .sets()
        .iter()
        .map(|set| {
            (0..n)
                .filter_map(|x| {
                    let g = if set.contains(x) { 1.0 } else { 1.0 - space.point_set_distance(x, set) / width };
                    (g > 0.0).then_some((x, g))
                })
                .collect()
        })
        .collect();
    let mut norm = vec![0.0; n];
    for bump in &bumps {
        for &(x, g) in bump {
            norm[x] += g.powf(e);
        }
    }
    assert!(norm.iter().all(|&s| s > 0.0), "a cover leaves no point without a bump");
    let scale: Vec<f64> = norm.iter().map(|s| s.powf(1.0 / e)).collect();
    let functions =
        bumps.into_iter().map(|bump| LocalFunction::from_entries(bump.into_iter().map(|(x, g)| (x, g / scale[x])))).collect();
    PartitionOfUnity::new(space, p, functions)
}

/// Følner-box partition on a grid.
///
/// Every translate `z + [0, S)^N` with `z ∈ {−(S−1), …, side−1}^N` is
/// clipped to the window and weighted by `(#F_z)^{−1/p}`; values are then
/// renormalised per point. Away from the boundary no renormalisation is
/// needed. `S ≥ side` gives the single box `φ ≡ 1`.
pub fn grid_folner_pou(space: &MetricSpace, box_side: usize, p: Exponent) -> Result<PartitionOfUnity> {
    let (dim, side) = space.grid_shape().ok_or(Error::NotGrid)?;
    if box_side == 0 {
        return Err(Error::Parameter("box side must be at least 1".into()));
    }
    if box_side >= side {
        let all = LocalFunction { support: (0..space.len()).collect(), values: vec![1.0; space.len()] };
        return PartitionOfUnity::new(space, p, vec![all]);
    }
    let e = summation_exponent(p);
    let s = box_side as i64;
    let offsets = side + box_side - 1;
    let count = offsets.pow(dim as u32);
    let mut functions = Vec::with_capacity(count);
    let mut norm = vec![0.0; space.len()];
    for t in 0..count {
        // Decode the translate origin z, axis 0 most significant.
        let mut rem = t;
        let mut ranges = vec![(0usize, 0usize); dim];
        for axis in (0..dim).rev() {
            let z = (rem % offsets) as i64 - (s - 1);
            rem /= offsets;
            let lo = z.max(0) as usize;
            let hi = ((z + s).min(side as i64)) as usize;
            ranges[axis] = (lo, hi);
        }
        let size: usize = ranges.iter().map(|(lo, hi)| hi - lo).product();
        let weight = (size as f64).powf(-1.0 / e);
        let mut support = Vec::with_capacity(size);
        let mut coords: Vec<usize> = ranges.iter().map(|r| r.0).collect();
        'enumerate: loop {
            let x = space.grid_index(&coords).ok_or(Error::NotGrid)?;
            support.push(x);
            for axis in (0..dim).rev() {
                coords[axis] += 1;
                if coords[axis] < ranges[axis].1 {
                    continue 'enumerate;
                }
                coords[axis] = ranges[axis].0;
            }
            break;
        }
        support.sort_unstable();
        for &x in &support {
            norm[x] += weight.powf(e);
        }
        functions.push(LocalFunction { values: vec![weight; support.len()], support });
    }
    let scale: Vec<f64> = norm.iter().map(|v| v.powf(1.0 / e)).collect();
    for f in &mut functions {
        for (x, v) in f.support.iter().zip(f.values.iter_mut()) {
            *v /= scale[*x];
        }
    }
    PartitionOfUnity::new(space, p, functions)
}

/// Points whose whole Følner box family is unclipped: every coordinate in
/// `[S−1, side−S]`.
pub fn grid_bulk_mask(space: &MetricSpace, box_side: usize) -> Result<Vec<bool>> {
    let (_, side) = space.grid_shape().ok_or(Error::NotGrid)?;
    let margin = box_side.saturating_sub(1);
    Ok((0..space.len())
        .map(|x| {
            space
                .grid_coords(x)
                .map(|c| c.iter().all(|&v| v >= margin && v + margin < side))
                .unwrap_or(false)
        })
        .collect())
}

/// Variation of `φ` at a pair: `(Σ_i |φ_i(x) − φ_i(y)|^p)^{1/p}`, with the
/// p = 1 formula at both end-points.
fn pair_variation(a: &[(usize, f64)], b: &[(usize, f64)], e: f64) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut sum = 0.0;
    let mut add = |d: f64| sum += if e == 1.0 { d } else { d.powf(e) };
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(&(ia, va)), Some(&(ib, vb))) if ia == ib => {
                add((va - vb).abs());
                i += 1;
                j += 1;
            }
            (Some(&(ia, va)), Some(&(ib, _))) if ia < ib => {
                add(va);
                i += 1;
            }
            (Some(&(_, va)), None) => {
                add(va);
                i += 1;
            }
            (_, Some(&(_, vb))) => {
                add(vb);
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    if e == 1.0 {
        sum
    } else {
        sum.powf(1.0 / e)
    }
}

/// Scan of all pairs `x < y` with `d(x,y) <= r` accepted by `keep`; stops
/// as soon as the running maximum exceeds `cap`.
fn scan_variation(
    space: &MetricSpace,
    pou: &PartitionOfUnity,
    r: f64,
    cap: f64,
    mut keep: impl FnMut(usize, usize) -> bool,
) -> f64 {
    let e = summation_exponent(pou.p);
    let table = pou.by_point();
    let mut best = 0.0f64;
    for x in 0..space.len() {
        for y in x + 1..space.len() {
            if space.dist(x, y) > r || !keep(x, y) {
                continue;
            }
            best = best.max(pair_variation(&table[x], &table[y], e));
            if best > cap {
                return best;
            }
        }
    }
    best
}

/// `(r, ·)`-variation: the largest pair variation over `d(x,y) <= r`.
pub fn variation(space: &MetricSpace, pou: &PartitionOfUnity, r: f64) -> f64 {
    scan_variation(space, pou, r, f64::INFINITY, |_, _| true)
}

/// Like [`variation`] but returns early with some value above `cap` once
/// the variation is known to exceed it.
pub fn variation_capped(space: &MetricSpace, pou: &PartitionOfUnity, r: f64, cap: f64) -> f64 {
    scan_variation(space, pou, r, cap, |_, _| true)
}

/// Variation split into pairs inside `bulk` and pairs touching its complement.
pub fn variation_split(space: &MetricSpace, pou: &PartitionOfUnity, r: f64, bulk: &[bool]) -> (f64, f64) {
    let inner = scan_variation(space, pou, r, f64::INFINITY, |x, y| bulk[x] && bulk[y]);
    let outer = scan_variation(space, pou, r, f64::INFINITY, |x, y| !(bulk[x] && bulk[y]));
    (inner, outer)
}

/// Dual family `ψ_i = clamp_[0,1](1 − L·d(·, supp φ_i))`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualFamily {
    pub functions: Vec<LocalFunction>,
    pub lipschitz: f64,
    /// `1/L`: `ψ_i` vanishes at distance `≥ 1/L` from `supp φ_i`.
    pub halo: f64,
}

pub fn dual_family(space: &MetricSpace, pou: &PartitionOfUnity, lipschitz: f64) -> Result<DualFamily> {
    if !(lipschitz > 0.0) {
        return Err(Error::Parameter(format!("Lipschitz constant must be positive, got {lipschitz}")));
    }
    let functions = pou
        .functions()
        .iter()
        .map(|f| {
            let supp = f.support_set();
            LocalFunction::from_entries((0..space.len()).map(|x| {
                let v = if supp.contains(x) { 1.0 } else { (1.0 - lipschitz * space.point_set_distance(x, &supp)).clamp(0.0, 1.0) };
                (x, v)
            }))
        })
        .collect();
    Ok(DualFamily { functions, lipschitz, halo: 1.0 / lipschitz })
}

impl DualFamily {
    /// Checks `ψ_i ≡ 1` on `supp φ_i`, `supp ψ_i ⊆ 𝒩_halo(supp φ_i)`, and the
    /// Lipschitz bound over every pair with a point in `supp ψ_i`.
    pub fn verify(&self, space: &MetricSpace, pou: &PartitionOfUnity) -> Result<()> {
        if self.functions.len() != pou.len() {
            return Err(Error::Shape { expected: pou.len(), got: self.functions.len() });
        }
        for (i, (psi, phi)) in self.functions.iter().zip(pou.functions()).enumerate() {
            if let Some(&x) = phi.support.iter().find(|&&x| psi.value(x) != 1.0) {
                return Err(Error::Invariant(format!("dual member {i} is not 1 at point {x} of its partner's support")));
            }
            let supp = phi.support_set();
            if let Some(&x) = psi.support.iter().find(|&&x| space.point_set_distance(x, &supp) > self.halo) {
                return Err(Error::Invariant(format!("dual member {i} reaches point {x} outside its halo")));
            }
            let dense = psi.dense(space.len());
            for &x in &psi.support {
                for y in 0..space.len() {
                    if y == x {
                        continue;
                    }
                    let slope = (dense[x] - dense[y]).abs() / space.dist(x, y);
                    if slope > self.lipschitz * (1.0 + 1e-12) {
                        return Err(Error::Invariant(format!(
                            "dual member {i} has slope {slope} between points {x} and {y}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Colour classes of a family of sets such that equal colours mean disjoint sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    pub colors: usize,
    pub assignment: Vec<usize>,
}

impl Coloring {
    pub fn class(&self, color: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] == color).collect()
    }
}

/// Greedy colouring of the intersection graph, highest degree first (ties
/// by index). Uses at most `max degree + 1` colours.
pub fn color_family(sets: &[Subset]) -> Coloring {
    let m = sets.len();
    let mut members: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
    for (i, s) in sets.iter().enumerate() {
        for x in s.iter() {
            members.entry(x).or_default().push(i);
        }
    }
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); m];
    for list in members.values() {
        for &a in list {
            for &b in list {
                if a != b {
                    adjacency[a].push(b);
                }
            }
        }
    }
    for adj in &mut adjacency {
        adj.sort_unstable();
        adj.dedup();
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| adjacency[b].len().cmp(&adjacency[a].len()).then(a.cmp(&b)));
    let mut assignment = vec![usize::MAX; m];
    let mut colors = 0;
    for &i in &order {
        let used: Vec<usize> = adjacency[i].iter().map(|&j| assignment[j]).filter(|&c| c != usize::MAX).collect();
        let c = (0..).find(|c| !used.contains(c)).expect("unbounded search");
        assignment[i] = c;
        colors = colors.max(c + 1);
    }
    Coloring { colors, assignment }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::SpaceSpec;

    fn build(spec: SpaceSpec) -> MetricSpace {
        MetricSpace::build(&spec).unwrap()
    }

    #[test]
    fn voronoi_cells_on_path() {
        let s = build(SpaceSpec::Path { n: 10 });
        let cover = disjoint_cover(&s, 2.0);
        let cells: Vec<Vec<usize>> = cover.sets().iter().map(|c| c.points().to_vec()).collect();
        assert_eq!(cells, vec![vec![0, 1], vec![2, 3, 4], vec![5, 6, 7], vec![8, 9]]);
        assert_eq!(cover.multiplicity(), 1);
        assert!(cover.diameter_bound() <= 4.0);
        assert_eq!(disjoint_cover(&s, 9.0).len(), 1);
    }

    #[test]
    fn bumps_on_disjoint_cover_are_indicators() {
        let s = build(SpaceSpec::Grid { dim: 2, side: 6 });
        let cover = disjoint_cover(&s, 2.0);
        for p in [Exponent::ONE, Exponent::TWO, Exponent::INFINITY] {
            let pou = pou_from_cover(&s, &cover, p, 1.0).unwrap();
            assert!(pou.functions().iter().all(|f| f.values.iter().all(|&v| v == 1.0)));
            assert_eq!(pou.max_sum_deviation(), 0.0);
        }
    }

    #[test]
    fn overlapping_bumps_normalise() {
        let s = build(SpaceSpec::Path { n: 3 });
        let cover = Cover::new(&s, vec![Subset::new(vec![0, 1]), Subset::new(vec![1, 2])]).unwrap();
        let pou = pou_from_cover(&s, &cover, Exponent::TWO, 1.0).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!((pou.functions()[0].value(1) - h).abs() < 1e-15);
        assert!((pou.functions()[1].value(1) - h).abs() < 1e-15);
        let wide = pou_from_cover(&s, &cover, Exponent::new(3.0).unwrap(), 2.5).unwrap();
        assert!(wide.max_sum_deviation() < PARTITION_TOL);
    }

    #[test]
    fn folner_bulk_variation() {
        let s = build(SpaceSpec::Grid { dim: 1, side: 100 });
        let pou = grid_folner_pou(&s, 10, Exponent::ONE).unwrap();
        assert!(pou.max_sum_deviation() < 1e-12);
        let bulk = grid_bulk_mask(&s, 10).unwrap();
        let (inner, outer) = variation_split(&s, &pou, 1.0, &bulk);
        assert!((inner - 0.2).abs() < 1e-12, "{inner}");
        assert!(outer >= inner);
        let single = grid_folner_pou(&s, 100, Exponent::TWO).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(variation(&s, &single, 99.0), 0.0);
        assert!(matches!(grid_folner_pou(&build(SpaceSpec::Cycle { n: 5 }), 2, Exponent::ONE), Err(Error::NotGrid)));
    }

    #[test]
    fn folner_p_partition() {
        let s = build(SpaceSpec::Grid { dim: 2, side: 12 });
        let pou = grid_folner_pou(&s, 4, Exponent::new(1.5).unwrap()).unwrap();
        assert!(pou.max_sum_deviation() < PARTITION_TOL);
        assert!(pou.diameter_bound() <= 2.0 * 4.0);
    }

    #[test]
    fn indicator_variation_across_cells() {
        let s = build(SpaceSpec::Path { n: 10 });
        let pou = pou_from_cover(&s, &disjoint_cover(&s, 2.0), Exponent::ONE, 1.0).unwrap();
        assert_eq!(variation(&s, &pou, 0.0), 0.0);
        assert_eq!(variation(&s, &pou, 1.0), 2.0);
        assert!(variation_capped(&s, &pou, 5.0, 0.5) > 0.5);
    }

    #[test]
    fn dual_family_checks() {
        let s = build(SpaceSpec::Path { n: 30 });
        let pou = pou_from_cover(&s, &grid_block_cover(&s, 5).unwrap(), Exponent::INFINITY, 1.0).unwrap();
        let dual = dual_family(&s, &pou, 0.25).unwrap();
        dual.verify(&s, &pou).unwrap();
        assert_eq!(dual.functions[0].value(4), 1.0);
        assert_eq!(dual.functions[0].value(8), 0.0);
        assert_eq!(dual.functions[0].value(6), 0.5);
    }

    #[test]
    fn interval_coloring() {
        let sets: Vec<Subset> = [(0, 3), (2, 5), (4, 7), (6, 9)].iter().map(|&(a, b)| Subset::new((a..=b).collect())).collect();
        let col = color_family(&sets);
        assert_eq!(col.colors, 2);
        for c in 0..col.colors {
            let class = col.class(c);
            for (i, &a) in class.iter().enumerate() {
                for &b in &class[i + 1..] {
                    assert!(!sets[a].intersects(&sets[b]));
                }
            }
        }
        let disjoint: Vec<Subset> = (0..4).map(Subset::singleton).collect();
        assert_eq!(color_family(&disjoint).colors, 1);
    }
}
