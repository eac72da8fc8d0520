//! Sparse block operators on ℓ^p(X; ℂ^k).
//!
//! An operator is stored as a scalar matrix on X×{0..k}; scalar index `i`
//! belongs to point `i / k`. Functions on X act block-diagonally, so every
//! point-level operation (masks, Schur multipliers, restrictions) is a
//! scalar Schur multiplier with weight depending only on `(i / k, j / k)`.

mod commutator;
mod function;
mod io;
mod propagation;

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::linalg::{self, NormEstimate, SparseMatrix, C64};
use crate::space::{MetricSpace, Subset};

pub use commutator::{commut_bound_band, commut_search, commut_weight, commutator, CommutBound};
pub use function::ScalarFunction;
pub use io::OperatorFile;
pub use propagation::{eps_propagation, ql_profile, BoundTag, EpsMode, EpsPropagation, ProfileEntry, QuasiLocalityProfile};

/// Bounded operator on ℓ^p(X; ℂ^k) with sparse k×k blocks.
#[derive(Clone, Debug)]
pub struct LpOperator {
    space: Arc<MetricSpace>,
    p: Exponent,
    k: usize,
    matrix: SparseMatrix,
}

impl LpOperator {
    pub fn new(space: Arc<MetricSpace>, p: Exponent, k: usize, matrix: SparseMatrix) -> Result<Self> {
        if k == 0 {
            return Err(Error::Parameter("fiber dimension must be at least 1".into()));
        }
        let dim = space.len() * k;
        if matrix.nrows() != dim {
            return Err(Error::Shape { expected: dim, got: matrix.nrows() });
        }
        if matrix.ncols() != dim {
            return Err(Error::Shape { expected: dim, got: matrix.ncols() });
        }
        Ok(LpOperator { space, p, k, matrix })
    }

    /// Builds from `(x, y, block)` with blocks in row-major order.
    pub fn from_blocks(
        space: Arc<MetricSpace>,
        p: Exponent,
        k: usize,
        blocks: impl IntoIterator<Item = (usize, usize, Vec<C64>)>,
    ) -> Result<Self> {
        let n = space.len();
        let mut triplets = Vec::new();
        for (x, y, block) in blocks {
            for idx in [x, y] {
                if idx >= n {
                    return Err(Error::OutOfRange { index: idx, n });
                }
            }
            if block.len() != k * k {
                return Err(Error::Shape { expected: k * k, got: block.len() });
            }
            for (e, v) in block.into_iter().enumerate() {
                triplets.push((x * k + e / k, y * k + e % k, v));
            }
        }
        let dim = n * k;
        Self::new(space, p, k, SparseMatrix::from_triplets(dim, dim, triplets))
    }

    pub fn identity(space: Arc<MetricSpace>, p: Exponent, k: usize) -> Self {
        let dim = space.len() * k;
        LpOperator { space, p, k, matrix: SparseMatrix::identity(dim) }
    }

    pub fn zero(space: Arc<MetricSpace>, p: Exponent, k: usize) -> Self {
        let dim = space.len() * k;
        LpOperator { space, p, k, matrix: SparseMatrix::zeros(dim, dim) }
    }

    /// Multiplication by a scalar function on X.
    pub fn multiplication(space: Arc<MetricSpace>, p: Exponent, k: usize, values: &[f64]) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::Shape { expected: space.len(), got: values.len() });
        }
        let dim = space.len() * k;
        let m = SparseMatrix::from_triplets(dim, dim, (0..dim).map(|i| (i, i, C64::new(values[i / k], 0.0))));
        Self::new(space, p, k, m)
    }

    /// Samples a band operator: every pair with `d(x,y) <= r` carries a block
    /// with probability `density`, entries uniform in the complex disc of
    /// radius `magnitude`.
    pub fn random_band(
        space: Arc<MetricSpace>,
        p: Exponent,
        k: usize,
        r: f64,
        density: f64,
        magnitude: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(r >= 0.0) {
            return Err(Error::Parameter(format!("band radius must be non-negative, got {r}")));
        }
        if !(density > 0.0 && density <= 1.0) {
            return Err(Error::Parameter(format!("density must lie in (0, 1], got {density}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut blocks = Vec::new();
        for x in 0..space.len() {
            for y in space.ball(x, r).iter() {
                if rng.random::<f64>() >= density {
                    continue;
                }
                let block: Vec<C64> = (0..k * k)
                    .map(|_| {
                        let modulus = magnitude * rng.random::<f64>().sqrt();
                        let phase = std::f64::consts::TAU * rng.random::<f64>();
                        C64::from_polar(modulus, phase)
                    })
                    .collect();
                blocks.push((x, y, block));
            }
        }
        Self::from_blocks(space, p, k, blocks)
    }

    /// Truncated Neumann series for `(Id − λa)⁻¹`.
    ///
    /// The number of terms is the smallest `J` whose certified tail
    /// `(λ‖a‖)^{J+1} / (1 − λ‖a‖)` is at most `tail_tol`.
    pub fn neumann_quasilocal(a: &LpOperator, lambda: f64, tail_tol: f64) -> Result<Self> {
        if !(tail_tol > 0.0) {
            return Err(Error::Parameter(format!("tail tolerance must be positive, got {tail_tol}")));
        }
        let norm = a.opnorm(1e-10).upper;
        let rate = lambda.abs() * norm;
        if rate >= 1.0 {
            return Err(Error::NotContraction { factor: lambda, norm, product: rate });
        }
        let step = a.scale(C64::new(lambda, 0.0));
        let mut term = LpOperator::identity(a.space.clone(), a.p, a.k);
        let mut sum = term.clone();
        let mut tail = rate / (1.0 - rate);
        while tail > tail_tol {
            term = term.compose(&step)?;
            sum = sum.add(&term, C64::new(1.0, 0.0), C64::new(1.0, 0.0))?;
            tail *= rate;
        }
        Ok(sum)
    }

    pub fn space(&self) -> &Arc<MetricSpace> {
        &self.space
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn q(&self) -> Exponent {
        self.p.conjugate()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Scalar dimension `n·k`.
    pub fn dim(&self) -> usize {
        self.space.len() * self.k
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.nnz() == 0
    }

    /// Same operator with a different exponent.
    pub fn with_exponent(&self, p: Exponent) -> LpOperator {
        LpOperator { p, ..self.clone() }
    }

    pub(crate) fn with_matrix(&self, matrix: SparseMatrix) -> LpOperator {
        LpOperator { space: self.space.clone(), p: self.p, k: self.k, matrix }
    }

    /// Nonzero blocks keyed by `(x, y)`, row-major within each block.
    pub fn blocks(&self) -> BTreeMap<(usize, usize), Vec<C64>> {
        let k = self.k;
        let mut out: BTreeMap<(usize, usize), Vec<C64>> = BTreeMap::new();
        for (i, j, v) in self.matrix.iter() {
            let block = out.entry((i / k, j / k)).or_insert_with(|| vec![C64::new(0.0, 0.0); k * k]);
            block[(i % k) * k + j % k] = v;
        }
        out
    }

    /// Point pairs carrying a nonzero block, sorted.
    pub fn block_support(&self) -> Vec<(usize, usize)> {
        let k = self.k;
        let mut pairs: Vec<(usize, usize)> = self.matrix.iter().map(|(i, j, _)| (i / k, j / k)).collect();
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }

    /// Norm of a k×k block as a map on (ℂ^k, ‖·‖_p); certified upper bound.
    pub fn block_norm(&self, block: &[C64]) -> f64 {
        if self.k == 1 {
            return block[0].norm();
        }
        let k = self.k;
        let m = SparseMatrix::from_triplets(k, k, block.iter().enumerate().map(|(e, &v)| (e / k, e % k, v)));
        linalg::operator_norm(&m, self.p, 1e-12).upper
    }

    /// Largest block norm.
    pub fn max_block_norm(&self) -> f64 {
        self.blocks().values().map(|b| self.block_norm(b)).fold(0.0, f64::max)
    }

    fn check_compatible(&self, other: &LpOperator) -> Result<()> {
        if !Arc::ptr_eq(&self.space, &other.space) && *self.space != *other.space {
            return Err(Error::Incompatible("operators live on different spaces".into()));
        }
        if self.p != other.p {
            return Err(Error::Incompatible(format!("exponents differ: {} vs {}", self.p, other.p)));
        }
        if self.k != other.k {
            return Err(Error::Incompatible(format!("fiber dimensions differ: {} vs {}", self.k, other.k)));
        }
        Ok(())
    }

    /// `(bv)(x) = Σ_y b_{xy} v(y)`.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.dim() {
            return Err(Error::Shape { expected: self.dim(), got: v.len() });
        }
        Ok(self.matrix.matvec(v))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &LpOperator) -> Result<LpOperator> {
        self.check_compatible(other)?;
        Ok(self.with_matrix(self.matrix.mul(&other.matrix)))
    }

    /// `α·self + β·other`.
    pub fn add(&self, other: &LpOperator, alpha: C64, beta: C64) -> Result<LpOperator> {
        self.check_compatible(other)?;
        Ok(self.with_matrix(self.matrix.axpby(alpha, &other.matrix, beta)))
    }

    pub fn sub(&self, other: &LpOperator) -> Result<LpOperator> {
        self.add(other, C64::new(1.0, 0.0), C64::new(-1.0, 0.0))
    }

    pub fn scale(&self, alpha: C64) -> LpOperator {
        self.with_matrix(self.matrix.map_entries(|_, _, v| alpha * v))
    }

    /// Schur multiplier by a point-level kernel: block `(x,y)` is scaled by
    /// `weight(x, y)`. Blocks whose weight vanishes are dropped.
    pub fn schur(&self, mut weight: impl FnMut(usize, usize) -> f64) -> LpOperator {
        let k = self.k;
        self.with_matrix(self.matrix.map_entries(|i, j, v| v * weight(i / k, j / k)))
    }

    /// `f·b·g` for functions on X.
    pub fn sandwich(&self, left: &[f64], right: &[f64]) -> LpOperator {
        self.schur(|x, y| left[x] * right[y])
    }

    /// `χ_A b χ_B`.
    pub fn restrict(&self, rows: &Subset, cols: &Subset) -> LpOperator {
        let n = self.space.len();
        let (rm, cm) = (rows.mask(n), cols.mask(n));
        self.schur(|x, y| if rm[x] && cm[y] { 1.0 } else { 0.0 })
    }

    /// Largest `d(x,y)` over stored blocks; 0 for the zero operator.
    pub fn propagation(&self) -> f64 {
        let k = self.k;
        self.matrix.iter().map(|(i, j, _)| self.space.dist(i / k, j / k)).fold(0.0, f64::max)
    }

    /// Keeps exactly the blocks with `d(x,y) <= radius`.
    pub fn band_truncate(&self, radius: f64) -> LpOperator {
        let space = self.space.clone();
        self.schur(|x, y| if space.dist(x, y) <= radius { 1.0 } else { 0.0 })
    }

    /// Keeps exactly the blocks with `d(x,y) > radius`.
    pub fn off_band(&self, radius: f64) -> LpOperator {
        let space = self.space.clone();
        self.schur(|x, y| if space.dist(x, y) > radius { 1.0 } else { 0.0 })
    }

    /// Operator norm on ℓ^p; see [`linalg::operator_norm`] for guarantees.
    pub fn opnorm(&self, tol: f64) -> NormEstimate {
        linalg::operator_norm(&self.matrix, self.p, tol)
    }

    /// Dense copy, for small oracles.
    pub fn to_dense(&self) -> nalgebra::DMatrix<C64> {
        self.matrix.to_dense()
    }
}
