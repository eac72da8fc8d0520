//! Scalar sparse kernels and certified operator-norm estimation.
//!
//! Operators on ℓ^p(X; ℂ^k) are stored as scalar matrices on X×{1..k}; the
//! ℂ^k-valued p-norm is exactly the scalar p-norm of the flattened vector,
//! so every norm here is the norm the library reports.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::exponent::Exponent;

pub type C64 = Complex64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Largest compact Gram size handled by a dense eigensolver warm start.
const DENSE_EIGEN_LIMIT: usize = 256;
const POWER_CHUNK: usize = 50;
const POWER_BUDGET: usize = 20_000;
const BOYD_ITERATIONS: usize = 200;
const BISECTION_STEPS: usize = 80;

/// Row-compressed complex matrix. Rows hold `(column, value)` sorted by
/// column with no explicit zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    rows: Vec<Vec<(usize, C64)>>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix { nrows, ncols, rows: vec![Vec::new(); nrows] }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix { nrows: n, ncols: n, rows: (0..n).map(|i| vec![(i, C64::new(1.0, 0.0))]).collect() }
    }

    /// Builds from triplets, summing duplicates and dropping zeros.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: impl IntoIterator<Item = (usize, usize, C64)>) -> Self {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); nrows];
        for (i, j, v) in triplets {
            assert!(i < nrows && j < ncols, "triplet ({i},{j}) outside {nrows}x{ncols}");
            rows[i].push((j, v));
        }
        for row in rows.iter_mut() {
            normalize_row(row);
        }
        SparseMatrix { nrows, ncols, rows }
    }

    /// Rows must already be sorted and duplicate-free; zeros are dropped.
    pub fn from_rows(ncols: usize, mut rows: Vec<Vec<(usize, C64)>>) -> Self {
        for row in rows.iter_mut() {
            row.retain(|(_, v)| *v != ZERO);
            debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0));
        }
        SparseMatrix { nrows: rows.len(), ncols, rows }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn row(&self, i: usize) -> &[(usize, C64)] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<(usize, C64)>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        match self.rows[i].binary_search_by_key(&j, |e| e.0) {
            Ok(k) => self.rows[i][k].1,
            Err(_) => ZERO,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.rows.iter().enumerate().flat_map(|(i, r)| r.iter().map(move |&(j, v)| (i, j, v)))
    }

    /// Keeps the entries for which `keep` holds, scaling them by the value it returns.
    pub fn map_entries(&self, mut f: impl FnMut(usize, usize, C64) -> C64) -> SparseMatrix {
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| r.iter().map(|&(j, v)| (j, f(i, j, v))).filter(|(_, v)| *v != ZERO).collect())
            .collect();
        SparseMatrix { nrows: self.nrows, ncols: self.ncols, rows }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        debug_assert_eq!(x.len(), self.ncols);
        self.rows.iter().map(|r| r.iter().map(|&(j, v)| v * x[j]).sum()).collect()
    }

    /// `Aᵀ y` (no conjugation).
    pub fn matvec_transpose(&self, y: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.ncols];
        for (i, r) in self.rows.iter().enumerate() {
            let yi = y[i];
            if yi == ZERO {
                continue;
            }
            for &(j, v) in r {
                out[j] += v * yi;
            }
        }
        out
    }

    /// `A* y`.
    pub fn matvec_adjoint(&self, y: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.ncols];
        for (i, r) in self.rows.iter().enumerate() {
            let yi = y[i];
            if yi == ZERO {
                continue;
            }
            for &(j, v) in r {
                out[j] += v.conj() * yi;
            }
        }
        out
    }

    pub fn adjoint(&self) -> SparseMatrix {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); self.ncols];
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, v) in r {
                rows[j].push((i, v.conj()));
            }
        }
        SparseMatrix { nrows: self.ncols, ncols: self.nrows, rows }
    }

    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.ncols, other.nrows);
        let mut acc = vec![ZERO; other.ncols];
        let mut touched: Vec<usize> = Vec::new();
        let mut mark = vec![false; other.ncols];
        let mut rows = Vec::with_capacity(self.nrows);
        for r in &self.rows {
            for &(k, a) in r {
                for &(j, b) in &other.rows[k] {
                    if !mark[j] {
                        mark[j] = true;
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            let mut row = Vec::with_capacity(touched.len());
            for &j in &touched {
                if acc[j] != ZERO {
                    row.push((j, acc[j]));
                }
                acc[j] = ZERO;
                mark[j] = false;
            }
            touched.clear();
            rows.push(row);
        }
        SparseMatrix { nrows: self.nrows, ncols: other.ncols, rows }
    }

    /// `alpha * self + beta * other`.
    pub fn axpby(&self, alpha: C64, other: &SparseMatrix, beta: C64) -> SparseMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| {
                let mut row = Vec::with_capacity(a.len() + b.len());
                let (mut i, mut j) = (0, 0);
                while i < a.len() || j < b.len() {
                    let (col, v) = match (a.get(i), b.get(j)) {
                        (Some(&(ca, va)), Some(&(cb, vb))) if ca == cb => {
                            i += 1;
                            j += 1;
                            (ca, alpha * va + beta * vb)
                        }
                        (Some(&(ca, va)), Some(&(cb, _))) if ca < cb => {
                            i += 1;
                            (ca, alpha * va)
                        }
                        (Some(&(ca, va)), None) => {
                            i += 1;
                            (ca, alpha * va)
                        }
                        (_, Some(&(cb, vb))) => {
                            j += 1;
                            (cb, beta * vb)
                        }
                        (None, None) => unreachable!(),
                    };
                    if v != ZERO {
                        row.push((col, v));
                    }
                }
                row
            })
            .collect();
        SparseMatrix { nrows: self.nrows, ncols: self.ncols, rows }
    }

    pub fn column_abs_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.ncols];
        for r in &self.rows {
            for &(j, v) in r {
                s[j] += v.norm();
            }
        }
        s
    }

    pub fn row_abs_sums(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().map(|(_, v)| v.norm()).sum()).collect()
    }

    pub fn norm_one(&self) -> f64 {
        self.column_abs_sums().into_iter().fold(0.0, f64::max)
    }

    pub fn norm_inf(&self) -> f64 {
        self.row_abs_sums().into_iter().fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.iter().map(|(_, _, v)| v.norm()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(self.nrows, self.ncols, ZERO);
        for (i, j, v) in self.iter() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn from_dense(m: &DMatrix<C64>) -> SparseMatrix {
        let rows = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| (j, m[(i, j)])).filter(|(_, v)| *v != ZERO).collect())
            .collect();
        SparseMatrix { nrows: m.nrows(), ncols: m.ncols(), rows }
    }

    /// Drops empty rows and columns. Returns the compact matrix together
    /// with the original indices of its rows and columns.
    pub fn compact(&self) -> (SparseMatrix, Vec<usize>, Vec<usize>) {
        let row_ids: Vec<usize> = (0..self.nrows).filter(|&i| !self.rows[i].is_empty()).collect();
        let mut col_used = vec![false; self.ncols];
        for r in &self.rows {
            for &(j, _) in r {
                col_used[j] = true;
            }
        }
        let col_ids: Vec<usize> = (0..self.ncols).filter(|&j| col_used[j]).collect();
        let mut col_map = vec![usize::MAX; self.ncols];
        for (k, &j) in col_ids.iter().enumerate() {
            col_map[j] = k;
        }
        let rows = row_ids
            .iter()
            .map(|&i| self.rows[i].iter().map(|&(j, v)| (col_map[j], v)).collect())
            .collect();
        (SparseMatrix { nrows: row_ids.len(), ncols: col_ids.len(), rows }, row_ids, col_ids)
    }
}

fn normalize_row(row: &mut Vec<(usize, C64)>) {
    row.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, C64)> = Vec::with_capacity(row.len());
    for &(j, v) in row.iter() {
        match out.last_mut() {
            Some(last) if last.0 == j => last.1 += v,
            _ => out.push((j, v)),
        }
    }
    out.retain(|(_, v)| *v != ZERO);
    *row = out;
}

/// ℓ^p norm of a complex vector, computed with scaling.
pub fn vector_norm(v: &[C64], p: Exponent) -> f64 {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if p.is_infinite() || max == 0.0 {
        return max;
    }
    if p.is_one() {
        return v.iter().map(|z| z.norm()).sum();
    }
    let pv = p.value();
    let s: f64 = v.iter().map(|z| (z.norm() / max).powf(pv)).sum();
    max * s.powf(1.0 / pv)
}

/// The norming functional of `y` in ℓ^q: `⟨dual, y⟩ = ‖y‖_p`, `‖dual‖_q = 1`.
fn dual_vector(y: &[C64], p: Exponent) -> Vec<C64> {
    let norm = vector_norm(y, p);
    if norm == 0.0 {
        return vec![ZERO; y.len()];
    }
    if p.is_infinite() {
        let (k, _) = y
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bk, bv), (k, z)| if z.norm() > bv { (k, z.norm()) } else { (bk, bv) });
        let mut d = vec![ZERO; y.len()];
        d[k] = y[k].conj() / y[k].norm();
        return d;
    }
    let pv = p.value();
    y.iter()
        .map(|z| {
            let a = z.norm();
            if a == 0.0 {
                ZERO
            } else {
                (z.conj() / a) * (a / norm).powf(pv - 1.0)
            }
        })
        .collect()
}

/// How a [`NormEstimate`] was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    /// Exact maximum column sum (p = 1).
    ColumnSum,
    /// Exact maximum row sum (p = ∞).
    RowSum,
    /// Power iteration with a Cholesky certificate for the upper bound (p = 2).
    Spectral,
    /// Boyd's p-norm power method with the Riesz–Thorin upper bound.
    Boyd,
    /// Dense singular values (small exact evaluations).
    DenseSvd,
}

/// Two-sided bound on an operator p-norm with a witness attaining `lower`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormEstimate {
    pub lower: f64,
    pub upper: f64,
    /// Unit vector (in ℓ^p) with `‖A·witness‖_p = lower`.
    pub witness: Vec<C64>,
    pub method: NormMethod,
    /// False when the tolerance was not met within the iteration budget.
    pub converged: bool,
}

impl NormEstimate {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

/// Riesz–Thorin bound `‖A‖_p ≤ ‖A‖₁^{1/p} ‖A‖_∞^{1/q}`.
pub fn interpolation_bound(a: &SparseMatrix, p: Exponent) -> f64 {
    let (n1, ninf) = (a.norm_one(), a.norm_inf());
    if p.is_one() {
        return n1;
    }
    if p.is_infinite() {
        return ninf;
    }
    let t = p.reciprocal();
    n1.powf(t) * ninf.powf(1.0 - t)
}

/// Estimates `‖A‖_{p→p}`.
///
/// p = 1 and p = ∞ are exact. p = 2 returns a certified interval whose
/// width is at most `tol` unless the budget runs out (then `converged` is
/// false). Other p return a Boyd lower bound and the interpolation upper
/// bound; their gap is reported, not controlled.
pub fn operator_norm(a: &SparseMatrix, p: Exponent, tol: f64) -> NormEstimate {
    let ncols = a.ncols();
    let fallback_witness = || {
        let mut w = vec![ZERO; ncols];
        if ncols > 0 {
            w[0] = C64::new(1.0, 0.0);
        }
        w
    };
    if a.nnz() == 0 {
        let method = if p.is_one() {
            NormMethod::ColumnSum
        } else if p.is_infinite() {
            NormMethod::RowSum
        } else if p.is_two() {
            NormMethod::Spectral
        } else {
            NormMethod::Boyd
        };
        return NormEstimate { lower: 0.0, upper: 0.0, witness: fallback_witness(), method, converged: true };
    }
    if p.is_one() {
        return norm_one_exact(a);
    }
    if p.is_infinite() {
        return norm_inf_exact(a);
    }
    let (compact, _, col_ids) = a.compact();
    let mut est = if p.is_two() { spectral_norm(&compact, tol) } else { boyd_norm(&compact, p) };
    est.witness = expand(&est.witness, &col_ids, ncols);
    est
}

fn expand(v: &[C64], ids: &[usize], n: usize) -> Vec<C64> {
    let mut out = vec![ZERO; n];
    for (&i, &z) in ids.iter().zip(v) {
        out[i] = z;
    }
    out
}

fn norm_one_exact(a: &SparseMatrix) -> NormEstimate {
    let sums = a.column_abs_sums();
    let (j, &best) = sums.iter().enumerate().fold((0, &0.0), |acc, (j, s)| if *s > *acc.1 { (j, s) } else { acc });
    let mut w = vec![ZERO; a.ncols()];
    w[j] = C64::new(1.0, 0.0);
    let lower = vector_norm(&a.matvec(&w), Exponent::ONE);
    NormEstimate { lower, upper: best.max(lower), witness: w, method: NormMethod::ColumnSum, converged: true }
}

fn norm_inf_exact(a: &SparseMatrix) -> NormEstimate {
    let sums = a.row_abs_sums();
    let (i, &best) = sums.iter().enumerate().fold((0, &0.0), |acc, (i, s)| if *s > *acc.1 { (i, s) } else { acc });
    let mut w = vec![ZERO; a.ncols()];
    for &(j, v) in a.row(i) {
        w[j] = v.conj() / v.norm();
    }
    if a.row(i).is_empty() && !w.is_empty() {
        w[0] = C64::new(1.0, 0.0);
    }
    let lower = vector_norm(&a.matvec(&w), Exponent::INFINITY);
    NormEstimate { lower, upper: best.max(lower), witness: w, method: NormMethod::RowSum, converged: true }
}

fn normalize(v: &mut [C64], p: Exponent) -> f64 {
    let n = vector_norm(v, p);
    if n > 0.0 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
    n
}

fn ratio(a: &SparseMatrix, v: &[C64], p: Exponent) -> f64 {
    let nv = vector_norm(v, p);
    if nv == 0.0 {
        return 0.0;
    }
    vector_norm(&a.matvec(v), p) / nv
}

/// Deterministic, non-degenerate start vector.
fn start_vector(n: usize) -> Vec<C64> {
    (0..n).map(|i| C64::new(1.0 + 0.25 * ((i * 7919 % 17) as f64 / 17.0), 0.0)).collect()
}

fn spectral_norm(a: &SparseMatrix, tol: f64) -> NormEstimate {
    let n = a.ncols();
    let mut v = if n <= DENSE_EIGEN_LIMIT { dense_top_right_singular(a) } else { start_vector(n) };
    normalize(&mut v, Exponent::TWO);

    // Gram matrix on the smaller side; its largest eigenvalue is ‖A‖².
    let gram = if a.ncols() <= a.nrows() { EnvelopeGram::new(a) } else { EnvelopeGram::new(&a.adjoint()) };
    let interp = interpolation_bound(a, Exponent::TWO);

    let mut best_v = v.clone();
    let mut best = ratio(a, &v, Exponent::TWO);
    let mut iterations = 0;
    let mut last = best;
    loop {
        for _ in 0..POWER_CHUNK {
            let w = a.matvec_adjoint(&a.matvec(&v));
            v = w;
            if normalize(&mut v, Exponent::TWO) == 0.0 {
                break;
            }
            let r = ratio(a, &v, Exponent::TWO);
            if r > best {
                best = r;
                best_v.clone_from(&v);
            }
        }
        iterations += POWER_CHUNK;
        let settled = (best - last).abs() <= 1e-3 * tol.max(f64::EPSILON * best);
        last = best;
        if settled || iterations >= POWER_BUDGET {
            let target = best + 0.5 * tol;
            let sigma = target * target;
            if let Some(upper_sq) = gram.certify_below(sigma) {
                let upper = upper_sq.sqrt().max(best);
                return NormEstimate {
                    lower: best,
                    upper,
                    witness: best_v,
                    method: NormMethod::Spectral,
                    converged: upper - best <= tol,
                };
            }
            if iterations >= POWER_BUDGET {
                break;
            }
        }
    }
    // Budget exhausted: bisect for the smallest certifiable upper bound.
    let (mut lo, mut hi) = (best * best, interp * interp);
    let mut upper_sq = hi;
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        match gram.certify_below(mid) {
            Some(u) => {
                upper_sq = upper_sq.min(u);
                hi = mid;
            }
            None => lo = mid,
        }
        if hi - lo <= tol * tol {
            break;
        }
    }
    let upper = upper_sq.sqrt().max(best);
    NormEstimate { lower: best, upper, witness: best_v, method: NormMethod::Spectral, converged: upper - best <= tol }
}

fn dense_top_right_singular(a: &SparseMatrix) -> Vec<C64> {
    let d = a.to_dense();
    let g = d.adjoint() * &d;
    let eig = nalgebra::SymmetricEigen::new(g);
    let (k, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bk, bv), (k, &v)| if v > bv { (k, v) } else { (bk, bv) });
    eig.eigenvectors.column(k).iter().copied().collect()
}

/// Largest singular value from a dense SVD; used for small exact evaluations.
pub fn dense_spectral_norm(a: &SparseMatrix) -> f64 {
    if a.nnz() == 0 {
        return 0.0;
    }
    let (c, _, _) = a.compact();
    let d = c.to_dense();
    let svd = d.svd(false, false);
    svd.singular_values.iter().copied().fold(0.0, f64::max)
}

/// Lower triangle of a Hermitian Gram matrix `B*B` in envelope (profile)
/// storage: row `j` holds columns `first[j]..=j`.
struct EnvelopeGram {
    first: Vec<usize>,
    rows: Vec<Vec<C64>>,
    row_bound: f64,
    width: usize,
}

impl EnvelopeGram {
    fn new(b: &SparseMatrix) -> Self {
        let n = b.ncols();
        let mut first: Vec<usize> = (0..n).collect();
        for r in b.rows() {
            if let Some(&(lo, _)) = r.first() {
                for &(j, _) in r {
                    first[j] = first[j].min(lo);
                }
            }
        }
        let mut rows: Vec<Vec<C64>> = (0..n).map(|j| vec![ZERO; j - first[j] + 1]).collect();
        for r in b.rows() {
            for (a, &(j, bj)) in r.iter().enumerate() {
                let cj = bj.conj();
                for &(l, bl) in &r[..=a] {
                    rows[j][l - first[j]] += cj * bl;
                }
            }
        }
        // Row sums of |G| bound every eigenvalue.
        let mut sums = vec![0.0; n];
        for j in 0..n {
            for (off, z) in rows[j].iter().enumerate() {
                let l = first[j] + off;
                sums[j] += z.norm();
                if l != j {
                    sums[l] += z.norm();
                }
            }
        }
        let row_bound = sums.into_iter().fold(0.0, f64::max);
        let width = (0..n).map(|j| j - first[j]).max().unwrap_or(0);
        EnvelopeGram { first, rows, row_bound, width }
    }

    /// Attempts a Cholesky factorisation of `sigma·I − G`. On success every
    /// eigenvalue of `G` lies below the returned value, which adds a
    /// backward-error allowance to `sigma`.
    fn certify_below(&self, sigma: f64) -> Option<f64> {
        let n = self.rows.len();
        let mut l: Vec<Vec<C64>> = Vec::with_capacity(n);
        for i in 0..n {
            let fi = self.first[i];
            let mut li = vec![ZERO; i - fi + 1];
            for j in fi..=i {
                let fj = self.first[j];
                let mut s = if j == i { C64::new(sigma, 0.0) - self.rows[i][i - fi] } else { -self.rows[i][j - fi] };
                let start = fi.max(fj);
                for k in start..j {
                    let ljk = if j == i { li[k - fi] } else { l[j][k - fj] };
                    s -= li[k - fi] * ljk.conj();
                }
                if j < i {
                    li[j - fi] = s / l[j][j - fj];
                } else {
                    if !(s.re > 0.0) {
                        return None;
                    }
                    li[i - fi] = C64::new(s.re.sqrt(), 0.0);
                }
            }
            l.push(li);
        }
        let allowance = 4.0 * (self.width + 2) as f64 * f64::EPSILON * (sigma.abs() + self.row_bound);
        Some(sigma + allowance)
    }
}

fn boyd_norm(a: &SparseMatrix, p: Exponent) -> NormEstimate {
    let n = a.ncols();
    let q = p.conjugate();
    let mut starts: Vec<Vec<C64>> = vec![vec![C64::new(1.0, 0.0); n]];
    starts.push(norm_one_exact(a).witness);
    starts.push(norm_inf_exact(a).witness);

    let mut best = 0.0;
    let mut best_v = starts[0].clone();
    for mut x in starts {
        if normalize(&mut x, p) == 0.0 {
            continue;
        }
        for _ in 0..BOYD_ITERATIONS {
            let y = a.matvec(&x);
            let r = vector_norm(&y, p);
            if r > best {
                best = r;
                best_v.clone_from(&x);
            }
            let z = a.matvec_transpose(&dual_vector(&y, p));
            let zq = vector_norm(&z, q);
            let zx: f64 = z.iter().zip(&x).map(|(zi, xi)| (zi * xi).re).sum();
            if zq <= zx * (1.0 + 1e-14) || zq == 0.0 {
                break;
            }
            x = dual_vector(&z, q);
            if normalize(&mut x, p) == 0.0 {
                break;
            }
        }
    }
    normalize(&mut best_v, p);
    let lower = ratio(a, &best_v, p);
    let upper = interpolation_bound(a, p).max(lower);
    NormEstimate { lower, upper, witness: best_v, method: NormMethod::Boyd, converged: true }
}

/// Solves `A X = B` densely via LU. Returns `None` for singular `A`.
pub fn dense_solve(a: &SparseMatrix, b: &SparseMatrix) -> Option<SparseMatrix> {
    let lu = a.to_dense().lu();
    lu.solve(&b.to_dense()).map(|x| SparseMatrix::from_dense(&x))
}
