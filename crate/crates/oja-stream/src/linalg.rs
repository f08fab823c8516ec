//! Minimal dense linear algebra: vectors, symmetric matrices, the sin^2
//! error metric, and an exact small-d Jacobi eigensolver used as the
//! ground-truth oracle and by the batch baseline.
//!
//! Everything here is plain `f64` heap storage. The streaming code paths
//! only ever touch O(d) state; the d*d types exist for oracles, the batch
//! baseline, and desk-scale verification.

use crate::error::{OjaError, Result};

/// Dense real vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    pub fn from_vec(data: Vec<f64>) -> Self {
        Vector { data }
    }

    pub fn zeros(d: usize) -> Self {
        Vector { data: vec![0.0; d] }
    }

    /// Standard basis vector `scale * e_index`.
    pub fn basis(d: usize, index: usize, scale: f64) -> Self {
        let mut data = vec![0.0; d];
        data[index] = scale;
        Vector { data }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        dot(&self.data, &other.data)
    }

    pub fn norm(&self) -> f64 {
        norm(&self.data)
    }

    /// self += c * other
    pub fn axpy(&mut self, c: f64, other: &Vector) {
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += c * b;
        }
    }

    pub fn scale(&mut self, c: f64) {
        for a in self.data.iter_mut() {
            *a *= c;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn norm(v: &[f64]) -> f64 {
    let n2: f64 = v.iter().map(|x| x * x).sum();
    if n2.is_finite() {
        return n2.sqrt();
    }
    // Rescale by the largest magnitude when the squared sum overflows.
    let m = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    let s: f64 = v.iter().map(|x| (x / m) * (x / m)).sum();
    m * s.sqrt()
}

/// Unit-norm direction estimate. The constructor enforces
/// | ||w|| - 1 | <= 1e-12; `normalize` produces one from any nonzero vector.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector {
    inner: Vector,
}

impl UnitVector {
    pub fn new(v: Vector) -> Result<Self> {
        let n = v.norm();
        if (n - 1.0).abs() > 1e-12 {
            return Err(OjaError::InvalidParameter(format!(
                "unit vector norm is {n}, outside 1 +/- 1e-12"
            )));
        }
        Ok(UnitVector { inner: v })
    }

    /// Basis vector e_index (exactly unit norm).
    pub fn basis(d: usize, index: usize) -> Self {
        UnitVector {
            inner: Vector::basis(d, index, 1.0),
        }
    }

    pub(crate) fn from_normalized(v: Vector) -> Self {
        UnitVector { inner: v }
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn as_vector(&self) -> &Vector {
        &self.inner
    }

    pub fn as_slice(&self) -> &[f64] {
        self.inner.as_slice()
    }

    pub fn dot(&self, other: &UnitVector) -> f64 {
        self.inner.dot(&other.inner)
    }

    pub fn negated(&self) -> UnitVector {
        let mut v = self.inner.clone();
        v.scale(-1.0);
        UnitVector { inner: v }
    }
}

/// Scale `v` to unit Euclidean norm. Direction is preserved exactly.
pub fn normalize(v: &Vector) -> Result<UnitVector> {
    let n = v.norm();
    if n <= 1e-300 {
        return Err(OjaError::ZeroVector);
    }
    let mut out = v.clone();
    out.scale(1.0 / n);
    // One corrective pass keeps the result within 1e-12 of unit norm even
    // after the division rounds.
    let n2 = out.norm();
    if (n2 - 1.0).abs() > 1e-13 {
        out.scale(1.0 / n2);
    }
    Ok(UnitVector::from_normalized(out))
}

/// sin^2 of the angle between two unit vectors: 1 - (w . v)^2,
/// clamped to [0, 1] against rounding. Sign-invariant in both arguments.
pub fn sin_sq(w: &UnitVector, v: &UnitVector) -> f64 {
    let c = w.dot(v);
    (1.0 - c * c).clamp(0.0, 1.0)
}

/// sin of the angle between two unit directions (sign-invariant), computed
/// from chord lengths: sin theta = ||w - v|| ||w + v|| / 2. Unlike
/// 1 - (w.v)^2 this resolves angles far below 1e-8.
pub fn sin_angle(w: &UnitVector, v: &UnitVector) -> f64 {
    let a = w.as_slice();
    let b = v.as_slice();
    let (mut diff2, mut sum2) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b.iter()) {
        diff2 += (x - y) * (x - y);
        sum2 += (x + y) * (x + y);
    }
    // Orientation with the smaller chord keeps the formula accurate for
    // antipodal inputs as well.
    0.5 * (diff2.min(sum2)).sqrt() * (diff2.max(sum2)).sqrt()
}

/// Rayleigh quotient w^T S w.
pub fn rayleigh(w: &UnitVector, s: &SymMatrix) -> f64 {
    let sw = s.apply(w.as_vector());
    w.as_vector().dot(&sw)
}

/// Symmetric d x d matrix, packed lower-triangular storage so each entry
/// is stored exactly once.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    d: usize,
    // row-major lower triangle: index(i, j) = i (i + 1) / 2 + j for i >= j
    packed: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(d: usize) -> Self {
        SymMatrix {
            d,
            packed: vec![0.0; d * (d + 1) / 2],
        }
    }

    pub fn diag(entries: &[f64]) -> Self {
        let mut m = SymMatrix::zeros(entries.len());
        for (i, &x) in entries.iter().enumerate() {
            m.set(i, i, x);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    fn idx(i: usize, j: usize) -> usize {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        i * (i + 1) / 2 + j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.packed[Self::idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.packed[Self::idx(i, j)] = value;
    }

    pub fn add_scaled(&mut self, c: f64, other: &SymMatrix) {
        debug_assert_eq!(self.d, other.d);
        for (a, b) in self.packed.iter_mut().zip(other.packed.iter()) {
            *a += c * b;
        }
    }

    pub fn scale(&mut self, c: f64) {
        for a in self.packed.iter_mut() {
            *a *= c;
        }
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        debug_assert_eq!(self.d, v.dim());
        let x = v.as_slice();
        let mut out = vec![0.0; self.d];
        for i in 0..self.d {
            let mut acc = 0.0;
            for j in 0..self.d {
                acc += self.get(i, j) * x[j];
            }
            out[i] = acc;
        }
        Vector::from_vec(out)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.d, self.d);
        for i in 0..self.d {
            for j in 0..self.d {
                m.set(i, j, self.get(i, j));
            }
        }
        m
    }

    /// (M + M^T) / 2 of a square dense matrix.
    pub fn symmetrize(m: &DenseMatrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(OjaError::DimensionMismatch {
                expected: m.rows(),
                got: m.cols(),
            });
        }
        let d = m.rows();
        let mut s = SymMatrix::zeros(d);
        for i in 0..d {
            for j in 0..=i {
                s.set(i, j, 0.5 * (m.get(i, j) + m.get(j, i)));
            }
        }
        Ok(s)
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.d {
            for j in 0..self.d {
                let x = self.get(i, j);
                acc += x * x;
            }
        }
        acc.sqrt()
    }
}

/// General (not necessarily symmetric) dense matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = DenseMatrix::zeros(d, d);
        for i in 0..d {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(OjaError::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn diag(entries: &[f64]) -> Self {
        let d = entries.len();
        let mut m = DenseMatrix::zeros(d, d);
        for (i, &x) in entries.iter().enumerate() {
            m.set(i, i, x);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Matrix-vector product A v.
    pub fn apply(&self, v: &Vector) -> Result<Vector> {
        if v.dim() != self.cols {
            return Err(OjaError::DimensionMismatch {
                expected: self.cols,
                got: v.dim(),
            });
        }
        let x = v.as_slice();
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            out[i] = dot(self.row(i), x);
        }
        Ok(Vector::from_vec(out))
    }

    /// A^T v.
    pub fn apply_transpose(&self, v: &Vector) -> Result<Vector> {
        if v.dim() != self.rows {
            return Err(OjaError::DimensionMismatch {
                expected: self.rows,
                got: v.dim(),
            });
        }
        let x = v.as_slice();
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += xi * a;
            }
        }
        Ok(Vector::from_vec(out))
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.get(i, j));
            }
        }
        m
    }

    /// self += c * other (same shape).
    pub fn add_scaled(&mut self, c: f64, other: &DenseMatrix) {
        debug_assert_eq!(self.rows, other.rows);
        debug_assert_eq!(self.cols, other.cols);
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += c * b;
        }
    }

    /// self += c * x y^T
    pub fn add_outer(&mut self, c: f64, x: &[f64], y: &[f64]) {
        debug_assert_eq!(self.rows, x.len());
        debug_assert_eq!(self.cols, y.len());
        for i in 0..self.rows {
            let cx = c * x[i];
            let row = &mut self.data[i * self.cols..(i + 1) * self.cols];
            for (r, yj) in row.iter_mut().zip(y.iter()) {
                *r += cx * yj;
            }
        }
    }

    /// Gram matrix A A^T (symmetric).
    pub fn gram(&self) -> SymMatrix {
        let mut g = SymMatrix::zeros(self.rows);
        for i in 0..self.rows {
            for j in 0..=i {
                g.set(i, j, dot(self.row(i), self.row(j)));
            }
        }
        g
    }

    /// Gram matrix of the transpose, A^T A (symmetric).
    pub fn gram_transpose(&self) -> SymMatrix {
        let mut g = SymMatrix::zeros(self.cols);
        for i in 0..self.cols {
            for j in 0..=i {
                let mut acc = 0.0;
                for k in 0..self.rows {
                    acc += self.get(k, i) * self.get(k, j);
                }
                g.set(i, j, acc);
            }
        }
        g
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    pub fn scale(&mut self, c: f64) {
        for a in self.data.iter_mut() {
            *a *= c;
        }
    }
}

/// Full eigendecomposition of a symmetric matrix, eigenvalues descending,
/// eigenvectors as columns of `vectors`.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

const JACOBI_MAX_SWEEPS: usize = 64;

/// Cyclic Jacobi rotations to full convergence: off-diagonal Frobenius
/// norm <= 1e-12 * ||S||_F. Exact and robust for the d <= 512 oracle
/// regime this crate targets; speed is not the point here.
pub fn sym_eig(s: &SymMatrix) -> Result<SymEig> {
    let d = s.dim();
    if d == 0 {
        return Err(OjaError::InvalidParameter("empty matrix".into()));
    }
    let mut a = s.to_dense();
    let mut v = DenseMatrix::identity(d);
    let scale = s.frobenius_norm();
    let tol = 1e-12 * scale;

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    let x = a.get(i, j);
                    off += x * x;
                }
            }
        }
        if off.sqrt() <= tol {
            return Ok(sorted_eig(&a, &v));
        }
        for p in 0..d.saturating_sub(1) {
            for q in (p + 1)..d {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    // Avoid overflow in theta^2; the rotation is tiny anyway.
                    0.5 / theta
                } else {
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                rotate(&mut a, &mut v, p, q, c, sn);
            }
        }
    }
    Err(OjaError::NoConvergence {
        sweeps: JACOBI_MAX_SWEEPS,
    })
}

/// Apply the two-sided rotation J^T A J and accumulate V <- V J where J
/// rotates the (p, q) plane.
fn rotate(a: &mut DenseMatrix, v: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let d = a.rows();
    for k in 0..d {
        let akp = a.get(k, p);
        let akq = a.get(k, q);
        a.set(k, p, c * akp - s * akq);
        a.set(k, q, s * akp + c * akq);
    }
    for k in 0..d {
        let apk = a.get(p, k);
        let aqk = a.get(q, k);
        a.set(p, k, c * apk - s * aqk);
        a.set(q, k, s * apk + c * aqk);
    }
    // The pivot entry is zero analytically; pin it to keep the
    // off-diagonal measure honest.
    a.set(p, q, 0.0);
    a.set(q, p, 0.0);
    for k in 0..d {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, c * vkp - s * vkq);
        v.set(k, q, s * vkp + c * vkq);
    }
}

fn sorted_eig(a: &DenseMatrix, v: &DenseMatrix) -> SymEig {
    let d = a.rows();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a.get(j, j).total_cmp(&a.get(i, i)));
    let mut values = Vec::with_capacity(d);
    let mut vectors = DenseMatrix::zeros(d, d);
    for (col, &k) in order.iter().enumerate() {
        values.push(a.get(k, k));
        for r in 0..d {
            vectors.set(r, col, v.get(r, k));
        }
    }
    SymEig { values, vectors }
}

/// Top-two eigenvalues and a unit top eigenvector of a symmetric matrix.
///
/// Sign convention: the first coordinate of v1 with magnitude above 1e-12
/// is positive, which makes repeated solves comparable. Requires d >= 2.
pub fn sym_eig_top2(s: &SymMatrix) -> Result<(f64, f64, UnitVector)> {
    let d = s.dim();
    if d < 2 {
        return Err(OjaError::InvalidParameter(format!(
            "sym_eig_top2 needs d >= 2, got {d}"
        )));
    }
    let eig = sym_eig(s)?;
    let lambda1 = eig.values[0];
    let lambda2 = eig.values[1];
    let mut col = vec![0.0; d];
    for r in 0..d {
        col[r] = eig.vectors.get(r, 0);
    }
    let mut v1 = normalize(&Vector::from_vec(col))?;
    if leading_entry(v1.as_slice()) < 0.0 {
        v1 = v1.negated();
    }
    // Residual check of the returned eigenpair.
    let sv = s.apply(v1.as_vector());
    let mut res = sv;
    res.axpy(-lambda1, v1.as_vector());
    if res.norm() > 1e-9 * lambda1.abs().max(1.0) {
        return Err(OjaError::NoConvergence {
            sweeps: JACOBI_MAX_SWEEPS,
        });
    }
    Ok((lambda1, lambda2, v1))
}

fn leading_entry(v: &[f64]) -> f64 {
    for &x in v {
        if x.abs() > 1e-12 {
            return x;
        }
    }
    // A unit vector always has an entry above 1e-12 for any realistic d;
    // fall back to the first coordinate.
    v[0]
}

/// Spectral norm (largest |eigenvalue|) of a symmetric matrix.
pub fn spectral_norm_sym(s: &SymMatrix) -> Result<f64> {
    let eig = sym_eig(s)?;
    let hi = eig.values.first().copied().unwrap_or(0.0);
    let lo = eig.values.last().copied().unwrap_or(0.0);
    Ok(hi.abs().max(lo.abs()))
}

/// Spectral norm of a general square matrix via sqrt(lambda_max(M^T M)).
pub fn spectral_norm(m: &DenseMatrix) -> Result<f64> {
    let g = m.gram_transpose();
    let eig = sym_eig(&g)?;
    Ok(eig.values.first().copied().unwrap_or(0.0).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vec2(a: f64, b: f64) -> Vector {
        Vector::from_vec(vec![a, b])
    }

    #[test]
    fn normalize_scales_direction() {
        let u = normalize(&vec2(3.0, 4.0)).unwrap();
        assert!((u.as_slice()[0] - 0.6).abs() < 1e-15);
        assert!((u.as_slice()[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn normalize_keeps_unit_input() {
        let u = normalize(&Vector::from_vec(vec![1.0, 0.0, 0.0])).unwrap();
        assert_eq!(u.as_slice(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn normalize_rejects_zero() {
        assert!(matches!(
            normalize(&vec2(0.0, 0.0)),
            Err(OjaError::ZeroVector)
        ));
    }

    #[test]
    fn sin_sq_identity_orthogonal_mixed() {
        let e1 = UnitVector::basis(2, 0);
        let e2 = UnitVector::basis(2, 1);
        assert_eq!(sin_sq(&e1, &e1), 0.0);
        assert_eq!(sin_sq(&e1, &e2), 1.0);
        let mid = normalize(&vec2(1.0, 1.0)).unwrap();
        assert!((sin_sq(&mid, &e1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rayleigh_on_diagonal() {
        let s = SymMatrix::diag(&[2.0, 1.0]);
        let e1 = UnitVector::basis(2, 0);
        let e2 = UnitVector::basis(2, 1);
        let mid = normalize(&vec2(1.0, 1.0)).unwrap();
        assert_eq!(rayleigh(&e1, &s), 2.0);
        assert_eq!(rayleigh(&e2, &s), 1.0);
        assert!((rayleigh(&mid, &s) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn apply_examples() {
        let id = DenseMatrix::identity(2);
        let v = vec2(1.0, 2.0);
        assert_eq!(id.apply(&v).unwrap(), v);

        let d = DenseMatrix::diag(&[2.0, 3.0]);
        assert_eq!(
            d.apply(&vec2(1.0, 1.0)).unwrap(),
            Vector::from_vec(vec![2.0, 3.0])
        );

        let shear = DenseMatrix::from_rows(2, 2, vec![1.0, 1.0, 0.0, 1.0]).unwrap();
        assert_eq!(
            shear.apply(&vec2(1.0, 1.0)).unwrap(),
            Vector::from_vec(vec![2.0, 1.0])
        );

        let bad = DenseMatrix::identity(3).apply(&vec2(1.0, 1.0));
        assert!(matches!(bad, Err(OjaError::DimensionMismatch { .. })));
    }

    #[test]
    fn top2_of_diagonal_is_exact() {
        let s = SymMatrix::diag(&[2.0, 1.0, 0.0]);
        let (l1, l2, v1) = sym_eig_top2(&s).unwrap();
        assert_eq!(l1, 2.0);
        assert_eq!(l2, 1.0);
        assert_eq!(v1.as_slice(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn top2_of_exchange_matrix() {
        let mut s = SymMatrix::zeros(2);
        s.set(0, 1, 1.0);
        let (l1, l2, v1) = sym_eig_top2(&s).unwrap();
        assert!((l1 - 1.0).abs() < 1e-12);
        assert!((l2 + 1.0).abs() < 1e-12);
        let r = 1.0 / 2.0f64.sqrt();
        assert!((v1.as_slice()[0] - r).abs() < 1e-12);
        assert!((v1.as_slice()[1] - r).abs() < 1e-12);
    }

    #[test]
    fn sorted_diag_recovered_to_1e12() {
        let diag = [5.0, 4.0, 3.0, 2.0, 1.0, 0.5];
        let s = SymMatrix::diag(&diag);
        let (l1, l2, v1) = sym_eig_top2(&s).unwrap();
        assert!((l1 - 5.0).abs() <= 1e-12);
        assert!((l2 - 4.0).abs() <= 1e-12);
        assert!(sin_sq(&v1, &UnitVector::basis(6, 0)) <= 1e-24);
    }

    // Independent test-side eigensolver: classical Jacobi with
    // largest-off-diagonal pivoting (different strategy from the cyclic
    // production solver). Used as the oracle for random-matrix checks.
    fn classical_jacobi(s: &SymMatrix) -> (Vec<f64>, DenseMatrix) {
        let d = s.dim();
        let mut a = s.to_dense();
        let mut v = DenseMatrix::identity(d);
        let scale = s.frobenius_norm().max(1e-300);
        for _ in 0..20_000 {
            let (mut p, mut q, mut big) = (0, 1, 0.0);
            for i in 0..d {
                for j in (i + 1)..d {
                    if a.get(i, j).abs() > big {
                        big = a.get(i, j).abs();
                        p = i;
                        q = j;
                    }
                }
            }
            if big <= 1e-14 * scale {
                break;
            }
            let apq = a.get(p, q);
            let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
            let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
            let t = sign / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let sn = t * c;
            super::rotate(&mut a, &mut v, p, q, c, sn);
        }
        let eig = super::sorted_eig(&a, &v);
        (eig.values, eig.vectors)
    }

    #[test]
    fn random_5x5_matches_classical_jacobi_oracle() {
        let mut rng = crate::rng::RngState::new(0x5eed_11a1);
        for _ in 0..20 {
            let mut s = SymMatrix::zeros(5);
            for i in 0..5 {
                for j in 0..=i {
                    s.set(i, j, 2.0 * rng.next_f64() - 1.0);
                }
            }
            let (l1, l2, v1) = sym_eig_top2(&s).unwrap();
            let (ovals, ovecs) = classical_jacobi(&s);
            assert!((l1 - ovals[0]).abs() <= 1e-8 * ovals[0].abs().max(1.0));
            assert!((l2 - ovals[1]).abs() <= 1e-8 * ovals[1].abs().max(1.0));
            let mut col = vec![0.0; 5];
            for r in 0..5 {
                col[r] = ovecs.get(r, 0);
            }
            let ov1 = normalize(&Vector::from_vec(col)).unwrap();
            assert!(sin_sq(&v1, &ov1) <= 1e-16);
        }
    }

    #[test]
    fn rayleigh_of_top_eigenvector_matches_lambda1() {
        let mut rng = crate::rng::RngState::new(0xfeed_beef);
        for _ in 0..20 {
            let mut s = SymMatrix::zeros(6);
            for i in 0..6 {
                for j in 0..=i {
                    s.set(i, j, 2.0 * rng.next_f64() - 1.0);
                }
            }
            let (l1, _, v1) = sym_eig_top2(&s).unwrap();
            assert!((rayleigh(&v1, &s) - l1).abs() <= 1e-9);
        }
    }

    proptest! {
        #[test]
        fn normalized_vectors_have_unit_norm(xs in proptest::collection::vec(-1e3f64..1e3, 2..12)) {
            prop_assume!(norm(&xs) > 1e-6);
            let u = normalize(&Vector::from_vec(xs)).unwrap();
            prop_assert!((u.as_vector().norm() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn sin_sq_symmetric_and_sign_invariant(
            xs in proptest::collection::vec(-1.0f64..1.0, 4),
            ys in proptest::collection::vec(-1.0f64..1.0, 4),
        ) {
            prop_assume!(norm(&xs) > 1e-3 && norm(&ys) > 1e-3);
            let w = normalize(&Vector::from_vec(xs)).unwrap();
            let v = normalize(&Vector::from_vec(ys)).unwrap();
            let a = sin_sq(&w, &v);
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert_eq!(a, sin_sq(&v, &w));
            prop_assert_eq!(a, sin_sq(&w.negated(), &v));
        }
    }
}
