//! Dense quaternionic matrices.
//!
//! Spectral work goes through the complex adjoint
//! `chi(A1 + A2 j) = [[A1, A2], [-conj(A2), conj(A1)]]`, which is an
//! injective *-homomorphism into complex matrices of doubled size. A
//! Hermitian quaternionic matrix has real right eigenvalues, and each of
//! them appears twice in the spectrum of its complex adjoint.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quat::Quaternion;

pub type C64 = Complex<f64>;

/// Relative tolerance used to pair the doubled eigenvalues of `chi(A)`.
pub const PAIRING_TOL: f64 = 1e-8;

/// Stein summation stops after this many doubling steps.
const STEIN_MAX_DOUBLINGS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QMatrixRepr", into = "QMatrixRepr")]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Quaternion>,
}

#[derive(Serialize, Deserialize)]
struct QMatrixRepr {
    rows: usize,
    cols: usize,
    entries: Vec<Quaternion>,
}

impl TryFrom<QMatrixRepr> for QMatrix {
    type Error = Error;

    fn try_from(r: QMatrixRepr) -> Result<Self> {
        QMatrix::from_vec(r.rows, r.cols, r.entries)
    }
}

impl From<QMatrix> for QMatrixRepr {
    fn from(m: QMatrix) -> Self {
        QMatrixRepr {
            rows: m.rows,
            cols: m.cols,
            entries: m.data,
        }
    }
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Quaternion::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Quaternion::ONE;
        }
        m
    }

    /// Row-major construction; fails when `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Quaternion>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Quaternion) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<Quaternion>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Ok(Self::from_fn(r, c, |i, j| rows[i][j]))
    }

    /// Embeds a real row-major matrix.
    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, values.iter().map(|&v| Quaternion::real(v)).collect())
    }

    pub fn diag(entries: &[Quaternion]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn scalar(q: Quaternion) -> Self {
        Self {
            rows: 1,
            cols: 1,
            data: vec![q],
        }
    }

    pub fn column(entries: &[Quaternion]) -> Self {
        Self {
            rows: entries.len(),
            cols: 1,
            data: entries.to_vec(),
        }
    }

    pub fn row(entries: &[Quaternion]) -> Self {
        Self {
            rows: 1,
            cols: entries.len(),
            data: entries.to_vec(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Quaternion] {
        &self.data
    }

    pub fn column_vec(&self, j: usize) -> Vec<Quaternion> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Entrywise quaternion conjugate (no transpose).
    pub fn conj(&self) -> Self {
        self.map(Quaternion::conj)
    }

    pub fn map(&self, f: impl Fn(Quaternion) -> Quaternion) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&q| f(q)).collect(),
        }
    }

    /// `q * A`, entrywise multiplication on the left.
    pub fn left_scale(&self, q: Quaternion) -> Self {
        self.map(|e| q * e)
    }

    /// `A * q`, entrywise multiplication on the right.
    pub fn right_scale(&self, q: Quaternion) -> Self {
        self.map(|e| e * q)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|e| e * s)
    }

    pub fn try_mul(&self, rhs: &QMatrix) -> Result<QMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = QMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn try_add(&self, rhs: &QMatrix) -> Result<QMatrix> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn try_sub(&self, rhs: &QMatrix) -> Result<QMatrix> {
        self.zip_with(rhs, |a, b| a - b)
    }

    fn zip_with(&self, rhs: &QMatrix, f: impl Fn(Quaternion, Quaternion) -> Quaternion) -> Result<QMatrix> {
        if self.shape() != rhs.shape() {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// `A^n` for square `A`.
    pub fn pow(&self, n: usize) -> QMatrix {
        assert!(self.is_square(), "power of a non-square matrix");
        let mut out = QMatrix::identity(self.rows);
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|q| q.norm()).fold(0.0, f64::max)
    }

    /// `max |A - A*|` over entries.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut d: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                d = d.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        d
    }

    /// `(A + A*) / 2`.
    pub fn hermitian_part(&self) -> QMatrix {
        assert!(self.is_square());
        QMatrix::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    pub fn block(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> QMatrix {
        QMatrix::from_fn(rows, cols, |i, j| self[(row0 + i, col0 + j)])
    }

    /// Stacks `top` above `bottom`.
    pub fn vstack(top: &QMatrix, bottom: &QMatrix) -> Result<QMatrix> {
        if top.cols != bottom.cols {
            return Err(Error::ShapeMismatch("vstack column counts differ".into()));
        }
        let mut data = top.data.clone();
        data.extend_from_slice(&bottom.data);
        QMatrix::from_vec(top.rows + bottom.rows, top.cols, data)
    }

    pub fn hstack(left: &QMatrix, right: &QMatrix) -> Result<QMatrix> {
        if left.rows != right.rows {
            return Err(Error::ShapeMismatch("hstack row counts differ".into()));
        }
        Ok(QMatrix::from_fn(left.rows, left.cols + right.cols, |i, j| {
            if j < left.cols {
                left[(i, j)]
            } else {
                right[(i, j - left.cols)]
            }
        }))
    }

    /// `[[a, b], [c, d]]` block assembly.
    pub fn blocks(a: &QMatrix, b: &QMatrix, c: &QMatrix, d: &QMatrix) -> Result<QMatrix> {
        QMatrix::vstack(&QMatrix::hstack(a, b)?, &QMatrix::hstack(c, d)?)
    }

    /// Block diagonal `diag(a, b)`.
    pub fn block_diag(a: &QMatrix, b: &QMatrix) -> QMatrix {
        let mut out = QMatrix::zeros(a.rows + b.rows, a.cols + b.cols);
        for i in 0..a.rows {
            for j in 0..a.cols {
                out[(i, j)] = a[(i, j)];
            }
        }
        for i in 0..b.rows {
            for j in 0..b.cols {
                out[(a.rows + i, a.cols + j)] = b[(i, j)];
            }
        }
        out
    }

    /// The complex adjoint `chi(A)`, a `2 rows x 2 cols` complex matrix.
    pub fn complex_adjoint(&self) -> DMatrix<C64> {
        let (n, m) = self.shape();
        let mut out = DMatrix::from_element(2 * n, 2 * m, C64::new(0.0, 0.0));
        for i in 0..n {
            for j in 0..m {
                let q = self[(i, j)];
                let a1 = C64::new(q.w, q.x);
                let a2 = C64::new(q.y, q.z);
                out[(i, j)] = a1;
                out[(i, m + j)] = a2;
                out[(n + i, j)] = -a2.conj();
                out[(n + i, m + j)] = a1.conj();
            }
        }
        out
    }

    /// Inverse of [`complex_adjoint`](Self::complex_adjoint). The two copies
    /// of each block are averaged, which projects a nearly structured
    /// matrix onto the image of `chi`.
    pub fn from_complex_adjoint(c: &DMatrix<C64>) -> Result<QMatrix> {
        if !c.nrows().is_multiple_of(2) || !c.ncols().is_multiple_of(2) {
            return Err(Error::ShapeMismatch("complex adjoint must have even dimensions".into()));
        }
        let (n, m) = (c.nrows() / 2, c.ncols() / 2);
        Ok(QMatrix::from_fn(n, m, |i, j| {
            let a1 = (c[(i, j)] + c[(n + i, m + j)].conj()) * 0.5;
            let a2 = (c[(i, m + j)] - c[(n + i, j)].conj()) * 0.5;
            Quaternion::new(a1.re, a1.im, a2.re, a2.im)
        }))
    }

    fn require_hermitian(&self, tol: f64) -> Result<()> {
        if !self.is_square() {
            return Err(Error::ShapeMismatch(format!(
                "expected a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        let scale = self.frobenius_norm();
        let asymmetry = self.hermitian_defect();
        if asymmetry > tol * scale {
            return Err(Error::NotHermitian { asymmetry });
        }
        Ok(())
    }

    /// Real eigenvalues of a Hermitian matrix with their multiplicities.
    pub fn herm_eigen(&self, tol: f64) -> Result<Spectrum> {
        self.require_hermitian(tol)?;
        let eig = SymmetricEigen::new(self.hermitian_part().complex_adjoint());
        let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        values.sort_by(f64::total_cmp);
        let pair_tol = PAIRING_TOL * self.frobenius_norm() + f64::MIN_POSITIVE;
        let halved = pair_doubled(&values, pair_tol)?;
        Ok(Spectrum::group(&halved, pair_tol))
    }

    /// Number of eigenvalues strictly below `-tol`, counted once per pair.
    pub fn neg_squares(&self, tol: f64) -> Result<usize> {
        let spec = self.herm_eigen(tol)?;
        Ok(spec.count_below(-tol))
    }

    /// Applies `f` to the spectrum of a Hermitian matrix:
    /// `V f(L) V*` computed on `chi(A)` and mapped back.
    pub fn spectral_map(&self, tol: f64, f: impl Fn(f64) -> f64) -> Result<QMatrix> {
        self.require_hermitian(tol)?;
        let eig = SymmetricEigen::new(self.hermitian_part().complex_adjoint());
        let v = &eig.eigenvectors;
        let mut scaled = v.clone();
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            let s = C64::new(f(lambda), 0.0);
            for r in 0..scaled.nrows() {
                scaled[(r, k)] *= s;
            }
        }
        let out = QMatrix::from_complex_adjoint(&(scaled * v.adjoint()))?;
        Ok(out.hermitian_part())
    }

    /// Positive square root of a Hermitian positive definite matrix.
    pub fn sqrt_pd(&self) -> Result<QMatrix> {
        self.require_positive(1e-12)?;
        self.spectral_map(1e-10, f64::sqrt)
    }

    /// `A^{-1/2}` for Hermitian positive definite `A`.
    pub fn inv_sqrt_pd(&self) -> Result<QMatrix> {
        self.require_positive(1e-12)?;
        self.spectral_map(1e-10, |x| 1.0 / x.sqrt())
    }

    /// Inverse of a Hermitian positive definite matrix.
    pub fn inverse_pd(&self) -> Result<QMatrix> {
        self.require_positive(1e-12)?;
        self.spectral_map(1e-10, |x| 1.0 / x)
    }

    fn require_positive(&self, rel_tol: f64) -> Result<()> {
        let spec = self.herm_eigen(1e-10)?;
        let min = spec.min().unwrap_or(f64::INFINITY);
        if self.rows > 0 && min <= rel_tol * self.frobenius_norm() {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        Ok(())
    }

    /// Inverse of a general square matrix through LU on `chi(A)`.
    pub fn inverse(&self) -> Result<QMatrix> {
        if !self.is_square() {
            return Err(Error::ShapeMismatch("inverse of a non-square matrix".into()));
        }
        let inv = self.complex_adjoint().lu().try_inverse().ok_or(Error::Singular)?;
        QMatrix::from_complex_adjoint(&inv)
    }

    /// Quaternionic rank: half the complex rank of `chi(A)`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        let sv = self.complex_adjoint().singular_values();
        let smax = sv.iter().copied().fold(0.0, f64::max);
        if smax == 0.0 {
            return 0;
        }
        let complex_rank = sv.iter().filter(|&&s| s > rel_tol * smax).count();
        complex_rank.div_ceil(2)
    }

    /// Spectral radius of `chi(A)`, which equals the largest modulus of a
    /// right eigenvalue of `A`.
    pub fn spectral_radius(&self) -> f64 {
        assert!(self.is_square());
        if self.rows == 0 {
            return 0.0;
        }
        let schur = nalgebra::linalg::Schur::new(self.complex_adjoint());
        let (_, t) = schur.unpack();
        (0..t.nrows()).map(|i| t[(i, i)].norm()).fold(0.0, f64::max)
    }

    /// Splits a Hermitian matrix as `A = plus - minus` with both parts
    /// positive semidefinite and `rank(minus)` equal to the number of
    /// negative eigenvalues below `-tol`.
    pub fn spectral_split(&self, tol: f64) -> Result<(QMatrix, QMatrix)> {
        let plus = self.spectral_map(tol, |x| if x > tol { x } else { 0.0 })?;
        let minus = self.spectral_map(tol, |x| if x < -tol { -x } else { 0.0 })?;
        Ok((plus, minus))
    }
}

/// Pairs the sorted doubled spectrum of `chi(A)` and returns one value per pair.
fn pair_doubled(values: &[f64], tol: f64) -> Result<Vec<f64>> {
    if !values.len().is_multiple_of(2) {
        return Err(Error::OddMultiplicity {
            value: values[values.len() - 1],
            tol,
        });
    }
    values
        .chunks(2)
        .map(|pair| {
            if (pair[1] - pair[0]).abs() <= tol {
                Ok(0.5 * (pair[0] + pair[1]))
            } else {
                Err(Error::OddMultiplicity { value: pair[0], tol })
            }
        })
        .collect()
}

/// Real spectrum of a Hermitian quaternionic matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    /// Distinct eigenvalues in increasing order.
    pub eigenvalues: Vec<f64>,
    pub multiplicities: Vec<usize>,
}

impl Spectrum {
    fn group(sorted: &[f64], tol: f64) -> Self {
        let mut eigenvalues: Vec<f64> = Vec::new();
        let mut multiplicities: Vec<usize> = Vec::new();
        let mut sums: Vec<f64> = Vec::new();
        for &v in sorted {
            match eigenvalues.last() {
                Some(&last) if (v - last).abs() <= tol => {
                    let k = eigenvalues.len() - 1;
                    multiplicities[k] += 1;
                    sums[k] += v;
                    eigenvalues[k] = sums[k] / multiplicities[k] as f64;
                }
                _ => {
                    eigenvalues.push(v);
                    multiplicities.push(1);
                    sums.push(v);
                }
            }
        }
        Self {
            eigenvalues,
            multiplicities,
        }
    }

    pub fn dimension(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    /// Eigenvalues repeated by multiplicity.
    pub fn values(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .zip(&self.multiplicities)
            .flat_map(|(&v, &m)| std::iter::repeat_n(v, m))
            .collect()
    }

    pub fn min(&self) -> Option<f64> {
        self.eigenvalues.first().copied()
    }

    pub fn max(&self) -> Option<f64> {
        self.eigenvalues.last().copied()
    }

    pub fn count_below(&self, threshold: f64) -> usize {
        self.eigenvalues
            .iter()
            .zip(&self.multiplicities)
            .filter(|(&v, _)| v < threshold)
            .map(|(_, &m)| m)
            .sum()
    }
}

/// Solves the Stein equation `P - A* P A = Q` by summing
/// `P = sum_n A*^n Q A^n`.
///
/// The series is accumulated by squaring: after `k` steps the partial sum
/// holds the first `2^k` terms and the residual equals the next term.
pub fn solve_stein(a: &QMatrix, q: &QMatrix, tol: f64) -> Result<QMatrix> {
    if !a.is_square() || !q.is_square() || a.rows() != q.rows() {
        return Err(Error::ShapeMismatch(format!(
            "Stein equation needs square A and Q of equal size, got {:?} and {:?}",
            a.shape(),
            q.shape()
        )));
    }
    let rho = a.spectral_radius();
    if rho >= 1.0 {
        return Err(Error::NotConvergent(format!("spectral radius {rho} is not below 1")));
    }
    let stop = tol * (1.0 - rho);
    let mut p = q.clone();
    let mut power = a.clone();
    for _ in 0..STEIN_MAX_DOUBLINGS {
        let next = &(&power.adjoint() * &p) * &power;
        if next.max_abs() < stop {
            let residual = stein_residual(a, &p, q);
            if residual > 10.0 * tol {
                return Err(Error::NotConvergent(format!(
                    "residual {residual:.3e} exceeds {:.3e}",
                    10.0 * tol
                )));
            }
            return Ok(p.hermitian_part());
        }
        p = &p + &next;
        power = &power * &power;
    }
    Err(Error::NotConvergent(format!(
        "{STEIN_MAX_DOUBLINGS} doubling steps did not reach {stop:.3e}"
    )))
}

/// `max |P - A* P A - Q|` over entries.
pub fn stein_residual(a: &QMatrix, p: &QMatrix, q: &QMatrix) -> f64 {
    let apa = &(&a.adjoint() * p) * a;
    (&(p - &apa) - q).max_abs()
}

/// Completes the orthonormal columns of an `(n+1) x n` matrix `T` with a
/// unit vector `h` orthogonal to them, for the right inner product
/// `<u, v> = v* u`.
///
/// Seeds are tried in the order `e_1, e_2, ...`; the first whose projection
/// residual exceeds `1e-6` is used. The result is right-multiplied by the
/// unit quaternion that makes its last non-negligible entry real positive.
pub fn gram_schmidt_complete(t: &QMatrix) -> Result<QMatrix> {
    let (rows, cols) = t.shape();
    if rows != cols + 1 {
        return Err(Error::ShapeMismatch(format!(
            "completion needs an (n+1)xn matrix, got {rows}x{cols}"
        )));
    }
    let tt = &t.adjoint() * t;
    let defect = (&tt - &QMatrix::identity(cols)).max_abs();
    if defect > 1e-8 {
        return Err(Error::NotIsometric { defect });
    }
    let project_out = |v: &QMatrix| -> QMatrix { v - &(t * &(&t.adjoint() * v)) };
    for k in 0..rows {
        let mut e = QMatrix::zeros(rows, 1);
        e[(k, 0)] = Quaternion::ONE;
        let r = project_out(&e);
        if r.frobenius_norm() > 1e-6 {
            let r = project_out(&r);
            let h = r.scale(1.0 / r.frobenius_norm());
            return Ok(normalize_phase(h));
        }
    }
    Err(Error::NotIsometric { defect })
}

fn normalize_phase(h: QMatrix) -> QMatrix {
    let scale = h.max_abs();
    let pivot = (0..h.rows())
        .rev()
        .map(|i| h[(i, 0)])
        .find(|q| q.norm() > 1e-8 * scale);
    match pivot {
        Some(q) => h.right_scale(q.conj() / q.norm()),
        None => h,
    }
}

impl Index<(usize, usize)> for QMatrix {
    type Output = Quaternion;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Quaternion {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for QMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Quaternion {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

// Operator forms panic on shape mismatch; the `try_*` methods report it.
impl Mul for &QMatrix {
    type Output = QMatrix;
    fn mul(self, rhs: &QMatrix) -> QMatrix {
        self.try_mul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &QMatrix {
    type Output = QMatrix;
    fn add(self, rhs: &QMatrix) -> QMatrix {
        self.try_add(rhs).expect("matrix sum shape mismatch")
    }
}

impl Sub for &QMatrix {
    type Output = QMatrix;
    fn sub(self, rhs: &QMatrix) -> QMatrix {
        self.try_sub(rhs).expect("matrix difference shape mismatch")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(w: f64, x: f64, y: f64, z: f64) -> Quaternion {
        Quaternion::new(w, x, y, z)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> QMatrix {
        QMatrix::from_fn(r, c, |_, _| Quaternion::random_box(rng))
    }

    fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Unitary from the Q factor of a random complex-adjoint matrix.
    fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> QMatrix {
        let m = random_matrix(rng, n, n);
        let g = &m.adjoint() * &m;
        let inv_sqrt = g.inv_sqrt_pd().unwrap();
        &m * &inv_sqrt
    }

    #[test]
    fn complex_adjoint_examples() {
        let chi = QMatrix::scalar(Quaternion::J).complex_adjoint();
        assert_eq!(chi[(0, 0)], C64::new(0.0, 0.0));
        assert_eq!(chi[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(chi[(1, 0)], C64::new(-1.0, 0.0));
        assert_eq!(chi[(1, 1)], C64::new(0.0, 0.0));
        let id = QMatrix::identity(3).complex_adjoint();
        assert_eq!(id, DMatrix::identity(6, 6));
    }

    #[test]
    fn complex_adjoint_is_star_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let a = random_matrix(&mut rng, 2, 3);
            let b = random_matrix(&mut rng, 3, 2);
            let c = random_matrix(&mut rng, 2, 3);
            let prod = (&a * &b).complex_adjoint();
            assert!(max_diff(&prod, &(a.complex_adjoint() * b.complex_adjoint())) < 1e-12);
            assert!(max_diff(&(&a + &c).complex_adjoint(), &(a.complex_adjoint() + c.complex_adjoint())) < 1e-12);
            assert!(max_diff(&a.adjoint().complex_adjoint(), &a.complex_adjoint().adjoint()) < 1e-12);
            let back = QMatrix::from_complex_adjoint(&a.complex_adjoint()).unwrap();
            assert_eq!(back, a);
        }
    }

    #[test]
    fn herm_eigen_examples() {
        let d = QMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap();
        let s = d.herm_eigen(1e-12).unwrap();
        assert_eq!(s.eigenvalues.len(), 2);
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-14 && (s.eigenvalues[1] - 1.0).abs() < 1e-14);
        assert_eq!(s.multiplicities, vec![1, 1]);

        let m = QMatrix::from_rows(&[
            vec![Quaternion::ZERO, Quaternion::J],
            vec![-Quaternion::J, Quaternion::ZERO],
        ])
        .unwrap();
        let s = m.herm_eigen(1e-12).unwrap();
        // chi(m) has spectrum {-1, -1, 1, 1}; brute-force the 4x4 directly.
        let mut brute: Vec<f64> = SymmetricEigen::new(m.complex_adjoint()).eigenvalues.iter().copied().collect();
        brute.sort_by(f64::total_cmp);
        assert!((brute[0] + 1.0).abs() < 1e-12 && (brute[3] - 1.0).abs() < 1e-12);
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-12 && (s.eigenvalues[1] - 1.0).abs() < 1e-12);

        let z = QMatrix::zeros(3, 3).herm_eigen(1e-12).unwrap();
        assert_eq!(z.eigenvalues, vec![0.0]);
        assert_eq!(z.multiplicities, vec![3]);
    }

    #[test]
    fn herm_eigen_rejects_non_hermitian() {
        let m = QMatrix::from_rows(&[
            vec![Quaternion::ONE, Quaternion::I],
            vec![Quaternion::I, Quaternion::ONE],
        ])
        .unwrap();
        assert!(matches!(m.herm_eigen(1e-12), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn neg_squares_examples() {
        let d = QMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap();
        assert_eq!(d.neg_squares(1e-12).unwrap(), 1);
        let d3 = QMatrix::diag(&[Quaternion::real(-1.0), Quaternion::real(-1.0), Quaternion::ONE]);
        assert_eq!(d3.neg_squares(1e-12).unwrap(), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = random_matrix(&mut rng, 4, 3);
        let gram = &m.adjoint() * &m;
        assert_eq!(gram.neg_squares(1e-10).unwrap(), 0);
    }

    #[test]
    fn neg_squares_is_unitary_congruence_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let diag: Vec<Quaternion> = (0..4).map(|i| Quaternion::real(if i % 2 == 0 { 1.5 } else { -0.7 + i as f64 })).collect();
            let a = QMatrix::diag(&diag);
            let u = random_unitary(&mut rng, 4);
            let b = &(&u.adjoint() * &a) * &u;
            assert_eq!(b.neg_squares(1e-10).unwrap(), a.neg_squares(1e-10).unwrap());
        }
    }

    #[test]
    fn sqrt_pd_examples() {
        let d = QMatrix::diag(&[Quaternion::real(4.0), Quaternion::real(9.0)]);
        let s = d.sqrt_pd().unwrap();
        assert!((&s - &QMatrix::diag(&[Quaternion::real(2.0), Quaternion::real(3.0)])).max_abs() < 1e-14);
        let id = QMatrix::identity(3).sqrt_pd().unwrap();
        assert!((&id - &QMatrix::identity(3)).max_abs() < 1e-14);
        let s = QMatrix::scalar(Quaternion::real(4.0 / 3.0)).sqrt_pd().unwrap();
        assert!((s[(0, 0)] - Quaternion::real(2.0 / 3f64.sqrt())).norm() < 1e-15);
        let neg = QMatrix::diag(&[Quaternion::ONE, Quaternion::real(-1.0)]);
        assert!(matches!(neg.sqrt_pd(), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn sqrt_pd_squares_back_and_commutes() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 1..6 {
            let m = random_matrix(&mut rng, n + 2, n);
            let a = &(&m.adjoint() * &m) + &QMatrix::identity(n).scale(0.1);
            let s = a.sqrt_pd().unwrap();
            assert!(s.hermitian_defect() < 1e-12);
            let an = a.frobenius_norm();
            assert!((&(&s * &s) - &a).frobenius_norm() <= 1e-10 * an);
            let comm = &(&s * &a) - &(&a * &s);
            assert!(comm.frobenius_norm() <= 1e-10 * an * s.frobenius_norm());
        }
    }

    #[test]
    fn stein_examples() {
        let a = QMatrix::scalar(Quaternion::real(0.5));
        let p = solve_stein(&a, &QMatrix::identity(1), 1e-15).unwrap();
        assert!((p[(0, 0)].re() - 4.0 / 3.0).abs() < 1e-14);

        let q = QMatrix::from_real(2, 2, &[2.0, 1.0, 1.0, 3.0]).unwrap();
        let p = solve_stein(&QMatrix::zeros(2, 2), &q, 1e-14).unwrap();
        assert_eq!(p, q);

        let a = QMatrix::diag(&[Quaternion::I * 0.5, Quaternion::J * 0.5]);
        let ones = QMatrix::from_real(2, 2, &[1.0; 4]).unwrap();
        let p = solve_stein(&a, &ones, 1e-14).unwrap();
        assert!(stein_residual(&a, &p, &ones) <= 1e-10);
        assert!(p.hermitian_defect() < 1e-12);
    }

    #[test]
    fn stein_diverges_outside_disk() {
        let a = QMatrix::scalar(Quaternion::real(1.0));
        assert!(matches!(
            solve_stein(&a, &QMatrix::identity(1), 1e-12),
            Err(Error::NotConvergent(_))
        ));
    }

    #[test]
    fn stein_gram_is_positive_for_distinct_nodes() {
        let nodes = [q(0.25, 0.0, 0.0, 0.0), q(0.0, 0.5, 0.0, 0.0), q(0.0, -0.5, 0.0, 0.0), q(0.1, 0.0, 0.3, 0.2)];
        let a = QMatrix::diag(&nodes);
        let c = QMatrix::row(&[Quaternion::ONE; 4]);
        let p = solve_stein(&a, &(&c.adjoint() * &c), 1e-15).unwrap();
        assert!(p.hermitian_defect() < 1e-12);
        assert!(p.herm_eigen(1e-12).unwrap().min().unwrap() > 0.0);
    }

    #[test]
    fn completion_examples() {
        let t = QMatrix::column(&[Quaternion::ONE, Quaternion::ZERO]);
        let h = gram_schmidt_complete(&t).unwrap();
        assert!((&h - &QMatrix::column(&[Quaternion::ZERO, Quaternion::ONE])).max_abs() < 1e-15);

        let s = 0.5f64.sqrt();
        let t = QMatrix::column(&[Quaternion::real(s), Quaternion::I * s]);
        let h = gram_schmidt_complete(&t).unwrap();
        assert!((&h.adjoint() * &t).max_abs() < 1e-15);
        assert!((h.frobenius_norm() - 1.0).abs() < 1e-15);
        // Orthogonal complement of (1, i)/sqrt2 is (i, 1)/sqrt2 up to a right
        // unit factor; the phase rule makes the last entry positive.
        let expected = QMatrix::column(&[Quaternion::I * s, Quaternion::real(s)]);
        assert!((&h - &expected).max_abs() < 1e-15);
    }

    #[test]
    fn completion_gives_unitary_on_random_isometries() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for n in 1..5 {
            let u = random_unitary(&mut rng, n + 1);
            let t = u.block(0, 0, n + 1, n);
            let h = gram_schmidt_complete(&t).unwrap();
            let full = QMatrix::hstack(&t, &h).unwrap();
            assert!((&(&full.adjoint() * &full) - &QMatrix::identity(n + 1)).max_abs() < 1e-10);
            assert!((&(&full * &full.adjoint()) - &QMatrix::identity(n + 1)).max_abs() < 1e-10);
        }
        let bad = QMatrix::column(&[Quaternion::real(2.0), Quaternion::ZERO]);
        assert!(matches!(gram_schmidt_complete(&bad), Err(Error::NotIsometric { .. })));
    }

    #[test]
    fn rank_and_inverse() {
        let m = QMatrix::from_rows(&[
            vec![Quaternion::ONE, Quaternion::I],
            vec![Quaternion::J, Quaternion::J * Quaternion::I],
        ])
        .unwrap();
        // Second row is j times the first.
        assert_eq!(m.rank(1e-10), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let a = random_matrix(&mut rng, 3, 3);
        let inv = a.inverse().unwrap();
        assert!((&(&a * &inv) - &QMatrix::identity(3)).max_abs() < 1e-10);
        assert_eq!(a.rank(1e-10), 3);
    }

    #[test]
    fn json_layout() {
        let m = QMatrix::from_real(1, 2, &[1.0, 2.0]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"rows":1,"cols":2,"entries":[[1.0,0.0,0.0,0.0],[2.0,0.0,0.0,0.0]]}"#);
        let bad = r#"{"rows":2,"cols":2,"entries":[[1,0,0,0]]}"#;
        assert!(serde_json::from_str::<QMatrix>(bad).is_err());
    }
}
