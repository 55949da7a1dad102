//! Hermitian kernels `K(p, q) = sum p^m K_mn conj(q)^n` held as coefficient grids.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qlinalg::QMatrix;
use crate::quat::Quaternion;
use crate::series::{Coefficient, MatrixSeries};

/// Gram samples whose truncation bound exceeds this are refused.
pub const GRAM_TRUNCATION_LIMIT: f64 = 1e-8;
/// Tolerance for `J = J*` and `J^2 = I`.
pub const SIGNATURE_TOL: f64 = 1e-10;

const POLE_TOL: f64 = 1e-14;

/// Both closed forms of the Hardy kernel `sum p^n conj(q)^n`.
pub fn hardy_kernel_forms(p: Quaternion, q: Quaternion) -> Result<(Quaternion, Quaternion)> {
    let left_den = Quaternion::ONE - p * (2.0 * q.re()) + p * p * q.norm_sqr();
    let qb = q.conj();
    let right_den = Quaternion::ONE - qb * (2.0 * p.re()) + qb * qb * p.norm_sqr();
    if left_den.norm() < POLE_TOL || right_den.norm() < POLE_TOL {
        return Err(Error::PoleSphere);
    }
    let first = left_den.inverse()? * (Quaternion::ONE - p * q);
    let second = (Quaternion::ONE - p.conj() * qb) * right_den.inverse()?;
    Ok((first, second))
}

/// `k(p, q) = (1 - 2Re(q) p + |q|^2 p^2)^-1 (1 - p q)`.
pub fn hardy_kernel(p: Quaternion, q: Quaternion) -> Result<Quaternion> {
    hardy_kernel_forms(p, q).map(|(k, _)| k)
}

/// Checks `J = J*` and `J^2 = I`.
pub fn check_signature(j: &QMatrix) -> Result<()> {
    if !j.is_square() {
        return Err(Error::NotSignature(format!("{}x{} is not square", j.rows(), j.cols())));
    }
    let herm = j.hermitian_defect();
    if herm > SIGNATURE_TOL {
        return Err(Error::NotSignature(format!("J - J* has size {herm:.3e}")));
    }
    let sq = (&(j * j) - &QMatrix::identity(j.rows())).max_abs();
    if sq > SIGNATURE_TOL {
        return Err(Error::NotSignature(format!("J^2 - I has size {sq:.3e}")));
    }
    Ok(())
}

/// Coefficient grid `K_mn`, `0 <= m, n <= degree`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelRepr")]
pub struct KernelSeries {
    degree: usize,
    coeffs: Vec<Vec<QMatrix>>,
}

#[derive(Deserialize)]
struct KernelRepr {
    degree: usize,
    coeffs: Vec<Vec<QMatrix>>,
}

impl TryFrom<KernelRepr> for KernelSeries {
    type Error = Error;
    fn try_from(r: KernelRepr) -> Result<Self> {
        KernelSeries::new(r.coeffs).and_then(|k| {
            if k.degree == r.degree {
                Ok(k)
            } else {
                Err(Error::ShapeMismatch(format!("degree {} with a grid of degree {}", r.degree, k.degree)))
            }
        })
    }
}

impl KernelSeries {
    pub fn new(coeffs: Vec<Vec<QMatrix>>) -> Result<Self> {
        let n = coeffs.len();
        if n == 0 || coeffs.iter().any(|row| row.len() != n) {
            return Err(Error::ShapeMismatch("kernel grid must be square and nonempty".into()));
        }
        let shape = coeffs[0][0].shape();
        if coeffs.iter().flatten().any(|c| c.shape() != shape) {
            return Err(Error::ShapeMismatch("kernel coefficients differ in shape".into()));
        }
        Ok(Self { degree: n - 1, coeffs })
    }

    /// Accumulates `K_mn = G_mn + K_{m-1,n-1}`, the coefficient form of
    /// `K = sum_l p^l G(p, q) conj(q)^l`.
    pub fn from_increments(g: Vec<Vec<QMatrix>>) -> Result<Self> {
        let mut k = Self::new(g)?;
        for m in 1..=k.degree {
            for n in 1..=k.degree {
                let prev = k.coeffs[m - 1][n - 1].clone();
                k.coeffs[m][n] = &k.coeffs[m][n] + &prev;
            }
        }
        Ok(k)
    }

    /// `K_mn = delta_mn`, the scalar Hardy kernel.
    pub fn hardy(degree: usize) -> Self {
        let coeffs = (0..=degree)
            .map(|m| {
                (0..=degree)
                    .map(|n| QMatrix::scalar(if m == n { Quaternion::ONE } else { Quaternion::ZERO }))
                    .collect()
            })
            .collect();
        Self { degree, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.coeffs[0][0].rows()
    }

    pub fn coeff(&self, m: usize, n: usize) -> &QMatrix {
        &self.coeffs[m][n]
    }

    pub fn coeffs(&self) -> &[Vec<QMatrix>] {
        &self.coeffs
    }

    pub fn negated(&self) -> Self {
        Self {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|r| r.iter().map(|c| c.scale(-1.0)).collect()).collect(),
        }
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().flatten().map(QMatrix::max_abs).fold(0.0, f64::max)
    }

    /// `max |K_mn - K_nm*|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for m in 0..=self.degree {
            for n in m..=self.degree {
                d = d.max((&self.coeffs[m][n] - &self.coeffs[n][m].adjoint()).max_abs());
            }
        }
        d
    }

    /// Largest coefficient difference over the common degree range.
    pub fn max_mismatch(&self, other: &KernelSeries) -> f64 {
        let n = self.degree.min(other.degree);
        let mut d: f64 = 0.0;
        for i in 0..=n {
            for j in 0..=n {
                d = d.max((&self.coeffs[i][j] - &other.coeffs[i][j]).max_abs());
            }
        }
        d
    }

    /// `max |K_mn - K_{m-1,n-1} - G_mn|` over `m, n >= 1`.
    pub fn shift_residual(&self, g: &[Vec<QMatrix>]) -> f64 {
        let mut d: f64 = 0.0;
        for m in 1..=self.degree {
            for n in 1..=self.degree {
                let inc = &self.coeffs[m][n] - &self.coeffs[m - 1][n - 1];
                d = d.max((&inc - &g[m][n]).max_abs());
            }
        }
        d
    }

    /// `v_m = sum_n K_mn conj(q)^n`, so that `K(p, q) = sum_m p^m v_m`.
    fn column_at(&self, q: Quaternion) -> Vec<QMatrix> {
        let qb = q.conj();
        self.coeffs
            .iter()
            .map(|row| {
                let mut acc = row[self.degree].clone();
                for c in row.iter().rev().skip(1) {
                    acc = c + &acc.right_scale(qb);
                }
                acc
            })
            .collect()
    }

    fn combine(column: &[QMatrix], p: Quaternion) -> QMatrix {
        let mut acc = column[column.len() - 1].clone();
        for c in column.iter().rev().skip(1) {
            acc = c + &acc.left_scale(p);
        }
        acc
    }

    pub fn eval(&self, p: Quaternion, q: Quaternion) -> QMatrix {
        Self::combine(&self.column_at(q), p)
    }

    /// Bound on the entries dropped by the truncation when `|p|, |q| <= r`:
    /// `M (1/(1-r)^2 - ((1 - r^(N+1))/(1-r))^2)`.
    pub fn truncation_bound(&self, r: f64) -> f64 {
        if r >= 1.0 {
            return f64::INFINITY;
        }
        let full = 1.0 / ((1.0 - r) * (1.0 - r));
        let part = (1.0 - r.powi(self.degree as i32 + 1)) / (1.0 - r);
        self.max_coeff() * (full - part * part).max(0.0)
    }
}

/// Kernel of a matrix function `Theta` with respect to signatures `J1`, `J2`:
/// `sum_l p^l (J2 - Theta(p) J1 Theta(q)*) conj(q)^l`.
pub fn schur_kernel(theta: &MatrixSeries, j1: &QMatrix, j2: &QMatrix) -> Result<KernelSeries> {
    check_signature(j1)?;
    check_signature(j2)?;
    let (rows, cols) = theta.shape();
    if j1.rows() != cols || j2.rows() != rows {
        return Err(Error::ShapeMismatch(format!(
            "Theta is {rows}x{cols} but J1 is {0}x{0} and J2 is {1}x{1}",
            j1.rows(),
            j2.rows()
        )));
    }
    let left: Vec<QMatrix> = theta.coeffs().iter().map(|t| t * j1).collect();
    let adj: Vec<QMatrix> = theta.coeffs().iter().map(QMatrix::adjoint).collect();
    let g = (0..=theta.degree())
        .map(|a| {
            (0..=theta.degree())
                .map(|b| {
                    let mut v = (&left[a] * &adj[b]).scale(-1.0);
                    if a == 0 && b == 0 {
                        v = &v + j2;
                    }
                    v
                })
                .collect()
        })
        .collect();
    KernelSeries::from_increments(g)
}

/// Kernel `sum_l p^l (phi(p) J + J phi(q)*) conj(q)^l`.
pub fn cara_kernel(phi: &MatrixSeries, j: &QMatrix) -> Result<KernelSeries> {
    check_signature(j)?;
    let (rows, cols) = phi.shape();
    if rows != cols || j.rows() != rows {
        return Err(Error::ShapeMismatch(format!("phi is {rows}x{cols}, J is {}x{}", j.rows(), j.cols())));
    }
    let n = phi.degree();
    let zero = QMatrix::zeros(rows, rows);
    let g = (0..=n)
        .map(|a| {
            (0..=n)
                .map(|b| {
                    let mut v = zero.clone();
                    if b == 0 {
                        v = &v + &(&phi.coeffs()[a] * j);
                    }
                    if a == 0 {
                        v = &v + &(j * &phi.coeffs()[b].adjoint());
                    }
                    v
                })
                .collect()
        })
        .collect();
    KernelSeries::from_increments(g)
}

/// Increment grid `G_ab = delta_a0 delta_b0 J2 - Theta_a J1 Theta_b*`, used to
/// check the diagonal shift identity.
pub fn schur_increments(theta: &MatrixSeries, j1: &QMatrix, j2: &QMatrix) -> Vec<Vec<QMatrix>> {
    let n = theta.degree();
    (0..=n)
        .map(|a| {
            (0..=n)
                .map(|b| {
                    let v = (&(&theta.coeffs()[a] * j1) * &theta.coeffs()[b].adjoint()).scale(-1.0);
                    if a == 0 && b == 0 { &v + j2 } else { v }
                })
                .collect()
        })
        .collect()
}

/// Sampled Gram matrix with entries `c_l* K(z_l, z_j) c_j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramSample {
    pub points: Vec<Quaternion>,
    pub vectors: Vec<QMatrix>,
    pub gram: QMatrix,
    pub truncation_bound: f64,
}

pub fn gram_sample(k: &KernelSeries, points: &[Quaternion], vectors: &[QMatrix]) -> Result<GramSample> {
    if points.len() != vectors.len() {
        return Err(Error::ShapeMismatch(format!("{} points but {} vectors", points.len(), vectors.len())));
    }
    if let Some(v) = vectors.iter().find(|v| v.shape() != (k.dim(), 1)) {
        return Err(Error::ShapeMismatch(format!(
            "vector of shape {:?} for a kernel of size {}",
            v.shape(),
            k.dim()
        )));
    }
    let radius = points.iter().map(|p| p.norm()).fold(0.0, f64::max);
    let vmax = vectors.iter().map(QMatrix::max_abs).fold(0.0, f64::max);
    let scale = (k.dim() as f64 * vmax).powi(2);
    let bound = k.truncation_bound(radius) * scale;
    if bound > GRAM_TRUNCATION_LIMIT {
        return Err(Error::RadiusTooLarge {
            radius,
            bound,
            limit: GRAM_TRUNCATION_LIMIT,
        });
    }
    let n = points.len();
    // K(., z_j) c_j as a coefficient column, reused across rows.
    let columns: Vec<Vec<QMatrix>> = points
        .iter()
        .zip(vectors)
        .map(|(&z, c)| k.column_at(z).iter().map(|v| v * c).collect())
        .collect();
    let mut gram = QMatrix::zeros(n, n);
    for l in 0..n {
        let cl = vectors[l].adjoint();
        for j in 0..n {
            gram[(l, j)] = (&cl * &KernelSeries::combine(&columns[j], points[l]))[(0, 0)];
        }
    }
    Ok(GramSample {
        points: points.to_vec(),
        vectors: vectors.to_vec(),
        gram: gram.hermitian_part(),
        truncation_bound: bound,
    })
}

/// Negative eigenvalue threshold for a sampled Gram matrix.
pub fn neg_squares_tol(sample: &GramSample) -> f64 {
    (1e-8 * sample.gram.frobenius_norm().max(1.0)).max(10.0 * sample.truncation_bound)
}

/// Outcome of sampling a kernel for negative squares.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NegSquares {
    /// Largest count observed, a lower bound for the index.
    pub kappa: usize,
    /// Count observed in each trial.
    pub per_trial: Vec<usize>,
    /// Number of trials reaching `kappa`.
    pub stable_trials: usize,
    /// A sample achieving `kappa`.
    pub witness: GramSample,
}

/// Sampling configuration for [`kernel_neg_squares`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingConfig {
    pub trials: usize,
    pub points: usize,
    pub radius: f64,
    pub seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            trials: 50,
            points: 50,
            radius: 0.7,
            seed: 0,
        }
    }
}

/// Random points in the ball of radius `cfg.radius` with Gaussian unit vectors.
pub fn random_sample(rng: &mut ChaCha8Rng, dim: usize, cfg: &SamplingConfig) -> (Vec<Quaternion>, Vec<QMatrix>) {
    let points = (0..cfg.points).map(|_| Quaternion::random_in_ball(rng, cfg.radius)).collect();
    let vectors = (0..cfg.points)
        .map(|_| {
            let v = QMatrix::from_fn(dim, 1, |_, _| Quaternion::random_unit(rng));
            let n = v.frobenius_norm();
            v.scale(1.0 / n)
        })
        .collect();
    (points, vectors)
}

/// Largest number of negative eigenvalues over `cfg.trials` random Gram samples.
pub fn kernel_neg_squares(k: &KernelSeries, cfg: &SamplingConfig) -> Result<NegSquares> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut per_trial = Vec::with_capacity(cfg.trials);
    let mut best: Option<(usize, GramSample)> = None;
    for _ in 0..cfg.trials.max(1) {
        let (points, vectors) = random_sample(&mut rng, k.dim(), cfg);
        let sample = gram_sample(k, &points, &vectors)?;
        let count = sample.gram.neg_squares(neg_squares_tol(&sample))?;
        per_trial.push(count);
        if best.as_ref().is_none_or(|(b, _)| count > *b) {
            best = Some((count, sample));
        }
    }
    let (kappa, witness) = best.expect("at least one trial");
    let stable_trials = per_trial.iter().filter(|&&c| c == kappa).count();
    Ok(NegSquares {
        kappa,
        per_trial,
        stable_trials,
        witness,
    })
}

/// Coefficients of `M_phi* (K1(., q) d) = K1(., q) *_r phi(q)* d` as a
/// series in the first variable: `c_m = sum_n (sum_r K_mr phi_{n-r}*) conj(q)^n d`.
pub fn mult_adjoint_apply(phi: &MatrixSeries, k1: &KernelSeries, q: Quaternion, d: &QMatrix) -> Result<MatrixSeries> {
    let n = phi.degree().min(k1.degree());
    let (rows, cols) = phi.shape();
    if k1.dim() != cols || d.shape() != (rows, 1) {
        return Err(Error::ShapeMismatch(format!(
            "phi is {rows}x{cols}, kernel is {0}x{0}, d is {1:?}",
            k1.dim(),
            d.shape()
        )));
    }
    let adj: Vec<QMatrix> = phi.coeffs()[..=n].iter().map(QMatrix::adjoint).collect();
    let qb = q.conj();
    let mut out = Vec::with_capacity(n + 1);
    for m in 0..=n {
        let mut acc = QMatrix::zeros(cols, rows);
        let mut power = Quaternion::ONE;
        for nn in 0..=n {
            let mut coef = QMatrix::zeros(cols, rows);
            for r in 0..=nn {
                coef = &coef + &(k1.coeff(m, r) * &adj[nn - r]);
            }
            acc = &acc + &coef.right_scale(power);
            power *= qb;
        }
        out.push(&acc * d);
    }
    MatrixSeries::new(out)
}

/// Truncated Hardy inner product `[f, g] = sum_m g_m* f_m` of column series.
pub fn h2_inner(f: &MatrixSeries, g: &MatrixSeries) -> Result<Quaternion> {
    let n = f.degree().min(g.degree());
    let mut acc = Quaternion::ZERO;
    for m in 0..=n {
        let v = g.coeffs()[m].adjoint().try_product(&f.coeffs()[m])?;
        if v.shape() != (1, 1) {
            return Err(Error::ShapeMismatch("inner product needs column series".into()));
        }
        acc += v[(0, 0)];
    }
    Ok(acc)
}
