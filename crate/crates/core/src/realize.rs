//! Realizations `s(p) = D + p C * (I - pA)^-* B` and
//! `phi(p) = C (I + pV) * (I - pV)^-* C* J / 2 + (phi(0) - J phi(0)* J) / 2`,
//! with coefficient-level checks of their kernel identities.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::InterpSolution;
use crate::kernels::check_signature;
use crate::qlinalg::QMatrix;
use crate::quat::Quaternion;
use crate::series::MatrixSeries;

/// Absolute tolerance for the metric relation, scaled by `max(1, |H|)`.
pub const RELATION_TOL: f64 = 1e-10;
pub const COISOMETRY_TOL: f64 = 1e-10;

/// Which placement of the signatures satisfied the metric relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `M diag(H, J1) M* = diag(H, J2)`.
    Standard,
    /// `M diag(H, J2) M* = diag(H, J1)`.
    Swapped,
}

/// Colligation `M = [[A, B], [C, D]]` with metrics `H`, `J1`, `J2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitaryColligation {
    #[serde(rename = "A")]
    pub a: QMatrix,
    #[serde(rename = "B")]
    pub b: QMatrix,
    #[serde(rename = "C")]
    pub c: QMatrix,
    #[serde(rename = "D")]
    pub d: QMatrix,
    #[serde(rename = "H")]
    pub h: QMatrix,
    #[serde(rename = "J1")]
    pub j1: QMatrix,
    #[serde(rename = "J2")]
    pub j2: QMatrix,
}

/// Residuals of both orientations of the metric relation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelationCheck {
    pub standard: f64,
    /// `None` when `J1` and `J2` have different sizes.
    pub swapped: Option<f64>,
    pub tol: f64,
    pub satisfied: Option<Orientation>,
}

/// Result of comparing both sides of the structured identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub orientation: Orientation,
    pub residual: f64,
}

impl UnitaryColligation {
    pub fn new(a: QMatrix, b: QMatrix, c: QMatrix, d: QMatrix, h: QMatrix, j1: QMatrix, j2: QMatrix) -> Result<Self> {
        let col = Self { a, b, c, d, h, j1, j2 };
        col.validate()?;
        Ok(col)
    }

    /// Colligation with `H = I` and identity signatures.
    pub fn hilbert(a: QMatrix, b: QMatrix, c: QMatrix, d: QMatrix) -> Result<Self> {
        let (n, m, k) = (a.rows(), b.cols(), c.rows());
        Self::new(a, b, c, d, QMatrix::identity(n), QMatrix::identity(m), QMatrix::identity(k))
    }

    /// `(A, b, c, d)` of an interpolation solution with `H = P^-1`.
    pub fn from_interp(sol: &InterpSolution) -> Result<Self> {
        let n = sol.a.rows();
        let h = if n == 0 { QMatrix::zeros(0, 0) } else { sol.p.inverse_pd()? };
        Self::new(
            sol.a.clone(),
            sol.b.clone(),
            sol.c_row.clone(),
            QMatrix::scalar(sol.d),
            h,
            QMatrix::identity(1),
            QMatrix::identity(1),
        )
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.a.rows();
        let (m, k) = (self.b.cols(), self.c.rows());
        let expect = [
            ("A", &self.a, (n, n)),
            ("B", &self.b, (n, m)),
            ("C", &self.c, (k, n)),
            ("D", &self.d, (k, m)),
            ("H", &self.h, (n, n)),
            ("J1", &self.j1, (m, m)),
            ("J2", &self.j2, (k, k)),
        ];
        for (name, mat, shape) in expect {
            if mat.shape() != shape {
                return Err(Error::ShapeMismatch(format!("{name} is {:?}, expected {:?}", mat.shape(), shape)));
            }
        }
        check_signature(&self.j1)?;
        check_signature(&self.j2)?;
        if self.h.hermitian_defect() > RELATION_TOL * self.h.max_abs().max(1.0) {
            return Err(Error::NotHermitian {
                asymmetry: self.h.hermitian_defect(),
            });
        }
        Ok(())
    }

    fn block(&self) -> QMatrix {
        QMatrix::blocks(&self.a, &self.b, &self.c, &self.d).expect("validated shapes")
    }

    pub fn relation(&self) -> RelationCheck {
        let m = self.block();
        let residual = |inner: &QMatrix, outer: &QMatrix| {
            let lhs = &(&m * &QMatrix::block_diag(&self.h, inner)) * &m.adjoint();
            (&lhs - &QMatrix::block_diag(&self.h, outer)).max_abs()
        };
        let standard = residual(&self.j1, &self.j2);
        let swapped = (self.j1.rows() == self.j2.rows()).then(|| residual(&self.j2, &self.j1));
        let tol = RELATION_TOL * self.h.max_abs().max(1.0);
        let satisfied = if standard <= tol {
            Some(Orientation::Standard)
        } else if swapped.is_some_and(|s| s <= tol) {
            Some(Orientation::Swapped)
        } else {
            None
        };
        RelationCheck {
            standard,
            swapped,
            tol,
            satisfied,
        }
    }

    /// Coefficients `s_0 = D`, `s_k = C A^(k-1) B`.
    pub fn eval_schur(&self, degree: usize) -> Result<MatrixSeries> {
        eval_schur(self, degree)
    }

    /// `C A^m` for `m = 0..=degree`.
    fn observation_rows(&self, degree: usize) -> Vec<QMatrix> {
        let mut rows = Vec::with_capacity(degree + 1);
        let mut v = self.c.clone();
        for _ in 0..=degree {
            rows.push(v.clone());
            v = &v * &self.a;
        }
        rows
    }
}

pub fn eval_schur(col: &UnitaryColligation, degree: usize) -> Result<MatrixSeries> {
    let mut coeffs = Vec::with_capacity(degree + 1);
    coeffs.push(col.d.clone());
    let mut v = col.b.clone();
    for _ in 0..degree {
        coeffs.push(if v.rows() == 0 {
            QMatrix::zeros(col.c.rows(), col.b.cols())
        } else {
            col.c.try_mul(&v)?
        });
        v = &col.a * &v;
    }
    MatrixSeries::new(coeffs)
}

/// Compares `J_out - s(p) J_in s(q)*` with
/// `C (I-pA)^-* (H - p H conj(q)) (I - qA)^-* C*` coefficient by coefficient:
/// `K_mn = C A^m H A*^n C* - [m, n >= 1] C A^(m-1) H A*^(n-1) C*`.
pub fn check_ag_identity(col: &UnitaryColligation, degree: usize) -> Result<IdentityCheck> {
    let rel = col.relation();
    let orientation = rel.satisfied.ok_or(Error::RelationNotSatisfied {
        residual: rel.swapped.map_or(rel.standard, |s| s.min(rel.standard)),
    })?;
    let (j_in, j_out) = match orientation {
        Orientation::Standard => (&col.j1, &col.j2),
        Orientation::Swapped => (&col.j2, &col.j1),
    };
    let s = eval_schur(col, degree)?;
    let left: Vec<QMatrix> = s.coeffs().iter().map(|c| c * j_in).collect();
    let adj: Vec<QMatrix> = s.coeffs().iter().map(QMatrix::adjoint).collect();
    let rows = col.observation_rows(degree);
    let rows_h: Vec<QMatrix> = rows.iter().map(|r| r * &col.h).collect();
    let rows_adj: Vec<QMatrix> = rows.iter().map(QMatrix::adjoint).collect();

    let mut residual: f64 = 0.0;
    for m in 0..=degree {
        for n in 0..=degree {
            let mut lhs = (&left[m] * &adj[n]).scale(-1.0);
            if m == 0 && n == 0 {
                lhs = &lhs + j_out;
            }
            let mut rhs = &rows_h[m] * &rows_adj[n];
            if m >= 1 && n >= 1 {
                rhs = &rhs - &(&rows_h[m - 1] * &rows_adj[n - 1]);
            }
            residual = residual.max((&lhs - &rhs).max_abs());
        }
    }
    Ok(IdentityCheck { orientation, residual })
}

/// Rank of `[C; CA; ...; CA^(n-1)]`; the pair is observable when it equals `n`.
pub fn observability_index(c: &QMatrix, a: &QMatrix) -> Result<usize> {
    if !a.is_square() || c.cols() != a.rows() {
        return Err(Error::ShapeMismatch(format!("C is {:?}, A is {:?}", c.shape(), a.shape())));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(0);
    }
    let mut stacked = c.clone();
    let mut v = c.clone();
    for _ in 1..n {
        v = &v * a;
        stacked = QMatrix::vstack(&stacked, &v)?;
    }
    Ok(stacked.rank(1e-10))
}

/// Data of a Caratheodory realization: a co-isometry `V`, output map `C`,
/// signature `J`, and the value `phi(0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaraColligation {
    #[serde(rename = "V")]
    pub v: QMatrix,
    #[serde(rename = "C")]
    pub c: QMatrix,
    #[serde(rename = "J")]
    pub j: QMatrix,
    pub phi0: QMatrix,
}

/// Residuals of the two readings of the Caratheodory kernel identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaraKernelCheck {
    /// `phi(p) J + J phi(q)*` against the realization kernel.
    pub variant_i: f64,
    /// `phi(p) J + J phi(q)* J` against the realization kernel.
    pub variant_ii: f64,
    /// `|phi_0 J + J phi_0* - C C*|`.
    pub phi0_consistency: f64,
}

impl CaraColligation {
    pub fn new(v: QMatrix, c: QMatrix, j: QMatrix, phi0: QMatrix) -> Result<Self> {
        let col = Self { v, c, j, phi0 };
        col.validate()?;
        Ok(col)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.v.rows();
        let k = self.c.rows();
        if !self.v.is_square() || self.c.cols() != n || self.j.shape() != (k, k) || self.phi0.shape() != (k, k) {
            return Err(Error::ShapeMismatch(format!(
                "V {:?}, C {:?}, J {:?}, phi0 {:?}",
                self.v.shape(),
                self.c.shape(),
                self.j.shape(),
                self.phi0.shape()
            )));
        }
        check_signature(&self.j)?;
        let defect = self.coisometry_defect();
        if defect > COISOMETRY_TOL {
            return Err(Error::NotCoisometry { defect });
        }
        Ok(())
    }

    /// `max |V V* - I|`.
    pub fn coisometry_defect(&self) -> f64 {
        (&(&self.v * &self.v.adjoint()) - &QMatrix::identity(self.v.rows())).max_abs()
    }
}

/// `phi_0 = C C* J / 2 + (phi0 - J phi0* J) / 2` and `phi_k = C V^k C* J`.
pub fn eval_cara(col: &CaraColligation, degree: usize) -> Result<MatrixSeries> {
    col.validate()?;
    let j = &col.j;
    let cc = &col.c * &col.c.adjoint();
    let skew = &col.phi0 - &(&(j * &col.phi0.adjoint()) * j);
    let mut coeffs = Vec::with_capacity(degree + 1);
    coeffs.push(&(&cc * j).scale(0.5) + &skew.scale(0.5));
    let cstar_j = &col.c.adjoint() * j;
    let mut v = col.c.clone();
    for _ in 0..degree {
        v = &v * &col.v;
        coeffs.push(&v * &cstar_j);
    }
    MatrixSeries::new(coeffs)
}

/// Compares both readings of the kernel identity with
/// `K_mn = C V^m V*^n C* - [m, n >= 1] C V^(m-1) V*^(n-1) C*`.
pub fn check_cara_kernel(col: &CaraColligation, degree: usize) -> Result<CaraKernelCheck> {
    let phi = eval_cara(col, degree)?;
    let j = &col.j;
    let f = phi.coeffs();
    let fj: Vec<QMatrix> = f.iter().map(|c| c * j).collect();
    let jf_adj: Vec<QMatrix> = f.iter().map(|c| j * &c.adjoint()).collect();
    let jf_adj_j: Vec<QMatrix> = jf_adj.iter().map(|c| c * j).collect();

    let mut rows = Vec::with_capacity(degree + 1);
    let mut v = col.c.clone();
    for _ in 0..=degree {
        rows.push(v.clone());
        v = &v * &col.v;
    }
    let rows_adj: Vec<QMatrix> = rows.iter().map(QMatrix::adjoint).collect();
    let k = col.c.rows();
    let zero = QMatrix::zeros(k, k);

    let (mut r1, mut r2): (f64, f64) = (0.0, 0.0);
    for m in 0..=degree {
        for n in 0..=degree {
            let mut rhs = &rows[m] * &rows_adj[n];
            if m >= 1 && n >= 1 {
                rhs = &rhs - &(&rows[m - 1] * &rows_adj[n - 1]);
            }
            let (mut l1, mut l2) = (zero.clone(), zero.clone());
            if n == 0 {
                l1 = &l1 + &fj[m];
                l2 = &l2 + &fj[m];
            }
            if m == 0 {
                l1 = &l1 + &jf_adj[n];
                l2 = &l2 + &jf_adj_j[n];
            }
            r1 = r1.max((&l1 - &rhs).max_abs());
            r2 = r2.max((&l2 - &rhs).max_abs());
        }
    }
    let cons = (&(&fj[0] + &jf_adj[0]) - &(&col.c * &col.c.adjoint())).max_abs();
    Ok(CaraKernelCheck {
        variant_i: r1,
        variant_ii: r2,
        phi0_consistency: cons,
    })
}

/// Random `rows x cols` matrix with orthonormal columns (`rows >= cols`),
/// real when `real` is set.
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, real: bool) -> Result<QMatrix> {
    if rows < cols {
        return Err(Error::ShapeMismatch(format!("{rows}x{cols} cannot have orthonormal columns")));
    }
    let m = QMatrix::from_fn(rows, cols, |_, _| {
        if real {
            Quaternion::real(rng.random_range(-1.0..1.0))
        } else {
            Quaternion::random_box(rng)
        }
    });
    let g = &m.adjoint() * &m;
    Ok(&m * &g.inv_sqrt_pd()?)
}

/// A random unitary colligation with `H = I` and identity signatures.
pub fn random_unitary_colligation<R: Rng + ?Sized>(rng: &mut R, n: usize, io: usize, real: bool) -> Result<UnitaryColligation> {
    let u = random_isometry(rng, n + io, n + io, real)?;
    UnitaryColligation::hilbert(
        u.block(0, 0, n, n),
        u.block(0, n, n, io),
        u.block(n, 0, io, n),
        u.block(n, n, io, io),
    )
}

/// A random co-isometry `V` (`n x n` unitary) with a random `C`.
pub fn random_cara_colligation<R: Rng + ?Sized>(rng: &mut R, n: usize, j: QMatrix, scale: f64) -> Result<CaraColligation> {
    let v = random_isometry(rng, n, n, false)?;
    let k = j.rows();
    let c = QMatrix::from_fn(k, n, |_, _| Quaternion::random_box(rng) * scale);
    let phi0 = QMatrix::from_fn(k, k, |_, _| Quaternion::random_box(rng) * scale);
    CaraColligation::new(v, c, j, phi0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::{solve, InterpProblem};
    use crate::kernels::{cara_kernel, kernel_neg_squares, SamplingConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn s(x: f64) -> QMatrix {
        QMatrix::scalar(Quaternion::real(x))
    }

    #[test]
    fn shift_colligation() {
        let col = UnitaryColligation::hilbert(s(0.0), s(1.0), s(1.0), s(0.0)).unwrap();
        let series = eval_schur(&col, 4).unwrap();
        let expected = [0.0, 1.0, 0.0, 0.0, 0.0];
        for (c, e) in series.coeffs().iter().zip(expected) {
            assert_eq!(c[(0, 0)], Quaternion::real(e));
        }
        let check = check_ag_identity(&col, 10).unwrap();
        assert_eq!(check.orientation, Orientation::Standard);
        assert!(check.residual < 1e-15);
    }

    #[test]
    fn constant_when_b_or_c_vanish() {
        let col = UnitaryColligation::new(s(0.3), s(0.0), s(1.0), s(0.7), s(1.0), s(1.0), s(1.0)).unwrap();
        let series = eval_schur(&col, 5).unwrap();
        assert!(series.coeffs()[1..].iter().all(|c| c.max_abs() == 0.0));
        assert_eq!(series.coeffs()[0], s(0.7));
    }

    #[test]
    fn real_orthogonal_colligations() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let t: f64 = 0.7;
        let col = UnitaryColligation::hilbert(s(t.cos()), s(-t.sin()), s(t.sin()), s(t.cos())).unwrap();
        assert!(check_ag_identity(&col, 40).unwrap().residual <= 1e-10);
        for n in 1..4 {
            let col = random_unitary_colligation(&mut rng, n, 2, true).unwrap();
            assert!(check_ag_identity(&col, 40).unwrap().residual <= 1e-10);
            let col = random_unitary_colligation(&mut rng, n, 1, false).unwrap();
            assert!(check_ag_identity(&col, 40).unwrap().residual <= 1e-10);
        }
    }

    #[test]
    fn swapped_orientation_is_recognised() {
        // D J2 D* = J1 holds but D J1 D* = J2 does not.
        let r = 0.5f64.sqrt();
        let d = QMatrix::from_real(2, 2, &[r, -r, r, r]).unwrap();
        let j1 = QMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let j2 = QMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap();
        let col = UnitaryColligation::new(s(1.0), QMatrix::zeros(1, 2), QMatrix::zeros(2, 1), d, s(1.0), j1, j2).unwrap();
        let rel = col.relation();
        assert!(rel.standard > 1.0);
        assert_eq!(rel.satisfied, Some(Orientation::Swapped));
        let check = check_ag_identity(&col, 4).unwrap();
        assert_eq!(check.orientation, Orientation::Swapped);
        assert!(check.residual < 1e-12);
    }

    #[test]
    fn broken_relation_is_refused() {
        let col = UnitaryColligation::hilbert(s(0.5), s(1.0), s(1.0), s(0.0)).unwrap();
        assert!(matches!(check_ag_identity(&col, 4), Err(Error::RelationNotSatisfied { .. })));
    }

    #[test]
    fn interp_colligation() {
        let sol = solve(&InterpProblem::canonical_mixed(), 64).unwrap();
        let col = UnitaryColligation::from_interp(&sol).unwrap();
        assert!(check_ag_identity(&col, 40).unwrap().residual <= 1e-8);
        let s = eval_schur(&col, 64).unwrap().to_scalar_series().unwrap();
        assert_eq!(s, sol.multiplier);
    }

    #[test]
    fn observability_examples() {
        let c = QMatrix::row(&[Quaternion::ONE, Quaternion::ZERO]);
        let a = QMatrix::diag(&[Quaternion::real(0.5), Quaternion::real(1.0 / 3.0)]);
        assert_eq!(observability_index(&c, &a).unwrap(), 1);
        let c = QMatrix::row(&[Quaternion::ONE, Quaternion::ONE]);
        assert_eq!(observability_index(&c, &a).unwrap(), 2);
        let a2 = QMatrix::diag(&[Quaternion::real(0.5), Quaternion::real(0.5)]);
        assert_eq!(observability_index(&c, &a2).unwrap(), 1);
        let inv = QMatrix::from_rows(&[vec![Quaternion::ONE, Quaternion::I], vec![Quaternion::J, Quaternion::ONE]]).unwrap();
        assert_eq!(observability_index(&inv, &a2).unwrap(), 2);
    }

    #[test]
    fn scalar_herglotz_example() {
        let col = CaraColligation::new(s(1.0), s(1.0), s(1.0), s(0.5)).unwrap();
        let phi = eval_cara(&col, 64).unwrap();
        assert_eq!(phi.coeffs()[0], s(0.5));
        assert!(phi.coeffs()[1..].iter().all(|c| *c == s(1.0)));
        let check = check_cara_kernel(&col, 20).unwrap();
        assert!(check.variant_i <= 1e-10 && check.variant_ii <= 1e-10);
        let k = cara_kernel(&phi, &s(1.0)).unwrap();
        let ns = kernel_neg_squares(&k, &SamplingConfig { trials: 3, points: 50, ..Default::default() }).unwrap();
        assert_eq!(ns.kappa, 0);
    }

    #[test]
    fn zero_output_gives_constant() {
        let col = CaraColligation::new(s(1.0), s(0.0), s(1.0), QMatrix::scalar(Quaternion::new(0.2, 0.3, 0.0, 0.0))).unwrap();
        let phi = eval_cara(&col, 6).unwrap();
        assert_eq!(phi.coeffs()[0], QMatrix::scalar(Quaternion::new(0.0, 0.3, 0.0, 0.0)));
        assert!(phi.coeffs()[1..].iter().all(|c| c.max_abs() == 0.0));
        let check = check_cara_kernel(&col, 6).unwrap();
        assert!(check.variant_i == 0.0 && check.variant_ii == 0.0);
    }

    #[test]
    fn indefinite_signature_selects_first_reading() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let j = QMatrix::diag(&[Quaternion::ONE, -Quaternion::ONE]);
        let col = random_cara_colligation(&mut rng, 2, j, 0.5).unwrap();
        let check = check_cara_kernel(&col, 20).unwrap();
        assert!(check.variant_i <= 1e-10);
        assert!(check.variant_ii > 1e-3);
        assert!(check.phi0_consistency <= 1e-12);
    }

    #[test]
    fn hilbert_cara_kernel_is_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let col = random_cara_colligation(&mut rng, 3, QMatrix::identity(1), 0.5).unwrap();
        let phi = eval_cara(&col, 64).unwrap();
        let k = cara_kernel(&phi, &col.j).unwrap();
        let ns = kernel_neg_squares(&k, &SamplingConfig { trials: 3, points: 50, ..Default::default() }).unwrap();
        assert_eq!(ns.kappa, 0);
    }

    #[test]
    fn non_coisometry_is_rejected() {
        assert!(matches!(CaraColligation::new(s(2.0), s(1.0), s(1.0), s(0.5)), Err(Error::NotCoisometry { .. })));
        let bad = CaraColligation { v: s(0.5), c: s(1.0), j: s(1.0), phi0: s(0.5) };
        assert!(matches!(eval_cara(&bad, 4), Err(Error::NotCoisometry { .. })));
    }

    #[test]
    fn colligation_json() {
        let col = UnitaryColligation::hilbert(s(0.0), s(1.0), s(1.0), s(0.0)).unwrap();
        let text = serde_json::to_string(&col).unwrap();
        assert!(text.contains("\"J1\""));
        let back: UnitaryColligation = serde_json::from_str(&text).unwrap();
        assert_eq!(back, col);
    }
}
