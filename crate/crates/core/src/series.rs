//! Truncated slice regular power series.
//!
//! A left series `f(p) = sum p^n a_n` and a right series `g(q) = sum b_n conj(q)^n`
//! store coefficients `a_0..a_N`. Coefficients are quaternions or
//! quaternionic matrices. The star product of power series centred at
//! the origin is the Cauchy convolution of coefficients with the order
//! of the factors kept.

use std::fmt::Debug;

use nalgebra::Complex;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::qlinalg::QMatrix;
use crate::quat::{ImagUnit, Quaternion, ALGEBRA_TOL};

pub type C64 = Complex<f64>;

/// Default truncation degree.
pub const DEFAULT_DEGREE: usize = 64;

/// Ring operations needed by the series engine.
pub trait Coefficient: Clone + Debug + PartialEq + Serialize + DeserializeOwned {
    fn zero_like(&self) -> Self;
    /// Identity with the column count of `self`.
    fn one_like(&self) -> Self;
    fn try_product(&self, rhs: &Self) -> Result<Self>;
    fn try_plus(&self, rhs: &Self) -> Result<Self>;
    fn negated(&self) -> Self;
    /// Largest entry modulus.
    fn magnitude(&self) -> f64;
    /// Quaternion conjugate, transposed for matrices.
    fn adjoint(&self) -> Self;
    /// Entrywise `p * a`.
    fn left_point(&self, p: Quaternion) -> Self;
    /// Entrywise `a * q`.
    fn right_point(&self, q: Quaternion) -> Self;
    fn shape(&self) -> (usize, usize);
    fn try_inverse(&self) -> Result<Self>;
}

impl Coefficient for Quaternion {
    fn zero_like(&self) -> Self {
        Quaternion::ZERO
    }
    fn one_like(&self) -> Self {
        Quaternion::ONE
    }
    fn try_product(&self, rhs: &Self) -> Result<Self> {
        Ok(*self * *rhs)
    }
    fn try_plus(&self, rhs: &Self) -> Result<Self> {
        Ok(*self + *rhs)
    }
    fn negated(&self) -> Self {
        -*self
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn adjoint(&self) -> Self {
        self.conj()
    }
    fn left_point(&self, p: Quaternion) -> Self {
        p * *self
    }
    fn right_point(&self, q: Quaternion) -> Self {
        *self * q
    }
    fn shape(&self) -> (usize, usize) {
        (1, 1)
    }
    fn try_inverse(&self) -> Result<Self> {
        self.inverse()
    }
}

impl Coefficient for QMatrix {
    fn zero_like(&self) -> Self {
        QMatrix::zeros(self.rows(), self.cols())
    }
    fn one_like(&self) -> Self {
        QMatrix::identity(self.cols())
    }
    fn try_product(&self, rhs: &Self) -> Result<Self> {
        self.try_mul(rhs)
    }
    fn try_plus(&self, rhs: &Self) -> Result<Self> {
        self.try_add(rhs)
    }
    fn negated(&self) -> Self {
        self.scale(-1.0)
    }
    fn magnitude(&self) -> f64 {
        self.max_abs()
    }
    fn adjoint(&self) -> Self {
        QMatrix::adjoint(self)
    }
    fn left_point(&self, p: Quaternion) -> Self {
        self.left_scale(p)
    }
    fn right_point(&self, q: Quaternion) -> Self {
        self.right_scale(q)
    }
    fn shape(&self) -> (usize, usize) {
        QMatrix::shape(self)
    }
    fn try_inverse(&self) -> Result<Self> {
        self.inverse()
    }
}

fn check_nonempty<T>(coeffs: &[T]) -> Result<()> {
    if coeffs.is_empty() {
        return Err(Error::InvalidInput("a series needs at least one coefficient".into()));
    }
    Ok(())
}

fn check_shapes<T: Coefficient>(coeffs: &[T]) -> Result<()> {
    let s = coeffs[0].shape();
    if let Some(bad) = coeffs.iter().find(|c| c.shape() != s) {
        return Err(Error::ShapeMismatch(format!(
            "coefficient of shape {:?} in a {:?} series",
            bad.shape(),
            s
        )));
    }
    Ok(())
}

/// Cauchy convolution truncated to the shorter operand.
fn convolve<T: Coefficient>(a: &[T], b: &[T]) -> Result<Vec<T>> {
    let n = a.len().min(b.len());
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = a[0].try_product(&b[k])?;
        for r in 1..=k {
            acc = acc.try_plus(&a[r].try_product(&b[k - r])?)?;
        }
        out.push(acc);
    }
    Ok(out)
}

/// Geometric tail bound `M r^(N+1) / (1 - r)`.
pub fn tail_bound(max_coeff: f64, r: f64, degree: usize) -> f64 {
    if r >= 1.0 {
        return f64::INFINITY;
    }
    if max_coeff == 0.0 {
        return 0.0;
    }
    max_coeff * r.powi(degree as i32 + 1) / (1.0 - r)
}

/// Left series `sum p^n a_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LSeries<T = Quaternion> {
    coeffs: Vec<T>,
}

/// Right series `sum b_n conj(q)^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RSeries<T = Quaternion> {
    coeffs: Vec<T>,
}

pub type MatrixSeries = LSeries<QMatrix>;

macro_rules! shared_series_impl {
    ($name:ident) => {
        impl<T: Coefficient> $name<T> {
            pub fn new(coeffs: Vec<T>) -> Result<Self> {
                check_nonempty(&coeffs)?;
                check_shapes(&coeffs)?;
                Ok(Self { coeffs })
            }

            /// `c` followed by zeros up to `degree`.
            pub fn constant(c: T, degree: usize) -> Self {
                let z = c.zero_like();
                let mut coeffs = vec![z; degree + 1];
                coeffs[0] = c;
                Self { coeffs }
            }

            pub fn degree(&self) -> usize {
                self.coeffs.len() - 1
            }

            pub fn coeffs(&self) -> &[T] {
                &self.coeffs
            }

            pub fn into_coeffs(self) -> Vec<T> {
                self.coeffs
            }

            /// Coefficient of degree `n`; zero beyond the truncation.
            pub fn coeff(&self, n: usize) -> T {
                self.coeffs.get(n).cloned().unwrap_or_else(|| self.coeffs[0].zero_like())
            }

            pub fn shape(&self) -> (usize, usize) {
                self.coeffs[0].shape()
            }

            pub fn max_coeff(&self) -> f64 {
                self.coeffs.iter().map(Coefficient::magnitude).fold(0.0, f64::max)
            }

            /// Truncates or zero-pads to `degree`.
            pub fn with_degree(&self, degree: usize) -> Self {
                Self {
                    coeffs: (0..=degree).map(|n| self.coeff(n)).collect(),
                }
            }

            pub fn star_mul(&self, rhs: &Self) -> Result<Self> {
                Ok(Self {
                    coeffs: convolve(&self.coeffs, &rhs.coeffs)?,
                })
            }

            pub fn try_add(&self, rhs: &Self) -> Result<Self> {
                let n = self.coeffs.len().min(rhs.coeffs.len());
                let coeffs = (0..n)
                    .map(|k| self.coeffs[k].try_plus(&rhs.coeffs[k]))
                    .collect::<Result<_>>()?;
                Ok(Self { coeffs })
            }

            pub fn try_sub(&self, rhs: &Self) -> Result<Self> {
                self.try_add(&rhs.negated())
            }

            pub fn negated(&self) -> Self {
                self.map(Coefficient::negated)
            }

            pub fn map(&self, f: impl Fn(&T) -> T) -> Self {
                Self {
                    coeffs: self.coeffs.iter().map(f).collect(),
                }
            }

            /// Multiplies every coefficient on the left by the constant `c`.
            pub fn left_mul_const(&self, c: &T) -> Result<Self> {
                let coeffs = self.coeffs.iter().map(|a| c.try_product(a)).collect::<Result<_>>()?;
                Ok(Self { coeffs })
            }

            /// Multiplies every coefficient on the right by the constant `c`.
            pub fn right_mul_const(&self, c: &T) -> Result<Self> {
                let coeffs = self.coeffs.iter().map(|a| a.try_product(c)).collect::<Result<_>>()?;
                Ok(Self { coeffs })
            }

            /// `m`-fold star power; `m = 0` gives the identity constant.
            pub fn star_power(&self, m: usize) -> Result<Self> {
                let mut out = Self::constant(self.coeffs[0].one_like(), self.degree());
                for _ in 0..m {
                    out = out.star_mul(self)?;
                }
                Ok(out)
            }

            /// Multiplication by the variable: coefficients move up one
            /// degree and the top one is dropped.
            pub fn shift_up(&self) -> Self {
                let mut coeffs = Vec::with_capacity(self.coeffs.len());
                coeffs.push(self.coeffs[0].zero_like());
                coeffs.extend_from_slice(&self.coeffs[..self.coeffs.len() - 1]);
                Self { coeffs }
            }

            /// `(f - f(0)) / p`, of degree `N - 1` (a constant maps to zero).
            pub fn backward_shift(&self) -> Self {
                if self.coeffs.len() == 1 {
                    return Self {
                        coeffs: vec![self.coeffs[0].zero_like()],
                    };
                }
                Self {
                    coeffs: self.coeffs[1..].to_vec(),
                }
            }

            /// Series with coefficients `a_n*`, of the other handedness.
            pub fn adjoint_coeffs(&self) -> Vec<T> {
                self.coeffs.iter().map(Coefficient::adjoint).collect()
            }

            /// Tail bound of the truncation at `|p| = r`.
            pub fn tail_bound(&self, r: f64) -> f64 {
                tail_bound(self.max_coeff(), r, self.degree())
            }

            /// Inverse for the star product by recursive convolution, valid
            /// whenever the constant term is invertible.
            pub fn star_inv_recursive(&self) -> Result<Self> {
                let a0inv = self.coeffs[0]
                    .try_inverse()
                    .map_err(|_| Error::NonInvertibleConstantTerm)?;
                let mut g: Vec<T> = vec![a0inv.clone()];
                for n in 1..self.coeffs.len() {
                    let mut acc = self.coeffs[1].try_product(&g[n - 1])?;
                    for r in 2..=n {
                        acc = acc.try_plus(&self.coeffs[r].try_product(&g[n - r])?)?;
                    }
                    g.push(a0inv.try_product(&acc)?.negated());
                }
                Ok(Self { coeffs: g })
            }
        }

        impl<T: Coefficient> Serialize for $name<T> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                SeriesRepr {
                    degree: self.degree(),
                    coeffs: self.coeffs.clone(),
                }
                .serialize(s)
            }
        }

        impl<'de, T: Coefficient> Deserialize<'de> for $name<T> {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let r = SeriesRepr::<T>::deserialize(d)?;
                if r.coeffs.len() != r.degree + 1 {
                    return Err(serde::de::Error::custom(format!(
                        "degree {} needs {} coefficients, found {}",
                        r.degree,
                        r.degree + 1,
                        r.coeffs.len()
                    )));
                }
                Self::new(r.coeffs).map_err(serde::de::Error::custom)
            }
        }
    };
}

#[derive(Serialize, Deserialize)]
struct SeriesRepr<T> {
    degree: usize,
    coeffs: Vec<T>,
}

shared_series_impl!(LSeries);
shared_series_impl!(RSeries);

impl<T: Coefficient> LSeries<T> {
    /// `f(p) = sum p^n a_n` by Horner's rule; `p` commutes with its powers.
    pub fn eval(&self, p: Quaternion) -> T {
        let mut acc = self.coeffs[self.coeffs.len() - 1].clone();
        for a in self.coeffs.iter().rev().skip(1) {
            acc = a.try_plus(&acc.left_point(p)).expect("homogeneous coefficients");
        }
        acc
    }

    /// Value together with the truncation bound at `|p|`.
    pub fn eval_with_bound(&self, p: Quaternion) -> (T, f64) {
        (self.eval(p), self.tail_bound(p.norm()))
    }

    /// `f(q)* = sum a_n* conj(q)^n` as a right series.
    pub fn adjoint_series(&self) -> RSeries<T> {
        RSeries {
            coeffs: self.adjoint_coeffs(),
        }
    }
}

impl<T: Coefficient> RSeries<T> {
    /// `g(q) = sum b_n conj(q)^n`.
    pub fn eval(&self, q: Quaternion) -> T {
        let qb = q.conj();
        let mut acc = self.coeffs[self.coeffs.len() - 1].clone();
        for b in self.coeffs.iter().rev().skip(1) {
            acc = b.try_plus(&acc.right_point(qb)).expect("homogeneous coefficients");
        }
        acc
    }

    pub fn adjoint_series(&self) -> LSeries<T> {
        LSeries {
            coeffs: self.adjoint_coeffs(),
        }
    }
}

impl LSeries<Quaternion> {
    pub fn from_quaternions(coeffs: &[Quaternion]) -> Result<Self> {
        Self::new(coeffs.to_vec())
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Quaternion::real(c)).collect())
    }

    /// Hardy kernel column `sum p^n conj(q)^n`.
    pub fn hardy_column(q: Quaternion, degree: usize) -> Self {
        let qb = q.conj();
        let mut coeffs = Vec::with_capacity(degree + 1);
        let mut power = Quaternion::ONE;
        for _ in 0..=degree {
            coeffs.push(power);
            power *= qb;
        }
        Self { coeffs }
    }

    /// `f^c`, conjugating each coefficient.
    pub fn conj_series(&self) -> Self {
        self.map(|a| a.conj())
    }

    /// `f^s = f^c * f`, whose coefficients are real.
    pub fn symmetrize(&self) -> Self {
        self.conj_series().star_mul(self).expect("scalar series")
    }

    /// Star reciprocal `(f^s)^-1 f^c`. The real series `f^s` is inverted
    /// by power series division.
    pub fn star_inv(&self) -> Result<Self> {
        if self.coeffs[0].norm() == 0.0 {
            return Err(Error::NonInvertibleConstantTerm);
        }
        let s: Vec<f64> = self.symmetrize().coeffs.iter().map(|c| c.w).collect();
        let mut t = vec![1.0 / s[0]; 1];
        for n in 1..s.len() {
            let acc: f64 = (1..=n).map(|r| s[r] * t[n - r]).sum();
            t.push(-acc / s[0]);
        }
        let inv_s = LSeries::from_real(&t)?;
        inv_s.star_mul(&self.conj_series())
    }

    /// True when every coefficient is real within `tol`, which for series
    /// at the origin is equivalent to mapping each slice into itself.
    pub fn is_slice_preserving_tol(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|c| c.im_norm() <= tol)
    }

    pub fn is_slice_preserving(&self) -> bool {
        self.is_slice_preserving_tol(ALGEBRA_TOL)
    }

    /// Splits each coefficient as `alpha + beta J` with `alpha, beta` in
    /// the slice `C_I`, returned as complex numbers in the basis `1, I`.
    pub fn restrict_split(&self, i: ImagUnit, j: ImagUnit) -> Result<(Vec<C64>, Vec<C64>)> {
        let dot = i.dot(j);
        if dot.abs() > ALGEBRA_TOL {
            return Err(Error::NotOrthogonal { dot });
        }
        let (iq, jq) = (i.as_quaternion(), j.as_quaternion());
        let kq = iq * jq;
        let mut f = Vec::with_capacity(self.coeffs.len());
        let mut g = Vec::with_capacity(self.coeffs.len());
        for a in &self.coeffs {
            f.push(C64::new(a.w, a.dot(iq)));
            g.push(C64::new(a.dot(jq), a.dot(kq)));
        }
        Ok((f, g))
    }

    /// Inverse of [`restrict_split`](Self::restrict_split).
    pub fn from_split(f: &[C64], g: &[C64], i: ImagUnit, j: ImagUnit) -> Result<Self> {
        if f.len() != g.len() {
            return Err(Error::ShapeMismatch("split parts differ in length".into()));
        }
        let (iq, jq) = (i.as_quaternion(), j.as_quaternion());
        Self::new(
            f.iter()
                .zip(g)
                .map(|(a, b)| (Quaternion::real(a.re) + iq * a.im) + (Quaternion::real(b.re) + iq * b.im) * jq)
                .collect(),
        )
    }

    /// Embeds a scalar series as a series of `1 x 1` matrices.
    pub fn to_matrix_series(&self) -> MatrixSeries {
        LSeries {
            coeffs: self.coeffs.iter().map(|&a| QMatrix::scalar(a)).collect(),
        }
    }
}

impl LSeries<QMatrix> {
    /// Star inverse of a matrix series with invertible constant term.
    pub fn star_inv(&self) -> Result<Self> {
        self.star_inv_recursive()
    }

    /// Reads back a series of `1 x 1` matrices.
    pub fn to_scalar_series(&self) -> Result<LSeries<Quaternion>> {
        if self.shape() != (1, 1) {
            return Err(Error::ShapeMismatch(format!("{:?} is not scalar", self.shape())));
        }
        LSeries::new(self.coeffs.iter().map(|m| m[(0, 0)]).collect())
    }
}

/// Extension of slice data to the whole ball:
/// `f(p) = (f(z) + f(conj z)) / 2 + I_p I (f(conj z) - f(z)) / 2`
/// for `p = x + I_p y`, `z = x + I y`.
pub fn extend_from_values(fz: Quaternion, fzbar: Quaternion, i: ImagUnit, ip: ImagUnit) -> Quaternion {
    let sum = (fz + fzbar) * 0.5;
    let diff = (fzbar - fz) * 0.5;
    sum + ip.as_quaternion() * i.as_quaternion() * diff
}

/// Evaluates the slice regular extension of `f` restricted to `C_I` at `p`.
/// Real points are evaluated directly.
pub fn ext_from_slice(i: ImagUnit, p: Quaternion, f: impl Fn(Quaternion) -> Quaternion) -> Quaternion {
    match p.decompose() {
        Ok(form) => {
            let z = Quaternion::real(form.re) + i.as_quaternion() * form.im_norm;
            extend_from_values(f(z), f(z.conj()), i, form.dir)
        }
        Err(_) => f(Quaternion::real(p.w)),
    }
}
