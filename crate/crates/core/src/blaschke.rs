//! Blaschke factors at points and spheres, and finite Blaschke products.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quat::{same_sphere, Quaternion, TwoSphere};
use crate::series::LSeries;

/// Below this modulus a prescribed zero counts as already annihilated.
const PLACEMENT_TOL: f64 = 1e-13;
const POLE_TOL: f64 = 1e-14;

/// A zero at a point of the ball. The origin is allowed and contributes
/// a monomial factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointZero {
    pub a: Quaternion,
    #[serde(default = "one")]
    pub mult: usize,
}

/// A zero on a whole 2-sphere inside the ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereZero {
    #[serde(flatten)]
    pub sphere: TwoSphere,
    #[serde(default = "one")]
    pub mult: usize,
}

fn one() -> usize {
    1
}

impl PointZero {
    pub fn new(a: Quaternion, mult: usize) -> Self {
        Self { a, mult }
    }
}

impl SphereZero {
    pub fn new(sphere: TwoSphere, mult: usize) -> Self {
        Self { sphere, mult }
    }
}

/// Zero-set file layout.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ZeroSet {
    #[serde(default)]
    pub points: Vec<PointZero>,
    #[serde(default)]
    pub spheres: Vec<SphereZero>,
}

fn check_in_ball(a: Quaternion) -> Result<()> {
    if !(a.norm() < 1.0) {
        return Err(Error::NotInBall(a.to_string()));
    }
    Ok(())
}

fn check_sphere(s: &TwoSphere) -> Result<()> {
    TwoSphere::new(s.re, s.im_norm)?;
    if !(s.norm() < 1.0) {
        return Err(Error::NotInBall(format!("[{} + I {}]", s.re, s.im_norm)));
    }
    Ok(())
}

/// Series of `B_a(p) = |a| + sum_{n>=0} p^(n+1) conj(a)^(n+1) (|a| - 1/|a|)`.
pub fn factor_point(a: Quaternion, degree: usize) -> Result<LSeries> {
    if a.is_zero() {
        return Err(Error::ZeroPoint);
    }
    check_in_ball(a)?;
    let na = a.norm();
    let scale = na - 1.0 / na;
    let ab = a.conj();
    let mut coeffs = Vec::with_capacity(degree + 1);
    coeffs.push(Quaternion::real(na));
    let mut power = Quaternion::ONE;
    for _ in 0..degree {
        power *= ab;
        coeffs.push(power * scale);
    }
    LSeries::new(coeffs)
}

/// `B_a(p)` by pointwise operations:
/// `(1 - p~ conj a)^-1 (a - p~) conj(a)/|a|` with `p~ = L^-1 p L`, `L = 1 - p a`.
pub fn factor_point_closed(a: Quaternion, p: Quaternion) -> Result<Quaternion> {
    if a.is_zero() {
        return Err(Error::ZeroPoint);
    }
    let na2 = a.norm_sqr();
    let denom = Quaternion::ONE - p * (2.0 * a.re()) + p * p * na2;
    if denom.norm() < POLE_TOL {
        return Err(Error::PoleSphere);
    }
    let lam = Quaternion::ONE - p * a;
    let pt = lam.inverse().map_err(|_| Error::PoleSphere)? * p * lam;
    let left = (Quaternion::ONE - pt * a.conj()).inverse().map_err(|_| Error::PoleSphere)?;
    Ok(left * (a - pt) * (a.conj() / na2.sqrt()))
}

/// Real series of `(1 - 2Re(c) p + |c|^2 p^2)^-1 (|c|^2 - 2Re(c) p + p^2)`.
pub fn factor_sphere(s: &TwoSphere, degree: usize) -> Result<LSeries> {
    check_sphere(s)?;
    let (t, n2) = (2.0 * s.re, s.norm_sqr());
    let num = [n2, -t, 1.0];
    let den = [1.0, -t, n2];
    // Long division by the monic-at-zero denominator.
    let mut out: Vec<f64> = Vec::with_capacity(degree + 1);
    for k in 0..=degree {
        let mut v = num.get(k).copied().unwrap_or(0.0);
        if k >= 1 {
            v -= den[1] * out[k - 1];
        }
        if k >= 2 {
            v -= den[2] * out[k - 2];
        }
        out.push(v);
    }
    LSeries::from_real(&out)
}

/// Closed form of the sphere factor at `p`.
pub fn factor_sphere_closed(s: &TwoSphere, p: Quaternion) -> Result<Quaternion> {
    let (t, n2) = (2.0 * s.re, s.norm_sqr());
    let den = Quaternion::ONE - p * t + p * p * n2;
    if den.norm() < POLE_TOL {
        return Err(Error::PoleSphere);
    }
    let num = Quaternion::real(n2) - p * t + p * p;
    // Both are polynomials in p with real coefficients, so they commute.
    Ok(den.inverse()? * num)
}

/// `p^m`.
pub fn monomial(m: usize, degree: usize) -> LSeries {
    let mut coeffs = vec![Quaternion::ZERO; degree + 1];
    if m <= degree {
        coeffs[m] = Quaternion::ONE;
    }
    LSeries::new(coeffs).expect("nonempty")
}

/// One factor of a product, evaluated pointwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Factor {
    Sphere { sphere: TwoSphere },
    Origin,
    Point { a: Quaternion },
}

impl Factor {
    pub fn eval(&self, p: Quaternion) -> Result<Quaternion> {
        match self {
            Factor::Sphere { sphere } => factor_sphere_closed(sphere, p),
            Factor::Origin => Ok(p),
            Factor::Point { a } => factor_point_closed(*a, p),
        }
    }
}

/// Evaluates `f_1 * f_2 * ... * f_n` at `p` through
/// `(f * g)(p) = f(p) g(f(p)^-1 p f(p))`, which is zero when `f(p) = 0`.
pub fn eval_chain(factors: &[Factor], p: Quaternion) -> Result<Quaternion> {
    let mut value = Quaternion::ONE;
    let mut cur = p;
    for f in factors {
        let v = f.eval(cur)?;
        if v.is_zero() {
            return Ok(Quaternion::ZERO);
        }
        value *= v;
        cur = v.inverse()? * cur * v;
    }
    Ok(value)
}

/// A finite Blaschke product with its factors in star-product order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlaschkeProduct {
    pub series: LSeries,
    /// Factor list with multiplicities expanded.
    pub factors: Vec<Factor>,
    /// The placed zero `a'_j` used for each prescribed point, in input order
    /// (the origin maps to itself).
    pub placements: Vec<Quaternion>,
}

impl BlaschkeProduct {
    /// Truncated series value with its tail bound.
    pub fn eval(&self, p: Quaternion) -> (Quaternion, f64) {
        self.series.eval_with_bound(p)
    }

    /// Value from the factor chain, free of truncation error.
    pub fn eval_exact(&self, p: Quaternion) -> Result<Quaternion> {
        eval_chain(&self.factors, p)
    }
}

fn check_distinct(zs: &ZeroSet) -> Result<()> {
    let reps: Vec<Quaternion> = zs
        .points
        .iter()
        .map(|z| z.a)
        .chain(zs.spheres.iter().map(|s| s.sphere.representative()))
        .collect();
    for i in 0..reps.len() {
        for j in i + 1..reps.len() {
            if same_sphere(reps[i], reps[j]) {
                return Err(Error::DuplicateSphere { first: i, second: j });
            }
        }
    }
    Ok(())
}

/// Builds `prod B_[c]^nu * p^mu0 * prod_* B_{a'_j}^{*mu_j}`.
///
/// Point zeros are placed in input order with
/// `a'_{k+1} = B_k(a_{k+1})^-1 a_{k+1} B_k(a_{k+1})`, so each prescribed
/// point is a zero of the result.
pub fn product_build(zs: &ZeroSet, degree: usize) -> Result<BlaschkeProduct> {
    for p in &zs.points {
        check_in_ball(p.a)?;
    }
    for s in &zs.spheres {
        check_sphere(&s.sphere)?;
    }
    check_distinct(zs)?;

    let mut series = LSeries::constant(Quaternion::ONE, degree);
    let mut factors = Vec::new();
    for s in zs.spheres.iter().filter(|s| s.mult > 0) {
        let f = factor_sphere(&s.sphere, degree)?;
        series = series.star_mul(&f.star_power(s.mult)?)?;
        factors.extend(std::iter::repeat_n(Factor::Sphere { sphere: s.sphere }, s.mult));
    }
    // Real-coefficient factors commute, so the origin can sit here.
    let origin_mult: usize = zs.points.iter().filter(|z| z.a.is_zero()).map(|z| z.mult).sum();
    if origin_mult > 0 {
        series = series.star_mul(&monomial(origin_mult, degree))?;
        factors.extend(std::iter::repeat_n(Factor::Origin, origin_mult));
    }

    let mut placements = Vec::with_capacity(zs.points.len());
    for (index, z) in zs.points.iter().enumerate() {
        if z.a.is_zero() {
            placements.push(Quaternion::ZERO);
            continue;
        }
        let bk = eval_chain(&factors, z.a)?;
        let modulus = bk.norm();
        if modulus < PLACEMENT_TOL {
            return Err(Error::PlacementBreakdown { index, modulus });
        }
        let placed = bk.inverse()? * z.a * bk;
        placements.push(placed);
        if z.mult > 0 {
            let f = factor_point(placed, degree)?;
            series = series.star_mul(&f.star_power(z.mult)?)?;
            factors.extend(std::iter::repeat_n(Factor::Point { a: placed }, z.mult));
        }
    }
    Ok(BlaschkeProduct {
        series,
        factors,
        placements,
    })
}
