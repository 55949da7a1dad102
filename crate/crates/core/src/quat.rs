//! Real quaternions, imaginary units and the 2-spheres `[p]`.
//!
//! A quaternion is stored as `w + x i + y j + z k`. Every non-real
//! quaternion lies on exactly one complex slice `C_I = R + I R`, and
//! `p = Re(p) + I_p |Im(p)|` with `I_p` a unit imaginary quaternion.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default tolerance for exact algebraic identities.
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Default tolerance for comparisons involving truncated series.
pub const SERIES_TOL: f64 = 1e-8;

/// Below this modulus the imaginary part is treated as zero.
const REAL_POINT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    #[inline]
    pub const fn real(w: f64) -> Self {
        Self::new(w, 0.0, 0.0, 0.0)
    }

    #[inline]
    pub fn re(self) -> f64 {
        self.w
    }

    /// Imaginary part `x i + y j + z k`.
    #[inline]
    pub fn im(self) -> Quaternion {
        Self::new(0.0, self.x, self.y, self.z)
    }

    #[inline]
    pub fn im_norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    #[inline]
    pub fn conj(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    #[inline]
    pub fn norm_sqr(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.w == 0.0 && self.x == 0.0 && self.y == 0.0 && self.z == 0.0
    }

    pub fn inverse(self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if n2 == 0.0 {
            return Err(Error::ZeroDivision);
        }
        Ok(self.conj() / n2)
    }

    /// Integer power by repeated squaring.
    pub fn powi(self, n: u32) -> Self {
        let mut result = Self::ONE;
        let mut base = self;
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result *= base;
            }
            base = base * base;
            e >>= 1;
        }
        result
    }

    /// Real dot product of the four coordinate vectors.
    #[inline]
    pub fn dot(self, other: Self) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    /// Splits `q = re + dir * im_norm`.
    pub fn decompose(self) -> Result<SliceForm> {
        let im_norm = self.im_norm();
        if im_norm < REAL_POINT_TOL {
            return Err(Error::RealPoint);
        }
        let dir = ImagUnit {
            x: self.x / im_norm,
            y: self.y / im_norm,
            z: self.z / im_norm,
        };
        Ok(SliceForm {
            re: self.w,
            im_norm,
            dir,
        })
    }

    /// The 2-sphere `[q]`, or `RealPoint` when `q` is real.
    pub fn sphere(self) -> Result<TwoSphere> {
        TwoSphere::new(self.w, self.im_norm())
    }

    pub fn approx_eq(self, other: Self, tol: f64) -> bool {
        (self - other).norm() <= tol
    }

    /// Uniform sample of the box `[-1, 1]^4`.
    pub fn random_box<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::new(
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
        )
    }

    /// Box sample rescaled to have modulus strictly below `radius`.
    pub fn random_in_ball<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> Self {
        let q = Self::random_box(rng);
        let scale = radius * rng.random_range(0.0..1.0f64).powf(0.25);
        let n = q.norm();
        if n == 0.0 {
            return Self::ZERO;
        }
        q * (scale / n)
    }

    pub fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let q = Self::new(
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            );
            let n = q.norm();
            if n > 1e-6 {
                return q / n;
            }
        }
    }
}

/// Three-argument convenience constructor mirroring `a + b I` on a slice.
pub fn on_slice(re: f64, im: f64, dir: ImagUnit) -> Quaternion {
    Quaternion::real(re) + dir.as_quaternion() * im
}

/// Result of [`Quaternion::decompose`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceForm {
    pub re: f64,
    pub im_norm: f64,
    pub dir: ImagUnit,
}

impl SliceForm {
    pub fn reconstruct(&self) -> Quaternion {
        on_slice(self.re, self.im_norm, self.dir)
    }
}

/// Unit purely imaginary quaternion, an element of the sphere `S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagUnit {
    x: f64,
    y: f64,
    z: f64,
}

impl ImagUnit {
    pub const I: ImagUnit = ImagUnit { x: 1.0, y: 0.0, z: 0.0 };
    pub const J: ImagUnit = ImagUnit { x: 0.0, y: 1.0, z: 0.0 };
    pub const K: ImagUnit = ImagUnit { x: 0.0, y: 0.0, z: 1.0 };

    /// Normalizes `(x, y, z)`.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if n < REAL_POINT_TOL {
            return Err(Error::ZeroDirection);
        }
        Ok(Self {
            x: x / n,
            y: y / n,
            z: z / n,
        })
    }

    pub fn components(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn as_quaternion(self) -> Quaternion {
        Quaternion::new(0.0, self.x, self.y, self.z)
    }

    pub fn dot(self, other: ImagUnit) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Normalized Gaussian 3-vector.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            let z: f64 = rng.sample(StandardNormal);
            if let Ok(u) = Self::new(x, y, z) {
                if (x * x + y * y + z * z) > 1e-12 {
                    return u;
                }
            }
        }
    }

    /// A unit orthogonal to `self`, chosen by Gram-Schmidt against the
    /// coordinate axis least aligned with it.
    pub fn orthogonal(self) -> ImagUnit {
        let c = self.components();
        let axis = if c[0].abs() <= c[1].abs() && c[0].abs() <= c[2].abs() {
            [1.0, 0.0, 0.0]
        } else if c[1].abs() <= c[2].abs() {
            [0.0, 1.0, 0.0]
        } else {
            [0.0, 0.0, 1.0]
        };
        let d = c[0] * axis[0] + c[1] * axis[1] + c[2] * axis[2];
        ImagUnit::new(axis[0] - d * c[0], axis[1] - d * c[1], axis[2] - d * c[2])
            .expect("axis least aligned with a unit vector is independent of it")
    }
}

/// The 2-sphere `[p] = { re + J im_norm : J in S }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSphere {
    pub re: f64,
    #[serde(rename = "im")]
    pub im_norm: f64,
}

impl TwoSphere {
    pub fn new(re: f64, im_norm: f64) -> Result<Self> {
        if !(im_norm > REAL_POINT_TOL) || !re.is_finite() || !im_norm.is_finite() {
            return Err(Error::RealPoint);
        }
        Ok(Self { re, im_norm })
    }

    /// Squared modulus shared by every point of the sphere.
    pub fn norm_sqr(&self) -> f64 {
        self.re * self.re + self.im_norm * self.im_norm
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// The point `re + dir * im_norm`.
    pub fn point(&self, dir: ImagUnit) -> Quaternion {
        on_slice(self.re, self.im_norm, dir)
    }

    /// Representative on `C_i`.
    pub fn representative(&self) -> Quaternion {
        self.point(ImagUnit::I)
    }

    pub fn contains(&self, p: Quaternion, tol: f64) -> bool {
        (p.re() - self.re).abs() <= tol && (p.im_norm() - self.im_norm).abs() <= tol
    }
}

/// `true` iff `p` and `q` have the same real part and the same imaginary
/// modulus, i.e. `[p] = [q]`.
pub fn same_sphere(p: Quaternion, q: Quaternion) -> bool {
    same_sphere_tol(p, q, ALGEBRA_TOL)
}

pub fn same_sphere_tol(p: Quaternion, q: Quaternion, tol: f64) -> bool {
    (p.re() - q.re()).abs() <= tol && (p.im_norm() - q.im_norm()).abs() <= tol
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(d) => write!(f, "{:.d$} {:+.d$}i {:+.d$}j {:+.d$}k", self.w, self.x, self.y, self.z),
            None => write!(f, "{} {:+}i {:+}j {:+}k", self.w, self.x, self.y, self.z),
        }
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.x, -self.y, -self.z)
    }
}

/// Hamilton product.
impl Mul for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn mul(self, o: Quaternion) -> Quaternion {
        Quaternion::new(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn mul(self, s: f64) -> Quaternion {
        Quaternion::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    #[inline]
    fn mul(self, q: Quaternion) -> Quaternion {
        q * self
    }
}

impl Div<f64> for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn div(self, s: f64) -> Quaternion {
        Quaternion::new(self.w / s, self.x / s, self.y / s, self.z / s)
    }
}

impl AddAssign for Quaternion {
    #[inline]
    fn add_assign(&mut self, o: Quaternion) {
        *self = *self + o;
    }
}

impl SubAssign for Quaternion {
    #[inline]
    fn sub_assign(&mut self, o: Quaternion) {
        *self = *self - o;
    }
}

impl MulAssign for Quaternion {
    #[inline]
    fn mul_assign(&mut self, o: Quaternion) {
        *self = *self * o;
    }
}

impl From<f64> for Quaternion {
    fn from(w: f64) -> Self {
        Quaternion::real(w)
    }
}

impl std::iter::Sum for Quaternion {
    fn sum<I: Iterator<Item = Quaternion>>(iter: I) -> Quaternion {
        iter.fold(Quaternion::ZERO, |a, b| a + b)
    }
}

impl Serialize for Quaternion {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_array().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Quaternion {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        <[f64; 4]>::deserialize(d).map(Quaternion::from_array)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hamilton_relations() {
        let (i, j, k) = (Quaternion::I, Quaternion::J, Quaternion::K);
        assert_eq!(i * j, k);
        assert_eq!(j * k, i);
        assert_eq!(k * i, j);
        assert_eq!(i * i, -Quaternion::ONE);
        assert_eq!(j * i, -k);
    }

    #[test]
    fn mul_examples() {
        let q = Quaternion::new(1.0, 2.0, 3.0, 4.0);
        assert_eq!(q * q.conj(), Quaternion::real(30.0));
        let a = Quaternion::new(1.0, 1.0, 0.0, 0.0);
        let b = Quaternion::new(1.0, 0.0, 1.0, 0.0);
        assert_eq!(a * b, Quaternion::new(1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(Quaternion::I.inverse().unwrap(), -Quaternion::I);
        assert_eq!(Quaternion::real(2.0).inverse().unwrap(), Quaternion::real(0.5));
        let inv = Quaternion::new(1.0, 1.0, 0.0, 0.0).inverse().unwrap();
        assert_eq!(inv, Quaternion::new(0.5, -0.5, 0.0, 0.0));
        assert_eq!(Quaternion::ZERO.inverse(), Err(Error::ZeroDivision));
    }

    #[test]
    fn decompose_examples() {
        let f = Quaternion::new(1.0, 2.0, 0.0, 0.0).decompose().unwrap();
        assert_eq!((f.re, f.im_norm), (1.0, 2.0));
        assert_eq!(f.dir, ImagUnit::I);
        assert_eq!(Quaternion::real(3.0).decompose(), Err(Error::RealPoint));

        let f = Quaternion::new(1.0, 1.0, 1.0, 1.0).decompose().unwrap();
        let s = 3f64.sqrt();
        assert!((f.im_norm - s).abs() < 1e-15);
        for c in f.dir.components() {
            assert!((c - 1.0 / s).abs() < 1e-15);
        }
    }

    #[test]
    fn same_sphere_examples() {
        assert!(same_sphere(Quaternion::I * 0.5, Quaternion::J * 0.5));
        assert!(!same_sphere(Quaternion::real(0.5), Quaternion::I * 0.5));
        assert!(same_sphere(
            Quaternion::new(1.0, 2.0, 0.0, 0.0),
            Quaternion::new(1.0, -2.0, 0.0, 0.0)
        ));
    }

    #[test]
    fn two_sphere_rejects_real_points() {
        assert_eq!(TwoSphere::new(0.3, 0.0), Err(Error::RealPoint));
        assert!(Quaternion::real(0.2).sphere().is_err());
    }

    #[test]
    fn decompose_reconstructs_and_rotation_preserves_sphere() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let q = Quaternion::random_box(&mut rng);
            let f = q.decompose().unwrap();
            assert!(f.reconstruct().approx_eq(q, 1e-12));
            let u = Quaternion::random_unit(&mut rng);
            assert!(same_sphere(q, u.conj() * q * u));
        }
    }

    #[test]
    fn associativity_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let a = Quaternion::random_box(&mut rng);
            let b = Quaternion::random_box(&mut rng);
            let c = Quaternion::random_box(&mut rng);
            let l = (a * b) * c;
            let r = a * (b * c);
            assert!((l - r).norm() <= 1e-12 * l.norm().max(1.0));
            assert!(((a * b).norm() - a.norm() * b.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn json_is_component_array_and_bit_exact() {
        let q = Quaternion::new(0.1, -1.0 / 3.0, 2e-300, std::f64::consts::PI);
        let s = serde_json::to_string(&q).unwrap();
        assert!(s.starts_with('['));
        let back: Quaternion = serde_json::from_str(&s).unwrap();
        assert_eq!(back.to_array().map(f64::to_bits), q.to_array().map(f64::to_bits));
        let formatted = format!("[{:.16e},{:.16e},{:.16e},{:.16e}]", q.w, q.x, q.y, q.z);
        let back: Quaternion = serde_json::from_str(&formatted).unwrap();
        assert_eq!(back, q);
    }

    #[test]
    fn orthogonal_unit() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let u = ImagUnit::random(&mut rng);
            let v = u.orthogonal();
            assert!(u.dot(v).abs() < 1e-12);
        }
    }
}
