//! Multipliers for vanishing conditions in the quaternionic Hardy space.
//!
//! Given points `a_i` and spheres `[c_j]` in the unit ball, the functions in
//! `H2` vanishing at every `a_i` and on every `[c_j]` are exactly `B * g`,
//! `g` in `H2`. The multiplier `B` comes from a unitary completion:
//! with `P - A* P A = c* c`, the column block
//! `T = [P^1/2 A P^-1/2 ; c P^-1/2]` is isometric, a unit vector `h`
//! completes it, and `(b ; d) = diag(P^-1/2, 1) h` gives
//! `B(p) = d + sum_n p^(n+1) c A^n b`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{hardy_kernel, schur_kernel, KernelSeries};
use crate::qlinalg::{gram_schmidt_complete, solve_stein, stein_residual, QMatrix};
use crate::quat::{same_sphere, ImagUnit, Quaternion, TwoSphere};
use crate::series::LSeries;

/// Nodes at or beyond this modulus are rejected.
pub const MAX_NODE_MODULUS: f64 = 1.0 - 1e-6;
/// Degree up to which the kernel identity is compared.
pub const BSCHURMULT_DEGREE: usize = 40;
/// Random points checked on each sphere.
pub const SPHERE_CHECKS: usize = 10;

const STEIN_TOL: f64 = 1e-13;

/// Vanishing conditions: points and whole spheres.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InterpProblem {
    #[serde(default)]
    pub points: Vec<Quaternion>,
    #[serde(default)]
    pub spheres: Vec<TwoSphere>,
}

impl InterpProblem {
    pub fn new(points: Vec<Quaternion>, spheres: Vec<TwoSphere>) -> Self {
        Self { points, spheres }
    }

    /// Three points and one sphere used as a reference instance.
    pub fn canonical_mixed() -> Self {
        Self {
            points: vec![
                Quaternion::real(0.25),
                Quaternion::new(0.0, 0.5, 0.25, 0.0),
                Quaternion::new(-0.3, 0.0, 0.0, 0.2),
            ],
            spheres: vec![TwoSphere { re: 0.1, im_norm: 0.5 }],
        }
    }

    /// Random instance with nodes of modulus at most `0.8` whose spheres
    /// are at least `0.2` apart in the `(Re, |Im|)` half-plane.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_points: usize, max_spheres: usize) -> Self {
        let n_points = rng.random_range(1..=max_points.max(1));
        let n_spheres = rng.random_range(0..=max_spheres);
        let mut taken: Vec<(f64, f64)> = Vec::new();
        let mut draw = |rng: &mut R, need_imag: bool| -> Quaternion {
            loop {
                let q = Quaternion::random_in_ball(rng, 0.8);
                let key = (q.re(), q.im_norm());
                if need_imag && key.1 < 0.1 {
                    continue;
                }
                if taken.iter().all(|&(r, s)| ((r - key.0).powi(2) + (s - key.1).powi(2)).sqrt() >= 0.2) {
                    taken.push(key);
                    return q;
                }
            }
        };
        let points = (0..n_points).map(|_| draw(rng, false)).collect();
        let spheres = (0..n_spheres)
            .map(|_| {
                let q = draw(rng, true);
                TwoSphere {
                    re: q.re(),
                    im_norm: q.im_norm(),
                }
            })
            .collect();
        Self { points, spheres }
    }

    pub fn size(&self) -> usize {
        self.points.len() + 2 * self.spheres.len()
    }

    /// Checks moduli and that all spheres `[a_i]`, `[c_j]` are disjoint.
    pub fn validate(&self) -> Result<()> {
        for (index, a) in self.points.iter().enumerate() {
            let modulus = a.norm();
            if !(modulus < MAX_NODE_MODULUS) {
                return Err(Error::NodeOutsideBall { index, modulus });
            }
        }
        for (k, s) in self.spheres.iter().enumerate() {
            TwoSphere::new(s.re, s.im_norm)?;
            let modulus = s.norm();
            if !(modulus < MAX_NODE_MODULUS) {
                return Err(Error::NodeOutsideBall {
                    index: self.points.len() + k,
                    modulus,
                });
            }
        }
        let reps: Vec<Quaternion> = self
            .points
            .iter()
            .copied()
            .chain(self.spheres.iter().map(TwoSphere::representative))
            .collect();
        for i in 0..reps.len() {
            for j in i + 1..reps.len() {
                if same_sphere(reps[i], reps[j]) {
                    return Err(Error::OverlappingSpheres { first: i, second: j });
                }
            }
        }
        Ok(())
    }
}

/// `A` and the row of ones `c`.
///
/// A point `a` is stored as `conj(a)`: the construction produces a
/// multiplier vanishing at `conj(A_ii)`. Each sphere `[c]` contributes the
/// pair `c, conj(c)`, which is closed under conjugation.
pub fn build_node_data(prob: &InterpProblem) -> Result<(QMatrix, QMatrix)> {
    prob.validate()?;
    let mut nodes: Vec<Quaternion> = prob.points.iter().map(|a| a.conj()).collect();
    for s in &prob.spheres {
        let c = s.representative();
        nodes.push(c);
        nodes.push(c.conj());
    }
    let c_row = QMatrix::row(&vec![Quaternion::ONE; nodes.len()]);
    Ok((QMatrix::diag(&nodes), c_row))
}

/// `P = sum_n A*^n c* c A^n`, checked positive definite.
pub fn gram_p(a: &QMatrix, c_row: &QMatrix) -> Result<QMatrix> {
    let q = &c_row.adjoint() * c_row;
    let p = solve_stein(a, &q, STEIN_TOL)?;
    if p.rows() > 0 {
        let min = p.herm_eigen(1e-10)?.min().unwrap_or(0.0);
        if min <= 1e-10 * p.frobenius_norm() {
            return Err(Error::NotPD { min_eigenvalue: min });
        }
    }
    Ok(p)
}

/// Output of the completion step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Multiplier {
    pub b: QMatrix,
    pub d: Quaternion,
    pub series: LSeries,
    /// The isometric column block `T`.
    #[serde(skip)]
    pub t: QMatrix,
    /// The completion vector.
    #[serde(skip)]
    pub h: QMatrix,
}

/// Series coefficients `d, c b, c A b, c A^2 b, ...` up to `degree`.
pub fn multiplier_series(a: &QMatrix, b: &QMatrix, c_row: &QMatrix, d: Quaternion, degree: usize) -> LSeries {
    let mut coeffs = Vec::with_capacity(degree + 1);
    coeffs.push(d);
    let mut v = b.clone();
    for _ in 0..degree {
        coeffs.push(if v.rows() == 0 { Quaternion::ZERO } else { (c_row * &v)[(0, 0)] });
        v = a * &v;
    }
    LSeries::new(coeffs).expect("nonempty")
}

pub fn build_multiplier(a: &QMatrix, c_row: &QMatrix, p: &QMatrix, degree: usize) -> Result<Multiplier> {
    let n = a.rows();
    let (s, si) = if n == 0 {
        (QMatrix::zeros(0, 0), QMatrix::zeros(0, 0))
    } else {
        (p.sqrt_pd()?, p.inv_sqrt_pd()?)
    };
    let t = QMatrix::vstack(&(&(&s * a) * &si), &(c_row * &si))?;
    let h = gram_schmidt_complete(&t)?;
    let b = &si * &h.block(0, 0, n, 1);
    let d = h[(n, 0)];
    let series = multiplier_series(a, &b, c_row, d, degree);
    Ok(Multiplier { b, d, series, t, h })
}

/// `B(p) = d + p sum_j k(p, conj(A_jj)) b_j` for diagonal `A`, without
/// truncation error.
pub fn eval_exact(a: &QMatrix, b: &QMatrix, d: Quaternion, p: Quaternion) -> Result<Quaternion> {
    let mut sum = Quaternion::ZERO;
    for j in 0..a.rows() {
        sum += hardy_kernel(p, a[(j, j)].conj())? * b[(j, 0)];
    }
    Ok(d + p * sum)
}

/// Residual with the tolerance it is held to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(value: f64, tol: f64) -> Self {
        Self {
            value,
            tol,
            pass: value <= tol,
        }
    }
}

/// Named residual checks.
pub type Diagnostics = BTreeMap<String, Check>;

pub fn failures(diag: &Diagnostics) -> Vec<String> {
    diag.iter().filter(|(_, c)| !c.pass).map(|(k, _)| k.clone()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterpSolution {
    pub problem: InterpProblem,
    #[serde(rename = "A")]
    pub a: QMatrix,
    pub c_row: QMatrix,
    #[serde(rename = "P")]
    pub p: QMatrix,
    pub b: QMatrix,
    pub d: Quaternion,
    #[serde(rename = "B")]
    pub multiplier: LSeries,
    pub diagnostics: Diagnostics,
}

impl InterpSolution {
    /// Exact value of the multiplier.
    pub fn eval(&self, p: Quaternion) -> Result<Quaternion> {
        eval_exact(&self.a, &self.b, self.d, p)
    }

    /// The prescribed points followed by `SPHERE_CHECKS` seeded points on
    /// each sphere.
    pub fn check_points(&self) -> Vec<Quaternion> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut pts = self.problem.points.clone();
        for s in &self.problem.spheres {
            for _ in 0..SPHERE_CHECKS {
                pts.push(s.point(ImagUnit::random(&mut rng)));
            }
        }
        pts
    }

    pub fn is_verified(&self) -> bool {
        failures(&self.diagnostics).is_empty()
    }
}

/// Largest difference between `c A^m P^-1 A*^n c*` and the Schur kernel of
/// `B` for `m, n <= degree`.
pub fn check_bschurmult(sol: &InterpSolution, degree: usize) -> Result<f64> {
    let degree = degree.min(sol.multiplier.degree());
    let b = sol.multiplier.with_degree(degree).to_matrix_series();
    let one = QMatrix::identity(1);
    let lhs = schur_kernel(&b, &one, &one)?;
    let n = sol.a.rows();
    let rhs = if n == 0 {
        KernelSeries::new(vec![vec![QMatrix::zeros(1, 1); degree + 1]; degree + 1])?
    } else {
        let pinv = sol.p.inverse_pd()?;
        let mut rows = Vec::with_capacity(degree + 1);
        let mut v = sol.c_row.clone();
        for _ in 0..=degree {
            rows.push(v.clone());
            v = &v * &sol.a;
        }
        let left: Vec<QMatrix> = rows.iter().map(|r| r * &pinv).collect();
        let right: Vec<QMatrix> = rows.iter().map(QMatrix::adjoint).collect();
        KernelSeries::new(
            left.iter()
                .map(|l| right.iter().map(|r| l * r).collect())
                .collect(),
        )?
    };
    Ok(lhs.max_mismatch(&rhs))
}

/// Builds the solution and records every residual without failing on them.
pub fn solve_unchecked(prob: &InterpProblem, degree: usize, tol: f64) -> Result<InterpSolution> {
    let (a, c_row) = build_node_data(prob)?;
    let p = gram_p(&a, &c_row)?;
    let m = build_multiplier(&a, &c_row, &p, degree)?;
    let n = a.rows();

    let mut diagnostics = Diagnostics::new();
    let q = &c_row.adjoint() * &c_row;
    diagnostics.insert("stein_residual".into(), Check::new(stein_residual(&a, &p, &q), 1e-10));
    let tt = &m.t.adjoint() * &m.t;
    diagnostics.insert("isometry".into(), Check::new((&tt - &QMatrix::identity(n)).max_abs(), 1e-10));
    let full = QMatrix::hstack(&m.t, &m.h)?;
    let unitary = (&(&full * &full.adjoint()) - &QMatrix::identity(n + 1)).max_abs();
    diagnostics.insert("unitary".into(), Check::new(unitary, 1e-10));

    let mut sol = InterpSolution {
        problem: prob.clone(),
        a,
        c_row,
        p,
        b: m.b,
        d: m.d,
        multiplier: m.series,
        diagnostics,
    };
    let mut node_exact: f64 = 0.0;
    let mut node_series: f64 = 0.0;
    for z in sol.check_points() {
        node_exact = node_exact.max(sol.eval(z)?.norm());
        let (v, bound) = sol.multiplier.eval_with_bound(z);
        node_series = node_series.max(v.norm() - bound);
    }
    sol.diagnostics.insert("node_residual".into(), Check::new(node_exact, tol));
    sol.diagnostics
        .insert("node_series_excess".into(), Check::new(node_series.max(0.0), tol));
    let mismatch = check_bschurmult(&sol, BSCHURMULT_DEGREE)?;
    sol.diagnostics.insert("bschurmult".into(), Check::new(mismatch, tol));
    Ok(sol)
}

/// Builds and verifies the multiplier; fails with the names of any
/// residuals above tolerance.
pub fn solve(prob: &InterpProblem, degree: usize) -> Result<InterpSolution> {
    let sol = solve_unchecked(prob, degree, 1e-8)?;
    let bad = failures(&sol.diagnostics);
    if bad.is_empty() {
        Ok(sol)
    } else {
        Err(Error::Verification(bad))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blaschke::{product_build, PointZero, SphereZero, ZeroSet};
    use crate::kernels::{kernel_neg_squares, SamplingConfig};

    fn sphere(re: f64, im: f64) -> TwoSphere {
        TwoSphere::new(re, im).unwrap()
    }

    #[test]
    fn node_data_examples() {
        let (a, c) = build_node_data(&InterpProblem::new(vec![Quaternion::real(0.5)], vec![])).unwrap();
        assert_eq!(a, QMatrix::scalar(Quaternion::real(0.5)));
        assert_eq!(c, QMatrix::scalar(Quaternion::ONE));
        let (a, _) = build_node_data(&InterpProblem::new(vec![], vec![sphere(0.0, 0.5)])).unwrap();
        assert_eq!(a, QMatrix::diag(&[Quaternion::I * 0.5, -Quaternion::I * 0.5]));
        let (a, c) = build_node_data(&InterpProblem::new(vec![Quaternion::real(0.25)], vec![sphere(0.0, 0.5)])).unwrap();
        assert_eq!(a, QMatrix::diag(&[Quaternion::real(0.25), Quaternion::I * 0.5, -Quaternion::I * 0.5]));
        assert_eq!(c.cols(), 3);
    }

    #[test]
    fn node_data_rejects_bad_input() {
        let prob = InterpProblem::new(vec![Quaternion::J * 0.5], vec![sphere(0.0, 0.5)]);
        assert_eq!(build_node_data(&prob).unwrap_err(), Error::OverlappingSpheres { first: 0, second: 1 });
        let prob = InterpProblem::new(vec![Quaternion::real(0.9999999)], vec![]);
        assert!(matches!(build_node_data(&prob), Err(Error::NodeOutsideBall { index: 0, .. })));
    }

    #[test]
    fn gram_examples() {
        let one = QMatrix::scalar(Quaternion::ONE);
        let p = gram_p(&QMatrix::scalar(Quaternion::real(0.5)), &one).unwrap();
        assert!((p[(0, 0)].re() - 4.0 / 3.0).abs() < 1e-14);
        let p = gram_p(&QMatrix::scalar(Quaternion::I * 0.5), &one).unwrap();
        assert!((p[(0, 0)] - Quaternion::real(4.0 / 3.0)).norm() < 1e-14);
        let dup = QMatrix::diag(&[Quaternion::real(0.5), Quaternion::real(0.5)]);
        let row = QMatrix::row(&[Quaternion::ONE, Quaternion::ONE]);
        assert!(matches!(gram_p(&dup, &row), Err(Error::NotPD { .. })));
    }

    #[test]
    fn single_real_node_is_classical() {
        let sol = solve(&InterpProblem::new(vec![Quaternion::real(0.5)], vec![]), 64).unwrap();
        assert!((sol.d - Quaternion::real(0.5)).norm() < 1e-14);
        assert!((sol.b[(0, 0)] - Quaternion::real(-0.75)).norm() < 1e-14);
        // B = (1 - p/2)^-1 (1/2 - p) u with a unit u; here u = 1.
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..20 {
            let p = Quaternion::random_in_ball(&mut rng, 0.9);
            let classical = (Quaternion::ONE - p * 0.5).inverse().unwrap() * (Quaternion::real(0.5) - p);
            let u = classical.inverse().unwrap() * sol.eval(p).unwrap();
            assert!((u.norm() - 1.0).abs() < 1e-12);
            assert!((u - Quaternion::ONE).norm() < 1e-12);
            let i = ImagUnit::random(&mut rng);
            let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let boundary = Quaternion::real(t.cos()) + i.as_quaternion() * t.sin();
            assert!((sol.eval(boundary).unwrap().norm() - 1.0).abs() < 1e-10);
        }
        assert!(sol.eval(Quaternion::real(0.5)).unwrap().norm() < 1e-14);
    }

    #[test]
    fn origin_node_gives_shift() {
        let sol = solve(&InterpProblem::new(vec![Quaternion::ZERO], vec![]), 16).unwrap();
        let mut expected = vec![Quaternion::ZERO; 17];
        expected[1] = Quaternion::ONE;
        let diff = sol
            .multiplier
            .coeffs()
            .iter()
            .zip(&expected)
            .map(|(a, b)| (*a - *b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-14);
    }

    #[test]
    fn sphere_only_is_real_multiple_of_sphere_factor() {
        let sol = solve(&InterpProblem::new(vec![], vec![sphere(0.0, 0.5)]), 64).unwrap();
        assert!(sol.multiplier.is_slice_preserving_tol(1e-12));
        let factor = crate::blaschke::factor_sphere(&sphere(0.0, 0.5), 64).unwrap();
        let ratio = sol.multiplier.coeffs()[0].re() / factor.coeffs()[0].re();
        assert!((ratio.abs() - 1.0).abs() < 1e-12);
        for (a, b) in sol.multiplier.coeffs().iter().zip(factor.coeffs()) {
            assert!((*a - *b * ratio).norm() < 1e-12);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10 {
            let p = sphere(0.0, 0.5).point(ImagUnit::random(&mut rng));
            assert!(sol.eval(p).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn empty_problem_gives_one() {
        let sol = solve(&InterpProblem::default(), 8).unwrap();
        assert_eq!(sol.d, Quaternion::ONE);
        assert_eq!(sol.multiplier, LSeries::constant(Quaternion::ONE, 8));
        assert_eq!(check_bschurmult(&sol, 8).unwrap(), 0.0);
    }

    #[test]
    fn mixed_instance_end_to_end() {
        let prob = InterpProblem::canonical_mixed();
        let sol = solve(&prob, 64).unwrap();
        for (name, c) in &sol.diagnostics {
            assert!(c.pass, "{name}: {} > {}", c.value, c.tol);
        }
        assert!(check_bschurmult(&sol, 40).unwrap() <= 1e-8);

        // Products B * g satisfy the conditions.
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let pts = sol.check_points();
        for _ in 0..50 {
            let g = LSeries::new((0..=64).map(|n| Quaternion::random_box(&mut rng) * 0.5f64.powi(n)).collect()).unwrap();
            let f = sol.multiplier.star_mul(&g).unwrap();
            for &z in &pts {
                let (v, bound) = f.eval_with_bound(z);
                assert!(v.norm() <= bound + 1e-8);
            }
        }

        // The range of the multiplier is orthogonal to the node kernels.
        for u in 0..=20 {
            let shifted = LSeries::new((0..=64).map(|n| if n >= u { sol.multiplier.coeffs()[n - u] } else { Quaternion::ZERO }).collect()).unwrap();
            for &z in &pts {
                let k = LSeries::hardy_column(z, 64);
                let ip: Quaternion = shifted.coeffs().iter().zip(k.coeffs()).map(|(f, g)| g.conj() * *f).sum();
                assert!(ip.norm() <= 1e-8 + shifted.tail_bound(z.norm()));
            }
        }
    }

    #[test]
    fn schur_kernel_of_multiplier_is_positive() {
        let sol = solve(&InterpProblem::canonical_mixed(), 64).unwrap();
        let one = QMatrix::identity(1);
        let k = schur_kernel(&sol.multiplier.to_matrix_series(), &one, &one).unwrap();
        let ns = kernel_neg_squares(&k, &SamplingConfig { trials: 3, points: 50, ..Default::default() }).unwrap();
        assert_eq!(ns.kappa, 0);
    }

    #[test]
    fn iterative_product_has_the_same_zeros() {
        let prob = InterpProblem::canonical_mixed();
        let sol = solve(&prob, 64).unwrap();
        let zs = ZeroSet {
            points: prob.points.iter().map(|&a| PointZero::new(a, 1)).collect(),
            spheres: prob.spheres.iter().map(|&s| SphereZero::new(s, 1)).collect(),
        };
        let prod = product_build(&zs, 64).unwrap();
        for z in sol.check_points() {
            assert!(prod.eval_exact(z).unwrap().norm() < 1e-10);
            assert!(sol.eval(z).unwrap().norm() < 1e-10);
        }
        // Both are unimodular on the boundary, so they differ by a unit factor there.
        let p = Quaternion::new(0.6, 0.0, 0.8, 0.0);
        assert!((prod.eval_exact(p).unwrap().norm() - sol.eval(p).unwrap().norm()).abs() < 1e-10);
    }

    #[test]
    fn random_instances_verify() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for _ in 0..5 {
            let prob = InterpProblem::random(&mut rng, 3, 1);
            let sol = solve(&prob, 64).unwrap();
            assert!(sol.is_verified());
        }
    }

    #[test]
    fn problem_json() {
        let text = r#"{"points":[[0.5,0,0,0]],"spheres":[{"re":0.0,"im":0.5}]}"#;
        let prob: InterpProblem = serde_json::from_str(text).unwrap();
        assert_eq!(prob.points[0], Quaternion::real(0.5));
        assert_eq!(prob.spheres[0].im_norm, 0.5);
    }
}
