use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use slice_schur::blaschke::{factor_point, factor_point_closed};
use slice_schur::kernels::hardy_kernel;
use slice_schur::qlinalg::{solve_stein, stein_residual, QMatrix};
use slice_schur::realize::random_isometry;
use slice_schur::{ImagUnit, LSeries, Quaternion};

fn quat(r: f64) -> impl Strategy<Value = Quaternion> {
    prop::array::uniform4(-r..r).prop_map(Quaternion::from_array)
}

fn in_ball(r: f64) -> impl Strategy<Value = Quaternion> {
    quat(1.0).prop_map(move |q| if q.norm() > 0.0 { q * (r * q.norm().min(1.0) / q.norm()) } else { q })
}

fn unit_dir() -> impl Strategy<Value = ImagUnit> {
    prop::array::uniform3(-1.0..1.0f64)
        .prop_filter("non-zero direction", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-4)
        .prop_map(|[x, y, z]| ImagUnit::new(x, y, z).unwrap())
}

fn series(len: usize) -> impl Strategy<Value = LSeries> {
    prop::collection::vec(quat(1.0), len).prop_map(|c| LSeries::from_quaternions(&c).unwrap())
}

fn matrix(n: usize) -> impl Strategy<Value = QMatrix> {
    prop::collection::vec(quat(1.0), n * n).prop_map(move |v| QMatrix::from_vec(n, n, v).unwrap())
}

fn max_diff(a: &LSeries, b: &LSeries) -> f64 {
    a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| (*x - *y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_is_multiplicative(p in quat(2.0), q in quat(2.0)) {
        prop_assert!(((p * q).norm() - p.norm() * q.norm()).abs() <= 1e-12 * (1.0 + p.norm() * q.norm()));
    }

    #[test]
    fn conjugation_reverses_products(p in quat(2.0), q in quat(2.0)) {
        prop_assert!(((p * q).conj() - q.conj() * p.conj()).norm() <= 1e-12);
    }

    #[test]
    fn decomposition_reconstructs(p in quat(2.0)) {
        prop_assume!(p.im_norm() > 1e-6);
        let f = p.decompose().unwrap();
        prop_assert!((f.reconstruct() - p).norm() <= 1e-12);
        prop_assert!(f.im_norm >= 0.0);
    }

    #[test]
    fn complex_adjoint_is_multiplicative(a in matrix(3), b in matrix(3)) {
        let lhs = (&a * &b).complex_adjoint();
        let rhs = a.complex_adjoint() * b.complex_adjoint();
        prop_assert!((lhs - rhs).camax() <= 1e-12);
    }

    #[test]
    fn star_product_is_associative(f in series(8), g in series(8), h in series(8)) {
        let l = f.star_mul(&g).unwrap().star_mul(&h).unwrap();
        let r = f.star_mul(&g.star_mul(&h).unwrap()).unwrap();
        prop_assert!(max_diff(&l, &r) <= 1e-12);
    }

    #[test]
    fn conj_series_reverses_star_products(f in series(8), g in series(8)) {
        let l = f.star_mul(&g).unwrap().conj_series();
        let r = g.conj_series().star_mul(&f.conj_series()).unwrap();
        prop_assert!(max_diff(&l, &r) <= 1e-12);
    }

    #[test]
    fn symmetrization_is_real(f in series(10)) {
        prop_assert!(f.symmetrize().is_slice_preserving_tol(1e-12));
    }

    #[test]
    fn pointwise_product_formula(f in series(6), g in series(6), p in in_ball(0.9)) {
        let fp = f.eval(p);
        prop_assume!(fp.norm() > 1e-3);
        let expected = fp * g.eval(fp.inverse().unwrap() * p * fp);
        // Polynomials of degree 5: the truncated product drops degrees 6..10.
        let full = |s: &LSeries| {
            let mut c = s.coeffs().to_vec();
            c.resize(11, Quaternion::ZERO);
            LSeries::from_quaternions(&c).unwrap()
        };
        let got = full(&f).star_mul(&full(&g)).unwrap().eval(p);
        prop_assert!((got - expected).norm() <= 1e-10 * (1.0 + expected.norm()));
    }

    #[test]
    fn slice_values_determine_the_function(f in series(6), p in in_ball(0.9), i in unit_dir()) {
        let ext = slice_schur::series::ext_from_slice(i, p, |z| f.eval(z));
        prop_assert!((ext - f.eval(p)).norm() <= 1e-10 * (1.0 + f.max_coeff()));
    }

    #[test]
    fn hardy_kernel_is_hermitian(p in in_ball(0.9), q in in_ball(0.9)) {
        let k = hardy_kernel(p, q).unwrap();
        let kt = hardy_kernel(q, p).unwrap();
        prop_assert!((k.conj() - kt).norm() <= 1e-12 * k.norm().max(1.0));
    }

    #[test]
    fn blaschke_factor_is_inner(a in in_ball(0.9), theta in 0.0..std::f64::consts::TAU, i in unit_dir()) {
        prop_assume!(a.norm() > 1e-3);
        let u = Quaternion::real(theta.cos()) + i.as_quaternion() * theta.sin();
        prop_assert!((factor_point_closed(a, u).unwrap().norm() - 1.0).abs() <= 1e-10);
        prop_assert!(factor_point_closed(a, a).unwrap().norm() <= 1e-12);
    }

    #[test]
    fn blaschke_series_matches_closed_form(a in in_ball(0.8), p in in_ball(0.6)) {
        prop_assume!(a.norm() > 1e-3);
        let b = factor_point(a, 96).unwrap();
        let (v, bound) = b.eval_with_bound(p);
        prop_assert!((v - factor_point_closed(a, p).unwrap()).norm() <= bound + 1e-10);
    }

    #[test]
    fn neg_squares_are_congruence_invariant(d in prop::collection::vec(-2.0..2.0f64, 4), seed in any::<u64>()) {
        prop_assume!(d.iter().all(|x| x.abs() > 1e-3));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_isometry(&mut rng, 4, 4, false).unwrap();
        let diag = QMatrix::diag(&d.iter().map(|&x| Quaternion::real(x)).collect::<Vec<_>>());
        let g = &(&u * &diag) * &u.adjoint();
        let expected = d.iter().filter(|&&x| x < 0.0).count();
        prop_assert_eq!(g.neg_squares(1e-9).unwrap(), expected);
        let (plus, minus) = g.spectral_split(1e-9).unwrap();
        prop_assert!((&(&plus - &minus) - &g).max_abs() <= 1e-10);
        prop_assert_eq!(minus.rank(1e-9), expected);
    }

    #[test]
    fn stein_solution_has_small_residual(a in matrix(3), scale in 0.1..0.9f64, c in matrix(3)) {
        let rho = a.spectral_radius();
        prop_assume!(rho > 1e-6);
        let a = a.scale(scale / rho);
        let q = &c.adjoint() * &c;
        let p = solve_stein(&a, &q, 1e-13).unwrap();
        prop_assert!(stein_residual(&a, &p, &q) <= 1e-9 * (1.0 + q.max_abs()));
    }

    #[test]
    fn matrix_json_round_trip_is_exact(a in matrix(2)) {
        let text = serde_json::to_string(&a).unwrap();
        let back: QMatrix = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, a);
    }
}
