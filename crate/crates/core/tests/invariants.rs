use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spd_radial::geometry::tangent_basis;
use spd_radial::sample;
use spd_radial::*;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn direction(rng: &mut ChaCha8Rng, m: usize, cond: f64) -> BoundaryDirection {
    let p = sample::spd(rng, m, cond);
    let z = sample::unit_tangent(rng, &p);
    BoundaryDirection::new(p, z).unwrap()
}

fn frob(a: &SymmetricMatrix, b: &SymmetricMatrix) -> f64 {
    (a.as_matrix() - b.as_matrix()).norm()
}

/// Riemannian gradient of `f` at `x` by central differences along geodesics.
fn fd_gradient(x: &SpdPoint, h: f64, f: impl Fn(&SpdPoint) -> f64) -> SymmetricMatrix {
    let mut g = DMatrix::zeros(x.dim(), x.dim());
    for e in tangent_basis(x) {
        let plus = exp_map(x, &e.scale(h)).unwrap();
        let minus = exp_map(x, &e.scale(-h)).unwrap();
        g += e.as_matrix() * ((f(&plus) - f(&minus)) / (2.0 * h));
    }
    SymmetricMatrix::from_matrix(g).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distance_is_symmetric_and_satisfies_triangle(seed in any::<u64>(), m in 1usize..=5) {
        let mut r = rng(seed);
        let a = sample::spd(&mut r, m, 1e3);
        let b = sample::spd(&mut r, m, 1e3);
        let c = sample::spd(&mut r, m, 1e3);
        let ab = distance(&a, &b).unwrap();
        prop_assert!((ab - distance(&b, &a).unwrap()).abs() <= 1e-10);
        let bc = distance(&b, &c).unwrap();
        let ac = distance(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-10);
    }

    #[test]
    fn distance_is_affine_invariant(seed in any::<u64>(), m in 1usize..=5) {
        let mut r = rng(seed);
        let a = sample::spd(&mut r, m, 1e2);
        let b = sample::spd(&mut r, m, 1e2);
        let g = sample::invertible(&mut r, m, 10.0);
        let moved = distance(&a.congruence(&g).unwrap(), &b.congruence(&g).unwrap()).unwrap();
        prop_assert!((moved - distance(&a, &b).unwrap()).abs() <= 1e-8);
    }

    #[test]
    fn log_inverts_exp(seed in any::<u64>(), m in 1usize..=5, scale in 0.01f64..10.0) {
        let mut r = rng(seed);
        let x = sample::spd(&mut r, m, 10.0);
        let v = sample::symmetric(&mut r, m, 1.0);
        let v = v.scale(scale / v.frobenius_norm().max(1e-300));
        let back = log_map(&x, &exp_map(&x, &v).unwrap()).unwrap();
        // the stored endpoint resolves its small eigenvalues only to ε·e^{spread}
        let white = x.inv_sqrt() * v.as_matrix() * x.inv_sqrt();
        let ev = white.symmetric_eigenvalues();
        let conditioning = 64.0 * f64::EPSILON * (ev.max() - ev.min()).exp();
        let bound = f64::max(1e-9, conditioning) * (1.0 + scale);
        prop_assert!(frob(&back, &v) <= bound, "err {} bound {}", frob(&back, &v), bound);
    }

    #[test]
    fn squared_log_norm_is_squared_distance(seed in any::<u64>(), m in 1usize..=5) {
        let mut r = rng(seed);
        let x = sample::spd(&mut r, m, 1e3);
        let p = sample::spd(&mut r, m, 1e3);
        let l = log_map(&x, &p).unwrap();
        let d = distance(&x, &p).unwrap();
        prop_assert!((metric_inner(&x, &l, &l).unwrap() - d * d).abs() <= 1e-9 * (1.0 + d * d));
    }

    #[test]
    fn radial_field_has_unit_norm(seed in any::<u64>(), m in 1usize..=6) {
        let mut r = rng(seed);
        let xi = direction(&mut r, m, 1e3);
        let x = sample::spd(&mut r, m, 1e3);
        let f = radial_field(&xi, &x).unwrap();
        prop_assert!((metric_inner(&x, &f, &f).unwrap() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn radial_field_ignores_base_shift_along_ray(seed in any::<u64>(), m in 2usize..=4) {
        let mut r = rng(seed);
        let xi = direction(&mut r, m, 1e2);
        let x = sample::spd(&mut r, m, 1e2);
        let f = radial_field(&xi, &x).unwrap();
        for s in [0.5, 2.0, 10.0] {
            let shifted = xi.rebased_along_ray(s).unwrap();
            let g = radial_field(&shifted, &x).unwrap();
            prop_assert!(frob(&f, &g) <= 1e-7, "s={} err={}", s, frob(&f, &g));
        }
    }

    #[test]
    fn radial_field_is_congruence_equivariant(seed in any::<u64>(), m in 1usize..=4) {
        let mut r = rng(seed);
        let xi = direction(&mut r, m, 1e2);
        let x = sample::spd(&mut r, m, 1e2);
        let g = sample::invertible(&mut r, m, 10.0);
        let moved = radial_field(&xi.congruence(&g).unwrap(), &x.congruence(&g).unwrap()).unwrap();
        let expected = radial_field(&xi, &x).unwrap().congruence(&g).unwrap();
        prop_assert!(frob(&moved, &expected) <= 1e-7 * (1.0 + expected.frobenius_norm()));
    }

    #[test]
    fn radial_field_ignores_eigenbasis_choice(seed in any::<u64>(), angle in 0.0f64..6.3, flip in any::<bool>()) {
        let mut r = rng(seed);
        let p = sample::spd(&mut r, 3, 1e2);
        // whitened direction with a repeated top eigenvalue
        let q = sample::orthogonal(&mut r, 3);
        let d = nalgebra::DVector::from_vec(vec![0.5, 0.5, -1.0 / 2f64.sqrt()]);
        let whitened = &q * DMatrix::from_diagonal(&d) * q.transpose();
        let z = SymmetricMatrix::from_matrix(p.sqrt() * whitened * p.sqrt()).unwrap();
        let xi = BoundaryDirection::new(p, z).unwrap();
        let v = &xi.spectrum().eigenvectors;
        let (c, s) = (angle.cos(), angle.sin());
        let mut rotated = v.clone();
        rotated.set_column(0, &(v.column(0) * c + v.column(1) * s));
        rotated.set_column(1, &(v.column(1) * c - v.column(0) * s));
        if flip {
            rotated.column_mut(2).neg_mut();
        }
        let other = xi.with_eigenbasis(rotated).unwrap();
        let x = sample::spd(&mut r, 3, 1e2);
        let a = radial_field(&xi, &x).unwrap();
        let b = radial_field(&other, &x).unwrap();
        prop_assert!(frob(&a, &b) <= 1e-8);
    }

    #[test]
    fn power_mean_converges_between_t50_and_t200(seed in any::<u64>(), m in 2usize..=4) {
        let mut r = rng(seed);
        let w = sample::invertible(&mut r, m, 3.0);
        let mut d: Vec<f64> = (0..m).map(|j| 1.0 - 0.4 * j as f64).collect();
        d.iter_mut().for_each(|v| *v += 0.05 * rand::Rng::random_range(&mut r, -1.0..1.0));
        let u = gram_schmidt(&w).unwrap().into_inner();
        let err = |t: f64| {
            let h = power_mean_finite(&d, &w, t).unwrap().value;
            let eig = eig_sym(&h).unwrap();
            let rel = (0..m).map(|j| (eig.eigenvalues[j] / d[j].exp() - 1.0).abs()).fold(0.0, f64::max);
            let res: Vec<f64> = (0..m)
                .map(|j| (h.as_matrix() * u.column(j) - u.column(j) * d[j].exp()).norm())
                .collect();
            (rel, res)
        };
        let (rel50, res50) = err(50.0);
        let (rel200, res200) = err(200.0);
        prop_assert!(rel200 < rel50);
        for j in 0..m {
            prop_assert!(res200[j] < res50[j], "j={} {} vs {}", j, res200[j], res50[j]);
        }
    }

    #[test]
    fn oracle_error_decreases_in_t(seed in any::<u64>(), m in 2usize..=3) {
        let mut r = rng(seed);
        let xi = direction(&mut r, m, 1e2);
        let x = sample::spd(&mut r, m, 1e2);
        let f = radial_field(&xi, &x).unwrap();
        let errs: Vec<f64> = [25.0, 50.0, 100.0, 200.0]
            .iter()
            .map(|&t| frob(&radial_field_oracle(&xi, &x, t).unwrap(), &f))
            .collect();
        prop_assert!(errs[3] < errs[0], "{:?}", errs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn busemann_gradient_is_negative_radial_field(seed in any::<u64>(), m in 2usize..=3) {
        let mut r = rng(seed);
        let xi = direction(&mut r, m, 1e2);
        let x = sample::spd(&mut r, m, 1e2);
        let tol = 1e-5;
        let g = fd_gradient(&x, 1e-3, |y| busemann(&xi, y, tol).unwrap());
        let expected = radial_field(&xi, &x).unwrap().scale(-1.0);
        let err = metric_norm(&x, &g.sub(&expected).unwrap()).unwrap();
        prop_assert!(err <= f64::max(1e-4, 10.0 * tol), "err {}", err);
    }

    #[test]
    fn quantile_is_congruence_equivariant(seed in any::<u64>(), beta in 0.0f64..0.9) {
        let mut r = rng(seed);
        let data = Dataset::new((0..12).map(|_| sample::spd(&mut r, 2, 20.0)).collect()).unwrap();
        let xi = direction(&mut r, 2, 5.0);
        let g = sample::invertible(&mut r, 2, 10.0);
        let cfg = OptimizerConfig::default();
        let fit = quantile(&data, &QuantileIndex::new(beta, xi.clone()).unwrap(), &cfg).unwrap();
        let moved = quantile(
            &data.congruence(&g).unwrap(),
            &QuantileIndex::new(beta, xi.congruence(&g).unwrap()).unwrap(),
            &cfg,
        )
        .unwrap();
        let expected = fit.point.congruence(&g).unwrap();
        prop_assert!(distance(&moved.point, &expected).unwrap() <= 1e-5);
    }

    #[test]
    fn zero_beta_quantile_matches_median(seed in any::<u64>()) {
        let mut r = rng(seed);
        let data = Dataset::new((0..15).map(|_| sample::spd(&mut r, 3, 20.0)).collect()).unwrap();
        let xi = direction(&mut r, 3, 5.0);
        let cfg = OptimizerConfig::default();
        let q = quantile(&data, &QuantileIndex::new(0.0, xi).unwrap(), &cfg).unwrap();
        let med = frechet_median(&data, &cfg).unwrap();
        prop_assert!((q.loss - med.loss).abs() <= 1e-9);
    }

    #[test]
    fn scalar_quantiles_increase_with_beta(seed in any::<u64>(), b1 in 0.0f64..0.95, b2 in 0.0f64..0.95) {
        let mut r = rng(seed);
        let data = Dataset::new((0..17).map(|_| sample::spd(&mut r, 1, 50.0)).collect()).unwrap();
        let up = BoundaryDirection::new(SpdPoint::identity(1), SymmetricMatrix::identity(1)).unwrap();
        let cfg = OptimizerConfig::default();
        let (lo, hi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
        let qlo = quantile(&data, &QuantileIndex::new(lo, up.clone()).unwrap(), &cfg).unwrap();
        let qhi = quantile(&data, &QuantileIndex::new(hi, up).unwrap(), &cfg).unwrap();
        prop_assert!(qlo.point.as_matrix()[(0, 0)] <= qhi.point.as_matrix()[(0, 0)] * (1.0 + 1e-9));
    }

    #[test]
    fn treatment_effect_round_trips(seed in any::<u64>(), m in 1usize..=5) {
        let mut r = rng(seed);
        let c = sample::spd(&mut r, m, 1e3);
        let t = sample::spd(&mut r, m, 1e3);
        let te = individual_treatment_effect(&TreatmentPair::new(c.clone(), t.clone()).unwrap()).unwrap();
        let dir = te.direction.unwrap();
        let back = exp_map(&c, &dir.dir().scale(te.magnitude)).unwrap();
        prop_assert!((back.as_matrix() - t.as_matrix()).norm() <= 1e-9 * (1.0 + t.as_matrix().norm()));
    }
}
