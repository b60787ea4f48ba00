use circspline::bayes::{bayes_inner, clr_inverse, clr_transform, perturb, ClrCurve, DensityCurve, Grid};
use circspline::circstats::{trig_moment, von_mises_kde, von_mises_pdf, wrap_angle, CircularSample};
use circspline::fosreg::{bootstrap_bands, fit_fos, RegressionDataset};
use circspline::smoothfit::{
    objective_pspline, objective_smoothing, solve_pspline, solve_smoothing, FitProblem, PSplineConfig,
    SmoothingConfig,
};
use circspline::splinecore::{
    bspline_basis, collocation_matrix, matrix_k, matrix_p, matrix_u, spline_integral, KnotConfig,
    PeriodicSplineZ,
};
use circspline::{DMatrix, DVector};
use proptest::prelude::*;
use std::f64::consts::{PI, TAU};

/// Random knot configuration: 4 ≤ g ≤ 12, 1 ≤ k ≤ 4, g ≥ k + 1, uneven spacing.
fn knot_config() -> impl Strategy<Value = KnotConfig> {
    (4usize..=12, 1usize..=4)
        .prop_filter("g >= k + 1", |(g, k)| g > k)
        .prop_flat_map(|(g, k)| {
            (Just(g), Just(k), -3.0..3.0f64, 0.5..8.0f64, prop::collection::vec(0.2..1.0f64, g + 1))
        })
        .prop_map(|(_, k, a, width, gaps)| {
            let total: f64 = gaps.iter().sum();
            let mut acc = 0.0;
            let inner: Vec<f64> = gaps[..gaps.len() - 1]
                .iter()
                .map(|gap| {
                    acc += gap;
                    a + width * acc / total
                })
                .collect();
            KnotConfig::new(a, a + width, k, inner).unwrap()
        })
}

fn knots_and_coeffs() -> impl Strategy<Value = (KnotConfig, Vec<f64>)> {
    knot_config().prop_flat_map(|cfg| {
        let g = cfg.g();
        (Just(cfg), prop::collection::vec(-5.0..5.0f64, g))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dimensions((cfg, _) in knots_and_coeffs()) {
        let (g, k) = (cfg.g(), cfg.degree());
        let kk = matrix_k(g, k).unwrap();
        prop_assert_eq!(kk.shape(), (g + k + 1, g + 1));
        prop_assert_eq!(matrix_p(&cfg).shape(), (g + 1, g));
        prop_assert_eq!(matrix_u(&cfg).shape(), (g + k + 1, g));
        prop_assert_eq!(bspline_basis(&cfg, cfg.a()).unwrap().len(), g + k + 1);
    }

    #[test]
    fn partition_of_unity((cfg, _) in knots_and_coeffs(), u in 0.0..=1.0f64) {
        let x = cfg.a() + u * (cfg.b() - cfg.a());
        let sum: f64 = bspline_basis(&cfg, x).unwrap().iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn periodic_and_zero_integral((cfg, b) in knots_and_coeffs()) {
        let scale = 1.0 + b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let s = PeriodicSplineZ::from_slice(cfg.clone(), &b).unwrap();
        for l in 0..cfg.degree() {
            let jump = s.eval_derivative(cfg.a(), l).unwrap() - s.eval_derivative(cfg.b(), l).unwrap();
            prop_assert!(jump.abs() <= 1e-9 * scale, "l={} jump={}", l, jump);
        }
        let full = matrix_u(&cfg) * DVector::from_vec(b.clone());
        prop_assert!(spline_integral(full.as_slice(), &cfg).unwrap().abs() <= 1e-10 * scale);
    }

    #[test]
    fn derivative_matches_finite_difference((cfg, b) in knots_and_coeffs(), u in 0.05..0.95f64) {
        prop_assume!(cfg.degree() >= 2);
        let s = PeriodicSplineZ::from_slice(cfg.clone(), &b).unwrap();
        let x = cfg.a() + u * (cfg.b() - cfg.a());
        // keep the stencil inside one polynomial piece
        prop_assume!(cfg.inner_knots().iter().all(|t| (t - x).abs() > 1e-4));
        let h = 1e-6;
        let fd = (s.eval(x + h).unwrap() - s.eval(x - h).unwrap()) / (2.0 * h);
        let d = s.eval_derivative(x, 1).unwrap();
        prop_assert!((fd - d).abs() <= 1e-5 * d.abs().max(1.0), "{} vs {}", fd, d);
    }

    #[test]
    fn folded_basis_equals_k_path((cfg, _) in knots_and_coeffs(), u in 0.0..=1.0f64) {
        let (g, k) = (cfg.g(), cfg.degree());
        let x = cfg.a() + u * (cfg.b() - cfg.a());
        let basis = bspline_basis(&cfg, x).unwrap();
        let via_k = collocation_matrix(&cfg, &[x]).unwrap() * matrix_k(g, k).unwrap();
        for i in 0..=g {
            // periodic index i ↔ full index i - k; the first k fold onto the last k
            let mut folded = basis[i];
            if i < k {
                folded += basis[g + 1 + i];
            }
            prop_assert!((folded - via_k[(0, i)]).abs() <= 1e-13);
        }
    }

    #[test]
    fn clr_isometry_and_linearity(
        c1 in prop::collection::vec(-1.0..1.0f64, 3),
        c2 in prop::collection::vec(-1.0..1.0f64, 3),
    ) {
        let grid = Grid::circular(100).unwrap();
        let mk = |c: &[f64]| DensityCurve::from_fn(grid.clone(), |x| {
            (c[0] * x.cos() + c[1] * (2.0 * x).sin() + c[2] * (3.0 * x).cos()).exp()
        }).unwrap();
        let (f, g) = (mk(&c1), mk(&c2));
        let (zf, zg) = (clr_transform(&f), clr_transform(&g));
        // double-integral form of the Bayes inner product
        let (p, w) = (grid.points(), grid.widths());
        let mut brute = 0.0;
        for i in 0..p.len() {
            for j in 0..p.len() {
                brute += w[i] * w[j]
                    * (f.values()[i] / f.values()[j]).ln()
                    * (g.values()[i] / g.values()[j]).ln();
            }
        }
        brute /= 2.0 * grid.eta();
        prop_assert!((brute - zf.dot(&zg).unwrap()).abs() <= 1e-6);
        prop_assert!((bayes_inner(&f, &g).unwrap() - brute).abs() <= 1e-6);

        let zfg = clr_transform(&perturb(&f, &g).unwrap());
        for t in 0..grid.len() {
            prop_assert!((zfg.values()[t] - zf.values()[t] - zg.values()[t]).abs() <= 1e-9);
        }
        prop_assert!(zfg.integral().abs() <= 1e-10);

        let back = clr_transform(&clr_inverse(&zf));
        for t in 0..grid.len() {
            prop_assert!((back.values()[t] - zf.values()[t]).abs() <= 1e-8);
        }
        for c in [0.1, 1.0, 37.0] {
            let zc = clr_transform(&f.scaled(c).unwrap());
            for t in 0..grid.len() {
                prop_assert!((zc.values()[t] - zf.values()[t]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn circular_rotation(
        angles in prop::collection::vec(0.0..TAU, 1..50),
        phi in -10.0..10.0f64,
    ) {
        let s = CircularSample::new(angles).unwrap();
        let m0 = trig_moment(&s, 1);
        let m1 = trig_moment(&s.rotated(phi), 1);
        prop_assert!((m0.resultant_length - m1.resultant_length).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&m0.resultant_length));
        if m0.resultant_length > 1e-6 {
            let (d0, d1) = (m0.direction.unwrap(), m1.direction.unwrap());
            let diff = wrap_angle(d1 - d0 - phi);
            prop_assert!(diff.min(TAU - diff) <= 1e-12 / m0.resultant_length.min(1.0) + 1e-12);
        }
        for p in 2..4 {
            let r = trig_moment(&s, p).resultant_length;
            prop_assert!((0.0..=1.0 + 1e-15).contains(&r));
        }
    }

    #[test]
    fn von_mises_symmetry(mu in 0.0..TAU, kappa in 0.0..200.0f64, delta in 0.0..PI) {
        let p = von_mises_pdf(mu + delta, mu, kappa).unwrap();
        let q = von_mises_pdf(mu - delta, mu, kappa).unwrap();
        prop_assert!((p - q).abs() <= 1e-12 * p.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn fits_are_coordinate_minima(
        ys in prop::collection::vec(-2.0..2.0f64, 36),
        t in -4.0..6.0f64,
        log_rho in -3.0..3.0f64,
        l in 1usize..=2,
        cyclic in any::<bool>(),
    ) {
        let knots = KnotConfig::circular(3, 9).unwrap();
        let xs: Vec<f64> = (0..36).map(|i| (i as f64 + 0.5) * TAU / 36.0).collect();
        let p = FitProblem::new(xs, ys, knots).unwrap();

        let c = SmoothingConfig::new(1.0 / (1.0 + (-t).exp()), l).unwrap();
        let fit = solve_smoothing(&p, &c).unwrap();
        let b = fit.spline.coeffs_reduced();
        let j0 = objective_smoothing(&p, &c, b).unwrap();
        let cp = PSplineConfig::new(10f64.powf(log_rho), l).unwrap().cyclic(cyclic);
        let fitp = solve_pspline(&p, &cp).unwrap();
        let bp = fitp.spline.coeffs_reduced();
        let jp = objective_pspline(&p, &cp, bp).unwrap();
        for i in 0..9 {
            for eps in [1e-4, -1e-4] {
                let mut e = DVector::zeros(9);
                e[i] = eps;
                prop_assert!(objective_smoothing(&p, &c, &(b + &e)).unwrap() >= j0);
                prop_assert!(objective_pspline(&p, &cp, &(bp + &e)).unwrap() >= jp);
            }
        }
        for s in [&fit.spline, &fitp.spline] {
            prop_assert!(s.integral().abs() <= 1e-10 * (1.0 + s.coeffs_reduced().amax()));
            for l in 0..3 {
                let jump = s.eval_derivative(0.0, l).unwrap() - s.eval_derivative(TAU, l).unwrap();
                prop_assert!(jump.abs() <= 1e-9 * (1.0 + s.coeffs_reduced().amax()));
            }
        }
        prop_assert!(fit.sse >= 0.0 && fit.hat_trace > 0.0 && fit.hat_trace < 36.0);
        prop_assert!(fitp.sse >= 0.0 && fitp.hat_trace > 0.0 && fitp.hat_trace < 36.0);
    }

    #[test]
    fn regression_invariants(seed in any::<u64>(), n in 8usize..40) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let knots = KnotConfig::circular(3, 9).unwrap();
        let x = DMatrix::from_fn(n, 3, |i, j| match j { 0 => 1.0, 1 => i as f64, _ => rng.random::<f64>() });
        let b = DMatrix::from_fn(n, 9, |_, _| rng.random::<f64>() - 0.5);
        let ds = RegressionDataset::new(b.clone(), x.clone(), knots).unwrap();
        let m = fit_fos(&ds).unwrap();
        let lhs = x.transpose() * &x * m.beta();
        let rhs = x.transpose() * &b;
        prop_assert!((&lhs - &rhs).norm() <= 1e-9 * rhs.norm().max(1.0));
        prop_assert!((x.transpose() * m.residuals()).amax() <= 1e-9);
        for j in 0..3 {
            let s = m.coefficient_spline(j).unwrap();
            prop_assert!(s.integral().abs() <= 1e-10 * (1.0 + s.coeffs_reduced().amax()));
        }
        let grid = Grid::circular(36).unwrap();
        let a = bootstrap_bands(&m, &ds, 100, 0.95, seed, &grid).unwrap();
        let a2 = bootstrap_bands(&m, &ds, 100, 0.95, seed, &grid).unwrap();
        prop_assert_eq!(format!("{:?}", a.lower), format!("{:?}", a2.lower));
        prop_assert_eq!(format!("{:?}", a.upper), format!("{:?}", a2.upper));
    }
}

#[test]
fn kde_normalizes_for_reference_bandwidths() {
    let s = CircularSample::new([0.1, 0.2, 1.5, 3.0, 3.1, 5.9]).unwrap();
    let grid = Grid::circular(3600).unwrap();
    for kappa in [1.0, 10.0, 40.0, 120.0] {
        let f = von_mises_kde(&s, kappa, &grid).unwrap();
        assert!((f.integral() - 1.0).abs() < 1e-8, "kappa {kappa}: {}", f.integral());
    }
}

#[test]
fn clr_curves_from_operations_integrate_to_zero() {
    let grid = Grid::circular(64).unwrap();
    let z = ClrCurve::centered(grid.clone(), (0..64).map(|i| (i as f64).sqrt()).collect()).unwrap();
    let w = z.scale(3.0).add(&z).unwrap();
    assert!(w.integral().abs() < 1e-10);
}
