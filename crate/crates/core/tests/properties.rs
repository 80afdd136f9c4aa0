use laguerre_needlets::io::format_g17;
use laguerre_needlets::kernels::{dual_default_pair, lambda_kernel, tight_default_pair, CutoffSpec};
use laguerre_needlets::needlets::{build_system, CoeffFn, NeedletCoeffs, NeedletSystem};
use laguerre_needlets::quadrature::cubature_grid;
use laguerre_needlets::spaces::cells::{maximal_fn, CellGrid, PiecewiseCellFn};
use laguerre_needlets::spaces::{b_norm_seq, f_norm_seq, multiplier_apply, NormParams};
use laguerre_needlets::special_fn::{laguerre_fn_batch, laguerre_fn_f};
use laguerre_needlets::{AlphaVector, LaguerreFamily};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

fn system_1d() -> &'static NeedletSystem {
    static S: OnceLock<NeedletSystem> = OnceLock::new();
    S.get_or_init(|| build_system(3, &AlphaVector::uniform(0.5, 1).unwrap(), &tight_default_pair(), 0.03, 1.0).unwrap())
}

fn system_2d() -> &'static NeedletSystem {
    static S: OnceLock<NeedletSystem> = OnceLock::new();
    S.get_or_init(|| build_system(2, &AlphaVector::new(vec![0.0, 1.0]).unwrap(), &dual_default_pair(), 0.03, 1.0).unwrap())
}

fn random_coeffs(sys: &NeedletSystem, seed: u64) -> NeedletCoeffs {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = CoeffFn::random_complex(sys.alpha(), sys.top_degree(), &mut rng).unwrap();
    sys.analyze(&f).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn batch_matches_single_evaluation(n in 0usize..80, alpha in 0.0f64..3.0, x in 0.0f64..15.0) {
        let batch = laguerre_fn_batch(n as i64, alpha, x, LaguerreFamily::F).unwrap();
        let single = laguerre_fn_f(n, alpha, x).unwrap();
        prop_assert!((batch[n] - single).abs() <= 1e-13 * (1.0 + single.abs()));
    }

    #[test]
    fn kernel_is_symmetric(n in 1usize..48, x in prop::collection::vec(0.0f64..8.0, 2), y in prop::collection::vec(0.0f64..8.0, 2)) {
        let alpha = AlphaVector::new(vec![0.5, 2.0]).unwrap();
        let a = CutoffSpec::type_a(1.0).unwrap();
        let kxy = lambda_kernel(n, &alpha, &a, &x, &y).unwrap();
        let kyx = lambda_kernel(n, &alpha, &a, &y, &x).unwrap();
        prop_assert!((kxy - kyx).abs() <= 1e-12 * (1.0 + kxy.abs()));
    }

    #[test]
    fn grid_locates_its_own_nodes(j in 0u32..4, alpha in 0.0f64..2.0, pick in 0.0f64..1.0) {
        let grid = cubature_grid(j, &AlphaVector::uniform(alpha, 2).unwrap(), 0.03, 1.0).unwrap();
        let idx = ((grid.len() - 1) as f64 * pick) as usize;
        prop_assert_eq!(grid.locate(&grid.point(idx)), Some(idx));
        prop_assert!(grid.tile(idx).contains(&grid.point(idx)));
    }

    #[test]
    fn analysis_is_linear(seed in any::<u64>(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let sys = system_2d();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = CoeffFn::random_complex(sys.alpha(), sys.top_degree(), &mut rng).unwrap();
        let g = CoeffFn::random_complex(sys.alpha(), sys.top_degree(), &mut rng).unwrap();
        let c = Complex64::new(re, im);
        let lhs = sys.analyze(&f.linear_combination(c, &g, Complex64::new(1.0, 0.0)).unwrap()).unwrap();
        let (af, ag) = (sys.analyze(&f).unwrap(), sys.analyze(&g).unwrap());
        for ((l, a), b) in lhs.levels.iter().flatten().zip(af.levels.iter().flatten()).zip(ag.levels.iter().flatten()) {
            prop_assert!((l - (c * a + b)).norm() < 1e-11);
        }
    }

    #[test]
    fn sequence_norms_are_homogeneous(seed in any::<u64>(), c in 0.01f64..100.0, s in -1.0f64..2.0, p in 0.5f64..4.0, q in 0.5f64..4.0) {
        let sys = system_1d();
        let h = random_coeffs(sys, seed);
        let mut scaled = h.clone();
        scaled.levels.iter_mut().flatten().for_each(|v| *v *= c);
        let params = NormParams::new(s, 0.5, p, q).unwrap();
        let f0 = f_norm_seq(&h, &params, sys).unwrap();
        let b0 = b_norm_seq(&h, &params, sys).unwrap();
        prop_assert!((f_norm_seq(&scaled, &params, sys).unwrap() / (c * f0) - 1.0).abs() < 1e-12);
        prop_assert!((b_norm_seq(&scaled, &params, sys).unwrap() / (c * b0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sequence_norms_satisfy_the_triangle_inequality(seed in any::<u64>(), p in 1.0f64..4.0, q in 1.0f64..4.0) {
        let sys = system_1d();
        let (g, h) = (random_coeffs(sys, seed), random_coeffs(sys, seed.wrapping_add(1)));
        let mut sum = g.clone();
        for (a, b) in sum.levels.iter_mut().flatten().zip(h.levels.iter().flatten()) {
            *a += b;
        }
        let params = NormParams::new(0.5, -0.5, p, q).unwrap();
        for norm in [f_norm_seq, b_norm_seq] {
            let lhs = norm(&sum, &params, sys).unwrap();
            prop_assert!(lhs <= norm(&g, &params, sys).unwrap() + norm(&h, &params, sys).unwrap() + 1e-10);
        }
    }

    #[test]
    fn f_norm_is_monotone_in_q(seed in any::<u64>(), p in 0.5f64..4.0, q in 0.5f64..3.0) {
        let sys = system_2d();
        let h = random_coeffs(sys, seed);
        let lo = f_norm_seq(&h, &NormParams::new(0.0, 0.0, p, q).unwrap(), sys).unwrap();
        let hi = f_norm_seq(&h, &NormParams::new(0.0, 0.0, p, q + 1.0).unwrap(), sys).unwrap();
        prop_assert!(hi <= lo * (1.0 + 1e-12));
    }

    #[test]
    fn maximal_function_dominates_and_is_monotone(vals in prop::collection::vec(-5.0f64..5.0, 12), bump in prop::collection::vec(0.0f64..1.0, 12), t in 0.5f64..3.0) {
        let cells = CellGrid::new(&AlphaVector::uniform(0.5, 1).unwrap(), vec![(0..=12).map(|k| k as f64 * 0.5).collect()]).unwrap();
        let f = PiecewiseCellFn::new(cells.clone(), vals.clone()).unwrap();
        let g = PiecewiseCellFn::new(cells, vals.iter().zip(&bump).map(|(v, b)| v.abs() + b).collect()).unwrap();
        let (mf, mg) = (maximal_fn(&f, t).unwrap(), maximal_fn(&g, t).unwrap());
        for ((m, v), n) in mf.values.iter().zip(&vals).zip(&mg.values) {
            prop_assert!(*m >= v.abs() * (1.0 - 1e-12));
            prop_assert!(*n >= *m * (1.0 - 1e-12));
        }
    }

    #[test]
    fn multipliers_compose(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = CoeffFn::random_complex(&AlphaVector::uniform(0.0, 2).unwrap(), 12, &mut rng).unwrap();
        let m1 = move |n: usize| Complex64::new(1.0 + a * n as f64, 0.0);
        let m2 = move |n: usize| Complex64::new(0.0, b).exp() / (1.0 + n as f64);
        let lhs = multiplier_apply(m1, &multiplier_apply(m2, &f));
        let rhs = multiplier_apply(move |n| m1(n) * m2(n), &f);
        prop_assert!(lhs.max_coeff_diff(&rhs).unwrap() < 1e-13);
        prop_assert!(multiplier_apply(|_| Complex64::new(1.0, 0.0), &f).max_coeff_diff(&f).unwrap() == 0.0);
    }

    #[test]
    fn g17_round_trips(x in any::<f64>()) {
        let s = format_g17(x);
        if x.is_finite() {
            prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn coefficient_json_round_trips(seed in any::<u64>(), n in 0usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = CoeffFn::random_complex(&AlphaVector::new(vec![0.5, 1.5]).unwrap(), n, &mut rng).unwrap();
        let back: CoeffFn = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        prop_assert_eq!(back.max_coeff_diff(&f).unwrap(), 0.0);
        prop_assert_eq!(back.max_degree(), f.max_degree());
    }
}

/// The cell-arrangement integral agrees with a weighted Monte-Carlo estimate within 3 standard errors.
#[test]
fn f_norm_matches_monte_carlo() {
    use rand::Rng;
    let sys = system_1d();
    let alpha = 0.5f64;
    let (s, rho, p, q) = (0.5, 0.25, 1.5, 3.0);
    for set in 0..5u64 {
        let h = random_coeffs(sys, 100 + set);
        let exact = f_norm_seq(&h, &NormParams::new(s, rho, p, q).unwrap(), sys).unwrap().powf(p);
        // per level: sorted tiles (lower, upper, height)
        let levels: Vec<Vec<(f64, f64, f64)>> = (0..=sys.max_level())
            .map(|j| {
                let grid = sys.grid(j).unwrap();
                let nw = 4f64.powi(j as i32);
                (0..grid.len())
                    .map(|i| {
                        let tile = grid.tile(i);
                        let (a, b) = (tile.lower[0], tile.upper[0]);
                        let mu = (b.powf(2.0 * alpha + 2.0) - a.powf(2.0 * alpha + 2.0)) / (2.0 * alpha + 2.0);
                        let w = (grid.point(i)[0] + nw.powf(-0.5)).powf(2.0 * alpha + 1.0);
                        let height = 2f64.powf(s * j as f64) * w.powf(-rho) * mu.powf(-0.5) * h.levels[j][i].norm();
                        (a, b, height)
                    })
                    .collect()
            })
            .collect();
        let top = levels.iter().flatten().map(|t| t.1).fold(0.0, f64::max);
        let mut rng = ChaCha8Rng::seed_from_u64(set);
        let samples = 1_000_000;
        let (mut sum, mut sum2) = (0.0, 0.0);
        for _ in 0..samples {
            let x = rng.random_range(0.0..top);
            let inner: f64 = levels
                .iter()
                .filter_map(|l| {
                    let k = l.partition_point(|t| t.1 <= x);
                    (k < l.len() && l[k].0 <= x).then(|| l[k].2.powf(q))
                })
                .sum();
            let g = inner.powf(p / q) * x.powf(2.0 * alpha + 1.0) * top;
            sum += g;
            sum2 += g * g;
        }
        let n = samples as f64;
        let mean = sum / n;
        let se = ((sum2 / n - mean * mean) / n).sqrt();
        assert!((mean - exact).abs() < 3.0 * se, "set {set}: estimate {mean} +- {se}, exact {exact}");
    }
}
