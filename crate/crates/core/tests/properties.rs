use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rpflm::funspace::center_response;
use rpflm::rng::stream;
use rpflm::rptest::{fdr_combine, process_statistic};
use rpflm::simlab::{run_study, StudyConfig};
use rpflm::{center, compute_fpc, estimate_rho, test_flm, FunctionalSample, Grid, TestConfig};

fn brute_force(proj: &[f64], marks: &[f64]) -> (f64, f64) {
    let n = proj.len() as f64;
    let t = |x: f64| {
        proj.iter()
            .zip(marks)
            .filter(|(p, _)| **p <= x)
            .map(|(_, m)| m)
            .sum::<f64>()
            / n.sqrt()
    };
    let ks = proj.iter().map(|&x| t(x).abs()).fold(0.0, f64::max);
    let cvm = proj.iter().map(|&x| t(x).powi(2)).sum::<f64>() / n;
    (ks, cvm)
}

fn sample(n: usize, g: usize, seed: u64) -> (FunctionalSample, Vec<f64>) {
    let grid = Grid::equidistant(g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for _ in 0..n {
        let c: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let row: Vec<f64> = grid
            .points()
            .iter()
            .map(|t| c[0] + c[1] * t + c[2] * (5.0 * t).sin() + c[3] * t * t)
            .collect();
        y.push(c[1] - c[2] + 0.3 * rng.random_range(-1.0..1.0));
        rows.push(row);
    }
    (FunctionalSample::from_rows(grid, &rows).unwrap(), y)
}

proptest! {
    #[test]
    fn statistic_matches_definition(
        cells in prop::collection::vec((0i32..4, -3.0f64..3.0), 1..9)
    ) {
        let proj: Vec<f64> = cells.iter().map(|c| c.0 as f64 * 0.5).collect();
        let marks: Vec<f64> = cells.iter().map(|c| c.1).collect();
        let s = process_statistic(&proj, &marks).unwrap();
        let (ks, cvm) = brute_force(&proj, &marks);
        prop_assert!((s.ks - ks).abs() < 1e-12);
        prop_assert!((s.cvm - cvm).abs() < 1e-12);
    }

    #[test]
    fn fdr_is_between_min_and_k_min(p in prop::collection::vec(0.0f64..=1.0, 1..30)) {
        let f = fdr_combine(&p).unwrap();
        let min = p.iter().cloned().fold(1.0, f64::min);
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!(f >= min - 1e-15);
        prop_assert!(f <= (p.len() as f64 * min).min(1.0) + 1e-15);
        let max = p.iter().cloned().fold(0.0, f64::max);
        prop_assert!(f <= max + 1e-15);
    }

    #[test]
    fn fdr_is_monotone(p in prop::collection::vec(0.0f64..=1.0, 2..10), i in 0usize..10, bump in 0.0f64..0.5) {
        let i = i % p.len();
        let mut q = p.clone();
        q[i] = (q[i] + bump).min(1.0);
        prop_assert!(fdr_combine(&q).unwrap() >= fdr_combine(&p).unwrap());
    }

    #[test]
    fn inner_product_is_symmetric_and_bilinear(
        f in prop::collection::vec(-5.0f64..5.0, 11),
        g in prop::collection::vec(-5.0f64..5.0, 11),
        a in -3.0f64..3.0,
    ) {
        let grid = Grid::equidistant(11).unwrap();
        let fg = grid.dot(&f, &g).unwrap();
        prop_assert!((fg - grid.dot(&g, &f).unwrap()).abs() < 1e-12);
        let af: Vec<f64> = f.iter().map(|v| a * v).collect();
        prop_assert!((grid.dot(&af, &g).unwrap() - a * fg).abs() < 1e-10);
        prop_assert!(grid.dot(&f, &f).unwrap() >= 0.0);
    }

    #[test]
    fn hat_map_is_a_projection(seed in 0u64..500, d in 1usize..5) {
        let (x, y) = sample(20, 21, seed);
        let (xc, _) = center(&x);
        let (yc, _) = center_response(&y);
        let basis = compute_fpc(&xc, 4).unwrap();
        let fit = estimate_rho(&xc, &yc, &basis, d.min(basis.rank())).unwrap();
        let hy = fit.hat_apply(&yc).unwrap();
        let hhy = fit.hat_apply(&hy).unwrap();
        for (a, b) in hy.iter().zip(&hhy) {
            prop_assert!((a - b).abs() < 1e-8);
        }
        for (h, f) in hy.iter().zip(fit.fitted()) {
            prop_assert!((h - f).abs() < 1e-8);
        }
    }
}

#[test]
fn pvalues_are_invariant_to_doubling_the_response() {
    let (x, y) = sample(40, 31, 9);
    let y2: Vec<f64> = y.iter().map(|v| 2.0 * v).collect();
    let cfg = TestConfig {
        bootstrap: 300,
        rank: Some(3),
        seed: 4,
        ..TestConfig::default()
    };
    let a = test_flm(&x, &y, &cfg).unwrap();
    let b = test_flm(&x, &y2, &cfg).unwrap();
    assert_eq!(a.pvalues(), b.pvalues());
    for (ra, rb) in a.per_projection.iter().zip(&b.per_projection) {
        assert!((rb.statistic - 4.0 * ra.statistic).abs() <= 1e-12 * rb.statistic.max(1.0));
    }
}

#[test]
fn fdr_controls_uniform_pvalues() {
    let m = 2000;
    for k in [1usize, 5, 25] {
        let mut rng = stream(77, &[k as u64]);
        for alpha in [0.01, 0.05, 0.10] {
            let rejections = (0..m)
                .filter(|_| {
                    let p: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
                    fdr_combine(&p).unwrap() < alpha
                })
                .count() as f64
                / m as f64;
            let se = (alpha * (1.0 - alpha) / m as f64).sqrt();
            assert!(rejections <= alpha + 3.0 * se, "K={k} alpha={alpha}: {rejections}");
        }
    }
}

#[test]
fn study_results_do_not_depend_on_threads() {
    let cfg = StudyConfig {
        scenarios: vec![1, 7],
        deviations: vec![0, 1],
        sizes: vec![25],
        trials: 8,
        test: TestConfig {
            bootstrap: 60,
            ..TestConfig::default()
        },
        seed: 3,
        timing: false,
    };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_study(&cfg).unwrap())
    };
    assert_eq!(run(1), run(4));
}
