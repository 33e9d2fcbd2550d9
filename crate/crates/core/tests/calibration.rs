use cvf_core::cvf::{
    assemble_lp, calibrate, mc_discrepancy_bound, refine_with_trail, sample_mixture, summarize, BaselineMeasure,
    CvfSettings, Grid, MixtureDraw, RefineConfig, Statistic, TStatistic,
};
use cvf_core::limit::{simulate_limit_draw, LimitReading};
use cvf_core::model::{scaling_g, Cov2, Deterministic};

const KIND: Deterministic = Deterministic::Intercept;

fn draws(grid: &Grid, cov: &Cov2, j: usize, seed: u64) -> Vec<MixtureDraw> {
    let settings = CvfSettings::new(0.1);
    let g = scaling_g(grid.center(), grid.sample_len());
    sample_mixture(grid, cov, KIND, j, seed)
        .into_iter()
        .map(|(s, component)| {
            let design = summarize(&s, cov, &TStatistic::new(KIND), grid.center(), g, &settings).unwrap();
            MixtureDraw { component, psi: design.psi, design }
        })
        .collect()
}

#[test]
fn mixture_components_are_equally_likely() {
    let grid = Grid::per_t(vec![-30.0, -10.0, 0.0, 10.0], 50).unwrap();
    let j = 100_000;
    let mut counts = [0usize; 4];
    for (_, c) in sample_mixture(&grid, &Cov2::unit(0.5).unwrap(), KIND, j, 3) {
        counts[c] += 1;
    }
    let expect = j as f64 / 4.0;
    let sd = (j as f64 * 0.25 * 0.75).sqrt();
    for c in counts {
        assert!((c as f64 - expect).abs() < 4.0 * sd, "{counts:?}");
    }
}

#[test]
fn importance_weights_average_to_one() {
    let grid = Grid::per_t(vec![-20.0, -5.0, 0.0, 5.0], 100).unwrap();
    let cov = Cov2::unit(0.9).unwrap();
    let d = draws(&grid, &cov, 20_000, 4);
    let lp = assemble_lp(&d, &grid, 0.1, BaselineMeasure::NuStar).unwrap();
    for row in 0..lp.rows() {
        let sum: f64 = (0..lp.cols()).map(|c| lp.entry(row, c)).sum();
        assert!((sum - 1.0).abs() < 0.05, "row {row}: {sum}");
    }
    // each column of ν* weights averages to exactly one
    for c in 0..lp.cols() {
        let avg = lp.column(c).iter().sum::<f64>() * lp.cols() as f64 / lp.rows() as f64;
        assert!((avg - 1.0).abs() < 1e-12, "col {c}: {avg}");
    }
}

#[test]
fn single_point_gives_the_empirical_quantile() {
    let grid = Grid::per_t(vec![-5.0], 100).unwrap();
    let cov = Cov2::unit(-0.5).unwrap();
    let j = 1005;
    let stat = TStatistic::new(KIND);
    let mut psi: Vec<f64> = sample_mixture(&grid, &cov, KIND, j, 8)
        .iter()
        .map(|(s, _)| stat.eval(s, &cov).unwrap())
        .collect();
    psi.sort_by(|a, b| b.total_cmp(a));
    let q = psi[100];
    let cal = calibrate(&grid, &cov, j, 8, &stat, &CvfSettings::new(0.1)).unwrap();
    assert!((cal.model.k()[0] - q).abs() <= 1e-12 * q.abs().max(1.0));
    // under ν† the threshold moves with the draw, but the size is still met
    for measure in [BaselineMeasure::NuStar, BaselineMeasure::NuDagger] {
        let settings = CvfSettings { measure, ..CvfSettings::new(0.1) };
        let cal = calibrate(&grid, &cov, j, 8, &stat, &settings).unwrap();
        assert!((cal.in_sample[0] - 0.1).abs() <= 1.0 / j as f64, "{measure:?}: {}", cal.in_sample[0]);
    }
}

#[test]
fn calibration_is_reproducible_across_thread_counts() {
    let grid = Grid::per_t(vec![-40.0, -10.0, 10.0], 60).unwrap();
    let cov = Cov2::unit(0.8).unwrap();
    let stat = TStatistic::new(KIND);
    let settings = CvfSettings::new(0.1);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| calibrate(&grid, &cov, 6000, 17, &stat, &settings).unwrap().model)
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(1));
}

#[test]
fn too_few_draws_are_rejected() {
    let grid = Grid::per_t(vec![-10.0, 0.0, 5.0], 60).unwrap();
    let err = calibrate(&grid, &Cov2::unit(0.0).unwrap(), 299, 1, &TStatistic::new(KIND), &CvfSettings::new(0.1));
    assert!(err.is_err());
}

#[test]
fn loose_tolerance_stops_immediately() {
    let grid = Grid::per_t(vec![-50.0, 20.0], 60).unwrap();
    let cfg = RefineConfig {
        check: vec![-50.0, -20.0, 0.0, 20.0],
        epsilon: 0.5,
        calib_draws: 4000,
        check_draws: 500,
        max_iter: 5,
        seed: 2,
    };
    let out = refine_with_trail(&grid, &Cov2::unit(0.9).unwrap(), &TStatistic::new(KIND), &CvfSettings::new(0.1), &cfg)
        .unwrap();
    assert!(out.converged);
    assert_eq!(out.added_points(), 0);
    assert_eq!(out.trail.len(), 1);
}

#[test]
fn refinement_grows_the_grid_one_point_at_a_time() {
    let grid = Grid::per_t(vec![-50.0, 20.0], 60).unwrap();
    let cfg = RefineConfig {
        check: vec![-50.0, -30.0, -10.0, 0.0, 10.0, 20.0],
        epsilon: 0.001,
        calib_draws: 4000,
        check_draws: 500,
        max_iter: 3,
        seed: 2,
    };
    let out = refine_with_trail(&grid, &Cov2::unit(-0.9).unwrap(), &TStatistic::new(KIND), &CvfSettings::new(0.1), &cfg)
        .unwrap();
    assert!(!out.converged);
    for (i, r) in out.trail.iter().enumerate() {
        assert_eq!(r.offsets.len(), 2 + i);
        if let Some(c) = r.added {
            assert!(!r.offsets.contains(&c));
            assert!(out.trail[i + 1].offsets.contains(&c));
        }
    }
    assert!(out.trail.len() <= cfg.max_iter + 1);
}

#[test]
fn discrepancy_bound_shrinks_with_draws_and_tolerance() {
    let a = mc_discrepancy_bound(2_000, 0.1, 0.015);
    let b = mc_discrepancy_bound(10_000, 0.1, 0.015);
    let c = mc_discrepancy_bound(10_000, 0.1, 0.02);
    assert!(a > b && b > c && c >= 0.0);
}

#[test]
fn limit_means_are_insensitive_to_discretisation() {
    let m = 10_000;
    let stats = |steps: usize| {
        let v: Vec<(f64, f64)> = (0..m)
            .map(|i| {
                let d = simulate_limit_draw(0.0, 0.3, steps, i as u64, LimitReading::Consistent);
                (d.r_beta, d.k_betabeta)
            })
            .collect();
        let mean = |f: fn(&(f64, f64)) -> f64| v.iter().map(f).sum::<f64>() / m as f64;
        let sd = |f: fn(&(f64, f64)) -> f64| {
            let mu = mean(f);
            (v.iter().map(|x| (f(x) - mu).powi(2)).sum::<f64>() / (m - 1) as f64 / m as f64).sqrt()
        };
        (mean(|x| x.0), sd(|x| x.0), mean(|x| x.1), sd(|x| x.1))
    };
    let (rb1, se_rb, kb1, se_kb) = stats(1000);
    let (rb2, _, kb2, _) = stats(2000);
    // martingale integral has mean zero
    assert!(rb1.abs() < 3.0 * se_rb, "E[R_b] = {rb1}");
    // the two runs use independent paths, so their difference has √2 times the error
    let tol = 3.0 * std::f64::consts::SQRT_2;
    assert!((rb1 - rb2).abs() < tol * se_rb);
    assert!((kb1 - kb2).abs() < tol * se_kb);
}
