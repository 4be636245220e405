use rand::Rng;
use rand_distr::StandardNormal;
use zeroloss_core::docmodel::learning_curve;
use zeroloss_core::fitting::{
    eta_grid, fit_curve, fitted_curve, profile_objective, random_choice_error, CurvePoint, Weighting,
};
use zeroloss_core::seed::rng;
use zeroloss_core::Error;

const GRID: [f64; 16] = [
    10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0, 2000.0, 5000.0, 10000.0, 15000.0, 20000.0, 25000.0, 30000.0,
    40000.0, 50000.0,
];

/// `(name, e_min, eta, mnist)`; every row has e0 = 0.9.
const TABLE: [(&str, f64, f64, bool); 6] = [
    ("MNIST ResNet018", 0.0035, 65.0, true),
    ("MNIST ResNet101", 0.003, 60.0, true),
    ("CIFAR-10 MLP3", 0.363, 4700.0, false),
    ("CIFAR-10 MLP8", 0.360, 6000.0, false),
    ("CIFAR-10 ResNet018", 0.095, 4000.0, false),
    ("CIFAR-10 ResNet101", 0.067, 3700.0, false),
];

fn grid(mnist: bool) -> Vec<f64> {
    let mut g = GRID.to_vec();
    if mnist {
        g.push(60000.0);
    }
    g
}

fn synthetic(e_min: f64, eta: f64, e0: f64, ns: &[f64]) -> Vec<CurvePoint> {
    ns.iter()
        .map(|&n| CurvePoint::new(n, learning_curve(n, e_min, eta, e0)))
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn table_rows_round_trip() {
    for (name, e_min, eta, mnist) in TABLE {
        let points = synthetic(e_min, eta, 0.9, &grid(mnist));
        let fit = fit_curve(&points, None).unwrap();
        assert!(rel(fit.e_min, e_min) < 1e-6, "{name}: e_min {}", fit.e_min);
        assert!(rel(fit.eta, eta) < 1e-6, "{name}: eta {}", fit.eta);
        assert!(rel(fit.e0, 0.9) < 1e-6, "{name}: e0 {}", fit.e0);
        let fixed = fit_curve(&points, Some(0.9)).unwrap();
        assert!(
            rel(fixed.e_min, e_min) < 1e-6 && rel(fixed.eta, eta) < 1e-6,
            "{name} fixed"
        );
    }
}

#[test]
fn noisy_table_rows_recover_e_min() {
    for (name, e_min, eta, mnist) in TABLE {
        let ns = grid(mnist);
        let mut good = 0;
        for seed in 0..100 {
            let mut r = rng(seed);
            let points: Vec<CurvePoint> = ns
                .iter()
                .map(|&n| {
                    let noise: f64 = r.sample(StandardNormal);
                    CurvePoint::new(n, (learning_curve(n, e_min, eta, 0.9) + 1e-3 * noise).clamp(0.0, 1.0))
                })
                .collect();
            let fit = fit_curve(&points, None).unwrap();
            if (fit.e_min - e_min).abs() < 1e-2 {
                good += 1;
            }
        }
        assert!(good >= 95, "{name}: {good}/100");
    }
}

#[test]
fn refined_optimum_beats_every_grid_point() {
    let mut r = rng(5);
    let points: Vec<CurvePoint> = grid(false)
        .iter()
        .map(|&n| {
            let noise: f64 = r.sample(StandardNormal);
            CurvePoint::new(n, learning_curve(n, 0.095, 4000.0, 0.9) + 1e-3 * noise)
        })
        .collect();
    for e0 in [None, Some(0.9)] {
        let fit = fit_curve(&points, e0).unwrap();
        let objective = profile_objective(&points, e0, &eta_grid());
        assert!(objective.iter().all(|&v| fit.rss <= v), "{e0:?}");
        let direct: f64 = points.iter().map(|p| (fit.model(p.n) - p.mean_error).powi(2)).sum();
        assert!((direct - fit.rss).abs() <= 1e-12 * direct.max(1e-300));
    }
}

#[test]
fn residuals_and_weighting() {
    let mut points = synthetic(0.1, 300.0, 0.9, &[10.0, 100.0, 1000.0, 5000.0]);
    points[1].mean_error += 0.01;
    let fit = fit_curve(&points, None).unwrap();
    assert_eq!(fit.weighting, Weighting::Unweighted);
    let rss: f64 = fit.residuals.iter().map(|r| r * r).sum();
    assert!((rss - fit.rss).abs() < 1e-15);
    for (p, r) in points.iter().zip(&fit.residuals) {
        assert!((fit.model(p.n) - p.mean_error - r).abs() < 1e-15);
    }

    for p in &mut points {
        p.std_error = Some(0.5);
    }
    points[1].std_error = Some(1e-4);
    let weighted = fit_curve(&points, None).unwrap();
    assert_eq!(weighted.weighting, Weighting::InverseVariance);
    // The tight point is matched much more closely than without weights.
    assert!(weighted.residuals[1].abs() < 0.1 * fit.residuals[1].abs());
}

#[test]
fn fitted_curve_shape() {
    let fit = fit_curve(&synthetic(0.0035, 65.0, 0.9, &grid(true)), Some(0.9)).unwrap();
    let rows = fitted_curve(&fit, &[0.0, 1e6, 2e6]);
    assert!((rows[0].model - fit.e0).abs() < 1e-15);
    let slope = (rows[2].log_deviation.unwrap() - rows[1].log_deviation.unwrap())
        / (rows[2].log_n.unwrap() - rows[1].log_n.unwrap());
    assert!((slope + 1.0).abs() < 1e-3, "{slope}");
    // Model is decreasing when e0 > e_min.
    let dense = fitted_curve(&fit, &(0..200).map(|k| 1.1f64.powi(k)).collect::<Vec<_>>());
    assert!(dense.windows(2).all(|w| w[1].model < w[0].model));
}

#[test]
fn refitting_the_fitted_curve_is_idempotent() {
    let mut r = rng(17);
    let points: Vec<CurvePoint> = grid(false)
        .iter()
        .map(|&n| {
            let noise: f64 = r.sample(StandardNormal);
            CurvePoint::new(n, learning_curve(n, 0.067, 3700.0, 0.9) + 2e-3 * noise)
        })
        .collect();
    let fit = fit_curve(&points, None).unwrap();
    let curve: Vec<CurvePoint> = fitted_curve(&fit, &grid(false))
        .into_iter()
        .map(|row| CurvePoint::new(row.n, row.model))
        .collect();
    let again = fit_curve(&curve, None).unwrap();
    assert!(rel(again.e_min, fit.e_min) < 1e-6);
    assert!(rel(again.eta, fit.eta) < 1e-6);
    assert!(rel(again.e0, fit.e0) < 1e-6);
}

#[test]
fn classes_give_random_choice_error() {
    assert_eq!(random_choice_error(10), 0.9);
    let fit = fit_curve(
        &synthetic(0.2, 50.0, 0.5, &[5.0, 80.0, 900.0]),
        Some(random_choice_error(2)),
    )
    .unwrap();
    assert_eq!(fit.e0, 0.5);
    assert!(fit.e0_fixed);
}

#[test]
fn preconditions() {
    let one = [CurvePoint::new(100.0, 0.5)];
    assert!(matches!(
        fit_curve(&one, Some(0.9)),
        Err(Error::InsufficientData { .. })
    ));
    let same = [CurvePoint::new(100.0, 0.5), CurvePoint::new(100.0, 0.4)];
    assert_eq!(fit_curve(&same, Some(0.9)), Err(Error::Degenerate));
    let two = [CurvePoint::new(10.0, 0.5), CurvePoint::new(100.0, 0.4)];
    assert!(matches!(
        fit_curve(&two, None),
        Err(Error::InsufficientData { needed: 3, .. })
    ));
    assert!(fit_curve(&[CurvePoint::new(10.0, 1.5); 3], None).is_err());
    assert!(fit_curve(&two, Some(1.5)).is_err());
}
