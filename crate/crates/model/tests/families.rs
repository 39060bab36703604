//! Cross-family checks: the full training protocol on a synthetic capacity
//! surface, artifact round-trips, and honesty checks on the fold reports.

use fncap_model::{
    decode_model, encode_model, fit_family, fit_ridge, kfold_cv, load_model, preprocess,
    r2_score, save_model, train_with_grid_search, Dataset, DnnConfig, DnnInit, Family,
    FamilyConfig, ForestConfig, ModelParams, DEFAULT_LAMBDAS,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A smooth five-feature response with a mild interaction and 1% noise,
/// shaped like the telemetry the trainer sees in production: instances,
/// duration, allocation, usage, concurrency limit against throughput.
fn capacity_surface(rows: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(rows);
    let mut y = Vec::with_capacity(rows);
    for _ in 0..rows {
        let instances: f64 = rng.random_range(1.0..40.0);
        let duration: f64 = rng.random_range(50.0..400.0);
        let alloc: f64 = *[256.0, 512.0, 1024.0, 2048.0, 4096.0][..]
            .get(rng.random_range(0..5))
            .unwrap();
        let usage = alloc * rng.random_range(0.55..0.65);
        let limit: f64 = rng.random_range(10.0..50.0);

        let base = 90.0 * instances - 2.0 * duration + 0.004 * alloc + 0.001 * usage
            + 6.0 * limit
            + 0.12 * instances * limit;
        let noise = base.abs().max(1.0) * rng.random_range(-0.01..0.01);
        x.push(vec![instances, duration, alloc, usage, limit]);
        y.push(base + noise);
    }
    Dataset::new(x, y).unwrap()
}

/// Small network so the integration suite stays quick; the default
/// architecture gets its workout in the end-to-end capacity tests.
fn quick_dnn() -> FamilyConfig {
    FamilyConfig::Dnn(DnnConfig {
        hidden_layers: 3,
        hidden_width: 16,
        max_epochs: 250,
        patience: 40,
        ..DnnConfig::default()
    })
}

#[test]
fn every_family_learns_a_smooth_capacity_surface() {
    let split = preprocess(&capacity_surface(240, 1), 7).unwrap();

    let mut scores = Vec::new();
    for config in [
        FamilyConfig::Linear,
        FamilyConfig::Polynomial { degree: 2 },
        FamilyConfig::Ridge { lambda: 1e-2 },
        FamilyConfig::Forest(ForestConfig::default()),
        quick_dnn(),
    ] {
        let model = fit_family(&split.train, &config, 7).unwrap();
        let predicted = model.predict_all(&split.test.x);
        let r2 = r2_score(&split.test.y, &predicted).unwrap();
        scores.push((config.family(), r2));
    }

    for (family, r2) in &scores {
        assert!(*r2 > 0.75, "{family} scored test R^2 {r2}, expected above 0.75: {scores:?}");
    }
    // The near-linear surface should be essentially solved by the linear
    // families in particular.
    assert!(scores[0].1 > 0.99, "linear scored {}", scores[0].1);
    assert!(scores[1].1 > 0.99, "polynomial scored {}", scores[1].1);
}

#[test]
fn grid_searched_training_beats_the_mean_predictor_out_of_sample() {
    let split = preprocess(&capacity_surface(180, 2), 11).unwrap();
    for family in [Family::Linear, Family::Polynomial, Family::Ridge, Family::Forest] {
        let model = train_with_grid_search(family, &split.train, 6, 11).unwrap();
        assert!(!model.fold_scores.is_empty(), "{family} should carry fold scores");
        let r2 = r2_score(&split.test.y, &model.predict_all(&split.test.x)).unwrap();
        assert!(r2 > 0.5, "{family} scored {r2} out of sample");
    }
}

#[test]
fn clean_data_selects_the_unpenalized_ridge() {
    // On an exactly linear target every positive penalty can only hurt, so
    // the ascending default grid must settle on lambda = 0.
    let x: Vec<Vec<f64>> = (0..60).map(|i| vec![i as f64, (i % 7) as f64]).collect();
    let y: Vec<f64> = x.iter().map(|r| 4.0 * r[0] - 2.0 * r[1] + 3.0).collect();
    let data = Dataset::new(x, y).unwrap();
    let model = fit_ridge(&data, &DEFAULT_LAMBDAS, 6, 5).unwrap();
    let ModelParams::Ridge { lambda, .. } = model.params else { unreachable!() };
    assert_eq!(lambda, 0.0);
}

#[test]
fn fold_reports_are_reproducible_from_their_own_indices() {
    // Refitting on exactly the rows a fold claims it used must reproduce
    // the fold's score bit for bit; anything else would mean the report
    // lies about what the fold model saw.
    let data = capacity_surface(90, 3);
    let report = kfold_cv(&data, &FamilyConfig::Linear, 6, 13).unwrap();
    for fold in &report.folds {
        let model = fit_family(&data.select(&fold.train_indices), &FamilyConfig::Linear, 13)
            .unwrap();
        let val = data.select(&fold.val_indices);
        let r2 = r2_score(&val.y, &model.predict_all(&val.x)).unwrap();
        assert_eq!(r2, fold.r2, "fold {} is not reproducible", fold.fold);
    }
}

#[test]
fn fold_normalization_is_fit_inside_the_fold() {
    // The fold model's standardization must come from the fold's training
    // rows alone. With one fold holding all the large values, its training
    // mean differs measurably from the full-data mean.
    let data = capacity_surface(60, 4);
    let report = kfold_cv(&data, &FamilyConfig::Linear, 6, 17).unwrap();
    let full_mean: f64 = data.y.iter().sum::<f64>() / data.len() as f64;
    for fold in &report.folds {
        let model =
            fit_family(&data.select(&fold.train_indices), &FamilyConfig::Linear, 17).unwrap();
        let fold_mean: f64 = fold.train_indices.iter().map(|&i| data.y[i]).sum::<f64>()
            / fold.train_indices.len() as f64;
        assert_ne!(fold_mean, full_mean, "fold {} saw the full data", fold.fold);
        // And the model's feature means match its own training rows, not
        // the full dataset's.
        let expect: f64 = fold.train_indices.iter().map(|&i| data.x[i][0]).sum::<f64>()
            / fold.train_indices.len() as f64;
        assert!((model.norm.means[0] - expect).abs() < 1e-9);
    }
}

#[test]
fn zero_init_network_training_curve_descends() {
    // With zero initialization the hidden units are dead, so the net is a
    // single learnable constant; its MAE must fall strictly while that
    // constant crawls toward the target median.
    let x: Vec<Vec<f64>> = (0..60).map(|i| vec![i as f64]).collect();
    let y: Vec<f64> = (0..60).map(|i| (i as f64) * (i as f64)).collect();
    let data = Dataset::new(x, y).unwrap();
    let config = DnnConfig {
        hidden_layers: 2,
        hidden_width: 8,
        max_epochs: 12,
        patience: 50,
        init: DnnInit::Zero,
        ..DnnConfig::default()
    };
    let model = fit_family(&data, &FamilyConfig::Dnn(config), 9).unwrap();
    let ModelParams::Dnn { curve, .. } = &model.params else { unreachable!() };
    assert!(curve.len() >= 10);
    for pair in curve[..10].windows(2) {
        assert!(pair[1] < pair[0], "training MAE should fall every early epoch: {curve:?}");
    }
}

#[test]
fn artifacts_reproduce_predictions_exactly_for_every_family() {
    let split = preprocess(&capacity_surface(120, 5), 23).unwrap();
    let probes: Vec<Vec<f64>> = split.test.x.iter().take(10).cloned().collect();

    for config in [
        FamilyConfig::Linear,
        FamilyConfig::Polynomial { degree: 2 },
        FamilyConfig::Ridge { lambda: 0.1 },
        FamilyConfig::Forest(ForestConfig { trees: 20, ..ForestConfig::default() }),
        quick_dnn(),
    ] {
        let mut model = fit_family(&split.train, &config, 23).unwrap();
        fncap_model::evaluate_on_test(&mut model, &split.test).unwrap();

        let json = encode_model(&model).unwrap();
        let restored = decode_model::<f64>(&json).unwrap();
        assert_eq!(restored.family, model.family);
        assert_eq!(restored.test_r2, model.test_r2);
        for probe in &probes {
            assert_eq!(
                model.predict(probe),
                restored.predict(probe),
                "{} drifted through its artifact",
                model.family
            );
        }
    }
}

#[test]
fn saved_model_files_round_trip_through_disk() {
    let split = preprocess(&capacity_surface(90, 6), 29).unwrap();
    let model = fit_family(&split.train, &FamilyConfig::Linear, 29).unwrap();

    let path = std::env::temp_dir().join(format!("fncap-model-{}.json", std::process::id()));
    save_model(&model, &path).unwrap();
    let restored = load_model::<f64>(&path).unwrap();
    std::fs::remove_file(&path).ok();

    for probe in split.test.x.iter().take(5) {
        assert_eq!(model.predict(probe), restored.predict(probe));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Denormalized coefficients must describe the very same hyperplane the
    /// model predicts with in normalized space.
    #[test]
    fn raw_coefficients_match_normalized_predictions(
        seed in 0u64..1000,
        slope_a in -5.0f64..5.0,
        slope_b in -5.0f64..5.0,
        intercept in -10.0f64..10.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..25)
            .map(|_| vec![rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)])
            .collect();
        let y: Vec<f64> =
            x.iter().map(|r| slope_a * r[0] + slope_b * r[1] + intercept).collect();
        let data = Dataset::new(x, y).unwrap();

        let model = fncap_model::fit_linear(&data).unwrap();
        let (b0, slopes) = model.raw_linear_coefficients().unwrap();
        for probe in [[0.0, 0.0], [3.0, -4.0], [-7.5, 2.5]] {
            let by_coefficients = b0 + slopes[0] * probe[0] + slopes[1] * probe[1];
            let by_model = model.predict(&probe);
            let scale = by_model.abs().max(1.0);
            prop_assert!((by_coefficients - by_model).abs() / scale < 1e-8);
        }
    }
}
