//! End-to-end harness behaviour: noise-free comparison, CSV parse-back with
//! an independent reader, and config files on disk.

use gazecal_core::harness::{self, format_sig, ExperimentConfig};
use gazecal_core::*;
use nalgebra::{DMatrix, DVector};

fn noise_free_static() -> ExperimentConfig {
    ExperimentConfig {
        head_modes: vec![HeadMode::Static],
        noise_levels: vec![0.0],
        trials: 1,
        ..ExperimentConfig::demo()
    }
}

#[test]
fn noise_free_comparison_geometric_and_hybrid_are_exact() {
    let rows = run_comparison(&noise_free_static()).unwrap();
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert!(r.error.is_none(), "{r:?}");
        assert_eq!(r.failures, 0);
        if r.method != Method::Ridge {
            assert!(r.mean_err_mm < 0.5, "{r:?}");
        }
    }
}

/// Smallest mean error any affine map of the ridge features can reach on the
/// test set, fitted in-sample by least squares.
fn affine_floor(test: &[CalibrationSample]) -> f64 {
    let feats: Vec<[f64; 5]> = test.iter().map(|s| ridge_features(s.eye_ccs, s.gaze).unwrap()).collect();
    // Static head: the eye columns are constant, so only the angles carry information.
    let a = DMatrix::from_fn(test.len(), 3, |i, j| if j == 0 { 1.0 } else { feats[i][j - 1] });
    let svd = a.clone().svd(true, true);
    let fit = |y: DVector<f64>| &a * svd.solve(&y, 1e-12).unwrap();
    let px = fit(DVector::from_iterator(test.len(), test.iter().map(|s| s.target.x)));
    let py = fit(DVector::from_iterator(test.len(), test.iter().map(|s| s.target.y)));
    test.iter()
        .enumerate()
        .map(|(i, s)| (px[i] - s.target.x).hypot(py[i] - s.target.y))
        .sum::<f64>()
        / test.len() as f64
}

#[test]
fn noise_free_ridge_is_limited_by_linearisation() {
    let cfg = noise_free_static();
    let scene = harness::cell_scene(&cfg, HeadMode::Static, 0.0, 0);
    let data = generate_dataset(&scene, cfg.compare_n_train, cfg.n_test, cfg.compare_grid).unwrap();
    let floor = affine_floor(&data.test);
    // Screen targets are tan() of the angles, so no linear model is exact.
    assert!(floor > 0.5, "floor {floor}");

    let rows = run_comparison(&cfg).unwrap();
    let ridge = rows.iter().find(|r| r.method == Method::Ridge).unwrap();
    assert!(ridge.mean_err_mm >= 0.9 * floor, "{} vs floor {floor}", ridge.mean_err_mm);
    assert!(ridge.mean_err_mm < 2.0 * floor, "{} vs floor {floor}", ridge.mean_err_mm);
}

#[test]
fn csv_reads_back_with_independent_parser() {
    let cfg = ExperimentConfig {
        methods: vec![Method::Geometric, Method::Ridge],
        n_train: vec![4, 9],
        trials: 2,
        ..ExperimentConfig::demo()
    };
    let rows = run_learning_curve(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    write_csv(&rows, &path).unwrap();

    let mut reader = csv::Reader::from_path(&path).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(str::to_string).collect();
    assert_eq!(header.join(","), harness::CSV_HEADER);
    let records: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(records.len(), rows.len());
    for (rec, row) in records.iter().zip(&rows) {
        assert_eq!(rec.len(), 9);
        assert_eq!(&rec[0], row.method.as_str());
        assert_eq!(&rec[1], row.head_mode.as_str());
        assert_eq!(rec[3].parse::<usize>().unwrap(), row.n_calib);
        assert_eq!(rec[4].parse::<usize>().unwrap(), row.trial);
        for (field, want) in [(5, row.mean_err_mm), (6, row.std_err_mm), (7, row.max_err_mm)] {
            let got: f64 = rec[field].parse().unwrap();
            assert!((got - want).abs() <= 5e-6 * want.abs(), "{got} vs {want}");
        }
        assert_eq!(&rec[8], "0");
    }
}

#[test]
fn error_rows_write_nan() {
    let cfg = ExperimentConfig {
        methods: vec![Method::Ridge],
        head_modes: vec![HeadMode::Static],
        n_train: vec![2],
        trials: 1,
        ..ExperimentConfig::demo()
    };
    let mut rows = run_learning_curve(&cfg).unwrap();
    rows[0].error = Some("forced".into());
    rows[0].mean_err_mm = f64::NAN;
    rows[0].std_err_mm = f64::NAN;
    let text = harness::rows_to_csv(&rows);
    let line = text.lines().nth(1).unwrap();
    assert!(line.contains(",NaN,"), "{line}");
    assert_eq!(format_sig(f64::NAN, 6), "NaN");
}

#[test]
fn config_file_resolves_scene_relative_to_itself() {
    let dir = tempfile::tempdir().unwrap();
    let scene = SceneConfig { noise_deg: 1.5, ..SceneConfig::demo() };
    simulate::save_scene(&scene, &dir.path().join("scene.toml")).unwrap();
    let cfg_path = dir.path().join("exp.toml");
    std::fs::write(
        &cfg_path,
        "version = 1\nscene = \"scene.toml\"\nmethods = [\"ridge\"]\ntrials = 2\nn_train = [4]\n",
    )
    .unwrap();
    let cfg = harness::load_config(&cfg_path).unwrap();
    assert_eq!(cfg.scene, scene);
    assert_eq!(cfg.methods, vec![Method::Ridge]);
    assert_eq!(run_learning_curve(&cfg).unwrap().len(), 2 * 2);

    std::fs::write(&cfg_path, "version = 1\nscene = \"missing.toml\"\n").unwrap();
    let err = harness::load_config(&cfg_path).unwrap_err();
    assert_eq!(err.kind(), "io");
    assert!(err.to_string().contains("missing.toml"), "{err}");
}
