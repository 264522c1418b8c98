use dcdither::imagepipe::{lambda_sweep, run_pipeline, GrayImage, PipelineConfig, SweepConfig};
use dcdither::{Error, Family, Formulation};

fn scene() -> GrayImage {
    GrayImage::synthetic(96, 80).unwrap()
}

#[test]
fn file_round_trip_gives_identical_reports() {
    let img = scene();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scene.pgm");
    img.save_pgm(&path).unwrap();
    let loaded = GrayImage::load_pgm(&path).unwrap();
    let cfg = PipelineConfig::new(2, Family::L1, 0.4, 11);
    let a = run_pipeline(&img, &cfg).unwrap();
    let b = run_pipeline(&loaded, &cfg).unwrap();
    assert_eq!(a.report, b.report);
    assert_eq!(a.sd, b.sd);

    let out = dir.path().join("sd.pgm");
    a.sd.save_pgm(&out).unwrap();
    assert_eq!(GrayImage::load_pgm(&out).unwrap(), a.sd);
}

#[test]
fn seeds_change_only_dithered_outputs() {
    let img = scene();
    let run = |lambda, seed| {
        run_pipeline(&img, &PipelineConfig::new(2, Family::L2, lambda, seed)).unwrap()
    };
    assert_eq!(run(0.0, 1).sd, run(0.0, 2).sd);
    assert_ne!(run(0.6, 1).sd, run(0.6, 2).sd);
}

#[test]
fn more_bits_reduce_error() {
    let img = scene();
    let mse = |bits| {
        run_pipeline(&img, &PipelineConfig::new(bits, Family::L1, 0.5, 3))
            .unwrap()
            .report
            .mse_sd
    };
    assert!(mse(2) > mse(4));
    assert!(mse(4) > mse(6));
}

#[test]
fn overridden_formulation_changes_alpha() {
    let img = scene();
    let mut cfg = PipelineConfig::new(2, Family::L1, 0.5, 3);
    let own = run_pipeline(&img, &cfg).unwrap().report;
    cfg.formulation = Some(Formulation::L2);
    let other = run_pipeline(&img, &cfg).unwrap().report;
    assert_eq!(own.formulation, Formulation::L1);
    assert_eq!(other.formulation, Formulation::L2);
    assert!((own.alpha - 0.5 / (1.0 + 0.75f64.sqrt())).abs() < 1e-12);
    assert!((other.alpha - 0.5 / 1.5).abs() < 1e-12);
}

#[test]
fn empty_sweep_is_a_config_error() {
    let sweep = SweepConfig {
        bits: 2,
        families: vec![],
        formulation: None,
        lambdas: vec![0.5],
        seed: 0,
        n_lags: 4,
    };
    assert!(matches!(
        lambda_sweep(&scene(), &sweep),
        Err(Error::Config(_))
    ));
}
