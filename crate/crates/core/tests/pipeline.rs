use std::sync::Arc;

use fmd_core::embed::{export_features, import_features, load_model, save_model};
use fmd_core::frechet::{fit_gaussian, load_stats, save_stats, CovarianceEstimator, FrechetReference};
use fmd_core::harness::{embed_clips, run_experiment, split_dataset, ExperimentConfig, LengthPipeline};
use fmd_core::motion::{load_motion, save_motion, synth_dataset, to_directional, window, Skeleton};
use fmd_core::perturb::{NoiseKind, NoiseSpec};

fn small_pipeline(length: usize) -> LengthPipeline {
    let skel = Arc::new(Skeleton::humanoid17());
    let clips = synth_dataset(7, 60, &skel, 64).unwrap();
    let (train, test) = split_dataset(clips, 0.7, 7).unwrap();
    LengthPipeline::new(&train, &test, length, 12, CovarianceEstimator::Unbiased).unwrap()
}

#[test]
fn files_on_disk_reproduce_in_memory_distance() {
    let dir = tempfile::tempdir().unwrap();
    let p = small_pipeline(32);
    let noisy: Vec<_> = p
        .test_windows
        .iter()
        .map(|w| {
            NoiseSpec::new(NoiseKind::Gaussian, 0.02, 3)
                .unwrap()
                .apply(w)
                .unwrap()
        })
        .collect();
    let in_memory = p.score(&noisy).unwrap();

    save_model(&p.embedder, dir.path().join("m.fmdmodel")).unwrap();
    let model = load_model(dir.path().join("m.fmdmodel")).unwrap();
    let mut reloaded = Vec::new();
    for (i, w) in noisy.iter().enumerate() {
        let path = dir.path().join(format!("{i}.mot"));
        save_motion(w, &path).unwrap();
        reloaded.push(load_motion(&path).unwrap());
    }
    let feats = embed_clips(&model, &reloaded).unwrap();
    export_features(12, &feats, dir.path().join("g.feat")).unwrap();
    let g = fit_gaussian(&import_features(dir.path().join("g.feat")).unwrap()).unwrap();
    save_stats(&g, dir.path().join("g.stats")).unwrap();
    let g = load_stats(dir.path().join("g.stats")).unwrap();

    let r = p.reference().stats().clone();
    save_stats(&r, dir.path().join("r.stats")).unwrap();
    let r = FrechetReference::new(load_stats(dir.path().join("r.stats")).unwrap()).unwrap();
    let from_disk = r.distance(&g).unwrap();
    assert!(
        (from_disk - in_memory).abs() <= 1e-10,
        "{from_disk} vs {in_memory}"
    );
}

#[test]
fn global_translation_leaves_distance_unchanged() {
    let p = small_pipeline(18);
    for offset in [[3.0, -1.5, 0.25], [-250.0, 40.0, 1e3]] {
        let moved: Vec<_> = p.test_windows.iter().map(|w| w.translated(offset)).collect();
        assert!(p.score(&moved).unwrap().abs() <= 1e-9);
        let noisy: Vec<_> = p
            .test_windows
            .iter()
            .map(|w| {
                NoiseSpec::new(NoiseKind::SaltPepper, 0.1, 9)
                    .unwrap()
                    .apply(w)
                    .unwrap()
            })
            .collect();
        let noisy_moved: Vec<_> = noisy.iter().map(|w| w.translated(offset)).collect();
        let (a, b) = (p.score(&noisy).unwrap(), p.score(&noisy_moved).unwrap());
        assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
    }
}

#[test]
fn every_window_yields_unit_bone_vectors() {
    let skel = Arc::new(Skeleton::humanoid17());
    for clip in synth_dataset(11, 20, &skel, 64).unwrap() {
        for w in window(&clip, 34, 34).unwrap() {
            assert!(to_directional(&w).unwrap().max_norm_deviation() <= 1e-12);
            let noisy = NoiseSpec::new(NoiseKind::Gaussian, 0.1, 1)
                .unwrap()
                .apply(&w)
                .unwrap();
            assert!(to_directional(&noisy).unwrap().max_norm_deviation() <= 1e-12);
        }
    }
}

#[test]
fn reduced_sweep_grows_with_noise() {
    let mut cfg = ExperimentConfig::default();
    for (k, v) in [
        ("synthetic_clips", "80"),
        ("lengths", "16,32"),
        ("latent_dim", "10"),
        ("repetitions", "3"),
        ("gaussian", "0,0.01,0.1"),
        ("salt_pepper", "0,0.05,0.4"),
        ("temporal", "0,4,32"),
    ] {
        cfg.set(k, v).unwrap();
    }
    let report = run_experiment(&cfg).unwrap();
    for kind in [NoiseKind::Gaussian, NoiseKind::SaltPepper] {
        for length in [16, 32] {
            let s = report.series(kind, length);
            assert_eq!(s.len(), 3);
            assert!(s[0].mean_fmd.abs() <= 1e-9);
            assert!(s[0].mean_fmd < s[1].mean_fmd && s[1].mean_fmd < s[2].mean_fmd);
        }
    }
    // ζ = 32 exceeds the shortest length so it only appears at 32 frames.
    assert!(report.cell(NoiseKind::Temporal, 16, 32.0).is_none());
    assert!(report.cell(NoiseKind::Temporal, 32, 32.0).is_some());
}
