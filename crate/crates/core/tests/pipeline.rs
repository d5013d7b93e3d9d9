use sparse_al::data::{make_blobs, BlobSpec};
use sparse_al::embeddings::{
    assemble_problem, fit_temperature, gradient_embeddings, predictive_distribution, EmbeddingMode, Predictor,
};
use sparse_al::harness::{run_loop, AcquisitionParams, AlConfig, Strategy};
use sparse_al::models::{train, FeatureMap, TrainConfig};
use sparse_al::solvers::{greedy_solve, GreedyConfig, IhtConfig};

fn train_config() -> TrainConfig {
    TrainConfig { epochs: 200, learning_rate: 0.5, weight_decay: 1e-4, seed: 0 }
}

#[test]
fn supervised_blob_baseline_is_accurate() {
    let data = make_blobs(&BlobSpec::balanced(4, 2500, 6.0, 1.0, 0)).unwrap();
    let model =
        train(data.train.features.view(), &data.train.labels, 4, FeatureMap::Identity, &train_config()).unwrap();
    let acc = model.accuracy(data.test.features.view(), &data.test.labels).unwrap();
    assert!(acc >= 0.9, "{acc}");
}

#[test]
fn one_acquisition_by_hand() {
    let data = make_blobs(&BlobSpec::balanced(3, 600, 4.0, 1.5, 3)).unwrap();
    let labeled: Vec<usize> = (0..30).collect();
    let pool: Vec<usize> = (30..data.train.len()).collect();
    let seed = data.train.subset(&labeled);
    let model = train(seed.features.view(), &seed.labels, 3, FeatureMap::Identity, &train_config()).unwrap();
    let logits = model.predict_logits(data.validation.features.view()).unwrap();
    let temperature = fit_temperature(logits.view(), &data.validation.labels).unwrap().temperature;
    let candidates = data.train.subset(&pool);
    let dist =
        predictive_distribution(Predictor::Calibrated { model: &model, temperature }, candidates.features.view())
            .unwrap();
    let emb = gradient_embeddings(&model, candidates.features.view()).unwrap();
    assert_eq!(emb.dim(), 3 * 2);
    let problem = assemble_problem(&emb, &dist, 1e3, 0.01, 20).unwrap();
    let res = greedy_solve(&problem, &GreedyConfig::default()).unwrap();
    assert_eq!(res.selected.len(), 20);
    let mut unique = res.selected.clone();
    unique.sort_unstable();
    unique.dedup();
    assert_eq!(unique.len(), 20);
}

#[test]
fn lifted_features_and_posterior_samples_run_end_to_end() {
    let data = make_blobs(&BlobSpec::balanced(3, 300, 4.0, 1.0, 8)).unwrap();
    for (mode, feature_map) in [
        (EmbeddingMode::Gradient, FeatureMap::RandomTanh { width: 8, seed: 1 }),
        (EmbeddingMode::PosteriorSample, FeatureMap::Identity),
    ] {
        let config = AlConfig {
            strategy: Strategy::OursIht,
            embedding_mode: Some(mode),
            seed_size: 15,
            batch_size: 10,
            rounds: 2,
            acquisition: AcquisitionParams {
                alpha: 10.0,
                beta: 0.01,
                greedy: GreedyConfig::default(),
                iht: IhtConfig::default(),
            },
            ensemble_size: 4,
            train: TrainConfig { epochs: 60, ..train_config() },
            feature_map,
            rng_seed: 2,
            record_seed_round: true,
        };
        let run = run_loop(&data, &config).unwrap();
        assert_eq!(run.records.len(), 3);
        assert_eq!(run.records[0].round, 0);
        assert_eq!(run.records[2].labeled_count, 35);
        assert!(run.records.iter().all(|r| (0.0..=1.0).contains(&r.test_accuracy)));
    }
}
