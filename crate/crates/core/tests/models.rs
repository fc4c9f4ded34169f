use approx::assert_relative_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relex_core::features::FeatureVector;
use relex_core::models::*;

fn random_examples(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Examples {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(-2.0..2.0) }).collect())
        .collect();
    let mut y: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
    y[0] = true;
    y[1] = false;
    Examples::from_dense(&rows, &y)
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / na.max(nb).max(1e-12)
}

#[test]
fn logistic_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for draw in 0..12 {
        let data = random_examples(&mut rng, 9, 5);
        let c: Vec<f64> = (0..9).map(|_| rng.random_range(0.5..2.0)).collect();
        let lambda = rng.random_range(0.0..0.5);
        let w: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b = rng.random_range(-1.0..1.0);
        let (_, gw, gb) = logistic_objective_and_gradient(&data, &c, lambda, &w, b);
        let h = 1e-6;
        let mut numeric = Vec::new();
        for j in 0..5 {
            let (mut wp, mut wm) = (w.clone(), w.clone());
            wp[j] += h;
            wm[j] -= h;
            numeric.push((logistic_objective(&data, &c, lambda, &wp, b) - logistic_objective(&data, &c, lambda, &wm, b)) / (2.0 * h));
        }
        numeric.push((logistic_objective(&data, &c, lambda, &w, b + h) - logistic_objective(&data, &c, lambda, &w, b - h)) / (2.0 * h));
        let mut analytic = gw.clone();
        analytic.push(gb);
        let e = rel_err(&analytic, &numeric);
        assert!(e < 1e-4, "draw {draw}: relative error {e}");
    }
}

#[test]
fn fnn_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for draw in 0..10 {
        let data = random_examples(&mut rng, 5, 4);
        let c = vec![1.0; 5];
        let mut p = FnnParams::init(4, &mut rng);
        for v in p.b1.iter_mut() {
            *v = rng.random_range(-0.3..0.3);
        }
        p.b2 = [rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3)];
        let idx: Vec<usize> = (0..5).collect();
        let (_, grad) = fnn_loss_and_gradient(&p, &data, &c, &idx);
        let analytic = grad.flatten();
        let base = p.flatten();
        let h = 1e-6;
        let numeric: Vec<f64> = (0..base.len())
            .map(|k| {
                let (mut pp, mut pm) = (p.clone(), p.clone());
                pp.set_flat(k, base[k] + h);
                pm.set_flat(k, base[k] - h);
                (fnn_loss_and_gradient(&pp, &data, &c, &idx).0 - fnn_loss_and_gradient(&pm, &data, &c, &idx).0) / (2.0 * h)
            })
            .collect();
        let e = rel_err(&analytic, &numeric);
        assert!(e < 1e-4, "draw {draw}: relative error {e}");
    }
}

#[test]
fn fnn_softmax_sums_to_one_and_zero_input_uses_biases_only() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut p = FnnParams::init(6, &mut rng);
    for _ in 0..50 {
        let x: Vec<f64> = (0..6).map(|_| rng.random_range(-50.0..50.0)).collect();
        let f = p.forward(&FeatureVector::from_dense(&x));
        assert!((f.probs[0] + f.probs[1] - 1.0).abs() <= 1e-9);
    }
    p.b1 = vec![0.0; 6];
    let zero = FeatureVector::from_dense(&[0.0; 6]);
    let before = p.forward(&zero).probs;
    for w in p.w1.iter_mut() {
        *w = 123.0;
    }
    assert_eq!(p.forward(&zero).probs, before);
}

fn separable_2d() -> Examples {
    Examples::from_dense(
        &[vec![2.0, 1.0], vec![1.5, 2.5], vec![-1.0, -2.0], vec![-2.0, -0.5]],
        &[true, true, false, false],
    )
}

fn accuracy(m: &Model, data: &Examples) -> f64 {
    let ok = data.x.iter().zip(&data.y).filter(|(x, &y)| m.predict(x).unwrap().0 == y).count();
    ok as f64 / data.len() as f64
}

fn non_increasing(trace: &[f64]) -> bool {
    trace.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0))
}

#[test]
fn logistic_separates_and_descends() {
    let data = separable_2d();
    let m = train_logistic(&data, &[1.0; 4], 0.01, &OptimizerConfig::default()).unwrap();
    assert!(non_increasing(&m.objective_trace));
    assert_eq!(accuracy(&Model::Logistic(m), &data), 1.0);

    let one_d = Examples::from_dense(&[vec![-1.0], vec![1.0]], &[false, true]);
    let m = train_logistic(&one_d, &[1.0; 2], 0.1, &OptimizerConfig::default()).unwrap();
    let boundary = -m.bias / m.weights[0];
    assert!(boundary.abs() < 1e-6, "boundary at {boundary}");
    assert_eq!(accuracy(&Model::Logistic(m), &one_d), 1.0);
}

#[test]
fn heavy_ridge_shrinks_weights() {
    let data = separable_2d();
    let small = train_logistic(&data, &[1.0; 4], 0.01, &OptimizerConfig::default()).unwrap();
    let huge = train_logistic(&data, &[1.0; 4], 1e6, &OptimizerConfig::default()).unwrap();
    let norm = |w: &[f64]| w.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(norm(&huge.weights) < 1e-5);
    assert!(norm(&huge.weights) < norm(&small.weights));
    for x in &data.x {
        assert_relative_eq!(huge.probability(x), 0.5, epsilon = 1e-4);
    }
}

#[test]
fn linear_svm_separates_with_zero_hinge_loss() {
    let data = separable_2d();
    let m = train_linear_svm(&data, &[1.0; 4], 10.0, &SmoConfig { tolerance: 1e-9, ..SmoConfig::default() }).unwrap();
    assert!(non_increasing(&m.objective_trace));
    for (x, &y) in data.x.iter().zip(&data.y) {
        let margin = if y { m.margin(x) } else { -m.margin(x) };
        assert!(margin >= 1.0 - 1e-6, "margin {margin}");
    }
    assert_eq!(accuracy(&Model::LinearSvm(m), &data), 1.0);
}

#[test]
fn linear_svm_matches_nearest_centroid_on_blobs() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let centres = [[3.0, 3.0], [-3.0, -2.0]];
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for i in 0..60 {
        let c = centres[i % 2];
        rows.push(vec![c[0] + rng.random_range(-1.0..1.0), c[1] + rng.random_range(-1.0..1.0)]);
        y.push(i % 2 == 0);
    }
    let data = Examples::from_dense(&rows, &y);
    let m = Model::LinearSvm(train_linear_svm(&data, &[1.0; 60], 1.0, &SmoConfig::default()).unwrap());
    for _ in 0..20 {
        let k = rng.random_range(0..2);
        let p = [centres[k][0] + rng.random_range(-0.8..0.8), centres[k][1] + rng.random_range(-0.8..0.8)];
        let dist = |c: [f64; 2]| (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2);
        let nearest_positive = dist(centres[0]) < dist(centres[1]);
        assert_eq!(m.predict(&FeatureVector::from_dense(&p)).unwrap().0, nearest_positive);
    }
}

fn xor() -> Examples {
    Examples::from_dense(
        &[vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]],
        &[false, false, true, true],
    )
}

#[test]
fn rbf_svm_solves_xor_with_ascending_dual() {
    let data = xor();
    let m = train_rbf_svm(&data, &[1.0; 4], 10.0, 1.0, &SmoConfig::default()).unwrap();
    assert!(m.converged);
    assert!(m.dual_trace.windows(2).all(|w| w[1] >= w[0] - 1e-10));
    let model = Model::RbfSvm(m.clone());
    assert_eq!(accuracy(&model, &data), 1.0);
    for &i in &m.support_indices {
        assert_eq!(model.predict(&data.x[i]).unwrap().0, data.y[i]);
    }
    let v = FeatureVector::from_dense(&[0.3, -2.0]);
    assert_eq!(rbf_kernel(&v, &v, 0.7), 1.0);
}

#[test]
fn linear_models_cannot_fit_xor_but_train_cleanly() {
    let data = xor();
    let m = train_linear_svm(&data, &[1.0; 4], 1.0, &SmoConfig::default()).unwrap();
    assert!(non_increasing(&m.objective_trace));
    assert!(accuracy(&Model::LinearSvm(m), &data) < 1.0);
}

#[test]
fn prediction_thresholds_are_strict() {
    let zero = Model::Logistic(LinearModel {
        weights: vec![0.0],
        bias: 0.0,
        reg: 0.0,
        loss: Loss::Logistic,
        objective_trace: Vec::new(),
    });
    let (label, p) = zero.predict(&FeatureVector::from_dense(&[5.0])).unwrap();
    assert_eq!((label, p), (false, 0.5));
    let unit = Model::LinearSvm(LinearModel {
        weights: vec![1.0],
        bias: 0.0,
        reg: 1.0,
        loss: Loss::Hinge,
        objective_trace: Vec::new(),
    });
    assert_eq!(unit.predict(&FeatureVector::from_dense(&[2.0])).unwrap(), (true, 2.0));
    assert_eq!(unit.predict(&FeatureVector::from_dense(&[0.0])).unwrap().0, false);
    assert!(unit.predict(&FeatureVector::from_dense(&[1.0, 2.0])).is_err());
}

#[test]
fn training_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let data = random_examples(&mut rng, 40, 6);
    let cfg = TrainConfig { seed: 4, ..TrainConfig::default() };
    for h in [
        Hyper::Logistic { lambda: 0.1 },
        Hyper::LinearSvm { c: 1.0 },
        Hyper::RbfSvm { c: 1.0, gamma: 0.5 },
        Hyper::Fnn { learning_rate: 0.01, epochs: 5 },
    ] {
        let a = serde_json::to_string(&train(&h, &data, &cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&train(&h, &data, &cfg).unwrap()).unwrap();
        assert_eq!(a, b, "{h}");
    }
}

#[test]
fn fnn_with_zero_epochs_keeps_its_initialization() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let data = random_examples(&mut rng, 10, 3);
    let cfg = FnnConfig { learning_rate: 0.1, epochs: 0, batch_size: 32, seed: 8 };
    let m = train_fnn(&data, &[1.0; 10], &cfg).unwrap();
    let init = FnnParams::init(3, &mut ChaCha8Rng::seed_from_u64(8));
    assert_eq!(m.params, init);
    assert!(m.epoch_loss.is_empty());
}

#[test]
fn fnn_checkpoints_equal_separate_runs() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let data = random_examples(&mut rng, 50, 4);
    let c = vec![1.0; 50];
    let base = FnnConfig { learning_rate: 0.05, epochs: 0, batch_size: 8, seed: 1 };
    let snaps = train_fnn_checkpoints(&data, &c, &base, &[2, 7], Some(&data)).unwrap();
    for (snap, epochs) in snaps.iter().zip([2, 7]) {
        let alone = train_fnn(&data, &c, &FnnConfig { epochs, ..base }).unwrap();
        assert_eq!(snap.params, alone.params);
        assert_eq!(snap.epoch_dev_f1.len(), epochs);
    }
}

#[test]
fn fnn_learns_a_separable_set() {
    let data = separable_2d();
    let cfg = FnnConfig { learning_rate: 0.1, epochs: 300, batch_size: 32, seed: 0 };
    let m = train_fnn(&data, &[1.0; 4], &cfg).unwrap();
    assert!(m.epoch_loss.last().unwrap() < &m.epoch_loss[0]);
    assert_eq!(accuracy(&Model::Fnn(m), &data), 1.0);
}

#[test]
fn grid_search_examples() {
    let train_set = separable_2d();
    let dev = Examples::from_dense(&[vec![1.0, 1.0], vec![-1.0, -1.0]], &[true, false]);
    let cfg = TrainConfig::default();

    let single = GridPlan::single(Hyper::LinearSvm { c: 1.0 });
    let (_, h, trace) = grid_search(&single, &train_set, &dev, &cfg).unwrap();
    assert_eq!(h, Hyper::LinearSvm { c: 1.0 });
    assert_eq!(trace.entries.len(), 1);

    // with more negatives, the near-zero weights of the huge ridge leave only
    // a negative bias, so that point predicts nothing positive
    let skewed = Examples::from_dense(
        &[vec![2.0, 1.0], vec![1.5, 2.5], vec![-1.0, -2.0], vec![-2.0, -0.5], vec![-1.5, -1.5]],
        &[true, true, false, false, false],
    );
    let plan = GridPlan { points: vec![Hyper::Logistic { lambda: 1e6 }, Hyper::Logistic { lambda: 0.01 }] };
    let (_, h, trace) = grid_search(&plan, &skewed, &dev, &cfg).unwrap();
    assert_eq!(trace.entries[0].score, Some(0.0));
    assert_eq!(h, Hyper::Logistic { lambda: 0.01 });
    assert_eq!(trace.selected, 1);

    let tied = GridPlan { points: vec![Hyper::LinearSvm { c: 1.0 }, Hyper::LinearSvm { c: 10.0 }] };
    let (_, h, trace) = grid_search(&tied, &train_set, &dev, &cfg).unwrap();
    assert_eq!(trace.entries[0].score, trace.entries[1].score);
    assert_eq!(h, Hyper::LinearSvm { c: 1.0 });
}

#[test]
fn fnn_grid_records_dev_curves() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let data = random_examples(&mut rng, 30, 3);
    let plan = GridPlan { points: vec![
        Hyper::Fnn { learning_rate: 0.01, epochs: 2 },
        Hyper::Fnn { learning_rate: 0.01, epochs: 4 },
    ] };
    let (_, _, trace) = grid_search(&plan, &data, &data, &TrainConfig::default()).unwrap();
    assert_eq!(trace.entries[0].epoch_dev_f1.len(), 2);
    assert_eq!(trace.entries[1].epoch_dev_f1.len(), 4);
    assert_eq!(trace.entries[0].epoch_dev_f1[..], trace.entries[1].epoch_dev_f1[..2]);
}

#[test]
fn cross_validation_picks_a_point_and_retrains() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let data = random_examples(&mut rng, 30, 4);
    let plan = GridPlan::default_for(ModelKind::Logistic, 4);
    let (model, h, trace) = cross_validate(&plan, &data, 3, &TrainConfig::default()).unwrap();
    assert_eq!(trace.entries.len(), 4);
    assert_eq!(plan.points[trace.selected], h);
    assert_eq!(model.dim(), 4);
    assert!(cross_validate(&plan, &data, 1, &TrainConfig::default()).is_err());
}

#[test]
fn single_class_training_fails() {
    let data = Examples::from_dense(&[vec![1.0], vec![2.0]], &[true, true]);
    assert!(matches!(train(&Hyper::LinearSvm { c: 1.0 }, &data, &TrainConfig::default()), Err(TrainError::SingleClass(_))));
}

#[test]
fn model_file_round_trip() {
    let data = separable_2d();
    let model = train(&Hyper::RbfSvm { c: 1.0, gamma: 0.5 }, &data, &TrainConfig::default()).unwrap();
    let f = ModelFile {
        version: MODEL_VERSION,
        relation: "R".into(),
        feature_kind: "BoW".into(),
        space_hash: "abc".into(),
        seed: 0,
        hyper: Hyper::RbfSvm { c: 1.0, gamma: 0.5 },
        model,
        trace: None,
    };
    let back = ModelFile::from_json(&f.to_json()).unwrap();
    for x in &data.x {
        assert_eq!(back.model.predict(x).unwrap(), f.model.predict(x).unwrap());
    }
}
