use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

use super::*;
use crate::seed;

fn blobs(n_per: usize, k: usize, p: usize, spread: f64, seed_: u64) -> (FeatureTable, Vec<usize>) {
    let mut rng = seed::rng(seed_);
    let mut cols = vec![Vec::new(); p];
    let mut y = Vec::new();
    for c in 0..k {
        for _ in 0..n_per {
            for (j, col) in cols.iter_mut().enumerate() {
                let centre = if j % k == c { spread } else { 0.0 };
                let z: f64 = rng.sample(StandardNormal);
                col.push(centre + z);
            }
            y.push(c);
        }
    }
    let t = FeatureTable::from_numeric(cols.into_iter().enumerate().map(|(j, v)| (format!("x{j}"), v)).collect()).unwrap();
    (t, y)
}

fn accuracy(a: &[usize], b: &[usize]) -> f64 {
    a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / a.len() as f64
}

#[test]
fn axis_separable_tree_single_split() {
    let t = FeatureTable::from_numeric(vec![
        ("a", vec![0.0, 1.0, 2.0, 3.0, 10.0, 11.0, 12.0, 13.0]),
        ("b", vec![5.0, 3.0, 5.0, 3.0, 5.0, 3.0, 5.0, 3.0]),
    ])
    .unwrap();
    let y = vec![0, 0, 0, 0, 1, 1, 1, 1];
    let m = fit(&ModelSpec::new(ModelKind::DecisionTree, 0), &t, &y).unwrap();
    assert_eq!(predict(&m, &t).unwrap(), y);
    let ModelState::Tree(tree) = &m.state else { panic!() };
    assert_eq!(tree.n_leaves(), 2);
    assert_eq!(tree.importances().unwrap(), vec![1.0, 0.0]);
}

#[test]
fn knn_one_neighbour_recalls_training_set() {
    let (t, y) = blobs(30, 3, 4, 1.0, 3);
    let m = fit(&ModelSpec::new(ModelKind::Knn, 0).with("k", HyperValue::Int(1)), &t, &y).unwrap();
    assert_eq!(accuracy(&predict(&m, &t).unwrap(), &y), 1.0);
}

#[test]
fn single_tree_forest_equals_decision_tree() {
    let (t, y) = blobs(40, 3, 5, 1.5, 11);
    let tree = fit(&ModelSpec::new(ModelKind::DecisionTree, 0), &t, &y).unwrap();
    let forest = fit(
        &ModelSpec::new(ModelKind::RandomForest, 5)
            .with("n_trees", HyperValue::Int(1))
            .with("bootstrap", HyperValue::Bool(false))
            .with("max_features", HyperValue::Text("all".into())),
        &t,
        &y,
    )
    .unwrap();
    assert_eq!(predict(&tree, &t).unwrap(), predict(&forest, &t).unwrap());
    let (ModelState::Tree(a), ModelState::Forest(f)) = (&tree.state, &forest.state) else { panic!() };
    assert_eq!(a, &f.trees[0]);
}

#[test]
fn naive_bayes_separates_blobs() {
    let (t, y) = blobs(100, 2, 2, 8.0, 5);
    let m = fit(&ModelSpec::new(ModelKind::GaussianNb, 0), &t, &y).unwrap();
    assert!(accuracy(&predict(&m, &t).unwrap(), &y) >= 0.99);
}

#[test]
fn every_kind_learns_separable_blobs() {
    let (t, y) = blobs(60, 3, 6, 5.0, 8);
    for spec in default_suite(1) {
        let m = fit(&spec, &t, &y).unwrap();
        let acc = accuracy(&predict(&m, &t).unwrap(), &y);
        assert!(acc >= 0.95, "{} accuracy {acc}", spec.kind);
    }
}

#[test]
fn fits_are_deterministic() {
    let (t, y) = blobs(30, 3, 4, 2.0, 2);
    for spec in default_suite(42) {
        let a = fit(&spec, &t, &y).unwrap();
        let b = fit(&spec, &t, &y).unwrap();
        assert_eq!(a, b, "{}", spec.kind);
    }
}

#[test]
fn softmax_of_equal_logits_is_uniform() {
    let mut z = [0.0, 0.0];
    matrix::softmax_in_place(&mut z);
    assert_eq!(z, [0.5, 0.5]);
}

#[test]
fn single_leaf_returns_class_distribution() {
    let t = FeatureTable::from_numeric(vec![("a", vec![1.0; 4])]).unwrap();
    let y = vec![0, 1, 1, 1];
    let m = fit(&ModelSpec::new(ModelKind::DecisionTree, 0), &t, &y).unwrap();
    let p = predict_proba(&m, &t).unwrap();
    assert_eq!(p.row(0), &[0.25, 0.75]);
}

#[test]
fn errors_are_reported() {
    let (t, y) = blobs(10, 2, 2, 3.0, 1);
    let spec = ModelSpec::new(ModelKind::DecisionTree, 0);
    assert!(matches!(fit(&spec, &t, &vec![0; y.len()]), Err(LearnError::SingleClass)));
    let mut bad = y.clone();
    bad[0] = 3;
    assert!(matches!(fit(&spec, &t, &bad), Err(LearnError::NonContiguousLabels { missing: 2, .. })));
    let nan = t.replace_column("x0", vec![f64::NAN; t.n_rows()]).unwrap();
    assert!(matches!(fit(&spec, &nan, &y), Err(LearnError::NonFiniteInput)));
    let knn0 = ModelSpec::new(ModelKind::Knn, 0).with("k", HyperValue::Int(0));
    assert!(matches!(fit(&knn0, &t, &y), Err(LearnError::DegenerateHyperparameter(_))));
    let unknown = ModelSpec::new(ModelKind::Knn, 0).with("kk", HyperValue::Int(3));
    assert!(matches!(fit(&unknown, &t, &y), Err(LearnError::DegenerateHyperparameter(_))));
    let m = fit(&spec, &t, &y).unwrap();
    let renamed = t.select_columns(&["x1", "x0"]).unwrap();
    assert!(matches!(predict(&m, &renamed), Err(LearnError::FeatureMismatch { .. })));
    assert!(matches!(fit(&spec, &t, &y[1..]), Err(LearnError::LengthMismatch { .. })));
}

#[test]
fn save_load_round_trip() {
    let (t, y) = blobs(20, 3, 3, 2.0, 4);
    let dir = tempfile::tempdir().unwrap();
    for spec in default_suite(7) {
        let m = fit(&spec, &t, &y).unwrap();
        let path = dir.path().join(format!("{}.json", spec.kind));
        m.save(&path).unwrap();
        let back = TrainedModel::load(&path).unwrap();
        assert_eq!(predict_proba(&m, &t).unwrap(), predict_proba(&back, &t).unwrap());
    }
}

#[test]
fn kind_names_round_trip() {
    for k in ModelKind::ALL {
        assert_eq!(k.as_str().parse::<ModelKind>().unwrap(), k);
    }
    assert!("svm".parse::<ModelKind>().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn proba_rows_sum_to_one_and_predict_is_argmax(seed_ in any::<u64>(), kind in 0usize..8) {
        let (t, y) = blobs(12, 3, 3, 1.0, seed_);
        let kind = ModelKind::ALL[kind];
        let spec = match kind {
            ModelKind::RandomForest | ModelKind::ExtraTrees => ModelSpec::new(kind, seed_).with("n_trees", HyperValue::Int(10)),
            ModelKind::Adaboost => ModelSpec::new(kind, seed_).with("n_rounds", HyperValue::Int(10)),
            ModelKind::FeedforwardNet => ModelSpec::new(kind, seed_).with("epochs", HyperValue::Int(3)),
            _ => ModelSpec::new(kind, seed_),
        };
        let m = fit(&spec, &t, &y).unwrap();
        let p = predict_proba(&m, &t).unwrap();
        let pred = predict(&m, &t).unwrap();
        for i in 0..p.rows() {
            let s: f64 = p.row(i).iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-9);
            prop_assert!(p.row(i).iter().all(|v| (0.0..=1.0).contains(v)));
            prop_assert_eq!(pred[i], matrix::argmax(p.row(i)));
        }
    }
}
