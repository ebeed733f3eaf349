//! Checks against independent reimplementations: finite differences for the
//! gradient, a naive double loop for the metrics, a hand-rolled FNV-1a for
//! feature hashing.

use taxmerge::classifier::{feature_index, objective, objective_gradient, ClassifierModel, Example, FEATURE_DIM};
use taxmerge::encoding::encode;
use taxmerge::evaluation::{classwise, f1_score, subset_accuracy};
use taxmerge::{featurize, fixtures, FeatureVector, LabelVector, NodePath, Rng, Taxonomy};

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / (a.abs() + b.abs()).max(1e-6)
}

#[test]
fn analytic_gradient_matches_central_differences() {
    let t = Taxonomy::parse("No-hate\nHate\n  A\n  B\n  C\n").unwrap();
    let (nodes, dim) = (5, 10);
    let h = 1e-5;
    let mut worst = 0.0f64;
    for instance in 0..50u64 {
        let mut rng = Rng::new(1000 + instance);
        let mut m = ClassifierModel::zeros_with_dim(nodes, dim, t.fingerprint());
        for j in 0..nodes {
            m.set_bias(j, rng.unit() * 2.0 - 1.0);
            for f in 0..dim {
                m.set_weight(j, f, rng.unit() * 2.0 - 1.0);
            }
        }
        let examples: Vec<Example> = (0..1 + rng.below(6))
            .map(|_| Example {
                features: FeatureVector::from_counts((0..1 + rng.below(4)).map(|_| (rng.below(dim) as u32, rng.unit() + 0.1))),
                target: (0..nodes).map(|_| rng.unit()).collect(),
            })
            .collect();
        let batch: Vec<&Example> = examples.iter().collect();
        let l2 = rng.unit() * 0.1;
        let (gw, gb) = objective_gradient(&m, &batch, l2);

        for j in 0..nodes {
            for f in 0..dim {
                let w = m.weight(j, f);
                let mut plus = m.clone();
                plus.set_weight(j, f, w + h);
                let mut minus = m.clone();
                minus.set_weight(j, f, w - h);
                let numeric = (objective(&plus, &batch, l2) - objective(&minus, &batch, l2)) / (2.0 * h);
                worst = worst.max(rel_err(gw[j * dim + f], numeric));
            }
            let b = m.bias()[j];
            let mut plus = m.clone();
            plus.set_bias(j, b + h);
            let mut minus = m.clone();
            minus.set_bias(j, b - h);
            let numeric = (objective(&plus, &batch, l2) - objective(&minus, &batch, l2)) / (2.0 * h);
            worst = worst.max(rel_err(gb[j], numeric));
        }
    }
    assert!(worst < 1e-4, "worst relative error {worst}");
}

struct Counts {
    tp: usize,
    fp: usize,
    fn_: usize,
    tn: usize,
}

/// Closed score of node `j`: the largest raw score in its subtree, found by
/// path prefix rather than through the arena.
fn naive_closed(paths: &[String], raw: &[f64], j: usize) -> f64 {
    let prefix = format!("{}/", paths[j]);
    (0..paths.len())
        .filter(|&k| k == j || paths[k].starts_with(&prefix))
        .map(|k| raw[k])
        .fold(f64::MIN, f64::max)
}

#[test]
fn classwise_metrics_match_a_naive_double_loop() {
    let t = Taxonomy::parse(fixtures::GENERAL_V1A).unwrap();
    let paths: Vec<String> = t.paths().iter().map(NodePath::to_string).collect();
    let mut rng = Rng::new(2024);
    let n = 200;
    let gold: Vec<LabelVector> = (0..n)
        .map(|_| {
            let picks: Vec<NodePath> = (0..rng.below(4)).map(|_| t.path(rng.below(t.len()))).collect();
            encode(&t, &picks).unwrap()
        })
        .collect();
    let pred: Vec<LabelVector> =
        (0..n).map(|_| LabelVector::from_scores((0..t.len()).map(|_| rng.unit()).collect()).unwrap()).collect();

    for theta in [0.3, 0.5, 0.8] {
        let report = classwise(&t, &gold, &pred, theta).unwrap();
        let mut exact = 0;
        let mut flags = vec![vec![false; t.len()]; n];
        for (i, flag_row) in flags.iter_mut().enumerate() {
            for (j, flag) in flag_row.iter_mut().enumerate() {
                *flag = naive_closed(&paths, pred[i].scores(), j) >= theta;
            }
            if (0..t.len()).all(|j| flag_row[j] == (gold[i].get(j) == 1.0)) {
                exact += 1;
            }
        }
        let (mut num, mut den) = (0.0, 0usize);
        for j in 0..t.len() {
            let mut c = Counts { tp: 0, fp: 0, fn_: 0, tn: 0 };
            for i in 0..n {
                match (gold[i].get(j) == 1.0, flags[i][j]) {
                    (true, true) => c.tp += 1,
                    (false, true) => c.fp += 1,
                    (true, false) => c.fn_ += 1,
                    (false, false) => c.tn += 1,
                }
            }
            let node = &report.nodes[j];
            assert_eq!(node.path, paths[j]);
            assert_eq!((node.tp, node.fp, node.fn_, node.tn), (c.tp, c.fp, c.fn_, c.tn), "{}", paths[j]);
            let f1 = if c.tp + c.fp + c.fn_ == 0 { 0.0 } else { 2.0 * c.tp as f64 / (2 * c.tp + c.fp + c.fn_) as f64 };
            assert!((node.f1 - f1).abs() <= 1e-12);
            let support = c.tp + c.fn_;
            num += support as f64 * f1;
            den += support;
        }
        assert!((report.weighted_f1 - num / den as f64).abs() <= 1e-12);
        let acc = subset_accuracy(&t, &gold, &pred, theta).unwrap();
        assert!((acc - exact as f64 / n as f64).abs() <= 1e-12);
    }
}

#[test]
fn hand_built_confusion_scores() {
    // nodes: No-hate, Hate, A, B; four records
    let t = Taxonomy::parse("No-hate\nHate\n  A\n  B\n").unwrap();
    let v = |s: [f64; 4]| LabelVector::from_scores(s.to_vec()).unwrap();
    let gold = vec![v([0., 1., 1., 0.]), v([0., 1., 0., 1.]), v([1., 0., 0., 0.]), v([0., 1., 1., 0.])];
    // record 3 gets a spurious A (fp on A); record 2 misses B (fn on B, and on Hate)
    let pred = vec![v([0., 0.9, 0.9, 0.]), v([0., 0.1, 0., 0.2]), v([0.9, 0., 0.7, 0.]), v([0., 0.9, 0.9, 0.])];
    let r = classwise(&t, &gold, &pred, 0.5).unwrap();
    let a = r.node("/Hate/A").unwrap();
    assert_eq!((a.tp, a.fp, a.fn_), (2, 1, 0));
    assert_eq!(a.f1, f1_score(2, 1, 0));
    assert_eq!(a.f1, 0.8);
    let b = r.node("/Hate/B").unwrap();
    assert_eq!((b.tp, b.fp, b.fn_, b.f1), (0, 0, 1, 0.0));
    let hate = r.node("/Hate").unwrap();
    // closure lifts record 3's A into Hate
    assert_eq!((hate.tp, hate.fp, hate.fn_), (2, 1, 1));
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

#[test]
fn feature_hashing_matches_reference_fnv() {
    let idx = |s: &str| (fnv1a(s.as_bytes()) % FEATURE_DIM as u64) as u32;
    for s in ["hello", "world", "hello\u{1f}world", "LGBTQ+", "übermaß"] {
        assert_eq!(feature_index(s), idx(s));
    }
    let x = featurize("Hello, hello world!");
    let mut expect = vec![
        (idx("hello"), 2.0),
        (idx("world"), 1.0),
        (idx("hello\u{1f}hello"), 1.0),
        (idx("hello\u{1f}world"), 1.0),
    ];
    expect.sort_by_key(|e| e.0);
    let norm = 7f64.sqrt();
    assert_eq!(x.len(), 4);
    for (&(i, v), (j, w)) in x.entries().iter().zip(expect) {
        assert_eq!(i, j);
        assert!((v - w / norm).abs() < 1e-15);
    }
}

#[test]
fn fixture_census_matches_published_counts() {
    let t = Taxonomy::parse(fixtures::GENERAL_V1A).unwrap();
    let c = t.census();
    assert_eq!((c.classes, c.leaves), (23, 43));
    assert_eq!(t.serialize(), fixtures::GENERAL_V1A);
}
