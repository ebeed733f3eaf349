use taxmerge::classifier::{load_model, save_model, train};
use taxmerge::{Dataset, Error, Record, Rng, Taxonomy, TrainConfig};

fn taxonomy() -> Taxonomy {
    Taxonomy::parse("No-hate\nHate\n  Target_of_hate\n    Jews\n    Women\n  Types_of_hate\n    Threat\n").unwrap()
}

fn corpus() -> Dataset {
    let mut recs = Vec::new();
    for i in 0..30 {
        recs.push(Record::new(format!("j{i}"), format!("ritual shibboleth {i}"), vec!["/Hate/Target_of_hate/Jews".into()], "t"));
        recs.push(Record::new(
            format!("w{i}"),
            format!("kitchen skirt warn {i}"),
            vec!["/Hate/Target_of_hate/Women".into(), "/Hate/Types_of_hate/Threat".into()],
            "t",
        ));
        recs.push(Record::new(format!("n{i}"), format!("garden picnic {i}"), vec!["/No-hate".into()], "t"));
    }
    Dataset::new(recs)
}

#[test]
fn saved_model_predicts_identically() {
    let t = taxonomy();
    let cfg = TrainConfig { seed: 3, ..TrainConfig::default() };
    let m = train(&t, &corpus(), &cfg, None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.bin");
    save_model(&m, &path).unwrap();
    let back = load_model(&path).unwrap();
    assert_eq!(back, m);

    let words = ["ritual", "skirt", "garden", "warn", "picnic", "zebra", "kitchen", "shibboleth"];
    let mut rng = Rng::new(5);
    for _ in 0..100 {
        let text: Vec<&str> = (0..1 + rng.below(6)).map(|_| *rng.choose(&words)).collect();
        let text = text.join(" ");
        let a = m.predict(&t, &text).unwrap();
        let b = back.predict(&t, &text).unwrap();
        assert_eq!(a.scores(), b.scores());
    }
    assert_eq!(std::fs::read(&path).unwrap(), m.to_bytes());
}

#[test]
fn training_is_byte_deterministic() {
    let t = taxonomy();
    let cfg = TrainConfig { seed: 9, ..TrainConfig::default() };
    let a = train(&t, &corpus(), &cfg, None).unwrap();
    let b = train(&t, &corpus(), &cfg, None).unwrap();
    assert_eq!(a.to_bytes(), b.to_bytes());
}

#[test]
fn small_rate_fine_tuning_does_not_raise_the_loss() {
    use taxmerge::classifier::{mean_loss, Example};
    let t = taxonomy();
    let d = corpus();
    let m = train(&t, &d, &TrainConfig { epochs: 1, ..TrainConfig::default() }, None).unwrap();
    let ex = Example::from_dataset(&t, &d).unwrap();
    let cfg = TrainConfig { learning_rate: 0.01, ..TrainConfig::fine_tune() };
    let tuned = train(&t, &d, &cfg, Some(&m)).unwrap();
    assert!(mean_loss(&tuned, &ex, 0.0) <= mean_loss(&m, &ex, 0.0) + 1e-12);
}

#[test]
fn model_refuses_a_foreign_taxonomy() {
    let t = taxonomy();
    let m = train(&t, &corpus(), &TrainConfig::default(), None).unwrap();
    let other = Taxonomy::parse("No-hate\nHate\n  Target_of_hate\n    Jews\n").unwrap();
    assert!(matches!(m.predict(&other, "ritual"), Err(Error::FingerprintMismatch)));
    assert!(matches!(train(&other, &corpus(), &TrainConfig::default(), Some(&m)), Err(Error::FingerprintMismatch)));
}

#[test]
fn truncated_model_file_is_rejected() {
    let t = taxonomy();
    let m = train(&t, &corpus(), &TrainConfig::default(), None).unwrap();
    let bytes = m.to_bytes();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cut.bin");
    std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
    assert!(matches!(load_model(&path), Err(Error::Format(_))));
}
