//! Keyword-planted stand-in corpora for the two hate-speech datasets, the
//! non-hate pool and the external binary set.
//!
//! Every labelled node gets three made-up signature words, and a record's
//! text contains the words of its labels plus a few shared filler words.
//! `Non_white` reuses two of the three `Black` words, so a model trained
//! only on the first dataset mistakes people-of-colour records for `Black`.
//! Pool records draw from their own vocabulary.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{save_ets, save_jsonl, Dataset, EtsRecord, Record, NO_HATE};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::mapping::{LabelMapping, Target};
use crate::rng::Rng;

use super::CycleConfig;

/// Source labels of the first dataset that never occur in the generated
/// copy of it: they stand in for classes only the second dataset carries.
const HELD_BACK: &[&str] = &["non.white", "lgbtq"];
const TYPE_CODES: &[&str] = &["derogation", "animosity", "threatening", "support", "dehumanization"];
/// Relative frequency of first-schema target codes; unlisted codes weigh 1.
const FREQUENT: &[(&str, usize)] =
    &[("bla", 20), ("wom", 3), ("jew", 3), ("mus", 3), ("immig", 2), ("trans", 2), ("gay.man", 2)];
const DROPPED_CODE1: &str = "notgiven";
const DROPPED_CODE2: &str = "OTHER";

const FILLER: &[&str] = &[
    "the", "they", "them", "people", "all", "this", "that", "just", "really", "about", "again", "now", "here",
    "there", "always", "never", "so", "very", "every", "day", "think", "say", "said", "know", "those", "these",
    "why", "what", "who", "when", "town", "street", "online", "news", "story", "thing", "more", "much", "still",
    "even",
];

const CONFUSED: &str = "/Hate/Target_of_hate/Physical_attributes/Skin_color/Non_white";
const CONFOUNDER: &str = "/Hate/Target_of_hate/Physical_attributes/Skin_color/Black";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n1: usize,
    pub n2: usize,
    pub n_pool: usize,
    pub seed: u64,
}

/// Facts about a generated corpus, written next to it as `manifest.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub spec: SyntheticSpec,
    pub n_ets: usize,
    pub ets_hate: usize,
    /// The class planted to be confused with `confounder`.
    pub confused: String,
    pub confounder: String,
    /// Signature words per taxonomy path.
    pub vocabulary: BTreeMap<String, Vec<String>>,
    pub pool_vocabulary: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticCorpus {
    /// Labels are source codes of the first schema.
    pub dataset1: Dataset,
    /// Labels are source strings of the second schema.
    pub dataset2: Dataset,
    pub pool: Dataset,
    pub ets: Vec<EtsRecord>,
    pub manifest: Manifest,
}

struct Vocab {
    words: BTreeMap<String, Vec<String>>,
    pool: Vec<String>,
}

fn word(rng: &mut Rng, taken: &mut HashSet<String>) -> String {
    const ONSETS: &[&str] = &["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "sh", "tr", "gl"];
    const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "ai", "ou"];
    loop {
        let mut w = String::new();
        for _ in 0..3 {
            w.push_str(rng.choose(ONSETS));
            w.push_str(rng.choose(VOWELS));
        }
        if !FILLER.contains(&w.as_str()) && taken.insert(w.clone()) {
            return w;
        }
    }
}

fn build_vocab(seed: u64, paths: &[String]) -> Vocab {
    let mut rng = Rng::derive(seed, "synthetic/vocab");
    let mut taken = HashSet::new();
    let mut words = BTreeMap::new();
    for p in paths {
        if p == CONFUSED {
            continue;
        }
        let ws: Vec<String> = (0..3).map(|_| word(&mut rng, &mut taken)).collect();
        words.insert(p.clone(), ws);
    }
    if let Some(black) = words.get(CONFOUNDER).cloned() {
        let own = word(&mut rng, &mut taken);
        words.insert(CONFUSED.to_string(), vec![black[0].clone(), black[1].clone(), own]);
    }
    let pool = (0..60).map(|_| word(&mut rng, &mut taken)).collect();
    Vocab { words, pool }
}

fn targets(m: &LabelMapping) -> Vec<(String, String)> {
    m.entries()
        .iter()
        .filter_map(|(src, t)| match t {
            Target::Path(p) => Some((src.clone(), p.to_string())),
            Target::Drop => None,
        })
        .collect()
}

struct Generator<'a> {
    vocab: &'a Vocab,
    texts: HashSet<String>,
}

impl Generator<'_> {
    /// Signature words of `paths` plus filler, shuffled, unique across the corpus.
    fn text(&mut self, rng: &mut Rng, paths: &[&str]) -> String {
        loop {
            let mut tokens: Vec<&str> = Vec::new();
            for p in paths {
                tokens.extend(self.vocab.words[*p].iter().map(String::as_str));
            }
            for _ in 0..2 + rng.below(3) {
                tokens.push(*rng.choose(FILLER));
            }
            rng.shuffle(&mut tokens);
            let text = tokens.join(" ");
            if self.texts.insert(text.clone()) {
                return text;
            }
        }
    }

    fn pool_text(&mut self, rng: &mut Rng) -> String {
        loop {
            let mut tokens: Vec<&str> = Vec::new();
            for _ in 0..4 + rng.below(4) {
                tokens.push(rng.choose(&self.vocab.pool).as_str());
            }
            for _ in 0..2 + rng.below(2) {
                tokens.push(*rng.choose(FILLER));
            }
            rng.shuffle(&mut tokens);
            let text = tokens.join(" ");
            if self.texts.insert(text.clone()) {
                return text;
            }
        }
    }
}

fn weight(code: &str) -> usize {
    FREQUENT.iter().find(|(c, _)| *c == code).map_or(1, |&(_, w)| w)
}

fn weighted_pick(rng: &mut Rng, tgts: &[(String, String)]) -> usize {
    let total: usize = tgts.iter().map(|(c, _)| weight(c)).sum();
    let mut r = rng.below(total);
    for (i, (c, _)) in tgts.iter().enumerate() {
        let w = weight(c);
        if r < w {
            return i;
        }
        r -= w;
    }
    unreachable!("r < total")
}

/// `(text, labels)` of one first-schema record: a type code and one or two
/// target codes, occasionally an unmappable target.
fn record1(g: &mut Generator, rng: &mut Rng, types: &[(String, String)], tgts: &[(String, String)]) -> (String, Vec<String>) {
    let ty = rng.choose(types);
    let mut labels = vec![ty.0.clone()];
    let mut paths = vec![ty.1.as_str()];
    let roll = rng.below(20);
    if roll == 0 {
        labels.push(DROPPED_CODE1.to_string());
    } else {
        let first = weighted_pick(rng, tgts);
        let mut picked = vec![first];
        if roll <= 2 {
            let mut second = weighted_pick(rng, tgts);
            while second == first {
                second = weighted_pick(rng, tgts);
            }
            picked.push(second);
        }
        for i in picked {
            labels.push(tgts[i].0.clone());
            paths.push(tgts[i].1.as_str());
        }
    }
    (g.text(rng, &paths), labels)
}

/// A second-schema record: one target (two, now and then), plus the words of
/// an unannotated type of hate.
fn record2(g: &mut Generator, rng: &mut Rng, types: &[(String, String)], tgts: &[(String, String)]) -> (String, Vec<String>) {
    let ty = rng.choose(types);
    let mut paths = vec![ty.1.as_str()];
    let roll = rng.below(20);
    let labels = if roll == 0 {
        vec![DROPPED_CODE2.to_string()]
    } else {
        let n = if roll <= 2 { 2 } else { 1 };
        let mut labels = Vec::new();
        for i in rng.sample_indices(tgts.len(), n) {
            labels.push(tgts[i].0.clone());
            paths.push(tgts[i].1.as_str());
        }
        labels
    };
    (g.text(rng, &paths), labels)
}

/// Builds the corpus. Identical specs give identical corpora.
pub fn generate_synthetic(spec: SyntheticSpec) -> Result<SyntheticCorpus> {
    if spec.n1 < 100 || spec.n2 < 100 || spec.n_pool < 100 {
        return Err(Error::Config("synthetic sizes must be at least 100".into()));
    }
    let map1 = LabelMapping::parse(fixtures::VIDGEN_MAP)?;
    let map2 = LabelMapping::parse(fixtures::FANTON_MAP)?;
    let all1 = targets(&map1);
    let all2 = targets(&map2);
    let types: Vec<(String, String)> =
        all1.iter().filter(|(s, _)| TYPE_CODES.contains(&s.as_str())).cloned().collect();
    let tgts1: Vec<(String, String)> = all1
        .iter()
        .filter(|(s, _)| !TYPE_CODES.contains(&s.as_str()) && !HELD_BACK.contains(&s.as_str()))
        .cloned()
        .collect();

    let mut paths: Vec<String> = all1.iter().chain(&all2).map(|(_, p)| p.clone()).collect();
    paths.sort();
    paths.dedup();
    let vocab = build_vocab(spec.seed, &paths);
    let mut g = Generator { vocab: &vocab, texts: HashSet::new() };

    let mut rng = Rng::derive(spec.seed, "synthetic/dataset1");
    let dataset1 = Dataset::new(
        (0..spec.n1)
            .map(|i| {
                let (text, labels) = record1(&mut g, &mut rng, &types, &tgts1);
                Record::new(format!("d1-{i:05}"), text, labels, "dataset1")
            })
            .collect(),
    );

    let mut rng = Rng::derive(spec.seed, "synthetic/dataset2");
    let dataset2 = Dataset::new(
        (0..spec.n2)
            .map(|i| {
                let (text, labels) = record2(&mut g, &mut rng, &types, &all2);
                Record::new(format!("d2-{i:05}"), text, labels, "dataset2")
            })
            .collect(),
    );

    let mut rng = Rng::derive(spec.seed, "synthetic/pool");
    let pool = Dataset::new(
        (0..spec.n_pool)
            .map(|i| Record::new(format!("pool-{i:05}"), g.pool_text(&mut rng), vec![NO_HATE.to_string()], "pool"))
            .collect(),
    );

    let mut rng = Rng::derive(spec.seed, "synthetic/ets");
    // Hate texts of the external set name a target but no type of hate.
    let mut ets_targets: Vec<(String, String)> = tgts1.iter().chain(&all2).cloned().collect();
    ets_targets.sort_by(|a, b| a.1.cmp(&b.1));
    ets_targets.dedup_by(|a, b| a.1 == b.1);
    let n_ets = spec.n2;
    let ets_hate = n_ets / 2;
    let mut ets: Vec<EtsRecord> = (0..n_ets)
        .map(|i| {
            let text = if i >= ets_hate {
                g.pool_text(&mut rng)
            } else {
                let (_, p) = rng.choose(&ets_targets);
                g.text(&mut rng, &[p.as_str()])
            };
            EtsRecord { id: String::new(), text, hate: i < ets_hate }
        })
        .collect();
    rng.shuffle(&mut ets);
    for (i, r) in ets.iter_mut().enumerate() {
        r.id = format!("ets-{i:05}");
    }

    let manifest = Manifest {
        spec,
        n_ets,
        ets_hate,
        confused: CONFUSED.to_string(),
        confounder: CONFOUNDER.to_string(),
        vocabulary: vocab.words.clone(),
        pool_vocabulary: vocab.pool.clone(),
    };
    Ok(SyntheticCorpus { dataset1, dataset2, pool, ets, manifest })
}

impl SyntheticCorpus {
    /// Writes `dataset1.jsonl`, `dataset2.jsonl`, `pool.jsonl`, `ets.jsonl`
    /// and `manifest.json` into `dir`, together with the bundled taxonomy,
    /// mappings and reparent directive and a `config.json` tying them up.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        save_jsonl(&self.dataset1, &dir.join("dataset1.jsonl"))?;
        save_jsonl(&self.dataset2, &dir.join("dataset2.jsonl"))?;
        save_jsonl(&self.pool, &dir.join("pool.jsonl"))?;
        save_ets(&self.ets, &dir.join("ets.jsonl"))?;
        let manifest = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes") + "\n";
        let files = [
            ("manifest.json", manifest.as_str()),
            ("general_v1.tax", fixtures::GENERAL_V1),
            ("vidgen.map", fixtures::VIDGEN_MAP),
            ("fanton.map", fixtures::FANTON_MAP),
            ("reparent_black.dir", fixtures::REPARENT_BLACK),
        ];
        for (name, body) in files {
            let p = dir.join(name);
            std::fs::write(&p, body).map_err(|e| Error::io(&p, e))?;
        }
        let p = dir.join("config.json");
        std::fs::write(&p, suite_config(self.manifest.spec.seed).to_json()).map_err(|e| Error::io(&p, e))
    }
}

/// The config [`SyntheticCorpus::write`] places next to the files.
pub fn suite_config(seed: u64) -> CycleConfig {
    let mut cfg = CycleConfig::with_paths(
        "general_v1.tax",
        "dataset1.jsonl",
        "dataset2.jsonl",
        "pool.jsonl",
        "ets.jsonl",
        "vidgen.map",
        "fanton.map",
    );
    cfg.directives_path = Some("reparent_black.dir".into());
    cfg.seed = seed;
    cfg
}
