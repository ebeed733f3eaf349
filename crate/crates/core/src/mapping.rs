//! Source-schema label strings → general-taxonomy paths.
//!
//! Matching is word-level: both the mapping file's source labels and the
//! labels found in a dataset pass through [`normalize_label`] before lookup,
//! so `old.people`, `Old People` and `OLD_PEOPLE` all hit the same entry.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::taxonomy::{NodePath, PathTranslation, Taxonomy};

/// Lowercases and collapses runs of `.`, `_`, `/` and whitespace into a
/// single `_`, trimming separators at both ends.
pub fn normalize_label(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut pending_sep = false;
    for c in s.chars() {
        if c == '.' || c == '_' || c == '/' || c.is_whitespace() {
            pending_sep = !out.is_empty();
            continue;
        }
        if pending_sep {
            out.push('_');
            pending_sep = false;
        }
        out.extend(c.to_lowercase());
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Target {
    Path(NodePath),
    Drop,
}

/// Outcome of looking up one source label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Resolved {
    Path(NodePath),
    Drop,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMapping {
    entries: Vec<(String, Target)>,
    by_key: HashMap<String, usize>,
}

/// Counts from one [`LabelMapping::apply`] run. Every label occurrence lands
/// in exactly one of `mapped`, `dropped` or `unknown`.
#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct MappingReport {
    pub mapped: usize,
    pub dropped: usize,
    /// Raw label strings without an entry, one per occurrence.
    pub unknown: Vec<String>,
    /// Records left without any path.
    pub emptied: usize,
}

impl MappingReport {
    pub fn total(&self) -> usize {
        self.mapped + self.dropped + self.unknown.len()
    }
}

impl LabelMapping {
    pub fn new(entries: Vec<(String, Target)>) -> Result<Self> {
        let mut by_key = HashMap::new();
        for (i, (src, _)) in entries.iter().enumerate() {
            if by_key.insert(normalize_label(src), i).is_some() {
                return Err(Error::Mapping {
                    line: 0,
                    msg: format!("source label {src:?} collides with an earlier entry after normalization"),
                });
            }
        }
        Ok(LabelMapping { entries, by_key })
    }

    /// Parses `SOURCE<TAB>TARGET` lines; TARGET is a `/`-path or `DROP`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        let mut keys: HashMap<String, usize> = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: String| Error::Mapping { line: line_no, msg };
            let (src, target) = line
                .split_once('\t')
                .ok_or_else(|| bad("expected SOURCE<TAB>TARGET".into()))?;
            let target = target.trim_end();
            let target = if target == "DROP" {
                Target::Drop
            } else {
                Target::Path(
                    target
                        .parse()
                        .map_err(|_| bad(format!("{target:?} is neither a path nor DROP")))?,
                )
            };
            if let Some(prev) = keys.insert(normalize_label(src), line_no) {
                return Err(bad(format!("{src:?} duplicates the label on line {prev}")));
            }
            entries.push((src.to_string(), target));
        }
        LabelMapping::new(entries)
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (src, target) in &self.entries {
            match target {
                Target::Path(p) => writeln!(out, "{src}\t{p}"),
                Target::Drop => writeln!(out, "{src}\tDROP"),
            }
            .expect("write to String");
        }
        out
    }

    pub fn entries(&self) -> &[(String, Target)] {
        &self.entries
    }

    /// Fails with [`Error::MappingUnbound`] if a target is missing from `t`.
    pub fn validate(&self, t: &Taxonomy) -> Result<()> {
        for (_, target) in &self.entries {
            if let Target::Path(p) = target {
                if !t.contains(p) {
                    return Err(Error::MappingUnbound(p.to_string()));
                }
            }
        }
        Ok(())
    }

    pub fn resolve(&self, source_label: &str) -> Resolved {
        match self.by_key.get(&normalize_label(source_label)) {
            None => Resolved::Unknown,
            Some(&i) => match &self.entries[i].1 {
                Target::Path(p) => Resolved::Path(p.clone()),
                Target::Drop => Resolved::Drop,
            },
        }
    }

    /// Follows a round of taxonomy edits. Targets whose node was removed
    /// become `DROP`; targets that never existed are left as they are.
    pub fn rebind(&self, tr: &PathTranslation) -> LabelMapping {
        let entries = self
            .entries
            .iter()
            .map(|(src, target)| {
                let t = match target {
                    Target::Path(p) if tr.was_removed(p) => Target::Drop,
                    Target::Path(p) => Target::Path(tr.translate(p).cloned().unwrap_or_else(|| p.clone())),
                    Target::Drop => Target::Drop,
                };
                (src.clone(), t)
            })
            .collect();
        LabelMapping { entries, by_key: self.by_key.clone() }
    }

    /// Replaces every record's source labels with taxonomy paths.
    ///
    /// Records whose labels all drop or are unknown stay in the output with
    /// no labels; filtering them is [`clean`](crate::dataset::clean)'s job.
    pub fn apply(&self, t: &Taxonomy, dataset: &Dataset) -> Result<(Dataset, MappingReport)> {
        self.validate(t)?;
        let mut report = MappingReport::default();
        let mut records = Vec::with_capacity(dataset.records.len());
        for rec in &dataset.records {
            let mut labels: Vec<String> = Vec::new();
            for raw in &rec.labels {
                match self.resolve(raw) {
                    Resolved::Path(p) => {
                        report.mapped += 1;
                        let s = p.to_string();
                        if !labels.contains(&s) {
                            labels.push(s);
                        }
                    }
                    Resolved::Drop => report.dropped += 1,
                    Resolved::Unknown => report.unknown.push(raw.clone()),
                }
            }
            if labels.is_empty() {
                report.emptied += 1;
            }
            let mut out = rec.clone();
            out.labels = labels;
            out.soft = None;
            records.push(out);
        }
        Ok((Dataset::bound(records, t), report))
    }
}

/// Free-function form of [`LabelMapping::resolve`].
pub fn resolve(m: &LabelMapping, source_label: &str) -> Resolved {
    m.resolve(source_label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Record;
    use crate::fixtures;

    fn v1() -> Taxonomy {
        Taxonomy::parse(fixtures::GENERAL_V1).unwrap()
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_label("old.people"), "old_people");
        assert_eq!(normalize_label("PEOPLE OF COLOR"), "people_of_color");
        assert_eq!(normalize_label(""), "");
        assert_eq!(normalize_label("  a.._/ b  "), "a_b");
        assert_eq!(normalize_label("LGBT+"), "lgbt+");
        assert_eq!(normalize_label("..."), "");
    }

    #[test]
    fn fanton_lookup() {
        let m = LabelMapping::parse(fixtures::FANTON_MAP).unwrap();
        m.validate(&v1()).unwrap();
        assert_eq!(
            m.resolve("JEWS"),
            Resolved::Path("/Hate/Target_of_hate/Religion_or_belief/Jews".parse().unwrap())
        );
        assert_eq!(m.resolve("OTHER"), Resolved::Drop);
        assert_eq!(m.resolve("zorgon"), Resolved::Unknown);
        assert_eq!(m.resolve(""), Resolved::Unknown);
        assert_eq!(m.resolve("people.of.color"), m.resolve("PEOPLE OF COLOR"));
        assert_eq!(m.entries().len(), 11);
    }

    #[test]
    fn vidgen_fixture_binds_and_covers_dataset_only_labels() {
        let t = v1();
        let m = LabelMapping::parse(fixtures::VIDGEN_MAP).unwrap();
        m.validate(&t).unwrap();
        for (label, leaf) in [
            ("old.people", "Old"),
            ("russian", "Russian"),
            ("lgbtq", "LGBTQ+"),
            ("eastern.europe", "East_E"),
            ("non.white", "Non_white"),
        ] {
            match m.resolve(label) {
                Resolved::Path(p) => assert_eq!(p.name(), leaf),
                other => panic!("{label}: {other:?}"),
            }
        }
        assert!(m.validate(&Taxonomy::parse(fixtures::VIDGEN_BASE).unwrap()).is_err());
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(LabelMapping::parse("JEWS /x\n"), Err(Error::Mapping { line: 1, .. })));
        assert!(matches!(LabelMapping::parse("A\tnot-a-path\n"), Err(Error::Mapping { .. })));
        assert!(matches!(
            LabelMapping::parse("a.b\tDROP\nA B\tDROP\n"),
            Err(Error::Mapping { line: 2, .. })
        ));
        let m = LabelMapping::parse("X\t/Hate/Nowhere\n").unwrap();
        assert!(matches!(m.validate(&v1()), Err(Error::MappingUnbound(_))));
    }

    fn rec(id: &str, labels: &[&str]) -> Record {
        Record::new(id, format!("text {id}"), labels.iter().map(|s| s.to_string()).collect(), "src")
    }

    #[test]
    fn apply_examples() {
        let t = v1();
        let m = LabelMapping::parse(fixtures::FANTON_MAP).unwrap();
        let d = Dataset::new(vec![rec("a", &["JEWS", "WOMEN"]), rec("b", &["OTHER"]), rec("c", &["zorgon"])]);
        let (out, report) = m.apply(&t, &d).unwrap();
        assert_eq!(
            out.records[0].labels,
            vec![
                "/Hate/Target_of_hate/Religion_or_belief/Jews".to_string(),
                "/Hate/Target_of_hate/Physical_attributes/Gender/Women".to_string()
            ]
        );
        assert!(out.records[1].labels.is_empty());
        assert_eq!(report.mapped, 2);
        assert_eq!(report.dropped, 1);
        assert_eq!(report.unknown, vec!["zorgon".to_string()]);
        assert_eq!(report.emptied, 2);
        assert_eq!(out.records.len(), 3);

        let (empty, r) = m.apply(&t, &Dataset::new(vec![])).unwrap();
        assert!(empty.records.is_empty());
        assert_eq!(r, MappingReport::default());

        let unbound = LabelMapping::parse("X\t/Hate/Nowhere\n").unwrap();
        assert!(matches!(unbound.apply(&t, &d), Err(Error::MappingUnbound(_))));
    }

    #[test]
    fn rebind_follows_reparent() {
        let t = v1();
        let ds = crate::taxonomy::parse_directives(fixtures::REPARENT_BLACK).unwrap();
        let (t2, tr) = t.apply_directives_traced(&ds).unwrap();
        let m = LabelMapping::parse(fixtures::VIDGEN_MAP).unwrap().rebind(&tr);
        m.validate(&t2).unwrap();
        match m.resolve("bla") {
            Resolved::Path(p) => assert_eq!(
                p.to_string(),
                "/Hate/Target_of_hate/Physical_attributes/Skin_color/Non_white/Black"
            ),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn serialize_round_trip() {
        let m = LabelMapping::parse(fixtures::FANTON_MAP).unwrap();
        assert_eq!(LabelMapping::parse(&m.serialize()).unwrap(), m);
    }
}
