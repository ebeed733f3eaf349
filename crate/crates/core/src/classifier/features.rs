//! Hashed bag-of-words features.

use crate::rng::fnv1a64;

/// Width of the hashed feature space.
pub const FEATURE_DIM: usize = 1 << 18;

/// Separator between the two tokens of a bigram feature.
const BIGRAM_SEP: char = '\u{1f}';

/// Sparse feature vector, sorted by index, L2 norm 1 (or empty).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeatureVector {
    entries: Vec<(u32, f64)>,
}

impl FeatureVector {
    /// Builds a vector from raw `(index, value)` pairs: duplicates are summed,
    /// zeros dropped, and the result L2-normalized.
    pub fn from_counts(pairs: impl IntoIterator<Item = (u32, f64)>) -> Self {
        let mut entries: Vec<(u32, f64)> = pairs.into_iter().collect();
        entries.sort_by_key(|&(i, _)| i);
        let mut merged: Vec<(u32, f64)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            match merged.last_mut() {
                Some((j, acc)) if *j == i => *acc += v,
                _ => merged.push((i, v)),
            }
        }
        merged.retain(|&(_, v)| v != 0.0);
        let norm = merged.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, v) in &mut merged {
                *v /= norm;
            }
        }
        FeatureVector { entries: merged }
    }

    /// Takes `entries` as they are; callers guarantee sorted unique indices.
    pub fn from_raw(entries: Vec<(u32, f64)>) -> Self {
        FeatureVector { entries }
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }
}

/// Maximal runs of Unicode alphanumerics and `+`, lowercased.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '+'))
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

pub fn feature_index(feature: &str) -> u32 {
    (fnv1a64(feature.as_bytes()) % FEATURE_DIM as u64) as u32
}

/// Unigrams and adjacent bigrams, hashed with FNV-1a into [`FEATURE_DIM`]
/// buckets, counted and L2-normalized.
pub fn featurize(text: &str) -> FeatureVector {
    let tokens = tokenize(text);
    let unigrams = tokens.iter().map(|t| feature_index(t));
    let bigrams = tokens
        .windows(2)
        .map(|w| feature_index(&format!("{}{BIGRAM_SEP}{}", w[0], w[1])));
    FeatureVector::from_counts(unigrams.chain(bigrams).map(|i| (i, 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text() {
        assert!(featurize("").is_empty());
        assert!(featurize("  ...  ").is_empty());
    }

    #[test]
    fn hate_speech_has_three_unit_share_features() {
        let f = featurize("Hate speech");
        let expect: Vec<u32> = {
            let mut v = vec![
                feature_index("hate"),
                feature_index("speech"),
                feature_index("hate\u{1f}speech"),
            ];
            v.sort_unstable();
            v
        };
        let got: Vec<u32> = f.entries().iter().map(|&(i, _)| i).collect();
        assert_eq!(got, expect);
        for &(_, v) in f.entries() {
            assert!((v - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn tokenizer_keeps_plus_and_unicode() {
        assert_eq!(tokenize("LGBT+ rights!"), vec!["lgbt+", "rights"]);
        assert_eq!(tokenize("Über-Straße, 42x"), vec!["über", "straße", "42x"]);
        assert_eq!(tokenize("old.people"), vec!["old", "people"]);
    }

    #[test]
    fn repeated_tokens_are_counted() {
        let f = featurize("a a");
        // unigram a (count 2) and bigram a␟a (count 1)
        let a = feature_index("a");
        let v = f.entries().iter().find(|&&(i, _)| i == a).unwrap().1;
        assert!((v - 2.0 / 5f64.sqrt()).abs() < 1e-15);
        assert!((f.norm() - 1.0).abs() < 1e-12);
    }
}
