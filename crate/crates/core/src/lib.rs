//! Merge heterogeneous hate-speech annotation taxonomies into one general
//! hierarchy, re-annotate datasets into an ancestor-closed multi-label
//! encoding, and train and diagnose a multi-label classifier over iterative
//! cycles.
//!
//! The guide under `book/` walks through every stage; its code listings are
//! compiled as doc-tests of this crate.

pub mod classifier;
pub mod dataset;
pub mod encoding;
pub mod error;
pub mod evaluation;
pub mod fixtures;
pub mod mapping;
pub mod pipeline;
pub mod rng;
pub mod taxonomy;

pub use classifier::{featurize, ClassifierModel, FeatureVector, TrainConfig};
pub use dataset::{Dataset, Record};
pub use encoding::LabelVector;
pub use error::{Error, Result};
pub use evaluation::{ClasswiseReport, EvalSummary, MislabelDistribution};
pub use mapping::{LabelMapping, MappingReport, Resolved};
pub use rng::Rng;
pub use taxonomy::{Census, EditDirective, NodePath, Taxonomy, TaxonomyNode};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/taxonomy.md")]
    struct Taxonomies;
    #[doc = include_str!("../../../book/src/mapping.md")]
    struct Mappings;
    #[doc = include_str!("../../../book/src/encoding.md")]
    struct Encoding;
    #[doc = include_str!("../../../book/src/datasets.md")]
    struct Datasets;
    #[doc = include_str!("../../../book/src/classifier.md")]
    struct Classifier;
    #[doc = include_str!("../../../book/src/evaluation.md")]
    struct Evaluation;
    #[doc = include_str!("../../../book/src/cycles.md")]
    struct Cycles;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
