//! Bundled taxonomy, mapping and directive files.
//!
//! - [`VIDGEN_BASE`]: the base taxonomy before merging.
//! - [`GENERAL_V1`]: the merged general taxonomy with `Black`, `White` and
//!   `Non_white` as siblings under `Skin_color`.
//! - [`GENERAL_V1A`]: the same taxonomy after moving `Black` under
//!   `Non_white`; 23 classes and 43 leaves.
//! - [`MERGE_V1`] turns the base into `GENERAL_V1`; [`REPARENT_BLACK`] turns
//!   `GENERAL_V1` into `GENERAL_V1A`.
//! - [`VIDGEN_MAP`] and [`FANTON_MAP`] map the two datasets' label strings
//!   onto `GENERAL_V1` paths.

pub const VIDGEN_BASE: &str = include_str!("../fixtures/vidgen_base.tax");
pub const GENERAL_V1: &str = include_str!("../fixtures/general_v1.tax");
pub const GENERAL_V1A: &str = include_str!("../fixtures/general_v1a.tax");
pub const MERGE_V1: &str = include_str!("../fixtures/merge_v1.dir");
pub const REPARENT_BLACK: &str = include_str!("../fixtures/reparent_black.dir");
pub const VIDGEN_MAP: &str = include_str!("../fixtures/vidgen.map");
pub const FANTON_MAP: &str = include_str!("../fixtures/fanton.map");

/// `(file name, contents)` of every bundled fixture.
pub const ALL: &[(&str, &str)] = &[
    ("vidgen_base.tax", VIDGEN_BASE),
    ("general_v1.tax", GENERAL_V1),
    ("general_v1a.tax", GENERAL_V1A),
    ("merge_v1.dir", MERGE_V1),
    ("reparent_black.dir", REPARENT_BLACK),
    ("vidgen.map", VIDGEN_MAP),
    ("fanton.map", FANTON_MAP),
];
