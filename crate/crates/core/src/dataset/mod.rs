//! Dataset planning, materialization and subset selection.

mod build;
mod manifest;
mod plan;
mod subsets;
mod tags;

pub use build::{build, BuildOptions, BuildReport, JobFailure, CONFIG_ECHO_FILE};
pub use manifest::{Counts, DatasetManifest, ManifestHeader, ManifestRecord, MANIFEST_FILE, MANIFEST_FORMAT};
pub use plan::{depth_path, function_path, job_counts, plan_dataset, surface_path, JobKind, RenderJob};
pub use subsets::{
    classify, in_test_pool, in_training_pool, is_extreme_view, is_generic_view, make_test_set,
    make_training_set, make_validation_set, subset_seed, tagged_pairs, test_classes, ImageClass, Pair,
    BASELINE_VIEW, BASE_SPACING, TRAIN_GRID_ANGLES, TRAIN_LINE_SPACING,
};
pub use tags::{SubsetTag, TestSet, TrainVariant};
