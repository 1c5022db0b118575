//! Synthetic grid-marked surface plots paired with ground-truth depth maps.
//!
//! The pipeline has three stages, each in its own module:
//!
//! 1. [`gauss`] draws random sums of 2D Gaussians and samples them on a grid.
//! 2. [`geometry`] projects the heightfield orthographically into a depth map.
//! 3. [`render`] draws the same surface as a binary grid/line-marked image with
//!    hidden parts removed.
//!
//! [`dataset`] plans and materializes whole datasets and their subsets;
//! [`metrics`] scores predicted depth maps against ground truth.

pub mod config;
pub mod dataset;
pub mod error;
pub mod gauss;
pub mod geometry;
pub mod imageio;
pub mod metrics;
pub mod raster;
pub mod render;

pub use config::Config;
pub use error::{Error, Result};
pub use gauss::{eval_function, synth_function, FieldGrid, GaussianComponent, SurfaceFunction};
pub use geometry::{frame_from_viewpoint, project_point, render_depth, DepthMap, ProjectionFrame, Viewpoint};
pub use render::{binarize_real_plot, line_mask, render_surface, GridSpec, Pattern, SurfaceImage, Threshold};
