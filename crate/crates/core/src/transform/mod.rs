//! Manipulations of ambisonic signals.
mod directional;
mod dynamics;
mod horizontal;
mod mirror;
mod rotation;

pub use directional::{
    directional_gain, directional_gain_fn, directional_grid, directional_warp, extract_segment,
    SpatialWindow, WEIGHT_BANDWIDTH,
};
pub use dynamics::{
    compress, compressor_gain, uniform_process, CompressorParams, Detector, UniformKernel, RMS_WINDOW,
};
pub use horizontal::{horizontal_indices, horizontal_subset, HorizontalBuffer};
pub use mirror::{mirror, MirrorPlane};
pub use rotation::{rotate, rotate_matrix, RotationSpec, ShRotation};
