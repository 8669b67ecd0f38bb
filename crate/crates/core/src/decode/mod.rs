//! Loudspeaker decoding and decoder analysis.
mod analysis;
mod decoder;
mod layout;
mod vbap;

pub use analysis::{
    analyze_decoder, energy_direction, energy_vectors, inside_layout, square_grid, sweet_area_radius,
    AnalysisReport, EnergyVectors, PositionSummary, VectorEntry, SWEET_AREA_THRESHOLD_DEG,
};
pub use decoder::{
    apply_decoder, build_decoder, build_decoder_with, max_re_weights, DecoderMatrix, DecoderMethod,
    DecoderOptions, Weighting,
};
pub use layout::{load_layout, Geometry, Speaker, SpeakerLayout};
pub use vbap::Vbap;
