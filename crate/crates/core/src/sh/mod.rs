//! Real spherical harmonics, mode indexing and spherical quadrature.
//!
//! Harmonics are real-valued, carry no Condon–Shortley phase and are
//! ordered by ambisonic channel number (ACN). SN3D is the base
//! normalization; N3D and FuMa are derived per channel.

mod direction;
mod harmonics;
mod mode;
mod quadrature;

pub use direction::Direction;
pub(crate) use direction::angle_between;
pub use harmonics::{
    normalization_gain, sh_sn3d, sh_sn3d_into, sh_vector, zonal_legendre, Normalization,
};
pub use mode::{acn_index, channel_count, mode_from_acn, order_from_channels, ModeIndex};
pub use quadrature::{
    gauss_legendre, quadrature_grid, sh_analysis, sh_synthesis, QuadratureGrid,
};
