//! Lelong mass profiles: `nu_T(r)`, slice profiles, directional profiles and
//! the directional Lelong-Jensen balance.

pub mod directional;
pub mod grid;
pub mod profile;
pub mod region;
pub mod spherical;
pub mod zeros;

pub use directional::{directional_m_profile, directional_n_profile, lelong_jensen_check, LelongJensenReport};
pub use grid::{Direction, DirectionalProfile, ProfileMethod, RadialGrid, RadialProfile};
pub use profile::{const_form_exact_profile, nu_profile, slice_profile};
pub use region::{RegionShape, RegionSpec};
pub use spherical::{lelong_jensen_profile, spherical_mean, MIN_BUDGET};
pub use zeros::{count_zeros_disc, zero_count_profile, DEFAULT_CONTOUR_BUDGET};
