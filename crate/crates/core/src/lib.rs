//! Lelong mass profiles, Grassmannian slices and growth orders of positive
//! currents on `C^n`.

pub mod bundled;
pub mod currents;
pub mod error;
pub mod experiments;
pub mod forms;
pub mod geometry;
pub mod holo;
pub mod mass;
pub mod orders;
pub mod rng;
pub mod stats;

pub use currents::{
    positivity_check, restrict_current, ConstForm, Current, PositivityReport, ProductSpace, PshFunction,
};
pub use error::{Error, Result};
pub use geometry::{
    frame_embed, sample_ball, sample_grassmannian, sample_sphere, CVector, Frame, SampleBatch, C64,
};
pub use holo::{AffineForm, HoloFunction, PolynomialMap};
pub use mass::{
    count_zeros_disc, directional_m_profile, directional_n_profile, lelong_jensen_check, nu_profile,
    slice_profile, spherical_mean, DirectionalProfile, RadialGrid, RadialProfile, RegionSpec,
};
pub use orders::{
    build_chi, check_proximate_order, estimate_order, estimate_type, is_algebraic, OrderEstimate, OrderResult,
    ProximateOrder, TypeClass, TypeEstimate, TypeThresholds,
};
pub use experiments::{
    crofton_check, crofton_check_frames, directional_order_check, ratio_degeneracy_check, slice_order_survey, theorem1_check, CapSpec,
    ExperimentReport,
};
