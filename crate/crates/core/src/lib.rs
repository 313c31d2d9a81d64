//! Allocation-only synthesis primitives for endotracheal (ET) tube overlays.
//!
//! The crate is `no_std` and needs only `alloc`. Everything here is a pure
//! function of its inputs plus, where randomness is involved, an explicit
//! caller-supplied random stream. File formats, case selection and the CLI
//! live in the `etsynth` companion crate.
//!
//! Pipeline, per case:
//! 1. [`tube_profile`]: rasterize the tube cross-section, project it with a
//!    Radon transform, and reduce each projection to a 15-sample profile.
//! 2. [`landmarks`]: locate the trachea anchor from a clavicle mask.
//! 3. [`trajectory`]: jitter control points below the anchor and fit an
//!    interpolating cubic B-spline through them.
//! 4. [`compositor`]: stamp the profile along the curve, threshold the
//!    overlay into a mask, and blend it into the radiograph.
//!
//! [`synth`] strings the four stages together.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod compositor;
pub mod error;
pub mod landmarks;
pub mod raster;
pub mod synth;
pub mod trajectory;
pub mod tube_profile;

pub use compositor::{blend, derive_mask, stamp_tube, TubeOverlay, DEFAULT_MASK_THRESHOLD};
pub use error::{Error, Result};
pub use landmarks::{extract_landmarks, ClavicleLandmarks, ClavicleMask};
pub use raster::Raster;
pub use synth::{synthesize, CaseMeta, SynthParams, SyntheticCase};
pub use trajectory::{
    interpolate_bspline, sample_control_points, Point, TrajectoryCurve, TrajectoryParams,
};
pub use tube_profile::{
    radon_project, rasterize_cross_section, sample_profile, AttenuationGrid, ProfileBank,
    ProjectionProfile, RawProjection, TubeCrossSection, CANONICAL_ANGLES, PROFILE_LEN,
};
