//! One synthetic positive case, end to end, from in-memory inputs.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::compositor::{blend, derive_mask, stamp_tube, DEFAULT_MASK_THRESHOLD};
use crate::error::{Error, Result};
use crate::landmarks::{extract_landmarks, ClavicleLandmarks, ClavicleMask};
use crate::raster::Raster;
use crate::trajectory::{interpolate_bspline, sample_control_points, Point, TrajectoryParams};
use crate::tube_profile::ProfileBank;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub trajectory: TrajectoryParams,
    /// Inclusive range the blend weight is drawn from.
    pub blend_weight_range: (f64, f64),
    pub mask_threshold: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            trajectory: TrajectoryParams::default(),
            blend_weight_range: (0.1, 0.2),
            mask_threshold: DEFAULT_MASK_THRESHOLD,
        }
    }
}

impl SynthParams {
    pub fn validate(&self, image_height: usize) -> Result<()> {
        self.trajectory.validate(image_height)?;
        let (lo, hi) = self.blend_weight_range;
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return Err(Error::invalid(
                "blend_weight_range",
                format!("[{lo}, {hi}] is not an ordered subrange of [0, 1]"),
            ));
        }
        if !(self.mask_threshold > 0.0 && self.mask_threshold < 1.0) {
            return Err(Error::invalid(
                "mask_threshold",
                format!("{} is outside (0, 1)", self.mask_threshold),
            ));
        }
        Ok(())
    }
}

/// Everything needed to reproduce a case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseMeta {
    pub source_case_id: String,
    pub seed: u64,
    pub angle: u16,
    pub blend_weight: f64,
    pub control_points: Vec<Point>,
    pub landmarks: ClavicleLandmarks,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCase {
    /// Blended radiograph, values in `[0, 1]`.
    pub image: Raster<f64>,
    pub mask: Raster<bool>,
    pub label: bool,
    pub meta: CaseMeta,
}

/// Plant one tube into `radiograph`.
///
/// Draw order on `rng`: control points (see [`sample_control_points`]), the
/// profile index, then the blend weight. `seed` is only recorded in the
/// metadata; the caller is expected to have seeded `rng` from it.
pub fn synthesize<R: Rng + ?Sized>(
    radiograph: &Raster<f64>,
    clavicles: &ClavicleMask,
    profiles: &ProfileBank,
    params: &SynthParams,
    seed: u64,
    rng: &mut R,
) -> Result<SyntheticCase> {
    let (width, height) = radiograph.dims();
    clavicles.pixels.ensure_dims(width, height)?;
    params.validate(height)?;
    if profiles.is_empty() {
        return Err(Error::invalid("profile angles", "angle set is empty"));
    }

    let landmarks = extract_landmarks(clavicles)?;
    let control_points = sample_control_points(&landmarks, &params.trajectory, width, height, rng)?;
    let curve = interpolate_bspline(&control_points, params.trajectory.samples_for(height))?;

    let (angle, profile) = profiles.entry(rng.gen_range(0..profiles.len()));
    let overlay =
        stamp_tube(&curve, profile, width, height)?.with_mask_threshold(params.mask_threshold);
    let mask = derive_mask(&overlay);

    let (lo, hi) = params.blend_weight_range;
    let blend_weight = rng.gen_range(lo..=hi);
    let image = blend(radiograph, &overlay, blend_weight)?;

    let label = mask.as_slice().iter().any(|&m| m);
    Ok(SyntheticCase {
        image,
        mask,
        label,
        meta: CaseMeta {
            source_case_id: clavicles.source_id.clone(),
            seed,
            angle,
            blend_weight,
            control_points,
            landmarks,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tube_profile::{TubeCrossSection, CANONICAL_ANGLES};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fixture() -> (Raster<f64>, ClavicleMask) {
        let img = Raster::from_fn(224, 224, |x, y| ((x + 2 * y) % 200) as f64 / 255.0);
        let mask = Raster::from_fn(224, 224, |x, y| {
            (60..100).contains(&y) && ((50..90).contains(&x) || (135..175).contains(&x))
        });
        (img, ClavicleMask::new(mask, "fixture"))
    }

    #[test]
    fn case_invariants() {
        let (img, cl) = fixture();
        let bank = ProfileBank::new(&TubeCrossSection::default(), &CANONICAL_ANGLES).unwrap();
        let p = SynthParams::default();
        let case = synthesize(&img, &cl, &bank, &p, 9, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert!(case.label);
        assert_eq!(
            case.meta.landmarks,
            ClavicleLandmarks {
                mid_x: 112,
                low_y: 99
            }
        );
        assert!((0.1..=0.2).contains(&case.meta.blend_weight));
        assert!(CANONICAL_ANGLES.contains(&case.meta.angle));
        for ((o, i), m) in case
            .image
            .as_slice()
            .iter()
            .zip(img.as_slice())
            .zip(case.mask.as_slice())
        {
            assert!(*o >= *i && *o <= 1.0);
            if *m {
                assert!(*o > *i);
            }
        }
        let again = synthesize(&img, &cl, &bank, &p, 9, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(case, again);
    }

    #[test]
    fn single_angle_is_always_used() {
        let (img, cl) = fixture();
        let bank = ProfileBank::new(&TubeCrossSection::default(), &[60]).unwrap();
        for s in 0..5 {
            let c = synthesize(
                &img,
                &cl,
                &bank,
                &SynthParams::default(),
                s,
                &mut ChaCha8Rng::seed_from_u64(s),
            )
            .unwrap();
            assert_eq!(c.meta.angle, 60);
        }
    }

    #[test]
    fn mask_shape_checked() {
        let (img, _) = fixture();
        let cl = ClavicleMask::new(Raster::filled(100, 100, false), "x");
        let bank = ProfileBank::new(&TubeCrossSection::default(), &[0]).unwrap();
        let r = synthesize(
            &img,
            &cl,
            &bank,
            &SynthParams::default(),
            0,
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        assert!(matches!(r, Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn params_checked() {
        let bad = SynthParams {
            blend_weight_range: (0.3, 0.2),
            ..Default::default()
        };
        assert!(bad.validate(224).is_err());
        let bad = SynthParams {
            mask_threshold: 1.0,
            ..Default::default()
        };
        assert!(bad.validate(224).is_err());
    }
}
