//! Tube rasterization along a centerline, mask thresholding and blending.
//!
//! Image coordinates put the center of pixel `(col, row)` at `(col, row)`,
//! with rows growing downward, matching the control-point convention.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::raster::Raster;
use crate::trajectory::TrajectoryCurve;
use crate::tube_profile::{ProjectionProfile, PROFILE_LEN};

pub const DEFAULT_MASK_THRESHOLD: f64 = 0.05;

/// Required clearance between the centerline and the left/right edges.
pub const HORIZONTAL_MARGIN: f64 = 8.0;

/// Largest distance from a stamp's center a splat may reach: half the
/// profile plus one pixel of bilinear footprint.
pub const STAMP_RADIUS: f64 = (PROFILE_LEN / 2) as f64 + 1.0;

/// Bilinear weights below this are rounding noise and do not count as cover.
const WEIGHT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct TubeOverlay {
    /// Per-pixel tube opacity in `[0, 1]`.
    pub opacity: Raster<f64>,
    pub profile_angle: f64,
    pub mask_threshold: f64,
}

impl TubeOverlay {
    pub fn with_mask_threshold(mut self, threshold: f64) -> Self {
        self.mask_threshold = threshold;
        self
    }

    pub fn is_empty(&self) -> bool {
        self.opacity.as_slice().iter().all(|&v| v == 0.0)
    }
}

/// Lay the profile across the curve at every dense point.
///
/// Each dense point contributes one stamp: the 15 profile samples placed one
/// pixel apart along the unit normal `(t.y, -t.x)`, sample 7 on the
/// centerline. Samples are splatted with bilinear weights and every pixel a
/// stamp touches takes the weight-normalized mean of the samples that reached
/// it, within [`STAMP_RADIUS`] of the dense point. Stamps are merged by
/// per-pixel maximum.
pub fn stamp_tube(
    curve: &TrajectoryCurve,
    profile: &ProjectionProfile,
    width: usize,
    height: usize,
) -> Result<TubeOverlay> {
    let max_x = width as f64 - 1.0 - HORIZONTAL_MARGIN;
    if let Some(p) = curve
        .dense_points
        .iter()
        .find(|p| !(p.x >= HORIZONTAL_MARGIN && p.x <= max_x) || !p.y.is_finite())
    {
        return Err(Error::OutOfBounds {
            what: "tube centerline",
            detail: format!(
                "point ({:.3}, {:.3}) leaves the {HORIZONTAL_MARGIN} px margin of a {width} px wide canvas",
                p.x, p.y
            ),
        });
    }

    let mut opacity = Raster::filled(width, height, 0.0f64);
    let center = (PROFILE_LEN / 2) as f64;
    // (pixel index, sum of weights, sum of weighted values)
    let mut touched: Vec<(usize, f64, f64)> = Vec::with_capacity(PROFILE_LEN * 4);

    for (c, t) in curve.dense_points.iter().zip(&curve.tangents) {
        touched.clear();
        let (nx, ny) = (t.y, -t.x);
        for (k, &value) in profile.samples.iter().enumerate() {
            let off = k as f64 - center;
            let (sx, sy) = (c.x + off * nx, c.y + off * ny);
            let (x0, y0) = (libm::floor(sx), libm::floor(sy));
            let (fx, fy) = (sx - x0, sy - y0);
            for (dx, wx) in [(0i64, 1.0 - fx), (1, fx)] {
                for (dy, wy) in [(0i64, 1.0 - fy), (1, fy)] {
                    let w = wx * wy;
                    if w < WEIGHT_EPS {
                        continue;
                    }
                    let (px, py) = (x0 as i64 + dx, y0 as i64 + dy);
                    if libm::hypot(px as f64 - c.x, py as f64 - c.y) > STAMP_RADIUS {
                        continue;
                    }
                    if px < 0 || py < 0 || px >= width as i64 || py >= height as i64 {
                        continue;
                    }
                    let idx = py as usize * width + px as usize;
                    match touched.iter_mut().find(|e| e.0 == idx) {
                        Some(e) => {
                            e.1 += w;
                            e.2 += w * value;
                        }
                        None => touched.push((idx, w, w * value)),
                    }
                }
            }
        }
        let px = opacity.as_mut_slice();
        for &(idx, wsum, vsum) in &touched {
            let v = (vsum / wsum).clamp(0.0, 1.0);
            if v > px[idx] {
                px[idx] = v;
            }
        }
    }

    Ok(TubeOverlay {
        opacity,
        profile_angle: profile.angle_deg,
        mask_threshold: DEFAULT_MASK_THRESHOLD,
    })
}

/// Ground-truth mask: pixels whose opacity reaches the overlay's threshold.
pub fn derive_mask(overlay: &TubeOverlay) -> Raster<bool> {
    let thr = overlay.mask_threshold;
    overlay.opacity.map(|&v| v >= thr)
}

/// Blend the overlay toward white:
/// `out = (1 - w*o) * radiograph + w*o`.
///
/// Pixels with zero opacity are returned unchanged.
pub fn blend(radiograph: &Raster<f64>, overlay: &TubeOverlay, weight: f64) -> Result<Raster<f64>> {
    if !(0.0..=1.0).contains(&weight) {
        return Err(Error::invalid(
            "blend weight",
            format!("{weight} is outside [0, 1]"),
        ));
    }
    let (w, h) = radiograph.dims();
    overlay.opacity.ensure_dims(w, h)?;
    let data = radiograph
        .as_slice()
        .iter()
        .zip(overlay.opacity.as_slice())
        .map(|(&r, &o)| {
            if o == 0.0 {
                r
            } else {
                let a = weight * o;
                (1.0 - a) * r + a
            }
        })
        .collect();
    Raster::from_vec(w, h, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::{interpolate_bspline, Point};

    fn ones() -> ProjectionProfile {
        ProjectionProfile {
            angle_deg: 0.0,
            samples: [1.0; PROFILE_LEN],
        }
    }

    fn vertical(x: f64, y_end: f64) -> TrajectoryCurve {
        let pts: Vec<Point> = (0..4)
            .map(|k| Point::new(x, y_end * k as f64 / 3.0))
            .collect();
        interpolate_bspline(&pts, 896).unwrap()
    }

    #[test]
    fn straight_line_fills_fifteen_columns() {
        let ov = stamp_tube(&vertical(100.0, 80.0), &ones(), 224, 224).unwrap();
        for y in 0..224 {
            for x in 0..224 {
                let expect = if (93..=107).contains(&x) && y <= 80 {
                    1.0
                } else {
                    0.0
                };
                assert!((ov.opacity.get(x, y) - expect).abs() < 1e-6, "({x},{y})");
            }
        }
    }

    #[test]
    fn empty_curve_gives_empty_overlay() {
        let ov = stamp_tube(&TrajectoryCurve::empty(), &ones(), 64, 64).unwrap();
        assert!(ov.is_empty());
        assert!(derive_mask(&ov).as_slice().iter().all(|m| !m));
    }

    #[test]
    fn stamping_is_repeatable() {
        let c = vertical(50.3, 40.0);
        let a = stamp_tube(&c, &ones(), 128, 128).unwrap();
        let b = stamp_tube(&c, &ones(), 128, 128).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn margin_enforced() {
        assert!(stamp_tube(&vertical(7.5, 40.0), &ones(), 128, 128).is_err());
        assert!(stamp_tube(&vertical(120.0, 40.0), &ones(), 128, 128).is_err());
        assert!(stamp_tube(&vertical(118.5, 40.0), &ones(), 128, 128).is_ok());
    }

    #[test]
    fn higher_threshold_gives_subset() {
        let p = ProjectionProfile {
            angle_deg: 0.0,
            samples: core::array::from_fn(|k| 1.0 - (k as f64 - 7.0).abs() / 7.5),
        };
        let ov = stamp_tube(&vertical(60.4, 50.0), &p, 128, 128).unwrap();
        let lo = derive_mask(&ov);
        let hi = derive_mask(&ov.clone().with_mask_threshold(0.5));
        assert!(lo
            .as_slice()
            .iter()
            .zip(hi.as_slice())
            .all(|(l, h)| !h || *l));
        assert!(
            hi.as_slice().iter().filter(|m| **m).count()
                < lo.as_slice().iter().filter(|m| **m).count()
        );
    }

    #[test]
    fn blend_spot_values() {
        let r = Raster::from_vec(2, 1, alloc::vec![0.0, 0.5]).unwrap();
        let ov = TubeOverlay {
            opacity: Raster::from_vec(2, 1, alloc::vec![1.0, 0.5]).unwrap(),
            profile_angle: 0.0,
            mask_threshold: DEFAULT_MASK_THRESHOLD,
        };
        assert_eq!(blend(&r, &ov, 0.2).unwrap().as_slice()[0], 0.2);
        assert_eq!(blend(&r, &ov, 0.1).unwrap().as_slice()[1], 0.525);
    }

    #[test]
    fn blend_zero_opacity_is_identity() {
        let r = Raster::from_fn(16, 16, |x, y| ((x * 7 + y * 3) % 17) as f64 / 16.0);
        let ov = TubeOverlay {
            opacity: Raster::filled(16, 16, 0.0),
            profile_angle: 0.0,
            mask_threshold: DEFAULT_MASK_THRESHOLD,
        };
        assert_eq!(blend(&r, &ov, 0.15).unwrap(), r);
    }

    #[test]
    fn blend_rejects_mismatch() {
        let r = Raster::filled(4, 4, 0.5);
        let ov = TubeOverlay {
            opacity: Raster::filled(4, 5, 0.0),
            profile_angle: 0.0,
            mask_threshold: DEFAULT_MASK_THRESHOLD,
        };
        assert!(matches!(
            blend(&r, &ov, 0.1),
            Err(Error::ShapeMismatch { .. })
        ));
        let ok = TubeOverlay {
            opacity: Raster::filled(4, 4, 0.0),
            ..ov
        };
        assert!(blend(&r, &ok, 1.5).is_err());
    }
}
