//! Tube cross-section model, its Radon projection, and the 15-sample drawing
//! profiles derived from it.
//!
//! Grid geometry: pixel `(col, row)` of an `n x n` grid has its center at
//! `x = col + 0.5 - n/2`, `y = n/2 - (row + 0.5)`, so the origin sits on the
//! corner shared by the four central pixels and `+y` points to the top row.
//! This lattice maps onto itself under 90 degree rotations and mirrors.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::Raster;

/// Number of samples in a drawing profile.
pub const PROFILE_LEN: usize = 15;

/// Projection angles offered to the renderer, in degrees.
pub const CANONICAL_ANGLES: [u16; 4] = [0, 30, 60, 90];

/// Values below this are treated as zero when cropping a projection.
const SUPPORT_EPS: f64 = 1e-9;

/// Physical model of one tube slice, in cross-section grid units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TubeCrossSection {
    pub outer_diameter: f64,
    pub inner_diameter: f64,
    /// Width of the radiopaque marker strip.
    pub strip_thickness: f64,
    pub tube_attenuation: f64,
    pub marker_attenuation: f64,
    pub grid_size: usize,
}

impl Default for TubeCrossSection {
    fn default() -> Self {
        TubeCrossSection {
            outer_diameter: 160.0,
            inner_diameter: 100.0,
            strip_thickness: 20.0,
            tube_attenuation: 0.1,
            marker_attenuation: 1.0,
            grid_size: 256,
        }
    }
}

impl TubeCrossSection {
    pub fn validate(&self) -> Result<()> {
        let d1 = self.outer_diameter;
        let d2 = self.inner_diameter;
        if !(d2 > 0.0 && d2 < d1 && d1 <= self.grid_size as f64) {
            return Err(Error::invalid(
                "tube cross-section",
                format!(
                    "need 0 < inner_diameter ({d2}) < outer_diameter ({d1}) <= grid_size ({})",
                    self.grid_size
                ),
            ));
        }
        let wall = (d1 - d2) / 2.0;
        if !(self.strip_thickness >= 0.0 && self.strip_thickness <= wall) {
            return Err(Error::invalid(
                "tube cross-section",
                format!(
                    "need 0 <= strip_thickness ({}) <= wall thickness ({wall})",
                    self.strip_thickness
                ),
            ));
        }
        let (c1, c2) = (self.tube_attenuation, self.marker_attenuation);
        if !(c1 > 0.0 && c1 < c2 && c2.is_finite()) {
            return Err(Error::invalid(
                "tube cross-section",
                format!("need 0 < tube_attenuation ({c1}) < marker_attenuation ({c2})"),
            ));
        }
        Ok(())
    }

    /// Same tube with a zero-width marker strip, i.e. a plain annulus.
    pub fn without_marker(&self) -> Self {
        TubeCrossSection {
            strip_thickness: 0.0,
            ..*self
        }
    }
}

/// Square grid of attenuation coefficients produced by [`rasterize_cross_section`].
#[derive(Debug, Clone, PartialEq)]
pub struct AttenuationGrid {
    values: Raster<f64>,
}

impl AttenuationGrid {
    /// Wrap arbitrary non-negative values; the grid must be square.
    pub fn from_raster(values: Raster<f64>) -> Result<Self> {
        if values.width() != values.height() {
            return Err(Error::invalid("attenuation grid", "grid must be square"));
        }
        if values.as_slice().iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid(
                "attenuation grid",
                "values must be finite and non-negative",
            ));
        }
        Ok(AttenuationGrid { values })
    }

    pub fn size(&self) -> usize {
        self.values.width()
    }

    pub fn raster(&self) -> &Raster<f64> {
        &self.values
    }

    pub fn total(&self) -> f64 {
        self.values.as_slice().iter().sum()
    }

    /// Center of pixel `(col, row)` in centered grid coordinates.
    pub fn pixel_center(&self, col: usize, row: usize) -> (f64, f64) {
        let half = self.size() as f64 / 2.0;
        (col as f64 + 0.5 - half, half - (row as f64 + 0.5))
    }

    /// Bilinear sample at centered coordinates; zero outside the grid.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let n = self.size();
        let half = n as f64 / 2.0;
        let fx = x + half - 0.5;
        let fy = half - 0.5 - y;
        let x0 = libm::floor(fx);
        let y0 = libm::floor(fy);
        let tx = fx - x0;
        let ty = fy - y0;
        let (x0, y0) = (x0 as i64, y0 as i64);
        let at = |cx: i64, cy: i64| -> f64 {
            if cx < 0 || cy < 0 || cx >= n as i64 || cy >= n as i64 {
                0.0
            } else {
                *self.values.get(cx as usize, cy as usize)
            }
        };
        let mut acc = 0.0;
        for (dx, wx) in [(0, 1.0 - tx), (1, tx)] {
            for (dy, wy) in [(0, 1.0 - ty), (1, ty)] {
                let w = wx * wy;
                if w != 0.0 {
                    acc += w * at(x0 + dx, y0 + dy);
                }
            }
        }
        acc
    }
}

/// Paint the tube slice: zero lumen, `c1` wall annulus, and a `c2` marker
/// strip of width `t` occupying the wall at the 12 o'clock position.
pub fn rasterize_cross_section(tube: &TubeCrossSection) -> Result<AttenuationGrid> {
    tube.validate()?;
    let n = tube.grid_size;
    let r_in2 = (tube.inner_diameter / 2.0) * (tube.inner_diameter / 2.0);
    let r_out2 = (tube.outer_diameter / 2.0) * (tube.outer_diameter / 2.0);
    let half_strip = tube.strip_thickness / 2.0;
    let half = n as f64 / 2.0;
    let values = Raster::from_fn(n, n, |col, row| {
        let x = col as f64 + 0.5 - half;
        let y = half - (row as f64 + 0.5);
        let r2 = x * x + y * y;
        if r2 < r_in2 || r2 >= r_out2 {
            0.0
        } else if y > 0.0 && libm::fabs(x) < half_strip {
            tube.marker_attenuation
        } else {
            tube.tube_attenuation
        }
    });
    Ok(AttenuationGrid { values })
}

/// Line integrals of a grid at one detector angle.
#[derive(Debug, Clone, PartialEq)]
pub struct RawProjection {
    pub angle_deg: f64,
    pub values: Vec<f64>,
}

/// Radon projection of `grid` with the detector axis rotated by `angle_deg`
/// (counter-clockwise from `+x`) about the grid center.
///
/// Detector bin `i` sits at offset `s = i + 0.5 - n/2`. Each ray is sampled
/// at unit steps with bilinear interpolation over the full grid diagonal, so
/// at 0 and 90 degrees the samples land on pixel centers and the result is an
/// exact column (row) sum.
pub fn radon_project(grid: &AttenuationGrid, angle_deg: f64) -> Result<RawProjection> {
    if !(0.0..180.0).contains(&angle_deg) {
        return Err(Error::invalid(
            "projection angle",
            format!("{angle_deg} is outside [0, 180)"),
        ));
    }
    let n = grid.size();
    let theta = angle_deg.to_radians();
    let (sin, cos) = (libm::sin(theta), libm::cos(theta));

    // Ray length covers the diagonal; parity matches n so sample offsets
    // coincide with pixel-center offsets.
    let mut steps = libm::ceil(n as f64 * core::f64::consts::SQRT_2) as usize;
    if steps % 2 != n % 2 {
        steps += 1;
    }
    let half_n = n as f64 / 2.0;
    let half_steps = steps as f64 / 2.0;

    let values = (0..n)
        .map(|i| {
            let s = i as f64 + 0.5 - half_n;
            let (bx, by) = (s * cos, s * sin);
            (0..steps)
                .map(|k| {
                    let t = k as f64 + 0.5 - half_steps;
                    grid.sample(bx - t * sin, by + t * cos)
                })
                .sum::<f64>()
        })
        .collect();
    Ok(RawProjection { angle_deg, values })
}

/// A normalized 15-sample intensity profile across the tube.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionProfile {
    pub angle_deg: f64,
    pub samples: [f64; PROFILE_LEN],
}

impl ProjectionProfile {
    pub fn max(&self) -> f64 {
        self.samples
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Divide by the peak again. A no-op on any profile from [`sample_profile`].
    pub fn renormalized(&self) -> Self {
        let peak = self.max();
        let mut samples = self.samples;
        for v in &mut samples {
            *v /= peak;
        }
        ProjectionProfile {
            angle_deg: self.angle_deg,
            samples,
        }
    }

    /// Profile value at a fractional sample index, linear between samples and
    /// zero outside `[0, PROFILE_LEN - 1]`.
    pub fn at(&self, pos: f64) -> f64 {
        if !(0.0..=(PROFILE_LEN - 1) as f64).contains(&pos) {
            return 0.0;
        }
        let i = libm::floor(pos) as usize;
        if i >= PROFILE_LEN - 1 {
            return self.samples[PROFILE_LEN - 1];
        }
        let f = pos - i as f64;
        self.samples[i] * (1.0 - f) + self.samples[i + 1] * f
    }
}

/// Crop a projection to its positive support, resample it linearly onto 15
/// evenly spaced points (both ends included) and scale the peak to 1.
pub fn sample_profile(raw: &RawProjection) -> Result<ProjectionProfile> {
    let cleaned: Vec<f64> = raw
        .values
        .iter()
        .map(|&v| if v < SUPPORT_EPS { 0.0 } else { v })
        .collect();
    let first = cleaned
        .iter()
        .position(|&v| v > 0.0)
        .ok_or(Error::EmptySupport)?;
    let last = cleaned
        .iter()
        .rposition(|&v| v > 0.0)
        .ok_or(Error::EmptySupport)?;
    let support = &cleaned[first..=last];

    let mut samples = [0.0; PROFILE_LEN];
    if support.len() == 1 {
        samples = [support[0]; PROFILE_LEN];
    } else {
        let span = (support.len() - 1) as f64;
        for (k, out) in samples.iter_mut().enumerate() {
            let pos = k as f64 * span / (PROFILE_LEN - 1) as f64;
            let i = (libm::floor(pos) as usize).min(support.len() - 2);
            let f = pos - i as f64;
            *out = support[i] * (1.0 - f) + support[i + 1] * f;
        }
    }
    let peak = samples.iter().copied().fold(0.0, f64::max);
    for v in &mut samples {
        *v /= peak;
    }
    Ok(ProjectionProfile {
        angle_deg: raw.angle_deg,
        samples,
    })
}

/// Profiles for a fixed tube at a set of angles, computed once per run.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileBank {
    profiles: Vec<(u16, ProjectionProfile)>,
}

impl ProfileBank {
    pub fn new(tube: &TubeCrossSection, angles: &[u16]) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::invalid("profile angles", "angle set is empty"));
        }
        let grid = rasterize_cross_section(tube)?;
        let profiles = angles
            .iter()
            .map(|&a| {
                let raw = radon_project(&grid, a as f64)?;
                Ok((a, sample_profile(&raw)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ProfileBank { profiles })
    }

    pub fn angles(&self) -> impl Iterator<Item = u16> + '_ {
        self.profiles.iter().map(|(a, _)| *a)
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    /// The `index`-th (angle, profile) pair, in construction order.
    pub fn entry(&self, index: usize) -> (u16, &ProjectionProfile) {
        let (a, p) = &self.profiles[index];
        (*a, p)
    }

    pub fn get(&self, angle: u16) -> Option<&ProjectionProfile> {
        self.profiles
            .iter()
            .find(|(a, _)| *a == angle)
            .map(|(_, p)| p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn default_grid() -> AttenuationGrid {
        rasterize_cross_section(&TubeCrossSection::default()).unwrap()
    }

    #[test]
    fn lumen_wall_and_marker_values() {
        let g = default_grid();
        assert_eq!(*g.raster().get(128, 128), 0.0);
        // radius 65 on the -x axis, far from the marker
        let col = (128.0 - 65.0 - 0.5) as usize;
        let (x, y) = g.pixel_center(col, 128);
        assert!((libm::sqrt(x * x + y * y) - 65.0).abs() < 1.0);
        assert_eq!(*g.raster().get(col, 128), 0.1);
        // straight up, radius ~65, inside the strip
        assert_eq!(*g.raster().get(128, 128 - 65), 1.0);
        assert_eq!(*g.raster().get(127, 128 - 65), 1.0);
        // directly below: plain wall
        assert_eq!(*g.raster().get(128, 128 + 64), 0.1);
    }

    #[test]
    fn grid_values_are_three_valued() {
        let g = default_grid();
        assert!(g
            .raster()
            .as_slice()
            .iter()
            .all(|&v| v == 0.0 || v == 0.1 || v == 1.0));
    }

    #[test]
    fn validation_names_the_constraint() {
        let bad = TubeCrossSection {
            inner_diameter: 170.0,
            ..Default::default()
        };
        let err = rasterize_cross_section(&bad).unwrap_err();
        assert!(alloc::format!("{err}").contains("inner_diameter"));

        let bad = TubeCrossSection {
            strip_thickness: 31.0,
            ..Default::default()
        };
        assert!(alloc::format!("{}", bad.validate().unwrap_err()).contains("strip_thickness"));

        let bad = TubeCrossSection {
            marker_attenuation: 0.1,
            ..Default::default()
        };
        assert!(alloc::format!("{}", bad.validate().unwrap_err()).contains("marker_attenuation"));

        let bad = TubeCrossSection {
            grid_size: 150,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn zero_grid_projects_to_zero() {
        let g = AttenuationGrid::from_raster(Raster::filled(32, 32, 0.0)).unwrap();
        for a in [0.0, 17.0, 90.0, 179.0] {
            assert!(radon_project(&g, a)
                .unwrap()
                .values
                .iter()
                .all(|&v| v == 0.0));
        }
    }

    #[test]
    fn angle_domain_checked() {
        let g = default_grid();
        assert!(radon_project(&g, 180.0).is_err());
        assert!(radon_project(&g, -1.0).is_err());
    }

    #[test]
    fn zero_degree_projection_is_column_sum() {
        let g = default_grid();
        let p = radon_project(&g, 0.0).unwrap();
        for col in 0..g.size() {
            let expect: f64 = (0..g.size()).map(|row| *g.raster().get(col, row)).sum();
            assert!((p.values[col] - expect).abs() < 1e-9, "col {col}");
        }
    }

    #[test]
    fn three_point_support_resamples_linearly() {
        // support [4, 8, 4] spans 2 units; sample k sits at 2k/14
        let raw = RawProjection {
            angle_deg: 0.0,
            values: vec![0.0, 0.0, 4.0, 8.0, 4.0, 0.0, 0.0],
        };
        let p = sample_profile(&raw).unwrap();
        let expect = [
            0.5,
            4.0 / 7.0,
            9.0 / 14.0,
            5.0 / 7.0,
            11.0 / 14.0,
            6.0 / 7.0,
            13.0 / 14.0,
            1.0,
            13.0 / 14.0,
            6.0 / 7.0,
            11.0 / 14.0,
            5.0 / 7.0,
            9.0 / 14.0,
            4.0 / 7.0,
            0.5,
        ];
        for (a, b) in p.samples.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        assert_eq!(p.samples[7], 1.0);
    }

    #[test]
    fn constant_projection_normalizes_to_ones() {
        let raw = RawProjection {
            angle_deg: 30.0,
            values: vec![3.25; 15],
        };
        let p = sample_profile(&raw).unwrap();
        assert!(p.samples.iter().all(|&v| v == 1.0));
        assert_eq!(p.angle_deg, 30.0);
    }

    #[test]
    fn empty_support_rejected() {
        let raw = RawProjection {
            angle_deg: 0.0,
            values: vec![0.0, 1e-12, 0.0],
        };
        assert_eq!(sample_profile(&raw), Err(Error::EmptySupport));
    }

    #[test]
    fn single_point_support() {
        let raw = RawProjection {
            angle_deg: 0.0,
            values: vec![0.0, 2.0, 0.0],
        };
        assert!(sample_profile(&raw)
            .unwrap()
            .samples
            .iter()
            .all(|&v| v == 1.0));
    }

    #[test]
    fn renormalization_is_idempotent() {
        let g = default_grid();
        for a in CANONICAL_ANGLES {
            let p = sample_profile(&radon_project(&g, a as f64).unwrap()).unwrap();
            assert_eq!(p.renormalized(), p);
        }
    }

    #[test]
    fn marker_breaks_symmetry_between_zero_and_ninety() {
        let g = default_grid();
        let p0 = sample_profile(&radon_project(&g, 0.0).unwrap()).unwrap();
        let p90 = sample_profile(&radon_project(&g, 90.0).unwrap()).unwrap();
        let diff = p0
            .samples
            .iter()
            .zip(&p90.samples)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff > 0.1, "max diff {diff}");

        let plain = rasterize_cross_section(&TubeCrossSection::default().without_marker()).unwrap();
        let q0 = sample_profile(&radon_project(&plain, 0.0).unwrap()).unwrap();
        let q90 = sample_profile(&radon_project(&plain, 90.0).unwrap()).unwrap();
        for (a, b) in q0.samples.iter().zip(&q90.samples) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn profile_interpolation() {
        let p = ProjectionProfile {
            angle_deg: 0.0,
            samples: core::array::from_fn(|k| k as f64),
        };
        assert_eq!(p.at(0.0), 0.0);
        assert_eq!(p.at(3.5), 3.5);
        assert_eq!(p.at(14.0), 14.0);
        assert_eq!(p.at(-0.01), 0.0);
        assert_eq!(p.at(14.01), 0.0);
    }

    #[test]
    fn bank_lookup() {
        let bank = ProfileBank::new(&TubeCrossSection::default(), &[0, 90]).unwrap();
        assert_eq!(bank.len(), 2);
        assert!(bank.get(0).is_some());
        assert!(bank.get(30).is_none());
        assert!(ProfileBank::new(&TubeCrossSection::default(), &[]).is_err());
    }
}
