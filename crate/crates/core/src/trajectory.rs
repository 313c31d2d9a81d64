//! Randomized control points and the interpolating cubic B-spline that
//! becomes the tube centerline.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landmarks::ClavicleLandmarks;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrajectoryParams {
    /// Inclusive range of per-point column jitter around `mid_x`.
    pub x_jitter_px: (i32, i32),
    /// Inclusive range added to `low_y` to place the last control point.
    pub y_end_offset_px: (i32, i32),
    pub num_control_points: usize,
    /// Dense samples along the curve; `None` means four per image row.
    pub samples_per_curve: Option<usize>,
}

impl Default for TrajectoryParams {
    fn default() -> Self {
        TrajectoryParams {
            x_jitter_px: (-2, 2),
            y_end_offset_px: (0, 30),
            num_control_points: 4,
            samples_per_curve: None,
        }
    }
}

impl TrajectoryParams {
    pub fn validate(&self, image_height: usize) -> Result<()> {
        if self.x_jitter_px.0 > self.x_jitter_px.1 {
            return Err(Error::invalid(
                "trajectory params",
                "x_jitter_px range is reversed",
            ));
        }
        if self.y_end_offset_px.0 > self.y_end_offset_px.1 {
            return Err(Error::invalid(
                "trajectory params",
                "y_end_offset_px range is reversed",
            ));
        }
        if self.num_control_points < 4 {
            return Err(Error::invalid(
                "trajectory params",
                format!("num_control_points {} < 4", self.num_control_points),
            ));
        }
        if self.samples_for(image_height) < image_height {
            return Err(Error::invalid(
                "trajectory params",
                format!("samples_per_curve must be >= image height {image_height}"),
            ));
        }
        Ok(())
    }

    pub fn samples_for(&self, image_height: usize) -> usize {
        self.samples_per_curve.unwrap_or(4 * image_height)
    }
}

/// Draw control points from the top row down to `low_y + offset`, with
/// evenly spaced rows and independently jittered columns.
///
/// Draw order on `rng`: the end offset, then one jitter per point from top
/// to bottom.
pub fn sample_control_points<R: Rng + ?Sized>(
    landmarks: &ClavicleLandmarks,
    params: &TrajectoryParams,
    image_width: usize,
    image_height: usize,
    rng: &mut R,
) -> Result<Vec<Point>> {
    params.validate(image_height)?;
    if landmarks.mid_x >= image_width || landmarks.low_y >= image_height {
        return Err(Error::OutOfBounds {
            what: "landmarks",
            detail: format!(
                "({}, {}) outside {image_width}x{image_height}",
                landmarks.mid_x, landmarks.low_y
            ),
        });
    }
    let (off_lo, off_hi) = params.y_end_offset_px;
    let low_y = landmarks.low_y as i64;
    if low_y + off_hi as i64 >= image_height as i64 {
        return Err(Error::OutOfBounds {
            what: "tube end point",
            detail: format!(
                "low_y {low_y} + max offset {off_hi} reaches past image height {image_height}"
            ),
        });
    }
    if low_y + (off_lo as i64) < 1 {
        return Err(Error::OutOfBounds {
            what: "tube end point",
            detail: format!("low_y {low_y} + min offset {off_lo} is not below the top row"),
        });
    }

    let end_y = (low_y + rng.gen_range(off_lo..=off_hi) as i64) as f64;
    let n = params.num_control_points;
    let (j_lo, j_hi) = params.x_jitter_px;
    let points = (0..n)
        .map(|k| {
            let jitter = rng.gen_range(j_lo..=j_hi);
            Point::new(
                (landmarks.mid_x as i64 + jitter as i64) as f64,
                end_y * k as f64 / (n - 1) as f64,
            )
        })
        .collect();
    Ok(points)
}

/// Cubic B-spline interpolating a point sequence.
///
/// Parameters are normalized cumulative chord lengths. The clamped knot
/// vector uses the interior data parameters `u[2..m-2]`, the not-a-knot
/// choice, so four points give the single cubic through all of them.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicBSpline {
    knots: Vec<f64>,
    coeffs: Vec<Point>,
    params: Vec<f64>,
}

const DEGREE: usize = 3;

impl CubicBSpline {
    pub fn interpolate(points: &[Point]) -> Result<Self> {
        let m = points.len();
        if m < DEGREE + 1 {
            return Err(Error::invalid(
                "control points",
                format!("{m} points, need at least 4"),
            ));
        }
        if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::invalid("control points", "non-finite coordinate"));
        }

        let mut params = Vec::with_capacity(m);
        params.push(0.0);
        for w in points.windows(2) {
            let d = w[0].distance(&w[1]);
            if d == 0.0 {
                return Err(Error::invalid("control points", "repeated point"));
            }
            params.push(params.last().copied().unwrap_or(0.0) + d);
        }
        let total = params[m - 1];
        for u in &mut params {
            *u /= total;
        }
        params[m - 1] = 1.0;

        let mut knots = vec![0.0; DEGREE + 1];
        knots.extend_from_slice(&params[2..m - 2]);
        knots.extend_from_slice(&[1.0; DEGREE + 1]);

        let mut matrix = vec![0.0; m * m];
        for (i, &u) in params.iter().enumerate() {
            let span = find_span(&knots, m, u);
            let basis = basis_funs(&knots, span, u);
            for (r, b) in basis.iter().enumerate() {
                matrix[i * m + span - DEGREE + r] = *b;
            }
        }
        let mut xs: Vec<f64> = points.iter().map(|p| p.x).collect();
        let mut ys: Vec<f64> = points.iter().map(|p| p.y).collect();
        solve_in_place(&mut matrix, m, &mut [&mut xs, &mut ys])?;
        let coeffs = xs
            .into_iter()
            .zip(ys)
            .map(|(x, y)| Point::new(x, y))
            .collect();

        Ok(CubicBSpline {
            knots,
            coeffs,
            params,
        })
    }

    /// Curve parameter of each interpolated point.
    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn eval(&self, u: f64) -> Point {
        let u = u.clamp(0.0, 1.0);
        let n = self.coeffs.len();
        let span = find_span(&self.knots, n, u);
        let basis = basis_funs(&self.knots, span, u);
        let mut p = Point::default();
        for (r, b) in basis.iter().enumerate() {
            let c = self.coeffs[span - DEGREE + r];
            p.x += b * c.x;
            p.y += b * c.y;
        }
        p
    }
}

/// Knot span index containing `u` for a spline with `n` coefficients.
fn find_span(knots: &[f64], n: usize, u: f64) -> usize {
    if u >= knots[n] {
        return n - 1;
    }
    let (mut lo, mut hi) = (DEGREE, n);
    let mut mid = (lo + hi) / 2;
    while u < knots[mid] || u >= knots[mid + 1] {
        if u < knots[mid] {
            hi = mid;
        } else {
            lo = mid;
        }
        mid = (lo + hi) / 2;
    }
    mid
}

/// Nonzero cubic basis functions on `span` (Cox-de Boor, triangular form).
fn basis_funs(knots: &[f64], span: usize, u: f64) -> [f64; DEGREE + 1] {
    let mut n = [0.0; DEGREE + 1];
    let mut left = [0.0; DEGREE + 1];
    let mut right = [0.0; DEGREE + 1];
    n[0] = 1.0;
    for j in 1..=DEGREE {
        left[j] = u - knots[span + 1 - j];
        right[j] = knots[span + j] - u;
        let mut saved = 0.0;
        for r in 0..j {
            let temp = n[r] / (right[r + 1] + left[j - r]);
            n[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        n[j] = saved;
    }
    n
}

/// Gaussian elimination with partial pivoting on a row-major `m x m`
/// matrix, solving for every right-hand side at once.
fn solve_in_place(a: &mut [f64], m: usize, rhs: &mut [&mut Vec<f64>]) -> Result<()> {
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&i, &j| libm::fabs(a[i * m + col]).total_cmp(&libm::fabs(a[j * m + col])))
            .unwrap_or(col);
        if libm::fabs(a[pivot * m + col]) < 1e-14 {
            return Err(Error::invalid(
                "control points",
                "singular interpolation system",
            ));
        }
        if pivot != col {
            for k in 0..m {
                a.swap(col * m + k, pivot * m + k);
            }
            for b in rhs.iter_mut() {
                b.swap(col, pivot);
            }
        }
        for row in col + 1..m {
            let f = a[row * m + col] / a[col * m + col];
            if f == 0.0 {
                continue;
            }
            for k in col..m {
                a[row * m + k] -= f * a[col * m + k];
            }
            for b in rhs.iter_mut() {
                b[row] -= f * b[col];
            }
        }
    }
    for b in rhs.iter_mut() {
        for row in (0..m).rev() {
            let mut acc = b[row];
            for k in row + 1..m {
                acc -= a[row * m + k] * b[k];
            }
            b[row] = acc / a[row * m + row];
        }
    }
    Ok(())
}

/// Densely sampled tube centerline.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryCurve {
    pub control_points: Vec<Point>,
    pub dense_points: Vec<Point>,
    /// Unit direction at each dense point.
    pub tangents: Vec<Point>,
}

impl TrajectoryCurve {
    /// A curve with no samples; stamps nothing.
    pub fn empty() -> Self {
        TrajectoryCurve {
            control_points: Vec::new(),
            dense_points: Vec::new(),
            tangents: Vec::new(),
        }
    }

    /// Smallest distance from `p` to any dense point.
    pub fn distance_to(&self, p: &Point) -> f64 {
        self.dense_points
            .iter()
            .map(|q| q.distance(p))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Fit the interpolating spline through `control_points` (strictly
/// increasing `y`) and sample it uniformly in parameter.
pub fn interpolate_bspline(control_points: &[Point], samples: usize) -> Result<TrajectoryCurve> {
    if control_points
        .windows(2)
        .any(|w| w[1].y.partial_cmp(&w[0].y) != Some(core::cmp::Ordering::Greater))
    {
        return Err(Error::invalid(
            "control points",
            "y coordinates must be strictly increasing",
        ));
    }
    if samples < 2 {
        return Err(Error::invalid(
            "samples_per_curve",
            "need at least 2 samples",
        ));
    }
    let spline = CubicBSpline::interpolate(control_points)?;
    let dense_points: Vec<Point> = (0..samples)
        .map(|i| spline.eval(i as f64 / (samples - 1) as f64))
        .collect();
    let tangents = (0..samples)
        .map(|i| {
            let (a, b) = if i + 1 < samples {
                (dense_points[i], dense_points[i + 1])
            } else {
                (dense_points[i - 1], dense_points[i])
            };
            let (dx, dy) = (b.x - a.x, b.y - a.y);
            let len = libm::hypot(dx, dy);
            if len > 0.0 {
                Point::new(dx / len, dy / len)
            } else {
                Point::new(0.0, 1.0)
            }
        })
        .collect();
    Ok(TrajectoryCurve {
        control_points: control_points.to_vec(),
        dense_points,
        tangents,
    })
}
