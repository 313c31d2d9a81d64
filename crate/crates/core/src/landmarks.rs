//! Trachea anchor extraction from binary clavicle masks.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::Raster;

/// Components smaller than this are treated as speckle.
pub const MIN_COMPONENT_AREA: usize = 25;

#[derive(Debug, Clone, PartialEq)]
pub struct ClavicleMask {
    pub pixels: Raster<bool>,
    pub source_id: String,
}

impl ClavicleMask {
    pub fn new(pixels: Raster<bool>, source_id: impl Into<String>) -> Self {
        ClavicleMask {
            pixels,
            source_id: source_id.into(),
        }
    }
}

/// Anchor point for tube placement: the column midway between the clavicles
/// and the lowest clavicle row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClavicleLandmarks {
    pub mid_x: usize,
    pub low_y: usize,
}

#[derive(Debug, Clone, Copy)]
struct Component {
    area: u64,
    col_sum: u64,
    max_row: usize,
    /// Scan-order index of the first pixel; breaks area ties.
    first: usize,
}

/// Label 4-connected foreground components.
fn components(mask: &Raster<bool>) -> Vec<Component> {
    let (w, h) = mask.dims();
    let px = mask.as_slice();
    let mut seen = vec![false; px.len()];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    for start in 0..px.len() {
        if !px[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut comp = Component {
            area: 0,
            col_sum: 0,
            max_row: 0,
            first: start,
        };
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            comp.area += 1;
            comp.col_sum += x as u64;
            comp.max_row = comp.max_row.max(y);
            let mut visit = |j: usize| {
                if px[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        out.push(comp);
    }
    out
}

/// Round `num / den` to the nearest integer; an exact half rounds toward
/// `center2 / 2`, which keeps the result mirror-symmetric about that center.
fn round_toward_center(num: u128, den: u128, center2: u128) -> u128 {
    let floor = num / den;
    let rem2 = 2 * (num % den);
    if rem2 > den || (rem2 == den && 2 * num < center2 * den) {
        floor + 1
    } else {
        floor
    }
}

/// Locate the tube anchor from the two largest clavicle components.
///
/// `mid_x` is the rounded midpoint of the two components' column centroids,
/// computed in exact integer arithmetic; `low_y` is the lowest row touched by
/// either component.
pub fn extract_landmarks(mask: &ClavicleMask) -> Result<ClavicleLandmarks> {
    let mut comps: Vec<Component> = components(&mask.pixels)
        .into_iter()
        .filter(|c| c.area as usize >= MIN_COMPONENT_AREA)
        .collect();
    if comps.len() < 2 {
        return Err(Error::Landmarks {
            source_id: mask.source_id.clone(),
            found: comps.len(),
            min_area: MIN_COMPONENT_AREA,
        });
    }
    comps.sort_by(|a, b| b.area.cmp(&a.area).then(a.first.cmp(&b.first)));
    let (a, b) = (comps[0], comps[1]);

    // midpoint = (sa/na + sb/nb) / 2 = (sa*nb + sb*na) / (2*na*nb)
    let num = a.col_sum as u128 * b.area as u128 + b.col_sum as u128 * a.area as u128;
    let den = 2 * a.area as u128 * b.area as u128;
    let width = mask.pixels.width() as u128;
    let mid_x = round_toward_center(num, den, width - 1) as usize;

    Ok(ClavicleLandmarks {
        mid_x,
        low_y: a.max_row.max(b.max_row),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_rects(w: usize, h: usize, rects: &[(usize, usize, usize, usize)]) -> ClavicleMask {
        let px = Raster::from_fn(w, h, |x, y| {
            rects
                .iter()
                .any(|&(x0, y0, rw, rh)| x >= x0 && x < x0 + rw && y >= y0 && y < y0 + rh)
        });
        ClavicleMask::new(px, "case")
    }

    #[test]
    fn two_squares() {
        // columns 55..65 -> centroid 59.5; 155..165 -> 159.5; rows 71..=80
        let m = with_rects(224, 224, &[(55, 71, 10, 10), (155, 71, 10, 10)]);
        let l = extract_landmarks(&m).unwrap();
        assert_eq!(
            l,
            ClavicleLandmarks {
                mid_x: 110,
                low_y: 80
            }
        );
    }

    #[test]
    fn integer_centroids() {
        // 11-wide squares centered exactly on 60 and 160
        let m = with_rects(224, 224, &[(55, 70, 11, 11), (155, 60, 11, 11)]);
        assert_eq!(
            extract_landmarks(&m).unwrap(),
            ClavicleLandmarks {
                mid_x: 110,
                low_y: 80
            }
        );
    }

    #[test]
    fn single_blob_is_an_error() {
        let m = with_rects(64, 64, &[(10, 10, 20, 8)]);
        match extract_landmarks(&m) {
            Err(Error::Landmarks {
                source_id, found, ..
            }) => {
                assert_eq!(source_id, "case");
                assert_eq!(found, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn speckle_does_not_count() {
        let m = with_rects(64, 64, &[(5, 5, 10, 10), (40, 5, 4, 6)]);
        assert!(extract_landmarks(&m).is_err());
    }

    #[test]
    fn diagonal_touch_is_two_components() {
        let m = with_rects(64, 64, &[(10, 10, 6, 6), (16, 16, 6, 6)]);
        assert_eq!(extract_landmarks(&m).unwrap().low_y, 21);
    }

    #[test]
    fn largest_two_are_used() {
        let m = with_rects(
            224,
            224,
            &[(20, 20, 10, 10), (100, 20, 6, 6), (180, 20, 10, 10)],
        );
        // centroids 24.5 and 184.5; the 104.5 tie rounds toward the image center
        assert_eq!(extract_landmarks(&m).unwrap().mid_x, 105);
    }

    #[test]
    fn mirrored_mask() {
        let m = with_rects(224, 224, &[(40, 60, 30, 12), (150, 66, 25, 14)]);
        let l = extract_landmarks(&m).unwrap();
        let flipped = ClavicleMask::new(m.pixels.flip_horizontal(), "case");
        let lf = extract_landmarks(&flipped).unwrap();
        assert_eq!(lf.mid_x, 223 - l.mid_x);
        assert_eq!(lf.low_y, l.low_y);
    }

    #[test]
    fn half_ties_round_toward_center() {
        assert_eq!(round_toward_center(21, 2, 223), 11); // 10.5 left of 111.5
        assert_eq!(round_toward_center(425, 2, 223), 212); // 212.5 right of it
        assert_eq!(round_toward_center(20, 3, 223), 7);
        assert_eq!(round_toward_center(19, 3, 223), 6);
    }
}
