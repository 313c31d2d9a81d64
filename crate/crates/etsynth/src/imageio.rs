//! PNG reading and writing at the working resolution.

use std::path::Path;

use etsynth_core::{ClavicleMask, Raster};
use image::imageops::{self, FilterType};
use image::{GrayImage, ImageBuffer, Luma};

use crate::error::{Error, Result};

fn open_luma8(path: &Path) -> Result<GrayImage> {
    let img = image::open(path).map_err(|source| match source {
        image::ImageError::IoError(e) => Error::io(path, e),
        source => Error::Image {
            path: path.to_owned(),
            source,
        },
    })?;
    Ok(img.to_luma8())
}

/// Load a radiograph as grayscale in `[0, 1]`, resized (bilinear) to a
/// `resolution x resolution` square.
pub fn load_radiograph(path: &Path, resolution: usize) -> Result<Raster<f64>> {
    let mut img = open_luma8(path)?;
    let r = resolution as u32;
    if img.dimensions() != (r, r) {
        img = imageops::resize(&img, r, r, FilterType::Triangle);
    }
    Ok(gray_to_unit(&img))
}

/// Load a clavicle mask (nonzero = foreground), nearest-neighbor resized to
/// the working resolution.
pub fn load_clavicle_mask(path: &Path, resolution: usize, source_id: &str) -> Result<ClavicleMask> {
    if !path.exists() {
        return Err(Error::MissingClavicleMask {
            path: path.to_owned(),
        });
    }
    let mut img = open_luma8(path)?;
    let r = resolution as u32;
    if img.dimensions() != (r, r) {
        img = imageops::resize(&img, r, r, FilterType::Nearest);
    }
    let (w, h) = img.dimensions();
    let pixels = Raster::from_vec(
        w as usize,
        h as usize,
        img.pixels().map(|p| p.0[0] != 0).collect(),
    )?;
    Ok(ClavicleMask::new(pixels, source_id))
}

pub fn gray_to_unit(img: &GrayImage) -> Raster<f64> {
    Raster::from_fn(img.width() as usize, img.height() as usize, |x, y| {
        img.get_pixel(x as u32, y as u32).0[0] as f64 / 255.0
    })
}

pub fn unit_to_gray(r: &Raster<f64>) -> GrayImage {
    let data = r
        .as_slice()
        .iter()
        .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    GrayImage::from_raw(r.width() as u32, r.height() as u32, data).expect("raster size matches")
}

pub fn mask_to_gray(m: &Raster<bool>) -> GrayImage {
    let data = m
        .as_slice()
        .iter()
        .map(|&b| if b { 255 } else { 0 })
        .collect();
    GrayImage::from_raw(m.width() as u32, m.height() as u32, data).expect("raster size matches")
}

pub fn save_png(img: &GrayImage, path: &Path) -> Result<()> {
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| Error::Image {
            path: path.to_owned(),
            source,
        })
}

/// 16-bit PNG scaled so `scale` maps to full white.
pub fn save_png16(r: &Raster<f64>, scale: f64, path: &Path) -> Result<()> {
    let data: Vec<u16> = r
        .as_slice()
        .iter()
        .map(|v| {
            if scale > 0.0 {
                ((v / scale).clamp(0.0, 1.0) * 65535.0).round() as u16
            } else {
                0
            }
        })
        .collect();
    let img: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(r.width() as u32, r.height() as u32, data)
            .expect("raster size matches");
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| Error::Image {
            path: path.to_owned(),
            source,
        })
}
