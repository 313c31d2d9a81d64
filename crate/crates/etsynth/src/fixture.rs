//! Small synthetic corpus with the same layout as the real one, for tests
//! and smoke runs.

use std::fs;
use std::path::{Path, PathBuf};

use image::{GrayImage, Luma};

use crate::config::{Counts, GenerationConfig, Paths};
use crate::error::{Error, Result};
use crate::imageio::save_png;

#[derive(Debug, Clone)]
pub struct FixtureCorpus {
    pub root: PathBuf,
    pub images_dir: PathBuf,
    pub clavicle_masks_dir: PathBuf,
    pub metadata_csv: PathBuf,
    /// Ids of the AP cases, in file order.
    pub ap_case_ids: Vec<String>,
}

impl FixtureCorpus {
    /// A generation config pointing at this corpus.
    pub fn config(&self, seed: u64, counts: Counts, out_dir: &Path) -> GenerationConfig {
        GenerationConfig {
            seed,
            counts,
            paths: Paths {
                images_dir: self.images_dir.clone(),
                clavicle_masks_dir: self.clavicle_masks_dir.clone(),
                metadata_csv: self.metadata_csv.clone(),
                out_dir: Some(out_dir.to_owned()),
                exclude_list: None,
            },
            ..Default::default()
        }
    }
}

// SplitMix64 step; enough to vary the toy images without a dependency.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Write `num_ap` AP cases plus `num_pa` PA cases under `root`.
///
/// Images are `size`² grayscale with a smooth body-like gradient and a little
/// per-case texture; every case gets a clavicle mask with two bars whose
/// position varies slightly with the case index. PA rows are interleaved
/// every third line so view filtering is exercised.
pub fn write_fixture(
    root: &Path,
    num_ap: usize,
    num_pa: usize,
    size: u32,
) -> Result<FixtureCorpus> {
    let images_dir = root.join("images");
    let clavicle_masks_dir = root.join("clavicles");
    for d in [&images_dir, &clavicle_masks_dir] {
        fs::create_dir_all(d).map_err(|e| Error::io(d.as_path(), e))?;
    }

    let mut csv = String::from("Image Index,Finding Labels,View Position\n");
    let mut ap_case_ids = Vec::with_capacity(num_ap);
    let (mut ap, mut pa) = (0, 0);
    let mut i = 0u64;
    while ap < num_ap || pa < num_pa {
        let is_pa = pa < num_pa && (i % 3 == 2 || ap == num_ap);
        let case_id = format!("{:08}_000", i + 1);
        let file = format!("{case_id}.png");
        let view = if is_pa { "PA" } else { "AP" };
        csv.push_str(&format!("{file},No Finding,{view}\n"));
        if is_pa {
            pa += 1;
        } else {
            ap += 1;
            ap_case_ids.push(case_id.clone());
        }

        let s = size as f64;
        let img = GrayImage::from_fn(size, size, |x, y| {
            let dx = (x as f64 - s / 2.0) / s;
            let dy = (y as f64 - s / 2.0) / s;
            let body = 200.0 - 260.0 * (dx * dx + 0.5 * dy * dy);
            let grain = (mix(i << 32 | (y as u64) << 16 | x as u64) % 17) as f64;
            Luma([(body + grain).clamp(0.0, 255.0) as u8])
        });
        save_png(&img, &images_dir.join(&file))?;

        let shift = (mix(i) % 5) as f64 / 100.0;
        let (top, bottom) = ((0.22 + shift) * s, (0.30 + shift) * s);
        let mask = GrayImage::from_fn(size, size, |x, y| {
            let (fx, fy) = (x as f64, y as f64);
            let bar = (0.18 * s..0.40 * s).contains(&fx) || (0.60 * s..0.82 * s).contains(&fx);
            Luma([if bar && fy >= top && fy < bottom {
                255
            } else {
                0
            }])
        });
        save_png(
            &mask,
            &clavicle_masks_dir.join(format!("{case_id}_clavicle.png")),
        )?;
        i += 1;
    }

    let metadata_csv = root.join("metadata.csv");
    fs::write(&metadata_csv, csv).map_err(|e| Error::io(&metadata_csv, e))?;
    Ok(FixtureCorpus {
        root: root.to_owned(),
        images_dir,
        clavicle_masks_dir,
        metadata_csv,
        ap_case_ids,
    })
}
