//! Inspection dump of the tube cross-section and its projections.

use std::fs;
use std::path::Path;

use etsynth_core::{
    radon_project, rasterize_cross_section, sample_profile, Raster, TubeCrossSection,
};

use crate::error::{Error, Result};
use crate::imageio::save_png16;

pub const CROSS_SECTION_FILE: &str = "cross_section.png";
pub const SINOGRAM_FILE: &str = "projections.png";
pub const PROFILES_FILE: &str = "profiles.csv";

/// Write the attenuation grid and the raw projections (one row per angle)
/// as 16-bit PNGs, and the sampled profiles as `angle,s0,...,s14` rows.
pub fn dump_profiles(tube: &TubeCrossSection, angles: &[u16], out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let grid = rasterize_cross_section(tube)?;
    save_png16(
        grid.raster(),
        tube.marker_attenuation,
        &out_dir.join(CROSS_SECTION_FILE),
    )?;

    let mut rows = Vec::with_capacity(angles.len());
    let mut profiles = Vec::with_capacity(angles.len());
    for &a in angles {
        let raw = radon_project(&grid, a as f64)?;
        profiles.push((a, sample_profile(&raw)?));
        rows.push(raw.values);
    }
    let n = grid.size();
    let peak = rows.iter().flatten().fold(0.0f64, |m, &v| m.max(v));
    let sino = Raster::from_fn(n, rows.len(), |x, y| rows[y][x]);
    save_png16(&sino, peak, &out_dir.join(SINOGRAM_FILE))?;

    let path = out_dir.join(PROFILES_FILE);
    let csv_err = |source| Error::Csv {
        path: path.clone(),
        source,
    };
    let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
    let mut header = vec!["angle".to_string()];
    header.extend((0..etsynth_core::PROFILE_LEN).map(|k| format!("s{k}")));
    w.write_record(&header).map_err(csv_err)?;
    for (a, p) in profiles {
        let mut rec = vec![a.to_string()];
        rec.extend(p.samples.iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(())
}
