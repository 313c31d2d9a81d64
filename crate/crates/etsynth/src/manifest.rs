//! JSON-lines manifest: one [`ManifestEntry`] object per line.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use etsynth_core::ClavicleLandmarks;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub case_id: String,
    pub source_case_id: String,
    /// 1 when a tube was planted, 0 for pass-through negatives.
    pub label: u8,
    /// Relative to the output directory.
    pub image_file: String,
    pub mask_file: String,
    pub seed: u64,
    pub angle: Option<u16>,
    pub blend_weight: Option<f64>,
    /// `[x, y]` pairs in working-resolution pixels.
    pub control_points: Option<Vec<[f64; 2]>>,
    pub landmarks: Option<ClavicleLandmarks>,
}

/// Write `entries` to `<out_dir>/manifest.jsonl` via a temporary file and a
/// rename, after checking every referenced file exists.
pub fn write_manifest(out_dir: &Path, entries: &[ManifestEntry]) -> Result<()> {
    for e in entries {
        for f in [&e.image_file, &e.mask_file] {
            let p = out_dir.join(f);
            if !p.is_file() {
                return Err(Error::io(
                    p,
                    std::io::Error::new(
                        std::io::ErrorKind::NotFound,
                        "manifest references a missing file",
                    ),
                ));
            }
        }
    }
    let tmp = out_dir.join(format!("{MANIFEST_FILE}.tmp"));
    let dest = out_dir.join(MANIFEST_FILE);
    {
        let file = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        let mut w = BufWriter::new(file);
        for e in entries {
            serde_json::to_writer(&mut w, e).map_err(|source| Error::Json {
                path: tmp.clone(),
                source,
            })?;
            w.write_all(b"\n").map_err(|e| Error::io(&tmp, e))?;
        }
        let file = w
            .into_inner()
            .map_err(|e| Error::io(&tmp, e.into_error()))?;
        file.sync_all().map_err(|e| Error::io(&tmp, e))?;
    }
    fs::rename(&tmp, &dest).map_err(|e| Error::io(&dest, e))
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| Error::Json {
            path: path.to_owned(),
            source,
        })?);
    }
    Ok(out)
}
