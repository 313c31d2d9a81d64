//! JSON generation config.

use std::fs;
use std::path::{Path, PathBuf};

use etsynth_core::{
    SynthParams, TrajectoryParams, TubeCrossSection, CANONICAL_ANGLES, DEFAULT_MASK_THRESHOLD,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub num_positive: usize,
    pub num_negative: usize,
}

impl Default for Counts {
    fn default() -> Self {
        // phase-one training set: 869 tube cases, 800 without
        Counts {
            num_positive: 869,
            num_negative: 800,
        }
    }
}

impl Counts {
    pub fn total(&self) -> usize {
        self.num_positive + self.num_negative
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Paths {
    pub images_dir: PathBuf,
    pub clavicle_masks_dir: PathBuf,
    pub metadata_csv: PathBuf,
    pub out_dir: Option<PathBuf>,
    /// Optional list of case ids known to contain a tube, one per line.
    pub exclude_list: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationConfig {
    pub working_resolution: usize,
    pub seed: u64,
    pub angles: Vec<u16>,
    pub blend_weight_range: (f64, f64),
    pub mask_threshold: f64,
    pub trajectory: TrajectoryParams,
    pub tube: TubeCrossSection,
    pub counts: Counts,
    pub paths: Paths,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            working_resolution: 224,
            seed: 0,
            angles: CANONICAL_ANGLES.to_vec(),
            blend_weight_range: (0.1, 0.2),
            mask_threshold: DEFAULT_MASK_THRESHOLD,
            trajectory: TrajectoryParams::default(),
            tube: TubeCrossSection::default(),
            counts: Counts::default(),
            paths: Paths::default(),
        }
    }
}

impl GenerationConfig {
    /// Read a config file. Relative paths inside it resolve against the
    /// file's own directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: GenerationConfig =
            serde_json::from_str(&text).map_err(|source| Error::Json {
                path: path.to_owned(),
                source,
            })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let p = &mut cfg.paths;
        for dir in [
            &mut p.images_dir,
            &mut p.clavicle_masks_dir,
            &mut p.metadata_csv,
        ] {
            *dir = resolve(base, dir);
        }
        for opt in [&mut p.out_dir, &mut p.exclude_list] {
            if let Some(dir) = opt.as_mut() {
                *dir = resolve(base, dir);
            }
        }
        Ok(cfg)
    }

    pub fn synth_params(&self) -> SynthParams {
        SynthParams {
            trajectory: self.trajectory,
            blend_weight_range: self.blend_weight_range,
            mask_threshold: self.mask_threshold,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.working_resolution < 2 * 8 + 1 {
            return Err(Error::Config(format!(
                "working_resolution {} is too small",
                self.working_resolution
            )));
        }
        if self.angles.is_empty() {
            return Err(Error::Config("angles must not be empty".into()));
        }
        if let Some(a) = self.angles.iter().find(|a| !CANONICAL_ANGLES.contains(a)) {
            return Err(Error::Config(format!(
                "angle {a} is not one of {CANONICAL_ANGLES:?}"
            )));
        }
        self.tube.validate()?;
        self.synth_params().validate(self.working_resolution)?;
        Ok(())
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.as_os_str().is_empty() || p.is_absolute() {
        p.to_owned()
    } else {
        base.join(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = GenerationConfig::default();
        c.validate().unwrap();
        assert_eq!(c.counts.total(), 1669);
    }

    #[test]
    fn partial_json_fills_defaults() {
        let c: GenerationConfig = serde_json::from_str(
            r#"{"angles": [0], "counts": {"num_positive": 2, "num_negative": 2}}"#,
        )
        .unwrap();
        assert_eq!(c.angles, vec![0]);
        assert_eq!(c.working_resolution, 224);
        assert_eq!(c.trajectory.x_jitter_px, (-2, 2));
        assert_eq!(c.tube.outer_diameter, 160.0);
    }

    #[test]
    fn bad_values_rejected() {
        let mut c = GenerationConfig {
            angles: vec![45],
            ..Default::default()
        };
        assert!(c.validate().is_err());
        c.angles.clear();
        assert!(c.validate().is_err());
        let c = GenerationConfig {
            blend_weight_range: (0.5, 1.5),
            ..Default::default()
        };
        assert!(matches!(c.validate(), Err(Error::Synthesis(_))));
    }

    #[test]
    fn relative_paths_resolve_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        fs::write(
            &path,
            r#"{"paths": {"images_dir": "imgs", "clavicle_masks_dir": "/abs/masks", "metadata_csv": "meta.csv"}}"#,
        )
        .unwrap();
        let c = GenerationConfig::load(&path).unwrap();
        assert_eq!(c.paths.images_dir, dir.path().join("imgs"));
        assert_eq!(c.paths.clavicle_masks_dir, PathBuf::from("/abs/masks"));
        assert_eq!(c.paths.out_dir, None);
    }
}
