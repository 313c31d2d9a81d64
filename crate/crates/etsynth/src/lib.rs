//! Batch generation of synthetic ET tube radiographs.
//!
//! This crate wraps the `no_std` primitives in [`etsynth_core`] with
//! everything that touches the filesystem: the JSON generation config, the
//! metadata CSV, PNG images and masks, and the JSON-lines manifest.

pub mod cases;
pub mod config;
pub mod debug;
pub mod error;
pub mod fixture;
pub mod generate;
pub mod imageio;
pub mod manifest;

pub use cases::{select_cases, CaseFilter, CaseRecord, ViewPosition};
pub use config::{Counts, GenerationConfig, Paths};
pub use error::{Error, Result};
pub use generate::{case_seed, generate_dataset, render_case, GenerateOptions, GenerationReport};
pub use manifest::{read_manifest, write_manifest, ManifestEntry};
