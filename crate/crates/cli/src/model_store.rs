//! Model directory layout: `manifest.json` (sites, slice order, CPK row,
//! configs, preprocessing state) plus one `slice_<i>.json` per trained
//! slice. All files are versioned JSON.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use windcast_core::ensemble::{Combination, EnsembleModel, SliceConfig, SlicePredictor};
use windcast_core::preprocess::{Normalizer, WmfFilter};

const FORMAT_VERSION: u32 = 1;

/// Everything needed to forecast new data: the trained ensemble plus the
/// preprocessing state fitted at training time.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    pub ensemble: EnsembleModel,
    pub wmf: Option<WmfFilter>,
    pub normalizers: BTreeMap<String, Normalizer>,
    pub samples_per_day: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    version: u32,
    target: String,
    neighbors: Vec<String>,
    combination: Combination,
    k_row: Vec<f64>,
    slice_configs: Vec<SliceConfig>,
    /// WMF weights (newest first); absent when denoising was disabled.
    wmf_weights: Option<Vec<f64>>,
    normalizers: BTreeMap<String, Normalizer>,
    samples_per_day: usize,
    slice_files: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SliceFile {
    version: u32,
    slice: SlicePredictor,
}

impl ModelBundle {
    pub fn save(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating model directory {}", dir.display()))?;
        let mut written = Vec::new();
        let slice_files: Vec<String> = (1..=self.ensemble.slices.len())
            .map(|i| format!("slice_{i}.json"))
            .collect();
        for (name, slice) in slice_files.iter().zip(&self.ensemble.slices) {
            let path = dir.join(name);
            let file = SliceFile {
                version: FORMAT_VERSION,
                slice: slice.clone(),
            };
            std::fs::write(&path, serde_json::to_string(&file)?)
                .with_context(|| format!("writing {}", path.display()))?;
            written.push(path);
        }
        let manifest = Manifest {
            version: FORMAT_VERSION,
            target: self.ensemble.target.clone(),
            neighbors: self.ensemble.neighbors.clone(),
            combination: self.ensemble.combination,
            k_row: self.ensemble.k_row.clone(),
            slice_configs: self.ensemble.slice_configs.clone(),
            wmf_weights: self.wmf.as_ref().map(|f| f.weights().to_vec()),
            normalizers: self.normalizers.clone(),
            samples_per_day: self.samples_per_day,
            slice_files,
        };
        let path = dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)
            .with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
        Ok(written)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let manifest_path = dir.join("manifest.json");
        let text = std::fs::read_to_string(&manifest_path)
            .with_context(|| format!("reading {}", manifest_path.display()))?;
        let manifest: Manifest = serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", manifest_path.display()))?;
        if manifest.version != FORMAT_VERSION {
            bail!(
                "unsupported model format version {} (expected {FORMAT_VERSION})",
                manifest.version
            );
        }
        let mut slices = Vec::with_capacity(manifest.slice_files.len());
        for name in &manifest.slice_files {
            let path = dir.join(name);
            let text = std::fs::read_to_string(&path)
                .with_context(|| format!("reading {}", path.display()))?;
            let file: SliceFile =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            if file.version != FORMAT_VERSION {
                bail!("unsupported slice format version {} in {name}", file.version);
            }
            slices.push(file.slice);
        }
        let wmf = manifest
            .wmf_weights
            .map(WmfFilter::new)
            .transpose()
            .context("model WMF weights")?;
        Ok(ModelBundle {
            ensemble: EnsembleModel {
                target: manifest.target,
                neighbors: manifest.neighbors,
                slices,
                combination: manifest.combination,
                k_row: manifest.k_row,
                slice_configs: manifest.slice_configs,
            },
            wmf,
            normalizers: manifest.normalizers,
            samples_per_day: manifest.samples_per_day,
        })
    }
}
