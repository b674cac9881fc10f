//! Single-polygon segmentation dataset on disk.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use image::{Rgb, RgbImage};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::GeneratorConfig;
use super::polygon_gen::generate_polygon;
use super::rng::draw_rng;
use super::scenario::Scenario;
use super::GenError;
use crate::geometry::{Polygon, Vec2};
use crate::raster::rasterize;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetEntry {
    /// Relative to the manifest's directory.
    pub image_path: PathBuf,
    pub mask_path: PathBuf,
    pub split: Split,
    pub seed: u64,
    pub draw_index: u64,
    pub vertex_count: usize,
    pub concavity_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub seed: u64,
    pub config: GeneratorConfig,
    pub entries: Vec<DatasetEntry>,
}

pub const DATASET_MANIFEST_FILE: &str = "manifest.json";

impl DatasetManifest {
    pub fn load(path: &Path) -> Result<Self, GenError> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), GenError> {
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn count(&self, split: Split) -> usize {
        self.entries.iter().filter(|e| e.split == split).count()
    }
}

fn vertex_key(p: &Polygon<f64>) -> Vec<(u64, u64)> {
    p.vertices.iter().map(|v| (v.x.to_bits(), v.y.to_bits())).collect()
}

/// Writes `n_train + n_val` images (one filled polygon on black) with 0/255
/// masks under `out_dir/images` and `out_dir/masks`, plus `manifest.json`.
/// Draws are taken in order from `config.seed`; a draw whose vertex list was
/// already used is skipped, so no polygon appears twice.
pub fn render_dataset(
    config: &GeneratorConfig,
    n_train: usize,
    n_val: usize,
    out_dir: &Path,
) -> Result<DatasetManifest, GenError> {
    config.validate()?;
    fs::create_dir_all(out_dir)?;
    let mut manifest = DatasetManifest { seed: config.seed, config: config.clone(), entries: Vec::new() };
    if n_train + n_val > 0 {
        fs::create_dir_all(out_dir.join("images"))?;
        fs::create_dir_all(out_dir.join("masks"))?;
    }
    let (h, w) = (config.canvas[0], config.canvas[1]);
    let mut seen = HashSet::new();
    let mut draw_index = 0u64;
    let jobs = std::iter::repeat_n(Split::Train, n_train).chain(std::iter::repeat_n(Split::Val, n_val));
    let mut split_counts = [0usize; 2];
    for split in jobs {
        let (poly, index) = loop {
            let mut rng = draw_rng(config.seed, draw_index);
            let index = draw_index;
            draw_index += 1;
            let poly: Polygon<f64> = generate_polygon(config, &mut rng)?;
            if !seen.insert(vertex_key(&poly)) {
                continue;
            }
            let bb = poly.bbox();
            let lo_x = -bb.min.x;
            let hi_x = w as f64 - bb.max.x;
            let lo_y = -bb.min.y;
            let hi_y = h as f64 - bb.max.y;
            let pos = if lo_x < hi_x && lo_y < hi_y {
                Vec2::new(rng.random_range(lo_x..hi_x), rng.random_range(lo_y..hi_y))
            } else {
                Vec2::new(w as f64 / 2.0, h as f64 / 2.0)
            };
            break (poly.translated(pos), index);
        };
        let slot = &mut split_counts[split as usize];
        let stem = format!("{}_{:04}.png", split.as_str(), slot);
        *slot += 1;

        let mask = rasterize(&poly, Vec2::zero(), (h, w));
        let color = config.palette[poly.color_index as usize];
        let mut img = RgbImage::new(w as u32, h as u32);
        for p in mask.set_pixels() {
            img.put_pixel(p.col as u32, p.row as u32, Rgb(color));
        }
        let image_path = PathBuf::from("images").join(&stem);
        let mask_path = PathBuf::from("masks").join(&stem);
        img.save(out_dir.join(&image_path))?;
        mask.to_gray_image().save(out_dir.join(&mask_path))?;
        manifest.entries.push(DatasetEntry {
            image_path,
            mask_path,
            split,
            seed: config.seed,
            draw_index: index,
            vertex_count: poly.len(),
            concavity_count: poly.concavity_spans.len(),
        });
    }
    manifest.save(&out_dir.join(DATASET_MANIFEST_FILE))?;
    Ok(manifest)
}

/// Frame 0 of a scenario: both objects in their palette colors on black,
/// the agent drawn last.
pub fn render_frame<T: Scalar>(scenario: &Scenario<T>, config: &GeneratorConfig) -> RgbImage {
    let (h, w) = (config.canvas[0], config.canvas[1]);
    let mut img = RgbImage::new(w as u32, h as u32);
    for (poly, pos) in [(&scenario.patient, scenario.patient_position), (&scenario.agent, scenario.agent_position)] {
        let color = Rgb(config.palette[poly.color_index as usize % config.palette.len()]);
        for p in rasterize(poly, pos, (h, w)).set_pixels() {
            img.put_pixel(p.col as u32, p.row as u32, color);
        }
    }
    img
}
