//! Procedural polygons, matched collision pairs and the exact-geometry TTC oracle.

pub mod config;
pub mod dataset;
pub mod oracle;
pub mod pair;
pub mod polygon_gen;
pub mod rng;
pub mod scenario;

pub use config::{default_palette, GeneratorConfig, NotchConfig, PALETTE_SIZE};
pub use dataset::{render_dataset, render_frame, DatasetEntry, DatasetManifest, Split, DATASET_MANIFEST_FILE};
pub use oracle::{contact_time, ground_truth_ttc};
pub use pair::{fill_notch_in_place, make_matched_pair, PAIR_TTC_TOLERANCE_S};
pub use polygon_gen::{generate_polygon, max_concavities, MAX_ATTEMPTS};
pub use rng::{draw_rng, RngState};
pub use scenario::{Condition, Kinematics, Scenario, ScenarioManifest};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("no valid polygon after {attempts} attempts")]
    GenerationExhausted { attempts: usize },
    #[error("matched pair construction failed: {0}")]
    PairConstructionFailed(String),
    #[error("polygons never collide")]
    NoCollision,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Image(#[from] image::ImageError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
