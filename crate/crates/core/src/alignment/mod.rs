//! Human/model comparison: condition-averaged TTCs, concavity effects, the
//! alignment error and coarsening sweeps.

pub mod aggregate;
pub mod human;
pub mod sweep;

pub use aggregate::{
    alignment_error, compare_tables, concavity_effect, concavity_effect_at, condition_average, per_video_mean,
    AlignmentReport, Cell, ConditionTable, Effects, PerVideoMeans, ReportJson, ReportRow, TauAlignment, TauKey,
};
pub use human::{
    load_human_csv, load_video_meta, meta_from_scenarios, save_video_meta, synthesize_humans, write_human_csv,
    HumanResponseTable, HumanRow, SyntheticHumanConfig, VideoMeta, VideoMetaMap,
};
pub use sweep::{
    detect_u_shape, human_condition_table, model_condition_table, run_sweep, run_sweep_with_masks, write_sweep_csv,
    SweepPoint, SweepResult, DEFAULT_U_MARGIN_S,
};

use thiserror::Error;

use crate::raster::MaskError;
use crate::stimulus::Condition;
use crate::ttc::TtcError;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("schema error: {0}")]
    SchemaError(String),
    #[error("video {0} has no metadata")]
    UnknownVideo(String),
    #[error("no videos for tau {tau_s} s, {condition}")]
    MissingCell { tau_s: f64, condition: Condition },
    #[error("model and human share no tau values")]
    EmptyIntersection,
    #[error("need at least 3 points, got {found}")]
    TooFewPoints { found: usize },
    #[error("{0}")]
    InvalidInput(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Ttc(#[from] TtcError),
    #[error(transparent)]
    Mask(#[from] MaskError),
}
