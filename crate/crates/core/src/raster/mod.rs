//! Binary-mask algebra on an unbounded integer lattice: rasterization,
//! probability-map ingestion, connected components, translation, overlap,
//! morphology, convex hulls and coarsening operators.

pub mod coarsen;
pub mod components;
pub mod distance;
pub mod hull;
pub mod mask;
pub mod morphology;
pub mod probability;
pub mod rasterize;

pub use coarsen::{coarsen, CoarseningKind, CoarseningOp};
pub use components::{connected_components, two_largest};
pub use distance::{signed_distance_field, squared_distance_transform};
pub use hull::convex_hull_mask;
pub use mask::{overlap, translate, BinaryMask, Offset, PixelRect};
pub use morphology::{closing, dilate, erode, monotone_closing};
pub use probability::{mask_from_probability, ProbabilityMap};
pub use rasterize::{rasterize, rasterize_world};

#[derive(Debug, thiserror::Error)]
pub enum MaskError {
    #[error("mask extent must be positive")]
    EmptyExtent,
    #[error("operation needs a nonempty mask")]
    EmptyMask,
    #[error("expected at least two objects, found {found}")]
    TooFewObjects { found: usize },
    #[error("invalid coarsening operator: {0}")]
    InvalidOp(String),
    #[error("malformed file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Image(#[from] image::ImageError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
