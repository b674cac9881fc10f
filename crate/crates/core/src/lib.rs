//! Body-representation TTC toolkit: synthetic collision stimuli, binary-mask
//! algebra, mask-based time-to-collision and human/model alignment metrics.
//!
//! Geometry, TTC and metrics are generic over [`Scalar`] (`f32` or `f64`);
//! masks live on an integer lattice. The aliases below fix the common choices.

pub mod alignment;
pub mod csvio;
pub mod geometry;
pub mod raster;
pub mod scalar;
pub mod stimulus;
pub mod ttc;

pub use alignment::MetricError;
pub use geometry::{ConcavitySpan, Polygon, PolygonError, Vec2};
pub use raster::{BinaryMask, CoarseningKind, CoarseningOp, MaskError, Offset, ProbabilityMap};
pub use scalar::Scalar;
pub use stimulus::{Condition, GenError, GeneratorConfig, Kinematics, Scenario, ScenarioManifest};
pub use ttc::{TtcError, TtcQuery, TtcResult};

pub type Vec2f = Vec2<f64>;
pub type Polygon64 = Polygon<f64>;
pub type Polygon32 = Polygon<f32>;
pub type Scenario64 = Scenario<f64>;
pub type Scenario32 = Scenario<f32>;
pub type Kinematics64 = Kinematics<f64>;
pub type TtcQuery64 = TtcQuery<f64>;
pub type TtcResult64 = TtcResult<f64>;
pub type ProbabilityMap32 = ProbabilityMap<f32>;
pub type ProbabilityMap64 = ProbabilityMap<f64>;
pub type HumanResponseTable64 = alignment::HumanResponseTable<f64>;
pub type ConditionTable64 = alignment::ConditionTable<f64>;
pub type AlignmentReport64 = alignment::AlignmentReport<f64>;
pub type SweepResult64 = alignment::SweepResult<f64>;
