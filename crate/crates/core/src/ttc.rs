//! Model time-to-collision: translate two masks frame by frame until they
//! first share a pixel.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::csvio;
use crate::geometry::Vec2;
use crate::raster::{coarsen, rasterize_world, BinaryMask, CoarseningOp, MaskError, Offset, PixelRect};
use crate::scalar::Scalar;
use crate::stimulus::{Condition, Scenario};

/// Simulated time allowed before a pair counts as non-colliding.
pub const DEFAULT_HORIZON_S: f64 = 10.0;

#[derive(Debug, Error)]
pub enum TtcError {
    #[error("invalid TTC query: {0}")]
    InvalidQuery(String),
    #[error("no overlap within {0} frames")]
    NoCollisionWithinHorizon(u64),
    #[error(transparent)]
    Mask(#[from] MaskError),
}

/// Velocities are in pixels per frame with `x` along columns and `y` along
/// rows; `frame_rate` is in frames per second.
#[derive(Debug, Clone)]
pub struct TtcQuery<T: Scalar> {
    pub m1: BinaryMask,
    pub m2: BinaryMask,
    pub v1: Vec2<T>,
    pub v2: Vec2<T>,
    pub frame_rate: T,
    pub horizon_frames: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TtcResult<T: Scalar> {
    pub ttc_seconds: Option<T>,
    pub first_overlap_frame: Option<u64>,
    pub collided: bool,
}

impl<T: Scalar> TtcResult<T> {
    fn hit(frame: u64, frame_rate: T) -> Self {
        TtcResult {
            ttc_seconds: Some(T::from_u64(frame).unwrap_or_else(T::infinity) / frame_rate),
            first_overlap_frame: Some(frame),
            collided: true,
        }
    }

    pub fn missed() -> Self {
        TtcResult { ttc_seconds: None, first_overlap_frame: None, collided: false }
    }
}

/// Integer displacement after `n` frames: `round(n·v)` per component.
pub fn displacement<T: Scalar>(v: Vec2<T>, n: u64) -> Offset {
    let n = T::from_u64(n).unwrap_or_else(T::infinity);
    Offset::new((v.y * n).round_i64(), (v.x * n).round_i64())
}

fn check_velocity<T: Scalar>(v: Vec2<T>) -> Result<(), TtcError> {
    if v.x.is_finite() && v.y.is_finite() {
        Ok(())
    } else {
        Err(TtcError::InvalidQuery("velocities must be finite".into()))
    }
}

impl<T: Scalar> TtcQuery<T> {
    pub fn validate(&self) -> Result<(), TtcError> {
        if !(self.frame_rate > T::zero()) || !self.frame_rate.is_finite() {
            return Err(TtcError::InvalidQuery(format!("frame rate {} must be positive", self.frame_rate)));
        }
        if self.horizon_frames < 1 {
            return Err(TtcError::InvalidQuery("horizon must be at least one frame".into()));
        }
        if self.m1.is_empty() || self.m2.is_empty() {
            return Err(TtcError::InvalidQuery("masks must be nonempty".into()));
        }
        check_velocity(self.v1)?;
        check_velocity(self.v2)
    }
}

/// Separation of two pixel rectangles along one axis: positive when they are
/// apart, `≤ 0` when their projections share a line.
fn axis_gap(a0: i64, a1: i64, b0: i64, b1: i64) -> i64 {
    (b0 - a1).max(a0 - b1)
}

/// Frames after the current one that are certain to be overlap-free given
/// the current per-axis gaps. Relative displacement drifts from `n·w` by at
/// most one pixel, so over `k` frames the gap shrinks by at most `k·|w| + 2`.
fn safe_skip(gap: i64, w: f64, remaining: u64) -> u64 {
    if gap < 3 {
        return 0;
    }
    let w = w.abs();
    if w == 0.0 {
        return remaining;
    }
    let k = ((gap - 3) as f64 / w).floor();
    if k >= remaining as f64 {
        remaining
    } else {
        k as u64
    }
}

fn sweep<T: Scalar>(
    m1: &BinaryMask,
    m2: &BinaryMask,
    v1: Vec2<T>,
    v2: Vec2<T>,
    frame_rate: T,
    horizon_frames: u64,
) -> Result<TtcResult<T>, TtcError> {
    let (Some(b1), Some(b2)) = (m1.bounds(), m2.bounds()) else {
        return Err(TtcError::InvalidQuery("masks must be nonempty".into()));
    };
    let w = (v1 - v2).cast::<f64>();
    let mut n = 0u64;
    while n <= horizon_frames {
        let d1 = displacement(v1, n);
        let d2 = displacement(v2, n);
        let r1: PixelRect = b1.translate(d1);
        let r2: PixelRect = b2.translate(d2);
        let gap_r = axis_gap(r1.row0, r1.row1, r2.row0, r2.row1);
        let gap_c = axis_gap(r1.col0, r1.col1, r2.col0, r2.col1);
        if gap_r <= 0 && gap_c <= 0 && m1.overlaps_shifted(d1, m2, d2) {
            return Ok(TtcResult::hit(n, frame_rate));
        }
        let remaining = horizon_frames - n;
        let skip = safe_skip(gap_r, w.y, remaining).max(safe_skip(gap_c, w.x, remaining));
        n = n.saturating_add(skip).saturating_add(1);
    }
    Err(TtcError::NoCollisionWithinHorizon(horizon_frames))
}

/// First frame `n ∈ [0, horizon_frames]` at which the translated masks
/// overlap. Displacements are recomputed from `n` every frame, so there is
/// no accumulated drift. Frames that provably cannot overlap are skipped
/// without changing the answer.
pub fn simulate_ttc<T: Scalar>(query: &TtcQuery<T>) -> Result<TtcResult<T>, TtcError> {
    query.validate()?;
    sweep(&query.m1, &query.m2, query.v1, query.v2, query.frame_rate, query.horizon_frames)
}

/// Reference implementation stepping every frame with materialized
/// translations.
pub fn simulate_ttc_naive<T: Scalar>(query: &TtcQuery<T>) -> Result<TtcResult<T>, TtcError> {
    query.validate()?;
    for n in 0..=query.horizon_frames {
        let a = query.m1.translate(displacement(query.v1, n));
        let b = query.m2.translate(displacement(query.v2, n));
        if a.overlaps(&b) {
            return Ok(TtcResult::hit(n, query.frame_rate));
        }
    }
    Err(TtcError::NoCollisionWithinHorizon(query.horizon_frames))
}

pub fn horizon_frames<T: Scalar>(horizon_s: T, frame_rate: T) -> u64 {
    let frames = (horizon_s * frame_rate).ceil();
    if frames <= T::zero() {
        0
    } else {
        frames.to_u64().unwrap_or(u64::MAX)
    }
}

/// TTC for a scenario from its (agent, patient) masks in world pixels, with
/// the horizon given in seconds. A zero horizon only checks frame 0.
pub fn scenario_ttc<T: Scalar>(
    scenario: &Scenario<T>,
    masks: (&BinaryMask, &BinaryMask),
    horizon_s: T,
) -> Result<TtcResult<T>, TtcError> {
    if !(scenario.frame_rate > T::zero()) {
        return Err(TtcError::InvalidQuery(format!("frame rate {} must be positive", scenario.frame_rate)));
    }
    if masks.0.is_empty() || masks.1.is_empty() {
        return Err(TtcError::InvalidQuery("masks must be nonempty".into()));
    }
    check_velocity(scenario.v_agent)?;
    check_velocity(scenario.v_patient)?;
    let n_max = horizon_frames(horizon_s, scenario.frame_rate);
    sweep(masks.0, masks.1, scenario.v_agent, scenario.v_patient, scenario.frame_rate, n_max)
}

/// Exact rasterization of a scenario's two polygons at frame 0.
pub fn scenario_masks<T: Scalar>(scenario: &Scenario<T>) -> Result<(BinaryMask, BinaryMask), TtcError> {
    let agent = rasterize_world(&scenario.agent_world()).ok_or(MaskError::EmptyMask)?;
    let patient = rasterize_world(&scenario.patient_world()).ok_or(MaskError::EmptyMask)?;
    Ok((agent, patient))
}

/// Orders two segmented objects as (agent, patient) by matching their pixel
/// centroids to the scenario's polygon centroids.
pub fn assign_objects<T: Scalar>(scenario: &Scenario<T>, a: BinaryMask, b: BinaryMask) -> (BinaryMask, BinaryMask) {
    let centroid = |m: &BinaryMask| {
        let (mut r, mut c, mut n) = (0.0f64, 0.0f64, 0.0f64);
        for p in m.set_pixels() {
            r += p.row as f64 + 0.5;
            c += p.col as f64 + 0.5;
            n += 1.0;
        }
        Vec2::new(c / n.max(1.0), r / n.max(1.0))
    };
    let ga = scenario.agent_world().centroid().cast::<f64>();
    let gp = scenario.patient_world().centroid().cast::<f64>();
    let (ca, cb) = (centroid(&a), centroid(&b));
    let straight = (ca - ga).norm() + (cb - gp).norm();
    let crossed = (cb - ga).norm() + (ca - gp).norm();
    if crossed < straight {
        (b, a)
    } else {
        (a, b)
    }
}

/// Coarsens each object on its own so the operator can never merge them.
pub fn coarsen_pair(
    masks: (&BinaryMask, &BinaryMask),
    op: &CoarseningOp,
) -> Result<(BinaryMask, BinaryMask), MaskError> {
    Ok((coarsen(masks.0, op)?, coarsen(masks.1, op)?))
}

pub const TTC_CSV_HEADER: [&str; 7] =
    ["scenario_id", "pair_id", "condition", "tau_gt_s", "ttc_model_s", "first_overlap_frame", "collided"];

/// One row of a batch TTC table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TtcRecord {
    pub scenario_id: String,
    pub pair_id: String,
    pub condition: Condition,
    pub tau_gt_s: f64,
    pub ttc_model_s: Option<f64>,
    pub first_overlap_frame: Option<u64>,
    pub collided: bool,
}

impl TtcRecord {
    pub fn new<T: Scalar>(scenario: &Scenario<T>, result: &TtcResult<T>) -> Self {
        TtcRecord {
            scenario_id: scenario.id.clone(),
            pair_id: scenario.pair_id.clone(),
            condition: scenario.condition,
            tau_gt_s: scenario.tau_gt.as_f64(),
            ttc_model_s: result.ttc_seconds.map(Scalar::as_f64),
            first_overlap_frame: result.first_overlap_frame,
            collided: result.collided,
        }
    }
}

/// Runs every scenario in parallel; output order follows input order. A
/// scenario that never collides yields a row with `collided = false`; other
/// errors abort the batch.
pub fn batch_ttc<T: Scalar>(
    scenarios: &[Scenario<T>],
    masks: &[(BinaryMask, BinaryMask)],
    horizon_s: T,
) -> Result<Vec<TtcRecord>, TtcError> {
    if scenarios.len() != masks.len() {
        return Err(TtcError::InvalidQuery(format!(
            "{} scenarios but {} mask pairs",
            scenarios.len(),
            masks.len()
        )));
    }
    scenarios
        .par_iter()
        .zip(masks.par_iter())
        .map(|(s, (a, p))| {
            let result = match scenario_ttc(s, (a, p), horizon_s) {
                Ok(r) => r,
                Err(TtcError::NoCollisionWithinHorizon(_)) => TtcResult::missed(),
                Err(e) => return Err(e),
            };
            Ok(TtcRecord::new(s, &result))
        })
        .collect()
}

pub fn write_ttc_csv(path: &Path, comments: &[String], records: &[TtcRecord]) -> Result<(), csv::Error> {
    csvio::write_csv(path, comments, &TTC_CSV_HEADER, records)
}

pub fn read_ttc_csv(path: &Path) -> Result<Vec<TtcRecord>, csv::Error> {
    csvio::read_csv(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::dilate;

    fn square(col0: i64) -> BinaryMask {
        BinaryMask::from_fn(Offset::new(0, col0), 10, 10, |_, _| true).unwrap()
    }

    fn query(m1: BinaryMask, m2: BinaryMask, v2: (f64, f64)) -> TtcQuery<f64> {
        TtcQuery {
            m1,
            m2,
            v1: Vec2::zero(),
            v2: Vec2::new(v2.0, v2.1),
            frame_rate: 30.0,
            horizon_frames: 300,
        }
    }

    #[test]
    fn squares_closing_at_three_pixels_per_frame() {
        let r = simulate_ttc(&query(square(0), square(40), (-3.0, 0.0))).unwrap();
        assert_eq!(r.first_overlap_frame, Some(11));
        assert!((r.ttc_seconds.unwrap() - 11.0 / 30.0).abs() < 1e-12);
        assert!(r.collided);
    }

    #[test]
    fn dilated_square_collides_a_frame_earlier() {
        let b = dilate(&square(40), 2.0);
        let r = simulate_ttc(&query(square(0), b, (-3.0, 0.0))).unwrap();
        assert_eq!(r.first_overlap_frame, Some(10));
    }

    #[test]
    fn overlap_at_start() {
        let r = simulate_ttc(&query(square(0), square(5), (1.0, 0.0))).unwrap();
        assert_eq!(r.first_overlap_frame, Some(0));
        assert_eq!(r.ttc_seconds, Some(0.0));
    }

    #[test]
    fn diverging_hits_horizon() {
        let q = query(square(0), square(40), (3.0, 0.0));
        assert!(matches!(simulate_ttc(&q), Err(TtcError::NoCollisionWithinHorizon(300))));
    }

    #[test]
    fn invalid_queries() {
        let mut q = query(square(0), square(40), (-3.0, 0.0));
        q.horizon_frames = 0;
        assert!(matches!(simulate_ttc(&q), Err(TtcError::InvalidQuery(_))));
        q.horizon_frames = 10;
        q.frame_rate = 0.0;
        assert!(matches!(simulate_ttc(&q), Err(TtcError::InvalidQuery(_))));
    }

    #[test]
    fn subpixel_velocity_rounds_half_away() {
        assert_eq!(displacement(Vec2::new(0.5f64, -0.5), 1), Offset::new(-1, 1));
        assert_eq!(displacement(Vec2::new(0.25f32, 0.0), 2), Offset::new(0, 1));
        assert_eq!(displacement(Vec2::new(0.3f64, 0.0), 10), Offset::new(0, 3));
    }

    #[test]
    fn skipping_matches_naive_stepping() {
        let a = BinaryMask::from_ascii(Offset::new(3, 2), &["#..#", "####", "#..#"]).unwrap();
        let b = BinaryMask::from_ascii(Offset::new(-20, 70), &[".#.", "###"]).unwrap();
        for &(vx, vy) in &[(-1.3, 0.45), (-0.7, 0.3), (-2.5, 0.0), (0.0, 0.9), (-0.05, 0.02)] {
            let mut q = query(a.clone(), b.clone(), (vx, vy));
            q.horizon_frames = 2000;
            let fast = simulate_ttc(&q);
            let slow = simulate_ttc_naive(&q);
            assert_eq!(fast.ok().map(|r| r.first_overlap_frame), slow.ok().map(|r| r.first_overlap_frame));
        }
    }

    #[test]
    fn horizon_rounding() {
        assert_eq!(horizon_frames(10.0f64, 30.0), 300);
        assert_eq!(horizon_frames(0.01f64, 30.0), 1);
        assert_eq!(horizon_frames(0.0f64, 30.0), 0);
    }
}
