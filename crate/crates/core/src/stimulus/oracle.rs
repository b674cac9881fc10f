//! Continuous-time first contact of two translating polygons.

use crate::geometry::{polygons_intersect, ray_segment_hit, Polygon, Vec2};
use crate::scalar::Scalar;

use super::scenario::Scenario;
use super::GenError;

/// Earliest `t ≥ 0` (in frames) at which `moving`, translating by `w` per
/// frame, touches the fixed polygon `fixed`. Both are in world coordinates.
/// Returns `Some(0)` when they already touch.
pub fn contact_time<T: Scalar>(moving: &Polygon<T>, fixed: &Polygon<T>, w: Vec2<T>) -> Option<T> {
    if polygons_intersect(moving, fixed) {
        return Some(T::zero());
    }
    let mut best: Option<T> = None;
    let mut keep = |t: Option<T>| {
        if let Some(t) = t {
            best = Some(best.map_or(t, |b| b.min(t)));
        }
    };
    for &v in &moving.vertices {
        for (a, b) in fixed.edges() {
            keep(ray_segment_hit(v, w, a, b));
        }
    }
    for &v in &fixed.vertices {
        for (a, b) in moving.edges() {
            keep(ray_segment_hit(v, -w, a, b));
        }
    }
    best
}

/// Exact-geometry TTC in seconds: the first instant the agent and patient
/// polygons touch under their constant velocities.
pub fn ground_truth_ttc<T: Scalar>(scenario: &Scenario<T>) -> Result<T, GenError> {
    let agent = scenario.agent_world();
    let patient = scenario.patient_world();
    let w = scenario.v_agent - scenario.v_patient;
    contact_time(&agent, &patient, w)
        .map(|frames| frames / scenario.frame_rate)
        .ok_or(GenError::NoCollision)
}
