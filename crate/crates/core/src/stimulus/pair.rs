//! Matched concave/convex collision pairs.
//!
//! Shapes are built in a local frame where the agent moves along `+x`
//! relative to the patient. The agent's flat leading face sits at `x = 0`
//! with a rectangular notch of width `mouth` and depth `depth` centered on it;
//! its back is a convex polygon inscribed in a half-ellipse. The patient is a
//! blunt convex polygon, narrower than the mouth, whose flat face at its local
//! `x = 0` points back at the agent. In the concave scenario the patient's
//! face meets the notch floor; in the convex scenario the agent's notch is
//! filled and the agent is set back by `depth`, so both first contacts happen
//! after the same travel.

use std::f64::consts::PI;

use rand::Rng;

use super::config::{GeneratorConfig, PALETTE_SIZE};
use super::oracle::ground_truth_ttc;
use super::polygon_gen::{generate_polygon, MAX_ATTEMPTS};
use super::rng::{uniform, uniform_usize, RngState};
use super::scenario::{Condition, Kinematics, Scenario};
use super::GenError;
use crate::geometry::{polygons_intersect, ConcavitySpan, Polygon, Vec2};
use crate::scalar::Scalar;

/// Both scenarios' exact TTC must match `tau_gt` this closely (seconds).
pub const PAIR_TTC_TOLERANCE_S: f64 = 1e-6;

/// Local-frame agent outlines sharing one back.
#[derive(Debug, Clone)]
pub struct AgentShapes {
    pub notched: Polygon<f64>,
    pub filled: Polygon<f64>,
    pub mouth: f64,
    pub depth: f64,
}

fn build_agent(config: &GeneratorConfig, rng: &mut RngState) -> Result<AgentShapes, GenError> {
    let nc = &config.notch;
    let mouth = uniform(rng, nc.mouth_width);
    let depth = uniform(rng, nc.depth);
    let lip = uniform(rng, nc.lip);
    let face = mouth + 2.0 * lip;
    let half = face / 2.0;
    let n = uniform_usize(rng, config.vertex_range[0], config.vertex_range[1]);
    let back_count = n.saturating_sub(2).max(1);
    for _ in 0..MAX_ATTEMPTS {
        let extra = rng.random_range(0.5 * lip..=2.0 * lip);
        let reach = (depth + extra) / (1.0 - mouth / face);
        let step = PI / (back_count + 1) as f64;
        let back: Vec<Vec2<f64>> = (1..=back_count)
            .map(|j| {
                let jitter = 0.45 * config.irregularity * rng.random_range(-1.0..=1.0);
                let phi = PI / 2.0 + step * (j as f64 + jitter);
                Vec2::new(reach * phi.cos(), half * phi.sin())
            })
            .collect();

        let mut filled = vec![Vec2::new(0.0, -half), Vec2::new(0.0, half)];
        filled.extend(back.iter().copied());
        let filled = Polygon::new(filled);

        let m = mouth / 2.0;
        let mut notched = vec![
            Vec2::new(0.0, -half),
            Vec2::new(0.0, -m),
            Vec2::new(-depth, -m),
            Vec2::new(-depth, m),
            Vec2::new(0.0, m),
            Vec2::new(0.0, half),
        ];
        notched.extend(back.iter().copied());
        let mut notched = Polygon::new(notched);
        notched.concavity_spans.push(ConcavitySpan { start: 1, end: 4 });

        if filled.validate().is_ok() && notched.validate().is_ok() {
            return Ok(AgentShapes { notched, filled, mouth, depth });
        }
    }
    Err(GenError::GenerationExhausted { attempts: MAX_ATTEMPTS })
}

/// Keeps the part of a convex polygon with `x ≥ x0`.
fn clip_left<T: Scalar>(poly: &Polygon<T>, x0: T) -> Polygon<T> {
    let mut out = Vec::new();
    for (a, b) in poly.edges() {
        let a_in = a.x >= x0;
        let b_in = b.x >= x0;
        if a_in {
            out.push(a);
        }
        if a_in != b_in {
            let t = (x0 - a.x) / (b.x - a.x);
            out.push(Vec2::new(x0, a.y + t * (b.y - a.y)));
        }
    }
    Polygon::new(out)
}

/// Drops repeated and collinear vertices.
fn tidy(poly: Polygon<f64>) -> Polygon<f64> {
    let mut v = poly.vertices;
    let scale = 1e-9;
    loop {
        let n = v.len();
        if n < 4 {
            break;
        }
        let drop = (0..n).find(|&i| {
            let prev = v[(i + n - 1) % n];
            let next = v[(i + 1) % n];
            (v[i] - prev).norm() < scale || (v[i] - prev).cross(next - v[i]).abs() < scale
        });
        match drop {
            Some(i) => {
                v.remove(i);
            }
            None => break,
        }
    }
    Polygon::new(v)
}

fn build_patient(config: &GeneratorConfig, width: f64, length: f64, rng: &mut RngState) -> Result<Polygon<f64>, GenError> {
    let convex_cfg = GeneratorConfig { concavity_range: [0, 0], ..config.clone() };
    const CUT: f64 = 0.15;
    for _ in 0..MAX_ATTEMPTS {
        let raw: Polygon<f64> = generate_polygon(&convex_cfg, rng)?;
        let bb = raw.bbox();
        let full = length / (1.0 - CUT);
        let cy = (bb.min.y + bb.max.y) / 2.0;
        let scaled = Polygon::new(
            raw.vertices
                .iter()
                .map(|v| Vec2::new((v.x - bb.min.x) / bb.width() * full, (v.y - cy) / bb.height() * width))
                .collect(),
        );
        let clipped = tidy(clip_left(&scaled, CUT * full).translated(Vec2::new(-CUT * full, 0.0)));
        if clipped.validate().is_ok() {
            return Ok(clipped);
        }
    }
    Err(GenError::GenerationExhausted { attempts: MAX_ATTEMPTS })
}

/// Builds a concave/convex pair with identical kinematics whose exact first
/// contacts both happen at `kinematics.tau_gt`. The scene is centered on the
/// canvas and the patient's face is snapped to a pixel-center line.
pub fn make_matched_pair<T: Scalar>(
    config: &GeneratorConfig,
    kinematics: &Kinematics<T>,
    pair_id: &str,
    rng: &mut RngState,
) -> Result<(Scenario<T>, Scenario<T>), GenError> {
    config.validate()?;
    let rel = (kinematics.v_agent - kinematics.v_patient).cast::<f64>();
    let speed = rel.norm();
    let fps = kinematics.frame_rate.as_f64();
    let tau = kinematics.tau_gt.as_f64();
    if !(speed > 0.0) {
        return Err(GenError::PairConstructionFailed("relative velocity is zero".into()));
    }
    if !(fps > 0.0) || !(tau > 0.0) || !tau.is_finite() {
        return Err(GenError::PairConstructionFailed(format!(
            "need positive frame rate and tau_gt, got {fps} and {tau}"
        )));
    }

    let agent = build_agent(config, rng)?;
    let nc = &config.notch;
    let patient_width = agent.mouth * nc.patient_width_fraction;
    let patient_length = uniform(rng, nc.patient_length);
    let patient = build_patient(config, patient_width, patient_length, rng)?;
    let agent_color = rng.random_range(0..PALETTE_SIZE) as u8;
    let patient_color = ((agent_color as usize + rng.random_range(1..PALETTE_SIZE)) % PALETTE_SIZE) as u8;

    // Along-axis layout with the patient face at 0.
    let gap = speed * tau * fps;
    let concave_x = -gap + agent.depth;
    let convex_x = -gap;
    let back = -agent.filled.bbox().min.x;
    let mid = (convex_x - back + patient.bbox().max.x) / 2.0;
    let theta = rel.y.atan2(rel.x);
    let center = Vec2::new(config.canvas[1] as f64 / 2.0, config.canvas[0] as f64 / 2.0);
    let place = |x: f64| center + Vec2::new(x - mid, 0.0).rotate(theta);
    let raw_patient = place(0.0);
    let snap = |v: f64| (v - 0.5).round() + 0.5;
    let shift = Vec2::new(snap(raw_patient.x) - raw_patient.x, snap(raw_patient.y) - raw_patient.y);

    let orient = |p: &Polygon<f64>, color: u8| -> Polygon<T> {
        let mut q = p.rotated(theta).cast::<T>();
        q.color_index = color;
        q
    };
    let patient_poly = orient(&patient, patient_color);
    let patient_pos = (raw_patient + shift).cast::<T>();
    let make = |poly: &Polygon<f64>, x: f64, condition: Condition| Scenario {
        id: format!("{pair_id}_{condition}"),
        agent: orient(poly, agent_color),
        patient: patient_poly.clone(),
        agent_position: (place(x) + shift).cast::<T>(),
        patient_position: patient_pos,
        v_agent: kinematics.v_agent,
        v_patient: kinematics.v_patient,
        frame_rate: kinematics.frame_rate,
        tau_gt: kinematics.tau_gt,
        condition,
        pair_id: pair_id.to_string(),
    };
    let concave = make(&agent.notched, concave_x, Condition::Concave);
    let convex = make(&agent.filled, convex_x, Condition::Convex);

    for s in [&concave, &convex] {
        if polygons_intersect(&s.agent_world(), &s.patient_world()) {
            return Err(GenError::PairConstructionFailed(format!("{}: objects overlap at frame 0", s.id)));
        }
        let ttc = ground_truth_ttc(s)?.as_f64();
        if (ttc - tau).abs() >= PAIR_TTC_TOLERANCE_S {
            return Err(GenError::PairConstructionFailed(format!(
                "{}: exact TTC {ttc} s differs from tau_gt {tau} s",
                s.id
            )));
        }
    }
    Ok((concave, convex))
}

/// The concave scenario with its notch filled in place (no set-back). Its
/// exact TTC is earlier than `tau_gt` by `depth / speed`.
pub fn fill_notch_in_place<T: Scalar>(concave: &Scenario<T>, convex: &Scenario<T>) -> Scenario<T> {
    Scenario {
        agent: convex.agent.clone(),
        condition: Condition::Convex,
        id: format!("{}_filled", concave.id),
        ..concave.clone()
    }
}
