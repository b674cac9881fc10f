//! Radial polygon sampler.
//!
//! Vertices sit at increasing angles around the origin: angular gaps are
//! jittered by `irregularity`, radii by `spikiness`. Each concavity pulls one
//! vertex inward past the chord joining its neighbors, which makes it reflex
//! while leaving the neighbors convex. Candidates that break an invariant are
//! rejected and redrawn.

use std::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::Rng;

use super::config::{GeneratorConfig, PALETTE_SIZE};
use super::rng::{uniform, uniform_usize, RngState};
use super::GenError;
use crate::geometry::{ConcavitySpan, Polygon, Vec2};
use crate::scalar::Scalar;

pub const MAX_ATTEMPTS: usize = 1000;

/// Most single-vertex concavities a simple `n`-gon can carry while keeping
/// them separated by convex vertices (and at least three convex vertices).
pub fn max_concavities(n: usize) -> usize {
    (n / 2).min(n.saturating_sub(3))
}

/// Draws a polygon satisfying every [`Polygon::validate`] invariant.
pub fn generate_polygon<T: Scalar>(config: &GeneratorConfig, rng: &mut RngState) -> Result<Polygon<T>, GenError> {
    config.validate()?;
    let n = uniform_usize(rng, config.vertex_range[0], config.vertex_range[1]);
    let k_hi = config.concavity_range[1].min(max_concavities(n));
    let k_lo = config.concavity_range[0].min(k_hi);
    let k = uniform_usize(rng, k_lo, k_hi);
    let min_side = config.canvas[0].min(config.canvas[1]) as f64;
    let radius = uniform(rng, config.radius_range) * min_side;
    let color_index = rng.random_range(0..PALETTE_SIZE) as u8;

    for _ in 0..MAX_ATTEMPTS {
        if let Some(p) = attempt(n, k, radius, config, rng) {
            let mut poly: Polygon<T> = p.cast();
            poly.color_index = color_index;
            if poly.validate().is_ok() {
                return Ok(poly);
            }
        }
    }
    Err(GenError::GenerationExhausted { attempts: MAX_ATTEMPTS })
}

fn attempt(n: usize, k: usize, radius: f64, config: &GeneratorConfig, rng: &mut RngState) -> Option<Polygon<f64>> {
    let irr = config.irregularity;
    let gaps: Vec<f64> = (0..n).map(|_| 1.0 + 0.9 * irr * rng.random_range(-1.0..=1.0)).collect();
    let total: f64 = gaps.iter().sum();
    let start = rng.random_range(0.0..TAU);
    let mut angles = Vec::with_capacity(n);
    let mut acc = start;
    for g in &gaps {
        angles.push(acc);
        acc += g / total * TAU;
    }
    let mut radii: Vec<f64> =
        (0..n).map(|_| radius * (1.0 + config.spikiness * rng.random_range(-0.5..=0.5))).collect();

    let notches = pick_separated(n, k, rng)?;
    let point = |a: f64, r: f64| Vec2::new(r * a.cos(), r * a.sin());
    for &i in &notches {
        let prev = (i + n - 1) % n;
        let next = (i + 1) % n;
        let p = point(angles[prev], radii[prev]);
        let q = point(angles[next], radii[next]);
        let dir = Vec2::new(angles[i].cos(), angles[i].sin());
        // Ray from the origin along `dir` meets the chord p→q at distance t.
        let e = q - p;
        let denom = dir.cross(e);
        if denom.abs() < 1e-12 {
            return None;
        }
        let t = p.cross(e) / denom;
        let s = p.cross(dir) / denom;
        if t <= 0.0 || !(0.0..=1.0).contains(&s) {
            return None;
        }
        radii[i] = t * rng.random_range(0.3..=0.75);
    }
    let vertices = angles.iter().zip(&radii).map(|(&a, &r)| point(a, r)).collect();
    let mut spans: Vec<ConcavitySpan> = notches.into_iter().map(ConcavitySpan::single).collect();
    spans.sort_by_key(|s| s.start);
    Some(Polygon { vertices, concavity_spans: spans, color_index: 0 })
}

/// `k` distinct indices on an `n`-cycle with no two adjacent.
fn pick_separated(n: usize, k: usize, rng: &mut RngState) -> Option<Vec<usize>> {
    if k == 0 {
        return Some(Vec::new());
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    for i in order {
        let clash = chosen.iter().any(|&j| (i + 1) % n == j || (j + 1) % n == i);
        if !clash {
            chosen.push(i);
            if chosen.len() == k {
                return Some(chosen);
            }
        }
    }
    None
}
