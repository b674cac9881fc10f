//! Parametric coarsening operators spanning the continuum from the exact
//! outline (strength 0) toward the convex hull.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::distance::signed_distance_field;
use super::hull::convex_hull_mask;
use super::mask::BinaryMask;
use super::morphology::monotone_closing;
use super::MaskError;

/// Largest radius / sigma accepted, in pixels.
pub const MAX_RADIUS_PX: f64 = 512.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoarseningKind {
    Identity,
    Closing,
    HullBlend,
    AlphaSmooth,
    BlurThreshold,
}

impl CoarseningKind {
    pub fn name(self) -> &'static str {
        match self {
            CoarseningKind::Identity => "identity",
            CoarseningKind::Closing => "closing",
            CoarseningKind::HullBlend => "hull_blend",
            CoarseningKind::AlphaSmooth => "alpha_smooth",
            CoarseningKind::BlurThreshold => "blur_threshold",
        }
    }
}

impl FromStr for CoarseningKind {
    type Err = MaskError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().replace('-', "_").as_str() {
            "identity" => Ok(CoarseningKind::Identity),
            "closing" => Ok(CoarseningKind::Closing),
            "hull_blend" => Ok(CoarseningKind::HullBlend),
            "alpha_smooth" => Ok(CoarseningKind::AlphaSmooth),
            "blur_threshold" | "blur" => Ok(CoarseningKind::BlurThreshold),
            other => Err(MaskError::InvalidOp(format!("unknown coarsening kind {other:?}"))),
        }
    }
}

/// A coarsening operator. `strength` is a radius in pixels for closing and
/// alpha_smooth, the Gaussian sigma for blur_threshold, and the blend weight
/// `λ ∈ [0, 1]` for hull_blend. Closing and alpha_smooth use
/// [`monotone_closing`], so their output only grows with strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoarseningOp {
    pub kind: CoarseningKind,
    pub strength: f64,
}

impl CoarseningOp {
    pub const IDENTITY: CoarseningOp = CoarseningOp { kind: CoarseningKind::Identity, strength: 0.0 };

    pub fn new(kind: CoarseningKind, strength: f64) -> Result<Self, MaskError> {
        let op = CoarseningOp { kind, strength };
        op.validate()?;
        Ok(op)
    }

    pub fn closing(radius: f64) -> Self {
        CoarseningOp { kind: CoarseningKind::Closing, strength: radius }
    }

    pub fn validate(&self) -> Result<(), MaskError> {
        let s = self.strength;
        let ok = s.is_finite()
            && match self.kind {
                CoarseningKind::Identity => s == 0.0,
                CoarseningKind::HullBlend => (0.0..=1.0).contains(&s),
                _ => (0.0..=MAX_RADIUS_PX).contains(&s),
            };
        if ok {
            Ok(())
        } else {
            Err(MaskError::InvalidOp(format!("strength {s} out of range for {}", self.kind.name())))
        }
    }
}

impl fmt::Display for CoarseningOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind.name(), self.strength)
    }
}

/// Parses `kind` or `kind:strength`.
impl FromStr for CoarseningOp {
    type Err = MaskError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, strength) = match s.split_once(':') {
            Some((k, v)) => {
                let v: f64 = v
                    .trim()
                    .parse()
                    .map_err(|_| MaskError::InvalidOp(format!("bad strength in {s:?}")))?;
                (k.parse()?, v)
            }
            None => (s.parse()?, 0.0),
        };
        CoarseningOp::new(kind, strength)
    }
}

/// Applies `op` to `mask`. Empty masks pass through unchanged.
pub fn coarsen(mask: &BinaryMask, op: &CoarseningOp) -> Result<BinaryMask, MaskError> {
    op.validate()?;
    if mask.is_empty() {
        return Ok(mask.clone());
    }
    Ok(match op.kind {
        CoarseningKind::Identity => mask.clone(),
        CoarseningKind::Closing => monotone_closing(mask, op.strength),
        CoarseningKind::HullBlend => hull_blend(mask, op.strength)?,
        CoarseningKind::AlphaSmooth => {
            let hull = convex_hull_mask(mask)?;
            monotone_closing(mask, op.strength).intersection(&hull)
        }
        CoarseningKind::BlurThreshold => blur_threshold(mask, op.strength),
    })
}

/// Zero level set of `(1 − λ)·sdf(mask) + λ·sdf(hull)`.
fn hull_blend(mask: &BinaryMask, lambda: f64) -> Result<BinaryMask, MaskError> {
    let rect = mask.bounds().ok_or(MaskError::EmptyMask)?;
    let frame = mask.reframed(rect).padded(1);
    let hull = convex_hull_mask(mask)?.reframed(frame.frame());
    let a = signed_distance_field::<f64>(&frame);
    let b = signed_distance_field::<f64>(&hull);
    let mut out = frame.clone();
    let w = out.width();
    for (i, (da, db)) in a.iter().zip(&b).enumerate() {
        out.set(i / w, i % w, (1.0 - lambda) * da + lambda * db < 0.0);
    }
    Ok(out)
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let k = (3.0 * sigma).ceil() as i64;
    let raw: Vec<f64> = (-k..=k).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / sum).collect()
}

/// Separable Gaussian blur of the indicator, kept where the result is ≥ 0.5.
fn blur_threshold(mask: &BinaryMask, sigma: f64) -> BinaryMask {
    if sigma == 0.0 {
        return mask.clone();
    }
    let kernel = gaussian_kernel(sigma);
    let k = kernel.len() / 2;
    let padded = mask.padded(k);
    let (h, w) = padded.extent();
    let src: Vec<f64> = padded.bits().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let mut tmp = vec![0.0; h * w];
    for r in 0..h {
        for c in 0..w {
            let mut acc = 0.0;
            for (j, wk) in kernel.iter().enumerate() {
                let cc = c as i64 + j as i64 - k as i64;
                if cc >= 0 && (cc as usize) < w {
                    acc += wk * src[r * w + cc as usize];
                }
            }
            tmp[r * w + c] = acc;
        }
    }
    let mut out = padded;
    for r in 0..h {
        for c in 0..w {
            let mut acc = 0.0;
            for (j, wk) in kernel.iter().enumerate() {
                let rr = r as i64 + j as i64 - k as i64;
                if rr >= 0 && (rr as usize) < h {
                    acc += wk * tmp[rr as usize * w + c];
                }
            }
            out.set(r, c, acc >= 0.5);
        }
    }
    out
}
