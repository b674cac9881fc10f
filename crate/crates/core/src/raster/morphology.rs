//! Binary morphology with the discrete disk `{(dr, dc) : dr² + dc² ≤ r²}`.
//!
//! Dilation and erosion are thresholds on exact squared distance transforms,
//! which gives the same result as sweeping the disk kernel.

use super::distance::squared_distance_transform;
use super::mask::BinaryMask;

fn reach(radius: f64) -> usize {
    radius.max(0.0).floor() as usize
}

/// Every pixel within distance `radius` of a set pixel. The frame grows by
/// `floor(radius)` so nothing is clipped.
pub fn dilate(mask: &BinaryMask, radius: f64) -> BinaryMask {
    let mut out = mask.padded(reach(radius));
    let (h, w) = out.extent();
    let d2 = squared_distance_transform::<f64>(out.bits(), h, w);
    let r2 = radius * radius;
    for (i, d) in d2.iter().enumerate() {
        out.set(i / w, i % w, *d <= r2);
    }
    out
}

/// Pixels whose whole disk lies inside the mask. Everything outside the frame
/// counts as clear.
pub fn erode(mask: &BinaryMask, radius: f64) -> BinaryMask {
    let pad = reach(radius).max(1);
    let padded = mask.padded(pad);
    let (h, w) = padded.extent();
    let clear: Vec<bool> = padded.bits().iter().map(|&b| !b).collect();
    let d2 = squared_distance_transform::<f64>(&clear, h, w);
    let r2 = radius * radius;
    let mut out = padded;
    for (i, d) in d2.iter().enumerate() {
        out.set(i / w, i % w, *d > r2);
    }
    out.reframed(mask.frame())
}

/// Dilation followed by erosion, framed like the input. The closing of a set
/// never leaves the bounding box of its set pixels, so the reframe is lossless.
pub fn closing(mask: &BinaryMask, radius: f64) -> BinaryMask {
    erode(&dilate(mask, radius), radius).reframed(mask.frame())
}

/// Union of `closing(mask, s)` over every `s <= radius`. Digital disks do
/// not nest their closings, so plain closing can lose pixels as the radius
/// grows; this variant cannot.
///
/// A pixel `p` is in `closing(mask, √s)` iff no pixel `q` with
/// `|q - p|² <= s` has squared distance to the mask above `s`, so each `q`
/// blocks the half-open interval `[|q - p|², d²(q))` of `s` values. Scanning
/// offsets by length finds the smallest unblocked `s` per pixel.
pub fn monotone_closing(mask: &BinaryMask, radius: f64) -> BinaryMask {
    let k = reach(radius);
    let r2 = (radius.max(0.0) * radius.max(0.0)).floor() as u64;
    let padded = mask.padded(k + 1);
    let (h, w) = padded.extent();
    let d2: Vec<u64> = squared_distance_transform::<f64>(padded.bits(), h, w)
        .into_iter()
        .map(|d| if d.is_finite() { d as u64 } else { u64::MAX })
        .collect();
    let mut offsets: Vec<(u64, isize, isize)> = Vec::new();
    let ki = k as isize;
    for dr in -ki..=ki {
        for dc in -ki..=ki {
            let len = (dr * dr + dc * dc) as u64;
            if len <= r2 {
                offsets.push((len, dr, dc));
            }
        }
    }
    offsets.sort_unstable();
    let mut out = padded.clone();
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            if d2[i] == 0 || d2[i] > r2 {
                continue;
            }
            let mut covered = 0u64;
            for &(len, dr, dc) in &offsets {
                if len > covered {
                    break;
                }
                let (qr, qc) = (r as isize + dr, c as isize + dc);
                let dq = if qr < 0 || qc < 0 || qr >= h as isize || qc >= w as isize {
                    u64::MAX
                } else {
                    d2[qr as usize * w + qc as usize]
                };
                covered = covered.max(dq);
                if covered > r2 {
                    break;
                }
            }
            out.set(r, c, covered <= r2);
        }
    }
    out.reframed(mask.frame())
}
