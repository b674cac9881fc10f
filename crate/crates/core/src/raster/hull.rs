use super::mask::{BinaryMask, Offset};
use super::MaskError;

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Convex hull of lattice points `(x, y)` by Andrew's monotone chain, counter-
/// clockwise without collinear points. Fewer than three distinct points are
/// returned as-is (deduplicated).
pub fn convex_hull_points(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut pts = points.to_vec();
    pts.sort_unstable();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<(i64, i64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(i64, i64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Rasterized convex hull of the set-pixel centers, framed on the bounds of
/// the set pixels. Centers on the hull boundary are inside.
pub fn convex_hull_mask(mask: &BinaryMask) -> Result<BinaryMask, MaskError> {
    let rect = mask.bounds().ok_or(MaskError::EmptyMask)?;
    // Only the extreme pixels of each row can be hull vertices.
    let mut candidates = Vec::new();
    let (h, w) = mask.extent();
    for r in 0..h {
        let first = (0..w).find(|&c| mask.get(r, c));
        if let Some(c0) = first {
            let c1 = (0..w).rev().find(|&c| mask.get(r, c)).expect("row has a set pixel");
            let o = mask.origin();
            candidates.push((o.col + c0 as i64, o.row + r as i64));
            candidates.push((o.col + c1 as i64, o.row + r as i64));
        }
    }
    let hull = convex_hull_points(&candidates);
    let n = hull.len();
    let mut out = BinaryMask::covering(rect);
    for row in rect.row0..=rect.row1 {
        for col in rect.col0..=rect.col1 {
            let p = (col, row);
            let inside = (0..n).all(|i| n < 2 || cross(hull[i], hull[(i + 1) % n], p) >= 0);
            if inside {
                out.set_world(Offset::new(row, col), true);
            }
        }
    }
    Ok(out)
}
