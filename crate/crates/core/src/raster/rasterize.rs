//! Pixel-center polygon fill: pixel `(r, c)` is set iff `(c + 0.5, r + 0.5)`
//! lies inside the polygon under the even-odd rule, with centers exactly on
//! the boundary counted as inside.

use crate::geometry::{point_on_segment, Polygon, Vec2};
use crate::scalar::Scalar;

use super::mask::{BinaryMask, Offset, PixelRect};

/// Rasterizes `polygon` translated by `position` onto a `(H, W)` canvas whose
/// top-left pixel is world `(0, 0)`. Parts outside the canvas are dropped.
pub fn rasterize<T: Scalar>(polygon: &Polygon<T>, position: Vec2<T>, canvas: (usize, usize)) -> BinaryMask {
    let (h, w) = canvas;
    let mut mask = BinaryMask::covering(PixelRect { row0: 0, col0: 0, row1: h as i64 - 1, col1: w as i64 - 1 });
    let world = polygon.translated(position);
    let frame = mask.frame();
    fill_polygon(&world, |p| {
        if frame.intersect(&PixelRect { row0: p.row, col0: p.col, row1: p.row, col1: p.col }).is_some() {
            mask.set_world(p, true);
        }
    });
    mask
}

/// Rasterizes a world-coordinate polygon onto the unbounded lattice, framed
/// tightly around its set pixels. Returns `None` if no pixel center is covered.
pub fn rasterize_world<T: Scalar>(polygon: &Polygon<T>) -> Option<BinaryMask> {
    let mut pixels = Vec::new();
    fill_polygon(polygon, |p| pixels.push(p));
    BinaryMask::from_world_pixels(&pixels)
}

/// Visits every world pixel whose center is inside the closed polygon. A
/// pixel may be visited more than once.
pub fn fill_polygon<T: Scalar>(polygon: &Polygon<T>, mut visit: impl FnMut(Offset)) {
    if polygon.len() < 3 {
        return;
    }
    let half = T::lit(0.5);
    let bb = polygon.bbox();
    let row_lo = (bb.min.y - half).ceil().round_i64();
    let row_hi = (bb.max.y - half).floor().round_i64();
    let mut xs: Vec<T> = Vec::new();
    for row in row_lo..=row_hi {
        let y = T::lit(row as f64) + half;
        xs.clear();
        for (a, b) in polygon.edges() {
            // Half-open in y so shared vertices are counted once.
            if (a.y <= y && y < b.y) || (b.y <= y && y < a.y) {
                xs.push(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
            }
        }
        xs.sort_by(|p, q| p.partial_cmp(q).expect("finite crossings"));
        for pair in xs.chunks_exact(2) {
            let c0 = (pair[0] - half).ceil().round_i64();
            let c1 = (pair[1] - half).floor().round_i64();
            for col in c0..=c1 {
                visit(Offset::new(row, col));
            }
        }
        // Centers lying exactly on an edge.
        for (a, b) in polygon.edges() {
            if y < a.y.min(b.y) || y > a.y.max(b.y) {
                continue;
            }
            if a.y == b.y {
                let c0 = (a.x.min(b.x) - half).ceil().round_i64();
                let c1 = (a.x.max(b.x) - half).floor().round_i64();
                for col in c0..=c1 {
                    visit(Offset::new(row, col));
                }
                continue;
            }
            let x = a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y);
            let col = (x - half).round_i64();
            let center = Vec2::new(T::lit(col as f64) + half, y);
            if point_on_segment(center, a, b) {
                visit(Offset::new(row, col));
            }
        }
    }
}
