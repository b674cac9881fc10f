//! Planar geometry: points, simple polygons with concavity annotations, and
//! the exact predicates the stimulus generator and the continuous TTC oracle
//! rely on.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// A 2D vector in world units. `x` grows with image columns, `y` with rows.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[T; 2]", into = "[T; 2]")]
pub struct Vec2<T: Scalar> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> From<[T; 2]> for Vec2<T> {
    fn from(v: [T; 2]) -> Self {
        Vec2 { x: v[0], y: v[1] }
    }
}

impl<T: Scalar> From<Vec2<T>> for [T; 2] {
    fn from(v: Vec2<T>) -> Self {
        [v.x, v.y]
    }
}

impl<T: Scalar> Vec2<T> {
    pub fn new(x: T, y: T) -> Self {
        Vec2 { x, y }
    }

    pub fn zero() -> Self {
        Vec2 { x: T::zero(), y: T::zero() }
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    pub fn scale(self, s: T) -> Self {
        Vec2 { x: self.x * s, y: self.y * s }
    }

    /// Rotates counter-clockwise (in x/y axes) by `angle` radians.
    pub fn rotate(self, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Vec2 { x: self.x * c - self.y * s, y: self.x * s + self.y * c }
    }

    pub fn cast<U: Scalar>(self) -> Vec2<U> {
        Vec2 { x: U::lit(self.x.as_f64()), y: U::lit(self.y.as_f64()) }
    }
}

impl<T: Scalar> Add for Vec2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Vec2 { x: self.x + o.x, y: self.y + o.y }
    }
}

impl<T: Scalar> Sub for Vec2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Vec2 { x: self.x - o.x, y: self.y - o.y }
    }
}

impl<T: Scalar> Neg for Vec2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Vec2 { x: -self.x, y: -self.y }
    }
}

impl<T: Scalar> Mul<T> for Vec2<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

/// Inclusive range of vertex indices marking one notch of a polygon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConcavitySpan {
    pub start: usize,
    pub end: usize,
}

impl ConcavitySpan {
    pub fn single(i: usize) -> Self {
        ConcavitySpan { start: i, end: i }
    }

    pub fn contains(&self, i: usize) -> bool {
        self.start <= i && i <= self.end
    }
}

/// Axis-aligned bounding box `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb<T: Scalar> {
    pub min: Vec2<T>,
    pub max: Vec2<T>,
}

impl<T: Scalar> Aabb<T> {
    pub fn width(&self) -> T {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> T {
        self.max.y - self.min.y
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolygonError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon is not simple")]
    NotSimple,
    #[error("polygon orientation is not counter-clockwise")]
    Clockwise,
    #[error("concavity span {0} has no reflex vertex")]
    SpanWithoutReflex(usize),
    #[error("vertex {0} lies outside every concavity span but is not convex")]
    UnannotatedReflex(usize),
    #[error("concavity span {0} is out of range")]
    SpanOutOfRange(usize),
}

/// A simple polygon in local coordinates with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon<T: Scalar> {
    pub vertices: Vec<Vec2<T>>,
    #[serde(default)]
    pub concavity_spans: Vec<ConcavitySpan>,
    #[serde(default)]
    pub color_index: u8,
}

impl<T: Scalar> Polygon<T> {
    pub fn new(vertices: Vec<Vec2<T>>) -> Self {
        Polygon { vertices, concavity_spans: Vec::new(), color_index: 0 }
    }

    pub fn from_xy(pts: &[(f64, f64)]) -> Self {
        Self::new(pts.iter().map(|&(x, y)| Vec2::new(T::lit(x), T::lit(y))).collect())
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vec2<T>, Vec2<T>)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Shoelace area; positive for counter-clockwise order.
    pub fn signed_area(&self) -> T {
        let twice: T = self.edges().map(|(a, b)| a.cross(b)).sum();
        twice / T::lit(2.0)
    }

    pub fn perimeter(&self) -> T {
        self.edges().map(|(a, b)| (b - a).norm()).sum()
    }

    pub fn bbox(&self) -> Aabb<T> {
        let mut min = self.vertices[0];
        let mut max = self.vertices[0];
        for v in &self.vertices[1..] {
            min.x = min.x.min(v.x);
            min.y = min.y.min(v.y);
            max.x = max.x.max(v.x);
            max.y = max.y.max(v.y);
        }
        Aabb { min, max }
    }

    pub fn centroid(&self) -> Vec2<T> {
        let a = self.signed_area();
        let six = T::lit(6.0);
        let mut c = Vec2::zero();
        for (p, q) in self.edges() {
            let w = p.cross(q);
            c = c + (p + q).scale(w);
        }
        c.scale(T::one() / (six * a))
    }

    /// Turn at vertex `i` (cross product of incoming and outgoing edge).
    /// Positive means convex for a counter-clockwise polygon.
    pub fn turn(&self, i: usize) -> T {
        let n = self.vertices.len();
        let prev = self.vertices[(i + n - 1) % n];
        let cur = self.vertices[i];
        let next = self.vertices[(i + 1) % n];
        (cur - prev).cross(next - cur)
    }

    /// Interior angle strictly below 180°.
    pub fn is_convex_vertex(&self, i: usize) -> bool {
        self.turn(i) > T::zero()
    }

    pub fn is_reflex_vertex(&self, i: usize) -> bool {
        self.turn(i) < T::zero()
    }

    pub fn reflex_count(&self) -> usize {
        (0..self.len()).filter(|&i| self.is_reflex_vertex(i)).count()
    }

    pub fn is_convex(&self) -> bool {
        (0..self.len()).all(|i| self.is_convex_vertex(i))
    }

    /// O(n²) test that no two edges intersect except adjacent edges at
    /// their shared vertex.
    pub fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return false;
        }
        for i in 0..n {
            let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
            if a == b {
                return false;
            }
            for j in (i + 1)..n {
                let (c, d) = (self.vertices[j], self.vertices[(j + 1) % n]);
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    // Adjacent edges may only share their common vertex; a
                    // collinear fold back onto the previous edge is a violation.
                    let (shared, p, q) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                    if (p - shared).cross(q - shared) == T::zero()
                        && (p - shared).dot(q - shared) > T::zero()
                    {
                        return false;
                    }
                } else if segments_intersect(a, b, c, d) {
                    return false;
                }
            }
        }
        true
    }

    /// Checks every structural invariant of a generated polygon.
    pub fn validate(&self) -> Result<(), PolygonError> {
        let n = self.len();
        if n < 3 {
            return Err(PolygonError::TooFewVertices(n));
        }
        if !self.is_simple() {
            return Err(PolygonError::NotSimple);
        }
        if self.signed_area() <= T::zero() {
            return Err(PolygonError::Clockwise);
        }
        for (k, span) in self.concavity_spans.iter().enumerate() {
            if span.end >= n || span.start > span.end {
                return Err(PolygonError::SpanOutOfRange(k));
            }
            if !(span.start..=span.end).any(|i| self.is_reflex_vertex(i)) {
                return Err(PolygonError::SpanWithoutReflex(k));
            }
        }
        for i in 0..n {
            let in_span = self.concavity_spans.iter().any(|s| s.contains(i));
            if !in_span && !self.is_convex_vertex(i) {
                return Err(PolygonError::UnannotatedReflex(i));
            }
        }
        Ok(())
    }

    pub fn translated(&self, offset: Vec2<T>) -> Self {
        Polygon {
            vertices: self.vertices.iter().map(|&v| v + offset).collect(),
            ..self.clone()
        }
    }

    pub fn rotated(&self, angle: T) -> Self {
        Polygon {
            vertices: self.vertices.iter().map(|&v| v.rotate(angle)).collect(),
            ..self.clone()
        }
    }

    pub fn cast<U: Scalar>(&self) -> Polygon<U> {
        Polygon {
            vertices: self.vertices.iter().map(|v| v.cast()).collect(),
            concavity_spans: self.concavity_spans.clone(),
            color_index: self.color_index,
        }
    }

    /// Closed point-in-polygon test: boundary points count as inside.
    pub fn contains(&self, p: Vec2<T>) -> bool {
        if self.edges().any(|(a, b)| point_on_segment(p, a, b)) {
            return true;
        }
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

/// Sign of the orientation of `(a, b, c)`: >0 counter-clockwise.
pub fn orient<T: Scalar>(a: Vec2<T>, b: Vec2<T>, c: Vec2<T>) -> T {
    (b - a).cross(c - a)
}

pub fn point_on_segment<T: Scalar>(p: Vec2<T>, a: Vec2<T>, b: Vec2<T>) -> bool {
    orient(a, b, p) == T::zero()
        && p.x >= a.x.min(b.x)
        && p.x <= a.x.max(b.x)
        && p.y >= a.y.min(b.y)
        && p.y <= a.y.max(b.y)
}

/// Orientation sign of `(a, b, c)`, with values within rounding error of
/// zero (relative to the edge lengths) reported as collinear.
fn orient_sign<T: Scalar>(a: Vec2<T>, b: Vec2<T>, c: Vec2<T>) -> i8 {
    let v = orient(a, b, c);
    let tol = T::epsilon() * T::lit(32.0) * (b - a).norm() * (c - a).norm();
    if v > tol {
        1
    } else if v < -tol {
        -1
    } else {
        0
    }
}

fn in_box<T: Scalar>(p: Vec2<T>, a: Vec2<T>, b: Vec2<T>) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed segment intersection (touching counts). Nearly collinear
/// configurations are resolved by bounding-box overlap, so two disjoint
/// pieces of one straight line never register as crossing.
pub fn segments_intersect<T: Scalar>(a: Vec2<T>, b: Vec2<T>, c: Vec2<T>, d: Vec2<T>) -> bool {
    let d1 = orient_sign(c, d, a);
    let d2 = orient_sign(c, d, b);
    let d3 = orient_sign(a, b, c);
    let d4 = orient_sign(a, b, d);
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    (d1 == 0 && in_box(a, c, d))
        || (d2 == 0 && in_box(b, c, d))
        || (d3 == 0 && in_box(c, a, b))
        || (d4 == 0 && in_box(d, a, b))
}

/// Whether two closed polygons (already in world coordinates) share a point.
pub fn polygons_intersect<T: Scalar>(a: &Polygon<T>, b: &Polygon<T>) -> bool {
    let (ba, bb) = (a.bbox(), b.bbox());
    if ba.max.x < bb.min.x || bb.max.x < ba.min.x || ba.max.y < bb.min.y || bb.max.y < ba.min.y {
        return false;
    }
    for (p, q) in a.edges() {
        for (r, s) in b.edges() {
            if segments_intersect(p, q, r, s) {
                return true;
            }
        }
    }
    b.contains(a.vertices[0]) || a.contains(b.vertices[0])
}

/// Earliest `t ≥ 0` at which point `p` moving with velocity `w` touches the
/// closed segment `[a, b]`, if ever.
pub fn ray_segment_hit<T: Scalar>(p: Vec2<T>, w: Vec2<T>, a: Vec2<T>, b: Vec2<T>) -> Option<T> {
    let zero = T::zero();
    let e = b - a;
    let denom = w.cross(e);
    let ap = a - p;
    if denom == zero {
        // Parallel motion: contact only if the path is collinear with the edge.
        if ap.cross(w) != zero {
            return None;
        }
        let ww = w.dot(w);
        if ww == zero {
            return None;
        }
        let ta = ap.dot(w) / ww;
        let tb = (b - p).dot(w) / ww;
        let (lo, hi) = if ta < tb { (ta, tb) } else { (tb, ta) };
        if hi < zero {
            return None;
        }
        return Some(lo.max(zero));
    }
    let t = ap.cross(e) / denom;
    let s = ap.cross(w) / denom;
    if t >= zero && s >= zero && s <= T::one() {
        Some(t)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(side: f64) -> Polygon<f64> {
        Polygon::from_xy(&[(0.0, 0.0), (side, 0.0), (side, side), (0.0, side)])
    }

    #[test]
    fn shoelace_area_and_orientation() {
        let sq = square(5.0);
        assert_eq!(sq.signed_area(), 25.0);
        assert!(sq.is_convex());
        assert!(sq.validate().is_ok());
        let cw = Polygon::<f64>::from_xy(&[(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)]);
        assert_eq!(cw.validate(), Err(PolygonError::Clockwise));
    }

    #[test]
    fn bowtie_is_not_simple() {
        let bowtie = Polygon::<f64>::from_xy(&[(0.0, 0.0), (2.0, 2.0), (2.0, 0.0), (0.0, 2.0)]);
        assert!(!bowtie.is_simple());
    }

    #[test]
    fn reflex_vertices_must_be_annotated() {
        // Arrow-head with one reflex vertex at index 3.
        let mut p = Polygon::<f64>::from_xy(&[(0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (2.0, 1.0), (0.0, 4.0)]);
        assert_eq!(p.reflex_count(), 1);
        assert_eq!(p.validate(), Err(PolygonError::UnannotatedReflex(3)));
        p.concavity_spans.push(ConcavitySpan::single(3));
        assert!(p.validate().is_ok());
        p.concavity_spans.push(ConcavitySpan::single(1));
        assert_eq!(p.validate(), Err(PolygonError::SpanWithoutReflex(1)));
    }

    #[test]
    fn closed_containment() {
        let sq = square(2.0);
        assert!(sq.contains(Vec2::new(1.0, 1.0)));
        assert!(sq.contains(Vec2::new(2.0, 1.0)));
        assert!(sq.contains(Vec2::new(0.0, 0.0)));
        assert!(!sq.contains(Vec2::new(2.1, 1.0)));
    }

    #[test]
    fn ray_hits() {
        let a = Vec2::new(5.0, -1.0);
        let b = Vec2::new(5.0, 1.0);
        assert_eq!(ray_segment_hit(Vec2::zero(), Vec2::new(1.0, 0.0), a, b), Some(5.0));
        assert_eq!(ray_segment_hit(Vec2::zero(), Vec2::new(-1.0, 0.0), a, b), None);
        // collinear approach
        let c = Vec2::new(3.0, 0.0);
        let d = Vec2::new(6.0, 0.0);
        assert_eq!(ray_segment_hit(Vec2::zero(), Vec2::new(2.0, 0.0), c, d), Some(1.5));
    }

    #[test]
    fn collinear_pieces_of_a_diagonal_do_not_cross() {
        let v = |x: f64, y: f64| Vec2::new(x, y);
        let (a, b) = (v(-15.81254731775236, 17.283193739298778), v(-6.918612685680653, 7.562078459018695));
        let (c, d) = (v(6.918612685680653, -7.562078459018695), v(15.81254731775236, -17.283193739298778));
        assert!(!segments_intersect(a, b, c, d));
        assert!(segments_intersect(a, d, b, c));
        assert!(segments_intersect(a, b, b, c));
        assert!(segments_intersect(v(0.0, 0.0), v(2.0, 2.0), v(0.0, 2.0), v(2.0, 0.0)));
        assert!(!segments_intersect(v(0.0, 0.0), v(1.0, 1.0), v(0.0, 2.0), v(0.9, 1.1)));
    }

    #[test]
    fn touching_polygons_intersect() {
        let a = square(1.0);
        let b = square(1.0).translated(Vec2::new(1.0, 0.0));
        let c = square(1.0).translated(Vec2::new(1.5, 0.0));
        assert!(polygons_intersect(&a, &b));
        assert!(!polygons_intersect(&a, &c));
        let inner = square(0.2).translated(Vec2::new(0.4, 0.4));
        assert!(polygons_intersect(&a, &inner));
    }

    #[test]
    fn vec2_serializes_as_pair() {
        let v = Vec2::new(1.5f64, -2.0);
        assert_eq!(serde_json::to_string(&v).unwrap(), "[1.5,-2.0]");
        let back: Vec2<f64> = serde_json::from_str("[1.5,-2.0]").unwrap();
        assert_eq!(back, v);
    }
}
