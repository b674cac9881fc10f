use std::fs;
use std::path::{Path, PathBuf};

use image::GrayImage;
use serde::{Deserialize, Serialize};

use super::MaskError;

/// Integer lattice offset `(row, col)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct Offset {
    pub row: i64,
    pub col: i64,
}

impl Offset {
    pub const ZERO: Offset = Offset { row: 0, col: 0 };

    pub fn new(row: i64, col: i64) -> Self {
        Offset { row, col }
    }
}

impl From<[i64; 2]> for Offset {
    fn from(v: [i64; 2]) -> Self {
        Offset { row: v[0], col: v[1] }
    }
}

impl From<Offset> for [i64; 2] {
    fn from(o: Offset) -> Self {
        [o.row, o.col]
    }
}

impl std::ops::Add for Offset {
    type Output = Offset;
    fn add(self, o: Offset) -> Offset {
        Offset { row: self.row + o.row, col: self.col + o.col }
    }
}

impl std::ops::Neg for Offset {
    type Output = Offset;
    fn neg(self) -> Offset {
        Offset { row: -self.row, col: -self.col }
    }
}

/// Inclusive world-coordinate pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelRect {
    pub row0: i64,
    pub col0: i64,
    pub row1: i64,
    pub col1: i64,
}

impl PixelRect {
    pub fn intersect(&self, o: &PixelRect) -> Option<PixelRect> {
        let r = PixelRect {
            row0: self.row0.max(o.row0),
            col0: self.col0.max(o.col0),
            row1: self.row1.min(o.row1),
            col1: self.col1.min(o.col1),
        };
        (r.row0 <= r.row1 && r.col0 <= r.col1).then_some(r)
    }

    pub fn union(&self, o: &PixelRect) -> PixelRect {
        PixelRect {
            row0: self.row0.min(o.row0),
            col0: self.col0.min(o.col0),
            row1: self.row1.max(o.row1),
            col1: self.col1.max(o.col1),
        }
    }

    pub fn translate(&self, d: Offset) -> PixelRect {
        PixelRect {
            row0: self.row0 + d.row,
            col0: self.col0 + d.col,
            row1: self.row1 + d.row,
            col1: self.col1 + d.col,
        }
    }
}

/// Occupancy grid anchored on an unbounded integer lattice: bit `(r, c)`
/// lives at world pixel `origin + (r, c)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    origin: Offset,
    height: usize,
    width: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    /// An all-clear mask. Both extents must be positive.
    pub fn new(origin: Offset, height: usize, width: usize) -> Result<Self, MaskError> {
        if height == 0 || width == 0 {
            return Err(MaskError::EmptyExtent);
        }
        Ok(BinaryMask { origin, height, width, bits: vec![false; height * width] })
    }

    pub fn from_fn(
        origin: Offset,
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self, MaskError> {
        let mut m = Self::new(origin, height, width)?;
        for r in 0..height {
            for c in 0..width {
                m.bits[r * width + c] = f(r, c);
            }
        }
        Ok(m)
    }

    /// Builds a mask from rows of `'#'` (set) and other characters (clear).
    pub fn from_ascii(origin: Offset, rows: &[&str]) -> Result<Self, MaskError> {
        let h = rows.len();
        let w = rows.iter().map(|r| r.len()).max().unwrap_or(0);
        Self::from_fn(origin, h, w, |r, c| rows[r].as_bytes().get(c) == Some(&b'#'))
    }

    /// Tight mask over a set of world pixels; `None` when the set is empty.
    pub fn from_world_pixels(pixels: &[Offset]) -> Option<Self> {
        let first = pixels.first()?;
        let mut rect = PixelRect { row0: first.row, col0: first.col, row1: first.row, col1: first.col };
        for p in pixels {
            rect = rect.union(&PixelRect { row0: p.row, col0: p.col, row1: p.row, col1: p.col });
        }
        let mut m = Self::covering(rect);
        for p in pixels {
            m.set_world(*p, true);
        }
        Some(m)
    }

    /// An all-clear mask covering `rect`.
    pub fn covering(rect: PixelRect) -> Self {
        let h = (rect.row1 - rect.row0 + 1) as usize;
        let w = (rect.col1 - rect.col0 + 1) as usize;
        BinaryMask {
            origin: Offset::new(rect.row0, rect.col0),
            height: h,
            width: w,
            bits: vec![false; h * w],
        }
    }

    pub fn origin(&self) -> Offset {
        self.origin
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn extent(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// World rectangle covered by the grid (not only the set pixels).
    pub fn frame(&self) -> PixelRect {
        PixelRect {
            row0: self.origin.row,
            col0: self.origin.col,
            row1: self.origin.row + self.height as i64 - 1,
            col1: self.origin.col + self.width as i64 - 1,
        }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.bits[r * self.width + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        self.bits[r * self.width + c] = v;
    }

    /// World lookup; pixels outside the grid are clear.
    #[inline]
    pub fn get_world(&self, p: Offset) -> bool {
        let r = p.row - self.origin.row;
        let c = p.col - self.origin.col;
        if r < 0 || c < 0 || r >= self.height as i64 || c >= self.width as i64 {
            return false;
        }
        self.bits[r as usize * self.width + c as usize]
    }

    /// World write; panics if `p` lies outside the grid.
    pub fn set_world(&mut self, p: Offset, v: bool) {
        let r = (p.row - self.origin.row) as usize;
        let c = (p.col - self.origin.col) as usize;
        assert!(r < self.height && c < self.width, "pixel {p:?} outside mask frame");
        self.bits[r * self.width + c] = v;
    }

    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// World coordinates of set pixels in scanline order.
    pub fn set_pixels(&self) -> impl Iterator<Item = Offset> + '_ {
        let (o, w) = (self.origin, self.width);
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| Offset::new(o.row + (i / w) as i64, o.col + (i % w) as i64))
    }

    /// Bounding rectangle of the set pixels.
    pub fn bounds(&self) -> Option<PixelRect> {
        let mut it = self.set_pixels();
        let first = it.next()?;
        let mut rect = PixelRect { row0: first.row, col0: first.col, row1: first.row, col1: first.col };
        for p in it {
            rect.row0 = rect.row0.min(p.row);
            rect.row1 = rect.row1.max(p.row);
            rect.col0 = rect.col0.min(p.col);
            rect.col1 = rect.col1.max(p.col);
        }
        Some(rect)
    }

    /// Re-frames the mask onto `rect`, dropping pixels that fall outside it.
    pub fn reframed(&self, rect: PixelRect) -> BinaryMask {
        let mut out = BinaryMask::covering(rect);
        if let Some(common) = self.frame().intersect(&rect) {
            for row in common.row0..=common.row1 {
                for col in common.col0..=common.col1 {
                    let p = Offset::new(row, col);
                    if self.get_world(p) {
                        out.set_world(p, true);
                    }
                }
            }
        }
        out
    }

    /// Grows the frame by `pad` pixels on every side.
    pub fn padded(&self, pad: usize) -> BinaryMask {
        let p = pad as i64;
        let f = self.frame();
        self.reframed(PixelRect { row0: f.row0 - p, col0: f.col0 - p, row1: f.row1 + p, col1: f.col1 + p })
    }

    /// Shrinks the frame to the set pixels. Empty masks collapse to a single
    /// clear pixel at the origin.
    pub fn trimmed(&self) -> BinaryMask {
        match self.bounds() {
            Some(rect) => self.reframed(rect),
            None => BinaryMask::covering(PixelRect {
                row0: self.origin.row,
                col0: self.origin.col,
                row1: self.origin.row,
                col1: self.origin.col,
            }),
        }
    }

    /// Shifts the mask by `d`; the grid is untouched so no pixel is ever lost.
    pub fn translate(&self, d: Offset) -> BinaryMask {
        BinaryMask { origin: self.origin + d, ..self.clone() }
    }

    /// Whether some world pixel is set in both masks.
    pub fn overlaps(&self, other: &BinaryMask) -> bool {
        self.overlaps_shifted(Offset::ZERO, other, Offset::ZERO)
    }

    /// Overlap test of `self + d_self` against `other + d_other` without
    /// materializing the translated masks.
    pub fn overlaps_shifted(&self, d_self: Offset, other: &BinaryMask, d_other: Offset) -> bool {
        let a = self.frame().translate(d_self);
        let b = other.frame().translate(d_other);
        let Some(common) = a.intersect(&b) else {
            return false;
        };
        let cols = (common.col1 - common.col0 + 1) as usize;
        for row in common.row0..=common.row1 {
            let ra = (row - a.row0) as usize;
            let rb = (row - b.row0) as usize;
            let ca = (common.col0 - a.col0) as usize;
            let cb = (common.col0 - b.col0) as usize;
            let sa = &self.bits[ra * self.width + ca..ra * self.width + ca + cols];
            let sb = &other.bits[rb * other.width + cb..rb * other.width + cb + cols];
            if sa.iter().zip(sb).any(|(&x, &y)| x && y) {
                return true;
            }
        }
        false
    }

    /// World-set inclusion: every set pixel of `self` is set in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.set_pixels().all(|p| other.get_world(p))
    }

    /// World-set equality, independent of frames.
    pub fn same_pixels(&self, other: &BinaryMask) -> bool {
        self.popcount() == other.popcount() && self.is_subset_of(other)
    }

    /// World-set union over the union of both frames.
    pub fn union(&self, other: &BinaryMask) -> BinaryMask {
        let mut out = BinaryMask::covering(self.frame().union(&other.frame()));
        for p in self.set_pixels().chain(other.set_pixels()) {
            out.set_world(p, true);
        }
        out
    }

    /// World-set intersection, framed like `self`.
    pub fn intersection(&self, other: &BinaryMask) -> BinaryMask {
        let mut out = self.clone();
        for (i, b) in out.bits.iter_mut().enumerate() {
            if *b {
                let p = Offset::new(
                    self.origin.row + (i / self.width) as i64,
                    self.origin.col + (i % self.width) as i64,
                );
                *b = other.get_world(p);
            }
        }
        out
    }

    pub fn to_gray_image(&self) -> GrayImage {
        GrayImage::from_fn(self.width as u32, self.height as u32, |x, y| {
            image::Luma([if self.get(y as usize, x as usize) { 255 } else { 0 }])
        })
    }

    /// Writes an 8-bit `{0,255}` PNG plus the `{origin:[r,c]}` sidecar next to it.
    pub fn save(&self, png_path: &Path) -> Result<(), MaskError> {
        self.to_gray_image().save_with_format(png_path, image::ImageFormat::Png)?;
        let sidecar = MaskSidecar { origin: self.origin };
        fs::write(sidecar_path(png_path), serde_json::to_string(&sidecar)?)?;
        Ok(())
    }

    /// Reads a mask PNG (nonzero = set). The sidecar is optional; without it
    /// the origin is `(0, 0)`.
    pub fn load(png_path: &Path) -> Result<Self, MaskError> {
        let img = image::open(png_path)?.into_luma8();
        let side = sidecar_path(png_path);
        let origin = if side.exists() {
            serde_json::from_str::<MaskSidecar>(&fs::read_to_string(side)?)?.origin
        } else {
            Offset::ZERO
        };
        let (w, h) = img.dimensions();
        Self::from_fn(origin, h as usize, w as usize, |r, c| img.get_pixel(c as u32, r as u32)[0] != 0)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct MaskSidecar {
    origin: Offset,
}

pub fn sidecar_path(png_path: &Path) -> PathBuf {
    png_path.with_extension("json")
}

/// True iff some world pixel is set in both masks.
pub fn overlap(a: &BinaryMask, b: &BinaryMask) -> bool {
    a.overlaps(b)
}

pub fn translate(mask: &BinaryMask, d: Offset) -> BinaryMask {
    mask.translate(d)
}
