//! Two-class per-pixel probability maps and their on-disk formats.
//!
//! PMAP layout (little-endian): `b"PMAP"`, `u32 H`, `u32 W`, `u32 channels`,
//! then `H·W·channels` `f32` values in row-major `H × W × C` order.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::mask::{BinaryMask, Offset};
use super::MaskError;
use crate::scalar::Scalar;

pub const PMAP_MAGIC: &[u8; 4] = b"PMAP";
const NPY_MAGIC: &[u8; 6] = b"\x93NUMPY";
/// Per-pixel channel sums must be within this of 1.
pub const SUM_TOLERANCE: f64 = 1e-5;

/// Background/object probabilities, `values[(r·W + c)·2 + k]` for class `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMap<T: Scalar> {
    height: usize,
    width: usize,
    values: Vec<T>,
}

impl<T: Scalar> ProbabilityMap<T> {
    /// Validates shape, range and per-pixel normalization.
    pub fn new(height: usize, width: usize, values: Vec<T>) -> Result<Self, MaskError> {
        if height == 0 || width == 0 {
            return Err(MaskError::EmptyExtent);
        }
        if values.len() != height * width * 2 {
            return Err(MaskError::Format(format!(
                "expected {} values for {height}x{width}x2, got {}",
                height * width * 2,
                values.len()
            )));
        }
        let tol = T::lit(SUM_TOLERANCE);
        for (i, px) in values.chunks_exact(2).enumerate() {
            let in_range = px.iter().all(|v| *v >= T::zero() && *v <= T::one());
            if !in_range || ((px[0] + px[1]) - T::one()).abs() > tol {
                return Err(MaskError::Format(format!(
                    "pixel {} ({}, {}) is not a normalized distribution: {:?}",
                    i,
                    i / width,
                    i % width,
                    px
                )));
            }
        }
        Ok(ProbabilityMap { height, width, values })
    }

    /// Softmax over the class axis of raw `H × W × 2` logits.
    pub fn from_logits(height: usize, width: usize, logits: &[T]) -> Result<Self, MaskError> {
        if logits.len() != height * width * 2 {
            return Err(MaskError::Format("logit buffer has the wrong length".into()));
        }
        let mut values = Vec::with_capacity(logits.len());
        for px in logits.chunks_exact(2) {
            let m = px[0].max(px[1]);
            let e0 = (px[0] - m).exp();
            let e1 = (px[1] - m).exp();
            let s = e0 + e1;
            values.push(e0 / s);
            values.push(e1 / s);
        }
        Self::new(height, width, values)
    }

    /// One-hot encoding of a mask (object = 1 where set).
    pub fn one_hot(mask: &BinaryMask) -> Self {
        let values = mask
            .bits()
            .iter()
            .flat_map(|&b| if b { [T::zero(), T::one()] } else { [T::one(), T::zero()] })
            .collect();
        ProbabilityMap { height: mask.height(), width: mask.width(), values }
    }

    pub fn extent(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `(background, object)` at pixel `(r, c)`.
    pub fn at(&self, r: usize, c: usize) -> (T, T) {
        let i = (r * self.width + c) * 2;
        (self.values[i], self.values[i + 1])
    }

    pub fn save_pmap(&self, path: &Path) -> Result<(), MaskError> {
        let mut buf = Vec::with_capacity(16 + self.values.len() * 4);
        buf.extend_from_slice(PMAP_MAGIC);
        buf.extend_from_slice(&(self.height as u32).to_le_bytes());
        buf.extend_from_slice(&(self.width as u32).to_le_bytes());
        buf.extend_from_slice(&2u32.to_le_bytes());
        for v in &self.values {
            buf.extend_from_slice(&(v.as_f64() as f32).to_le_bytes());
        }
        fs::File::create(path)?.write_all(&buf)?;
        Ok(())
    }

    pub fn save_npy(&self, path: &Path) -> Result<(), MaskError> {
        use npyz::WriterBuilder;
        let file = fs::File::create(path)?;
        let mut writer = npyz::WriteOptions::<f32>::new()
            .default_dtype()
            .shape(&[self.height as u64, self.width as u64, 2])
            .writer(std::io::BufWriter::new(file))
            .begin_nd()?;
        writer.extend(self.values.iter().map(|v| v.as_f64() as f32))?;
        writer.finish()?;
        Ok(())
    }

    /// Reads either format, chosen by the leading magic bytes.
    pub fn load(path: &Path) -> Result<Self, MaskError> {
        let bytes = fs::read(path)?;
        if bytes.starts_with(PMAP_MAGIC) {
            Self::parse_pmap(&bytes)
        } else if bytes.starts_with(NPY_MAGIC) {
            Self::parse_npy(&bytes)
        } else {
            Err(MaskError::Format(format!("{}: unrecognized probability map header", path.display())))
        }
    }

    pub fn parse_pmap(bytes: &[u8]) -> Result<Self, MaskError> {
        if bytes.len() < 16 || &bytes[..4] != PMAP_MAGIC {
            return Err(MaskError::Format("missing PMAP header".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
        let (h, w, ch) = (u32_at(4) as usize, u32_at(8) as usize, u32_at(12) as usize);
        if ch != 2 {
            return Err(MaskError::Format(format!("expected 2 channels, got {ch}")));
        }
        let body = &bytes[16..];
        if body.len() != h * w * ch * 4 {
            return Err(MaskError::Format(format!(
                "PMAP body holds {} bytes, header implies {}",
                body.len(),
                h * w * ch * 4
            )));
        }
        let values = body
            .chunks_exact(4)
            .map(|b| T::lit(f32::from_le_bytes(b.try_into().expect("4 bytes")) as f64))
            .collect();
        Self::new(h, w, values)
    }

    pub fn parse_npy(bytes: &[u8]) -> Result<Self, MaskError> {
        let file = npyz::NpyFile::new(bytes)?;
        let shape = file.shape().to_vec();
        if shape.len() != 3 || shape[2] != 2 {
            return Err(MaskError::Format(format!("expected shape (H, W, 2), got {shape:?}")));
        }
        if file.order() != npyz::Order::C {
            return Err(MaskError::Format("Fortran-ordered arrays are not supported".into()));
        }
        let (h, w) = (shape[0] as usize, shape[1] as usize);
        let values: Vec<T> = match file.into_vec::<f32>() {
            Ok(v) => v.into_iter().map(|x| T::lit(x as f64)).collect(),
            Err(_) => npyz::NpyFile::new(bytes)?
                .into_vec::<f64>()
                .map_err(|e| MaskError::Format(format!("unsupported npy dtype: {e}")))?
                .into_iter()
                .map(T::lit)
                .collect(),
        };
        Self::new(h, w, values)
    }
}

/// Object wherever the object probability strictly exceeds the background
/// probability; exact ties go to background.
pub fn mask_from_probability<T: Scalar>(map: &ProbabilityMap<T>) -> BinaryMask {
    let (h, w) = map.extent();
    BinaryMask::from_fn(Offset::ZERO, h, w, |r, c| {
        let (bg, obj) = map.at(r, c);
        obj > bg
    })
    .expect("probability map extent is positive")
}
