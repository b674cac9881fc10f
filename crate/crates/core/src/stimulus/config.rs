use serde::{Deserialize, Serialize};

use super::GenError;

/// Number of palette entries; polygons carry an index into it.
pub const PALETTE_SIZE: usize = 24;

/// Geometry of the rectangular notch cut into an agent's leading face and of
/// the blunt patient that fits inside it. Ranges are `[min, max]` in pixels
/// and sampled uniformly per pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NotchConfig {
    pub mouth_width: [f64; 2],
    pub depth: [f64; 2],
    /// Face material on each side of the mouth.
    pub lip: [f64; 2],
    /// Patient extent across the motion axis, as a fraction of the mouth width.
    pub patient_width_fraction: f64,
    /// Patient extent along the motion axis.
    pub patient_length: [f64; 2],
}

impl Default for NotchConfig {
    fn default() -> Self {
        NotchConfig {
            mouth_width: [8.0, 28.0],
            depth: [36.0, 36.0],
            lip: [10.0, 16.0],
            patient_width_fraction: 0.6,
            patient_length: [24.0, 40.0],
        }
    }
}

/// Procedural generator settings. Missing JSON fields take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub vertex_range: [usize; 2],
    pub concavity_range: [usize; 2],
    /// Angular jitter in `[0, 1]`; 0 gives evenly spaced vertices.
    pub irregularity: f64,
    /// Radial jitter in `[0, 1]`; 0 gives a constant radius.
    pub spikiness: f64,
    pub palette: Vec<[u8; 3]>,
    /// `(H, W)` in pixels.
    pub canvas: [usize; 2],
    /// Mean polygon radius as a fraction of `min(H, W)`.
    pub radius_range: [f64; 2],
    pub notch: NotchConfig,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 0,
            vertex_range: [5, 12],
            concavity_range: [0, 3],
            irregularity: 0.35,
            spikiness: 0.2,
            palette: default_palette(),
            canvas: [512, 512],
            radius_range: [0.08, 0.22],
            notch: NotchConfig::default(),
        }
    }
}

fn check_range<T: PartialOrd + std::fmt::Debug>(name: &str, r: &[T; 2]) -> Result<(), GenError> {
    if r[0] > r[1] {
        return Err(GenError::InvalidConfig(format!("{name} range {r:?} is empty")));
    }
    Ok(())
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), GenError> {
        check_range("vertex", &self.vertex_range)?;
        check_range("concavity", &self.concavity_range)?;
        check_range("radius", &self.radius_range)?;
        if self.vertex_range[0] < 3 {
            return Err(GenError::InvalidConfig("polygons need at least 3 vertices".into()));
        }
        for (name, v) in [("irregularity", self.irregularity), ("spikiness", self.spikiness)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(GenError::InvalidConfig(format!("{name} {v} outside [0, 1]")));
            }
        }
        if self.palette.len() != PALETTE_SIZE {
            return Err(GenError::InvalidConfig(format!(
                "palette must have {PALETTE_SIZE} entries, got {}",
                self.palette.len()
            )));
        }
        if self.canvas[0] == 0 || self.canvas[1] == 0 {
            return Err(GenError::InvalidConfig("canvas must be nonempty".into()));
        }
        if self.radius_range[0] <= 0.0 {
            return Err(GenError::InvalidConfig("radius fraction must be positive".into()));
        }
        let n = &self.notch;
        check_range("mouth width", &n.mouth_width)?;
        check_range("notch depth", &n.depth)?;
        check_range("lip", &n.lip)?;
        check_range("patient length", &n.patient_length)?;
        if n.mouth_width[0] <= 0.0 || n.depth[0] <= 0.0 || n.lip[0] <= 0.0 || n.patient_length[0] <= 0.0 {
            return Err(GenError::InvalidConfig("notch dimensions must be positive".into()));
        }
        if !(n.patient_width_fraction > 0.0 && n.patient_width_fraction < 1.0) {
            return Err(GenError::InvalidConfig(
                "patient must be strictly narrower than the notch mouth".into(),
            ));
        }
        Ok(())
    }
}

/// 24 evenly spaced hues at a fixed HSL lightness.
pub fn default_palette() -> Vec<[u8; 3]> {
    (0..PALETTE_SIZE).map(|i| hsl_to_rgb(i as f64 * 360.0 / PALETTE_SIZE as f64, 0.9, 0.6)).collect()
}

fn hsl_to_rgb(h: f64, s: f64, l: f64) -> [u8; 3] {
    let c = (1.0 - (2.0 * l - 1.0).abs()) * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let to8 = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    [to8(r), to8(g), to8(b)]
}
