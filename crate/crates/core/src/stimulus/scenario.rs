use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::GeneratorConfig;
use super::GenError;
use crate::geometry::{Polygon, Vec2};
use crate::scalar::Scalar;

/// Which local shape faces the collision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Concave,
    Convex,
}

impl Condition {
    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Concave => "concave",
            Condition::Convex => "convex",
        }
    }

    pub fn swapped(self) -> Condition {
        match self {
            Condition::Concave => Condition::Convex,
            Condition::Convex => Condition::Concave,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Condition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "concave" => Ok(Condition::Concave),
            "convex" => Ok(Condition::Convex),
            other => Err(format!("unknown condition {other:?}")),
        }
    }
}

/// Shared motion parameters of a matched pair. Velocities are in pixels per
/// frame, `frame_rate` in frames per second, `tau_gt` in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kinematics<T: Scalar> {
    pub v_agent: Vec2<T>,
    pub v_patient: Vec2<T>,
    pub frame_rate: T,
    pub tau_gt: T,
}

/// One collision video: two polygons at their frame-0 positions plus motion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario<T: Scalar> {
    pub id: String,
    pub agent: Polygon<T>,
    pub patient: Polygon<T>,
    pub agent_position: Vec2<T>,
    pub patient_position: Vec2<T>,
    pub v_agent: Vec2<T>,
    pub v_patient: Vec2<T>,
    pub frame_rate: T,
    pub tau_gt: T,
    pub condition: Condition,
    pub pair_id: String,
}

impl<T: Scalar> Scenario<T> {
    pub fn agent_world(&self) -> Polygon<T> {
        self.agent.translated(self.agent_position)
    }

    pub fn patient_world(&self) -> Polygon<T> {
        self.patient.translated(self.patient_position)
    }

    pub fn kinematics(&self) -> Kinematics<T> {
        Kinematics {
            v_agent: self.v_agent,
            v_patient: self.v_patient,
            frame_rate: self.frame_rate,
            tau_gt: self.tau_gt,
        }
    }

    pub fn relative_speed(&self) -> T {
        (self.v_agent - self.v_patient).norm()
    }
}

/// On-disk list of scenarios plus the seed and normalized generator config
/// that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioManifest {
    pub seed: u64,
    pub config: GeneratorConfig,
    pub taus: Vec<f64>,
    pub scenarios: Vec<Scenario<f64>>,
}

impl ScenarioManifest {
    pub fn load(path: &Path) -> Result<Self, GenError> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), GenError> {
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}
