//! Human response tables, per-video metadata and the synthetic responder.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::MetricError;
use crate::csvio;
use crate::scalar::Scalar;
use crate::stimulus::{draw_rng, Condition, Scenario};

/// What a viewer saw in one video.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoMeta {
    pub tau_gt_s: f64,
    pub condition: Condition,
    pub pair_id: String,
    pub v_agent: [f64; 2],
    pub v_patient: [f64; 2],
    pub frame_rate: f64,
}

impl VideoMeta {
    pub fn from_scenario<T: Scalar>(s: &Scenario<T>) -> Self {
        VideoMeta {
            tau_gt_s: s.tau_gt.as_f64(),
            condition: s.condition,
            pair_id: s.pair_id.clone(),
            v_agent: [s.v_agent.x.as_f64(), s.v_agent.y.as_f64()],
            v_patient: [s.v_patient.x.as_f64(), s.v_patient.y.as_f64()],
            frame_rate: s.frame_rate.as_f64(),
        }
    }
}

/// Video id to metadata, iterated in id order.
pub type VideoMetaMap = BTreeMap<String, VideoMeta>;

pub fn meta_from_scenarios<T: Scalar>(scenarios: &[Scenario<T>]) -> VideoMetaMap {
    scenarios.iter().map(|s| (s.id.clone(), VideoMeta::from_scenario(s))).collect()
}

pub fn load_video_meta(path: &Path) -> Result<VideoMetaMap, MetricError> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn save_video_meta(path: &Path, meta: &VideoMetaMap) -> Result<(), MetricError> {
    fs::write(path, serde_json::to_string_pretty(meta)?)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumanRow<T: Scalar> {
    pub video_id: String,
    pub participant_id: String,
    pub ttc_response_s: T,
}

pub const HUMAN_CSV_HEADER: [&str; 3] = ["video_id", "participant_id", "ttc_response_s"];

/// Validated human responses: every row has a positive response and refers
/// to a video in `video_meta`.
#[derive(Debug, Clone, PartialEq)]
pub struct HumanResponseTable<T: Scalar> {
    pub rows: Vec<HumanRow<T>>,
    pub participant_count: usize,
    pub video_meta: VideoMetaMap,
    /// Rows removed for a missing, unparsable or non-positive response.
    pub dropped_rows: usize,
}

impl<T: Scalar> HumanResponseTable<T> {
    /// Validates `rows` against `meta`, dropping non-positive responses.
    pub fn new(rows: Vec<HumanRow<T>>, video_meta: VideoMetaMap) -> Result<Self, MetricError> {
        let mut kept = Vec::with_capacity(rows.len());
        let mut dropped = 0;
        for row in rows {
            if !video_meta.contains_key(&row.video_id) {
                return Err(MetricError::UnknownVideo(row.video_id));
            }
            if row.ttc_response_s > T::zero() && row.ttc_response_s.is_finite() {
                kept.push(row);
            } else {
                dropped += 1;
            }
        }
        let participant_count = kept.iter().map(|r| r.participant_id.as_str()).collect::<BTreeSet<_>>().len();
        Ok(HumanResponseTable { rows: kept, participant_count, video_meta, dropped_rows: dropped })
    }
}

/// Reads a `video_id,participant_id,ttc_response_s` CSV. Extra columns are
/// ignored; `#` lines are comments.
pub fn load_human_csv<T: Scalar>(path: &Path, meta: VideoMetaMap) -> Result<HumanResponseTable<T>, MetricError> {
    let mut reader = csvio::reader_builder().from_path(path)?;
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| MetricError::SchemaError(format!("missing column {name}")))
    };
    let (vi, pi, ri) = (column("video_id")?, column("participant_id")?, column("ttc_response_s")?);
    let mut rows = Vec::new();
    let mut unreadable = 0;
    for record in reader.records() {
        let record = record?;
        let video_id = record.get(vi).unwrap_or("").to_string();
        let participant_id = record.get(pi).unwrap_or("").to_string();
        match record.get(ri).and_then(|s| s.parse::<f64>().ok()) {
            Some(v) => rows.push(HumanRow { video_id, participant_id, ttc_response_s: T::lit(v) }),
            None => {
                if !meta.contains_key(&video_id) {
                    return Err(MetricError::UnknownVideo(video_id));
                }
                unreadable += 1;
            }
        }
    }
    let mut table = HumanResponseTable::new(rows, meta)?;
    table.dropped_rows += unreadable;
    Ok(table)
}

pub fn write_human_csv<T: Scalar + Serialize>(
    path: &Path,
    comments: &[String],
    rows: &[HumanRow<T>],
) -> Result<(), MetricError> {
    csvio::write_csv(path, comments, &HUMAN_CSV_HEADER, rows)?;
    Ok(())
}

/// Synthetic responders: `tau_gt + bias(condition) + N(0, sigma)`, redrawn
/// until positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticHumanConfig {
    pub participants: usize,
    pub bias_concave_s: f64,
    pub bias_convex_s: f64,
    pub sigma_s: f64,
    pub seed: u64,
}

impl SyntheticHumanConfig {
    pub fn validate(&self) -> Result<(), MetricError> {
        if self.participants == 0 {
            return Err(MetricError::InvalidInput("need at least one participant".into()));
        }
        if self.bias_concave_s > self.bias_convex_s {
            return Err(MetricError::InvalidInput(
                "concave bias must not exceed convex bias (concave responses come earlier)".into(),
            ));
        }
        if !(self.sigma_s >= 0.0) || !self.sigma_s.is_finite() {
            return Err(MetricError::InvalidInput(format!("sigma {} must be finite and non-negative", self.sigma_s)));
        }
        Ok(())
    }
}

const MAX_REDRAWS: usize = 1000;

/// One row per (video, participant), videos in id order. Video `i` draws
/// from RNG stream `i` of `config.seed`.
pub fn synthesize_humans(config: &SyntheticHumanConfig, meta: &VideoMetaMap) -> Result<Vec<HumanRow<f64>>, MetricError> {
    config.validate()?;
    let noise = Normal::new(0.0, config.sigma_s).map_err(|e| MetricError::InvalidInput(e.to_string()))?;
    let width = config.participants.to_string().len().max(3);
    let mut rows = Vec::with_capacity(meta.len() * config.participants);
    for (i, (video_id, m)) in meta.iter().enumerate() {
        let mut rng = draw_rng(config.seed, i as u64);
        let bias = match m.condition {
            Condition::Concave => config.bias_concave_s,
            Condition::Convex => config.bias_convex_s,
        };
        let mean = m.tau_gt_s + bias;
        for p in 0..config.participants {
            let response = (0..MAX_REDRAWS)
                .map(|_| mean + noise.sample(&mut rng))
                .find(|&r| r > 0.0)
                .ok_or_else(|| {
                    MetricError::InvalidInput(format!("video {video_id}: responses centered at {mean} s are never positive"))
                })?;
            rows.push(HumanRow {
                video_id: video_id.clone(),
                participant_id: format!("p{:0width$}", p + 1),
                ttc_response_s: response,
            });
        }
    }
    Ok(rows)
}
