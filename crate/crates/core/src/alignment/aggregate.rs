//! Per-video means, condition cells, concavity effects and alignment error.
//!
//! Sums are taken over values sorted ascending, so every aggregate is
//! independent of row order and bit-stable across runs.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};

use super::human::{HumanResponseTable, VideoMetaMap};
use super::MetricError;
use crate::csvio;
use crate::scalar::Scalar;
use crate::stimulus::Condition;

/// τ values are authored, so cells group on exact equality.
pub type TauKey = OrderedFloat<f64>;

pub const CONDITIONS: [Condition; 2] = [Condition::Concave, Condition::Convex];

/// Order-independent mean of a nonempty slice.
pub fn stable_mean<T: Scalar>(values: &mut [T]) -> T {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = T::from_usize(values.len()).unwrap_or_else(T::one);
    values.iter().copied().sum::<T>() / n
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerVideoMeans<T: Scalar> {
    pub means: BTreeMap<String, T>,
    /// Videos in the metadata with no surviving responses.
    pub excluded: Vec<String>,
}

/// Mean response per video over participants.
pub fn per_video_mean<T: Scalar>(table: &HumanResponseTable<T>) -> PerVideoMeans<T> {
    let mut groups: BTreeMap<&str, Vec<T>> = BTreeMap::new();
    for row in &table.rows {
        groups.entry(row.video_id.as_str()).or_default().push(row.ttc_response_s);
    }
    let means = groups.into_iter().map(|(k, mut v)| (k.to_string(), stable_mean(&mut v))).collect::<BTreeMap<_, _>>();
    let excluded = table.video_meta.keys().filter(|k| !means.contains_key(*k)).cloned().collect();
    PerVideoMeans { means, excluded }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell<T: Scalar> {
    pub mean_ttc_s: T,
    pub count: usize,
}

/// Mean TTC per `(τ, condition)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionTable<T: Scalar> {
    pub cells: BTreeMap<(TauKey, Condition), Cell<T>>,
    /// Cells of a τ present in the metadata that received no videos.
    pub missing: Vec<(TauKey, Condition)>,
    /// Videos dropped before averaging, per τ.
    pub excluded: BTreeMap<TauKey, usize>,
}

impl<T: Scalar> ConditionTable<T> {
    pub fn cell(&self, tau: f64, condition: Condition) -> Option<&Cell<T>> {
        self.cells.get(&(OrderedFloat(tau), condition))
    }

    pub fn taus(&self) -> BTreeSet<TauKey> {
        self.cells.keys().map(|(t, _)| *t).chain(self.missing.iter().map(|(t, _)| *t)).collect()
    }
}

/// Averages per-video TTCs into `(τ, condition)` cells. Videos listed in
/// `meta` but absent from `per_video` count as excluded for their τ; a cell
/// left empty is recorded in `missing`.
pub fn condition_average<T: Scalar>(
    per_video: &BTreeMap<String, T>,
    meta: &VideoMetaMap,
) -> Result<ConditionTable<T>, MetricError> {
    let mut groups: BTreeMap<(TauKey, Condition), Vec<T>> = BTreeMap::new();
    for (id, &v) in per_video {
        let m = meta.get(id).ok_or_else(|| MetricError::UnknownVideo(id.clone()))?;
        groups.entry((OrderedFloat(m.tau_gt_s), m.condition)).or_default().push(v);
    }
    let mut excluded = BTreeMap::new();
    let mut taus = BTreeSet::new();
    for (id, m) in meta {
        taus.insert(OrderedFloat(m.tau_gt_s));
        if !per_video.contains_key(id) {
            *excluded.entry(OrderedFloat(m.tau_gt_s)).or_insert(0) += 1;
        }
    }
    let mut missing = Vec::new();
    for &tau in &taus {
        for g in CONDITIONS {
            if !groups.contains_key(&(tau, g)) {
                missing.push((tau, g));
            }
        }
    }
    let cells = groups
        .into_iter()
        .map(|(k, mut v)| (k, Cell { count: v.len(), mean_ttc_s: stable_mean(&mut v) }))
        .collect();
    Ok(ConditionTable { cells, missing, excluded })
}

/// `cell(τ, concave) − cell(τ, convex)` for one τ.
pub fn concavity_effect_at<T: Scalar>(table: &ConditionTable<T>, tau: f64) -> Result<T, MetricError> {
    let get = |g| table.cell(tau, g).map(|c| c.mean_ttc_s).ok_or(MetricError::MissingCell { tau_s: tau, condition: g });
    Ok(get(Condition::Concave)? - get(Condition::Convex)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Effects<T: Scalar> {
    pub delta: BTreeMap<TauKey, T>,
    /// τ values lacking one of the two cells.
    pub skipped: Vec<TauKey>,
}

/// Concavity effect for every τ that has both cells.
pub fn concavity_effect<T: Scalar>(table: &ConditionTable<T>) -> Effects<T> {
    let mut delta = BTreeMap::new();
    let mut skipped = Vec::new();
    for tau in table.taus() {
        match concavity_effect_at(table, tau.0) {
            Ok(d) => {
                delta.insert(tau, d);
            }
            Err(_) => skipped.push(tau),
        }
    }
    Effects { delta, skipped }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauAlignment<T: Scalar> {
    pub delta_human_s: T,
    pub delta_model_s: T,
    pub error_s: T,
    pub n_concave: usize,
    pub n_convex: usize,
    pub n_excluded: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentReport<T: Scalar> {
    pub per_tau: BTreeMap<TauKey, TauAlignment<T>>,
    pub mean_error_s: T,
    /// τ values present in only one of the two inputs.
    pub unmatched_taus: Vec<TauKey>,
}

impl<T: Scalar> AlignmentReport<T> {
    pub fn tau_set(&self) -> Vec<f64> {
        self.per_tau.keys().map(|t| t.0).collect()
    }
}

/// `E(τ) = |Δ_model(τ) − Δ_human(τ)|` over the shared τ set and its mean.
pub fn alignment_error<T: Scalar>(
    delta_model: &BTreeMap<TauKey, T>,
    delta_human: &BTreeMap<TauKey, T>,
) -> Result<AlignmentReport<T>, MetricError> {
    let mut per_tau = BTreeMap::new();
    for (tau, &dm) in delta_model {
        if let Some(&dh) = delta_human.get(tau) {
            per_tau.insert(
                *tau,
                TauAlignment {
                    delta_human_s: dh,
                    delta_model_s: dm,
                    error_s: (dm - dh).abs(),
                    n_concave: 0,
                    n_convex: 0,
                    n_excluded: 0,
                },
            );
        }
    }
    if per_tau.is_empty() {
        return Err(MetricError::EmptyIntersection);
    }
    let unmatched_taus = delta_model
        .keys()
        .chain(delta_human.keys())
        .filter(|t| !per_tau.contains_key(*t))
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let n = T::from_usize(per_tau.len()).unwrap_or_else(T::one);
    let mean_error_s = per_tau.values().map(|a: &TauAlignment<T>| a.error_s).sum::<T>() / n;
    Ok(AlignmentReport { per_tau, mean_error_s, unmatched_taus })
}

/// Full comparison of a model table against a human table. Cell counts and
/// exclusions in the report describe the model side.
pub fn compare_tables<T: Scalar>(
    model: &ConditionTable<T>,
    human: &ConditionTable<T>,
) -> Result<AlignmentReport<T>, MetricError> {
    let dm = concavity_effect(model);
    let dh = concavity_effect(human);
    let mut report = alignment_error(&dm.delta, &dh.delta)?;
    for (tau, row) in report.per_tau.iter_mut() {
        let count = |g| model.cell(tau.0, g).map_or(0, |c| c.count);
        row.n_concave = count(Condition::Concave);
        row.n_convex = count(Condition::Convex);
        row.n_excluded = model.excluded.get(tau).copied().unwrap_or(0);
    }
    Ok(report)
}

pub const REPORT_CSV_HEADER: [&str; 7] =
    ["tau_s", "delta_human_s", "delta_model_s", "error_s", "n_concave", "n_convex", "n_excluded"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    /// A τ value, or `mean` on the summary row.
    pub tau_s: String,
    pub delta_human_s: Option<f64>,
    pub delta_model_s: Option<f64>,
    pub error_s: f64,
    pub n_concave: Option<usize>,
    pub n_convex: Option<usize>,
    pub n_excluded: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub per_tau: Vec<ReportRow>,
    pub mean_error_s: f64,
    pub tau_set: Vec<f64>,
    pub unmatched_taus: Vec<f64>,
}

impl<T: Scalar> AlignmentReport<T> {
    pub fn rows(&self) -> Vec<ReportRow> {
        let mut rows: Vec<ReportRow> = self
            .per_tau
            .iter()
            .map(|(tau, a)| ReportRow {
                tau_s: tau.0.to_string(),
                delta_human_s: Some(a.delta_human_s.as_f64()),
                delta_model_s: Some(a.delta_model_s.as_f64()),
                error_s: a.error_s.as_f64(),
                n_concave: Some(a.n_concave),
                n_convex: Some(a.n_convex),
                n_excluded: Some(a.n_excluded),
            })
            .collect();
        rows.push(ReportRow {
            tau_s: "mean".into(),
            delta_human_s: None,
            delta_model_s: None,
            error_s: self.mean_error_s.as_f64(),
            n_concave: None,
            n_convex: None,
            n_excluded: Some(self.per_tau.values().map(|a| a.n_excluded).sum()),
        });
        rows
    }

    pub fn to_json(&self) -> ReportJson {
        let mut per_tau = self.rows();
        per_tau.pop();
        ReportJson {
            per_tau,
            mean_error_s: self.mean_error_s.as_f64(),
            tau_set: self.tau_set(),
            unmatched_taus: self.unmatched_taus.iter().map(|t| t.0).collect(),
        }
    }

    /// Writes the per-τ CSV (plus a `mean` summary row) and its JSON mirror.
    pub fn save(&self, csv_path: &Path, json_path: &Path, comments: &[String]) -> Result<(), MetricError> {
        csvio::write_csv(csv_path, comments, &REPORT_CSV_HEADER, &self.rows())?;
        fs::write(json_path, serde_json::to_string_pretty(&self.to_json())?)?;
        Ok(())
    }
}
