//! Alignment error as a function of coarsening strength.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::aggregate::{compare_tables, condition_average, per_video_mean, AlignmentReport, ConditionTable};
use super::human::{meta_from_scenarios, HumanResponseTable};
use super::MetricError;
use crate::csvio;
use crate::raster::{BinaryMask, CoarseningOp};
use crate::scalar::Scalar;
use crate::stimulus::Scenario;
use crate::ttc::{coarsen_pair, scenario_masks, scenario_ttc, TtcError};

/// Endpoint errors must exceed the minimum by at least this much (seconds).
pub const DEFAULT_U_MARGIN_S: f64 = 0.02;

/// True iff the first minimum is strictly interior and both endpoints sit at
/// least `margin` above it.
pub fn detect_u_shape<T: Scalar>(errors: &[T], margin: T) -> Result<bool, MetricError> {
    if errors.len() < 3 {
        return Err(MetricError::TooFewPoints { found: errors.len() });
    }
    let i = argmin(errors);
    let min = errors[i];
    let last = errors.len() - 1;
    Ok(i > 0 && i < last && errors[0] - min >= margin && errors[last] - min >= margin)
}

fn argmin<T: Scalar>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint<T: Scalar> {
    pub param_value: f64,
    pub mean_error_s: T,
    pub n_excluded: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<T: Scalar> {
    pub points: Vec<SweepPoint<T>>,
    pub argmin_index: usize,
    /// Always false for fewer than three points.
    pub is_u_shaped: bool,
    pub margin_s: T,
    pub reports: Vec<AlignmentReport<T>>,
}

impl<T: Scalar> SweepResult<T> {
    pub fn argmin_value(&self) -> f64 {
        self.points[self.argmin_index].param_value
    }

    pub fn errors(&self) -> Vec<T> {
        self.points.iter().map(|p| p.mean_error_s).collect()
    }
}

pub const SWEEP_CSV_HEADER: [&str; 3] = ["param_value", "mean_error_s", "n_excluded"];

#[derive(Serialize)]
struct SweepCsvRow {
    param_value: f64,
    mean_error_s: f64,
    n_excluded: usize,
}

pub fn write_sweep_csv<T: Scalar>(path: &Path, comments: &[String], result: &SweepResult<T>) -> Result<(), MetricError> {
    let rows: Vec<SweepCsvRow> = result
        .points
        .iter()
        .map(|p| SweepCsvRow { param_value: p.param_value, mean_error_s: p.mean_error_s.as_f64(), n_excluded: p.n_excluded })
        .collect();
    csvio::write_csv(path, comments, &SWEEP_CSV_HEADER, &rows)?;
    Ok(())
}

/// Human condition table from raw responses.
pub fn human_condition_table<T: Scalar>(human: &HumanResponseTable<T>) -> Result<ConditionTable<T>, MetricError> {
    condition_average(&per_video_mean(human).means, &human.video_meta)
}

/// Model condition table for one operator. `masks[i]` belongs to
/// `scenarios[i]`; `None` marks a scenario whose objects could not be
/// extracted. Such scenarios and those that never collide are excluded.
pub fn model_condition_table<T: Scalar>(
    scenarios: &[Scenario<T>],
    masks: &[Option<(BinaryMask, BinaryMask)>],
    op: &CoarseningOp,
    horizon_s: T,
) -> Result<ConditionTable<T>, MetricError> {
    let results: Vec<Option<T>> = scenarios
        .par_iter()
        .zip(masks.par_iter())
        .map(|(s, m)| {
            let Some((a, p)) = m else { return Ok(None) };
            let (a, p) = coarsen_pair((a, p), op)?;
            match scenario_ttc(s, (&a, &p), horizon_s) {
                Ok(r) => Ok(r.ttc_seconds),
                Err(TtcError::NoCollisionWithinHorizon(_)) => Ok(None),
                Err(e) => Err(MetricError::from(e)),
            }
        })
        .collect::<Result<_, MetricError>>()?;
    let per_video = scenarios
        .iter()
        .zip(results)
        .filter_map(|(s, r)| r.map(|t| (s.id.clone(), t)))
        .collect();
    condition_average(&per_video, &meta_from_scenarios(scenarios))
}

/// Sweeps `ops` (sorted by strength) over precomputed base masks.
pub fn run_sweep_with_masks<T: Scalar>(
    scenarios: &[Scenario<T>],
    masks: &[Option<(BinaryMask, BinaryMask)>],
    human: &HumanResponseTable<T>,
    ops: &[CoarseningOp],
    horizon_s: T,
    margin_s: T,
) -> Result<SweepResult<T>, MetricError> {
    if ops.is_empty() {
        return Err(MetricError::TooFewPoints { found: 0 });
    }
    if ops.windows(2).any(|w| w[0].strength > w[1].strength) {
        return Err(MetricError::InvalidInput("operators must be sorted by strength".into()));
    }
    if scenarios.len() != masks.len() {
        return Err(MetricError::InvalidInput(format!(
            "{} scenarios but {} mask pairs",
            scenarios.len(),
            masks.len()
        )));
    }
    for op in ops {
        op.validate()?;
    }
    let human_table = human_condition_table(human)?;
    let reports: Vec<AlignmentReport<T>> = ops
        .par_iter()
        .map(|op| {
            let model = model_condition_table(scenarios, masks, op, horizon_s)?;
            compare_tables(&model, &human_table)
        })
        .collect::<Result<_, _>>()?;
    let points: Vec<SweepPoint<T>> = ops
        .iter()
        .zip(&reports)
        .map(|(op, r)| SweepPoint {
            param_value: op.strength,
            mean_error_s: r.mean_error_s,
            n_excluded: r.per_tau.values().map(|a| a.n_excluded).sum(),
        })
        .collect();
    let errors: Vec<T> = points.iter().map(|p| p.mean_error_s).collect();
    let is_u_shaped = errors.len() >= 3 && detect_u_shape(&errors, margin_s)?;
    Ok(SweepResult { argmin_index: argmin(&errors), points, is_u_shaped, margin_s, reports })
}

/// Sweeps `ops` over the exact rasterized masks of `scenarios`.
pub fn run_sweep<T: Scalar>(
    scenarios: &[Scenario<T>],
    human: &HumanResponseTable<T>,
    ops: &[CoarseningOp],
    horizon_s: T,
) -> Result<SweepResult<T>, MetricError> {
    let masks = scenarios
        .par_iter()
        .map(|s| scenario_masks(s).map(Some))
        .collect::<Result<Vec<_>, TtcError>>()?;
    run_sweep_with_masks(scenarios, &masks, human, ops, horizon_s, T::lit(DEFAULT_U_MARGIN_S))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u_shape_rule() {
        assert!(detect_u_shape(&[0.3, 0.1, 0.3], 0.05).unwrap());
        assert!(!detect_u_shape(&[0.3, 0.2, 0.1], 0.05).unwrap());
        assert!(!detect_u_shape(&[0.12f32, 0.10, 0.12], 0.05).unwrap());
        assert!(matches!(detect_u_shape(&[0.1, 0.2], 0.0), Err(MetricError::TooFewPoints { found: 2 })));
        assert!(!detect_u_shape(&[0.1, 0.1, 0.3], 0.0).unwrap());
    }
}
