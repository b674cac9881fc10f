use std::collections::{BTreeMap, HashMap};

use ordered_float::OrderedFloat;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use ttc_body::alignment::aggregate::CONDITIONS;
use ttc_body::alignment::*;
use ttc_body::raster::CoarseningOp;
use ttc_body::stimulus::*;
use ttc_body::ttc::scenario_masks;
use ttc_body::Vec2;

fn meta(tau: f64, condition: Condition) -> VideoMeta {
    VideoMeta {
        tau_gt_s: tau,
        condition,
        pair_id: String::new(),
        v_agent: [3.0, 0.0],
        v_patient: [0.0, 0.0],
        frame_rate: 30.0,
    }
}

fn row(video: &str, participant: &str, v: f64) -> HumanRow<f64> {
    HumanRow { video_id: video.into(), participant_id: participant.into(), ttc_response_s: v }
}

const TAUS: [f64; 8] = [0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25];
const HUMAN_BIAS: [[f64; 8]; 2] = [
    [-0.31, -0.17, -0.22, -0.09, -0.40, -0.26, -0.13, -0.35],
    [0.02, -0.03, 0.05, 0.0, -0.01, 0.04, -0.06, 0.01],
];
const MODEL_BIAS: [[f64; 8]; 2] = [
    [-0.10, -0.20, -0.05, -0.30, -0.15, 0.0, -0.25, -0.35],
    [0.0, 0.05, -0.05, 0.10, 0.0, -0.10, 0.05, 0.0],
];
/// Worked out by hand from the biases above.
const EXPECTED_E: [f64; 8] = [0.23, 0.11, 0.27, 0.31, 0.24, 0.40, 0.23, 0.01];
const EXPECTED_MEAN: f64 = 0.225;

/// Two videos per human cell, two participants per video; one model video
/// per cell.
fn eight_tau_fixture() -> (HumanResponseTable<f64>, BTreeMap<String, f64>, VideoMetaMap) {
    let mut hmeta = VideoMetaMap::new();
    let mut rows = Vec::new();
    let mut mmeta = VideoMetaMap::new();
    let mut model = BTreeMap::new();
    for (i, &tau) in TAUS.iter().enumerate() {
        for (gi, g) in CONDITIONS.into_iter().enumerate() {
            for (k, offset) in [0.01, -0.02].into_iter().enumerate() {
                let id = format!("h{i}{g}{k}");
                hmeta.insert(id.clone(), meta(tau, g));
                for (p, spread) in [("a", 0.03), ("b", -0.03)] {
                    rows.push(row(&id, p, tau + HUMAN_BIAS[gi][i] + offset + spread));
                }
            }
            let id = format!("m{i}{g}");
            mmeta.insert(id.clone(), meta(tau, g));
            model.insert(id, tau + MODEL_BIAS[gi][i]);
        }
    }
    (HumanResponseTable::new(rows, hmeta).unwrap(), model, mmeta)
}

fn report(human: &HumanResponseTable<f64>, model: &BTreeMap<String, f64>, mmeta: &VideoMetaMap) -> AlignmentReport<f64> {
    let h = human_condition_table(human).unwrap();
    let m = condition_average(model, mmeta).unwrap();
    compare_tables(&m, &h).unwrap()
}

#[test]
fn eight_tau_fixture_matches_hand_computation() {
    let (human, model, mmeta) = eight_tau_fixture();
    assert_eq!((human.dropped_rows, human.participant_count), (0, 2));
    let r = report(&human, &model, &mmeta);
    assert_eq!(r.tau_set(), TAUS.to_vec());
    for (i, tau) in TAUS.iter().enumerate() {
        let a = r.per_tau[&OrderedFloat(*tau)];
        assert!((a.error_s - EXPECTED_E[i]).abs() < 1e-12, "τ={tau}: {}", a.error_s);
        assert!((a.delta_model_s - (MODEL_BIAS[0][i] - MODEL_BIAS[1][i])).abs() < 1e-12);
        assert_eq!((a.n_concave, a.n_convex, a.n_excluded), (1, 1, 0));
    }
    assert!((r.mean_error_s - EXPECTED_MEAN).abs() < 1e-12);
    assert!(r.unmatched_taus.is_empty());
}

#[test]
fn documented_small_cases() {
    let mut m = VideoMetaMap::new();
    m.insert("v".into(), meta(1.0, Condition::Concave));
    let t = HumanResponseTable::new(vec![row("v", "p", 1.0), row("v", "q", 2.0), row("v", "r", 3.0)], m.clone()).unwrap();
    assert_eq!(per_video_mean(&t).means["v"], 2.0);
    assert_eq!(t.participant_count, 3);

    m.insert("w".into(), meta(1.0, Condition::Concave));
    m.insert("x".into(), meta(1.0, Condition::Convex));
    let per_video = BTreeMap::from([("v".to_string(), 1.1f64), ("w".to_string(), 1.3), ("x".to_string(), 1.4)]);
    let table = condition_average(&per_video, &m).unwrap();
    assert!((table.cell(1.0, Condition::Concave).unwrap().mean_ttc_s - 1.2).abs() < 1e-12);
    assert!((concavity_effect_at(&table, 1.0).unwrap() + 0.2).abs() < 1e-12);

    let zero = BTreeMap::from([(OrderedFloat(1.0), 0.0f64)]);
    let human = BTreeMap::from([(OrderedFloat(1.0), -0.2)]);
    assert!((alignment_error(&zero, &human).unwrap().mean_error_s - 0.2).abs() < 1e-12);
    assert_eq!(alignment_error(&human, &human).unwrap().mean_error_s, 0.0);
    let other = BTreeMap::from([(OrderedFloat(2.0), -0.2)]);
    assert!(matches!(alignment_error(&zero, &other), Err(MetricError::EmptyIntersection)));
}

#[test]
fn empty_cells_are_reported() {
    let mut m = VideoMetaMap::new();
    m.insert("a".into(), meta(1.0, Condition::Concave));
    m.insert("b".into(), meta(1.0, Condition::Convex));
    m.insert("c".into(), meta(2.0, Condition::Concave));
    let per_video = BTreeMap::from([("a".to_string(), 0.9), ("b".to_string(), 1.0), ("c".to_string(), 1.8)]);
    let table = condition_average(&per_video, &m).unwrap();
    assert_eq!(table.missing, vec![(OrderedFloat(2.0), Condition::Convex)]);
    assert!(matches!(concavity_effect_at(&table, 2.0), Err(MetricError::MissingCell { condition: Condition::Convex, .. })));
    let effects = concavity_effect(&table);
    assert_eq!(effects.skipped, vec![OrderedFloat(2.0)]);
    assert_eq!(effects.delta.len(), 1);
}

#[test]
fn per_video_mean_matches_naive_summation() {
    let mut rng = draw_rng(11, 0);
    let mut m = VideoMetaMap::new();
    for v in 0..37 {
        m.insert(format!("v{v}"), meta(1.0, Condition::Convex));
    }
    let rows: Vec<HumanRow<f64>> = (0..1000)
        .map(|i| row(&format!("v{}", rng.random_range(0..37)), &format!("p{i}"), rng.random_range(0.05..4.0)))
        .collect();
    let mut sums: HashMap<&str, (f64, usize)> = HashMap::new();
    for r in &rows {
        let e = sums.entry(r.video_id.as_str()).or_insert((0.0, 0));
        e.0 += r.ttc_response_s;
        e.1 += 1;
    }
    let table = HumanResponseTable::new(rows.clone(), m).unwrap();
    let means = per_video_mean(&table);
    assert_eq!(means.means.len(), sums.len());
    for (id, (s, n)) in &sums {
        assert!((means.means[*id] - s / *n as f64).abs() < 1e-9);
    }
    assert_eq!(means.excluded.len(), 37 - sums.len());
}

#[test]
fn condition_average_matches_group_by() {
    let mut rng = draw_rng(12, 0);
    let taus = [0.5, 1.0, 1.5, 2.0];
    let mut m = VideoMetaMap::new();
    let mut per_video = BTreeMap::new();
    for v in 0..96 {
        let tau = taus[v % 4];
        let g = if (v / 4) % 2 == 0 { Condition::Concave } else { Condition::Convex };
        let id = format!("video{v:02}");
        m.insert(id.clone(), meta(tau, g));
        per_video.insert(id, tau + rng.random_range(-0.5..0.5));
    }
    let table = condition_average(&per_video, &m).unwrap();
    let mut groups: Vec<(f64, Condition, f64, usize)> = Vec::new();
    for (id, v) in &per_video {
        let key = (m[id].tau_gt_s, m[id].condition);
        match groups.iter_mut().find(|g| (g.0, g.1) == key) {
            Some(g) => {
                g.2 += v;
                g.3 += 1;
            }
            None => groups.push((key.0, key.1, *v, 1)),
        }
    }
    assert_eq!(groups.len(), table.cells.len());
    for (tau, g, sum, n) in groups {
        let cell = table.cell(tau, g).unwrap();
        assert_eq!(cell.count, n);
        assert!((cell.mean_ttc_s - sum / n as f64).abs() < 1e-9);
    }
    assert!(table.missing.is_empty());
}

/// Random human and model data over `taus`, with `videos` videos per cell.
fn random_tables(seed: u64, n_tau: usize, videos: usize, participants: usize) -> (HumanResponseTable<f64>, BTreeMap<String, f64>, VideoMetaMap) {
    let mut rng = draw_rng(seed, 0);
    let mut hmeta = VideoMetaMap::new();
    let mut rows = Vec::new();
    let mut model = BTreeMap::new();
    let mut mmeta = VideoMetaMap::new();
    for i in 0..n_tau {
        let tau = 0.5 + 0.25 * i as f64;
        for g in CONDITIONS {
            for k in 0..videos {
                let id = format!("{tau}-{g}-{k}");
                hmeta.insert(id.clone(), meta(tau, g));
                mmeta.insert(id.clone(), meta(tau, g));
                for p in 0..participants {
                    rows.push(row(&id, &format!("p{p}"), tau + rng.random_range(-0.4..0.4)));
                }
                model.insert(id, tau + rng.random_range(-0.3..0.3));
            }
        }
    }
    (HumanResponseTable::new(rows, hmeta).unwrap(), model, mmeta)
}

fn swapped(meta: &VideoMetaMap) -> VideoMetaMap {
    meta.iter()
        .map(|(k, v)| (k.clone(), VideoMeta { condition: v.condition.swapped(), ..v.clone() }))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn error_bounds(seed in any::<u64>(), n_tau in 1usize..9, videos in 1usize..4, participants in 1usize..6) {
        let (human, model, mmeta) = random_tables(seed, n_tau, videos, participants);
        let r = report(&human, &model, &mmeta);
        let errors: Vec<f64> = r.per_tau.values().map(|a| a.error_s).collect();
        prop_assert!(errors.iter().all(|&e| e >= 0.0));
        let lo = errors.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = errors.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(r.mean_error_s >= lo && r.mean_error_s <= hi);
        for a in r.per_tau.values() {
            prop_assert_eq!(a.error_s, (a.delta_model_s - a.delta_human_s).abs());
        }
    }

    #[test]
    fn relabeling_swap_negates_deltas(seed in any::<u64>(), n_tau in 1usize..9, videos in 1usize..4) {
        let (human, model, mmeta) = random_tables(seed, n_tau, videos, 3);
        let base = report(&human, &model, &mmeta);
        let human_swapped = HumanResponseTable::new(human.rows.clone(), swapped(&human.video_meta)).unwrap();
        let flipped = report(&human_swapped, &model, &swapped(&mmeta));
        for (tau, a) in &base.per_tau {
            let b = flipped.per_tau[tau];
            prop_assert_eq!(b.delta_human_s, -a.delta_human_s);
            prop_assert_eq!(b.delta_model_s, -a.delta_model_s);
            prop_assert_eq!(b.error_s, a.error_s);
        }
        prop_assert_eq!(flipped.mean_error_s, base.mean_error_s);
    }

    #[test]
    fn participant_relabeling_and_row_order_do_not_matter(seed in any::<u64>(), n_tau in 1usize..9, shuffle in any::<u64>()) {
        let (human, model, mmeta) = random_tables(seed, n_tau, 2, 5);
        let mut rng = draw_rng(shuffle, 0);
        let mut names: Vec<String> = (0..5).map(|p| format!("p{p}")).collect();
        names.shuffle(&mut rng);
        let mut rows: Vec<HumanRow<f64>> = human
            .rows
            .iter()
            .map(|r| {
                let p: usize = r.participant_id[1..].parse().unwrap();
                HumanRow { participant_id: format!("renamed-{}", names[p]), ..r.clone() }
            })
            .collect();
        rows.shuffle(&mut rng);
        let permuted = HumanResponseTable::new(rows, human.video_meta.clone()).unwrap();
        prop_assert_eq!(permuted.participant_count, human.participant_count);
        prop_assert_eq!(per_video_mean(&permuted), per_video_mean(&human));
        prop_assert_eq!(human_condition_table(&permuted).unwrap(), human_condition_table(&human).unwrap());
        prop_assert_eq!(report(&permuted, &model, &mmeta), report(&human, &model, &mmeta));
    }

    #[test]
    fn constant_response_offset_leaves_error_unchanged(seed in any::<u64>(), n_tau in 1usize..9, c in 0.0f64..2.0) {
        let (human, model, mmeta) = random_tables(seed, n_tau, 2, 3);
        let rows = human.rows.iter().map(|r| HumanRow { ttc_response_s: r.ttc_response_s + c, ..r.clone() }).collect();
        let shifted = HumanResponseTable::new(rows, human.video_meta.clone()).unwrap();
        let (a, b) = (report(&human, &model, &mmeta), report(&shifted, &model, &mmeta));
        for (tau, x) in &a.per_tau {
            prop_assert!((x.delta_human_s - b.per_tau[tau].delta_human_s).abs() < 1e-9);
            prop_assert!((x.error_s - b.per_tau[tau].error_s).abs() < 1e-9);
        }
    }
}

#[test]
fn delta_model_falls_as_closing_fills_the_notch() {
    let cfg = GeneratorConfig::default();
    let depth = cfg.notch.depth[0];
    let mut scenarios = Vec::new();
    for i in 0..6u64 {
        let tau = [0.5, 1.0, 1.5][i as usize % 3];
        let k = Kinematics { v_agent: Vec2::new(3.0, 0.0), v_patient: Vec2::zero(), frame_rate: 30.0, tau_gt: tau };
        let (a, b) = make_matched_pair(&cfg, &k, &format!("pair{i}"), &mut draw_rng(21, i)).unwrap();
        scenarios.extend([a, b]);
    }
    let masks: Vec<_> = scenarios.iter().map(|s| scenario_masks(s).ok()).collect();
    let mut previous: Option<BTreeMap<_, f64>> = None;
    let mut r = 0.0;
    while r <= depth {
        let table = model_condition_table(&scenarios, &masks, &CoarseningOp::closing(r), 10.0).unwrap();
        let delta = concavity_effect(&table).delta;
        assert_eq!(delta.len(), 3);
        if let Some(prev) = &previous {
            for (tau, d) in &delta {
                assert!(*d <= prev[tau] + 1e-12, "τ={tau}: delta rose to {d} from {} at r={r}", prev[tau]);
            }
        }
        previous = Some(delta);
        r += 4.0;
    }
    let final_delta = previous.unwrap();
    assert!(final_delta.values().all(|&d| d < 0.0));
}
