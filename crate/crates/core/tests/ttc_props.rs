use proptest::prelude::*;
use rand::Rng;
use ttc_body::raster::*;
use ttc_body::stimulus::*;
use ttc_body::ttc::*;
use ttc_body::{Polygon, Vec2};

fn blob() -> impl Strategy<Value = BinaryMask> {
    (2usize..10, 2usize..10, 0.3f64..0.9).prop_flat_map(|(h, w, p)| {
        prop::collection::vec(prop::bool::weighted(p), h * w).prop_map(move |bits| {
            let mut m = BinaryMask::from_fn(Offset::ZERO, h, w, |r, c| bits[r * w + c]).unwrap();
            m.set(h / 2, w / 2, true);
            m
        })
    })
}

fn velocity() -> impl Strategy<Value = Vec2<f64>> {
    (-4.0f64..4.0, -4.0f64..4.0).prop_map(|(x, y)| Vec2::new(x, y))
}

fn query(m1: BinaryMask, m2: BinaryMask, v1: Vec2<f64>, v2: Vec2<f64>) -> TtcQuery<f64> {
    TtcQuery { m1, m2, v1, v2, frame_rate: 30.0, horizon_frames: 400 }
}

fn frame(r: Result<TtcResult<f64>, TtcError>) -> Option<u64> {
    r.ok().and_then(|r| r.first_overlap_frame)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn supersets_never_collide_later(
        a in blob(), b in blob(), off in (-30i64..30, 20i64..60), v in velocity(), r in 0.0f64..4.0,
    ) {
        let b = b.translate(Offset::new(off.0, off.1));
        let q = query(a.clone(), b.clone(), Vec2::zero(), v);
        let base = frame(simulate_ttc(&q));
        let grown_a = frame(simulate_ttc(&query(dilate(&a, r), b.clone(), Vec2::zero(), v)));
        let grown_b = frame(simulate_ttc(&query(a, dilate(&b, r), Vec2::zero(), v)));
        if let Some(n) = base {
            prop_assert!(grown_a.is_some_and(|g| g <= n));
            prop_assert!(grown_b.is_some_and(|g| g <= n));
        }
    }

    #[test]
    fn common_shift_leaves_result_unchanged(
        a in blob(), b in blob(), v1 in velocity(), v2 in velocity(), d in (-80i64..80, -80i64..80),
    ) {
        let b = b.translate(Offset::new(5, 25));
        let d = Offset::new(d.0, d.1);
        let q = query(a.clone(), b.clone(), v1, v2);
        let moved = query(a.translate(d), b.translate(d), v1, v2);
        let (x, y) = (simulate_ttc(&q), simulate_ttc(&moved));
        prop_assert_eq!(x.ok(), y.ok());
    }

    #[test]
    fn frame_skipping_is_exact(a in blob(), b in blob(), off in (-40i64..40, -40i64..40), v1 in velocity(), v2 in velocity()) {
        let b = b.translate(Offset::new(off.0, off.1));
        let q = query(a, b, v1, v2);
        prop_assert_eq!(frame(simulate_ttc(&q)), frame(simulate_ttc_naive(&q)));
    }

    #[test]
    fn closing_ops_are_extensive_and_grow_with_radius(m in blob(), r1 in 0.0f64..6.0, extra in 0.0f64..6.0) {
        for kind in [CoarseningKind::Closing, CoarseningKind::AlphaSmooth] {
            let small = coarsen(&m, &CoarseningOp::new(kind, r1).unwrap()).unwrap();
            let large = coarsen(&m, &CoarseningOp::new(kind, r1 + extra).unwrap()).unwrap();
            prop_assert!(m.is_subset_of(&small));
            prop_assert!(small.is_subset_of(&large), "{:?} {} -> {}", kind, r1, r1 + extra);
            prop_assert!(closing(&m, r1 + extra).is_subset_of(&monotone_closing(&m, r1 + extra)));
        }
    }
}

fn square(col0: i64) -> BinaryMask {
    BinaryMask::from_fn(Offset::new(0, col0), 10, 10, |_, _| true).unwrap()
}

#[test]
fn closed_form_edge_gap() {
    let q = query(square(0), square(40), Vec2::zero(), Vec2::new(-3.0, 0.0));
    let r = simulate_ttc(&q).unwrap();
    assert_eq!(r.first_overlap_frame, Some(11));
    assert!((r.ttc_seconds.unwrap() - 11.0 / 30.0).abs() < 1e-12);
    let q = query(square(0), dilate(&square(40), 2.0), Vec2::zero(), Vec2::new(-3.0, 0.0));
    assert_eq!(simulate_ttc(&q).unwrap().first_overlap_frame, Some(10));
}

#[test]
fn frame_rate_refinement() {
    let mut rng = draw_rng(8, 0);
    for _ in 0..60 {
        let gap = rng.random_range(5..60);
        let speed = rng.random_range(0.5..4.0);
        let mut q = query(square(0), square(9 + gap), Vec2::zero(), Vec2::new(-speed, 0.0));
        let coarse = simulate_ttc(&q).unwrap().ttc_seconds.unwrap();
        q.frame_rate = 60.0;
        q.v2 = Vec2::new(-speed / 2.0, 0.0);
        q.horizon_frames *= 2;
        let fine = simulate_ttc(&q).unwrap().ttc_seconds.unwrap();
        assert!((coarse - fine).abs() <= 1.0 / 30.0 + 1e-12, "gap {gap} speed {speed}: {coarse} vs {fine}");
    }
}

fn pair(seed: u64, draw: u64, tau: f64) -> (Scenario<f64>, Scenario<f64>) {
    let k = Kinematics { v_agent: Vec2::new(3.0, 0.0), v_patient: Vec2::zero(), frame_rate: 30.0, tau_gt: tau };
    make_matched_pair(&GeneratorConfig::default(), &k, "p", &mut draw_rng(seed, draw)).unwrap()
}

#[test]
fn exact_masks_land_within_a_frame_of_tau() {
    for draw in 0..10 {
        let tau = 0.5 + 0.25 * draw as f64;
        for s in <[Scenario<f64>; 2]>::from(pair(5, draw, tau)) {
            let (a, p) = scenario_masks(&s).unwrap();
            let r = scenario_ttc(&s, (&a, &p), DEFAULT_HORIZON_S).unwrap();
            assert!((r.ttc_seconds.unwrap() - tau).abs() <= 1.0 / 30.0 + 1e-12, "{}", s.id);
        }
    }
}

#[test]
fn filled_notch_collides_before_open_notch() {
    for draw in 0..6 {
        let (concave, convex) = pair(6, draw, 1.0);
        let ttc = |s: &Scenario<f64>| {
            let (a, p) = scenario_masks(s).unwrap();
            let (a, p) = coarsen_pair((&a, &p), &CoarseningOp::closing(16.0)).unwrap();
            scenario_ttc(s, (&a, &p), 10.0).unwrap().ttc_seconds.unwrap()
        };
        assert!(ttc(&concave) < ttc(&convex));
    }
}

#[test]
fn zero_horizon_only_checks_frame_zero() {
    let (s, _) = pair(1, 0, 1.0);
    let (a, p) = scenario_masks(&s).unwrap();
    assert!(matches!(scenario_ttc(&s, (&a, &p), 0.0), Err(TtcError::NoCollisionWithinHorizon(0))));
}

/// Rasterizes the polygons at their continuous positions every frame.
fn rerasterized_frame(s: &Scenario<f64>, horizon: u64) -> Option<u64> {
    (0..=horizon).find(|&n| {
        let t = n as f64;
        let a = ttc_body::raster::rasterize_world(&s.agent.translated(s.agent_position + s.v_agent.scale(t)));
        let b = ttc_body::raster::rasterize_world(&s.patient.translated(s.patient_position + s.v_patient.scale(t)));
        matches!((a, b), (Some(a), Some(b)) if a.overlaps(&b))
    })
}

#[test]
fn matches_rerasterization_oracle_on_convex_scenarios() {
    let cfg = GeneratorConfig { concavity_range: [0, 0], radius_range: [0.02, 0.05], ..Default::default() };
    let mut checked = 0;
    let mut draw = 0;
    while checked < 50 {
        let mut rng = draw_rng(31, draw);
        draw += 1;
        let a: Polygon<f64> = generate_polygon(&cfg, &mut rng).unwrap();
        let b: Polygon<f64> = generate_polygon(&cfg, &mut rng).unwrap();
        let gap = a.bbox().width() + b.bbox().width() + rng.random_range(5.0..40.0);
        let speed = rng.random_range(0.7..4.0);
        let s = Scenario {
            id: format!("r{draw}"),
            agent: a,
            patient: b,
            agent_position: Vec2::new(100.0, 100.0),
            patient_position: Vec2::new(100.0 + gap, 100.0 + rng.random_range(-8.0..8.0)),
            v_agent: Vec2::new(speed, rng.random_range(-0.3..0.3)),
            v_patient: Vec2::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)),
            frame_rate: 30.0,
            tau_gt: 0.0,
            condition: Condition::Convex,
            pair_id: String::new(),
        };
        if ground_truth_ttc(&s).is_err() {
            continue;
        }
        let (m1, m2) = scenario_masks(&s).unwrap();
        let model = scenario_ttc(&s, (&m1, &m2), 10.0).ok().and_then(|r| r.first_overlap_frame);
        let oracle = rerasterized_frame(&s, 300);
        match (model, oracle) {
            (Some(m), Some(o)) => assert!(m.abs_diff(o) <= 1, "{}: model {m}, oracle {o}", s.id),
            (None, None) => {}
            other => panic!("{}: {other:?}", s.id),
        }
        checked += 1;
    }
}
