use std::fs;

use ttc_body::alignment::*;
use ttc_body::raster::*;
use ttc_body::stimulus::*;
use ttc_body::ttc::{read_ttc_csv, write_ttc_csv, TtcRecord, TTC_CSV_HEADER};

/// A `.npy` v1.0 file built from the published layout: magic, version,
/// little-endian header length, a Python dict literal padded with spaces to a
/// 64-byte boundary and terminated by a newline, then raw data.
fn npy_bytes(descr: &str, fortran: bool, shape: &[usize], data: &[u8]) -> Vec<u8> {
    let dims: Vec<String> = shape.iter().map(|d| d.to_string()).collect();
    let shape = if dims.len() == 1 { format!("({},)", dims[0]) } else { format!("({})", dims.join(", ")) };
    let order = if fortran { "True" } else { "False" };
    let mut header = format!("{{'descr': '{descr}', 'fortran_order': {order}, 'shape': {shape}, }}");
    while (10 + header.len() + 1) % 64 != 0 {
        header.push(' ');
    }
    header.push('\n');
    let mut out = b"\x93NUMPY\x01\x00".to_vec();
    out.extend_from_slice(&(header.len() as u16).to_le_bytes());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(data);
    out
}

fn sample_values(h: usize, w: usize) -> Vec<f32> {
    (0..h * w)
        .flat_map(|i| {
            let p = ((i * 37) % 101) as f32 / 100.0;
            [1.0 - p, p]
        })
        .collect()
}

#[test]
fn pmap_layout_is_parsed_from_raw_bytes() {
    let (h, w) = (3usize, 5usize);
    let vals = sample_values(h, w);
    let mut bytes = b"PMAP".to_vec();
    for n in [h as u32, w as u32, 2] {
        bytes.extend_from_slice(&n.to_le_bytes());
    }
    for v in &vals {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let map = ProbabilityMap::<f32>::parse_pmap(&bytes).unwrap();
    assert_eq!(map.extent(), (h, w));
    assert_eq!(map.values(), &vals[..]);
    assert_eq!(map.at(1, 2), (vals[14], vals[15]));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.pmap");
    map.save_pmap(&path).unwrap();
    assert_eq!(fs::read(&path).unwrap(), bytes);
    assert_eq!(ProbabilityMap::<f32>::load(&path).unwrap(), map);
}

#[test]
fn pmap_rejects_bad_headers_and_values() {
    let mut three = b"PMAP".to_vec();
    for n in [1u32, 1, 3] {
        three.extend_from_slice(&n.to_le_bytes());
    }
    three.extend_from_slice(&[0u8; 12]);
    assert!(matches!(ProbabilityMap::<f64>::parse_pmap(&three), Err(MaskError::Format(_))));

    let mut short = b"PMAP".to_vec();
    for n in [2u32, 2, 2] {
        short.extend_from_slice(&n.to_le_bytes());
    }
    short.extend_from_slice(&[0u8; 8]);
    assert!(ProbabilityMap::<f64>::parse_pmap(&short).is_err());

    let mut unnormalized = b"PMAP".to_vec();
    for n in [1u32, 1, 2] {
        unnormalized.extend_from_slice(&n.to_le_bytes());
    }
    for v in [0.7f32, 0.7] {
        unnormalized.extend_from_slice(&v.to_le_bytes());
    }
    assert!(ProbabilityMap::<f64>::parse_pmap(&unnormalized).is_err());
    assert!(ProbabilityMap::<f64>::parse_pmap(b"JUNK").is_err());
}

#[test]
fn npy_files_in_both_float_widths() {
    let (h, w) = (4usize, 3usize);
    let vals = sample_values(h, w);
    let f32_data: Vec<u8> = vals.iter().flat_map(|v| v.to_le_bytes()).collect();
    let map = ProbabilityMap::<f32>::parse_npy(&npy_bytes("<f4", false, &[h, w, 2], &f32_data)).unwrap();
    assert_eq!(map.values(), &vals[..]);

    let wide: Vec<f64> = vals.iter().map(|&v| v as f64).collect();
    let f64_data: Vec<u8> = wide.iter().flat_map(|v| v.to_le_bytes()).collect();
    let map64 = ProbabilityMap::<f64>::parse_npy(&npy_bytes("<f8", false, &[h, w, 2], &f64_data)).unwrap();
    assert_eq!(map64.values(), &wide[..]);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.npy");
    map.save_npy(&path).unwrap();
    assert_eq!(ProbabilityMap::<f32>::load(&path).unwrap(), map);
    assert!(mask_from_probability(&map).same_pixels(&mask_from_probability(&map64)));
}

#[test]
fn npy_shape_and_order_are_checked() {
    let data: Vec<u8> = [0.5f32; 12].iter().flat_map(|v| v.to_le_bytes()).collect();
    assert!(ProbabilityMap::<f32>::parse_npy(&npy_bytes("<f4", false, &[4, 3], &data)).is_err());
    assert!(ProbabilityMap::<f32>::parse_npy(&npy_bytes("<f4", false, &[2, 2, 3], &data)).is_err());
    assert!(ProbabilityMap::<f32>::parse_npy(&npy_bytes("<f4", true, &[3, 2, 2], &data)).is_err());
}

#[test]
fn mask_png_keeps_its_origin() {
    let m = BinaryMask::from_ascii(Offset::new(-7, 12), &["#..#", ".##.", "#..."]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let png = dir.path().join("obj.png");
    m.save(&png).unwrap();
    let back = BinaryMask::load(&png).unwrap();
    assert_eq!(back.origin(), m.origin());
    assert!(back.same_pixels(&m));
    let gray = image::open(&png).unwrap().into_luma8();
    assert!(gray.pixels().all(|p| p.0[0] == 0 || p.0[0] == 255));

    fs::remove_file(ttc_body::raster::mask::sidecar_path(&png)).unwrap();
    assert_eq!(BinaryMask::load(&png).unwrap().origin(), Offset::ZERO);
}

fn meta_map() -> VideoMetaMap {
    let entry = |tau: f64, condition| VideoMeta {
        tau_gt_s: tau,
        condition,
        pair_id: "pair0000".into(),
        v_agent: [3.0, 0.0],
        v_patient: [0.0, 0.0],
        frame_rate: 30.0,
    };
    VideoMetaMap::from([
        ("pair0000_concave".to_string(), entry(1.0, Condition::Concave)),
        ("pair0000_convex".to_string(), entry(1.0, Condition::Convex)),
    ])
}

#[test]
fn video_meta_json_shape() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("meta.json");
    save_video_meta(&path, &meta_map()).unwrap();
    let raw: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let entry = &raw["pair0000_concave"];
    for key in ["tau_gt_s", "condition", "pair_id", "v_agent", "v_patient", "frame_rate"] {
        assert!(entry.get(key).is_some(), "{key}");
    }
    assert_eq!(entry["condition"], "concave");
    assert_eq!(load_video_meta(&path).unwrap(), meta_map());
}

#[test]
fn human_csv_schema() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.csv");
    let rows = vec![
        HumanRow { video_id: "pair0000_concave".into(), participant_id: "p1".into(), ttc_response_s: 0.8 },
        HumanRow { video_id: "pair0000_convex".into(), participant_id: "p1".into(), ttc_response_s: 1.05 },
    ];
    write_human_csv(&path, &["seed=1".into()], &rows).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# seed=1\nvideo_id,participant_id,ttc_response_s\n"));
    let t = load_human_csv::<f64>(&path, meta_map()).unwrap();
    assert_eq!(t.rows, rows);
    assert_eq!(t.participant_count, 1);

    fs::write(&path, "participant_id,video_id,extra,ttc_response_s\np1,pair0000_concave,x,0.9\np2,pair0000_concave,y,\np3,pair0000_concave,z,-1\np4,pair0000_convex,w,abc\n").unwrap();
    let t = load_human_csv::<f64>(&path, meta_map()).unwrap();
    assert_eq!(t.rows.len(), 1);
    assert_eq!(t.dropped_rows, 3);

    fs::write(&path, "video_id,participant_id\npair0000_concave,p1\n").unwrap();
    assert!(matches!(load_human_csv::<f64>(&path, meta_map()), Err(MetricError::SchemaError(_))));

    fs::write(&path, "video_id,participant_id,ttc_response_s\nnope,p1,1.0\n").unwrap();
    assert!(matches!(load_human_csv::<f64>(&path, meta_map()), Err(MetricError::UnknownVideo(v)) if v == "nope"));
}

#[test]
fn ttc_csv_round_trip() {
    let records = vec![
        TtcRecord {
            scenario_id: "pair0000_concave".into(),
            pair_id: "pair0000".into(),
            condition: Condition::Concave,
            tau_gt_s: 1.0,
            ttc_model_s: Some(29.0 / 30.0),
            first_overlap_frame: Some(29),
            collided: true,
        },
        TtcRecord {
            scenario_id: "pair0000_convex".into(),
            pair_id: "pair0000".into(),
            condition: Condition::Convex,
            tau_gt_s: 1.0,
            ttc_model_s: None,
            first_overlap_frame: None,
            collided: false,
        },
    ];
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    write_ttc_csv(&path, &["ttc-body run-ttc".into()], &records).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.contains(&TTC_CSV_HEADER.join(",")));
    assert!(text.contains("pair0000_convex,pair0000,convex,1.0,,,false"));
    assert_eq!(read_ttc_csv(&path).unwrap(), records);
}

#[test]
fn manifests_carry_the_documented_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = GeneratorConfig { seed: 2, canvas: [48, 48], radius_range: [0.15, 0.3], ..Default::default() };
    render_dataset(&cfg, 2, 1, dir.path()).unwrap();
    let raw: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join(DATASET_MANIFEST_FILE)).unwrap()).unwrap();
    let entry = &raw["entries"][0];
    for key in ["image_path", "mask_path", "split", "seed", "draw_index", "vertex_count", "concavity_count"] {
        assert!(entry.get(key).is_some(), "{key}");
    }
    assert_eq!(raw["entries"][2]["split"], "val");
    assert_eq!(raw["seed"], 2);

    let partial = r#"{"seed": 5, "vertex_range": [6, 6]}"#;
    let cfg: GeneratorConfig = serde_json::from_str(partial).unwrap();
    assert_eq!(cfg.vertex_range, [6, 6]);
    assert_eq!(cfg.palette.len(), 24);
    assert_eq!(cfg.canvas, GeneratorConfig::default().canvas);
}

#[test]
fn report_files_end_with_a_mean_row() {
    let dm = std::collections::BTreeMap::from([(ordered_float::OrderedFloat(1.0), -0.1f64)]);
    let dh = std::collections::BTreeMap::from([(ordered_float::OrderedFloat(1.0), -0.3f64)]);
    let r = alignment_error(&dm, &dh).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (csv_path, json_path) = (dir.path().join("r.csv"), dir.path().join("r.json"));
    r.save(&csv_path, &json_path, &[]).unwrap();
    let text = fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], ttc_body::alignment::aggregate::REPORT_CSV_HEADER.join(","));
    assert!(lines[1].starts_with("1,-0.3,-0.1,"));
    assert!(lines[2].starts_with("mean,,,"));
    let json: ReportJson = serde_json::from_str(&fs::read_to_string(&json_path).unwrap()).unwrap();
    assert!((json.mean_error_s - 0.2).abs() < 1e-12);
    assert_eq!(json.tau_set, vec![1.0]);
}
