mod common;

use common::{rng, smooth_polygon};
use symknot::io::{load_curve, load_curve_with_metadata, read_trace, save_curve, trace_to_csv, write_trace, TRACE_HEADER};
use symknot::{torus_knot_curve, validate_torus_spec, Error, OptimizationTrace, TraceRow};

#[test]
fn curve_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let mut r = rng(11);
    let curves = [
        torus_knot_curve(&validate_torus_spec(2, 3, 0.4).unwrap(), 480).unwrap(),
        smooth_polygon(&mut r, 97),
    ];
    for c in curves {
        let mut meta = serde_json::Map::new();
        meta.insert("alpha".into(), 2.5.into());
        save_curve(&c, &path, Some(&meta)).unwrap();
        let (back, m) = load_curve_with_metadata(&path).unwrap();
        assert_eq!(m, meta);
        assert_eq!(back.len(), c.len());
        for (p, q) in c.points().iter().zip(back.points()) {
            for k in 0..3 {
                assert_eq!(p[k].to_bits(), q[k].to_bits());
            }
        }
    }
}

#[test]
fn malformed_curves_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"format_version":1,"n":3,"points":[[0,0,0],[1,0,0],[0,1,0]]}"#).unwrap();
    assert!(matches!(load_curve(&path), Err(Error::Format { .. })));

    let pts: Vec<String> = (0..8)
        .map(|i| if i == 6 { "[5,0,1]".to_string() } else { format!("[{i},0,{}]", i % 2) })
        .collect();
    std::fs::write(
        &path,
        format!(r#"{{"format_version":1,"n":8,"points":[{}]}}"#, pts.join(",")),
    )
    .unwrap();
    let msg = load_curve(&path).unwrap_err().to_string();
    assert!(msg.contains("points[5]"), "{msg}");

    std::fs::write(&path, r#"{"format_version":2,"n":4,"points":[]}"#).unwrap();
    assert!(load_curve(&path).is_err());
    assert!(matches!(load_curve(&dir.path().join("missing.json")), Err(Error::Io { .. })));
}

#[test]
fn empty_trace_is_header_only() {
    let t = OptimizationTrace { rows: Vec::new() };
    assert_eq!(trace_to_csv(&t), format!("{TRACE_HEADER}\n"));
}

#[test]
fn trace_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let rows = (0..5)
        .map(|i| TraceRow {
            iter: i,
            scaled: 300.0 / (i as f64 + 1.0),
            energy: 1.0 / 3.0,
            length: 6.5,
            grad_sym_rms: 1e-7 * i as f64,
            grad_full_rms: 2e-7,
            bilip: 0.123456789012345,
            step: 5e-324,
        })
        .collect();
    let t = OptimizationTrace { rows };
    write_trace(&t, &path).unwrap();
    let back = read_trace(&path).unwrap();
    assert_eq!(trace_to_csv(&back), trace_to_csv(&t));
    assert_eq!(back.rows[3].scaled.to_bits(), t.rows[3].scaled.to_bits());
}
