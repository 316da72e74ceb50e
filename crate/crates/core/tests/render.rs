use std::path::PathBuf;
use std::time::{Duration, Instant};

use hfigures::pipeline::{layout_document, render_document};
use hfigures::samples::{BLOOD_PRESSURE, MODELED_PATIENT};
use hfigures::svg_render::{age_lightening, lighten};
use hfigures::{lint_standalone, parse_dataset, RenderOptions, ShowLabels, SnapshotSelection};

const SNAPSHOTS: [i64; 2] = [1_420_798_224, 1_423_742_720];

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/modeled_patient.svg")
}

fn options(labels: ShowLabels) -> RenderOptions {
    RenderOptions {
        snapshots: SnapshotSelection::Explicit(SNAPSHOTS.to_vec()),
        labels: Some(labels),
        ..Default::default()
    }
}

/// Set `UPDATE_GOLDEN=1` to rewrite the checked-in file after an intended change.
#[test]
fn modeled_patient_matches_golden() {
    let started = Instant::now();
    let doc = render_document(MODELED_PATIENT, &options(ShowLabels::All)).unwrap();
    let elapsed = started.elapsed();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(golden_path(), &doc.text).unwrap();
    }
    let golden = std::fs::read_to_string(golden_path()).expect("golden file present");
    assert!(
        doc.text == golden,
        "render differs from {}",
        golden_path().display()
    );
    assert!(elapsed < Duration::from_millis(100), "took {elapsed:?}");
}

#[test]
fn rendering_is_deterministic() {
    let a = render_document(MODELED_PATIENT, &options(ShowLabels::All)).unwrap();
    let b = render_document(MODELED_PATIENT, &options(ShowLabels::All)).unwrap();
    assert_eq!(a.text, b.text);
}

#[test]
fn svg_structure() {
    let doc = render_document(MODELED_PATIENT, &options(ShowLabels::All)).unwrap();
    let xml = roxmltree::Document::parse(&doc.text).expect("well-formed XML");
    let ids: Vec<&str> = xml
        .descendants()
        .filter_map(|n| n.attribute("id"))
        .collect();
    let sectors = ids
        .iter()
        .filter(|id| id.starts_with("sector-") && !id.starts_with("sector-label"))
        .count();
    assert_eq!(sectors, 9);
    assert_eq!(
        ids.iter()
            .filter(|id| id.starts_with("sector-label-"))
            .count(),
        9
    );
    assert_eq!(ids.iter().filter(|id| id.starts_with("label-")).count(), 34);
    assert_eq!(ids.iter().filter(|id| id.starts_with("point-")).count(), 68);
    assert_eq!(
        ids.iter().filter(|id| id.starts_with("polygon-")).count(),
        2
    );
    assert_eq!(doc.count("polygon"), 2);
    assert!(
        lint_standalone(&doc.text).is_empty(),
        "{:?}",
        lint_standalone(&doc.text)
    );

    let size = doc.width;
    for node in xml.descendants().filter(|n| n.is_element()) {
        for attr in ["x", "y", "cx", "cy"] {
            if let Some(v) = node.attribute(attr) {
                let v: f64 = v.parse().unwrap();
                assert!(
                    (0.0..=size).contains(&v),
                    "{attr}={v} outside the viewBox on {:?}",
                    node.attribute("id")
                );
            }
        }
    }
}

#[test]
fn hidden_labels_keep_group_labels() {
    let doc = render_document(MODELED_PATIENT, &options(ShowLabels::None)).unwrap();
    let xml = roxmltree::Document::parse(&doc.text).unwrap();
    let ids: Vec<&str> = xml
        .descendants()
        .filter_map(|n| n.attribute("id"))
        .collect();
    assert_eq!(ids.iter().filter(|id| id.starts_with("label-")).count(), 0);
    assert_eq!(
        ids.iter()
            .filter(|id| id.starts_with("sector-label-"))
            .count(),
        9
    );
    assert!(lint_standalone(&doc.text).is_empty());
}

#[test]
fn no_negative_zero_in_output() {
    let doc = render_document(MODELED_PATIENT, &options(ShowLabels::All)).unwrap();
    assert!(!doc.text.contains("-0.000"));
}

#[test]
fn blood_pressure_reference_instance() {
    let ds = parse_dataset(BLOOD_PRESSURE).unwrap();
    assert_eq!(ds.groups().len(), 1);
    assert_eq!(ds.groups()[0].label, "Blood Pressure");
    assert_eq!(ds.measurement_count(), 2);
    assert!(ds.measurements().all(|m| m.samples.len() == 2));

    let scene = layout_document(BLOOD_PRESSURE, &options(ShowLabels::All)).unwrap();
    assert_eq!(scene.points.iter().filter(|p| p.present).count(), 4);
    // two vertices per snapshot: drawn as polylines, not closed polygons
    assert!(scene
        .polygons
        .iter()
        .all(|p| p.vertices.len() == 2 && !p.closed));
    assert_eq!(scene.slots.total_slots, 3);
    let label = &scene.sector_labels[0];
    let (cx, cy) = scene.center;
    let r = (label.x - cx).hypot(label.y - cy);
    assert!(
        r >= scene.band.inner && r <= scene.band.outer,
        "group label at radius {r}"
    );
}

#[test]
fn one_sample_repeats_across_later_snapshots() {
    let text = r#"{"groups":[{"label":"G","measurements":[
        {"id":"a","label":"A","units":"u","min":0,"max":10,"samples":[{"timestamp":100,"value":5}]}]}]}"#;
    let opts = RenderOptions {
        snapshots: SnapshotSelection::Explicit(vec![200, 300, 400]),
        ..Default::default()
    };
    let scene = layout_document(text, &opts).unwrap();
    assert_eq!(scene.points.len(), 3);
    assert!(scene
        .points
        .iter()
        .all(|p| p.present && p.value == Some(5.0) && p.timestamp == Some(100)));
    let first = &scene.points[0];
    assert!(scene
        .points
        .iter()
        .all(|p| p.radius == first.radius && p.x == first.x));
}

#[test]
fn older_snapshots_are_lighter() {
    let step = 0.35;
    assert_eq!(age_lightening(step, 0), 0.0);
    let base = "#455a64";
    let young = lighten(base, age_lightening(step, 1));
    let old = lighten(base, age_lightening(step, 2));
    let brightness = |hex: &str| {
        (1..7)
            .step_by(2)
            .map(|i| u32::from_str_radix(&hex[i..i + 2], 16).unwrap())
            .sum::<u32>()
    };
    assert!(brightness(base) < brightness(&young) && brightness(&young) < brightness(&old));
}

#[test]
fn documented_example_is_the_bundled_one() {
    let documented = include_str!("../../../docs/blood_pressure.example.json");
    assert_eq!(documented, BLOOD_PRESSURE);
}
