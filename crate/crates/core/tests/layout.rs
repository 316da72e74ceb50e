use std::f64::consts::TAU;

use hfigures::data_model::{SelectionPolicy, SnapshotSpec};
use hfigures::layout::{build_scene, compute_slots_for_sizes, Direction};
use hfigures::{LayoutConfig, LayoutError};
use hfigures_testkit::{oracle, Shape};

#[test]
fn randomized_labels_never_collide() {
    let mut rng = hfigures_testkit::rng(2015);
    let config = LayoutConfig::default();
    let (mut placed, mut overflowed) = (0, 0);
    for case in 0..200 {
        let ds = hfigures_testkit::dataset(&mut rng, Shape::new(12, 8, 4));
        let times = hfigures_testkit::snapshot_times(&mut rng, &ds, 4);
        let spec = SnapshotSpec::new(times, SelectionPolicy::NearestAtOrBefore).unwrap();
        match build_scene(&ds, &spec, &config) {
            Ok(scene) => {
                placed += 1;
                let hits = oracle::label_collisions(&scene, &config);
                assert!(hits.is_empty(), "case {case}: {hits:?}");
                for l in &scene.labels {
                    assert!(l.bbox.x >= 0.0 && l.bbox.y >= 0.0);
                    assert!(
                        l.bbox.right() <= config.canvas_size
                            && l.bbox.bottom() <= config.canvas_size
                    );
                }
            }
            Err(e @ LayoutError::Overflow { .. }) => {
                assert!(
                    ds.measurement_count() > 60,
                    "case {case}: {} labels: {e}",
                    ds.measurement_count()
                );
                overflowed += 1;
            }
            Err(e) => panic!("case {case}: {e}"),
        }
    }
    assert!(
        placed > overflowed,
        "{placed} placed, {overflowed} overflowed"
    );
}

#[test]
fn slot_plans_cover_the_circle() {
    let mut rng = hfigures_testkit::rng(11);
    for direction in [Direction::Clockwise, Direction::Counterclockwise] {
        let config = LayoutConfig {
            direction,
            ..Default::default()
        };
        let sign = if direction == Direction::Clockwise {
            1.0
        } else {
            -1.0
        };
        for _ in 0..1000 {
            let sizes = hfigures_testkit::group_sizes(&mut rng, 16, 12);
            let plan = compute_slots_for_sizes(&sizes, &config);
            let expected_slots: usize = sizes.iter().sum::<usize>() + sizes.len();
            assert_eq!(plan.total_slots, expected_slots);
            assert!((plan.total_slots as f64 * plan.slot_width - TAU).abs() < 1e-9);
            assert_eq!(plan.gap_slots.len(), sizes.len());
            assert_eq!(plan.measurement_angles.len(), sizes.iter().sum::<usize>());
            assert!(plan
                .measurement_angles
                .windows(2)
                .all(|w| sign * (w[1] - w[0]) > 0.0));
            // every slot is used exactly once, by a measurement or a gap
            let mut used: Vec<usize> = plan
                .measurement_slots
                .iter()
                .chain(&plan.gap_slots)
                .copied()
                .collect();
            used.sort_unstable();
            assert_eq!(used, (0..plan.total_slots).collect::<Vec<_>>());
        }
    }
}

#[test]
fn single_measurement_sits_a_quarter_turn_in() {
    let config = LayoutConfig::default();
    let plan = compute_slots_for_sizes(&[1], &config);
    assert_eq!(plan.total_slots, 2);
    assert!((plan.slot_width - std::f64::consts::PI).abs() < 1e-12);
    assert!(
        (plan.measurement_angles[0] - (config.start_angle + std::f64::consts::FRAC_PI_2)).abs()
            < 1e-12
    );
}
