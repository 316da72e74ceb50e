//! Seeded random datasets for property and acceptance tests.

pub mod oracle;

use hfigures::data_model::{HealthDataset, Measurement, MeasurementGroup, RangeSet, Sample};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Bounds on the shape of a generated dataset.
#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_groups: usize,
    pub max_measurements: usize,
    pub max_samples: usize,
}

impl Shape {
    pub const fn new(max_groups: usize, max_measurements: usize, max_samples: usize) -> Self {
        Self {
            max_groups,
            max_measurements,
            max_samples,
        }
    }
}

const WORDS: &[&str] = &[
    "Blood", "Heart", "Sleep", "Steps", "Fat", "Sugar", "Salt", "Fiber", "Stress", "Mood", "Waist",
    "Index", "Rate", "Level", "Intake", "Time", "LDL", "HDL", "Force", "Balance",
];

const UNITS: &[&str] = &[
    "", "mmHg", "bpm", "%", "h", "g/day", "mmol/l", "steps", "score",
];

pub const BASE_TIME: i64 = 1_420_000_000;
pub const DAY: i64 = 86_400;

fn label(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(1..=2);
    (0..n)
        .map(|_| *WORDS.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Random ranges, sometimes degenerate, with independent optional warnings.
pub fn ranges(rng: &mut ChaCha8Rng) -> RangeSet<f64> {
    let lo = (rng.random_range(-50.0..200.0f64) * 4.0).round() / 4.0;
    let span = if rng.random_bool(0.1) {
        0.0
    } else {
        (rng.random_range(0.25..100.0f64) * 4.0).round() / 4.0
    };
    let hi = lo + span;
    let width = span.max(1.0);
    let warn_lo = rng
        .random_bool(0.5)
        .then(|| lo - (rng.random_range(0.0..1.0f64) * width * 4.0).round() / 4.0);
    let warn_hi = rng
        .random_bool(0.5)
        .then(|| hi + (rng.random_range(0.0..1.0f64) * width * 4.0).round() / 4.0);
    RangeSet {
        rec_lo: lo,
        rec_hi: hi,
        warn_lo,
        warn_hi,
    }
}

/// A value around the range, landing inside, in warning and far outside.
pub fn value_near(rng: &mut ChaCha8Rng, r: &RangeSet<f64>) -> f64 {
    let width = (r.rec_hi - r.rec_lo).max(1.0);
    let v = rng.random_range(r.rec_lo - 1.5 * width..=r.rec_hi + 1.5 * width);
    (v * 100.0).round() / 100.0
}

pub fn dataset(rng: &mut ChaCha8Rng, shape: Shape) -> HealthDataset {
    let groups = rng.random_range(1..=shape.max_groups);
    let mut next_id = 0usize;
    let groups = (0..groups)
        .map(|gi| {
            let count = rng.random_range(1..=shape.max_measurements);
            let measurements = (0..count)
                .map(|_| {
                    next_id += 1;
                    let ranges = ranges(rng);
                    let samples = rng.random_range(1..=shape.max_samples);
                    let mut days: Vec<i64> = (0..shape.max_samples as i64 * 2).collect();
                    days.sort_by_key(|_| rng.random::<u32>());
                    let samples = days[..samples]
                        .iter()
                        .map(|d| Sample {
                            timestamp: BASE_TIME + d * DAY,
                            value: value_near(rng, &ranges),
                        })
                        .collect();
                    Measurement {
                        id: format!("m{next_id}"),
                        label: label(rng),
                        units: UNITS.choose(rng).unwrap().to_string(),
                        ranges,
                        samples,
                    }
                })
                .collect();
            MeasurementGroup {
                label: format!("Group {gi}"),
                measurements,
            }
        })
        .collect();
    HealthDataset::new(groups, None).expect("generated datasets are valid")
}

/// Up to `max` snapshot times drawn from the dataset's own timestamps.
pub fn snapshot_times(rng: &mut ChaCha8Rng, ds: &HealthDataset, max: usize) -> Vec<i64> {
    let all = ds.distinct_timestamps();
    let n = rng.random_range(1..=max.min(all.len()));
    let mut picked: Vec<i64> = all.choose_multiple(rng, n).copied().collect();
    picked.sort_unstable();
    picked
}

/// Random group sizes, each at least one.
pub fn group_sizes(rng: &mut ChaCha8Rng, max_groups: usize, max_size: usize) -> Vec<usize> {
    let n = rng.random_range(1..=max_groups);
    (0..n).map(|_| rng.random_range(1..=max_size)).collect()
}

/// A random selection of `universe`'s samples, kept under their original
/// measurement and group. Any two selections of one universe merge without
/// conflict. Measurements left without samples are dropped, and so are
/// groups left without measurements.
pub fn sample_subset(
    rng: &mut ChaCha8Rng,
    universe: &HealthDataset,
    keep: f64,
) -> Vec<MeasurementGroup> {
    universe
        .groups()
        .iter()
        .filter_map(|g| {
            let measurements: Vec<Measurement> = g
                .measurements
                .iter()
                .filter_map(|m| {
                    let samples: Vec<Sample> = m
                        .samples
                        .iter()
                        .filter(|_| rng.random_bool(keep))
                        .copied()
                        .collect();
                    (!samples.is_empty()).then(|| Measurement {
                        samples,
                        ..m.clone()
                    })
                })
                .collect();
            (!measurements.is_empty()).then(|| MeasurementGroup {
                label: g.label.clone(),
                measurements,
            })
        })
        .collect()
}
