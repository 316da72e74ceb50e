//! Slow, obviously-correct reference implementations.

use hfigures::data_model::{Measurement, RangeSet, Sample, SelectionPolicy};
use hfigures::layout::{Rect, Scene};
use hfigures::{ColorClass, LayoutConfig};

/// Linear scan over the whole sample list.
pub fn select(m: &Measurement, t: i64, policy: SelectionPolicy) -> Option<Sample> {
    let mut best: Option<Sample> = None;
    for s in &m.samples {
        let eligible = match policy {
            SelectionPolicy::NearestAtOrBefore => s.timestamp <= t,
            SelectionPolicy::Exact => s.timestamp == t,
        };
        if eligible && best.is_none_or(|b| s.timestamp > b.timestamp) {
            best = Some(*s);
        }
    }
    best
}

/// Five regions on the number line, each with the class it must produce.
/// A missing warning bound collapses its yellow region to nothing.
pub fn classify(value: f64, r: &RangeSet<f64>) -> ColorClass {
    let warn_lo = r.warn_lo.unwrap_or(r.rec_lo);
    let warn_hi = r.warn_hi.unwrap_or(r.rec_hi);
    let regions: [(bool, ColorClass); 5] = [
        (
            value < warn_lo || (r.warn_lo.is_none() && value < r.rec_lo),
            ColorClass::Red,
        ),
        (
            r.warn_lo.is_some() && warn_lo <= value && value < r.rec_lo,
            ColorClass::Yellow,
        ),
        (r.rec_lo <= value && value <= r.rec_hi, ColorClass::Green),
        (
            r.warn_hi.is_some() && r.rec_hi < value && value <= warn_hi,
            ColorClass::Yellow,
        ),
        (
            value > warn_hi || (r.warn_hi.is_none() && value > r.rec_hi),
            ColorClass::Red,
        ),
    ];
    let hits: Vec<ColorClass> = regions
        .iter()
        .filter(|(hit, _)| *hit)
        .map(|(_, c)| *c)
        .collect();
    assert_eq!(
        hits.len(),
        1,
        "regions must partition the line: {value} in {r:?}"
    );
    hits[0]
}

/// Days since 1970-01-01 for a proleptic Gregorian date (H. Hinnant).
pub fn days_from_civil(y: i64, m: u32, d: u32) -> i64 {
    let y = if m <= 2 { y - 1 } else { y };
    let era = y.div_euclid(400);
    let yoe = y - era * 400;
    let mp = (i64::from(m) + 9) % 12;
    let doy = (153 * mp + 2) / 5 + i64::from(d) - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}

pub fn civil_from_days(z: i64) -> (i64, u32, u32) {
    let z = z + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let m = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    (
        if m <= 2 {
            yoe + era * 400 + 1
        } else {
            yoe + era * 400
        },
        m,
        d,
    )
}

/// `YYYY-MM-DDTHH:MM:SSZ` for non-negative epoch seconds.
pub fn epoch_to_iso(t: i64) -> String {
    let (y, m, d) = civil_from_days(t.div_euclid(86_400));
    let s = t.rem_euclid(86_400);
    format!(
        "{y:04}-{m:02}-{d:02}T{:02}:{:02}:{:02}Z",
        s / 3600,
        s / 60 % 60,
        s % 60
    )
}

/// Every pairwise overlap between label boxes, and between label boxes and
/// the bounding boxes of drawn point circles. Empty means the layout is safe.
pub fn label_collisions(scene: &Scene<f64>, config: &LayoutConfig) -> Vec<String> {
    let r = config.point_radius + config.point_stroke_width / 2.0;
    let circles: Vec<(String, Rect<f64>)> = scene
        .points
        .iter()
        .filter(|p| p.present)
        .map(|p| {
            let id = format!("point {}@{}", p.measurement_id, p.snapshot);
            (
                id,
                Rect {
                    x: p.x - r,
                    y: p.y - r,
                    width: 2.0 * r,
                    height: 2.0 * r,
                },
            )
        })
        .collect();
    let mut found = Vec::new();
    for (i, a) in scene.labels.iter().enumerate() {
        for b in &scene.labels[i + 1..] {
            if overlaps(&a.bbox, &b.bbox) {
                found.push(format!(
                    "label {} overlaps label {}",
                    a.measurement_id, b.measurement_id
                ));
            }
        }
        for (id, c) in &circles {
            if overlaps(&a.bbox, c) {
                found.push(format!("label {} overlaps {id}", a.measurement_id));
            }
        }
    }
    found
}

fn overlaps(a: &Rect<f64>, b: &Rect<f64>) -> bool {
    let x = a.x.max(b.x) < (a.x + a.width).min(b.x + b.width);
    let y = a.y.max(b.y) < (a.y + a.height).min(b.y + b.height);
    x && y
}
