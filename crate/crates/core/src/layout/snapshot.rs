use serde::Serialize;

use super::{classify, value_to_radius, AngularSlotPlan, ColorClass, LayoutConfig};
use crate::data_model::{select_sample, HealthDataset, SnapshotSpec};
use crate::scalar::Real;

/// One measurement at one snapshot. Absent points carry no value, color or
/// timestamp and sit at the center with zero radius.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct PlottedPoint<T> {
    pub measurement_id: String,
    pub measurement_index: usize,
    pub snapshot: usize,
    pub angle: T,
    pub radius: T,
    pub x: T,
    pub y: T,
    pub present: bool,
    pub value: Option<f64>,
    pub timestamp: Option<i64>,
    pub color: Option<ColorClass>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct Vertex<T> {
    pub measurement_index: usize,
    pub angle: T,
    pub radius: T,
    pub x: T,
    pub y: T,
}

/// The shape joining one snapshot's present points in slot order.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct SnapshotPolygon<T> {
    pub snapshot: usize,
    /// 0 for the newest snapshot.
    pub age: usize,
    /// Drawn with lightened colors (every snapshot but the newest).
    pub lightened: bool,
    /// Closed polygon with three or more vertices; otherwise an open polyline
    /// (two vertices) or a lone point.
    pub closed: bool,
    pub vertices: Vec<Vertex<T>>,
}

/// Plots every measurement at every snapshot, snapshot-major.
pub fn plot_points<T: Real>(
    dataset: &HealthDataset,
    spec: &SnapshotSpec,
    plan: &AngularSlotPlan<T>,
    config: &LayoutConfig<T>,
) -> Vec<PlottedPoint<T>> {
    let (cx, cy) = config.center();
    let mut points = Vec::with_capacity(spec.len() * dataset.measurement_count());
    for (snapshot, &t) in spec.timestamps().iter().enumerate() {
        for (mi, m) in dataset.measurements().enumerate() {
            let angle = plan.measurement_angles[mi];
            let base = PlottedPoint {
                measurement_id: m.id.clone(),
                measurement_index: mi,
                snapshot,
                angle,
                radius: T::zero(),
                x: cx,
                y: cy,
                present: false,
                value: None,
                timestamp: None,
                color: None,
            };
            let point = match select_sample(m, t, spec.policy()) {
                None => base,
                Some(sample) => {
                    let ranges = m.ranges.map(T::of);
                    let value = T::of(sample.value);
                    let radius = value_to_radius(value, &ranges, config);
                    let (x, y) = config.polar_to_cartesian(angle, radius);
                    PlottedPoint {
                        radius,
                        x,
                        y,
                        present: true,
                        value: Some(sample.value),
                        timestamp: Some(sample.timestamp),
                        color: Some(classify(value, &ranges)),
                        ..base
                    }
                }
            };
            points.push(point);
        }
    }
    points
}

/// One polygon per snapshot, oldest first, over the present points in slot
/// order. The loop runs across group gaps; absent points are skipped.
pub fn build_polygons<T: Real>(
    points: &[PlottedPoint<T>],
    snapshot_count: usize,
) -> Vec<SnapshotPolygon<T>> {
    (0..snapshot_count)
        .map(|snapshot| {
            let mut vertices: Vec<Vertex<T>> = points
                .iter()
                .filter(|p| p.snapshot == snapshot && p.present)
                .map(|p| Vertex {
                    measurement_index: p.measurement_index,
                    angle: p.angle,
                    radius: p.radius,
                    x: p.x,
                    y: p.y,
                })
                .collect();
            vertices.sort_by_key(|v| v.measurement_index);
            let age = snapshot_count - 1 - snapshot;
            SnapshotPolygon {
                snapshot,
                age,
                lightened: age > 0,
                closed: vertices.len() >= 3,
                vertices,
            }
        })
        .collect()
}
