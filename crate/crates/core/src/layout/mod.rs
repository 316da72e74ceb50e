//! Figure geometry: slots, radial normalization, snapshot polygons and
//! label placement, composed into a [`Scene`].

mod labels;
mod radial;
mod slots;
mod snapshot;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data_model::{format_utc, HealthDataset, SnapshotSpec};
use crate::scalar::{half, two, Real};

pub use labels::{label_radius, place_labels, Circle, LabelAnchor, PlacedLabel, Rect, TextAnchor};
pub use radial::{classify, value_to_radius};
pub use slots::{compute_slots, compute_slots_for_sizes, AngularSlotPlan, SectorArc};
pub use snapshot::{build_polygons, plot_points, PlottedPoint, SnapshotPolygon, Vertex};

/// Version of the serialized scene ("layout JSON") consumed by the viewer.
pub const LAYOUT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    Clockwise,
    Counterclockwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShowLabels {
    #[default]
    All,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ColorClass {
    Green,
    Yellow,
    Red,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quadrant {
    NE,
    NW,
    SE,
    SW,
}

impl Quadrant {
    pub fn is_upper(self) -> bool {
        matches!(self, Quadrant::NE | Quadrant::NW)
    }

    pub fn is_east(self) -> bool {
        matches!(self, Quadrant::NE | Quadrant::SE)
    }
}

/// Colors used by the renderer, as `#rrggbb`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Palette {
    pub green: String,
    pub yellow: String,
    pub red: String,
    pub band_fill: String,
    pub band_stroke: String,
    pub polygon_stroke: String,
    pub point_stroke: String,
    pub background: String,
    pub text: String,
}

impl Default for Palette {
    fn default() -> Self {
        Self {
            green: "#2e7d32".into(),
            yellow: "#f9a825".into(),
            red: "#c62828".into(),
            band_fill: "#e8f0e8".into(),
            band_stroke: "#b0bec5".into(),
            polygon_stroke: "#455a64".into(),
            point_stroke: "#263238".into(),
            background: "#ffffff".into(),
            text: "#212121".into(),
        }
    }
}

/// Every geometric and styling constant of the figure. All lengths in px.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound = "T: Real")]
pub struct LayoutConfig<T> {
    /// Side of the square viewBox.
    pub canvas_size: T,
    pub r_plot_min: T,
    pub r_band_inner: T,
    pub r_band_outer: T,
    pub r_plot_max: T,
    /// Space between `r_plot_max` and the canvas edge reserved for labels.
    pub label_gutter: T,
    /// Angle of the first slot boundary; screen coordinates, `-π/2` is 12 o'clock.
    pub start_angle: T,
    pub direction: Direction,
    /// Radial margin added to a label's anchor and the vertical gap between stacked labels.
    pub label_margin: T,
    pub label_line_height: T,
    pub font_size: T,
    /// Horizontal distance between a label box and its anchor or a point circle.
    pub label_offset_x: T,
    pub point_radius: T,
    pub point_stroke_width: T,
    /// Fraction moved toward white per step of snapshot age.
    pub snapshot_lighten_step: T,
    pub show_labels: ShowLabels,
    pub palette: Palette,
}

impl<T: Real> Default for LayoutConfig<T> {
    fn default() -> Self {
        Self {
            canvas_size: T::of(1400.0),
            r_plot_min: T::of(80.0),
            r_band_inner: T::of(200.0),
            r_band_outer: T::of(280.0),
            r_plot_max: T::of(360.0),
            label_gutter: T::of(200.0),
            start_angle: -T::FRAC_PI_2(),
            direction: Direction::Clockwise,
            label_margin: T::of(8.0),
            label_line_height: T::of(14.0),
            font_size: T::of(11.0),
            label_offset_x: T::of(4.0),
            point_radius: T::of(5.0),
            point_stroke_width: T::one(),
            snapshot_lighten_step: T::of(0.35),
            show_labels: ShowLabels::All,
            palette: Palette::default(),
        }
    }
}

impl<T: Real> LayoutConfig<T> {
    pub fn center(&self) -> (T, T) {
        (self.canvas_size * half(), self.canvas_size * half())
    }

    /// Resizes the canvas, scaling radii and gutter proportionally. Text
    /// metrics and point sizes are left alone.
    pub fn with_canvas_size(mut self, size: T) -> Self {
        let k = size / self.canvas_size;
        self.canvas_size = size;
        self.r_plot_min = self.r_plot_min * k;
        self.r_band_inner = self.r_band_inner * k;
        self.r_band_outer = self.r_band_outer * k;
        self.r_plot_max = self.r_plot_max * k;
        self.label_gutter = self.label_gutter * k;
        self
    }

    pub fn validate(&self) -> Result<(), LayoutError> {
        let bad = |m: &str| Err(LayoutError::InvalidConfig(m.to_owned()));
        let all = [
            self.canvas_size,
            self.r_plot_min,
            self.r_band_inner,
            self.r_band_outer,
            self.r_plot_max,
            self.label_gutter,
            self.start_angle,
            self.label_margin,
            self.label_line_height,
            self.font_size,
            self.label_offset_x,
            self.point_radius,
            self.point_stroke_width,
            self.snapshot_lighten_step,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return bad("all numeric settings must be finite");
        }
        if self.canvas_size <= T::zero() {
            return bad("canvas_size must be positive");
        }
        if !(T::zero() < self.r_plot_min
            && self.r_plot_min < self.r_band_inner
            && self.r_band_inner < self.r_band_outer
            && self.r_band_outer < self.r_plot_max)
        {
            return bad(
                "radii must satisfy 0 < r_plot_min < r_band_inner < r_band_outer < r_plot_max",
            );
        }
        if self.label_gutter < T::zero()
            || self.r_plot_max > self.canvas_size * half() - self.label_gutter
        {
            return bad("r_plot_max must not exceed canvas_size/2 - label_gutter");
        }
        if self.label_margin < T::zero()
            || self.label_offset_x < T::zero()
            || self.point_stroke_width < T::zero()
        {
            return bad("margins, offsets and stroke widths must be non-negative");
        }
        if !(self.label_line_height > T::zero() && self.font_size > T::zero()) {
            return bad("label_line_height and font_size must be positive");
        }
        if self.point_radius <= T::zero() {
            return bad("point_radius must be positive");
        }
        if !(self.snapshot_lighten_step >= T::zero() && self.snapshot_lighten_step < T::one()) {
            return bad("snapshot_lighten_step must lie in [0, 1)");
        }
        Ok(())
    }

    /// Screen position of a polar coordinate around the canvas center;
    /// the y axis points down.
    pub fn polar_to_cartesian(&self, angle: T, radius: T) -> (T, T) {
        let (cx, cy) = self.center();
        (cx + radius * angle.cos(), cy + radius * angle.sin())
    }

    pub(crate) fn direction_sign(&self) -> T {
        match self.direction {
            Direction::Clockwise => T::one(),
            Direction::Counterclockwise => -T::one(),
        }
    }

    /// Rough text width: monospace-safe overestimate of 0.6 em per char.
    pub fn text_width(&self, text: &str) -> T {
        T::of(text.chars().count() as f64) * T::of(0.6) * self.font_size
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LayoutError {
    #[error("invalid layout configuration: {0}")]
    InvalidConfig(String),
    #[error(
        "labels do not fit the canvas: {quadrant:?} label {measurement_id:?} needs {needed:.1}px, {available:.1}px available; enlarge the canvas (--size) or hide labels (--labels none)"
    )]
    Overflow {
        measurement_id: String,
        quadrant: Quadrant,
        needed: f64,
        available: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct Band<T> {
    pub inner: T,
    pub outer: T,
    pub plot_min: T,
    pub plot_max: T,
}

/// Group label placed at the chord midpoint of its sector's outer band arc,
/// or at mid-band for sectors too wide for the chord to reach the band.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct SectorLabel<T> {
    pub group_index: usize,
    pub text: String,
    pub x: T,
    pub y: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LegendEntry {
    pub snapshot: usize,
    pub timestamp: i64,
    pub utc: String,
    /// 0 for the newest snapshot.
    pub age: usize,
}

/// Fully resolved figure, ready to render or to serialize as layout JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct Scene<T> {
    pub layout_version: u32,
    pub canvas_size: T,
    pub center: (T, T),
    pub subject: Option<String>,
    pub band: Band<T>,
    pub slots: AngularSlotPlan<T>,
    pub sector_labels: Vec<SectorLabel<T>>,
    /// Snapshot-major: every measurement of snapshot 0, then snapshot 1, …
    pub points: Vec<PlottedPoint<T>>,
    /// Oldest first.
    pub polygons: Vec<SnapshotPolygon<T>>,
    pub labels: Vec<PlacedLabel<T>>,
    pub legend: Vec<LegendEntry>,
}

#[derive(Serialize)]
#[serde(bound = "T: Real")]
struct Geometry<'a, T> {
    band: &'a Band<T>,
    slots: &'a AngularSlotPlan<T>,
    sector_labels: &'a [SectorLabel<T>],
    points: &'a [PlottedPoint<T>],
    polygons: &'a [SnapshotPolygon<T>],
}

impl<T: Real> Scene<T> {
    pub fn to_layout_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serializes")
    }

    /// Serialized sector, point and polygon geometry only; labels excluded.
    pub fn geometry_json(&self) -> String {
        serde_json::to_string(&Geometry {
            band: &self.band,
            slots: &self.slots,
            sector_labels: &self.sector_labels,
            points: &self.points,
            polygons: &self.polygons,
        })
        .expect("scene serializes")
    }

    pub fn snapshot_count(&self) -> usize {
        self.legend.len()
    }
}

/// Lays out the whole figure. Deterministic: equal inputs give equal scenes.
pub fn build_scene<T: Real>(
    dataset: &HealthDataset,
    spec: &SnapshotSpec,
    config: &LayoutConfig<T>,
) -> Result<Scene<T>, LayoutError> {
    config.validate()?;
    let plan = compute_slots(dataset, config);
    let points = plot_points(dataset, spec, &plan, config);
    let polygons = build_polygons(&points, spec.len());

    let sector_labels: Vec<SectorLabel<T>> = plan
        .sectors
        .iter()
        .zip(dataset.groups())
        .map(|(arc, group)| {
            let mid = (arc.start_angle + arc.end_angle) * half();
            let half_span = (arc.end_angle - arc.start_angle).abs() * half();
            // wide sectors have their chord deep inside the circle; stay in the band
            let band_mid = (config.r_band_inner + config.r_band_outer) * half();
            let r = (config.r_band_outer * half_span.cos()).max(band_mid);
            let (x, y) = config.polar_to_cartesian(mid, r);
            SectorLabel {
                group_index: arc.group_index,
                text: group.label.clone(),
                x,
                y,
            }
        })
        .collect();

    let labels = match config.show_labels {
        ShowLabels::None => Vec::new(),
        ShowLabels::All => {
            let anchors = label_anchors(dataset, &plan, &points, spec.len(), config);
            let stroke = config.point_stroke_width * half();
            let mut obstacles: Vec<Rect<T>> = points
                .iter()
                .filter(|p| p.present)
                .map(|p| {
                    Circle {
                        x: p.x,
                        y: p.y,
                        r: config.point_radius + stroke,
                    }
                    .bounding_box()
                })
                .collect();
            obstacles.extend(sector_labels.iter().map(|l| sector_label_box(l, config)));
            place_labels(&anchors, &obstacles, config)?
        }
    };

    let n = spec.len();
    let legend = spec
        .timestamps()
        .iter()
        .enumerate()
        .map(|(i, &t)| LegendEntry {
            snapshot: i,
            timestamp: t,
            utc: format_utc(t),
            age: n - 1 - i,
        })
        .collect();

    Ok(Scene {
        layout_version: LAYOUT_VERSION,
        canvas_size: config.canvas_size,
        center: config.center(),
        subject: dataset.subject().map(str::to_owned),
        band: Band {
            inner: config.r_band_inner,
            outer: config.r_band_outer,
            plot_min: config.r_plot_min,
            plot_max: config.r_plot_max,
        },
        slots: plan,
        sector_labels,
        points,
        polygons,
        labels,
        legend,
    })
}

/// Box around a centered group label, in the font the renderer uses.
pub fn sector_label_box<T: Real>(label: &SectorLabel<T>, config: &LayoutConfig<T>) -> Rect<T> {
    let font = config.font_size + T::one();
    let width = T::of(label.text.chars().count() as f64) * T::of(0.6) * font;
    let height = config.label_line_height;
    Rect {
        x: label.x - width * half(),
        y: label.y - height * half(),
        width,
        height,
    }
}

fn label_anchors<T: Real>(
    dataset: &HealthDataset,
    plan: &AngularSlotPlan<T>,
    points: &[PlottedPoint<T>],
    snapshots: usize,
    config: &LayoutConfig<T>,
) -> Vec<LabelAnchor<T>> {
    let count = dataset.measurement_count();
    dataset
        .measurements()
        .enumerate()
        .map(|(mi, m)| {
            // snapshot-major layout: point (s, mi) lives at s * count + mi
            let own: Vec<&PlottedPoint<T>> =
                (0..snapshots).map(|s| &points[s * count + mi]).collect();
            let radius = label_radius(own.iter().copied(), config);
            let latest = own.iter().rev().find_map(|p| p.value);
            let value_line = match latest {
                Some(v) => format_value(v, &m.units),
                None => "n/a".to_owned(),
            };
            let lines = vec![m.label.clone(), value_line];
            let width = lines
                .iter()
                .map(|l| config.text_width(l))
                .fold(T::zero(), T::max);
            let height = config.label_line_height * T::of(lines.len() as f64);
            LabelAnchor {
                measurement_id: m.id.clone(),
                angle: plan.measurement_angles[mi],
                label_radius: radius,
                width,
                height,
                lines,
            }
        })
        .collect()
}

/// `8500 steps`, `5.6 %`; the shortest representation that round-trips.
pub fn format_value(value: f64, units: &str) -> String {
    if units.is_empty() {
        format!("{value}")
    } else {
        format!("{value} {units}")
    }
}

pub(crate) fn tau<T: Real>() -> T {
    T::PI() * two()
}
