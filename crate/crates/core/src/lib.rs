//! Radial health-measurement figures.
//!
//! Grouped measurements with recommended ranges are laid out on a circle
//! divided into group sectors, normalized against an annular recommended
//! band, and joined into one polygon per snapshot in time. Labels are placed
//! so that they never overlap each other or the plotted circles. The result
//! is a [`Scene`] that renders to a standalone SVG document.
//!
//! Geometry is generic over the scalar type (`f32` or `f64`); the aliases at
//! the crate root fix it to `f64`, which is what the CLI and service use.

pub mod data_model;
pub mod ingest;
pub mod layout;
pub mod pipeline;
pub mod samples;
pub mod scalar;
pub mod svg_render;

pub use data_model::{
    epoch_to_utc, parse_dataset, select_sample, utc_to_epoch, DatasetError, HealthDataset,
    Measurement, MeasurementGroup, Sample, SelectionPolicy, SnapshotSpec,
};
pub use ingest::{tracker_to_samples, DatasetFragment, IngestError, MetricMapping, TrackerPayload};
pub use layout::{ColorClass, LayoutError, Quadrant, ShowLabels, LAYOUT_VERSION};
pub use pipeline::{render_document, RenderError, RenderOptions, SnapshotSelection};
pub use scalar::Real;
pub use svg_render::{lint_standalone, SvgDocument};

/// Recommended/warning ranges in `f64`, as stored in datasets.
pub type RangeSet = data_model::RangeSet<f64>;
pub type LayoutConfig = layout::LayoutConfig<f64>;
pub type AngularSlotPlan = layout::AngularSlotPlan<f64>;
pub type PlottedPoint = layout::PlottedPoint<f64>;
pub type SnapshotPolygon = layout::SnapshotPolygon<f64>;
pub type PlacedLabel = layout::PlacedLabel<f64>;
pub type Scene = layout::Scene<f64>;

pub type LayoutConfigF32 = layout::LayoutConfig<f32>;
pub type SceneF32 = layout::Scene<f32>;
