//! The single parse → layout → render path shared by the CLI and the HTTP
//! service, so both produce identical bytes for identical inputs.

use thiserror::Error;

use crate::data_model::{
    parse_dataset, DatasetError, HealthDataset, SelectionPolicy, SnapshotError, SnapshotSpec,
};
use crate::layout::{build_scene, LayoutConfig, LayoutError, Scene, ShowLabels};
use crate::svg_render::{render_svg, SvgDocument};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SnapshotSelection {
    /// Explicit epoch seconds, strictly ascending.
    Explicit(Vec<i64>),
    /// The N most recent distinct sample timestamps.
    Latest(usize),
}

impl Default for SnapshotSelection {
    fn default() -> Self {
        SnapshotSelection::Latest(2)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RenderOptions {
    pub snapshots: SnapshotSelection,
    pub policy: SelectionPolicy,
    /// Overrides the canvas size, scaling the radii with it.
    pub size: Option<f64>,
    pub labels: Option<ShowLabels>,
    pub config: LayoutConfig<f64>,
}

impl RenderOptions {
    pub fn effective_config(&self) -> LayoutConfig<f64> {
        let mut config = self.config.clone();
        if let Some(size) = self.size {
            config = config.with_canvas_size(size);
        }
        if let Some(labels) = self.labels {
            config.show_labels = labels;
        }
        config
    }

    pub fn snapshot_spec(&self, dataset: &HealthDataset) -> Result<SnapshotSpec, SnapshotError> {
        match &self.snapshots {
            SnapshotSelection::Explicit(ts) => SnapshotSpec::new(ts.clone(), self.policy),
            SnapshotSelection::Latest(n) => SnapshotSpec::latest(dataset, *n, self.policy),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenderError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
}

/// Parses a comma-separated list of epoch seconds (`1420798224,1423742720`).
pub fn parse_snapshot_list(text: &str) -> Result<Vec<i64>, String> {
    text.split(',')
        .map(|part| {
            let part = part.trim();
            part.parse::<i64>()
                .map_err(|_| format!("invalid epoch seconds {part:?}"))
        })
        .collect()
}

pub fn layout_dataset(
    dataset: &HealthDataset,
    options: &RenderOptions,
) -> Result<Scene<f64>, RenderError> {
    let spec = options.snapshot_spec(dataset)?;
    Ok(build_scene(dataset, &spec, &options.effective_config())?)
}

pub fn render_dataset(
    dataset: &HealthDataset,
    options: &RenderOptions,
) -> Result<SvgDocument, RenderError> {
    let scene = layout_dataset(dataset, options)?;
    Ok(render_svg(&scene, &options.effective_config()))
}

/// Parses a data-source document and renders it.
pub fn render_document(text: &str, options: &RenderOptions) -> Result<SvgDocument, RenderError> {
    render_dataset(&parse_dataset(text)?, options)
}

/// Parses a data-source document and returns its scene.
pub fn layout_document(text: &str, options: &RenderOptions) -> Result<Scene<f64>, RenderError> {
    layout_dataset(&parse_dataset(text)?, options)
}
