use std::fs;
use std::io::{self, Read, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use hfigures::data_model::{format_utc, validate_document, DatasetError};
use hfigures::ingest::{merge, tracker_to_samples, IngestError, MetricMapping, TrackerPayload};
use hfigures::pipeline::{parse_snapshot_list, render_dataset};
use hfigures::{
    parse_dataset, LayoutConfig, LayoutError, RenderError, RenderOptions, ShowLabels,
    SnapshotSelection,
};
use hfigures_service::{ServiceConfig, DEFAULT_MAX_BODY};

/// Radial health-measurement figures as standalone SVG.
#[derive(Debug, Parser)]
#[command(name = "hfig", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a data source to SVG.
    Render(RenderArgs),
    /// Check a data source and summarize it.
    Validate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Merge activity-tracker records into a data source.
    Ingest {
        /// Tracker payload; `-` reads standard input.
        #[arg(long)]
        tracker: PathBuf,
        #[arg(long)]
        mapping: PathBuf,
        /// Data source to merge into.
        #[arg(long)]
        into: PathBuf,
        /// Merged data source; standard output when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the HTTP render service.
    Serve {
        #[arg(long, env = "HFIG_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        #[arg(long, env = "HFIG_CONFIG")]
        config: Option<PathBuf>,
        /// Largest accepted request body in bytes.
        #[arg(long, default_value_t = DEFAULT_MAX_BODY)]
        max_body: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LabelsArg {
    All,
    None,
}

#[derive(Debug, clap::Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Comma-separated epoch seconds, ascending.
    #[arg(long, conflicts_with = "latest")]
    pub snapshots: Option<String>,
    /// Use the N most recent sample timestamps (default 2).
    #[arg(long)]
    pub latest: Option<usize>,
    /// SVG destination; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Canvas side in px.
    #[arg(long)]
    pub size: Option<f64>,
    #[arg(long, value_enum)]
    pub labels: Option<LabelsArg>,
    /// Layout configuration (JSON).
    #[arg(long, env = "HFIG_CONFIG")]
    pub config: Option<PathBuf>,
    /// Also write the layout JSON here.
    #[arg(long)]
    pub layout_json: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or unreadable files; exit code 2.
    Usage(String),
    /// Invalid data; exit code 1. One diagnostic per line.
    Invalid(Vec<String>),
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        CliError::Invalid(vec![describe(&e)])
    }
}

fn describe(e: &DatasetError) -> String {
    match e.path() {
        Some(path) => format!("{} at {path}: {}", e.kind(), e.message()),
        None => format!("{}: {}", e.kind(), e.message()),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Usage(format!("cannot read standard input: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Usage(format!("cannot write standard output: {e}"))),
    }
}

pub fn load_config(path: Option<&Path>) -> Result<LayoutConfig, CliError> {
    let Some(path) = path else {
        return Ok(LayoutConfig::default());
    };
    let text = read(path)?;
    let config: LayoutConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))?;
    config
        .validate()
        .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))?;
    Ok(config)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Render(args) => render(args),
        Command::Validate { input } => validate(&input),
        Command::Ingest {
            tracker,
            mapping,
            into,
            output,
        } => ingest(&tracker, &mapping, &into, output.as_deref()),
        Command::Serve {
            port,
            host,
            config,
            max_body,
        } => serve(host, port, config.as_deref(), max_body),
    }
}

fn render(args: RenderArgs) -> Result<(), CliError> {
    let text = read(&args.input)?;
    let config = load_config(args.config.as_deref())?;
    let snapshots = match (&args.snapshots, args.latest) {
        (Some(list), _) => {
            SnapshotSelection::Explicit(parse_snapshot_list(list).map_err(CliError::Usage)?)
        }
        (None, Some(n)) => SnapshotSelection::Latest(n),
        (None, None) => SnapshotSelection::default(),
    };
    if let Some(size) = args.size {
        if !(size.is_finite() && size > 0.0) {
            return Err(CliError::Usage("--size must be a positive number".into()));
        }
    }
    let options = RenderOptions {
        snapshots,
        size: args.size,
        labels: args.labels.map(|l| match l {
            LabelsArg::All => ShowLabels::All,
            LabelsArg::None => ShowLabels::None,
        }),
        config,
        ..Default::default()
    };
    let dataset = parse_dataset(&text)?;
    if let Some(path) = &args.layout_json {
        let scene =
            hfigures::pipeline::layout_dataset(&dataset, &options).map_err(render_failure)?;
        write_out(Some(path), &scene.to_layout_json())?;
    }
    let doc = render_dataset(&dataset, &options).map_err(render_failure)?;
    write_out(args.output.as_deref(), &doc.text)
}

fn render_failure(e: RenderError) -> CliError {
    match e {
        RenderError::Dataset(d) => d.into(),
        RenderError::Snapshot(s) => CliError::Usage(s.to_string()),
        RenderError::Layout(l @ LayoutError::Overflow { .. }) => {
            CliError::Invalid(vec![format!("LayoutOverflow: {l}")])
        }
        RenderError::Layout(l) => CliError::Usage(l.to_string()),
    }
}

fn validate(input: &Path) -> Result<(), CliError> {
    let text = read(input)?;
    let dataset = validate_document(&text)
        .map_err(|errs| CliError::Invalid(errs.iter().map(describe).collect()))?;
    let (first, last) = dataset.span();
    let mut out = format!(
        "valid: {} groups, {} measurements, {} samples\nspan: {} .. {} ({} distinct timestamps)\ngroups:\n",
        dataset.groups().len(),
        dataset.measurement_count(),
        dataset.sample_count(),
        format_utc(first),
        format_utc(last),
        dataset.distinct_timestamps().len()
    );
    for g in dataset.groups() {
        out.push_str(&format!("  {} ({})\n", g.label, g.measurements.len()));
    }
    write_out(None, &out)
}

fn ingest_failure(e: IngestError) -> CliError {
    match e {
        IngestError::Dataset(d) => d.into(),
        other => CliError::Invalid(vec![other.to_string()]),
    }
}

fn ingest(
    tracker: &Path,
    mapping: &Path,
    into: &Path,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let mapping_text = read(mapping)?;
    let base_text = read(into)?;
    let tracker_text = read(tracker)?;
    let mapping = MetricMapping::from_json(&mapping_text).map_err(ingest_failure)?;
    let base = parse_dataset(&base_text)?;
    let payload = TrackerPayload::from_json(&tracker_text).map_err(ingest_failure)?;
    let outcome = tracker_to_samples(&payload, &mapping).map_err(ingest_failure)?;
    if !outcome.unmapped.is_empty() {
        let report: Vec<String> = outcome
            .unmapped
            .iter()
            .map(|(k, n)| format!("{k} ({n})"))
            .collect();
        eprintln!("unmapped metrics: {}", report.join(", "));
    }
    let merged = merge(&base, &outcome.fragment).map_err(ingest_failure)?;
    write_out(output, &merged.to_json_pretty())
}

fn serve(host: IpAddr, port: u16, config: Option<&Path>, max_body: usize) -> Result<(), CliError> {
    let layout = load_config(config)?;
    let addr = SocketAddr::new(host, port);
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start runtime: {e}")))?;
    eprintln!("hfig serve: listening on http://{addr}");
    runtime
        .block_on(hfigures_service::serve(
            addr,
            ServiceConfig {
                max_body_bytes: max_body,
                layout,
            },
        ))
        .map_err(|e| CliError::Usage(format!("cannot serve on {addr}: {e}")))
}
