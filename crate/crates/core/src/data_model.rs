//! Data-source schema: parsing, validation, canonical serialization and
//! snapshot sample selection.
//!
//! The accepted document is JSON of the form
//!
//! ```json
//! {
//!   "subject": "optional display string",
//!   "groups": [
//!     { "label": "Blood Pressure",
//!       "measurements": [
//!         { "id": "systolic", "label": "Systolic", "units": "mmHg",
//!           "min": 90, "max": 120, "warning_max": 140,
//!           "samples": [ { "timestamp": 1420798224, "value": 135 } ] } ] } ]
//! }
//! ```
//!
//! Unknown keys are rejected. Every error carries the JSON path of the
//! offending field (`$.groups[0].measurements[1].min`).

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

/// One time-stamped value of a measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// Seconds since 1970-01-01T00:00:00 UTC.
    pub timestamp: i64,
    pub value: f64,
}

/// Recommended range plus optional, independent warning bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeSet<T> {
    #[serde(rename = "min")]
    pub rec_lo: T,
    #[serde(rename = "max")]
    pub rec_hi: T,
    #[serde(
        rename = "warning_min",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub warn_lo: Option<T>,
    #[serde(
        rename = "warning_max",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub warn_hi: Option<T>,
}

impl<T: Copy> RangeSet<T> {
    pub fn recommended(rec_lo: T, rec_hi: T) -> Self {
        Self {
            rec_lo,
            rec_hi,
            warn_lo: None,
            warn_hi: None,
        }
    }

    pub fn with_warnings(mut self, warn_lo: Option<T>, warn_hi: Option<T>) -> Self {
        self.warn_lo = warn_lo;
        self.warn_hi = warn_hi;
        self
    }

    pub fn map<U>(self, f: impl Fn(T) -> U) -> RangeSet<U> {
        RangeSet {
            rec_lo: f(self.rec_lo),
            rec_hi: f(self.rec_hi),
            warn_lo: self.warn_lo.map(&f),
            warn_hi: self.warn_hi.map(&f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measurement {
    pub id: String,
    pub label: String,
    pub units: String,
    #[serde(flatten)]
    pub ranges: RangeSet<f64>,
    /// Strictly ascending by timestamp once part of a validated dataset.
    pub samples: Vec<Sample>,
}

impl Measurement {
    pub fn latest(&self) -> Option<&Sample> {
        self.samples.last()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurementGroup {
    pub label: String,
    pub measurements: Vec<Measurement>,
}

/// A validated data source. Only constructible through [`parse_dataset`] or
/// [`HealthDataset::new`], so every instance satisfies the schema invariants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HealthDataset {
    groups: Vec<MeasurementGroup>,
    #[serde(skip_serializing_if = "Option::is_none")]
    subject: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DatasetError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("range error at {path}: {message}")]
    Range { path: String, message: String },
    #[error("duplicate at {path}: {message}")]
    Duplicate { path: String, message: String },
}

impl DatasetError {
    pub fn path(&self) -> Option<&str> {
        match self {
            DatasetError::Syntax { .. } => None,
            DatasetError::Schema { path, .. }
            | DatasetError::Range { path, .. }
            | DatasetError::Duplicate { path, .. } => Some(path),
        }
    }

    pub fn message(&self) -> &str {
        match self {
            DatasetError::Syntax { message, .. }
            | DatasetError::Schema { message, .. }
            | DatasetError::Range { message, .. }
            | DatasetError::Duplicate { message, .. } => message,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            DatasetError::Syntax { .. } => "SyntaxError",
            DatasetError::Schema { .. } => "SchemaError",
            DatasetError::Range { .. } => "RangeError",
            DatasetError::Duplicate { .. } => "DuplicateError",
        }
    }

    fn schema(path: &JsonPath, message: impl Into<String>) -> Self {
        DatasetError::Schema {
            path: path.to_string(),
            message: message.into(),
        }
    }
}

/// Parses and validates a data-source document, stopping at the first
/// violation. Use [`validate_document`] to collect all of them.
pub fn parse_dataset(text: &str) -> Result<HealthDataset, DatasetError> {
    validate_document(text).map_err(|mut errs| errs.swap_remove(0))
}

/// Parses a data-source document, returning every violation found.
///
/// Structural problems are reported first; range and duplicate checks only
/// run on structurally sound documents. The returned vector is never empty.
pub fn validate_document(text: &str) -> Result<HealthDataset, Vec<DatasetError>> {
    let value: Value = serde_json::from_str(text).map_err(|e| {
        vec![DatasetError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }]
    })?;
    let mut walker = Walker::default();
    let root = JsonPath::root();
    let parsed = walker.document(&value, &root);
    if !walker.errors.is_empty() {
        return Err(walker.errors);
    }
    let (groups, subject) = parsed.expect("walker reports an error for every rejected document");
    HealthDataset::new(groups, subject)
}

impl HealthDataset {
    /// Validates `groups` and sorts every measurement's samples.
    pub fn new(
        mut groups: Vec<MeasurementGroup>,
        subject: Option<String>,
    ) -> Result<Self, Vec<DatasetError>> {
        let root = JsonPath::root().key("groups");
        let mut errors = Vec::new();
        if groups.is_empty() {
            errors.push(DatasetError::schema(
                &root,
                "must contain at least one group",
            ));
            return Err(errors);
        }
        validate_groups(&groups, &mut errors);
        if !errors.is_empty() {
            return Err(errors);
        }
        for m in groups.iter_mut().flat_map(|g| g.measurements.iter_mut()) {
            m.samples.sort_by_key(|s| s.timestamp);
        }
        Ok(Self { groups, subject })
    }

    pub fn groups(&self) -> &[MeasurementGroup] {
        &self.groups
    }

    pub fn subject(&self) -> Option<&str> {
        self.subject.as_deref()
    }

    pub fn measurements(&self) -> impl Iterator<Item = &Measurement> {
        self.groups.iter().flat_map(|g| g.measurements.iter())
    }

    pub fn measurement(&self, id: &str) -> Option<&Measurement> {
        self.measurements().find(|m| m.id == id)
    }

    pub fn measurement_count(&self) -> usize {
        self.groups.iter().map(|g| g.measurements.len()).sum()
    }

    pub fn sample_count(&self) -> usize {
        self.measurements().map(|m| m.samples.len()).sum()
    }

    /// Every distinct sample timestamp, ascending.
    pub fn distinct_timestamps(&self) -> Vec<i64> {
        let set: BTreeSet<i64> = self
            .measurements()
            .flat_map(|m| m.samples.iter().map(|s| s.timestamp))
            .collect();
        set.into_iter().collect()
    }

    /// Earliest and latest sample timestamp.
    pub fn span(&self) -> (i64, i64) {
        let ts = self.distinct_timestamps();
        (ts[0], ts[ts.len() - 1])
    }

    pub fn into_parts(self) -> (Vec<MeasurementGroup>, Option<String>) {
        (self.groups, self.subject)
    }

    /// Canonical pretty-printed JSON; parsing it yields an equal dataset.
    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("dataset serializes");
        s.push('\n');
        s
    }
}

pub(crate) fn validate_groups(groups: &[MeasurementGroup], errors: &mut Vec<DatasetError>) {
    let root = JsonPath::root().key("groups");
    let mut group_labels: HashMap<&str, usize> = HashMap::new();
    let mut ids: HashMap<&str, JsonPath> = HashMap::new();
    for (gi, group) in groups.iter().enumerate() {
        let gpath = root.index(gi);
        if let Some(first) = group_labels.insert(&group.label, gi) {
            errors.push(DatasetError::Duplicate {
                path: gpath.key("label").to_string(),
                message: format!(
                    "group label {:?} already used by {}",
                    group.label,
                    root.index(first)
                ),
            });
        }
        if group.measurements.is_empty() {
            errors.push(DatasetError::schema(
                &gpath.key("measurements"),
                "must contain at least one measurement",
            ));
        }
        for (mi, m) in group.measurements.iter().enumerate() {
            let mpath = gpath.key("measurements").index(mi);
            if !is_valid_id(&m.id) {
                errors.push(DatasetError::schema(
                    &mpath.key("id"),
                    format!("id {:?} must match [a-z0-9_]+", m.id),
                ));
            }
            if let Some(first) = ids.get(m.id.as_str()) {
                errors.push(DatasetError::Duplicate {
                    path: mpath.key("id").to_string(),
                    message: format!("measurement id {:?} already used at {first}", m.id),
                });
            } else {
                ids.insert(&m.id, mpath.clone());
            }
            validate_ranges(&m.ranges, &mpath, errors);
            validate_samples(&m.samples, &mpath.key("samples"), errors);
        }
    }
}

fn validate_ranges(r: &RangeSet<f64>, mpath: &JsonPath, errors: &mut Vec<DatasetError>) {
    let bounds = [
        ("min", Some(r.rec_lo)),
        ("max", Some(r.rec_hi)),
        ("warning_min", r.warn_lo),
        ("warning_max", r.warn_hi),
    ];
    let mut finite = true;
    for (key, v) in bounds {
        if let Some(v) = v {
            if !v.is_finite() {
                finite = false;
                errors.push(DatasetError::schema(
                    &mpath.key(key),
                    "must be a finite number",
                ));
            }
        }
    }
    if !finite {
        return;
    }
    if r.rec_lo > r.rec_hi {
        errors.push(DatasetError::Range {
            path: mpath.key("min").to_string(),
            message: format!("min ({}) exceeds max ({})", r.rec_lo, r.rec_hi),
        });
    }
    if let Some(wlo) = r.warn_lo {
        if wlo > r.rec_lo {
            errors.push(DatasetError::Range {
                path: mpath.key("warning_min").to_string(),
                message: format!("warning_min ({wlo}) exceeds min ({})", r.rec_lo),
            });
        }
    }
    if let Some(whi) = r.warn_hi {
        if whi < r.rec_hi {
            errors.push(DatasetError::Range {
                path: mpath.key("warning_max").to_string(),
                message: format!("warning_max ({whi}) is below max ({})", r.rec_hi),
            });
        }
    }
}

fn validate_samples(samples: &[Sample], spath: &JsonPath, errors: &mut Vec<DatasetError>) {
    if samples.is_empty() {
        errors.push(DatasetError::schema(
            spath,
            "must contain at least one sample",
        ));
        return;
    }
    let mut seen: HashMap<i64, usize> = HashMap::new();
    for (si, s) in samples.iter().enumerate() {
        let p = spath.index(si);
        if s.timestamp < 0 {
            errors.push(DatasetError::schema(
                &p.key("timestamp"),
                "must be a non-negative integer",
            ));
        }
        if !s.value.is_finite() {
            errors.push(DatasetError::schema(
                &p.key("value"),
                "must be a finite number",
            ));
        }
        if let Some(first) = seen.insert(s.timestamp, si) {
            errors.push(DatasetError::Duplicate {
                path: p.key("timestamp").to_string(),
                message: format!(
                    "timestamp {} repeats {}",
                    s.timestamp,
                    spath.index(first).key("timestamp")
                ),
            });
        }
    }
}

pub(crate) fn is_valid_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
}

/// JSON path in `$.a[0].b` notation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JsonPath(String);

impl JsonPath {
    pub fn root() -> Self {
        JsonPath("$".to_owned())
    }

    pub fn key(&self, k: &str) -> Self {
        JsonPath(format!("{}.{k}", self.0))
    }

    pub fn index(&self, i: usize) -> Self {
        JsonPath(format!("{}[{i}]", self.0))
    }
}

impl fmt::Display for JsonPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Default)]
struct Walker {
    errors: Vec<DatasetError>,
}

impl Walker {
    fn fail(&mut self, path: &JsonPath, message: impl Into<String>) {
        self.errors.push(DatasetError::schema(path, message));
    }

    fn object<'v>(
        &mut self,
        v: &'v Value,
        path: &JsonPath,
        allowed: &[&str],
    ) -> Option<&'v Map<String, Value>> {
        let Some(obj) = v.as_object() else {
            self.fail(path, format!("expected an object, found {}", type_name(v)));
            return None;
        };
        for k in obj.keys() {
            if !allowed.contains(&k.as_str()) {
                self.fail(&path.key(k), "unknown key");
            }
        }
        Some(obj)
    }

    fn required<'v>(
        &mut self,
        obj: &'v Map<String, Value>,
        key: &str,
        path: &JsonPath,
    ) -> Option<&'v Value> {
        let v = obj.get(key);
        if v.is_none() {
            self.fail(&path.key(key), "missing required key");
        }
        v
    }

    fn string(&mut self, v: &Value, path: &JsonPath) -> Option<String> {
        match v.as_str() {
            Some(s) => Some(s.to_owned()),
            None => {
                self.fail(path, format!("expected a string, found {}", type_name(v)));
                None
            }
        }
    }

    fn number(&mut self, v: &Value, path: &JsonPath) -> Option<f64> {
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            Some(_) => {
                self.fail(path, "must be a finite number");
                None
            }
            None => {
                self.fail(path, format!("expected a number, found {}", type_name(v)));
                None
            }
        }
    }

    fn nonempty_array<'v>(
        &mut self,
        v: &'v Value,
        path: &JsonPath,
        what: &str,
    ) -> Option<&'v Vec<Value>> {
        match v.as_array() {
            Some(a) if a.is_empty() => {
                self.fail(path, format!("must contain at least one {what}"));
                None
            }
            Some(a) => Some(a),
            None => {
                self.fail(path, format!("expected an array, found {}", type_name(v)));
                None
            }
        }
    }

    fn document(
        &mut self,
        v: &Value,
        path: &JsonPath,
    ) -> Option<(Vec<MeasurementGroup>, Option<String>)> {
        let obj = self.object(v, path, &["groups", "subject"])?;
        let subject = obj
            .get("subject")
            .and_then(|s| self.string(s, &path.key("subject")));
        let gpath = path.key("groups");
        let groups = self.required(obj, "groups", path)?;
        let groups = self.nonempty_array(groups, &gpath, "group")?;
        let parsed: Vec<_> = groups
            .iter()
            .enumerate()
            .map(|(i, g)| self.group(g, &gpath.index(i)))
            .collect();
        let parsed: Option<Vec<_>> = parsed.into_iter().collect();
        Some((parsed?, subject))
    }

    fn group(&mut self, v: &Value, path: &JsonPath) -> Option<MeasurementGroup> {
        let obj = self.object(v, path, &["label", "measurements"])?;
        let label = self
            .required(obj, "label", path)
            .and_then(|l| self.string(l, &path.key("label")));
        let mpath = path.key("measurements");
        let ms = self
            .required(obj, "measurements", path)
            .and_then(|m| self.nonempty_array(m, &mpath, "measurement"));
        let ms: Option<Vec<_>> = ms.map(|ms| {
            ms.iter()
                .enumerate()
                .map(|(i, m)| self.measurement(m, &mpath.index(i)))
                .collect()
        });
        let ms: Option<Vec<_>> = ms?.into_iter().collect();
        Some(MeasurementGroup {
            label: label?,
            measurements: ms?,
        })
    }

    fn measurement(&mut self, v: &Value, path: &JsonPath) -> Option<Measurement> {
        const KEYS: &[&str] = &[
            "id",
            "label",
            "units",
            "min",
            "max",
            "warning_min",
            "warning_max",
            "samples",
        ];
        let obj = self.object(v, path, KEYS)?;
        let id = self
            .required(obj, "id", path)
            .and_then(|x| self.string(x, &path.key("id")));
        let label = self
            .required(obj, "label", path)
            .and_then(|x| self.string(x, &path.key("label")));
        let units = match obj.get("units") {
            Some(u) => self.string(u, &path.key("units")),
            None => Some(String::new()),
        };
        let lo = self
            .required(obj, "min", path)
            .and_then(|x| self.number(x, &path.key("min")));
        let hi = self
            .required(obj, "max", path)
            .and_then(|x| self.number(x, &path.key("max")));
        let mut optional = |key: &str| -> Result<Option<f64>, ()> {
            match obj.get(key) {
                None => Ok(None),
                Some(x) => self.number(x, &path.key(key)).map(Some).ok_or(()),
            }
        };
        let wlo = optional("warning_min");
        let whi = optional("warning_max");
        let spath = path.key("samples");
        let samples = self
            .required(obj, "samples", path)
            .and_then(|s| self.nonempty_array(s, &spath, "sample"));
        let samples: Option<Vec<_>> = samples.map(|ss| {
            ss.iter()
                .enumerate()
                .map(|(i, s)| self.sample(s, &spath.index(i)))
                .collect()
        });
        let samples: Option<Vec<_>> = samples?.into_iter().collect();
        Some(Measurement {
            id: id?,
            label: label?,
            units: units?,
            ranges: RangeSet {
                rec_lo: lo?,
                rec_hi: hi?,
                warn_lo: wlo.ok()?,
                warn_hi: whi.ok()?,
            },
            samples: samples?,
        })
    }

    fn sample(&mut self, v: &Value, path: &JsonPath) -> Option<Sample> {
        let obj = self.object(v, path, &["timestamp", "value"])?;
        let tpath = path.key("timestamp");
        let timestamp = self.required(obj, "timestamp", path).and_then(|t| {
            match t.as_u64().and_then(|t| i64::try_from(t).ok()) {
                Some(t) => Some(t),
                None => {
                    self.fail(
                        &tpath,
                        "must be a non-negative integer (seconds since 1970-01-01 UTC)",
                    );
                    None
                }
            }
        });
        let value = self
            .required(obj, "value", path)
            .and_then(|x| self.number(x, &path.key("value")));
        Some(Sample {
            timestamp: timestamp?,
            value: value?,
        })
    }
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

/// Converts epoch seconds to a UTC calendar datetime (proleptic Gregorian,
/// no leap seconds). `None` for negative or unrepresentable timestamps.
pub fn epoch_to_utc(timestamp: i64) -> Option<DateTime<Utc>> {
    if timestamp < 0 {
        return None;
    }
    DateTime::<Utc>::from_timestamp(timestamp, 0)
}

/// Inverse of [`epoch_to_utc`] for RFC 3339 strings with an explicit offset.
pub fn utc_to_epoch(text: &str) -> Option<i64> {
    DateTime::parse_from_rfc3339(text)
        .ok()
        .map(|d| d.timestamp())
}

/// `2015-01-09T10:10:24Z`; falls back to the raw number when out of range.
pub fn format_utc(timestamp: i64) -> String {
    match epoch_to_utc(timestamp) {
        Some(d) => d.to_rfc3339_opts(SecondsFormat::Secs, true),
        None => timestamp.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionPolicy {
    #[default]
    NearestAtOrBefore,
    Exact,
}

/// Picks the sample a snapshot at `t` shows for `m`.
pub fn select_sample(m: &Measurement, t: i64, policy: SelectionPolicy) -> Option<&Sample> {
    let after = m.samples.partition_point(|s| s.timestamp <= t);
    let candidate = after.checked_sub(1).map(|i| &m.samples[i])?;
    match policy {
        SelectionPolicy::NearestAtOrBefore => Some(candidate),
        SelectionPolicy::Exact => (candidate.timestamp == t).then_some(candidate),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SnapshotError {
    #[error("at least one snapshot timestamp is required")]
    Empty,
    #[error("snapshot timestamps must be strictly ascending ({prev} then {next})")]
    NotAscending { prev: i64, next: i64 },
    #[error("snapshot timestamps must be non-negative, got {0}")]
    Negative(i64),
    #[error("--latest must be at least 1")]
    ZeroLatest,
}

/// Which timestamps to draw and how samples are matched to them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SnapshotSpec {
    timestamps: Vec<i64>,
    policy: SelectionPolicy,
}

impl SnapshotSpec {
    pub fn new(timestamps: Vec<i64>, policy: SelectionPolicy) -> Result<Self, SnapshotError> {
        if timestamps.is_empty() {
            return Err(SnapshotError::Empty);
        }
        if let Some(&t) = timestamps.iter().find(|&&t| t < 0) {
            return Err(SnapshotError::Negative(t));
        }
        if let Some(w) = timestamps.windows(2).find(|w| w[0] >= w[1]) {
            return Err(SnapshotError::NotAscending {
                prev: w[0],
                next: w[1],
            });
        }
        Ok(Self { timestamps, policy })
    }

    /// The `n` most recent distinct sample timestamps across the dataset
    /// (fewer if the dataset has fewer).
    pub fn latest(
        dataset: &HealthDataset,
        n: usize,
        policy: SelectionPolicy,
    ) -> Result<Self, SnapshotError> {
        if n == 0 {
            return Err(SnapshotError::ZeroLatest);
        }
        let all = dataset.distinct_timestamps();
        let skip = all.len().saturating_sub(n);
        Self::new(all[skip..].to_vec(), policy)
    }

    pub fn timestamps(&self) -> &[i64] {
        &self.timestamps
    }

    pub fn policy(&self) -> SelectionPolicy {
        self.policy
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }
}
