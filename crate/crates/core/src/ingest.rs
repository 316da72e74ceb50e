//! Activity-tracker ingestion: turns tracker payloads into dataset fragments
//! and merges fragments into datasets.

use std::collections::{BTreeMap, HashMap};

use chrono::DateTime;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::data_model::{
    is_valid_id, validate_groups, DatasetError, HealthDataset, Measurement, MeasurementGroup,
    RangeSet, Sample,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IngestError {
    #[error("malformed tracker payload: {0}")]
    Payload(String),
    #[error("entry {entry}: cannot parse start time {raw:?}: {message}")]
    TimeParse {
        entry: usize,
        raw: String,
        message: String,
    },
    #[error("mapping for metric {metric:?}: {message}")]
    Mapping { metric: String, message: String },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("conflict on measurement {id:?}: {message}")]
    Conflict { id: String, message: String },
}

/// One tracker record: a start time and its numeric properties.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackerEntry {
    pub timestamp: i64,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrackerPayload {
    pub entries: Vec<TrackerEntry>,
}

impl TrackerPayload {
    /// Accepts `{"activities": [...]}` (the activity-tracker response shape)
    /// or a bare array of entries. Each entry needs `startTime` (or
    /// `start_time`): an RFC 3339 string with an explicit offset, or epoch
    /// seconds. Every other numeric property is a metric; non-numeric
    /// properties such as `name` are ignored.
    pub fn from_json(text: &str) -> Result<Self, IngestError> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| IngestError::Payload(e.to_string()))?;
        let entries = match &value {
            Value::Array(a) => a,
            Value::Object(o) => match o.get("activities") {
                Some(Value::Array(a)) => a,
                _ => {
                    return Err(IngestError::Payload(
                        "expected an \"activities\" array".into(),
                    ))
                }
            },
            _ => {
                return Err(IngestError::Payload(
                    "expected an object or an array".into(),
                ))
            }
        };
        let entries = entries
            .iter()
            .enumerate()
            .map(|(i, e)| parse_entry(i, e))
            .collect::<Result<_, _>>()?;
        Ok(Self { entries })
    }
}

fn parse_entry(index: usize, entry: &Value) -> Result<TrackerEntry, IngestError> {
    let obj = entry
        .as_object()
        .ok_or_else(|| IngestError::Payload(format!("entry {index} is not an object")))?;
    let time_key = ["startTime", "start_time"]
        .into_iter()
        .find(|k| obj.contains_key(*k));
    let Some(time_key) = time_key else {
        return Err(IngestError::TimeParse {
            entry: index,
            raw: String::new(),
            message: "missing startTime".into(),
        });
    };
    let timestamp = parse_time(index, &obj[time_key])?;
    let metrics = obj
        .iter()
        .filter(|(k, _)| k.as_str() != time_key)
        .filter_map(|(k, v)| v.as_f64().map(|x| (k.clone(), x)))
        .collect();
    Ok(TrackerEntry { timestamp, metrics })
}

/// Epoch seconds from an RFC 3339 string or a non-negative integer. Local
/// times without an offset are rejected.
pub fn parse_time(entry: usize, raw: &Value) -> Result<i64, IngestError> {
    let fail = |raw: String, message: &str| IngestError::TimeParse {
        entry,
        raw,
        message: message.to_owned(),
    };
    match raw {
        Value::Number(n) => match n.as_u64().and_then(|t| i64::try_from(t).ok()) {
            Some(t) => Ok(t),
            None => Err(fail(
                n.to_string(),
                "epoch time must be a non-negative integer",
            )),
        },
        Value::String(s) => match DateTime::parse_from_rfc3339(s) {
            Ok(d) if d.timestamp() >= 0 => Ok(d.timestamp()),
            Ok(_) => Err(fail(s.clone(), "time precedes 1970-01-01T00:00:00Z")),
            Err(e) => Err(fail(
                s.clone(),
                &format!(
                    "{e}; expected RFC 3339 with an explicit offset, e.g. 2015-01-09T10:10:24Z"
                ),
            )),
        },
        other => Err(fail(other.to_string(), "expected a string or an integer")),
    }
}

/// Where one tracker metric lands in the data source.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricTarget {
    pub group: String,
    pub id: String,
    pub label: String,
    pub units: String,
    #[serde(flatten)]
    pub ranges: RangeSet<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricMapping {
    pub metrics: BTreeMap<String, MetricTarget>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMapping {
    metrics: BTreeMap<String, RawTarget>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTarget {
    group: Option<String>,
    id: Option<String>,
    label: Option<String>,
    units: Option<String>,
    min: Option<f64>,
    max: Option<f64>,
    warning_min: Option<f64>,
    warning_max: Option<f64>,
}

impl MetricMapping {
    /// Parses a mapping file:
    /// `{"metrics": {"steps": {"group": …, "id": …, "label": …, "units": …,
    /// "min": …, "max": …, "warning_min"?: …, "warning_max"?: …}}}`.
    pub fn from_json(text: &str) -> Result<Self, IngestError> {
        let raw: RawMapping = serde_json::from_str(text).map_err(|e| IngestError::Mapping {
            metric: String::new(),
            message: e.to_string(),
        })?;
        let mut metrics = BTreeMap::new();
        for (metric, t) in raw.metrics {
            let missing = |field: &str| IngestError::Mapping {
                metric: metric.clone(),
                message: format!("missing {field}"),
            };
            let target = MetricTarget {
                group: t.group.ok_or_else(|| missing("group"))?,
                id: t.id.ok_or_else(|| missing("id"))?,
                label: t.label.ok_or_else(|| missing("label"))?,
                units: t.units.ok_or_else(|| missing("units"))?,
                ranges: RangeSet {
                    rec_lo: t.min.ok_or_else(|| missing("min"))?,
                    rec_hi: t.max.ok_or_else(|| missing("max"))?,
                    warn_lo: t.warning_min,
                    warn_hi: t.warning_max,
                },
            };
            if !is_valid_id(&target.id) {
                return Err(IngestError::Mapping {
                    metric,
                    message: format!("id {:?} must match [a-z0-9_]+", target.id),
                });
            }
            metrics.insert(metric, target);
        }
        Ok(Self { metrics })
    }
}

/// Validated groups that need not form a complete dataset (may be empty).
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct DatasetFragment {
    groups: Vec<MeasurementGroup>,
}

impl DatasetFragment {
    pub fn new(mut groups: Vec<MeasurementGroup>) -> Result<Self, DatasetError> {
        let mut errors = Vec::new();
        validate_groups(&groups, &mut errors);
        if let Some(e) = errors.into_iter().next() {
            return Err(e);
        }
        for m in groups.iter_mut().flat_map(|g| g.measurements.iter_mut()) {
            m.samples.sort_by_key(|s| s.timestamp);
        }
        Ok(Self { groups })
    }

    pub fn groups(&self) -> &[MeasurementGroup] {
        &self.groups
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Union of two fragments under the same rules as [`merge`].
    pub fn merge(&self, other: &DatasetFragment) -> Result<DatasetFragment, IngestError> {
        Ok(Self {
            groups: merge_groups(self.groups.clone(), &other.groups)?,
        })
    }
}

impl From<HealthDataset> for DatasetFragment {
    fn from(ds: HealthDataset) -> Self {
        Self {
            groups: ds.into_parts().0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestOutcome {
    pub fragment: DatasetFragment,
    /// Metrics present in the payload without a mapping, with occurrence counts.
    pub unmapped: BTreeMap<String, usize>,
}

/// Builds one measurement per mapped metric with one sample per entry that
/// carries it.
pub fn tracker_to_samples(
    payload: &TrackerPayload,
    mapping: &MetricMapping,
) -> Result<IngestOutcome, IngestError> {
    let mut unmapped: BTreeMap<String, usize> = BTreeMap::new();
    let mut by_metric: BTreeMap<&str, Vec<Sample>> = BTreeMap::new();
    for entry in &payload.entries {
        for (name, &value) in &entry.metrics {
            if mapping.metrics.contains_key(name) {
                by_metric.entry(name).or_default().push(Sample {
                    timestamp: entry.timestamp,
                    value,
                });
            } else {
                *unmapped.entry(name.clone()).or_default() += 1;
            }
        }
    }
    let mut groups: Vec<MeasurementGroup> = Vec::new();
    for (metric, samples) in by_metric {
        let t = &mapping.metrics[metric];
        let m = Measurement {
            id: t.id.clone(),
            label: t.label.clone(),
            units: t.units.clone(),
            ranges: t.ranges,
            samples,
        };
        match groups.iter_mut().find(|g| g.label == t.group) {
            Some(g) => g.measurements.push(m),
            None => groups.push(MeasurementGroup {
                label: t.group.clone(),
                measurements: vec![m],
            }),
        }
    }
    Ok(IngestOutcome {
        fragment: DatasetFragment::new(groups)?,
        unmapped,
    })
}

/// Adds the fragment's samples and measurements to `base`. Samples are
/// unioned per measurement id; new measurements join their group (created at
/// the end if new). A measurement whose group, label, units or ranges differ
/// from the base, or a timestamp carrying two different values, is a conflict.
pub fn merge(
    base: &HealthDataset,
    fragment: &DatasetFragment,
) -> Result<HealthDataset, IngestError> {
    let (groups, subject) = base.clone().into_parts();
    let groups = merge_groups(groups, &fragment.groups)?;
    HealthDataset::new(groups, subject).map_err(|mut e| IngestError::Dataset(e.swap_remove(0)))
}

fn merge_groups(
    mut base: Vec<MeasurementGroup>,
    other: &[MeasurementGroup],
) -> Result<Vec<MeasurementGroup>, IngestError> {
    let mut index: HashMap<String, (usize, usize)> = HashMap::new();
    for (gi, g) in base.iter().enumerate() {
        for (mi, m) in g.measurements.iter().enumerate() {
            index.insert(m.id.clone(), (gi, mi));
        }
    }
    for group in other {
        for m in &group.measurements {
            if let Some(&(gi, mi)) = index.get(&m.id) {
                let conflict = |message: String| IngestError::Conflict {
                    id: m.id.clone(),
                    message,
                };
                if base[gi].label != group.label {
                    return Err(conflict(format!(
                        "belongs to group {:?}, not {:?}",
                        base[gi].label, group.label
                    )));
                }
                let existing = &mut base[gi].measurements[mi];
                if existing.ranges != m.ranges {
                    return Err(conflict(format!(
                        "ranges {:?} differ from existing {:?}",
                        m.ranges, existing.ranges
                    )));
                }
                if existing.label != m.label || existing.units != m.units {
                    return Err(conflict("label or units differ from existing".into()));
                }
                for s in &m.samples {
                    match existing
                        .samples
                        .binary_search_by_key(&s.timestamp, |e| e.timestamp)
                    {
                        Ok(i) if existing.samples[i].value == s.value => {}
                        Ok(i) => {
                            return Err(conflict(format!(
                                "timestamp {} has values {} and {}",
                                s.timestamp, existing.samples[i].value, s.value
                            )))
                        }
                        Err(i) => existing.samples.insert(i, *s),
                    }
                }
            } else {
                let gi = match base.iter().position(|g| g.label == group.label) {
                    Some(gi) => gi,
                    None => {
                        base.push(MeasurementGroup {
                            label: group.label.clone(),
                            measurements: vec![],
                        });
                        base.len() - 1
                    }
                };
                base[gi].measurements.push(m.clone());
                index.insert(m.id.clone(), (gi, base[gi].measurements.len() - 1));
            }
        }
    }
    Ok(base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data_model::parse_dataset;

    const MAPPING: &str = r#"{"metrics": {"steps": {"group": "Physical activity", "id": "steps_per_day",
        "label": "Steps per day", "units": "steps", "min": 7500, "max": 12500, "warning_min": 5000}}}"#;

    #[test]
    fn steps_entry_becomes_sample() {
        let payload = TrackerPayload::from_json(
            r#"{"activities": [{"startTime": "2015-01-09T10:10:24Z", "steps": 8500, "distance": 6.1, "name": "Walk"}]}"#,
        )
        .unwrap();
        let mapping = MetricMapping::from_json(MAPPING).unwrap();
        let out = tracker_to_samples(&payload, &mapping).unwrap();
        let g = &out.fragment.groups()[0];
        assert_eq!(g.label, "Physical activity");
        assert_eq!(
            g.measurements[0].samples,
            [Sample {
                timestamp: 1420798224,
                value: 8500.0
            }]
        );
        assert_eq!(out.unmapped.get("distance"), Some(&1));
        assert!(!out.unmapped.contains_key("name"));
    }

    #[test]
    fn nothing_mapped_gives_empty_fragment() {
        let payload = TrackerPayload::from_json(
            r#"[{"startTime": 1420798224, "floors": 3, "calories": 2100}]"#,
        )
        .unwrap();
        let out = tracker_to_samples(&payload, &MetricMapping::default()).unwrap();
        assert!(out.fragment.is_empty());
        assert_eq!(out.unmapped.len(), 2);
    }

    #[test]
    fn same_second_twice_is_duplicate() {
        let payload = TrackerPayload::from_json(
            r#"[{"startTime": "2015-01-09T10:10:24Z", "steps": 1}, {"startTime": "2015-01-09T11:10:24+01:00", "steps": 2}]"#,
        )
        .unwrap();
        let mapping = MetricMapping::from_json(MAPPING).unwrap();
        let err = tracker_to_samples(&payload, &mapping).unwrap_err();
        assert!(
            matches!(err, IngestError::Dataset(DatasetError::Duplicate { .. })),
            "{err}"
        );
    }

    #[test]
    fn times_need_an_offset() {
        for bad in [
            r#""2015-01-09T10:10:24""#,
            r#""2015-01-09""#,
            r#""yesterday""#,
            "-5",
            "1.5",
        ] {
            let err =
                TrackerPayload::from_json(&format!(r#"[{{"startTime": {bad}, "steps": 1}}]"#))
                    .unwrap_err();
            assert!(matches!(err, IngestError::TimeParse { .. }), "{bad}: {err}");
        }
    }

    #[test]
    fn mapping_requires_units_and_ranges() {
        let err = MetricMapping::from_json(
            r#"{"metrics": {"steps": {"group": "P", "id": "s", "label": "S", "min": 1, "max": 2}}}"#,
        )
        .unwrap_err();
        assert!(
            matches!(err, IngestError::Mapping { ref message, .. } if message == "missing units")
        );
        let err = MetricMapping::from_json(
            r#"{"metrics": {"steps": {"group": "P", "id": "s", "label": "S", "units": "u", "min": 1}}}"#,
        )
        .unwrap_err();
        assert!(
            matches!(err, IngestError::Mapping { ref message, .. } if message == "missing max")
        );
    }

    fn base() -> HealthDataset {
        parse_dataset(
            r#"{"groups":[{"label":"Physical activity","measurements":[
            {"id":"steps_per_day","label":"Steps per day","units":"steps","min":7500,"max":12500,"warning_min":5000,
             "samples":[{"timestamp":100,"value":6000},{"timestamp":300,"value":9000}]}]}]}"#,
        )
        .unwrap()
    }

    fn fragment(json: &str) -> DatasetFragment {
        let (groups, _) = parse_dataset(json).unwrap().into_parts();
        DatasetFragment::new(groups).unwrap()
    }

    #[test]
    fn merge_sorted_union_and_new_measurement() {
        let frag = fragment(
            r#"{"groups":[{"label":"Physical activity","measurements":[
            {"id":"steps_per_day","label":"Steps per day","units":"steps","min":7500,"max":12500,"warning_min":5000,
             "samples":[{"timestamp":200,"value":7000},{"timestamp":300,"value":9000}]},
            {"id":"active_days","label":"Active days","units":"days/week","min":3,"max":7,
             "samples":[{"timestamp":200,"value":2}]}]}]}"#,
        );
        let merged = merge(&base(), &frag).unwrap();
        assert_eq!(merged.groups()[0].measurements.len(), 2);
        let ts: Vec<_> = merged.groups()[0].measurements[0]
            .samples
            .iter()
            .map(|s| s.timestamp)
            .collect();
        assert_eq!(ts, [100, 200, 300]);
    }

    #[test]
    fn merge_rejects_redefined_range() {
        let frag = fragment(
            r#"{"groups":[{"label":"Physical activity","measurements":[
            {"id":"steps_per_day","label":"Steps per day","units":"steps","min":10000,"max":12500,"warning_min":5000,
             "samples":[{"timestamp":200,"value":7000}]}]}]}"#,
        );
        let err = merge(&base(), &frag).unwrap_err();
        assert!(matches!(err, IngestError::Conflict { ref id, .. } if id == "steps_per_day"));
    }

    #[test]
    fn merge_rejects_conflicting_values() {
        let frag = fragment(
            r#"{"groups":[{"label":"Physical activity","measurements":[
            {"id":"steps_per_day","label":"Steps per day","units":"steps","min":7500,"max":12500,"warning_min":5000,
             "samples":[{"timestamp":300,"value":1}]}]}]}"#,
        );
        assert!(matches!(
            merge(&base(), &frag),
            Err(IngestError::Conflict { .. })
        ));
    }
}
