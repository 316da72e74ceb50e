//! Bundled example files.

/// Modeled patient in a health-coaching program: nine groups, two snapshots
/// (2015-01-09T10:10:24Z and 2015-02-12T12:05:20Z).
pub const MODELED_PATIENT: &str = include_str!("../data/modeled_patient.json");

/// The blood-pressure group alone, the reference instance of the format.
pub const BLOOD_PRESSURE: &str = include_str!("../data/blood_pressure.json");

/// Maps the tracker `steps` metric onto `steps_per_day`.
pub const STEPS_MAPPING: &str = include_str!("../data/steps_mapping.json");

/// Activity-tracker response with a few days of activity records.
pub const TRACKER_ACTIVITIES: &str = include_str!("../data/tracker_activities.json");
