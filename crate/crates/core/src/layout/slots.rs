use serde::Serialize;

use super::LayoutConfig;
use crate::data_model::HealthDataset;
use crate::scalar::{half, Real};

/// Angular extent of one group's measurements (its trailing gap excluded).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct SectorArc<T> {
    pub group_index: usize,
    pub first_slot: usize,
    pub slot_count: usize,
    pub start_angle: T,
    pub end_angle: T,
}

/// Equal-width slots around the circle: one per measurement and one empty
/// slot after each group.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct AngularSlotPlan<T> {
    pub total_slots: usize,
    pub slot_width: T,
    /// Slot index of every measurement, in dataset order.
    pub measurement_slots: Vec<usize>,
    /// Center angle of every measurement, in dataset order.
    pub measurement_angles: Vec<T>,
    pub gap_slots: Vec<usize>,
    pub sectors: Vec<SectorArc<T>>,
}

impl<T: Real> AngularSlotPlan<T> {
    /// Boundary angle before slot `index`.
    pub fn slot_start(&self, index: usize, config: &LayoutConfig<T>) -> T {
        config.start_angle + config.direction_sign() * T::of(index as f64) * self.slot_width
    }
}

pub fn compute_slots<T: Real>(
    dataset: &HealthDataset,
    config: &LayoutConfig<T>,
) -> AngularSlotPlan<T> {
    let sizes: Vec<usize> = dataset
        .groups()
        .iter()
        .map(|g| g.measurements.len())
        .collect();
    compute_slots_for_sizes(&sizes, config)
}

/// Slot plan for groups of the given sizes. Each size must be at least 1.
pub fn compute_slots_for_sizes<T: Real>(
    group_sizes: &[usize],
    config: &LayoutConfig<T>,
) -> AngularSlotPlan<T> {
    let total_slots: usize = group_sizes.iter().map(|n| n + 1).sum();
    let slot_width = super::tau::<T>() / T::of(total_slots as f64);
    let sign = config.direction_sign();
    let at = |slot: T| config.start_angle + sign * slot * slot_width;

    let mut plan = AngularSlotPlan {
        total_slots,
        slot_width,
        measurement_slots: Vec::new(),
        measurement_angles: Vec::new(),
        gap_slots: Vec::new(),
        sectors: Vec::new(),
    };
    let mut slot = 0;
    for (group_index, &size) in group_sizes.iter().enumerate() {
        plan.sectors.push(SectorArc {
            group_index,
            first_slot: slot,
            slot_count: size,
            start_angle: at(T::of(slot as f64)),
            end_angle: at(T::of((slot + size) as f64)),
        });
        for _ in 0..size {
            plan.measurement_slots.push(slot);
            plan.measurement_angles
                .push(at(T::of(slot as f64) + half()));
            slot += 1;
        }
        plan.gap_slots.push(slot);
        slot += 1;
    }
    plan
}
