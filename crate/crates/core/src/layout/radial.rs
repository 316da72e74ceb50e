use super::{ColorClass, LayoutConfig};
use crate::data_model::RangeSet;
use crate::scalar::{half, Real};

/// Radius at which `value` is plotted.
///
/// Inside the recommended range the mapping is linear onto the band, with
/// `rec_lo` on the inner and `rec_hi` on the outer circumference. Outside it
/// the deviation is measured in units of the recommended span and clamped
/// at one span, which lands on `r_plot_max` (above) or `r_plot_min` (below).
/// A zero-width range plots its target at the band midpoint and measures
/// deviation against `max(|rec_lo|, 1)` instead.
pub fn value_to_radius<T: Real>(value: T, ranges: &RangeSet<T>, config: &LayoutConfig<T>) -> T {
    let (lo, hi) = (ranges.rec_lo, ranges.rec_hi);
    let (inner, outer) = (config.r_band_inner, config.r_band_outer);
    let span = hi - lo;
    let unit = if span > T::zero() {
        span
    } else {
        lo.abs().max(T::one())
    };

    if value > hi {
        let d = ((value - hi) / unit).min(T::one());
        (outer + d * (config.r_plot_max - outer)).min(config.r_plot_max)
    } else if value < lo {
        let d = ((lo - value) / unit).min(T::one());
        (inner - d * (inner - config.r_plot_min)).max(config.r_plot_min)
    } else if span <= T::zero() {
        (inner + outer) * half()
    } else if value == hi {
        outer
    } else {
        let t = (value - lo) / span;
        (inner + t * (outer - inner)).clamp(inner, outer)
    }
}

/// Traffic-light class of a value. Recommended bounds are green, warning
/// bounds yellow; a side without a warning bound goes straight to red.
pub fn classify<T: Real>(value: T, ranges: &RangeSet<T>) -> ColorClass {
    if value >= ranges.rec_lo && value <= ranges.rec_hi {
        ColorClass::Green
    } else if value < ranges.rec_lo {
        match ranges.warn_lo {
            Some(w) if value >= w => ColorClass::Yellow,
            _ => ColorClass::Red,
        }
    } else {
        match ranges.warn_hi {
            Some(w) if value <= w => ColorClass::Yellow,
            _ => ColorClass::Red,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> LayoutConfig<f64> {
        LayoutConfig {
            r_plot_min: 40.0,
            r_band_inner: 100.0,
            r_band_outer: 140.0,
            r_plot_max: 180.0,
            ..Default::default()
        }
    }

    #[test]
    fn examples() {
        let c = config();
        let r = RangeSet::recommended(60.0, 100.0);
        assert_eq!(value_to_radius(80.0, &r, &c), 120.0);
        assert_eq!(value_to_radius(60.0, &r, &c), 100.0);
        assert_eq!(value_to_radius(100.0, &r, &c), 140.0);
        assert_eq!(value_to_radius(120.0, &r, &c), 160.0);
        assert_eq!(value_to_radius(1e9, &r, &c), 180.0);
        assert_eq!(value_to_radius(40.0, &r, &c), 70.0);
        assert_eq!(value_to_radius(-1e9, &r, &c), 40.0);
    }

    #[test]
    fn zero_span_target() {
        let c = config();
        let r = RangeSet::recommended(0.0, 0.0);
        assert_eq!(value_to_radius(0.0, &r, &c), 120.0);
        // unit falls back to 1: five cigarettes are five spans off, clamped
        assert_eq!(value_to_radius(5.0, &r, &c), 180.0);
        assert_eq!(value_to_radius(0.5, &r, &c), 160.0);
        let r = RangeSet::recommended(8.0, 8.0);
        assert_eq!(value_to_radius(12.0, &r, &c), 160.0);
    }

    #[test]
    fn generic_over_f32() {
        let c = LayoutConfig::<f32> {
            r_plot_min: 40.0,
            r_band_inner: 100.0,
            r_band_outer: 140.0,
            r_plot_max: 180.0,
            ..Default::default()
        };
        let r = RangeSet::recommended(60.0f32, 100.0);
        assert_eq!(value_to_radius(80.0f32, &r, &c), 120.0);
        assert_eq!(classify(101.0f32, &r), ColorClass::Red);
    }

    #[test]
    fn classify_examples() {
        let r = RangeSet::recommended(60.0, 100.0);
        assert_eq!(classify(75.0, &r), ColorClass::Green);
        assert_eq!(classify(59.0, &r), ColorClass::Red);
        let w = r.with_warnings(Some(50.0), Some(110.0));
        assert_eq!(classify(105.0, &w), ColorClass::Yellow);
        assert_eq!(classify(115.0, &w), ColorClass::Red);
        assert_eq!(classify(110.0, &w), ColorClass::Yellow);
        assert_eq!(classify(100.0, &w), ColorClass::Green);
        assert_eq!(classify(50.0, &w), ColorClass::Yellow);
        let only_hi = r.with_warnings(None, Some(110.0));
        assert_eq!(classify(55.0, &only_hi), ColorClass::Red);
        assert_eq!(classify(105.0, &only_hi), ColorClass::Yellow);
    }
}
