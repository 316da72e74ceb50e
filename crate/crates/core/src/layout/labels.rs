//! Label placement.
//!
//! Every measurement label is anchored radially just outside the farthest of
//! its plotted circles (`max(radii) + label_margin`), so it never starts on
//! top of its own data. Labels are then split into the four canvas quadrants
//! and, per quadrant, stacked outward from the horizontal axis: each label
//! keeps its natural height unless the previous one is too close, in which
//! case it is pushed away from the axis. Finally each box slides outward
//! horizontally past any obstacle (point circle, group label) in its row.

use serde::Serialize;

use super::{tau, LayoutConfig, LayoutError, PlottedPoint, Quadrant};
use crate::scalar::{half, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct Rect<T> {
    pub x: T,
    pub y: T,
    pub width: T,
    pub height: T,
}

impl<T: Real> Rect<T> {
    pub fn right(&self) -> T {
        self.x + self.width
    }

    pub fn bottom(&self) -> T {
        self.y + self.height
    }

    /// Open-interval overlap; touching edges do not intersect.
    pub fn intersects(&self, other: &Rect<T>) -> bool {
        self.x < other.right()
            && other.x < self.right()
            && self.y < other.bottom()
            && other.y < self.bottom()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle<T> {
    pub x: T,
    pub y: T,
    pub r: T,
}

impl<T: Real> Circle<T> {
    pub fn bounding_box(&self) -> Rect<T> {
        let d = self.r + self.r;
        Rect {
            x: self.x - self.r,
            y: self.y - self.r,
            width: d,
            height: d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TextAnchor {
    Start,
    End,
}

/// Input to [`place_labels`]: where a label wants to go and how big it is.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelAnchor<T> {
    pub measurement_id: String,
    pub angle: T,
    pub label_radius: T,
    pub width: T,
    pub height: T,
    pub lines: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct PlacedLabel<T> {
    pub measurement_id: String,
    pub lines: Vec<String>,
    pub quadrant: Quadrant,
    pub angle: T,
    pub label_radius: T,
    /// Screen position of the radial anchor (`angle`, `label_radius`).
    pub anchor: (T, T),
    pub bbox: Rect<T>,
    pub text_anchor: TextAnchor,
}

/// Largest radius among a measurement's present points plus the label
/// margin. A measurement with nothing plotted anchors at the outer band.
pub fn label_radius<'a, T: Real>(
    points: impl IntoIterator<Item = &'a PlottedPoint<T>>,
    config: &LayoutConfig<T>,
) -> T {
    points
        .into_iter()
        .filter(|p| p.present)
        .map(|p| p.radius)
        .reduce(T::max)
        .unwrap_or(config.r_band_outer)
        + config.label_margin
}

/// Quadrant of a screen angle. Ties on the horizontal axis go to the upper
/// quadrant, ties on the vertical axis to the eastern one.
pub fn quadrant_of<T: Real>(angle: T) -> Quadrant {
    let full = tau::<T>();
    let mut a = angle % full;
    if a < T::zero() {
        a = a + full;
    }
    let right = T::FRAC_PI_2();
    if a == T::zero() || a >= right * T::of(3.0) {
        Quadrant::NE
    } else if a <= right {
        Quadrant::SE
    } else if a < T::PI() {
        Quadrant::SW
    } else {
        Quadrant::NW
    }
}

/// Distances from the horizontal axis for labels sorted by natural
/// distance: each center is at least `(h_prev + h) / 2 + margin` beyond the
/// previous one and every box clears the axis by `margin / 2`.
pub fn stack_outward<T: Real>(items: &[(T, T)], margin: T) -> Vec<T> {
    let mut out = Vec::with_capacity(items.len());
    let mut prev: Option<(T, T)> = None;
    for &(natural, height) in items {
        let mut y = natural.max(height * half() + margin * half());
        if let Some((py, ph)) = prev {
            y = y.max(py + (ph + height) * half() + margin);
        }
        out.push(y);
        prev = Some((y, height));
    }
    out
}

pub fn place_labels<T: Real>(
    anchors: &[LabelAnchor<T>],
    obstacles: &[Rect<T>],
    config: &LayoutConfig<T>,
) -> Result<Vec<PlacedLabel<T>>, LayoutError> {
    let (cx, cy) = config.center();
    let size = config.canvas_size;
    let gap = config.label_offset_x;
    let mut placed: Vec<Option<PlacedLabel<T>>> = vec![None; anchors.len()];

    for quadrant in [Quadrant::NE, Quadrant::NW, Quadrant::SE, Quadrant::SW] {
        let mut members: Vec<(usize, T)> = anchors
            .iter()
            .enumerate()
            .filter(|(_, a)| quadrant_of(a.angle) == quadrant)
            .map(|(i, a)| {
                let dy = a.label_radius * a.angle.sin();
                (i, if quadrant.is_upper() { -dy } else { dy })
            })
            .collect();
        members.sort_by(|a, b| {
            a.1.partial_cmp(&b.1)
                .expect("finite label positions")
                .then(a.0.cmp(&b.0))
        });
        let items: Vec<(T, T)> = members
            .iter()
            .map(|&(i, y)| (y, anchors[i].height))
            .collect();
        let stacked = stack_outward(&items, config.label_margin);

        for (&(i, _), offset) in members.iter().zip(stacked) {
            let a = &anchors[i];
            let center_y = if quadrant.is_upper() {
                cy - offset
            } else {
                cy + offset
            };
            let top = center_y - a.height * half();
            let bottom = top + a.height;
            if top < T::zero() || bottom > size {
                return Err(overflow(a, quadrant, offset + a.height * half(), cy));
            }
            let in_row = obstacles
                .iter()
                .filter(|o| o.y - gap < bottom && o.bottom() + gap > top);
            let dx = a.label_radius * a.angle.cos();
            let (x, text_anchor) = if quadrant.is_east() {
                let left = in_row.fold(cx + dx.max(T::zero()) + gap, |l, o| l.max(o.right() + gap));
                (left, TextAnchor::Start)
            } else {
                let right = in_row.fold(cx + dx.min(T::zero()) - gap, |r, o| r.min(o.x - gap));
                (right - a.width, TextAnchor::End)
            };
            if x < T::zero() || x + a.width > size {
                let needed = if quadrant.is_east() {
                    x + a.width - cx
                } else {
                    cx - x
                };
                return Err(overflow(a, quadrant, needed, cx));
            }
            placed[i] = Some(PlacedLabel {
                measurement_id: a.measurement_id.clone(),
                lines: a.lines.clone(),
                quadrant,
                angle: a.angle,
                label_radius: a.label_radius,
                anchor: config.polar_to_cartesian(a.angle, a.label_radius),
                bbox: Rect {
                    x,
                    y: top,
                    width: a.width,
                    height: a.height,
                },
                text_anchor,
            });
        }
    }
    Ok(placed
        .into_iter()
        .map(|p| p.expect("every label lands in one quadrant"))
        .collect())
}

fn overflow<T: Real>(
    a: &LabelAnchor<T>,
    quadrant: Quadrant,
    needed: T,
    available: T,
) -> LayoutError {
    LayoutError::Overflow {
        measurement_id: a.measurement_id.clone(),
        quadrant,
        needed: needed.to_f64_lossy(),
        available: available.to_f64_lossy(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn config() -> LayoutConfig<f64> {
        LayoutConfig {
            label_margin: 2.0,
            ..Default::default()
        }
    }

    fn anchor_at(id: &str, dx: f64, up: f64, height: f64) -> LabelAnchor<f64> {
        LabelAnchor {
            measurement_id: id.into(),
            angle: (-up).atan2(dx),
            label_radius: dx.hypot(up),
            width: 40.0,
            height,
            lines: vec![id.into()],
        }
    }

    fn outward(label: &PlacedLabel<f64>, c: &LayoutConfig<f64>) -> f64 {
        c.center().1 - (label.bbox.y + label.bbox.height / 2.0)
    }

    #[test]
    fn stacks_three_ne_labels() {
        let c = config();
        let anchors = [
            anchor_at("a", 100.0, 10.0, 12.0),
            anchor_at("b", 100.0, 14.0, 12.0),
            anchor_at("c", 100.0, 40.0, 12.0),
        ];
        let placed = place_labels(&anchors, &[], &c).unwrap();
        let ys: Vec<f64> = placed.iter().map(|l| outward(l, &c)).collect();
        for (got, want) in ys.iter().zip([10.0, 24.0, 40.0]) {
            assert!((got - want).abs() < 1e-9, "{ys:?}");
        }
        assert!(placed.iter().all(|l| l.quadrant == Quadrant::NE));
        for i in 0..3 {
            for j in i + 1..3 {
                assert!(!placed[i].bbox.intersects(&placed[j].bbox));
            }
        }
    }

    #[test]
    fn stack_outward_direct() {
        let ys = stack_outward(&[(10.0, 12.0), (14.0, 12.0), (40.0, 12.0)], 2.0);
        assert_eq!(ys, [10.0, 24.0, 40.0]);
        // near the axis the box is lifted clear of it
        assert_eq!(stack_outward(&[(0.0, 12.0)], 2.0), [7.0]);
    }

    #[test]
    fn single_label_stays_put() {
        let c = config();
        for (dx, up) in [(120.0, 50.0), (-80.0, 60.0), (90.0, -30.0), (-60.0, -200.0)] {
            let placed = place_labels(&[anchor_at("x", dx, up, 12.0)], &[], &c).unwrap();
            assert!((outward(&placed[0], &c) - up).abs() < 1e-9);
            let (cx, _) = c.center();
            let edge = if dx > 0.0 {
                placed[0].bbox.x - c.label_offset_x
            } else {
                placed[0].bbox.right() + c.label_offset_x
            };
            assert!((edge - (cx + dx)).abs() < 1e-9);
        }
    }

    #[test]
    fn quadrants_and_ties() {
        assert_eq!(quadrant_of(0.0), Quadrant::NE);
        assert_eq!(quadrant_of(-0.1), Quadrant::NE);
        assert_eq!(quadrant_of(0.1), Quadrant::SE);
        assert_eq!(quadrant_of(FRAC_PI_2), Quadrant::SE);
        assert_eq!(quadrant_of(FRAC_PI_2 + 0.1), Quadrant::SW);
        assert_eq!(quadrant_of(PI), Quadrant::NW);
        assert_eq!(quadrant_of(-FRAC_PI_2 - 0.1), Quadrant::NW);
        assert_eq!(quadrant_of(3.0 * FRAC_PI_2), Quadrant::NE);
        assert_eq!(quadrant_of(2.0 * PI + 0.1), Quadrant::SE);
    }

    #[test]
    fn pushed_past_circles_in_its_row() {
        let c = config();
        let (cx, cy) = c.center();
        let a = anchor_at("s", 150.0, 20.0, 12.0);
        let blocker = Circle {
            x: cx + 170.0,
            y: cy - 20.0,
            r: 5.0,
        };
        let placed = place_labels(&[a], &[blocker.bounding_box()], &c).unwrap();
        assert!(!placed[0].bbox.intersects(&blocker.bounding_box()));
        assert!(placed[0].bbox.x >= blocker.x + blocker.r);
    }

    #[test]
    fn overflow_when_stack_leaves_canvas() {
        let c = config().with_canvas_size(200.0);
        let anchors: Vec<_> = (0..20)
            .map(|i| anchor_at(&format!("l{i}"), 10.0, 1.0 + i as f64, 12.0))
            .collect();
        assert!(matches!(
            place_labels(&anchors, &[], &c),
            Err(LayoutError::Overflow { .. })
        ));
    }
}
