//! Hexagonal multi-cell layout: BS and UE positions and per-link distance,
//! line-of-sight angle and large-scale gain.
//!
//! BS 0 (the desired cell) sits at the origin. Up to four neighbours sit at
//! adjacent hexagon centres, `√3·r2` away, in slot order
//! 30°, 330°, 150°, 210° (measured from the horizontal axis). Every UE is
//! `r1` from its own BS at its configured angle. Angles are stored in
//! radians and measured at the BS from the horizontal axis, which is also
//! the array axis.

use std::f64::consts::{PI, TAU};
use std::fmt;

use thiserror::Error;

pub const MAX_CELLS: usize = 5;

/// Directions of the neighbour BSs around BS 0, by slot 1..=4, in degrees.
pub const NEIGHBOUR_DIRECTIONS_DEG: [f64; MAX_CELLS - 1] = [30.0, 330.0, 150.0, 210.0];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("need between 1 and {MAX_CELLS} cells, got {0}")]
    CellCount(usize),
    #[error("cell id {0} is out of range or repeated")]
    CellId(usize),
    #[error("require 0 < r1 < r2, got r1 = {r1}, r2 = {r2}")]
    Radii { r1: f64, r2: f64 },
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("UE {ue} coincides with BS {bs}")]
    Degenerate { ue: usize, bs: usize },
}

/// A cell and the angle of its UE as seen from its BS.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellSpec {
    /// Layout slot: 0 is the desired cell at the origin.
    pub cell_id: usize,
    /// UE angle in degrees, normalised into `[0, 360)`.
    pub ue_angle_deg: f64,
}

impl CellSpec {
    pub fn new(cell_id: usize, ue_angle_deg: f64) -> Self {
        Self {
            cell_id,
            ue_angle_deg: ue_angle_deg.rem_euclid(360.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn polar(radius: f64, angle: f64) -> Self {
        Self {
            x: radius * angle.cos(),
            y: radius * angle.sin(),
        }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6}, {:.6})", self.x, self.y)
    }
}

/// Geometry of the link from UE `ue` to BS `bs` (indices into the cell
/// list, not slots).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkGeometry {
    pub ue: usize,
    pub bs: usize,
    /// Distance in metres.
    pub d: f64,
    /// Line-of-sight angle at the BS, radians in `[0, 2π)`.
    pub los_angle: f64,
    /// Large-scale gain `ζ / d^γ`.
    pub beta: f64,
    /// Angle at `bs` between its own UE and this UE, radians in `[0, π]`.
    /// `None` on serving links.
    pub delta_theta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    cells: Vec<CellSpec>,
    bs: Vec<Point>,
    ue: Vec<Point>,
    links: Vec<LinkGeometry>,
}

impl Layout {
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[CellSpec] {
        &self.cells
    }

    pub fn bs_positions(&self) -> &[Point] {
        &self.bs
    }

    pub fn ue_positions(&self) -> &[Point] {
        &self.ue
    }

    /// All `N²` links, ordered by `(ue, bs)`.
    pub fn links(&self) -> &[LinkGeometry] {
        &self.links
    }

    pub fn link(&self, ue: usize, bs: usize) -> &LinkGeometry {
        &self.links[ue * self.cells.len() + bs]
    }
}

/// Position of the BS in a layout slot.
pub fn bs_slot_position(slot: usize, r2: f64) -> Point {
    if slot == 0 {
        Point { x: 0.0, y: 0.0 }
    } else {
        Point::polar(3f64.sqrt() * r2, NEIGHBOUR_DIRECTIONS_DEG[slot - 1].to_radians())
    }
}

/// `ζ / d^γ`.
pub fn path_gain(d: f64, gamma: f64, zeta: f64) -> Result<f64, GeometryError> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(GeometryError::NonPositive { name: "distance", value: d });
    }
    Ok(zeta / d.powf(gamma))
}

/// Normalisation making the serving-link gain at distance `r1` equal one.
pub fn unit_gain_zeta(r1: f64, gamma: f64) -> f64 {
    r1.powf(gamma)
}

pub fn build_layout(
    cells: &[CellSpec],
    r1: f64,
    r2: f64,
    gamma: f64,
    zeta: f64,
) -> Result<Layout, GeometryError> {
    if cells.is_empty() || cells.len() > MAX_CELLS {
        return Err(GeometryError::CellCount(cells.len()));
    }
    let mut seen = [false; MAX_CELLS];
    for c in cells {
        if c.cell_id >= MAX_CELLS || seen[c.cell_id] {
            return Err(GeometryError::CellId(c.cell_id));
        }
        seen[c.cell_id] = true;
    }
    if !(r1 > 0.0 && r1 < r2 && r2.is_finite()) {
        return Err(GeometryError::Radii { r1, r2 });
    }
    for (name, value) in [("gamma", gamma), ("zeta", zeta)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(GeometryError::NonPositive { name, value });
        }
    }

    let cells: Vec<CellSpec> = cells.iter().map(|c| CellSpec::new(c.cell_id, c.ue_angle_deg)).collect();
    let bs: Vec<Point> = cells.iter().map(|c| bs_slot_position(c.cell_id, r2)).collect();
    let ue: Vec<Point> = cells
        .iter()
        .zip(&bs)
        .map(|(c, b)| {
            let p = Point::polar(r1, c.ue_angle_deg.to_radians());
            Point { x: b.x + p.x, y: b.y + p.y }
        })
        .collect();

    let n = cells.len();
    let mut links = Vec::with_capacity(n * n);
    for u in 0..n {
        for b in 0..n {
            let (d, los_angle) = if u == b {
                (r1, cells[u].ue_angle_deg.to_radians())
            } else {
                let dx = ue[u].x - bs[b].x;
                let dy = ue[u].y - bs[b].y;
                let d = dx.hypot(dy);
                if d <= 1e-9 * r1 {
                    return Err(GeometryError::Degenerate { ue: u, bs: b });
                }
                (d, dy.atan2(dx).rem_euclid(TAU))
            };
            let delta_theta = (u != b).then(|| {
                let own = cells[b].ue_angle_deg.to_radians();
                let diff = (los_angle - own).rem_euclid(TAU);
                if diff > PI {
                    TAU - diff
                } else {
                    diff
                }
            });
            links.push(LinkGeometry {
                ue: u,
                bs: b,
                d,
                los_angle,
                beta: path_gain(d, gamma, zeta)?,
                delta_theta,
            });
        }
    }
    Ok(Layout { cells, bs, ue, links })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cell(theta: f64) -> Layout {
        let cells = [CellSpec::new(0, 0.0), CellSpec::new(1, theta)];
        build_layout(&cells, 40.0, 50.0, 3.0, unit_gain_zeta(40.0, 3.0)).unwrap()
    }

    #[test]
    fn single_cell() {
        let l = build_layout(&[CellSpec::new(0, 75.0)], 40.0, 50.0, 3.0, 2.0).unwrap();
        assert_eq!(l.links().len(), 1);
        let s = l.link(0, 0);
        assert_eq!(s.d, 40.0);
        assert!((s.los_angle - 75f64.to_radians()).abs() < 1e-15);
        assert_eq!(s.beta, 2.0 / 64000.0);
        assert_eq!(s.delta_theta, None);
    }

    #[test]
    fn path_gain_examples() {
        assert_eq!(path_gain(40.0, 3.0, 40f64.powi(3)).unwrap(), 1.0);
        assert_eq!(path_gain(80.0, 3.0, 40f64.powi(3)).unwrap(), 0.125);
        assert_eq!(path_gain(40.0, 3.0, 1.0).unwrap(), 1.0 / 64000.0);
        assert!(path_gain(0.0, 3.0, 1.0).is_err());
        assert!(path_gain(-1.0, 3.0, 1.0).is_err());
    }

    #[test]
    fn angles_normalised() {
        assert_eq!(CellSpec::new(0, 360.0).ue_angle_deg, 0.0);
        assert_eq!(CellSpec::new(0, -20.0).ue_angle_deg, 340.0);
    }

    #[test]
    fn two_cell_cross_link_by_law_of_cosines() {
        let l = two_cell(200.0);
        assert_eq!(l.link(0, 0).d, 40.0);
        assert_eq!(l.link(1, 1).d, 40.0);
        // UE 1 to BS 0: BS 1 sits at distance s = √3·50 in direction 30°; the
        // UE is r1 = 40 from BS 1 at 200°. The angle at BS 1 between the
        // direction back to BS 0 (210°) and the UE (200°) is 10°.
        let s = 3f64.sqrt() * 50.0;
        let expected = (s * s + 1600.0 - 2.0 * s * 40.0 * 10f64.to_radians().cos()).sqrt();
        assert!((l.link(1, 0).d - expected).abs() < 1e-12);
        // UE 0 to BS 1: UE at (40, 0); angle at BS 0 between BS 1 (30°) and UE (0°) is 30°.
        let expected = (s * s + 1600.0 - 2.0 * s * 40.0 * 30f64.to_radians().cos()).sqrt();
        assert!((l.link(0, 1).d - expected).abs() < 1e-12);
        assert!((l.link(0, 1).beta - (40.0 / expected).powi(3)).abs() < 1e-15);
    }

    #[test]
    fn distances_match_coordinates() {
        let cells: Vec<CellSpec> = [0.0, 200.0, 160.0, 360.0, 60.0]
            .iter()
            .enumerate()
            .map(|(i, &a)| CellSpec::new(i, a))
            .collect();
        let l = build_layout(&cells, 40.0, 50.0, 3.0, 64000.0).unwrap();
        for link in l.links() {
            let d = l.ue_positions()[link.ue].distance(&l.bs_positions()[link.bs]);
            assert!((link.d - d).abs() < 1e-12);
        }
    }

    #[test]
    fn serving_link_dominates_on_every_angle() {
        for deg in 0..360 {
            let l = two_cell(deg as f64);
            for ue in 0..2 {
                let serving = l.link(ue, ue).beta;
                assert!(serving > l.link(ue, 1 - ue).beta, "theta {deg}");
            }
        }
    }

    #[test]
    fn gain_decreases_with_distance() {
        let mut prev = f64::INFINITY;
        for k in 1..200 {
            let g = path_gain(k as f64, 3.0, 1.0).unwrap();
            assert!(g < prev);
            prev = g;
        }
    }

    #[test]
    fn degenerate_and_invalid_inputs() {
        assert!(matches!(build_layout(&[], 40.0, 50.0, 3.0, 1.0), Err(GeometryError::CellCount(0))));
        assert!(matches!(
            build_layout(&[CellSpec::new(0, 0.0)], 50.0, 40.0, 3.0, 1.0),
            Err(GeometryError::Radii { .. })
        ));
        assert!(matches!(
            build_layout(&[CellSpec::new(0, 0.0), CellSpec::new(0, 5.0)], 40.0, 50.0, 3.0, 1.0),
            Err(GeometryError::CellId(0))
        ));
    }

    #[test]
    fn delta_theta_at_interfering_bs() {
        let l = two_cell(200.0);
        // at BS 1, UE 1 is at 200° and UE 0 at 180° + atan((50√3 sin30)/(50√3 cos30 - 40))
        let dt = l.link(0, 1).delta_theta.unwrap();
        let bs1 = l.bs_positions()[1];
        let back = (0.0 - bs1.y).atan2(40.0 - bs1.x).rem_euclid(TAU);
        assert!((dt - (back - 200f64.to_radians()).abs()).abs() < 1e-12);
    }
}
