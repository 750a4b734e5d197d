//! Six-cell hexagonal neighbourhood.

use serde::Deserialize;
use thiserror::Error;

pub const N_CELLS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
pub struct Position2D {
    pub x: f64,
    pub y: f64,
}

impl Position2D {
    pub const ORIGIN: Position2D = Position2D { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

pub fn distance(a: Position2D, b: Position2D) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeploymentError {
    #[error("ring radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("target cell {0} out of range 0..6")]
    BadCell(usize),
    #[error("non-finite position")]
    NonFinite,
}

/// Anchors, candidate target positions and the attacker.
///
/// `candidates[i]` is the target position for "in cell i" and coincides with
/// `anchors[i]`; link distances are clamped by the channel's minimum distance.
#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    pub anchors: [Position2D; N_CELLS],
    pub candidates: [Position2D; N_CELLS],
    pub center: Position2D,
    pub target_cell: usize,
    pub attacker_pos: Position2D,
}

impl Deployment {
    /// Anchors at 60 degree steps on a circle around the origin. The attacker
    /// starts at 80% of the way from the center to anchor 0.
    pub fn hex(ring_radius_m: f64) -> Result<Self, DeploymentError> {
        if !(ring_radius_m > 0.0) || !ring_radius_m.is_finite() {
            return Err(DeploymentError::NonPositiveRadius(ring_radius_m));
        }
        let anchors: [Position2D; N_CELLS] = std::array::from_fn(|k| {
            let a = (60.0 * k as f64).to_radians();
            Position2D::new(ring_radius_m * a.cos(), ring_radius_m * a.sin())
        });
        Ok(Self {
            anchors,
            candidates: anchors,
            center: Position2D::ORIGIN,
            target_cell: 0,
            attacker_pos: Position2D::new(0.8 * ring_radius_m, 0.0),
        })
    }

    pub fn with_attacker(mut self, pos: Position2D) -> Result<Self, DeploymentError> {
        if !pos.is_finite() {
            return Err(DeploymentError::NonFinite);
        }
        self.attacker_pos = pos;
        Ok(self)
    }

    pub fn with_target(mut self, cell: usize) -> Result<Self, DeploymentError> {
        if cell >= N_CELLS {
            return Err(DeploymentError::BadCell(cell));
        }
        self.target_cell = cell;
        Ok(self)
    }

    pub fn target_pos(&self) -> Position2D {
        self.candidates[self.target_cell]
    }

    /// Candidate cell closest to the attacker (lowest index on ties).
    pub fn cell_nearest_attacker(&self) -> usize {
        nearest(&self.candidates, self.attacker_pos)
    }
}

fn nearest(points: &[Position2D], p: Position2D) -> usize {
    let mut best = 0;
    for (i, q) in points.iter().enumerate() {
        if distance(*q, p) < distance(points[best], p) {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hex_geometry() {
        let d = Deployment::hex(5.0).unwrap();
        assert_eq!(d.anchors.len(), 6);
        assert_eq!(d.candidates.len(), 6);
        for k in 0..6 {
            assert!((distance(d.anchors[k], d.center) - 5.0).abs() < 1e-12);
            let next = d.anchors[(k + 1) % 6];
            assert!((distance(d.anchors[k], next) - 5.0).abs() < 1e-12);
        }
        assert_eq!(d.cell_nearest_attacker(), 0);
    }

    #[test]
    fn bad_radius() {
        assert!(Deployment::hex(0.0).is_err());
        assert!(Deployment::hex(-1.0).is_err());
        assert!(Deployment::hex(f64::NAN).is_err());
    }

    #[test]
    fn distances() {
        assert_eq!(
            distance(Position2D::new(0.0, 0.0), Position2D::new(3.0, 4.0)),
            5.0
        );
        let a = Position2D::new(1.5, -2.0);
        assert_eq!(distance(a, a), 0.0);
    }

    #[test]
    fn rotation_symmetry() {
        let d = Deployment::hex(5.0).unwrap();
        for t in 0..6 {
            for j in 0..6 {
                let a = distance(d.candidates[t], d.anchors[j]);
                let b = distance(d.candidates[(t + 1) % 6], d.anchors[(j + 1) % 6]);
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    proptest! {
        #[test]
        fn distance_symmetric(ax in -100.0f64..100.0, ay in -100.0f64..100.0, bx in -100.0f64..100.0, by in -100.0f64..100.0) {
            let (a, b) = (Position2D::new(ax, ay), Position2D::new(bx, by));
            prop_assert_eq!(distance(a, b), distance(b, a));
        }
    }
}
