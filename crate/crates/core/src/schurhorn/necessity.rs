use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::numkit::{convex_hull, hull_distance};

/// Entry of a diagonal lying outside the hull.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullViolation {
    pub index: usize,
    pub point: Complex64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NecessityReport {
    pub holds: bool,
    pub tol: f64,
    /// Largest distance from an entry to the hull.
    pub max_distance: f64,
    /// Entry attaining `max_distance`, when it exceeds `tol`.
    pub violation: Option<HullViolation>,
}

/// Whether every entry of `diag` lies within `tol` of the convex hull of
/// `spectrum`, the necessary condition for `diag` to be (approximately) the
/// diagonal of a unitary conjugate of a normal operator with that spectrum.
pub fn check_necessity(diag: &[Complex64], spectrum: &[Complex64], tol: f64) -> NecessityReport {
    let hull = convex_hull(spectrum);
    let mut worst: Option<HullViolation> = None;
    for (index, &point) in diag.iter().enumerate() {
        let distance = hull_distance(point, &hull);
        if worst.as_ref().map_or(true, |w| distance > w.distance) {
            worst = Some(HullViolation { index, point, distance });
        }
    }
    let max_distance = worst.as_ref().map_or(0.0, |w| w.distance);
    let holds = max_distance <= tol;
    NecessityReport { holds, tol, max_distance, violation: worst.filter(|_| !holds) }
}
