use std::cmp::Ordering;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Rational;
use crate::error::{Error, Result};

/// A point together with the vertex set whose convex hull it is tested against.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HullQuery {
    pub point: Complex64,
    pub vertices: Vec<Complex64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HullMembership {
    pub inside: bool,
    pub distance: f64,
    /// Present for three non-collinear vertices when the point is inside.
    pub barycentric: Option<Vec<f64>>,
}

fn cross(o: Complex64, a: Complex64, b: Complex64) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

/// Counter-clockwise convex hull (Andrew's monotone chain). Collinear input
/// yields its two extreme points; a single distinct point yields itself.
pub fn convex_hull(points: &[Complex64]) -> Vec<Complex64> {
    let mut pts: Vec<Complex64> = points.to_vec();
    pts.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap_or(Ordering::Equal).then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal)));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<Complex64> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Complex64> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Euclidean distance from `p` to the convex hull of `vertices` (0 inside).
pub fn hull_distance(p: Complex64, vertices: &[Complex64]) -> f64 {
    let hull = convex_hull(vertices);
    match hull.len() {
        0 => f64::INFINITY,
        1 => (p - hull[0]).norm(),
        2 => segment_distance(p, hull[0], hull[1]),
        m => {
            let inside = (0..m).all(|i| cross(hull[i], hull[(i + 1) % m], p) >= 0.0);
            if inside {
                0.0
            } else {
                (0..m).map(|i| segment_distance(p, hull[i], hull[(i + 1) % m])).fold(f64::INFINITY, f64::min)
            }
        }
    }
}

fn is_collinear(a: Complex64, b: Complex64, c: Complex64) -> bool {
    let scale = (b - a).norm_sqr().max((c - a).norm_sqr()).max((c - b).norm_sqr());
    scale == 0.0 || cross(a, b, c).abs() <= 1e-12 * scale
}

/// Barycentric coordinates of `p` with respect to a non-degenerate triangle.
/// Coordinates may be negative when the point lies outside.
pub fn barycentric_coordinates(p: Complex64, tri: [Complex64; 3]) -> Result<[f64; 3]> {
    let [a, b, c] = tri;
    if is_collinear(a, b, c) {
        return Err(Error::DegenerateHull);
    }
    let area = cross(a, b, c);
    let gb = cross(a, p, c) / area;
    let gc = cross(a, b, p) / area;
    Ok([1.0 - gb - gc, gb, gc])
}

/// Floating-point membership test: inside iff the point lies within `tol` of
/// the hull.
pub fn hull_membership(q: &HullQuery, tol: f64) -> Result<HullMembership> {
    if q.vertices.is_empty() {
        return Err(Error::InvalidInput("hull query with no vertices".into()));
    }
    let distance = hull_distance(q.point, &q.vertices);
    let inside = distance <= tol;
    let mut barycentric = None;
    if inside && q.vertices.len() == 3 {
        let tri = [q.vertices[0], q.vertices[1], q.vertices[2]];
        if let Ok(g) = barycentric_coordinates(q.point, tri) {
            if g.iter().all(|&x| x >= -tol) {
                barycentric = Some(g.to_vec());
            }
        }
    }
    Ok(HullMembership {
        inside,
        distance,
        barycentric,
    })
}

/// Complex number with exact rational parts; serializes as `["p/q", "p/q"]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExactComplex(pub Rational, pub Rational);

impl ExactComplex {
    pub fn new(re: Rational, im: Rational) -> Self {
        ExactComplex(re, im)
    }

    pub fn re(&self) -> &Rational {
        &self.0
    }

    pub fn im(&self) -> &Rational {
        &self.1
    }

    pub fn real(re: Rational) -> Self {
        ExactComplex(re, Rational::zero())
    }

    /// Rationalizes both parts at the given resolution.
    pub fn approximate(z: Complex64, tol: f64) -> Result<Self> {
        Ok(ExactComplex(Rational::approximate(z.re, tol)?, Rational::approximate(z.im, tol)?))
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.0.to_f64(), self.1.to_f64())
    }

    pub fn add(&self, o: &Self) -> Self {
        ExactComplex(&self.0 + &o.0, &self.1 + &o.1)
    }

    pub fn sub(&self, o: &Self) -> Self {
        ExactComplex(&self.0 - &o.0, &self.1 - &o.1)
    }

    pub fn scale(&self, s: &Rational) -> Self {
        ExactComplex(&self.0 * s, &self.1 * s)
    }
}

fn exact_cross(o: &ExactComplex, a: &ExactComplex, b: &ExactComplex) -> Rational {
    let (ax, ay) = (a.re() - o.re(), a.im() - o.im());
    let (bx, by) = (b.re() - o.re(), b.im() - o.im());
    &ax * &by - &ay * &bx
}

/// Result of the exact membership test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExactHullMembership {
    pub inside: bool,
    /// Present for three non-collinear vertices when the point is inside.
    pub barycentric: Option<Vec<Rational>>,
}

/// Exact counter-clockwise convex hull over rational points.
pub fn convex_hull_exact(points: &[ExactComplex]) -> Vec<ExactComplex> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.re().cmp(b.re()).then(a.im().cmp(b.im())));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let build = |iter: &mut dyn Iterator<Item = &ExactComplex>| {
        let mut chain: Vec<ExactComplex> = Vec::new();
        for p in iter {
            while chain.len() >= 2 && !exact_cross(&chain[chain.len() - 2], &chain[chain.len() - 1], p).is_positive() {
                chain.pop();
            }
            chain.push(p.clone());
        }
        chain.pop();
        chain
    };
    let mut lower = build(&mut pts.iter());
    let upper = build(&mut pts.iter().rev());
    lower.extend(upper);
    lower
}

fn exact_on_segment(p: &ExactComplex, a: &ExactComplex, b: &ExactComplex) -> bool {
    if !exact_cross(a, b, p).is_zero() {
        return false;
    }
    let within = |x: &Rational, lo: &Rational, hi: &Rational| {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        lo <= x && x <= hi
    };
    within(p.re(), a.re(), b.re()) && within(p.im(), a.im(), b.im())
}

/// Exact-rational membership test (no tolerance).
pub fn hull_membership_exact(point: &ExactComplex, vertices: &[ExactComplex]) -> Result<ExactHullMembership> {
    if vertices.is_empty() {
        return Err(Error::InvalidInput("hull query with no vertices".into()));
    }
    let hull = convex_hull_exact(vertices);
    let inside = match hull.len() {
        1 => point == &hull[0],
        2 => exact_on_segment(point, &hull[0], &hull[1]),
        m => (0..m).all(|i| !exact_cross(&hull[i], &hull[(i + 1) % m], point).is_negative()),
    };
    let mut barycentric = None;
    if inside && vertices.len() == 3 {
        if let Ok(g) = barycentric_exact(point, [&vertices[0], &vertices[1], &vertices[2]]) {
            barycentric = Some(g.to_vec());
        }
    }
    Ok(ExactHullMembership { inside, barycentric })
}

/// Exact barycentric coordinates with respect to a non-degenerate triangle.
pub fn barycentric_exact(p: &ExactComplex, tri: [&ExactComplex; 3]) -> Result<[Rational; 3]> {
    let [a, b, c] = tri;
    let area = exact_cross(a, b, c);
    if area.is_zero() {
        return Err(Error::DegenerateHull);
    }
    let gb = exact_cross(a, p, c) / area.clone();
    let gc = exact_cross(a, b, p) / area;
    let ga = Rational::one() - gb.clone() - gc.clone();
    Ok([ga, gb, gc])
}
