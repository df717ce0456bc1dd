use super::normalize::{distance, idx};
use crate::dataset::{LandmarkFrame, Point};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MouthGeometry {
    pub width: f64,
    pub height: f64,
    pub area: f64,
    pub area_right: f64,
    pub area_left: f64,
    pub eccentricity: f64,
    /// The outer lip contour crosses itself; areas are absolute values.
    pub self_intersecting: bool,
}

/// Absolute shoelace area of the polygon through `points` (x–y plane).
pub fn shoelace(points: &[Point]) -> f64 {
    let n = points.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let (a, b) = (points[i], points[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum();
    0.5 * twice.abs()
}

/// Eccentricity of the ellipse with axes `width` and `height`.
pub fn eccentricity(width: f64, height: f64) -> f64 {
    let a = width.max(height) / 2.0;
    let b = width.min(height) / 2.0;
    if a <= 0.0 {
        return 0.0;
    }
    (1.0 - (b / a).powi(2)).max(0.0).sqrt()
}

fn cross(o: &Point, a: &Point, b: &Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn segments_cross(p1: &Point, p2: &Point, q1: &Point, q2: &Point) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn is_self_intersecting(poly: &[Point]) -> bool {
    let n = poly.len();
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_cross(&poly[i], &poly[(i + 1) % n], &poly[j], &poly[(j + 1) % n]) {
                return true;
            }
        }
    }
    false
}

fn planar_distance(a: &Point, b: &Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Mouth shape of one normalized frame. Width and height use full
/// distances; areas and eccentricity use the x–y projection.
pub fn mouth_geometry(frame: &LandmarkFrame) -> MouthGeometry {
    let right = &frame[idx::MOUTH_CORNER_RIGHT];
    let left = &frame[idx::MOUTH_CORNER_LEFT];
    let upper = &frame[idx::UPPER_LIP_MID];
    let lower = &frame[idx::LOWER_LIP_MID];
    let contour: Vec<Point> = idx::OUTER_LIP.map(|i| frame[i]).collect();
    // Right half: 48..=51, then 57..=59 back to 48; left half: 51..=57.
    let right_half: Vec<Point> = [48, 49, 50, 51, 57, 58, 59].iter().map(|&i| frame[i]).collect();
    let left_half: Vec<Point> = (51..=57).map(|i| frame[i]).collect();
    MouthGeometry {
        width: distance(right, left),
        height: distance(upper, lower),
        area: shoelace(&contour),
        area_right: shoelace(&right_half),
        area_left: shoelace(&left_half),
        eccentricity: eccentricity(planar_distance(right, left), planar_distance(upper, lower)),
        self_intersecting: is_self_intersecting(&contour),
    }
}
