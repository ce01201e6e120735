//! Shared 50x50-grid comparison between a fitted field and the brute-force
//! minimum point distance, restricted to the band where the true distance is
//! under one meter.

use gfdwa::gpdf::GpField;
use nalgebra::Point2;

pub const GRID: usize = 50;
pub const BAND: f64 = 1.0;
pub const PADDING: f64 = 1.0;

/// Maximum absolute field-vs-oracle error over the banded grid, and where it
/// occurs. The grid spans the point set's bounding box padded by one meter.
pub fn max_band_error(field: &GpField, points: &[Point2<f64>]) -> (f64, Point2<f64>) {
    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        min_x = min_x.min(p.x);
        max_x = max_x.max(p.x);
        min_y = min_y.min(p.y);
        max_y = max_y.max(p.y);
    }
    let (mut worst, mut at) = (0.0, Point2::new(0.0, 0.0));
    for i in 0..GRID {
        for j in 0..GRID {
            let p = Point2::new(
                min_x - PADDING + (max_x - min_x + 2.0 * PADDING) * i as f64 / (GRID - 1) as f64,
                min_y - PADDING + (max_y - min_y + 2.0 * PADDING) * j as f64 / (GRID - 1) as f64,
            );
            let truth = points
                .iter()
                .map(|q| nalgebra::distance(q, &p))
                .fold(f64::INFINITY, f64::min);
            if truth >= BAND {
                continue;
            }
            let err = (field.query_distance(p) - truth).abs();
            if err > worst {
                worst = err;
                at = p;
            }
        }
    }
    (worst, at)
}
