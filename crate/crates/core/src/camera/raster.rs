//! Pixel-centre rasterization of convex polygons.
//!
//! A pixel `(i, j)` covers `[i, i+1) x [j, j+1)` and counts as covered when
//! its centre `(i + 0.5, j + 0.5)` lies inside the polygon. Scanlines are
//! half-open so polygons sharing an edge never double count.

/// Accumulated coverage of one shape.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Coverage {
    pub count: u64,
    pub sum_u: f64,
    pub sum_v: f64,
}

impl Coverage {
    pub fn centroid(&self) -> Option<(f64, f64)> {
        (self.count > 0).then(|| (self.sum_u / self.count as f64, self.sum_v / self.count as f64))
    }
}

/// Number of integers `k` in `[0, limit)` with `lo <= k + 0.5 < hi`, and
/// the sum of their centres.
fn centers_in(lo: f64, hi: f64, limit: u32) -> (u64, f64) {
    let first = ((lo - 0.5).ceil()).max(0.0);
    let end = ((hi - 0.5).ceil()).min(limit as f64);
    if end <= first {
        return (0, 0.0);
    }
    let n = end - first;
    // centres first+0.5 .. end-0.5
    let sum = n * (first + end) / 2.0;
    (n as u64, sum)
}

/// Rasterizes a convex polygon (vertices in order, either winding) on a
/// `width x height` pixel grid.
pub fn rasterize_convex(poly: &[(f64, f64)], width: u32, height: u32) -> Coverage {
    let mut cov = Coverage::default();
    if poly.len() < 3 {
        return cov;
    }
    let (ymin, ymax) = poly
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.1), hi.max(p.1)));
    let row_first = ((ymin - 0.5).ceil()).max(0.0) as i64;
    let row_end = ((ymax - 0.5).ceil()).min(height as f64) as i64;
    for row in row_first..row_end {
        let yc = row as f64 + 0.5;
        let mut xl = f64::INFINITY;
        let mut xr = f64::NEG_INFINITY;
        for k in 0..poly.len() {
            let (x0, y0) = poly[k];
            let (x1, y1) = poly[(k + 1) % poly.len()];
            let crosses = (y0 <= yc && yc < y1) || (y1 <= yc && yc < y0);
            if crosses {
                let x = x0 + (yc - y0) * (x1 - x0) / (y1 - y0);
                xl = xl.min(x);
                xr = xr.max(x);
            }
        }
        if xl < xr {
            let (n, sum) = centers_in(xl, xr, width);
            cov.count += n;
            cov.sum_u += sum;
            cov.sum_v += n as f64 * yc;
        }
    }
    cov
}

/// Convex hull (Andrew's monotone chain), counter-clockwise, no collinear
/// points.
pub fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len() * 2);
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

pub fn polygon_area(poly: &[(f64, f64)]) -> f64 {
    let n = poly.len();
    let twice: f64 = (0..n)
        .map(|k| {
            let (x0, y0) = poly[k];
            let (x1, y1) = poly[(k + 1) % n];
            x0 * y1 - x1 * y0
        })
        .sum();
    twice.abs() / 2.0
}

/// Perimeter of a polygon, in the same units as its vertices.
pub fn polygon_perimeter(poly: &[(f64, f64)]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|k| {
            let (x0, y0) = poly[k];
            let (x1, y1) = poly[(k + 1) % n];
            (x1 - x0).hypot(y1 - y0)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rect(u0: f64, v0: f64, w: f64, h: f64) -> Vec<(f64, f64)> {
        vec![(u0, v0), (u0 + w, v0), (u0 + w, v0 + h), (u0, v0 + h)]
    }

    /// Point-in-convex-polygon by edge signs, used as an independent check.
    fn inside(poly: &[(f64, f64)], p: (f64, f64)) -> bool {
        let n = poly.len();
        let mut pos = false;
        let mut neg = false;
        for k in 0..n {
            let a = poly[k];
            let b = poly[(k + 1) % n];
            let c = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if c > 0.0 {
                pos = true;
            }
            if c < 0.0 {
                neg = true;
            }
        }
        !(pos && neg)
    }

    fn brute(poly: &[(f64, f64)], w: u32, h: u32) -> u64 {
        let mut n = 0;
        for j in 0..h {
            for i in 0..w {
                if inside(poly, (i as f64 + 0.5, j as f64 + 0.5)) {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn aligned_square_counts_exactly() {
        let c = rasterize_convex(&rect(10.0, 20.0, 5.0, 5.0), 100, 100);
        assert_eq!(c.count, 25);
        assert_eq!(c.centroid(), Some((12.5, 22.5)));
    }

    #[test]
    fn clipped_to_sensor() {
        let c = rasterize_convex(&rect(-2.0, -2.0, 4.0, 4.0), 100, 100);
        assert_eq!(c.count, 4);
    }

    #[test]
    fn hull_of_two_rects() {
        let mut pts = rect(0.0, 0.0, 2.0, 1.0);
        pts.extend(rect(3.0, 0.0, 2.0, 1.0));
        let hull = convex_hull(&pts);
        assert_eq!(hull.len(), 4);
        assert!((polygon_area(&hull) - 5.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn matches_brute_force_for_rotated_quads(
            cx in 5.0f64..45.0, cy in 5.0f64..45.0,
            w in 0.5f64..20.0, h in 0.5f64..20.0, ang in 0.0f64..3.2,
        ) {
            let (s, c) = ang.sin_cos();
            let corners = [(-w, -h), (w, -h), (w, h), (-w, h)];
            let poly: Vec<(f64, f64)> = corners
                .iter()
                .map(|&(x, y)| (cx + (x * c - y * s) / 2.0, cy + (x * s + y * c) / 2.0))
                .collect();
            let fast = rasterize_convex(&poly, 50, 50).count;
            let slow = brute(&poly, 50, 50);
            // Centres landing exactly on an edge may differ by the tie rule.
            prop_assert!((fast as i64 - slow as i64).abs() <= 2, "fast {} slow {}", fast, slow);
        }

        #[test]
        fn count_within_half_perimeter_of_area(
            u in 0.0f64..1.0, v in 0.0f64..1.0, w in 1.0f64..60.0, h in 1.0f64..60.0,
        ) {
            let poly = rect(10.0 + u, 10.0 + v, w, h);
            let n = rasterize_convex(&poly, 200, 200).count as f64;
            let bound = polygon_perimeter(&poly) / 2.0 + 1.0;
            prop_assert!((n - w * h).abs() <= bound);
        }
    }
}
