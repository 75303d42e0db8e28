//! Planar point sets, nearest-neighbour queries and the Hausdorff distance.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Hl0Error, Result};

/// A sampled point set or polyline in the plane (or in logarithmic
/// coordinates `log z`, when the caller says so).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanarSet {
    pub points: Vec<Complex64>,
}

impl PlanarSet {
    pub fn new(points: Vec<Complex64>) -> Self {
        PlanarSet { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn extend(&mut self, other: &PlanarSet) {
        self.points.extend_from_slice(&other.points);
    }

    /// Largest modulus among the points.
    pub fn max_radius(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    /// Distance from `z` to the polyline through the points in order.
    pub fn polyline_distance(&self, z: Complex64) -> f64 {
        match self.points.len() {
            0 => f64::INFINITY,
            1 => (self.points[0] - z).norm(),
            _ => self
                .points
                .windows(2)
                .map(|w| segment_distance(z, w[0], w[1]))
                .fold(f64::INFINITY, f64::min),
        }
    }
}

/// Distance from `z` to the segment `[a, b]`.
pub fn segment_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let s = ((z - a) * ab.conj()).re / len2;
    let s = s.clamp(0.0, 1.0);
    (z - (a + ab * s)).norm()
}

/// Uniform bucket grid over a point cloud for exact nearest-neighbour and
/// fixed-radius queries.
#[derive(Debug, Clone)]
pub struct PointIndex {
    points: Vec<Complex64>,
    min: Complex64,
    cell: f64,
    nx: usize,
    ny: usize,
    // CSR layout: bucket b holds order[start[b]..start[b + 1]].
    start: Vec<usize>,
    order: Vec<usize>,
}

impl PointIndex {
    pub fn new(points: Vec<Complex64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Hl0Error::Empty("point index"));
        }
        let (mut lo, mut hi) = (points[0], points[0]);
        for p in &points {
            lo.re = lo.re.min(p.re);
            lo.im = lo.im.min(p.im);
            hi.re = hi.re.max(p.re);
            hi.im = hi.im.max(p.im);
        }
        let w = (hi.re - lo.re).max(1e-12);
        let h = (hi.im - lo.im).max(1e-12);
        // About two points per bucket.
        let cell = ((w * h) / (points.len() as f64 / 2.0)).sqrt().max(w.max(h) / 4096.0);
        let nx = ((w / cell).floor() as usize + 1).max(1);
        let ny = ((h / cell).floor() as usize + 1).max(1);
        let mut counts = vec![0usize; nx * ny + 1];
        let bucket = |p: &Complex64| -> usize {
            let ix = (((p.re - lo.re) / cell) as usize).min(nx - 1);
            let iy = (((p.im - lo.im) / cell) as usize).min(ny - 1);
            iy * nx + ix
        };
        for p in &points {
            counts[bucket(p) + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let start = counts.clone();
        let mut fill = counts;
        let mut order = vec![0usize; points.len()];
        for (i, p) in points.iter().enumerate() {
            let b = bucket(p);
            order[fill[b]] = i;
            fill[b] += 1;
        }
        Ok(PointIndex {
            points,
            min: lo,
            cell,
            nx,
            ny,
            start,
            order,
        })
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    fn cell_of(&self, z: Complex64) -> (i64, i64) {
        (
            ((z.re - self.min.re) / self.cell).floor() as i64,
            ((z.im - self.min.im) / self.cell).floor() as i64,
        )
    }

    fn bucket_points(&self, ix: i64, iy: i64) -> &[usize] {
        if ix < 0 || iy < 0 || ix >= self.nx as i64 || iy >= self.ny as i64 {
            return &[];
        }
        let b = iy as usize * self.nx + ix as usize;
        &self.order[self.start[b]..self.start[b + 1]]
    }

    /// Index and distance of the nearest point to `z`.
    pub fn nearest(&self, z: Complex64) -> (usize, f64) {
        let (cx, cy) = self.cell_of(z);
        // Clamp the starting cell into the grid; rings grow from there.
        let cx0 = cx.clamp(0, self.nx as i64 - 1);
        let cy0 = cy.clamp(0, self.ny as i64 - 1);
        let mut best = (usize::MAX, f64::INFINITY);
        let max_ring = self.nx.max(self.ny) as i64;
        let mut ring = 0i64;
        loop {
            for ix in (cx0 - ring)..=(cx0 + ring) {
                for iy in (cy0 - ring)..=(cy0 + ring) {
                    if (ix - cx0).abs() != ring && (iy - cy0).abs() != ring {
                        continue;
                    }
                    for &i in self.bucket_points(ix, iy) {
                        let d = (self.points[i] - z).norm();
                        if d < best.1 || (d == best.1 && i < best.0) {
                            best = (i, d);
                        }
                    }
                }
            }
            // Every point outside the scanned square is at least this far.
            let reach = (ring as f64) * self.cell;
            if (best.0 != usize::MAX && best.1 <= reach) || ring > max_ring {
                return best;
            }
            ring += 1;
        }
    }

    /// Appends the indices of all points within `radius` of `z`.
    pub fn within(&self, z: Complex64, radius: f64, out: &mut Vec<usize>) {
        let (lx, ly) = self.cell_of(z - Complex64::new(radius, radius));
        let (hx, hy) = self.cell_of(z + Complex64::new(radius, radius));
        for iy in ly.max(0)..=hy.min(self.ny as i64 - 1) {
            for ix in lx.max(0)..=hx.min(self.nx as i64 - 1) {
                out.extend(
                    self.bucket_points(ix, iy)
                        .iter()
                        .filter(|&&i| (self.points[i] - z).norm() <= radius),
                );
            }
        }
    }

    /// Whether some point lies within `radius` of `z`.
    pub fn any_within(&self, z: Complex64, radius: f64) -> bool {
        let (lx, ly) = self.cell_of(z - Complex64::new(radius, radius));
        let (hx, hy) = self.cell_of(z + Complex64::new(radius, radius));
        let lx = lx.max(0);
        let ly = ly.max(0);
        let hx = hx.min(self.nx as i64 - 1);
        let hy = hy.min(self.ny as i64 - 1);
        for iy in ly..=hy {
            for ix in lx..=hx {
                if self
                    .bucket_points(ix, iy)
                    .iter()
                    .any(|&i| (self.points[i] - z).norm() <= radius)
                {
                    return true;
                }
            }
        }
        false
    }
}

fn directed_hausdorff(from: &[Complex64], to: &PointIndex) -> f64 {
    from.iter().map(|&z| to.nearest(z).1).fold(0.0, f64::max)
}

/// Hausdorff distance between two finite point sets (exact).
pub fn hausdorff(a: &PlanarSet, b: &PlanarSet) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Hl0Error::Empty("hausdorff operand"));
    }
    let ia = PointIndex::new(a.points.clone())?;
    let ib = PointIndex::new(b.points.clone())?;
    Ok(directed_hausdorff(&a.points, &ib).max(directed_hausdorff(&b.points, &ia)))
}
