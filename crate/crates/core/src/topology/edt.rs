//! Exact Euclidean distance transform from continuous point sites to the
//! nodes of a regular grid.
//!
//! Each grid row is handled independently: the squared distance from a node
//! `(x, y_row)` to a site `p` is the parabola `(x - p.x)^2 + (y_row - p.y)^2`
//! in `x`, and the row's transform is the lower envelope of those parabolas
//! (Felzenszwalb & Huttenlocher). Sites keep their real coordinates, so the
//! result is the true nearest-site distance at every node.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{CellLayout, ClassFilter, Domain, Point2};

/// Largest allowed grid spacing as a fraction of the shorter domain side.
pub const MAX_SPACING_FRACTION: f64 = 0.05;

/// Node layout of a regular grid over a domain. Node `(row, col)` sits at
/// `origin + (col * h, row * h)`; the first and last nodes lie on (or within
/// `h / 2` of) the domain boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub h: f64,
    pub origin: Point2,
    pub cols: usize,
    pub rows: usize,
}

impl GridGeometry {
    pub fn over(domain: &Domain, h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::validation(format!("grid spacing must be positive, got {h}")));
        }
        let limit = MAX_SPACING_FRACTION * domain.shorter_side();
        if h > limit * (1.0 + 1e-12) {
            return Err(Error::validation(format!(
                "grid spacing {h} exceeds 5% of the shorter domain side ({limit})"
            )));
        }
        Ok(Self {
            h,
            origin: Point2::new(domain.x_min, domain.y_min),
            cols: (domain.width() / h).round() as usize + 1,
            rows: (domain.height() / h).round() as usize + 1,
        })
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn node(&self, row: usize, col: usize) -> Point2 {
        Point2::new(
            self.origin.x + col as f64 * self.h,
            self.origin.y + row as f64 * self.h,
        )
    }

    #[inline]
    pub fn node_at(&self, index: usize) -> Point2 {
        self.node(index / self.cols, index % self.cols)
    }
}

/// Distance from every grid node to the nearest site.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    pub grid: GridGeometry,
    /// Row-major, `rows * cols` entries.
    pub values: Vec<f64>,
}

impl DistanceField {
    pub fn resolution(&self) -> f64 {
        self.grid.h
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.grid.cols + col]
    }
}

/// Distance transform of the cells selected by `class_filter`.
pub fn distance_transform(
    layout: &CellLayout,
    class_filter: ClassFilter,
    h: f64,
) -> Result<DistanceField> {
    let grid = GridGeometry::over(layout.domain(), h)?;
    let sites = layout.positions(class_filter);
    distance_transform_sites(&sites, grid)
}

pub fn distance_transform_sites(sites: &[Point2], grid: GridGeometry) -> Result<DistanceField> {
    if sites.is_empty() {
        return Err(Error::Degenerate(
            "distance transform needs at least one point".into(),
        ));
    }
    let mut sorted: Vec<Point2> = sites.to_vec();
    sorted.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));

    let mut values = vec![0.0; grid.len()];
    let mut env = Envelope::with_capacity(sorted.len());
    for row in 0..grid.rows {
        let y = grid.origin.y + row as f64 * grid.h;
        env.build(&sorted, y);
        let out = &mut values[row * grid.cols..(row + 1) * grid.cols];
        env.sample(grid.origin.x, grid.h, out);
    }
    Ok(DistanceField { grid, values })
}

/// Lower envelope of parabolas `(x - pos)^2 + offset`.
struct Envelope {
    pos: Vec<f64>,
    offset: Vec<f64>,
    /// `bound[k]` is where parabola `k` starts to be the minimum.
    bound: Vec<f64>,
}

impl Envelope {
    fn with_capacity(n: usize) -> Self {
        Self {
            pos: Vec::with_capacity(n),
            offset: Vec::with_capacity(n),
            bound: Vec::with_capacity(n + 1),
        }
    }

    #[inline]
    fn intersect(p0: f64, f0: f64, p1: f64, f1: f64) -> f64 {
        // Written to avoid the cancellation in ((f1 + p1^2) - (f0 + p0^2)) / 2(p1 - p0).
        0.5 * (p0 + p1) + (f1 - f0) / (2.0 * (p1 - p0))
    }

    fn build(&mut self, sorted: &[Point2], y: f64) {
        self.pos.clear();
        self.offset.clear();
        self.bound.clear();
        for s in sorted {
            let dy = y - s.y;
            let f = dy * dy;
            let q = s.x;
            if let Some(&last) = self.pos.last() {
                if last == q {
                    // Same vertex: only the lower parabola can ever win.
                    let k = self.pos.len() - 1;
                    if f < self.offset[k] {
                        self.offset[k] = f;
                        // Re-insert so earlier parabolas are re-checked.
                        self.pos.pop();
                        self.offset.pop();
                        self.bound.pop();
                    } else {
                        continue;
                    }
                }
            }
            loop {
                let Some(k) = self.pos.len().checked_sub(1) else {
                    self.pos.push(q);
                    self.offset.push(f);
                    self.bound.push(f64::NEG_INFINITY);
                    break;
                };
                let s = Self::intersect(self.pos[k], self.offset[k], q, f);
                if s <= self.bound[k] {
                    self.pos.pop();
                    self.offset.pop();
                    self.bound.pop();
                } else {
                    self.pos.push(q);
                    self.offset.push(f);
                    self.bound.push(s);
                    break;
                }
            }
        }
    }

    fn sample(&self, x0: f64, h: f64, out: &mut [f64]) {
        let mut k = 0;
        for (i, slot) in out.iter_mut().enumerate() {
            let x = x0 + i as f64 * h;
            while k + 1 < self.pos.len() && self.bound[k + 1] < x {
                k += 1;
            }
            let dx = x - self.pos[k];
            let mut best = dx * dx + self.offset[k];
            // At an exact breakpoint both neighbours are minimal; take the smaller.
            if k + 1 < self.pos.len() && self.bound[k + 1] == x {
                let dx1 = x - self.pos[k + 1];
                best = best.min(dx1 * dx1 + self.offset[k + 1]);
            }
            *slot = best.sqrt();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::Domain;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(sites: &[Point2], p: Point2) -> f64 {
        sites
            .iter()
            .map(|s| ((s.x - p.x).powi(2) + (s.y - p.y).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn single_point_center_and_corner() {
        let domain = Domain::new(0.0, 0.0, 10.0, 10.0).unwrap();
        let l = CellLayout::from_triples(domain, vec!["a".into()], [(5.0, 5.0, 0)]).unwrap();
        let f = distance_transform(&l, ClassFilter::All, 0.5).unwrap();
        assert_eq!(f.grid.rows, 21);
        assert_eq!(f.at(10, 10), 0.0);
        assert!((f.at(0, 0) - 50f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn two_points_is_min_of_single_fields() {
        let domain = Domain::new(0.0, 0.0, 10.0, 10.0).unwrap();
        let grid = GridGeometry::over(&domain, 0.25).unwrap();
        let a = Point2::new(2.3, 7.1);
        let b = Point2::new(6.6, 1.9);
        let fa = distance_transform_sites(&[a], grid).unwrap();
        let fb = distance_transform_sites(&[b], grid).unwrap();
        let fab = distance_transform_sites(&[a, b], grid).unwrap();
        for i in 0..grid.len() {
            assert_eq!(fab.values[i], fa.values[i].min(fb.values[i]));
        }
    }

    #[test]
    fn matches_brute_force_on_random_sites() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let domain = Domain::new(0.0, 0.0, 1.0, 1.0).unwrap();
        let grid = GridGeometry::over(&domain, 1.0 / 64.0).unwrap();
        for _ in 0..5 {
            let sites: Vec<Point2> = (0..20)
                .map(|_| Point2::new(rng.random(), rng.random()))
                .collect();
            let f = distance_transform_sites(&sites, grid).unwrap();
            for i in 0..grid.len() {
                assert!((f.values[i] - brute(&sites, grid.node_at(i))).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn duplicate_and_vertically_aligned_sites() {
        let domain = Domain::new(0.0, 0.0, 4.0, 4.0).unwrap();
        let grid = GridGeometry::over(&domain, 0.125).unwrap();
        let sites = vec![
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 3.0),
            Point2::new(1.0, 3.0),
            Point2::new(1.0, 2.0),
            Point2::new(3.0, 0.5),
        ];
        let f = distance_transform_sites(&sites, grid).unwrap();
        for i in 0..grid.len() {
            assert!((f.values[i] - brute(&sites, grid.node_at(i))).abs() <= 1e-12);
        }
    }

    #[test]
    fn empty_set_and_bad_spacing_are_rejected() {
        let domain = Domain::new(0.0, 0.0, 1.0, 1.0).unwrap();
        let grid = GridGeometry::over(&domain, 0.05).unwrap();
        assert!(matches!(
            distance_transform_sites(&[], grid),
            Err(Error::Degenerate(_))
        ));
        assert!(GridGeometry::over(&domain, 0.2).is_err());
        assert!(GridGeometry::over(&domain, 0.0).is_err());
    }
}
