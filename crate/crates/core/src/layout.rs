//! Cell layout data model: labelled points inside a rectangular domain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A 2D location in layout length units. Serialized as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dist2(self, other: Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn dist(self, other: Point2) -> f64 {
        self.dist2(other).sqrt()
    }
}

impl From<[f64; 2]> for Point2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

/// Axis-aligned rectangle `[x_min, x_max] x [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Domain {
    /// Builds a domain, rejecting non-finite bounds and zero or negative extent.
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        let d = Self {
            x_min,
            y_min,
            x_max,
            y_max,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.x_min, self.y_min, self.x_max, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::validation("domain bounds must be finite"));
        }
        if self.x_max <= self.x_min || self.y_max <= self.y_min {
            return Err(Error::validation(format!(
                "degenerate domain ({}, {}, {}, {}): width and height must be positive",
                self.x_min, self.y_min, self.x_max, self.y_max
            )));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn shorter_side(&self) -> f64 {
        self.width().min(self.height())
    }

    pub fn center(&self) -> Point2 {
        Point2::new(
            0.5 * (self.x_min + self.x_max),
            0.5 * (self.y_min + self.y_max),
        )
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    pub fn clamp(&self, p: Point2) -> Point2 {
        Point2::new(
            p.x.clamp(self.x_min, self.x_max),
            p.y.clamp(self.y_min, self.y_max),
        )
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.x_min, self.y_min, self.x_max, self.y_max]
    }

    /// Bounding box of `points`, padded on every side by `margin_fraction`
    /// of the box diagonal.
    pub fn padded_bounding_box(points: &[Point2], margin_fraction: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::validation(
                "cannot infer a domain from an empty point set",
            ));
        }
        let (mut x0, mut y0) = (f64::INFINITY, f64::INFINITY);
        let (mut x1, mut y1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        let pad = margin_fraction * ((x1 - x0).hypot(y1 - y0));
        Self::new(x0 - pad, y0 - pad, x1 + pad, y1 + pad)
    }
}

/// One annotated cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub pos: Point2,
    pub class_id: usize,
}

/// Selects which cells take part in a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassFilter {
    All,
    Class(usize),
}

impl ClassFilter {
    #[inline]
    pub fn accepts(self, class_id: usize) -> bool {
        match self {
            ClassFilter::All => true,
            ClassFilter::Class(c) => c == class_id,
        }
    }
}

/// A finite multi-class point set inside a rectangular domain.
///
/// Immutable once built; every constructor checks that points lie in the
/// domain and that class ids index into `class_names`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellLayout {
    domain: Domain,
    class_names: Vec<String>,
    cells: Vec<Cell>,
}

impl CellLayout {
    pub fn new(domain: Domain, class_names: Vec<String>, cells: Vec<Cell>) -> Result<Self> {
        domain.validate()?;
        for (i, c) in cells.iter().enumerate() {
            if !(c.pos.x.is_finite() && c.pos.y.is_finite()) {
                return Err(Error::validation(format!("point {i} has non-finite coordinates")));
            }
            if !domain.contains(c.pos) {
                return Err(Error::validation(format!(
                    "point {i} at ({}, {}) lies outside the domain",
                    c.pos.x, c.pos.y
                )));
            }
            if c.class_id >= class_names.len() {
                return Err(Error::validation(format!(
                    "point {i} has class id {} but only {} classes are defined",
                    c.class_id,
                    class_names.len()
                )));
            }
        }
        Ok(Self {
            domain,
            class_names,
            cells,
        })
    }

    /// Convenience constructor from `(x, y, class_id)` triples.
    pub fn from_triples(
        domain: Domain,
        class_names: Vec<String>,
        triples: impl IntoIterator<Item = (f64, f64, usize)>,
    ) -> Result<Self> {
        let cells = triples
            .into_iter()
            .map(|(x, y, class_id)| Cell {
                pos: Point2::new(x, y),
                class_id,
            })
            .collect();
        Self::new(domain, class_names, cells)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Positions of the cells accepted by `filter`, in layout order.
    pub fn positions(&self, filter: ClassFilter) -> Vec<Point2> {
        self.cells
            .iter()
            .filter(|c| filter.accepts(c.class_id))
            .map(|c| c.pos)
            .collect()
    }

    pub fn class_positions(&self, class_id: usize) -> Vec<Point2> {
        self.positions(ClassFilter::Class(class_id))
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_names.len()];
        for c in &self.cells {
            counts[c.class_id] += 1;
        }
        counts
    }

    pub fn class_count(&self, class_id: usize) -> usize {
        self.cells.iter().filter(|c| c.class_id == class_id).count()
    }

    /// Same classes and domain, different cells.
    pub fn with_cells(&self, cells: Vec<Cell>) -> Result<Self> {
        Self::new(self.domain, self.class_names.clone(), cells)
    }

    /// Checks that two layouts describe the same class set, in the same order.
    pub fn check_same_classes(&self, other: &CellLayout) -> Result<()> {
        if self.class_names != other.class_names {
            return Err(Error::validation(format!(
                "class sets differ: {:?} vs {:?}",
                self.class_names, other.class_names
            )));
        }
        Ok(())
    }

    pub(crate) fn from_parts_unchecked(
        domain: Domain,
        class_names: Vec<String>,
        cells: Vec<Cell>,
    ) -> Self {
        debug_assert!(Self::new(domain, class_names.clone(), cells.clone()).is_ok());
        Self {
            domain,
            class_names,
            cells,
        }
    }
}

/// Per-axis affine map from a domain onto `[-1, 1]^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitTransform {
    pub domain: Domain,
}

impl UnitTransform {
    pub fn new(domain: Domain) -> Result<Self> {
        domain.validate()?;
        Ok(Self { domain })
    }

    pub fn forward(&self, p: Point2) -> Point2 {
        let d = &self.domain;
        Point2::new(
            2.0 * (p.x - d.x_min) / d.width() - 1.0,
            2.0 * (p.y - d.y_min) / d.height() - 1.0,
        )
    }

    pub fn inverse(&self, q: Point2) -> Point2 {
        let d = &self.domain;
        Point2::new(
            d.x_min + 0.5 * (q.x + 1.0) * d.width(),
            d.y_min + 0.5 * (q.y + 1.0) * d.height(),
        )
    }

    /// Maps a normalized layout back onto the original domain. Coordinates
    /// are clamped so rounding never pushes a point outside.
    pub fn denormalize(&self, layout: &CellLayout) -> Result<CellLayout> {
        let cells = layout
            .cells()
            .iter()
            .map(|c| Cell {
                pos: self.domain.clamp(self.inverse(c.pos)),
                class_id: c.class_id,
            })
            .collect();
        CellLayout::new(self.domain, layout.class_names().to_vec(), cells)
    }
}

/// The unit square `[-1, 1]^2` that normalized layouts live in.
pub fn unit_domain() -> Domain {
    Domain {
        x_min: -1.0,
        y_min: -1.0,
        x_max: 1.0,
        y_max: 1.0,
    }
}

/// Maps `layout` onto `[-1, 1]^2` with independent per-axis scaling and
/// returns the normalized layout together with the transform that inverts it.
pub fn normalize_to_unit(layout: &CellLayout) -> Result<(CellLayout, UnitTransform)> {
    let transform = UnitTransform::new(*layout.domain())?;
    let unit = unit_domain();
    let cells = layout
        .cells()
        .iter()
        .map(|c| Cell {
            pos: unit.clamp(transform.forward(c.pos)),
            class_id: c.class_id,
        })
        .collect();
    let normalized = CellLayout::new(unit, layout.class_names().to_vec(), cells)?;
    Ok((normalized, transform))
}

fn validate_increasing(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::validation(format!("{name} must not be empty")));
    }
    if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::validation(format!("{name} must be finite and positive")));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation(format!("{name} must be strictly increasing")));
    }
    Ok(())
}

/// Radii at which K-functions are sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RadiusGrid(Vec<f64>);

impl RadiusGrid {
    pub fn new(radii: Vec<f64>) -> Result<Self> {
        validate_increasing("radius grid", &radii)?;
        Ok(Self(radii))
    }

    /// `count` radii spaced evenly from `start` to `end` inclusive.
    pub fn linspace(start: f64, end: f64, count: usize) -> Result<Self> {
        if count == 1 {
            return Self::new(vec![start]);
        }
        let step = (end - start) / (count - 1) as f64;
        Self::new((0..count).map(|i| start + step * i as f64).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|r| r * factor).collect())
    }
}

impl TryFrom<Vec<f64>> for RadiusGrid {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<RadiusGrid> for Vec<f64> {
    fn from(g: RadiusGrid) -> Self {
        g.0
    }
}

/// Gaussian kernel standard deviations for multi-scale densities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct BandwidthSet(Vec<f64>);

impl BandwidthSet {
    pub fn new(sigmas: Vec<f64>) -> Result<Self> {
        validate_increasing("bandwidth set", &sigmas)?;
        Ok(Self(sigmas))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|s| s * factor).collect())
    }
}

impl TryFrom<Vec<f64>> for BandwidthSet {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<BandwidthSet> for Vec<f64> {
    fn from(b: BandwidthSet) -> Self {
        b.0
    }
}
