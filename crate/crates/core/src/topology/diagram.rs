use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{BandwidthSet, CellLayout, ClassFilter, Point2, RadiusGrid};
use crate::spatial::{density_values, location_k_points};
use crate::topology::edt::{distance_transform_sites, GridGeometry};
use crate::topology::persistence::{persistence_h1, PersistencePoint};

/// Which cells feed the multi-scale density attached to each hole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityScope {
    /// One density over all classes.
    #[default]
    AllClasses,
    /// One density block per class, concatenated in class order.
    PerClass,
}

/// A hole together with the descriptors of its surroundings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnrichedHole {
    pub birth: f64,
    pub death: f64,
    pub center: Point2,
    /// Location K-functions at `center`, one block per target class.
    pub k_vec: Vec<f64>,
    pub density_vec: Vec<f64>,
}

impl EnrichedHole {
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnrichedPersistenceDiagram {
    /// `None` for a diagram computed over all classes at once.
    pub class_id: Option<usize>,
    pub points: Vec<EnrichedHole>,
    pub k_arity: usize,
    pub density_arity: usize,
}

impl EnrichedPersistenceDiagram {
    pub fn empty(class_id: Option<usize>, k_arity: usize, density_arity: usize) -> Self {
        Self {
            class_id,
            points: Vec::new(),
            k_arity,
            density_arity,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn persistences(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.persistence()).collect()
    }

    /// `(birth, death)` pairs.
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.birth, p.death)).collect()
    }
}

/// Everything needed to turn a layout into enriched diagrams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramConfig {
    pub radii: RadiusGrid,
    pub sigmas: BandwidthSet,
    /// Grid spacing of the distance transform.
    pub h: f64,
    /// Holes with persistence at or below this are dropped. Defaults to `2h`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub persistence_floor: Option<f64>,
    #[serde(default)]
    pub density_scope: DensityScope,
}

impl DiagramConfig {
    pub fn floor(&self) -> f64 {
        self.persistence_floor.unwrap_or(2.0 * self.h)
    }

    pub fn k_arity(&self, num_classes: usize) -> usize {
        num_classes * self.radii.len()
    }

    pub fn density_arity(&self, num_classes: usize) -> usize {
        match self.density_scope {
            DensityScope::AllClasses => self.sigmas.len(),
            DensityScope::PerClass => num_classes * self.sigmas.len(),
        }
    }
}

/// Per-class point sets of a layout, computed once and shared by every
/// enrichment.
pub(crate) struct ClassSites {
    pub per_class: Vec<Vec<Point2>>,
    pub all: Vec<Point2>,
    pub area: f64,
}

impl ClassSites {
    pub fn of(layout: &CellLayout) -> Self {
        Self {
            per_class: (0..layout.num_classes())
                .map(|c| layout.class_positions(c))
                .collect(),
            all: layout.positions(ClassFilter::All),
            area: layout.domain().area(),
        }
    }

    fn enrich(&self, p: &PersistencePoint, cfg: &DiagramConfig) -> EnrichedHole {
        let mut k_vec = Vec::with_capacity(self.per_class.len() * cfg.radii.len());
        for (t, targets) in self.per_class.iter().enumerate() {
            k_vec.extend(location_k_points(targets, p.center, self.area, t, &cfg.radii).values);
        }
        let density_vec = match cfg.density_scope {
            DensityScope::AllClasses => density_values(&self.all, p.center, &cfg.sigmas),
            DensityScope::PerClass => self
                .per_class
                .iter()
                .flat_map(|cells| density_values(cells, p.center, &cfg.sigmas))
                .collect(),
        };
        EnrichedHole {
            birth: p.birth,
            death: p.death,
            center: p.center,
            k_vec,
            density_vec,
        }
    }
}

/// Attaches location K-functions (every class) and multi-scale densities
/// at each hole center. Centers must lie in the layout domain.
pub fn enrich_diagram(
    class_id: Option<usize>,
    points: &[PersistencePoint],
    layout: &CellLayout,
    cfg: &DiagramConfig,
) -> Result<EnrichedPersistenceDiagram> {
    for p in points {
        if !layout.domain().contains(p.center) {
            return Err(Error::validation(format!(
                "hole center ({}, {}) lies outside the domain",
                p.center.x, p.center.y
            )));
        }
    }
    let sites = ClassSites::of(layout);
    Ok(enrich_with_sites(class_id, points, &sites, cfg))
}

pub(crate) fn enrich_with_sites(
    class_id: Option<usize>,
    points: &[PersistencePoint],
    sites: &ClassSites,
    cfg: &DiagramConfig,
) -> EnrichedPersistenceDiagram {
    let k = sites.per_class.len();
    EnrichedPersistenceDiagram {
        class_id,
        points: points.iter().map(|p| sites.enrich(p, cfg)).collect(),
        k_arity: cfg.k_arity(k),
        density_arity: cfg.density_arity(k),
    }
}

/// Holes of the union of disks around `sites`, with centers clamped into
/// the layout domain. An empty site set has no holes.
pub(crate) fn holes_of_sites(
    sites: &[Point2],
    grid: GridGeometry,
    layout: &CellLayout,
    floor: f64,
) -> Result<Vec<PersistencePoint>> {
    if sites.is_empty() {
        return Ok(Vec::new());
    }
    let field = distance_transform_sites(sites, grid)?;
    let mut holes = persistence_h1(&field, floor);
    for p in &mut holes {
        p.center = layout.domain().clamp(p.center);
    }
    Ok(holes)
}

/// Holes of one class (or of all cells), before enrichment.
pub fn class_holes(
    layout: &CellLayout,
    filter: ClassFilter,
    cfg: &DiagramConfig,
) -> Result<Vec<PersistencePoint>> {
    let grid = GridGeometry::over(layout.domain(), cfg.h)?;
    holes_of_sites(&layout.positions(filter), grid, layout, cfg.floor())
}

/// One enriched diagram per class, in class order. The filtration uses only
/// that class's cells; enrichments see the whole layout.
pub fn per_class_diagrams(
    layout: &CellLayout,
    cfg: &DiagramConfig,
) -> Result<Vec<EnrichedPersistenceDiagram>> {
    let grid = GridGeometry::over(layout.domain(), cfg.h)?;
    let sites = ClassSites::of(layout);
    sites
        .per_class
        .iter()
        .enumerate()
        .map(|(c, pts)| {
            let holes = holes_of_sites(pts, grid, layout, cfg.floor())?;
            Ok(enrich_with_sites(Some(c), &holes, &sites, cfg))
        })
        .collect()
}

/// Diagram of all cells regardless of class.
pub fn union_diagram(
    layout: &CellLayout,
    cfg: &DiagramConfig,
) -> Result<EnrichedPersistenceDiagram> {
    let grid = GridGeometry::over(layout.domain(), cfg.h)?;
    let sites = ClassSites::of(layout);
    let holes = holes_of_sites(&sites.all, grid, layout, cfg.floor())?;
    Ok(enrich_with_sites(None, &holes, &sites, cfg))
}

/// Left edges of persistence buckets. The first edge is 0 and the last
/// bucket is open-ended, so `n` edges give `n` buckets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PersistenceBuckets(Vec<f64>);

impl PersistenceBuckets {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.first() != Some(&0.0) {
            return Err(Error::validation("persistence buckets must start at 0"));
        }
        if edges.iter().any(|e| !e.is_finite()) {
            return Err(Error::validation("bucket edges must be finite"));
        }
        if edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::validation("bucket edges must be strictly increasing"));
        }
        Ok(Self(edges))
    }

    pub fn edges(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of the bucket holding `persistence` (values below 0 go to the first).
    pub fn bucket_of(&self, persistence: f64) -> usize {
        self.0.partition_point(|&e| e <= persistence).saturating_sub(1)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|e| e * factor).collect())
    }
}

impl TryFrom<Vec<f64>> for PersistenceBuckets {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PersistenceBuckets> for Vec<f64> {
    fn from(b: PersistenceBuckets) -> Self {
        b.0
    }
}

/// Fixed-length summary of a diagram: `log(1 + count)` per bucket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramFeature {
    pub class_id: Option<usize>,
    pub log_histogram: Vec<f64>,
}

pub fn vectorize_diagram(
    diagram: &EnrichedPersistenceDiagram,
    buckets: &PersistenceBuckets,
) -> DiagramFeature {
    let mut counts = vec![0u32; buckets.len()];
    for p in &diagram.points {
        counts[buckets.bucket_of(p.persistence())] += 1;
    }
    DiagramFeature {
        class_id: diagram.class_id,
        log_histogram: counts.into_iter().map(|c| (1.0 + c as f64).ln()).collect(),
    }
}
