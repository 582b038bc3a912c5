//! Cross K-functions and multi-scale Gaussian densities.
//!
//! K-functions here carry no edge correction: a value is the indicator count
//! of pairs closer than each radius, scaled by the domain area over the
//! number of ordered pairs. Distances equal to a radius do not count.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{BandwidthSet, CellLayout, ClassFilter, Point2, RadiusGrid};

/// Classes with fewer cells than this are treated as unreliable by the
/// persistence-based metrics.
pub const SMALL_CLASS_THRESHOLD: usize = 5;

pub fn is_small_class(count: usize) -> bool {
    count < SMALL_CLASS_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KFunctionVector {
    pub values: Vec<f64>,
    /// `None` for location-specific K-functions.
    pub source_class: Option<usize>,
    pub target_class: usize,
    pub location: Option<Point2>,
    /// Set when there were no valid pairs to count (empty class, or a single
    /// point for same-class K). Values are then all zero.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityVector {
    pub values: Vec<f64>,
    pub location: Point2,
    pub target: ClassFilter,
}

/// Adds one to `counts[i]` for every radius index `i` with `d2 < r_i^2`.
#[inline]
fn accumulate(counts: &mut [u64], radii_sq: &[f64], d2: f64) {
    // Radii are increasing, so the first radius exceeding d covers the rest.
    let first = radii_sq.partition_point(|&r2| r2 <= d2);
    if first < counts.len() {
        counts[first] += 1;
    }
}

/// Turns per-first-radius hit counts into cumulative counts.
fn cumulate(counts: &mut [u64]) {
    for i in 1..counts.len() {
        counts[i] += counts[i - 1];
    }
}

fn radii_squared(radii: &RadiusGrid) -> Vec<f64> {
    radii.values().iter().map(|r| r * r).collect()
}

fn check_class(layout: &CellLayout, class: usize) -> Result<()> {
    if class >= layout.num_classes() {
        return Err(Error::validation(format!(
            "class id {class} out of range for {} classes",
            layout.num_classes()
        )));
    }
    Ok(())
}

/// Pair counts with `dist < r` for each radius, over `sources x targets`.
/// When `same_class` is set the two slices are the same set and the diagonal
/// is skipped.
pub(crate) fn pair_counts(
    sources: &[Point2],
    targets: &[Point2],
    radii: &RadiusGrid,
    same_class: bool,
) -> Vec<u64> {
    let radii_sq = radii_squared(radii);
    let mut counts = vec![0u64; radii.len()];
    for (i, s) in sources.iter().enumerate() {
        for (j, t) in targets.iter().enumerate() {
            if same_class && i == j {
                continue;
            }
            accumulate(&mut counts, &radii_sq, s.dist2(*t));
        }
    }
    cumulate(&mut counts);
    counts
}

/// Cross K-function from `source` cells to `target` cells.
pub fn cross_k(
    layout: &CellLayout,
    source: usize,
    target: usize,
    radii: &RadiusGrid,
) -> Result<KFunctionVector> {
    check_class(layout, source)?;
    check_class(layout, target)?;
    let sources = layout.class_positions(source);
    let same = source == target;
    let targets = if same {
        sources.clone()
    } else {
        layout.class_positions(target)
    };
    Ok(cross_k_points(
        &sources,
        &targets,
        same,
        layout.domain().area(),
        source,
        target,
        radii,
    ))
}

pub(crate) fn cross_k_points(
    sources: &[Point2],
    targets: &[Point2],
    same: bool,
    area: f64,
    source: usize,
    target: usize,
    radii: &RadiusGrid,
) -> KFunctionVector {
    let pairs = if same {
        sources.len() * sources.len().saturating_sub(1)
    } else {
        sources.len() * targets.len()
    };
    let values = if pairs == 0 {
        vec![0.0; radii.len()]
    } else {
        let scale = area / pairs as f64;
        pair_counts(sources, targets, radii, same)
            .into_iter()
            .map(|c| scale * c as f64)
            .collect()
    };
    KFunctionVector {
        values,
        source_class: Some(source),
        target_class: target,
        location: None,
        degenerate: pairs == 0,
    }
}

/// All `classes x classes` cross K-functions, indexed `[source][target]`.
pub fn cross_k_matrix(layout: &CellLayout, radii: &RadiusGrid) -> Vec<Vec<KFunctionVector>> {
    let per_class: Vec<Vec<Point2>> = (0..layout.num_classes())
        .map(|c| layout.class_positions(c))
        .collect();
    let area = layout.domain().area();
    (0..per_class.len())
        .map(|s| {
            (0..per_class.len())
                .map(|t| cross_k_points(&per_class[s], &per_class[t], s == t, area, s, t, radii))
                .collect()
        })
        .collect()
}

/// Location-specific K-function of `target` cells around `x`.
pub fn location_k(
    layout: &CellLayout,
    x: Point2,
    target: usize,
    radii: &RadiusGrid,
) -> Result<KFunctionVector> {
    check_class(layout, target)?;
    if !layout.domain().contains(x) {
        return Err(Error::validation(format!(
            "location ({}, {}) lies outside the domain",
            x.x, x.y
        )));
    }
    let targets = layout.class_positions(target);
    Ok(location_k_points(&targets, x, layout.domain().area(), target, radii))
}

pub(crate) fn location_k_points(
    targets: &[Point2],
    x: Point2,
    area: f64,
    target: usize,
    radii: &RadiusGrid,
) -> KFunctionVector {
    let values = if targets.is_empty() {
        vec![0.0; radii.len()]
    } else {
        let radii_sq = radii_squared(radii);
        let mut counts = vec![0u64; radii.len()];
        for t in targets {
            accumulate(&mut counts, &radii_sq, x.dist2(*t));
        }
        cumulate(&mut counts);
        let scale = area / targets.len() as f64;
        counts.into_iter().map(|c| scale * c as f64).collect()
    };
    KFunctionVector {
        values,
        source_class: None,
        target_class: target,
        location: Some(x),
        degenerate: targets.is_empty(),
    }
}

/// Sum of 2D Gaussian kernels centred on the selected cells, evaluated at
/// `x`, once per bandwidth.
pub fn multiscale_density(
    layout: &CellLayout,
    x: Point2,
    target: ClassFilter,
    sigmas: &BandwidthSet,
) -> Result<DensityVector> {
    if !layout.domain().contains(x) {
        return Err(Error::validation(format!(
            "location ({}, {}) lies outside the domain",
            x.x, x.y
        )));
    }
    if let ClassFilter::Class(c) = target {
        check_class(layout, c)?;
    }
    let cells = layout.positions(target);
    Ok(DensityVector {
        values: density_values(&cells, x, sigmas),
        location: x,
        target,
    })
}

pub(crate) fn density_values(cells: &[Point2], x: Point2, sigmas: &BandwidthSet) -> Vec<f64> {
    sigmas
        .values()
        .iter()
        .map(|&s| {
            let two_var = 2.0 * s * s;
            let norm = 1.0 / (PI * two_var);
            cells
                .iter()
                .map(|c| (-x.dist2(*c) / two_var).exp())
                .sum::<f64>()
                * norm
        })
        .collect()
}

/// Euclidean distance between two equal-length vectors.
pub fn euclidean(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::validation(format!(
            "vector lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn k_distance(a: &KFunctionVector, b: &KFunctionVector) -> Result<f64> {
    euclidean(&a.values, &b.values)
}
