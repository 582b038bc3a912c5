//! Hole matching between enriched diagrams, the cell configuration loss and
//! the layout comparison metrics.
//!
//! Two diagrams of different size are padded with dummy holes: zero
//! persistence and all-zero K and density vectors. A real hole matched to a
//! dummy therefore costs the norm of its own vector.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hungarian::{self, CostMatrix};
use crate::layout::{CellLayout, RadiusGrid};
use crate::spatial::{cross_k_matrix, euclidean, is_small_class, norm};
use crate::topology::{per_class_diagrams, DiagramConfig, EnrichedHole, EnrichedPersistenceDiagram};

/// A perfect matching between two padded diagrams. `None` marks a dummy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoleMatching {
    /// `(generated index, reference index)`; dummy-dummy pairs are omitted.
    pub pairs: Vec<(Option<usize>, Option<usize>)>,
    /// Total K-distance of the matching.
    pub cost: f64,
}

fn check_arity(gen: &EnrichedPersistenceDiagram, reference: &EnrichedPersistenceDiagram) -> Result<()> {
    if gen.k_arity != reference.k_arity || gen.density_arity != reference.density_arity {
        return Err(Error::validation(format!(
            "enrichment arity differs: K {} vs {}, density {} vs {}",
            gen.k_arity, reference.k_arity, gen.density_arity, reference.density_arity
        )));
    }
    for p in gen.points.iter().chain(&reference.points) {
        if p.k_vec.len() != gen.k_arity || p.density_vec.len() != gen.density_arity {
            return Err(Error::validation(
                "hole enrichment does not match the diagram arity",
            ));
        }
    }
    Ok(())
}

/// Distance between two optional holes on one attribute; `None` is a dummy.
fn slot_distance(
    a: Option<&EnrichedHole>,
    b: Option<&EnrichedHole>,
    attr: fn(&EnrichedHole) -> &[f64],
) -> f64 {
    match (a, b) {
        (Some(a), Some(b)) => euclidean(attr(a), attr(b)).expect("arity checked"),
        (Some(x), None) | (None, Some(x)) => norm(attr(x)),
        (None, None) => 0.0,
    }
}

fn k_of(h: &EnrichedHole) -> &[f64] {
    &h.k_vec
}

fn density_of(h: &EnrichedHole) -> &[f64] {
    &h.density_vec
}

/// Minimum total K-distance one-to-one matching, solved with the Hungarian
/// method on the dummy-padded square cost matrix.
pub fn optimal_match(
    gen: &EnrichedPersistenceDiagram,
    reference: &EnrichedPersistenceDiagram,
) -> Result<HoleMatching> {
    check_arity(gen, reference)?;
    let n = gen.len().max(reference.len());
    let costs = CostMatrix::from_fn(n, |i, j| {
        slot_distance(gen.points.get(i), reference.points.get(j), k_of)
    })?;
    let assignment = hungarian::solve(&costs);
    let pairs = assignment
        .row_to_col
        .iter()
        .enumerate()
        .map(|(i, &j)| {
            (
                (i < gen.len()).then_some(i),
                (j < reference.len()).then_some(j),
            )
        })
        .filter(|(a, b)| a.is_some() || b.is_some())
        .collect();
    Ok(HoleMatching {
        pairs,
        cost: assignment.cost,
    })
}

fn hole_at(d: &EnrichedPersistenceDiagram, i: Option<usize>) -> Option<&EnrichedHole> {
    i.map(|i| &d.points[i])
}

/// Sum of multi-scale density distances over the pairs of a given matching.
pub fn density_cost(
    gen: &EnrichedPersistenceDiagram,
    reference: &EnrichedPersistenceDiagram,
    matching: &HoleMatching,
) -> f64 {
    matching
        .pairs
        .iter()
        .map(|&(g, r)| slot_distance(hole_at(gen, g), hole_at(reference, r), density_of))
        .sum()
}

/// Cell configuration loss: density distance summed over the K-optimal matching.
pub fn cell_configuration_loss(
    gen: &EnrichedPersistenceDiagram,
    reference: &EnrichedPersistenceDiagram,
) -> Result<f64> {
    let matching = optimal_match(gen, reference)?;
    Ok(density_cost(gen, reference, &matching))
}

#[inline]
fn diagonal_distance((b, d): (f64, f64)) -> f64 {
    (d - b).abs() / std::f64::consts::SQRT_2
}

/// 1-Wasserstein distance between persistence diagrams with an L2 ground
/// metric; any point may instead be sent to its projection on the diagonal.
pub fn pd_emd(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let (n, m) = (a.len(), b.len());
    let size = n + m;
    let costs = CostMatrix::from_fn(size, |i, j| match (i < n, j < m) {
        (true, true) => {
            let (p, q) = (a[i], b[j]);
            (p.0 - q.0).hypot(p.1 - q.1)
        }
        (true, false) => diagonal_distance(a[i]),
        (false, true) => diagonal_distance(b[j]),
        (false, false) => 0.0,
    })
    .expect("finite diagram coordinates");
    hungarian::solve(&costs).cost
}

pub fn pd_emd_diagrams(gen: &EnrichedPersistenceDiagram, reference: &EnrichedPersistenceDiagram) -> f64 {
    pd_emd(&gen.pairs(), &reference.pairs())
}

/// Mean absolute persistence difference over the K-optimal matching. Zero
/// when either layout has fewer than five cells of the class.
pub fn pd_ccmd(
    gen: &EnrichedPersistenceDiagram,
    reference: &EnrichedPersistenceDiagram,
    gen_class_count: usize,
    ref_class_count: usize,
) -> Result<f64> {
    check_arity(gen, reference)?;
    if is_small_class(gen_class_count) || is_small_class(ref_class_count) {
        return Ok(0.0);
    }
    let matching = optimal_match(gen, reference)?;
    if matching.pairs.is_empty() {
        return Ok(0.0);
    }
    let pers = |d: &EnrichedPersistenceDiagram, i: Option<usize>| {
        i.map_or(0.0, |i| d.points[i].persistence())
    };
    let total: f64 = matching
        .pairs
        .iter()
        .map(|&(g, r)| (pers(gen, g) - pers(reference, r)).abs())
        .sum();
    Ok(total / matching.pairs.len() as f64)
}

/// Per-source-class errors between two layouts' cross K-functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossKError {
    pub mae: Vec<f64>,
    pub rmse: Vec<f64>,
    /// Divisor applied to both errors: the reference's mean per-class count.
    pub normalization_count: f64,
}

/// MAE and RMSE of `gen - reference`, each divided by `normalization`.
pub fn vector_errors(gen: &[f64], reference: &[f64], normalization: f64) -> Result<(f64, f64)> {
    if gen.len() != reference.len() {
        return Err(Error::validation("K vectors differ in length"));
    }
    if gen.is_empty() {
        return Ok((0.0, 0.0));
    }
    let len = gen.len() as f64;
    let (abs, sq) = gen.iter().zip(reference).fold((0.0, 0.0), |(a, s), (g, r)| {
        let d = g - r;
        (a + d.abs(), s + d * d)
    });
    Ok((abs / len / normalization, (sq / len).sqrt() / normalization))
}

/// Expected cells per class in the reference; 1 for an empty reference so
/// errors stay finite.
pub fn normalization_count(reference: &CellLayout) -> f64 {
    if reference.is_empty() || reference.num_classes() == 0 {
        1.0
    } else {
        reference.len() as f64 / reference.num_classes() as f64
    }
}

pub fn cross_k_error(gen: &CellLayout, reference: &CellLayout, radii: &RadiusGrid) -> Result<CrossKError> {
    gen.check_same_classes(reference)?;
    let kg = cross_k_matrix(gen, radii);
    let kr = cross_k_matrix(reference, radii);
    let n_bar = normalization_count(reference);
    let mut mae = Vec::with_capacity(kg.len());
    let mut rmse = Vec::with_capacity(kg.len());
    for (row_g, row_r) in kg.iter().zip(&kr) {
        let g: Vec<f64> = row_g.iter().flat_map(|k| k.values.iter().copied()).collect();
        let r: Vec<f64> = row_r.iter().flat_map(|k| k.values.iter().copied()).collect();
        let (a, s) = vector_errors(&g, &r, n_bar)?;
        mae.push(a);
        rmse.push(s);
    }
    Ok(CrossKError {
        mae,
        rmse,
        normalization_count: n_bar,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricValues {
    pub pd_emd: f64,
    pub pd_ccmd: f64,
    pub k_mae: f64,
    pub k_rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class_id: usize,
    pub class_name: String,
    #[serde(flatten)]
    pub values: MetricValues,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub per_class: Vec<ClassMetrics>,
    pub mean: MetricValues,
    pub k_normalization_count: f64,
    pub pd_emd_method: String,
}

pub const PD_EMD_METHOD: &str = "1-Wasserstein, L2 ground metric, diagonal matching";

/// Per-class PD-EMD, PD-CCMD and cross-K errors, plus their means over all
/// classes (empty classes count as zero).
pub fn metric_report(gen: &CellLayout, reference: &CellLayout, cfg: &DiagramConfig) -> Result<MetricReport> {
    gen.check_same_classes(reference)?;
    let dg = per_class_diagrams(gen, cfg)?;
    let dr = per_class_diagrams(reference, cfg)?;
    report_from_diagrams(gen, reference, &dg, &dr, cfg)
}

pub(crate) fn report_from_diagrams(
    gen: &CellLayout,
    reference: &CellLayout,
    dg: &[EnrichedPersistenceDiagram],
    dr: &[EnrichedPersistenceDiagram],
    cfg: &DiagramConfig,
) -> Result<MetricReport> {
    let k_err = cross_k_error(gen, reference, &cfg.radii)?;
    let gen_counts = gen.class_counts();
    let ref_counts = reference.class_counts();
    let mut per_class = Vec::with_capacity(gen.num_classes());
    for c in 0..gen.num_classes() {
        per_class.push(ClassMetrics {
            class_id: c,
            class_name: gen.class_names()[c].clone(),
            values: MetricValues {
                pd_emd: pd_emd_diagrams(&dg[c], &dr[c]),
                pd_ccmd: pd_ccmd(&dg[c], &dr[c], gen_counts[c], ref_counts[c])?,
                k_mae: k_err.mae[c],
                k_rmse: k_err.rmse[c],
            },
        });
    }
    let k = per_class.len().max(1) as f64;
    let mut mean = MetricValues::default();
    for m in &per_class {
        mean.pd_emd += m.values.pd_emd;
        mean.pd_ccmd += m.values.pd_ccmd;
        mean.k_mae += m.values.k_mae;
        mean.k_rmse += m.values.k_rmse;
    }
    mean.pd_emd /= k;
    mean.pd_ccmd /= k;
    mean.k_mae /= k;
    mean.k_rmse /= k;
    Ok(MetricReport {
        per_class,
        mean,
        k_normalization_count: k_err.normalization_count,
        pd_emd_method: PD_EMD_METHOD.to_string(),
    })
}

impl MetricReport {
    /// Plain-text table: one row per metric, one column per class and a
    /// final `mean` column.
    pub fn to_table(&self) -> String {
        let mut header: Vec<String> = vec!["metric".into()];
        header.extend(self.per_class.iter().map(|c| c.class_name.clone()));
        header.push("mean".into());
        let rows: Vec<(&str, fn(&MetricValues) -> f64)> = vec![
            ("PD-EMD", |m| m.pd_emd),
            ("PD-CCMD", |m| m.pd_ccmd),
            ("K-MAE", |m| m.k_mae),
            ("K-RMSE", |m| m.k_rmse),
        ];
        let mut cells: Vec<Vec<String>> = vec![header];
        for (name, get) in rows {
            let mut row = vec![name.to_string()];
            row.extend(self.per_class.iter().map(|c| format!("{:.4}", get(&c.values))));
            row.push(format!("{:.4}", get(&self.mean)));
            cells.push(row);
        }
        let widths: Vec<usize> = (0..cells[0].len())
            .map(|j| cells.iter().map(|r| r[j].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for (i, row) in cells.iter().enumerate() {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(j, (s, w))| {
                    if j == 0 {
                        format!("{s:<w$}")
                    } else {
                        format!("{s:>w$}")
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
            if i == 0 {
                let total = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
                let _ = writeln!(out, "{}", "-".repeat(total));
            }
        }
        out
    }
}
