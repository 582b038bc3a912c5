//! Layout synthesis by simulated annealing against a reference layout's
//! descriptors.
//!
//! The synthesizer starts from a per-class jittered mesh and moves one cell
//! at a time, scoring candidates with
//! `lambda_cc * L_CC + lambda_k * k_term`, where `L_CC` sums the cell
//! configuration loss over the per-class diagrams and `k_term` is the
//! squared cross-K discrepancy scaled by `1 / (classes^2 * radii)`.
//!
//! Internally both layouts are rescaled isotropically so the domain's
//! shorter side is 2; this keeps the two terms on comparable scales
//! whatever the input units. Proposal steps and the initial jitter are given
//! in per-axis normalized units (the domain mapped to `[-1, 1]^2`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::defaults::Defaults;
use crate::error::{Error, Result};
use crate::layout::{
    unit_domain, BandwidthSet, Cell, CellLayout, Domain, Point2, RadiusGrid, UnitTransform,
};
use crate::matching::cell_configuration_loss;
use crate::spatial::{cross_k_matrix, euclidean};
use crate::topology::diagram::{enrich_with_sites, holes_of_sites, ClassSites};
use crate::topology::{
    per_class_diagrams, DensityScope, DiagramConfig, EnrichedPersistenceDiagram, GridGeometry,
    PersistencePoint,
};

/// Side length the working copy of the reference is scaled to.
const WORKING_SHORTER_SIDE: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthesisConfig {
    /// K-function radii in reference units; `None` uses the defaults.
    pub radii: Option<RadiusGrid>,
    /// Density bandwidths in reference units; `None` uses the defaults.
    pub sigmas: Option<BandwidthSet>,
    /// Distance-transform spacing used while optimizing, reference units.
    pub h: Option<f64>,
    /// Std of the initial mesh jitter, normalized units.
    pub init_jitter_sigma: f64,
    pub steps: usize,
    /// Starting temperature as a fraction of the initial objective.
    pub initial_temperature: f64,
    /// Geometric temperature decay per step.
    pub temperature_decay: f64,
    /// Std of a local move, normalized units.
    pub move_scale: f64,
    /// Probability that a proposal relocates the cell uniformly at random.
    pub teleport_probability: f64,
    pub lambda_k: f64,
    pub lambda_cc: f64,
    pub seed: u64,
    /// Minimum distance kept by overlap removal, reference units; `None`
    /// uses the defaults.
    pub min_separation: Option<f64>,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self::from_defaults(&Defaults::builtin())
    }
}

impl SynthesisConfig {
    pub fn from_defaults(d: &Defaults) -> Self {
        let s = &d.synthesis;
        Self {
            radii: None,
            sigmas: None,
            h: None,
            init_jitter_sigma: s.init_jitter_sigma,
            steps: s.steps,
            initial_temperature: s.initial_temperature,
            temperature_decay: s.temperature_decay,
            move_scale: s.move_scale,
            teleport_probability: s.teleport_probability,
            lambda_k: s.lambda_k,
            lambda_cc: s.lambda_cc,
            seed: s.seed,
            min_separation: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 1 {
            return Err(Error::validation("steps must be at least 1"));
        }
        if !(self.initial_temperature > 0.0) {
            return Err(Error::validation("initial temperature must be positive"));
        }
        if !(self.temperature_decay > 0.0 && self.temperature_decay < 1.0) {
            return Err(Error::validation("temperature decay must lie in (0, 1)"));
        }
        if !(self.lambda_k >= 0.0 && self.lambda_cc >= 0.0) {
            return Err(Error::validation("loss weights must be non-negative"));
        }
        if self.lambda_k == 0.0 && self.lambda_cc == 0.0 {
            return Err(Error::validation("loss weights must not both be zero"));
        }
        if !(self.move_scale >= 0.0 && self.init_jitter_sigma >= 0.0) {
            return Err(Error::validation("move scale and jitter must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.teleport_probability) {
            return Err(Error::validation("teleport probability must lie in [0, 1]"));
        }
        if let Some(m) = self.min_separation {
            if !(m >= 0.0) {
                return Err(Error::validation("min separation must be non-negative"));
            }
        }
        Ok(())
    }

    /// Diagram configuration used during optimization, in reference units.
    pub fn diagram_config(&self, domain: &Domain, defaults: &Defaults) -> Result<DiagramConfig> {
        let h = match self.h {
            Some(h) => h,
            None => defaults.synthesis_grid_h(domain),
        };
        Ok(DiagramConfig {
            radii: match &self.radii {
                Some(r) => r.clone(),
                None => defaults.radii(domain)?,
            },
            sigmas: match &self.sigmas {
                Some(s) => s.clone(),
                None => defaults.sigmas(domain)?,
            },
            h,
            persistence_floor: Some(defaults.persistence_floor_factor * h),
            density_scope: DensityScope::AllClasses,
        })
    }

    pub fn resolved_min_separation(&self, domain: &Domain, defaults: &Defaults) -> f64 {
        self.min_separation
            .unwrap_or_else(|| defaults.min_separation(domain))
    }
}

/// Weights and descriptor settings of the synthesis objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveConfig {
    pub diagram: DiagramConfig,
    pub lambda_cc: f64,
    pub lambda_k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveValue {
    pub total: f64,
    pub l_cc: f64,
    pub k_term: f64,
}

/// Reference descriptors, computed once per synthesis run.
struct ReferenceDescriptors {
    diagrams: Vec<EnrichedPersistenceDiagram>,
    cross_k: Vec<Vec<Vec<f64>>>,
}

struct Evaluator<'a> {
    cfg: &'a ObjectiveConfig,
    grid: GridGeometry,
    reference: ReferenceDescriptors,
    class_names: Vec<String>,
    domain: Domain,
}

impl<'a> Evaluator<'a> {
    fn new(reference: &CellLayout, cfg: &'a ObjectiveConfig) -> Result<Self> {
        let diagrams = per_class_diagrams(reference, &cfg.diagram)?;
        let cross_k = cross_k_matrix(reference, &cfg.diagram.radii)
            .into_iter()
            .map(|row| row.into_iter().map(|k| k.values).collect())
            .collect();
        Ok(Self {
            cfg,
            grid: GridGeometry::over(reference.domain(), cfg.diagram.h)?,
            reference: ReferenceDescriptors { diagrams, cross_k },
            class_names: reference.class_names().to_vec(),
            domain: *reference.domain(),
        })
    }

    fn holes(&self, layout: &CellLayout, class_id: usize) -> Result<Vec<PersistencePoint>> {
        holes_of_sites(
            &layout.class_positions(class_id),
            self.grid,
            layout,
            self.cfg.diagram.floor(),
        )
    }

    fn all_holes(&self, layout: &CellLayout) -> Result<Vec<Vec<PersistencePoint>>> {
        (0..layout.num_classes())
            .map(|c| self.holes(layout, c))
            .collect()
    }

    fn evaluate(&self, layout: &CellLayout, holes: &[Vec<PersistencePoint>]) -> Result<ObjectiveValue> {
        let sites = ClassSites::of(layout);
        let mut l_cc = 0.0;
        for (c, class_holes) in holes.iter().enumerate() {
            let diagram = enrich_with_sites(Some(c), class_holes, &sites, &self.cfg.diagram);
            l_cc += cell_configuration_loss(&diagram, &self.reference.diagrams[c])?;
        }
        let classes = layout.num_classes();
        let ks = cross_k_matrix(layout, &self.cfg.diagram.radii);
        let mut k_sum = 0.0;
        for (s, row) in ks.iter().enumerate() {
            for (t, k) in row.iter().enumerate() {
                let d = euclidean(&k.values, &self.reference.cross_k[s][t])?;
                k_sum += d * d;
            }
        }
        let k_term = if classes == 0 {
            0.0
        } else {
            k_sum / ((classes * classes) as f64 * self.cfg.diagram.radii.len() as f64)
        };
        Ok(ObjectiveValue {
            total: self.cfg.lambda_cc * l_cc + self.cfg.lambda_k * k_term,
            l_cc,
            k_term,
        })
    }

    fn layout_from(&self, cells: Vec<Cell>) -> CellLayout {
        CellLayout::from_parts_unchecked(self.domain, self.class_names.clone(), cells)
    }
}

/// Synthesis objective of `candidate` against `reference`, in the layouts'
/// own units.
pub fn objective(
    candidate: &CellLayout,
    reference: &CellLayout,
    cfg: &ObjectiveConfig,
) -> Result<ObjectiveValue> {
    candidate.check_same_classes(reference)?;
    if candidate.domain() != reference.domain() {
        return Err(Error::validation("candidate and reference domains differ"));
    }
    let eval = Evaluator::new(reference, cfg)?;
    let holes = eval.all_holes(candidate)?;
    eval.evaluate(candidate, &holes)
}

/// Per-class jittered meshes over `[-1, 1]^2`, mapped back onto the
/// reference domain. Class counts match the reference exactly.
pub fn init_layout(reference: &CellLayout, jitter_sigma: f64, seed: u64) -> Result<CellLayout> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    init_layout_with(reference, jitter_sigma, &mut rng)
}

fn init_layout_with(reference: &CellLayout, jitter_sigma: f64, rng: &mut ChaCha8Rng) -> Result<CellLayout> {
    if reference.is_empty() {
        return Err(Error::validation("reference layout has no cells"));
    }
    if !(jitter_sigma >= 0.0 && jitter_sigma.is_finite()) {
        return Err(Error::validation("jitter sigma must be finite and non-negative"));
    }
    let transform = UnitTransform::new(*reference.domain())?;
    let unit = unit_domain();
    let noise = Normal::new(0.0, jitter_sigma).map_err(|e| Error::validation(e.to_string()))?;
    let mut cells = Vec::with_capacity(reference.len());
    for (class_id, &n) in reference.class_counts().iter().enumerate() {
        if n == 0 {
            continue;
        }
        let cols = (n as f64).sqrt().ceil() as usize;
        let rows = n.div_ceil(cols);
        for k in 0..n {
            let (r, c) = (k / cols, k % cols);
            let mut q = Point2::new(
                -1.0 + (2 * c + 1) as f64 / cols as f64,
                -1.0 + (2 * r + 1) as f64 / rows as f64,
            );
            if jitter_sigma > 0.0 {
                q.x += noise.sample(rng);
                q.y += noise.sample(rng);
            }
            cells.push(Cell {
                pos: reference.domain().clamp(transform.inverse(unit.clamp(q))),
                class_id,
            });
        }
    }
    reference.with_cells(cells)
}

/// Drops every cell closer than `min_separation` to a cell kept earlier in
/// layout order.
pub fn remove_overlaps(layout: &CellLayout, min_separation: f64) -> Result<CellLayout> {
    if !(min_separation >= 0.0) {
        return Err(Error::validation("min separation must be non-negative"));
    }
    let limit = min_separation * min_separation;
    let mut kept: Vec<Cell> = Vec::with_capacity(layout.len());
    for c in layout.cells() {
        if kept.iter().all(|k| k.pos.dist2(c.pos) >= limit) {
            kept.push(*c);
        }
    }
    layout.with_cells(kept)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub step: usize,
    /// Objective of the current state after the accept/reject decision.
    pub total: f64,
    pub l_cc: f64,
    pub k_term: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SynthesisTrace {
    pub lambda_cc: f64,
    pub lambda_k: f64,
    pub steps: Vec<TraceStep>,
}

impl SynthesisTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Running minimum of the objective.
    pub fn best_so_far(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.steps
            .iter()
            .map(|s| {
                best = best.min(s.total);
                best
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,total,l_cc,k_term,accepted\n");
        for s in &self.steps {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                s.step, s.total, s.l_cc, s.k_term, s.accepted as u8
            ));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct SynthesisOutcome {
    /// Best layout seen, after overlap removal.
    pub layout: CellLayout,
    /// Best layout seen, before overlap removal.
    pub best_layout: CellLayout,
    pub initial_layout: CellLayout,
    pub initial_objective: ObjectiveValue,
    pub best_objective: ObjectiveValue,
    pub trace: SynthesisTrace,
    /// Objective configuration in reference units.
    pub objective_config: ObjectiveConfig,
}

/// Isotropic map from the reference domain to a working frame whose
/// shorter side is `WORKING_SHORTER_SIDE`, anchored at the domain minimum.
#[derive(Debug, Clone, Copy)]
struct WorkingFrame {
    domain: Domain,
    scale: f64,
}

impl WorkingFrame {
    fn new(domain: Domain) -> Self {
        Self {
            domain,
            scale: WORKING_SHORTER_SIDE / domain.shorter_side(),
        }
    }

    fn working_domain(self) -> Domain {
        Domain {
            x_min: 0.0,
            y_min: 0.0,
            x_max: self.domain.width() * self.scale,
            y_max: self.domain.height() * self.scale,
        }
    }

    fn to_working(self, p: Point2) -> Point2 {
        self.working_domain().clamp(Point2::new(
            (p.x - self.domain.x_min) * self.scale,
            (p.y - self.domain.y_min) * self.scale,
        ))
    }

    fn to_reference(self, q: Point2) -> Point2 {
        self.domain.clamp(Point2::new(
            self.domain.x_min + q.x / self.scale,
            self.domain.y_min + q.y / self.scale,
        ))
    }

    fn layout_to_working(&self, l: &CellLayout) -> Result<CellLayout> {
        let cells = l
            .cells()
            .iter()
            .map(|c| Cell {
                pos: self.to_working(c.pos),
                class_id: c.class_id,
            })
            .collect();
        CellLayout::new(self.working_domain(), l.class_names().to_vec(), cells)
    }

    fn layout_to_reference(&self, l: &CellLayout) -> Result<CellLayout> {
        let cells = l
            .cells()
            .iter()
            .map(|c| Cell {
                pos: self.to_reference(c.pos),
                class_id: c.class_id,
            })
            .collect();
        CellLayout::new(self.domain, l.class_names().to_vec(), cells)
    }

    fn objective_config(&self, cfg: &ObjectiveConfig) -> Result<ObjectiveConfig> {
        let s = self.scale;
        Ok(ObjectiveConfig {
            diagram: DiagramConfig {
                radii: cfg.diagram.radii.scaled(s)?,
                sigmas: cfg.diagram.sigmas.scaled(s)?,
                h: cfg.diagram.h * s,
                persistence_floor: cfg.diagram.persistence_floor.map(|f| f * s),
                density_scope: cfg.diagram.density_scope,
            },
            lambda_cc: cfg.lambda_cc,
            lambda_k: cfg.lambda_k,
        })
    }
}

pub fn synthesize(reference: &CellLayout, config: &SynthesisConfig) -> Result<SynthesisOutcome> {
    synthesize_with_defaults(reference, config, &Defaults::builtin())
}

pub fn synthesize_with_defaults(
    reference: &CellLayout,
    config: &SynthesisConfig,
    defaults: &Defaults,
) -> Result<SynthesisOutcome> {
    config.validate()?;
    let domain = *reference.domain();
    let objective_config = ObjectiveConfig {
        diagram: config.diagram_config(&domain, defaults)?,
        lambda_cc: config.lambda_cc,
        lambda_k: config.lambda_k,
    };
    let min_separation = config.resolved_min_separation(&domain, defaults);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let initial_layout = init_layout_with(reference, config.init_jitter_sigma, &mut rng)?;

    let frame = WorkingFrame::new(domain);
    let work_cfg = frame.objective_config(&objective_config)?;
    let work_ref = frame.layout_to_working(reference)?;
    let eval = Evaluator::new(&work_ref, &work_cfg)?;

    let mut current = frame.layout_to_working(&initial_layout)?;
    let mut holes = eval.all_holes(&current)?;
    let initial_objective = eval.evaluate(&current, &holes)?;
    let mut current_value = initial_objective;
    let mut best_cells = current.cells().to_vec();
    let mut best_value = initial_objective;

    let wd = frame.working_domain();
    let step_x = config.move_scale * 0.5 * wd.width();
    let step_y = config.move_scale * 0.5 * wd.height();
    let unit_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let base_temperature = if initial_objective.total > 0.0 {
        config.initial_temperature * initial_objective.total
    } else {
        config.initial_temperature
    };
    let mut temperature = base_temperature;

    let mut trace = SynthesisTrace {
        lambda_cc: config.lambda_cc,
        lambda_k: config.lambda_k,
        steps: Vec::with_capacity(config.steps),
    };
    let n = current.len();
    for step in 0..config.steps {
        let idx = rng.random_range(0..n);
        let mut cells = current.cells().to_vec();
        let old = cells[idx].pos;
        let proposed = if rng.random::<f64>() < config.teleport_probability {
            Point2::new(
                rng.random_range(wd.x_min..=wd.x_max),
                rng.random_range(wd.y_min..=wd.y_max),
            )
        } else {
            let dx = unit_normal.sample(&mut rng) * step_x;
            let dy = unit_normal.sample(&mut rng) * step_y;
            wd.clamp(Point2::new(old.x + dx, old.y + dy))
        };
        cells[idx].pos = proposed;
        let class_id = cells[idx].class_id;
        let candidate = eval.layout_from(cells);
        let class_holes = eval.holes(&candidate, class_id)?;
        let previous_holes = std::mem::replace(&mut holes[class_id], class_holes);
        let value = eval.evaluate(&candidate, &holes)?;

        let delta = value.total - current_value.total;
        let u: f64 = rng.random();
        let accepted = delta < 0.0 || u < (-delta / temperature).exp();
        if accepted {
            current = candidate;
            current_value = value;
            if value.total < best_value.total {
                best_value = value;
                best_cells = current.cells().to_vec();
            }
        } else {
            holes[class_id] = previous_holes;
        }
        trace.steps.push(TraceStep {
            step,
            total: current_value.total,
            l_cc: current_value.l_cc,
            k_term: current_value.k_term,
            accepted,
        });
        temperature *= config.temperature_decay;
    }

    let best_layout = frame.layout_to_reference(&eval.layout_from(best_cells))?;
    let layout = remove_overlaps(&best_layout, min_separation)?;
    Ok(SynthesisOutcome {
        layout,
        best_layout,
        initial_layout,
        initial_objective,
        best_objective: best_value,
        trace,
        objective_config,
    })
}
