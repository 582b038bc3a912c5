//! Acceptance checks, one line per criterion. Run with
//! `cargo test -p cellscape-cli --test acceptance`.

mod common;

use std::time::{Duration, Instant};

use cellscape::matching::{cell_configuration_loss, metric_report, optimal_match, pd_ccmd, pd_emd};
use cellscape::spatial::{cross_k, location_k};
use cellscape::synthesis::{synthesize, SynthesisConfig};
use cellscape::topology::{
    class_holes, distance_transform, vectorize_diagram, DensityScope, DiagramConfig, EnrichedHole,
    EnrichedPersistenceDiagram, PersistenceBuckets,
};
use cellscape::{BandwidthSet, CellLayout, ClassFilter, Domain, Point2, RadiusGrid};
use cellscape_cli::args::{DescriptorArgs, SynthesizeArgs};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn random_layout(rng: &mut ChaCha8Rng, domain: Domain, max_points: usize, classes: usize) -> CellLayout {
    let n = rng.random_range(0..=max_points);
    let t: Vec<(f64, f64, usize)> = (0..n)
        .map(|_| {
            (
                rng.random_range(domain.x_min..domain.x_max),
                rng.random_range(domain.y_min..domain.y_max),
                rng.random_range(0..classes),
            )
        })
        .collect();
    CellLayout::from_triples(domain, (0..classes).map(|c| format!("c{c}")).collect(), t).unwrap()
}

fn random_diagram(rng: &mut ChaCha8Rng, holes: usize, k_arity: usize, density_arity: usize) -> EnrichedPersistenceDiagram {
    let points = (0..holes)
        .map(|_| {
            let birth = rng.random_range(0.0..1.0);
            EnrichedHole {
                birth,
                death: birth + rng.random_range(0.01..1.0),
                center: Point2::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)),
                k_vec: (0..k_arity).map(|_| rng.random_range(0.0..2.0)).collect(),
                density_vec: (0..density_arity).map(|_| rng.random_range(0.0..5.0)).collect(),
            }
        })
        .collect();
    EnrichedPersistenceDiagram {
        class_id: Some(0),
        points,
        k_arity,
        density_arity,
    }
}

// 1. Distance transform against brute force on a 128 x 128 grid.
fn edt_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let h = 1.0 / 127.0;
    let domain = Domain::new(0.0, 0.0, 1.0, 1.0).unwrap();
    let mut worst_err = 0.0f64;
    let mut worst_time = Duration::ZERO;
    for _ in 0..50 {
        let layout = loop {
            let l = random_layout(&mut rng, domain, 50, 3);
            if !l.is_empty() {
                break l;
            }
        };
        let start = Instant::now();
        let field = distance_transform(&layout, ClassFilter::All, h).unwrap();
        worst_time = worst_time.max(start.elapsed());
        let g = field.grid;
        if g.rows != 128 || g.cols != 128 {
            return Outcome::new(false, format!("grid is {}x{}", g.rows, g.cols));
        }
        let sites = layout.positions(ClassFilter::All);
        for r in 0..g.rows {
            for c in 0..g.cols {
                let x = domain.x_min + c as f64 * h;
                let y = domain.y_min + r as f64 * h;
                let brute = sites
                    .iter()
                    .map(|p| ((p.x - x).powi(2) + (p.y - y).powi(2)).sqrt())
                    .fold(f64::INFINITY, f64::min);
                worst_err = worst_err.max((field.at(r, c) - brute).abs());
            }
        }
    }
    Outcome::new(
        worst_err <= 1e-12 && worst_time < Duration::from_millis(500),
        format!("max |err| {worst_err:.2e} (tol 1e-12), slowest case {worst_time:.2?} (limit 0.5 s)"),
    )
}

fn analytic_config(h: f64) -> DiagramConfig {
    DiagramConfig {
        radii: RadiusGrid::linspace(0.1, 0.8, 8).unwrap(),
        sigmas: BandwidthSet::new(vec![0.03, 0.06, 0.12, 0.24]).unwrap(),
        h,
        persistence_floor: None,
        density_scope: DensityScope::AllClasses,
    }
}

// 2. Analytic union-of-disks persistence.
fn analytic_persistence() -> Outcome {
    let h = 1.0 / 512.0;
    let cfg = analytic_config(h);
    let square = class_holes(&common::unit_square(), ClassFilter::All, &cfg).unwrap();
    let octagon = class_holes(&common::octagon_ring(), ClassFilter::All, &cfg).unwrap();
    let half_side = (std::f64::consts::PI / 8.0).sin();
    let square_ok = square.len() == 1
        && (square[0].birth - 0.5).abs() <= 2.0 * h
        && (square[0].death - std::f64::consts::FRAC_1_SQRT_2).abs() <= 2.0 * h;
    let octagon_ok = !octagon.is_empty()
        && (octagon[0].death - 1.0).abs() <= 2.0 * h
        && (octagon[0].birth - half_side).abs() <= 2.0 * h;
    let fmt = |v: &[cellscape::topology::PersistencePoint]| {
        v.iter()
            .map(|p| format!("({:.5}, {:.5})", p.birth, p.death))
            .collect::<Vec<_>>()
            .join(" ")
    };
    Outcome::new(
        square_ok && octagon_ok,
        format!(
            "square [{}] want (0.5, 0.70711); octagon [{}] want death 1.0; tol 2h = {:.5}",
            fmt(&square),
            fmt(&octagon),
            2.0 * h
        ),
    )
}

fn oracle_cross_k(layout: &CellLayout, s: usize, t: usize, radii: &[f64]) -> Vec<f64> {
    let src = layout.class_positions(s);
    let tgt = layout.class_positions(t);
    let pairs = if s == t {
        src.len() * src.len().saturating_sub(1)
    } else {
        src.len() * tgt.len()
    };
    if pairs == 0 {
        return vec![0.0; radii.len()];
    }
    let a = layout.domain().area() / pairs as f64;
    radii
        .iter()
        .map(|&r| {
            let mut count = 0u64;
            for (i, p) in src.iter().enumerate() {
                for (j, q) in tgt.iter().enumerate() {
                    if s == t && i == j {
                        continue;
                    }
                    let d2 = (p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y);
                    if d2 < r * r {
                        count += 1;
                    }
                }
            }
            a * count as f64
        })
        .collect()
}

fn oracle_location_k(layout: &CellLayout, x: Point2, t: usize, radii: &[f64]) -> Vec<f64> {
    let tgt = layout.class_positions(t);
    if tgt.is_empty() {
        return vec![0.0; radii.len()];
    }
    let a = layout.domain().area() / tgt.len() as f64;
    radii
        .iter()
        .map(|&r| {
            let count = tgt
                .iter()
                .filter(|q| (x.x - q.x) * (x.x - q.x) + (x.y - q.y) * (x.y - q.y) < r * r)
                .count();
            a * count as f64
        })
        .collect()
}

// 3. K-functions against double-loop counting.
fn k_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut mismatches = 0;
    let mut checked = 0;
    for _ in 0..100 {
        let w = rng.random_range(5.0..200.0);
        let domain = Domain::new(0.0, 0.0, w, w * rng.random_range(0.5..2.0)).unwrap();
        let classes = rng.random_range(1..=4);
        let layout = random_layout(&mut rng, domain, 60, classes);
        let mut r: Vec<f64> = (0..rng.random_range(1..=10))
            .map(|_| rng.random_range(0.0..0.5) * w)
            .collect();
        r.sort_by(f64::total_cmp);
        r.dedup();
        r.retain(|&v| v > 0.0);
        if r.is_empty() {
            r.push(0.1 * w);
        }
        let radii = RadiusGrid::new(r.clone()).unwrap();
        let x = Point2::new(
            rng.random_range(domain.x_min..domain.x_max),
            rng.random_range(domain.y_min..domain.y_max),
        );
        for s in 0..classes {
            for t in 0..classes {
                checked += 1;
                if cross_k(&layout, s, t, &radii).unwrap().values != oracle_cross_k(&layout, s, t, &r) {
                    mismatches += 1;
                }
            }
        }
        for t in 0..classes {
            checked += 1;
            if location_k(&layout, x, t, &radii).unwrap().values != oracle_location_k(&layout, x, t, &r) {
                mismatches += 1;
            }
        }
    }
    Outcome::new(
        mismatches == 0,
        format!("{checked} vectors compared exactly, {mismatches} mismatches"),
    )
}

fn padded_cost(a: &EnrichedPersistenceDiagram, b: &EnrichedPersistenceDiagram, i: usize, j: usize) -> f64 {
    let v = |d: &EnrichedPersistenceDiagram, k: usize| {
        d.points.get(k).map_or(vec![0.0; d.k_arity], |p| p.k_vec.clone())
    };
    let (x, y) = (v(a, i), v(b, j));
    x.iter().zip(&y).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
}

fn exhaustive_min(a: &EnrichedPersistenceDiagram, b: &EnrichedPersistenceDiagram) -> f64 {
    fn rec(
        a: &EnrichedPersistenceDiagram,
        b: &EnrichedPersistenceDiagram,
        n: usize,
        i: usize,
        used: &mut [bool],
        acc: f64,
        best: &mut f64,
    ) {
        if i == n {
            *best = best.min(acc);
            return;
        }
        for j in 0..n {
            if !used[j] {
                used[j] = true;
                rec(a, b, n, i + 1, used, acc + padded_cost(a, b, i, j), best);
                used[j] = false;
            }
        }
    }
    let n = a.len().max(b.len());
    if n == 0 {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    rec(a, b, n, 0, &mut vec![false; n], 0.0, &mut best);
    best
}

// 4. Optimal matching against enumeration, plus Hungarian timing.
fn matching_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let na = rng.random_range(0..=6);
        let nb = rng.random_range(0..=6);
        let a = random_diagram(&mut rng, na, 8, 4);
        let b = random_diagram(&mut rng, nb, 8, 4);
        let got = optimal_match(&a, &b).unwrap().cost;
        worst = worst.max((got - exhaustive_min(&a, &b)).abs());
    }
    let a = random_diagram(&mut rng, 50, 24, 4);
    let b = random_diagram(&mut rng, 50, 24, 4);
    let start = Instant::now();
    optimal_match(&a, &b).unwrap();
    let elapsed = start.elapsed();
    Outcome::new(
        worst <= 1e-9 && elapsed < Duration::from_secs(1),
        format!("max |cost - enumeration| {worst:.2e} (tol 1e-9), 50x50 match {elapsed:.2?} (limit 1 s)"),
    )
}

// 5. Metric identities, symmetry and triangle inequality.
fn metric_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let tol = 1e-9;
    let mut worst_identity = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(0..=12);
        let d = random_diagram(&mut rng, n, 8, 4);
        let count = rng.random_range(5..100);
        worst_identity = worst_identity
            .max(pd_emd(&d.pairs(), &d.pairs()).abs())
            .max(pd_ccmd(&d, &d, count, count).unwrap().abs())
            .max(cell_configuration_loss(&d, &d).unwrap().abs());
    }
    let mut worst_symmetry = 0.0f64;
    let mut worst_triangle = f64::NEG_INFINITY;
    for _ in 0..100 {
        let ds: Vec<Vec<(f64, f64)>> = (0..3)
            .map(|_| {
                let n = rng.random_range(0..=10);
                random_diagram(&mut rng, n, 1, 1).pairs()
            })
            .collect();
        let (x, y, z) = (&ds[0], &ds[1], &ds[2]);
        worst_symmetry = worst_symmetry.max((pd_emd(x, y) - pd_emd(y, x)).abs());
        worst_triangle = worst_triangle.max(pd_emd(x, z) - pd_emd(x, y) - pd_emd(y, z));
    }
    Outcome::new(
        worst_identity <= tol && worst_symmetry <= tol && worst_triangle <= tol,
        format!(
            "max self-distance {worst_identity:.2e}, max asymmetry {worst_symmetry:.2e}, max triangle excess {worst_triangle:.2e} (tol 1e-9)"
        ),
    )
}

// 6. PD-CCMD is exactly zero for classes with fewer than five cells.
fn small_class_rule() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut violations = 0;
    let mut small_cases = 0;
    for _ in 0..200 {
        let (na, nb) = (rng.random_range(1..=6), rng.random_range(1..=6));
        let a = random_diagram(&mut rng, na, 8, 4);
        let b = random_diagram(&mut rng, nb, 8, 4);
        let (ca, cb) = (rng.random_range(0..10), rng.random_range(0..10));
        let v = pd_ccmd(&a, &b, ca, cb).unwrap();
        if ca < 5 || cb < 5 {
            small_cases += 1;
            if v != 0.0 {
                violations += 1;
            }
        }
    }
    // Same rule through the layout-level report: 4 cells of class 1.
    let domain = Domain::new(0.0, 0.0, 10.0, 10.0).unwrap();
    let reference = CellLayout::from_triples(
        domain,
        vec!["big".into(), "small".into()],
        (0..20)
            .map(|i| (0.5 + (i % 5) as f64 * 2.0, 0.5 + (i / 5) as f64 * 2.5, 0))
            .chain([(2.0, 2.0, 1), (8.0, 2.0, 1), (2.0, 8.0, 1), (8.0, 8.0, 1)]),
    )
    .unwrap();
    let gen = common::uniform_like(&reference, 66);
    let report = metric_report(&gen, &reference, &analytic_config(0.05)).unwrap();
    let layout_ok = report.per_class[1].values.pd_ccmd == 0.0;
    Outcome::new(
        violations == 0 && layout_ok,
        format!(
            "{small_cases} small-class cases, {violations} nonzero; 4-cell class in a report gives {}",
            report.per_class[1].values.pd_ccmd
        ),
    )
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

// 7. Synthesis improves the objective and beats a uniform baseline.
fn synthesis_improvement() -> Outcome {
    let references = [
        ("octagon ring", common::octagon_ring()),
        ("two clusters", common::two_clusters()),
        ("annulus + core", common::annulus_with_core()),
    ];
    let defaults = cellscape::defaults::Defaults::builtin();
    let mut pass = true;
    let mut details = Vec::new();
    let mut slowest = Duration::ZERO;
    for (name, reference) in &references {
        let report_cfg = defaults.diagram_config(reference.domain()).unwrap();
        let (mut initial, mut fin) = (Vec::new(), Vec::new());
        let (mut synth_ccmd, mut base_ccmd) = (0.0, 0.0);
        for seed in 0..10u64 {
            let cfg = SynthesisConfig {
                seed,
                steps: 20_000,
                ..SynthesisConfig::default()
            };
            let start = Instant::now();
            let out = synthesize(reference, &cfg).unwrap();
            slowest = slowest.max(start.elapsed());
            initial.push(out.initial_objective.total);
            fin.push(out.best_objective.total);
            synth_ccmd += metric_report(&out.layout, reference, &report_cfg).unwrap().mean.pd_ccmd;
            let baseline = common::uniform_like(reference, 10_000 + seed);
            base_ccmd += metric_report(&baseline, reference, &report_cfg).unwrap().mean.pd_ccmd;
        }
        let (mi, mf) = (median(&mut initial), median(&mut fin));
        let (synth_ccmd, base_ccmd) = (synth_ccmd / 10.0, base_ccmd / 10.0);
        let ok = mf <= 0.5 * mi && synth_ccmd < base_ccmd;
        pass &= ok;
        details.push(format!(
            "{name}: median objective {mi:.4} -> {mf:.4} ({:.3}x), PD-CCMD {synth_ccmd:.4} vs baseline {base_ccmd:.4}",
            mf / mi
        ));
    }
    pass &= slowest < Duration::from_secs(120);
    details.push(format!("slowest run {slowest:.2?} (limit 120 s)"));
    Outcome::new(pass, details.join("; "))
}

/// Bottleneck distance with the L-infinity ground metric and diagonal
/// matching.
fn bottleneck(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let diag = |p: (f64, f64)| (p.1 - p.0) / 2.0;
    let cost = |p: (f64, f64), q: (f64, f64)| (p.0 - q.0).abs().max((p.1 - q.1).abs());
    let mut candidates = vec![0.0];
    candidates.extend(a.iter().map(|&p| diag(p)));
    candidates.extend(b.iter().map(|&q| diag(q)));
    for &p in a {
        for &q in b {
            candidates.push(cost(p, q));
        }
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    // Left: a points then b diagonals; right: b points then a diagonals.
    let (n, m) = (a.len(), b.len());
    let feasible = |t: f64| {
        let edge = |i: usize, j: usize| -> bool {
            match (i < n, j < m) {
                (true, true) => cost(a[i], b[j]) <= t,
                (true, false) => j - m == i && diag(a[i]) <= t,
                (false, true) => i - n == j && diag(b[j]) <= t,
                (false, false) => true,
            }
        };
        let size = n + m;
        let mut owner = vec![usize::MAX; size];
        fn augment(
            i: usize,
            size: usize,
            edge: &dyn Fn(usize, usize) -> bool,
            seen: &mut [bool],
            owner: &mut [usize],
        ) -> bool {
            for j in 0..size {
                if !seen[j] && edge(i, j) {
                    seen[j] = true;
                    if owner[j] == usize::MAX || augment(owner[j], size, edge, seen, owner) {
                        owner[j] = i;
                        return true;
                    }
                }
            }
            false
        }
        (0..size).all(|i| augment(i, size, &edge, &mut vec![false; size], &mut owner))
    };
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

// 8. Stability of the diagram under jitter of size h.
fn stability() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let domain = Domain::new(0.0, 0.0, 100.0, 100.0).unwrap();
    let defaults = cellscape::defaults::Defaults::builtin();
    let cfg = defaults.diagram_config(&domain).unwrap();
    let h = cfg.h;
    let eps = h;
    let mut within = 0;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let t: Vec<(f64, f64, usize)> = (0..80)
            .map(|_| (rng.random_range(0.0..100.0), rng.random_range(0.0..100.0), 0))
            .collect();
        let layout = CellLayout::from_triples(domain, vec!["a".into()], t.clone()).unwrap();
        let jittered = CellLayout::from_triples(
            domain,
            vec!["a".into()],
            t.iter().map(|&(x, y, c)| {
                let a = rng.random_range(0.0..std::f64::consts::TAU);
                let p = domain.clamp(Point2::new(x + eps * a.cos(), y + eps * a.sin()));
                (p.x, p.y, c)
            }),
        )
        .unwrap();
        let pairs = |l: &CellLayout| -> Vec<(f64, f64)> {
            class_holes(l, ClassFilter::All, &cfg)
                .unwrap()
                .iter()
                .map(|p| (p.birth, p.death))
                .collect()
        };
        let d = bottleneck(&pairs(&layout), &pairs(&jittered));
        worst = worst.max(d);
        if d <= eps + 2.0 * h {
            within += 1;
        }
    }
    Outcome::new(
        within >= 95,
        format!(
            "{within}/100 trials within eps + 2h = {:.4} (need 95), worst bottleneck {worst:.4}",
            eps + 2.0 * h
        ),
    )
}

// 9. Seeded synthesis through the CLI is byte-identical across runs.
fn determinism() -> Outcome {
    let dir = tempfile::TempDir::new().unwrap();
    let reference = common::write_layout(dir.path(), "ref.csv", &common::two_clusters());
    let mut files = Vec::new();
    for run in 0..2 {
        let output = dir.path().join(format!("synth{run}.csv"));
        let trace = dir.path().join(format!("trace{run}.csv"));
        let args = SynthesizeArgs {
            reference: reference.clone(),
            output: output.clone(),
            trace: Some(trace.clone()),
            config: None,
            descriptors: DescriptorArgs::default(),
            seed: Some(42),
            steps: None,
            lambda_cc: None,
            lambda_k: None,
            min_separation: None,
            emit_init: None,
            report: None,
        };
        let mut stdout = Vec::new();
        if let Err(e) = cellscape_cli::cmd_synthesize(&args, &mut stdout) {
            return Outcome::new(false, format!("cmd_synthesize failed: {e}"));
        }
        files.push((std::fs::read(&output).unwrap(), std::fs::read(&trace).unwrap()));
    }
    let same_layout = files[0].0 == files[1].0;
    let same_trace = files[0].1 == files[1].1;
    Outcome::new(
        same_layout && same_trace && !files[0].0.is_empty(),
        format!(
            "layout identical: {same_layout} ({} bytes), trace identical: {same_trace} ({} bytes)",
            files[0].0.len(),
            files[0].1.len()
        ),
    )
}

// 10. Log-histogram features against direct bucketing.
fn vectorization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut mismatches = 0;
    for _ in 0..100 {
        let n = rng.random_range(0..=30);
        let d = random_diagram(&mut rng, n, 2, 1);
        let mut edges = vec![0.0];
        for _ in 0..rng.random_range(0..6) {
            let last = *edges.last().unwrap();
            edges.push(last + rng.random_range(0.05..0.4));
        }
        let buckets = PersistenceBuckets::new(edges.clone()).unwrap();
        let mut counts = vec![0usize; edges.len()];
        for p in &d.points {
            let pers = p.death - p.birth;
            let mut k = 0;
            for (i, &e) in edges.iter().enumerate() {
                if pers >= e {
                    k = i;
                }
            }
            counts[k] += 1;
        }
        let expected: Vec<f64> = counts.iter().map(|&c| (1.0 + c as f64).ln()).collect();
        if vectorize_diagram(&d, &buckets).log_histogram != expected {
            mismatches += 1;
        }
    }
    let buckets = PersistenceBuckets::new(vec![0.0, 0.1, 0.2]).unwrap();
    let empty = EnrichedPersistenceDiagram::empty(Some(0), 8, 4);
    let empty_ok = vectorize_diagram(&empty, &buckets).log_histogram == vec![0.0; 3];
    Outcome::new(
        mismatches == 0 && empty_ok,
        format!("100 diagrams, {mismatches} mismatches; empty diagram gives zero vector: {empty_ok}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("EDT oracle", edt_oracle),
        ("analytic persistence", analytic_persistence),
        ("K-function oracle", k_oracle),
        ("matching oracle", matching_oracle),
        ("metric identities", metric_identities),
        ("small-class rule", small_class_rule),
        ("synthesis improvement", synthesis_improvement),
        ("stability", stability),
        ("determinism", determinism),
        ("vectorization", vectorization),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "[{status}] {:>2}. {name}: {} [{:.1?}]",
            i + 1,
            outcome.detail,
            start.elapsed()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
