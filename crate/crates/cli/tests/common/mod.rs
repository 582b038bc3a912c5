#![allow(dead_code)]

use cellscape::{CellLayout, Domain};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};

pub fn octagon_ring() -> CellLayout {
    let pts = (0..8).map(|k| {
        let a = std::f64::consts::TAU * k as f64 / 8.0;
        (a.cos(), a.sin(), 0)
    });
    CellLayout::from_triples(
        Domain::new(-1.5, -1.5, 1.5, 1.5).unwrap(),
        vec!["ring".into()],
        pts,
    )
    .unwrap()
}

pub fn unit_square() -> CellLayout {
    CellLayout::from_triples(
        Domain::new(-0.5, -0.5, 1.5, 1.5).unwrap(),
        vec!["a".into()],
        [(0.0, 0.0, 0), (1.0, 0.0, 0), (0.0, 1.0, 0), (1.0, 1.0, 0)],
    )
    .unwrap()
}

/// Two classes of 30 points, each drawn around its own center.
pub fn two_clusters() -> CellLayout {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let n = Normal::new(0.0, 8.0).unwrap();
    let domain = Domain::new(0.0, 0.0, 100.0, 100.0).unwrap();
    let mut t = Vec::new();
    for (class, (cx, cy)) in [(30.0, 35.0), (70.0, 65.0)].into_iter().enumerate() {
        for _ in 0..30 {
            let p = domain.clamp(cellscape::Point2::new(cx + n.sample(&mut rng), cy + n.sample(&mut rng)));
            t.push((p.x, p.y, class));
        }
    }
    CellLayout::from_triples(domain, vec!["left".into(), "right".into()], t).unwrap()
}

/// 60-point annulus (class 0) around a 15-point interior cluster (class 1).
pub fn annulus_with_core() -> CellLayout {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let angle = Uniform::new(0.0, std::f64::consts::TAU).unwrap();
    let radius = Uniform::new(30.0, 40.0).unwrap();
    let core = Normal::new(0.0, 5.0).unwrap();
    let mut t = Vec::new();
    for _ in 0..60 {
        let (a, r) = (angle.sample(&mut rng), radius.sample(&mut rng));
        t.push((50.0 + r * a.cos(), 50.0 + r * a.sin(), 0));
    }
    for _ in 0..15 {
        t.push((50.0 + core.sample(&mut rng), 50.0 + core.sample(&mut rng), 1));
    }
    CellLayout::from_triples(
        Domain::new(0.0, 0.0, 100.0, 100.0).unwrap(),
        vec!["ring".into(), "core".into()],
        t,
    )
    .unwrap()
}

/// Same class counts and domain as `reference`, positions uniform.
pub fn uniform_like(reference: &CellLayout, seed: u64) -> CellLayout {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = reference.domain();
    let ux = Uniform::new_inclusive(d.x_min, d.x_max).unwrap();
    let uy = Uniform::new_inclusive(d.y_min, d.y_max).unwrap();
    let cells = reference
        .cells()
        .iter()
        .map(|c| cellscape::Cell {
            pos: cellscape::Point2::new(ux.sample(&mut rng), uy.sample(&mut rng)),
            class_id: c.class_id,
        })
        .collect();
    reference.with_cells(cells).unwrap()
}

pub fn three_class_layout() -> CellLayout {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let u = Uniform::new(2.0, 98.0).unwrap();
    let t: Vec<(f64, f64, usize)> = (0..45)
        .map(|i| (u.sample(&mut rng), u.sample(&mut rng), i % 3))
        .collect();
    CellLayout::from_triples(
        Domain::new(0.0, 0.0, 100.0, 100.0).unwrap(),
        vec!["tumor".into(), "stroma".into(), "immune".into()],
        t,
    )
    .unwrap()
}

pub fn write_layout(dir: &std::path::Path, name: &str, layout: &CellLayout) -> std::path::PathBuf {
    let path = dir.join(name);
    let format = cellscape::io::LayoutFormat::from_path(&path).unwrap();
    cellscape::io::save_layout(layout, &path, format).unwrap();
    path
}
