//! One-dimensional sublevel persistence of a distance field on a grid.
//!
//! The filtration is the lower-star cubical complex on the grid nodes: a
//! node enters at its value, an edge between 4-neighbours and a unit square
//! at the max of their corners. A hole of that complex is a bounded
//! component of its complement, and the complement's nodes are connected
//! through 8-neighbourhoods. Holes are therefore tracked as components of
//! the superlevel set under 8-connectivity, sweeping values downwards:
//!
//! * a component appears at a local maximum, which is where the hole dies;
//! * when a node joins several components, every component but the oldest
//!   (highest peak) is split off as a hole born at that node's value;
//! * nodes on the grid border belong to the unbounded outer region, which
//!   is older than any component and never becomes a hole.
//!
//! Ties in value are ordered by row-major node index.

use serde::{Deserialize, Serialize};

use crate::layout::Point2;
use crate::topology::edt::DistanceField;

/// One hole: threshold at which it appears and at which it fills in, plus
/// the node whose addition fills it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersistencePoint {
    pub birth: f64,
    pub death: f64,
    pub center: Point2,
    /// `(row, col)` of the killing grid node.
    pub center_node: (usize, usize),
}

impl PersistencePoint {
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }
}

const NONE: u32 = u32::MAX;

/// Union-find over grid nodes plus the outer region (index `n`). A root is
/// always its component's peak node, since younger roots are attached to
/// the elder on every merge.
struct Components {
    parent: Vec<u32>,
    /// Processing rank of each node; the outer region has rank 0 and nodes
    /// are ranked from 1.
    rank: Vec<u32>,
}

impl Components {
    #[inline]
    fn find(&mut self, mut x: u32) -> u32 {
        loop {
            let p = self.parent[x as usize];
            if p == x {
                return x;
            }
            let gp = self.parent[p as usize];
            self.parent[x as usize] = gp;
            x = p;
        }
    }
}

/// All holes with persistence strictly above `floor`, sorted by decreasing
/// persistence (ties: lower birth, then node index).
pub fn persistence_h1(field: &DistanceField, floor: f64) -> Vec<PersistencePoint> {
    let grid = field.grid;
    let (rows, cols) = (grid.rows, grid.cols);
    let n = rows * cols;
    if n == 0 {
        return Vec::new();
    }
    let outer = n as u32;

    // Values are non-negative, so their bit patterns sort like the values.
    let mut order: Vec<u128> = field
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| (((!v.to_bits()) as u128) << 64) | i as u128)
        .collect();
    order.sort_unstable();

    let mut comps = Components {
        parent: vec![NONE; n + 1],
        rank: vec![0; n + 1],
    };
    comps.parent[n] = outer;

    let offsets: [isize; 8] = {
        let w = cols as isize;
        [-w - 1, -w, -w + 1, -1, 1, w - 1, w, w + 1]
    };
    let mut out = Vec::new();
    let mut roots = [0u32; 9];
    for (k, key) in order.iter().enumerate() {
        let idx = (*key & u64::MAX as u128) as usize;
        let (r, c) = (idx / cols, idx % cols);
        let value = field.values[idx];

        let mut count = 0;
        let mut add = |root: u32, roots: &mut [u32; 9]| {
            if !roots[..count].contains(&root) {
                roots[count] = root;
                count += 1;
            }
        };
        if r == 0 || c == 0 || r + 1 == rows || c + 1 == cols {
            add(outer, &mut roots);
            for nr in r.saturating_sub(1)..=(r + 1).min(rows - 1) {
                for nc in c.saturating_sub(1)..=(c + 1).min(cols - 1) {
                    let j = nr * cols + nc;
                    if j != idx && comps.parent[j] != NONE {
                        let root = comps.find(j as u32);
                        add(root, &mut roots);
                    }
                }
            }
        } else {
            for off in offsets {
                let j = (idx as isize + off) as usize;
                if comps.parent[j] != NONE {
                    let root = comps.find(j as u32);
                    add(root, &mut roots);
                }
            }
        }
        let roots = &roots[..count];

        let me = idx as u32;
        comps.rank[idx] = k as u32 + 1;
        if roots.is_empty() {
            comps.parent[idx] = me;
            continue;
        }
        let elder = *roots
            .iter()
            .min_by_key(|&&root| comps.rank[root as usize])
            .unwrap();
        for &root in roots {
            if root == elder {
                continue;
            }
            let peak = root as usize;
            let death = field.values[peak];
            if death - value > floor {
                out.push(PersistencePoint {
                    birth: value,
                    death,
                    center: grid.node_at(peak),
                    center_node: (peak / cols, peak % cols),
                });
            }
            comps.parent[peak] = elder;
        }
        comps.parent[idx] = elder;
    }

    out.sort_by(|a, b| {
        b.persistence()
            .total_cmp(&a.persistence())
            .then(a.birth.total_cmp(&b.birth))
            .then(a.center_node.cmp(&b.center_node))
    });
    out
}
