use serde::{Deserialize, Serialize};

use crate::diagram::GridDiagram;

/// The lexicographically ordered termination measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Complexity {
    pub gn: usize,
    pub scr: usize,
    pub plan_remaining: usize,
}

/// Rows of a column's two markings relative to a reference row, smaller first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HPoint {
    pub u: usize,
    pub v: usize,
}

impl HPoint {
    pub fn new(rows: (usize, usize), origin: usize, modulus: usize) -> Self {
        let a = (rows.0 + modulus - origin) % modulus;
        let b = (rows.1 + modulus - origin) % modulus;
        HPoint {
            u: a.min(b),
            v: a.max(b),
        }
    }

    fn inside(&self, r: usize) -> bool {
        self.u < r && r < self.v
    }
}

/// Whether two columns with marking rows `c1`, `c2` interleave on `Z_modulus`.
pub fn interleaving_pair(c1: (usize, usize), c2: (usize, usize), modulus: usize) -> bool {
    let rows = [c1.0, c1.1, c2.0, c2.1];
    for i in 0..4 {
        for j in i + 1..4 {
            if rows[i] % modulus == rows[j] % modulus {
                return false;
            }
        }
    }
    let h = HPoint::new(c1, 0, modulus);
    h.inside(c2.0 % modulus) != h.inside(c2.1 % modulus)
}

fn lifted_columns(d: &GridDiagram) -> (Vec<(usize, usize)>, usize) {
    let lift = if d.p() == 1 { d.clone() } else { d.lift() };
    let cols = lift
        .o_marks()
        .iter()
        .zip(lift.x_marks())
        .map(|(o, x)| (o.row, x.row))
        .collect();
    (cols, lift.n())
}

/// Number of interleaving column pairs in the lift.
pub fn scr(d: &GridDiagram) -> usize {
    let (cols, m) = lifted_columns(d);
    let mut count = 0;
    for i in 0..cols.len() {
        for j in i + 1..cols.len() {
            if interleaving_pair(cols[i], cols[j], m) {
                count += 1;
            }
        }
    }
    count
}

/// `scr` recomputed with the H-map taken relative to row `origin` of the
/// lift: a pair interleaves when exactly one H-coordinate of the second
/// column falls in the open region cut out by the first.
pub fn scr_hmap(d: &GridDiagram, origin: usize) -> usize {
    let (cols, m) = lifted_columns(d);
    let pts: Vec<HPoint> = cols.iter().map(|&c| HPoint::new(c, origin, m)).collect();
    let mut count = 0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let (a, b) = (pts[i], pts[j]);
            let distinct = a.u != a.v && b.u != b.v && a.u != b.u && a.u != b.v && a.v != b.u && a.v != b.v;
            if distinct && a.inside(b.u) != a.inside(b.v) {
                count += 1;
            }
        }
    }
    count
}

pub fn complexity(d: &GridDiagram, plan_remaining: usize) -> Complexity {
    Complexity {
        gn: d.n(),
        scr: scr(d),
        plan_remaining,
    }
}
