#![allow(dead_code)]

use lensgrid::diagram::RawDiagram;
use lensgrid::moves::{self, CommuteClass, Corner, Move};
use lensgrid::{GridDiagram, MarkKind, Marking};
use rand::seq::SliceRandom;
use rand::Rng;

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

pub fn random_pq<R: Rng>(rng: &mut R, max_p: u32) -> (u32, i64) {
    let p = rng.gen_range(1..=max_p);
    if p == 1 {
        return (1, 0);
    }
    loop {
        let q = rng.gen_range(-(p as i64) + 1..p as i64);
        if gcd(q, p as i64) == 1 {
            return (p, q);
        }
    }
}

pub fn random_diagram_with<R: Rng>(rng: &mut R, p: u32, q: i64, n: usize) -> GridDiagram {
    let mut rows_o: Vec<usize> = (0..n).collect();
    let mut rows_x: Vec<usize> = (0..n).collect();
    rows_o.shuffle(rng);
    rows_x.shuffle(rng);
    let mut cells = |rows: &[usize]| -> Vec<[i64; 2]> {
        (0..n)
            .map(|c| [(c + n * rng.gen_range(0..p as usize)) as i64, rows[c] as i64])
            .collect()
    };
    let o = cells(&rows_o);
    let x = cells(&rows_x);
    let raw = RawDiagram {
        p: p as i64,
        q,
        n: n as i64,
        o,
        x,
    };
    GridDiagram::validate(&raw).expect("random diagram is valid")
}

pub fn random_diagram<R: Rng>(rng: &mut R, max_p: u32, max_n: usize) -> GridDiagram {
    let (p, q) = random_pq(rng, max_p);
    let n = rng.gen_range(1..=max_n);
    random_diagram_with(rng, p, q, n)
}

/// Every destabilization available in `d`, as (A, B, C) triples.
pub fn destabilizations(d: &GridDiagram) -> Vec<Move> {
    let mut out = Vec::new();
    for kind in [MarkKind::O, MarkKind::X] {
        for &b in d.marks(kind) {
            let bm = Marking::new(kind, b);
            let col = d.marks(kind.other())[d.column_of(b)];
            let row_mate = match kind {
                MarkKind::O => d.x_marks()[d.x_in_row(b.row)],
                MarkKind::X => d.o_marks()[d.o_in_row(b.row)],
            };
            let a = Marking::new(kind.other(), col);
            let c = Marking::new(kind.other(), row_mate);
            let mv = Move::Destabilize { a, b: bm, c };
            if moves::apply(d, &mv).is_ok() {
                out.push(mv);
            }
        }
    }
    out
}

/// A random move preserving the link type, or `None` if the draw found none.
pub fn random_isotopy<R: Rng>(rng: &mut R, d: &GridDiagram, max_n: usize) -> Option<Move> {
    let n = d.n();
    match rng.gen_range(0..5) {
        0 if n >= 2 => {
            let j = rng.gen_range(0..n);
            (moves::classify_column_commutation(d, j).ok()? == CommuteClass::NonInterleaving)
                .then_some(Move::ColumnCommute { column: j })
        }
        1 if n >= 2 => {
            let r = rng.gen_range(0..n);
            (moves::classify_row_commutation(d, r).ok()? == CommuteClass::NonInterleaving)
                .then_some(Move::RowCommute { row: r })
        }
        2 => Some(Move::Translate {
            h: rng.gen_range(-20..20),
            v: rng.gen_range(-6..6),
        }),
        3 if n < max_n => {
            let kind = if rng.gen() { MarkKind::O } else { MarkKind::X };
            let cell = d.marks(kind)[rng.gen_range(0..n)];
            let corner = Corner::ALL[rng.gen_range(0..4)];
            Some(Move::Stabilize {
                mark: Marking::new(kind, cell),
                corner,
            })
        }
        4 => destabilizations(d).choose(rng).copied(),
        _ => None,
    }
}
