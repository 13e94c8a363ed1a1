use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{Cell, GridDiagram, MarkKind, Marking};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CommuteClass {
    NonInterleaving,
    Interleaving,
    Illegal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn flip(self) -> Self {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }
}

/// An adjacent column pair whose commutation is interleaving.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SkeinCrossing {
    /// Column whose right-hand interface carries the crossing.
    pub left_column: usize,
    pub sign: Sign,
    /// Segment indices of (O left, X left, O right, X right).
    pub segments: [usize; 4],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Corner {
    NW,
    NE,
    SW,
    SE,
}

impl Corner {
    pub const ALL: [Corner; 4] = [Corner::NW, Corner::NE, Corner::SW, Corner::SE];

    fn new_column_east(self) -> bool {
        matches!(self, Corner::NW | Corner::SW)
    }
    fn new_row_south(self) -> bool {
        matches!(self, Corner::NW | Corner::NE)
    }
}

impl FromStr for Corner {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "NW" => Ok(Corner::NW),
            "NE" => Ok(Corner::NE),
            "SW" => Ok(Corner::SW),
            "SE" => Ok(Corner::SE),
            _ => Err(format!("unknown corner {s:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Move {
    ColumnCommute {
        column: usize,
    },
    RowCommute {
        row: usize,
    },
    /// `corner` names the cell of the new 2x2 block left empty.
    Stabilize {
        mark: Marking,
        corner: Corner,
    },
    Destabilize {
        a: Marking,
        b: Marking,
        c: Marking,
    },
    CrossingChange {
        column: usize,
    },
    Resolve {
        column: usize,
    },
    Translate {
        h: i64,
        v: i64,
    },
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::ColumnCommute { column } => write!(f, "commute columns {column},{}", column + 1),
            Move::RowCommute { row } => write!(f, "commute rows {row},{}", row + 1),
            Move::Stabilize { mark, corner } => write!(f, "stabilize {}:{corner:?} at {}", mark.kind, mark.cell),
            Move::Destabilize { a, b, c } => write!(f, "destabilize {a} {b} {c}"),
            Move::CrossingChange { column } => write!(f, "crossing change at {column}"),
            Move::Resolve { column } => write!(f, "resolve at {column}"),
            Move::Translate { h, v } => write!(f, "translate {h},{v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveRecord {
    #[serde(rename = "move")]
    pub mv: Move,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<CommuteClass>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign: Option<Sign>,
    pub key_after: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MoveError {
    #[error("commutation of columns {0},{1} is illegal: a segment holds markings of both")]
    IllegalColumnExchange(usize, usize),
    #[error("commutation of rows {0},{1} is illegal: a strip holds markings of both")]
    IllegalRowExchange(usize, usize),
    #[error("cell {cell} is not in column {left} or {right}")]
    CellNotInPair { cell: Cell, left: usize, right: usize },
    #[error("index {index} out of range for grid number {n}")]
    OutOfRange { index: usize, n: usize },
    #[error("grid number {0} is too small for this move")]
    TooSmall(usize),
    #[error("no marking {0} in the diagram")]
    MissingMarking(Marking),
    #[error("no skein crossing at columns {0},{1}")]
    NoCrossing(usize, usize),
    #[error("not destabilizable: {0}")]
    NotDestabilizable(String),
}

fn in_open(a: usize, b: usize, x: usize, m: usize) -> bool {
    let span = (b + m - a) % m;
    let off = (x + m - a) % m;
    off > 0 && off < span
}

fn trichotomy(left: (usize, usize), right: (usize, usize), m: usize) -> CommuteClass {
    let (a, b) = left;
    let (c, d) = right;
    if a == c || a == d || b == c || b == d {
        return CommuteClass::Illegal;
    }
    if in_open(a, b, c, m) != in_open(a, b, d, m) {
        CommuteClass::Interleaving
    } else {
        CommuteClass::NonInterleaving
    }
}

fn check_pair(d: &GridDiagram, j: usize) -> Result<usize, MoveError> {
    if d.n() < 2 {
        return Err(MoveError::TooSmall(d.n()));
    }
    if j >= d.n() {
        return Err(MoveError::OutOfRange { index: j, n: d.n() });
    }
    Ok((j + 1) % d.n())
}

/// Position of `cell` on the two-column annulus formed by `left_col` and its
/// right neighbour.
pub fn segment_index(d: &GridDiagram, cell: Cell, left_col: usize) -> Result<usize, MoveError> {
    let right = check_pair(d, left_col)?;
    let col = d.column_of(cell);
    let strip = if col == left_col {
        cell.strip
    } else if col == right {
        d.shift_strip(cell.strip, -1)
    } else {
        return Err(MoveError::CellNotInPair {
            cell,
            left: left_col,
            right,
        });
    };
    Ok(d.wrap_index(strip) * d.n() + cell.row)
}

/// Segment indices (O left, X left, O right, X right) for the pair at `j`.
pub fn column_segments(d: &GridDiagram, j: usize) -> Result<[usize; 4], MoveError> {
    let r = check_pair(d, j)?;
    let seg = |c| segment_index(d, c, j);
    Ok([
        seg(d.o_marks()[j])?,
        seg(d.x_marks()[j])?,
        seg(d.o_marks()[r])?,
        seg(d.x_marks()[r])?,
    ])
}

pub fn classify_column_commutation(d: &GridDiagram, j: usize) -> Result<CommuteClass, MoveError> {
    let [ol, xl, or, xr] = column_segments(d, j)?;
    Ok(trichotomy((ol, xl), (or, xr), d.strips()))
}

/// Strip positions of the O and X in `row`, aligned with the row above
/// when `row` is the top row.
fn row_segments(d: &GridDiagram, row: usize, lower: bool) -> (usize, usize) {
    let align = |c: Cell| {
        if lower && row == d.n() - 1 {
            d.up(c).strip
        } else {
            c.strip
        }
    };
    (align(d.o_marks()[d.o_in_row(row)]), align(d.x_marks()[d.x_in_row(row)]))
}

/// Rows `r` and `r+1 (mod n)`; the seam pair is aligned across the shear.
pub fn classify_row_commutation(d: &GridDiagram, r: usize) -> Result<CommuteClass, MoveError> {
    let up = check_pair(d, r)?;
    Ok(trichotomy(
        row_segments(d, r, true),
        row_segments(d, up, false),
        d.strips(),
    ))
}

pub fn commute_columns(d: &GridDiagram, j: usize) -> Result<GridDiagram, MoveError> {
    let r = check_pair(d, j)?;
    if classify_column_commutation(d, j)? == CommuteClass::Illegal {
        return Err(MoveError::IllegalColumnExchange(j, r));
    }
    let shift = |cells: &[Cell]| {
        cells
            .iter()
            .map(|&c| match d.column_of(c) {
                col if col == j => Cell::new(d.shift_strip(c.strip, 1), c.row),
                col if col == r => Cell::new(d.shift_strip(c.strip, -1), c.row),
                _ => c,
            })
            .collect()
    };
    Ok(GridDiagram::from_cells(
        d.p(),
        d.q(),
        d.n(),
        shift(d.o_marks()),
        shift(d.x_marks()),
    ))
}

pub fn commute_rows(d: &GridDiagram, r: usize) -> Result<GridDiagram, MoveError> {
    let up = check_pair(d, r)?;
    if classify_row_commutation(d, r)? == CommuteClass::Illegal {
        return Err(MoveError::IllegalRowExchange(r, up));
    }
    let shift = |cells: &[Cell]| {
        cells
            .iter()
            .map(|&c| match c.row {
                row if row == r => d.up(c),
                row if row == up => d.down(c),
                _ => c,
            })
            .collect()
    };
    Ok(GridDiagram::from_cells(
        d.p(),
        d.q(),
        d.n(),
        shift(d.o_marks()),
        shift(d.x_marks()),
    ))
}

pub fn crossing_at(d: &GridDiagram, j: usize) -> Result<Option<SkeinCrossing>, MoveError> {
    let segs = column_segments(d, j)?;
    let [ol, xl, or, xr] = segs;
    if trichotomy((ol, xl), (or, xr), d.strips()) != CommuteClass::Interleaving {
        return Ok(None);
    }
    let sign = if in_open(ol, xl, or, d.strips()) {
        Sign::Positive
    } else {
        Sign::Negative
    };
    Ok(Some(SkeinCrossing {
        left_column: j,
        sign,
        segments: segs,
    }))
}

pub fn find_skein_crossings(d: &GridDiagram) -> Vec<SkeinCrossing> {
    if d.n() < 2 {
        return Vec::new();
    }
    (0..d.n())
        .filter_map(|j| crossing_at(d, j).expect("pair in range"))
        .collect()
}

fn require_crossing(d: &GridDiagram, crossing: &SkeinCrossing) -> Result<SkeinCrossing, MoveError> {
    let j = crossing.left_column;
    let r = check_pair(d, j)?;
    match crossing_at(d, j)? {
        Some(c) if c == *crossing => Ok(c),
        _ => Err(MoveError::NoCrossing(j, r)),
    }
}

pub fn crossing_change(d: &GridDiagram, crossing: &SkeinCrossing) -> Result<GridDiagram, MoveError> {
    let c = require_crossing(d, crossing)?;
    commute_columns(d, c.left_column)
}

/// Exchanges the columns of the two O markings (positive crossing) or of
/// the two X markings (negative crossing) at the crossing. Each marking
/// moves one strip into the neighbouring column and keeps its wrap, so the
/// exchange is a plain strip swap when both sit in the same wrap.
pub fn resolve(d: &GridDiagram, crossing: &SkeinCrossing) -> Result<GridDiagram, MoveError> {
    let c = require_crossing(d, crossing)?;
    let j = c.left_column;
    let r = (j + 1) % d.n();
    let mut o = d.o_marks().to_vec();
    let mut x = d.x_marks().to_vec();
    let swap = |v: &mut Vec<Cell>| {
        v[j].strip = d.shift_strip(v[j].strip, 1);
        v[r].strip = d.shift_strip(v[r].strip, -1);
    };
    match c.sign {
        Sign::Positive => swap(&mut o),
        Sign::Negative => swap(&mut x),
    }
    Ok(GridDiagram::from_cells(d.p(), d.q(), d.n(), o, x))
}

fn require_mark(d: &GridDiagram, m: Marking) -> Result<(), MoveError> {
    if m.cell.strip < d.strips() && m.cell.row < d.n() && d.has_mark(m) {
        Ok(())
    } else {
        Err(MoveError::MissingMarking(m))
    }
}

pub fn stabilize(d: &GridDiagram, mark: Marking, corner: Corner) -> Result<GridDiagram, MoveError> {
    require_mark(d, mark)?;
    let n = d.n();
    let (s, r) = (mark.cell.strip, mark.cell.row);
    let c = s % n;
    let east = corner.new_column_east();
    let south = corner.new_row_south();
    let col_map = |col: usize| if col < c || (east && col == c) { col } else { col + 1 };
    let row_map = |row: usize| if row < r || (!south && row == r) { row } else { row + 1 };
    let strip_map = |strip: usize| strip / n * (n + 1) + col_map(strip % n);
    let remap = |cells: &[Cell], skip: Option<usize>| -> Vec<Cell> {
        cells
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != skip)
            .map(|(_, cell)| Cell::new(strip_map(cell.strip), row_map(cell.row)))
            .collect()
    };
    let base = s / n * (n + 1);
    let (col_d, col_b) = if east { (c, c + 1) } else { (c + 1, c) };
    let (row_d, row_b) = if south { (r + 1, r) } else { (r, r + 1) };
    let (sd, sb) = (base + col_d, base + col_b);
    let a = Cell::new(sb, row_d);
    let b = Cell::new(sb, row_b);
    let cc = Cell::new(sd, row_b);
    let (mut same, mut other) = match mark.kind {
        MarkKind::O => (remap(d.o_marks(), Some(c)), remap(d.x_marks(), None)),
        MarkKind::X => (remap(d.x_marks(), Some(c)), remap(d.o_marks(), None)),
    };
    same.push(a);
    same.push(cc);
    other.push(b);
    let (o, x) = match mark.kind {
        MarkKind::O => (same, other),
        MarkKind::X => (other, same),
    };
    Ok(GridDiagram::from_cells(d.p(), d.q(), n + 1, o, x))
}

/// Removes the row and column of `b`, merging `a` and `c` into the fourth
/// cell of their 2x2 block. One of `a`, `c` must be vertically adjacent to
/// `b` in its column and the other horizontally adjacent in its row.
pub fn destabilize(d: &GridDiagram, a: Marking, b: Marking, c: Marking) -> Result<GridDiagram, MoveError> {
    for m in [a, b, c] {
        require_mark(d, m)?;
    }
    let n = d.n();
    if n < 2 {
        return Err(MoveError::TooSmall(n));
    }
    if a.kind != c.kind || a.kind == b.kind {
        return Err(MoveError::NotDestabilizable("need types T, not-T, T".into()));
    }
    let vertical = |m: Marking| d.up(b.cell) == m.cell || d.down(b.cell) == m.cell;
    let horizontal = |m: Marking| {
        m.cell.row == b.cell.row
            && (d.shift_strip(b.cell.strip, 1) == m.cell.strip || d.shift_strip(b.cell.strip, -1) == m.cell.strip)
    };
    let (col_partner, row_partner) = if vertical(a) && horizontal(c) {
        (a, c)
    } else if vertical(c) && horizontal(a) {
        (c, a)
    } else {
        return Err(MoveError::NotDestabilizable(format!(
            "{a}, {b}, {c} do not form an L in one 2x2 block"
        )));
    };
    let delta = if d.shift_strip(b.cell.strip, 1) == row_partner.cell.strip {
        1
    } else {
        -1
    };
    let merged = Cell::new(d.shift_strip(col_partner.cell.strip, delta), col_partner.cell.row);
    let (rb, cb) = (b.cell.row, b.cell.strip % n);
    let reindex = |cell: Cell| {
        let col = cell.strip % n;
        let strip = cell.strip / n * (n - 1) + if col > cb { col - 1 } else { col };
        Cell::new(strip, if cell.row > rb { cell.row - 1 } else { cell.row })
    };
    let removed = [a, b, c];
    let keep = |kind: MarkKind| -> Vec<Cell> {
        let mut v: Vec<Cell> = d
            .marks(kind)
            .iter()
            .filter(|&&cell| !removed.contains(&Marking::new(kind, cell)))
            .map(|&cell| reindex(cell))
            .collect();
        if kind == a.kind {
            v.push(reindex(merged));
        }
        v
    };
    let o = keep(MarkKind::O);
    let x = keep(MarkKind::X);
    debug_assert_eq!(o.len(), n - 1);
    Ok(GridDiagram::from_cells(d.p(), d.q(), n - 1, o, x))
}

pub fn apply(d: &GridDiagram, mv: &Move) -> Result<GridDiagram, MoveError> {
    match *mv {
        Move::ColumnCommute { column } => commute_columns(d, column),
        Move::RowCommute { row } => commute_rows(d, row),
        Move::Stabilize { mark, corner } => stabilize(d, mark, corner),
        Move::Destabilize { a, b, c } => destabilize(d, a, b, c),
        Move::CrossingChange { column } => match crossing_at(d, column)? {
            Some(cr) => crossing_change(d, &cr),
            None => Err(MoveError::NoCrossing(column, (column + 1) % d.n())),
        },
        Move::Resolve { column } => match crossing_at(d, column)? {
            Some(cr) => resolve(d, &cr),
            None => Err(MoveError::NoCrossing(column, (column + 1) % d.n())),
        },
        Move::Translate { h, v } => Ok(d.translate(h, v)),
    }
}

/// Applies `mv` and records its classification and the resulting key.
pub fn apply_recorded(d: &GridDiagram, mv: &Move) -> Result<(GridDiagram, MoveRecord), MoveError> {
    let (class, sign) = match *mv {
        Move::ColumnCommute { column } | Move::CrossingChange { column } | Move::Resolve { column } => {
            let class = classify_column_commutation(d, column)?;
            (Some(class), crossing_at(d, column)?.map(|c| c.sign))
        }
        Move::RowCommute { row } => (Some(classify_row_commutation(d, row)?), None),
        _ => (None, None),
    };
    let out = apply(d, mv)?;
    let rec = MoveRecord {
        mv: *mv,
        class,
        sign,
        key_after: out.canonical_key().to_hex(),
    };
    Ok((out, rec))
}

/// Replays a record sequence, checking each recorded key.
pub fn replay(d: &GridDiagram, records: &[MoveRecord]) -> Result<GridDiagram, MoveError> {
    let mut cur = d.clone();
    for rec in records {
        cur = apply(&cur, &rec.mv)?;
        if cur.canonical_key().to_hex() != rec.key_after {
            return Err(MoveError::NotDestabilizable(format!("replay diverged at {}", rec.mv)));
        }
    }
    Ok(cur)
}

/// The (A, B, C) triple that undoes `stabilize(d, mark, corner)`, expressed
/// in the stabilized diagram's coordinates.
pub fn stabilization_triple(d: &GridDiagram, mark: Marking, corner: Corner) -> (Marking, Marking, Marking) {
    let n = d.n();
    let (s, r) = (mark.cell.strip, mark.cell.row);
    let c = s % n;
    let base = s / n * (n + 1);
    let (col_d, col_b) = if corner.new_column_east() {
        (c, c + 1)
    } else {
        (c + 1, c)
    };
    let (row_d, row_b) = if corner.new_row_south() { (r + 1, r) } else { (r, r + 1) };
    let (sd, sb) = (base + col_d, base + col_b);
    (
        Marking::new(mark.kind, Cell::new(sb, row_d)),
        Marking::new(mark.kind.other(), Cell::new(sb, row_b)),
        Marking::new(mark.kind, Cell::new(sd, row_b)),
    )
}
