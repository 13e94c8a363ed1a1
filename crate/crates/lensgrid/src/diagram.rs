use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Cell {
    pub strip: usize,
    pub row: usize,
}

impl Cell {
    pub const fn new(strip: usize, row: usize) -> Self {
        Self { strip, row }
    }
}

impl From<[usize; 2]> for Cell {
    fn from([strip, row]: [usize; 2]) -> Self {
        Self { strip, row }
    }
}

impl From<Cell> for [usize; 2] {
    fn from(c: Cell) -> Self {
        [c.strip, c.row]
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.strip, self.row)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MarkKind {
    O,
    X,
}

impl MarkKind {
    pub fn other(self) -> Self {
        match self {
            MarkKind::O => MarkKind::X,
            MarkKind::X => MarkKind::O,
        }
    }
}

impl fmt::Display for MarkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MarkKind::O => "O",
            MarkKind::X => "X",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Marking {
    pub kind: MarkKind,
    pub cell: Cell,
}

impl Marking {
    pub const fn new(kind: MarkKind, cell: Cell) -> Self {
        Self { kind, cell }
    }
    pub const fn o(strip: usize, row: usize) -> Self {
        Self::new(MarkKind::O, Cell::new(strip, row))
    }
    pub const fn x(strip: usize, row: usize) -> Self {
        Self::new(MarkKind::X, Cell::new(strip, row))
    }
}

impl fmt::Display for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind, self.cell)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error("p must be positive, got {0}")]
    InvalidP(i64),
    #[error("grid number must be positive, got {0}")]
    InvalidGridNumber(i64),
    #[error("q={q} must satisfy |q| < p={p}")]
    QOutOfRange { p: i64, q: i64 },
    #[error("p={p} and q={q} are not coprime")]
    NonCoprime { p: i64, q: i64 },
    #[error("expected {expected} {kind} markings, found {found}")]
    MarkingCount {
        kind: MarkKind,
        expected: usize,
        found: usize,
    },
    #[error("{kind} marking ({strip},{row}) lies outside the {strips}x{rows} grid")]
    StripOutOfRange {
        kind: MarkKind,
        strip: i64,
        row: i64,
        strips: usize,
        rows: usize,
    },
    #[error("two {kind} markings share row {row}")]
    DuplicateRow { kind: MarkKind, row: usize },
    #[error("two {kind} markings share column {column}")]
    DuplicateColumn { kind: MarkKind, column: usize },
    #[error("O and X share cell {0} but do not form a grid number one component")]
    SharedCellOutsideUnknot(Cell),
    #[error("malformed diagram document: {0}")]
    Document(String),
}

/// Unchecked diagram data as read from a document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawDiagram {
    pub p: i64,
    pub q: i64,
    pub n: i64,
    #[serde(rename = "O")]
    pub o: Vec<[i64; 2]>,
    #[serde(rename = "X")]
    pub x: Vec<[i64; 2]>,
}

/// A toroidal grid diagram in L(p,q) in straightened coordinates:
/// `p*n` strips by `n` rows. Crossing from row `n-1` up into row 0
/// carries strip `s` to `s - q*n (mod p*n)`.
///
/// Marking vectors are indexed by column, so `o[c].strip % n == c`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GridDiagram {
    p: u32,
    q: i64,
    n: usize,
    o: Vec<Cell>,
    x: Vec<Cell>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentInfo {
    pub grid_number: usize,
    pub mu: u32,
    /// Columns of the component's O markings in traversal order.
    pub columns: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentDecomposition {
    /// Component id of the O marking in each column.
    pub of_o: Vec<usize>,
    /// Component id of the X marking in each column.
    pub of_x: Vec<usize>,
    pub components: Vec<ComponentInfo>,
}

impl ComponentDecomposition {
    pub fn len(&self) -> usize {
        self.components.len()
    }
    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
    pub fn mu_multiset(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.components.iter().map(|c| c.mu).collect();
        v.sort_unstable();
        v
    }
    pub fn total_mu(&self, p: u32) -> u32 {
        self.components.iter().map(|c| c.mu).sum::<u32>() % p
    }
}

pub fn mod_inverse(q: i64, p: u32) -> u32 {
    let p = p as i64;
    if p == 1 {
        return 0;
    }
    let g = q.rem_euclid(p).extended_gcd(&p);
    assert_eq!(g.gcd, 1, "q not invertible mod p");
    g.x.rem_euclid(p) as u32
}

impl GridDiagram {
    pub fn validate(raw: &RawDiagram) -> Result<Self, DiagramError> {
        if raw.p < 1 {
            return Err(DiagramError::InvalidP(raw.p));
        }
        if raw.n < 1 {
            return Err(DiagramError::InvalidGridNumber(raw.n));
        }
        if raw.q.abs() >= raw.p {
            return Err(DiagramError::QOutOfRange { p: raw.p, q: raw.q });
        }
        if raw.p.gcd(&raw.q) != 1 {
            return Err(DiagramError::NonCoprime { p: raw.p, q: raw.q });
        }
        let p = raw.p as u32;
        let n = raw.n as usize;
        let strips = p as usize * n;
        let mut lists = Vec::with_capacity(2);
        for (kind, cells) in [(MarkKind::O, &raw.o), (MarkKind::X, &raw.x)] {
            if cells.len() != n {
                return Err(DiagramError::MarkingCount {
                    kind,
                    expected: n,
                    found: cells.len(),
                });
            }
            let mut by_col: Vec<Option<Cell>> = vec![None; n];
            let mut rows = vec![false; n];
            for &[s, r] in cells {
                if s < 0 || r < 0 || s as usize >= strips || r as usize >= n {
                    return Err(DiagramError::StripOutOfRange {
                        kind,
                        strip: s,
                        row: r,
                        strips,
                        rows: n,
                    });
                }
                let cell = Cell::new(s as usize, r as usize);
                if std::mem::replace(&mut rows[cell.row], true) {
                    return Err(DiagramError::DuplicateRow { kind, row: cell.row });
                }
                let c = cell.strip % n;
                if by_col[c].replace(cell).is_some() {
                    return Err(DiagramError::DuplicateColumn { kind, column: c });
                }
            }
            lists.push(by_col.into_iter().map(Option::unwrap).collect::<Vec<_>>());
        }
        let x = lists.pop().unwrap();
        let o = lists.pop().unwrap();
        let d = GridDiagram { p, q: raw.q, n, o, x };
        let comps = d.components();
        for c in 0..n {
            let cell = d.o[c];
            if d.x[c] == cell && comps.components[comps.of_o[c]].grid_number != 1 {
                return Err(DiagramError::SharedCellOutsideUnknot(cell));
            }
        }
        Ok(d)
    }

    pub fn from_json(s: &str) -> Result<Self, DiagramError> {
        let raw: RawDiagram = serde_json::from_str(s).map_err(|e| DiagramError::Document(e.to_string()))?;
        Self::validate(&raw)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_raw()).expect("diagram serializes")
    }

    pub fn to_raw(&self) -> RawDiagram {
        let f = |v: &[Cell]| v.iter().map(|c| [c.strip as i64, c.row as i64]).collect();
        RawDiagram {
            p: self.p as i64,
            q: self.q,
            n: self.n as i64,
            o: f(&self.o),
            x: f(&self.x),
        }
    }

    /// Builds from cell lists in any order; panics if the result is invalid.
    pub fn new(p: u32, q: i64, n: usize, o: &[(usize, usize)], x: &[(usize, usize)]) -> Self {
        let f = |v: &[(usize, usize)]| v.iter().map(|&(s, r)| [s as i64, r as i64]).collect();
        Self::validate(&RawDiagram {
            p: p as i64,
            q,
            n: n as i64,
            o: f(o),
            x: f(x),
        })
        .unwrap_or_else(|e| panic!("invalid diagram: {e}"))
    }

    /// Re-sorts marking lists by column. Callers must uphold the
    /// one-per-row and one-per-column invariants.
    pub(crate) fn from_cells(p: u32, q: i64, n: usize, o: Vec<Cell>, x: Vec<Cell>) -> Self {
        let mut d = GridDiagram { p, q, n, o, x };
        d.sort_columns();
        debug_assert!(
            GridDiagram::validate(&d.to_raw()).is_ok(),
            "invalid diagram {}",
            d.to_json()
        );
        d
    }

    fn sort_columns(&mut self) {
        let n = self.n;
        self.o.sort_by_key(|c| c.strip % n);
        self.x.sort_by_key(|c| c.strip % n);
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn q(&self) -> i64 {
        self.q
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn strips(&self) -> usize {
        self.p as usize * self.n
    }
    pub fn o_marks(&self) -> &[Cell] {
        &self.o
    }
    pub fn x_marks(&self) -> &[Cell] {
        &self.x
    }
    pub fn marks(&self, kind: MarkKind) -> &[Cell] {
        match kind {
            MarkKind::O => &self.o,
            MarkKind::X => &self.x,
        }
    }
    pub fn q_mod(&self) -> u32 {
        self.q.rem_euclid(self.p as i64) as u32
    }
    pub fn q_inv(&self) -> u32 {
        mod_inverse(self.q, self.p)
    }
    pub fn column_of(&self, cell: Cell) -> usize {
        cell.strip % self.n
    }

    /// Strip shift applied when crossing the row seam upward.
    pub fn wrap_shift(&self) -> usize {
        (self.q_mod() as usize * self.n) % self.strips()
    }

    pub fn up(&self, c: Cell) -> Cell {
        if c.row + 1 < self.n {
            Cell::new(c.strip, c.row + 1)
        } else {
            let pn = self.strips();
            Cell::new((c.strip + pn - self.wrap_shift()) % pn, 0)
        }
    }

    pub fn down(&self, c: Cell) -> Cell {
        if c.row > 0 {
            Cell::new(c.strip, c.row - 1)
        } else {
            Cell::new((c.strip + self.wrap_shift()) % self.strips(), self.n - 1)
        }
    }

    pub fn shift_strip(&self, s: usize, by: i64) -> usize {
        (s as i64 + by).rem_euclid(self.strips() as i64) as usize
    }

    /// Wrap index of `strip` in the orbit `c, c - qn, c - 2qn, ...` of its column `c`.
    pub fn wrap_index(&self, strip: usize) -> usize {
        let c = strip % self.n;
        let d = (c + self.strips() - strip) % self.strips() / self.n;
        (d as u64 * self.q_inv() as u64 % self.p as u64) as usize
    }

    /// Position of a cell along its column's annulus of `p*n` cells.
    pub fn height(&self, cell: Cell) -> usize {
        self.wrap_index(cell.strip) * self.n + cell.row
    }

    pub fn o_in_row(&self, row: usize) -> usize {
        self.o.iter().position(|c| c.row == row).expect("one O per row")
    }

    pub fn x_in_row(&self, row: usize) -> usize {
        self.x.iter().position(|c| c.row == row).expect("one X per row")
    }

    pub fn has_mark(&self, m: Marking) -> bool {
        self.marks(m.kind)[m.cell.strip % self.n] == m.cell
    }

    /// Homology class of the vertical arc in column `c`, from its O to its X.
    pub fn column_mu(&self, c: usize) -> u32 {
        let pn = self.strips();
        let d = (self.o[c].strip + pn - self.x[c].strip) % pn / self.n;
        (d as u64 * self.q_inv() as u64 % self.p as u64) as u32
    }

    pub fn components(&self) -> ComponentDecomposition {
        let n = self.n;
        let mut o_by_row = vec![0usize; n];
        for (c, cell) in self.o.iter().enumerate() {
            o_by_row[cell.row] = c;
        }
        let mut of_o = vec![usize::MAX; n];
        let mut components = Vec::new();
        for start in 0..n {
            if of_o[start] != usize::MAX {
                continue;
            }
            let id = components.len();
            let mut columns = Vec::new();
            let mut mu = 0u32;
            let mut c = start;
            loop {
                of_o[c] = id;
                columns.push(c);
                mu = (mu + self.column_mu(c)) % self.p;
                c = o_by_row[self.x[c].row];
                if c == start {
                    break;
                }
            }
            components.push(ComponentInfo {
                grid_number: columns.len(),
                mu,
                columns,
            });
        }
        let of_x = of_o.clone();
        ComponentDecomposition { of_o, of_x, components }
    }

    pub fn mu(&self, component: usize) -> u32 {
        self.components().components[component].mu
    }

    pub fn lift(&self) -> GridDiagram {
        let pn = self.strips();
        let step = self.wrap_shift();
        let copy = |cells: &[Cell]| {
            let mut out = Vec::with_capacity(pn);
            for cell in cells {
                for k in 0..self.p as usize {
                    out.push(Cell::new((cell.strip + k * step) % pn, cell.row + k * self.n));
                }
            }
            out
        };
        GridDiagram::from_cells(1, 0, pn, copy(&self.o), copy(&self.x))
    }

    fn translate_cell(&self, cell: Cell, h: i64, v: i64) -> Cell {
        let n = self.n as i64;
        let total = cell.row as i64 + v;
        let wraps = total.div_euclid(n);
        let row = total.rem_euclid(n) as usize;
        let shift = h - wraps * self.q_mod() as i64 * n;
        Cell::new(self.shift_strip(cell.strip, shift), row)
    }

    pub fn translate(&self, h: i64, v: i64) -> GridDiagram {
        let f = |cells: &[Cell]| cells.iter().map(|&c| self.translate_cell(c, h, v)).collect();
        GridDiagram::from_cells(self.p, self.q, self.n, f(&self.o), f(&self.x))
    }

    /// The diagram with O and X markings exchanged (reversed orientation).
    pub fn reversed(&self) -> GridDiagram {
        GridDiagram {
            p: self.p,
            q: self.q,
            n: self.n,
            o: self.x.clone(),
            x: self.o.clone(),
        }
    }

    fn key_words(&self, h: i64, v: i64, buf: &mut Vec<u32>) {
        let n = self.n;
        buf.clear();
        buf.extend([self.p, self.q_mod(), n as u32]);
        let base = buf.len();
        buf.resize(base + 4 * n, 0);
        for (slot, cells) in [(0usize, &self.o), (2 * n, &self.x)] {
            for &c in cells.iter() {
                let t = self.translate_cell(c, h, v);
                let i = base + slot + 2 * (t.strip % n);
                buf[i] = t.strip as u32;
                buf[i + 1] = t.row as u32;
            }
        }
    }

    /// Lexicographically least serialization over all translations.
    pub fn canonical_key(&self) -> CanonicalKey {
        let mut best: Option<Vec<u32>> = None;
        let mut buf = Vec::new();
        for v in 0..self.n as i64 {
            for h in 0..self.strips() as i64 {
                self.key_words(h, v, &mut buf);
                if best.as_ref().is_none_or(|b| buf < *b) {
                    best = Some(buf.clone());
                }
            }
        }
        CanonicalKey(best.unwrap().iter().flat_map(|w| w.to_be_bytes()).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey(pub Vec<u8>);

impl CanonicalKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for GridDiagram {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_raw().serialize(s)
    }
}

impl<'de> Deserialize<'de> for GridDiagram {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawDiagram::deserialize(d)?;
        GridDiagram::validate(&raw).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for GridDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json())
    }
}
