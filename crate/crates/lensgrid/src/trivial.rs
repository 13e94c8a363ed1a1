use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{mod_inverse, Cell, DiagramError, GridDiagram};
use crate::laurent::LaurentPoly;
use crate::moves::{self, CommuteClass, Move};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TrivialError {
    #[error("index set has no components")]
    EmptyIndexSet,
    #[error("index set has {got} entries, expected p = {p}")]
    WrongLength { p: u32, got: usize },
    #[error("component {0} has grid number greater than one")]
    NotAllGridNumberOne(usize),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error("normalization table: {0}")]
    Normalization(String),
}

/// Multiplicities `(m_0, ..., m_{p-1})` of trivial-link components by
/// homology class.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IndexSet {
    pub p: u32,
    pub q: i64,
    pub m: Vec<u32>,
}

impl IndexSet {
    pub fn new(p: u32, q: i64, m: Vec<u32>) -> Result<Self, TrivialError> {
        if p == 0 {
            return Err(DiagramError::InvalidP(0).into());
        }
        if m.len() != p as usize {
            return Err(TrivialError::WrongLength { p, got: m.len() });
        }
        if (q.rem_euclid(p as i64)).gcd(&(p as i64)) != 1 {
            return Err(DiagramError::NonCoprime { p: p as i64, q }.into());
        }
        Ok(IndexSet { p, q, m })
    }

    /// The trivial knot of homology class `i`.
    pub fn unit(p: u32, q: i64, i: usize) -> Self {
        let mut m = vec![0; p as usize];
        m[i] = 1;
        IndexSet { p, q, m }
    }

    pub fn n(&self) -> usize {
        self.m.iter().map(|&c| c as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.n() == 0
    }

    /// Same index set with the nullhomotopic components dropped.
    pub fn without_nullhomotopic(&self) -> Self {
        let mut m = self.m.clone();
        m[0] = 0;
        IndexSet {
            p: self.p,
            q: self.q,
            m,
        }
    }

    fn q_mod(&self) -> u32 {
        self.q.rem_euclid(self.p as i64) as u32
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.m.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// The homology class `i * q^{-1} mod p` placed in block `i`.
pub fn sigma(p: u32, q: i64, i: u32) -> u32 {
    let qi = mod_inverse(q, p) as u64;
    ((i as u64 * qi) % p as u64) as u32
}

/// Homology classes of the components of D(I), top row first.
fn component_classes(idx: &IndexSet) -> Vec<u32> {
    let mut out = Vec::with_capacity(idx.n());
    for l in 0..idx.p {
        let mu = sigma(idx.p, idx.q, l);
        out.extend(std::iter::repeat_n(mu, idx.m[mu as usize] as usize));
    }
    out
}

pub fn build_trivial_diagram(idx: &IndexSet) -> Result<GridDiagram, TrivialError> {
    let n = idx.n();
    if n == 0 {
        return Err(TrivialError::EmptyIndexSet);
    }
    let pn = idx.p as usize * n;
    let step = idx.q_mod() as usize * n;
    let mut o = Vec::with_capacity(n);
    let mut x = Vec::with_capacity(n);
    for (i, mu) in component_classes(idx).into_iter().enumerate() {
        let row = n - 1 - i;
        o.push(Cell::new(i, row));
        x.push(Cell::new((i + pn - (mu as usize * step) % pn) % pn, row));
    }
    Ok(GridDiagram::from_cells(idx.p, idx.q, n, o, x))
}

pub fn index_set_of(d: &GridDiagram) -> Result<IndexSet, TrivialError> {
    let comps = d.components();
    let mut m = vec![0; d.p() as usize];
    for (i, c) in comps.components.iter().enumerate() {
        if c.grid_number != 1 {
            return Err(TrivialError::NotAllGridNumberOne(i));
        }
        m[c.mu as usize] += 1;
    }
    Ok(IndexSet { p: d.p(), q: d.q(), m })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectionStats {
    pub writhe: i64,
    pub mu_total: i64,
    pub lambda_total: i64,
    pub p: u32,
    /// `p * s`, always an integer.
    pub p_times_s: i64,
}

impl ProjectionStats {
    /// `s` as a reduced fraction `(numerator, denominator)`.
    pub fn s(&self) -> (i64, i64) {
        let p = self.p as i64;
        let g = self.p_times_s.gcd(&p);
        (self.p_times_s / g, p / g)
    }
}

impl fmt::Display for ProjectionStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (num, den) = self.s();
        write!(
            f,
            "writhe={} mu={} lambda={} s=",
            self.writhe, self.mu_total, self.lambda_total
        )?;
        if den == 1 {
            write!(f, "{num}")
        } else {
            write!(f, "{num}/{den}")
        }
    }
}

/// Writhe, total homology and the normalization exponent of the standard
/// projection of D(I): each component runs up its column from O to X and
/// then right along its row back to O.
pub fn projection_stats(idx: &IndexSet) -> Result<ProjectionStats, TrivialError> {
    let d = build_trivial_diagram(idx)?;
    let p = idx.p as i64;
    let n = d.n();
    let mut vertical = Vec::new();
    let mut horizontal = Vec::new();
    let (mut mu_total, mut lambda_total) = (0i64, 0i64);
    for c in 0..n {
        let (o, x) = (d.o_marks()[c], d.x_marks()[c]);
        let mu = d.column_mu(c) as i64;
        let lambda = (mu * d.q_mod() as i64) % p;
        mu_total += mu;
        lambda_total += lambda;
        let mut cell = d.up(o);
        for _ in 1..mu as usize * n {
            vertical.push(cell);
            cell = d.up(cell);
        }
        debug_assert!(mu == 0 || cell == x);
        let span = lambda as usize * n;
        for k in 1..span {
            horizontal.push(Cell::new(d.shift_strip(x.strip, k as i64), x.row));
        }
    }
    let writhe = vertical.iter().filter(|c| horizontal.contains(c)).count() as i64;
    let p_times_s = p * writhe - mu_total * lambda_total - mu_total + lambda_total;
    Ok(ProjectionStats {
        writhe,
        mu_total,
        lambda_total,
        p: idx.p,
        p_times_s,
    })
}

/// User-supplied values for trivial links without nullhomotopic components.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Normalization {
    table: BTreeMap<Vec<u32>, LaurentPoly>,
}

#[derive(Deserialize)]
struct NormalizationEntry {
    index: Vec<u32>,
    value: String,
}

impl Normalization {
    pub fn from_json(text: &str) -> Result<Self, TrivialError> {
        let entries: Vec<NormalizationEntry> =
            serde_json::from_str(text).map_err(|e| TrivialError::Normalization(e.to_string()))?;
        let mut out = Normalization::default();
        for e in entries {
            let value = LaurentPoly::parse(&e.value)
                .map_err(|err| TrivialError::Normalization(format!("value for {:?}: {err}", e.index)))?;
            out.insert(e.index, value)?;
        }
        Ok(out)
    }

    pub fn insert(&mut self, index: Vec<u32>, value: LaurentPoly) -> Result<(), TrivialError> {
        match index.first() {
            None => Err(TrivialError::Normalization("empty index".into())),
            Some(&m0) if m0 > 0 => Err(TrivialError::Normalization(format!(
                "index {index:?} has nullhomotopic components; only m0 = 0 may be overridden"
            ))),
            _ => {
                self.table.insert(index, value);
                Ok(())
            }
        }
    }

    pub fn get(&self, index: &[u32]) -> Option<&LaurentPoly> {
        self.table.get(index)
    }
}

pub fn trivial_value(idx: &IndexSet, norm: Option<&Normalization>) -> Result<LaurentPoly, TrivialError> {
    if idx.is_empty() {
        return Err(TrivialError::EmptyIndexSet);
    }
    let p = idx.p;
    let k = idx.m[0];
    let star = idx.without_nullhomotopic();
    let unknot = LaurentPoly::unknot_factor(p);
    if star.is_empty() {
        return Ok(LaurentPoly::a_pow(1 - p as i64) * unknot.pow(k - 1));
    }
    let base = match norm.and_then(|t| t.get(&star.m)) {
        Some(v) => v.clone(),
        None => LaurentPoly::a_pow(projection_stats(&star)?.p_times_s + 1),
    };
    Ok(base * unknot.pow(k))
}

/// Column order key of a grid number one component in sorted form.
fn sort_key(d: &GridDiagram, col: usize) -> (u32, std::cmp::Reverse<usize>) {
    let mu = d.column_mu(col) as u64;
    let key = (mu * d.q_mod() as u64 % d.p() as u64) as u32;
    (key, std::cmp::Reverse(d.o_marks()[col].row))
}

/// Moves taking a diagram whose components all have grid number one to
/// D(index_set_of(D)).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SortPlan {
    /// `order[i]` is the original column that ends up in position `i`.
    pub order: Vec<usize>,
    /// Left columns of the adjacent transpositions of the column sort.
    pub transpositions: Vec<usize>,
    /// Every move, in order: wrap alignment, column sort, row sort and a
    /// final translation.
    pub moves: Vec<Move>,
}

fn step(d: &mut GridDiagram, moves: &mut Vec<Move>, mv: Move) {
    *d = moves::apply(d, &mv).expect("sorting moves are legal on grid number one components");
    moves.push(mv);
}

pub fn sorted_trivial_form(d: &GridDiagram) -> Result<SortPlan, TrivialError> {
    let idx = index_set_of(d)?;
    let n = d.n();
    let p = d.p() as usize;
    let mut cur = d.clone();
    let mut mv = Vec::new();

    // Bring every O to the same wrap by cycling single columns around.
    let wraps: Vec<usize> = cur.o_marks().iter().map(|c| c.strip / n).collect();
    let cyc = |a: usize, b: usize| {
        let d = (b + p - a) % p;
        d.min(p - d)
    };
    let target = (0..p)
        .min_by_key(|&t| wraps.iter().map(|&k| cyc(k, t)).sum::<usize>())
        .unwrap();
    if n > 1 {
        for c in 0..n {
            let k = cur.o_marks()[c].strip / n;
            let right = (target + p - k) % p;
            let (count, forward) = if right <= p - right {
                (right, true)
            } else {
                (p - right, false)
            };
            for _ in 0..count {
                if forward {
                    for i in 0..n - 1 {
                        step(&mut cur, &mut mv, Move::ColumnCommute { column: (c + i) % n });
                    }
                    step(&mut cur, &mut mv, Move::Translate { h: 1, v: 0 });
                } else {
                    for i in 0..n - 1 {
                        step(
                            &mut cur,
                            &mut mv,
                            Move::ColumnCommute {
                                column: (c + 2 * n - 1 - i) % n,
                            },
                        );
                    }
                    step(&mut cur, &mut mv, Move::Translate { h: -1, v: 0 });
                }
            }
        }
    }

    // Bubble sort of interior columns by block, then by descending row.
    let mut order: Vec<usize> = (0..n).collect();
    let mut transpositions = Vec::new();
    let mut sorted = false;
    while !sorted {
        sorted = true;
        for j in 0..n.saturating_sub(1) {
            if sort_key(&cur, j) > sort_key(&cur, j + 1) {
                step(&mut cur, &mut mv, Move::ColumnCommute { column: j });
                order.swap(j, j + 1);
                transpositions.push(j);
                sorted = false;
            }
        }
    }

    // Bubble sort of rows so that column i holds row n-1-i.
    let rank = |d: &GridDiagram, row: usize| n - 1 - d.column_of(d.o_marks()[d.o_in_row(row)]);
    let mut sorted = false;
    while !sorted {
        sorted = true;
        for r in 0..n.saturating_sub(1) {
            if rank(&cur, r) > rank(&cur, r + 1) {
                debug_assert_eq!(
                    moves::classify_row_commutation(&cur, r),
                    Ok(CommuteClass::NonInterleaving)
                );
                step(&mut cur, &mut mv, Move::RowCommute { row: r });
                sorted = false;
            }
        }
    }

    if target != 0 {
        step(
            &mut cur,
            &mut mv,
            Move::Translate {
                h: -((target * n) as i64),
                v: 0,
            },
        );
    }
    debug_assert_eq!(Ok(cur), build_trivial_diagram(&idx));
    Ok(SortPlan {
        order,
        transpositions,
        moves: mv,
    })
}
