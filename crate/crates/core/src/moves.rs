//! Markov moves: generation, canonical form, filtering and application.
//!
//! A move is stored sparsely as `(cell, delta)` pairs sorted by flat cell
//! index. Every stored move is canonical: no zero deltas, and the first
//! nonzero delta in row-major order is positive, so `m` and `-m` have the
//! same representation.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::table::{BoundsGrid, Cell, Shape, Table};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Move {
    entries: Vec<(u32, i32)>,
}

impl Move {
    /// Builds a canonical move from `(cell, delta)` pairs. Repeated cells are
    /// summed; the result must be nonzero.
    pub fn from_sparse<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, i64)>,
    {
        let mut acc: Vec<(usize, i64)> = pairs.into_iter().collect();
        acc.sort_unstable_by_key(|&(h, _)| h);
        let mut entries: Vec<(u32, i32)> = Vec::with_capacity(acc.len());
        for (h, d) in acc {
            match entries.last_mut() {
                Some(last) if last.0 as usize == h => {
                    last.1 = checked_delta(last.1 as i64 + d)?;
                }
                _ => entries.push((to_index(h)?, checked_delta(d)?)),
            }
        }
        entries.retain(|&(_, d)| d != 0);
        Move::from_entries(entries)
    }

    pub fn from_dense(values: &[i64]) -> Result<Self> {
        let mut entries = Vec::new();
        for (h, &d) in values.iter().enumerate() {
            if d != 0 {
                entries.push((to_index(h)?, checked_delta(d)?));
            }
        }
        Move::from_entries(entries)
    }

    /// `entries` must be sorted by cell with no zeros.
    fn from_entries(mut entries: Vec<(u32, i32)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("a move must have nonzero support"));
        }
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        if entries[0].1 < 0 {
            for e in &mut entries {
                e.1 = -e.1;
            }
        }
        Ok(Move { entries })
    }

    pub fn entries(&self) -> &[(u32, i32)] {
        &self.entries
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&(h, _)| h as usize)
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    /// Sum of the positive entries; the degree of the associated binomial.
    pub fn degree(&self) -> u64 {
        self.entries
            .iter()
            .filter(|e| e.1 > 0)
            .map(|&(_, d)| d as u64)
            .sum()
    }

    pub fn l1_norm(&self) -> u64 {
        self.entries.iter().map(|&(_, d)| d.unsigned_abs() as u64).sum()
    }

    pub fn max_index(&self) -> usize {
        self.entries.last().map(|e| e.0 as usize).unwrap_or(0)
    }

    pub fn delta(&self, cell: usize) -> i64 {
        self.entries
            .binary_search_by_key(&(cell as u32), |e| e.0)
            .map(|i| self.entries[i].1 as i64)
            .unwrap_or(0)
    }

    pub fn to_dense(&self, dim: usize) -> Vec<i64> {
        let mut v = vec![0i64; dim];
        for &(h, d) in &self.entries {
            v[h as usize] = d as i64;
        }
        v
    }

    pub fn touches(&self, cells: &[bool]) -> bool {
        self.entries.iter().any(|&(h, _)| cells[h as usize])
    }

    fn ordering_key(&self) -> (u64, usize) {
        (self.degree(), self.entries.len())
    }
}

fn to_index(h: usize) -> Result<u32> {
    u32::try_from(h).map_err(|_| Error::Overflow("move cell index"))
}

fn checked_delta(d: i64) -> Result<i32> {
    i32::try_from(d).map_err(|_| Error::Overflow("move delta"))
}

/// Ascending degree, then support size, then row-major lexicographic on
/// the support, then on the deltas.
impl Ord for Move {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ordering_key()
            .cmp(&other.ordering_key())
            .then_with(|| self.support().cmp(other.support()))
            .then_with(|| {
                let a = self.entries.iter().map(|e| e.1);
                let b = other.entries.iter().map(|e| e.1);
                a.cmp(b)
            })
    }
}

impl PartialOrd for Move {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn factor(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// A sorted, duplicate-free collection of canonical moves over `dim` cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoveSet {
    dim: usize,
    shape: Option<Shape>,
    moves: Vec<Move>,
}

impl MoveSet {
    pub fn new<I>(dim: usize, moves: I) -> Result<Self>
    where
        I: IntoIterator<Item = Move>,
    {
        let mut moves: Vec<Move> = moves.into_iter().collect();
        if let Some(bad) = moves.iter().find(|m| m.max_index() >= dim) {
            return Err(Error::invalid(format!(
                "move touches cell {} but the set has only {} cells",
                bad.max_index(),
                dim
            )));
        }
        moves.sort_unstable();
        moves.dedup();
        Ok(MoveSet {
            dim,
            shape: None,
            moves,
        })
    }

    pub fn for_shape<I>(shape: Shape, moves: I) -> Result<Self>
    where
        I: IntoIterator<Item = Move>,
    {
        let mut set = MoveSet::new(shape.cells(), moves)?;
        set.shape = Some(shape);
        Ok(set)
    }

    pub fn empty(dim: usize) -> Self {
        MoveSet {
            dim,
            shape: None,
            moves: Vec::new(),
        }
    }

    pub fn with_shape(mut self, shape: Shape) -> Result<Self> {
        if shape.cells() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                actual: shape.cells(),
                context: "move set shape",
            });
        }
        self.shape = Some(shape);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> Option<Shape> {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Move> {
        self.moves.iter()
    }

    pub fn moves(&self) -> &[Move] {
        &self.moves
    }

    pub fn get(&self, i: usize) -> &Move {
        &self.moves[i]
    }

    pub fn contains(&self, m: &Move) -> bool {
        self.moves.binary_search(m).is_ok()
    }

    pub fn is_subset_of(&self, other: &MoveSet) -> bool {
        self.moves.iter().all(|m| other.contains(m))
    }

    /// Union of two sets over the same cells.
    pub fn union(&self, other: &MoveSet) -> Result<MoveSet> {
        if self.dim != other.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                actual: other.dim,
                context: "move set union",
            });
        }
        let mut set = MoveSet::new(self.dim, self.moves.iter().chain(&other.moves).cloned())?;
        set.shape = self.shape.or(other.shape);
        Ok(set)
    }

    /// Count of moves per support size, ascending.
    pub fn support_histogram(&self) -> Vec<(usize, usize)> {
        let mut hist: HashMap<usize, usize> = HashMap::new();
        for m in &self.moves {
            *hist.entry(m.support_len()).or_default() += 1;
        }
        let mut out: Vec<_> = hist.into_iter().collect();
        out.sort_unstable();
        out
    }

    pub fn retain(&self, mut keep: impl FnMut(&Move) -> bool) -> MoveSet {
        MoveSet {
            dim: self.dim,
            shape: self.shape,
            moves: self.moves.iter().filter(|m| keep(m)).cloned().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a MoveSet {
    type Item = &'a Move;
    type IntoIter = std::slice::Iter<'a, Move>;

    fn into_iter(self) -> Self::IntoIter {
        self.moves.iter()
    }
}

/// The `C(I,2) * C(J,2)` moves on the 2x2 minors. Empty when the table has a
/// single row or column.
pub fn basic_moves(shape: Shape) -> MoveSet {
    let mut moves = Vec::new();
    for i1 in 0..shape.rows {
        for i2 in i1 + 1..shape.rows {
            for j1 in 0..shape.cols {
                for j2 in j1 + 1..shape.cols {
                    moves.push(basic_move(shape, (i1, i2), (j1, j2)));
                }
            }
        }
    }
    MoveSet::for_shape(shape, moves).expect("basic moves stay inside the table")
}

fn basic_move(shape: Shape, (i1, i2): (usize, usize), (j1, j2): (usize, usize)) -> Move {
    let mut entries = vec![
        (shape.index((i1, j1)) as u32, 1),
        (shape.index((i1, j2)) as u32, -1),
        (shape.index((i2, j1)) as u32, -1),
        (shape.index((i2, j2)) as u32, 1),
    ];
    entries.sort_unstable();
    Move { entries }
}

/// The degree-`r` loop with `+1` at `(i_k, j_k)` and `-1` at `(i_k, j_{k+1})`
/// (indices cyclic), returned in canonical form.
pub fn loop_move(shape: Shape, rows: &[usize], cols: &[usize]) -> Result<Move> {
    let r = rows.len();
    if r < 2 || cols.len() != r {
        return Err(Error::invalid(format!(
            "a loop needs r >= 2 rows and as many columns (got {} rows, {} cols)",
            rows.len(),
            cols.len()
        )));
    }
    if !all_distinct(rows) || !all_distinct(cols) {
        return Err(Error::invalid("loop row and column indices must be pairwise distinct"));
    }
    if rows.iter().any(|&i| i >= shape.rows) || cols.iter().any(|&j| j >= shape.cols) {
        return Err(Error::invalid(format!("loop index outside {shape} table")));
    }
    let pairs = (0..r).flat_map(|k| {
        [
            (shape.index((rows[k], cols[k])), 1),
            (shape.index((rows[k], cols[(k + 1) % r])), -1),
        ]
    });
    Move::from_sparse(pairs)
}

fn all_distinct(xs: &[usize]) -> bool {
    xs.iter()
        .enumerate()
        .all(|(a, x)| xs[a + 1..].iter().all(|y| y != x))
}

/// A cycle of the bipartite row/column graph, given as the visiting order
/// `rows[0], cols[0], rows[1], cols[1], ..., rows[s-1], cols[s-1]`.
///
/// Its move is `+1` on `(rows[k], cols[k])` and `-1` on
/// `(rows[k+1], cols[k])`. Enumeration fixes `rows[0]` as the least row and
/// `cols[0] < cols[s-1]`, so each cycle is produced exactly once and the
/// produced orientation is already canonical.
#[derive(Debug)]
pub struct CycleRef<'a> {
    pub rows: &'a [usize],
    pub cols: &'a [usize],
}

impl CycleRef<'_> {
    pub fn degree(&self) -> usize {
        self.rows.len()
    }

    pub fn to_move(&self, shape: Shape) -> Move {
        let s = self.rows.len();
        let mut entries = Vec::with_capacity(2 * s);
        for k in 0..s {
            entries.push((shape.index((self.rows[k], self.cols[k])) as u32, 1));
            entries.push((shape.index((self.rows[(k + 1) % s], self.cols[k])) as u32, -1));
        }
        entries.sort_unstable();
        let m = Move { entries };
        debug_assert!(m.entries[0].1 > 0);
        m
    }
}

/// Visits every cycle of the bipartite graph whose edges are the `allowed`
/// cells (all cells when `None`), for cycle degrees in `degrees`. The visit
/// order is deterministic: by degree, then by row subset and column subset
/// in lexicographic order, then by depth-first order.
pub fn visit_cycles<F>(
    shape: Shape,
    allowed: Option<&[bool]>,
    degrees: std::ops::RangeInclusive<usize>,
    mut visit: F,
) where
    F: FnMut(&CycleRef<'_>),
{
    let max_deg = shape.rows.min(shape.cols);
    let lo = (*degrees.start()).max(2);
    let hi = (*degrees.end()).min(max_deg);
    let all = vec![true; shape.cells()];
    let allowed = allowed.unwrap_or(&all);
    let mut search = CycleSearch::new(shape, allowed);
    for s in lo..=hi {
        for_each_subset(shape.rows, s, |row_set| {
            for_each_subset(shape.cols, s, |col_set| {
                search.run(row_set, col_set, &mut visit);
            });
        });
    }
}

/// Calls `f` on every `s`-subset of `0..n`, ascending lexicographic.
pub(crate) fn for_each_subset(n: usize, s: usize, mut f: impl FnMut(&[usize])) {
    if s > n {
        return;
    }
    let mut idx: Vec<usize> = (0..s).collect();
    loop {
        f(&idx);
        let mut i = s;
        while i > 0 && idx[i - 1] == n - s + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for t in i..s {
            idx[t] = idx[t - 1] + 1;
        }
    }
}

struct CycleSearch<'a> {
    shape: Shape,
    allowed: &'a [bool],
    rows: Vec<usize>,
    cols: Vec<usize>,
    row_used: Vec<bool>,
    col_used: Vec<bool>,
}

impl<'a> CycleSearch<'a> {
    fn new(shape: Shape, allowed: &'a [bool]) -> Self {
        CycleSearch {
            shape,
            allowed,
            rows: Vec::with_capacity(shape.rows),
            cols: Vec::with_capacity(shape.cols),
            row_used: vec![false; shape.rows],
            col_used: vec![false; shape.cols],
        }
    }

    fn ok(&self, i: usize, j: usize) -> bool {
        self.allowed[i * self.shape.cols + j]
    }

    fn run<F: FnMut(&CycleRef<'_>)>(&mut self, row_set: &[usize], col_set: &[usize], visit: &mut F) {
        self.rows.clear();
        self.cols.clear();
        self.rows.push(row_set[0]);
        self.extend_col(row_set, col_set, visit);
    }

    /// The path ends at row `rows.last()`; choose the next column.
    fn extend_col<F: FnMut(&CycleRef<'_>)>(&mut self, row_set: &[usize], col_set: &[usize], visit: &mut F) {
        let s = row_set.len();
        let r = *self.rows.last().unwrap();
        for &c in col_set {
            if self.col_used[c] || !self.ok(r, c) {
                continue;
            }
            if self.cols.len() + 1 == s {
                // closing column: must meet rows[0] and exceed cols[0]
                if self.ok(self.rows[0], c) && (s == 1 || c > self.cols[0]) {
                    self.cols.push(c);
                    visit(&CycleRef {
                        rows: &self.rows,
                        cols: &self.cols,
                    });
                    self.cols.pop();
                }
                continue;
            }
            self.col_used[c] = true;
            self.cols.push(c);
            self.extend_row(row_set, col_set, visit);
            self.cols.pop();
            self.col_used[c] = false;
        }
    }

    fn extend_row<F: FnMut(&CycleRef<'_>)>(&mut self, row_set: &[usize], col_set: &[usize], visit: &mut F) {
        let c = *self.cols.last().unwrap();
        for &r in &row_set[1..] {
            if self.row_used[r] || !self.ok(r, c) {
                continue;
            }
            self.row_used[r] = true;
            self.rows.push(r);
            self.extend_col(row_set, col_set, visit);
            self.rows.pop();
            self.row_used[r] = false;
        }
    }
}

/// Every cycle move of the complete bipartite graph `K_{I,J}`: the universal
/// basis of the two-way independence model.
pub fn circuit_moves(shape: Shape) -> MoveSet {
    let mut moves = Vec::new();
    visit_cycles(shape, None, 2..=usize::MAX, |c| moves.push(c.to_move(shape)));
    MoveSet::for_shape(shape, moves).expect("cycle moves stay inside the table")
}

/// Number of bipartite cycles per support size (`2 * degree`), without
/// materializing the moves.
pub fn circuit_support_counts(shape: Shape) -> Vec<(usize, u64)> {
    let max_deg = shape.rows.min(shape.cols);
    let mut counts = vec![0u64; max_deg + 1];
    visit_cycles(shape, None, 2..=max_deg, |c| counts[c.degree()] += 1);
    (2..=max_deg).map(|d| (2 * d, counts[d])).collect()
}

/// Drops every move whose support meets one of `zeros` (flat cell indices).
pub fn filter_support(moves: &MoveSet, zeros: &[usize]) -> MoveSet {
    let mut forbidden = vec![false; moves.dim()];
    for &h in zeros {
        if h < forbidden.len() {
            forbidden[h] = true;
        }
    }
    moves.retain(|m| !m.touches(&forbidden))
}

/// Drops every move touching a structural zero.
pub fn filter_structural_zeros(moves: &MoveSet, shape: Shape, zeros: &[Cell]) -> Result<MoveSet> {
    if shape.cells() != moves.dim() {
        return Err(Error::Dimension {
            expected: moves.dim(),
            actual: shape.cells(),
            context: "filter: shape vs move set",
        });
    }
    let flat: Result<Vec<usize>> = zeros
        .iter()
        .map(|&c| {
            if shape.contains(c) {
                Ok(shape.index(c))
            } else {
                Err(Error::invalid(format!("zero cell ({}, {}) outside {shape}", c.0 + 1, c.1 + 1)))
            }
        })
        .collect();
    Ok(filter_support(moves, &flat?))
}

/// Loops that form the minimal Markov basis of the quasi-independence model
/// on the cells outside `zeros`.
#[derive(Clone, Debug)]
pub struct Df1Loops {
    pub moves: MoveSet,
    /// Rows consisting entirely of structural zeros (0-based).
    pub empty_rows: Vec<usize>,
    pub empty_cols: Vec<usize>,
}

/// All loops of degree `2..=min(I,J)` avoiding `zeros` whose row x column
/// rectangle holds no loop of smaller degree avoiding `zeros`.
pub fn df1_loops(shape: Shape, zeros: &[Cell]) -> Result<Df1Loops> {
    let mut allowed = vec![true; shape.cells()];
    for &c in zeros {
        if !shape.contains(c) {
            return Err(Error::invalid(format!("zero cell ({}, {}) outside {shape}", c.0 + 1, c.1 + 1)));
        }
        allowed[shape.index(c)] = false;
    }
    let empty_rows = (0..shape.rows)
        .filter(|&i| (0..shape.cols).all(|j| !allowed[shape.index((i, j))]))
        .collect();
    let empty_cols = (0..shape.cols)
        .filter(|&j| (0..shape.rows).all(|i| !allowed[shape.index((i, j))]))
        .collect();

    let mut girth = RectangleLoops::new(shape, &allowed);
    let mut candidates: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    visit_cycles(shape, Some(&allowed), 2..=usize::MAX, |c| {
        candidates.push((c.rows.to_vec(), c.cols.to_vec()));
    });
    let mut moves = Vec::new();
    for (rows, cols) in candidates {
        let r = rows.len();
        let rmask = mask_of(&rows);
        let cmask = mask_of(&cols);
        if girth.min_degree(rmask, cmask) == Some(r) {
            moves.push(CycleRef { rows: &rows, cols: &cols }.to_move(shape));
        }
    }
    Ok(Df1Loops {
        moves: MoveSet::for_shape(shape, moves)?,
        empty_rows,
        empty_cols,
    })
}

fn mask_of(xs: &[usize]) -> u64 {
    xs.iter().fold(0u64, |m, &x| m | (1u64 << x))
}

fn members(mask: u64) -> Vec<usize> {
    (0..64).filter(|b| mask >> b & 1 == 1).collect()
}

/// Brute-force "smallest loop inside a rectangle" with memoization. A loop
/// of degree `d` inside `R x C` uses exactly `d` rows and `d` columns, so it
/// is a Hamiltonian cycle of some `d x d` sub-rectangle.
struct RectangleLoops<'a> {
    shape: Shape,
    allowed: &'a [bool],
    hamiltonian: HashMap<(u64, u64), bool>,
    min_degree: HashMap<(u64, u64), Option<usize>>,
}

impl<'a> RectangleLoops<'a> {
    fn new(shape: Shape, allowed: &'a [bool]) -> Self {
        RectangleLoops {
            shape,
            allowed,
            hamiltonian: HashMap::new(),
            min_degree: HashMap::new(),
        }
    }

    fn min_degree(&mut self, rmask: u64, cmask: u64) -> Option<usize> {
        if let Some(&d) = self.min_degree.get(&(rmask, cmask)) {
            return d;
        }
        let rows = members(rmask);
        let cols = members(cmask);
        let mut found = None;
        'deg: for d in 2..=rows.len().min(cols.len()) {
            let mut hit = false;
            for_each_subset(rows.len(), d, |ri| {
                if hit {
                    return;
                }
                let rsub: u64 = ri.iter().fold(0, |m, &t| m | 1 << rows[t]);
                for_each_subset(cols.len(), d, |ci| {
                    if hit {
                        return;
                    }
                    let csub: u64 = ci.iter().fold(0, |m, &t| m | 1 << cols[t]);
                    hit = self.has_hamiltonian(rsub, csub);
                });
            });
            if hit {
                found = Some(d);
                break 'deg;
            }
        }
        self.min_degree.insert((rmask, cmask), found);
        found
    }

    fn has_hamiltonian(&mut self, rmask: u64, cmask: u64) -> bool {
        if let Some(&h) = self.hamiltonian.get(&(rmask, cmask)) {
            return h;
        }
        let rows = members(rmask);
        let cols = members(cmask);
        let mut sub_allowed = vec![false; self.shape.cells()];
        for &i in &rows {
            for &j in &cols {
                let h = self.shape.index((i, j));
                sub_allowed[h] = self.allowed[h];
            }
        }
        let mut found = false;
        let mut search = CycleSearch::new(self.shape, &sub_allowed);
        search.run(&rows, &cols, &mut |_: &CycleRef<'_>| found = true);
        self.hamiltonian.insert((rmask, cmask), found);
        found
    }
}

/// `table + sign * m` if the result is nonnegative and within `bounds`.
pub fn apply_move(table: &Table, m: &Move, sign: Sign, bounds: &BoundsGrid) -> Result<Option<Table>> {
    if table.shape() != bounds.shape() {
        return Err(Error::invalid(format!(
            "table shape {} does not match bounds shape {}",
            table.shape(),
            bounds.shape()
        )));
    }
    if m.max_index() >= table.shape().cells() {
        return Err(Error::invalid("move touches a cell outside the table"));
    }
    let mut counts = table.counts().to_vec();
    if apply_in_place(&mut counts, m, sign, bounds) {
        Ok(Some(Table::from_parts_unchecked(table.shape(), counts)))
    } else {
        Ok(None)
    }
}

/// Applies the move to `counts` if feasible; leaves `counts` untouched and
/// returns `false` otherwise.
pub(crate) fn apply_in_place(counts: &mut [u32], m: &Move, sign: Sign, bounds: &BoundsGrid) -> bool {
    let f = sign.factor();
    let feasible = m.entries().iter().all(|&(h, d)| {
        let next = counts[h as usize] as i64 + f * d as i64;
        next >= 0 && next <= u32::MAX as i64 && bounds.bound(h as usize).allows(next as u32)
    });
    if feasible {
        for &(h, d) in m.entries() {
            counts[h as usize] = (counts[h as usize] as i64 + f * d as i64) as u32;
        }
    }
    feasible
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::two_way_design;

    fn sq(n: usize) -> Shape {
        Shape::new(n, n).unwrap()
    }

    fn dense(m: &Move, shape: Shape) -> Vec<i64> {
        m.to_dense(shape.cells())
    }

    #[test]
    fn canonical_sign_and_negation() {
        let a = Move::from_dense(&[0, -1, 1, 0]).unwrap();
        let b = Move::from_dense(&[0, 1, -1, 0]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.entries(), &[(1, 1), (2, -1)]);
        assert!(Move::from_dense(&[0, 0]).is_err());
    }

    #[test]
    fn sparse_duplicates_are_summed() {
        let m = Move::from_sparse([(3, 1), (1, -2), (3, 1), (1, 1)]).unwrap();
        assert_eq!(m.entries(), &[(1, 1), (3, -2)]);
        assert!(Move::from_sparse([(2, 1), (2, -1)]).is_err());
    }

    #[test]
    fn basic_move_counts() {
        assert_eq!(basic_moves(sq(2)).len(), 1);
        assert_eq!(basic_moves(sq(3)).len(), 9);
        assert_eq!(basic_moves(sq(7)).len(), 441);
        assert_eq!(basic_moves(Shape::new(1, 5).unwrap()).len(), 0);
        assert_eq!(basic_moves(Shape::new(3, 4).unwrap()).len(), 18);
    }

    #[test]
    fn basic_move_shape() {
        let shape = sq(2);
        let set = basic_moves(shape);
        assert_eq!(dense(set.get(0), shape), vec![1, -1, -1, 1]);
    }

    #[test]
    fn degree_two_loop_is_basic() {
        let shape = sq(2);
        let m = loop_move(shape, &[0, 1], &[0, 1]).unwrap();
        assert_eq!(&m, basic_moves(shape).get(0));
    }

    #[test]
    fn degree_three_loop_entries() {
        let shape = sq(3);
        let m = loop_move(shape, &[0, 1, 2], &[0, 1, 2]).unwrap();
        // +1 at (1,1),(2,2),(3,3); -1 at (1,2),(2,3),(3,1)
        assert_eq!(dense(&m, shape), vec![1, -1, 0, 0, 1, -1, -1, 0, 1]);
    }

    #[test]
    fn loop_rejects_repeats() {
        let shape = sq(3);
        assert!(loop_move(shape, &[0, 0], &[0, 1]).is_err());
        assert!(loop_move(shape, &[0, 1], &[2, 2]).is_err());
        assert!(loop_move(shape, &[0], &[0]).is_err());
        assert!(loop_move(shape, &[0, 3], &[0, 1]).is_err());
    }

    #[test]
    fn circuit_counts_small() {
        assert_eq!(circuit_moves(sq(2)).len(), 1);
        assert_eq!(circuit_moves(sq(3)).len(), 15);
        let four = circuit_moves(sq(4));
        assert_eq!(four.len(), 204);
        assert_eq!(four.support_histogram(), vec![(4, 36), (6, 96), (8, 72)]);
    }

    #[test]
    fn streaming_counts_match_materialized() {
        for (r, c) in [(2, 5), (3, 4), (4, 4), (5, 3)] {
            let shape = Shape::new(r, c).unwrap();
            let total: u64 = circuit_support_counts(shape).iter().map(|x| x.1).sum();
            assert_eq!(total as usize, circuit_moves(shape).len());
        }
    }

    #[test]
    fn circuits_are_kernel_elements() {
        let shape = Shape::new(3, 4).unwrap();
        let a = two_way_design(shape);
        for m in &circuit_moves(shape) {
            assert!(a.annihilates(&m.to_dense(shape.cells())));
        }
    }

    #[test]
    fn filter_identity_and_removal() {
        let shape = sq(4);
        let all = circuit_moves(shape);
        assert_eq!(filter_structural_zeros(&all, shape, &[]).unwrap(), all);
        let f = filter_structural_zeros(&all, shape, &[(0, 0)]).unwrap();
        assert_eq!(f.len(), 123);
    }

    #[test]
    fn df1_complete_3x3_is_basic() {
        let shape = sq(3);
        let d = df1_loops(shape, &[]).unwrap();
        assert_eq!(d.moves, basic_moves(shape));
        assert!(d.empty_rows.is_empty() && d.empty_cols.is_empty());
    }

    #[test]
    fn df1_diagonal_zeros_has_three_cycle() {
        let shape = sq(3);
        let zeros = [(0, 0), (1, 1), (2, 2)];
        let d = df1_loops(shape, &zeros).unwrap();
        let m = loop_move(shape, &[0, 1, 2], &[1, 2, 0]).unwrap();
        assert!(d.moves.contains(&m));
    }

    #[test]
    fn df1_flags_empty_rows() {
        let shape = sq(3);
        let d = df1_loops(shape, &[(1, 0), (1, 1), (1, 2)]).unwrap();
        assert_eq!(d.empty_rows, vec![1]);
        assert_eq!(d.moves.len(), 3);
    }

    #[test]
    fn apply_examples() {
        let shape = sq(2);
        let m = basic_moves(shape).get(0).clone(); // +1 (1,1),(2,2)
        let b = BoundsGrid::unbounded(shape);
        let t = Table::from_rows(&[[1, 0], [0, 1]]).unwrap();
        let next = apply_move(&t, &m, Sign::Minus, &b).unwrap().unwrap();
        assert_eq!(next, Table::from_rows(&[[0, 1], [1, 0]]).unwrap());
        assert_eq!(apply_move(&next, &m, Sign::Minus, &b).unwrap(), None);
        let mut bz = BoundsGrid::unbounded(shape);
        bz.set((0, 1), crate::table::CellBound::AtMost(0)).unwrap();
        assert_eq!(apply_move(&t, &m, Sign::Minus, &bz).unwrap(), None);
    }

    #[test]
    fn ordering_is_by_degree_first() {
        let shape = sq(3);
        let set = circuit_moves(shape);
        let degrees: Vec<u64> = set.iter().map(Move::degree).collect();
        assert!(degrees.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(degrees.iter().filter(|&&d| d == 2).count(), 9);
    }
}
