//! Tables, cell bounds, design matrices and fiber specifications.
//!
//! Cells are addressed row-major: cell `(i, j)` of an `I x J` table lives at
//! flat index `i * J + j`. All indices in this module are 0-based; the JSON
//! layer converts to 1-based where the file formats require it.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// A 0-based `(row, col)` cell address.
pub type Cell = (usize, usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Shape {
    pub rows: usize,
    pub cols: usize,
}

impl Shape {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape { rows, cols, min: 1 });
        }
        Ok(Shape { rows, cols })
    }

    /// A single-row shape used for tables over a general design matrix,
    /// where the cells carry no two-way structure.
    pub fn flat(k: usize) -> Result<Self> {
        Shape::new(1, k)
    }

    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }

    pub fn index(&self, (i, j): Cell) -> usize {
        debug_assert!(i < self.rows && j < self.cols);
        i * self.cols + j
    }

    pub fn cell(&self, index: usize) -> Cell {
        (index / self.cols, index % self.cols)
    }

    pub fn contains(&self, (i, j): Cell) -> bool {
        i < self.rows && j < self.cols
    }

    pub fn transpose(&self) -> Shape {
        Shape {
            rows: self.cols,
            cols: self.rows,
        }
    }

    pub(crate) fn require_two_way(&self) -> Result<()> {
        if self.rows < 2 || self.cols < 2 {
            return Err(Error::Shape {
                rows: self.rows,
                cols: self.cols,
                min: 2,
            });
        }
        Ok(())
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

/// A dense table of nonnegative counts. Ordering is row-major lexicographic
/// on the counts, which is the order fibers are enumerated in.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Table {
    shape: Shape,
    counts: Vec<u32>,
}

impl Table {
    pub fn new(shape: Shape, counts: Vec<u32>) -> Result<Self> {
        if counts.len() != shape.cells() {
            return Err(Error::Dimension {
                expected: shape.cells(),
                actual: counts.len(),
                context: "table counts",
            });
        }
        Ok(Table { shape, counts })
    }

    pub fn zeros(shape: Shape) -> Self {
        Table {
            shape,
            counts: vec![0; shape.cells()],
        }
    }

    /// Builds a table from nested rows; every row must have the same length.
    pub fn from_rows<R: AsRef<[u32]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let shape = Shape::new(rows.len(), cols)?;
        let mut counts = Vec::with_capacity(shape.cells());
        for row in rows {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::Dimension {
                    expected: cols,
                    actual: row.len(),
                    context: "table row",
                });
            }
            counts.extend_from_slice(row);
        }
        Ok(Table { shape, counts })
    }

    pub(crate) fn from_parts_unchecked(shape: Shape, counts: Vec<u32>) -> Self {
        debug_assert_eq!(counts.len(), shape.cells());
        Table { shape, counts }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn into_counts(self) -> Vec<u32> {
        self.counts
    }

    pub fn get(&self, cell: Cell) -> u32 {
        self.counts[self.shape.index(cell)]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts
            .chunks(self.shape.cols)
            .map(|r| r.iter().map(|&c| c as u64).sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        let mut sums = vec![0u64; self.shape.cols];
        for (h, &c) in self.counts.iter().enumerate() {
            sums[h % self.shape.cols] += c as u64;
        }
        sums
    }
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (r, row) in self.counts.chunks(self.shape.cols).enumerate() {
            if r > 0 {
                writeln!(f)?;
            }
            let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            write!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

/// Upper bound on a single cell. `AtMost(0)` is a structural zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum CellBound {
    #[default]
    Unbounded,
    AtMost(u32),
}

impl CellBound {
    pub fn allows(&self, count: u32) -> bool {
        match *self {
            CellBound::Unbounded => true,
            CellBound::AtMost(b) => count <= b,
        }
    }

    pub fn is_structural_zero(&self) -> bool {
        matches!(self, CellBound::AtMost(0))
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, CellBound::AtMost(_))
    }

    pub fn limit(&self) -> Option<u32> {
        match *self {
            CellBound::Unbounded => None,
            CellBound::AtMost(b) => Some(b),
        }
    }
}

impl From<Option<u32>> for CellBound {
    fn from(value: Option<u32>) -> Self {
        value.map_or(CellBound::Unbounded, CellBound::AtMost)
    }
}

impl Serialize for CellBound {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.limit().serialize(s)
    }
}

impl<'de> Deserialize<'de> for CellBound {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Option::<u32>::deserialize(d).map(CellBound::from)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BoundsGrid {
    shape: Shape,
    bounds: Vec<CellBound>,
}

impl BoundsGrid {
    pub fn new(shape: Shape, bounds: Vec<CellBound>) -> Result<Self> {
        if bounds.len() != shape.cells() {
            return Err(Error::Dimension {
                expected: shape.cells(),
                actual: bounds.len(),
                context: "bounds grid",
            });
        }
        Ok(BoundsGrid { shape, bounds })
    }

    pub fn unbounded(shape: Shape) -> Self {
        BoundsGrid {
            shape,
            bounds: vec![CellBound::Unbounded; shape.cells()],
        }
    }

    pub fn uniform(shape: Shape, bound: u32) -> Self {
        BoundsGrid {
            shape,
            bounds: vec![CellBound::AtMost(bound); shape.cells()],
        }
    }

    /// Unbounded everywhere except structural zeros on `zeros`.
    pub fn with_zeros(shape: Shape, zeros: &[Cell]) -> Result<Self> {
        let mut grid = BoundsGrid::unbounded(shape);
        for &cell in zeros {
            grid.set(cell, CellBound::AtMost(0))?;
        }
        Ok(grid)
    }

    pub fn set(&mut self, cell: Cell, bound: CellBound) -> Result<()> {
        if !self.shape.contains(cell) {
            return Err(Error::invalid(format!(
                "cell ({}, {}) outside {} table",
                cell.0 + 1,
                cell.1 + 1,
                self.shape
            )));
        }
        let h = self.shape.index(cell);
        self.bounds[h] = bound;
        Ok(())
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn bounds(&self) -> &[CellBound] {
        &self.bounds
    }

    pub fn bound(&self, index: usize) -> CellBound {
        self.bounds[index]
    }

    /// Flat indices of the structural zeros, ascending.
    pub fn structural_zeros(&self) -> Vec<usize> {
        self.indices_where(CellBound::is_structural_zero)
    }

    /// Flat indices of every cell carrying an upper bound (including zeros).
    pub fn bounded_cells(&self) -> Vec<usize> {
        self.indices_where(CellBound::is_bounded)
    }

    fn indices_where(&self, pred: impl Fn(&CellBound) -> bool) -> Vec<usize> {
        self.bounds
            .iter()
            .enumerate()
            .filter(|(_, b)| pred(b))
            .map(|(h, _)| h)
            .collect()
    }
}

/// An `s x k` nonnegative integer matrix mapping tables to their sufficient
/// statistics.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DesignMatrix {
    s: usize,
    k: usize,
    entries: Vec<u32>,
}

impl DesignMatrix {
    pub fn new(s: usize, k: usize, entries: Vec<u32>) -> Result<Self> {
        if entries.len() != s * k {
            return Err(Error::Dimension {
                expected: s * k,
                actual: entries.len(),
                context: "design matrix entries",
            });
        }
        Ok(DesignMatrix { s, k, entries })
    }

    pub fn from_rows<R: AsRef<[u32]>>(rows: &[R]) -> Result<Self> {
        let k = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut entries = Vec::with_capacity(rows.len() * k);
        for row in rows {
            let row = row.as_ref();
            if row.len() != k {
                return Err(Error::Dimension {
                    expected: k,
                    actual: row.len(),
                    context: "design matrix row",
                });
            }
            entries.extend_from_slice(row);
        }
        DesignMatrix::new(rows.len(), k, entries)
    }

    pub fn rows(&self) -> usize {
        self.s
    }

    pub fn cols(&self) -> usize {
        self.k
    }

    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.entries[row * self.k + col]
    }

    pub fn row(&self, row: usize) -> &[u32] {
        &self.entries[row * self.k..(row + 1) * self.k]
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = u32> + '_ {
        (0..self.s).map(move |r| self.get(r, col))
    }

    /// Keeps only the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> DesignMatrix {
        let mut entries = Vec::with_capacity(self.s * cols.len());
        for r in 0..self.s {
            entries.extend(cols.iter().map(|&c| self.get(r, c)));
        }
        DesignMatrix {
            s: self.s,
            k: cols.len(),
            entries,
        }
    }

    /// `A * v` for a signed vector; used for kernel-membership checks.
    pub fn apply_signed(&self, v: &[i64]) -> Vec<i64> {
        debug_assert_eq!(v.len(), self.k);
        (0..self.s)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .map(|(&a, &x)| a as i64 * x)
                    .sum()
            })
            .collect()
    }

    pub fn annihilates(&self, v: &[i64]) -> bool {
        v.len() == self.k && self.apply_signed(v).iter().all(|&x| x == 0)
    }
}

/// Row sums then column sums: the sufficient statistic of the independence
/// model on an `I x J` table.
pub fn two_way_design(shape: Shape) -> DesignMatrix {
    let (rows, cols) = (shape.rows, shape.cols);
    let k = shape.cells();
    let mut entries = vec![0u32; (rows + cols) * k];
    for i in 0..rows {
        for j in 0..cols {
            let h = shape.index((i, j));
            entries[i * k + h] = 1;
            entries[(rows + j) * k + h] = 1;
        }
    }
    DesignMatrix {
        s: rows + cols,
        k,
        entries,
    }
}

/// The independence design restricted to the cells outside `zeros`
/// (quasi-independence). Column order follows the remaining cells in
/// row-major order; see [`free_cells`].
pub fn quasi_independence_design(shape: Shape, zeros: &[Cell]) -> Result<DesignMatrix> {
    let keep = free_cells(shape, zeros)?;
    Ok(two_way_design(shape).select_columns(&keep))
}

/// Flat indices of the cells not in `zeros`, ascending. Rejects a zero set
/// that covers every cell.
pub fn free_cells(shape: Shape, zeros: &[Cell]) -> Result<Vec<usize>> {
    let mut is_zero = vec![false; shape.cells()];
    for &cell in zeros {
        if !shape.contains(cell) {
            return Err(Error::invalid(format!(
                "structural zero ({}, {}) outside {} table",
                cell.0 + 1,
                cell.1 + 1,
                shape
            )));
        }
        is_zero[shape.index(cell)] = true;
    }
    let keep: Vec<usize> = (0..shape.cells()).filter(|&h| !is_zero[h]).collect();
    if keep.is_empty() {
        return Err(Error::invalid("structural zeros cover the whole table"));
    }
    Ok(keep)
}

pub fn margins(table: &Table, matrix: &DesignMatrix) -> Result<Vec<u64>> {
    margins_of(table.counts(), matrix)
}

pub(crate) fn margins_of(counts: &[u32], matrix: &DesignMatrix) -> Result<Vec<u64>> {
    if counts.len() != matrix.cols() {
        return Err(Error::Dimension {
            expected: matrix.cols(),
            actual: counts.len(),
            context: "margins: table cells vs design columns",
        });
    }
    Ok((0..matrix.rows())
        .map(|r| {
            matrix
                .row(r)
                .iter()
                .zip(counts)
                .map(|(&a, &n)| a as u64 * n as u64)
                .sum()
        })
        .collect())
}

pub fn satisfies_bounds(table: &Table, bounds: &BoundsGrid) -> Result<bool> {
    if table.shape() != bounds.shape() {
        return Err(Error::invalid(format!(
            "table shape {} does not match bounds shape {}",
            table.shape(),
            bounds.shape()
        )));
    }
    Ok(table
        .counts()
        .iter()
        .zip(bounds.bounds())
        .all(|(&n, b)| b.allows(n)))
}

/// The bounded fiber `{ n >= 0 : A n = target, n <= bounds }`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberSpec {
    matrix: DesignMatrix,
    target: Vec<u64>,
    bounds: BoundsGrid,
}

impl FiberSpec {
    pub fn new(matrix: DesignMatrix, target: Vec<u64>, bounds: BoundsGrid) -> Result<Self> {
        if target.len() != matrix.rows() {
            return Err(Error::Dimension {
                expected: matrix.rows(),
                actual: target.len(),
                context: "fiber target vs design rows",
            });
        }
        if bounds.shape().cells() != matrix.cols() {
            return Err(Error::Dimension {
                expected: matrix.cols(),
                actual: bounds.shape().cells(),
                context: "fiber bounds vs design columns",
            });
        }
        Ok(FiberSpec {
            matrix,
            target,
            bounds,
        })
    }

    /// The fiber through an observed table.
    pub fn through(matrix: DesignMatrix, observed: &Table, bounds: BoundsGrid) -> Result<Self> {
        let target = margins(observed, &matrix)?;
        FiberSpec::new(matrix, target, bounds)
    }

    pub fn matrix(&self) -> &DesignMatrix {
        &self.matrix
    }

    pub fn target(&self) -> &[u64] {
        &self.target
    }

    pub fn bounds(&self) -> &BoundsGrid {
        &self.bounds
    }

    pub fn shape(&self) -> Shape {
        self.bounds.shape()
    }

    pub fn contains(&self, table: &Table) -> bool {
        table.shape() == self.shape()
            && satisfies_bounds(table, &self.bounds).unwrap_or(false)
            && margins(table, &self.matrix).is_ok_and(|m| m == self.target)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(n: usize) -> Shape {
        Shape::new(n, n).unwrap()
    }

    #[test]
    fn degenerate_shapes_rejected() {
        assert!(Shape::new(0, 3).is_err());
        assert!(Shape::new(3, 0).is_err());
        assert!(Shape::new(1, 1).is_ok());
    }

    #[test]
    fn two_way_design_2x2_margins() {
        let a = two_way_design(sq(2));
        assert_eq!((a.rows(), a.cols()), (4, 4));
        let t = Table::from_rows(&[[1, 0], [0, 1]]).unwrap();
        assert_eq!(margins(&t, &a).unwrap(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn two_way_design_columns_sum_to_two() {
        let a = two_way_design(sq(3));
        assert_eq!((a.rows(), a.cols()), (6, 9));
        for h in 0..9 {
            assert_eq!(a.column(h).sum::<u32>(), 2);
        }
    }

    #[test]
    fn all_ones_table_margins() {
        let shape = Shape::new(3, 5).unwrap();
        let t = Table::new(shape, vec![1; 15]).unwrap();
        let m = margins(&t, &two_way_design(shape)).unwrap();
        assert_eq!(m, vec![5, 5, 5, 3, 3, 3, 3, 3]);
    }

    #[test]
    fn margins_examples() {
        let a = two_way_design(sq(2));
        let t = Table::from_rows(&[[1, 2], [3, 4]]).unwrap();
        assert_eq!(margins(&t, &a).unwrap(), vec![3, 7, 4, 6]);
        assert_eq!(margins(&Table::zeros(sq(2)), &a).unwrap(), vec![0; 4]);
        let t = Table::from_rows(&[[0, 1], [1, 0]]).unwrap();
        assert_eq!(margins(&t, &a).unwrap(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn margins_dimension_mismatch() {
        let a = two_way_design(sq(3));
        let t = Table::zeros(sq(2));
        assert!(matches!(margins(&t, &a), Err(Error::Dimension { .. })));
    }

    #[test]
    fn quasi_independence_shapes() {
        let a = quasi_independence_design(sq(3), &[(0, 0)]).unwrap();
        assert_eq!((a.rows(), a.cols()), (6, 8));
        let diag: Vec<Cell> = (0..4).map(|i| (i, i)).collect();
        let a = quasi_independence_design(sq(4), &diag).unwrap();
        assert_eq!((a.rows(), a.cols()), (8, 12));
        assert_eq!(quasi_independence_design(sq(3), &[]).unwrap(), two_way_design(sq(3)));
    }

    #[test]
    fn quasi_independence_rejects_full_zero_set() {
        let all: Vec<Cell> = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).collect();
        assert!(quasi_independence_design(sq(2), &all).is_err());
    }

    #[test]
    fn bounds_checks() {
        let t = Table::from_rows(&[[0, 1], [1, 0]]).unwrap();
        assert!(satisfies_bounds(&t, &BoundsGrid::uniform(sq(2), 1)).unwrap());
        let t = Table::from_rows(&[[2, 0], [0, 0]]).unwrap();
        let mut b = BoundsGrid::unbounded(sq(2));
        b.set((0, 0), CellBound::AtMost(1)).unwrap();
        assert!(!satisfies_bounds(&t, &b).unwrap());
        assert!(satisfies_bounds(&t, &BoundsGrid::unbounded(sq(2))).unwrap());
        assert!(satisfies_bounds(&t, &BoundsGrid::unbounded(sq(3))).is_err());
    }

    #[test]
    fn structural_zeros_derived_from_bounds() {
        let mut b = BoundsGrid::unbounded(sq(3));
        b.set((1, 1), CellBound::AtMost(0)).unwrap();
        b.set((2, 0), CellBound::AtMost(4)).unwrap();
        assert_eq!(b.structural_zeros(), vec![4]);
        assert_eq!(b.bounded_cells(), vec![4, 6]);
    }

    #[test]
    fn fiber_membership() {
        let a = two_way_design(sq(2));
        let obs = Table::from_rows(&[[1, 0], [0, 1]]).unwrap();
        let spec = FiberSpec::through(a, &obs, BoundsGrid::unbounded(sq(2))).unwrap();
        assert!(spec.contains(&Table::from_rows(&[[0, 1], [1, 0]]).unwrap()));
        assert!(!spec.contains(&Table::from_rows(&[[2, 0], [0, 0]]).unwrap()));
    }
}
