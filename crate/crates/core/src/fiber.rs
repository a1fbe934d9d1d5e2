//! Exhaustive fibers: enumeration, connectivity under a move set,
//! Markov-subbasis verification over families of margins and bounds, and
//! a search over structural-zero patterns.

use std::collections::{HashMap, HashSet, VecDeque};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::moves::{apply_in_place, basic_moves, for_each_subset, MoveSet, Sign};
use crate::table::{margins_of, two_way_design, BoundsGrid, Cell, CellBound, DesignMatrix, FiberSpec, Shape, Table};

pub const DEFAULT_FIBER_CAP: usize = 200_000;
pub const DEFAULT_MARGIN_CAP: u64 = 8;

#[derive(Clone, Debug)]
pub struct Fiber {
    spec: FiberSpec,
    tables: Vec<Table>,
}

impl Fiber {
    pub fn spec(&self) -> &FiberSpec {
        &self.spec
    }

    /// Members in row-major lexicographic order.
    pub fn tables(&self) -> &[Table] {
        &self.tables
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn index_of(&self, t: &Table) -> Option<usize> {
        self.tables.binary_search(t).ok()
    }
}

/// All tables of `F_T^b`, sorted. Refuses with [`Error::CapExceeded`] once
/// more than `size_cap` tables are found.
pub fn enumerate_fiber(spec: &FiberSpec, size_cap: usize) -> Result<Fiber> {
    let a = spec.matrix();
    let k = a.cols();
    let bounds = spec.bounds();
    for h in 0..k {
        if a.column(h).all(|x| x == 0) && !bounds.bound(h).is_bounded() {
            return Err(Error::invalid(format!(
                "cell {} is unconstrained by the design and unbounded: the fiber is infinite",
                h + 1
            )));
        }
    }
    // after cell `h` is fixed, every row whose last contributing cell is
    // `h` must be exhausted
    let mut closes: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut unreachable = false;
    for r in 0..a.rows() {
        let last = (0..k).rev().find(|&h| a.get(r, h) > 0 && bounds.bound(h).limit() != Some(0));
        match last {
            Some(h) => closes[h].push(r),
            None => unreachable |= spec.target()[r] != 0,
        }
    }
    let mut tables = Vec::new();
    if !unreachable {
        let mut walker = Walker {
            a,
            bounds,
            closes: &closes,
            residual: spec.target().to_vec(),
            counts: vec![0; k],
            out: &mut tables,
            cap: size_cap,
        };
        walker.descend(0)?;
    }
    Ok(Fiber {
        spec: spec.clone(),
        tables,
    })
}

struct Walker<'a> {
    a: &'a DesignMatrix,
    bounds: &'a BoundsGrid,
    closes: &'a [Vec<usize>],
    residual: Vec<u64>,
    counts: Vec<u32>,
    out: &'a mut Vec<Table>,
    cap: usize,
}

impl Walker<'_> {
    fn descend(&mut self, h: usize) -> Result<()> {
        let k = self.counts.len();
        if h == k {
            if self.out.len() == self.cap {
                return Err(Error::CapExceeded {
                    what: "fiber size",
                    cap: self.cap,
                    reached: self.cap + 1,
                });
            }
            let shape = self.bounds.shape();
            self.out.push(Table::from_parts_unchecked(shape, self.counts.clone()));
            return Ok(());
        }
        let mut hi: u64 = match self.bounds.bound(h) {
            CellBound::AtMost(b) => b as u64,
            CellBound::Unbounded => u64::MAX,
        };
        for r in 0..self.a.rows() {
            let c = self.a.get(r, h) as u64;
            if c > 0 {
                hi = hi.min(self.residual[r] / c);
            }
        }
        let hi = hi.min(u32::MAX as u64);
        for x in 0..=hi {
            for r in 0..self.a.rows() {
                self.residual[r] -= self.a.get(r, h) as u64 * x;
            }
            if self.closes[h].iter().all(|&r| self.residual[r] == 0) {
                self.counts[h] = x as u32;
                let res = self.descend(h + 1);
                self.counts[h] = 0;
                if res.is_err() {
                    for r in 0..self.a.rows() {
                        self.residual[r] += self.a.get(r, h) as u64 * x;
                    }
                    return res;
                }
            }
            for r in 0..self.a.rows() {
                self.residual[r] += self.a.get(r, h) as u64 * x;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConnectivityReport {
    pub component_count: usize,
    /// Fiber indices per component, each sorted; components ordered by
    /// their smallest member.
    pub components: Vec<Vec<usize>>,
    /// First tables of the first two components when disconnected.
    pub witness: Option<(Table, Table)>,
    /// Proposed neighbors that satisfied bounds but were not fiber members
    /// (nonzero only for moves outside the kernel).
    pub escaped: usize,
}

impl ConnectivityReport {
    pub fn is_connected(&self) -> bool {
        self.component_count <= 1
    }
}

/// Components of the graph on the fiber whose edges are `±m` for `m` in
/// `moves`. Neighbors are explored in move-set order, `+` before `-`.
pub fn connectivity(fiber: &Fiber, moves: &MoveSet) -> Result<ConnectivityReport> {
    let k = fiber.spec.shape().cells();
    if moves.dim() != k {
        return Err(Error::Dimension {
            expected: k,
            actual: moves.dim(),
            context: "move set vs fiber cells",
        });
    }
    let n = fiber.tables.len();
    let index: HashMap<&[u32], usize> = fiber
        .tables
        .iter()
        .enumerate()
        .map(|(i, t)| (t.counts(), i))
        .collect();
    let bounds = fiber.spec.bounds();
    let mut comp = vec![usize::MAX; n];
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut escaped = 0;
    let mut queue = VecDeque::new();
    let mut scratch: Vec<u32> = vec![0; k];
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = components.len();
        comp[start] = id;
        let mut members = vec![start];
        queue.push_back(start);
        while let Some(cur) = queue.pop_front() {
            for m in moves {
                for sign in Sign::BOTH {
                    scratch.copy_from_slice(fiber.tables[cur].counts());
                    if !apply_in_place(&mut scratch, m, sign, bounds) {
                        continue;
                    }
                    match index.get(scratch.as_slice()) {
                        Some(&next) if comp[next] == usize::MAX => {
                            comp[next] = id;
                            members.push(next);
                            queue.push_back(next);
                        }
                        Some(_) => {}
                        None => escaped += 1,
                    }
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    let witness = (components.len() > 1).then(|| {
        (
            fiber.tables[components[0][0]].clone(),
            fiber.tables[components[1][0]].clone(),
        )
    });
    Ok(ConnectivityReport {
        component_count: components.len(),
        components,
        witness,
        escaped,
    })
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub margin_total_cap: u64,
    pub require_positive_margins: bool,
    pub fiber_size_cap: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            margin_total_cap: DEFAULT_MARGIN_CAP,
            require_positive_margins: false,
            fiber_size_cap: DEFAULT_FIBER_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyStatus {
    ConnectedUpToCap,
    Disconnected,
    /// No disconnection found, but some fibers exceeded the size cap.
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub target: Vec<u64>,
    pub bounds: BoundsGrid,
    pub first: Table,
    pub second: Table,
    pub component_count: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubbasisVerdict {
    pub status: VerifyStatus,
    pub witness: Option<Witness>,
    /// Nonempty fibers checked.
    pub fibers_checked: usize,
    /// Margin vectors with an empty fiber (vacuously connected).
    pub empty_fibers: usize,
    /// Margin vectors whose fiber exceeded the size cap.
    pub inconclusive: Vec<Vec<u64>>,
}

enum FiberOutcome {
    Empty,
    Connected,
    Disconnected(Witness),
    TooLarge,
}

/// Checks that `moves` connects every fiber with margin total at most the
/// cap, for every bounds grid in `family`. Two-way designs (detected by
/// comparison with [`two_way_design`]) iterate over pairs of row/column
/// compositions; other designs collect the margin vectors of all tables
/// with total at most the cap. With `require_positive_margins`, every row
/// and column sum must be positive, except for rows/columns made entirely
/// of structural zeros, which are forced to zero.
pub fn verify_subbasis(
    design: &DesignMatrix,
    shape: Shape,
    moves: &MoveSet,
    family: &[BoundsGrid],
    opts: &VerifyOptions,
) -> Result<SubbasisVerdict> {
    if design.cols() != shape.cells() || moves.dim() != shape.cells() {
        return Err(Error::Dimension {
            expected: shape.cells(),
            actual: design.cols(),
            context: "verify: design/moves vs shape",
        });
    }
    let two_way = shape.rows >= 2 && shape.cols >= 2 && *design == two_way_design(shape);
    let mut verdict = SubbasisVerdict {
        status: VerifyStatus::ConnectedUpToCap,
        witness: None,
        fibers_checked: 0,
        empty_fibers: 0,
        inconclusive: Vec::new(),
    };
    for bounds in family {
        if bounds.shape() != shape {
            return Err(Error::invalid("bounds grid shape differs from the design shape"));
        }
        let targets = if two_way {
            two_way_targets(shape, bounds, opts)
        } else {
            general_targets(design, bounds, opts)?
        };
        let outcomes: Vec<Result<FiberOutcome>> = targets
            .par_iter()
            .map(|t| check_fiber(design, bounds, t, moves, opts.fiber_size_cap))
            .collect();
        for (target, outcome) in targets.into_iter().zip(outcomes) {
            match outcome? {
                FiberOutcome::Empty => verdict.empty_fibers += 1,
                FiberOutcome::Connected => verdict.fibers_checked += 1,
                FiberOutcome::TooLarge => verdict.inconclusive.push(target),
                FiberOutcome::Disconnected(w) => {
                    verdict.fibers_checked += 1;
                    verdict.status = VerifyStatus::Disconnected;
                    verdict.witness = Some(w);
                    return Ok(verdict);
                }
            }
        }
    }
    if !verdict.inconclusive.is_empty() {
        verdict.status = VerifyStatus::Inconclusive;
    }
    Ok(verdict)
}

fn check_fiber(
    design: &DesignMatrix,
    bounds: &BoundsGrid,
    target: &[u64],
    moves: &MoveSet,
    cap: usize,
) -> Result<FiberOutcome> {
    let spec = FiberSpec::new(design.clone(), target.to_vec(), bounds.clone())?;
    let fiber = match enumerate_fiber(&spec, cap) {
        Ok(f) => f,
        Err(e) if e.is_cap_exceeded() => return Ok(FiberOutcome::TooLarge),
        Err(e) => return Err(e),
    };
    if fiber.is_empty() {
        return Ok(FiberOutcome::Empty);
    }
    let report = connectivity(&fiber, moves)?;
    Ok(match report.witness {
        None => FiberOutcome::Connected,
        Some((first, second)) => FiberOutcome::Disconnected(Witness {
            target: target.to_vec(),
            bounds: bounds.clone(),
            first,
            second,
            component_count: report.component_count,
        }),
    })
}

/// Compositions of `total` into `parts` parts, each within `[lo[i], hi[i]]`,
/// in lexicographic order.
fn compositions(total: u64, lo: &[u64], hi: &[u64]) -> Vec<Vec<u64>> {
    fn go(i: usize, left: u64, lo: &[u64], hi: &[u64], cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if i == lo.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let rest_lo: u64 = lo[i + 1..].iter().sum();
        let rest_hi: u64 = hi[i + 1..].iter().fold(0u64, |a, &b| a.saturating_add(b));
        for x in lo[i]..=hi[i].min(left) {
            let rem = left - x;
            if rem < rest_lo || rem > rest_hi {
                continue;
            }
            cur.push(x);
            go(i + 1, rem, lo, hi, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, total, lo, hi, &mut Vec::new(), &mut out);
    out
}

fn two_way_targets(shape: Shape, bounds: &BoundsGrid, opts: &VerifyOptions) -> Vec<Vec<u64>> {
    let cap = opts.margin_total_cap;
    let cap_of = |cells: Vec<usize>| -> u64 {
        cells.iter().fold(0u64, |acc, &h| match bounds.bound(h) {
            CellBound::AtMost(b) => acc.saturating_add(b as u64),
            CellBound::Unbounded => u64::MAX,
        })
    };
    let row_hi: Vec<u64> = (0..shape.rows)
        .map(|i| cap_of((0..shape.cols).map(|j| shape.index((i, j))).collect()))
        .collect();
    let col_hi: Vec<u64> = (0..shape.cols)
        .map(|j| cap_of((0..shape.rows).map(|i| shape.index((i, j))).collect()))
        .collect();
    let floor = |hi: &[u64]| -> Vec<u64> {
        hi.iter()
            .map(|&h| u64::from(opts.require_positive_margins && h > 0))
            .collect()
    };
    let (row_lo, col_lo) = (floor(&row_hi), floor(&col_hi));
    let mut out = Vec::new();
    for total in 0..=cap {
        let rows = compositions(total, &row_lo, &row_hi);
        if rows.is_empty() {
            continue;
        }
        let cols = compositions(total, &col_lo, &col_hi);
        for r in &rows {
            for c in &cols {
                out.push(r.iter().chain(c).copied().collect());
            }
        }
    }
    out
}

fn general_targets(design: &DesignMatrix, bounds: &BoundsGrid, opts: &VerifyOptions) -> Result<Vec<Vec<u64>>> {
    let k = design.cols();
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut counts = vec![0u32; k];
    fn go(
        h: usize,
        left: u64,
        counts: &mut Vec<u32>,
        design: &DesignMatrix,
        bounds: &BoundsGrid,
        seen: &mut HashSet<Vec<u64>>,
    ) -> Result<()> {
        if h == counts.len() {
            seen.insert(margins_of(counts, design)?);
            return Ok(());
        }
        let hi = bounds.bound(h).limit().map_or(left, |b| left.min(b as u64));
        for x in 0..=hi {
            counts[h] = x as u32;
            go(h + 1, left - x, counts, design, bounds, seen)?;
        }
        counts[h] = 0;
        Ok(())
    }
    go(0, opts.margin_total_cap, &mut counts, design, bounds, &mut seen)?;
    let mut out: Vec<Vec<u64>> = seen
        .into_iter()
        .filter(|t| !opts.require_positive_margins || t.iter().all(|&x| x > 0))
        .collect();
    out.sort_unstable();
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternStatus {
    ConnectedUpToCap,
    Disconnected,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct PatternVerdict {
    /// Lexicographically least representative under row and column
    /// permutations (0-based cells).
    pub zeros: Vec<Cell>,
    pub status: PatternStatus,
    pub witness: Option<Witness>,
    pub fibers_checked: usize,
    pub inconclusive: usize,
}

/// Least representative of a cell set under all row and column
/// permutations.
pub fn canonical_pattern(shape: Shape, zeros: &[Cell]) -> Vec<Cell> {
    let row_perms = permutations(shape.rows);
    let col_perms = permutations(shape.cols);
    let mut best: Option<Vec<Cell>> = None;
    let mut img: Vec<Cell> = Vec::with_capacity(zeros.len());
    for rp in &row_perms {
        for cp in &col_perms {
            img.clear();
            img.extend(zeros.iter().map(|&(i, j)| (rp[i], cp[j])));
            img.sort_unstable();
            if best.as_ref().is_none_or(|b| img < *b) {
                best = Some(img.clone());
            }
        }
    }
    best.unwrap_or_default()
}

pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for x in 0..used.len() {
            if !used[x] {
                used[x] = true;
                cur.push(x);
                go(cur, used, out);
                cur.pop();
                used[x] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Every structural-zero pattern with `min_zeros..=max_zeros` cells, up to
/// row/column permutation, in order of size and then canonical form.
pub fn zero_patterns(shape: Shape, min_zeros: usize, max_zeros: usize) -> Vec<Vec<Cell>> {
    let mut out = Vec::new();
    for size in min_zeros..=max_zeros.min(shape.cells() - 1) {
        let mut seen: HashSet<Vec<Cell>> = HashSet::new();
        let mut layer = Vec::new();
        for_each_subset(shape.cells(), size, |idx| {
            let cells: Vec<Cell> = idx.iter().map(|&h| shape.cell(h)).collect();
            let canon = canonical_pattern(shape, &cells);
            if seen.insert(canon.clone()) {
                layer.push(canon);
            }
        });
        layer.sort_unstable();
        out.extend(layer);
    }
    out
}

/// Classifies each zero pattern by whether the basic moves connect every
/// fiber with positive margins (up to the caps), with the pattern cells as
/// structural zeros and all other cells unbounded.
pub fn pattern_search(shape: Shape, min_zeros: usize, max_zeros: usize, opts: &VerifyOptions) -> Result<Vec<PatternVerdict>> {
    shape.require_two_way()?;
    let design = two_way_design(shape);
    let moves = basic_moves(shape);
    let opts = VerifyOptions {
        require_positive_margins: true,
        ..opts.clone()
    };
    zero_patterns(shape, min_zeros, max_zeros)
        .into_iter()
        .map(|zeros| classify_pattern(shape, &design, &moves, zeros, &opts))
        .collect()
}

pub fn classify_pattern(
    shape: Shape,
    design: &DesignMatrix,
    moves: &MoveSet,
    zeros: Vec<Cell>,
    opts: &VerifyOptions,
) -> Result<PatternVerdict> {
    let bounds = BoundsGrid::with_zeros(shape, &zeros)?;
    let v = verify_subbasis(design, shape, moves, &[bounds], opts)?;
    let status = match v.status {
        VerifyStatus::ConnectedUpToCap => PatternStatus::ConnectedUpToCap,
        VerifyStatus::Disconnected => PatternStatus::Disconnected,
        VerifyStatus::Inconclusive => PatternStatus::Inconclusive,
    };
    Ok(PatternVerdict {
        zeros,
        status,
        witness: v.witness,
        fibers_checked: v.fibers_checked,
        inconclusive: v.inconclusive.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::Table;

    fn fiber_of(rows: &[[u32; 3]], bounds: BoundsGrid) -> Fiber {
        let t = Table::from_rows(rows).unwrap();
        let spec = FiberSpec::through(two_way_design(t.shape()), &t, bounds).unwrap();
        enumerate_fiber(&spec, DEFAULT_FIBER_CAP).unwrap()
    }

    #[test]
    fn two_by_two_permutations() {
        let t = Table::from_rows(&[[1, 0], [0, 1]]).unwrap();
        let spec = FiberSpec::through(two_way_design(t.shape()), &t, BoundsGrid::unbounded(t.shape())).unwrap();
        let f = enumerate_fiber(&spec, 10).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f.tables()[0], Table::from_rows(&[[0, 1], [1, 0]]).unwrap());
        let r = connectivity(&f, &basic_moves(t.shape())).unwrap();
        assert_eq!(r.component_count, 1);
    }

    #[test]
    fn permutation_and_derangement_fibers() {
        let id = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
        let shape = Shape::new(3, 3).unwrap();
        let all = fiber_of(&id, BoundsGrid::unbounded(shape));
        assert_eq!(all.len(), 6);
        let ones = fiber_of(&id, BoundsGrid::uniform(shape, 1));
        assert_eq!(connectivity(&ones, &basic_moves(shape)).unwrap().component_count, 1);

        let der = [[0, 1, 0], [0, 0, 1], [1, 0, 0]];
        let diag = BoundsGrid::with_zeros(shape, &[(0, 0), (1, 1), (2, 2)]).unwrap();
        let d = fiber_of(&der, diag);
        assert_eq!(d.len(), 2);
        let r = connectivity(&d, &basic_moves(shape)).unwrap();
        assert_eq!(r.component_count, 2);
        assert!(r.witness.is_some());
    }

    #[test]
    fn infeasible_target_is_empty() {
        let shape = Shape::new(2, 2).unwrap();
        let spec = FiberSpec::new(two_way_design(shape), vec![2, 0, 1, 0], BoundsGrid::unbounded(shape)).unwrap();
        assert!(enumerate_fiber(&spec, 10).unwrap().is_empty());
        let bounded = FiberSpec::new(two_way_design(shape), vec![2, 0, 2, 0], BoundsGrid::uniform(shape, 1)).unwrap();
        assert!(enumerate_fiber(&bounded, 10).unwrap().is_empty());
    }

    #[test]
    fn fiber_cap_refuses() {
        let shape = Shape::new(3, 3).unwrap();
        let spec = FiberSpec::new(two_way_design(shape), vec![3; 6], BoundsGrid::unbounded(shape)).unwrap();
        let err = enumerate_fiber(&spec, 5).unwrap_err();
        assert!(err.is_cap_exceeded());
    }

    #[test]
    fn compositions_respect_limits() {
        assert_eq!(compositions(2, &[0, 0], &[9, 9]).len(), 3);
        assert_eq!(compositions(2, &[1, 1], &[9, 9]), vec![vec![1, 1]]);
        assert_eq!(compositions(3, &[0, 0], &[1, 9]).len(), 2);
    }

    #[test]
    fn canonical_pattern_is_invariant() {
        let shape = Shape::new(3, 3).unwrap();
        let a = canonical_pattern(shape, &[(0, 0), (1, 1), (2, 2)]);
        let b = canonical_pattern(shape, &[(0, 2), (1, 0), (2, 1)]);
        assert_eq!(a, b);
        assert_eq!(zero_patterns(shape, 1, 1).len(), 1);
        assert_eq!(zero_patterns(shape, 2, 2).len(), 3);
    }
}
