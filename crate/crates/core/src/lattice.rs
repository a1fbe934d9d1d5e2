//! Integer-lattice routines: kernels, Lawrence liftings, Graver bases by
//! completion, circuits of general matrices, and universal Markov bases of
//! partially bounded tables.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::moves::{for_each_subset, Move, MoveSet};
use crate::table::{BoundsGrid, DesignMatrix};

pub const DEFAULT_NORM_CAP: usize = 64;
pub const DEFAULT_CIRCUIT_SUBSET_LIMIT: u64 = 5_000_000;
/// Graver completion tracks supports with 128-bit masks.
pub const MAX_GRAVER_DIM: usize = 128;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<i64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                expected: rows * cols,
                actual: data.len(),
                context: "matrix entries",
            });
        }
        Ok(IntMatrix { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.as_ref().len() != cols {
                return Err(Error::invalid("ragged matrix rows"));
            }
            data.extend_from_slice(r.as_ref());
        }
        IntMatrix::new(rows.len(), cols, data)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        IntMatrix { rows: n, cols: n, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[i64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[i64]) -> Vec<i64> {
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn annihilates(&self, v: &[i64]) -> bool {
        v.len() == self.cols && self.mul_vec(v).iter().all(|&x| x == 0)
    }

    pub fn rank(&self) -> usize {
        independent_rows(self).len()
    }
}

impl From<&DesignMatrix> for IntMatrix {
    fn from(a: &DesignMatrix) -> Self {
        let data = (0..a.rows())
            .flat_map(|r| a.row(r).iter().map(|&x| x as i64))
            .collect();
        IntMatrix {
            rows: a.rows(),
            cols: a.cols(),
            data,
        }
    }
}

/// Lattice basis of `ker(A) ∩ Z^k`, of size `k - rank(A)`.
///
/// Unimodular row reduction of `[A^T | I_k]`; the identity part of every
/// row whose `A^T` part vanishes is a kernel vector, and together they form
/// a basis. The result is then size-reduced pairwise.
pub fn kernel_basis(a: &IntMatrix) -> Result<Vec<Vec<i64>>> {
    let k = a.cols;
    let s = a.rows;
    let width = s + k;
    let mut m: Vec<Vec<i128>> = (0..k)
        .map(|h| {
            let mut row = vec![0i128; width];
            for r in 0..s {
                row[r] = a.get(r, h) as i128;
            }
            row[s + h] = 1;
            row
        })
        .collect();

    let mut pivot_row = 0;
    for col in 0..s {
        if pivot_row == k {
            break;
        }
        loop {
            // smallest nonzero |entry| at or below pivot_row becomes the pivot
            let best = (pivot_row..k)
                .filter(|&r| m[r][col] != 0)
                .min_by_key(|&r| m[r][col].unsigned_abs());
            let Some(p) = best else { break };
            m.swap(pivot_row, p);
            let mut done = true;
            for r in pivot_row + 1..k {
                if m[r][col] != 0 {
                    let q = m[r][col].div_euclid(m[pivot_row][col]);
                    let (head, tail) = m.split_at_mut(r);
                    sub_scaled(&mut tail[0], &head[pivot_row], q)?;
                    if tail[0][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                pivot_row += 1;
                break;
            }
        }
    }

    let mut basis: Vec<Vec<i64>> = Vec::with_capacity(k - pivot_row);
    for row in &m[pivot_row..] {
        debug_assert!(row[..s].iter().all(|&x| x == 0));
        let v: Option<Vec<i64>> = row[s..].iter().map(|&x| i64::try_from(x).ok()).collect();
        basis.push(v.ok_or(Error::Overflow("kernel basis"))?);
    }
    size_reduce(&mut basis);
    Ok(basis)
}

fn sub_scaled(target: &mut [i128], src: &[i128], q: i128) -> Result<()> {
    for (t, &x) in target.iter_mut().zip(src) {
        *t = q
            .checked_mul(x)
            .and_then(|p| t.checked_sub(p))
            .ok_or(Error::Overflow("kernel elimination"))?;
    }
    Ok(())
}

fn l1(v: &[i64]) -> i64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Greedy pairwise reduction: replace `b_i` by `b_i ± b_j` while that
/// shrinks its 1-norm. Keeps the lattice unchanged.
fn size_reduce(basis: &mut [Vec<i64>]) {
    let n = basis.len();
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                for sign in [1i64, -1] {
                    let cand: Vec<i64> = basis[i]
                        .iter()
                        .zip(&basis[j])
                        .map(|(a, b)| a + sign * b)
                        .collect();
                    if l1(&cand) < l1(&basis[i]) {
                        basis[i] = cand;
                        changed = true;
                    }
                }
            }
        }
    }
}

/// Row indices of a maximal linearly independent set of rows, chosen
/// greedily in order (exact, fraction-free).
fn independent_rows(a: &IntMatrix) -> Vec<usize> {
    let mut echelon: Vec<Vec<BigInt>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    let mut chosen = Vec::new();
    for r in 0..a.rows {
        let mut v: Vec<BigInt> = a.row(r).iter().map(|&x| BigInt::from(x)).collect();
        for (e, &p) in echelon.iter().zip(&pivots) {
            if !v[p].is_zero() {
                let f = v[p].clone();
                let g = e[p].clone();
                for c in 0..a.cols {
                    v[c] = &v[c] * &g - &e[c] * &f;
                }
            }
        }
        if let Some(p) = v.iter().position(|x| !x.is_zero()) {
            echelon.push(v);
            pivots.push(p);
            chosen.push(r);
        }
    }
    chosen
}

/// `Λ(A) = ((A, 0), (I_k, I_k))`.
pub fn lawrence_lift(a: &IntMatrix) -> IntMatrix {
    partial_lawrence_lift(a, &(0..a.cols).collect::<Vec<_>>())
}

/// The Lawrence lifting keeping identity rows and slack columns only for
/// `bounded` cells: shape `(s + |B|) x (k + |B|)`. Slack column `k + t`
/// belongs to cell `bounded[t]`.
pub fn partial_lawrence_lift(a: &IntMatrix, bounded: &[usize]) -> IntMatrix {
    let k = a.cols;
    let b = bounded.len();
    let cols = k + b;
    let mut data = vec![0i64; (a.rows + b) * cols];
    for r in 0..a.rows {
        data[r * cols..r * cols + k].copy_from_slice(a.row(r));
    }
    for (t, &h) in bounded.iter().enumerate() {
        let r = a.rows + t;
        data[r * cols + h] = 1;
        data[r * cols + k + t] = 1;
    }
    IntMatrix {
        rows: a.rows + b,
        cols,
        data,
    }
}

/// A design matrix together with the cells carrying an upper bound and the
/// structural zeros among them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftSpec {
    matrix: IntMatrix,
    bounded: Vec<usize>,
    zeros: Vec<usize>,
}

impl LiftSpec {
    pub fn new(matrix: IntMatrix, bounded: Vec<usize>) -> Result<Self> {
        LiftSpec::with_zeros(matrix, bounded, Vec::new())
    }

    /// Structural zeros are bounded cells; they are added to `bounded` if
    /// missing.
    pub fn with_zeros(matrix: IntMatrix, mut bounded: Vec<usize>, mut zeros: Vec<usize>) -> Result<Self> {
        bounded.extend_from_slice(&zeros);
        bounded.sort_unstable();
        bounded.dedup();
        zeros.sort_unstable();
        zeros.dedup();
        if let Some(&h) = bounded.iter().find(|&&h| h >= matrix.cols) {
            return Err(Error::invalid(format!(
                "bounded cell {} outside a matrix with {} columns",
                h + 1,
                matrix.cols
            )));
        }
        Ok(LiftSpec { matrix, bounded, zeros })
    }

    pub fn all_bounded(matrix: IntMatrix) -> Self {
        let bounded = (0..matrix.cols).collect();
        LiftSpec {
            matrix,
            bounded,
            zeros: Vec::new(),
        }
    }

    pub fn from_bounds(matrix: IntMatrix, bounds: &BoundsGrid) -> Result<Self> {
        if bounds.shape().cells() != matrix.cols {
            return Err(Error::Dimension {
                expected: matrix.cols,
                actual: bounds.shape().cells(),
                context: "bounds grid vs matrix columns",
            });
        }
        LiftSpec::with_zeros(matrix, bounds.bounded_cells(), bounds.structural_zeros())
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn bounded_cells(&self) -> &[usize] {
        &self.bounded
    }

    pub fn zeros(&self) -> &[usize] {
        &self.zeros
    }

    pub fn lift(&self) -> IntMatrix {
        partial_lawrence_lift(&self.matrix, &self.bounded)
    }
}

/// Sign-compatible domination `u ⊑ v` on dense vectors.
pub fn conformal_le(u: &[i64], v: &[i64]) -> bool {
    u.iter()
        .zip(v)
        .all(|(&a, &b)| a == 0 || (a.signum() == b.signum() && a.abs() <= b.abs()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct GVec {
    v: Vec<i32>,
    pos: u128,
    neg: u128,
    norm: u32,
}

impl GVec {
    fn new(v: Vec<i32>) -> Self {
        let mut pos = 0u128;
        let mut neg = 0u128;
        let mut norm = 0u32;
        for (i, &x) in v.iter().enumerate() {
            if x > 0 {
                pos |= 1 << i;
            } else if x < 0 {
                neg |= 1 << i;
            }
            norm += x.unsigned_abs();
        }
        GVec { v, pos, neg, norm }
    }

    fn is_zero(&self) -> bool {
        self.pos == 0 && self.neg == 0
    }

    fn below(&self, s: &GVec) -> bool {
        self.pos & !s.pos == 0
            && self.neg & !s.neg == 0
            && self.norm <= s.norm
            && self.v.iter().zip(&s.v).all(|(&a, &b)| a.abs() <= b.abs())
    }

    fn sign_compatible(&self, o: &GVec) -> bool {
        self.pos & o.neg == 0 && self.neg & o.pos == 0
    }

    fn add(&self, o: &GVec) -> Result<GVec> {
        let v: Option<Vec<i32>> = self.v.iter().zip(&o.v).map(|(a, b)| a.checked_add(*b)).collect();
        Ok(GVec::new(v.ok_or(Error::Overflow("graver completion"))?))
    }

    fn sub_assign(&mut self, o: &GVec) {
        for (a, b) in self.v.iter_mut().zip(&o.v) {
            *a -= b;
        }
        *self = GVec::new(std::mem::take(&mut self.v));
    }

    fn neg(&self) -> GVec {
        GVec {
            v: self.v.iter().map(|x| -x).collect(),
            pos: self.neg,
            neg: self.pos,
            norm: self.norm,
        }
    }
}

/// Min-heap entry on (norm, vector).
#[derive(PartialEq, Eq)]
struct Candidate(u32, Vec<i32>);

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Graver basis of `A` as dense canonical vectors (first nonzero positive),
/// sorted ascending by 1-norm then lexicographically.
///
/// Completion: start from a kernel basis and its negation; for every pair
/// that is not sign-compatible reduce `f + g` by sign-compatible
/// subtraction of known elements and keep nonzero remainders. Candidates
/// are processed in order of increasing 1-norm. Fails with
/// [`Error::CapExceeded`] if an element of 1-norm above `norm_cap` would
/// enter the working set.
pub fn graver_vectors(a: &IntMatrix, norm_cap: usize) -> Result<Vec<Vec<i64>>> {
    let k = a.cols;
    if k > MAX_GRAVER_DIM {
        return Err(Error::invalid(format!(
            "graver completion supports at most {MAX_GRAVER_DIM} columns, got {k}"
        )));
    }
    let basis = kernel_basis(a)?;
    let mut work: Vec<GVec> = Vec::new();
    for b in &basis {
        let v: Option<Vec<i32>> = b.iter().map(|&x| i32::try_from(x).ok()).collect();
        let g = GVec::new(v.ok_or(Error::Overflow("kernel basis entry"))?);
        if g.norm as usize > norm_cap {
            return Err(Error::CapExceeded {
                what: "graver 1-norm",
                cap: norm_cap,
                reached: g.norm as usize,
            });
        }
        work.push(g.neg());
        work.push(g);
    }

    let mut heap = BinaryHeap::new();
    let mut queued: HashSet<Vec<i32>> = HashSet::new();
    let push_pairs = |heap: &mut BinaryHeap<Candidate>, queued: &mut HashSet<Vec<i32>>, work: &[GVec], f: &GVec| -> Result<()> {
        for g in work {
            if f.sign_compatible(g) {
                continue;
            }
            let s = f.add(g)?;
            if s.is_zero() {
                continue;
            }
            if queued.insert(s.v.clone()) {
                heap.push(Candidate(s.norm, s.v));
            }
        }
        Ok(())
    };
    for i in 0..work.len() {
        let f = work[i].clone();
        push_pairs(&mut heap, &mut queued, &work[..i], &f)?;
    }

    while let Some(Candidate(_, v)) = heap.pop() {
        let mut s = GVec::new(v);
        'reduce: loop {
            for g in &work {
                if g.below(&s) {
                    s.sub_assign(g);
                    if s.is_zero() {
                        break 'reduce;
                    }
                    continue 'reduce;
                }
            }
            break;
        }
        if s.is_zero() {
            continue;
        }
        if s.norm as usize > norm_cap {
            return Err(Error::CapExceeded {
                what: "graver 1-norm",
                cap: norm_cap,
                reached: s.norm as usize,
            });
        }
        let ns = s.neg();
        push_pairs(&mut heap, &mut queued, &work, &s)?;
        push_pairs(&mut heap, &mut queued, &work, &ns)?;
        work.push(s);
        work.push(ns);
    }

    // keep the ⊑-minimal elements, one per ± pair
    let mut out: Vec<Vec<i64>> = Vec::new();
    for (i, g) in work.iter().enumerate() {
        if g.v.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
            continue;
        }
        let dominated = work
            .iter()
            .enumerate()
            .any(|(j, h)| j != i && h.below(g) && h.v != g.v);
        if !dominated {
            out.push(g.v.iter().map(|&x| x as i64).collect());
        }
    }
    out.sort_by(|a, b| l1(a).cmp(&l1(b)).then_with(|| a.cmp(b)));
    out.dedup();
    Ok(out)
}

/// Graver basis of `A` as a canonical move set over its columns.
pub fn graver_basis(a: &IntMatrix, norm_cap: usize) -> Result<MoveSet> {
    let vs = graver_vectors(a, norm_cap)?;
    let moves: Result<Vec<Move>> = vs.iter().map(|v| Move::from_dense(v)).collect();
    MoveSet::new(a.cols, moves?)
}

/// Support-minimal primitive kernel vectors of `A`.
///
/// With `r = rank(A)` and `R` a set of `r` independent rows, every
/// `(r+1)`-subset `S` of columns gives the Cramer vector
/// `v_j = (-1)^t det(A[R, S \ {j}])` (for `j` the `t`-th element of `S`),
/// which spans `ker A[R, S]` when nonzero. Refuses when `C(k, r+1)` exceeds
/// `subset_limit`.
pub fn circuits_general(a: &IntMatrix, subset_limit: u64) -> Result<MoveSet> {
    let rows = independent_rows(a);
    let r = rows.len();
    let k = a.cols;
    if r >= k {
        return Ok(MoveSet::empty(k));
    }
    let subsets = binomial(k as u64, r as u64 + 1);
    if subsets > subset_limit {
        return Err(Error::CapExceeded {
            what: "circuit column subsets",
            cap: subset_limit as usize,
            reached: subsets.min(usize::MAX as u64) as usize,
        });
    }
    let sub: Vec<Vec<i64>> = rows.iter().map(|&i| a.row(i).to_vec()).collect();
    let mut found: HashSet<Vec<i64>> = HashSet::new();
    let mut err = None;
    for_each_subset(k, r + 1, |cols| {
        if err.is_some() {
            return;
        }
        let mut v = vec![BigInt::zero(); k];
        for (t, &j) in cols.iter().enumerate() {
            let minor: Vec<Vec<BigInt>> = sub
                .iter()
                .map(|row| {
                    cols.iter()
                        .filter(|&&c| c != j)
                        .map(|&c| BigInt::from(row[c]))
                        .collect()
                })
                .collect();
            let d = bareiss_det(minor);
            v[j] = if t % 2 == 0 { d } else { -d };
        }
        if v.iter().all(|x| x.is_zero()) {
            return;
        }
        match primitive(&v) {
            Some(p) => {
                found.insert(p);
            }
            None => err = Some(Error::Overflow("circuit entries")),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let moves: Result<Vec<Move>> = found.iter().map(|v| Move::from_dense(v)).collect();
    MoveSet::new(k, moves?)
}

fn binomial(n: u64, r: u64) -> u64 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Fraction-free determinant.
fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::from(1);
    }
    let mut sign = 1;
    let mut prev = BigInt::from(1);
    for p in 0..n {
        if m[p][p].is_zero() {
            match (p + 1..n).find(|&r| !m[r][p].is_zero()) {
                Some(r) => {
                    m.swap(p, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in p + 1..n {
            for j in p + 1..n {
                let x = &m[i][j] * &m[p][p] - &m[i][p] * &m[p][j];
                m[i][j] = x / &prev;
            }
        }
        prev = m[p][p].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}

fn primitive(v: &[BigInt]) -> Option<Vec<i64>> {
    let mut g = BigInt::zero();
    for x in v {
        g = num_integer_gcd(&g, x);
    }
    v.iter().map(|x| (x / &g).to_i64()).collect()
}

fn num_integer_gcd(a: &BigInt, b: &BigInt) -> BigInt {
    let mut a = a.abs();
    let mut b = b.abs();
    while !b.is_zero() {
        let r = &a % &b;
        a = b;
        b = r;
    }
    a
}

/// A term order on the monomials of the lifted polynomial ring: variables
/// are the `k` cell indeterminates followed by one slack indeterminate per
/// bounded cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TermOrder {
    /// Graded reverse lexicographic with variable order as listed.
    DegRevLex,
    /// Weight order refined by degrevlex. `cell[h]` weighs the cell variable
    /// of cell `h`, `slack[h]` the slack variable of cell `h` (used only if
    /// `h` is bounded). Weights must be positive.
    Weighted { cell: Vec<u64>, slack: Vec<u64> },
}

/// Seed of the default weight order.
pub const DEFAULT_ORDER_SEED: u64 = 1520;

impl TermOrder {
    /// Weight order with weights drawn from ChaCha8 seeded by `seed`: first
    /// `k` draws for cell variables, next `k` for slack variables.
    pub fn seeded(seed: u64, k: usize) -> TermOrder {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cell = (0..k).map(|_| rng.random_range(1..=1u64 << 32)).collect();
        let slack = (0..k).map(|_| rng.random_range(1..=1u64 << 32)).collect();
        TermOrder::Weighted { cell, slack }
    }

    pub fn default_for(k: usize) -> TermOrder {
        TermOrder::seeded(DEFAULT_ORDER_SEED, k)
    }

    /// `Greater` if monomial `a` is larger than `b`. Exponent vectors are in
    /// lifted coordinates.
    fn compare(&self, a: &[u64], b: &[u64], k: usize, bounded: &[usize]) -> Ordering {
        if let TermOrder::Weighted { cell, slack } = self {
            let weigh = |e: &[u64]| -> u128 {
                let mut s: u128 = 0;
                for h in 0..k {
                    s += cell[h] as u128 * e[h] as u128;
                }
                for (t, &h) in bounded.iter().enumerate() {
                    s += slack[h] as u128 * e[k + t] as u128;
                }
                s
            };
            match weigh(a).cmp(&weigh(b)) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        let da: u64 = a.iter().sum();
        let db: u64 = b.iter().sum();
        da.cmp(&db).then_with(|| {
            for i in (0..a.len()).rev() {
                if a[i] != b[i] {
                    return b[i].cmp(&a[i]);
                }
            }
            Ordering::Equal
        })
    }

    fn check(&self, k: usize) -> Result<()> {
        if let TermOrder::Weighted { cell, slack } = self {
            if cell.len() != k || slack.len() != k {
                return Err(Error::Dimension {
                    expected: k,
                    actual: cell.len().min(slack.len()),
                    context: "term order weights",
                });
            }
            if cell.iter().chain(slack).any(|&w| w == 0) {
                return Err(Error::invalid("term order weights must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct UniversalBasis {
    pub moves: MoveSet,
    /// Size of the Graver basis of the lifted matrix.
    pub graver_size: usize,
    /// Number of moves before deduplication after dropping slack
    /// coordinates.
    pub pre_dedupe: usize,
    /// Moves removed because they touch a structural zero.
    pub removed_by_zeros: usize,
}

#[derive(Clone, Debug)]
pub struct UniversalOptions {
    pub norm_cap: usize,
    pub order: Option<TermOrder>,
}

impl Default for UniversalOptions {
    fn default() -> Self {
        UniversalOptions {
            norm_cap: DEFAULT_NORM_CAP,
            order: None,
        }
    }
}

/// Markov basis of a partially bounded design, valid for every choice of
/// bound values on the bounded cells.
///
/// This is the reduced Gröbner basis of the toric ideal of the partial
/// Lawrence lifting, with slack coordinates dropped. It is selected from
/// the Graver basis of the lifting (which contains every reduced Gröbner
/// basis): orient each element by the term order, and keep those whose
/// leading monomial is a minimal generator of the initial ideal and whose
/// trailing monomial is standard. When every cell is bounded all Graver
/// elements survive, so the result is the full Graver basis. Moves touching
/// a structural zero are dropped at the end.
///
/// The Graver basis of the lifting is obtained from that of the base
/// matrix: kernel vectors of the lifting are exactly `(v, -v_B)` with
/// `v ∈ ker A`, and `⊑` on them coincides with `⊑` on `v`.
pub fn universal_markov_basis(spec: &LiftSpec, opts: &UniversalOptions) -> Result<UniversalBasis> {
    let k = spec.matrix.cols;
    let order = opts.order.clone().unwrap_or_else(|| TermOrder::default_for(k));
    order.check(k)?;
    let graver = graver_vectors(&spec.matrix, opts.norm_cap)?;
    let bounded = &spec.bounded;

    // (lead, trail) exponent vectors in lifted coordinates, per element
    let oriented: Vec<(Vec<u64>, Vec<u64>, &Vec<i64>)> = graver
        .iter()
        .map(|v| {
            let mut plus = vec![0u64; k + bounded.len()];
            let mut minus = vec![0u64; k + bounded.len()];
            for h in 0..k {
                if v[h] > 0 {
                    plus[h] = v[h] as u64;
                } else {
                    minus[h] = v[h].unsigned_abs();
                }
            }
            for (t, &h) in bounded.iter().enumerate() {
                // slack coordinate is -v_h
                if v[h] < 0 {
                    plus[k + t] = v[h].unsigned_abs();
                } else {
                    minus[k + t] = v[h] as u64;
                }
            }
            match order.compare(&plus, &minus, k, bounded) {
                Ordering::Less => (minus, plus, v),
                _ => (plus, minus, v),
            }
        })
        .collect();

    let divides = |a: &[u64], b: &[u64]| a.iter().zip(b).all(|(x, y)| x <= y);
    let mut kept: Vec<Move> = Vec::new();
    for (i, (lead, trail, v)) in oriented.iter().enumerate() {
        let lead_minimal = !oriented
            .iter()
            .enumerate()
            .any(|(j, (l, _, _))| j != i && l != lead && divides(l, lead));
        if !lead_minimal {
            continue;
        }
        let trail_standard = !oriented.iter().any(|(l, _, _)| divides(l, trail));
        if trail_standard {
            kept.push(Move::from_dense(v)?);
        }
    }
    let pre_dedupe = kept.len();
    let all = MoveSet::new(k, kept)?;
    let filtered = crate::moves::filter_support(&all, &spec.zeros);
    Ok(UniversalBasis {
        removed_by_zeros: all.len() - filtered.len(),
        moves: filtered,
        graver_size: graver.len(),
        pre_dedupe,
    })
}
