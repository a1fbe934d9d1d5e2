//! Metropolis chain over a bounded fiber driven by a move set, and
//! goodness-of-fit against the target on enumerable fibers.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`), seeded with
//! `seed_from_u64`. Each step draws, in this order: a move index (uniform),
//! a sign (fair bit, `true` = plus), and `u` uniform on `[0, 1)`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};
use crate::fiber::Fiber;
use crate::moves::{apply_in_place, MoveSet, Sign};
use crate::table::{margins_of, BoundsGrid, FiberSpec, Table};

pub const DEFAULT_BURN_IN: u64 = 1_000;
pub const DEFAULT_THIN: u64 = 10;

pub type LogWeight = Arc<dyn Fn(&Table) -> f64 + Send + Sync>;

/// The distribution `σ` the chain targets, up to normalization.
#[derive(Clone)]
pub enum TargetDistribution {
    Uniform,
    /// `σ(n) ∝ ∏ 1 / n_h!`
    Hypergeometric,
    /// Log-weight of a table; must be finite on the fiber.
    Custom(LogWeight),
}

impl fmt::Debug for TargetDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetDistribution::Uniform => f.write_str("Uniform"),
            TargetDistribution::Hypergeometric => f.write_str("Hypergeometric"),
            TargetDistribution::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl TargetDistribution {
    pub fn log_weight(&self, t: &Table) -> f64 {
        match self {
            TargetDistribution::Uniform => 0.0,
            TargetDistribution::Hypergeometric => -t.counts().iter().map(|&n| ln_factorial(n as u64)).sum::<f64>(),
            TargetDistribution::Custom(w) => w(t),
        }
    }

    /// `log σ(next) - log σ(cur)`, where `next` differs from `cur` only on
    /// the move's support.
    fn log_ratio(&self, cur: &[u32], next: &[u32], support: impl Iterator<Item = usize>, shape: crate::Shape) -> f64 {
        match self {
            TargetDistribution::Uniform => 0.0,
            TargetDistribution::Hypergeometric => support
                .map(|h| ln_factorial(cur[h] as u64) - ln_factorial(next[h] as u64))
                .sum(),
            TargetDistribution::Custom(w) => {
                let a = Table::from_parts_unchecked(shape, cur.to_vec());
                let b = Table::from_parts_unchecked(shape, next.to_vec());
                w(&b) - w(&a)
            }
        }
    }
}

/// Acceptance probability `min(σ'/σ, 1)` from a log ratio.
fn acceptance(log_ratio: f64) -> f64 {
    if log_ratio >= 0.0 {
        1.0
    } else {
        log_ratio.exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ChainConfig {
    pub seed: u64,
    pub steps: u64,
    pub burn_in: u64,
    pub thin: u64,
}

impl ChainConfig {
    pub fn new(seed: u64, steps: u64) -> Self {
        ChainConfig {
            seed,
            steps,
            burn_in: DEFAULT_BURN_IN,
            thin: DEFAULT_THIN,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps <= self.burn_in {
            return Err(Error::invalid(format!(
                "steps ({}) must exceed burn-in ({})",
                self.steps, self.burn_in
            )));
        }
        if self.thin == 0 {
            return Err(Error::invalid("thin must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainResult {
    pub seed: u64,
    /// States after steps `burn_in + thin`, `burn_in + 2 thin`, ...
    pub samples: Vec<Table>,
    pub accepted: u64,
    pub acceptance_rate: f64,
    /// Every occupied state satisfied the margins and bounds.
    pub visited_in_fiber: bool,
    /// Number of distinct states occupied.
    pub distinct_states: usize,
}

/// One draw of the proposal and acceptance variables.
#[derive(Clone, Copy, Debug)]
pub struct StepDraw {
    pub move_index: usize,
    pub sign: Sign,
    pub u: f64,
}

impl StepDraw {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, moves: usize) -> Self {
        let move_index = rng.random_range(0..moves);
        let sign = if rng.random::<bool>() { Sign::Plus } else { Sign::Minus };
        let u = rng.random::<f64>();
        StepDraw { move_index, sign, u }
    }
}

/// Applies one drawn step in place; returns whether the chain moved.
fn step_in_place(
    state: &mut Vec<u32>,
    scratch: &mut Vec<u32>,
    moves: &MoveSet,
    target: &TargetDistribution,
    bounds: &BoundsGrid,
    draw: StepDraw,
) -> bool {
    let m = moves.get(draw.move_index);
    scratch.clone_from(state);
    if !apply_in_place(scratch, m, draw.sign, bounds) {
        return false;
    }
    let lr = target.log_ratio(state, scratch, m.support(), bounds.shape());
    if acceptance(lr) > draw.u {
        std::mem::swap(state, scratch);
        true
    } else {
        false
    }
}

/// One Metropolis step from `state`: propose `state ± m` for a uniform
/// move and sign, accept with probability `min(σ'/σ, 1)`, otherwise stay.
pub fn ds_step<R: Rng + ?Sized>(
    state: &Table,
    moves: &MoveSet,
    target: &TargetDistribution,
    bounds: &BoundsGrid,
    rng: &mut R,
) -> Table {
    if moves.is_empty() {
        return state.clone();
    }
    let draw = StepDraw::sample(rng, moves.len());
    ds_step_with(state, moves, target, bounds, draw)
}

/// [`ds_step`] with explicit draws.
pub fn ds_step_with(state: &Table, moves: &MoveSet, target: &TargetDistribution, bounds: &BoundsGrid, draw: StepDraw) -> Table {
    let mut cur = state.counts().to_vec();
    let mut scratch = Vec::with_capacity(cur.len());
    step_in_place(&mut cur, &mut scratch, moves, target, bounds, draw);
    Table::from_parts_unchecked(state.shape(), cur)
}

pub fn chain_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed of chain `index` in a family derived from `seed` (splitmix64
/// finalizer of `seed + index * 0x9E3779B97F4A7C15`).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn run_chain(
    spec: &FiberSpec,
    start: &Table,
    moves: &MoveSet,
    target: &TargetDistribution,
    config: &ChainConfig,
) -> Result<ChainResult> {
    config.validate()?;
    if !spec.contains(start) {
        return Err(Error::invalid("start table is not in the fiber"));
    }
    if moves.dim() != start.shape().cells() {
        return Err(Error::Dimension {
            expected: start.shape().cells(),
            actual: moves.dim(),
            context: "move set vs table cells",
        });
    }
    let shape = start.shape();
    let bounds = spec.bounds();
    let mut rng = chain_rng(config.seed);
    let mut state = start.counts().to_vec();
    let mut scratch = Vec::with_capacity(state.len());
    let mut samples = Vec::new();
    let mut accepted = 0u64;
    let mut in_fiber = true;
    let mut seen = std::collections::HashSet::new();
    seen.insert(state.clone());
    for t in 1..=config.steps {
        if !moves.is_empty() {
            let draw = StepDraw::sample(&mut rng, moves.len());
            if step_in_place(&mut state, &mut scratch, moves, target, bounds, draw) {
                accepted += 1;
                in_fiber &= margins_of(&state, spec.matrix())? == spec.target()
                    && state.iter().enumerate().all(|(h, &n)| bounds.bound(h).allows(n));
                debug_assert!(in_fiber, "chain left the fiber");
                if seen.len() < 1 << 20 {
                    seen.insert(state.clone());
                }
            }
        }
        if t > config.burn_in && (t - config.burn_in).is_multiple_of(config.thin) {
            samples.push(Table::from_parts_unchecked(shape, state.clone()));
        }
    }
    Ok(ChainResult {
        seed: config.seed,
        samples,
        accepted,
        acceptance_rate: accepted as f64 / config.steps as f64,
        visited_in_fiber: in_fiber,
        distinct_states: seen.len(),
    })
}

/// Runs `chains` independent chains with seeds derived from `config.seed`;
/// results are ordered by chain index.
pub fn run_chains(
    spec: &FiberSpec,
    start: &Table,
    moves: &MoveSet,
    target: &TargetDistribution,
    config: &ChainConfig,
    chains: u64,
) -> Result<Vec<ChainResult>> {
    (0..chains)
        .into_par_iter()
        .map(|i| {
            let cfg = ChainConfig {
                seed: derive_seed(config.seed, i),
                ..*config
            };
            run_chain(spec, start, moves, target, &cfg)
        })
        .collect()
}

/// Exact one-step transition matrix of the chain on an enumerated fiber:
/// row `i` is the distribution of the next state from table `i`.
pub fn transition_matrix(fiber: &Fiber, moves: &MoveSet, target: &TargetDistribution) -> Result<Vec<Vec<f64>>> {
    let n = fiber.len();
    let bounds = fiber.spec().bounds();
    let mut p = vec![vec![0.0; n]; n];
    if moves.is_empty() {
        for (i, row) in p.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        return Ok(p);
    }
    let each = 1.0 / (2.0 * moves.len() as f64);
    for i in 0..n {
        let cur = fiber.tables()[i].counts();
        let mut stay = 1.0;
        for m in moves {
            for sign in Sign::BOTH {
                let mut next = cur.to_vec();
                if !apply_in_place(&mut next, m, sign, bounds) {
                    continue;
                }
                let t = Table::from_parts_unchecked(fiber.spec().shape(), next);
                let j = fiber
                    .index_of(&t)
                    .ok_or_else(|| Error::invalid("a move leaves the fiber: not a kernel element"))?;
                let a = acceptance(target.log_ratio(cur, t.counts(), m.support(), t.shape()));
                p[i][j] += each * a;
                stay -= each * a;
            }
        }
        p[i][i] += stay;
    }
    Ok(p)
}

/// Normalized target probabilities on the fiber's tables.
pub fn target_probabilities(fiber: &Fiber, target: &TargetDistribution) -> Vec<f64> {
    let logs: Vec<f64> = fiber.tables().iter().map(|t| target.log_weight(t)).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// `max_j |(π P)_j - π_j|` for the target `π`.
pub fn stationarity_defect(fiber: &Fiber, moves: &MoveSet, target: &TargetDistribution) -> Result<f64> {
    let p = transition_matrix(fiber, moves, target)?;
    let pi = target_probabilities(fiber, target);
    let n = pi.len();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        let flow: f64 = (0..n).map(|i| pi[i] * p[i][j]).sum();
        worst = worst.max((flow - pi[j]).abs());
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub samples: usize,
}

/// Pearson goodness-of-fit of sample counts against `target` on the
/// enumerated fiber, with `|F| - 1` degrees of freedom.
pub fn chi_square(samples: &[Table], fiber: &Fiber, target: &TargetDistribution) -> Result<ChiSquare> {
    if samples.is_empty() {
        return Err(Error::invalid("chi-square needs at least one sample"));
    }
    let mut observed = vec![0u64; fiber.len()];
    for s in samples {
        let i = fiber
            .index_of(s)
            .ok_or_else(|| Error::invalid("sample is not a member of the fiber"))?;
        observed[i] += 1;
    }
    let probs = target_probabilities(fiber, target);
    let n = samples.len() as f64;
    let statistic: f64 = observed
        .iter()
        .zip(&probs)
        .map(|(&o, &p)| {
            let e = n * p;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let dof = fiber.len() - 1;
    let p_value = if dof == 0 {
        1.0
    } else {
        ChiSquared::new(dof as f64)
            .map_err(|e| Error::invalid(e.to_string()))?
            .sf(statistic)
    };
    Ok(ChiSquare {
        statistic,
        dof,
        p_value,
        samples: samples.len(),
    })
}

pub fn chi_square_uniformity(samples: &[Table], fiber: &Fiber) -> Result<ChiSquare> {
    chi_square(samples, fiber, &TargetDistribution::Uniform)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::enumerate_fiber;
    use crate::moves::basic_moves;
    use crate::table::two_way_design;

    fn two_by_two() -> (FiberSpec, Table, MoveSet) {
        let t = Table::from_rows(&[[1, 0], [0, 1]]).unwrap();
        let spec = FiberSpec::through(two_way_design(t.shape()), &t, BoundsGrid::unbounded(t.shape())).unwrap();
        let moves = basic_moves(t.shape());
        (spec, t, moves)
    }

    #[test]
    fn infeasible_proposal_stays() {
        let (spec, t, moves) = two_by_two();
        // the basic move is +1 on (1,1),(2,2): adding it makes (1,2) negative
        let draw = StepDraw { move_index: 0, sign: Sign::Plus, u: 0.0 };
        let next = ds_step_with(&t, &moves, &TargetDistribution::Uniform, spec.bounds(), draw);
        assert_eq!(next, t);
    }

    #[test]
    fn feasible_proposal_moves() {
        let (spec, t, moves) = two_by_two();
        let draw = StepDraw { move_index: 0, sign: Sign::Minus, u: 0.999_999 };
        let next = ds_step_with(&t, &moves, &TargetDistribution::Uniform, spec.bounds(), draw);
        assert_eq!(next, Table::from_rows(&[[0, 1], [1, 0]]).unwrap());
    }

    #[test]
    fn chi_square_examples() {
        let t = Table::from_rows(&[[1, 1, 0], [0, 0, 1]]).unwrap();
        let spec = FiberSpec::through(two_way_design(t.shape()), &t, BoundsGrid::unbounded(t.shape())).unwrap();
        let fiber = enumerate_fiber(&spec, 100).unwrap();
        assert_eq!(fiber.len(), 3);
        let exact: Vec<Table> = fiber.tables().iter().flat_map(|x| std::iter::repeat_n(x.clone(), 50)).collect();
        let c = chi_square_uniformity(&exact, &fiber).unwrap();
        assert_eq!(c.statistic, 0.0);
        assert!((c.p_value - 1.0).abs() < 1e-12);
        let lump = vec![fiber.tables()[0].clone(); 300];
        assert!((chi_square_uniformity(&lump, &fiber).unwrap().statistic - 600.0).abs() < 1e-9);
        assert!(chi_square_uniformity(&[], &fiber).is_err());
    }

    #[test]
    fn thin_equal_steps_records_once() {
        let (spec, t, moves) = two_by_two();
        let cfg = ChainConfig { seed: 1, steps: 50, burn_in: 0, thin: 50 };
        let r = run_chain(&spec, &t, &moves, &TargetDistribution::Uniform, &cfg).unwrap();
        assert_eq!(r.samples.len(), 1);
    }

    #[test]
    fn rejects_start_outside_fiber() {
        let (spec, _, moves) = two_by_two();
        let bad = Table::from_rows(&[[2, 0], [0, 0]]).unwrap();
        let cfg = ChainConfig::new(1, 5000);
        assert!(run_chain(&spec, &bad, &moves, &TargetDistribution::Uniform, &cfg).is_err());
        let cfg = ChainConfig { seed: 0, steps: 10, burn_in: 10, thin: 1 };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(7, 0), derive_seed(7, 1));
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
    }
}
