use std::io::Write;

use clap::{Args, ValueEnum};
use serde_json::{json, Value};
use tabmoves::json::table_to_value;
use tabmoves::sampler::{chi_square, run_chains};
use tabmoves::{enumerate_fiber, ChainConfig, FiberSpec, Table, TargetDistribution};

use crate::opts::{self, CliError, CliResult, Format, Model};
use crate::output::{csv_row, json_line};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Uniform,
    Hypergeometric,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    /// Observed table; the chain starts here.
    #[arg(long)]
    table: String,
    #[arg(long)]
    bounds: Option<String>,
    #[arg(long, default_value = "two-way")]
    model: String,
    /// `basic`, `circuits`, `universal` or `file:m.json`.
    #[arg(long, default_value = "basic")]
    moves: String,
    #[arg(long, value_enum, default_value_t = Target::Hypergeometric)]
    target: Target,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    steps: u64,
    #[arg(long, default_value_t = tabmoves::sampler::DEFAULT_BURN_IN)]
    burn_in: u64,
    #[arg(long, default_value_t = tabmoves::sampler::DEFAULT_THIN)]
    thin: u64,
    /// Independent chains with seeds derived from `--seed`.
    #[arg(long, default_value_t = 1)]
    chains: u64,
    /// Include the recorded samples in the output.
    #[arg(long)]
    emit_samples: bool,
    /// Fibers up to this size are enumerated for the goodness-of-fit report.
    #[arg(long)]
    fiber_cap: Option<usize>,
    #[arg(long)]
    norm_cap: Option<usize>,
}

/// Pearson statistic against the independence fit `r_i c_j / n`.
fn pearson_independence(t: &Table) -> f64 {
    let n = t.total() as f64;
    if n == 0.0 {
        return 0.0;
    }
    let (r, c) = (t.row_sums(), t.col_sums());
    let shape = t.shape();
    let mut x2 = 0.0;
    for i in 0..shape.rows {
        for j in 0..shape.cols {
            let e = r[i] as f64 * c[j] as f64 / n;
            if e > 0.0 {
                let d = t.get((i, j)) as f64 - e;
                x2 += d * d / e;
            }
        }
    }
    x2
}

pub fn run(args: &SampleArgs, format: Format, out: &mut impl Write) -> CliResult<()> {
    if args.chains == 0 {
        return Err(CliError::Usage("--chains must be at least 1".into()));
    }
    let start = opts::load_table(&args.table)?;
    let shape = start.shape();
    let model = Model::parse(&args.model)?;
    let bounds = opts::load_bounds(args.bounds.as_deref(), shape)?;
    let spec = FiberSpec::through(model.design(shape)?, &start, bounds)?;
    let moves = opts::load_moves(&args.moves, &model, shape, spec.bounds(), opts::norm_cap(args.norm_cap)?)?;
    let target = match args.target {
        Target::Uniform => TargetDistribution::Uniform,
        Target::Hypergeometric => TargetDistribution::Hypergeometric,
    };
    let config = ChainConfig {
        seed: args.seed,
        steps: args.steps,
        burn_in: args.burn_in,
        thin: args.thin,
    };
    config.validate()?;
    let results = if args.chains == 1 {
        vec![tabmoves::run_chain(&spec, &start, &moves, &target, &config)?]
    } else {
        run_chains(&spec, &start, &moves, &target, &config, args.chains)?
    };
    let pooled: Vec<Table> = results.iter().flat_map(|r| r.samples.iter().cloned()).collect();

    let fiber = match enumerate_fiber(&spec, opts::fiber_cap(args.fiber_cap)?) {
        Ok(f) => Some(f),
        Err(e) if e.is_cap_exceeded() => None,
        Err(e) => return Err(e.into()),
    };
    let chi = match &fiber {
        Some(f) => Some(chi_square(&pooled, f, &target)?),
        None => None,
    };
    let exact = model.is_two_way().then(|| {
        let observed = pearson_independence(&start);
        let hits = pooled
            .iter()
            .filter(|s| pearson_independence(s) >= observed - 1e-9 * observed.max(1.0))
            .count();
        json!({
            "statistic": "pearson-independence",
            "observed": observed,
            "p_value": hits as f64 / pooled.len().max(1) as f64,
        })
    });

    if format == Format::Csv {
        csv_row(out, &["chain", "seed", "accepted", "acceptance_rate", "distinct_states", "samples"])?;
        for (i, r) in results.iter().enumerate() {
            csv_row(
                out,
                &[
                    i.to_string(),
                    r.seed.to_string(),
                    r.accepted.to_string(),
                    r.acceptance_rate.to_string(),
                    r.distinct_states.to_string(),
                    r.samples.len().to_string(),
                ],
            )?;
        }
        return Ok(());
    }

    let chains: Vec<Value> = results
        .iter()
        .map(|r| {
            let mut v = json!({
                "seed": r.seed,
                "accepted": r.accepted,
                "acceptance_rate": r.acceptance_rate,
                "distinct_states": r.distinct_states,
                "visited_in_fiber": r.visited_in_fiber,
                "samples_recorded": r.samples.len(),
            });
            if args.emit_samples {
                v["samples"] = Value::Array(r.samples.iter().map(table_to_value).collect());
            }
            v
        })
        .collect();
    let accepted: u64 = results.iter().map(|r| r.accepted).sum();
    json_line(
        out,
        &json!({
            "seed": args.seed,
            "steps": args.steps,
            "burn_in": args.burn_in,
            "thin": args.thin,
            "target": match args.target { Target::Uniform => "uniform", Target::Hypergeometric => "hypergeometric" },
            "moves": moves.len(),
            "acceptance_rate": accepted as f64 / (args.steps * args.chains) as f64,
            "fiber_size": fiber.as_ref().map(|f| f.len()),
            "chi_square": chi,
            "exact_test": exact,
            "chains": chains,
        }),
    )
}
