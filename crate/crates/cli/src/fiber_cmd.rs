use std::io::Write;

use clap::{Args, Subcommand};
use serde_json::{json, Value};
use tabmoves::fiber::{pattern_search, PatternVerdict, SubbasisVerdict, Witness};
use tabmoves::json::{bounds_to_value, table_to_value};
use tabmoves::{
    connectivity, enumerate_fiber, verify_subbasis, BoundsGrid, Cell, FiberSpec, Shape, VerifyOptions,
    VerifyStatus,
};

use crate::opts::{self, CliError, CliResult, Format, Model};
use crate::output::{csv_row, json_line};

#[derive(Args, Debug)]
pub struct FiberArgs {
    #[command(subcommand)]
    action: Action,
}

#[derive(Subcommand, Debug)]
enum Action {
    /// List every table with the margins (and bounds) of `--table`.
    Enum(TableArgs),
    /// Connected components of a fiber under a move set.
    Connect(ConnectArgs),
    /// Check that a move set connects every fiber up to a margin cap.
    Verify(VerifyArgs),
    /// Classify structural-zero patterns up to row/column permutation.
    Search(SearchArgs),
}

#[derive(Args, Debug)]
struct TableArgs {
    #[arg(long)]
    table: String,
    #[arg(long)]
    bounds: Option<String>,
    #[arg(long, default_value = "two-way")]
    model: String,
    #[arg(long)]
    fiber_cap: Option<usize>,
}

#[derive(Args, Debug)]
struct ConnectArgs {
    #[command(flatten)]
    fiber: TableArgs,
    /// `basic`, `circuits`, `universal` or `file:m.json`.
    #[arg(long, default_value = "basic")]
    moves: String,
    #[arg(long)]
    norm_cap: Option<usize>,
}

#[derive(Args, Debug)]
struct CapArgs {
    /// Largest margin total checked.
    #[arg(long)]
    cap: Option<u64>,
    #[arg(long)]
    fiber_cap: Option<usize>,
    /// Only margins whose row and column sums are all positive.
    #[arg(long)]
    positive_margins: bool,
}

impl CapArgs {
    fn options(&self) -> CliResult<VerifyOptions> {
        Ok(VerifyOptions {
            margin_total_cap: opts::margin_cap(self.cap)?,
            require_positive_margins: self.positive_margins,
            fiber_size_cap: opts::fiber_cap(self.fiber_cap)?,
        })
    }
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    /// `two-way` or `file:A.json` (cells of a general design form one row).
    #[arg(long, default_value = "two-way")]
    model: String,
    #[arg(long, default_value = "basic")]
    moves: String,
    /// Basic moves against uniform bounds 1, 2 and 3 with positive margins.
    #[arg(long)]
    theorem_main: bool,
    /// Structural zeros added to every bounds grid.
    #[arg(long)]
    zeros: Option<String>,
    /// Bounds grid files (repeatable).
    #[arg(long)]
    bounds: Vec<String>,
    /// Uniform bound grids (repeatable).
    #[arg(long)]
    uniform_bound: Vec<u32>,
    #[command(flatten)]
    caps: CapArgs,
    /// Exit with status 4 when a disconnected fiber is found.
    #[arg(long)]
    expect_connected: bool,
    #[arg(long)]
    norm_cap: Option<usize>,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    #[arg(long, default_value_t = 1)]
    min_zeros: usize,
    #[arg(long)]
    max_zeros: usize,
    #[command(flatten)]
    caps: CapArgs,
}

pub fn run(args: &FiberArgs, format: Format, out: &mut impl Write) -> CliResult<()> {
    match &args.action {
        Action::Enum(a) => enum_cmd(a, format, out),
        Action::Connect(a) => connect_cmd(a, out),
        Action::Verify(a) => verify_cmd(a, out),
        Action::Search(a) => search_cmd(a, format, out),
    }
}

fn load_spec(a: &TableArgs) -> CliResult<(FiberSpec, tabmoves::Table, Model)> {
    let t = opts::load_table(&a.table)?;
    let model = Model::parse(&a.model)?;
    let bounds = opts::load_bounds(a.bounds.as_deref(), t.shape())?;
    let spec = FiberSpec::through(model.design(t.shape())?, &t, bounds)?;
    Ok((spec, t, model))
}

fn enum_cmd(a: &TableArgs, format: Format, out: &mut impl Write) -> CliResult<()> {
    let (spec, _, _) = load_spec(a)?;
    let fiber = enumerate_fiber(&spec, opts::fiber_cap(a.fiber_cap)?)?;
    match format {
        Format::Json => {
            let tables: Vec<Value> = fiber.tables().iter().map(table_to_value).collect();
            json_line(out, &json!({ "target": spec.target(), "size": fiber.len(), "tables": tables }))
        }
        Format::Csv => {
            let k = spec.shape().cells();
            let header: Vec<String> = (0..k)
                .map(|h| {
                    let (i, j) = spec.shape().cell(h);
                    format!("n{}_{}", i + 1, j + 1)
                })
                .collect();
            csv_row(out, &header)?;
            for t in fiber.tables() {
                let row: Vec<String> = t.counts().iter().map(u32::to_string).collect();
                csv_row(out, &row)?;
            }
            Ok(())
        }
    }
}

fn connect_cmd(a: &ConnectArgs, out: &mut impl Write) -> CliResult<()> {
    let (spec, _, model) = load_spec(&a.fiber)?;
    let shape = spec.shape();
    let moves = opts::load_moves(&a.moves, &model, shape, spec.bounds(), opts::norm_cap(a.norm_cap)?)?;
    let fiber = enumerate_fiber(&spec, opts::fiber_cap(a.fiber.fiber_cap)?)?;
    let r = connectivity(&fiber, &moves)?;
    let sizes: Vec<usize> = r.components.iter().map(Vec::len).collect();
    let witness = r
        .witness
        .as_ref()
        .map(|(x, y)| json!([table_to_value(x), table_to_value(y)]));
    json_line(
        out,
        &json!({
            "size": fiber.len(),
            "moves": moves.len(),
            "components": r.component_count,
            "component_sizes": sizes,
            "connected": r.is_connected(),
            "witness": witness,
            "escaped": r.escaped,
        }),
    )
}

fn witness_value(w: &Witness) -> Value {
    json!({
        "target": w.target,
        "bounds": bounds_to_value(&w.bounds),
        "first": table_to_value(&w.first),
        "second": table_to_value(&w.second),
        "components": w.component_count,
    })
}

fn status_str(s: &VerifyStatus) -> &'static str {
    match s {
        VerifyStatus::ConnectedUpToCap => "connected-up-to-cap",
        VerifyStatus::Disconnected => "disconnected",
        VerifyStatus::Inconclusive => "inconclusive",
    }
}

fn verdict_value(v: &SubbasisVerdict, opts: &VerifyOptions, grids: usize, moves: usize) -> Value {
    json!({
        "status": status_str(&v.status),
        "margin_total_cap": opts.margin_total_cap,
        "positive_margins": opts.require_positive_margins,
        "bounds_grids": grids,
        "moves": moves,
        "fibers_checked": v.fibers_checked,
        "empty_fibers": v.empty_fibers,
        "inconclusive": v.inconclusive,
        "witness": v.witness.as_ref().map(witness_value),
    })
}

fn verify_cmd(a: &VerifyArgs, out: &mut impl Write) -> CliResult<()> {
    let model = Model::parse(&a.model)?;
    let shape = match &model {
        Model::TwoWay => opts::shape(a.rows, a.cols)?,
        Model::File(d) => Shape::flat(d.cols())?,
    };
    let design = model.design(shape)?;
    let mut options = a.caps.options()?;
    let zeros: Vec<Cell> = match &a.zeros {
        Some(z) => opts::parse_cells(z, model.is_two_way().then_some(shape), shape.cells())?
            .into_iter()
            .map(|h| shape.cell(h))
            .collect(),
        None => Vec::new(),
    };
    let mut family: Vec<BoundsGrid> = Vec::new();
    if a.theorem_main {
        if !model.is_two_way() || a.moves != "basic" {
            return Err(CliError::Usage("--theorem-main uses the two-way model with basic moves".into()));
        }
        family.extend((1..=3).map(|b| BoundsGrid::uniform(shape, b)));
        options.require_positive_margins = true;
    }
    family.extend(a.uniform_bound.iter().map(|&b| BoundsGrid::uniform(shape, b)));
    for path in &a.bounds {
        family.push(opts::load_bounds(Some(path), shape)?);
    }
    if family.is_empty() {
        family.push(BoundsGrid::unbounded(shape));
    }
    for grid in &mut family {
        for &z in &zeros {
            grid.set(z, tabmoves::CellBound::AtMost(0))?;
        }
    }
    let norm = opts::norm_cap(a.norm_cap)?;
    let verdict = if a.moves == "universal" {
        // the universal basis depends on which cells are bounded: one run per grid
        let mut combined: Option<SubbasisVerdict> = None;
        let mut total_moves = 0;
        for grid in &family {
            let moves = opts::load_moves(&a.moves, &model, shape, grid, norm)?;
            total_moves = total_moves.max(moves.len());
            let v = verify_subbasis(&design, shape, &moves, std::slice::from_ref(grid), &options)?;
            combined = Some(match combined {
                None => v,
                Some(mut acc) => {
                    acc.fibers_checked += v.fibers_checked;
                    acc.empty_fibers += v.empty_fibers;
                    acc.inconclusive.extend(v.inconclusive);
                    if acc.status != VerifyStatus::Disconnected && v.status != VerifyStatus::ConnectedUpToCap {
                        acc.status = v.status;
                        acc.witness = v.witness;
                    }
                    acc
                }
            });
            if combined.as_ref().is_some_and(|c| c.status == VerifyStatus::Disconnected) {
                break;
            }
        }
        (combined.expect("family is nonempty"), total_moves)
    } else {
        let moves = opts::load_moves(&a.moves, &model, shape, &BoundsGrid::unbounded(shape), norm)?;
        let moves = if zeros.is_empty() {
            moves
        } else {
            let idx: Vec<usize> = zeros.iter().map(|&c| shape.index(c)).collect();
            tabmoves::moves::filter_support(&moves, &idx)
        };
        let n = moves.len();
        (verify_subbasis(&design, shape, &moves, &family, &options)?, n)
    };
    let (v, nmoves) = verdict;
    json_line(out, &verdict_value(&v, &options, family.len(), nmoves))?;
    if a.expect_connected {
        match v.status {
            VerifyStatus::ConnectedUpToCap => {}
            VerifyStatus::Disconnected => return Err(CliError::Failed("disconnected fiber found".into())),
            VerifyStatus::Inconclusive => {
                return Err(CliError::Lib(tabmoves::Error::CapExceeded {
                    what: "fiber size",
                    cap: options.fiber_size_cap,
                    reached: v.inconclusive.len(),
                }))
            }
        }
    }
    Ok(())
}

fn pattern_value(v: &PatternVerdict) -> Value {
    let zeros: Vec<[usize; 2]> = v.zeros.iter().map(|&(i, j)| [i + 1, j + 1]).collect();
    let status = match v.status {
        tabmoves::fiber::PatternStatus::ConnectedUpToCap => "connected-up-to-cap",
        tabmoves::fiber::PatternStatus::Disconnected => "disconnected",
        tabmoves::fiber::PatternStatus::Inconclusive => "inconclusive",
    };
    json!({
        "zeros": zeros,
        "status": status,
        "fibers_checked": v.fibers_checked,
        "inconclusive": v.inconclusive,
        "witness": v.witness.as_ref().map(witness_value),
    })
}

fn search_cmd(a: &SearchArgs, format: Format, out: &mut impl Write) -> CliResult<()> {
    let shape = Shape::new(a.rows, a.cols).map_err(|e| CliError::Usage(e.to_string()))?;
    if a.min_zeros > a.max_zeros {
        return Err(CliError::Usage("--min-zeros exceeds --max-zeros".into()));
    }
    let options = a.caps.options()?;
    let verdicts = pattern_search(shape, a.min_zeros, a.max_zeros, &options)?;
    if format == Format::Csv {
        csv_row(out, &["zeros", "status", "fibers_checked", "inconclusive"])?;
    }
    for v in &verdicts {
        match format {
            Format::Json => json_line(out, &pattern_value(v))?,
            Format::Csv => {
                let z: Vec<String> = v.zeros.iter().map(|&(i, j)| format!("{},{}", i + 1, j + 1)).collect();
                let p = pattern_value(v);
                csv_row(
                    out,
                    &[
                        z.join(";"),
                        p["status"].as_str().unwrap_or_default().to_string(),
                        v.fibers_checked.to_string(),
                        v.inconclusive.to_string(),
                    ],
                )?;
            }
        }
    }
    Ok(())
}
