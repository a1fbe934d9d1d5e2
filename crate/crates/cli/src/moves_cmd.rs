use std::collections::BTreeMap;
use std::io::Write;

use clap::{Args, ValueEnum};
use serde_json::{json, Map, Value};
use tabmoves::json::moves_to_value;
use tabmoves::lattice::circuits_general;
use tabmoves::moves::visit_cycles;
use tabmoves::{
    basic_moves, df1_loops, filter_structural_zeros, universal_markov_basis, BoundsGrid, Cell, IntMatrix, LiftSpec,
    MoveSet, Shape, UniversalOptions,
};

use crate::opts::{self, CliError, CliResult, Format, Model};
use crate::output::{csv_row, json_line};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    /// Degree-2 moves `e_ij + e_i'j' - e_ij' - e_i'j`.
    Basic,
    /// All circuits (loops of every degree).
    Circuits,
    /// Loops of one degree (`--degree`), or all degrees.
    Loops,
    /// Minimal basis of the quasi-independence model (`--zeros`).
    Df1,
    /// Universal basis of a partially bounded design.
    Universal,
}

#[derive(Args, Debug)]
pub struct MovesArgs {
    #[arg(value_enum)]
    kind: Kind,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    /// `two-way` or `file:A.json` (circuits and universal only).
    #[arg(long, default_value = "two-way")]
    model: String,
    /// Structural zeros: `i,j;i,j` (1-based) or a JSON file of cells.
    #[arg(long)]
    zeros: Option<String>,
    /// Universal only: `all`, a JSON file of cells, or a list `i,j;i,j`.
    #[arg(long)]
    bounded_cells: Option<String>,
    /// Universal only: bounds file; bounded entries (and zeros) are taken from it.
    #[arg(long, conflicts_with = "bounded_cells")]
    bounds: Option<String>,
    /// Loops only: restrict to one degree.
    #[arg(long)]
    degree: Option<usize>,
    /// Print the total and the support-size histogram instead of the moves.
    #[arg(long)]
    count_only: bool,
    #[arg(long)]
    norm_cap: Option<usize>,
}

pub fn run(args: &MovesArgs, format: Format, out: &mut impl Write) -> CliResult<()> {
    let model = Model::parse(&args.model)?;
    if !model.is_two_way() && !matches!(args.kind, Kind::Circuits | Kind::Universal) {
        return Err(CliError::Usage("--model file: is supported for circuits and universal only".into()));
    }
    if args.count_only && args.zeros.is_none() && model.is_two_way() && matches!(args.kind, Kind::Circuits | Kind::Loops) {
        let shape = opts::shape(args.rows, args.cols)?;
        return emit_counts(&cycle_histogram(shape, &[], args.degree), format, out);
    }
    let set = build(args, &model)?;
    if args.count_only {
        emit_counts(&set.support_histogram(), format, out)
    } else {
        emit_moves(&set, format, out)
    }
}

fn zero_cells(args: &MovesArgs, shape: Shape) -> CliResult<Vec<Cell>> {
    match &args.zeros {
        Some(z) => Ok(opts::parse_cells(z, Some(shape), shape.cells())?
            .into_iter()
            .map(|h| shape.cell(h))
            .collect()),
        None => Ok(Vec::new()),
    }
}

fn loop_degrees(shape: Shape, degree: Option<usize>) -> std::ops::RangeInclusive<usize> {
    match degree {
        Some(d) => d..=d,
        None => 2..=shape.rows.min(shape.cols),
    }
}

/// Support-size histogram of the loops avoiding `zeros`, counted without
/// materializing them.
fn cycle_histogram(shape: Shape, zeros: &[Cell], degree: Option<usize>) -> Vec<(usize, usize)> {
    let mut allowed = vec![true; shape.cells()];
    for &z in zeros {
        allowed[shape.index(z)] = false;
    }
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    visit_cycles(shape, Some(&allowed), loop_degrees(shape, degree), |c| {
        *counts.entry(2 * c.degree()).or_default() += 1;
    });
    counts.into_iter().collect()
}

pub fn build(args: &MovesArgs, model: &Model) -> CliResult<MoveSet> {
    let norm = opts::norm_cap(args.norm_cap)?;
    if let (Model::File(a), Kind::Circuits) = (model, args.kind) {
        let set = circuits_general(&IntMatrix::from(a), opts::circuit_limit()?)?;
        let zeros = match &args.zeros {
            Some(z) => opts::parse_cells(z, None, a.cols())?,
            None => Vec::new(),
        };
        return Ok(tabmoves::moves::filter_support(&set, &zeros));
    }
    if let (Model::File(a), Kind::Universal) = (model, args.kind) {
        let shape = Shape::flat(a.cols())?;
        let spec = lift_spec(args, IntMatrix::from(a), shape, None)?;
        return Ok(universal_markov_basis(&spec, &UniversalOptions { norm_cap: norm, order: None })?.moves);
    }
    let shape = opts::shape(args.rows, args.cols)?;
    let zeros = zero_cells(args, shape)?;
    Ok(match args.kind {
        Kind::Basic => filter_structural_zeros(&basic_moves(shape), shape, &zeros)?,
        Kind::Circuits => filter_structural_zeros(&tabmoves::circuit_moves(shape), shape, &zeros)?,
        Kind::Loops => {
            let mut allowed = vec![true; shape.cells()];
            for &z in &zeros {
                allowed[shape.index(z)] = false;
            }
            let mut moves = Vec::new();
            visit_cycles(shape, Some(&allowed), loop_degrees(shape, args.degree), |c| moves.push(c.to_move(shape)));
            MoveSet::for_shape(shape, moves)?
        }
        Kind::Df1 => {
            let d = df1_loops(shape, &zeros)?;
            if !d.empty_rows.is_empty() || !d.empty_cols.is_empty() {
                eprintln!(
                    "note: rows {:?} and columns {:?} are entirely structural zeros",
                    d.empty_rows.iter().map(|i| i + 1).collect::<Vec<_>>(),
                    d.empty_cols.iter().map(|j| j + 1).collect::<Vec<_>>()
                );
            }
            d.moves
        }
        Kind::Universal => {
            let a = IntMatrix::from(&tabmoves::two_way_design(shape));
            let spec = lift_spec(args, a, shape, Some(&zeros))?;
            universal_markov_basis(&spec, &UniversalOptions { norm_cap: norm, order: None })?
                .moves
                .with_shape(shape)?
        }
    })
}

fn lift_spec(args: &MovesArgs, a: IntMatrix, shape: Shape, zeros: Option<&[Cell]>) -> CliResult<LiftSpec> {
    let two_way = zeros.is_some();
    if let Some(path) = &args.bounds {
        let bounds: BoundsGrid = opts::load_bounds(Some(path), shape)?;
        if args.zeros.is_some() {
            return Err(CliError::Usage("--zeros cannot be combined with --bounds; put zeros in the bounds file".into()));
        }
        return Ok(LiftSpec::from_bounds(a, &bounds)?);
    }
    let k = shape.cells();
    let cell_shape = two_way.then_some(shape);
    let bounded = match args.bounded_cells.as_deref() {
        Some("all") => (0..k).collect(),
        Some(list) => opts::parse_cells(list, cell_shape, k)?,
        None => Vec::new(),
    };
    let zeros: Vec<usize> = match zeros {
        Some(z) => z.iter().map(|&c| shape.index(c)).collect(),
        None => match &args.zeros {
            Some(z) => opts::parse_cells(z, None, k)?,
            None => Vec::new(),
        },
    };
    Ok(LiftSpec::with_zeros(a, bounded, zeros)?)
}

fn emit_counts(hist: &[(usize, usize)], format: Format, out: &mut impl Write) -> CliResult<()> {
    let total: usize = hist.iter().map(|x| x.1).sum();
    match format {
        Format::Json => {
            let mut by = Map::new();
            for &(s, n) in hist {
                by.insert(s.to_string(), json!(n));
            }
            json_line(out, &json!({ "total": total, "by_support": Value::Object(by) }))
        }
        Format::Csv => {
            csv_row(out, &["support", "count"])?;
            for &(s, n) in hist {
                csv_row(out, &[s.to_string(), n.to_string()])?;
            }
            csv_row(out, &["total".to_string(), total.to_string()])
        }
    }
}

fn emit_moves(set: &MoveSet, format: Format, out: &mut impl Write) -> CliResult<()> {
    match format {
        Format::Json => json_line(out, &moves_to_value(set)),
        Format::Csv => {
            match set.shape() {
                Some(_) => csv_row(out, &["move", "row", "col", "delta"])?,
                None => csv_row(out, &["move", "cell", "delta"])?,
            }
            for (n, m) in set.iter().enumerate() {
                for &(h, d) in m.entries() {
                    let mut row = vec![(n + 1).to_string()];
                    match set.shape() {
                        Some(sh) => {
                            let (i, j) = sh.cell(h as usize);
                            row.push((i + 1).to_string());
                            row.push((j + 1).to_string());
                        }
                        None => row.push((h + 1).to_string()),
                    }
                    row.push(d.to_string());
                    csv_row(out, &row)?;
                }
            }
            Ok(())
        }
    }
}
