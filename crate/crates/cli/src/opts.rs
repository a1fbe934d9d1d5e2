use std::fmt;
use std::path::Path;

use clap::ValueEnum;
use tabmoves::json::{parse_bounds, parse_design, parse_moves, parse_table};
use tabmoves::lattice::DEFAULT_CIRCUIT_SUBSET_LIMIT;
use tabmoves::{
    basic_moves, circuit_moves, two_way_design, universal_markov_basis, BoundsGrid, Cell, DesignMatrix, Error, IntMatrix,
    LiftSpec, MoveSet, Shape, Table, UniversalOptions,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(Error),
    /// A verification the caller asked for did not hold.
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Lib(Error::CapExceeded { .. } | Error::Overflow(_)) => 3,
            CliError::Lib(_) => 2,
            CliError::Failed(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failed(m) => f.write_str(m),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Lib(Error::Io(e))
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

fn env_cap<T: std::str::FromStr>(name: &str, default: T) -> CliResult<T> {
    match std::env::var(name) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{name}={v} is not a valid number"))),
        Err(_) => Ok(default),
    }
}

/// Effective caps: flag, then environment, then library default.
pub fn norm_cap(flag: Option<usize>) -> CliResult<usize> {
    flag.map_or_else(|| env_cap("TABMOVES_NORM_CAP", tabmoves::lattice::DEFAULT_NORM_CAP), Ok)
}

pub fn margin_cap(flag: Option<u64>) -> CliResult<u64> {
    flag.map_or_else(|| env_cap("TABMOVES_MARGIN_CAP", tabmoves::fiber::DEFAULT_MARGIN_CAP), Ok)
}

pub fn fiber_cap(flag: Option<usize>) -> CliResult<usize> {
    flag.map_or_else(|| env_cap("TABMOVES_FIBER_CAP", tabmoves::fiber::DEFAULT_FIBER_CAP), Ok)
}

pub fn circuit_limit() -> CliResult<u64> {
    env_cap("TABMOVES_CIRCUIT_LIMIT", DEFAULT_CIRCUIT_SUBSET_LIMIT)
}

pub fn read(path: &str) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{path}: {e}")))
}

pub fn shape(rows: Option<usize>, cols: Option<usize>) -> CliResult<Shape> {
    match (rows, cols) {
        (Some(r), Some(c)) => Shape::new(r, c).map_err(|e| CliError::Usage(e.to_string())),
        _ => usage("--rows and --cols are required"),
    }
}

pub fn load_table(path: &str) -> CliResult<Table> {
    Ok(parse_table(&read(path)?)?)
}

pub fn load_bounds(path: Option<&str>, shape: Shape) -> CliResult<BoundsGrid> {
    match path {
        Some(p) => Ok(parse_bounds(&read(p)?, shape)?),
        None => Ok(BoundsGrid::unbounded(shape)),
    }
}

/// `two-way` or `file:A.json`.
#[derive(Clone, Debug)]
pub enum Model {
    TwoWay,
    File(DesignMatrix),
}

impl Model {
    pub fn parse(s: &str) -> CliResult<Model> {
        if s == "two-way" {
            Ok(Model::TwoWay)
        } else if let Some(p) = s.strip_prefix("file:") {
            Ok(Model::File(parse_design(&read(p)?)?))
        } else {
            usage(format!("unknown model {s:?} (expected two-way or file:PATH)"))
        }
    }

    pub fn design(&self, shape: Shape) -> CliResult<DesignMatrix> {
        match self {
            Model::TwoWay => Ok(two_way_design(shape)),
            Model::File(a) if a.cols() == shape.cells() => Ok(a.clone()),
            Model::File(a) => usage(format!("design has {} columns but the table has {} cells", a.cols(), shape.cells())),
        }
    }

    pub fn is_two_way(&self) -> bool {
        matches!(self, Model::TwoWay)
    }
}

/// `basic | circuits | universal | file:m.json`.
pub fn load_moves(spec: &str, model: &Model, shape: Shape, bounds: &BoundsGrid, norm: usize) -> CliResult<MoveSet> {
    let zeros: Vec<Cell> = bounds.structural_zeros().into_iter().map(|h| shape.cell(h)).collect();
    let two_way = || -> CliResult<()> {
        if model.is_two_way() {
            Ok(())
        } else {
            usage(format!("--moves {spec} needs the two-way model"))
        }
    };
    let set = match spec {
        "basic" => {
            two_way()?;
            tabmoves::filter_structural_zeros(&basic_moves(shape), shape, &zeros)?
        }
        "circuits" => {
            two_way()?;
            tabmoves::filter_structural_zeros(&circuit_moves(shape), shape, &zeros)?
        }
        "universal" => {
            let a = IntMatrix::from(&model.design(shape)?);
            let lift = LiftSpec::from_bounds(a, bounds)?;
            let u = universal_markov_basis(&lift, &UniversalOptions { norm_cap: norm, order: None })?;
            u.moves
        }
        other => match other.strip_prefix("file:") {
            Some(p) => parse_moves(&read(p)?)?,
            None => return usage(format!("unknown move set {other:?} (expected basic, circuits, universal or file:PATH)")),
        },
    };
    if set.dim() != shape.cells() {
        return usage(format!("move set has dimension {} but the table has {} cells", set.dim(), shape.cells()));
    }
    Ok(set)
}

/// Cell lists: `i,j;i,j;...` (1-based) for tables, `h;h;...` for flat
/// designs; `;` or whitespace separate entries. A path to an existing file
/// is read as a JSON array of `[i, j]` pairs (or `h` indices).
pub fn parse_cells(arg: &str, shape: Option<Shape>, k: usize) -> CliResult<Vec<usize>> {
    let text;
    let items: Vec<Vec<i64>> = if Path::new(arg).is_file() {
        text = read(arg)?;
        let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{arg}: {e}")))?;
        let arr = v.as_array().ok_or_else(|| CliError::Usage(format!("{arg}: expected a JSON array of cells")))?;
        arr.iter()
            .map(|c| match c {
                serde_json::Value::Array(xs) => xs.iter().map(|x| x.as_i64().unwrap_or(-1)).collect(),
                x => vec![x.as_i64().unwrap_or(-1)],
            })
            .collect()
    } else {
        arg.split(|c: char| c == ';' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|item| item.split(',').map(|x| x.trim().parse::<i64>().unwrap_or(-1)).collect())
            .collect()
    };
    let mut out = Vec::with_capacity(items.len());
    for item in items {
        let h = match (item.as_slice(), shape) {
            (&[i, j], Some(sh)) if i >= 1 && j >= 1 && (i as usize) <= sh.rows && (j as usize) <= sh.cols => {
                sh.index((i as usize - 1, j as usize - 1))
            }
            (&[h], _) if h >= 1 && (h as usize) <= k => h as usize - 1,
            _ => return usage(format!("bad cell {item:?} in {arg:?}")),
        };
        out.push(h);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}
