//! JSON file formats.
//!
//! - table: `{"rows": I, "cols": J, "counts": [...]}` (row-major)
//! - bounds: `[null | b, ...]`, one entry per cell
//! - design matrix: `{"s": s, "k": k, "entries": [[...], ...]}`
//! - move set: `{"rows": I, "cols": J, "moves": [{"cells": [[i, j, delta], ...]}, ...]}`
//!   with 1-based indices; a general move set over `k` cells uses
//!   `{"k": k, "moves": [{"cells": [[h, delta], ...]}]}`.

use serde::{Deserialize, Serialize, Serializer};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::moves::{Move, MoveSet};
use crate::table::{BoundsGrid, CellBound, DesignMatrix, Shape, Table};

#[derive(Serialize, Deserialize)]
struct TableRepr {
    rows: usize,
    cols: usize,
    counts: Vec<u32>,
}

impl Serialize for Table {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TableRepr {
            rows: self.shape().rows,
            cols: self.shape().cols,
            counts: self.counts().to_vec(),
        }
        .serialize(s)
    }
}

impl Serialize for BoundsGrid {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.bounds().serialize(s)
    }
}

#[derive(Serialize, Deserialize)]
struct DesignRepr {
    s: usize,
    k: usize,
    entries: Vec<Vec<u32>>,
}

pub fn table_to_value(t: &Table) -> Value {
    serde_json::to_value(t).expect("tables serialize")
}

pub fn parse_table(text: &str) -> Result<Table> {
    let r: TableRepr = serde_json::from_str(text)?;
    Table::new(Shape::new(r.rows, r.cols)?, r.counts)
}

pub fn parse_bounds(text: &str, shape: Shape) -> Result<BoundsGrid> {
    let b: Vec<CellBound> = serde_json::from_str(text)?;
    BoundsGrid::new(shape, b)
}

pub fn bounds_to_value(b: &BoundsGrid) -> Value {
    serde_json::to_value(b).expect("bounds serialize")
}

pub fn parse_design(text: &str) -> Result<DesignMatrix> {
    let r: DesignRepr = serde_json::from_str(text)?;
    if r.entries.len() != r.s {
        return Err(Error::Dimension {
            expected: r.s,
            actual: r.entries.len(),
            context: "design matrix rows",
        });
    }
    let a = DesignMatrix::from_rows(&r.entries)?;
    if a.cols() != r.k && r.s > 0 {
        return Err(Error::Dimension {
            expected: r.k,
            actual: a.cols(),
            context: "design matrix columns",
        });
    }
    Ok(a)
}

pub fn design_to_value(a: &DesignMatrix) -> Value {
    serde_json::to_value(DesignRepr {
        s: a.rows(),
        k: a.cols(),
        entries: (0..a.rows()).map(|r| a.row(r).to_vec()).collect(),
    })
    .expect("design serializes")
}

pub fn move_to_value(m: &Move, shape: Option<Shape>) -> Value {
    let cells: Vec<Value> = m
        .entries()
        .iter()
        .map(|&(h, d)| match shape {
            Some(sh) => {
                let (i, j) = sh.cell(h as usize);
                json!([i + 1, j + 1, d])
            }
            None => json!([h + 1, d]),
        })
        .collect();
    json!({ "cells": cells })
}

pub fn moves_to_value(set: &MoveSet) -> Value {
    let moves: Vec<Value> = set.iter().map(|m| move_to_value(m, set.shape())).collect();
    match set.shape() {
        Some(sh) => json!({ "rows": sh.rows, "cols": sh.cols, "moves": moves }),
        None => json!({ "k": set.dim(), "moves": moves }),
    }
}

pub fn parse_moves(text: &str) -> Result<MoveSet> {
    let v: Value = serde_json::from_str(text)?;
    let get_usize = |key: &str| v.get(key).and_then(Value::as_u64).map(|x| x as usize);
    let shape = match (get_usize("rows"), get_usize("cols")) {
        (Some(r), Some(c)) => Some(Shape::new(r, c)?),
        _ => None,
    };
    let dim = match shape {
        Some(sh) => sh.cells(),
        None => get_usize("k").ok_or_else(|| Error::invalid("move set needs rows/cols or k"))?,
    };
    let list = v
        .get("moves")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::invalid("move set needs a \"moves\" array"))?;
    let mut moves = Vec::with_capacity(list.len());
    for entry in list {
        let cells = entry
            .get("cells")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::invalid("each move needs a \"cells\" array"))?;
        let mut pairs = Vec::with_capacity(cells.len());
        for c in cells {
            let nums: Option<Vec<i64>> = c.as_array().and_then(|a| a.iter().map(Value::as_i64).collect());
            let nums = nums.ok_or_else(|| Error::invalid("move cells must be integer arrays"))?;
            let (h, d) = match (shape, nums.as_slice()) {
                (Some(sh), [i, j, d]) if *i >= 1 && *j >= 1 => {
                    let cell = (*i as usize - 1, *j as usize - 1);
                    if !sh.contains(cell) {
                        return Err(Error::invalid(format!("move cell ({i}, {j}) outside {sh}")));
                    }
                    (sh.index(cell), *d)
                }
                (None, [h, d]) if *h >= 1 => (*h as usize - 1, *d),
                _ => return Err(Error::invalid(format!("malformed move cell {c}"))),
            };
            pairs.push((h, d));
        }
        moves.push(Move::from_sparse(pairs)?);
    }
    match shape {
        Some(sh) => MoveSet::for_shape(sh, moves),
        None => MoveSet::new(dim, moves),
    }
}
