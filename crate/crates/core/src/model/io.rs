//! Text formats for graphs, labellings and positions.
//!
//! Edge list: a header line `n d seed`, then one `i j` pair per line with
//! `0 <= i < j < n`. Labelling: one label per line. Positions: CSV with one
//! column per dimension.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Graph, Labelling};
use crate::torus::TorusVector;

/// Header of an edge-list file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeListHeader {
    pub n: usize,
    pub d: usize,
    pub seed: u64,
}

pub fn write_edge_list(path: &Path, graph: &Graph, d: usize, seed: u64) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut emit = || -> std::io::Result<()> {
        writeln!(w, "{} {} {}", graph.n(), d, seed)?;
        for (i, j) in graph.edges() {
            writeln!(w, "{i} {j}")?;
        }
        w.flush()
    };
    emit().map_err(|e| Error::io(path, e))
}

pub fn read_edge_list(path: &Path) -> Result<(Graph, EdgeListHeader)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text, path)
}

pub(crate) fn parse_edge_list(text: &str, path: &Path) -> Result<(Graph, EdgeListHeader)> {
    let parse_err = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "missing header".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(parse_err(hline + 1, format!("header must be `n d seed`, got {header:?}")));
    }
    let num = |s: &str, line: usize| -> Result<u64> {
        s.parse::<u64>().map_err(|e| parse_err(line, format!("{s:?}: {e}")))
    };
    let header = EdgeListHeader {
        n: num(fields[0], hline + 1)? as usize,
        d: num(fields[1], hline + 1)? as usize,
        seed: num(fields[2], hline + 1)?,
    };
    let mut graph = Graph::empty(header.n);
    for (idx, line) in lines {
        let mut it = line.split_whitespace();
        let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
            return Err(parse_err(idx + 1, format!("expected `i j`, got {line:?}")));
        };
        let i = num(a, idx + 1)? as usize;
        let j = num(b, idx + 1)? as usize;
        if i >= j || j >= header.n {
            return Err(parse_err(idx + 1, format!("edge ({i}, {j}) needs i < j < n = {}", header.n)));
        }
        graph.insert(i, j);
    }
    Ok((graph, header))
}

pub fn write_labelling(path: &Path, labels: &Labelling) -> Result<()> {
    let mut text = String::with_capacity(2 * labels.len());
    for l in labels.as_slice() {
        text.push_str(&l.to_string());
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_labelling(path: &Path) -> Result<Labelling> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut labels = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        match t {
            "1" => labels.push(1),
            "2" => labels.push(2),
            other => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    msg: format!("label must be 1 or 2, got {other:?}"),
                })
            }
        }
    }
    Labelling::new(labels)
}

pub fn write_positions(path: &Path, positions: &[TorusVector]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let d = positions.first().map_or(0, |p| p.dim());
    w.write_record((1..=d).map(|j| format!("x{j}")))?;
    for p in positions {
        w.write_record(p.coords().iter().map(|c| c.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
