//! Plain-text formats for weight fields and grid-function snapshots.
//!
//! Both formats share a header of whitespace-separated key/value lines,
//! followed by data sections. Blank lines and everything after `#` are
//! ignored. Node and cell order is row-major with axis 0 slowest.
//!
//! Weight file:
//!
//! ```text
//! plap-weights 1
//! dim 2
//! box 0 1 0 1          # lower/upper per axis
//! nodes 33 33
//! cells                # one record per cell: upper triangle q11 q12 .. qNN
//! 1 0 1
//! ...
//! v                    # one value per node
//! 1
//! ...
//! ```
//!
//! Snapshot file:
//!
//! ```text
//! plap-grid-function 1
//! dim 1
//! box 0 1
//! nodes 129
//! time 0.25
//! values
//! 0e0
//! ...
//! ```
//!
//! Values are written with Rust's shortest round-trip exponent formatting,
//! so a write/read cycle is lossless for `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::linalg::SymMatrix;
use crate::scalar::Real;
use crate::weight_field::MatrixWeightField;

const WEIGHT_MAGIC: &str = "plap-weights";
const SNAPSHOT_MAGIC: &str = "plap-grid-function";

struct Lines<'a> {
    path: String,
    items: Vec<(usize, Vec<&'a str>)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(path: &Path, text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .filter_map(|(i, l)| {
                let body = l.split('#').next().unwrap_or("");
                let toks: Vec<&str> = body.split_whitespace().collect();
                (!toks.is_empty()).then_some((i + 1, toks))
            })
            .collect();
        Self {
            path: path.display().to_string(),
            items,
            pos: 0,
        }
    }

    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Format {
            path: self.path.clone(),
            line,
            message: message.into(),
        }
    }

    fn last_line(&self) -> usize {
        self.items.last().map_or(0, |(l, _)| *l)
    }

    fn next(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        match self.items.get(self.pos) {
            Some(item) => {
                self.pos += 1;
                Ok(item.clone())
            }
            None => Err(self.err(self.last_line(), format!("unexpected end of file, expected {what}"))),
        }
    }

    /// Reads `key v1 v2 ...`.
    fn keyed(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        let (line, toks) = self.next(key)?;
        if toks[0] != key {
            return Err(self.err(line, format!("expected `{key}`, found `{}`", toks[0])));
        }
        Ok((line, toks[1..].to_vec()))
    }

    fn parse<X: FromStr>(&self, line: usize, tok: &str) -> Result<X> {
        tok.parse()
            .map_err(|_| self.err(line, format!("cannot parse `{tok}`")))
    }
}

fn parse_scalar<T: Real>(lines: &Lines<'_>, line: usize, tok: &str) -> Result<T> {
    let x: f64 = lines.parse(line, tok)?;
    if !x.is_finite() {
        return Err(lines.err(line, format!("non-finite value `{tok}`")));
    }
    Ok(T::lit(x))
}

fn read_header<T: Real>(lines: &mut Lines<'_>, magic: &str) -> Result<Grid<T>> {
    let (line, toks) = lines.next("format tag")?;
    if toks[0] != magic {
        return Err(lines.err(line, format!("expected `{magic}` header")));
    }
    if toks.get(1).copied() != Some("1") {
        return Err(lines.err(line, "unsupported format version"));
    }
    let (line, toks) = lines.keyed("dim")?;
    if toks.len() != 1 {
        return Err(lines.err(line, "`dim` takes one value"));
    }
    let dim: usize = lines.parse(line, toks[0])?;
    if !(1..=3).contains(&dim) {
        return Err(lines.err(line, format!("dimension {dim} not in 1..=3")));
    }
    let (bline, btoks) = lines.keyed("box")?;
    if btoks.len() != 2 * dim {
        return Err(lines.err(bline, format!("`box` needs {} values", 2 * dim)));
    }
    let mut lower = Vec::with_capacity(dim);
    let mut upper = Vec::with_capacity(dim);
    for d in 0..dim {
        lower.push(parse_scalar::<T>(lines, bline, btoks[2 * d])?);
        upper.push(parse_scalar::<T>(lines, bline, btoks[2 * d + 1])?);
    }
    let (nline, ntoks) = lines.keyed("nodes")?;
    if ntoks.len() != dim {
        return Err(lines.err(nline, format!("`nodes` needs {dim} values")));
    }
    let nodes = ntoks
        .iter()
        .map(|t| lines.parse::<usize>(nline, t))
        .collect::<Result<Vec<_>>>()?;
    Grid::new(&lower, &upper, &nodes).map_err(|e| lines.err(nline, e.to_string()))
}

fn write_header<T: Real>(out: &mut String, magic: &str, grid: &Grid<T>) {
    let dim = grid.dim();
    let _ = writeln!(out, "{magic} 1");
    let _ = writeln!(out, "dim {dim}");
    let mut b = String::from("box");
    for d in 0..dim {
        let _ = write!(b, " {:e} {:e}", grid.lower()[d], grid.upper()[d]);
    }
    let _ = writeln!(out, "{b}");
    let n: Vec<String> = grid.nodes_per_axis().iter().map(|n| n.to_string()).collect();
    let _ = writeln!(out, "nodes {}", n.join(" "));
}

pub fn read_weight_file<T: Real>(path: &Path) -> Result<MatrixWeightField<T>> {
    let text = fs::read_to_string(path)?;
    let mut lines = Lines::new(path, &text);
    let grid = Arc::new(read_header::<T>(&mut lines, WEIGHT_MAGIC)?);
    let dim = grid.dim();
    let width = dim * (dim + 1) / 2;
    lines.keyed("cells")?;
    let mut cells = Vec::with_capacity(grid.num_cells());
    for _ in 0..grid.num_cells() {
        let (line, toks) = lines.next("cell record")?;
        if toks.len() != width {
            return Err(lines.err(line, format!("cell record needs {width} entries")));
        }
        let upper = toks
            .iter()
            .map(|t| parse_scalar::<T>(&lines, line, t))
            .collect::<Result<Vec<T>>>()?;
        cells.push(SymMatrix::from_upper(dim, &upper));
    }
    lines.keyed("v")?;
    let mut v = Vec::with_capacity(grid.num_nodes());
    for _ in 0..grid.num_nodes() {
        let (line, toks) = lines.next("nodal weight")?;
        if toks.len() != 1 {
            return Err(lines.err(line, "nodal weight record needs one value"));
        }
        v.push(parse_scalar::<T>(&lines, line, toks[0])?);
    }
    if let Some((line, _)) = lines.items.get(lines.pos) {
        return Err(lines.err(*line, "trailing data after nodal weights"));
    }
    MatrixWeightField::from_parts(grid, cells, v)
}

pub fn write_weight_file<T: Real>(path: &Path, field: &MatrixWeightField<T>) -> Result<()> {
    let grid = field.grid();
    let mut out = String::new();
    write_header(&mut out, WEIGHT_MAGIC, grid);
    out.push_str("cells\n");
    for m in field.cell_matrices() {
        let rec: Vec<String> = m.upper().iter().map(|x| format!("{x:e}")).collect();
        out.push_str(&rec.join(" "));
        out.push('\n');
    }
    out.push_str("v\n");
    for v in field.node_weights() {
        let _ = writeln!(out, "{v:e}");
    }
    fs::write(path, out)?;
    Ok(())
}

/// Grid function together with its time stamp.
#[derive(Clone, Debug)]
pub struct Snapshot<T> {
    pub time: T,
    pub function: GridFunction<T>,
}

impl<T: Real> PartialEq for Snapshot<T> {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.function == other.function
    }
}

pub fn format_snapshot<T: Real>(u: &GridFunction<T>, time: T) -> String {
    let mut out = String::new();
    write_header(&mut out, SNAPSHOT_MAGIC, u.grid());
    let _ = writeln!(out, "time {time:e}");
    out.push_str("values\n");
    for x in u.values() {
        let _ = writeln!(out, "{x:e}");
    }
    out
}

pub fn write_snapshot<T: Real>(path: &Path, u: &GridFunction<T>, time: T) -> Result<()> {
    fs::write(path, format_snapshot(u, time))?;
    Ok(())
}

/// Reads a snapshot; the values must vanish on boundary nodes.
pub fn read_snapshot<T: Real>(path: &Path) -> Result<Snapshot<T>> {
    let text = fs::read_to_string(path)?;
    let mut lines = Lines::new(path, &text);
    let grid = Arc::new(read_header::<T>(&mut lines, SNAPSHOT_MAGIC)?);
    let (tline, ttoks) = lines.keyed("time")?;
    if ttoks.len() != 1 {
        return Err(lines.err(tline, "`time` takes one value"));
    }
    let time = parse_scalar::<T>(&lines, tline, ttoks[0])?;
    lines.keyed("values")?;
    let mut values = Vec::with_capacity(grid.num_nodes());
    for _ in 0..grid.num_nodes() {
        let (line, toks) = lines.next("nodal value")?;
        if toks.len() != 1 {
            return Err(lines.err(line, "nodal value record needs one value"));
        }
        values.push(parse_scalar::<T>(&lines, line, toks[0])?);
    }
    if let Some((line, _)) = lines.items.get(lines.pos) {
        return Err(lines.err(*line, "trailing data after nodal values"));
    }
    let function = GridFunction::new(grid, values)?;
    Ok(Snapshot { time, function })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight_field::{build_field, WeightFamilySpec};

    #[test]
    fn weight_file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.txt");
        let g = Arc::new(Grid::<f64>::new(&[-1.0, 0.0], &[1.0, 2.0], &[5, 4]).unwrap());
        let spec = WeightFamilySpec::AnisotropicDiagonal {
            exponents: vec![1.3, 0.5],
            v_const: 3.0,
        };
        let f = build_field(&spec, g).unwrap();
        write_weight_file(&path, &f).unwrap();
        let back: MatrixWeightField<f64> = read_weight_file(&path).unwrap();
        assert!(back.grid().same_shape(f.grid()));
        assert_eq!(back.cell_matrices(), f.cell_matrices());
        assert_eq!(back.node_weights(), f.node_weights());
        let via_spec = build_field(&WeightFamilySpec::GridFile { path: path.clone() }, f.grid().clone()).unwrap();
        assert_eq!(via_spec.cell_matrices(), f.cell_matrices());
    }

    #[test]
    fn snapshot_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.txt");
        let g = Arc::new(Grid::<f64>::unit(2, 6).unwrap());
        let u = GridFunction::from_fn(g, |x| (x[0] * 7.1).sin() * x[1].exp() / 3.0);
        write_snapshot(&path, &u, 0.125).unwrap();
        let s: Snapshot<f64> = read_snapshot(&path).unwrap();
        assert_eq!(s.time, 0.125);
        assert_eq!(s.function, u);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        fs::write(&path, "plap-grid-function 1\n# note\ndim 1\nbox 0 1\nnodes 3\ntime 0\nvalues\n0\nx\n0\n").unwrap();
        match read_snapshot::<f64>(&path) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 9),
            other => panic!("{other:?}"),
        }
        fs::write(&path, "plap-grid-function 1\ndim 1\nbox 0 1\nnodes 3\ntime 0\nvalues\n1\n0\n0\n").unwrap();
        assert!(matches!(read_snapshot::<f64>(&path), Err(Error::BoundaryViolation { node: 0 })));
    }
}
