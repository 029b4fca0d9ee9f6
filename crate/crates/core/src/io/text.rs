//! Plain-text matrix formats.
//!
//! Matrix file: a header line `h w`, then `h` lines of `w` space-separated
//! integer codes.
//!
//! ASCII render: one character per cell, rows separated by `\n`:
//! `#` obstacle, `.` free, `=` lane, `E` entrance, `X` exit.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Cell, StructureMatrix};

pub fn write_matrix(s: &StructureMatrix) -> String {
    let mut out = format!("{} {}\n", s.height(), s.width());
    for row in s.rows() {
        let codes: Vec<String> = row.iter().map(|c| c.code().to_string()).collect();
        out.push_str(&codes.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_matrix(text: &str) -> Result<StructureMatrix> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty matrix file".into() })?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Parse { line: 1, msg: "header must be `h w`".into() })?;
    let [h, w] = dims[..] else {
        return Err(Error::Parse { line: 1, msg: "header must be `h w`".into() });
    };
    let mut cells = Vec::with_capacity(h * w);
    let mut rows = 0;
    for (i, line) in lines {
        let lineno = i + 1;
        let mut n = 0;
        for tok in line.split_whitespace() {
            let v: i64 = tok.parse().map_err(|_| Error::Parse { line: lineno, msg: format!("bad code `{tok}`") })?;
            cells.push(Cell::try_from(v)?);
            n += 1;
        }
        if n != w {
            return Err(Error::Parse { line: lineno, msg: format!("expected {w} codes, found {n}") });
        }
        rows += 1;
    }
    if rows != h {
        return Err(Error::Parse { line: 1, msg: format!("header says {h} rows, found {rows}") });
    }
    StructureMatrix::from_cells(h, w, cells)
}

pub fn read_matrix_file(path: &Path) -> Result<StructureMatrix> {
    parse_matrix(&fs::read_to_string(path)?)
}

pub fn write_matrix_file(path: &Path, s: &StructureMatrix) -> Result<()> {
    fs::write(path, write_matrix(s))?;
    Ok(())
}

pub fn glyph(c: Cell) -> char {
    match c {
        Cell::Obstacle => '#',
        Cell::Free => '.',
        Cell::Lane => '=',
        Cell::Entrance => 'E',
        Cell::Exit => 'X',
    }
}

pub fn render_ascii(s: &StructureMatrix) -> String {
    let rows: Vec<String> = s.rows().map(|r| r.iter().map(|&c| glyph(c)).collect()).collect();
    rows.join("\n")
}

pub fn parse_ascii(text: &str) -> Result<StructureMatrix> {
    let mut cells = Vec::new();
    let mut w = None;
    let mut h = 0;
    for (i, line) in text.lines().enumerate() {
        let before = cells.len();
        for ch in line.chars() {
            cells.push(match ch {
                '#' => Cell::Obstacle,
                '.' => Cell::Free,
                '=' => Cell::Lane,
                'E' => Cell::Entrance,
                'X' => Cell::Exit,
                other => return Err(Error::Parse { line: i + 1, msg: format!("unknown glyph `{other}`") }),
            });
        }
        let n = cells.len() - before;
        match w {
            None => w = Some(n),
            Some(w) if w != n => {
                return Err(Error::Parse { line: i + 1, msg: format!("expected {w} cells, found {n}") });
            }
            _ => {}
        }
        h += 1;
    }
    StructureMatrix::from_cells(h, w.unwrap_or(0), cells)
}
