//! Grid files.
//!
//! The binary raster format is one ASCII header line
//!
//! ```text
//! SWGRID 1 <f32|f64> <ndim> <d0> <d1> ...\n
//! ```
//!
//! followed by `product(extents)` little-endian IEEE-754 samples in row-major
//! order. CSV files hold 2-D grids as comma-separated rows.

use std::io::{BufRead, Read, Write};

use crate::error::{format_err, shape_err, Result};
use crate::grid::{checked_len, ElementKind, Grid, Sample};

pub const MAGIC: &str = "SWGRID";
pub const VERSION: u32 = 1;

/// Longest header line accepted when reading.
const MAX_HEADER: usize = 4096;

/// Parsed `SWGRID` header line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridFileHeader {
    pub kind: ElementKind,
    pub extents: Vec<usize>,
}

impl GridFileHeader {
    pub fn to_line(&self) -> String {
        let mut line = format!("{MAGIC} {VERSION} {} {}", self.kind, self.extents.len());
        for e in &self.extents {
            line.push(' ');
            line.push_str(&e.to_string());
        }
        line.push('\n');
        line
    }

    pub fn parse(line: &str) -> Result<Self> {
        let mut fields = line.trim_end_matches('\n').split(' ');
        match fields.next() {
            Some(MAGIC) => {}
            other => return Err(format_err!("bad magic {other:?}, expected {MAGIC}")),
        }
        let version: u32 = parse_field(fields.next(), "version")?;
        if version != VERSION {
            return Err(format_err!("unsupported SWGRID version {version}"));
        }
        let kind = fields
            .next()
            .ok_or_else(|| format_err!("header is missing the element kind"))?
            .parse::<ElementKind>()
            .map_err(|e| format_err!("{e}"))?;
        let ndim: usize = parse_field(fields.next(), "ndim")?;
        if ndim == 0 {
            return Err(format_err!("ndim must be at least 1"));
        }
        let extents = (0..ndim)
            .map(|_| parse_field::<usize>(fields.next(), "extent"))
            .collect::<Result<Vec<_>>>()?;
        if fields.next().is_some() {
            return Err(format_err!("trailing fields in header"));
        }
        checked_len(&extents).map_err(|e| format_err!("{e}"))?;
        Ok(GridFileHeader { kind, extents })
    }
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, what: &str) -> Result<T> {
    let field = field.ok_or_else(|| format_err!("header is missing the {what}"))?;
    field
        .parse()
        .map_err(|_| format_err!("invalid {what} {field:?}"))
}

/// A grid read from a file, in whichever precision the file stores.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyGrid {
    F32(Grid<f32>),
    F64(Grid<f64>),
}

impl AnyGrid {
    pub fn kind(&self) -> ElementKind {
        match self {
            AnyGrid::F32(_) => ElementKind::F32,
            AnyGrid::F64(_) => ElementKind::F64,
        }
    }

    pub fn shape(&self) -> &[usize] {
        match self {
            AnyGrid::F32(g) => g.shape(),
            AnyGrid::F64(g) => g.shape(),
        }
    }

    pub fn to_f64(&self) -> Grid<f64> {
        match self {
            AnyGrid::F32(g) => g.to_f64(),
            AnyGrid::F64(g) => g.clone(),
        }
    }
}

impl From<Grid<f32>> for AnyGrid {
    fn from(g: Grid<f32>) -> Self {
        AnyGrid::F32(g)
    }
}

impl From<Grid<f64>> for AnyGrid {
    fn from(g: Grid<f64>) -> Self {
        AnyGrid::F64(g)
    }
}

/// Little-endian encoding of one sample kind.
pub trait LeBytes: Sample {
    fn put_le(self, out: &mut Vec<u8>);
    fn from_le(bytes: &[u8]) -> Self;
}

impl LeBytes for f32 {
    fn put_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn from_le(bytes: &[u8]) -> Self {
        f32::from_le_bytes(bytes.try_into().expect("4 bytes"))
    }
}

impl LeBytes for f64 {
    fn put_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn from_le(bytes: &[u8]) -> Self {
        f64::from_le_bytes(bytes.try_into().expect("8 bytes"))
    }
}

pub fn write_grid<T: LeBytes>(g: &Grid<T>, mut sink: impl Write) -> Result<()> {
    let header = GridFileHeader {
        kind: T::KIND,
        extents: g.shape().to_vec(),
    };
    sink.write_all(header.to_line().as_bytes())?;
    let mut payload = Vec::with_capacity(g.len() * T::KIND.width());
    for &v in g.as_slice() {
        v.put_le(&mut payload);
    }
    sink.write_all(&payload)?;
    sink.flush()?;
    Ok(())
}

pub fn write_any_grid(g: &AnyGrid, sink: impl Write) -> Result<()> {
    match g {
        AnyGrid::F32(g) => write_grid(g, sink),
        AnyGrid::F64(g) => write_grid(g, sink),
    }
}

/// Reads one grid; the payload must be exactly as long as the header says.
pub fn read_grid(source: impl Read) -> Result<AnyGrid> {
    let mut source = std::io::BufReader::new(source);
    let mut line = Vec::new();
    source
        .by_ref()
        .take(MAX_HEADER as u64)
        .read_until(b'\n', &mut line)?;
    if line.last() != Some(&b'\n') {
        return Err(format_err!("missing or overlong SWGRID header line"));
    }
    let line = std::str::from_utf8(&line).map_err(|_| format_err!("header is not ASCII"))?;
    let header = GridFileHeader::parse(line)?;
    let count = checked_len(&header.extents)?;
    let width = header.kind.width();
    let expected = count
        .checked_mul(width)
        .ok_or_else(|| format_err!("payload size overflows"))?;

    let mut payload = Vec::with_capacity(expected);
    source.take(expected as u64 + 1).read_to_end(&mut payload)?;
    if payload.len() != expected {
        return Err(format_err!(
            "payload has {} bytes, header requires {expected}",
            payload.len()
        ));
    }
    fn decode<T: LeBytes>(payload: &[u8], extents: Vec<usize>) -> Result<Grid<T>> {
        let values = payload
            .chunks_exact(T::KIND.width())
            .map(T::from_le)
            .collect();
        Grid::new(extents, values)
    }
    Ok(match header.kind {
        ElementKind::F32 => AnyGrid::F32(decode(&payload, header.extents)?),
        ElementKind::F64 => AnyGrid::F64(decode(&payload, header.extents)?),
    })
}

/// Reads a rectangular table of decimal numbers as a double-precision grid.
pub fn read_csv_2d(source: impl Read) -> Result<Grid<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(source);
    let mut values = Vec::new();
    let mut rows = 0;
    let mut cols = 0;
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| format_err!("CSV row {}: {e}", r + 1))?;
        if r == 0 {
            cols = record.len();
        }
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                format_err!(
                    "CSV row {}, column {}: {cell:?} is not a number",
                    r + 1,
                    c + 1
                )
            })?;
            values.push(v);
        }
        rows += 1;
    }
    if rows == 0 || cols == 0 {
        return Err(format_err!("CSV input is empty"));
    }
    Grid::new([rows, cols], values)
}

/// Writes a 2-D grid as CSV using the shortest decimal form that reads back
/// to the same value.
pub fn write_csv_2d<T: Sample + std::fmt::Display>(
    g: &Grid<T>,
    mut sink: impl Write,
) -> Result<()> {
    if g.ndim() != 2 {
        return Err(shape_err!(
            "CSV output needs a 2-D grid, got shape {:?}",
            g.shape()
        ));
    }
    let cols = g.shape()[1];
    let mut text = String::new();
    for row in g.as_slice().chunks(cols) {
        for (c, v) in row.iter().enumerate() {
            if c > 0 {
                text.push(',');
            }
            text.push_str(&v.to_string());
        }
        text.push('\n');
    }
    sink.write_all(text.as_bytes())?;
    sink.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_lines() {
        let g = Grid::new([2, 2], vec![1.0f64, 2.0, 3.0, 4.0]).unwrap();
        let mut buf = Vec::new();
        write_grid(&g, &mut buf).unwrap();
        let header = b"SWGRID 1 f64 2 2 2\n";
        assert_eq!(&buf[..header.len()], header);
        assert_eq!(buf.len() - header.len(), 32);
        assert_eq!(&buf[header.len()..header.len() + 8], &1.0f64.to_le_bytes());

        let g = Grid::new([3], vec![1.0f32, 2.0, 3.0]).unwrap();
        let mut buf = Vec::new();
        write_grid(&g, &mut buf).unwrap();
        let header = b"SWGRID 1 f32 1 3\n";
        assert_eq!(&buf[..header.len()], header);
        assert_eq!(buf.len() - header.len(), 12);
    }

    #[test]
    fn read_back() {
        let g = Grid::new([2, 3], vec![1.5f32, -2.0, 3.25, 0.0, -999.0, 7.0]).unwrap();
        let mut buf = Vec::new();
        write_grid(&g, &mut buf).unwrap();
        assert_eq!(read_grid(&buf[..]).unwrap(), AnyGrid::F32(g));
    }

    #[test]
    fn rejects_bad_headers_and_payloads() {
        let mut buf = Vec::new();
        write_grid(&Grid::new([2], vec![1.0f32, 2.0]).unwrap(), &mut buf).unwrap();

        let bad_version = [b"SWGRID 2 f32 1 2\n".as_slice(), &buf[17..]].concat();
        assert!(matches!(
            read_grid(&bad_version[..]),
            Err(crate::Error::Format(_))
        ));

        let bad_magic = [b"SWGRIX 1 f32 1 2\n".as_slice(), &buf[17..]].concat();
        assert!(read_grid(&bad_magic[..]).is_err());

        let short = &buf[..buf.len() - 4];
        assert!(matches!(read_grid(short), Err(crate::Error::Format(_))));

        let long = [buf.as_slice(), &[0u8; 4]].concat();
        assert!(read_grid(&long[..]).is_err());

        for header in [
            "SWGRID 1 i16 1 2\n",
            "SWGRID 1 f32 0\n",
            "SWGRID 1 f32 2 2\n",
            "SWGRID 1 f32 1 0\n",
            "SWGRID 1 f32 1 2 9\n",
        ] {
            assert!(read_grid(header.as_bytes()).is_err(), "{header}");
        }
        assert!(read_grid(&b"SWGRID 1 f32 1 2"[..]).is_err());
    }

    #[test]
    fn csv_tables() {
        let g = read_csv_2d("1,2\n3,4\n".as_bytes()).unwrap();
        assert_eq!(g.shape(), &[2, 2]);
        assert_eq!(g.as_slice(), &[1.0, 2.0, 3.0, 4.0]);

        assert!(matches!(
            read_csv_2d("1,2\n3\n".as_bytes()),
            Err(crate::Error::Format(_))
        ));
        assert!(read_csv_2d("1,x\n".as_bytes()).is_err());
        assert!(read_csv_2d("".as_bytes()).is_err());

        let mut out = Vec::new();
        write_csv_2d(
            &Grid::new([2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap(),
            &mut out,
        )
        .unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "1,2\n3,4\n");

        let line = Grid::new([3], vec![1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(
            write_csv_2d(&line, Vec::new()),
            Err(crate::Error::Shape(_))
        ));
    }
}
