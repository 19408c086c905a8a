//! File formats: grid functions (JSON header line, then CSV or little-endian
//! f64 payload), `breakpoint,value` step files and two-column curves.

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rearrange::GridFunction;
use crate::stepfn::PWDecreasing;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    #[default]
    Csv,
    F64le,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridHeader {
    pub n: usize,
    #[serde(rename = "N")]
    pub cells: usize,
    #[serde(default)]
    pub encoding: Encoding,
}

pub fn read_grid<R: BufRead>(mut r: R) -> Result<GridFunction> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: GridHeader = serde_json::from_str(line.trim())
        .map_err(|e| Error::parse("header", e.to_string()))?;
    let values = match header.encoding {
        Encoding::Csv => {
            let mut rdr = csv::ReaderBuilder::new()
                .has_headers(false)
                .flexible(true)
                .trim(csv::Trim::All)
                .from_reader(r);
            let mut out = Vec::new();
            for rec in rdr.records() {
                let rec = rec.map_err(|e| Error::parse("values", e.to_string()))?;
                for field in rec.iter().filter(|f| !f.is_empty()) {
                    out.push(parse_number("values", field)?);
                }
            }
            out
        }
        Encoding::F64le => {
            let mut bytes = Vec::new();
            r.read_to_end(&mut bytes)?;
            if bytes.len() % 8 != 0 {
                return Err(Error::parse("values", "payload is not a whole number of f64"));
            }
            bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect()
        }
    };
    GridFunction::new(header.n, header.cells, values)
}

pub fn write_grid<W: Write>(g: &GridFunction, mut w: W, encoding: Encoding) -> Result<()> {
    let header = GridHeader {
        n: g.dim(),
        cells: g.cells_per_axis(),
        encoding,
    };
    let h = serde_json::to_string(&header).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w, "{h}")?;
    match encoding {
        Encoding::Csv => {
            for v in g.values() {
                writeln!(w, "{v:e}")?;
            }
        }
        Encoding::F64le => {
            for v in g.values() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

fn parse_number(field: &str, s: &str) -> Result<f64> {
    match s.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        t => t
            .parse::<f64>()
            .map_err(|_| Error::parse(field, format!("`{s}` is not a number"))),
    }
}

/// Reads a step file: header `breakpoint,value`, one row per piece giving
/// its left breakpoint; the first row starts at 0 and the last piece runs
/// to 1.
pub fn read_step_csv<R: Read>(r: R) -> Result<PWDecreasing> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse("header", e.to_string()))?
        .clone();
    if headers.len() != 2 || &headers[0] != "breakpoint" || &headers[1] != "value" {
        return Err(Error::parse("header", "expected `breakpoint,value`"));
    }
    let mut breaks = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::parse("row", e.to_string()))?;
        breaks.push(parse_number("breakpoint", &rec[0])?);
        values.push(parse_number("value", &rec[1])?);
    }
    if values.is_empty() {
        return Err(Error::parse("row", "no pieces"));
    }
    breaks.push(1.0);
    PWDecreasing::new(breaks, values).map_err(|e| Error::parse("value", e.to_string()))
}

pub fn write_step_csv<W: Write>(f: &PWDecreasing, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["breakpoint", "value"])
        .map_err(|e| Error::Io(e.to_string()))?;
    for (i, v) in f.values().iter().enumerate() {
        wr.write_record([fmt17(f.breakpoints()[i]), fmt17(*v)])
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    wr.flush()?;
    Ok(())
}

/// Writes `(t, value)` rows under the given column names.
pub fn write_curve_csv<W: Write>(names: [&str; 2], rows: &[(f64, f64)], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(names).map_err(|e| Error::Io(e.to_string()))?;
    for (t, v) in rows {
        wr.write_record([fmt17(*t), fmt17(*v)])
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    wr.flush()?;
    Ok(())
}

/// 17 significant digits, `inf` for infinity.
pub fn fmt17(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.16e}")
    }
}
