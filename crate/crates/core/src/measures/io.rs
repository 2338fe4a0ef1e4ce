//! Measure files: the `PMSR1` columnar binary and `x,y,w` CSV.
//!
//! Binary layout, little-endian: magic `PMSR1`, `u64` count, `f64 x[count]`,
//! `f64 y[count]`, `f64 w[count]`, then the provenance as JSON up to EOF.

use super::{MeasureError, PointMeasure, Provenance};
use crate::vec2::Vec2;
use std::io::{BufRead, Read, Write};

pub const PMSR_MAGIC: &[u8; 5] = b"PMSR1";

pub fn write_pmsr<W: Write>(mut w: W, m: &PointMeasure) -> Result<(), MeasureError> {
    w.write_all(PMSR_MAGIC)?;
    w.write_all(&(m.len() as u64).to_le_bytes())?;
    for p in m.points() {
        w.write_all(&p.x.to_le_bytes())?;
    }
    for p in m.points() {
        w.write_all(&p.y.to_le_bytes())?;
    }
    for v in m.weights() {
        w.write_all(&v.to_le_bytes())?;
    }
    serde_json::to_writer(&mut w, m.provenance()).map_err(|e| MeasureError::Format(e.to_string()))?;
    w.flush()?;
    Ok(())
}

pub fn read_pmsr<R: Read>(mut r: R) -> Result<PointMeasure, MeasureError> {
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)?;
    if &magic != PMSR_MAGIC {
        return Err(MeasureError::Format("bad magic".into()));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let count = u64::from_le_bytes(b8);
    if count > super::MAX_ATOMS as u64 {
        return Err(MeasureError::Format(format!("atom count {count} exceeds the limit")));
    }
    let count = count as usize;
    let col = |r: &mut R| -> Result<Vec<f64>, MeasureError> {
        let mut buf = vec![0u8; 8 * count];
        r.read_exact(&mut buf)?;
        Ok(buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect())
    };
    let xs = col(&mut r)?;
    let ys = col(&mut r)?;
    let ws = col(&mut r)?;
    let mut trailer = Vec::new();
    r.read_to_end(&mut trailer)?;
    let prov: Provenance = serde_json::from_slice(&trailer).map_err(|e| MeasureError::Format(e.to_string()))?;
    let points = xs.into_iter().zip(ys).map(|(x, y)| Vec2::new(x, y)).collect();
    PointMeasure::new(points, ws, prov)
}

pub fn write_csv<W: Write>(mut w: W, m: &PointMeasure) -> Result<(), MeasureError> {
    writeln!(w, "x,y,w")?;
    for (p, v) in m.points().iter().zip(m.weights()) {
        writeln!(w, "{},{},{}", p.x, p.y, v)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `x,y,w` rows; a header line is optional.
pub fn read_csv<R: BufRead>(r: R) -> Result<PointMeasure, MeasureError> {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with(|c: char| c.is_ascii_alphabetic())) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| MeasureError::Format(format!("line {}: {e}", lineno + 1)))
        };
        if fields.len() != 3 {
            return Err(MeasureError::Format(format!("line {}: expected 3 fields", lineno + 1)));
        }
        points.push(Vec2::new(parse(fields[0])?, parse(fields[1])?));
        weights.push(parse(fields[2])?);
    }
    PointMeasure::new(points, weights, Provenance::new("csv", serde_json::Value::Null, None, 0.0))
}
