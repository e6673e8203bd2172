//! CSV datasets and level declaration sidecars.
//!
//! Data files are plain comma separated text with a header row of unique
//! variable names. Without a declaration, levels are the distinct values in
//! first-appearance order. A declaration file lists `variable:level1,level2`
//! one per line and fixes both the level set and its order.

use std::collections::HashMap;
use std::io::{Read, Write};

use bnci_core::{DiscreteDataset, Variable};

use crate::error::{Error, Result};

/// Parses a level declaration file.
pub fn parse_levels(text: &str) -> Result<Vec<Variable>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, levels) = line
            .split_once(':')
            .ok_or_else(|| Error::parse(i + 1, "expected 'variable:level,level,...'"))?;
        let levels: Vec<String> = levels.split(',').map(|l| l.trim().to_string()).collect();
        out.push(Variable::new(name.trim(), levels).map_err(|e| Error::parse(i + 1, e.to_string()))?);
    }
    Ok(out)
}

/// Reads a dataset. When `declared` is given, every header name must be
/// declared and every value must be one of its declared levels.
pub fn load_csv<R: Read>(reader: R, declared: Option<&[Variable]>) -> Result<DiscreteDataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let decl: Option<HashMap<&str, &Variable>> =
        declared.map(|d| d.iter().map(|v| (v.name.as_str(), v)).collect());
    let mut levels: Vec<Vec<String>> = Vec::with_capacity(header.len());
    let mut lookup: Vec<HashMap<String, u32>> = Vec::with_capacity(header.len());
    for name in &header {
        match &decl {
            Some(d) => {
                let v = d
                    .get(name.as_str())
                    .ok_or_else(|| Error::Format(format!("column {name} has no level declaration")))?;
                levels.push(v.levels.clone());
                lookup.push(v.levels.iter().enumerate().map(|(i, l)| (l.clone(), i as u32)).collect());
            }
            None => {
                levels.push(Vec::new());
                lookup.push(HashMap::new());
            }
        }
    }
    let mut columns: Vec<Vec<u32>> = vec![Vec::new(); header.len()];
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        for (c, field) in rec.iter().enumerate() {
            let code = match lookup[c].get(field) {
                Some(&code) => code,
                None if decl.is_some() => {
                    return Err(Error::parse(line, format!("{field:?} is not a level of {}", header[c])));
                }
                None => {
                    let code = levels[c].len() as u32;
                    levels[c].push(field.to_string());
                    lookup[c].insert(field.to_string(), code);
                    code
                }
            };
            columns[c].push(code);
        }
    }
    if columns.first().map_or(true, |c| c.is_empty()) {
        return Err(Error::Format("dataset has no rows".into()));
    }
    let variables = header
        .into_iter()
        .zip(levels)
        .map(|(name, lv)| Variable::new(name, lv))
        .collect::<bnci_core::Result<Vec<_>>>()?;
    Ok(DiscreteDataset::from_columns(variables, columns)?)
}

/// Writes a dataset as CSV with level labels.
pub fn write_csv<W: Write>(data: &DiscreteDataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(data.variables().iter().map(|v| v.name.as_str()))?;
    let mut row: Vec<&str> = Vec::with_capacity(data.n_vars());
    for r in 0..data.n() {
        row.clear();
        for v in 0..data.n_vars() {
            row.push(&data.variable(v).levels[data.column(v)[r] as usize]);
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}
