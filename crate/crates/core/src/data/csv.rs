//! Long-format choice records and per-chain draw stores as CSV.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::design::{build_design_matrix, DesignConfig, LongRow, LongTable};
use crate::error::{McqrError, Result};
use crate::gibbs::ChainDraws;
use crate::model::ChoiceDataset;

const ID_COLUMNS: [&str; 3] = ["obs_id", "alt", "choice_flag"];

/// Parse long-format records: `obs_id, alt, choice_flag` followed by numeric covariates.
pub fn read_long_table<R: Read>(reader: R) -> Result<LongTable> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| McqrError::ingestion(1, format!("missing required column `{name}`")))
    };
    let (id_col, alt_col, flag_col) = (col(ID_COLUMNS[0])?, col(ID_COLUMNS[1])?, col(ID_COLUMNS[2])?);
    let cov_cols: Vec<usize> = (0..headers.len()).filter(|c| ![id_col, alt_col, flag_col].contains(c)).collect();
    let covariates: Vec<String> = cov_cols.iter().map(|&c| headers[c].to_string()).collect();

    let mut rows = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let line = idx + 2;
        let rec = rec.map_err(|e| McqrError::ingestion(line, e.to_string()))?;
        let chosen = match &rec[flag_col] {
            "1" => true,
            "0" => false,
            other => {
                return Err(McqrError::ingestion(line, format!("choice_flag must be 0 or 1, found `{other}`")));
            }
        };
        let values = cov_cols
            .iter()
            .map(|&c| {
                rec[c].parse::<f64>().map_err(|_| {
                    McqrError::ingestion(line, format!("column `{}`: `{}` is not a number", &headers[c], &rec[c]))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(LongRow {
            obs_id: rec[id_col].to_string(),
            alt: rec[alt_col].to_string(),
            chosen,
            values,
            line,
        });
    }
    Ok(LongTable { covariates, rows })
}

pub fn read_long_csv(path: impl AsRef<Path>, design: &DesignConfig) -> Result<ChoiceDataset> {
    let table = read_long_table(File::open(path)?)?;
    build_design_matrix(&table, design)
}

/// Write records in the layout [`read_long_table`] expects. Numbers use the
/// shortest representation that parses back to the same value.
pub fn write_long_table<W: Write>(table: &LongTable, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = ID_COLUMNS.to_vec();
    header.extend(table.covariates.iter().map(|s| s.as_str()));
    w.write_record(&header)?;
    for row in &table.rows {
        let mut rec = vec![row.obs_id.clone(), row.alt.clone(), if row.chosen { "1" } else { "0" }.to_string()];
        rec.extend(row.values.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Draws of one chain as read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct DrawStore {
    pub names: Vec<String>,
    pub iters: Vec<usize>,
    /// One row per iteration, columns ordered as `names`.
    pub draws: Vec<Vec<f64>>,
}

/// `iter,param,value` rows, iteration-major, 17 significant digits.
pub fn write_draws_csv<W: Write>(chain: &ChainDraws, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["iter", "param", "value"])?;
    for (t, row) in chain.draws.iter().enumerate() {
        let iter = (chain.first_iter + t).to_string();
        for (name, v) in chain.names.iter().zip(row) {
            w.write_record([iter.as_str(), name.as_str(), format!("{v:.16e}").as_str()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_draws_csv<R: Read>(reader: R) -> Result<DrawStore> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["iter", "param", "value"] {
        return Err(McqrError::ingestion(1, "draw file header must be `iter,param,value`"));
    }
    let mut names: Vec<String> = Vec::new();
    let mut names_fixed = false;
    let mut iters: Vec<usize> = Vec::new();
    let mut draws: Vec<Vec<f64>> = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let line = idx + 2;
        let rec = rec.map_err(|e| McqrError::ingestion(line, e.to_string()))?;
        let iter: usize = rec[0]
            .parse()
            .map_err(|_| McqrError::ingestion(line, format!("bad iteration `{}`", &rec[0])))?;
        let value: f64 = rec[2]
            .parse()
            .map_err(|_| McqrError::ingestion(line, format!("bad value `{}`", &rec[2])))?;
        if iters.last() != Some(&iter) {
            if iters.last().is_some_and(|&last| iter <= last) {
                return Err(McqrError::ingestion(line, "iterations must increase"));
            }
            if let Some(prev) = draws.last() {
                if prev.len() != names.len() {
                    return Err(McqrError::ingestion(line, format!("iteration {} is incomplete", iters.last().unwrap())));
                }
                names_fixed = true;
            }
            iters.push(iter);
            draws.push(Vec::with_capacity(names.len()));
        }
        let row = draws.last_mut().expect("pushed above");
        let pos = row.len();
        if names_fixed {
            if names.get(pos).map(String::as_str) != Some(&rec[1]) {
                return Err(McqrError::ingestion(line, format!("unexpected parameter `{}`", &rec[1])));
            }
        } else {
            if names.iter().any(|n| n == &rec[1]) {
                return Err(McqrError::ingestion(line, format!("duplicate parameter `{}`", &rec[1])));
            }
            names.push(rec[1].to_string());
        }
        row.push(value);
    }
    if draws.last().is_some_and(|r| r.len() != names.len()) {
        return Err(McqrError::ingestion(0, "last iteration is incomplete"));
    }
    Ok(DrawStore { names, iters, draws })
}
