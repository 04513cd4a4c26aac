//! Power tables: the rows every experiment produces, with stable CSV and JSON
//! encodings.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::GridRow;

pub const CSV_HEADER: &str = "experiment,statistic,k,ell,effect,alpha,power,power_se,level,level_se,n_mc,seed";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub experiment: String,
    pub statistic: String,
    pub k: usize,
    pub ell: usize,
    /// Effect size or mixing weight of the alternative.
    pub effect: f64,
    pub alpha: f64,
    pub power: f64,
    pub power_se: f64,
    pub level: f64,
    pub level_se: f64,
    /// Trials behind each proportion.
    pub n_mc: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PowerTable {
    pub rows: Vec<PowerRow>,
}

impl PowerTable {
    pub fn from_grid(experiment: &str, alpha: f64, seed: u64, rows: &[GridRow]) -> Self {
        let rows = rows
            .iter()
            .map(|r| PowerRow {
                experiment: experiment.to_owned(),
                statistic: r.statistic.name().to_owned(),
                k: r.k,
                ell: r.ell,
                effect: r.effect,
                alpha,
                power: r.power.power,
                power_se: r.power.se,
                level: r.level.power,
                level_se: r.level.se,
                n_mc: r.power.n_reps,
                seed,
            })
            .collect();
        Self { rows }
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(CSV_HEADER.split(','))
            .and_then(|_| self.rows.iter().try_for_each(|r| w.serialize(r)))
            .map_err(csv_error)?;
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::InvalidInput(e.to_string()))
    }

    pub fn read_csv(input: impl Read) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header: Vec<String> = r.headers().map_err(csv_error)?.iter().map(str::to_owned).collect();
        if header.join(",") != CSV_HEADER {
            return Err(Error::Parse { line: 1, message: format!("unexpected header {}", header.join(",")) });
        }
        let rows = r.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_error)?;
        Ok(Self { rows })
    }

    pub fn write_json(&self, mut out: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, &self.rows).map_err(|e| Error::InvalidInput(e.to_string()))?;
        writeln!(out)?;
        Ok(())
    }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse { line, message: format!("{other:?}") },
    }
}
