//! CSV and JSON output for run records.
//!
//! CSV files start with `# key: value` metadata lines followed by the
//! columns `generation,time_s,igd,hv`. Floats are written with 17
//! significant digits so they parse back to the same bits; indicators that
//! were not computed are written as `NaN`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::run::RunRecord;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "generation,time_s,igd,hv";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    Json,
}

/// One parsed CSV data row.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
pub struct CsvRow {
    pub generation: usize,
    pub time_s: f64,
    pub igd: Option<f64>,
    pub hv: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRecord {
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<CsvRow>,
}

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NaN".to_string(), fmt_f64)
}

fn parse_opt(s: &str) -> Result<Option<f64>> {
    let v: f64 = s.trim().parse().map_err(|_| Error::Config(format!("bad number '{s}'")))?;
    Ok((!v.is_nan()).then_some(v))
}

pub fn to_csv_string(record: &RunRecord) -> Result<String> {
    let md = &record.metadata;
    let mut out = String::new();
    out.push_str(&format!("# version: {}\n", md.version));
    out.push_str(&format!("# platform: {}\n", md.platform));
    out.push_str(&format!("# algorithm: {}\n", md.config.algorithm));
    out.push_str(&format!("# problem: {}\n", md.config.problem));
    out.push_str(&format!("# population: {}\n", md.population));
    out.push_str(&format!("# dim: {}\n", md.dim));
    out.push_str(&format!("# seed: {}\n", md.config.seed));
    out.push_str(&format!("# repeat: {}\n", md.repeat));
    out.push_str(&format!("# config: {}\n", serde_json::to_string(&md.config)?));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &record.rows {
        out.push_str(&format!("{},{},{},{}\n", r.generation, fmt_f64(r.time_s), fmt_opt(r.igd), fmt_opt(r.hv)));
    }
    Ok(out)
}

pub fn parse_csv(text: &str) -> Result<CsvRecord> {
    let metadata = text
        .lines()
        .filter_map(|l| l.strip_prefix('#'))
        .filter_map(|l| l.split_once(':'))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect();
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::Config(format!("unexpected CSV header '{}'", header.join(","))));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        if rec.len() != 4 {
            return Err(Error::Config(format!("expected 4 columns, found {}", rec.len())));
        }
        rows.push(CsvRow {
            generation: rec[0].trim().parse().map_err(|_| Error::Config(format!("bad generation '{}'", &rec[0])))?,
            time_s: rec[1].trim().parse().map_err(|_| Error::Config(format!("bad time '{}'", &rec[1])))?,
            igd: parse_opt(&rec[2])?,
            hv: parse_opt(&rec[3])?,
        });
    }
    Ok(CsvRecord { metadata, rows })
}

pub fn read_csv(path: &Path) -> Result<CsvRecord> {
    parse_csv(&fs::read_to_string(path)?)
}

pub fn read_json(path: &Path) -> Result<RunRecord> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Writes `record` to `path` in `format`, creating parent directories.
pub fn emit(record: &RunRecord, format: EmitFormat, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let text = match format {
        EmitFormat::Csv => to_csv_string(record)?,
        EmitFormat::Json => serde_json::to_string_pretty(record)?,
    };
    fs::File::create(path)?.write_all(text.as_bytes())?;
    Ok(())
}

/// Base file name for a record: `{algorithm}_{problem}_m{m}_seed{seed}_r{repeat}`.
pub fn record_stem(record: &RunRecord) -> String {
    let c = &record.metadata.config;
    format!("{}_{}_m{}_seed{}_r{}", c.algorithm, c.problem, c.objectives, c.seed, record.metadata.repeat)
}

/// CSV and JSON for every record under `dir`; returns the written paths.
pub fn write_records(records: &[RunRecord], dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for r in records {
        let stem = record_stem(r);
        for (fmt, ext) in [(EmitFormat::Csv, "csv"), (EmitFormat::Json, "json")] {
            let p = dir.join(format!("{stem}.{ext}"));
            emit(r, fmt, &p)?;
            paths.push(p);
        }
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::RunConfig;
    use crate::harness::run::run_single;

    fn record() -> RunRecord {
        let cfg = RunConfig::default()
            .set("pop_size", "12")
            .unwrap()
            .set("generations", "3")
            .unwrap()
            .set("ref_front_size", "50")
            .unwrap()
            .set("indicator_every", "2")
            .unwrap();
        run_single(&cfg, 0).unwrap()
    }

    #[test]
    fn csv_round_trips_bits() {
        let rec = record();
        let parsed = parse_csv(&to_csv_string(&rec).unwrap()).unwrap();
        assert_eq!(parsed.rows.len(), rec.rows.len());
        for (a, b) in parsed.rows.iter().zip(&rec.rows) {
            assert_eq!(a.generation, b.generation);
            assert_eq!(a.time_s.to_bits(), b.time_s.to_bits());
            assert_eq!(a.igd.map(f64::to_bits), b.igd.map(f64::to_bits));
            assert_eq!(a.hv.map(f64::to_bits), b.hv.map(f64::to_bits));
        }
        assert!(parsed.metadata.iter().any(|(k, v)| k == "algorithm" && v == "nsga3"));
    }

    #[test]
    fn header_is_exact() {
        let text = to_csv_string(&record()).unwrap();
        let first_data = text.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(first_data, "generation,time_s,igd,hv");
        assert!(parse_csv("a,b\n1,2\n").is_err());
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let rec = record();
        let paths = write_records(std::slice::from_ref(&rec), dir.path()).unwrap();
        assert_eq!(paths.len(), 2);
        let back = read_json(&paths[1]).unwrap();
        assert_eq!(back, rec);
        let csv = read_csv(&paths[0]).unwrap();
        assert_eq!(csv.rows.len(), rec.rows.len());
    }

    #[test]
    fn extreme_values_survive() {
        for v in [f64::MIN_POSITIVE, 1.0 / 3.0, 123456789.123456789, 5e-324, f64::MAX] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }
}
