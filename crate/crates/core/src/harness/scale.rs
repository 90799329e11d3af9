//! Doubling sweeps over population size or decision dimension.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::emit::fmt_f64;
use super::run::run_single;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleKind {
    Population,
    Dimension,
}

impl fmt::Display for ScaleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScaleKind::Population => "population",
            ScaleKind::Dimension => "dimension",
        })
    }
}

impl FromStr for ScaleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "population" | "pop" | "n" => Ok(ScaleKind::Population),
            "dimension" | "dim" | "d" => Ok(ScaleKind::Dimension),
            _ => Err(Error::Config(format!("unknown scaling kind '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleRow {
    /// Swept value (requested `n` or `d`).
    pub value: usize,
    pub population: usize,
    pub dim: usize,
    /// `None` when the cell timed out.
    pub mean_generation_s: Option<f64>,
    pub mean_selection_s: Option<f64>,
    pub timed_out: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleTable {
    pub kind: ScaleKind,
    pub rows: Vec<ScaleRow>,
}

impl ScaleTable {
    pub fn any_timed_out(&self) -> bool {
        self.rows.iter().any(|r| r.timed_out)
    }

    pub fn to_csv_string(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "NaN".to_string(), fmt_f64);
        let mut out = format!("# kind: {}\nvalue,population,dim,mean_generation_s,mean_selection_s\n", self.kind);
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.value,
                r.population,
                r.dim,
                opt(r.mean_generation_s),
                opt(r.mean_selection_s)
            ));
        }
        out
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("scale_{}.csv", self.kind)), self.to_csv_string())?;
        std::fs::write(dir.join(format!("scale_{}.json", self.kind)), serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

/// Runs `steps` cells, doubling `n` or `d` from `from`. Indicators are not
/// computed. A cell that exceeds `base.timeout_s` is recorded as missing
/// and the sweep continues.
pub fn scaling_experiment(kind: ScaleKind, base: &RunConfig, from: usize, steps: usize) -> Result<ScaleTable> {
    if steps == 0 {
        return Err(Error::Config("steps must be at least 1".into()));
    }
    if from == 0 {
        return Err(Error::Config("starting value must be positive".into()));
    }
    let mut rows = Vec::with_capacity(steps);
    for k in 0..steps {
        let value = from
            .checked_shl(k as u32)
            .filter(|v| v >> k == from)
            .ok_or_else(|| Error::Overflow(format!("{from} doubled {k} times")))?;
        let mut cfg = base.clone();
        cfg.repeats = 1;
        cfg.indicators.clear();
        match kind {
            ScaleKind::Population => cfg.pop_size = value,
            ScaleKind::Dimension => cfg.dim = Some(value),
        }
        cfg.validate()?;
        let rec = run_single(&cfg, 0)?;
        let timed_out = rec.summary.timed_out;
        rows.push(ScaleRow {
            value,
            population: rec.metadata.population,
            dim: rec.metadata.dim,
            mean_generation_s: (!timed_out).then_some(rec.summary.mean_generation_s),
            mean_selection_s: (!timed_out).then_some(rec.summary.mean_selection_s),
            timed_out,
        });
    }
    Ok(ScaleTable { kind, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> RunConfig {
        RunConfig::default()
            .set("problem", "dtlz1")
            .unwrap()
            .set("generations", "2")
            .unwrap()
            .set("pop_size", "16")
            .unwrap()
    }

    #[test]
    fn single_step_matches_run() {
        let t = scaling_experiment(ScaleKind::Population, &base(), 16, 1).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0].population, 16);
        assert!(t.rows[0].mean_generation_s.unwrap() >= 0.0);
    }

    #[test]
    fn dimension_doubles() {
        let t = scaling_experiment(ScaleKind::Dimension, &base(), 8, 3).unwrap();
        let dims: Vec<usize> = t.rows.iter().map(|r| r.dim).collect();
        assert_eq!(dims, vec![8, 16, 32]);
        assert!(t.to_csv_string().lines().nth(1).unwrap().starts_with("value,population,dim"));
    }

    #[test]
    fn timed_out_cells_are_missing_not_fatal() {
        let cfg = base().set("generations", "30").unwrap().set("timeout_s", "1e-9").unwrap();
        let t = scaling_experiment(ScaleKind::Population, &cfg, 16, 2).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert!(t.rows.iter().all(|r| r.timed_out && r.mean_generation_s.is_none()));
        assert!(t.any_timed_out());
    }

    #[test]
    fn bad_arguments() {
        assert!(scaling_experiment(ScaleKind::Population, &base(), 16, 0).is_err());
        assert!("sideways".parse::<ScaleKind>().is_err());
    }
}
