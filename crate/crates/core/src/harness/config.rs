//! Run configuration: defaults, `key=value` or JSON files, and overrides.
//!
//! Precedence, lowest first: built-in defaults, config file, explicit
//! overrides (the CLI flags).

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::problems::{Dtlz, ProblemSpec};
use crate::reference::{divisions_for, lattice_size};
use crate::variation::VariationParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    #[default]
    Nsga3,
    Moead,
    Hype,
    Rvea,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Nsga3 => "nsga3",
            Algorithm::Moead => "moead",
            Algorithm::Hype => "hype",
            Algorithm::Rvea => "rvea",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_', '/'], "").as_str() {
            "nsga3" | "nsgaiii" => Ok(Algorithm::Nsga3),
            "moead" => Ok(Algorithm::Moead),
            "hype" => Ok(Algorithm::Hype),
            "rvea" => Ok(Algorithm::Rvea),
            _ => Err(Error::Config(format!("unknown algorithm '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndicatorKind {
    Igd,
    Hv,
    Eu,
}

impl FromStr for IndicatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "igd" => Ok(IndicatorKind::Igd),
            "hv" => Ok(IndicatorKind::Hv),
            "eu" => Ok(IndicatorKind::Eu),
            _ => Err(Error::Config(format!("unknown indicator '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub problem: Dtlz,
    /// Decision dimension; the problem's canonical value when absent.
    pub dim: Option<usize>,
    pub objectives: usize,
    /// Requested population size. MOEA/D and RVEA round up to the
    /// smallest simplex lattice with at least this many directions.
    pub pop_size: usize,
    pub generations: usize,
    pub seed: u64,
    pub repeats: usize,
    /// PBI penalty.
    pub theta: f64,
    /// MOEA/D neighbourhood size `T`.
    pub neighborhood: Option<usize>,
    /// HypE samples per selection (default `10·n`).
    pub hv_samples: Option<usize>,
    /// HypE sampling reference point; automatic when absent.
    pub hv_ref: Option<Vec<f64>>,
    /// RVEA penalty exponent.
    pub alpha: f64,
    pub eta_c: f64,
    pub eta_m: f64,
    /// Per-gene mutation probability (default `1/d`).
    pub pm: Option<f64>,
    /// Swap each SBX child gene pair with probability 0.5.
    pub swap_genes: bool,
    /// Lattice divisions `H` for the direction set.
    pub divisions: Option<usize>,
    pub indicators: Vec<IndicatorKind>,
    /// Indicators are computed every `k` generations (and always at the end).
    pub indicator_every: usize,
    pub ref_front_size: usize,
    pub time_selection_only: bool,
    /// Use the loop-based baselines (NSGA-III and MOEA/D only).
    pub sequential: bool,
    /// MOEA/D: PBI orthogonal distance without direction normalization.
    pub pbi_literal: bool,
    /// EU averaged over solutions instead of over weights.
    pub eu_literal: bool,
    /// Per-run wall-clock limit in seconds.
    pub timeout_s: Option<f64>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Nsga3,
            problem: Dtlz::Dtlz2,
            dim: None,
            objectives: 3,
            pop_size: 91,
            generations: 100,
            seed: 42,
            repeats: 1,
            theta: crate::moead::DEFAULT_THETA,
            neighborhood: None,
            hv_samples: None,
            hv_ref: None,
            alpha: crate::rvea::DEFAULT_ALPHA,
            eta_c: 20.0,
            eta_m: 20.0,
            pm: None,
            swap_genes: false,
            divisions: None,
            indicators: vec![IndicatorKind::Igd, IndicatorKind::Hv],
            indicator_every: 1,
            ref_front_size: 1000,
            time_selection_only: false,
            sequential: false,
            pbi_literal: false,
            eu_literal: false,
            timeout_s: None,
            out: None,
        }
    }
}

/// Parses one `key=value` right-hand side into JSON.
fn kv_value(key: &str, raw: &str) -> Value {
    let raw = raw.trim();
    if key == "hv_ref" && raw.eq_ignore_ascii_case("auto") {
        return Value::Null;
    }
    if let Ok(v) = serde_json::from_str::<Value>(raw) {
        if key == "indicators" && !v.is_array() {
            return Value::Array(vec![v]);
        }
        if key != "hv_ref" || v.is_array() {
            return v;
        }
        return Value::Array(vec![v]);
    }
    if raw.contains(',') || key == "indicators" || key == "hv_ref" {
        return Value::Array(
            raw.split(',')
                .map(|p| serde_json::from_str(p.trim()).unwrap_or_else(|_| Value::String(p.trim().to_string())))
                .collect(),
        );
    }
    Value::String(raw.to_string())
}

fn normalize_key(k: &str) -> String {
    k.trim().trim_start_matches("--").replace('-', "_")
}

/// Flat `key=value` lines; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<Map<String, Value>> {
    let mut map = Map::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value", no + 1)))?;
        let key = normalize_key(k);
        map.insert(key.clone(), kv_value(&key, v));
    }
    Ok(map)
}

impl RunConfig {
    /// Defaults overlaid with `overrides`.
    pub fn from_map(overrides: Map<String, Value>) -> Result<Self> {
        Self::default().with_overrides(overrides)
    }

    pub fn with_overrides(&self, overrides: Map<String, Value>) -> Result<Self> {
        let mut base = match serde_json::to_value(self)? {
            Value::Object(m) => m,
            _ => unreachable!("config serializes to an object"),
        };
        for (k, v) in overrides {
            base.insert(normalize_key(&k), v);
        }
        serde_json::from_value(Value::Object(base)).map_err(|e| Error::Config(e.to_string()))
    }

    /// Applies one textual override, as given on a command line.
    pub fn set(&self, key: &str, value: &str) -> Result<Self> {
        let key = normalize_key(key);
        let mut m = Map::new();
        m.insert(key.clone(), kv_value(&key, value));
        self.with_overrides(m)
    }

    /// JSON when the first non-blank character is `{`, else `key=value`.
    pub fn parse(text: &str) -> Result<Self> {
        let map = if text.trim_start().starts_with('{') {
            match serde_json::from_str::<Value>(text).map_err(|e| Error::Config(e.to_string()))? {
                Value::Object(m) => m,
                _ => return Err(Error::Config("config JSON must be an object".into())),
            }
        } else {
            parse_key_values(text)?
        };
        let cfg = Self::from_map(map)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.objectives < 2 {
            return bad("objectives must be at least 2".into());
        }
        if self.pop_size < 2 {
            return bad("pop_size must be at least 2".into());
        }
        if self.repeats == 0 || self.indicator_every == 0 || self.ref_front_size == 0 {
            return bad("repeats, indicator_every and ref_front_size must be positive".into());
        }
        if !(self.theta >= 0.0 && self.alpha > 0.0 && self.eta_c > 0.0 && self.eta_m > 0.0) {
            return bad("theta must be non-negative; alpha, eta_c, eta_m positive".into());
        }
        if let Some(pm) = self.pm {
            if !(0.0..=1.0).contains(&pm) {
                return bad(format!("pm = {pm} outside [0, 1]"));
            }
        }
        if matches!(self.divisions, Some(0)) || matches!(self.hv_samples, Some(0)) || matches!(self.dim, Some(0)) {
            return bad("divisions, hv_samples and dim must be positive".into());
        }
        if let Some(t) = self.timeout_s {
            if !(t > 0.0) {
                return bad("timeout_s must be positive".into());
            }
        }
        if let Some(r) = &self.hv_ref {
            if r.len() != self.objectives {
                return bad(format!("hv_ref has {} entries, expected {}", r.len(), self.objectives));
            }
        }
        if self.sequential && !matches!(self.algorithm, Algorithm::Nsga3 | Algorithm::Moead) {
            return bad(format!("no sequential baseline for {}", self.algorithm));
        }
        self.problem_spec()?;
        if matches!(self.algorithm, Algorithm::Moead) {
            let n = self.population()?;
            let t = self.neighborhood.unwrap_or_else(|| crate::moead::default_neighborhood(n));
            if t < 2 || t > n {
                return bad(format!("neighborhood {t} outside 2..={n}"));
            }
        }
        Ok(())
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        let dim = self.dim.unwrap_or_else(|| self.problem.default_dim(self.objectives));
        ProblemSpec::new(self.problem, dim, self.objectives).map_err(|e| Error::Config(e.to_string()))
    }

    /// Lattice divisions: explicit, or the smallest lattice covering `pop_size`.
    pub fn lattice_divisions(&self) -> Result<usize> {
        match self.divisions {
            Some(h) => Ok(h),
            None => divisions_for(self.objectives, self.pop_size),
        }
    }

    /// Population size actually used by the algorithm.
    pub fn population(&self) -> Result<usize> {
        match self.algorithm {
            Algorithm::Nsga3 | Algorithm::Hype => Ok(self.pop_size),
            Algorithm::Moead | Algorithm::Rvea => lattice_size(self.objectives, self.lattice_divisions()?),
        }
    }

    pub fn variation(&self, problem: &ProblemSpec) -> Result<VariationParams> {
        let mut v = VariationParams::new(problem.lower(), problem.upper())?;
        v.eta_c = self.eta_c;
        v.eta_m = self.eta_m;
        v.p_m = self.pm;
        v.swap_genes = self.swap_genes;
        v.validate()?;
        Ok(v)
    }
}
