//! Seeded generation loops with per-generation timing and indicators.

use std::time::{Duration, Instant};

use ndarray::{concatenate, Array1, Array2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Algorithm, IndicatorKind, RunConfig};
use crate::error::{Error, Result};
use crate::indicators::{eu, hv_indicator, igd, EuForm, Sense};
use crate::moead::{self, MoeadState, PbiForm};
use crate::problems::ProblemSpec;
use crate::reference::{das_dennis, divisions_for, DirectionSet};
use crate::rng::RngStream;
use crate::rvea::{apd_select_indices, ApdParams};
use crate::tensor::{col_max, col_min};
use crate::variation::{reproduce, VariationParams};
use crate::{hype, nsga3, sequential};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRow {
    /// 0 is the initial population.
    pub generation: usize,
    /// Wall time of the generation (selection only when so configured).
    pub time_s: f64,
    /// Wall time of environmental selection alone (survivor indices, not the row gather).
    pub selection_s: f64,
    pub igd: Option<f64>,
    pub hv: Option<f64>,
    pub eu: Option<f64>,
    /// Ideal point after the generation.
    pub ideal: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub generations_completed: usize,
    pub mean_generation_s: f64,
    pub mean_selection_s: f64,
    pub final_igd: Option<f64>,
    pub final_hv: Option<f64>,
    pub final_eu: Option<f64>,
    pub timed_out: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub config: RunConfig,
    pub repeat: usize,
    pub population: usize,
    pub dim: usize,
    pub hv_reference: Vec<f64>,
    pub version: String,
    pub platform: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub metadata: RunMetadata,
    pub rows: Vec<GenerationRow>,
    pub summary: RunSummary,
}

/// `(generation, igd, hv, eu, ideal)` for one row.
pub type TrajectoryPoint = (usize, Option<f64>, Option<f64>, Option<f64>, Vec<f64>);

impl RunRecord {
    /// Indicator and ideal-point trajectory, without wall times.
    pub fn trajectory(&self) -> Vec<TrajectoryPoint> {
        self.rows
            .iter()
            .map(|r| (r.generation, r.igd, r.hv, r.eu, r.ideal.clone()))
            .collect()
    }
}

pub fn platform() -> String {
    format!("{}-{} ({} threads)", std::env::consts::ARCH, std::env::consts::OS, rayon::current_num_threads())
}

/// Hypervolume reference used for the `hv` indicator: 1.1 × the front's columnwise max.
pub fn indicator_reference(front: &Array2<f64>) -> Array1<f64> {
    col_max(front.view()).mapv(|v| 1.1 * v.max(1e-12))
}

struct Indicators {
    kinds: Vec<IndicatorKind>,
    front: Array2<f64>,
    hv_ref: Array1<f64>,
    weights: DirectionSet,
    eu_form: EuForm,
}

impl Indicators {
    fn new(cfg: &RunConfig, problem: &ProblemSpec) -> Result<Self> {
        let front = problem.true_front(cfg.ref_front_size.max(problem.objectives))?;
        let hv_ref = indicator_reference(&front);
        let weights = das_dennis(problem.objectives, divisions_for(problem.objectives, 100)?)?;
        let eu_form = if cfg.eu_literal { EuForm::Literal } else { EuForm::Standard };
        Ok(Self { kinds: cfg.indicators.clone(), front, hv_ref, weights, eu_form })
    }

    fn measure(&self, f: &Array2<f64>) -> Result<(Option<f64>, Option<f64>, Option<f64>)> {
        let has = |k| self.kinds.contains(&k);
        let i = if has(IndicatorKind::Igd) { Some(igd(f.view(), self.front.view())?) } else { None };
        let h = if has(IndicatorKind::Hv) { Some(hv_indicator(f.view(), self.hv_ref.view())?.value) } else { None };
        let e = if has(IndicatorKind::Eu) { Some(eu(f.view(), &self.weights, Sense::Minimize, self.eu_form)?) } else { None };
        Ok((i, h, e))
    }
}

enum Engine {
    Nsga3 { x: Array2<f64>, f: Array2<f64>, refs: DirectionSet },
    Moead(MoeadState),
    Hype { x: Array2<f64>, f: Array2<f64> },
    Rvea { x: Array2<f64>, f: Array2<f64>, dirs: DirectionSet },
}

fn stack(a: &Array2<f64>, b: &Array2<f64>) -> Result<Array2<f64>> {
    concatenate(Axis(0), &[a.view(), b.view()]).map_err(|e| Error::Internal(e.to_string()))
}

impl Engine {
    fn init(cfg: &RunConfig, problem: &ProblemSpec, rng: &RngStream) -> Result<Self> {
        let n = cfg.population()?;
        let m = problem.objectives;
        let lower = problem.lower().to_vec();
        let upper = problem.upper().to_vec();
        let x = rng.uniform_in_box(n, &lower, &upper);
        let f = problem.evaluate(x.view())?;
        let h = cfg.lattice_divisions()?;
        Ok(match cfg.algorithm {
            Algorithm::Nsga3 => Engine::Nsga3 { x, f, refs: das_dennis(m, h)? },
            Algorithm::Hype => Engine::Hype { x, f },
            Algorithm::Rvea => Engine::Rvea { x, f, dirs: das_dennis(m, h)?.to_unit_norm() },
            Algorithm::Moead => {
                let t = cfg.neighborhood.unwrap_or_else(|| moead::default_neighborhood(n));
                let form = if cfg.pbi_literal { PbiForm::Literal } else { PbiForm::Normalized };
                Engine::Moead(MoeadState::new(x, f, das_dennis(m, h)?, t, cfg.theta)?.with_form(form))
            }
        })
    }

    fn objectives(&self) -> &Array2<f64> {
        match self {
            Engine::Nsga3 { f, .. } | Engine::Hype { f, .. } | Engine::Rvea { f, .. } => f,
            Engine::Moead(s) => &s.f1,
        }
    }

    /// MOEA/D carries its own ideal point; the others use the population minimum.
    fn ideal(&self) -> Vec<f64> {
        match self {
            Engine::Moead(s) => s.z.to_vec(),
            _ => col_min(self.objectives().view()).to_vec(),
        }
    }

    /// Advances one generation; returns the time spent in environmental selection.
    fn step(&mut self, cfg: &RunConfig, problem: &ProblemSpec, var: &VariationParams, gen: usize, rng: &RngStream) -> Result<Duration> {
        match self {
            Engine::Nsga3 { x, f, refs } => {
                let n = x.nrows();
                let o = reproduce(&rng.child(0), x.view(), n, var)?;
                let fo = problem.evaluate(o.view())?;
                let (xm, fm) = (stack(x, &o)?, stack(f, &fo)?);
                let t = Instant::now();
                let idx = if cfg.sequential {
                    sequential::nsga3_select(fm.view(), refs.weights(), n, &rng.child(1))?
                } else {
                    nsga3::survivors(fm.view(), refs.weights(), n, &rng.child(1))?
                };
                let sel = t.elapsed();
                *x = xm.select(Axis(0), &idx);
                *f = fm.select(Axis(0), &idx);
                Ok(sel)
            }
            Engine::Moead(state) => {
                if cfg.sequential {
                    let t = Instant::now();
                    *state = sequential::moead_generation(state, rng, problem, var)?;
                    return Ok(t.elapsed());
                }
                let o = moead::moead_offspring(state, &rng.child(0), var)?;
                let f2 = problem.evaluate(o.view())?;
                let t = Instant::now();
                *state = moead::select(state, o, f2)?;
                Ok(t.elapsed())
            }
            Engine::Hype { x, f } => {
                let n = x.nrows();
                let o = reproduce(&rng.child(0), x.view(), n, var)?;
                let fo = problem.evaluate(o.view())?;
                let (xm, fm) = (stack(x, &o)?, stack(f, &fo)?);
                let t = Instant::now();
                let v_ref = match &cfg.hv_ref {
                    Some(r) => Array1::from(r.clone()),
                    None => hype::default_reference(fm.view()),
                };
                let s = cfg.hv_samples.unwrap_or(10 * n);
                let idx = hype::select_indices(fm.view(), v_ref.view(), n, s, &rng.child(1))?;
                let sel = t.elapsed();
                *x = xm.select(Axis(0), &idx);
                *f = fm.select(Axis(0), &idx);
                Ok(sel)
            }
            Engine::Rvea { x, f, dirs } => {
                let n = dirs.len();
                // a single surviving elite still needs a mate
                let parents = if x.nrows() < 2 { stack(x, x)? } else { x.clone() };
                let o = reproduce(&rng.child(0), parents.view(), n, var)?;
                let fo = problem.evaluate(o.view())?;
                let (xm, fm) = (stack(x, &o)?, stack(f, &fo)?);
                let t = Instant::now();
                let params = ApdParams { alpha: cfg.alpha, t: gen, t_max: cfg.generations.max(gen) };
                let idx = apd_select_indices(fm.view(), dirs, &params)?.elites;
                let sel = t.elapsed();
                *x = xm.select(Axis(0), &idx);
                *f = fm.select(Axis(0), &idx);
                Ok(sel)
            }
        }
    }
}

/// One seeded run. Repeat `r` draws from stream `(seed, r)`.
pub fn run_single(cfg: &RunConfig, repeat: usize) -> Result<RunRecord> {
    cfg.validate()?;
    let problem = cfg.problem_spec()?;
    let var = cfg.variation(&problem)?;
    let root = RngStream::new(cfg.seed).child(repeat as u64);
    let indicators = Indicators::new(cfg, &problem)?;
    let mut engine = Engine::init(cfg, &problem, &root.named("init"))?;
    let population = engine.objectives().nrows();

    let mut rows = Vec::with_capacity(cfg.generations + 1);
    let row = |generation: usize, time_s: f64, selection_s: f64, engine: &Engine, measure: bool| -> Result<GenerationRow> {
        let f = engine.objectives();
        let (igd, hv, eu) = if measure { indicators.measure(f)? } else { (None, None, None) };
        Ok(GenerationRow { generation, time_s, selection_s, igd, hv, eu, ideal: engine.ideal() })
    };
    rows.push(row(0, 0.0, 0.0, &engine, true)?);

    let started = Instant::now();
    let mut timed_out = false;
    let gen_stream = root.named("generation");
    for g in 1..=cfg.generations {
        let t = Instant::now();
        let sel = engine.step(cfg, &problem, &var, g, &gen_stream.child(g as u64))?;
        let total = t.elapsed();
        let time_s = if cfg.time_selection_only { sel } else { total };
        let measure = g % cfg.indicator_every == 0 || g == cfg.generations;
        rows.push(row(g, time_s.as_secs_f64(), sel.as_secs_f64(), &engine, measure)?);
        if cfg.timeout_s.is_some_and(|limit| started.elapsed().as_secs_f64() > limit) && g < cfg.generations {
            timed_out = true;
            break;
        }
    }

    let timed: Vec<&GenerationRow> = rows.iter().filter(|r| r.generation > 0).collect();
    let mean = |sel: fn(&GenerationRow) -> f64| {
        if timed.is_empty() {
            0.0
        } else {
            timed.iter().map(|r| sel(r)).sum::<f64>() / timed.len() as f64
        }
    };
    let last = rows.last().expect("initial row present");
    let summary = RunSummary {
        generations_completed: last.generation,
        mean_generation_s: mean(|r| r.time_s),
        mean_selection_s: mean(|r| r.selection_s),
        final_igd: last.igd,
        final_hv: last.hv,
        final_eu: last.eu,
        timed_out,
    };
    let metadata = RunMetadata {
        config: cfg.clone(),
        repeat,
        population,
        dim: problem.dim,
        hv_reference: indicators.hv_ref.to_vec(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        platform: platform(),
    };
    Ok(RunRecord { metadata, rows, summary })
}

/// All repeats of `cfg`, run concurrently and returned in repeat order.
pub fn run(cfg: &RunConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    if cfg.repeats == 1 {
        return Ok(vec![run_single(cfg, 0)?]);
    }
    (0..cfg.repeats).into_par_iter().map(|r| run_single(cfg, r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(alg: &str) -> RunConfig {
        RunConfig::default()
            .set("algorithm", alg)
            .unwrap()
            .set("pop_size", "20")
            .unwrap()
            .set("generations", "4")
            .unwrap()
            .set("ref_front_size", "100")
            .unwrap()
    }

    #[test]
    fn zero_generations_records_initial_population_only() {
        let rec = run_single(&small("nsga3").set("generations", "0").unwrap(), 0).unwrap();
        assert_eq!(rec.rows.len(), 1);
        assert_eq!(rec.rows[0].generation, 0);
        assert!(rec.rows[0].igd.is_some() && rec.rows[0].hv.is_some());
        assert_eq!(rec.summary.generations_completed, 0);
    }

    #[test]
    fn every_algorithm_runs_and_is_deterministic() {
        for alg in ["nsga3", "moead", "hype", "rvea"] {
            let cfg = small(alg);
            let a = run_single(&cfg, 0).unwrap();
            let b = run_single(&cfg, 0).unwrap();
            assert_eq!(a.trajectory(), b.trajectory(), "{alg}");
            assert_eq!(a.rows.len(), 5);
            assert!(a.rows.iter().all(|r| r.time_s >= 0.0));
            let gens: Vec<usize> = a.rows.iter().map(|r| r.generation).collect();
            assert_eq!(gens, (0..=4).collect::<Vec<_>>());
        }
    }

    #[test]
    fn sequential_baselines_run() {
        for alg in ["nsga3", "moead"] {
            let rec = run_single(&small(alg).set("sequential", "true").unwrap(), 0).unwrap();
            assert_eq!(rec.summary.generations_completed, 4);
        }
    }

    #[test]
    fn repeats_use_distinct_streams() {
        let cfg = small("nsga3").set("repeats", "3").unwrap();
        let recs = run(&cfg).unwrap();
        assert_eq!(recs.iter().map(|r| r.metadata.repeat).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_ne!(recs[0].trajectory(), recs[1].trajectory());
        assert_eq!(recs[2].trajectory(), run_single(&cfg, 2).unwrap().trajectory());
    }

    #[test]
    fn ideal_point_monotone_for_moead() {
        let rec = run_single(&small("moead").set("problem", "dtlz1").unwrap(), 0).unwrap();
        for w in rec.rows.windows(2) {
            assert!(w[1].ideal.iter().zip(&w[0].ideal).all(|(a, b)| a <= b));
        }
    }

    #[test]
    fn indicator_cadence() {
        let rec = run_single(&small("nsga3").set("indicator_every", "3").unwrap(), 0).unwrap();
        let has: Vec<bool> = rec.rows.iter().map(|r| r.igd.is_some()).collect();
        assert_eq!(has, vec![true, false, false, true, true]);
    }

    #[test]
    fn timeout_stops_early() {
        let cfg = small("nsga3").set("generations", "50").unwrap().set("timeout_s", "1e-9").unwrap();
        let rec = run_single(&cfg, 0).unwrap();
        assert!(rec.summary.timed_out);
        assert_eq!(rec.rows.len(), 2);
    }
}
