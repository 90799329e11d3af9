//! Quality indicators: IGD, hypervolume, expected utility.

use ndarray::{Array1, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ndsort::non_dominated_indices;
use crate::reference::DirectionSet;
use crate::rng::RngStream;

/// Sample count for Monte-Carlo hypervolume beyond three objectives.
pub const HV_MC_SAMPLES: usize = 1_000_000;
const HV_MC_SEED: u64 = 0x4856_5f4d_435f_5345;

/// Mean distance from each reference point to its nearest solution.
pub fn igd(f: ArrayView2<'_, f64>, front: ArrayView2<'_, f64>) -> Result<f64> {
    if f.nrows() == 0 || front.nrows() == 0 {
        return Err(Error::invalid("igd needs non-empty solution and reference sets"));
    }
    if f.ncols() != front.ncols() {
        return Err(Error::shape(&[f.nrows(), front.ncols()], f.shape()));
    }
    let nearest: Vec<f64> = front
        .axis_iter(Axis(0))
        .into_par_iter()
        .map(|p| {
            f.rows()
                .into_iter()
                .map(|q| p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .collect();
    Ok(nearest.iter().sum::<f64>() / nearest.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hypervolume {
    pub value: f64,
    /// True when the value is a Monte-Carlo estimate.
    pub estimated: bool,
}

/// Hypervolume dominated by `f` and bounded by `reference`. Rows with any
/// coordinate at or beyond the reference are discarded first.
pub fn hv_indicator(f: ArrayView2<'_, f64>, reference: ArrayView1<'_, f64>) -> Result<Hypervolume> {
    let m = f.ncols();
    if reference.len() != m {
        return Err(Error::shape(&[m], &[reference.len()]));
    }
    let kept: Vec<Vec<f64>> = f
        .rows()
        .into_iter()
        .filter(|r| r.iter().zip(reference).all(|(a, b)| a < b))
        .map(|r| r.to_vec())
        .collect();
    if kept.is_empty() {
        return Ok(Hypervolume { value: 0.0, estimated: false });
    }
    if m <= 3 {
        return Ok(Hypervolume { value: hv_exact(kept, &reference.to_vec()), estimated: false });
    }
    Ok(Hypervolume { value: hv_monte_carlo(&kept, reference, HV_MC_SAMPLES), estimated: true })
}

/// Exact hypervolume by slicing along the last objective. Exponential in `m`.
pub fn hv_exact(points: Vec<Vec<f64>>, reference: &[f64]) -> f64 {
    let m = reference.len();
    let mut pts = points;
    if pts.is_empty() {
        return 0.0;
    }
    if m == 1 {
        let best = pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        return (reference[0] - best).max(0.0);
    }
    if m == 2 {
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        let mut area = 0.0;
        let mut ceiling = reference[1];
        for p in &pts {
            if p[1] < ceiling {
                area += (reference[0] - p[0]) * (ceiling - p[1]);
                ceiling = p[1];
            }
        }
        return area;
    }
    pts.sort_by(|a, b| a[m - 1].total_cmp(&b[m - 1]));
    let mut vol = 0.0;
    for i in 0..pts.len() {
        let lo = pts[i][m - 1];
        let hi = if i + 1 < pts.len() { pts[i + 1][m - 1] } else { reference[m - 1] };
        if hi <= lo {
            continue;
        }
        let slab: Vec<Vec<f64>> = pts[..=i].iter().map(|p| p[..m - 1].to_vec()).collect();
        vol += (hi - lo) * hv_exact(slab, &reference[..m - 1]);
    }
    vol
}

fn hv_monte_carlo(points: &[Vec<f64>], reference: ArrayView1<'_, f64>, samples: usize) -> f64 {
    let m = reference.len();
    let lo: Vec<f64> = (0..m).map(|c| points.iter().map(|p| p[c]).fold(f64::INFINITY, f64::min)).collect();
    let vol: f64 = (0..m).map(|c| reference[c] - lo[c]).product();
    let rng = RngStream::new(HV_MC_SEED);
    let u = rng.uniform_vec(samples * m);
    let hits: usize = u
        .par_chunks(m)
        .filter(|s| {
            points.iter().any(|p| (0..m).all(|c| p[c] <= lo[c] + s[c] * (reference[c] - lo[c])))
        })
        .count();
    vol * hits as f64 / samples as f64
}

/// Objective sense for utilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sense {
    /// `u = −f`.
    #[default]
    Minimize,
    /// `u = f`.
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EuForm {
    /// Mean over weights of the best weighted utility over solutions.
    #[default]
    Standard,
    /// Mean over solutions of the best weighted utility over weights.
    Literal,
}

/// Expected utility of `f` under the weight rows of `w`.
pub fn eu(f: ArrayView2<'_, f64>, w: &DirectionSet, sense: Sense, form: EuForm) -> Result<f64> {
    if f.nrows() == 0 {
        return Err(Error::invalid("eu needs at least one solution"));
    }
    if f.ncols() != w.objectives() {
        return Err(Error::shape(&[f.nrows(), w.objectives()], f.shape()));
    }
    let sign = match sense {
        Sense::Minimize => -1.0,
        Sense::Maximize => 1.0,
    };
    // utilities[j][i] = w_j · u(f_i)
    let util = w.weights().dot(&f.t()) * sign;
    let best: Array1<f64> = match form {
        EuForm::Standard => util.map_axis(Axis(1), |r| r.fold(f64::NEG_INFINITY, |a, &b| a.max(b))),
        EuForm::Literal => util.map_axis(Axis(0), |c| c.fold(f64::NEG_INFINITY, |a, &b| a.max(b))),
    };
    Ok(best.mean().unwrap_or(0.0))
}

/// Hypervolume of the non-dominated subset; same value, cheaper for large sets.
pub fn hv_of_front(f: ArrayView2<'_, f64>, reference: ArrayView1<'_, f64>) -> Result<Hypervolume> {
    let idx = non_dominated_indices(f);
    hv_indicator(f.select(Axis(0), &idx).view(), reference)
}
