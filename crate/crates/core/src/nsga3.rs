//! NSGA-III environmental selection on whole populations.
//!
//! Pipeline: rank → mask rows beyond the last front → normalize → associate
//! with reference directions → niche counts → batched niche filling →
//! rank repair → take the first `n` rows with rank below the last front.
//!
//! Ranks are signed here because niche selection promotes last-front
//! members to `last − 1`, which is `−1` when the last front is front 0.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2, ArrayView2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ndsort::rank_assign;
use crate::rng::RngStream;
use crate::tensor::{argmin, col_max, col_min, SENTINEL};

/// Off-axis weight used in the extreme-point scalarization.
const ASF_EPS: f64 = 1e-6;
const MAX_CONDITION: f64 = 1e8;
const MIN_INTERCEPT: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedObjectives {
    pub values: Array2<f64>,
    pub ideal: Array1<f64>,
    pub intercepts: Array1<f64>,
}

/// Row index minimizing the axis-`axis` achievement scalarization; NaN rows never win.
fn extreme_row(shifted: ArrayView2<'_, f64>, axis: usize) -> Option<usize> {
    let asf: Array1<f64> = shifted.map_axis(Axis(1), |row| {
        row.iter()
            .enumerate()
            .map(|(j, &v)| if j == axis { v } else { v / ASF_EPS })
            .fold(f64::NEG_INFINITY, |a, b| if b.is_nan() || a.is_nan() { f64::NAN } else { a.max(b) })
    });
    argmin(asf.view())
}

/// Intercepts of the hyperplane through the extreme rows of an ideal-shifted
/// objective matrix, or the columnwise maximum when that hyperplane is
/// degenerate.
pub fn intercepts(shifted: ArrayView2<'_, f64>) -> Array1<f64> {
    let m = shifted.ncols();
    let fallback = || col_max(shifted).mapv(|a| if a > MIN_INTERCEPT { a } else { MIN_INTERCEPT });
    let extremes: Option<Vec<usize>> = (0..m).map(|i| extreme_row(shifted, i)).collect();
    let Some(extremes) = extremes else {
        return fallback();
    };
    let e = DMatrix::from_fn(m, m, |i, j| shifted[[extremes[i], j]]);
    let sv = e.clone().svd(false, false).singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > 0.0) || smax / smin > MAX_CONDITION {
        return fallback();
    }
    let Some(b) = e.lu().solve(&DVector::from_element(m, 1.0)) else {
        return fallback();
    };
    let a: Array1<f64> = b.iter().map(|&v| 1.0 / v).collect();
    if a.iter().any(|&v| !v.is_finite() || v <= MIN_INTERCEPT) {
        return fallback();
    }
    a
}

/// Ideal-point shift and intercept scaling. NaN rows (masked-out fronts)
/// are ignored by every reduction and stay NaN in the output.
pub fn normalize(f: ArrayView2<'_, f64>) -> Result<NormalizedObjectives> {
    let ideal = col_min(f);
    if let Some(j) = ideal.iter().position(|v| v.is_nan()) {
        return Err(Error::invalid(format!("objective column {j} has no retained rows")));
    }
    let shifted = &f - &ideal.view().insert_axis(Axis(0));
    let a = intercepts(shifted.view());
    let values = &shifted / &a.view().insert_axis(Axis(0));
    Ok(NormalizedObjectives { values, ideal, intercepts: a })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssociationResult {
    /// Nearest reference direction per row.
    pub nearest: Vec<usize>,
    /// Perpendicular distance to that direction (`SENTINEL` for NaN rows).
    pub distance: Vec<f64>,
}

/// Perpendicular-distance matrix `‖f‖·sqrt(1 − cos²θ)` between rows and directions.
pub fn perpendicular_distances(fp: ArrayView2<'_, f64>, refs: ArrayView2<'_, f64>) -> Array2<f64> {
    let ref_norms: Vec<f64> = refs.rows().into_iter().map(|r| r.dot(&r).sqrt()).collect();
    let mut d = Array2::zeros((fp.nrows(), refs.nrows()));
    d.axis_iter_mut(Axis(0))
        .into_par_iter()
        .zip(fp.axis_iter(Axis(0)))
        .for_each(|(mut out, f)| {
            for (j, r) in refs.rows().into_iter().enumerate() {
                // ‖f‖·sin θ, taken as the norm of the projection residual
                let t = f.dot(&r) / (ref_norms[j] * ref_norms[j]);
                out[j] = f.iter().zip(r).map(|(a, b)| (a - t * b).powi(2)).sum::<f64>().sqrt();
            }
        });
    d
}

pub fn associate(fp: ArrayView2<'_, f64>, refs: ArrayView2<'_, f64>) -> Result<AssociationResult> {
    if fp.ncols() != refs.ncols() {
        return Err(Error::shape(&[fp.nrows(), refs.ncols()], fp.shape()));
    }
    let d = perpendicular_distances(fp, refs);
    let (nearest, distance) = d
        .axis_iter(Axis(0))
        .map(|row| match argmin(row) {
            Some(j) => (j, row[j]),
            None => (0, SENTINEL),
        })
        .unzip();
    Ok(AssociationResult { nearest, distance })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NicheState {
    /// Members with rank below the last front, per direction.
    pub rho: Vec<usize>,
    /// Last-front members, per direction.
    pub rho_last: Vec<usize>,
    /// Σ rho.
    pub selected: usize,
}

pub fn niche_counts(ranks: &[i64], nearest: &[usize], last: i64, n_refs: usize) -> Result<NicheState> {
    if ranks.len() != nearest.len() {
        return Err(Error::shape(&[ranks.len()], &[nearest.len()]));
    }
    let mut rho = vec![0usize; n_refs];
    let mut rho_last = vec![0usize; n_refs];
    for (&r, &p) in ranks.iter().zip(nearest) {
        if p >= n_refs {
            return Err(Error::invalid(format!("direction index {p} out of range")));
        }
        if r < last {
            rho[p] += 1;
        } else if r == last {
            rho_last[p] += 1;
        }
    }
    let selected = rho.iter().sum();
    Ok(NicheState { rho, rho_last, selected })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NicheSelection {
    pub ranks: Vec<i64>,
    /// Promoted individuals in promotion order.
    pub promoted: Vec<usize>,
    /// Number of individuals now ranked below the last front.
    pub selected: usize,
}

/// Batched filling of empty niches.
///
/// Each round, every direction with no selected member claims its nearest
/// unpromoted last-front member (masked distance matrix, argmin per
/// direction). An individual claimed twice goes to the lowest direction
/// index. Claims within a round are promoted in individual-index order.
/// Rounds repeat until no empty niche can be filled.
pub fn niche_select(
    state: &NicheState,
    ranks: &[i64],
    nearest: &[usize],
    distance: &[f64],
    last: i64,
) -> NicheSelection {
    let n_refs = state.rho.len();
    let mut ranks = ranks.to_vec();
    let mut rho = state.rho.clone();
    let mut promoted = Vec::new();
    loop {
        // q_j = argmin_i D'_{ji}, with D' = d where (π_i = j, r_i = l, ρ_j = 0), else ∞
        let mut best: Vec<Option<(f64, usize)>> = vec![None; n_refs];
        for (i, (&r, &j)) in ranks.iter().zip(nearest).enumerate() {
            if r != last || rho[j] != 0 {
                continue;
            }
            let d = distance[i];
            match best[j] {
                Some((bd, _)) if d >= bd => {}
                _ => best[j] = Some((d, i)),
            }
        }
        let mut claimed = vec![false; ranks.len()];
        let mut round: Vec<(usize, usize)> = Vec::new();
        for (j, pick) in best.iter().enumerate() {
            if let Some((_, i)) = *pick {
                if !claimed[i] {
                    claimed[i] = true;
                    round.push((i, j));
                }
            }
        }
        if round.is_empty() {
            break;
        }
        round.sort_unstable();
        for (i, j) in round {
            ranks[i] = last - 1;
            rho[j] += 1;
            promoted.push(i);
        }
    }
    let selected = state.selected + promoted.len();
    NicheSelection { ranks, promoted, selected }
}

/// Repairs the selected count: promotes the `n_dif` lowest-index remaining
/// last-front members when positive, demotes the `|n_dif|` most recently
/// promoted back to `last` when negative.
pub fn update_rank(ranks: &[i64], promoted: &[usize], n_dif: i64, last: i64) -> Result<Vec<i64>> {
    let mut ranks = ranks.to_vec();
    if n_dif > 0 {
        let remaining: Vec<usize> = (0..ranks.len()).filter(|&i| ranks[i] == last).collect();
        let need = n_dif as usize;
        if need > remaining.len() {
            return Err(Error::Internal(format!(
                "need {need} more individuals but only {} remain in the last front",
                remaining.len()
            )));
        }
        for &i in &remaining[..need] {
            ranks[i] = last - 1;
        }
    } else if n_dif < 0 {
        let drop = n_dif.unsigned_abs() as usize;
        if drop > promoted.len() {
            return Err(Error::Internal(format!(
                "over-selected by {drop} but only {} were promoted",
                promoted.len()
            )));
        }
        for &i in &promoted[promoted.len() - drop..] {
            ranks[i] = last;
        }
    }
    Ok(ranks)
}

/// Indices of the `n` survivors of `f`, in ascending index order.
///
/// The caller is responsible for shuffling; index order is used for every
/// tie-break.
pub fn select_indices(f: ArrayView2<'_, f64>, refs: ArrayView2<'_, f64>, n: usize) -> Result<Vec<usize>> {
    let rr = rank_assign(f, n)?;
    let last = rr.last as i64;
    let ranks: Vec<i64> = rr.ranks.iter().map(|&r| r as i64).collect();
    let through_last: Vec<usize> = (0..ranks.len()).filter(|&i| ranks[i] <= last).collect();
    if through_last.len() == n {
        return Ok(through_last);
    }

    let mut masked = f.to_owned();
    for (mut row, &r) in masked.axis_iter_mut(Axis(0)).zip(&ranks) {
        if r > last {
            row.fill(f64::NAN);
        }
    }
    let norm = normalize(masked.view())?;
    let assoc = associate(norm.values.view(), refs)?;
    let state = niche_counts(&ranks, &assoc.nearest, last, refs.nrows())?;
    let sel = niche_select(&state, &ranks, &assoc.nearest, &assoc.distance, last);
    let n_dif = n as i64 - sel.selected as i64;
    let ranks = update_rank(&sel.ranks, &sel.promoted, n_dif, last)?;

    let chosen: Vec<usize> = (0..ranks.len()).filter(|&i| ranks[i] < last).collect();
    if chosen.len() != n {
        return Err(Error::Internal(format!("selected {} rows, expected {n}", chosen.len())));
    }
    Ok(chosen)
}

/// Shuffles the merged population with `rng`, then selects `n` survivors.
pub fn environmental_selection(
    x: ArrayView2<'_, f64>,
    f: ArrayView2<'_, f64>,
    refs: ArrayView2<'_, f64>,
    n: usize,
    rng: &RngStream,
) -> Result<(Array2<f64>, Array2<f64>)> {
    if x.nrows() != f.nrows() {
        return Err(Error::shape(&[f.nrows()], &[x.nrows()]));
    }
    let rows = survivors(f, refs, n, rng)?;
    Ok((x.select(Axis(0), &rows), f.select(Axis(0), &rows)))
}

/// Row indices chosen by [`environmental_selection`], in shuffled order.
pub fn survivors(f: ArrayView2<'_, f64>, refs: ArrayView2<'_, f64>, n: usize, rng: &RngStream) -> Result<Vec<usize>> {
    let perm = rng.permutation(f.nrows());
    let shuffled = f.select(Axis(0), &perm);
    let picked = select_indices(shuffled.view(), refs, n)?;
    Ok(picked.iter().map(|&i| perm[i]).collect())
}
