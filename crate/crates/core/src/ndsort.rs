//! Non-dominated sorting by dominance-matrix peeling.
//!
//! The N×N dominance matrix is built in one data-parallel pass. Fronts are
//! then peeled off by repeatedly taking the rows whose remaining
//! dominated-by count is zero and subtracting their dominance rows from the
//! counts. The number of peeling iterations is data dependent (one per
//! front), everything inside an iteration is whole-population work.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Ranks (0 = best front) plus the rank `last` of the n-th best individual.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankResult {
    pub ranks: Vec<usize>,
    pub last: usize,
}

impl RankResult {
    fn from_ranks(ranks: Vec<usize>, n: usize) -> Self {
        let mut sorted = ranks.clone();
        sorted.sort_unstable();
        let last = sorted.get(n.saturating_sub(1)).copied().unwrap_or(0);
        Self { ranks, last }
    }

    pub fn max_rank(&self) -> usize {
        self.ranks.iter().copied().max().unwrap_or(0)
    }

    /// Number of individuals with rank strictly below `last`.
    pub fn count_better_than_last(&self) -> usize {
        self.ranks.iter().filter(|&&r| r < self.last).count()
    }
}

/// `a ≺ b` under minimization.
#[inline]
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

fn check_finite(f: ArrayView2<'_, f64>) -> Result<()> {
    for (i, row) in f.rows().into_iter().enumerate() {
        if row.iter().any(|v| v.is_nan()) {
            return Err(Error::NonFinite { row: i });
        }
    }
    Ok(())
}

/// `D[i, j] = F_i ≺ F_j` (the broadcast `(F_i <= F_j).all() & (F_i < F_j).any()`).
pub fn dominance_matrix(f: ArrayView2<'_, f64>) -> Result<Array2<bool>> {
    check_finite(f)?;
    let n = f.nrows();
    let f = f.as_standard_layout();
    let m = f.ncols();
    let flat = f.as_slice().expect("standard layout");
    let mut d = Array2::from_elem((n, n), false);
    d.axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut row)| {
            let fi = &flat[i * m..(i + 1) * m];
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = dominates(fi, &flat[j * m..(j + 1) * m]);
            }
        });
    Ok(d)
}

/// Column sums of `D`: how many rows dominate each row.
fn dominated_counts(d: &Array2<bool>) -> Array1<i64> {
    let n = d.nrows();
    (0..n)
        .into_par_iter()
        .map(|j| d.column(j).iter().filter(|&&b| b).count() as i64)
        .collect::<Vec<_>>()
        .into()
}

const COL_CHUNK: usize = 256;

/// Iterative front peeling; returns ranks and the number of iterations.
pub fn rank_peeling(d: &Array2<bool>) -> Result<(Vec<usize>, usize)> {
    let n = d.nrows();
    let mut count = dominated_counts(d);
    let mut rank = vec![0usize; n];
    let mut front: Vec<bool> = count.iter().map(|&c| c == 0).collect();
    let mut k = 0usize;
    while front.iter().any(|&p| p) {
        if k >= n {
            return Err(Error::Internal("front peeling exceeded N iterations".into()));
        }
        // r = p·k + (1 − p)⊙r
        for (r, &p) in rank.iter_mut().zip(&front) {
            if p {
                *r = k;
            }
        }
        // d_j = Σ_i p_i D_ij, restricted to the rows in the current front
        let active: Vec<usize> = (0..n).filter(|&i| front[i]).collect();
        let mut removed = vec![0i64; n];
        removed
            .par_chunks_mut(COL_CHUNK)
            .enumerate()
            .for_each(|(c, chunk)| {
                let start = c * COL_CHUNK;
                for &i in &active {
                    let row = d.row(i);
                    for (off, slot) in chunk.iter_mut().enumerate() {
                        if row[start + off] {
                            *slot += 1;
                        }
                    }
                }
            });
        // c = c − d − p; ranked rows drop to −1 and never re-enter
        for j in 0..n {
            count[j] -= removed[j] + i64::from(front[j]);
        }
        front = count.iter().map(|&c| c == 0).collect();
        k += 1;
    }
    Ok((rank, k))
}

/// Non-domination ranks of all rows of `f` and the last rank needed to fill `n` slots.
pub fn rank_assign(f: ArrayView2<'_, f64>, n: usize) -> Result<RankResult> {
    let total = f.nrows();
    if n == 0 || n > total {
        return Err(Error::invalid(format!("need 1 <= n <= {total}, got n = {n}")));
    }
    let d = dominance_matrix(f)?;
    let (ranks, _) = rank_peeling(&d)?;
    Ok(RankResult::from_ranks(ranks, n))
}

/// Sequential domination-count sort with explicit dominated sets.
///
/// Reference implementation for tests; quadratic in memory of the
/// dominated sets and single-threaded on purpose.
pub fn ndsort_oracle(f: ArrayView2<'_, f64>, n: usize) -> RankResult {
    let total = f.nrows();
    let rows: Vec<Vec<f64>> = f.rows().into_iter().map(|r| r.to_vec()).collect();
    let mut dominated_by = vec![0usize; total];
    let mut dominated_sets: Vec<Vec<usize>> = vec![Vec::new(); total];
    let mut fronts: Vec<Vec<usize>> = vec![Vec::new()];
    for i in 0..total {
        for j in 0..total {
            if i == j {
                continue;
            }
            if dominates(&rows[i], &rows[j]) {
                dominated_sets[i].push(j);
            } else if dominates(&rows[j], &rows[i]) {
                dominated_by[i] += 1;
            }
        }
        if dominated_by[i] == 0 {
            fronts[0].push(i);
        }
    }
    let mut rank = vec![0usize; total];
    let mut k = 0;
    while !fronts[k].is_empty() {
        let mut next = Vec::new();
        for &i in &fronts[k] {
            rank[i] = k;
            for &j in &dominated_sets[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        fronts.push(next);
        k += 1;
    }
    RankResult::from_ranks(rank, n.clamp(1, total.max(1)))
}

/// Indices of the rows not dominated by any other row.
pub fn non_dominated_indices(f: ArrayView2<'_, f64>) -> Vec<usize> {
    let f = f.as_standard_layout();
    let m = f.ncols();
    let flat = f.as_slice().expect("standard layout");
    let n = f.nrows();
    (0..n)
        .into_par_iter()
        .filter(|&j| {
            let fj = &flat[j * m..(j + 1) * m];
            !(0..n).any(|i| i != j && dominates(&flat[i * m..(i + 1) * m], fj))
        })
        .collect()
}
