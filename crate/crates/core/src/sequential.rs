//! Loop-based reference versions of NSGA-III niching and MOEA/D.
//!
//! These follow the original per-individual formulations and serve as
//! correctness and quality baselines for the batched modules. They are not
//! tuned for speed.

use ndarray::{s, Array1, ArrayView2, Axis};
use rand::Rng;

use crate::error::{Error, Result};
use crate::moead::{neighbor_parents, MoeadState};
use crate::ndsort::ndsort_oracle;
use crate::nsga3::{associate, normalize};
use crate::problems::ProblemSpec;
use crate::rng::RngStream;
use crate::variation::{polynomial_mutation, sbx, VariationParams};

/// NSGA-III survivor indices with the original one-at-a-time niching:
/// pick a least-crowded direction at random, take its closest last-front
/// member if the niche is empty, otherwise a random one.
pub fn nsga3_select(f: ArrayView2<'_, f64>, refs: ArrayView2<'_, f64>, n: usize, rng: &RngStream) -> Result<Vec<usize>> {
    let total = f.nrows();
    if n == 0 || n > total {
        return Err(Error::invalid(format!("cannot select {n} of {total}")));
    }
    let rr = ndsort_oracle(f, n);
    let last = rr.last;
    let mut chosen: Vec<usize> = (0..total).filter(|&i| rr.ranks[i] < last).collect();
    let front: Vec<usize> = (0..total).filter(|&i| rr.ranks[i] == last).collect();
    if chosen.len() + front.len() == n {
        chosen.extend(front);
        chosen.sort_unstable();
        return Ok(chosen);
    }

    let mut masked = f.to_owned();
    for (mut row, &r) in masked.axis_iter_mut(Axis(0)).zip(&rr.ranks) {
        if r > last {
            row.fill(f64::NAN);
        }
    }
    let norm = normalize(masked.view())?;
    let assoc = associate(norm.values.view(), refs)?;

    let n_refs = refs.nrows();
    let mut rho = vec![0usize; n_refs];
    for &i in &chosen {
        rho[assoc.nearest[i]] += 1;
    }
    let mut available = vec![true; n_refs];
    let mut pool: Vec<Vec<usize>> = vec![Vec::new(); n_refs];
    for &i in &front {
        pool[assoc.nearest[i]].push(i);
    }

    let mut g = rng.generator();
    while chosen.len() < n {
        let min = (0..n_refs).filter(|&j| available[j]).map(|j| rho[j]).min();
        let Some(min) = min else {
            return Err(Error::Internal("ran out of reference directions".into()));
        };
        let ties: Vec<usize> = (0..n_refs).filter(|&j| available[j] && rho[j] == min).collect();
        let j = ties[g.gen_range(0..ties.len())];
        if pool[j].is_empty() {
            available[j] = false;
            continue;
        }
        let pos = if rho[j] == 0 {
            (0..pool[j].len())
                .min_by(|&a, &b| assoc.distance[pool[j][a]].total_cmp(&assoc.distance[pool[j][b]]))
                .unwrap()
        } else {
            g.gen_range(0..pool[j].len())
        };
        chosen.push(pool[j].swap_remove(pos));
        rho[j] += 1;
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// One MOEA/D generation processed subproblem by subproblem: each child
/// immediately updates the ideal point and its neighbours, so later
/// subproblems see earlier replacements.
pub fn moead_generation(state: &MoeadState, rng: &RngStream, problem: &ProblemSpec, params: &VariationParams) -> Result<MoeadState> {
    let n = state.len();
    let mut next = state.clone();
    let (p1, p2) = neighbor_parents(&rng.child(0), &state.neighbors)?;
    let w = state.weights.weights();
    for i in 0..n {
        let x1 = next.x.slice(s![p1[i]..p1[i] + 1, ..]).to_owned();
        let x2 = next.x.slice(s![p2[i]..p2[i] + 1, ..]).to_owned();
        let child_rng = rng.child(1).child(i as u64);
        let kids = sbx(&child_rng.child(0), x1.view(), x2.view(), params)?;
        let y = polynomial_mutation(&child_rng.child(1), kids.slice(s![..1, ..]), params)?;
        let fy: Array1<f64> = problem.evaluate(y.view())?.row(0).to_owned();
        for (z, &v) in next.z.iter_mut().zip(&fy) {
            *z = z.min(v);
        }
        for &j in state.neighbors.row(i) {
            let g_new = crate::moead::pbi(fy.view(), w.row(j), next.z.view(), next.theta, next.form)?;
            let g_old = crate::moead::pbi(next.f1.row(j), w.row(j), next.z.view(), next.theta, next.form)?;
            if g_new <= g_old {
                next.x.row_mut(j).assign(&y.row(0));
                next.f1.row_mut(j).assign(&fy);
            }
        }
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    use crate::nsga3::select_indices;
    use crate::reference::das_dennis;

    #[test]
    fn sequential_niching_returns_n_and_keeps_better_fronts() {
        for seed in 0..30 {
            let s = RngStream::new(seed);
            let f = s.child(0).uniform_matrix(60, 3);
            let refs = das_dennis(3, 6).unwrap();
            let idx = nsga3_select(f.view(), refs.weights(), 30, &s.child(1)).unwrap();
            assert_eq!(idx.len(), 30);
            let rr = ndsort_oracle(f.view(), 30);
            for i in 0..60 {
                if rr.ranks[i] < rr.last {
                    assert!(idx.contains(&i));
                }
                if rr.ranks[i] > rr.last {
                    assert!(!idx.contains(&i));
                }
            }
        }
    }

    #[test]
    fn exact_fit_agrees_with_batched() {
        let f = array![[0.0, 1.0], [1.0, 0.0], [0.5, 0.5], [1.0, 1.0], [2.0, 2.0]];
        let refs = das_dennis(2, 4).unwrap();
        assert_eq!(
            nsga3_select(f.view(), refs.weights(), 3, &RngStream::new(0)).unwrap(),
            select_indices(f.view(), refs.weights(), 3).unwrap()
        );
    }

    #[test]
    fn moead_generation_never_worsens_own_direction() {
        let problem = ProblemSpec::with_default_dim(crate::problems::Dtlz::Dtlz2, 3).unwrap();
        let w = das_dennis(3, 5).unwrap();
        let rng = RngStream::new(3);
        let st = MoeadState::initialize(&problem, w, 4, 5.0, &rng.child(0)).unwrap();
        let params = VariationParams::new(problem.lower(), problem.upper()).unwrap();
        let next = moead_generation(&st, &rng.child(1), &problem, &params).unwrap();
        let before = st.own_pbi(next.z.view());
        let after = next.own_pbi(next.z.view());
        for (a, b) in after.iter().zip(&before) {
            assert!(a <= b);
        }
    }
}
