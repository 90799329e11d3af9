//! Batched MOEA/D: every offspring is compared against its whole
//! neighbourhood at once, the results are stored in an `n × n` index
//! matrix, and each direction then picks its elite from one column of
//! that matrix.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::problems::ProblemSpec;
use crate::reference::{neighbors, DirectionSet, NeighborTable};
use crate::rng::RngStream;
use crate::tensor::{argmin, col_min};
use crate::variation::{polynomial_mutation, polynomial_mutation_with_draws, sbx, sbx_with_draws, VariationParams};

pub const DEFAULT_THETA: f64 = 5.0;

/// Orthogonal-distance convention for PBI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PbiForm {
    /// `d₂ = ‖(f − z) − d₁·w/‖w‖‖`.
    #[default]
    Normalized,
    /// `d₂ = ‖(f − z) − d₁·w‖`, with `w` used as given.
    Literal,
}

/// `max(2, ⌈0.1·n⌉)`, capped at 20 and at `n`.
pub fn default_neighborhood(n: usize) -> usize {
    (n.div_ceil(10)).clamp(2, 20).min(n)
}

pub fn pbi(f: ArrayView1<'_, f64>, w: ArrayView1<'_, f64>, z: ArrayView1<'_, f64>, theta: f64, form: PbiForm) -> Result<f64> {
    let wn = w.dot(&w).sqrt();
    if !(wn > 0.0) {
        return Err(Error::invalid("PBI weight vector has zero norm"));
    }
    Ok(pbi_unchecked(f, w, wn, z, theta, form))
}

fn pbi_unchecked(f: ArrayView1<'_, f64>, w: ArrayView1<'_, f64>, wn: f64, z: ArrayView1<'_, f64>, theta: f64, form: PbiForm) -> f64 {
    let mut dot = 0.0;
    for k in 0..f.len() {
        dot += (f[k] - z[k]) * w[k];
    }
    let d1 = dot.abs() / wn;
    let scale = match form {
        PbiForm::Normalized => d1 / wn,
        PbiForm::Literal => d1,
    };
    let mut d2 = 0.0;
    for k in 0..f.len() {
        let r = f[k] - z[k] - scale * w[k];
        d2 += r * r;
    }
    d1 + theta * d2.sqrt()
}

#[derive(Debug, Clone)]
pub struct MoeadState {
    pub x: Array2<f64>,
    pub f1: Array2<f64>,
    pub z: Array1<f64>,
    pub weights: DirectionSet,
    pub neighbors: NeighborTable,
    pub theta: f64,
    pub form: PbiForm,
}

impl MoeadState {
    /// One individual per weight row; `z` starts at the columnwise minimum of `f1`.
    pub fn new(x: Array2<f64>, f1: Array2<f64>, weights: DirectionSet, t: usize, theta: f64) -> Result<Self> {
        let n = weights.len();
        if x.nrows() != n || f1.nrows() != n {
            return Err(Error::shape(&[n], &[x.nrows()]));
        }
        if f1.ncols() != weights.objectives() {
            return Err(Error::shape(&[n, weights.objectives()], f1.shape()));
        }
        if !(theta >= 0.0) {
            return Err(Error::invalid("theta must be non-negative"));
        }
        let neighbors = neighbors(&weights, t)?;
        let z = col_min(f1.view());
        Ok(Self { x, f1, z, weights, neighbors, theta, form: PbiForm::default() })
    }

    /// Uniform initial population evaluated on `problem`.
    pub fn initialize(problem: &ProblemSpec, weights: DirectionSet, t: usize, theta: f64, rng: &RngStream) -> Result<Self> {
        let x = rng.uniform_in_box(weights.len(), problem.lower().as_slice().unwrap(), problem.upper().as_slice().unwrap());
        let f = problem.evaluate(x.view())?;
        Self::new(x, f, weights, t, theta)
    }

    pub fn with_form(mut self, form: PbiForm) -> Self {
        self.form = form;
        self
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.nrows() == 0
    }

    /// PBI of every row against its own direction.
    pub fn own_pbi(&self, z: ArrayView1<'_, f64>) -> Array1<f64> {
        let w = self.weights.weights();
        (0..self.len())
            .map(|j| pbi_unchecked(self.f1.row(j), w.row(j), w.row(j).dot(&w.row(j)).sqrt(), z, self.theta, self.form))
            .collect()
    }
}

/// Row `i`: subpopulation indices after offspring `i` updates its
/// neighbourhood; replaced slots hold `−1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdateIndexMatrix(pub Array2<i64>);

impl UpdateIndexMatrix {
    pub fn as_array(&self) -> &Array2<i64> {
        &self.0
    }

    pub fn replaced(&self, i: usize, j: usize) -> bool {
        self.0[[i, j]] == -1
    }
}

/// Batched neighbourhood comparison. Ties count as improvements.
pub fn compare_update(state: &MoeadState, f2: ArrayView2<'_, f64>) -> Result<(UpdateIndexMatrix, Array1<f64>)> {
    let n = state.len();
    if f2.dim() != state.f1.dim() {
        return Err(Error::shape(state.f1.shape(), f2.shape()));
    }
    let z_min = ndarray::Zip::from(&state.z)
        .and(&col_min(state.f1.view()))
        .and(&col_min(f2))
        .map_collect(|&a, &b, &c| a.min(b).min(c));
    let w = state.weights.weights();
    let wn: Vec<f64> = w.rows().into_iter().map(|r| r.dot(&r).sqrt()).collect();

    let mut i_new = Array2::<i64>::zeros((n, n));
    i_new
        .axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut row)| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = j as i64;
            }
            for &j in state.neighbors.row(i) {
                let g_old = pbi_unchecked(state.f1.row(j), w.row(j), wn[j], z_min.view(), state.theta, state.form);
                let g_new = pbi_unchecked(f2.row(i), w.row(j), wn[j], z_min.view(), state.theta, state.form);
                // H(g_old − g_new)
                if g_old - g_new >= 0.0 {
                    row[j] = -1;
                }
            }
        });
    Ok((UpdateIndexMatrix(i_new), z_min))
}

/// Per-direction elite among the original row and every offspring that
/// claimed the direction. Ties go to the lowest candidate index, where
/// candidate `i` is offspring `i` if it claimed the slot, else the original.
pub fn elite_select(
    state: &MoeadState,
    o: ArrayView2<'_, f64>,
    f2: ArrayView2<'_, f64>,
    i_new: &UpdateIndexMatrix,
    z_min: ArrayView1<'_, f64>,
) -> Result<(Array2<f64>, Array2<f64>)> {
    let n = state.len();
    if o.dim() != state.x.dim() || f2.dim() != state.f1.dim() || i_new.0.dim() != (n, n) {
        return Err(Error::shape(state.x.shape(), o.shape()));
    }
    let w = state.weights.weights();
    let picks: Vec<Option<usize>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let wn = w.row(j).dot(&w.row(j)).sqrt();
            let orig = pbi_unchecked(state.f1.row(j), w.row(j), wn, z_min, state.theta, state.form);
            let col = i_new.0.column(j);
            let g: Array1<f64> = (0..n)
                .map(|i| {
                    if col[i] == -1 {
                        pbi_unchecked(f2.row(i), w.row(j), wn, z_min, state.theta, state.form)
                    } else {
                        orig
                    }
                })
                .collect();
            let best = argmin(g.view()).unwrap_or(0);
            (col[best] == -1).then_some(best)
        })
        .collect();

    let mut x_next = state.x.clone();
    let mut f_next = state.f1.clone();
    for (j, pick) in picks.into_iter().enumerate() {
        if let Some(i) = pick {
            x_next.row_mut(j).assign(&o.row(i));
            f_next.row_mut(j).assign(&f2.row(i));
        }
    }
    Ok((x_next, f_next))
}

/// Two distinct neighbour positions per row, drawn uniformly.
pub fn neighbor_parents(rng: &RngStream, table: &NeighborTable) -> Result<(Vec<usize>, Vec<usize>)> {
    let (n, t) = (table.rows(), table.size());
    if t < 2 {
        return Err(Error::invalid("neighbourhood size must be at least 2 for mating"));
    }
    let a = rng.child(0).indices(n, t);
    let b = rng.child(1).indices(n, t - 1);
    let mut p1 = Vec::with_capacity(n);
    let mut p2 = Vec::with_capacity(n);
    for i in 0..n {
        let second = if b[i] >= a[i] { b[i] + 1 } else { b[i] };
        p1.push(table.row(i)[a[i]]);
        p2.push(table.row(i)[second]);
    }
    Ok((p1, p2))
}

/// Offspring from explicit parents and draws: first SBX child, then mutation.
pub fn offspring_with_draws(
    state: &MoeadState,
    parents: (&[usize], &[usize]),
    sbx_draws: &Array2<f64>,
    pm_draws: &Array2<f64>,
    pm_mask: &crate::tensor::Mask<ndarray::Ix2>,
    params: &VariationParams,
) -> Result<Array2<f64>> {
    let n = state.len();
    let x1 = state.x.select(Axis(0), parents.0);
    let x2 = state.x.select(Axis(0), parents.1);
    let children = sbx_with_draws(x1.view(), x2.view(), sbx_draws, None, params)?;
    polynomial_mutation_with_draws(children.slice(s![..n, ..]), pm_draws, pm_mask, params)
}

/// One offspring per subproblem from two distinct neighbours.
pub fn moead_offspring(state: &MoeadState, rng: &RngStream, params: &VariationParams) -> Result<Array2<f64>> {
    let n = state.len();
    let (p1, p2) = neighbor_parents(&rng.child(0), &state.neighbors)?;
    let x1 = state.x.select(Axis(0), &p1);
    let x2 = state.x.select(Axis(0), &p2);
    let children = sbx(&rng.child(1), x1.view(), x2.view(), params)?;
    polynomial_mutation(&rng.child(2), children.slice(s![..n, ..]), params)
}

/// Environmental selection half of a generation.
pub fn select(state: &MoeadState, o: Array2<f64>, f2: Array2<f64>) -> Result<MoeadState> {
    let (i_new, z_min) = compare_update(state, f2.view())?;
    let (x, f1) = elite_select(state, o.view(), f2.view(), &i_new, z_min.view())?;
    Ok(MoeadState { x, f1, z: z_min, ..state.clone() })
}

/// Offspring → evaluation → compare/update → elite selection.
pub fn step(state: &MoeadState, rng: &RngStream, problem: &ProblemSpec, params: &VariationParams) -> Result<MoeadState> {
    let o = moead_offspring(state, rng, params)?;
    let f2 = problem.evaluate(o.view())?;
    select(state, o, f2)
}
