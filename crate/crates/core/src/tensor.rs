//! Whole-population array primitives.
//!
//! Every selection operator in this crate is written against this small set
//! of operations: a Heaviside step, masked blending (branch replacement),
//! a batched row map, and stable sorts. Dense data lives in [`ndarray`]
//! arrays; masks are `bool` arrays so that a mask is never confused with a
//! real-valued tensor that happens to hold zeros and ones.

use std::cmp::Ordering;

use ndarray::{Array, Array1, Array2, ArrayBase, ArrayView1, ArrayView2, Axis, Data, Dimension, IxDyn, Zip};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Dense real tensor.
pub type Tensor<D> = Array<f64, D>;

/// Dense 0/1 tensor.
pub type Mask<D> = Array<bool, D>;

/// Largest finite value, used wherever pseudocode writes "∞" as a sentinel.
///
/// Arithmetic on it stays finite in the ways the selection code uses it
/// (comparisons, masking), so it never produces NaN.
pub const SENTINEL: f64 = f64::MAX;

/// `H(A)`: 1 where `a >= 0`, else 0. NaN maps to 0.
pub fn heaviside<S, D>(a: &ArrayBase<S, D>) -> Mask<D>
where
    S: Data<Elem = f64>,
    D: Dimension,
{
    a.map(|&v| v >= 0.0)
}

/// Indicator `1_{pred(a)}`.
pub fn indicator<S, D, F>(a: &ArrayBase<S, D>, pred: F) -> Mask<D>
where
    S: Data,
    D: Dimension,
    F: Fn(&S::Elem) -> bool,
{
    a.map(pred)
}

/// Numeric view of a mask (1.0 / 0.0), for the places that multiply by it.
pub fn mask_to_f64<D: Dimension>(m: &Mask<D>) -> Tensor<D> {
    m.map(|&b| if b { 1.0 } else { 0.0 })
}

fn broadcast_shape(shapes: &[&[usize]]) -> Option<Vec<usize>> {
    let ndim = shapes.iter().map(|s| s.len()).max().unwrap_or(0);
    let mut out = vec![1usize; ndim];
    for s in shapes {
        let offset = ndim - s.len();
        for (i, &extent) in s.iter().enumerate() {
            let slot = &mut out[offset + i];
            if *slot == 1 {
                *slot = extent;
            } else if extent != 1 && extent != *slot {
                return None;
            }
        }
    }
    Some(out)
}

/// `M ⊙ A + (1 − M) ⊙ B`, i.e. `where(M, A, B)`, with numpy-style broadcasting.
pub fn masked_blend<T, D1, D2, D3>(
    mask: &Mask<D1>,
    a: &Array<T, D2>,
    b: &Array<T, D3>,
) -> Result<Array<T, IxDyn>>
where
    T: Clone,
    D1: Dimension,
    D2: Dimension,
    D3: Dimension,
{
    let shape = broadcast_shape(&[mask.shape(), a.shape(), b.shape()])
        .ok_or_else(|| Error::shape(a.shape(), b.shape()))?;
    let dim = IxDyn(&shape);
    let mask = mask
        .broadcast(dim.clone())
        .ok_or_else(|| Error::shape(&shape, mask.shape()))?;
    let av = a
        .broadcast(dim.clone())
        .ok_or_else(|| Error::shape(&shape, a.shape()))?;
    let bv = b
        .broadcast(dim.clone())
        .ok_or_else(|| Error::shape(&shape, b.shape()))?;
    Ok(Zip::from(&mask)
        .and(&av)
        .and(&bv)
        .map_collect(|&m, x, y| if m { x.clone() } else { y.clone() }))
}

/// Same-shape blend without the dynamic-dimension round trip.
pub fn select<T, D>(mask: &Mask<D>, a: &Array<T, D>, b: &Array<T, D>) -> Result<Array<T, D>>
where
    T: Clone + Send + Sync,
    D: Dimension,
{
    if mask.shape() != a.shape() || a.shape() != b.shape() {
        return Err(Error::shape(mask.shape(), a.shape()));
    }
    Ok(Zip::from(mask)
        .and(a)
        .and(b)
        .map_collect(|&m, x, y| if m { x.clone() } else { y.clone() }))
}

/// `vmap(f)(A)`: applies `f` to every row of `a` and stacks the results.
///
/// Rows are processed in parallel; output row `i` is always `f(a[i])`, so the
/// result is identical to a sequential loop.
pub fn batched_map<A, B, F>(a: ArrayView2<'_, A>, f: F) -> Result<Array2<B>>
where
    A: Sync,
    B: Send + Clone,
    F: Fn(ArrayView1<'_, A>) -> Array1<B> + Sync,
{
    let rows: Vec<Array1<B>> = a
        .axis_iter(Axis(0))
        .into_par_iter()
        .map(|row| f(row))
        .collect();
    let width = rows.first().map_or(0, |r| r.len());
    if let Some((i, bad)) = rows.iter().enumerate().find(|(_, r)| r.len() != width) {
        return Err(Error::invalid(format!(
            "batched_map: row {i} produced length {}, expected {width}",
            bad.len()
        )));
    }
    let flat: Vec<B> = rows.into_iter().flat_map(|r| r.into_iter()).collect();
    Array2::from_shape_vec((a.nrows(), width), flat)
        .map_err(|e| Error::Internal(e.to_string()))
}

/// `vmap` for a row function with scalar output.
pub fn batched_reduce<A, B, F>(a: ArrayView2<'_, A>, f: F) -> Array1<B>
where
    A: Sync,
    B: Send,
    F: Fn(ArrayView1<'_, A>) -> B + Sync + Send,
{
    let out: Vec<B> = a.axis_iter(Axis(0)).into_par_iter().map(|r| f(r)).collect();
    Array1::from(out)
}

/// Total order used by the sorting primitives.
pub trait SortKey {
    fn key_cmp(&self, other: &Self) -> Ordering;
}

impl SortKey for f64 {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.total_cmp(other)
    }
}

macro_rules! int_sort_key {
    ($($t:ty),*) => {
        $(impl SortKey for $t {
            fn key_cmp(&self, other: &Self) -> Ordering {
                self.cmp(other)
            }
        })*
    };
}
int_sort_key!(i32, i64, u32, u64, usize);

/// Indices that sort `v` ascending; ties keep their original order.
pub fn argsort_stable<T: SortKey>(v: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[i].key_cmp(&v[j]));
    idx
}

/// Indices ordered by `primary`, then `secondary`, then original position.
pub fn lexsort<P: SortKey, Q: SortKey>(primary: &[P], secondary: &[Q]) -> Result<Vec<usize>> {
    if primary.len() != secondary.len() {
        return Err(Error::shape(&[primary.len()], &[secondary.len()]));
    }
    let mut idx: Vec<usize> = (0..primary.len()).collect();
    idx.sort_by(|&i, &j| {
        primary[i]
            .key_cmp(&primary[j])
            .then_with(|| secondary[i].key_cmp(&secondary[j]))
    });
    Ok(idx)
}

/// Position of the smallest element; the lowest index wins ties. NaN never wins.
pub fn argmin(v: ArrayView1<'_, f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &x) in v.iter().enumerate() {
        if x.is_nan() {
            continue;
        }
        match best {
            Some((_, b)) if x >= b => {}
            _ => best = Some((i, x)),
        }
    }
    best.map(|(i, _)| i)
}

/// Columnwise minimum, skipping NaN entries. All-NaN columns yield NaN.
pub fn col_min(a: ArrayView2<'_, f64>) -> Array1<f64> {
    a.axis_iter(Axis(1))
        .map(|col| col.iter().copied().filter(|x| !x.is_nan()).fold(f64::NAN, f64::min))
        .collect()
}

/// Columnwise maximum, skipping NaN entries. All-NaN columns yield NaN.
pub fn col_max(a: ArrayView2<'_, f64>) -> Array1<f64> {
    a.axis_iter(Axis(1))
        .map(|col| col.iter().copied().filter(|x| !x.is_nan()).fold(f64::NAN, f64::max))
        .collect()
}

/// Euclidean norm of every row.
pub fn row_norms(a: ArrayView2<'_, f64>) -> Array1<f64> {
    a.map_axis(Axis(1), |r| r.dot(&r).sqrt())
}

/// Gathers rows by index.
pub fn take_rows<T: Clone>(a: ArrayView2<'_, T>, idx: &[usize]) -> Array2<T> {
    a.select(Axis(0), idx)
}
