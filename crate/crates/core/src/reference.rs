//! Reference/weight direction sets and neighbourhood tables.

use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tensor::argsort_stable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionKind {
    /// Rows sum to one.
    Simplex,
    /// Rows have unit Euclidean norm.
    UnitNorm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    weights: Array2<f64>,
    kind: DirectionKind,
}

impl DirectionSet {
    /// Wraps an explicit matrix. Rows must be non-negative and non-zero.
    pub fn from_rows(weights: Array2<f64>, kind: DirectionKind) -> Result<Self> {
        if weights.nrows() == 0 || weights.ncols() < 2 {
            return Err(Error::invalid("direction set needs at least one row and two columns"));
        }
        for (i, row) in weights.rows().into_iter().enumerate() {
            if row.iter().any(|&v| v < 0.0 || !v.is_finite()) || row.iter().all(|&v| v == 0.0) {
                return Err(Error::invalid(format!("direction row {i} is zero or negative")));
            }
        }
        Ok(Self { weights, kind })
    }

    pub fn weights(&self) -> ArrayView2<'_, f64> {
        self.weights.view()
    }

    pub fn into_weights(self) -> Array2<f64> {
        self.weights
    }

    pub fn kind(&self) -> DirectionKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.weights.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.nrows() == 0
    }

    pub fn objectives(&self) -> usize {
        self.weights.ncols()
    }

    /// Same directions rescaled to unit norm.
    pub fn to_unit_norm(&self) -> Self {
        let mut w = self.weights.clone();
        for mut row in w.rows_mut() {
            let n = row.dot(&row).sqrt();
            row /= n;
        }
        Self { weights: w, kind: DirectionKind::UnitNorm }
    }
}

/// `C(H + m − 1, m − 1)`, the number of lattice points.
pub fn lattice_size(m: usize, divisions: usize) -> Result<usize> {
    if m < 1 {
        return Err(Error::invalid("m must be positive"));
    }
    let n = divisions
        .checked_add(m - 1)
        .ok_or_else(|| Error::Overflow("lattice size".into()))?;
    let k = (m - 1).min(divisions);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul((n - i) as u128)
            .ok_or_else(|| Error::Overflow("lattice size".into()))?
            / (i as u128 + 1);
    }
    usize::try_from(acc).map_err(|_| Error::Overflow(format!("C({n}, {k}) exceeds usize")))
}

/// Upper bound on lattice rows we are willing to materialize.
const MAX_LATTICE: usize = 50_000_000;

/// Das–Dennis simplex lattice: every composition of `divisions` into `m`
/// non-negative parts, divided by `divisions`. Rows are in lexicographic order
/// of the integer compositions.
pub fn das_dennis(m: usize, divisions: usize) -> Result<DirectionSet> {
    if m < 2 {
        return Err(Error::invalid("das_dennis needs m >= 2"));
    }
    if divisions < 1 {
        return Err(Error::invalid("das_dennis needs at least one division"));
    }
    let count = lattice_size(m, divisions)?;
    if count > MAX_LATTICE {
        return Err(Error::Overflow(format!("{count} lattice points")));
    }
    let mut flat = Vec::with_capacity(count * m);
    let mut current = vec![0usize; m];
    compose(&mut current, 0, divisions, &mut flat);
    let h = divisions as f64;
    let data: Vec<f64> = flat.into_iter().map(|c| c as f64 / h).collect();
    let weights = Array2::from_shape_vec((count, m), data).map_err(|e| Error::Internal(e.to_string()))?;
    Ok(DirectionSet { weights, kind: DirectionKind::Simplex })
}

fn compose(current: &mut [usize], pos: usize, left: usize, out: &mut Vec<usize>) {
    if pos == current.len() - 1 {
        current[pos] = left;
        out.extend_from_slice(current);
        return;
    }
    for c in 0..=left {
        current[pos] = c;
        compose(current, pos + 1, left - c, out);
    }
}

/// Smallest divisions `H` whose lattice has at least `n` points.
pub fn divisions_for(m: usize, n: usize) -> Result<usize> {
    let mut h = 1;
    while lattice_size(m, h)? < n {
        h += 1;
    }
    Ok(h)
}

/// `n × T` table of nearest directions (self first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborTable {
    table: Array2<usize>,
}

impl NeighborTable {
    pub fn as_array(&self) -> &Array2<usize> {
        &self.table
    }

    pub fn size(&self) -> usize {
        self.table.ncols()
    }

    pub fn row(&self, i: usize) -> &[usize] {
        self.table
            .row(i)
            .to_slice()
            .expect("neighbour table is standard layout")
    }

    pub fn rows(&self) -> usize {
        self.table.nrows()
    }
}

/// Pairwise squared Euclidean distances between rows.
pub fn pairwise_sq_distances(w: ArrayView2<'_, f64>) -> Array2<f64> {
    let n = w.nrows();
    let mut d = Array2::zeros((n, n));
    d.axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut row)| {
            for j in 0..n {
                // (i, j) and (j, i) walk the same terms in the same order
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                row[j] = w
                    .row(a)
                    .iter()
                    .zip(w.row(b))
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
            }
        });
    d
}

/// `T` nearest directions per row by Euclidean distance; ties by index.
pub fn neighbors(w: &DirectionSet, t: usize) -> Result<NeighborTable> {
    let n = w.len();
    if t == 0 || t > n {
        return Err(Error::invalid(format!("neighbourhood size {t} outside 1..={n}")));
    }
    let d = pairwise_sq_distances(w.weights());
    let rows: Vec<Vec<usize>> = d
        .axis_iter(Axis(0))
        .into_par_iter()
        .enumerate()
        .map(|(i, row)| {
            // self has distance 0 and must come first even against duplicates
            let mut key: Vec<f64> = row.to_vec();
            key[i] = f64::NEG_INFINITY;
            argsort_stable(&key)[..t].to_vec()
        })
        .collect();
    let flat: Vec<usize> = rows.into_iter().flatten().collect();
    let table = Array2::from_shape_vec((n, t), flat).map_err(|e| Error::Internal(e.to_string()))?;
    Ok(NeighborTable { table })
}
