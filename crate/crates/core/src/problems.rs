//! DTLZ1–DTLZ7 scalable test problems.
//!
//! All problems are minimized over `[0, 1]^d`. The last `k = d − m + 1`
//! variables feed the distance function `g`; the first `m − 1` position the
//! point on the front.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ndsort;
use crate::reference;
use crate::tensor::batched_map;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtlz {
    Dtlz1,
    Dtlz2,
    Dtlz3,
    Dtlz4,
    Dtlz5,
    Dtlz6,
    Dtlz7,
}

impl Dtlz {
    pub const ALL: [Dtlz; 7] = [
        Dtlz::Dtlz1,
        Dtlz::Dtlz2,
        Dtlz::Dtlz3,
        Dtlz::Dtlz4,
        Dtlz::Dtlz5,
        Dtlz::Dtlz6,
        Dtlz::Dtlz7,
    ];

    /// Canonical decision dimension for `m` objectives.
    pub fn default_dim(self, m: usize) -> usize {
        match self {
            Dtlz::Dtlz1 => m + 4,
            Dtlz::Dtlz7 => m + 19,
            _ => m + 9,
        }
    }
}

impl fmt::Display for Dtlz {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = Dtlz::ALL.iter().position(|p| p == self).unwrap() + 1;
        write!(f, "dtlz{i}")
    }
}

impl FromStr for Dtlz {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        lower
            .strip_prefix("dtlz")
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|n| (1..=7).contains(n))
            .map(|n| Dtlz::ALL[n - 1])
            .ok_or_else(|| Error::Config(format!("unknown problem '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub name: Dtlz,
    pub dim: usize,
    pub objectives: usize,
}

impl ProblemSpec {
    pub fn new(name: Dtlz, dim: usize, objectives: usize) -> Result<Self> {
        if objectives < 2 {
            return Err(Error::invalid("at least two objectives are required"));
        }
        if dim < objectives {
            return Err(Error::invalid(format!(
                "{name}: decision dimension {dim} is smaller than objective count {objectives}"
            )));
        }
        Ok(Self { name, dim, objectives })
    }

    /// Problem with its canonical dimension.
    pub fn with_default_dim(name: Dtlz, objectives: usize) -> Result<Self> {
        Self::new(name, name.default_dim(objectives), objectives)
    }

    pub fn lower(&self) -> Array1<f64> {
        Array1::zeros(self.dim)
    }

    pub fn upper(&self) -> Array1<f64> {
        Array1::ones(self.dim)
    }

    /// Objective values for every row of `x` (n×d → n×m).
    pub fn evaluate(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.dim {
            return Err(Error::shape(&[x.nrows(), self.dim], x.shape()));
        }
        if x.nrows() == 0 {
            return Ok(Array2::zeros((0, self.objectives)));
        }
        batched_map(x, |row| self.evaluate_row(row))
    }

    /// Objective vector of a single decision vector.
    pub fn evaluate_row(&self, x: ArrayView1<'_, f64>) -> Array1<f64> {
        let m = self.objectives;
        let v = x.to_vec();
        let (pos, dist) = v.split_at(m - 1);
        let k = dist.len() as f64;
        match self.name {
            Dtlz::Dtlz1 => {
                let g = rastrigin_g(dist);
                linear_front(pos, 0.5 * (1.0 + g))
            }
            Dtlz::Dtlz2 => spherical_front(&pos_angles(pos), 1.0 + sphere_g(dist)),
            Dtlz::Dtlz3 => spherical_front(&pos_angles(pos), 1.0 + rastrigin_g(dist)),
            Dtlz::Dtlz4 => {
                let bent: Vec<f64> = pos.iter().map(|v| v.powi(100)).collect();
                spherical_front(&pos_angles(&bent), 1.0 + sphere_g(dist))
            }
            Dtlz::Dtlz5 => {
                let g = sphere_g(dist);
                spherical_front(&degenerate_angles(pos, g), 1.0 + g)
            }
            Dtlz::Dtlz6 => {
                let g: f64 = dist.iter().map(|v| v.powf(0.1)).sum();
                spherical_front(&degenerate_angles(pos, g), 1.0 + g)
            }
            Dtlz::Dtlz7 => {
                let g = 1.0 + 9.0 / k * dist.iter().sum::<f64>();
                let h = m as f64
                    - pos
                        .iter()
                        .map(|&f| f / (1.0 + g) * (1.0 + (3.0 * PI * f).sin()))
                        .sum::<f64>();
                let mut out = pos.to_vec();
                out.push((1.0 + g) * h);
                Array1::from(out)
            }
        }
    }

    /// `count` points spread over the analytic Pareto front.
    ///
    /// DTLZ1–4 use a simplex lattice (scaled, or projected onto the unit
    /// sphere); DTLZ5–6 use the degenerate curve for every `m`; DTLZ7 filters
    /// a grid on the `g = 1` surface down to its non-dominated part. The
    /// lattice-based fronts return the largest lattice not exceeding `count`.
    pub fn true_front(&self, count: usize) -> Result<Array2<f64>> {
        let m = self.objectives;
        if count < m {
            return Err(Error::invalid(format!("front size {count} is smaller than m = {m}")));
        }
        match self.name {
            Dtlz::Dtlz1 => Ok(lattice_for(m, count)? * 0.5),
            Dtlz::Dtlz2 | Dtlz::Dtlz3 | Dtlz::Dtlz4 => {
                let mut w = lattice_for(m, count)?;
                for mut row in w.rows_mut() {
                    let n = row.dot(&row).sqrt();
                    row /= n;
                }
                Ok(w)
            }
            Dtlz::Dtlz5 | Dtlz::Dtlz6 => {
                let mut out = Array2::zeros((count, m));
                for (i, mut row) in out.rows_mut().into_iter().enumerate() {
                    let t = i as f64 / (count - 1) as f64;
                    let mut angles = vec![PI / 4.0; m - 1];
                    angles[0] = t * PI / 2.0;
                    row.assign(&spherical_front(&angles, 1.0));
                }
                Ok(out)
            }
            Dtlz::Dtlz7 => Ok(self.dtlz7_front(count)),
        }
    }

    fn dtlz7_front(&self, count: usize) -> Array2<f64> {
        let m = self.objectives;
        let dims = m - 1;
        // Grid dense enough that the surviving fraction (~1/4 per axis for
        // m=2, less in higher m) still exceeds `count`.
        let target = (count * 6).max(2000);
        let per_axis = ((target as f64).powf(1.0 / dims as f64).ceil() as usize).max(4);
        let total = per_axis.pow(dims as u32);
        let mut grid = Array2::zeros((total, m));
        for (i, mut row) in grid.rows_mut().into_iter().enumerate() {
            let mut rem = i;
            let mut s = 0.0;
            for j in 0..dims {
                let f = (rem % per_axis) as f64 / (per_axis - 1) as f64;
                rem /= per_axis;
                row[j] = f;
                s += f / 2.0 * (1.0 + (3.0 * PI * f).sin());
            }
            row[dims] = 2.0 * (m as f64 - s);
        }
        let keep = ndsort::non_dominated_indices(grid.view());
        let front = grid.select(Axis(0), &keep);
        if front.nrows() <= count {
            return front;
        }
        // even thinning in grid order keeps every segment represented
        let step = front.nrows() as f64 / count as f64;
        let idx: Vec<usize> = (0..count).map(|i| (i as f64 * step) as usize).collect();
        front.select(Axis(0), &idx)
    }
}

fn rastrigin_g(dist: &[f64]) -> f64 {
    let k = dist.len() as f64;
    100.0
        * (k + dist
            .iter()
            .map(|&v| (v - 0.5).powi(2) - (20.0 * PI * (v - 0.5)).cos())
            .sum::<f64>())
}

fn sphere_g(dist: &[f64]) -> f64 {
    dist.iter().map(|&v| (v - 0.5).powi(2)).sum()
}

fn linear_front(pos: &[f64], scale: f64) -> Array1<f64> {
    let m = pos.len() + 1;
    let mut f = Array1::zeros(m);
    for i in 0..m {
        let mut v = scale;
        for &p in &pos[..m - 1 - i] {
            v *= p;
        }
        if i > 0 {
            v *= 1.0 - pos[m - 1 - i];
        }
        f[i] = v;
    }
    f
}

fn pos_angles(pos: &[f64]) -> Vec<f64> {
    pos.iter().map(|&p| p * PI / 2.0).collect()
}

fn degenerate_angles(pos: &[f64], g: f64) -> Vec<f64> {
    pos.iter()
        .enumerate()
        .map(|(i, &p)| {
            if i == 0 {
                p * PI / 2.0
            } else {
                PI / (4.0 * (1.0 + g)) * (1.0 + 2.0 * g * p)
            }
        })
        .collect()
}

fn spherical_front(angles: &[f64], scale: f64) -> Array1<f64> {
    let m = angles.len() + 1;
    let mut f = Array1::zeros(m);
    for i in 0..m {
        let mut v = scale;
        for &a in &angles[..m - 1 - i] {
            v *= a.cos();
        }
        if i > 0 {
            v *= angles[m - 1 - i].sin();
        }
        f[i] = v;
    }
    f
}

fn lattice_for(m: usize, count: usize) -> Result<Array2<f64>> {
    let mut h = 1;
    while reference::lattice_size(m, h + 1)? <= count {
        h += 1;
    }
    Ok(reference::das_dennis(m, h)?.into_weights())
}
