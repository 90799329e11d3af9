//! RVEA angle-penalized distance (APD) selection.

use std::f64::consts::FRAC_PI_2;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::reference::DirectionSet;
use crate::tensor::{argmin, col_min};

pub const DEFAULT_ALPHA: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApdParams {
    pub alpha: f64,
    pub t: usize,
    pub t_max: usize,
}

impl ApdParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::invalid("alpha must be positive"));
        }
        if self.t > self.t_max || self.t_max == 0 {
            return Err(Error::invalid(format!("generation {} outside 0..={}", self.t, self.t_max)));
        }
        Ok(())
    }

    /// `m · (t / t_max)^α`.
    pub fn penalty(&self, m: usize) -> f64 {
        m as f64 * (self.t as f64 / self.t_max as f64).powf(self.alpha)
    }
}

/// Angles between every row of `a` and every row of `b`. Zero rows are at
/// angle 0 to everything.
pub fn angle_matrix(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Array2<f64> {
    let bn: Vec<f64> = b.rows().into_iter().map(|r| r.dot(&r).sqrt()).collect();
    let mut out = Array2::zeros((a.nrows(), b.nrows()));
    out.axis_iter_mut(Axis(0))
        .into_par_iter()
        .zip(a.axis_iter(Axis(0)))
        .for_each(|(mut row, f)| {
            let fnorm = f.dot(&f).sqrt();
            for (j, v) in b.rows().into_iter().enumerate() {
                row[j] = if fnorm == 0.0 || bn[j] == 0.0 { 0.0 } else { unit_angle(f.iter().map(|x| x / fnorm), v.iter().map(|x| x / bn[j])) };
            }
        });
    out
}

/// `2·atan2(‖a − b‖, ‖a + b‖)` for unit vectors; exact at θ = 0 where `acos` is not.
fn unit_angle(a: impl Iterator<Item = f64>, b: impl Iterator<Item = f64>) -> f64 {
    let (mut d, mut s) = (0.0, 0.0);
    for (x, y) in a.zip(b) {
        d += (x - y) * (x - y);
        s += (x + y) * (x + y);
    }
    2.0 * d.sqrt().atan2(s.sqrt())
}

/// Smallest angle from each direction to any other; `π/2` when there is only one.
pub fn min_neighbor_angles(v: ArrayView2<'_, f64>) -> Array1<f64> {
    let r = v.nrows();
    if r == 1 {
        return Array1::from_elem(1, FRAC_PI_2);
    }
    let mut a = angle_matrix(v, v);
    for j in 0..r {
        a[[j, j]] = f64::INFINITY;
    }
    a.map_axis(Axis(1), |row| row.fold(f64::INFINITY, |m, &x| m.min(x)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApdSelection {
    /// Chosen row per non-empty direction, in direction order.
    pub elites: Vec<usize>,
    /// Direction of each elite.
    pub directions: Vec<usize>,
    /// APD of every row against its own direction.
    pub apd: Array1<f64>,
    /// Direction each row was assigned to.
    pub partition: Vec<usize>,
}

pub fn apd_select_indices(f: ArrayView2<'_, f64>, v: &DirectionSet, params: &ApdParams) -> Result<ApdSelection> {
    params.validate()?;
    let (n, m) = f.dim();
    if n == 0 {
        return Err(Error::invalid("apd_select needs at least one row"));
    }
    if v.objectives() != m {
        return Err(Error::shape(&[n, v.objectives()], f.shape()));
    }
    let z = col_min(f);
    let fp = &f - &z.view().insert_axis(Axis(0));
    let theta = angle_matrix(fp.view(), v.weights());
    let gamma = min_neighbor_angles(v.weights());
    let partition: Vec<usize> = theta.axis_iter(Axis(0)).map(|row| argmin(row).unwrap_or(0)).collect();
    let penalty = params.penalty(m);
    let apd: Array1<f64> = (0..n)
        .map(|i| {
            let j = partition[i];
            let norm = fp.row(i).dot(&fp.row(i)).sqrt();
            (1.0 + penalty * theta[[i, j]] / gamma[j]) * norm
        })
        .collect();

    // per direction: APD where the row belongs to it, ∞ elsewhere
    let r = v.len();
    let picks: Vec<Option<usize>> = (0..r)
        .into_par_iter()
        .map(|j| {
            let masked: Array1<f64> = (0..n).map(|i| if partition[i] == j { apd[i] } else { f64::INFINITY }).collect();
            argmin(masked.view()).filter(|&i| partition[i] == j)
        })
        .collect();
    let (directions, elites) = picks.iter().enumerate().filter_map(|(j, p)| p.map(|i| (j, i))).unzip();
    Ok(ApdSelection { elites, directions, apd, partition })
}

pub fn apd_select(
    x: ArrayView2<'_, f64>,
    f: ArrayView2<'_, f64>,
    v: &DirectionSet,
    params: &ApdParams,
) -> Result<(Array2<f64>, Array2<f64>)> {
    if x.nrows() != f.nrows() {
        return Err(Error::shape(&[f.nrows()], &[x.nrows()]));
    }
    let sel = apd_select_indices(f, v, params)?;
    Ok((x.select(Axis(0), &sel.elites), f.select(Axis(0), &sel.elites)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use proptest::prelude::*;

    use crate::reference::{das_dennis, DirectionKind};
    use crate::rng::RngStream;

    #[test]
    fn t_zero_keeps_min_norm_member() {
        let v = DirectionSet::from_rows(array![[1.0, 0.0], [0.0, 1.0]], DirectionKind::UnitNorm).unwrap();
        let f = array![[0.0, 0.0], [3.0, 0.5], [2.0, 0.9], [0.6, 4.0]];
        let p = ApdParams { alpha: 2.0, t: 0, t_max: 10 };
        let sel = apd_select_indices(f.view(), &v, &p).unwrap();
        // row 0 is the ideal point itself: zero norm, assigned to direction 0
        assert_eq!(sel.elites, vec![0, 3]);
    }

    #[test]
    fn collinear_member_has_plain_norm() {
        let v = DirectionSet::from_rows(array![[1.0, 1.0], [1.0, 0.0]], DirectionKind::Simplex).unwrap();
        let f = array![[0.0, 0.0], [2.0, 2.0]];
        for t in [0, 5, 10] {
            let sel = apd_select_indices(f.view(), &v, &ApdParams { alpha: 2.0, t, t_max: 10 }).unwrap();
            assert_abs_diff_eq!(sel.apd[1], 8f64.sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn single_direction_uses_right_angle() {
        let g = min_neighbor_angles(array![[1.0, 0.0]].view());
        assert_eq!(g[0], FRAC_PI_2);
    }

    #[test]
    fn params_validated() {
        let v = das_dennis(2, 3).unwrap();
        let f = array![[0.0, 1.0]];
        assert!(apd_select_indices(f.view(), &v, &ApdParams { alpha: 0.0, t: 0, t_max: 1 }).is_err());
        assert!(apd_select_indices(f.view(), &v, &ApdParams { alpha: 2.0, t: 2, t_max: 1 }).is_err());
    }

    /// Plain loops: translate, assign by smallest angle, scan each direction.
    fn oracle(f: ArrayView2<f64>, v: ArrayView2<f64>, p: &ApdParams) -> Vec<usize> {
        let (n, m) = f.dim();
        let r = v.nrows();
        let z: Vec<f64> = (0..m).map(|c| (0..n).map(|i| f[[i, c]]).fold(f64::INFINITY, f64::min)).collect();
        let angle = |a: &[f64], b: &[f64]| {
            let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            if na == 0.0 || nb == 0.0 {
                return 0.0;
            }
            let d: f64 = a.iter().zip(b).map(|(x, y)| (x / na - y / nb).powi(2)).sum();
            let s: f64 = a.iter().zip(b).map(|(x, y)| (x / na + y / nb).powi(2)).sum();
            2.0 * d.sqrt().atan2(s.sqrt())
        };
        let vr: Vec<Vec<f64>> = v.rows().into_iter().map(|r| r.to_vec()).collect();
        let gamma: Vec<f64> = (0..r)
            .map(|j| {
                if r == 1 {
                    FRAC_PI_2
                } else {
                    (0..r).filter(|&k| k != j).map(|k| angle(&vr[j], &vr[k])).fold(f64::INFINITY, f64::min)
                }
            })
            .collect();
        let mut best: Vec<Option<(f64, usize)>> = vec![None; r];
        for i in 0..n {
            let fi: Vec<f64> = (0..m).map(|c| f[[i, c]] - z[c]).collect();
            let mut bj = 0;
            let mut ba = f64::INFINITY;
            for (j, vj) in vr.iter().enumerate() {
                let a = angle(&fi, vj);
                if a < ba {
                    ba = a;
                    bj = j;
                }
            }
            let norm = fi.iter().map(|x| x * x).sum::<f64>().sqrt();
            let apd = (1.0 + m as f64 * (p.t as f64 / p.t_max as f64).powf(p.alpha) * ba / gamma[bj]) * norm;
            if best[bj].is_none_or(|(b, _)| apd < b) {
                best[bj] = Some((apd, i));
            }
        }
        best.into_iter().flatten().map(|(_, i)| i).collect()
    }

    #[test]
    fn matches_direction_scan_oracle() {
        for seed in 0..200u64 {
            let s = RngStream::new(seed);
            let n = 1 + s.indices(1, 32)[0];
            let r = 1 + s.child(1).indices(1, 16)[0];
            let m = 2 + s.child(2).indices(1, 3)[0];
            let f = s.child(3).uniform_matrix(n, m);
            let v = DirectionSet::from_rows(s.child(4).uniform_matrix(r, m) + 0.01, DirectionKind::Simplex).unwrap();
            let t = [0, 3, 10][seed as usize % 3];
            let p = ApdParams { alpha: 2.0, t, t_max: 10 };
            let sel = apd_select_indices(f.view(), &v, &p).unwrap();
            assert_eq!(sel.elites, oracle(f.view(), v.weights(), &p), "seed {seed}");
            assert!(sel.elites.len() <= r);
        }
    }

    proptest! {
        #[test]
        fn uniform_scaling_keeps_choices(seed in any::<u64>(), c in 0.01f64..100.0) {
            let s = RngStream::new(seed);
            let f = s.uniform_matrix(20, 3);
            let v = das_dennis(3, 3).unwrap();
            let p = ApdParams { alpha: 2.0, t: 4, t_max: 10 };
            let a = apd_select_indices(f.view(), &v, &p).unwrap();
            let b = apd_select_indices((&f * c).view(), &v, &p).unwrap();
            prop_assert_eq!(a.elites, b.elites);
        }

        #[test]
        fn elites_are_partition_minimizers(seed in any::<u64>()) {
            let s = RngStream::new(seed);
            let f = s.uniform_matrix(25, 3);
            let v = das_dennis(3, 4).unwrap();
            let sel = apd_select_indices(f.view(), &v, &ApdParams { alpha: 2.0, t: 7, t_max: 10 }).unwrap();
            let mut dirs = sel.directions.clone();
            dirs.dedup();
            prop_assert_eq!(dirs.len(), sel.directions.len());
            for (&i, &j) in sel.elites.iter().zip(&sel.directions) {
                prop_assert_eq!(sel.partition[i], j);
                for k in 0..25 {
                    if sel.partition[k] == j {
                        prop_assert!(sel.apd[i] <= sel.apd[k]);
                    }
                }
            }
        }
    }
}
