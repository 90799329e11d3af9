//! HypE: Monte-Carlo estimates of the expected hypervolume loss of each
//! individual, and one-shot truncation by `(rank, −contribution)`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ndsort::rank_assign;
use rand::RngCore;

use crate::rng::{unit_f64, RngStream};
use crate::tensor::{col_max, col_min, lexsort, SENTINEL};

/// Samples per parallel work item.
const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct HvEstimateParams {
    pub v_ref: Array1<f64>,
    pub k: usize,
    pub s: usize,
}

impl HvEstimateParams {
    pub fn validate(&self, n1: usize, m: usize) -> Result<()> {
        if self.v_ref.len() != m {
            return Err(Error::shape(&[m], &[self.v_ref.len()]));
        }
        if self.s == 0 {
            return Err(Error::invalid("sample count must be positive"));
        }
        if self.k == 0 || self.k > n1 {
            return Err(Error::invalid(format!("k = {} outside 1..={n1}", self.k)));
        }
        Ok(())
    }
}

/// `α_j` for `j = 1..=n1`, stored zero-based: `out[δ] = α_{δ+1}`. Zero beyond `k`.
pub fn alpha_weights(n1: usize, k: usize) -> Vec<f64> {
    let mut out = vec![0.0; n1];
    let mut prod = 1.0;
    for j in 1..=n1.min(k) {
        // λ_1 = 1, λ_j = (k − (j−1)) / (n1 − (j−1))
        if j > 1 {
            let l = (j - 1) as f64;
            prod *= (k as f64 - l) / (n1 as f64 - l);
        }
        out[j - 1] = prod / j as f64;
    }
    out
}

/// Sampling box `[f_l, v_ref]`; `None` when degenerate.
fn sampling_box(f: ArrayView2<'_, f64>, v_ref: ArrayView1<'_, f64>) -> Option<(Array1<f64>, f64)> {
    let lo = col_min(f);
    let mut vol = 1.0;
    for (l, u) in lo.iter().zip(v_ref) {
        if !(u > l) {
            return None;
        }
        vol *= u - l;
    }
    Some((lo, vol))
}

/// Monte-Carlo HypE fitness of every row of `f`.
pub fn hv_estimate(f: ArrayView2<'_, f64>, params: &HvEstimateParams, rng: &RngStream) -> Result<Array1<f64>> {
    let (n1, m) = f.dim();
    params.validate(n1, m)?;
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("hv_estimate needs finite objectives"));
    }
    let Some((lo, vol)) = sampling_box(f, params.v_ref.view()) else {
        return Ok(Array1::zeros(n1));
    };
    let span = &params.v_ref - &lo;
    let alpha = alpha_weights(n1, params.k);
    let chunks = params.s.div_ceil(CHUNK);

    let partial: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let len = CHUNK.min(params.s - start);
            let mut acc = vec![0.0; n1];
            let mut point = vec![0.0; m];
            let mut hit = Vec::with_capacity(n1);
            // coordinate k of sample p is draw p·m + k of the stream
            let mut g = rng.generator_at((start * m) as u64);
            for _ in 0..len {
                for (k, slot) in point.iter_mut().enumerate() {
                    *slot = lo[k] + span[k] * unit_f64(g.next_u64());
                }
                hit.clear();
                // H(s − f) on every coordinate: boundary samples count as dominated
                hit.extend((0..n1).filter(|&i| f.row(i).iter().zip(&point).all(|(a, b)| b - a >= 0.0)));
                if let Some(&a) = hit.len().checked_sub(1).and_then(|d| alpha.get(d)) {
                    for &i in &hit {
                        acc[i] += a;
                    }
                }
            }
            acc
        })
        .collect();

    let mut total = Array1::zeros(n1);
    for acc in partial {
        total += &Array1::from(acc);
    }
    Ok(total * (vol / params.s as f64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactHype {
    /// `∫ α_{|dom(x)|} dx` over the region dominated by each row.
    pub fitness: Array1<f64>,
    /// `∫ α_{|dom(x)|}² dx`, for Monte-Carlo error bars.
    pub second_moment: Array1<f64>,
}

pub const ORACLE_MAX_POINTS: usize = 8;
pub const ORACLE_MAX_OBJECTIVES: usize = 3;

/// Exact HypE fitness by summing over the grid of cells induced by the
/// point coordinates and the reference point.
pub fn exact_hype_fitness_oracle(f: ArrayView2<'_, f64>, v_ref: ArrayView1<'_, f64>, k: usize) -> Result<ExactHype> {
    let (n1, m) = f.dim();
    if n1 == 0 || n1 > ORACLE_MAX_POINTS || m > ORACLE_MAX_OBJECTIVES {
        return Err(Error::invalid(format!(
            "oracle limited to 1..={ORACLE_MAX_POINTS} points and ≤ {ORACLE_MAX_OBJECTIVES} objectives"
        )));
    }
    if v_ref.len() != m || k == 0 || k > n1 {
        return Err(Error::invalid("bad reference point or k"));
    }
    let alpha = alpha_weights(n1, k);
    let axes: Vec<Vec<f64>> = (0..m)
        .map(|c| {
            let mut v: Vec<f64> = f.column(c).iter().copied().filter(|&x| x < v_ref[c]).collect();
            v.push(v_ref[c]);
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        })
        .collect();
    let mut fitness = Array1::zeros(n1);
    let mut second = Array1::zeros(n1);
    let dims: Vec<usize> = axes.iter().map(|a| a.len() - 1).collect();
    let cells: usize = dims.iter().product();
    let mut corner = vec![0.0; m];
    for cell in 0..cells {
        let mut rem = cell;
        let mut vol = 1.0;
        for c in 0..m {
            let idx = rem % dims[c];
            rem /= dims[c];
            corner[c] = axes[c][idx];
            vol *= axes[c][idx + 1] - axes[c][idx];
        }
        let dom: Vec<usize> = (0..n1).filter(|&i| (0..m).all(|c| f[[i, c]] <= corner[c])).collect();
        if dom.is_empty() || dom.len() > k {
            continue;
        }
        let a = alpha[dom.len() - 1];
        for &i in &dom {
            fitness[i] += a * vol;
            second[i] += a * a * vol;
        }
    }
    Ok(ExactHype { fitness, second_moment: second })
}

/// Columnwise max plus 10% of the range (0.1 where the range is zero).
pub fn default_reference(f: ArrayView2<'_, f64>) -> Array1<f64> {
    let hi = col_max(f);
    let lo = col_min(f);
    ndarray::Zip::from(&hi)
        .and(&lo)
        .map_collect(|&h, &l| if h > l { h + 0.1 * (h - l) } else { h + 0.1 })
}

/// Indices of the `n` survivors, in `(rank, −contribution)` order.
pub fn select_indices(f: ArrayView2<'_, f64>, v_ref: ArrayView1<'_, f64>, n: usize, s: usize, rng: &RngStream) -> Result<Vec<usize>> {
    let rr = rank_assign(f, n)?;
    let through_last = rr.ranks.iter().filter(|&&r| r <= rr.last).count();
    let k = through_last - n;
    let d: Vec<f64> = if k == 0 {
        vec![0.0; f.nrows()]
    } else {
        let params = HvEstimateParams { v_ref: v_ref.to_owned(), k, s };
        hv_estimate(f, &params, rng)?.to_vec()
    };
    let neg_d: Vec<f64> = d
        .iter()
        .zip(&rr.ranks)
        .map(|(&v, &r)| if r <= rr.last { -v } else { SENTINEL })
        .collect();
    let mut order = lexsort(&rr.ranks, &neg_d)?;
    order.truncate(n);
    Ok(order)
}

pub fn environmental_selection(
    x: ArrayView2<'_, f64>,
    f: ArrayView2<'_, f64>,
    v_ref: ArrayView1<'_, f64>,
    n: usize,
    s: usize,
    rng: &RngStream,
) -> Result<(Array2<f64>, Array2<f64>)> {
    if x.nrows() != f.nrows() {
        return Err(Error::shape(&[f.nrows()], &[x.nrows()]));
    }
    let idx = select_indices(f, v_ref, n, s, rng)?;
    Ok((x.select(Axis(0), &idx), f.select(Axis(0), &idx)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn alpha_basics() {
        let a = alpha_weights(5, 3);
        assert_eq!(a[0], 1.0);
        assert!(a.iter().all(|&v| v >= 0.0));
        assert_eq!(&a[3..], &[0.0, 0.0]);
        // α_2 = (k−1)/(n1−1)/2
        assert_abs_diff_eq!(a[1], 2.0 / 4.0 / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a[2], (2.0 / 4.0) * (1.0 / 3.0) / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn single_point_is_exact_box_volume() {
        let p = HvEstimateParams { v_ref: array![1.0, 1.0], k: 1, s: 10_000 };
        let v = hv_estimate(array![[0.0, 0.0]].view(), &p, &RngStream::new(1)).unwrap();
        assert_abs_diff_eq!(v[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_box_is_zero() {
        let p = HvEstimateParams { v_ref: array![1.0, 1.0], k: 1, s: 100 };
        let v = hv_estimate(array![[1.0, 1.0]].view(), &p, &RngStream::new(1)).unwrap();
        assert_eq!(v[0], 0.0);
    }

    #[test]
    fn param_validation() {
        let f = array![[0.0, 0.0]];
        let bad = |k, s| HvEstimateParams { v_ref: array![1.0, 1.0], k, s };
        assert!(hv_estimate(f.view(), &bad(0, 10), &RngStream::new(0)).is_err());
        assert!(hv_estimate(f.view(), &bad(2, 10), &RngStream::new(0)).is_err());
        assert!(hv_estimate(f.view(), &bad(1, 0), &RngStream::new(0)).is_err());
    }

    #[test]
    fn oracle_one_and_two_points() {
        let e = exact_hype_fitness_oracle(array![[0.25, 0.5]].view(), array![1.0, 1.0].view(), 1).unwrap();
        assert_abs_diff_eq!(e.fitness[0], 0.375, epsilon = 1e-15);

        // exclusive areas 0.25 each, shared 0.25 weighted by α_2 = 1/2
        let f = array![[0.0, 0.5], [0.5, 0.0]];
        let e = exact_hype_fitness_oracle(f.view(), array![1.0, 1.0].view(), 2).unwrap();
        assert_abs_diff_eq!(e.fitness[0], 0.25 + 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(e.fitness[1], 0.25 + 0.125, epsilon = 1e-15);
        let e1 = exact_hype_fitness_oracle(f.view(), array![1.0, 1.0].view(), 1).unwrap();
        assert_abs_diff_eq!(e1.fitness[0], 0.25, epsilon = 1e-15);
    }

    #[test]
    fn oracle_size_limits() {
        let big = Array2::zeros((9, 2));
        assert!(exact_hype_fitness_oracle(big.view(), array![1.0, 1.0].view(), 1).is_err());
        let wide = Array2::zeros((2, 4));
        assert!(exact_hype_fitness_oracle(wide.view(), Array1::ones(4).view(), 1).is_err());
    }

    /// Midpoint integration on a grid aligned with the point coordinates.
    fn grid_integral(f: ArrayView2<f64>, k: usize, per_axis: usize) -> Array1<f64> {
        let (n1, m) = f.dim();
        let alpha = alpha_weights(n1, k);
        let h = 1.0 / per_axis as f64;
        let cells = per_axis.pow(m as u32);
        let mut out = Array1::zeros(n1);
        for cell in 0..cells {
            let mut rem = cell;
            let x: Vec<f64> = (0..m)
                .map(|_| {
                    let i = rem % per_axis;
                    rem /= per_axis;
                    (i as f64 + 0.5) * h
                })
                .collect();
            let dom: Vec<usize> = (0..n1).filter(|&i| (0..m).all(|c| f[[i, c]] <= x[c])).collect();
            if !dom.is_empty() && dom.len() <= k {
                for &i in &dom {
                    out[i] += alpha[dom.len() - 1] * h.powi(m as i32);
                }
            }
        }
        out
    }

    #[test]
    fn oracle_matches_grid_integration() {
        for seed in 0..10 {
            let s = RngStream::new(seed);
            let m = 2 + (seed as usize % 2);
            let per_axis = if m == 2 { 1000 } else { 100 };
            let n1 = 2 + s.indices(1, 4)[0];
            // coordinates on the integration grid so the midpoint rule is exact
            let f = s.child(1).uniform_matrix(n1, m).mapv(|v| (v * 0.9 * per_axis as f64).floor() / per_axis as f64);
            let k = 1 + s.child(2).indices(1, n1)[0];
            let e = exact_hype_fitness_oracle(f.view(), Array1::ones(m).view(), k).unwrap();
            let g = grid_integral(f.view(), k, per_axis);
            for i in 0..n1 {
                assert!((e.fitness[i] - g[i]).abs() <= 1e-3 * g[i].max(1e-12), "{} vs {}", e.fitness[i], g[i]);
            }
        }
    }

    #[test]
    fn estimate_within_three_standard_errors() {
        let mut misses = 0;
        let mut checks = 0;
        for seed in 0..15 {
            let s = RngStream::new(100 + seed);
            let n1 = 2 + s.indices(1, 5)[0];
            let m = 2 + (seed as usize % 2);
            let f = s.child(0).uniform_matrix(n1, m);
            let v_ref = Array1::from_elem(m, 1.2);
            let p = HvEstimateParams { v_ref: v_ref.clone(), k: n1, s: 200_000 };
            let est = hv_estimate(f.view(), &p, &s.child(1)).unwrap();
            let ex = exact_hype_fitness_oracle(f.view(), v_ref.view(), n1).unwrap();
            let (_, vol) = sampling_box(f.view(), v_ref.view()).unwrap();
            for i in 0..n1 {
                let mean = ex.fitness[i] / vol;
                let var = ex.second_moment[i] / vol - mean * mean;
                let se = vol * (var.max(0.0) / p.s as f64).sqrt();
                checks += 1;
                if (est[i] - ex.fitness[i]).abs() > 3.0 * se {
                    misses += 1;
                }
            }
        }
        assert!(misses * 50 <= checks, "{misses}/{checks} outside 3 SE");
    }

    #[test]
    fn estimates_bounded_by_box() {
        let s = RngStream::new(3);
        let f = s.uniform_matrix(6, 3);
        let v_ref = array![1.1, 1.1, 1.1];
        let est = hv_estimate(f.view(), &HvEstimateParams { v_ref: v_ref.clone(), k: 3, s: 5000 }, &s.child(1)).unwrap();
        let (_, vol) = sampling_box(f.view(), v_ref.view()).unwrap();
        assert!(est.iter().all(|&v| (0.0..=vol).contains(&v)));
    }

    #[test]
    fn exclusive_contributions_unbiased() {
        let f = array![[0.1, 0.7], [0.4, 0.4], [0.8, 0.05]];
        let v_ref = array![1.0, 1.0];
        let ex = exact_hype_fitness_oracle(f.view(), v_ref.view(), 1).unwrap();
        let (_, vol) = sampling_box(f.view(), v_ref.view()).unwrap();
        let s = 2000;
        let streams = 50;
        let mut sum = Array1::zeros(3);
        for r in 0..streams {
            let p = HvEstimateParams { v_ref: v_ref.clone(), k: 1, s };
            sum += &hv_estimate(f.view(), &p, &RngStream::new(77).child(r)).unwrap();
        }
        let mean = sum / streams as f64;
        for i in 0..3 {
            let mu = ex.fitness[i] / vol;
            let sigma = vol * ((ex.second_moment[i] / vol - mu * mu) / s as f64).sqrt();
            assert!((mean[i] - ex.fitness[i]).abs() <= 3.0 * sigma / (streams as f64).sqrt());
        }
    }

    #[test]
    fn doubling_samples_shrinks_spread() {
        let f = array![[0.1, 0.7], [0.4, 0.4], [0.8, 0.05]];
        let v_ref = array![1.0, 1.0];
        let sd = |s: usize, label: &str| {
            let vals: Vec<f64> = (0..30)
                .map(|r| {
                    let p = HvEstimateParams { v_ref: v_ref.clone(), k: 2, s };
                    hv_estimate(f.view(), &p, &RngStream::new(5).named(label).child(r)).unwrap()[1]
                })
                .collect();
            let mean = vals.iter().sum::<f64>() / 30.0;
            (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 29.0).sqrt()
        };
        let ratio = sd(8000, "double") / sd(4000, "base");
        assert!((0.6..=0.82).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn drops_smallest_contribution() {
        let f = array![[0.0, 1.0], [0.45, 0.5], [0.6, 0.3], [1.0, 0.0]];
        let v_ref = array![1.1, 1.1];
        let idx = select_indices(f.view(), v_ref.view(), 3, 20_000, &RngStream::new(2)).unwrap();
        let ex = exact_hype_fitness_oracle(f.view(), v_ref.view(), 1).unwrap();
        let worst = (0..4).min_by(|&a, &b| ex.fitness[a].total_cmp(&ex.fitness[b])).unwrap();
        assert_eq!(idx.len(), 3);
        assert!(!idx.contains(&worst));
    }

    #[test]
    fn exact_front_zero_is_kept() {
        let f = array![[0.0, 1.0], [1.0, 0.0], [2.0, 2.0], [3.0, 3.0]];
        let idx = select_indices(f.view(), array![4.0, 4.0].view(), 2, 100, &RngStream::new(0)).unwrap();
        assert_eq!(idx, vec![0, 1]);
    }

    #[test]
    fn selection_agrees_with_exact_fitness() {
        let mut agree = 0;
        for t in 0..200u64 {
            let s = RngStream::new(900 + t);
            let m = 2 + (t as usize % 2);
            let rows = 4 + s.indices(1, 3)[0];
            let f = s.child(0).uniform_matrix(rows, m);
            let n = rows - 1 - s.child(1).indices(1, 2)[0];
            let v_ref = default_reference(f.view());
            let got = select_indices(f.view(), v_ref.view(), n, 100_000, &s.child(2)).unwrap();

            let rr = rank_assign(f.view(), n).unwrap();
            let k = rr.ranks.iter().filter(|&&r| r <= rr.last).count() - n;
            let d: Vec<f64> = if k == 0 {
                vec![0.0; rows]
            } else {
                exact_hype_fitness_oracle(f.view(), v_ref.view(), k).unwrap().fitness.to_vec()
            };
            let mut order: Vec<usize> = (0..rows).collect();
            let key = |i: usize| (rr.ranks[i], if rr.ranks[i] <= rr.last { -d[i] } else { f64::MAX });
            order.sort_by(|&a, &b| {
                let (ka, kb) = (key(a), key(b));
                ka.0.cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
            });
            let mut want = order[..n].to_vec();
            let mut have = got.clone();
            want.sort();
            have.sort();
            if want == have {
                agree += 1;
            }
        }
        assert!(agree >= 190, "{agree}/200");
    }
}
