//! Whole-population mating, simulated binary crossover and polynomial mutation.
//!
//! Each operator has a `*_with_draws` form that takes its uniform draws as an
//! explicit tensor, and a convenience form that pulls them from an
//! [`RngStream`]. The explicit form is what the identity tests drive.

use ndarray::{concatenate, Array1, Array2, ArrayView2, Axis, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::tensor::{heaviside, Mask};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationParams {
    pub eta_c: f64,
    pub eta_m: f64,
    /// Per-gene mutation probability; `None` means `1/d`.
    pub p_m: Option<f64>,
    /// Swap each child gene pair with probability 0.5 after crossover.
    pub swap_genes: bool,
    pub lower: Array1<f64>,
    pub upper: Array1<f64>,
}

impl VariationParams {
    pub fn new(lower: Array1<f64>, upper: Array1<f64>) -> Result<Self> {
        let p = Self {
            eta_c: 20.0,
            eta_m: 20.0,
            p_m: None,
            swap_genes: false,
            lower,
            upper,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta_c > 0.0 && self.eta_m > 0.0) {
            return Err(Error::invalid("distribution indices must be positive"));
        }
        if let Some(pm) = self.p_m {
            if !(0.0..=1.0).contains(&pm) {
                return Err(Error::invalid(format!("mutation probability {pm} outside [0, 1]")));
            }
        }
        if self.lower.len() != self.upper.len() {
            return Err(Error::shape(&[self.lower.len()], &[self.upper.len()]));
        }
        if self.lower.iter().zip(&self.upper).any(|(l, u)| !(l < u)) {
            return Err(Error::invalid("lower bound must be below upper bound in every gene"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn mutation_probability(&self) -> f64 {
        self.p_m.unwrap_or(1.0 / self.dim() as f64)
    }

    fn clip(&self, x: &mut Array2<f64>) {
        for mut row in x.rows_mut() {
            Zip::from(&mut row)
                .and(&self.lower)
                .and(&self.upper)
                .for_each(|v, &l, &u| *v = v.clamp(l, u));
        }
    }

    fn check_width(&self, x: ArrayView2<'_, f64>) -> Result<()> {
        if x.ncols() != self.dim() {
            return Err(Error::shape(&[x.nrows(), self.dim()], x.shape()));
        }
        Ok(())
    }
}

/// Random pairing: a uniform permutation of `0..n` split into two halves of `⌊n/2⌋`.
pub fn pair_parents(rng: &RngStream, n: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 2 {
        return Err(Error::invalid("pairing needs at least two individuals"));
    }
    let perm = rng.permutation(n);
    let half = n / 2;
    Ok((perm[..half].to_vec(), perm[half..2 * half].to_vec()))
}

/// Spread factors `B` from uniform draws `M`.
pub fn spread_factors(draws: &Array2<f64>, eta_c: f64) -> Array2<f64> {
    let e = 1.0 / (eta_c + 1.0);
    let low = heaviside(&draws.mapv(|mu| 0.5 - mu));
    Zip::from(draws).and(&low).map_collect(|&mu, &is_low| {
        if is_low {
            (2.0 * mu).powf(e)
        } else {
            (1.0 / (2.0 - 2.0 * mu)).powf(e)
        }
    })
}

/// SBX with explicit draws; returns `[C1; C2]` clipped to bounds.
pub fn sbx_with_draws(
    x1: ArrayView2<'_, f64>,
    x2: ArrayView2<'_, f64>,
    draws: &Array2<f64>,
    swap: Option<&Mask<ndarray::Ix2>>,
    params: &VariationParams,
) -> Result<Array2<f64>> {
    if x1.shape() != x2.shape() || x1.shape() != draws.shape() {
        return Err(Error::shape(x1.shape(), x2.shape()));
    }
    params.check_width(x1)?;
    let b = spread_factors(draws, params.eta_c);
    let mut c1 = Zip::from(&b)
        .and(&x1)
        .and(&x2)
        .map_collect(|&b, &p, &q| ((1.0 + b) * p + (1.0 - b) * q) / 2.0);
    let mut c2 = Zip::from(&b)
        .and(&x1)
        .and(&x2)
        .map_collect(|&b, &p, &q| ((1.0 - b) * p + (1.0 + b) * q) / 2.0);
    if let Some(mask) = swap {
        if mask.shape() != c1.shape() {
            return Err(Error::shape(c1.shape(), mask.shape()));
        }
        Zip::from(&mut c1)
            .and(&mut c2)
            .and(mask)
            .for_each(|a, b, &s| {
                if s {
                    std::mem::swap(a, b);
                }
            });
    }
    let mut out = concatenate(Axis(0), &[c1.view(), c2.view()]).map_err(|e| Error::Internal(e.to_string()))?;
    params.clip(&mut out);
    Ok(out)
}

/// SBX on paired parent blocks.
pub fn sbx(
    rng: &RngStream,
    x1: ArrayView2<'_, f64>,
    x2: ArrayView2<'_, f64>,
    params: &VariationParams,
) -> Result<Array2<f64>> {
    let (h, d) = x1.dim();
    let draws = rng.child(0).uniform_matrix(h, d);
    let swap = params
        .swap_genes
        .then(|| rng.child(1).uniform_matrix(h, d).mapv(|u| u < 0.5));
    sbx_with_draws(x1, x2, &draws, swap.as_ref(), params)
}

/// Mutation step sizes `Δ̄` for genes `xc` and draws `M`.
pub fn mutation_steps(xc: ArrayView2<'_, f64>, draws: &Array2<f64>, params: &VariationParams) -> Array2<f64> {
    let eta = params.eta_m + 1.0;
    let inv = 1.0 / eta;
    let mut out = Array2::zeros(xc.raw_dim());
    for ((i, j), slot) in out.indexed_iter_mut() {
        let (l, u) = (params.lower[j], params.upper[j]);
        let x = xc[[i, j]];
        let mu = draws[[i, j]];
        let span = u - l;
        *slot = if 0.5 - mu >= 0.0 {
            let d1 = (x - l) / span;
            (2.0 * mu + (1.0 - 2.0 * mu) * (1.0 - d1).powf(eta)).powf(inv) - 1.0
        } else {
            let d2 = (u - x) / span;
            1.0 - (2.0 - 2.0 * mu + (2.0 * mu - 1.0) * (1.0 - d2).powf(eta)).powf(inv)
        };
    }
    out
}

/// Polynomial mutation with explicit draws and gene mask.
pub fn polynomial_mutation_with_draws(
    xc: ArrayView2<'_, f64>,
    draws: &Array2<f64>,
    mutate: &Mask<ndarray::Ix2>,
    params: &VariationParams,
) -> Result<Array2<f64>> {
    params.check_width(xc)?;
    if draws.shape() != xc.shape() || mutate.shape() != xc.shape() {
        return Err(Error::shape(xc.shape(), draws.shape()));
    }
    let steps = mutation_steps(xc, draws, params);
    let span = &params.upper - &params.lower;
    let mut out = xc.to_owned();
    for ((i, j), v) in out.indexed_iter_mut() {
        if mutate[[i, j]] {
            *v += steps[[i, j]] * span[j];
        }
    }
    params.clip(&mut out);
    Ok(out)
}

pub fn polynomial_mutation(
    rng: &RngStream,
    xc: ArrayView2<'_, f64>,
    params: &VariationParams,
) -> Result<Array2<f64>> {
    let (n, d) = xc.dim();
    let pm = params.mutation_probability();
    let mask = rng.child(0).uniform_matrix(n, d).mapv(|u| u < pm);
    let draws = rng.child(1).uniform_matrix(n, d);
    polynomial_mutation_with_draws(xc, &draws, &mask, params)
}

/// `count` offspring from random pairs of `x` via SBX then polynomial mutation.
///
/// Parents are consumed from successive random permutations, so with
/// `count == x.nrows()` and even `n` this is exactly one [`pair_parents`] draw.
pub fn reproduce(
    rng: &RngStream,
    x: ArrayView2<'_, f64>,
    count: usize,
    params: &VariationParams,
) -> Result<Array2<f64>> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::invalid("reproduction needs at least two parents"));
    }
    let pairs = count.div_ceil(2);
    let mut idx1 = Vec::with_capacity(pairs);
    let mut idx2 = Vec::with_capacity(pairs);
    let mut round = 0u64;
    while idx1.len() < pairs {
        let (a, b) = pair_parents(&rng.child(0).child(round), n)?;
        for (p, q) in a.into_iter().zip(b) {
            if idx1.len() < pairs {
                idx1.push(p);
                idx2.push(q);
            }
        }
        round += 1;
    }
    let x1 = x.select(Axis(0), &idx1);
    let x2 = x.select(Axis(0), &idx2);
    let children = sbx(&rng.child(1), x1.view(), x2.view(), params)?;
    let children = children.slice(ndarray::s![..count, ..]).to_owned();
    polynomial_mutation(&rng.child(2), children.view(), params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn unit_params(d: usize) -> VariationParams {
        VariationParams::new(Array1::zeros(d), Array1::ones(d)).unwrap()
    }

    #[test]
    fn pairing_examples() {
        let (a, b) = pair_parents(&RngStream::new(1), 2).unwrap();
        assert_eq!(a.len(), 1);
        let mut all = vec![a[0], b[0]];
        all.sort_unstable();
        assert_eq!(all, vec![0, 1]);

        let (a, b) = pair_parents(&RngStream::new(2), 10).unwrap();
        let mut all: Vec<usize> = a.into_iter().chain(b).collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());

        assert!(pair_parents(&RngStream::new(0), 1).is_err());
    }

    #[test]
    fn pairing_is_uniform() {
        let n = 10;
        let trials = 10_000;
        let mut hits = vec![0usize; n];
        let root = RngStream::new(77);
        for t in 0..trials {
            let (a, _) = pair_parents(&root.child(t), n).unwrap();
            for i in a {
                hits[i] += 1;
            }
        }
        // Bernoulli(1/2) count over 1e4 trials: sd = 50
        for h in hits {
            assert!((h as f64 - 5000.0).abs() <= 150.0, "{h}");
        }
    }

    #[test]
    fn sbx_half_draws_return_parents() {
        let p = unit_params(3);
        let x1 = array![[0.1, 0.7, 0.3], [0.9, 0.2, 0.55]];
        let x2 = array![[0.6, 0.4, 0.8], [0.05, 0.95, 0.5]];
        let draws = Array2::from_elem((2, 3), 0.5);
        let c = sbx_with_draws(x1.view(), x2.view(), &draws, None, &p).unwrap();
        assert_eq!(c.slice(ndarray::s![..2, ..]), x1);
        assert_eq!(c.slice(ndarray::s![2.., ..]), x2);
    }

    #[test]
    fn sbx_preserves_gene_sums_before_clipping() {
        let p = VariationParams::new(Array1::from_elem(4, -100.0), Array1::from_elem(4, 100.0)).unwrap();
        let s = RngStream::new(5);
        let x1 = s.child(0).uniform_matrix(20, 4);
        let x2 = s.child(1).uniform_matrix(20, 4);
        let draws = s.child(2).uniform_matrix(20, 4);
        let c = sbx_with_draws(x1.view(), x2.view(), &draws, None, &p).unwrap();
        for i in 0..20 {
            for j in 0..4 {
                assert_abs_diff_eq!(c[[i, j]] + c[[i + 20, j]], x1[[i, j]] + x2[[i, j]], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn sbx_identical_parents() {
        let p = unit_params(5);
        let x = RngStream::new(6).uniform_matrix(8, 5);
        let c = sbx(&RngStream::new(7), x.view(), x.view(), &p).unwrap();
        for i in 0..8 {
            for j in 0..5 {
                assert_abs_diff_eq!(c[[i, j]], x[[i, j]], epsilon = 1e-15);
                assert_abs_diff_eq!(c[[i + 8, j]], x[[i, j]], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn sbx_shape_mismatch() {
        let p = unit_params(2);
        let a = Array2::zeros((2, 2));
        let b = Array2::zeros((3, 2));
        assert!(sbx(&RngStream::new(0), a.view(), b.view(), &p).is_err());
    }

    /// CDF of the spread factor implied by inverting uniform draws.
    fn beta_cdf(b: f64, eta: f64) -> f64 {
        if b <= 1.0 {
            0.5 * b.powf(eta + 1.0)
        } else {
            1.0 - 0.5 / b.powf(eta + 1.0)
        }
    }

    #[test]
    fn spread_factor_distribution_matches_cdf() {
        let n = 100_000;
        let draws = RngStream::new(31).uniform_matrix(n, 1);
        let mut b: Vec<f64> = spread_factors(&draws, 20.0).iter().copied().collect();
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let ks = b
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let f = beta_cdf(v, 20.0);
                (f - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        // KS critical value at alpha = 0.001
        assert!(ks < 1.95 / (n as f64).sqrt(), "ks {ks}");
    }

    #[test]
    fn mutation_half_draws_identity() {
        let p = unit_params(4);
        let x = RngStream::new(8).uniform_matrix(6, 4);
        let draws = Array2::from_elem((6, 4), 0.5);
        let mask = Array2::from_elem((6, 4), true);
        let y = polynomial_mutation_with_draws(x.view(), &draws, &mask, &p).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn mutation_at_lower_bound_stays_in_bounds() {
        let p = unit_params(1);
        for mu in [0.0, 0.1, 0.3, 0.5] {
            let x = array![[0.0]];
            let y = polynomial_mutation_with_draws(x.view(), &array![[mu]], &array![[true]], &p).unwrap();
            assert_eq!(y[[0, 0]], 0.0);
        }
        // at the upper bound the low branch moves the gene down
        let y = polynomial_mutation_with_draws(array![[1.0]].view(), &array![[0.1]], &array![[true]], &p).unwrap();
        assert!(y[[0, 0]] < 1.0);
    }

    #[test]
    fn larger_eta_means_smaller_steps() {
        let mean_step = |eta: f64| {
            let mut p = unit_params(10);
            p.eta_m = eta;
            p.p_m = Some(1.0);
            let x = RngStream::new(12).uniform_matrix(1000, 10);
            let y = polynomial_mutation(&RngStream::new(13), x.view(), &p).unwrap();
            (&y - &x).mapv(f64::abs).mean().unwrap()
        };
        assert!(mean_step(100.0) < mean_step(20.0));
    }

    #[test]
    fn offspring_respect_bounds_and_are_deterministic() {
        let p = VariationParams::new(array![-1.0, 0.0, 2.0], array![1.0, 0.5, 3.0]).unwrap();
        let x = RngStream::new(2).uniform_in_box(15, &[-1.0, 0.0, 2.0], &[1.0, 0.5, 3.0]);
        let a = reproduce(&RngStream::new(3), x.view(), 15, &p).unwrap();
        let b = reproduce(&RngStream::new(3), x.view(), 15, &p).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.nrows(), 15);
        for row in a.rows() {
            for j in 0..3 {
                assert!(row[j] >= p.lower[j] && row[j] <= p.upper[j]);
            }
        }
    }

    #[test]
    fn params_validation() {
        assert!(VariationParams::new(array![0.0, 1.0], array![1.0, 1.0]).is_err());
        let mut p = unit_params(2);
        p.p_m = Some(1.5);
        assert!(p.validate().is_err());
        p.p_m = None;
        p.eta_c = 0.0;
        assert!(p.validate().is_err());
    }
}
