//! Monte-Carlo HypE fitness against the exact value, then one selection.

use ndarray::array;
use temo::hype::{exact_hype_fitness_oracle, hv_estimate, select_indices, HvEstimateParams};
use temo::RngStream;

fn main() -> temo::Result<()> {
    let f = array![[0.1, 0.9], [0.3, 0.5], [0.45, 0.45], [0.7, 0.2], [0.95, 0.05]];
    let v_ref = array![1.1, 1.1];
    let k = 2;
    let exact = exact_hype_fitness_oracle(f.view(), v_ref.view(), k)?;
    for s in [1_000, 10_000, 100_000, 1_000_000] {
        let params = HvEstimateParams { v_ref: v_ref.clone(), k, s };
        let est = hv_estimate(f.view(), &params, &RngStream::new(s as u64))?;
        let err = (&est - &exact.fitness).mapv(f64::abs).fold(0.0f64, |a, &b| a.max(b));
        println!("s = {s:>9}  estimate {:.4?}  max error {err:.2e}", est.to_vec());
    }
    println!("exact              {:.4?}", exact.fitness.to_vec());

    let keep = select_indices(f.view(), v_ref.view(), 3, 100_000, &RngStream::new(5))?;
    println!("keeping 3 of 5: {keep:?}");
    Ok(())
}
