//! Array-parallel selection against the loop-based baselines.

use temo::harness::{run, RunConfig};

fn main() -> temo::Result<()> {
    for alg in ["nsga3", "moead"] {
        for sequential in [false, true] {
            let cfg = RunConfig::default()
                .set("algorithm", alg)?
                .set("problem", "dtlz1")?
                .set("dim", "7")?
                .set("generations", "150")?
                .set("repeats", "3")?
                .set("swap_genes", "true")?
                .set("sequential", if sequential { "true" } else { "false" })?
                .set("indicators", "igd")?;
            let recs = run(&cfg)?;
            let igds: Vec<String> = recs.iter().map(|r| format!("{:.4}", r.summary.final_igd.unwrap())).collect();
            let ms = recs.iter().map(|r| r.summary.mean_selection_s).sum::<f64>() / recs.len() as f64 * 1e3;
            println!("{alg:6} {:10} IGD {}  selection {ms:.3} ms", if sequential { "sequential" } else { "batched" }, igds.join(" "));
        }
    }
    Ok(())
}
