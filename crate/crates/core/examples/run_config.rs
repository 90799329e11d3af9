//! Harness run from a key=value config, written as CSV and JSON.

use temo::harness::{run, write_records, RunConfig};

fn main() -> temo::Result<()> {
    let cfg = RunConfig::parse(
        "algorithm = rvea\n\
         problem = dtlz2\n\
         objectives = 3\n\
         pop_size = 91\n\
         generations = 60\n\
         repeats = 3\n\
         indicators = igd,hv\n\
         indicator_every = 20\n",
    )?
    .set("seed", "17")?;

    let records = run(&cfg)?;
    for r in &records {
        println!(
            "repeat {}  final IGD {:.4}  HV {:.4}  {:.2} ms/generation",
            r.metadata.repeat,
            r.summary.final_igd.unwrap(),
            r.summary.final_hv.unwrap(),
            1e3 * r.summary.mean_generation_s
        );
    }
    let dir = std::env::temp_dir().join("temo-run-config-example");
    for path in write_records(&records, &dir)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
