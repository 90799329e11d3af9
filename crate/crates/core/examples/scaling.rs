//! Population and dimension sweeps with selection-only timing.

use temo::harness::{scaling_experiment, RunConfig, ScaleKind};

fn main() -> temo::Result<()> {
    let base = RunConfig::default()
        .set("problem", "dtlz1")?
        .set("generations", "5")?
        .set("time_selection_only", "true")?;

    let pop = scaling_experiment(ScaleKind::Population, &base, 64, 5)?;
    print!("{}", pop.to_csv_string());

    let dim = scaling_experiment(ScaleKind::Dimension, &base.set("pop_size", "100")?, 256, 5)?;
    print!("{}", dim.to_csv_string());
    Ok(())
}
