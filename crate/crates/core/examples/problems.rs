//! Evaluate the DTLZ suite and sample each analytic front.

use temo::problems::{Dtlz, ProblemSpec};
use temo::RngStream;

fn main() -> temo::Result<()> {
    let rng = RngStream::new(3);
    for name in Dtlz::ALL {
        let p = ProblemSpec::with_default_dim(name, 3)?;
        let x = rng.child(name as u64).uniform_in_box(4, p.lower().as_slice().unwrap(), p.upper().as_slice().unwrap());
        let f = p.evaluate(x.view())?;
        let front = p.true_front(200)?;
        println!("{name}: d = {}, first row {:.3?}, {} front points", p.dim, f.row(0).to_vec(), front.nrows());
    }
    Ok(())
}
