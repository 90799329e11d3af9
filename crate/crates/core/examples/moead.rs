//! MOEA/D with batched neighbourhood replacement on DTLZ1.

use temo::indicators::igd;
use temo::moead::{default_neighborhood, step, MoeadState};
use temo::problems::{Dtlz, ProblemSpec};
use temo::reference::das_dennis;
use temo::variation::VariationParams;
use temo::RngStream;

fn main() -> temo::Result<()> {
    let p = ProblemSpec::new(Dtlz::Dtlz1, 7, 3)?;
    let w = das_dennis(3, 12)?;
    let t = default_neighborhood(w.len());
    let mut var = VariationParams::new(p.lower(), p.upper())?;
    var.swap_genes = true;
    let front = p.true_front(1000)?;
    let rng = RngStream::new(11);

    let mut state = MoeadState::initialize(&p, w, t, 5.0, &rng.child(0))?;
    for gen in 1..=300u64 {
        state = step(&state, &rng.child(1).child(gen), &p, &var)?;
        if gen % 50 == 0 {
            println!("generation {gen:3}  z = {:.4?}  IGD {:.4}", state.z.to_vec(), igd(state.f1.view(), front.view())?);
        }
    }
    Ok(())
}
