//! NSGA-III on DTLZ2 written directly against the selection primitives.

use ndarray::{concatenate, Axis};
use temo::indicators::igd;
use temo::nsga3::{associate, environmental_selection, normalize};
use temo::problems::{Dtlz, ProblemSpec};
use temo::reference::das_dennis;
use temo::variation::{reproduce, VariationParams};
use temo::RngStream;

fn main() -> temo::Result<()> {
    let p = ProblemSpec::new(Dtlz::Dtlz2, 12, 3)?;
    let refs = das_dennis(3, 12)?;
    let n = refs.len();
    let mut var = VariationParams::new(p.lower(), p.upper())?;
    var.swap_genes = true;
    let front = p.true_front(1000)?;
    let rng = RngStream::new(2024);

    let mut x = rng.child(0).uniform_in_box(n, p.lower().as_slice().unwrap(), p.upper().as_slice().unwrap());
    let mut f = p.evaluate(x.view())?;
    for gen in 1..=200u64 {
        let g = rng.child(1).child(gen);
        let o = reproduce(&g.child(0), x.view(), n, &var)?;
        let fo = p.evaluate(o.view())?;
        let xm = concatenate(Axis(0), &[x.view(), o.view()]).unwrap();
        let fm = concatenate(Axis(0), &[f.view(), fo.view()]).unwrap();
        (x, f) = environmental_selection(xm.view(), fm.view(), refs.weights(), n, &g.child(1))?;
        if gen % 50 == 0 {
            println!("generation {gen:3}  IGD {:.4}", igd(f.view(), front.view())?);
        }
    }

    let norm = normalize(f.view())?;
    let assoc = associate(norm.values.view(), refs.weights())?;
    let mut used = assoc.nearest.clone();
    used.sort_unstable();
    used.dedup();
    println!("intercepts {:.3?}; {} of {} directions occupied", norm.intercepts.to_vec(), used.len(), n);
    Ok(())
}
