//! RVEA's angle-penalized selection driving a run on DTLZ2.

use ndarray::{concatenate, Axis};
use temo::indicators::igd;
use temo::problems::{Dtlz, ProblemSpec};
use temo::reference::das_dennis;
use temo::rvea::{apd_select, ApdParams, DEFAULT_ALPHA};
use temo::variation::{reproduce, VariationParams};
use temo::RngStream;

fn main() -> temo::Result<()> {
    let p = ProblemSpec::new(Dtlz::Dtlz2, 12, 3)?;
    let v = das_dennis(3, 12)?.to_unit_norm();
    let mut var = VariationParams::new(p.lower(), p.upper())?;
    var.swap_genes = true;
    let front = p.true_front(1000)?;
    let rng = RngStream::new(4);
    let t_max = 200;

    let mut x = rng.child(0).uniform_in_box(v.len(), p.lower().as_slice().unwrap(), p.upper().as_slice().unwrap());
    let mut f = p.evaluate(x.view())?;
    for t in 1..=t_max {
        let g = rng.child(1).child(t as u64);
        let o = reproduce(&g, x.view(), v.len(), &var)?;
        let fo = p.evaluate(o.view())?;
        let xm = concatenate(Axis(0), &[x.view(), o.view()]).unwrap();
        let fm = concatenate(Axis(0), &[f.view(), fo.view()]).unwrap();
        (x, f) = apd_select(xm.view(), fm.view(), &v, &ApdParams { alpha: DEFAULT_ALPHA, t, t_max })?;
        if t % 50 == 0 {
            println!("generation {t:3}  {} elites  IGD {:.4}", f.nrows(), igd(f.view(), front.view())?);
        }
    }
    Ok(())
}
