//! IGD, hypervolume and expected utility of a sampled front.

use ndarray::array;
use temo::indicators::{eu, hv_indicator, igd, EuForm, Sense};
use temo::problems::{Dtlz, ProblemSpec};
use temo::reference::das_dennis;

fn main() -> temo::Result<()> {
    let p = ProblemSpec::with_default_dim(Dtlz::Dtlz2, 3)?;
    let reference_front = p.true_front(1000)?;
    let coarse = p.true_front(15)?;
    let r = array![1.1, 1.1, 1.1];
    let w = das_dennis(3, 12)?;

    for (name, f) in [("15-point front", &coarse), ("reference front", &reference_front)] {
        let hv = hv_indicator(f.view(), r.view())?;
        println!(
            "{name:16} IGD {:.4}  HV {:.4}{}  EU {:.4}",
            igd(f.view(), reference_front.view())?,
            hv.value,
            if hv.estimated { " (estimated)" } else { "" },
            eu(f.view(), &w, Sense::Minimize, EuForm::Standard)?
        );
    }
    // linear utilities on a concave front are maximized at its corners,
    // which both samples contain, so EU cannot tell them apart
    // the sphere octant dominates 1.1³ − π/6 of the box
    println!("analytic HV of the full front: {:.4}", 1.1f64.powi(3) - std::f64::consts::PI / 6.0);
    Ok(())
}
