//! Simplex-lattice reference directions and their neighbourhoods.

use temo::reference::{das_dennis, divisions_for, lattice_size, neighbors};

fn main() -> temo::Result<()> {
    for (m, h) in [(2, 4), (3, 12), (5, 6)] {
        println!("m = {m}, H = {h}: {} directions", lattice_size(m, h)?);
    }
    let h = divisions_for(3, 100)?;
    println!("largest H with at most 100 directions for m = 3: {h}");

    let w = das_dennis(3, 4)?;
    let table = neighbors(&w, 4)?;
    for j in 0..w.len() {
        println!("{j:2} {:?} -> {:?}", w.weights().row(j).to_vec(), table.row(j));
    }
    Ok(())
}
