//! Rank a random population into non-dominated fronts.

use temo::ndsort::{dominance_matrix, rank_assign};
use temo::RngStream;

fn main() -> temo::Result<()> {
    let f = RngStream::new(1).uniform_matrix(12, 2);
    let d = dominance_matrix(f.view())?;
    let ranked = rank_assign(f.view(), 6)?;

    for (i, row) in f.rows().into_iter().enumerate() {
        let beaten_by = d.column(i).iter().filter(|&&x| x).count();
        println!("{i:2}  f = ({:.3}, {:.3})  rank {}  dominated by {beaten_by}", row[0], row[1], ranked.ranks[i]);
    }
    println!("keeping 6 reaches front {} ({} rows strictly better)", ranked.last, ranked.count_better_than_last());
    Ok(())
}
