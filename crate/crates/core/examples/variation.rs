//! SBX and polynomial mutation on a whole parent block.

use ndarray::Array2;
use temo::variation::{pair_parents, polynomial_mutation, reproduce, sbx, sbx_with_draws, VariationParams};
use temo::RngStream;

fn main() -> temo::Result<()> {
    let params = VariationParams::new(ndarray::Array1::zeros(4), ndarray::Array1::ones(4))?;
    let rng = RngStream::new(9);
    let x = rng.child(0).uniform_matrix(8, 4);

    let (a, b) = pair_parents(&rng.child(1), 8)?;
    let x1 = x.select(ndarray::Axis(0), &a);
    let x2 = x.select(ndarray::Axis(0), &b);
    let children = sbx(&rng.child(2), x1.view(), x2.view(), &params)?;
    let mutated = polynomial_mutation(&rng.child(3), children.view(), &params)?;
    println!("parents {:?} x {:?} -> {} children", a, b, mutated.nrows());

    // μ = 0.5 everywhere gives β = 1: the children are the parents
    let half = Array2::from_elem(x1.raw_dim(), 0.5);
    let same = sbx_with_draws(x1.view(), x2.view(), &half, None, &params)?;
    println!("identity draws reproduce the parents: {}", same.slice(ndarray::s![..4, ..]) == x1);

    let offspring = reproduce(&rng.child(4), x.view(), 8, &params)?;
    println!("one-call reproduction: {:?}", offspring.dim());
    Ok(())
}
